//! Theorem-level checks: the representation formula, the L¹ estimates, the
//! Hopf lemma and its certificate, the comparison principle and the energy
//! minimizer property. Every check produces a [`VerifyReport`].

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::domain::{Domain, DomainSpec};
use crate::field::Field;
use crate::kernel::{bounded_kernels, pair_with_measure, positivity_set, KernelSet};
use crate::measure::{Density, Measure};
use crate::operator::{assemble, solve_all_levels, solve_dirichlet, solve_truncated_limit};
use crate::potential::Potential;
use crate::quadrature::{refined_integral, RefinedIntegral};
use crate::trace::{normal_derivative, trace_l1_norm};
use crate::{Error, Result, Settings};

/// Errors below this are treated as zero when computing observed orders.
pub const EXACT_FLOOR: f64 = 1e-11;

/// Slack factor (1 + 5h) applied to the L¹ bounds.
pub fn slack(h: f64) -> f64 {
    1.0 + 5.0 * h
}

/// One compared quantity. `passed` is exactly `residual <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Case {
    /// |lhs − rhs| ≤ tolerance.
    pub fn equal(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::make(label, lhs, rhs, (lhs - rhs).abs(), tolerance)
    }

    /// lhs ≤ rhs + tolerance.
    pub fn at_most(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::make(label, lhs, rhs, (lhs - rhs).max(0.0), tolerance)
    }

    /// lhs ≥ rhs − tolerance.
    pub fn at_least(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::make(label, lhs, rhs, (rhs - lhs).max(0.0), tolerance)
    }

    /// lhs > 0 strictly.
    pub fn positive(label: impl Into<String>, lhs: f64) -> Self {
        let residual = if lhs > 0.0 { 0.0 } else { 1.0 - lhs.min(0.0) };
        Self::make(label, lhs, 0.0, residual, 0.0)
    }

    /// A yes/no condition.
    pub fn flag(label: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self::make(label, v, 1.0, 1.0 - v, 0.0)
    }

    fn make(label: impl Into<String>, lhs: f64, rhs: f64, residual: f64, tolerance: f64) -> Self {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        Case {
            label: label.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

/// One row of a refinement or schedule table, in long format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub h: f64,
    pub k: Option<f64>,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ObservedOrder {
    /// Both errors are at rounding level.
    Exact,
    Rate(f64),
}

impl ObservedOrder {
    pub fn at_least(self, p: f64) -> bool {
        match self {
            ObservedOrder::Exact => true,
            ObservedOrder::Rate(r) => r >= p,
        }
    }
}

/// log(e₁/e₂) / log(h₁/h₂) between consecutive rows of (h, error).
pub fn observed_orders(rows: &[(f64, f64)]) -> Vec<ObservedOrder> {
    rows.windows(2)
        .map(|w| {
            let (h1, e1) = w[0];
            let (h2, e2) = w[1];
            if e1.abs() <= EXACT_FLOOR && e2.abs() <= EXACT_FLOOR {
                ObservedOrder::Exact
            } else if e2.abs() <= EXACT_FLOOR {
                ObservedOrder::Rate(f64::INFINITY)
            } else {
                ObservedOrder::Rate((e1.abs() / e2.abs()).ln() / (h1 / h2).ln())
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfVerdict {
    Positive,
    Obstruction,
    Inconclusive,
    NoSolutionExpected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub check: String,
    pub domain: DomainSpec,
    pub potential: String,
    pub measure: String,
    pub cases: Vec<Case>,
    pub table: Vec<TableRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(check: &str, domain: DomainSpec, potential: &Potential, measure: &Measure) -> Self {
        VerifyReport {
            check: check.to_string(),
            domain,
            potential: potential.label(),
            measure: describe_measure(measure),
            cases: Vec::new(),
            table: Vec::new(),
            verdict: None,
            notes: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, case: Case) {
        self.cases.push(case);
    }

    pub fn row(&mut self, h: f64, k: Option<f64>, quantity: &str, value: f64) {
        self.table.push(TableRow {
            h,
            k,
            quantity: quantity.to_string(),
            value,
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Recompute `passed` from the cases.
    pub fn finish(mut self) -> Self {
        self.passed = self.cases.iter().all(|c| c.passed);
        self
    }

    pub fn max_residual(&self) -> f64 {
        self.cases.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.passed)
    }

    /// CSV of the cases: label, lhs, rhs, residual, tolerance, passed.
    pub fn write_cases_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "schema=1")?;
        writeln!(out, "check,label,lhs,rhs,residual,tolerance,passed")?;
        for c in &self.cases {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e},{:.6e},{}",
                self.check, c.label, c.lhs, c.rhs, c.residual, c.tolerance, c.passed
            )?;
        }
        Ok(())
    }

    /// CSV of the table: h, k, quantity, value. An absent k is left empty.
    pub fn write_table_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "schema=1")?;
        writeln!(out, "h,k,quantity,value")?;
        for r in &self.table {
            let k = r.k.map(|k| format!("{k:.6e}")).unwrap_or_default();
            writeln!(out, "{:.12e},{k},{},{:.12e}", r.h, r.quantity, r.value)?;
        }
        Ok(())
    }
}

/// Short description of a measure for reports.
pub fn describe_measure(m: &Measure) -> String {
    let mut parts: Vec<String> = m
        .atoms
        .iter()
        .map(|a| format!("{}*delta({}, {})", a.weight, a.point[0], a.point[1]))
        .collect();
    for d in &m.densities {
        let name = match &d.rule {
            crate::measure::DensityRule::Uniform => "uniform".to_string(),
            crate::measure::DensityRule::PowerDistance { alpha } => format!("d^-{alpha}"),
            crate::measure::DensityRule::Table { .. } => "table".to_string(),
            crate::measure::DensityRule::Nodal { .. } => "nodal".to_string(),
        };
        parts.push(format!("{}*{name}", d.scale));
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// ∂u/∂n(a) against ∫ P_a dμ at each sampled boundary node.
///
/// Both sides use the bounded potential of the last schedule level on this
/// grid. Without atoms the two sides agree to solver precision; atoms are
/// paired by interpolating P_a, which differs from the deposition only in
/// the cells touching ∂Ω, so they get a first-order tolerance.
pub fn representation_check(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    samples: &[usize],
    settings: &Settings,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("representation", *domain.spec(), potential, measure);
    let v = settings.schedule.final_potential(domain, potential)?;
    let u = solve_dirichlet(domain, &v, measure, &settings.solver)?;
    let trace = normal_derivative(domain, &u.field, settings.order)?;
    let kernels = bounded_kernels(domain, &v, samples, settings)?;
    let norm = measure.total_variation(domain)?;
    let scale = norm.max(f64::MIN_POSITIVE);
    let exact = !measure.has_atoms();
    for (&a, p) in samples.iter().zip(&kernels) {
        let rhs = pair_with_measure(domain, p, measure)?;
        let tolerance = if exact {
            10.0 * settings.solver.tol * scale.max(1.0)
        } else {
            domain.h() * scale * p.max_abs().max(1.0)
        };
        report.push(Case::equal(format!("a={a}"), trace.values[a], rhs, tolerance));
    }
    let k = v.cap();
    report.row(domain.h(), k, "max_residual", report.max_residual());
    if !exact {
        report.note("atoms paired by multilinear interpolation of P_a");
    }
    if v.cap().is_some() && !potential.is_bounded() {
        report.note(format!("potential truncated at k = {}", v.cap().unwrap_or(0.0)));
    }
    Ok(report.finish())
}

/// Absorption, trace and Fatou bounds, and 0 ≤ P_a ≤ K_a over all
/// boundary nodes.
pub fn inequality_suite(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    settings: &Settings,
) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("inequality", *domain.spec(), potential, measure);
    let norm = measure.total_variation(domain)?;
    if !norm.is_finite() {
        return Err(Error::Invalid("the measure has infinite total variation".into()));
    }
    let bound = slack(domain.h());
    let limit = solve_truncated_limit(domain, potential, measure, &settings.schedule, &settings.solver)?;
    let vk = limit.potential.sample(domain)?;
    let vu: f64 = limit
        .field
        .iter()
        .zip(vk.iter())
        .zip(domain.volumes())
        .map(|((u, v), w)| (u * v).abs() * w)
        .sum();
    report.push(Case::at_most("absorption", vu, norm * bound, 0.0));

    let trace = normal_derivative(domain, &limit.field, settings.order)?;
    report.push(Case::at_most("trace_l1", trace_l1_norm(domain, &trace), 2.0 * norm * bound, 0.0));

    let all: Vec<usize> = (0..domain.boundary_len()).collect();
    let set = KernelSet::build(domain, potential, &all, settings, true)?;
    let abs = measure.abs(domain)?;
    let mut fatou = 0.0;
    for (p, b) in set.kernels.iter().zip(domain.boundary()) {
        fatou += b.weight * pair_with_measure(domain, p, &abs)?;
    }
    report.push(Case::at_most("fatou", fatou, 2.0 * norm * bound, 0.0));

    let reference = set.reference.as_ref().expect("reference kernels kept");
    let mut lowest = f64::INFINITY;
    let mut excess = f64::NEG_INFINITY;
    for (p, k) in set.kernels.iter().zip(reference) {
        for (p, k) in p.iter().zip(k.iter()) {
            lowest = lowest.min(*p);
            excess = excess.max(p - k);
        }
    }
    report.push(Case::at_least("kernel_nonnegative", lowest, 0.0, 1e-8));
    report.push(Case::at_most("kernel_below_harmonic", excess, 0.0, 1e-8));
    report.row(domain.h(), limit.potential.cap(), "absorption", vu);
    report.row(domain.h(), limit.potential.cap(), "fatou", fatou);
    if !limit.converged {
        report.note("truncation schedule did not meet its tolerance");
    }
    Ok(report.finish())
}

/// Trace extrema per schedule level and grid, with a positive or
/// obstruction verdict. `grids` are ordered coarse to fine.
pub fn hopf_check(
    grids: &[DomainSpec],
    potential: &Potential,
    measure: &Measure,
    settings: &Settings,
) -> Result<VerifyReport> {
    let first = *grids.first().ok_or_else(|| Error::Invalid("no grids given".into()))?;
    if !measure.is_nonnegative() {
        return Err(Error::Invalid("the Hopf check needs a nonnegative measure".into()));
    }
    if measure.is_zero() {
        return Err(Error::Invalid("the Hopf check needs a nonzero measure".into()));
    }
    let mut report = VerifyReport::new("hopf", *grids.last().unwrap_or(&first), potential, measure);

    let mut finals = Vec::new();
    let mut finest_levels: Vec<(f64, f64)> = Vec::new();
    for spec in grids {
        let domain = Domain::build(*spec)?;
        let g = positivity_set(&domain, potential, settings)?;
        for (index, atom) in measure.atoms.iter().enumerate() {
            let nodes = domain.deposit_weights(atom.point)?;
            if atom.weight > 0.0 && nodes.iter().all(|&(i, _)| !g.contains(i)) {
                report.note(format!("atom {index} lies outside the positivity set on h = {}", domain.h()));
                report.verdict = Some(verdict_name(HopfVerdict::NoSolutionExpected));
                return Ok(report.finish());
            }
        }
        let run = solve_all_levels(&domain, potential, measure, &settings.schedule, &settings.solver)?;
        let mut levels = Vec::with_capacity(run.steps.len());
        for step in &run.steps {
            let t = normal_derivative(&domain, &step.field, settings.order)?;
            let (lo, hi) = (t.smooth_min(&domain), t.smooth_max(&domain));
            report.row(domain.h(), Some(step.k), "min_trace", lo);
            report.row(domain.h(), Some(step.k), "max_trace", hi);
            levels.push((lo, hi));
        }
        let (lo, _) = *levels.last().expect("at least one level");
        finals.push(lo);
        finest_levels = levels;
    }
    if domain_has_corners(&first) {
        report.note("corner boundary nodes excluded");
    }

    let last = *finals.last().expect("one grid");
    let stable = if finals.len() >= 2 {
        let prev = finals[finals.len() - 2];
        prev > 0.0 && last > 0.0 && (last - prev).abs() / last < 0.2
    } else {
        last > 0.0
    };
    let maxima: Vec<f64> = finest_levels.iter().map(|l| l.1).collect();
    let changing = effective_prefix(&maxima);
    let decreasing = changing.len() >= 2 && changing.windows(2).all(|w| w[1] < w[0]);
    let decay = maxima.last().copied().unwrap_or(0.0) <= 0.1 * maxima.first().copied().unwrap_or(0.0);
    let verdict = if decreasing && decay {
        HopfVerdict::Obstruction
    } else if stable {
        HopfVerdict::Positive
    } else {
        HopfVerdict::Inconclusive
    };

    report.push(Case::at_least("min_trace_final", last, 0.0, 0.0));
    if finals.len() >= 2 {
        let prev = finals[finals.len() - 2];
        let variation = if last != 0.0 { (last - prev).abs() / last.abs() } else { f64::INFINITY };
        report.push(Case::at_most("min_trace_variation", variation, 0.2, 0.0));
    }
    report.push(Case::at_most(
        "max_trace_decay",
        *maxima.last().unwrap_or(&0.0),
        *maxima.first().unwrap_or(&0.0),
        0.0,
    ));
    // The verdict decides the report; the cases above document it.
    let decisive = matches!(verdict, HopfVerdict::Positive | HopfVerdict::Obstruction);
    report.verdict = Some(verdict_name(verdict));
    let mut report = report;
    report.cases.retain(|c| match verdict {
        HopfVerdict::Positive => c.label != "max_trace_decay",
        HopfVerdict::Obstruction => c.label == "max_trace_decay",
        _ => true,
    });
    report.push(Case::flag("verdict_decisive", decisive));
    Ok(report.finish())
}

/// The levels up to the first repeated value: beyond it the schedule no
/// longer changes the sampled potential.
fn effective_prefix(values: &[f64]) -> &[f64] {
    let end = values
        .windows(2)
        .position(|w| w[0] == w[1])
        .map_or(values.len(), |i| i + 1);
    &values[..end]
}

fn domain_has_corners(spec: &DomainSpec) -> bool {
    matches!(spec, DomainSpec::Rectangle { .. })
}

pub fn verdict_name(v: HopfVerdict) -> String {
    match v {
        HopfVerdict::Positive => "positive",
        HopfVerdict::Obstruction => "obstruction",
        HopfVerdict::Inconclusive => "inconclusive",
        HopfVerdict::NoSolutionExpected => "no solution expected",
    }
    .to_string()
}

/// Outcome of the Hopf-potential test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub certified: bool,
    pub v_theta: RefinedIntegral,
    pub min_trace: f64,
    pub weighted_l1_divergent: bool,
}

/// θ = solve(V = 0, f ≡ 1); V is certified when ∫ V θ stays finite under
/// refinement and ∂θ/∂n > 0 at every smooth boundary node.
pub fn hopf_certificate(domain: &Domain, potential: &Potential, settings: &Settings) -> Result<(VerifyReport, Certificate)> {
    let one = Measure::density(Density::uniform(1.0));
    let mut report = VerifyReport::new("hopf_certificate", *domain.spec(), potential, &one);
    let theta = solve_dirichlet(domain, &Potential::zero(), &one, &settings.solver)?;
    let t = normal_derivative(domain, &theta.field, settings.order)?;
    let min_trace = t.smooth_min(domain);
    let spec = *domain.spec();
    let v_theta = refined_integral(&spec, |p, _| {
        let th = domain.interpolate(&theta.field, p).unwrap_or(0.0);
        if th == 0.0 {
            0.0
        } else {
            potential.value(&spec, p) * th
        }
    });
    for (h, v) in v_theta.mesh.iter().zip(&v_theta.values) {
        report.row(*h, None, "v_theta", *v);
    }
    let weighted = potential.weighted_l1(domain);
    for (h, v) in weighted.integral.mesh.iter().zip(&weighted.integral.values) {
        report.row(*h, None, "weighted_l1", *v);
    }
    let certified = !v_theta.divergent && min_trace > 0.0;
    report.push(Case::flag("v_theta_finite", !v_theta.divergent));
    report.push(Case::positive("min_theta_trace", min_trace));
    report.note(format!(
        "weighted L1 test: {}",
        if weighted.divergent { "divergent" } else { "finite" }
    ));
    if let Some(c) = v_theta.contraction {
        report.note(format!("v_theta increment contraction {c:.3}"));
    }
    report.verdict = Some(if certified { "certified" } else { "not certified" }.to_string());
    let cert = Certificate {
        certified,
        v_theta,
        min_trace,
        weighted_l1_divergent: weighted.divergent,
    };
    Ok((report.finish(), cert))
}

/// H(t) = ε min(t, 1)^α.
pub fn comparison_profile(v: &[f64], alpha: f64) -> Vec<f64> {
    v.iter().map(|&t| t.clamp(0.0, 1.0).powf(alpha)).collect()
}

/// Number of bisection steps for the ε threshold.
pub const BISECTION_STEPS: usize = 20;

/// Checks v ≥ ζ_{H(v)} with H(t) = ε min(t,1)^α. Since ζ is linear in ε,
/// one limit solve with ε = 1 serves every ε of the bisection. Without an
/// explicit ε, the inequality is asserted at half the threshold.
pub fn comparison_check(
    domain: &Domain,
    potential: &Potential,
    v: &Field,
    alpha: f64,
    epsilon: Option<f64>,
    settings: &Settings,
) -> Result<(VerifyReport, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if epsilon.is_some_and(|e| !(e > 0.0)) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    if v.len() != domain.len() {
        return Err(Error::Invalid("field does not match the domain".into()));
    }
    let floor = -1e-12 * v.max_abs().max(1.0);
    if v.iter().any(|&x| x < floor) {
        return Err(Error::Invalid("v must be nonnegative".into()));
    }
    let h = Measure::nodal(comparison_profile(v, alpha));
    let mut report = VerifyReport::new("comparison", *domain.spec(), potential, &h);
    let zeta = solve_truncated_limit(domain, potential, &h, &settings.schedule, &settings.solver)?.field;

    let holds = |eps: f64| v.iter().zip(zeta.iter()).all(|(v, z)| *v >= eps * z);
    let threshold = if zeta.max() <= 0.0 {
        f64::INFINITY
    } else {
        let mut hi = 1.0;
        let mut lo = 0.0;
        let mut expansions = 0;
        while holds(hi) && expansions < 60 {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if holds(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let eps = epsilon.unwrap_or(if threshold.is_finite() { 0.5 * threshold } else { 1.0 });
    let gap = v
        .iter()
        .zip(zeta.iter())
        .map(|(v, z)| eps * z - v)
        .fold(f64::NEG_INFINITY, f64::max);
    report.push(Case::at_most("v_minus_zeta", gap, 0.0, 1e-8));
    if v.max() > 0.0 {
        report.push(Case::positive("epsilon_threshold", threshold));
    }
    report.row(domain.h(), None, "epsilon_threshold", threshold);
    report.row(domain.h(), None, "epsilon_checked", eps);
    report.note(format!("alpha = {alpha}"));
    Ok((report.finish(), threshold))
}

/// E(u) ≤ E(u + δw) for random perturbations w with entries in [−1, 1].
pub fn energy_check(
    domain: &Domain,
    potential: &Potential,
    density: &Measure,
    draws: usize,
    delta: f64,
    seed: u64,
    settings: &Settings,
) -> Result<(VerifyReport, f64)> {
    if density.has_atoms() {
        return Err(Error::Invalid("the energy check needs a density without atoms".into()));
    }
    let mut report = VerifyReport::new("energy", *domain.spec(), potential, density);
    let op = assemble(domain, potential)?;
    let f = density.density_values(domain)?;
    let u = solve_dirichlet(domain, potential, density, &settings.solver)?;
    let e0 = op.energy(&f, &u.field);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..draws {
        let z: Vec<f64> = u.field.iter().map(|x| x + delta * rng.random_range(-1.0..=1.0)).collect();
        worst = worst.min(op.energy(&f, &z) - e0);
    }
    let tol = 1e-12 * e0.abs().max(1.0);
    if draws > 0 {
        report.push(Case::at_least("energy_gap", worst, 0.0, tol));
    }
    report.row(domain.h(), None, "energy", e0);
    Ok((report.finish(), e0))
}
