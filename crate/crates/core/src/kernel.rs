//! Duality kernels P_a and harmonic kernels K_a.
//!
//! For a bounded potential the stiffness matrix S is symmetric and the trace
//! at a is a linear functional t_a·u with u = S⁻¹ M f. Hence
//!
//! ```text
//! ∂u/∂n(a) = t_a · S⁻¹ M f = Σ_i vol_i f_i (S⁻¹ t_a)_i,
//! ```
//!
//! so P_a = S⁻¹ t_a is a single solve per boundary point, and the
//! representation identity holds on the grid to solver precision. For an
//! unbounded V the kernel is the monotone limit along the truncation
//! schedule.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Domain;
use crate::field::Field;
use crate::measure::{Density, Measure};
use crate::operator::{assemble_sampled, solve_truncated_limit};
use crate::potential::Potential;
use crate::trace::trace_functional;
use crate::{Error, Result, Settings};

/// Kernels whose L¹ norm is below this fraction of ‖K_a‖₁ are degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-10;

/// Kernel levels stop once the largest nodewise decrease is below this
/// fraction of the kernel maximum.
pub const KERNEL_STOP: f64 = 1e-8;

/// Default positivity threshold for G, relative to the maximum of ζ_1.
pub const POSITIVITY_THRESHOLD: f64 = 1e-10;

struct KernelRun {
    levels: Vec<(f64, Field)>,
    converged: bool,
}

fn check_samples(domain: &Domain, samples: &[usize]) -> Result<()> {
    for &a in samples {
        if a >= domain.boundary_len() {
            return Err(crate::domain::DomainError::NotBoundaryNode {
                index: a,
                count: domain.boundary_len(),
            }
            .into());
        }
    }
    Ok(())
}

/// Run the truncation schedule for every sample point, sharing one
/// factorization per level. With `keep_all` every level is computed and
/// returned; otherwise each kernel stops once converged.
fn kernel_levels(
    domain: &Domain,
    potential: &Potential,
    samples: &[usize],
    settings: &Settings,
    keep_all: bool,
) -> Result<Vec<KernelRun>> {
    check_samples(domain, samples)?;
    let raw = potential.sample(domain)?;
    let vmax = raw.max().max(0.0);
    let n = domain.len();
    let rhs: Vec<Vec<f64>> = samples
        .iter()
        .map(|&a| {
            let mut r = vec![0.0; n];
            for (i, c) in trace_functional(domain, a, settings.order)? {
                r[i] += c;
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;

    let mut runs: Vec<KernelRun> = samples
        .iter()
        .map(|_| KernelRun {
            levels: Vec::new(),
            converged: false,
        })
        .collect();
    let mut prev_k: Option<f64> = None;
    for k in settings.schedule.thresholds() {
        if prev_k.is_some_and(|p| p >= vmax) {
            for run in &mut runs {
                let last = run.levels.last().expect("previous level").1.clone();
                run.levels.push((k, last));
                run.converged = true;
            }
            if keep_all {
                continue;
            }
            break;
        }
        prev_k = Some(k);
        let op = assemble_sampled(domain, raw.iter().map(|&v| v.min(k)).collect());
        let fac = op.factor(&settings.solver)?;
        let solved: Vec<Option<Result<Field>>> = runs
            .par_iter()
            .zip(&rhs)
            .map(|(run, r)| {
                if run.converged && !keep_all {
                    return None;
                }
                let guess = run.levels.last().map(|l| l.1.to_vec());
                Some(
                    fac.solve_rhs(r, guess.as_deref())
                        .map(|(x, _)| Field::new(x))
                        .map_err(Error::from),
                )
            })
            .collect();
        for (run, new) in runs.iter_mut().zip(solved) {
            let Some(new) = new else { continue };
            let new = new?;
            if let Some((_, old)) = run.levels.last() {
                let decrease = old.iter().zip(new.iter()).fold(0.0f64, |m, (o, n)| m.max(o - n));
                run.converged = decrease <= KERNEL_STOP * new.max_abs();
            }
            run.levels.push((k, new));
        }
        if !keep_all && runs.iter().all(|r| r.converged) {
            break;
        }
    }
    Ok(runs)
}

/// P_a for each sample with a bounded potential: one factorization, one
/// solve per boundary point.
pub fn bounded_kernels(
    domain: &Domain,
    potential: &Potential,
    samples: &[usize],
    settings: &Settings,
) -> Result<Vec<Field>> {
    check_samples(domain, samples)?;
    let op = crate::operator::assemble(domain, potential)?;
    let fac = op.factor(&settings.solver)?;
    samples
        .par_iter()
        .map(|&a| {
            let mut r = vec![0.0; domain.len()];
            for (i, c) in trace_functional(domain, a, settings.order)? {
                r[i] += c;
            }
            Ok(Field::new(fac.solve_rhs(&r, None)?.0))
        })
        .collect()
}

/// ∫ P dμ: densities by node quadrature, atoms by multilinear
/// interpolation of P (zero on ∂Ω).
pub fn pair_with_measure(domain: &Domain, p: &[f64], measure: &Measure) -> Result<f64> {
    let f = measure.density_values(domain)?;
    let dens: f64 = f.iter().zip(p).zip(domain.volumes()).map(|((f, p), w)| f * p * w).sum();
    let mut atoms = 0.0;
    for a in &measure.atoms {
        atoms += a.weight * domain.interpolate(p, a.point)?;
    }
    Ok(dens + atoms)
}

/// P_a for a boundary node `a`.
pub fn duality_kernel(domain: &Domain, potential: &Potential, a: usize, settings: &Settings) -> Result<Field> {
    let mut runs = kernel_levels(domain, potential, &[a], settings, false)?;
    Ok(runs.pop().and_then(|r| r.levels.into_iter().last()).expect("one level").1)
}

/// K_a: the duality kernel of the Laplacian.
pub fn harmonic_kernel(domain: &Domain, a: usize, settings: &Settings) -> Result<Field> {
    duality_kernel(domain, &Potential::zero(), a, settings)
}

/// P_{a,k} for every level k of the schedule.
pub fn truncation_kernels(
    domain: &Domain,
    potential: &Potential,
    a: usize,
    settings: &Settings,
) -> Result<Vec<(f64, Field)>> {
    let mut runs = kernel_levels(domain, potential, &[a], settings, true)?;
    Ok(runs.pop().expect("one run").levels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSummary {
    pub boundary_index: usize,
    pub min: f64,
    pub max: f64,
    pub l1: f64,
    pub degenerate: bool,
    pub converged: bool,
}

/// Kernels for a set of boundary points, with their V = 0 references.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub samples: Vec<usize>,
    pub kernels: Vec<Field>,
    pub reference: Option<Vec<Field>>,
    pub degenerate: Vec<bool>,
    pub converged: Vec<bool>,
}

impl KernelSet {
    pub fn build(
        domain: &Domain,
        potential: &Potential,
        samples: &[usize],
        settings: &Settings,
        keep_reference: bool,
    ) -> Result<Self> {
        let runs = kernel_levels(domain, potential, samples, settings, false)?;
        let harmonic = if potential.is_zero() {
            None
        } else {
            Some(kernel_levels(domain, &Potential::zero(), samples, settings, false)?)
        };
        let converged = runs.iter().map(|r| r.converged).collect();
        let kernels: Vec<Field> = runs
            .into_iter()
            .map(|r| r.levels.into_iter().last().expect("one level").1)
            .collect();
        let reference: Vec<Field> = match harmonic {
            Some(h) => h
                .into_iter()
                .map(|r| r.levels.into_iter().last().expect("one level").1)
                .collect(),
            None => kernels.clone(),
        };
        let vol = domain.volumes();
        let degenerate = kernels
            .iter()
            .zip(&reference)
            .map(|(p, k)| p.l1(vol) < DEGENERACY_RATIO * k.l1(vol))
            .collect();
        Ok(KernelSet {
            samples: samples.to_vec(),
            kernels,
            reference: keep_reference.then_some(reference),
            degenerate,
            converged,
        })
    }

    pub fn summaries(&self, domain: &Domain) -> Vec<KernelSummary> {
        self.samples
            .iter()
            .enumerate()
            .map(|(s, &a)| KernelSummary {
                boundary_index: a,
                min: self.kernels[s].min(),
                max: self.kernels[s].max(),
                l1: self.kernels[s].l1(domain.volumes()),
                degenerate: self.degenerate[s],
                converged: self.converged[s],
            })
            .collect()
    }

    /// CSV with columns: boundary index, node index, value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "schema=1")?;
        writeln!(out, "a_index,node_index,value")?;
        for (a, p) in self.samples.iter().zip(&self.kernels) {
            for (i, v) in p.iter().enumerate() {
                writeln!(out, "{a},{i},{v:.12e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositivitySet {
    pub mask: Vec<bool>,
    #[serde(skip)]
    pub limit: Field,
    pub threshold: f64,
    pub converged: bool,
}

impl PositivitySet {
    pub fn contains(&self, node: usize) -> bool {
        self.mask[node]
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

/// Nodes where the truncation limit of ζ_1 (datum f ≡ 1) is positive.
pub fn positivity_set(domain: &Domain, potential: &Potential, settings: &Settings) -> Result<PositivitySet> {
    let one = Measure::density(Density::uniform(1.0));
    let limit = solve_truncated_limit(domain, potential, &one, &settings.schedule, &settings.solver)?;
    let threshold = POSITIVITY_THRESHOLD * limit.field.max();
    Ok(PositivitySet {
        mask: limit.field.iter().map(|&v| v > threshold).collect(),
        limit: limit.field,
        threshold,
        converged: limit.converged,
    })
}
