//! The discrete Schrödinger operator −Δ_h + V with homogeneous Dirichlet
//! closure, its solves, and the truncation schedule V_k = min{V, k}.
//!
//! The finite-volume discretization is written as S u = M b, where S is the
//! symmetric stiffness matrix (edge conductances plus vol·V on the diagonal),
//! M is the diagonal of cell volumes and b the deposited right-hand side.
//! The pointwise operator is A = M⁻¹S, symmetric in the volume-weighted
//! inner product.

mod sparse;

use serde::Serialize;
use thiserror::Error;

pub use sparse::{conjugate_gradient, BandedCholesky, CgOutcome, CsrMatrix};

use crate::domain::Domain;
use crate::field::Field;
use crate::measure::{Measure, MeasureError};
use crate::potential::{Potential, PotentialError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("potential {0} is unbounded; truncate it before assembling")]
    UnboundedPotential(String),
    #[error("linear solver stopped after {iterations} iterations with relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("stiffness matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relative residual tolerance ‖S u − M b‖ / ‖M b‖.
    pub tol: f64,
    /// Iteration cap for conjugate gradients.
    pub max_iter: usize,
    /// Systems with fewer unknowns are factored directly.
    pub direct_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 100_000,
            direct_limit: 5000,
        }
    }
}

/// Assembled −Δ_h + V for a bounded potential.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: CsrMatrix,
    volumes: Vec<f64>,
    potential: Vec<f64>,
}

pub fn assemble(domain: &Domain, potential: &Potential) -> Result<Operator, OperatorError> {
    if !potential.is_bounded() {
        return Err(OperatorError::UnboundedPotential(potential.label()));
    }
    let v = potential.sample(domain)?;
    Ok(assemble_sampled(domain, v.into_inner()))
}

/// Assemble from nodal potential values.
pub fn assemble_sampled(domain: &Domain, potential: Vec<f64>) -> Operator {
    let n = domain.len();
    let vol = domain.volumes();
    let mut t = Vec::with_capacity(n + 4 * domain.links().len());
    for i in 0..n {
        t.push((i, i, vol[i] * potential[i]));
    }
    for l in domain.links() {
        t.push((l.from, l.from, l.conductance));
        t.push((l.to, l.to, l.conductance));
        t.push((l.from, l.to, -l.conductance));
        t.push((l.to, l.from, -l.conductance));
    }
    for l in domain.boundary_links() {
        t.push((l.from, l.from, l.conductance));
    }
    Operator {
        matrix: CsrMatrix::from_triplets(n, t),
        volumes: vol.to_vec(),
        potential,
    }
}

impl Operator {
    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// The symmetric stiffness matrix S.
    pub fn stiffness(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    /// Entry (i, j) of the pointwise operator A = M⁻¹S.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j) / self.volumes[i]
    }

    /// A u = (−Δ_h + V) u at every interior node.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut y = self.matrix.mul_vec(u);
        for (y, w) in y.iter_mut().zip(&self.volumes) {
            *y /= w;
        }
        y
    }

    /// ½ zᵀ S z − Σ vol f z. The edge terms are the squared forward
    /// differences of z weighted by face/length, so the minimizer solves
    /// exactly S z = M f.
    pub fn energy(&self, density: &[f64], z: &[f64]) -> f64 {
        let sz = self.matrix.mul_vec(z);
        let quad: f64 = sz.iter().zip(z).map(|(a, b)| a * b).sum();
        let lin: f64 = density
            .iter()
            .zip(z)
            .zip(&self.volumes)
            .map(|((f, z), w)| f * z * w)
            .sum();
        0.5 * quad - lin
    }

    pub fn factor(&self, opts: &SolverOptions) -> Result<Factored<'_>, OperatorError> {
        let method = if self.len() < opts.direct_limit {
            Method::Direct(BandedCholesky::factor(&self.matrix).ok_or(OperatorError::NotPositiveDefinite)?)
        } else {
            Method::Iterative
        };
        Ok(Factored {
            op: self,
            method,
            opts: *opts,
        })
    }
}

#[derive(Debug)]
enum Method {
    Direct(BandedCholesky),
    Iterative,
}

/// An operator prepared for repeated solves.
#[derive(Debug)]
pub struct Factored<'a> {
    op: &'a Operator,
    method: Method,
    opts: SolverOptions,
}

impl Factored<'_> {
    pub fn operator(&self) -> &Operator {
        self.op
    }

    /// Solve S x = rhs. Returns the solution and its relative residual.
    pub fn solve_rhs(&self, rhs: &[f64], guess: Option<&[f64]>) -> Result<(Vec<f64>, f64), OperatorError> {
        let s = &self.op.matrix;
        let rnorm = sparse::norm(rhs);
        if rnorm == 0.0 {
            return Ok((vec![0.0; rhs.len()], 0.0));
        }
        match &self.method {
            Method::Direct(chol) => {
                let mut x = chol.solve(rhs);
                let mut rel = residual(s, &x, rhs) / rnorm;
                // Iterative refinement for badly scaled systems.
                for _ in 0..3 {
                    if rel <= 1e-2 * self.opts.tol {
                        break;
                    }
                    let ax = s.mul_vec(&x);
                    let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
                    let dx = chol.solve(&r);
                    x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
                    rel = residual(s, &x, rhs) / rnorm;
                }
                if rel > self.opts.tol {
                    return Err(OperatorError::NotConverged {
                        iterations: 0,
                        residual: rel,
                    });
                }
                Ok((x, rel))
            }
            Method::Iterative => {
                let mut x = guess.map_or_else(|| vec![0.0; rhs.len()], <[f64]>::to_vec);
                let out = conjugate_gradient(s, rhs, &mut x, self.opts.tol, self.opts.max_iter);
                if out.relative_residual > self.opts.tol {
                    return Err(OperatorError::NotConverged {
                        iterations: out.iterations,
                        residual: out.relative_residual,
                    });
                }
                Ok((x, out.relative_residual))
            }
        }
    }

    /// Solve A u = b for a deposited right-hand side b.
    pub fn solve_density(&self, b: &[f64], guess: Option<&[f64]>) -> Result<(Field, f64), OperatorError> {
        let rhs: Vec<f64> = b.iter().zip(&self.op.volumes).map(|(b, w)| b * w).collect();
        let (x, rel) = self.solve_rhs(&rhs, guess)?;
        Ok((Field::new(x), rel))
    }
}

fn residual(s: &CsrMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    let ax = s.mul_vec(x);
    sparse::norm(&ax.iter().zip(rhs).map(|(a, b)| a - b).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub field: Field,
    pub relative_residual: f64,
}

/// Solve −Δu + Vu = μ, u = 0 on ∂Ω, for a bounded potential.
pub fn solve_dirichlet(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    opts: &SolverOptions,
) -> Result<Solution, OperatorError> {
    let op = assemble(domain, potential)?;
    let b = measure.deposit(domain)?;
    let (field, relative_residual) = op.factor(opts)?.solve_density(&b, None)?;
    Ok(Solution {
        field,
        relative_residual,
    })
}

/// E(z) = ½∫(|∇z|² + V z²) − ∫ f z for a bounded V and an atom-free μ = f dx.
pub fn energy(domain: &Domain, potential: &Potential, density: &Measure, z: &[f64]) -> Result<f64, OperatorError> {
    if density.has_atoms() {
        return Err(OperatorError::InvalidInput("energy requires a density without atoms".into()));
    }
    let op = assemble(domain, potential)?;
    let f = density.density_values(domain)?;
    Ok(op.energy(&f, z))
}

/// Truncation levels k_j = base^j, j = 0..=levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub levels: usize,
    pub base: f64,
    /// Early-stop tolerance on successive L¹ distances, relative to ‖μ‖.
    pub tol: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            levels: 14,
            base: 2.0,
            tol: 1e-8,
        }
    }
}

impl Schedule {
    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.levels).map(move |j| self.base.powi(j as i32))
    }

    /// The level at which the schedule stops changing the sampled potential:
    /// the first k_j ≥ max V, or the last level.
    pub fn effective_level(&self, vmax: f64) -> f64 {
        self.thresholds()
            .find(|&k| k >= vmax)
            .unwrap_or_else(|| self.base.powi(self.levels as i32))
    }

    /// The bounded potential the schedule ends on for this grid.
    pub fn final_potential(&self, domain: &Domain, potential: &Potential) -> Result<Potential, PotentialError> {
        let vmax = potential.sample(domain)?.max().max(0.0);
        Ok(potential.truncate(self.effective_level(vmax)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStep {
    pub k: f64,
    #[serde(skip)]
    pub field: Field,
    /// Σ |u_k − u_{k_prev}| vol; absent at the first level.
    pub l1_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedSolve {
    #[serde(skip)]
    pub field: Field,
    pub steps: Vec<ScheduleStep>,
    pub converged: bool,
    /// For μ ≥ 0: whether the iterates were nodewise non-increasing in k.
    pub monotone: Option<bool>,
    /// The truncated potential of the last level.
    pub potential: Potential,
}

/// Nodewise tolerance for monotonicity diagnostics.
pub const MONOTONE_TOL: f64 = 1e-9;

/// Solve with V_{k_j} along the schedule and return the limit, stopping
/// once successive iterates are within `schedule.tol · ‖μ‖` in L¹.
pub fn solve_truncated_limit(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    schedule: &Schedule,
    opts: &SolverOptions,
) -> Result<TruncatedSolve, OperatorError> {
    run_schedule(domain, potential, measure, schedule, opts, false)
}

/// Like [`solve_truncated_limit`] but never stops early, so every level of
/// the schedule is reported.
pub fn solve_all_levels(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    schedule: &Schedule,
    opts: &SolverOptions,
) -> Result<TruncatedSolve, OperatorError> {
    run_schedule(domain, potential, measure, schedule, opts, true)
}

fn run_schedule(
    domain: &Domain,
    potential: &Potential,
    measure: &Measure,
    schedule: &Schedule,
    opts: &SolverOptions,
    all_levels: bool,
) -> Result<TruncatedSolve, OperatorError> {
    let raw = potential.sample(domain)?;
    let vmax = raw.max().max(0.0);
    let b = measure.deposit(domain)?;
    let tv = measure.total_variation(domain)?;
    let scale = if tv.is_finite() {
        tv
    } else {
        Field::new(b.clone()).l1(domain.volumes())
    };
    let tol = schedule.tol * scale;

    let mut steps: Vec<ScheduleStep> = Vec::new();
    let mut converged = false;
    let mut last_k = 0.0;
    for k in schedule.thresholds() {
        last_k = k;
        let inactive = steps.last().is_some_and(|s| s.k >= vmax);
        if inactive {
            let field = steps.last().unwrap().field.clone();
            steps.push(ScheduleStep {
                k,
                field,
                l1_change: Some(0.0),
            });
            converged = true;
            if all_levels {
                continue;
            }
            break;
        }
        let values: Vec<f64> = raw.iter().map(|&v| v.min(k)).collect();
        let op = assemble_sampled(domain, values);
        let guess = steps.last().map(|s| s.field.to_vec());
        let (field, _) = op.factor(opts)?.solve_density(&b, guess.as_deref())?;
        let change = steps.last().map(|s| field.l1_distance(&s.field, domain.volumes()));
        steps.push(ScheduleStep {
            k,
            field,
            l1_change: change,
        });
        converged = change.is_some_and(|c| c <= tol);
        if converged && !all_levels {
            break;
        }
    }

    let monotone = measure.is_nonnegative().then(|| {
        steps.windows(2).all(|w| {
            let bound = MONOTONE_TOL * w[0].field.max_abs().max(1.0);
            w[1].field.iter().zip(w[0].field.iter()).all(|(a, b)| *a <= *b + bound)
        })
    });
    let field = steps.last().expect("schedule has at least one level").field.clone();
    Ok(TruncatedSolve {
        field,
        steps,
        converged,
        monotone,
        potential: potential.truncate(last_k.max(f64::MIN_POSITIVE)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::measure::Density;

    fn interval(n: usize) -> Domain {
        Domain::build(DomainSpec::interval(n)).unwrap()
    }

    #[test]
    fn stencil_entries() {
        let d = interval(4);
        let h = 0.25;
        let op = assemble(&d, &Potential::zero()).unwrap();
        // The middle row is a textbook row; the end rows carry the extended
        // boundary half-cell.
        assert!((op.entry(1, 1) - 2.0 / (h * h)).abs() < 1e-12);
        assert!((op.entry(1, 0) + 1.0 / (h * h)).abs() < 1e-12);
        assert!((op.entry(1, 2) + 1.0 / (h * h)).abs() < 1e-12);
        assert!((op.stiffness().get(0, 0) * h - 2.0).abs() < 1e-12);
        assert_eq!(op.entry(0, 2), 0.0);
        assert!(op.stiffness().is_symmetric(1e-14));

        let shifted = assemble(&d, &Potential::constant(3.0)).unwrap();
        for i in 0..3 {
            assert!((shifted.entry(i, i) - op.entry(i, i) - 3.0).abs() < 1e-12);
        }
        assert!(op.apply(&[0.0; 3]).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn unbounded_potential_is_rejected() {
        let d = interval(8);
        assert!(matches!(
            assemble(&d, &Potential::power_distance(2.0)),
            Err(OperatorError::UnboundedPotential(_))
        ));
    }

    #[test]
    fn green_function_solution() {
        let d = interval(64);
        let u = solve_dirichlet(&d, &Potential::zero(), &Measure::dirac([0.5, 0.0], 1.0), &Default::default())
            .unwrap();
        assert!(u.relative_residual <= 1e-10);
        let i = d.nearest_node([0.25, 0.0]);
        assert!((u.field[i] - 0.125).abs() < 1.0 / 64.0);
    }

    #[test]
    fn uniform_density_solution() {
        let d = interval(64);
        let u = solve_dirichlet(&d, &Potential::zero(), &Measure::density(Density::uniform(1.0)), &Default::default())
            .unwrap();
        let i = d.nearest_node([0.5, 0.0]);
        assert!((u.field[i] - 0.125).abs() < 4.0 / (64.0 * 64.0), "{}", u.field[i]);
        let zero = solve_dirichlet(&d, &Potential::zero(), &Measure::zero(), &Default::default()).unwrap();
        assert!(zero.field.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bounded_schedule_is_constant_beyond_the_bound() {
        let d = interval(32);
        let m = Measure::dirac([0.5, 0.0], 1.0);
        let s = solve_all_levels(&d, &Potential::constant(5.0), &m, &Schedule::default(), &Default::default()).unwrap();
        assert_eq!(s.steps.len(), 15);
        for w in s.steps.windows(2).skip(3) {
            assert_eq!(w[0].field, w[1].field);
        }
        assert!(s.converged);
        assert_eq!(s.monotone, Some(true));
    }

    #[test]
    fn inverse_square_potential_lowers_the_solution() {
        let d = interval(64);
        let m = Measure::dirac([0.5, 0.0], 1.0);
        let s = solve_truncated_limit(&d, &Potential::power_distance(2.0), &m, &Schedule::default(), &Default::default())
            .unwrap();
        let i = d.nearest_node([0.5, 0.0]);
        assert!(s.field[i] < 0.25);
        assert_eq!(s.monotone, Some(true));
    }

    #[test]
    fn integrable_potential_converges() {
        let d = interval(128);
        let m = Measure::dirac([0.5, 0.0], 1.0);
        let s = solve_truncated_limit(&d, &Potential::power_distance(1.5), &m, &Schedule::default(), &Default::default())
            .unwrap();
        assert!(s.converged);
        assert!(s.field.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn energy_examples() {
        let d = interval(256);
        let f = Measure::density(Density::uniform(1.0));
        assert_eq!(energy(&d, &Potential::zero(), &f, &vec![0.0; d.len()]).unwrap(), 0.0);
        let u = solve_dirichlet(&d, &Potential::zero(), &f, &Default::default()).unwrap();
        let e = energy(&d, &Potential::zero(), &f, &u.field).unwrap();
        assert!((e + 1.0 / 24.0).abs() < 1e-3, "{e}");
        assert!(energy(&d, &Potential::zero(), &Measure::dirac([0.5, 0.0], 1.0), &u.field).is_err());
    }

    #[test]
    fn iterative_path_matches_direct() {
        let d = Domain::build(DomainSpec::Disk { nr: 12, ntheta: 48 }).unwrap();
        let m = Measure::dirac([0.2, 0.3], 1.0);
        let v = Potential::constant(2.0);
        let direct = solve_dirichlet(&d, &v, &m, &Default::default()).unwrap();
        let opts = SolverOptions {
            direct_limit: 0,
            ..Default::default()
        };
        let cg = solve_dirichlet(&d, &v, &m, &opts).unwrap();
        let diff = direct.field.iter().zip(cg.field.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "{diff}");
        let capped = SolverOptions {
            direct_limit: 0,
            max_iter: 2,
            ..Default::default()
        };
        assert!(matches!(
            solve_dirichlet(&d, &v, &m, &capped),
            Err(OperatorError::NotConverged { .. })
        ));
    }
}
