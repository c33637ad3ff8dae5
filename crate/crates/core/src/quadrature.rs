//! Quadrature under grid refinement, used to decide whether a nonnegative
//! integrand with a boundary singularity is integrable.
//!
//! The integral is evaluated on the base grid and on grids refined by 2, 4
//! and 8. A convergent quadrature has increments that contract; a divergent
//! one (logarithmic or worse) has increments that stay level or grow. The
//! test compares the first and last increments, which are a factor 4 apart
//! in mesh size: an integrand behaving like d^(p-1) near ∂Ω gives a
//! contraction of 4^p, so convergence at rate p = 1/2 yields 2 and a
//! logarithmic divergence yields 1.

use serde::Serialize;

use crate::domain::{DomainSpec, Point};

/// Refinement factors applied to the base grid.
pub const REFINEMENT_FACTORS: [usize; 4] = [1, 2, 4, 8];

/// Minimum contraction of the increments for the integral to count as finite.
pub const CONTRACTION_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinedIntegral {
    /// Mesh size of each refinement, coarse to fine.
    pub mesh: Vec<f64>,
    pub values: Vec<f64>,
    /// |first increment| / |last increment|; `None` when the increments
    /// vanish.
    pub contraction: Option<f64>,
    pub divergent: bool,
    /// Richardson extrapolation from the three finest values, when the
    /// increments contract monotonically.
    pub extrapolated: Option<f64>,
}

impl RefinedIntegral {
    pub fn finest(&self) -> f64 {
        *self.values.last().expect("at least one level")
    }

    /// Best available estimate of the integral.
    pub fn estimate(&self) -> f64 {
        if self.divergent {
            self.finest()
        } else {
            self.extrapolated.unwrap_or(self.finest())
        }
    }

    pub fn from_values(mesh: Vec<f64>, values: Vec<f64>) -> Self {
        let n = values.len();
        assert!(n >= 4, "need four refinement levels");
        let finite = values.iter().all(|v| v.is_finite());
        let last = values[n - 1];
        let floor = 1e-12 * last.abs().max(1.0);
        let first_inc = (values[1] - values[0]).abs();
        let last_inc = values[n - 1] - values[n - 2];
        let prev_inc = values[n - 2] - values[n - 3];

        let (contraction, divergent) = if !finite {
            (None, true)
        } else if last_inc.abs() <= floor {
            (None, false)
        } else {
            let c = first_inc / last_inc.abs();
            (Some(c), c < CONTRACTION_THRESHOLD)
        };

        let extrapolated = if finite && !divergent && last_inc.abs() > floor {
            let q = prev_inc / last_inc;
            (q > 1.0).then(|| last + last_inc / (q - 1.0))
        } else {
            None
        };

        RefinedIntegral {
            mesh,
            values,
            contraction,
            divergent,
            extrapolated,
        }
    }
}

/// Integrate `integrand(x, d_∂Ω(x))` over Ω on the refinement ladder of
/// `spec`.
pub fn refined_integral<F>(spec: &DomainSpec, integrand: F) -> RefinedIntegral
where
    F: Fn(Point, f64) -> f64,
{
    let mut mesh = Vec::with_capacity(REFINEMENT_FACTORS.len());
    let mut values = Vec::with_capacity(REFINEMENT_FACTORS.len());
    for factor in REFINEMENT_FACTORS {
        let fine = spec.refined(factor);
        let (points, volumes) = fine.quadrature();
        let sum: f64 = points
            .iter()
            .zip(&volumes)
            .map(|(&p, &w)| w * integrand(p, fine.signed_distance(p)))
            .sum();
        mesh.push(fine.mesh_size());
        values.push(sum);
    }
    RefinedIntegral::from_values(mesh, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrand_is_exact() {
        let r = refined_integral(&DomainSpec::disk(4), |_, _| 1.0);
        assert!(!r.divergent);
        assert!((r.estimate() - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn power_law_classification() {
        let spec = DomainSpec::interval(16);
        let conv = refined_integral(&spec, |_, d| d.powf(-0.5));
        assert!(!conv.divergent, "{conv:?}");
        assert!((conv.estimate() - 2.0 * 2f64.sqrt()).abs() < 1e-2);
        let log = refined_integral(&spec, |_, d| 1.0 / d);
        assert!(log.divergent, "{log:?}");
        let power = refined_integral(&spec, |_, d| d.powf(-1.5));
        assert!(power.divergent, "{power:?}");
    }

    #[test]
    fn non_finite_values_diverge() {
        let r = RefinedIntegral::from_values(vec![1.0; 4], vec![1.0, 2.0, f64::INFINITY, 3.0]);
        assert!(r.divergent);
    }
}
