//! Normal derivatives on ∂Ω and the Green identity that defines them.
//!
//! The default first-order trace at a boundary node is the discrete flux
//! through its boundary faces divided by its surface weight. On uniform
//! faces this is the one-sided difference u(a + h n) / h, and summed against
//! any boundary function it makes the discrete Green identity exact.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, DomainError, Point};
use crate::field::Field;
use crate::measure::{Measure, MeasureError};
use crate::potential::{Potential, PotentialError};

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("second-order trace needs two interior nodes along the normal at boundary node {0}")]
    StencilLeavesGrid(usize),
    #[error("field has {got} values, domain has {expected} nodes")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceOrder {
    /// Flux / surface weight, i.e. u(a + h n) / h.
    #[default]
    First,
    /// (4 u(a + h n) − u(a + 2 h n)) / (2 h).
    Second,
}

/// Values on boundary nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    /// Minimum over the non-corner boundary nodes.
    pub fn smooth_min(&self, domain: &Domain) -> f64 {
        domain
            .smooth_boundary_nodes()
            .map(|b| self.values[b])
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum over the non-corner boundary nodes.
    pub fn smooth_max(&self, domain: &Domain) -> f64 {
        domain
            .smooth_boundary_nodes()
            .map(|b| self.values[b])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with columns: boundary node index, coordinate, value, surface weight.
    pub fn write_csv<W: Write>(&self, domain: &Domain, mut out: W) -> std::io::Result<()> {
        writeln!(out, "schema=1")?;
        writeln!(out, "boundary_index,coordinate,value,weight")?;
        for (i, (b, v)) in domain.boundary().iter().zip(&self.values).enumerate() {
            writeln!(out, "{i},{:.12e},{:.12e},{:.12e}", b.coordinate, v, b.weight)?;
        }
        Ok(())
    }
}

/// The linear functional u ↦ ∂u/∂n(a) as sparse (node, coefficient) pairs.
pub fn trace_functional(domain: &Domain, b: usize, order: TraceOrder) -> Result<Vec<(usize, f64)>, TraceError> {
    let stencil = domain.normal_stencil(b)?;
    match order {
        TraceOrder::First => {
            let w = domain.boundary()[b].weight;
            Ok(domain
                .boundary_links()
                .iter()
                .filter(|l| l.to == b)
                .map(|l| (l.from, l.conductance / w))
                .collect())
        }
        TraceOrder::Second => match stencil {
            // Corners have no normal line; their flux is zero.
            None => Ok(Vec::new()),
            Some(s) if s.first == s.second => Err(TraceError::StencilLeavesGrid(b)),
            Some(s) => Ok(vec![(s.first, 2.0 / s.spacing), (s.second, -0.5 / s.spacing)]),
        },
    }
}

/// ∂u/∂n at every boundary node (inward normal).
pub fn normal_derivative(domain: &Domain, u: &[f64], order: TraceOrder) -> Result<BoundaryTrace, TraceError> {
    if u.len() != domain.len() {
        return Err(TraceError::Length {
            expected: domain.len(),
            got: u.len(),
        });
    }
    let values = (0..domain.boundary_len())
        .map(|b| Ok(trace_functional(domain, b, order)?.iter().map(|&(i, c)| c * u[i]).sum()))
        .collect::<Result<Vec<f64>, TraceError>>()?;
    Ok(BoundaryTrace { values })
}

/// ‖∂u/∂n‖_{L¹(∂Ω)} = Σ |value| · weight.
pub fn trace_l1_norm(domain: &Domain, trace: &BoundaryTrace) -> f64 {
    trace
        .values
        .iter()
        .zip(domain.boundary())
        .map(|(v, b)| v.abs() * b.weight)
        .sum()
}

/// ∫_{∂Ω} ψ (∂u/∂n) dσ by surface quadrature.
pub fn boundary_integral<F: Fn(Point) -> f64>(domain: &Domain, trace: &BoundaryTrace, psi: F) -> f64 {
    trace
        .values
        .iter()
        .zip(domain.boundary())
        .map(|(v, b)| v * b.weight * psi(b.point))
        .sum()
}

/// |∫∇u·∇φ − ∫φ d(μ − Vu) + ∫_{∂Ω} (∂u/∂n) φ dσ| with the first-order trace.
///
/// The gradient term is the edge sum Σ c (u_i − u_j)(φ_i − φ_j) including
/// the links to boundary nodes, where u vanishes; `potential` must be the
/// bounded potential the solve used.
pub fn green_identity_residual<F: Fn(Point) -> f64>(
    domain: &Domain,
    u: &Field,
    potential: &Potential,
    measure: &Measure,
    phi: F,
) -> Result<f64, TraceError> {
    let v = potential.sample(domain)?;
    let phi_nodes: Vec<f64> = domain.nodes().iter().map(|&p| phi(p)).collect();
    let phi_boundary: Vec<f64> = domain.boundary().iter().map(|b| phi(b.point)).collect();

    let mut gradient = 0.0;
    for l in domain.links() {
        gradient += l.conductance * (u[l.from] - u[l.to]) * (phi_nodes[l.from] - phi_nodes[l.to]);
    }
    for l in domain.boundary_links() {
        gradient += l.conductance * u[l.from] * (phi_nodes[l.from] - phi_boundary[l.to]);
    }
    let source = measure.integrate(domain, &phi)?;
    let absorption: f64 = u
        .iter()
        .zip(v.iter())
        .zip(&phi_nodes)
        .zip(domain.volumes())
        .map(|(((u, v), p), w)| u * v * p * w)
        .sum();
    let trace = normal_derivative(domain, u, TraceOrder::First)?;
    let flux = boundary_integral(domain, &trace, &phi);
    Ok((gradient - (source - absorption) + flux).abs())
}
