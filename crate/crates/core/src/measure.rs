//! Finite signed measures on Ω: weighted atoms plus a sum of densities.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{Domain, DomainError, Point};
use crate::field::Field;
use crate::potential::RadialTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom {index} at ({}, {}) is not strictly inside the domain", .point[0], .point[1])]
    AtomOutside { index: usize, point: Point },
    #[error("mollifier radius 1/{k} reaches the boundary from atom {index} (distance {distance})")]
    RadiusReachesBoundary { k: usize, index: usize, distance: f64 },
    #[error("nodal density has {got} values, domain has {expected} nodes")]
    NodalLength { expected: usize, got: usize },
    #[error("invalid measure parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityRule {
    Uniform,
    /// d_∂Ω^(−α)
    PowerDistance { alpha: f64 },
    Table { table: RadialTable },
    /// Values at the interior nodes of a specific grid.
    Nodal { values: Vec<f64> },
}

/// `scale · rule`, tagged with whether |rule| is integrable on Ω.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    pub rule: DensityRule,
    pub scale: f64,
    pub integrable: bool,
}

impl Density {
    pub fn uniform(c: f64) -> Self {
        Density {
            rule: DensityRule::Uniform,
            scale: c,
            integrable: true,
        }
    }

    /// c · d^(−α); integrable exactly when α < 1.
    pub fn power_distance(c: f64, alpha: f64) -> Self {
        Density {
            rule: DensityRule::PowerDistance { alpha },
            scale: c,
            integrable: alpha < 1.0,
        }
    }

    pub fn table(table: RadialTable, integrable: bool) -> Self {
        Density {
            rule: DensityRule::Table { table },
            scale: 1.0,
            integrable,
        }
    }

    pub fn nodal(values: Vec<f64>) -> Self {
        Density {
            rule: DensityRule::Nodal { values },
            scale: 1.0,
            integrable: true,
        }
    }

    /// Value at an arbitrary point; zero outside Ω.
    pub fn value(&self, domain: &Domain, p: Point) -> f64 {
        let d = domain.spec().signed_distance(p);
        if d <= 0.0 {
            return 0.0;
        }
        let raw = match &self.rule {
            DensityRule::Uniform => 1.0,
            DensityRule::PowerDistance { alpha } => d.powf(-alpha),
            DensityRule::Table { table } => table.eval(d),
            DensityRule::Nodal { values } => domain.interpolate(values, p).unwrap_or(0.0),
        };
        self.scale * raw
    }

    fn check(&self, domain: &Domain) -> Result<(), MeasureError> {
        if let DensityRule::Nodal { values } = &self.rule {
            if values.len() != domain.len() {
                return Err(MeasureError::NodalLength {
                    expected: domain.len(),
                    got: values.len(),
                });
            }
        }
        Ok(())
    }

    fn sample_into(&self, domain: &Domain, out: &mut [f64]) {
        match &self.rule {
            DensityRule::Nodal { values } => {
                for (o, v) in out.iter_mut().zip(values) {
                    *o += self.scale * v;
                }
            }
            _ => {
                for (o, &p) in out.iter_mut().zip(domain.nodes()) {
                    *o += self.value(domain, p);
                }
            }
        }
    }

    fn is_nonnegative(&self) -> bool {
        let rule_sign = match &self.rule {
            DensityRule::Uniform | DensityRule::PowerDistance { .. } => true,
            DensityRule::Table { table } => table.min_value() >= 0.0,
            DensityRule::Nodal { values } => values.iter().all(|&v| v >= 0.0),
        };
        self.scale == 0.0 || (self.scale > 0.0 && rule_sign)
    }
}

/// A finite signed Borel measure μ = Σ wᵢ δ_{yᵢ} + Σ f_j dx.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Measure {
    pub atoms: Vec<Atom>,
    pub densities: Vec<Density>,
}

impl Measure {
    pub fn zero() -> Self {
        Measure::default()
    }

    pub fn dirac(point: Point, weight: f64) -> Self {
        Measure {
            atoms: vec![Atom { point, weight }],
            densities: Vec::new(),
        }
    }

    pub fn density(density: Density) -> Self {
        Measure {
            atoms: Vec::new(),
            densities: vec![density],
        }
    }

    pub fn nodal(values: Vec<f64>) -> Self {
        Self::density(Density::nodal(values))
    }

    pub fn with_atom(mut self, point: Point, weight: f64) -> Self {
        self.atoms.push(Atom { point, weight });
        self
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.densities.push(density);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) && self.densities.iter().all(|d| d.scale == 0.0)
    }

    pub fn has_atoms(&self) -> bool {
        self.atoms.iter().any(|a| a.weight != 0.0)
    }

    /// True when every density is a nodal grid function and there are no
    /// atoms.
    pub fn is_grid_density(&self) -> bool {
        !self.has_atoms()
            && self
                .densities
                .iter()
                .all(|d| matches!(d.rule, DensityRule::Nodal { .. }))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.weight >= 0.0) && self.densities.iter().all(Density::is_nonnegative)
    }

    pub fn scaled(&self, s: f64) -> Measure {
        Measure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point,
                    weight: a.weight * s,
                })
                .collect(),
            densities: self
                .densities
                .iter()
                .map(|d| Density {
                    scale: d.scale * s,
                    ..d.clone()
                })
                .collect(),
        }
    }

    pub fn sum(&self, other: &Measure) -> Measure {
        Measure {
            atoms: self.atoms.iter().chain(&other.atoms).cloned().collect(),
            densities: self.densities.iter().chain(&other.densities).cloned().collect(),
        }
    }

    pub fn validate(&self, domain: &Domain) -> Result<(), MeasureError> {
        for (index, a) in self.atoms.iter().enumerate() {
            if !a.weight.is_finite() {
                return Err(MeasureError::InvalidParameter(format!(
                    "atom {index} has non-finite weight"
                )));
            }
            if domain.spec().signed_distance(a.point) <= 0.0 {
                return Err(MeasureError::AtomOutside {
                    index,
                    point: a.point,
                });
            }
        }
        for d in &self.densities {
            d.check(domain)?;
        }
        Ok(())
    }

    /// Sum of the densities at the interior nodes.
    pub fn density_values(&self, domain: &Domain) -> Result<Vec<f64>, MeasureError> {
        let mut out = vec![0.0; domain.len()];
        for d in &self.densities {
            d.check(domain)?;
            d.sample_into(domain, &mut out);
        }
        Ok(out)
    }

    /// ‖μ‖ = |μ|(Ω); infinite when a density is tagged non-integrable.
    pub fn total_variation(&self, domain: &Domain) -> Result<f64, MeasureError> {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight.abs()).sum();
        if self.densities.iter().any(|d| !d.integrable && d.scale != 0.0) {
            return Ok(f64::INFINITY);
        }
        let f = self.density_values(domain)?;
        Ok(atoms + Field::new(f).l1(domain.volumes()))
    }

    /// μ(Ω)
    pub fn mass(&self, domain: &Domain) -> Result<f64, MeasureError> {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let f = self.density_values(domain)?;
        Ok(atoms + f.iter().zip(domain.volumes()).map(|(v, w)| v * w).sum::<f64>())
    }

    /// |μ|, with the densities collapsed to their nodal absolute value.
    pub fn abs(&self, domain: &Domain) -> Result<Measure, MeasureError> {
        let f = self.density_values(domain)?;
        let mut out = Measure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point,
                    weight: a.weight.abs(),
                })
                .collect(),
            densities: Vec::new(),
        };
        if !self.densities.is_empty() {
            out.densities
                .push(Density::nodal(f.into_iter().map(f64::abs).collect()));
        }
        Ok(out)
    }

    /// ∫ φ dμ, atoms evaluated exactly and densities by node quadrature.
    pub fn integrate<F: Fn(Point) -> f64>(&self, domain: &Domain, phi: F) -> Result<f64, MeasureError> {
        self.validate(domain)?;
        let atoms: f64 = self.atoms.iter().map(|a| a.weight * phi(a.point)).sum();
        let f = self.density_values(domain)?;
        let dens: f64 = domain
            .nodes()
            .iter()
            .zip(domain.volumes())
            .zip(&f)
            .map(|((&p, w), v)| phi(p) * v * w)
            .sum();
        Ok(atoms + dens)
    }

    /// Pair a grid function with μ: atoms through the deposition weights,
    /// densities by node quadrature. This is the discrete ∫ g dμ that is
    /// exactly dual to [`Measure::deposit`].
    pub fn pair(&self, domain: &Domain, g: &[f64]) -> Result<f64, MeasureError> {
        let rhs = self.deposit(domain)?;
        Ok(rhs
            .iter()
            .zip(g)
            .zip(domain.volumes())
            .map(|((b, g), w)| b * g * w)
            .sum())
    }

    /// Discrete right-hand side: densities sampled at nodes, atoms spread to
    /// the nodes of their cell and scaled by the inverse cell volume.
    pub fn deposit(&self, domain: &Domain) -> Result<Vec<f64>, MeasureError> {
        self.validate(domain)?;
        let mut rhs = self.density_values(domain)?;
        let vol = domain.volumes();
        for (index, a) in self.atoms.iter().enumerate() {
            let weights = domain.deposit_weights(a.point).map_err(|e| match e {
                DomainError::OutsideDomain(point) => MeasureError::AtomOutside { index, point },
                other => MeasureError::InvalidParameter(other.to_string()),
            })?;
            for (i, w) in weights {
                rhs[i] += a.weight * w / vol[i];
            }
        }
        Ok(rhs)
    }

    /// Grid samples of ρ_k ∗ μ for the radial bump ρ_k supported in B_{1/k}.
    pub fn mollify(&self, k: usize, domain: &Domain) -> Result<Field, MeasureError> {
        if k == 0 {
            return Err(MeasureError::InvalidParameter("k must be positive".into()));
        }
        self.validate(domain)?;
        let radius = 1.0 / k as f64;
        for (index, a) in self.atoms.iter().enumerate() {
            let distance = domain.spec().signed_distance(a.point);
            if radius >= distance {
                return Err(MeasureError::RadiusReachesBoundary { k, index, distance });
            }
        }
        let dim = domain.spec().dimension();
        let mollifier = Mollifier::new(dim, k as f64);
        let offsets = mollifier.ball_quadrature();
        let values = domain
            .nodes()
            .iter()
            .map(|&x| {
                let atoms: f64 = self
                    .atoms
                    .iter()
                    .map(|a| a.weight * mollifier.eval(sub(x, a.point)))
                    .sum();
                let dens: f64 = if self.densities.is_empty() {
                    0.0
                } else {
                    offsets
                        .iter()
                        .map(|&(z, w)| {
                            let y = [x[0] - z[0], x[1] - z[1]];
                            let f: f64 = self.densities.iter().map(|d| d.value(domain, y)).sum();
                            w * mollifier.eval(z) * f
                        })
                        .sum()
                };
                atoms + dens
            })
            .collect();
        Ok(Field::new(values))
    }
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn bump(s: f64) -> f64 {
    if s >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Unit-mass normalization of the bump in dimension 1 and 2.
fn bump_normalization(dim: usize) -> f64 {
    static ONE: OnceLock<f64> = OnceLock::new();
    static TWO: OnceLock<f64> = OnceLock::new();
    const M: usize = 200_000;
    let midpoint = |f: &dyn Fn(f64) -> f64| {
        let h = 1.0 / M as f64;
        (0..M).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h
    };
    match dim {
        1 => *ONE.get_or_init(|| 1.0 / (2.0 * midpoint(&bump))),
        _ => *TWO.get_or_init(|| 1.0 / (2.0 * PI * midpoint(&|r| bump(r) * r))),
    }
}

/// ρ_k(z) = k^N c_N exp(−1 / (1 − |kz|²)) on |z| < 1/k.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    dim: usize,
    k: f64,
    norm: f64,
}

impl Mollifier {
    pub fn new(dim: usize, k: f64) -> Self {
        Mollifier {
            dim,
            k,
            norm: bump_normalization(dim) * k.powi(dim as i32),
        }
    }

    pub fn eval(&self, z: Point) -> f64 {
        let r = if self.dim == 1 {
            z[0].abs()
        } else {
            z[0].hypot(z[1])
        };
        self.norm * bump(r * self.k)
    }

    /// Midpoint quadrature of the ball B_{1/k}(0): offsets and weights.
    fn ball_quadrature(&self) -> Vec<(Point, f64)> {
        let radius = 1.0 / self.k;
        if self.dim == 1 {
            const M: usize = 128;
            let h = 2.0 * radius / M as f64;
            (0..M)
                .map(|i| ([-radius + (i as f64 + 0.5) * h, 0.0], h))
                .collect()
        } else {
            const MR: usize = 32;
            const MT: usize = 64;
            let dr = radius / MR as f64;
            let dt = 2.0 * PI / MT as f64;
            let mut out = Vec::with_capacity(MR * MT);
            for i in 0..MR {
                let r = (i as f64 + 0.5) * dr;
                for j in 0..MT {
                    let t = (j as f64 + 0.5) * dt;
                    out.push(([r * t.cos(), r * t.sin()], r * dr * dt));
                }
            }
            out
        }
    }
}
