//! Nonnegative potentials V ∈ L¹_loc(Ω), their truncations min{V, k} and the
//! weighted integrability test V ∈ L¹(Ω; d_∂Ω dx).

use serde::Serialize;
use thiserror::Error;

use crate::domain::{Domain, DomainSpec, Point};
use crate::field::Field;
use crate::quadrature::{refined_integral, RefinedIntegral};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("potential is not finite at node {node} ({value})")]
    NonFinite { node: usize, value: f64 },
    #[error("potential is negative at node {node} ({value})")]
    Negative { node: usize, value: f64 },
    #[error("invalid potential parameter: {0}")]
    InvalidParameter(String),
}

/// Piecewise-linear table of V as a function of the distance to ∂Ω.
/// Values are clamped outside the tabulated range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialTable {
    distances: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(mut rows: Vec<(f64, f64)>) -> Result<Self, PotentialError> {
        if rows.is_empty() {
            return Err(PotentialError::InvalidParameter("empty table".into()));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if rows.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(PotentialError::InvalidParameter(
                "duplicate table distance".into(),
            ));
        }
        if rows.iter().any(|r| !r.0.is_finite() || !r.1.is_finite()) {
            return Err(PotentialError::InvalidParameter(
                "non-finite table entry".into(),
            ));
        }
        let (distances, values) = rows.into_iter().unzip();
        Ok(RadialTable { distances, values })
    }

    pub fn eval(&self, d: f64) -> f64 {
        let xs = &self.distances;
        let ys = &self.values;
        if d <= xs[0] {
            return ys[0];
        }
        let last = xs.len() - 1;
        if d >= xs[last] {
            return ys[last];
        }
        let i = xs.partition_point(|&x| x <= d) - 1;
        let t = (d - xs[i]) / (xs[i + 1] - xs[i]);
        ys[i] + t * (ys[i + 1] - ys[i])
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialRule {
    Zero,
    Constant { c: f64 },
    /// 1 / d_∂Ω^α
    PowerDistance { alpha: f64 },
    /// 1 / |x − x₀|^α
    InteriorSingularity { center: Point, alpha: f64 },
    Table { table: RadialTable },
}

/// A potential rule with an optional truncation level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Potential {
    rule: PotentialRule,
    cap: Option<f64>,
}

impl Potential {
    pub fn new(rule: PotentialRule) -> Result<Self, PotentialError> {
        match &rule {
            PotentialRule::Constant { c } if !(*c >= 0.0 && c.is_finite()) => {
                return Err(PotentialError::InvalidParameter(format!(
                    "constant must be finite and nonnegative, got {c}"
                )))
            }
            PotentialRule::PowerDistance { alpha }
            | PotentialRule::InteriorSingularity { alpha, .. }
                if !(*alpha > 0.0 && alpha.is_finite()) =>
            {
                return Err(PotentialError::InvalidParameter(format!(
                    "alpha must be positive, got {alpha}"
                )))
            }
            PotentialRule::Table { table } if table.min_value() < 0.0 => {
                return Err(PotentialError::InvalidParameter(
                    "table values must be nonnegative".into(),
                ))
            }
            _ => {}
        }
        Ok(Potential { rule, cap: None })
    }

    pub fn zero() -> Self {
        Potential {
            rule: PotentialRule::Zero,
            cap: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(PotentialRule::Constant { c }).expect("nonnegative constant")
    }

    pub fn power_distance(alpha: f64) -> Self {
        Self::new(PotentialRule::PowerDistance { alpha }).expect("positive exponent")
    }

    pub fn interior_singularity(center: Point, alpha: f64) -> Self {
        Self::new(PotentialRule::InteriorSingularity { center, alpha }).expect("positive exponent")
    }

    pub fn rule(&self) -> &PotentialRule {
        &self.rule
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// Human-readable family name with parameters.
    pub fn label(&self) -> String {
        let base = match &self.rule {
            PotentialRule::Zero => "zero".to_string(),
            PotentialRule::Constant { c } => format!("constant({c})"),
            PotentialRule::PowerDistance { alpha } => format!("power_distance({alpha})"),
            PotentialRule::InteriorSingularity { center, alpha } => {
                format!("interior_singularity(({}, {}), {alpha})", center[0], center[1])
            }
            PotentialRule::Table { .. } => "table".to_string(),
        };
        match self.cap {
            Some(k) => format!("min({base}, {k})"),
            None => base,
        }
    }

    /// The pointwise value, possibly infinite on the singular set.
    pub fn value(&self, spec: &DomainSpec, p: Point) -> f64 {
        let raw = match &self.rule {
            PotentialRule::Zero => 0.0,
            PotentialRule::Constant { c } => *c,
            PotentialRule::PowerDistance { alpha } => {
                let d = spec.signed_distance(p);
                if d <= 0.0 {
                    f64::INFINITY
                } else {
                    d.powf(-alpha)
                }
            }
            PotentialRule::InteriorSingularity { center, alpha } => {
                let r = (p[0] - center[0]).hypot(p[1] - center[1]);
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    r.powf(-alpha)
                }
            }
            PotentialRule::Table { table } => table.eval(spec.signed_distance(p)),
        };
        match self.cap {
            Some(k) => raw.min(k),
            None => raw,
        }
    }

    /// min{V, k}. Truncations compose by taking the smaller level.
    pub fn truncate(&self, k: f64) -> Potential {
        assert!(k > 0.0, "truncation level must be positive");
        Potential {
            rule: self.rule.clone(),
            cap: Some(self.cap.map_or(k, |c| c.min(k))),
        }
    }

    /// A uniform bound on V, when one exists.
    pub fn bound(&self) -> Option<f64> {
        let rule_bound = match &self.rule {
            PotentialRule::Zero => Some(0.0),
            PotentialRule::Constant { c } => Some(*c),
            PotentialRule::PowerDistance { .. } | PotentialRule::InteriorSingularity { .. } => None,
            PotentialRule::Table { table } => Some(table.max_value()),
        };
        match (rule_bound, self.cap) {
            (Some(b), Some(k)) => Some(b.min(k)),
            (Some(b), None) => Some(b),
            (None, cap) => cap,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bound().is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.bound() == Some(0.0)
    }

    /// V at every interior node.
    pub fn sample(&self, domain: &Domain) -> Result<Field, PotentialError> {
        let spec = domain.spec();
        let values = domain
            .nodes()
            .iter()
            .enumerate()
            .map(|(node, &p)| {
                let value = self.value(spec, p);
                if !value.is_finite() {
                    Err(PotentialError::NonFinite { node, value })
                } else if value < 0.0 {
                    Err(PotentialError::Negative { node, value })
                } else {
                    Ok(value)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Field::new(values))
    }

    /// ∫ V d_∂Ω dx, with divergence detection under grid refinement.
    pub fn weighted_l1(&self, domain: &Domain) -> WeightedL1 {
        let spec = *domain.spec();
        let integral = refined_integral(&spec, |p, d| self.value(&spec, p) * d);
        WeightedL1::from(integral)
    }
}

/// Result of the weighted integrability test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedL1 {
    /// Extrapolated value when finite, last quadrature value otherwise.
    pub value: f64,
    pub divergent: bool,
    pub integral: RefinedIntegral,
}

impl From<RefinedIntegral> for WeightedL1 {
    fn from(integral: RefinedIntegral) -> Self {
        WeightedL1 {
            value: integral.estimate(),
            divergent: integral.divergent,
            integral,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_examples() {
        let spec = DomainSpec::interval(10);
        let v = Potential::power_distance(1.0).truncate(4.0);
        assert_eq!(v.value(&spec, [0.1, 0.0]), 4.0);
        let c = Potential::constant(2.0).truncate(5.0);
        assert_eq!(c.value(&spec, [0.3, 0.0]), 2.0);
        let base = Potential::power_distance(2.0);
        assert_eq!(base.truncate(3.0).truncate(7.0), base.truncate(3.0));
        assert_eq!(base.truncate(7.0).truncate(3.0), base.truncate(3.0));
    }

    #[test]
    fn sample_examples() {
        let d = Domain::build(DomainSpec::interval(8)).unwrap();
        assert!(Potential::zero().sample(&d).unwrap().iter().all(|&x| x == 0.0));
        assert!(Potential::constant(3.0)
            .sample(&d)
            .unwrap()
            .iter()
            .all(|&x| x == 3.0));
        let v = Potential::power_distance(1.0).sample(&d).unwrap();
        assert!((v[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sample_reports_singular_node() {
        let d = Domain::build(DomainSpec::interval(8)).unwrap();
        let v = Potential::interior_singularity([0.5, 0.0], 2.0);
        match v.sample(&d) {
            Err(PotentialError::NonFinite { node, .. }) => assert_eq!(node, 3),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Potential::new(PotentialRule::Constant { c: -1.0 }).is_err());
        assert!(Potential::new(PotentialRule::PowerDistance { alpha: 0.0 }).is_err());
        assert!(RadialTable::new(vec![]).is_err());
        let t = RadialTable::new(vec![(0.0, -1.0), (1.0, 1.0)]).unwrap();
        assert!(Potential::new(PotentialRule::Table { table: t }).is_err());
    }

    #[test]
    fn table_interpolates_in_distance() {
        let t = RadialTable::new(vec![(0.5, 0.0), (0.0, 4.0)]).unwrap();
        assert_eq!(t.eval(0.25), 2.0);
        assert_eq!(t.eval(-1.0), 4.0);
        assert_eq!(t.eval(3.0), 0.0);
    }

    #[test]
    fn bounds() {
        assert_eq!(Potential::zero().bound(), Some(0.0));
        assert_eq!(Potential::power_distance(1.5).bound(), None);
        assert_eq!(Potential::power_distance(1.5).truncate(8.0).bound(), Some(8.0));
        assert_eq!(Potential::constant(2.0).truncate(1.0).bound(), Some(1.0));
    }

    #[test]
    fn weighted_l1_examples() {
        let d = Domain::build(DomainSpec::interval(64)).unwrap();
        let zero = Potential::zero().weighted_l1(&d);
        assert_eq!(zero.value, 0.0);
        assert!(!zero.divergent);

        let w = Potential::power_distance(1.5).weighted_l1(&d);
        assert!(!w.divergent, "{w:?}");
        let exact = 2.0 * 2.0_f64.sqrt();
        assert!((w.value - exact).abs() < 0.05 * exact, "{}", w.value);

        let w = Potential::power_distance(2.0).weighted_l1(&d);
        assert!(w.divergent, "{w:?}");
    }
}
