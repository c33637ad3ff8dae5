//! Run configuration: flat `key = value` lines with dotted sections.
//!
//! ```text
//! # comment
//! domain.kind = disk
//! domain.nr = 32
//! potential.family = power_distance
//! potential.alpha = 1.5
//! measure.atom = 0.0, 0.0, 1.0
//! checks = representation, hopf
//! ```
//!
//! `measure.atom` may repeat. Any key can be overridden from the
//! environment by `STL_` followed by the key in upper case with dots
//! replaced by underscores, e.g. `STL_SOLVER_TOL`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{Domain, DomainKind, DomainSpec, Point};
use crate::measure::{Density, Measure};
use crate::operator::{Schedule, SolverOptions};
use crate::potential::{Potential, PotentialRule, RadialTable};
use crate::trace::TraceOrder;
use crate::Settings;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: invalid value `{value}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("key `{key}` appears more than once")]
    Duplicate { key: String },
    #[error("key `{0}` is required")]
    Missing(String),
}

impl ConfigError {
    /// The configuration key the error refers to, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax { .. } => None,
            ConfigError::UnknownKey(k) | ConfigError::Missing(k) => Some(k),
            ConfigError::InvalidValue { key, .. } | ConfigError::Duplicate { key } => Some(key),
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

/// Every accepted key. `measure.atom` is the only repeatable one.
pub const KEYS: &[&str] = &[
    "domain.kind",
    "domain.n",
    "domain.nr",
    "domain.ntheta",
    "domain.nx",
    "domain.ny",
    "domain.width",
    "domain.height",
    "potential.family",
    "potential.c",
    "potential.alpha",
    "potential.center",
    "potential.table",
    "measure.atom",
    "measure.density",
    "measure.density.c",
    "measure.density.alpha",
    "measure.density.table",
    "schedule.J",
    "schedule.base",
    "schedule.tol",
    "solver.tol",
    "solver.max_iter",
    "solver.direct_limit",
    "trace.order",
    "checks",
    "boundary.samples",
    "comparison.alpha",
    "comparison.epsilon",
    "comparison.boundary_index",
    "energy.draws",
    "energy.delta",
    "hopf.grids",
    "output.dir",
    "output.formats",
    "seed",
    "study.levels",
    "study.resolutions",
    "study.check",
];

/// Environment variable that overrides `key`.
pub fn env_name(key: &str) -> String {
    format!("STL_{}", key.replace('.', "_").to_uppercase())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Representation,
    Inequality,
    Hopf,
    HopfCertificate,
    Comparison,
    Energy,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Representation => "representation",
            CheckKind::Inequality => "inequality",
            CheckKind::Hopf => "hopf",
            CheckKind::HopfCertificate => "hopf_certificate",
            CheckKind::Comparison => "comparison",
            CheckKind::Energy => "energy",
        }
    }
}

impl FromStr for CheckKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "representation" | "representation_check" => CheckKind::Representation,
            "inequality" | "inequality_suite" | "estimates" => CheckKind::Inequality,
            "hopf" | "hopf_check" => CheckKind::Hopf,
            "hopf_certificate" | "certificate" => CheckKind::HopfCertificate,
            "comparison" | "comparison_check" => CheckKind::Comparison,
            "energy" | "energy_check" => CheckKind::Energy,
            other => return Err(format!("unknown check `{other}`")),
        })
    }
}

/// Which boundary nodes kernels and representation checks use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySamples {
    All,
    Stride(usize),
    List(Vec<usize>),
}

impl BoundarySamples {
    pub fn resolve(&self, domain: &Domain) -> Vec<usize> {
        let n = domain.boundary_len();
        match self {
            BoundarySamples::All => (0..n).collect(),
            BoundarySamples::Stride(s) => (0..n).step_by(*s).collect(),
            BoundarySamples::List(l) => l.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats { csv: true, json: true }
    }
}

impl FromStr for Formats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut f = Formats { csv: false, json: false };
        for part in list_items(s) {
            match part {
                "csv" => f.csv = true,
                "json" => f.json = true,
                other => return Err(format!("unknown format `{other}`")),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonConfig {
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub boundary_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub levels: usize,
    pub resolutions: Option<Vec<usize>>,
    pub check: Option<CheckKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub potential: Potential,
    pub measure: Measure,
    pub settings: Settings,
    pub checks: Vec<CheckKind>,
    pub samples: BoundarySamples,
    pub comparison: ComparisonConfig,
    pub energy_draws: usize,
    pub energy_delta: f64,
    pub hopf_grids: usize,
    pub output_dir: Option<PathBuf>,
    pub formats: Formats,
    pub seed: u64,
    pub study: StudyConfig,
}

/// Raw key/value entries in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Vec<String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            })?;
            raw.insert(key.trim(), value.trim())?;
        }
        Ok(raw)
    }

    pub fn insert(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        let slot = self.entries.entry(key.to_string()).or_default();
        if !slot.is_empty() && key != "measure.atom" {
            return Err(ConfigError::Duplicate { key: key.to_string() });
        }
        slot.push(value.to_string());
        Ok(())
    }

    /// Replace values from `STL_*` variables. For `measure.atom` the value
    /// is a `;`-separated list of atoms.
    pub fn apply_env<F: Fn(&str) -> Option<String>>(&mut self, lookup: F) {
        for key in KEYS {
            if let Some(v) = lookup(&env_name(key)) {
                let values = if *key == "measure.atom" {
                    v.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                } else {
                    vec![v.trim().to_string()]
                };
                self.entries.insert(key.to_string(), values);
            }
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    fn all(&self, key: &str) -> &[String] {
        self.entries.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| invalid(key, v, e)),
        }
    }

    fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key).map(|v| v.parse().map_err(|e| invalid(key, v, e))).transpose()
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v: f64 = self.parse_or(key, default)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, self.get(key).unwrap_or(""), "must be positive"))
        }
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize, ConfigError> {
        let v: usize = self.parse_or(key, default)?;
        if v >= min {
            Ok(v)
        } else {
            Err(invalid(key, self.get(key).unwrap_or(""), format!("must be at least {min}")))
        }
    }
}

fn list_items(s: &str) -> impl Iterator<Item = &str> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
}

fn numbers(key: &str, s: &str) -> Result<Vec<f64>, ConfigError> {
    list_items(s)
        .map(|p| p.parse::<f64>().map_err(|e| invalid(key, s, e)))
        .collect()
}

fn table(key: &str, s: &str) -> Result<RadialTable, ConfigError> {
    let rows = s
        .split(';')
        .map(str::trim)
        .filter(|r| !r.is_empty())
        .map(|r| {
            let (d, v) = r.split_once(':').ok_or_else(|| invalid(key, s, "rows are `distance:value`"))?;
            let d: f64 = d.trim().parse().map_err(|e| invalid(key, s, e))?;
            let v: f64 = v.trim().parse().map_err(|e| invalid(key, s, e))?;
            Ok((d, v))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    RadialTable::new(rows).map_err(|e| invalid(key, s, e))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    /// Parse `text`, then apply `STL_*` overrides from the process
    /// environment.
    pub fn parse_with_env(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;
        raw.apply_env(|k| std::env::var(k).ok());
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let domain = parse_domain(raw)?;
        let built = Domain::build(domain).map_err(|e| invalid("domain.kind", raw.get("domain.kind").unwrap_or(""), e))?;
        let potential = parse_potential(raw, &built)?;
        let measure = parse_measure(raw, &built)?;

        let schedule = Schedule {
            levels: raw.count("schedule.J", 14, 1)?,
            base: raw.positive("schedule.base", 2.0)?,
            tol: raw.positive("schedule.tol", 1e-8)?,
        };
        if schedule.base <= 1.0 {
            return Err(invalid("schedule.base", raw.get("schedule.base").unwrap_or(""), "must exceed 1"));
        }
        let defaults = SolverOptions::default();
        let solver = SolverOptions {
            tol: raw.positive("solver.tol", defaults.tol)?,
            max_iter: raw.count("solver.max_iter", defaults.max_iter, 1)?,
            direct_limit: raw.parse_or("solver.direct_limit", defaults.direct_limit)?,
        };
        let order = match raw.get("trace.order").unwrap_or("first") {
            "first" | "1" => TraceOrder::First,
            "second" | "2" => TraceOrder::Second,
            other => return Err(invalid("trace.order", other, "expected `first` or `second`")),
        };

        let checks = match raw.get("checks") {
            None => Vec::new(),
            Some(v) => list_items(v)
                .map(|c| c.parse().map_err(|e| invalid("checks", v, e)))
                .collect::<Result<_, _>>()?,
        };

        let samples = parse_samples(raw, &built)?;

        let comparison = ComparisonConfig {
            alpha: raw.parse_or("comparison.alpha", 0.5)?,
            epsilon: raw.parse_opt("comparison.epsilon")?,
            boundary_index: raw.parse_or("comparison.boundary_index", 0)?,
        };
        if !(comparison.alpha > 0.0 && comparison.alpha < 1.0) {
            return Err(invalid(
                "comparison.alpha",
                raw.get("comparison.alpha").unwrap_or(""),
                "must lie in (0, 1)",
            ));
        }
        if comparison.epsilon.is_some_and(|e| !(e > 0.0)) {
            return Err(invalid("comparison.epsilon", raw.get("comparison.epsilon").unwrap_or(""), "must be positive"));
        }
        if comparison.boundary_index >= built.boundary_len() {
            return Err(invalid(
                "comparison.boundary_index",
                raw.get("comparison.boundary_index").unwrap_or(""),
                format!("the domain has {} boundary nodes", built.boundary_len()),
            ));
        }

        let formats = raw.parse_or("output.formats", Formats::default())?;
        let study = StudyConfig {
            levels: raw.count("study.levels", 3, 2)?,
            resolutions: raw
                .get("study.resolutions")
                .map(|v| {
                    list_items(v)
                        .map(|p| p.parse::<usize>().map_err(|e| invalid("study.resolutions", v, e)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?,
            check: raw.parse_opt("study.check")?,
        };
        if let Some(r) = &study.resolutions {
            check_refining("study.resolutions", r)?;
        }

        Ok(RunConfig {
            domain,
            potential,
            measure,
            settings: Settings { solver, schedule, order },
            checks,
            samples,
            comparison,
            energy_draws: raw.parse_or("energy.draws", 100)?,
            energy_delta: raw.positive("energy.delta", 0.1)?,
            hopf_grids: raw.count("hopf.grids", 2, 1)?,
            output_dir: raw.get("output.dir").map(PathBuf::from),
            formats,
            seed: raw.parse_or("seed", 0)?,
            study,
        })
    }
}

/// Resolutions of a refinement study must strictly increase.
pub fn check_refining(key: &str, resolutions: &[usize]) -> Result<(), ConfigError> {
    let text = resolutions.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    if resolutions.len() < 2 {
        return Err(invalid(key, &text, "a study needs at least two levels"));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(key, &text, "levels must refine"));
    }
    Ok(())
}

fn parse_domain(raw: &RawConfig) -> Result<DomainSpec, ConfigError> {
    let kind_text = raw.get("domain.kind").ok_or_else(|| ConfigError::Missing("domain.kind".into()))?;
    let kind: DomainKind = kind_text.parse().map_err(|e| invalid("domain.kind", kind_text, e))?;
    let spec = match kind {
        DomainKind::Interval => DomainSpec::Interval {
            n: raw.parse_or("domain.n", 64)?,
        },
        DomainKind::Disk => {
            let nr = raw.parse_or("domain.nr", raw.parse_or("domain.n", 16)?)?;
            DomainSpec::Disk {
                nr,
                ntheta: raw.parse_or("domain.ntheta", 4 * nr)?,
            }
        }
        DomainKind::Rectangle => {
            let n = raw.parse_or("domain.n", 16)?;
            DomainSpec::Rectangle {
                width: raw.positive("domain.width", 1.0)?,
                height: raw.positive("domain.height", 1.0)?,
                nx: raw.parse_or("domain.nx", n)?,
                ny: raw.parse_or("domain.ny", n)?,
            }
        }
    };
    spec.validate().map_err(|e| {
        let key = match spec {
            DomainSpec::Interval { .. } => "domain.n",
            DomainSpec::Disk { .. } => "domain.nr",
            DomainSpec::Rectangle { .. } => "domain.nx",
        };
        invalid(key, raw.get(key).unwrap_or(""), e)
    })?;
    Ok(spec)
}

fn point(key: &str, coords: &[f64], dim: usize, text: &str) -> Result<Point, ConfigError> {
    match (dim, coords) {
        (1, [x]) => Ok([*x, 0.0]),
        (2, [x, y]) => Ok([*x, *y]),
        _ => Err(invalid(key, text, format!("expected {dim} coordinate(s)"))),
    }
}

fn parse_potential(raw: &RawConfig, domain: &Domain) -> Result<Potential, ConfigError> {
    let family = raw.get("potential.family").unwrap_or("zero");
    let key = "potential.family";
    let rule = match family {
        "zero" => PotentialRule::Zero,
        "constant" => PotentialRule::Constant {
            c: raw.parse_or("potential.c", 1.0)?,
        },
        "power_distance" => PotentialRule::PowerDistance {
            alpha: raw.positive("potential.alpha", 1.0)?,
        },
        "interior_singularity" => {
            let text = raw
                .get("potential.center")
                .ok_or_else(|| ConfigError::Missing("potential.center".into()))?;
            let center = point("potential.center", &numbers("potential.center", text)?, domain.spec().dimension(), text)?;
            let spacing = domain.h();
            if domain
                .nodes()
                .iter()
                .any(|q| (q[0] - center[0]).hypot(q[1] - center[1]) < 1e-9 * spacing)
            {
                return Err(invalid("potential.center", text, "the center must not sit on a grid node"));
            }
            PotentialRule::InteriorSingularity {
                center,
                alpha: raw.positive("potential.alpha", 1.0)?,
            }
        }
        "table" => {
            let text = raw
                .get("potential.table")
                .ok_or_else(|| ConfigError::Missing("potential.table".into()))?;
            PotentialRule::Table {
                table: table("potential.table", text)?,
            }
        }
        other => return Err(invalid(key, other, "unknown potential family")),
    };
    Potential::new(rule).map_err(|e| invalid(key, family, e))
}

fn parse_measure(raw: &RawConfig, domain: &Domain) -> Result<Measure, ConfigError> {
    let dim = domain.spec().dimension();
    let mut m = Measure::zero();
    for text in raw.all("measure.atom") {
        let key = "measure.atom";
        let values = numbers(key, text)?;
        let (coords, weight) = match values.split_last() {
            Some((w, c)) => (c, *w),
            None => return Err(invalid(key, text, "empty atom")),
        };
        let p = point(key, coords, dim, text)?;
        if domain.spec().distance_to_boundary(p).map_or(true, |d| d <= 0.0) {
            return Err(invalid(key, text, "atoms must lie strictly inside the domain"));
        }
        m = m.with_atom(p, weight);
    }
    let scale: f64 = raw.parse_or("measure.density.c", 1.0)?;
    match raw.get("measure.density") {
        None | Some("none") => {}
        Some("uniform") => m = m.with_density(Density::uniform(scale)),
        Some("power_distance") => {
            let alpha = raw.positive("measure.density.alpha", 0.5)?;
            m = m.with_density(Density::power_distance(scale, alpha));
        }
        Some("table") => {
            let text = raw
                .get("measure.density.table")
                .ok_or_else(|| ConfigError::Missing("measure.density.table".into()))?;
            let mut d = Density::table(table("measure.density.table", text)?, true);
            d.scale = scale;
            m = m.with_density(d);
        }
        Some(other) => return Err(invalid("measure.density", other, "unknown density family")),
    }
    if !m.total_variation(domain).is_ok_and(f64::is_finite) {
        return Err(invalid(
            "measure.density",
            raw.get("measure.density").unwrap_or(""),
            "the measure must have finite total variation",
        ));
    }
    Ok(m)
}

fn parse_samples(raw: &RawConfig, domain: &Domain) -> Result<BoundarySamples, ConfigError> {
    let key = "boundary.samples";
    let Some(text) = raw.get(key) else {
        return Ok(BoundarySamples::All);
    };
    let samples = if text == "all" {
        BoundarySamples::All
    } else if let Some(s) = text.strip_prefix("stride:") {
        let s: usize = s.trim().parse().map_err(|e| invalid(key, text, e))?;
        if s == 0 {
            return Err(invalid(key, text, "stride must be positive"));
        }
        BoundarySamples::Stride(s)
    } else {
        let list = text.strip_prefix("list:").unwrap_or(text);
        let l = list_items(list)
            .map(|p| p.parse::<usize>().map_err(|e| invalid(key, text, e)))
            .collect::<Result<Vec<_>, _>>()?;
        if l.is_empty() {
            return Err(invalid(key, text, "empty list"));
        }
        if let Some(bad) = l.iter().find(|&&i| i >= domain.boundary_len()) {
            return Err(invalid(
                key,
                text,
                format!("index {bad} exceeds the {} boundary nodes", domain.boundary_len()),
            ));
        }
        BoundarySamples::List(l)
    };
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let c = RunConfig::parse(
            "# disk run\n\
             domain.kind = disk\n\
             domain.nr = 8\n\
             potential.family = power_distance\n\
             potential.alpha = 1.5\n\
             measure.atom = 0.0, 0.0, 1.0\n\
             measure.atom = 0.2, 0.1, -0.5\n\
             schedule.J = 6\n\
             checks = [representation, hopf_check]\n\
             boundary.samples = stride:4\n\
             output.formats = csv\n\
             seed = 11\n",
        )
        .unwrap();
        assert_eq!(c.domain, DomainSpec::Disk { nr: 8, ntheta: 32 });
        assert_eq!(c.measure.atoms.len(), 2);
        assert_eq!(c.settings.schedule.levels, 6);
        assert_eq!(c.checks, vec![CheckKind::Representation, CheckKind::Hopf]);
        assert_eq!(c.samples, BoundarySamples::Stride(4));
        assert!(c.formats.csv && !c.formats.json);
        assert_eq!(c.seed, 11);
    }

    #[test]
    fn empty_checks() {
        let c = RunConfig::parse("domain.kind = interval\nchecks = []\n").unwrap();
        assert!(c.checks.is_empty());
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            ("domain.kind = interval\npotential.family = yukawa\n", "potential.family"),
            ("domain.kind = interval\nsolver.tol = -1\n", "solver.tol"),
            ("domain.kind = interval\nschedule.J = 0\n", "schedule.J"),
            ("domain.kind = interval\ndomain.n = 2\n", "domain.n"),
            ("domain.kind = interval\nmeasure.atom = 1.5, 1\n", "measure.atom"),
            ("domain.kind = interval\nbogus = 1\n", "bogus"),
            ("domain.kind = torus\n", "domain.kind"),
            ("potential.family = zero\n", "domain.kind"),
            ("domain.kind = interval\nchecks = flux\n", "checks"),
            ("domain.kind = interval\nstudy.resolutions = 64, 64\n", "study.resolutions"),
            ("domain.kind = interval\ndomain.n = 8\npotential.family = interior_singularity\npotential.center = 0.5\n", "potential.center"),
            ("domain.kind = interval\nseed = 1\nseed = 2\n", "seed"),
        ];
        for (text, key) in cases {
            let err = RunConfig::parse(text).unwrap_err();
            assert_eq!(err.key(), Some(key), "{text}: {err}");
            assert!(err.to_string().contains(key));
        }
    }

    #[test]
    fn off_node_singularity_is_accepted() {
        let c = RunConfig::parse(
            "domain.kind = interval\ndomain.n = 8\npotential.family = interior_singularity\npotential.center = 0.51\npotential.alpha = 2\n",
        )
        .unwrap();
        assert!(matches!(c.potential.rule(), PotentialRule::InteriorSingularity { .. }));
    }

    #[test]
    fn environment_overrides() {
        let mut raw = RawConfig::parse("domain.kind = interval\ndomain.n = 16\nmeasure.atom = 0.5, 1\n").unwrap();
        raw.apply_env(|k| match k {
            "STL_DOMAIN_N" => Some("32".into()),
            "STL_SOLVER_MAX_ITER" => Some("7".into()),
            "STL_MEASURE_ATOM" => Some("0.25, 1; 0.75, 2".into()),
            _ => None,
        });
        let c = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(c.domain, DomainSpec::interval(32));
        assert_eq!(c.settings.solver.max_iter, 7);
        assert_eq!(c.measure.atoms.len(), 2);
        assert_eq!(env_name("schedule.J"), "STL_SCHEDULE_J");
    }

    #[test]
    fn sample_selection() {
        let d = Domain::build(DomainSpec::disk(4)).unwrap();
        assert_eq!(BoundarySamples::Stride(5).resolve(&d), vec![0, 5, 10, 15]);
        assert_eq!(BoundarySamples::All.resolve(&d).len(), 16);
        let c = RunConfig::parse("domain.kind = disk\ndomain.nr = 4\nboundary.samples = 1, 3\n").unwrap();
        assert_eq!(c.samples, BoundarySamples::List(vec![1, 3]));
        assert!(RunConfig::parse("domain.kind = disk\ndomain.nr = 4\nboundary.samples = 99\n").is_err());
    }
}
