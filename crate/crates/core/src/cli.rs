//! Batch driver behind the `stl` binary.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{check_refining, CheckKind, ConfigError, Formats, RunConfig};
use crate::domain::{Domain, DomainSpec};
use crate::kernel::{duality_kernel, KernelSet};
use crate::operator::solve_truncated_limit;
use crate::trace::{boundary_integral, normal_derivative, trace_l1_norm};
use crate::verify::{
    comparison_check, energy_check, hopf_certificate, hopf_check, inequality_suite, observed_orders,
    representation_check, ObservedOrder, TableRow, VerifyReport,
};
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "stl", version, about = "Normal derivatives, duality kernels and Hopf checks for -Δu + Vu = μ")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Dirichlet problem through the truncation schedule.
    Solve(CommonArgs),
    /// Compute duality kernels at the sampled boundary nodes.
    Kernel(CommonArgs),
    /// Run the configured checks.
    Verify(CommonArgs),
    /// Repeat one check over a sequence of refined grids.
    Study(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats (csv, json); overrides `output.formats`.
    #[arg(long)]
    pub format: Option<String>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

pub fn load(args: &CommonArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = RunConfig::parse_with_env(&text)?;
    if let Some(out) = &args.out {
        config.output_dir = Some(out.clone());
    }
    if let Some(f) = &args.format {
        config.formats = f.parse::<Formats>().map_err(|reason| ConfigError::InvalidValue {
            key: "output.formats".into(),
            value: f.clone(),
            reason,
        })?;
    }
    Ok(config)
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Solve(a) => solve(&load(a)?),
        Command::Kernel(a) => kernel(&load(a)?),
        Command::Verify(a) => verify(&load(a)?),
        Command::Study(a) => study(&load(a)?),
    }
}

/// Run the binary: exit 0 when every check passes, 1 when one fails and 2
/// on configuration or runtime errors.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if o.passed {
                0
            } else {
                eprintln!("one or more checks failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Sink<'a> {
    dir: PathBuf,
    formats: Formats,
    files: &'a mut Vec<PathBuf>,
}

impl Sink<'_> {
    fn open(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        let f = fs::File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
        if self.formats.csv {
            let mut w = self.open(name)?;
            write(&mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        if self.formats.json {
            let mut w = self.open(name)?;
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            w.flush()?;
        }
        Ok(())
    }
}

fn output_dir(config: &RunConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| Path::new("stl-out").to_path_buf())
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    domain: DomainSpec,
    potential: String,
    converged: bool,
    monotone: Option<bool>,
    levels: Vec<(f64, Option<f64>)>,
    final_level: Option<f64>,
    trace_l1: f64,
    flux: f64,
    trace: &'a [f64],
}

pub fn solve(config: &RunConfig) -> Result<Outcome> {
    let domain = Domain::build(config.domain)?;
    let s = &config.settings;
    let run = solve_truncated_limit(&domain, &config.potential, &config.measure, &s.schedule, &s.solver)?;
    let trace = normal_derivative(&domain, &run.field, s.order)?;
    let mut files = Vec::new();
    let mut sink = Sink {
        dir: output_dir(config),
        formats: config.formats,
        files: &mut files,
    };
    sink.csv("solution.csv", |w| {
        writeln!(w, "schema=1")?;
        writeln!(w, "node_index,x,y,value")?;
        for (i, (p, v)) in domain.nodes().iter().zip(run.field.iter()).enumerate() {
            writeln!(w, "{i},{:.12e},{:.12e},{:.12e}", p[0], p[1], v)?;
        }
        Ok(())
    })?;
    sink.csv("trace.csv", |w| trace.write_csv(&domain, w))?;
    sink.json(
        "solve.json",
        &SolveSummary {
            domain: config.domain,
            potential: config.potential.label(),
            converged: run.converged,
            monotone: run.monotone,
            levels: run.steps.iter().map(|s| (s.k, s.l1_change)).collect(),
            final_level: run.potential.cap(),
            trace_l1: trace_l1_norm(&domain, &trace),
            flux: boundary_integral(&domain, &trace, |_| 1.0),
            trace: &trace.values,
        },
    )?;
    Ok(Outcome { passed: true, files })
}

pub fn kernel(config: &RunConfig) -> Result<Outcome> {
    let domain = Domain::build(config.domain)?;
    let samples = config.samples.resolve(&domain);
    let set = KernelSet::build(&domain, &config.potential, &samples, &config.settings, false)?;
    let mut files = Vec::new();
    let mut sink = Sink {
        dir: output_dir(config),
        formats: config.formats,
        files: &mut files,
    };
    sink.csv("kernels.csv", |w| set.write_csv(w))?;
    sink.json("kernels.json", &set.summaries(&domain))?;
    Ok(Outcome { passed: true, files })
}

/// Run one check on the configured problem.
pub fn run_check(config: &RunConfig, check: CheckKind) -> Result<VerifyReport> {
    let domain = Domain::build(config.domain)?;
    let s = &config.settings;
    let v = &config.potential;
    let m = &config.measure;
    match check {
        CheckKind::Representation => representation_check(&domain, v, m, &config.samples.resolve(&domain), s),
        CheckKind::Inequality => inequality_suite(&domain, v, m, s),
        CheckKind::Hopf => {
            let grids: Vec<DomainSpec> = (0..config.hopf_grids).map(|i| config.domain.refined(1 << i)).collect();
            hopf_check(&grids, v, m, s)
        }
        CheckKind::HopfCertificate => Ok(hopf_certificate(&domain, v, s)?.0),
        CheckKind::Comparison => {
            let p = duality_kernel(&domain, v, config.comparison.boundary_index, s)?;
            let (mut r, _) = comparison_check(&domain, v, &p, config.comparison.alpha, config.comparison.epsilon, s)?;
            r.note(format!("v = P_a with a = {}", config.comparison.boundary_index));
            Ok(r)
        }
        CheckKind::Energy => Ok(energy_check(
            &domain,
            &s.schedule.final_potential(&domain, v)?,
            m,
            config.energy_draws,
            config.energy_delta,
            config.seed,
            s,
        )?
        .0),
    }
}

#[derive(Serialize)]
struct SuiteReport<'a> {
    passed: bool,
    reports: &'a [VerifyReport],
}

pub fn verify(config: &RunConfig) -> Result<Outcome> {
    // A check that cannot run on this problem is reported as failed; the
    // remaining checks still run.
    let reports: Vec<VerifyReport> = config
        .checks
        .iter()
        .map(|&c| {
            run_check(config, c).unwrap_or_else(|e| {
                let mut r = VerifyReport::new(c.name(), config.domain, &config.potential, &config.measure);
                r.note(format!("error: {e}"));
                r.passed = false;
                r
            })
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed);
    let mut files = Vec::new();
    let mut sink = Sink {
        dir: output_dir(config),
        formats: config.formats,
        files: &mut files,
    };
    for r in &reports {
        sink.csv(&format!("{}_cases.csv", r.check), |w| r.write_cases_csv(w))?;
        if !r.table.is_empty() {
            sink.csv(&format!("{}_table.csv", r.check), |w| r.write_table_csv(w))?;
        }
    }
    sink.json("report.json", &SuiteReport { passed, reports: &reports })?;
    Ok(Outcome { passed, files })
}

/// The same shape as `spec` with a different base resolution.
pub fn with_resolution(spec: DomainSpec, resolution: usize) -> DomainSpec {
    match spec {
        DomainSpec::Interval { .. } => DomainSpec::Interval { n: resolution },
        DomainSpec::Disk { nr, ntheta } => DomainSpec::Disk {
            nr: resolution,
            ntheta: (ntheta * resolution).div_ceil(nr),
        },
        DomainSpec::Rectangle {
            width,
            height,
            nx,
            ny,
        } => DomainSpec::Rectangle {
            width,
            height,
            nx: resolution,
            ny: (ny * resolution).div_ceil(nx),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub check: CheckKind,
    pub resolutions: Vec<usize>,
    pub rows: Vec<TableRow>,
    /// Orders of the largest residual between consecutive grids.
    pub residual_orders: Vec<ObservedOrder>,
    /// Orders of the successive changes in the first case's value.
    pub value_orders: Vec<ObservedOrder>,
    pub passed: bool,
}

/// Repeat `check` over `resolutions` (strictly increasing). Each row
/// records h, the final truncation level reached on that grid, the largest
/// residual and the first case's value.
pub fn refinement_study(config: &RunConfig, check: CheckKind, resolutions: &[usize]) -> Result<StudyReport> {
    check_refining("study.resolutions", resolutions)?;
    let mut rows = Vec::new();
    let mut residuals = Vec::new();
    let mut values = Vec::new();
    let mut passed = true;
    for &res in resolutions {
        let mut c = config.clone();
        c.domain = with_resolution(config.domain, res);
        c.domain.validate()?;
        let domain = Domain::build(c.domain)?;
        let k = c.settings.schedule.final_potential(&domain, &c.potential)?.cap();
        let r = run_check(&c, check)?;
        passed &= r.passed;
        let h = domain.h();
        let residual = r.max_residual();
        let value = r.cases.first().map_or(f64::NAN, |c| c.lhs);
        rows.push(TableRow {
            h,
            k,
            quantity: "residual".into(),
            value: residual,
        });
        rows.push(TableRow {
            h,
            k,
            quantity: "value".into(),
            value,
        });
        residuals.push((h, residual));
        values.push((h, value));
    }
    let increments: Vec<(f64, f64)> = values.windows(2).map(|w| (w[1].0, w[1].1 - w[0].1)).collect();
    Ok(StudyReport {
        check,
        resolutions: resolutions.to_vec(),
        rows,
        residual_orders: observed_orders(&residuals),
        value_orders: observed_orders(&increments),
        passed,
    })
}

pub fn study(config: &RunConfig) -> Result<Outcome> {
    let check = config
        .study
        .check
        .or_else(|| config.checks.first().copied())
        .unwrap_or(CheckKind::Representation);
    let base = config.domain.resolution();
    let resolutions = match &config.study.resolutions {
        Some(r) => r.clone(),
        None => (0..config.study.levels).map(|l| base << l).collect(),
    };
    let report = refinement_study(config, check, &resolutions)?;
    let mut files = Vec::new();
    let mut sink = Sink {
        dir: output_dir(config),
        formats: config.formats,
        files: &mut files,
    };
    sink.csv("study.csv", |w| {
        writeln!(w, "schema=1")?;
        writeln!(w, "h,k,quantity,value")?;
        for r in &report.rows {
            let k = r.k.map(|k| format!("{k:.6e}")).unwrap_or_default();
            writeln!(w, "{:.12e},{k},{},{:.12e}", r.h, r.quantity, r.value)?;
        }
        Ok(())
    })?;
    sink.json("study.json", &report)?;
    Ok(Outcome {
        passed: report.passed,
        files,
    })
}
