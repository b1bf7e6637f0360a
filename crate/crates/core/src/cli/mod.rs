//! Batch interface: JSON config in, CSV artifacts out.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub use config::{BoxSpec, ConfigError, FubiniConfig, PartitionConfig, RunConfig, SeriesSpec, SequenceSpec, TargetSpec};

use crate::builder::{build_nd, Assignment, BuildError, PermTargets, Permutation};
use crate::fubini::{iterated_integral_with, summation_permutation, BumpFunction, FubiniField};
use crate::par::Execution;
use crate::partition::{IndexPartition, NaturalStream};
use crate::quad::QuadratureFailure;
use crate::verify::verify_theorem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Build,
    Verify,
    Split,
    Fubini,
}

#[derive(Debug, Parser)]
#[command(name = "multisum", version, about = "Order-dependent multi-index rearrangements and iterated integrals")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for CSV files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Reserved; every pipeline is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("build failed: {0}")]
    Starvation(BuildError),
    #[error("build failed: {0}")]
    Build(BuildError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureFailure),
    #[error("verification failed: {failed} of {total} checks, audits {audits}")]
    VerificationFailed { failed: usize, total: usize, audits: &'static str },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Starvation { .. } => CliError::Starvation(e),
            BuildError::Targets(_) | BuildError::Budget(_) | BuildError::Dimension(_) => {
                CliError::Config(ConfigError {
                    path: "targets".into(),
                    message: e.to_string(),
                })
            }
            other => CliError::Build(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Starvation(_) => 3,
            CliError::Quadrature(_) => 4,
            CliError::VerificationFailed { .. } => 5,
            CliError::Build(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

fn partition(config: &RunConfig) -> Result<IndexPartition<'static>, ConfigError> {
    Ok(IndexPartition::new(
        config.source()?,
        Box::new(NaturalStream::new(config.scan_limit())),
        config.partition.threshold,
    ))
}

fn build(config: &RunConfig, targets: &PermTargets) -> Result<Assignment, CliError> {
    Ok(build_nd(&mut partition(config)?, targets, &config.budget)?)
}

fn write_assignment(assignment: &Assignment, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=assignment.n).map(|i| format!("j{i}")).collect();
    header.extend(["m", "a_m", "slab_d", "slab_mu"].map(String::from));
    w.write_record(&header)?;
    for e in assignment.entries() {
        let mut row: Vec<String> = e.index.iter().map(|j| j.to_string()).collect();
        row.extend([e.m.to_string(), e.value.to_string(), e.slab_d.to_string(), e.slab_mu.to_string()]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Run one command and return the files written.
pub fn run(config: &RunConfig, command: Command, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out)?;
    match command {
        Command::Build => {
            let assignment = build(config, &config.targets()?)?;
            let path = out.join("assignment.csv");
            write_assignment(&assignment, &path)?;
            Ok(vec![path])
        }
        Command::Verify => {
            let targets = config.targets()?;
            let assignment = build(config, &targets)?;
            let report = verify_theorem(&assignment, &targets, config.tolerance);
            let path = out.join("verify.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["sigma", "k", "measured", "target", "bound", "pass"])?;
            for c in &report.checks {
                w.write_record([
                    c.sigma.cycle_notation(),
                    c.k.to_string(),
                    c.measured.to_string(),
                    c.target.to_string(),
                    c.bound.to_string(),
                    c.pass.to_string(),
                ])?;
            }
            w.flush()?;
            if !report.passed() {
                let audits = match (report.bijective(), report.region.passed()) {
                    (true, true) => "passed",
                    (false, true) => "failed (duplicate source index)",
                    (true, false) => "failed (region)",
                    (false, false) => "failed (duplicate source index, region)",
                };
                return Err(CliError::VerificationFailed {
                    failed: report.checks.iter().filter(|c| !c.pass).count(),
                    total: report.checks.len(),
                    audits,
                });
            }
            Ok(vec![path])
        }
        Command::Split => {
            let mut partition = partition(config)?;
            let path = out.join("split.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["m", "t", "a_m"])?;
            let source = partition.source().clone();
            for m in 1..=config.split_horizon {
                let Some(t) = partition.membership(m) else { break };
                w.write_record([m.to_string(), t.to_string(), source.term(m).to_string()])?;
            }
            w.flush()?;
            Ok(vec![path])
        }
        Command::Fubini => {
            // targets are keyed by integration order; the build wants summation orders
            let by_integration = config.targets()?;
            let targets = PermTargets::new(
                config.n,
                by_integration.iter().map(|(sigma, seq)| (summation_permutation(sigma), seq.clone())),
                None,
            )
            .map_err(BuildError::from)?;
            let assignment = build(config, &targets)?;
            let fub = &config.fubini;
            let bump = BumpFunction::normalized(config.n, fub.quad_tol)?;
            let field = FubiniField::from_assignment(&assignment, bump, fub.layout);
            let boxes = if fub.boxes.is_empty() {
                (1..=config.budget.depth as u32).map(BoxSpec::Outer).collect()
            } else {
                fub.boxes.clone()
            };
            let path = out.join("fubini.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["sigma", "box", "quadrature", "coefficient_sum"])?;
            for sigma in Permutation::all(config.n) {
                for spec in &boxes {
                    let bounds = spec.for_order(&sigma);
                    let r = iterated_integral_with(
                        &field,
                        &sigma,
                        &bounds,
                        fub.quad_tol,
                        fub.max_quadrature_peaks,
                        Execution::default(),
                    )?;
                    w.write_record([
                        sigma.cycle_notation(),
                        bounds.to_string(),
                        r.quadrature.map(|q| q.to_string()).unwrap_or_default(),
                        r.coefficient_sum.to_string(),
                    ])?;
                }
            }
            w.flush()?;
            Ok(vec![path])
        }
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return 2;
        }
    };
    if let Some(t) = args.tolerance {
        if !(t > 0.0) {
            eprintln!("--tolerance must be positive");
            return 2;
        }
        config.tolerance = t;
    }
    match run(&config, args.command, &args.out) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
