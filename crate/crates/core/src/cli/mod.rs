//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on a configuration or I/O error, 2 when a
//! run observes an invariant violation (the reproducer seed is printed).
//! The summary goes to the supplied writer; tables go to CSV files in the
//! output directory.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{parse_seed, Settings, DEFAULT_SEED, KEYS};

use crate::automata::{interpolate_config, Dynamics, ParticleConfig};
use crate::clusters::{
    mtp_check, DistanceAttainmentKernel, TransportKernel, UnitNeighborKernel, ZeroKernel,
};
use crate::codec;
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentPlan, PcStatus};
use crate::lattice::Geometry;
use crate::measures::{sample_at, CouplingSampler};
use crate::rng::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Stabilize one configuration and report its odometer
    Stabilize,
    /// Draw a coupled triple X <= Y <= Z
    Sample,
    /// Audit the automaton's axioms over seeded trials
    Verify,
    /// Bisect for the crossing threshold at each size
    Pc,
    /// Stabilization-failure frequency on the torus
    Stab,
    /// Cluster-ratio and macroscopic-count scan over sizes
    Uniqueness,
    /// Coarse-trifurcation counts over sizes
    Trifurcations,
    /// Geodesic merge trials
    MergeDemo,
    /// Mass-transport balance on the torus
    Mtp,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stabilize => "stabilize",
            Command::Sample => "sample",
            Command::Verify => "verify",
            Command::Pc => "pc",
            Command::Stab => "stab",
            Command::Uniqueness => "uniqueness",
            Command::Trifurcations => "trifurcations",
            Command::MergeDemo => "merge-demo",
            Command::Mtp => "mtp",
        }
    }
}

fn parse_override(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

fn seed_arg(s: &str) -> std::result::Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

/// Percolation of toppled and occupied sets of monotone automata.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(name = "monoperc", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Flat key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, decimal or 0x-hex [default: 0x5EED]
    #[arg(long, global = true, value_parser = seed_arg)]
    pub seed: Option<u64>,
    /// Directory for CSV and binary output
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Override a configuration key (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    pub overrides: Vec<(String, String)>,
}

impl RunConfig {
    pub fn new(command: Command, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            config: None,
            seed: None,
            out: out.into(),
            workers: None,
            overrides: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.overrides.push((key.to_string(), value.to_string()));
        self
    }

    pub fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        for (k, v) in &self.overrides {
            s.set(k, v)?;
        }
        Ok(s)
    }
}

enum Failure {
    Config(Error),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs one subcommand and returns the process exit status.
pub fn run(config: &RunConfig, out: &mut (dyn Write + Send)) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(config, out)) {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            2
        }
    }
}

fn dispatch(config: &RunConfig, out: &mut dyn Write) -> Outcome {
    let settings = config.settings()?;
    let seed = config.seed.or(settings.seed()?).unwrap_or(DEFAULT_SEED);
    let plan = settings.plan(seed)?;
    std::fs::create_dir_all(&config.out).map_err(|e| {
        Error::Config(format!("cannot create {}: {e}", config.out.display()))
    })?;
    let dir = config.out.as_path();
    match config.command {
        Command::Stabilize => stabilize(&settings, &plan, dir, out),
        Command::Sample => sample(&plan, dir, out),
        Command::Verify => verify(&plan, dir, out),
        Command::Pc => pc(&plan, dir, out),
        Command::Stab => stab(&plan, dir, out),
        Command::Uniqueness => uniqueness(&settings, &plan, dir, out),
        Command::Trifurcations => trifurcations(&settings, &plan, dir, out),
        Command::MergeDemo => merge_demo(&settings, &plan, dir, out),
        Command::Mtp => mtp(&settings, &plan, dir, out),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn stabilize(settings: &Settings, plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let (geom, xi) = match settings.raw("input.particles") {
        Some(path) => codec::decode_particles(&std::fs::read(path).map_err(|e| {
            Error::Config(format!("cannot read {path}: {e}"))
        })?)?,
        None => {
            let geom = plan.geometry(plan.sizes[0])?;
            let xi = match settings.get::<f64>("input.point_mass")? {
                Some(m) => ParticleConfig::point(geom.len(), geom.index(&geom.center())?, m)?,
                None => {
                    let p = settings.get_or("params.p", 0.9)?;
                    sample_at(&plan.family, p, &geom, rng::derive(plan.seed, &[tag::PARTICLES]))?
                }
            };
            (geom, xi)
        }
    };
    let a = rng::derive(plan.seed, &[tag::AUTOMATON]);
    let r = plan.automaton.stabilize(&xi, &geom, a)?;
    writeln!(
        out,
        "stabilize: {} boundary={} d={} L={}",
        plan.automaton.label(),
        geom.boundary(),
        geom.dim(),
        geom.side()
    )?;
    writeln!(out, "mass in: {}", xi.total())?;
    writeln!(out, "stabilized: {}", r.stabilized)?;
    writeln!(out, "odometer total: {}", r.odometer.total())?;
    writeln!(out, "open sites: {}", r.omega.count_open())?;
    writeln!(out, "dissipated: {}", r.dissipated)?;

    let mut w = csv::Writer::from_writer(create(dir, "stabilize.csv")?);
    w.write_record(["site", "mass", "final", "odometer", "open"])?;
    for i in 0..geom.len() {
        w.write_record([
            i.to_string(),
            xi.get(i).to_string(),
            r.final_config.get(i).to_string(),
            r.odometer.get(i).to_string(),
            (r.omega.is_open(i) as u8).to_string(),
        ])?;
    }
    w.flush()?;
    std::fs::write(dir.join("final.bin"), codec::encode_particles(&geom, &r.final_config)?)?;
    std::fs::write(dir.join("omega.bin"), codec::encode_sites(&geom, &r.omega)?)?;
    Ok(())
}

fn sample(plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let geom = plan.geometry(plan.sizes[0])?;
    let sampler = CouplingSampler::new(
        plan.family.clone(),
        plan.coupling,
        rng::derive(plan.seed, &[tag::PARTICLES]),
    )?;
    let triple = sampler.sample(&geom);
    if !(triple.x.le(&triple.y) && triple.y.le(&triple.z)) {
        return Err(Failure::Invariant(format!("coupling order broken, seed {}", plan.seed)));
    }
    writeln!(out, "sample: {} boundary={} d={} L={}", plan.family.name(), geom.boundary(), geom.dim(), geom.side())?;
    for (p, cfg) in plan.coupling.iter().zip([&triple.x, &triple.y, &triple.z]) {
        let eps = plan.family.insertion_epsilon(*p)?;
        writeln!(
            out,
            "p={p}: mean {:.6} (law mean {:.6}), epsilon {:.6}",
            cfg.mean(),
            plan.family.mean(*p)?,
            eps.epsilon
        )?;
    }
    let mut w = csv::Writer::from_writer(create(dir, "sample.csv")?);
    w.write_record(["site", "x", "y", "z"])?;
    for i in 0..geom.len() {
        w.write_record([
            i.to_string(),
            triple.x.get(i).to_string(),
            triple.y.get(i).to_string(),
            triple.z.get(i).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn verify(plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let report = experiments::verify_axioms(plan)?;
    writeln!(out, "verify: {} L={} trials={}", report.automaton, report.side, plan.trials)?;
    for c in &report.checks {
        writeln!(
            out,
            "{:<8} violations {:>4}  skipped {:>4}/{}",
            c.axiom, c.violations, c.skipped, c.trials
        )?;
    }
    writeln!(out, "total violations: {}", report.total_violations())?;
    report.write_csv(create(dir, "verify.csv")?)?;
    if let Some(c) = report.checks.iter().find(|c| c.violations > 0) {
        let seed = c.reproducer.expect("violations carry a seed");
        writeln!(out, "reproducer seed: {seed}")?;
        return Err(Failure::Invariant(format!("{} violated; reproducer seed {seed}", c.axiom)));
    }
    Ok(())
}

fn pc(plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let est = experiments::estimate_pc_topple(plan)?;
    experiments::write_rows(&est.rows, create(dir, "pc.csv")?)?;
    writeln!(out, "pc: {} with {}", plan.automaton.label(), plan.family.name())?;
    for s in &est.sizes {
        match s.status {
            PcStatus::Estimated { pc_hat, lo, hi } => {
                writeln!(out, "L={}: pc_hat {pc_hat:.5} in [{lo:.5}, {hi:.5}]", s.side)?
            }
            PcStatus::BracketFailure { lo_prob, hi_prob } => writeln!(
                out,
                "L={}: bracket failure, crossing probability {lo_prob:.3} .. {hi_prob:.3}",
                s.side
            )?,
        }
    }
    if est.order_violations > 0 {
        writeln!(out, "reproducer seed: {}", plan.seed)?;
        return Err(Failure::Invariant(format!(
            "{} crossing-order violations; reproducer seed {}",
            est.order_violations, plan.seed
        )));
    }
    Ok(())
}

fn stab(plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let sweep = experiments::estimate_pc_stab(plan)?;
    experiments::write_rows(&sweep.rows, create(dir, "stab.csv")?)?;
    writeln!(out, "stab: {} with {}", plan.automaton.label(), plan.family.name())?;
    for r in &sweep.rows {
        writeln!(
            out,
            "L={} p={}: failure frequency {:.3}, mean odometer at origin {:.2}",
            r.side, r.p, r.stab_fail_freq, r.odometer_mean
        )?;
    }
    for (side, c) in &sweep.crossover {
        match c {
            Some(p) => writeln!(out, "L={side}: failure frequency crosses 1/2 at p ~ {p:.4}")?,
            None => writeln!(out, "L={side}: failure frequency does not cross 1/2 on this grid")?,
        }
    }
    Ok(())
}

fn uniqueness(settings: &Settings, plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let p = settings.get_or("params.p", 0.9)?;
    let rows = experiments::uniqueness_scan(plan, p)?;
    experiments::write_rows(&rows, create(dir, "uniqueness.csv")?)?;
    writeln!(out, "uniqueness: {} at p={p}, delta={}", plan.automaton.label(), plan.delta())?;
    for r in &rows {
        writeln!(
            out,
            "L={}: mean s2/s1 {:.5}, mean macroscopic count {:.3}",
            r.side, r.s2_over_s1_mean, r.macroscopic_count_mean
        )?;
    }
    Ok(())
}

fn trifurcations(settings: &Settings, plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let p = settings.get_or("params.p", 0.9)?;
    let rows = experiments::trifurcation_scan(plan, p, plan.block_radius)?;
    let csv_rows: Vec<_> = rows.iter().map(|r| r.row.clone()).collect();
    experiments::write_rows(&csv_rows, create(dir, "trifurcations.csv")?)?;
    writeln!(out, "trifurcations: {} at p={p}, n={}", plan.automaton.label(), plan.block_radius)?;
    for r in &rows {
        writeln!(
            out,
            "L={}: mean T {:.3}, T/L^(d-1) {:.5}, T/L^d {:.7}",
            r.side, r.mean, r.per_surface, r.per_volume
        )?;
    }
    Ok(())
}

fn merge_demo(settings: &Settings, plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let max_attempts = settings.get_or("merge.max_attempts", 20 * plan.trials)?;
    let s = experiments::staged_merge_trials(plan, plan.trials, max_attempts)?;
    s.write_csv(create(dir, "merge.csv")?)?;
    writeln!(
        out,
        "merge-demo: {} L={} coupling {:?}",
        plan.automaton.label(),
        plan.sizes[0],
        plan.coupling
    )?;
    writeln!(out, "attempts: {}", s.attempts)?;
    writeln!(out, "found pairs: {}", s.found)?;
    writeln!(out, "merged: {}", s.merged)?;
    if let Some(bad) = s.failures().next() {
        writeln!(out, "reproducer seed: {}", bad.seed)?;
        return Err(Failure::Invariant(format!("merge failed; reproducer seed {}", bad.seed)));
    }
    Ok(())
}

/// Configurations are drawn on a torus of the configured dimension and side,
/// whatever `geometry.boundary` says.
fn mtp(settings: &Settings, plan: &ExperimentPlan, dir: &Path, out: &mut dyn Write) -> Outcome {
    let kernel: Box<dyn TransportKernel> = match settings.raw("mtp.kernel").unwrap_or("step2") {
        "step2" => Box::new(DistanceAttainmentKernel),
        "unit" => Box::new(UnitNeighborKernel),
        "zero" => Box::new(ZeroKernel),
        k => return Err(Error::Config(format!("unknown mtp.kernel {k:?}")).into()),
    };
    let configs = settings.get_or("mtp.configs", 10usize)?;
    let side = plan.sizes[0];
    let geom = Geometry::torus(plan.dim, side)?;
    let t = plan.automaton.threshold(&geom);
    let mut w = csv::Writer::from_writer(create(dir, "mtp.csv")?);
    w.write_record(["config", "seed", "kernel", "open_lower", "open_upper", "max_discrepancy", "total", "pass"])?;
    writeln!(out, "mtp: kernel {} on torus d={} L={side}", kernel.name(), plan.dim)?;
    let mut worst = 0.0f64;
    let mut failed = None;
    for k in 0..configs {
        let seed = plan.trial_seed(side, k);
        let triple = CouplingSampler::new(
            plan.family.clone(),
            plan.coupling,
            rng::derive(seed, &[tag::PARTICLES]),
        )?
        .sample(&geom);
        let a = rng::derive(seed, &[tag::AUTOMATON]);
        let lower = plan.automaton.apply(&triple.x, &geom, a)?;
        let omega12 = interpolate_config(&lower.omega, &triple.y, t)?;
        let upper = plan.automaton.apply(&triple.z, &geom, a)?.omega;
        let report = mtp_check(&geom, &omega12, &upper, kernel.as_ref())?;
        worst = worst.max(report.max_discrepancy);
        if !report.pass && failed.is_none() {
            failed = Some(seed);
        }
        w.write_record([
            k.to_string(),
            seed.to_string(),
            kernel.name().to_string(),
            omega12.count_open().to_string(),
            upper.count_open().to_string(),
            format!("{:e}", report.max_discrepancy),
            report.total_by_rows.to_string(),
            report.pass.to_string(),
        ])?;
    }
    w.flush()?;
    writeln!(out, "configurations: {configs}")?;
    writeln!(out, "max discrepancy: {worst:e}")?;
    if let Some(seed) = failed {
        writeln!(out, "reproducer seed: {seed}")?;
        return Err(Failure::Invariant(format!(
            "sent and received mass differ by {worst:e}; reproducer seed {seed}"
        )));
    }
    Ok(())
}
