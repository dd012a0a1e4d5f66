//! Command-line surface. Exit status: 0 when every finding is certified,
//! 1 when provisional findings are present, 2 on refuted findings or errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::SetPresentation;
use crate::classes::{audit_low_basis, low_basis_path, LowBasisConfig};
use crate::coloring::Coloring;
use crate::forcing::{
    rt2_pipeline, run_coh, run_d2, run_em, verify_transcript, AuditReport, CohSchedule, D2Instance, EmInstance,
    ForcingConfig, Grade, SelectionRule, Transcript,
};
use crate::omega_model::{audit, build_model, build_nested, join_law_violations, ModelConfig};

use super::generate;
use super::instance::{parse_instance, Instance, InstanceBody, InstanceFile};
use super::oracle;
use super::persist::{emit, emit_transcript, load_transcript};

#[derive(Debug, Parser)]
#[command(name = "workbench", about = "Forcing constructions with replayable transcripts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Stage budget of a construction.
    #[arg(long, default_value_t = 60)]
    pub stages: u64,
    /// Step bound of every halting question.
    #[arg(long, default_value_t = 256)]
    pub fuel: u64,
    /// Tree or model depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Cap on the number of partitions a question may enumerate.
    #[arg(long, default_value_t = 19_683)]
    pub partition_cap: u64,
    /// Smallest reservoir still taken as infinite; 8 for COH, 1 otherwise.
    #[arg(long)]
    pub density: Option<usize>,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OracleArg {
    Homogeneous,
    Fallow,
    D2Subset,
    CohesiveCheck,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenArg {
    Coloring,
    StableColoring,
    Delta2Partition,
    Family,
    ProgramSet,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cohesive set for a family of sets.
    RunCoh {
        instance: PathBuf,
        /// Skip the coded models recorded in the header.
        #[arg(long)]
        no_models: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fallow set for a stable coloring.
    RunEm {
        instance: PathBuf,
        #[arg(long)]
        window: Option<u64>,
        #[arg(long)]
        no_models: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Subset of one part of a Δ⁰₂ partition.
    RunD2 {
        instance: PathBuf,
        #[arg(long)]
        no_models: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Homogeneous set for a coloring of pairs. Writes `<out>.coh.json` and
    /// `<out>.d2.json`.
    RunRt2 {
        instance: PathBuf,
        #[arg(long)]
        window: Option<u64>,
        #[arg(long)]
        no_models: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Low path through a tree with its decision log.
    LowBasis {
        instance: PathBuf,
        #[arg(long, default_value_t = 6)]
        e_bound: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Coded model over `evens`, `primes` or the first set of a family file.
    BuildModel {
        #[arg(long, default_value = "evens")]
        base: String,
        #[arg(long, default_value_t = 64)]
        window: u64,
        #[arg(long)]
        low: bool,
        /// Also build a model over this row of the first one.
        #[arg(long)]
        nested: Option<u128>,
        #[command(flatten)]
        common: Common,
    },
    /// Audit a transcript file.
    Verify {
        transcript: PathBuf,
        /// Audit fuel; twice the recorded fuel when absent.
        #[arg(long)]
        fuel: Option<u64>,
    },
    /// Exhaustive ground truth for an instance.
    Oracle {
        kind: OracleArg,
        instance: PathBuf,
        /// Domain bound for the subset searches.
        #[arg(long, default_value_t = 12)]
        bound: u64,
        /// Finite set checked by `cohesive-check`, comma separated.
        #[arg(long, value_delimiter = ',')]
        points: Vec<u64>,
    },
    /// Seeded instance file.
    Gen {
        kind: GenArg,
        /// Seeds are TOML integers, so at most 2^63 - 1.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        colors: u8,
        #[arg(long, default_value_t = 40)]
        size: u64,
        #[arg(long, default_value_t = 32)]
        bound: u64,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

type CliResult = Result<i32, String>;

fn config(common: &Common, no_models: bool, density: usize) -> ForcingConfig {
    let mut cfg = ForcingConfig {
        fuel: common.fuel,
        partition_cap: common.partition_cap,
        density: common.density.unwrap_or(density),
        ..ForcingConfig::default()
    };
    if no_models {
        cfg = cfg.without_models();
    }
    cfg
}

fn read_instance(path: &Path) -> Result<Instance, String> {
    let source = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_instance(&source).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn report(t: &Transcript, out: Option<&Path>) -> CliResult {
    let hash = match out {
        Some(path) => emit_transcript(t, path).map_err(|e| e.to_string())?,
        None => t.hash(),
    };
    let audit = verify_transcript(t, 2 * t.header.fuel);
    println!("transcript {hash}");
    println!("stages {}, extracted {:?}", t.stages.len(), t.extraction.set);
    if let Some(why) = &t.extraction.stopped {
        println!("stopped: {why}");
    }
    print_audit(&audit);
    Ok(audit.exit_code())
}

fn print_audit(audit: &AuditReport) {
    println!(
        "audit: {} certified, {} provisional, {} refuted",
        audit.count(Grade::Certified),
        audit.count(Grade::Provisional),
        audit.count(Grade::Refuted)
    );
    for f in audit.findings.iter().filter(|f| f.grade != Grade::Certified) {
        let stage = f.stage.map_or(String::new(), |s| format!("stage {s}: "));
        println!("  {:?} {stage}{}: {}", f.grade, f.check, f.detail);
    }
}

fn coloring_of(inst: &Instance) -> Result<&Coloring, String> {
    match &inst.body {
        InstanceBody::Coloring(c) => Ok(c),
        _ => Err(format!("{} is not a coloring", inst.name)),
    }
}

fn default_window(c: &Coloring, window: Option<u64>) -> Result<u64, String> {
    match (window, c) {
        (Some(w), _) => Ok(w),
        (None, Coloring::Stable(s)) => Ok(s.size()),
        (None, Coloring::Table { size, .. }) => Ok(*size),
        _ => Err("give --window".into()),
    }
}

fn suffixed(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

pub fn execute(cli: Cli) -> CliResult {
    match cli.command {
        Command::RunCoh { instance, no_models, common } => {
            let inst = read_instance(&instance)?;
            let InstanceBody::Family { window, sets } = &inst.body else {
                return Err(format!("{} is not a family", inst.name));
            };
            let cfg = config(&common, no_models, 8);
            let run = run_coh(sets, *window, common.stages, &cfg, CohSchedule::RoundRobin, SelectionRule::Pi2Search)
                .map_err(|e| e.to_string())?;
            report(&run.transcript, common.out.as_deref())
        }
        Command::RunEm { instance, window, no_models, common } => {
            let inst = read_instance(&instance)?;
            let c = coloring_of(&inst)?;
            let window = match (window, c) {
                (None, Coloring::Table { size, .. }) => size - 1,
                _ => default_window(c, window)?,
            };
            let cfg = config(&common, no_models, 1);
            let em = EmInstance::new(&inst.name, c, window, &cfg).map_err(|e| e.to_string())?;
            let run = run_em(&em, common.stages, &cfg).map_err(|e| e.to_string())?;
            report(&run.transcript, common.out.as_deref())
        }
        Command::RunD2 { instance, no_models, common } => {
            let inst = read_instance(&instance)?;
            let InstanceBody::Partition { window, presentation } = inst.body else {
                return Err(format!("{} is not a partition", inst.name));
            };
            let cfg = config(&common, no_models, 1);
            let d2 = D2Instance::new(&inst.name, presentation, window, &cfg).map_err(|e| e.to_string())?;
            let run = run_d2(&d2, common.stages, &cfg).map_err(|e| e.to_string())?;
            report(&run.transcript, common.out.as_deref())
        }
        Command::RunRt2 { instance, window, no_models, common } => {
            let inst = read_instance(&instance)?;
            let c = coloring_of(&inst)?;
            let window = default_window(c, window)?;
            let cfg = config(&common, no_models, 1);
            let run = rt2_pipeline(c, window, common.stages, &cfg).map_err(|e| e.to_string())?;
            let outs = common.out.as_deref().map(|o| (suffixed(o, ".coh.json"), suffixed(o, ".d2.json")));
            println!("cohesive {:?}", run.cohesive);
            let a = report(&run.coh, outs.as_ref().map(|o| o.0.as_path()))?;
            let b = report(&run.d2, outs.as_ref().map(|o| o.1.as_path()))?;
            match run.color {
                Some(i) => println!("homogeneous for color {i}: {:?}", run.homogeneous),
                None => println!("no homogeneous set"),
            }
            Ok(a.max(b))
        }
        Command::LowBasis { instance, e_bound, common } => {
            let inst = read_instance(&instance)?;
            let InstanceBody::Tree { depth, tree } = inst.body else {
                return Err(format!("{} is not a tree", inst.name));
            };
            let cfg = LowBasisConfig { fuel: common.fuel, ..LowBasisConfig::default() };
            let depth = common.depth.unwrap_or(depth);
            let (path, log) = low_basis_path(&tree, e_bound, depth, &cfg).map_err(|e| e.to_string())?;
            let findings = audit_low_basis(&tree, &path, &log, &cfg).map_err(|e| e.to_string())?;
            let text = serde_json::to_string_pretty(&serde_json::json!({ "path": path.to_string(), "log": log }))
                .expect("path log serializes");
            write_text(common.out.as_deref(), &text)?;
            findings.iter().for_each(|f| println!("refuted: {f}"));
            let provisional = log.decisions.iter().any(|d| d.provisional);
            Ok(if !findings.is_empty() { 2 } else { i32::from(provisional) })
        }
        Command::BuildModel { base, window, low, nested, common } => {
            let a = match base.as_str() {
                "evens" => SetPresentation::evens(window as usize),
                "primes" => SetPresentation::primes(window as usize),
                path => match read_instance(Path::new(path))?.body {
                    InstanceBody::Family { mut sets, .. } if !sets.is_empty() => sets.swap_remove(0),
                    _ => return Err(format!("{path} is not a family")),
                },
            };
            let depth = common.depth.unwrap_or(200);
            let config = ModelConfig::default();
            let mut model = build_model(&a, depth, low, config.clone()).map_err(|e| e.to_string())?;
            if let Some(row) = nested {
                model = build_nested(&model, row, depth, low, config).map_err(|e| e.to_string())?;
            }
            let mut findings = audit(&model).map_err(|e| e.to_string())?;
            findings.extend(join_law_violations(&model, model.row_count()));
            if let Some(out) = &common.out {
                let hash = emit(&model, out).map_err(|e| e.to_string())?;
                println!("model {hash}");
            }
            println!("model over {} at depth {depth}: {} audit findings", model.base.name, findings.len());
            findings.iter().for_each(|f| println!("  {f}"));
            Ok(if findings.is_empty() { 0 } else { 2 })
        }
        Command::Verify { transcript, fuel } => {
            let t = load_transcript(&transcript).map_err(|e| e.to_string())?;
            let audit = verify_transcript(&t, fuel.unwrap_or(2 * t.header.fuel));
            println!("transcript {}", audit.transcript_hash);
            print_audit(&audit);
            Ok(audit.exit_code())
        }
        Command::Oracle { kind, instance, bound, points } => {
            let inst = read_instance(&instance)?;
            let report = match (kind, &inst.body) {
                (OracleArg::Homogeneous, InstanceBody::Coloring(c)) => oracle::homogeneous(c, bound),
                (OracleArg::Fallow, InstanceBody::Coloring(c)) => oracle::fallow(c, bound),
                (OracleArg::D2Subset, InstanceBody::Partition { window, presentation }) => {
                    oracle::d2_subset(presentation, *window, 4 * bound.max(64))
                }
                (OracleArg::CohesiveCheck, InstanceBody::Family { sets, .. }) => {
                    Ok(oracle::cohesive_check(&points, sets))
                }
                _ => return Err(format!("{kind:?} does not apply to {:?}", inst.kind)),
            }
            .map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(0)
        }
        Command::Gen { kind, seed, colors, size, bound, count, out } => {
            let file: InstanceFile = match kind {
                GenArg::Coloring => generate::random_coloring(seed, colors, size),
                GenArg::StableColoring => {
                    let s = generate::stable_coloring(seed, colors, size, bound);
                    generate::stable_coloring_file(&format!("stable {colors}-coloring"), Some(seed), &s)
                }
                GenArg::Delta2Partition => generate::delta2_partition(seed, colors, size, bound).0,
                GenArg::Family => generate::random_family(seed, count, size),
                GenArg::ProgramSet => generate::program_set(seed, size),
            };
            write_text(out.as_deref(), &file.to_toml())?;
            Ok(0)
        }
    }
}

/// Parses `args` and runs; errors print to stderr and exit with 2.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    }
}
