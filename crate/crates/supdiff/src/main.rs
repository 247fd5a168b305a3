//! Command-line driver: verify instance files, run single formula families,
//! certify optimality, generate seeded instances, and self-test the bundled
//! corpus. Exit codes: 0 all verified, 1 any refuted, 2 any inconclusive
//! (none refuted), 3 input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use supdiff::harness::{
    bundled_corpus, gen_minimizer, gen_program, gen_random, run_instance, GenBounds, Instance,
    InstanceFile, QueryKind, Report, RunConfig, Status,
};
use supdiff::kernel::{parse_scalar, Scalar};
use supdiff::polyhedra::set_intermediate_cap;
use supdiff::{Error, Result};

#[derive(Parser)]
#[command(name = "supdiff", version, about = "Exact verification of normal-cone and subdifferential identities for finite suprema of polyhedral convex functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Comma-separated decreasing slack grid, e.g. "1,1/2,1/8,1/64"
    #[arg(long, global = true)]
    eps_grid: Option<String>,
    /// Refinement floor for intersection runs
    #[arg(long, global = true, default_value = "1/1048576")]
    eps_floor: String,
    /// Worker threads for query execution (default: SUPDIFF_WORKERS or all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Intermediate generator cap for representation conversions
    #[arg(long, global = true, default_value_t = 100_000)]
    dd_cap: usize,
    /// Write the JSON report here in addition to stdout summaries
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every query in an instance file
    Verify {
        instance: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run only the normal-cone queries of an instance file
    NormalCone {
        instance: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run only the subdifferential queries of an instance file
    Subdiff {
        instance: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Run only the certification queries of an instance file
    Certify {
        instance: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
        /// Override the slack used for every certification pair
        #[arg(long)]
        epsilon: Option<String>,
        /// Override the box radius used for every certification pair
        #[arg(long)]
        u_radius: Option<String>,
        /// Inactive-weight choice: corr or ones
        #[arg(long, default_value = "corr")]
        rho: String,
        /// Probe the zero-objective-multiplier branch
        #[arg(long)]
        probe_slater: bool,
    },
    /// Generate a seeded random instance
    Gen {
        #[arg(long)]
        seed: u64,
        /// Instance flavor: family, minimizer, or program
        #[arg(long, default_value = "family")]
        flavor: String,
        /// Write to this path instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled corpus
    Selftest {
        #[command(flatten)]
        flags: CommonFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Verify { instance, flags } => run_file(&instance, &flags, None),
        Command::NormalCone { instance, flags } => {
            run_file(&instance, &flags, Some(QueryKind::NormalCone))
        }
        Command::Subdiff { instance, flags } => {
            run_file(&instance, &flags, Some(QueryKind::Subdiff))
        }
        Command::Certify {
            instance,
            flags,
            epsilon,
            u_radius,
            rho,
            probe_slater,
        } => {
            let mut file = load_file(&instance)?;
            for q in &mut file.queries {
                if q.kind != QueryKind::Certify {
                    continue;
                }
                if let Some(e) = &epsilon {
                    q.epsilons = vec![e.clone()];
                }
                if let Some(u) = &u_radius {
                    q.u_radii = vec![u.clone()];
                }
                q.weights = Some(match rho.as_str() {
                    "ones" => supdiff::harness::WeightChoice::Ones,
                    "corr" => supdiff::harness::WeightChoice::Corr,
                    other => {
                        return Err(Error::parse(
                            "--rho",
                            format!("expected 'corr' or 'ones', found '{other}'"),
                        ))
                    }
                });
                if probe_slater {
                    q.probe_slater = true;
                }
            }
            let parsed = file.validate()?;
            run_parsed(&parsed, &flags, Some(QueryKind::Certify))
        }
        Command::Gen { seed, flavor, out } => {
            let bounds = GenBounds::default();
            let file = match flavor.as_str() {
                "family" => gen_random(seed, &bounds)?,
                "minimizer" => gen_minimizer(seed, &bounds)?,
                "program" => gen_program(seed, &bounds)?,
                other => {
                    return Err(Error::parse(
                        "--flavor",
                        format!("expected family, minimizer or program, found '{other}'"),
                    ))
                }
            };
            let json = file.to_json();
            match out {
                Some(path) => std::fs::write(&path, json.as_bytes())
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { flags } => {
            let config = build_config(&flags)?;
            let mut worst = Status::Verified;
            let mut reports = Vec::new();
            for (name, text) in bundled_corpus() {
                let file = InstanceFile::parse_str(text)?;
                let parsed = file.validate()?;
                let report = run_instance(&parsed, &config);
                print_summary(name, &report);
                worst = Status::worst(worst, report.status);
                reports.push((name, report));
            }
            if let Some(path) = &flags.json_out {
                let combined: Vec<serde_json::Value> = reports
                    .iter()
                    .map(|(name, r)| {
                        serde_json::json!({
                            "instance": name,
                            "report": serde_json::from_str::<serde_json::Value>(&r.to_json())
                                .expect("report serializes"),
                        })
                    })
                    .collect();
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&combined).expect("serializes"),
                )
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            println!("selftest: {}", status_word(worst));
            Ok(ExitCode::from(worst.exit_code() as u8))
        }
    }
}

fn load_file(path: &PathBuf) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    InstanceFile::parse_str(&text)
}

fn run_file(path: &PathBuf, flags: &CommonFlags, only: Option<QueryKind>) -> Result<ExitCode> {
    let parsed = load_file(path)?.validate()?;
    run_parsed(&parsed, flags, only)
}

fn run_parsed(
    instance: &Instance,
    flags: &CommonFlags,
    only: Option<QueryKind>,
) -> Result<ExitCode> {
    let config = build_config(flags)?;
    let filtered;
    let target = match only {
        None => instance,
        Some(kind) => {
            let queries: Vec<_> = instance
                .queries
                .iter()
                .filter(|q| q.kind == kind)
                .cloned()
                .collect();
            if queries.is_empty() {
                return Err(Error::Domain(format!(
                    "the instance has no {kind:?} queries"
                )));
            }
            filtered = Instance {
                dimension: instance.dimension,
                family: instance.family.clone(),
                objective: instance.objective.clone(),
                queries,
                meta: instance.meta.clone(),
            };
            &filtered
        }
    };
    let report = run_instance(target, &config);
    print_summary("instance", &report);
    if let Some(path) = &flags.json_out {
        std::fs::write(path, report.to_json().as_bytes())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::from(report.status.exit_code() as u8))
}

fn build_config(flags: &CommonFlags) -> Result<RunConfig> {
    set_intermediate_cap(flags.dd_cap);
    let eps_grid = flags
        .eps_grid
        .as_ref()
        .map(|spec| parse_grid(spec))
        .transpose()?;
    let eps_floor = parse_scalar(&flags.eps_floor)?;
    let mut config = RunConfig {
        eps_grid,
        eps_floor,
        ..RunConfig::default()
    };
    if let Some(w) = flags.workers {
        config.workers = w.max(1);
    }
    Ok(config)
}

fn parse_grid(spec: &str) -> Result<Vec<Scalar>> {
    let grid = spec
        .split(',')
        .map(|s| parse_scalar(s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(Error::parse("--eps-grid", "empty grid"));
    }
    for pair in grid.windows(2) {
        if pair[1] >= pair[0] {
            return Err(Error::parse("--eps-grid", "grid must strictly decrease"));
        }
    }
    Ok(grid)
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Inconclusive => "inconclusive",
        Status::Refuted => "refuted",
    }
}

fn print_summary(name: &str, report: &Report) {
    println!("{name}: {}", status_word(report.status));
    for q in &report.queries {
        println!("  query {} [{}] {}", q.index, q.kind, status_word(q.status));
        for c in &q.checks {
            let mut line = format!("    {}: {}", c.name, status_word(c.status));
            if let Some(w) = &c.witness {
                line.push_str(&format!(" witness {w:?}"));
            }
            println!("{line}");
            for note in &c.notes {
                println!("      note: {note}");
            }
        }
    }
}
