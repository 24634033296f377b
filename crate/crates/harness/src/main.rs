use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use semiclassical::potentials::audit_a1prime;
use semiclassical_harness::config::{RunConfig, MIN_SWEEP_ROWS};
use semiclassical_harness::experiments::{evolve_path, run_convergence, Theorem};
use semiclassical_harness::report::{self, ConvergenceTable, SuiteReport, SLOPE_BAND};
use semiclassical_harness::snapshot::{save_snapshot, Snapshot};
use semiclassical_harness::suites::run_suite;

#[derive(Parser)]
#[command(
    name = "semiclassical",
    version,
    about = "Semiclassical phase-space experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report the decay and moment assumptions of the configured potential.
    Audit {
        config: PathBuf,
        /// Sobolev order to audit for.
        #[arg(long)]
        r: Option<u32>,
    },
    /// Evolve once and dump snapshots.
    Evolve {
        config: PathBuf,
        /// Defaults to the first configured ε.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Snapshot directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ε-sweep and fit convergence slopes.
    Converge {
        config: PathBuf,
        #[arg(long, value_parser = parse_theorem)]
        theorem: Theorem,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run an inequality suite: regularity, appendix or auxiliary.
    Suite {
        config: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Merge sweep CSVs and refit every series.
    Report {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn parse_theorem(s: &str) -> Result<Theorem, String> {
    s.parse()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit_rows(rows: &[report::Row], csv: Option<&Path>) -> anyhow::Result<()> {
    match csv {
        Some(p) => report::save_csv(rows, p).with_context(|| format!("writing {}", p.display())),
        None => Ok(report::write_csv(rows, std::io::stdout().lock())?),
    }
}

fn print_table(t: &ConvergenceTable) {
    for w in &t.warnings {
        eprintln!("warning: {w}");
    }
    for f in &t.fits {
        let slope = f.slope.map_or("-".into(), |s| format!("{s:.4}"));
        let verdict = match f.passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "info",
        };
        eprintln!(
            "{verdict:4}  {} [{}] slope {slope} ({} rows)",
            f.experiment, f.norm, f.used
        );
    }
}

fn print_suite(s: &SuiteReport) {
    for c in &s.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        eprintln!(
            "{verdict:4}  {}: {:.6e} vs {:.6e} (slack {}, {} samples, {} violations)",
            c.name, c.lhs, c.rhs, c.slack, c.samples, c.violations
        );
    }
    for n in &s.notes {
        eprintln!("note: {n}");
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Audit { config, r } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate(1)?;
            let pot = cfg.potential()?;
            let r = r.unwrap_or(cfg.r);
            let mut ok = true;
            for &eps in &cfg.epsilons {
                if pot.is_polynomial() {
                    println!("polynomial potential: moment audit does not apply");
                    break;
                }
                let a = audit_a1prime(&pot, r, &cfg.params(eps)?)?;
                ok &= !matches!(a.status, semiclassical::potentials::AuditStatus::Fails);
                println!(
                    "ε = {eps}: {:?} (θ = {:?}, M0 = {:?})",
                    a.status, a.theta, a.m0
                );
                if let Some(reason) = &a.reason {
                    println!("  reason: {reason}");
                }
                for s in &a.tail_bound_samples {
                    println!(
                        "  m = {}: tail {:.4e}, scale {:.4e}, bound {:?}",
                        s.m, s.measured, s.scale, s.bound
                    );
                }
            }
            Ok(ok)
        }
        Command::Evolve {
            config,
            epsilon,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate(1)?;
            let eps = epsilon.unwrap_or(cfg.epsilons[0]);
            let dir = out
                .or(cfg.output.snapshots.clone())
                .unwrap_or_else(|| PathBuf::from("snapshots"));
            std::fs::create_dir_all(&dir)?;
            let path = evolve_path(&cfg, eps)?;
            for (i, (t, field)) in path.into_iter().enumerate() {
                let file = dir.join(format!("{}-{i:04}.wsnp", cfg.experiment));
                println!(
                    "t = {t:.6}  ‖W‖ = {:.12}  {}",
                    field.l2_norm(),
                    file.display()
                );
                save_snapshot(
                    &file,
                    &Snapshot {
                        epsilon: eps,
                        t,
                        field,
                    },
                )?;
            }
            Ok(true)
        }
        Command::Converge {
            config,
            theorem,
            csv,
            json,
        } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate(MIN_SWEEP_ROWS)?;
            let table = run_convergence(&cfg, theorem)?;
            print_table(&table);
            emit_rows(&table.rows, csv.or(cfg.output.csv.clone()).as_deref())?;
            if let Some(j) = json.or(cfg.output.json.clone()) {
                report::save_json(&table, &j)?;
            }
            Ok(table.passed())
        }
        Command::Suite {
            config,
            name,
            csv,
            json,
        } => {
            let cfg = RunConfig::load(&config)?;
            let suite = run_suite(&name, &cfg)?;
            print_suite(&suite);
            emit_rows(&suite.rows(), csv.or(cfg.output.csv.clone()).as_deref())?;
            if let Some(j) = json.or(cfg.output.json.clone()) {
                report::save_json(&suite, &j)?;
            }
            Ok(suite.passed())
        }
        Command::Report { inputs, csv, json } => {
            anyhow::ensure!(!inputs.is_empty(), "no CSV inputs given");
            let mut rows = Vec::new();
            for p in &inputs {
                rows.extend(report::load_csv(p)?);
            }
            // The first norm recorded for a series is the one its sweep asserts.
            let mut primary: Vec<(String, String)> = Vec::new();
            for r in &rows {
                if !primary.iter().any(|(e, _)| *e == r.experiment) {
                    primary.push((r.experiment.clone(), r.norm.clone()));
                }
            }
            let table = report::merge(rows, |exp, norm| {
                let asserted = exp.ends_with("/rho-W") || exp.ends_with("/rho1-Wt");
                let first = primary.iter().any(|(e, n)| e == exp && n == norm);
                (asserted && first).then_some(SLOPE_BAND)
            });
            print_table(&table);
            emit_rows(&table.rows, csv.as_deref())?;
            if let Some(j) = json {
                report::save_json(&table, &j)?;
            }
            Ok(table.passed())
        }
    }
}
