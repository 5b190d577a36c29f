use std::fs::File;
use std::io::{BufWriter, Write as IoWrite};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ibenet::harness::{measure_rtime, run_scenario, sweep_alpha, write_sweep_csv};
use ibenet::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "ibenet",
    about = "Two-node blackboard action selection in a 2D animat world",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report what happened.
    Run {
        /// Scenario TOML file.
        scenario: PathBuf,
        /// Override the network-wide blending factor.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the run seed (default: the scenario's first seed).
        #[arg(long)]
        seed: Option<u64>,
        /// Override the tick budget.
        #[arg(long)]
        ticks: Option<u64>,
        /// Write the full trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sweep the blending factor over repeated seeded runs.
    Sweep {
        /// Scenario TOML file; must carry a reaction-time query.
        scenario: PathBuf,
        /// Comma-separated blending factors.
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Seeded runs per alpha.
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        /// CSV output path for the per-run rows.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON output path for the medians and rank correlation.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), Box<dyn std::error::Error>> {
    match command {
        Command::Run {
            scenario,
            alpha,
            seed,
            ticks,
            trace,
        } => {
            let mut scenario = Scenario::load(&scenario)?;
            if let Some(a) = alpha {
                scenario = scenario.with_alpha(a);
            }
            if let Some(t) = ticks {
                scenario.run.max_ticks = t;
            }
            scenario.validate()?;
            let seed = seed.unwrap_or(scenario.run.seeds[0]);

            let result = run_scenario(&scenario, seed)?;
            println!(
                "{}: {} ticks, alpha {}, seed {}",
                scenario.name, scenario.run.max_ticks, scenario.network.alpha, seed
            );
            let last = result.records.last().expect("max_ticks is positive");
            println!(
                "final action {}, position [{:.2}, {:.2}]",
                last.selected.kind, last.position[0], last.position[1]
            );
            if let Some(query) = &scenario.rtime {
                let m = measure_rtime(&result, query)?;
                match m.rtime {
                    Some(rt) => println!(
                        "rtime({} -> {}): {} ticks (stimulus at {}, action at {})",
                        query.stimulus,
                        query.target_action,
                        rt,
                        m.stimulus_tick,
                        m.action_tick.expect("resolved measurement has a tick")
                    ),
                    None => println!(
                        "rtime({} -> {}): unresolved within {} ticks",
                        query.stimulus, query.target_action, scenario.run.max_ticks
                    ),
                }
            }
            if let Some(path) = trace {
                let mut w = BufWriter::new(File::create(&path)?);
                result.write_json_lines(&mut w)?;
                w.flush()?;
                println!("trace written to {}", path.display());
            }
            Ok(())
        }
        Command::Sweep {
            scenario,
            alphas,
            repeats,
            out,
            summary,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let (rows, sum) = sweep_alpha(&scenario, &alphas, repeats)?;

            let mut w = BufWriter::new(File::create(&out)?);
            write_sweep_csv(&rows, &mut w)?;
            w.flush()?;

            println!("{}: {} runs per alpha", scenario.name, repeats);
            for (alpha, med) in &sum.medians {
                println!("alpha {alpha}: median rtime {med}");
            }
            match sum.spearman {
                Some(rho) => println!("spearman(alpha, median rtime) = {rho}"),
                None => println!("spearman(alpha, median rtime) undefined"),
            }
            println!("rows written to {}", out.display());
            if let Some(path) = summary {
                std::fs::write(&path, serde_json::to_string_pretty(&sum)?)?;
                println!("summary written to {}", path.display());
            }
            Ok(())
        }
    }
}
