//! Batch CLI: single runs, multi-seed scheme comparisons and parameter
//! sweeps, all emitting CSV.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use uavsim::config::Scenario;
use uavsim::sim::{
    self, assignments_csv, metrics_csv, relocations_csv, Algorithm, RunOptions,
};

#[derive(Parser)]
#[command(name = "uavsim", version, about = "Multi-UAV mmWave network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its metrics and relocation log.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Override the config algorithm (proposed, bt, bpl or balanced).
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Option<Algorithm>,
        /// Also write the per-slot assignment dump.
        #[arg(long)]
        dump_assignments: bool,
        /// Also write the generated building grid.
        #[arg(long)]
        dump_city: bool,
    },
    /// Run several schemes over a range of seeds on identical cities and
    /// trajectories, and write aligned per-run CSVs plus a summary.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated schemes to compare.
        #[arg(
            long,
            value_delimiter = ',',
            value_parser = parse_algorithm,
            default_values = ["proposed", "bt", "balanced"]
        )]
        algorithms: Vec<Algorithm>,
        /// Number of consecutive seeds, starting at the base seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Re-run the scenario while varying one config key.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Dotted config path, e.g. `users.count` or `city.density`.
        #[arg(long)]
        param: String,
        /// Comma-separated values substituted into the config.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate {
            common,
            algorithm,
            dump_assignments,
            dump_city,
        } => {
            let mut scenario = Scenario::load(&common.config)?;
            if let Some(seed) = common.seed {
                scenario.seed = seed;
            }
            let algorithm = algorithm.unwrap_or(scenario.algorithm);
            fs::create_dir_all(&common.out)?;
            let options = RunOptions {
                capture_assignments: dump_assignments,
                ..RunOptions::default()
            };
            let out = sim::run_with_options(&scenario, algorithm, options)?;
            fs::write(common.out.join("metrics.csv"), metrics_csv(algorithm, &out.metrics))?;
            fs::write(
                common.out.join("relocations.csv"),
                relocations_csv(&out.relocations),
            )?;
            if let Some(assignments) = &out.assignments {
                fs::write(
                    common.out.join("assignments.csv"),
                    assignments_csv(assignments),
                )?;
            }
            if dump_city {
                out.grid.save(&common.out.join("city.txt"))?;
            }
            let last = out.metrics.last().expect("at least one slot");
            println!(
                "{}: {} slots, final unserved {:.2}%, delay SD {:.3} s, {:.3e} bits, {:.1} J",
                algorithm,
                out.metrics.len(),
                last.unserved_pct,
                last.delay_sd_s,
                last.total_bits,
                last.energy_j
            );
            Ok(())
        }
        Command::Compare {
            common,
            algorithms,
            seeds,
        } => {
            let mut scenario = Scenario::load(&common.config)?;
            if let Some(seed) = common.seed {
                scenario.seed = seed;
            }
            if algorithms.len() < 2 {
                return Err("compare needs at least two algorithms".into());
            }
            fs::create_dir_all(&common.out)?;
            let base_seed = scenario.seed;
            let jobs: Vec<(u64, Algorithm)> = (0..seeds)
                .flat_map(|s| algorithms.iter().map(move |&a| (base_seed + s, a)))
                .collect();
            let results: Vec<_> = jobs
                .par_iter()
                .map(|&(seed, algorithm)| {
                    let mut s = scenario.clone();
                    s.seed = seed;
                    sim::run_with_options(&s, algorithm, RunOptions::default())
                        .map(|out| (seed, algorithm, out))
                })
                .collect::<Result<_, _>>()?;

            let mut summary =
                String::from("algorithm,seed,mean_unserved_pct,final_delay_sd_s,total_bits,energy_j,final_ee_bits_per_j\n");
            for (seed, algorithm, out) in &results {
                fs::write(
                    common.out.join(format!("metrics_{algorithm}_seed{seed}.csv")),
                    metrics_csv(*algorithm, &out.metrics),
                )?;
                let mean_unserved = out.metrics.iter().map(|r| r.unserved_pct).sum::<f64>()
                    / out.metrics.len() as f64;
                let last = out.metrics.last().expect("at least one slot");
                let ee = last
                    .energy_efficiency
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "undefined".into());
                summary.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    algorithm, seed, mean_unserved, last.delay_sd_s, last.total_bits,
                    last.energy_j, ee
                ));
            }
            fs::write(common.out.join("summary.csv"), summary)?;
            println!(
                "compared {} schemes x {} seeds -> {}",
                algorithms.len(),
                seeds,
                common.out.display()
            );
            Ok(())
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            if values.is_empty() {
                return Err("sweep needs at least one value".into());
            }
            let text = fs::read_to_string(&common.config)?;
            fs::create_dir_all(&common.out)?;
            let mut summary = String::from(
                "param,value,mean_unserved_pct,final_delay_sd_s,total_bits,energy_j,final_ee_bits_per_j\n",
            );
            for value in &values {
                let mut scenario = uavsim::config::apply_override(&text, &param, value)?;
                if let Some(seed) = common.seed {
                    scenario.seed = seed;
                }
                let out = sim::run(&scenario)?;
                let tag = value.replace('.', "_");
                fs::write(
                    common.out.join(format!("metrics_{}_{}.csv", param.replace('.', "_"), tag)),
                    metrics_csv(scenario.algorithm, &out.metrics),
                )?;
                let mean_unserved = out.metrics.iter().map(|r| r.unserved_pct).sum::<f64>()
                    / out.metrics.len() as f64;
                let last = out.metrics.last().expect("at least one slot");
                let ee = last
                    .energy_efficiency
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "undefined".into());
                summary.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    param, value, mean_unserved, last.delay_sd_s, last.total_bits,
                    last.energy_j, ee
                ));
            }
            fs::write(common.out.join("summary.csv"), summary)?;
            println!("swept {} over {} values -> {}", param, values.len(), common.out.display());
            Ok(())
        }
    }
}
