use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use spikeforge::config::parse_config;
use spikeforge::experiment::{self, MemoryParams};
use spikeforge::formats;
use spikeforge_core::analysis::DEFAULT_TRIALS;
use spikeforge_core::connectivity::{IndexedTable, TableDims};

#[derive(Parser)]
#[command(name = "spikeforge", version, about = "Index-based synapse tables and STDP engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured engines on one stimulus and compare them.
    Simulate {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected memory of both layouts over a density grid, plus the
    /// critical density per weight width.
    Memory {
        #[arg(long, default_value_t = 256)]
        inputs: usize,
        #[arg(long, default_value_t = 256)]
        neurons: usize,
        #[arg(long, value_delimiter = ',', default_value = "4,9,16")]
        weight_bits: Vec<u32>,
        /// `start:stop:step` or a comma list.
        #[arg(long, default_value = "0:1:0.05")]
        densities: String,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Forward vs oracle divergence as a function of the refractory period.
    SweepRefractory {
        config: PathBuf,
        /// Comma list; an empty list runs nothing.
        #[arg(long, default_value = "5,10,15,20")]
        t_ref: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edge list (`pre,post,weight`) to binary table dump.
    Encode {
        edges: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Table inputs; defaults to the largest `pre` plus one.
        #[arg(long)]
        inputs: Option<usize>,
        /// Table neurons; defaults to the largest `post` plus one.
        #[arg(long)]
        neurons: Option<usize>,
        #[arg(long, default_value_t = 9)]
        weight_bits: u32,
    },
    /// Binary table dump to edge list.
    Decode {
        table: PathBuf,
        /// Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
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

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = parse_config(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let sim = experiment::simulate(&cfg)?;
            experiment::write_outputs(&cfg, &sim, &dir)?;
            print!("{}", sim.summary());
            Ok(sim.passed())
        }
        Command::Memory { inputs, neurons, weight_bits, densities, trials, seed, tolerance, out } => {
            let grid = experiment::parse_density_grid(&densities)?;
            let params =
                MemoryParams { inputs, neurons, weight_bits: &weight_bits, densities: &grid, trials, seed, tolerance };
            let result = experiment::memory(&params, &out)?;
            println!("weight_bits,d_c");
            for (w, c) in &result.crossovers {
                println!("{w},{}", experiment::crossover_text(c));
            }
            Ok(true)
        }
        Command::SweepRefractory { config, t_ref, out } => {
            let cfg = parse_config(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let t_refs = t_ref
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u32>().with_context(|| format!("bad --t-ref value `{s}`")))
                .collect::<Result<Vec<_>>>()?;
            if t_refs.is_empty() {
                return Ok(true);
            }
            let rows = experiment::sweep_refractory(&cfg, &t_refs, &dir)?;
            println!("t_ref,max_diff,frac_gt_4,exact");
            for r in rows {
                println!("{},{},{},{}", r.t_ref, r.max_diff, r.frac_gt_4, r.exact);
            }
            Ok(true)
        }
        Command::Encode { edges, output, inputs, neurons, weight_bits } => {
            let file = File::open(&edges).with_context(|| format!("opening {}", edges.display()))?;
            let dims = match (inputs, neurons) {
                (Some(a), Some(b)) => Some(TableDims::new(a, b, weight_bits)?),
                (None, None) => None,
                _ => anyhow::bail!("give both --inputs and --neurons, or neither"),
            };
            let matrix = formats::read_edges(BufReader::new(file), dims, weight_bits)
                .with_context(|| format!("reading {}", edges.display()))?;
            let table = IndexedTable::encode(&matrix)?;
            fs::write(&output, formats::dump_table(&table)).with_context(|| format!("writing {}", output.display()))?;
            let d = table.dims();
            println!(
                "{}x{} w={} present={} indexed_bits={} crossbar_bits={}",
                d.inputs(),
                d.neurons(),
                d.weight_bits(),
                table.present_count(),
                table.memory_bits(),
                d.crossbar_bits()
            );
            Ok(true)
        }
        Command::Decode { table, output } => {
            let bytes = fs::read(&table).with_context(|| format!("reading {}", table.display()))?;
            let t = formats::load_table(&bytes).with_context(|| format!("decoding {}", table.display()))?;
            let m = t.decode();
            match output {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path)?);
                    formats::write_edges(&mut w, &m)?;
                    w.flush()?;
                }
                None => formats::write_edges(io::stdout().lock(), &m)?,
            }
            Ok(true)
        }
    }
}
