use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use jdr_core::detection::GaussianShape;
use jdr_core::experiments::records::{to_csv_string, OutputPaths};
use jdr_core::experiments::{
    concentration_tails, next_repetition_index, run_concentration_experiment, run_fig1_sweep,
    run_metadata, run_order_sweep, run_threshold_report, selftest, write_records, ExistingOutput,
    ExperimentConfig, SweepOptions, ThresholdMode,
};
use jdr_core::rng::derive_seed;
use jdr_core::{HadamardOrder, ModelKind, PhaseNoiseModel};

/// Hadamard joint-detection receiver simulator.
#[derive(Parser)]
#[command(name = "jdrsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity versus baud rate: classical baseline and each receiver order.
    SweepBaud {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Append new repetitions to an existing CSV instead of refusing.
        #[arg(long)]
        append: bool,
    },
    /// MI and capacity versus Hadamard order at a fixed baud rate.
    SweepOrder {
        #[command(flatten)]
        common: Common,
        /// Baud rate in symbols/s.
        #[arg(long)]
        baud: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        append: bool,
    },
    /// Tail probabilities of the port amplitudes against 4 exp(-t^2/n).
    Concentration {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: usize,
        /// Comma-separated list of t values.
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        /// Phase draws per model.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        /// Use this von Mises concentration (and sigma2 = 1/kappa) instead
        /// of the baud-rate calibration.
        #[arg(long)]
        kappa: Option<f64>,
        /// Write concentration.csv here instead of printing to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimized detection threshold at one operating point.
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        baud: f64,
    },
    /// Fast invariant suite; nonzero exit status on failure.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    attenuation_a: Option<f64>,
    #[arg(long = "fiber-length")]
    fiber_length_l: Option<f64>,
    #[arg(long = "photon-flux")]
    photon_flux_n: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    baud_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    orders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    noise_model_kinds: Option<Vec<ModelKind>>,
    #[arg(long)]
    phase_samples: Option<usize>,
    #[arg(long)]
    mi_samples: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// optimized, half-mean, or a fixed threshold value.
    #[arg(long)]
    threshold_mode: Option<ThresholdMode>,
    /// clt or printed.
    #[arg(long)]
    gaussian_shape: Option<GaussianShape>,
    #[arg(long)]
    phase_noise_scale: Option<f64>,
    #[arg(long)]
    mi_partitions: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    cfg.$field = v.clone();
                })*
            };
        }
        set!(
            seed,
            attenuation_a,
            fiber_length_l,
            photon_flux_n,
            baud_grid,
            orders,
            noise_model_kinds,
            phase_samples,
            mi_samples,
            repetitions,
            threshold_mode,
            gaussian_shape,
            phase_noise_scale,
            mi_partitions
        );
        cfg.validate()?;
        Ok(cfg)
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            if w == 0 {
                bail!("--workers must be >= 1");
            }
            builder = builder.num_threads(w);
        }
        Ok(builder.build()?.install(job))
    }
}

fn existing_mode(append: bool) -> ExistingOutput {
    if append {
        ExistingOutput::Append
    } else {
        ExistingOutput::Refuse
    }
}

fn sweep_options(paths: &OutputPaths, append: bool) -> Result<SweepOptions> {
    let first_repetition = if append {
        next_repetition_index(&paths.csv)?
    } else {
        0
    };
    Ok(SweepOptions { first_repetition })
}

fn refuse_existing(paths: &OutputPaths, append: bool) -> Result<()> {
    if !append && paths.csv.exists() {
        bail!(
            "{} already exists; pass --append to add repetitions",
            paths.csv.display()
        );
    }
    Ok(())
}

fn report_written(path: &Path, rows: usize) {
    eprintln!("wrote {rows} rows to {}", path.display());
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SweepBaud {
            common,
            out,
            append,
        } => {
            let cfg = common.config()?;
            let paths = OutputPaths::new(&out, "baud_sweep");
            refuse_existing(&paths, append)?;
            let opts = sweep_options(&paths, append)?;
            let rows = common.in_pool(|| run_fig1_sweep(&cfg, opts))??;
            let meta = run_metadata(
                &cfg,
                "sweep-baud",
                serde_json::json!({ "first_repetition": opts.first_repetition }),
            );
            write_records(&rows, &paths, existing_mode(append), &meta)?;
            report_written(&paths.csv, rows.len());
        }
        Command::SweepOrder {
            common,
            baud,
            out,
            append,
        } => {
            let cfg = common.config()?;
            let paths = OutputPaths::new(&out, "order_sweep");
            refuse_existing(&paths, append)?;
            let opts = sweep_options(&paths, append)?;
            let rows = common.in_pool(|| run_order_sweep(&cfg, baud, opts))??;
            let meta = run_metadata(
                &cfg,
                "sweep-order",
                serde_json::json!({ "baud_rate": baud, "first_repetition": opts.first_repetition }),
            );
            write_records(&rows, &paths, existing_mode(append), &meta)?;
            report_written(&paths.csv, rows.len());
        }
        Command::Concentration {
            common,
            order,
            t_grid,
            trials,
            kappa,
            out,
        } => {
            let cfg = common.config()?;
            let order = HadamardOrder::new(order)?;
            let rows = match kappa {
                Some(k) => common.in_pool(|| -> jdr_core::Result<Vec<_>> {
                    let mut rows = Vec::new();
                    for &kind in &cfg.noise_model_kinds {
                        let model = match kind {
                            ModelKind::VonMises => PhaseNoiseModel::von_mises(k)?,
                            ModelKind::WrappedNormal => PhaseNoiseModel::wrapped_normal(k.recip())?,
                        };
                        let seed = derive_seed(cfg.seed, &[k.to_bits(), order.n() as u64]);
                        rows.extend(concentration_tails(&model, order, &t_grid, trials, seed)?);
                    }
                    Ok(rows)
                })??,
                None => common
                    .in_pool(|| run_concentration_experiment(&cfg, order, &t_grid, trials))??,
            };
            let failed = rows.iter().filter(|r| !r.pass).count();
            match out {
                Some(dir) => {
                    let paths = OutputPaths::new(&dir, "concentration");
                    let meta = run_metadata(
                        &cfg,
                        "concentration",
                        serde_json::json!({ "order": order.n(), "t_grid": t_grid, "trials": trials, "kappa": kappa }),
                    );
                    write_records(&rows, &paths, ExistingOutput::Refuse, &meta)?;
                    report_written(&paths.csv, rows.len());
                }
                None => print!("{}", to_csv_string(&rows)?),
            }
            if failed > 0 {
                eprintln!("{failed} of {} tail checks exceeded the bound", rows.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Threshold {
            common,
            order,
            baud,
        } => {
            let cfg = common.config()?;
            let reports = run_threshold_report(&cfg, HadamardOrder::new(order)?, baud)?;
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
        Command::Selftest => {
            let report = selftest();
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
