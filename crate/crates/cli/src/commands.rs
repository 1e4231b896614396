//! Command-line surface: one subcommand per experiment plus the pipeline.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use spinmarket_core::renorm::{renormalize_with, temperature_stack, PartitionRule, StackConfig, TemperatureStack, WeightMode, MS_PER_DAY};
use spinmarket_core::signal::{detect_transitions, events_csv, DetectorConfig, DEFAULT_FLOOR, DEFAULT_TOLERANCE};
use spinmarket_core::spin_lab::{
    entropy_curve, hysteresis_loop, magnetocaloric_run, population_inversion_run, EffectiveBeta, HysteresisConfig, RampOrder,
    ScenarioTrace, SpinSystem,
};
use spinmarket_core::table::{float17, CsvTable};
use spinmarket_core::thermometer::{PriceSeries, SignMethod, DEFAULT_THRESHOLD, DEFAULT_TREND_WINDOW};
use spinmarket_core::yang_lee::{
    chain_partition_polynomial, find_fixed_point, find_zeros, hierarchical_temperature_polynomial, julia_inverse_iteration,
    Complex64, JuliaOptions, RenormMap, ZeroSet, DEFAULT_ROOT_TOL,
};

use crate::config::{ConfigMap, PipelineConfig, SEED_ENV};
use crate::error::{CliError, Result};
use crate::ingest::{self, write_tick_csv};
use crate::pipeline::run_pipeline;
use crate::plot::{emit_plot, Dataset, PlotKind};
use crate::synth::{daily_bars, generate_gbm, intraday_session, GbmParams, SessionParams};

#[derive(Debug, Parser)]
#[command(name = "spinmarket", version, about = "Spin-system numerics and market temperature experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the CSV here instead of standard output.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also render an SVG plot (a sibling CSV holds the plotted points).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Model {
    Chain,
    Hierarchical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Tick,
    Ohlcv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SignArg {
    Trend,
    Positive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightsArg {
    Volume,
    Uniform,
    OpenCloseOnly,
}

#[derive(Debug, Args)]
pub struct Source {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Tick)]
    pub format: FormatArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metropolis samples of magnetization and energy on a ring.
    SimulateSpins {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        j: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Sweeps discarded before sampling.
        #[arg(long, default_value_t = 100)]
        burn_in: usize,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Exact microcanonical entropy per spin versus energy per spin.
    EntropyCurve {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        j: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Magnetization loop under a triangular field sweep.
    Hysteresis {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        j: f64,
        #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        h_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        #[arg(long, default_value_t = 50)]
        sweeps: usize,
        /// Sweep the field upward first.
        #[arg(long)]
        up_first: bool,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Sudden field reversal and relaxation through negative temperature.
    Inversion {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        j: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 20_000)]
        flip_time: u64,
        #[arg(long, default_value_t = 60_000)]
        steps: u64,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Adiabatic field ramp to zero at fixed magnetization.
    Magnetocaloric {
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        h: f64,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Complex zeros of an exact partition function.
    PartitionZeros {
        #[arg(long, value_enum, default_value_t = Model::Chain)]
        model: Model,
        /// Reduced coupling K = βJ of the open chain.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        k: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        generations: usize,
        #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Julia set of the hierarchical-lattice map by inverse iteration.
    Julia {
        #[arg(long, default_value_t = 8)]
        generations: usize,
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        /// Starting point (defaults to the critical fixed point).
        #[arg(long, allow_hyphen_values = true)]
        start_re: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        start_im: f64,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Critical fixed point of the renormalization map and its multiplier.
    FixedPoint {
        #[arg(long, default_value_t = 0.3)]
        lo: f64,
        #[arg(long, default_value_t = 0.8)]
        hi: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Signed effective temperature of a price file.
    Temperature {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 32)]
        window: usize,
        /// Sampling interval; defaults to the mean spacing in days.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum, default_value_t = SignArg::Trend)]
        sign: SignArg,
        #[arg(long, default_value_t = DEFAULT_TREND_WINDOW)]
        trend_window: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_hyphen_values = true)]
        threshold: f64,
        #[command(flatten)]
        output: Output,
    },
    /// One block renormalization of a price file, written as ticks.
    Renormalize {
        #[command(flatten)]
        source: Source,
        /// fixed:N, bucket:MS, day or singletons.
        #[arg(long, default_value = "day")]
        partition: String,
        #[arg(long, value_enum, default_value_t = WeightsArg::Volume)]
        weights: WeightsArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Coincidences across temperature files, level 0 first.
    Detect {
        #[arg(long = "level", required = true, num_args = 1..)]
        levels: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Seeded geometric Brownian motion, written as ticks.
    Gbm {
        #[arg(long, default_value_t = 100.0)]
        s0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.2)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0 / 252.0)]
        dt: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = MS_PER_DAY)]
        spacing_ms: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        start_ms: i64,
        /// Generate weekday intraday sessions with U-shaped volume instead;
        /// `n`, `dt`, `spacing-ms` and `start-ms` are then ignored.
        #[arg(long)]
        sessions: Option<usize>,
        #[arg(long, default_value_t = 78)]
        bars_per_day: usize,
        /// With `--sessions`, write one OHLCV bar per day instead of ticks.
        #[arg(long, requires = "sessions")]
        daily: bool,
        #[arg(long, env = SEED_ENV, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// ingest → temperature → renormalize → detect → emit into a run directory.
    Pipeline {
        /// Flat `key = value` file; a previous run's manifest also works.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Overrides the config file and SPINMARKET_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Extra `key=value` overrides, applied last.
        #[arg(long = "set")]
        overrides: Vec<String>,
    },
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn emit(output: &Output, text: &str, plot: impl FnOnce() -> (Dataset, PlotKind)) -> Result<()> {
    if let Some(path) = &output.plot {
        let (ds, kind) = plot();
        emit_plot(&ds, kind, path)?;
    }
    emit_text(output.out.as_deref(), text)
}

fn load_series(source: &Source) -> Result<PriceSeries> {
    match source.format {
        FormatArg::Tick => ingest::parse_tick_csv(&source.input),
        FormatArg::Ohlcv => ingest::parse_ohlcv_csv(&source.input),
    }
}

fn zeros_plot(zeros: &ZeroSet, title: &str) -> (Dataset, PlotKind) {
    let pts = zeros.zeros.iter().map(|z| (z.re, z.im)).collect();
    (Dataset::new(title, "Re", "Im").with_series("zeros", pts), PlotKind::Scatter)
}

fn trace_plot(trace: &ScenarioTrace, title: &str) -> (Dataset, PlotKind) {
    let m = trace.steps.iter().map(|s| (s.time_step as f64, s.magnetization)).collect();
    let h = trace.steps.iter().map(|s| (s.time_step as f64, s.field_h)).collect();
    let ds = Dataset::new(title, "step", "value")
        .with_series("magnetization", m)
        .with_series("field", h);
    (ds, PlotKind::Series)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SimulateSpins { n, j, h, beta, samples, burn_in, seed, output } => {
            let mut system = SpinSystem::new(n, j, h, beta, seed)?;
            system.metropolis_sweep(burn_in)?;
            let mut table = CsvTable::new(&["sample", "magnetization", "energy_per_spin"]);
            let mut pts = Vec::with_capacity(samples);
            for k in 0..samples {
                system.metropolis_sweep(1)?;
                pts.push((k as f64, system.magnetization()));
                table.row([k.to_string(), float17(system.magnetization()), float17(system.energy_per_spin())]);
            }
            emit(&output, &table.finish(), || {
                (Dataset::new("Magnetization", "sample", "m").with_series("m", pts), PlotKind::Series)
            })
        }
        Command::EntropyCurve { j, h, n, output } => {
            let curve = entropy_curve(j, h, n)?;
            emit(&output, &curve.to_csv(), || {
                let ds = Dataset::new("Entropy per spin", "energy per spin", "entropy per spin")
                    .with_series(&format!("J={j}, h={h}, N={n}"), curve.points.clone());
                (ds, PlotKind::Series)
            })
        }
        Command::Hysteresis { n, j, beta, h_max, steps, sweeps, up_first, seed, output } => {
            let mut system = SpinSystem::new(n, j, -h_max, beta, seed)?;
            let config = HysteresisConfig {
                h_max,
                n_field_steps: steps,
                sweeps_per_step: sweeps,
                order: if up_first { RampOrder::UpFirst } else { RampOrder::DownFirst },
            };
            let hl = hysteresis_loop(&mut system, &config)?;
            eprintln!("loop_area={} area_std_err={}", float17(hl.loop_area), float17(hl.area_std_err));
            emit(&output, &hl.to_csv(), || {
                let pts = |b: &[spinmarket_core::spin_lab::BranchPoint]| b.iter().map(|p| (p.field_h, p.magnetization)).collect();
                let ds = Dataset::new("Hysteresis loop", "field h", "magnetization")
                    .with_series("down", pts(&hl.branch_down))
                    .with_series("up", pts(&hl.branch_up));
                (ds, PlotKind::Series)
            })
        }
        Command::Inversion { n, j, h, beta, flip_time, steps, seed, output } => {
            let mut system = SpinSystem::new(n, j, h, beta, seed)?;
            let trace = population_inversion_run(&mut system, flip_time, steps)?;
            emit(&output, &trace.to_csv(), || trace_plot(&trace, "Population inversion"))
        }
        Command::Magnetocaloric { beta, h, steps, output } => {
            let trace = magnetocaloric_run(beta, h, steps)?;
            emit(&output, &trace.to_csv(), || {
                let t = trace
                    .steps
                    .iter()
                    .filter(|s| matches!(s.beta_eff, EffectiveBeta::Finite(_)))
                    .map(|s| (s.field_h, s.beta_eff.temperature()))
                    .collect();
                (Dataset::new("Adiabatic demagnetization", "field h", "temperature").with_series("T_eff", t), PlotKind::Series)
            })
        }
        Command::PartitionZeros { model, k, n, generations, tol, output } => {
            let poly = match model {
                Model::Chain => chain_partition_polynomial(k, n)?,
                Model::Hierarchical => hierarchical_temperature_polynomial(generations)?,
            };
            let zeros = find_zeros(&poly, tol)?;
            emit(&output, &zeros.to_csv(), || zeros_plot(&zeros, "Partition function zeros"))
        }
        Command::Julia { generations, cap, start_re, start_im, seed, output } => {
            let map = RenormMap::dhl_ising()?;
            let start_re = match start_re {
                Some(re) => re,
                None => map
                    .critical_point()
                    .ok_or_else(|| CliError::Validation("map has no critical fixed point".into()))?
                    .t,
            };
            let cloud = julia_inverse_iteration(&map, Complex64::new(start_re, start_im), &JuliaOptions { generations, cap, seed })?;
            emit(&output, &cloud.to_csv(), || {
                let pts = cloud.points.iter().map(|p| (p.z.re, p.z.im)).collect();
                (Dataset::new("Julia set", "Re t", "Im t").with_series("points", pts), PlotKind::Scatter)
            })
        }
        Command::FixedPoint { lo, hi, out } => {
            let map = RenormMap::dhl_ising()?;
            emit_text(out.as_deref(), &find_fixed_point(&map, (lo, hi))?.to_text())
        }
        Command::Temperature { source, window, dt, sign, trend_window, threshold, output } => {
            let series = load_series(&source)?;
            let cfg = StackConfig {
                window,
                sign: match sign {
                    SignArg::Trend => SignMethod::VolatilityTrend { trend_window, threshold },
                    SignArg::Positive => SignMethod::AlwaysPositive,
                },
                weights: WeightMode::Uniform,
                dt_per_level: dt.map(|d| vec![d]),
                time_unit_ms: MS_PER_DAY as f64,
            };
            let stack = temperature_stack(&series, &[], &cfg)?;
            let temps = &stack.levels[0];
            emit(&output, &temps.to_csv(), || {
                let t0 = temps.timestamps.first().copied().unwrap_or(0);
                let pts = temps.defined().map(|(ts, t)| ((ts - t0) as f64 / MS_PER_DAY as f64, t)).collect();
                (Dataset::new("Effective temperature", "days since first sample", "temperature").with_series("T", pts), PlotKind::Series)
            })
        }
        Command::Renormalize { source, partition, weights, out } => {
            let series = load_series(&source)?;
            let rule: PartitionRule = partition.parse()?;
            let mode = match weights {
                WeightsArg::Volume => WeightMode::Volume,
                WeightsArg::Uniform => WeightMode::Uniform,
                WeightsArg::OpenCloseOnly => WeightMode::OpenCloseOnly,
            };
            let coarse = renormalize_with(&series, &rule.apply(&series)?, mode)?;
            emit_text(out.as_deref(), &ingest::series_to_tick_csv(&coarse))
        }
        Command::Detect { levels, tolerance, floor, out } => {
            let series = levels
                .iter()
                .map(|p| ingest::parse_temperature_str(&ingest::read_text(p)?, &p.display().to_string()))
                .collect::<Result<Vec<_>>>()?;
            let stack = TemperatureStack::from_levels(series)?;
            let events = detect_transitions(&stack, &DetectorConfig { tolerance, floor })?;
            emit_text(out.as_deref(), &events_csv(&events, stack.n_levels()))
        }
        Command::Gbm { s0, mu, sigma, dt, n, spacing_ms, start_ms, sessions, bars_per_day, daily, seed, out } => {
            let text = match sessions {
                Some(days) => {
                    let ticks = intraday_session(&SessionParams {
                        trading_days: days,
                        bars_per_day,
                        s0,
                        mu,
                        sigma,
                        seed,
                        ..SessionParams::default()
                    })?;
                    if daily {
                        ingest::write_ohlcv_csv(&daily_bars(&ticks)?)
                    } else {
                        write_tick_csv(&ticks)
                    }
                }
                None => {
                    let series = generate_gbm(&GbmParams { s0, mu, sigma, dt, n, seed }, start_ms, spacing_ms)?;
                    ingest::series_to_tick_csv(&series)
                }
            };
            emit_text(out.as_deref(), &text)
        }
        Command::Pipeline { config, out, input, seed, overrides } => {
            let mut map = match &config {
                Some(path) => ConfigMap::parse(&ingest::read_text(path)?, &path.display().to_string())?,
                None => ConfigMap::default(),
            };
            if let Ok(env_seed) = std::env::var(SEED_ENV) {
                map.set("seed", env_seed);
            }
            if let Some(s) = seed {
                map.set("seed", s.to_string());
            }
            if let Some(p) = input {
                map.set("input", p.display().to_string());
            }
            for pair in &overrides {
                map.set_pair(pair)?;
            }
            let cfg = PipelineConfig::from_map(&map)?;
            let summary = run_pipeline(&cfg, &out)?;
            eprintln!(
                "run {}: levels {:?}, {} events",
                summary.run_dir.display(),
                summary.level_lengths,
                summary.events.len()
            );
            Ok(())
        }
    }
}
