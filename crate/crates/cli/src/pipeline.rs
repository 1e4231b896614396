//! ingest → temperature → renormalize → detect → emit, written into one run
//! directory together with a manifest.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spinmarket_core::renorm::{temperature_stack, StackConfig, TemperatureStack};
use spinmarket_core::signal::{detect_transitions, events_csv, DetectorConfig, SignalEvent};
use spinmarket_core::thermometer::PriceSeries;

use crate::config::{InputFormat, InputSource, PipelineConfig};
use crate::error::{in_stage, CliError, Result};
use crate::ingest;
use crate::plot::{render_csv, render_svg, Dataset, PlotKind};
use crate::synth::{generate_gbm, GbmParams};

pub const MANIFEST: &str = "manifest.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Sole writer of a run directory. Files are staged in a hidden sibling
/// directory that replaces the target only when the run completes; an
/// unfinished run leaves nothing behind.
pub struct RunWriter {
    target: PathBuf,
    staging: PathBuf,
    written: Vec<(String, String)>,
    finished: bool,
}

impl RunWriter {
    pub fn create(target: &Path) -> Result<Self> {
        if target.exists() && !Self::replaceable(target)? {
            return Err(CliError::Validation(format!(
                "{} exists and is not a run directory; refusing to overwrite",
                target.display()
            )));
        }
        let name = target
            .file_name()
            .ok_or_else(|| CliError::Validation(format!("{} is not a directory path", target.display())))?;
        let staging = target.with_file_name(format!(".{}.partial", name.to_string_lossy()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
        }
        fs::create_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            written: Vec::new(),
            finished: false,
        })
    }

    fn replaceable(dir: &Path) -> Result<bool> {
        if !dir.is_dir() {
            return Ok(false);
        }
        let mut entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(dir.join(MANIFEST).is_file() || entries.next().is_none())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.staging.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push((name.to_string(), sha256_hex(contents.as_bytes())));
        Ok(())
    }

    /// Writes the manifest (header lines then output checksums) and moves
    /// the run into place.
    pub fn finish(mut self, header: &[(String, String)]) -> Result<PathBuf> {
        let mut manifest = String::from("# spinmarket run manifest\n");
        for (k, v) in header {
            manifest += &format!("{k} = {v}\n");
        }
        for (name, hash) in &self.written {
            manifest += &format!("output.{name} = {hash}\n");
        }
        let path = self.staging.join(MANIFEST);
        fs::write(&path, manifest).map_err(|e| CliError::io(&path, e))?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| CliError::io(&self.target, e))?;
        }
        fs::rename(&self.staging, &self.target).map_err(|e| CliError::io(&self.target, e))?;
        self.finished = true;
        Ok(self.target.clone())
    }
}

impl Drop for RunWriter {
    fn drop(&mut self) {
        if !self.finished {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub events: Vec<SignalEvent>,
    pub level_lengths: Vec<usize>,
}

fn ingest(cfg: &PipelineConfig) -> Result<(PriceSeries, Option<String>)> {
    match &cfg.input {
        InputSource::File { path, format } => {
            let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
            let digest = sha256_hex(&bytes);
            if let Some(expected) = &cfg.input_sha256 {
                if *expected != digest {
                    return Err(CliError::Validation(format!(
                        "{} has sha256 {digest}, manifest expects {expected}",
                        path.display()
                    )));
                }
            }
            let text = String::from_utf8(bytes).map_err(|_| CliError::Validation(format!("{} is not UTF-8", path.display())))?;
            let source = path.display().to_string();
            let series = match format {
                InputFormat::Tick => ingest::ticks_to_series(&ingest::parse_tick_str(&text, &source)?)?,
                InputFormat::Ohlcv => ingest::ohlcv_to_series(&ingest::parse_ohlcv_str(&text, &source)?)?,
            };
            Ok((series, Some(digest)))
        }
        InputSource::Gbm { n, sigma, mu, spacing_ms } => {
            let params = GbmParams {
                s0: 100.0,
                mu: *mu,
                sigma: *sigma,
                dt: *spacing_ms as f64 / cfg.time_unit_ms,
                n: *n,
                seed: cfg.seed.expect("validated on load"),
            };
            Ok((generate_gbm(&params, 0, *spacing_ms)?, None))
        }
    }
}

fn stack_config(cfg: &PipelineConfig, levels: usize) -> StackConfig {
    StackConfig {
        window: cfg.window,
        sign: cfg.sign,
        weights: cfg.weights,
        dt_per_level: cfg.dt.as_ref().map(|d| d[..levels].to_vec()),
        time_unit_ms: cfg.time_unit_ms,
    }
}

fn stack_plot(stack: &TemperatureStack) -> Dataset {
    let t0 = stack.levels[0].timestamps.first().copied().unwrap_or(0);
    stack.levels.iter().fold(
        Dataset::new("Renormalized temperatures", "days since first sample", "temperature"),
        |ds, level| {
            let pts = level
                .defined()
                .map(|(ts, t)| ((ts - t0) as f64 / 86_400_000.0, t))
                .collect();
            ds.with_series(&format!("level {}", level.level), pts)
        },
    )
}

/// Runs every stage and writes the run directory `out`.
pub fn run_pipeline(cfg: &PipelineConfig, out: &Path) -> Result<RunSummary> {
    let (series, input_digest) = in_stage("ingest", ingest(cfg))?;
    in_stage("temperature", temperature_stack(&series, &[], &stack_config(cfg, 1)).map_err(CliError::from))?;
    let stack = in_stage(
        "renormalize",
        temperature_stack(&series, &cfg.partition_rules(), &stack_config(cfg, cfg.n_levels())).map_err(CliError::from),
    )?;
    let detector = DetectorConfig {
        tolerance: cfg.tolerance,
        floor: cfg.floor,
    };
    let events = in_stage("detect", detect_transitions(&stack, &detector).map_err(CliError::from))?;
    let run_dir = in_stage("emit", emit(cfg, out, &stack, &events, input_digest))?;
    Ok(RunSummary {
        run_dir,
        level_lengths: stack.prices.iter().map(PriceSeries::len).collect(),
        events,
    })
}

fn emit(
    cfg: &PipelineConfig,
    out: &Path,
    stack: &TemperatureStack,
    events: &[SignalEvent],
    input_digest: Option<String>,
) -> Result<PathBuf> {
    let mut writer = RunWriter::create(out)?;
    for (k, (prices, temps)) in stack.prices.iter().zip(&stack.levels).enumerate() {
        writer.write(&format!("level{k}_prices.csv"), &prices.to_csv())?;
        writer.write(&format!("level{k}_temperature.csv"), &temps.to_csv())?;
    }
    writer.write("alignment.csv", &stack.alignment_csv())?;
    writer.write("events.csv", &events_csv(events, stack.n_levels()))?;
    let plot = stack_plot(stack);
    writer.write("temperature_stack.svg", &render_svg(&plot, PlotKind::Stack)?)?;
    writer.write("temperature_stack.csv", &render_csv(&plot))?;
    let mut header = vec![("tool_version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    let lines = cfg.to_lines();
    let input_lines = lines.iter().take_while(|(k, _)| k != "seed").cloned();
    header.extend(input_lines);
    if let Some(d) = input_digest {
        header.push(("input_sha256".into(), d));
    }
    header.extend(lines.iter().skip_while(|(k, _)| k != "seed").cloned());
    writer.finish(&header)
}
