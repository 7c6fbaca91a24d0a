//! Flat key-value configuration files for the CLI.
//!
//! One `key = value` per line, `#` starts a comment, blank lines ignored.
//! Keys mirror the simulation config fields; unknown keys are errors so
//! typos surface instead of silently using defaults. Tap lists are written
//! as comma-separated `delay_symbols:gain_db` pairs, e.g.
//! `taps = 0:0, 1.5:-15, 3:-20`.

use std::collections::HashMap;
use std::path::Path;

use crate::channel::Tap;
use crate::pipeline::{LinkConfig, SweepConfig};
use crate::{Error, Result};

/// Parsed simulation configuration: a link plus sweep parameters.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub link: LinkConfig,
    pub ebn0_points: Vec<f64>,
    pub bits_per_point: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            link: LinkConfig::default(),
            ebn0_points: vec![6.0, 8.0, 10.0, 12.0],
            bits_per_point: 1_000_000,
        }
    }
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Parses config text over the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut entries: HashMap<String, String> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!("duplicate key `{key}`")));
            }
        }

        // symbol_rate feeds the tap-delay conversion, so apply it first.
        if let Some(v) = entries.remove("symbol_rate_hz") {
            cfg.link.modulation.symbol_rate = parse_f64("symbol_rate_hz", &v)?;
        }
        let symbol_rate = cfg.link.modulation.symbol_rate;

        for (key, value) in entries {
            match key.as_str() {
                "distance_m" => cfg.link.channel.distance_m = parse_f64(&key, &value)?,
                "taps" => cfg.link.channel.taps = parse_taps(&value, symbol_rate)?,
                "ebn0_db" => {
                    cfg.link.channel.ebn0_db = if value.eq_ignore_ascii_case("off") {
                        None
                    } else {
                        Some(parse_f64(&key, &value)?)
                    }
                }
                "phase_noise_linewidth_hz" => {
                    cfg.link.channel.phase_noise_linewidth_hz = parse_f64(&key, &value)?
                }
                "path_loss" => cfg.link.channel.path_loss = parse_bool(&key, &value)?,
                "agc_target_dbm" => {
                    cfg.link.channel.agc.target_power = 10f64.powf(parse_f64(&key, &value)? / 10.0)
                }
                "agc_min_gain_db" => cfg.link.channel.agc.min_gain_db = parse_f64(&key, &value)?,
                "agc_max_gain_db" => cfg.link.channel.agc.max_gain_db = parse_f64(&key, &value)?,
                "samples_per_symbol" => {
                    cfg.link.modulation.samples_per_symbol = parse_usize(&key, &value)?
                }
                "tx_cutoff_hz" => cfg.link.modulation.tx_cutoff_hz = parse_f64(&key, &value)?,
                "tx_filter_order" => {
                    cfg.link.modulation.tx_filter_order = parse_usize(&key, &value)?
                }
                "rx_band_cutoff_hz" => {
                    cfg.link.demodulation.rx_band_cutoff_hz = parse_f64(&key, &value)?
                }
                "rx_band_order" => cfg.link.demodulation.rx_band_order = parse_usize(&key, &value)?,
                "lpf_cutoff_hz" => cfg.link.demodulation.lpf_cutoff_hz = parse_f64(&key, &value)?,
                "lpf_order" => cfg.link.demodulation.lpf_order = parse_usize(&key, &value)?,
                "matched_window" => {
                    cfg.link.demodulation.matched_window = parse_auto_usize(&key, &value)?
                }
                "decision_offset" => {
                    cfg.link.demodulation.decision_offset = parse_auto_usize(&key, &value)?
                }
                "sync_threshold" => {
                    cfg.link.sync_threshold = parse_f64(&key, &value)? as i32;
                }
                "fec" => cfg.link.fec_enabled = parse_bool(&key, &value)?,
                "ebn0_points" => {
                    cfg.ebn0_points = value
                        .split(',')
                        .map(|s| parse_f64("ebn0_points", s))
                        .collect::<Result<_>>()?
                }
                "bits_per_point" => cfg.bits_per_point = parse_f64(&key, &value)? as u64,
                other => {
                    return Err(Error::Config(format!(
                        "unknown configuration key `{other}`"
                    )))
                }
            }
        }
        cfg.link.validate()?;
        Ok(cfg)
    }

    /// Builds a sweep description from this config and a master seed.
    pub fn sweep(&self, master_seed: u64) -> SweepConfig {
        SweepConfig {
            ebn0_points: self.ebn0_points.clone(),
            bits_per_point: self.bits_per_point,
            link: self.link.clone(),
            master_seed,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("key `{key}`: `{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value.trim().parse::<usize>().map_err(|_| {
        Error::Config(format!(
            "key `{key}`: `{value}` is not a nonnegative integer"
        ))
    })
}

fn parse_auto_usize(key: &str, value: &str) -> Result<Option<usize>> {
    if value.trim().eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse_usize(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        other => Err(Error::Config(format!(
            "key `{key}`: `{other}` is not on/off"
        ))),
    }
}

/// `delay_symbols:gain_db` pairs, comma separated.
fn parse_taps(value: &str, symbol_rate: f64) -> Result<Vec<Tap>> {
    value
        .split(',')
        .map(|pair| {
            let (delay, gain) = pair.trim().split_once(':').ok_or_else(|| {
                Error::Config(format!("tap `{pair}`: expected delay_symbols:gain_db"))
            })?;
            let delay_symbols = parse_f64("taps", delay)?;
            let gain_db = parse_f64("taps", gain)?;
            Ok(Tap::new(delay_symbols / symbol_rate, gain_db))
        })
        .collect()
}
