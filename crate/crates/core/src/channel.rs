//! Channel impairments between transmitter and receiver: distance power
//! law, multipath tap-delay line, oscillator phase noise, AWGN and AGC.
//!
//! Absolute power bookkeeping uses a milliwatt scale where the unit-power
//! transmit stream sits at 0 dBm; the receive level anchors are -34 dBm at
//! 1 m and -54 dBm at 10 m, a free-space 20 dB/decade law between the two.
//! Noise is injected white at the sample rate with a variance referred to
//! the demodulator decision point through [`ReceiverCalibration`], so a
//! requested Eb/N0 is what the decision actually sees.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::phy::filter::SosFilter;
use crate::phy::{IqStream, ReceiverCalibration};
use crate::{Error, Result};

/// Received power at 1 m, dBm.
pub const RX_POWER_AT_1M_DBM: f64 = -34.0;

/// Received IF power for a line-of-sight path: -34 dBm at 1 m falling
/// 20 dB per decade to -54 dBm at 10 m.
pub fn received_power_dbm(distance_m: f64) -> Result<f64> {
    if !distance_m.is_finite() || distance_m <= 0.0 {
        return Err(Error::Config(format!(
            "distance must be positive, got {distance_m} m"
        )));
    }
    Ok(RX_POWER_AT_1M_DBM - 20.0 * distance_m.log10())
}

/// One multipath arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub gain: Complex64,
}

impl Tap {
    pub fn new(delay_s: f64, gain_db: f64) -> Self {
        Self {
            delay_s,
            gain: Complex64::new(10f64.powf(gain_db / 20.0), 0.0),
        }
    }
}

/// Default line-of-sight profile: direct path plus two weak reflections
/// standing in for front-end imperfections and room echoes.
pub fn default_taps(symbol_rate: f64) -> Vec<Tap> {
    vec![
        Tap::new(0.0, 0.0),
        Tap::new(1.5 / symbol_rate, -15.0),
        Tap::new(3.0 / symbol_rate, -20.0),
    ]
}

/// Automatic gain control parameters. The dynamic range is the difference
/// of the two clamp limits (20 dB for the 8..28 dB defaults).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcConfig {
    /// Power the loop drives its output toward, on the milliwatt scale.
    pub target_power: f64,
    pub min_gain_db: f64,
    pub max_gain_db: f64,
}

impl Default for AgcConfig {
    fn default() -> Self {
        Self {
            // -26 dBm: 8 dB of gain at the 1 m anchor, 28 dB at 10 m.
            target_power: 10f64.powf(-2.6),
            min_gain_db: 8.0,
            max_gain_db: 28.0,
        }
    }
}

impl AgcConfig {
    pub fn dynamic_range_db(&self) -> f64 {
        self.max_gain_db - self.min_gain_db
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_gain_db > self.max_gain_db {
            return Err(Error::Config("AGC gain limits inverted".into()));
        }
        if !self.target_power.is_finite() || self.target_power <= 0.0 {
            return Err(Error::Config("AGC target power must be positive".into()));
        }
        Ok(())
    }
}

/// Full channel parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub distance_m: f64,
    pub taps: Vec<Tap>,
    /// Decision-point Eb/N0 in dB; `None` switches noise off.
    pub ebn0_db: Option<f64>,
    pub phase_noise_linewidth_hz: f64,
    pub agc: AgcConfig,
    /// Apply the distance power law. Off keeps the stream at transmit
    /// scale, which is convenient for unit tests and BER sweeps.
    pub path_loss: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            distance_m: 10.0,
            taps: default_taps(crate::phy::DEFAULT_SYMBOL_RATE),
            ebn0_db: Some(16.0),
            phase_noise_linewidth_hz: 0.0,
            agc: AgcConfig::default(),
            path_loss: true,
        }
    }
}

impl ChannelConfig {
    /// An ideal pass-through: single unit tap, no noise, no phase noise,
    /// no path loss.
    pub fn identity() -> Self {
        Self {
            distance_m: 1.0,
            taps: vec![Tap::new(0.0, 0.0)],
            ebn0_db: None,
            phase_noise_linewidth_hz: 0.0,
            agc: AgcConfig::default(),
            path_loss: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        if self.taps.iter().any(|t| t.delay_s < 0.0) {
            return Err(Error::Config("tap delays must be nonnegative".into()));
        }
        let first = self.taps[0].gain.norm();
        if self.taps[1..].iter().any(|t| t.gain.norm() > first) {
            return Err(Error::Config(
                "first tap must be the strongest (line-of-sight profile)".into(),
            ));
        }
        if !self.distance_m.is_finite() || self.distance_m <= 0.0 {
            return Err(Error::Config("distance must be positive".into()));
        }
        if self.phase_noise_linewidth_hz < 0.0 {
            return Err(Error::Config("linewidth must be nonnegative".into()));
        }
        self.agc.validate()
    }

    /// The modeled operating range is 1..10 m line-of-sight; outside that
    /// the power law is extrapolation, worth a warning but not an error.
    pub fn range_warning(&self) -> Option<String> {
        if self.distance_m < 1.0 || self.distance_m > 10.0 {
            Some(format!(
                "distance {} m outside the modeled 1-10 m line-of-sight range",
                self.distance_m
            ))
        } else {
            None
        }
    }
}

/// Streaming channel simulator. Deterministic for a fixed seed: the
/// per-sample draw order is fixed, so chunk boundaries cannot change the
/// output.
#[derive(Debug, Clone)]
pub struct Channel {
    taps: Vec<(usize, Complex64)>,
    history: Vec<Complex64>,
    idx: usize,
    identity_fir: bool,
    amp: f64,
    phase: f64,
    phase_sigma: f64,
    noise_sigma: f64,
    rng: ChaCha12Rng,
}

impl Channel {
    /// Builds a channel for streams at `sample_rate`, referring the noise
    /// level to `calibration` (the receiver the stream will meet) on the
    /// assumption of a unit-power input as produced by the modulator.
    pub fn new(
        cfg: &ChannelConfig,
        sample_rate: f64,
        calibration: &ReceiverCalibration,
        seed: u64,
    ) -> Result<Self> {
        cfg.validate()?;
        let taps: Vec<(usize, Complex64)> = cfg
            .taps
            .iter()
            .map(|t| ((t.delay_s * sample_rate).round() as usize, t.gain))
            .collect();
        let max_delay = taps.iter().map(|&(d, _)| d).max().unwrap_or(0);
        let identity_fir = taps.len() == 1 && taps[0].0 == 0 && taps[0].1 == Complex64::ONE;

        let amp = if cfg.path_loss {
            10f64.powf(received_power_dbm(cfg.distance_m)? / 20.0)
        } else {
            1.0
        };

        let phase_sigma = if cfg.phase_noise_linewidth_hz > 0.0 {
            (2.0 * std::f64::consts::PI * cfg.phase_noise_linewidth_hz / sample_rate).sqrt()
        } else {
            0.0
        };

        let noise_sigma = match cfg.ebn0_db {
            Some(db) => {
                let tap_power: f64 = taps.iter().map(|&(_, g)| g.norm_sqr()).sum();
                let signal_power = tap_power * amp * amp;
                let variance = calibration.noise_variance(signal_power, 10f64.powf(db / 10.0));
                (variance / 2.0).sqrt()
            }
            None => 0.0,
        };

        Ok(Self {
            taps,
            history: vec![Complex64::ZERO; max_delay + 1],
            idx: 0,
            identity_fir,
            amp,
            phase: 0.0,
            phase_sigma,
            noise_sigma,
            rng: ChaCha12Rng::seed_from_u64(seed),
        })
    }

    #[inline]
    fn step(&mut self, x: Complex64) -> Complex64 {
        let mut y = if self.identity_fir {
            x
        } else {
            let len = self.history.len();
            self.history[self.idx] = x;
            let mut acc = Complex64::ZERO;
            for &(d, g) in &self.taps {
                acc += g * self.history[(self.idx + len - d) % len];
            }
            self.idx = (self.idx + 1) % len;
            acc
        };
        if self.amp != 1.0 {
            y *= self.amp;
        }
        if self.phase_sigma > 0.0 {
            let w: f64 = self.rng.sample(StandardNormal);
            self.phase += self.phase_sigma * w;
            y *= Complex64::from_polar(1.0, self.phase);
        }
        if self.noise_sigma > 0.0 {
            let nr: f64 = self.rng.sample(StandardNormal);
            let ni: f64 = self.rng.sample(StandardNormal);
            y += Complex64::new(self.noise_sigma * nr, self.noise_sigma * ni);
        }
        y
    }

    pub fn process(&mut self, tx: &[Complex64]) -> Vec<Complex64> {
        tx.iter().map(|&x| self.step(x)).collect()
    }
}

/// Default calibration for the default mod/demod configuration, used when
/// a caller does not supply its own.
pub fn default_calibration() -> ReceiverCalibration {
    use std::sync::LazyLock;
    static CAL: LazyLock<ReceiverCalibration> = LazyLock::new(|| {
        ReceiverCalibration::compute(
            &crate::phy::ModConfig::default(),
            &crate::phy::DemodConfig::default(),
        )
        .expect("default configuration calibrates")
    });
    *CAL
}

/// One-shot channel application with a fresh seeded generator. Noise is
/// referred to the default receiver; build a [`Channel`] directly to
/// calibrate against a custom modulation/demodulation setup.
pub fn apply_channel(tx: &IqStream, cfg: &ChannelConfig, seed: u64) -> Result<IqStream> {
    let mut channel = Channel::new(cfg, tx.sample_rate, &default_calibration(), seed)?;
    IqStream::new(
        channel.process(&tx.samples),
        tx.symbol_rate,
        tx.samples_per_symbol,
    )
}

/// Outcome of a gain-control pass.
#[derive(Debug, Clone)]
pub struct AgcResult {
    pub out: IqStream,
    pub applied_gain_db: f64,
    /// True when the requested correction hit a clamp limit (including the
    /// zero-power case, which pins the gain at maximum).
    pub clamped: bool,
}

/// Measures mean input power and applies one gain value clamped to the
/// configured range, driving the output toward the target power.
pub fn apply_agc(rx: &IqStream, cfg: &AgcConfig) -> Result<AgcResult> {
    cfg.validate()?;
    let n = rx.samples.len().max(1);
    let power: f64 = rx.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
    let (gain_db, clamped) = if power > 0.0 {
        let wanted = 10.0 * (cfg.target_power / power).log10();
        let g = wanted.clamp(cfg.min_gain_db, cfg.max_gain_db);
        (g, (g - wanted).abs() > 1e-9)
    } else {
        (cfg.max_gain_db, true)
    };
    let gain = 10f64.powf(gain_db / 20.0);
    let samples = rx.samples.iter().map(|&s| s * gain).collect();
    Ok(AgcResult {
        out: IqStream::new(samples, rx.symbol_rate, rx.samples_per_symbol)?,
        applied_gain_db: gain_db,
        clamped,
    })
}

/// Analytic frequency response of the tap line (optionally cascaded with
/// the transmit and receive band filters) on a grid over +/-1 GHz, plus
/// the impulse-response tap table.
#[derive(Debug, Clone)]
pub struct ChannelResponse {
    pub frequencies_hz: Vec<f64>,
    pub response: Vec<Complex64>,
    /// (delay seconds, magnitude) per tap.
    pub impulse: Vec<(f64, f64)>,
}

/// Frequency span of the exported response grid.
pub const RESPONSE_SPAN_HZ: f64 = 1.0e9;

pub fn channel_response(
    cfg: &ChannelConfig,
    n_points: usize,
    filters: Option<(&SosFilter, &SosFilter)>,
) -> Result<ChannelResponse> {
    cfg.validate()?;
    if n_points < 2 {
        return Err(Error::Config(format!(
            "response grid needs at least 2 points, got {n_points}"
        )));
    }
    let mut frequencies_hz = Vec::with_capacity(n_points);
    let mut response = Vec::with_capacity(n_points);
    for k in 0..n_points {
        let f = -RESPONSE_SPAN_HZ + 2.0 * RESPONSE_SPAN_HZ * k as f64 / (n_points - 1) as f64;
        let mut h = Complex64::ZERO;
        for t in &cfg.taps {
            h += t.gain * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * t.delay_s);
        }
        if let Some((tx, rx)) = filters {
            h *= tx.response(f) * rx.response(f);
        }
        frequencies_hz.push(f);
        response.push(h);
    }
    Ok(ChannelResponse {
        frequencies_hz,
        response,
        impulse: cfg
            .taps
            .iter()
            .map(|t| (t.delay_s, t.gain.norm()))
            .collect(),
    })
}
