//! Waveform layer: differential encoding, DBPSK modulation with transmit
//! band-limiting, and the delay-and-multiply differential demodulator.
//!
//! Information rides on phase *changes* between consecutive symbols, so the
//! receiver multiplies the stream with its own one-symbol-delayed conjugate
//! and never needs the carrier phase. The modulator always leads with one
//! reference symbol (the bit-0 amplitude) so the first data bit has a
//! defined predecessor; with that convention the demodulator output maps
//! one-to-one onto the original data bits.
//!
//! All blocks are single-pass streaming processors: filter group delays are
//! compensated by integer-sample skips so the soft output of bit `k` sits
//! in soft-stream cell `k`, with the optimum decision phase near the middle
//! of the cell.

pub mod filter;

use num_complex::Complex64;

use crate::{Error, Result};
use filter::{MovingAverage, SosFilter};

/// Channel symbol rate of the modeled link.
pub const DEFAULT_SYMBOL_RATE: f64 = 875e6;
/// Default oversampling: 8 samples per symbol (7 GHz sample rate).
pub const DEFAULT_SPS: usize = 8;

/// Transmit-side waveform parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModConfig {
    pub symbol_rate: f64,
    pub samples_per_symbol: usize,
    /// Complex-baseband cutoff of the transmit band filter; the two-sided
    /// occupied bandwidth is twice this.
    pub tx_cutoff_hz: f64,
    pub tx_filter_order: usize,
}

impl Default for ModConfig {
    fn default() -> Self {
        Self {
            symbol_rate: DEFAULT_SYMBOL_RATE,
            samples_per_symbol: DEFAULT_SPS,
            tx_cutoff_hz: 1.0e9,
            tx_filter_order: 6,
        }
    }
}

impl ModConfig {
    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples_per_symbol < 4 {
            return Err(Error::Config(format!(
                "samples_per_symbol must be at least 4, got {}",
                self.samples_per_symbol
            )));
        }
        if !self.symbol_rate.is_finite() || self.symbol_rate <= 0.0 {
            return Err(Error::Config("symbol rate must be positive".into()));
        }
        Ok(())
    }

    /// A fresh copy of the transmit band-limiting filter.
    pub fn design_tx_filter(&self) -> Result<SosFilter> {
        SosFilter::butterworth_lowpass(self.tx_filter_order, self.tx_cutoff_hz, self.sample_rate())
    }
}

/// Receive-side demodulator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DemodConfig {
    /// Differential delay in symbols; one symbol (1.14 ns at 875 Msym/s).
    pub delay_symbols: usize,
    /// Receive band filter cutoff (complex baseband), the front-end
    /// counterpart of the transmit band filter.
    pub rx_band_cutoff_hz: f64,
    pub rx_band_order: usize,
    /// Post-detection low-pass cutoff.
    pub lpf_cutoff_hz: f64,
    pub lpf_order: usize,
    /// Matched integration window in samples; `None` integrates the symbol
    /// minus one transition-guard sample.
    pub matched_window: Option<usize>,
    /// Decision sampling phase within a symbol cell. `None` means recover
    /// it from the signal.
    pub decision_offset: Option<usize>,
}

impl Default for DemodConfig {
    fn default() -> Self {
        Self {
            delay_symbols: 1,
            rx_band_cutoff_hz: 1.3e9,
            rx_band_order: 4,
            lpf_cutoff_hz: 1.8e9,
            lpf_order: 4,
            matched_window: None,
            decision_offset: None,
        }
    }
}

impl DemodConfig {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if self.delay_symbols != 1 {
            return Err(Error::Config(
                "only a one-symbol differential delay is supported".into(),
            ));
        }
        if !self.lpf_cutoff_hz.is_finite() || self.lpf_cutoff_hz >= sample_rate / 2.0 {
            return Err(Error::Config(format!(
                "post-detection cutoff {} Hz must be below Nyquist {}",
                self.lpf_cutoff_hz,
                sample_rate / 2.0
            )));
        }
        Ok(())
    }

    pub fn design_rx_band_filter(&self, sample_rate: f64) -> Result<SosFilter> {
        SosFilter::butterworth_lowpass(self.rx_band_order, self.rx_band_cutoff_hz, sample_rate)
    }

    pub fn design_post_lpf(&self, sample_rate: f64) -> Result<SosFilter> {
        SosFilter::butterworth_lowpass(self.lpf_order, self.lpf_cutoff_hz, sample_rate)
    }

    /// Matched-filter length for a given oversampling factor: one guard
    /// sample at the symbol transition unless overridden.
    pub fn matched_len(&self, sps: usize) -> usize {
        self.matched_window
            .unwrap_or_else(|| sps.saturating_sub(1))
            .clamp(1, sps)
    }
}

/// A complex baseband sample stream with its rate metadata.
#[derive(Debug, Clone)]
pub struct IqStream {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub symbol_rate: f64,
    pub samples_per_symbol: usize,
}

impl IqStream {
    pub fn new(
        samples: Vec<Complex64>,
        symbol_rate: f64,
        samples_per_symbol: usize,
    ) -> Result<Self> {
        if samples_per_symbol < 4 {
            return Err(Error::Config(format!(
                "samples_per_symbol must be at least 4, got {samples_per_symbol}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate: symbol_rate * samples_per_symbol as f64,
            symbol_rate,
            samples_per_symbol,
        })
    }
}

/// Differential encoding: out[k] = in[k] XOR out[k-1], seeded by `initial`.
pub fn diff_encode(bits: &[bool], initial: bool) -> Vec<bool> {
    let mut prev = initial;
    bits.iter()
        .map(|&d| {
            prev ^= d;
            prev
        })
        .collect()
}

/// Inverse of [`diff_encode`].
pub fn diff_decode(bits: &[bool], initial: bool) -> Vec<bool> {
    let mut prev = initial;
    bits.iter()
        .map(|&b| {
            let d = b ^ prev;
            prev = b;
            d
        })
        .collect()
}

#[inline]
fn bit_amplitude(bit: bool) -> f64 {
    // Bit 0 maps to +1.
    if bit {
        -1.0
    } else {
        1.0
    }
}

/// Streaming DBPSK modulator: NRZ pulse shaping through the transmit band
/// filter, normalized to unit average power. Emits one leading reference
/// symbol (bit 0) before the first data symbol; the filter starts in its
/// steady state for that level, and its group delay is absorbed so symbol
/// `k` occupies output samples `[k*sps, (k+1)*sps)`.
#[derive(Debug, Clone)]
pub struct Modulator {
    cfg: ModConfig,
    filter: SosFilter,
    skip: usize,
    norm: f64,
    last_amp: f64,
    started: bool,
    flushed: bool,
}

impl Modulator {
    pub fn new(cfg: &ModConfig) -> Result<Self> {
        cfg.validate()?;
        let mut filter = cfg.design_tx_filter()?;
        let skip = filter.dc_group_delay_samples().round() as usize;
        let norm = 1.0 / measure_tx_power(cfg)?.sqrt();
        filter.seed_steady_state(Complex64::new(1.0, 0.0));
        Ok(Self {
            cfg: cfg.clone(),
            filter,
            skip,
            norm,
            last_amp: 1.0,
            started: false,
            flushed: false,
        })
    }

    pub fn config(&self) -> &ModConfig {
        &self.cfg
    }

    fn push_symbol(&mut self, amp: f64, out: &mut Vec<Complex64>) {
        self.last_amp = amp;
        let x = Complex64::new(amp, 0.0);
        for _ in 0..self.cfg.samples_per_symbol {
            let y = self.filter.process(x);
            if self.skip > 0 {
                self.skip -= 1;
            } else {
                out.push(self.norm * y);
            }
        }
    }

    /// Modulates a batch of already differentially-encoded bits.
    pub fn process(&mut self, bits: &[bool]) -> Vec<Complex64> {
        assert!(!self.flushed, "modulator already flushed");
        let extra = usize::from(!self.started);
        let mut out = Vec::with_capacity((bits.len() + extra) * self.cfg.samples_per_symbol);
        if !self.started {
            self.started = true;
            self.push_symbol(bit_amplitude(false), &mut out);
        }
        for &bit in bits {
            self.push_symbol(bit_amplitude(bit), &mut out);
        }
        out
    }

    /// Flushes the delay-compensation tail, holding the last symbol level.
    pub fn finish(&mut self) -> Vec<Complex64> {
        assert!(!self.flushed, "modulator already flushed");
        self.flushed = true;
        let mut out = Vec::new();
        if !self.started {
            return out;
        }
        let hold = Complex64::new(self.last_amp, 0.0);
        let mut remaining = self.filter.dc_group_delay_samples().round() as usize;
        while remaining > 0 || self.skip > 0 {
            let y = self.filter.process(hold);
            if self.skip > 0 {
                self.skip -= 1;
            } else {
                out.push(self.norm * y);
                remaining -= 1;
            }
        }
        out
    }
}

/// Mean output power of the transmit chain over a fixed pseudorandom
/// pattern, used to normalize the modulator to unit average power.
fn measure_tx_power(cfg: &ModConfig) -> Result<f64> {
    let mut filter = cfg.design_tx_filter()?;
    filter.seed_steady_state(Complex64::new(1.0, 0.0));
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    let mut acc = 0.0;
    let mut n = 0usize;
    for _ in 0..4096 {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let amp = bit_amplitude(state & 1 == 1);
        for _ in 0..cfg.samples_per_symbol {
            let y = filter.process(Complex64::new(amp, 0.0));
            acc += y.norm_sqr();
            n += 1;
        }
    }
    Ok(acc / n as f64)
}

/// One-shot modulation of a bit sequence into an [`IqStream`] of exactly
/// `(bits + 1) * samples_per_symbol` samples (one leading reference symbol).
pub fn modulate(bits: &[bool], cfg: &ModConfig) -> Result<IqStream> {
    let mut m = Modulator::new(cfg)?;
    let mut samples = m.process(bits);
    samples.extend(m.finish());
    debug_assert_eq!(samples.len(), (bits.len() + 1) * cfg.samples_per_symbol);
    IqStream::new(samples, cfg.symbol_rate, cfg.samples_per_symbol)
}

/// Streaming delay-and-multiply demodulator.
///
/// Chain: receive band filter, symbol matched filter (moving average),
/// product with the one-symbol-delayed conjugate, post-detection low-pass.
/// Group delays are compensated so the soft stream is cell-aligned: the
/// soft values for data bit `k` occupy `[k*sps, (k+1)*sps)` and the eye is
/// open near mid-cell.
#[derive(Debug, Clone)]
pub struct Demodulator {
    sps: usize,
    rx_band: SosFilter,
    rx_skip: usize,
    matched: MovingAverage,
    delay: Vec<Complex64>,
    delay_idx: usize,
    post: SosFilter,
    post_skip: usize,
    startup_skip: usize,
    flush_len: usize,
}

impl Demodulator {
    pub fn new(cfg: &DemodConfig, symbol_rate: f64, samples_per_symbol: usize) -> Result<Self> {
        let sample_rate = symbol_rate * samples_per_symbol as f64;
        cfg.validate(sample_rate)?;
        let rx_band = cfg.design_rx_band_filter(sample_rate)?;
        let post = cfg.design_post_lpf(sample_rate)?;
        let rx_skip = rx_band.dc_group_delay_samples().round() as usize;
        let post_skip = post.dc_group_delay_samples().round() as usize;
        let sps = samples_per_symbol;
        let window = cfg.matched_len(sps);
        // Discard the reference-symbol product cell and re-center so the
        // matched-filter peak lands mid-cell: see module docs.
        let startup_skip = sps + (sps + window) / 2 - 1 - sps / 2;
        Ok(Self {
            sps,
            rx_band,
            rx_skip,
            matched: MovingAverage::new(window),
            delay: vec![Complex64::ZERO; sps],
            delay_idx: 0,
            post,
            post_skip,
            startup_skip,
            flush_len: rx_skip + post_skip + startup_skip + 2 * sps,
        })
    }

    #[inline]
    fn step(&mut self, x: Complex64, out: &mut Vec<f64>) {
        let v = self.rx_band.process(x);
        if self.rx_skip > 0 {
            self.rx_skip -= 1;
            return;
        }
        let z = self.matched.process(v);
        let zd = self.delay[self.delay_idx];
        self.delay[self.delay_idx] = z;
        self.delay_idx = (self.delay_idx + 1) % self.sps;
        let product = Complex64::new((z * zd.conj()).re, 0.0);
        let y = self.post.process(product);
        if self.post_skip > 0 {
            self.post_skip -= 1;
            return;
        }
        if self.startup_skip > 0 {
            self.startup_skip -= 1;
            return;
        }
        out.push(y.re);
    }

    /// Feeds received samples, returning whatever soft values completed.
    pub fn process(&mut self, rx: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rx.len());
        for &x in rx {
            self.step(x, &mut out);
        }
        out
    }

    /// Flushes enough zeros to emit every soft cell still inside the
    /// pipeline (plus a short meaningless tail past the final symbol).
    pub fn finish(&mut self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.flush_len);
        for _ in 0..self.flush_len {
            self.step(Complex64::ZERO, &mut out);
        }
        out
    }
}

/// One-shot demodulation. For a stream of `n` symbols (including the
/// leading reference) this returns exactly `(n - 1) * sps` soft values, one
/// cell per data bit. A stream shorter than two symbols yields an empty
/// output.
pub fn diff_demodulate(rx: &IqStream, cfg: &DemodConfig) -> Result<Vec<f64>> {
    let sps = rx.samples_per_symbol;
    let n_symbols = rx.samples.len() / sps;
    if n_symbols < 2 {
        return Ok(Vec::new());
    }
    let cells = n_symbols - 1;
    let mut demod = Demodulator::new(cfg, rx.symbol_rate, sps)?;
    let mut soft = demod.process(&rx.samples);
    soft.extend(demod.finish());
    soft.truncate(cells * sps);
    debug_assert_eq!(soft.len(), cells * sps);
    Ok(soft)
}

/// Hard decisions from an oversampled soft stream at the given sampling
/// phase. Negative soft value = phase change = bit 1.
pub fn decisions(soft: &[f64], sps: usize, offset: usize) -> Vec<bool> {
    soft.iter()
        .skip(offset)
        .step_by(sps)
        .map(|&y| y < 0.0)
        .collect()
}

/// Minimum symbols required before timing recovery is attempted.
pub const TIMING_MIN_SYMBOLS: usize = 512;

/// Finds the decision sampling phase maximizing the mean absolute soft
/// value, i.e. the maximum-eye-opening instant.
pub fn recover_timing(soft: &[f64], sps: usize) -> Result<usize> {
    if soft.len() < TIMING_MIN_SYMBOLS * sps {
        return Err(Error::InputSize {
            expected: TIMING_MIN_SYMBOLS * sps,
            got: soft.len(),
        });
    }
    if soft.iter().all(|&y| y == 0.0) {
        return Err(Error::NoSignal);
    }
    let mut best = (0usize, f64::MIN);
    for phase in 0..sps {
        let mut acc = 0.0;
        let mut n = 0usize;
        let mut i = phase;
        while i < soft.len() {
            acc += soft[i].abs();
            n += 1;
            i += sps;
        }
        let mean = acc / n as f64;
        if mean > best.1 {
            best = (phase, mean);
        }
    }
    Ok(best.0)
}

/// Folds the oversampled soft stream modulo one symbol period into a
/// `traces x sps` matrix for eye-diagram plotting.
pub fn eye_diagram(soft: &[f64], sps: usize, traces: usize) -> Result<Vec<Vec<f64>>> {
    if soft.len() < traces * sps {
        return Err(Error::InputSize {
            expected: traces * sps,
            got: soft.len(),
        });
    }
    Ok((0..traces)
        .map(|t| soft[t * sps..(t + 1) * sps].to_vec())
        .collect())
}

/// Noise calibration constants tying a requested decision-point SNR to the
/// white-noise variance injected by the channel.
///
/// The AWGN is added wideband at the sample rate, but the quantity that
/// fixes the error rate is the SNR of the matched-filter output feeding the
/// delay-and-multiply product. `noise_energy` is the noise power gain of
/// the receive filter cascade (sum of squared impulse-response samples) and
/// `decision_gain_sq` the mean absolute soft value of a clean unit-power
/// signal at the decision phase; for a per-sample complex noise variance
/// `v` the decision SNR is `decision_gain_sq / (v * noise_energy)`.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverCalibration {
    pub decision_gain_sq: f64,
    pub noise_energy: f64,
}

impl ReceiverCalibration {
    pub fn compute(mod_cfg: &ModConfig, demod_cfg: &DemodConfig) -> Result<Self> {
        let sps = mod_cfg.samples_per_symbol;
        let sample_rate = mod_cfg.sample_rate();

        // Noise power gain of receive band filter + matched filter +
        // post-detection filter (the linear path a noise sample takes to
        // the decision instant).
        let mut rx_band = demod_cfg.design_rx_band_filter(sample_rate)?;
        let mut matched = MovingAverage::new(demod_cfg.matched_len(sps));
        let mut post = demod_cfg.design_post_lpf(sample_rate)?;
        let mut noise_energy = 0.0;
        let settle = 64 * sps;
        for n in 0..settle {
            let x = if n == 0 {
                Complex64::ONE
            } else {
                Complex64::ZERO
            };
            let h = post.process(matched.process(rx_band.process(x)));
            noise_energy += h.norm_sqr();
        }

        // Mean absolute soft value of a clean pseudorandom pattern at the
        // recovered decision phase.
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let bits: Vec<bool> = (0..2048)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state & 1 == 1
            })
            .collect();
        let tx = modulate(&diff_encode(&bits, false), mod_cfg)?;
        let soft = diff_demodulate(&tx, demod_cfg)?;
        let phase = recover_timing(&soft, sps)?;
        let cells = soft.len() / sps;
        let mut acc = 0.0;
        let mut n = 0usize;
        for m in 16..cells - 16 {
            acc += soft[m * sps + phase].abs();
            n += 1;
        }
        Ok(Self {
            decision_gain_sq: acc / n as f64,
            noise_energy,
        })
    }

    /// Per-sample complex noise variance that sets the decision-point SNR
    /// to `ebn0_linear`, for a signal whose power at the noise-injection
    /// point is `signal_power`.
    pub fn noise_variance(&self, signal_power: f64, ebn0_linear: f64) -> f64 {
        signal_power * self.decision_gain_sq / (self.noise_energy * ebn0_linear)
    }
}
