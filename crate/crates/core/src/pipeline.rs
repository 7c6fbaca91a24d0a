//! End-to-end link orchestration: file transfer over the simulated link,
//! BER/FER sweeps and the numeric exports behind the CLI.
//!
//! The full chain runs in bounded memory: payload bytes are framed,
//! serialized, differentially encoded, modulated, impaired, demodulated and
//! re-synchronized chunk by chunk, with every filter and generator carrying
//! its state across chunk boundaries. Results are bit-identical whatever
//! the chunk size, and a fixed seed reproduces a run exactly.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{channel_response, Channel, ChannelConfig, ChannelResponse};
use crate::fec::{rs_decode, DATA_LEN};
use crate::framing::{build_frame, serialize_stream, FRAME_BITS};
use crate::phy::{
    diff_encode, eye_diagram, modulate, recover_timing, DemodConfig, Demodulator, ModConfig,
    Modulator, ReceiverCalibration, TIMING_MIN_SYMBOLS,
};
use crate::sync::{FrameSync, SyncStatus};
use crate::{Error, Result};

/// Everything a link run needs to know.
#[derive(Debug, Clone)]
pub struct LinkConfig {
    pub modulation: ModConfig,
    pub demodulation: DemodConfig,
    pub channel: ChannelConfig,
    pub sync_threshold: i32,
    pub fec_enabled: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            modulation: ModConfig::default(),
            demodulation: DemodConfig::default(),
            channel: ChannelConfig::default(),
            sync_threshold: crate::sync::DEFAULT_THRESHOLD,
            fec_enabled: true,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.modulation.validate()?;
        self.demodulation.validate(self.modulation.sample_rate())?;
        self.channel.validate()?;
        if self.sync_threshold <= 0 || self.sync_threshold > 32 {
            return Err(Error::Config(format!(
                "sync threshold must be in (0, 32], got {}",
                self.sync_threshold
            )));
        }
        Ok(())
    }
}

/// Counters from one link run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BerReport {
    /// Payload bits compared pre-FEC (frames that reached the comparator).
    pub bits_tx: u64,
    pub bit_errors_raw: u64,
    pub bit_errors_post_fec: u64,
    pub frames_tx: u64,
    pub frames_synced: u64,
    pub false_locks: u64,
    pub frames_corrected: u64,
    pub frames_failed: u64,
    pub lock_drops: u64,
    pub no_sync: bool,
    pub agc_gain_db: Option<f64>,
    pub elapsed: Duration,
}

impl BerReport {
    pub fn raw_ber(&self) -> f64 {
        if self.bits_tx == 0 {
            return 0.0;
        }
        self.bit_errors_raw as f64 / self.bits_tx as f64
    }

    pub fn post_fec_ber(&self) -> f64 {
        if self.bits_tx == 0 {
            return 0.0;
        }
        self.bit_errors_post_fec as f64 / self.bits_tx as f64
    }

    /// Frame error rate: frames that never synced plus frames the decoder
    /// gave up on, over frames sent.
    pub fn fer(&self) -> f64 {
        if self.frames_tx == 0 {
            return 0.0;
        }
        let missed = self.frames_tx.saturating_sub(self.frames_synced);
        (missed + self.frames_failed) as f64 / self.frames_tx as f64
    }

    /// Net information rate implied by the frame overhead at a given
    /// channel bit rate.
    pub fn information_throughput(&self, channel_bit_rate: f64) -> f64 {
        channel_bit_rate * (DATA_LEN as f64 * 8.0) / FRAME_BITS as f64
    }
}

/// Frames per processing chunk; a chunk is ~1M samples at 8x oversampling.
const FRAMES_PER_CHUNK: usize = 64;

/// Emits hard decisions from soft chunks while tracking the sampling phase
/// across chunk boundaries.
struct StreamDecider {
    sps: usize,
    offset: usize,
    pos: usize,
}

impl StreamDecider {
    fn new(sps: usize, offset: usize) -> Self {
        Self {
            sps,
            offset,
            pos: 0,
        }
    }

    fn push(&mut self, soft: &[f64], out: &mut Vec<bool>) {
        for &y in soft {
            if self.pos == self.offset {
                out.push(y < 0.0);
            }
            self.pos += 1;
            if self.pos == self.sps {
                self.pos = 0;
            }
        }
    }
}

/// Runs a byte payload through the complete link and reassembles it.
///
/// The payload is chunked into 239-byte units (a 4-byte big-endian length
/// prefix leads the first unit, the last is zero-padded) and every unit
/// becomes one frame whose header byte is the frame counter modulo 256.
/// Sync loss over the whole stream yields an empty output with
/// `report.no_sync` set rather than an error.
pub fn run_link(payload: &[u8], cfg: &LinkConfig, seed: u64) -> Result<(Vec<u8>, BerReport)> {
    cfg.validate()?;
    if payload.is_empty() {
        return Err(Error::Config("payload must not be empty".into()));
    }
    let start = Instant::now();
    let sps = cfg.modulation.samples_per_symbol;

    // Logical stream: length prefix then payload, cut into frame units.
    let mut logical = Vec::with_capacity(4 + payload.len());
    logical.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    logical.extend_from_slice(payload);
    let mut units: Vec<[u8; DATA_LEN]> = logical
        .chunks(DATA_LEN)
        .map(|c| {
            let mut unit = [0u8; DATA_LEN];
            unit[..c.len()].copy_from_slice(c);
            unit
        })
        .collect();
    let n_frames = units.len();
    // One trailing filler frame: the detector validates a preamble against
    // the one a frame later, so the last payload frame needs a successor.
    units.push([0u8; DATA_LEN]);

    // Transmit/receive state shared across chunks.
    let calibration = ReceiverCalibration::compute(&cfg.modulation, &cfg.demodulation)?;
    let mut modulator = Modulator::new(&cfg.modulation)?;
    let mut channel = Channel::new(
        &cfg.channel,
        cfg.modulation.sample_rate(),
        &calibration,
        seed,
    )?;
    let mut demodulator = Demodulator::new(&cfg.demodulation, cfg.modulation.symbol_rate, sps)?;
    let mut frame_sync = FrameSync::new(cfg.sync_threshold)?;
    let mut prev_bit = false;
    let mut agc_gain: Option<f64> = None;
    let mut decider: Option<StreamDecider> = None;
    let mut soft_backlog: Vec<f64> = Vec::new();

    let mut report = BerReport {
        frames_tx: n_frames as u64,
        ..BerReport::default()
    };
    let mut received_units: Vec<Option<[u8; DATA_LEN]>> = vec![None; n_frames];

    let handle_soft = |soft: Vec<f64>,
                       decider: &mut Option<StreamDecider>,
                       backlog: &mut Vec<f64>,
                       frame_sync: &mut FrameSync,
                       report: &mut BerReport,
                       received: &mut Vec<Option<[u8; DATA_LEN]>>|
     -> Result<()> {
        // The sampling phase comes from the first chunk, which is always
        // long enough once one frame has passed through.
        let mut bits = Vec::new();
        match decider {
            Some(d) => d.push(&soft, &mut bits),
            None => {
                backlog.extend(soft);
                if backlog.len() < TIMING_MIN_SYMBOLS * sps {
                    return Ok(());
                }
                let offset = match cfg.demodulation.decision_offset {
                    Some(p) if p < sps => p,
                    Some(p) => {
                        return Err(Error::Config(format!(
                            "decision offset {p} outside 0..{sps}"
                        )))
                    }
                    None => recover_timing(backlog, sps)?,
                };
                let mut d = StreamDecider::new(sps, offset);
                d.push(backlog, &mut bits);
                backlog.clear();
                *decider = Some(d);
            }
        }
        for record in frame_sync.push_bits(&bits) {
            // Records from a misaligned (false) lock never map to a frame
            // slot; the lock itself is counted at the end of the run.
            if record.frame_start_bit % FRAME_BITS != 0 {
                continue;
            }
            let idx = record.frame_start_bit / FRAME_BITS;
            if idx >= n_frames {
                continue;
            }
            report.frames_synced += 1;
            let tx_unit = &units[idx];
            let raw_data = &record.codeword[..DATA_LEN];
            let raw_errors: u64 = raw_data
                .iter()
                .zip(tx_unit.iter())
                .map(|(a, b)| u64::from((a ^ b).count_ones()))
                .sum();
            report.bits_tx += (DATA_LEN * 8) as u64;
            report.bit_errors_raw += raw_errors;

            let mut out_unit = [0u8; DATA_LEN];
            if cfg.fec_enabled {
                match rs_decode(&record.codeword) {
                    Ok(decoded) => {
                        out_unit.copy_from_slice(&decoded.data);
                        if decoded.corrected > 0 {
                            report.frames_corrected += 1;
                        }
                    }
                    Err(Error::Uncorrectable) => {
                        out_unit.copy_from_slice(raw_data);
                        report.frames_failed += 1;
                    }
                    Err(e) => return Err(e),
                }
            } else {
                out_unit.copy_from_slice(raw_data);
            }
            let post_errors: u64 = out_unit
                .iter()
                .zip(tx_unit.iter())
                .map(|(a, b)| u64::from((a ^ b).count_ones()))
                .sum();
            report.bit_errors_post_fec += post_errors;
            received[idx] = Some(out_unit);
        }
        Ok(())
    };

    for (chunk_idx, chunk) in units.chunks(FRAMES_PER_CHUNK).enumerate() {
        let first_seq = chunk_idx * FRAMES_PER_CHUNK;
        let frames: Vec<_> = chunk
            .iter()
            .enumerate()
            .map(|(i, unit)| build_frame(unit, (first_seq + i) as u8))
            .collect::<Result<_>>()?;
        let bits = serialize_stream(&frames);
        let encoded = diff_encode(&bits, prev_bit);
        prev_bit = *encoded.last().expect("chunk never empty");

        let tx_samples = modulator.process(&encoded);
        let mut rx_samples = channel.process(&tx_samples);

        // The AGC measures the first chunk and freezes; the differential
        // detector is scale-invariant so this only affects reporting.
        let gain_db = *agc_gain.get_or_insert_with(|| {
            let power = rx_samples.iter().map(|s| s.norm_sqr()).sum::<f64>()
                / rx_samples.len().max(1) as f64;
            if power > 0.0 {
                (10.0 * (cfg.channel.agc.target_power / power).log10())
                    .clamp(cfg.channel.agc.min_gain_db, cfg.channel.agc.max_gain_db)
            } else {
                cfg.channel.agc.max_gain_db
            }
        });
        let gain = 10f64.powf(gain_db / 20.0);
        for s in &mut rx_samples {
            *s *= gain;
        }

        let soft = demodulator.process(&rx_samples);
        handle_soft(
            soft,
            &mut decider,
            &mut soft_backlog,
            &mut frame_sync,
            &mut report,
            &mut received_units,
        )?;
    }

    // Flush the transmit tail, the channel echo and the demod pipeline.
    let tail_tx = modulator.finish();
    let mut tail_rx = channel.process(&tail_tx);
    let gain = 10f64.powf(agc_gain.unwrap_or(0.0) / 20.0);
    for s in &mut tail_rx {
        *s *= gain;
    }
    let mut tail_soft = demodulator.process(&tail_rx);
    tail_soft.extend(demodulator.finish());
    handle_soft(
        tail_soft,
        &mut decider,
        &mut soft_backlog,
        &mut frame_sync,
        &mut report,
        &mut received_units,
    )?;

    report.false_locks = frame_sync
        .lock_positions()
        .iter()
        .filter(|&&p| p % FRAME_BITS != 0)
        .count() as u64;
    report.lock_drops = frame_sync.lock_drops() as u64;
    report.agc_gain_db = agc_gain;
    report.no_sync =
        frame_sync.state().status != SyncStatus::Locked && frame_sync.lock_positions().is_empty();
    report.elapsed = start.elapsed();

    if report.no_sync {
        return Ok((Vec::new(), report));
    }

    // Reassemble, strip the length prefix and the final-frame padding.
    let mut bytes = Vec::with_capacity(n_frames * DATA_LEN);
    for unit in received_units {
        match unit {
            Some(u) => bytes.extend_from_slice(&u),
            None => bytes.extend_from_slice(&[0u8; DATA_LEN]),
        }
    }
    let claimed = u32::from_be_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]) as usize;
    let available = bytes.len() - 4;
    let take = claimed.min(available);
    let payload_out = bytes[4..4 + take].to_vec();
    Ok((payload_out, report))
}

/// One row of a BER sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub ebn0_db: f64,
    pub raw_ber: f64,
    pub post_fec_ber: f64,
    pub fer: f64,
    pub report: BerReport,
}

/// BER sweep parameters.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub ebn0_points: Vec<f64>,
    /// Payload bits simulated per point (at least 100k).
    pub bits_per_point: u64,
    pub link: LinkConfig,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ebn0_points: vec![6.0, 8.0, 10.0, 12.0],
            bits_per_point: 1_000_000,
            link: LinkConfig {
                channel: ChannelConfig::identity(),
                ..LinkConfig::default()
            },
            master_seed: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bits_per_point < 100_000 {
            return Err(Error::Config(format!(
                "bits_per_point must be at least 100000, got {}",
                self.bits_per_point
            )));
        }
        if self.ebn0_points.is_empty() {
            return Err(Error::Config("sweep needs at least one Eb/N0 point".into()));
        }
        self.link.validate()
    }
}

/// Runs one link simulation per Eb/N0 point on pseudorandom payloads.
/// Points run in parallel; per-point seeds derive from the master seed so
/// parallel and serial execution agree bit for bit.
pub fn ber_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let payload_bytes = (cfg.bits_per_point as usize).div_ceil(8);
    cfg.ebn0_points
        .par_iter()
        .enumerate()
        .map(|(i, &ebn0_db)| {
            let point_seed = cfg
                .master_seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1));
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
            let payload: Vec<u8> = (0..payload_bytes).map(|_| rng.random()).collect();
            let mut link = cfg.link.clone();
            link.channel.ebn0_db = Some(ebn0_db);
            let (_, report) = run_link(&payload, &link, point_seed)?;
            Ok(SweepPoint {
                ebn0_db,
                raw_ber: report.raw_ber(),
                post_fec_ber: report.post_fec_ber(),
                fer: report.fer(),
                report,
            })
        })
        .collect()
}

/// Demodulated soft-stream eye data for a link at the configured channel,
/// `n_traces` rows of one symbol period each.
pub fn export_eye(cfg: &LinkConfig, n_traces: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let sps = cfg.modulation.samples_per_symbol;
    let n_bits = (n_traces + 16).max(TIMING_MIN_SYMBOLS + 16);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<bool> = (0..n_bits).map(|_| rng.random()).collect();
    let tx = modulate(&diff_encode(&data, false), &cfg.modulation)?;
    let calibration = ReceiverCalibration::compute(&cfg.modulation, &cfg.demodulation)?;
    let mut channel = Channel::new(&cfg.channel, tx.sample_rate, &calibration, seed)?;
    let rx = channel.process(&tx.samples);
    let rx_stream = crate::phy::IqStream::new(rx, tx.symbol_rate, sps)?;
    let soft = crate::phy::diff_demodulate(&rx_stream, &cfg.demodulation)?;
    eye_diagram(&soft, sps, n_traces)
}

/// Analytic channel + band-filter frequency response for plotting.
pub fn export_response(
    cfg: &LinkConfig,
    n_points: usize,
    include_filters: bool,
) -> Result<ChannelResponse> {
    cfg.validate()?;
    if include_filters {
        let tx = cfg.modulation.design_tx_filter()?;
        let rx = cfg
            .demodulation
            .design_rx_band_filter(cfg.modulation.sample_rate())?;
        channel_response(&cfg.channel, n_points, Some((&tx, &rx)))
    } else {
        channel_response(&cfg.channel, n_points, None)
    }
}

/// Welch power spectral density of the modulated transmit stream:
/// Hann-windowed 4096-sample segments, 50% overlap, averaged periodograms,
/// normalized so the peak sits at 0 dB.
pub fn export_spectrum(cfg: &LinkConfig, seed: u64) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bits = 1 << 14;
    let data: Vec<bool> = (0..n_bits).map(|_| rng.random()).collect();
    let tx = modulate(&diff_encode(&data, false), &cfg.modulation)?;
    Ok(welch_psd(&tx.samples, tx.sample_rate, 4096))
}

/// Welch PSD estimate, (frequency Hz, dB relative to peak) per bin.
pub fn welch_psd(samples: &[Complex64], sample_rate: f64, segment: usize) -> Vec<(f64, f64)> {
    use rustfft::FftPlanner;
    let segment = segment.min(samples.len()).max(16);
    let hop = segment / 2;
    let window: Vec<f64> = (0..segment)
        .map(|n| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * n as f64 / (segment - 1) as f64).cos()))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(segment);
    let mut acc = vec![0.0f64; segment];
    let mut count = 0usize;
    let mut start = 0usize;
    while start + segment <= samples.len() {
        let mut buf: Vec<Complex64> = samples[start..start + segment]
            .iter()
            .zip(&window)
            .map(|(&s, &w)| s * w)
            .collect();
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += hop;
    }
    if count == 0 {
        return Vec::new();
    }
    let peak = acc.iter().cloned().fold(f64::MIN, f64::max);
    let mut out = Vec::with_capacity(segment);
    for k in 0..segment {
        // Reorder bins so the list runs -fs/2 .. +fs/2 (fftshift).
        let bin = (k + segment / 2) % segment;
        let f = (k as f64 - (segment / 2) as f64) * sample_rate / segment as f64;
        let db = 10.0 * (acc[bin] / peak).max(1e-300).log10();
        out.push((f, db));
    }
    out
}
