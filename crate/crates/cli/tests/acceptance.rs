//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Expected values come from closed-form oracles computed here, never from
//! the implementation under test: a bit-by-bit GF(256) multiplier and
//! schoolbook polynomial division check the FEC, brute-force correlation
//! checks the sequences, the binomial tail bounds false locks and the
//! noncoherent-detection formula 0.5*exp(-Eb/N0) anchors the BER sweep.

use std::process::Command;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mmlink::channel::{apply_agc, received_power_dbm, AgcConfig, ChannelConfig};
use mmlink::fec::{rs_decode, rs_encode, syndromes, CODEWORD_LEN, DATA_LEN};
use mmlink::framing::compute_rate_ledger;
use mmlink::phy::{
    decisions, diff_demodulate, diff_encode, modulate, recover_timing, DemodConfig, IqStream,
    ModConfig,
};
use mmlink::pipeline::{ber_sweep, run_link, LinkConfig, SweepConfig};
use mmlink::sequences::{build_gold_pair, cyclic_correlation};
use mmlink::sync::{detect_preamble, FrameSync, SyncStatus, DEFAULT_THRESHOLD};

fn pass(n: usize, what: &str) {
    println!("[acceptance] criterion {n} ({what}): PASS");
}

#[test]
fn criterion_1_rate_arithmetic() {
    let ledger = compute_rate_ledger(875e6).expect("valid rate");
    let expected = 875e6 * 239.0 / 260.0; // 804.3269... Mbps
    assert!(
        (ledger.information_bit_rate - expected).abs() < 1.0,
        "information rate {}",
        ledger.information_bit_rate
    );
    assert!(
        (ledger.information_bit_rate - 804.33e6).abs() < 0.01e6,
        "must land within 0.01 Mbps of the published rounding"
    );
    assert_eq!(ledger.frame_efficiency, 239.0 / 260.0);
    pass(1, "rate arithmetic");
}

/// Independent GF(256) multiply: shift-and-add reduction by 0x11D, no
/// lookup tables.
fn gf_mul_oracle(a: u8, b: u8) -> u8 {
    let mut product: u16 = 0;
    for i in 0..8 {
        if (b >> i) & 1 == 1 {
            product ^= (a as u16) << i;
        }
    }
    for bit in (8..16).rev() {
        if (product >> bit) & 1 == 1 {
            product ^= 0x11D << (bit - 8);
        }
    }
    product as u8
}

/// Schoolbook remainder of data(x) * x^16 divided by the generator
/// polynomial, all arithmetic through the oracle multiplier.
fn rs_parity_oracle(data: &[u8]) -> Vec<u8> {
    // g(x) = prod (x - alpha^i), alpha = 2, computed with oracle ops.
    let mut generator = vec![1u8];
    let mut root = 1u8;
    for _ in 0..16 {
        let mut next = vec![0u8; generator.len() + 1];
        for (j, &c) in generator.iter().enumerate() {
            next[j] ^= c;
            next[j + 1] ^= gf_mul_oracle(c, root);
        }
        generator = next;
        root = gf_mul_oracle(root, 2);
    }
    // Long division of data || 16 zeros.
    let mut work: Vec<u8> = data.to_vec();
    work.extend_from_slice(&[0u8; 16]);
    for i in 0..data.len() {
        let coef = work[i];
        if coef != 0 {
            for (j, &g) in generator.iter().enumerate().skip(1) {
                work[i + j] ^= gf_mul_oracle(g, coef);
            }
        }
    }
    work[data.len()..].to_vec()
}

#[test]
fn criterion_2_fec_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEC);

    // Every error weight 0..=8 decodes back to the original.
    for trial in 0..1000usize {
        let weight = trial % 9;
        let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let cw = rs_encode(&data).unwrap();
        let mut rx = *cw.as_bytes();
        let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
        positions.shuffle(&mut rng);
        for &p in &positions[..weight] {
            rx[p] ^= rng.random_range(1..=255u8);
        }
        let out = rs_decode(&rx).unwrap_or_else(|e| panic!("weight {weight} failed: {e}"));
        assert_eq!(&out.data[..], &data[..], "weight {weight}");
        assert_eq!(out.corrected, weight, "weight {weight}");
    }

    // Weights 9..=16 must fail or miscorrect to a *valid* codeword; a
    // nonzero-syndrome word must never be reported as success.
    let mut failures = 0usize;
    for trial in 0..500usize {
        let weight = 9 + trial % 8;
        let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let cw = rs_encode(&data).unwrap();
        let mut rx = *cw.as_bytes();
        let mut positions: Vec<usize> = (0..CODEWORD_LEN).collect();
        positions.shuffle(&mut rng);
        for &p in &positions[..weight] {
            rx[p] ^= rng.random_range(1..=255u8);
        }
        match rs_decode(&rx) {
            Err(mmlink::Error::Uncorrectable) => failures += 1,
            Err(e) => panic!("unexpected error {e}"),
            Ok(out) => {
                let recoded = rs_encode(&out.data).unwrap();
                assert!(
                    syndromes(recoded.as_bytes()).iter().all(|&s| s == 0),
                    "miscorrection produced an invalid codeword"
                );
            }
        }
    }
    assert!(
        failures >= 495,
        "only {failures}/500 overloaded words failed"
    );

    // Parity bytes match the schoolbook long-division oracle.
    for _ in 0..100 {
        let data: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
        let cw = rs_encode(&data).unwrap();
        assert_eq!(cw.parity(), &rs_parity_oracle(&data)[..]);
    }
    pass(2, "RS(255,239) codec");
}

#[test]
fn criterion_3_sequences() {
    let pair = build_gold_pair();
    assert_eq!(
        cyclic_correlation(pair.preamble.chips(), pair.preamble.chips(), 0),
        31
    );
    for shift in 1..31 {
        assert_eq!(
            cyclic_correlation(pair.preamble.chips(), pair.preamble.chips(), shift),
            -1,
            "autocorrelation at shift {shift}"
        );
    }
    for shift in 0..31 {
        let c = cyclic_correlation(pair.preamble.chips(), pair.scrambler.chips(), shift);
        assert!(
            [-1, -9, 7].contains(&c),
            "cross-correlation {c} at shift {shift}"
        );
    }
    pass(3, "Gold sequences");
}

#[test]
fn criterion_4_sync() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5BC);

    // Alignment recovery for every prepended bit skew.
    let frames: Vec<_> = (0..3)
        .map(|i| {
            let payload: Vec<u8> = (0..DATA_LEN).map(|_| rng.random()).collect();
            mmlink::framing::build_frame(&payload, i as u8).unwrap()
        })
        .collect();
    let clean = mmlink::framing::serialize_stream(&frames);
    for skew in 0..8usize {
        let mut stream: Vec<bool> = (0..skew).map(|_| rng.random()).collect();
        stream.extend(&clean);
        let state = detect_preamble(&stream, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(state.status, SyncStatus::Locked, "skew {skew}");
        assert_eq!(state.alignment_k, skew, "skew {skew}");
    }

    // False locks on 1e7 random bits, against the two-bank binomial bound.
    let n_bits = 10_000_000usize;
    let random_bits: Vec<bool> = (0..n_bits).map(|_| rng.random()).collect();
    let mut fs = FrameSync::new(DEFAULT_THRESHOLD).unwrap();
    fs.push_bits(&random_bits);
    let false_locks = fs.lock_positions().len();

    // P(single correlator >= 28) = P(>= 30 of 32 bits match).
    let mut tail = 0.0f64;
    for m in 30..=32u64 {
        let mut comb = 1.0f64;
        for i in 0..m {
            comb *= (32 - i) as f64 / (m - i) as f64;
        }
        tail += comb;
    }
    let p_single = tail / 2f64.powi(32);
    let positions = (n_bits as f64 - (2080.0 + 39.0)) / 8.0 * 8.0;
    let bound = positions * p_single * p_single;
    assert!(
        (false_locks as f64) <= 10.0 * bound,
        "{false_locks} false locks exceed 10x bound {bound:.3e}"
    );

    // Two bit errors per preamble still lock at threshold 28.
    let mut damaged = clean.clone();
    for f in 0..3 {
        damaged[f * mmlink::framing::FRAME_BITS + 4] ^= true;
        damaged[f * mmlink::framing::FRAME_BITS + 19] ^= true;
    }
    let state = detect_preamble(&damaged, DEFAULT_THRESHOLD).unwrap();
    assert_eq!(state.status, SyncStatus::Locked);
    pass(4, "preamble sync");
}

#[test]
fn criterion_5_noiseless_end_to_end_10mb() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF11E);
    let payload: Vec<u8> = (0..10 * 1024 * 1024).map(|_| rng.random()).collect();
    let cfg = LinkConfig::default(); // 10 m, multipath, AGC, FEC
    let (received, report) = run_link(&payload, &cfg, 0x60_612).unwrap();
    assert_eq!(received.len(), payload.len());
    let byte_errors = received
        .iter()
        .zip(&payload)
        .filter(|(a, b)| a != b)
        .count();
    assert_eq!(byte_errors, 0, "10 MB transfer must be byte-identical");
    assert_eq!(report.frames_synced, report.frames_tx);
    assert!(!report.no_sync);
    pass(5, "10 MB file over the 10 m link");
}

#[test]
fn criterion_6_ber_against_theory() {
    let sweep = SweepConfig {
        ebn0_points: vec![6.0, 8.0, 10.0],
        bits_per_point: 10_000_000,
        link: LinkConfig {
            channel: ChannelConfig::identity(),
            fec_enabled: false,
            ..LinkConfig::default()
        },
        master_seed: 0xBE5,
    };
    let points = ber_sweep(&sweep).unwrap();
    let mut last = f64::MAX;
    for p in &points {
        let rho = 10f64.powf(p.ebn0_db / 10.0);
        let theory = 0.5 * (-rho).exp();
        assert!(
            p.raw_ber <= 2.0 * theory && p.raw_ber >= 0.5 * theory,
            "Eb/N0 {}: measured {:.3e} vs theory {:.3e}",
            p.ebn0_db,
            p.raw_ber,
            theory
        );
        assert!(
            p.raw_ber <= last,
            "BER must not increase with Eb/N0 ({:.3e} after {last:.3e})",
            p.raw_ber
        );
        last = p.raw_ber;
        println!(
            "[acceptance]   Eb/N0 {:>4.1} dB: measured {:.3e}, theory {:.3e}",
            p.ebn0_db, p.raw_ber, theory
        );
    }
    pass(6, "uncoded BER vs differential-detection theory");
}

#[test]
fn criterion_7_link_budget_and_agc() {
    assert_eq!(received_power_dbm(1.0).unwrap(), -34.0);
    assert_eq!(received_power_dbm(10.0).unwrap(), -54.0);

    // Streams scaled to the exact anchor powers hit the exact gain limits.
    let mod_cfg = ModConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6C);
    let bits: Vec<bool> = (0..4000).map(|_| rng.random()).collect();
    let unit = modulate(&bits, &mod_cfg).unwrap();
    let measured: f64 =
        unit.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / unit.samples.len() as f64;
    for (dbm, expect) in [(-34.0, 8.0), (-54.0, 28.0)] {
        let scale = (10f64.powf(dbm / 10.0) / measured).sqrt();
        let rx = IqStream::new(
            unit.samples.iter().map(|&s| s * scale).collect(),
            unit.symbol_rate,
            unit.samples_per_symbol,
        )
        .unwrap();
        let agc = apply_agc(&rx, &AgcConfig::default()).unwrap();
        assert!(
            (agc.applied_gain_db - expect).abs() < 1e-6,
            "{dbm} dBm -> {} dB",
            agc.applied_gain_db
        );
    }
    pass(7, "link budget endpoints and AGC gains");
}

#[test]
fn criterion_8_phase_invariance() {
    let mod_cfg = ModConfig::default();
    let demod_cfg = DemodConfig::default();
    let sps = mod_cfg.samples_per_symbol;
    let mut rng = ChaCha8Rng::seed_from_u64(0x9A5E);
    let data: Vec<bool> = (0..100_000).map(|_| rng.random()).collect();
    let tx = modulate(&diff_encode(&data, false), &mod_cfg).unwrap();
    let soft = diff_demodulate(&tx, &demod_cfg).unwrap();
    let phase = recover_timing(&soft, sps).unwrap();
    let reference = decisions(&soft, sps, phase);
    assert_eq!(reference, data, "clean chain must be the identity");

    for theta in [
        0.7,
        std::f64::consts::FRAC_PI_2,
        2.2,
        std::f64::consts::PI,
        5.1,
    ] {
        let rot = Complex64::from_polar(1.0, theta);
        let rx = IqStream::new(
            tx.samples.iter().map(|&s| s * rot).collect(),
            tx.symbol_rate,
            sps,
        )
        .unwrap();
        let soft_r = diff_demodulate(&rx, &demod_cfg).unwrap();
        assert_eq!(
            decisions(&soft_r, sps, phase),
            reference,
            "rotation {theta} rad changed decisions"
        );
    }

    // 0.01 rad/symbol ramp: still error-free.
    let per_sample = 0.01 / sps as f64;
    let ramped = IqStream::new(
        tx.samples
            .iter()
            .enumerate()
            .map(|(n, &s)| s * Complex64::from_polar(1.0, per_sample * n as f64))
            .collect(),
        tx.symbol_rate,
        sps,
    )
    .unwrap();
    let soft_ramp = diff_demodulate(&ramped, &demod_cfg).unwrap();
    let dec = decisions(&soft_ramp, sps, recover_timing(&soft_ramp, sps).unwrap());
    let errors = dec.iter().zip(&data).filter(|(a, b)| a != b).count();
    assert_eq!(errors, 0, "phase ramp caused {errors} errors");
    pass(8, "phase rotation and drift tolerance");
}

#[test]
fn criterion_9_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_mmlink");
    let dir = std::env::temp_dir().join("mmlink_acceptance_determinism");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let config_path = dir.join("link.cfg");
    std::fs::write(
        &config_path,
        "ebn0_db = 9.0\nebn0_points = 8, 10\nbits_per_point = 100000\n",
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE7);
    let input_path = dir.join("input.bin");
    let payload: Vec<u8> = (0..200_000).map(|_| rng.random()).collect();
    std::fs::write(&input_path, &payload).unwrap();

    let cases: Vec<(&str, Vec<String>)> = vec![
        ("ber-sweep", vec![]),
        (
            "transfer",
            vec!["--input".into(), input_path.display().to_string()],
        ),
        ("eye", vec!["--traces".into(), "64".into()]),
        ("response", vec!["--points".into(), "101".into()]),
        ("spectrum", vec![]),
    ];

    for (subcommand, extra) in cases {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_path = dir.join(format!("{subcommand}_{run}.out"));
            let status = Command::new(bin)
                .arg(subcommand)
                .args(&extra)
                .args(["--seed", "271828"])
                .args(["--config", &config_path.display().to_string()])
                .args(["--out", &out_path.display().to_string()])
                .output()
                .expect("subcommand runs");
            assert!(
                status.status.success(),
                "{subcommand} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            outputs.push(std::fs::read(&out_path).unwrap());
        }
        assert_eq!(
            outputs[0], outputs[1],
            "{subcommand} output differs between identical runs"
        );
    }

    // selftest has no file output; its stdout must be stable.
    let mut stdouts = Vec::new();
    for _ in 0..2 {
        let out = Command::new(bin)
            .arg("selftest")
            .args(["--seed", "271828"])
            .output()
            .expect("selftest runs");
        assert!(out.status.success());
        stdouts.push(out.stdout);
    }
    assert_eq!(stdouts[0], stdouts[1]);
    pass(9, "CLI determinism");
}
