//! Command-line harness for the 60 GHz DBPSK link simulator: BER sweeps,
//! file transfer over the simulated link, and eye/response/spectrum exports
//! for plotting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmlink::config::SimConfig;
use mmlink::pipeline::{ber_sweep, export_eye, export_response, export_spectrum, run_link};
use mmlink::Error;

#[derive(Parser, Debug)]
#[command(
    name = "mmlink",
    version,
    about = "Baseband simulator for a 60 GHz single-carrier DBPSK link"
)]
struct Cli {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; identical seeds reproduce runs bit for bit.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Output path (default depends on the subcommand).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a BER/FER sweep over the configured Eb/N0 points and write CSV.
    BerSweep,
    /// Send a file through the simulated link and write the received copy.
    Transfer {
        /// File to transmit.
        #[arg(long)]
        input: PathBuf,
    },
    /// Export eye-diagram traces (one row per trace) as CSV.
    Eye {
        #[arg(long, default_value_t = 256)]
        traces: usize,
    },
    /// Export the channel/filter frequency response and tap table as CSV.
    Response {
        #[arg(long, default_value_t = 401)]
        points: usize,
        /// Tap line only, without the transmit/receive band filters.
        #[arg(long)]
        no_filters: bool,
    },
    /// Export the transmit power spectral density as CSV.
    Spectrum,
    /// Run a quick built-in check of the whole chain.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(Error::NoSync) => {
            eprintln!("error: receiver never achieved frame synchronization");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> mmlink::Result<ExitCode> {
    let sim = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(warning) = sim.link.channel.range_warning() {
        eprintln!("warning: {warning}");
    }

    match &cli.command {
        Command::BerSweep => {
            let out = output_path(cli, "sweep.csv");
            let points = ber_sweep(&sim.sweep(cli.seed))?;
            let mut csv = String::from("ebn0_db,raw_ber,post_fec_ber,fer\n");
            for p in &points {
                csv.push_str(&format!(
                    "{},{:.6e},{:.6e},{:.6e}\n",
                    p.ebn0_db, p.raw_ber, p.post_fec_ber, p.fer
                ));
            }
            fs::write(&out, csv)?;
            for p in &points {
                eprintln!(
                    "Eb/N0 {:>5.1} dB: raw BER {:.3e}, post-FEC BER {:.3e}, FER {:.3e} ({} frames, {} failed)",
                    p.ebn0_db,
                    p.raw_ber,
                    p.post_fec_ber,
                    p.fer,
                    p.report.frames_tx,
                    p.report.frames_failed,
                );
            }
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Transfer { input } => {
            let out = output_path(cli, "received.bin");
            let payload = fs::read(input)?;
            let (received, report) = run_link(&payload, &sim.link, cli.seed)?;
            fs::write(&out, &received)?;
            let byte_errors = payload
                .iter()
                .zip(&received)
                .filter(|(a, b)| a != b)
                .count()
                + payload.len().abs_diff(received.len());
            eprintln!(
                "transferred {} bytes -> {} bytes, {} byte errors",
                payload.len(),
                received.len(),
                byte_errors
            );
            eprintln!(
                "frames: {} sent, {} synced, {} corrected, {} failed, {} false locks",
                report.frames_tx,
                report.frames_synced,
                report.frames_corrected,
                report.frames_failed,
                report.false_locks
            );
            eprintln!(
                "raw BER {:.3e}, post-FEC BER {:.3e}, AGC gain {} dB",
                report.raw_ber(),
                report.post_fec_ber(),
                report
                    .agc_gain_db
                    .map(|g| format!("{g:.1}"))
                    .unwrap_or_else(|| "-".into())
            );
            eprintln!(
                "effective information rate at 875 Mbps channel: {:.2} Mbps",
                report.information_throughput(sim.link.modulation.symbol_rate) / 1e6
            );
            eprintln!("elapsed: {:.2?}; wrote {}", report.elapsed, out.display());
            if report.no_sync {
                return Err(Error::NoSync);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eye { traces } => {
            let out = output_path(cli, "eye.csv");
            let eye = export_eye(&sim.link, *traces, cli.seed)?;
            let mut csv = String::new();
            for row in &eye {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.9e}")).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            fs::write(&out, csv)?;
            eprintln!("wrote {} traces to {}", eye.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Response { points, no_filters } => {
            let out = output_path(cli, "response.csv");
            let resp = export_response(&sim.link, *points, !no_filters)?;
            let mut csv = String::from("freq_hz,re,im,mag_db\n");
            for (f, h) in resp.frequencies_hz.iter().zip(&resp.response) {
                csv.push_str(&format!(
                    "{},{:.9e},{:.9e},{:.4}\n",
                    f,
                    h.re,
                    h.im,
                    20.0 * h.norm().max(1e-150).log10()
                ));
            }
            fs::write(&out, csv)?;

            let impulse_out = sibling_path(&out, "impulse");
            let mut csv = String::from("delay_s,magnitude\n");
            for (delay, mag) in &resp.impulse {
                csv.push_str(&format!("{delay:.6e},{mag:.6e}\n"));
            }
            fs::write(&impulse_out, csv)?;
            eprintln!("wrote {} and {}", out.display(), impulse_out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum => {
            let out = output_path(cli, "spectrum.csv");
            let psd = export_spectrum(&sim.link, cli.seed)?;
            let mut csv = String::from("freq_hz,psd_db\n");
            for (f, db) in &psd {
                csv.push_str(&format!("{f},{db:.4}\n"));
            }
            fs::write(&out, csv)?;
            eprintln!("wrote {} bins to {}", psd.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => selftest(&sim),
    }
}

fn output_path(cli: &Cli, default_name: &str) -> PathBuf {
    cli.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_name))
}

/// `response.csv` -> `response.impulse.csv`.
fn sibling_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn selftest(sim: &SimConfig) -> mmlink::Result<ExitCode> {
    use mmlink::channel::received_power_dbm;
    use mmlink::fec::{rs_decode, rs_encode};
    use mmlink::framing::compute_rate_ledger;
    use mmlink::sequences::{build_gold_pair, cyclic_correlation};

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("[{}] {name}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    let ledger = compute_rate_ledger(875e6)?;
    check(
        "rate ledger: 875 Mbps -> 804.33 Mbps",
        (ledger.information_bit_rate - 804.33e6).abs() < 1e4,
    );

    check(
        "path loss anchors: -34 dBm @ 1 m, -54 dBm @ 10 m",
        received_power_dbm(1.0)? == -34.0 && received_power_dbm(10.0)? == -54.0,
    );

    let pair = build_gold_pair();
    let auto_ok =
        (1..31).all(|s| cyclic_correlation(pair.preamble.chips(), pair.preamble.chips(), s) == -1);
    let cross_ok = (0..31).all(|s| {
        [-1, -9, 7].contains(&cyclic_correlation(
            pair.preamble.chips(),
            pair.scrambler.chips(),
            s,
        ))
    });
    check(
        "preamble autocorrelation and Gold cross-correlation",
        auto_ok && cross_ok,
    );

    let data: Vec<u8> = (0..239).map(|i| (i * 7 % 256) as u8).collect();
    let cw = rs_encode(&data)?;
    let mut rx = *cw.as_bytes();
    for i in 0..8 {
        rx[i * 31] ^= 0xA5;
    }
    let fec_ok = match rs_decode(&rx) {
        Ok(d) => d.data[..] == data[..] && d.corrected == 8,
        Err(_) => false,
    };
    check("RS(255,239) corrects 8 byte errors", fec_ok);

    let payload: Vec<u8> = (0..100_000u32).map(|i| (i % 251) as u8).collect();
    let (received, report) = run_link(&payload, &sim.link, 12345)?;
    check(
        "end-to-end file roundtrip on the configured channel",
        received == payload && !report.no_sync,
    );

    if failures == 0 {
        println!("selftest passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest FAILED ({failures} checks)");
        Ok(ExitCode::from(1))
    }
}
