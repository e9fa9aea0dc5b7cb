//! `ridgelab` command-line interface.
//!
//! Subcommands: `wavelet-info`, `analyze`, `synthesize`, `suitability`,
//! `fidelity`. Exit codes: 0 success, 1 I/O failure, 2 invalid input or
//! configuration, 3 analysis found no ridge. `RIDGELAB_THREADS` caps the
//! internal thread pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ridgelab::diagnostics::{check_suitability, iterated_fidelity, FidelityVerdict};
use ridgelab::error::Error;
use ridgelab::io::config::{parse_config_json, FlagSet};
use ridgelab::io::csv::read_signal_csv;
use ridgelab::io::export::{
    write_estimate_csv, write_residual_csv, write_ridge_csv, write_scalogram_csv,
    write_scalogram_raw, write_scalogram_sidecar, write_signal_csv, write_truth_csv,
    DiagnosticsJson,
};
use ridgelab::morse::MorseWavelet;
use ridgelab::pipeline::{analyze, PipelineParams};
use ridgelab::ridge::RidgeKind;
use ridgelab::synth::{synthesize, SignalKind, SynthParams};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NO_RIDGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ridgelab",
    version,
    about = "Analytic wavelet transform analysis of modulated oscillatory signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form properties of a Morse wavelet as JSON.
    WaveletInfo { beta: f64, gamma: f64 },
    /// Run the full transform/ridge/estimation pipeline on a CSV record.
    Analyze(AnalyzeArgs),
    /// Generate a deterministic test signal plus its ground truth.
    Synthesize(SynthesizeArgs),
    /// Check wavelet suitability at a given stability level.
    Suitability {
        beta: f64,
        gamma: f64,
        /// Stability level delta of the target signal.
        #[arg(long)]
        delta: f64,
        /// Highest derivative order to check.
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// Analyze a record and score the estimate by re-analysis.
    Fidelity(AnalyzeArgs),
}

#[derive(Args, Clone)]
struct AnalyzeArgs {
    /// Input CSV: one value column, or time,value with uniform spacing.
    #[arg(long)]
    input: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "ridgelab-output")]
    outdir: PathBuf,
    /// Sample interval used when the CSV has no time column.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// Also dump the complex scalogram as little-endian f64 pairs.
    #[arg(long)]
    raw: bool,
    /// JSON config file; explicit flags below win over its entries.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Lowest analyzed frequency, radians per sample.
    #[arg(long)]
    freq_min: Option<f64>,
    /// Highest analyzed frequency, radians per sample.
    #[arg(long)]
    freq_max: Option<f64>,
    #[arg(long)]
    voices: Option<u32>,
    #[arg(long, value_parser = parse_ridge_kind)]
    ridge_kind: Option<RidgeKind>,
    /// Minimum ridge length in cycles (default: twice the wavelet duration).
    #[arg(long)]
    min_cycles: Option<f64>,
    #[arg(long)]
    edge_alpha: Option<f64>,
    #[arg(long)]
    truncation: Option<usize>,
    /// Chaining jump limit in grid steps.
    #[arg(long)]
    max_jump: Option<f64>,
}

fn parse_ridge_kind(s: &str) -> Result<RidgeKind, String> {
    match s {
        "amplitude" => Ok(RidgeKind::Amplitude),
        "phase" => Ok(RidgeKind::Phase),
        other => Err(format!("expected 'amplitude' or 'phase', got {other:?}")),
    }
}

#[derive(Args)]
struct SynthesizeArgs {
    /// tone | fm | chirp | gaussian-envelope
    #[arg(long, value_parser = parse_signal_kind)]
    kind: SignalKind,
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Carrier frequency, radians per time unit.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI / 32.0)]
    omega0: f64,
    /// Initial phase (tone).
    #[arg(long, default_value_t = 0.0)]
    phi0: f64,
    /// Modulation depth (fm).
    #[arg(long, default_value_t = 0.05)]
    modulation: f64,
    /// Modulation frequency (fm), radians per time unit.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI / 512.0)]
    omega1: f64,
    /// Chirp rate (chirp), radians per time unit squared.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Envelope width (gaussian-envelope), time units.
    #[arg(long, default_value_t = 128.0)]
    sigma: f64,
    /// Signal CSV path.
    #[arg(long, default_value = "signal.csv")]
    output: PathBuf,
    /// Ground-truth CSV path.
    #[arg(long, default_value = "truth.csv")]
    truth: PathBuf,
}

fn parse_signal_kind(s: &str) -> Result<SignalKind, String> {
    match s {
        "tone" => Ok(SignalKind::Tone),
        "fm" => Ok(SignalKind::Fm),
        "chirp" => Ok(SignalKind::Chirp),
        "gaussian-envelope" => Ok(SignalKind::GaussianEnvelope),
        other => Err(format!(
            "expected tone|fm|chirp|gaussian-envelope, got {other:?}"
        )),
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var("RIDGELAB_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                // Ignore failure: the pool may already be initialized.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn params_from_args(args: &AnalyzeArgs) -> Result<PipelineParams, Error> {
    let mut params = PipelineParams::default();
    let mut flags = FlagSet::default();
    macro_rules! flag {
        ($field:ident) => {
            if let Some(v) = args.$field {
                params.$field = v;
                flags.$field = true;
            }
        };
    }
    flag!(beta);
    flag!(gamma);
    flag!(freq_min);
    flag!(freq_max);
    flag!(ridge_kind);
    flag!(edge_alpha);
    flag!(truncation);
    flag!(max_jump);
    if let Some(v) = args.voices {
        params.voices_per_octave = v;
        flags.voices_per_octave = true;
    }
    if let Some(v) = args.min_cycles {
        params.min_cycles = Some(v);
        flags.min_cycles = true;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)?;
        let cfg = parse_config_json(&text)?;
        cfg.apply(&mut params, &flags);
    }
    Ok(params)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SpreadJson {
    Value(f64),
    Divergent(&'static str),
}

#[derive(Serialize)]
struct WaveletInfoJson {
    beta: f64,
    gamma: f64,
    peak_frequency: f64,
    duration: f64,
    psi3_ratio: f64,
    decay_rate: f64,
    time_spread: SpreadJson,
}

fn cmd_wavelet_info(beta: f64, gamma: f64) -> Result<(), Error> {
    let w = MorseWavelet::new(beta, gamma)?;
    let time_spread = match w.time_spread() {
        Ok(v) => SpreadJson::Value(v),
        Err(Error::Domain(_)) => SpreadJson::Divergent("divergent"),
        Err(e) => return Err(e),
    };
    let info = WaveletInfoJson {
        beta: w.beta(),
        gamma: w.gamma(),
        peak_frequency: w.peak_frequency(),
        duration: w.duration(),
        psi3_ratio: w.psi3_ratio(),
        decay_rate: w.decay_rate(),
        time_spread,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&info).expect("info serializes")
    );
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8, Error> {
    let x = read_signal_csv(&args.input, args.dt)?;
    let params = params_from_args(args)?;
    params.validate(x.dt())?;
    let out = analyze(&x, &params)?;

    std::fs::create_dir_all(&args.outdir)?;
    let dir = &args.outdir;
    write_scalogram_csv(&dir.join("scalogram.csv"), &out.fields.scalogram)?;
    write_scalogram_sidecar(&dir.join("scalogram.json"), &out.fields.scalogram)?;
    if args.raw {
        write_scalogram_raw(&dir.join("scalogram.bin"), &out.fields.scalogram)?;
    }
    // Scales are in time units, so the scale frequency omega_p / s is in
    // radians per time unit, consistent with the time column.
    let w = params.wavelet()?;
    write_ridge_csv(
        &dir.join("ridges.csv"),
        w.peak_frequency(),
        x.dt(),
        &out.curves,
        &out.estimates,
    )?;

    let Some(best) = out.best else {
        eprintln!("no ridge found");
        return Ok(EXIT_NO_RIDGE);
    };
    write_estimate_csv(&dir.join("estimate.csv"), &out.estimates[best])?;
    write_residual_csv(&dir.join("residual.csv"), &x, &out.estimates[best])?;
    if let Some(d) = &out.diagnostics {
        DiagnosticsJson::new(&w, d.delta, d.suitability.clone(), None)
            .write(&dir.join("diagnostics.json"))?;
    }
    Ok(0)
}

fn cmd_fidelity(args: &AnalyzeArgs) -> Result<u8, Error> {
    let x = read_signal_csv(&args.input, args.dt)?;
    let params = params_from_args(args)?;
    params.validate(x.dt())?;
    let out = analyze(&x, &params)?;
    let Some(best) = out.best else {
        eprintln!("no ridge found");
        return Ok(EXIT_NO_RIDGE);
    };
    let report = iterated_fidelity(&out.estimates[best], &params)?;
    let stats = match report.verdict {
        FidelityVerdict::Converged(stats) => Some(stats),
        FidelityVerdict::NoRidge => {
            eprintln!("re-analysis found no ridge");
            None
        }
    };
    let w = params.wavelet()?;
    let diagnostics = out
        .diagnostics
        .ok_or_else(|| Error::InvalidArgument("estimate too short for diagnostics".into()))?;
    let json = DiagnosticsJson::new(&w, diagnostics.delta, diagnostics.suitability, stats);
    println!("{}", json.to_pretty_string());
    Ok(0)
}

fn cmd_synthesize(args: &SynthesizeArgs) -> Result<(), Error> {
    let params = SynthParams {
        kind: args.kind,
        n: args.n,
        dt: args.dt,
        amplitude: args.amplitude,
        omega0: args.omega0,
        phi0: args.phi0,
        modulation: args.modulation,
        omega1: args.omega1,
        rate: args.rate,
        sigma: args.sigma,
    };
    let truth = synthesize(&params)?;
    write_signal_csv(&args.output, &truth.signal)?;
    write_truth_csv(&args.truth, &truth)?;
    Ok(())
}

fn cmd_suitability(beta: f64, gamma: f64, delta: f64, n_max: usize) -> Result<(), Error> {
    let w = MorseWavelet::new(beta, gamma)?;
    let verdict = check_suitability(&w, delta, n_max)?;
    let json = DiagnosticsJson::new(&w, delta, verdict, None);
    println!("{}", json.to_pretty_string());
    Ok(())
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome: Result<u8, Error> = match &cli.command {
        Command::WaveletInfo { beta, gamma } => cmd_wavelet_info(*beta, *gamma).map(|()| 0),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Synthesize(args) => cmd_synthesize(args).map(|()| 0),
        Command::Suitability {
            beta,
            gamma,
            delta,
            n_max,
        } => cmd_suitability(*beta, *gamma, *delta, *n_max).map(|()| 0),
        Command::Fidelity(args) => cmd_fidelity(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
