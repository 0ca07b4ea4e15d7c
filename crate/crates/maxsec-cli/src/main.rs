use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use maxsec::config::RunConfig;
use maxsec::even::build_even;
use maxsec::io::{BodyFile, ChordSamples, RadialSamples};
use maxsec::odd::build_odd;
use maxsec::verify::{scan, scan_directions, verify_file};
use serde_json::json;

const EXIT_BUILD: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "maxsec", version, about = "Bodies of revolution with constant maximal section volume")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a body; even dimensions use the chord system, odd ones add the zero search.
    Build(BuildArgs),
    /// Check M_K constancy, concavity and asymmetry of a body file.
    Verify(VerifyArgs),
    /// Write profile, chord, radial and M_K scan CSV files.
    Plotdata(PlotArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "h-scale")]
    h_scale: Option<f64>,
    /// Comma-separated bump coefficients.
    #[arg(long = "h-coeffs", value_delimiter = ',', allow_hyphen_values = true)]
    h_coeffs: Option<Vec<f64>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long, default_value = "body.json")]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    body: PathBuf,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the report to this file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    body: PathBuf,
    #[arg(long)]
    directions: Option<usize>,
    /// Directory for the CSV files.
    #[arg(short, long, default_value = ".")]
    output: PathBuf,
}

fn config(flags: RunConfig) -> Result<RunConfig, String> {
    let file = RunConfig::from_env().map_err(|e| e.to_string())?.unwrap_or_default();
    Ok(file.overridden_by(flags))
}

fn fail(code: u8, value: serde_json::Value) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    ExitCode::from(code)
}

fn build(args: BuildArgs) -> ExitCode {
    let flags = RunConfig {
        dim: args.dim,
        delta: args.delta,
        h_scale: args.h_scale,
        h_coeffs: args.h_coeffs,
        k: args.k,
        seed: args.seed,
        ..Default::default()
    };
    let cfg = match config(flags) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_BUILD, json!({"status": "config_error", "error": e})),
    };
    let start = Instant::now();
    let dim = cfg.dim();
    let built = if dim % 2 == 0 {
        let ec = cfg.even_config();
        build_even(&ec).map(|b| {
            let mut f = BodyFile::new(&b.body);
            f.perturbation = Some(b.perturbation_spec());
            f.chords = Some(ChordSamples::from_state(&b.state));
            f.report = Some(json!({"config": ec, "build": b.report}));
            f
        })
    } else {
        let oc = cfg.odd_config();
        build_odd(&oc).map(|b| {
            let mut f = BodyFile::new(&b.body);
            f.perturbation = Some(b.perturbation.spec());
            f.chords = Some(ChordSamples::from_state(&b.state));
            f.radial = Some(RadialSamples::from_pair(&b.radial));
            f.report = Some(json!({"config": oc, "build": b.report}));
            f
        })
    };
    eprintln!("build time {:.1} s", start.elapsed().as_secs_f64());
    let file = match built {
        Ok(f) => f,
        Err(e) => return fail(EXIT_BUILD, json!({"status": "build_failed", "dim": dim, "error": e.to_string(), "kind": format!("{e:?}")})),
    };
    if let Err(e) = file.save(&args.output) {
        return fail(EXIT_BUILD, json!({"status": "write_failed", "error": e.to_string()}));
    }
    let report = json!({"status": "ok", "body": args.output, "report": file.report});
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    ExitCode::SUCCESS
}

fn verify(args: VerifyArgs) -> ExitCode {
    let cfg = match config(RunConfig { directions: args.directions, tol: args.tol, ..Default::default() }) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_VERIFY, json!({"status": "config_error", "error": e})),
    };
    let report = BodyFile::load(&args.body).and_then(|f| verify_file(&f, cfg.directions(), cfg.tol()));
    let report = match report {
        Ok(r) => r,
        Err(e) => return fail(EXIT_VERIFY, json!({"status": "verify_error", "error": e.to_string()})),
    };
    let text = serde_json::to_string_pretty(&report).expect("serializable");
    if let Some(path) = &args.output {
        if let Err(e) = std::fs::write(path, text.clone() + "\n") {
            return fail(EXIT_VERIFY, json!({"status": "write_failed", "error": e.to_string()}));
        }
    }
    println!("{text}");
    eprintln!("spread {:.3e}, verdict {}", report.spread, if report.verdict.pass { "PASS" } else { "FAIL" });
    if report.verdict.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(File::create(path).map_err(|e| format!("{}: {e}", path.display()))?);
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.17e}"))).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

fn plotdata(args: PlotArgs) -> Result<Vec<PathBuf>, String> {
    let cfg = config(RunConfig { directions: args.directions, ..Default::default() })?;
    let file = BodyFile::load(&args.body).map_err(|e| e.to_string())?;
    let body = file.body().map_err(|e| e.to_string())?;
    std::fs::create_dir_all(&args.output).map_err(|e| e.to_string())?;
    let mut written = Vec::new();
    let (lo, hi) = body.profile.domain();
    let n = 2001;
    let path = args.output.join("profile.csv");
    write_csv(&path, &["xi", "f"], (0..n).map(|i| {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        vec![x, body.profile.value(x)]
    }))?;
    written.push(path);
    if let Some(c) = &file.chords {
        let path = args.output.join("chords.csv");
        write_csv(&path, &["s", "x", "y"], (0..c.s.len()).map(|i| vec![c.s[i], c.x[i], c.y[i]]))?;
        written.push(path);
    }
    if let Some(r) = &file.radial {
        let path = args.output.join("radial.csv");
        write_csv(&path, &["alpha", "R", "r"], (0..r.alpha.len()).map(|i| vec![r.alpha[i], r.big[i], r.small[i]]))?;
        written.push(path);
    }
    let samples = scan(&body, &scan_directions(cfg.directions())).map_err(|e| e.to_string())?;
    let path = args.output.join("mk.csv");
    write_csv(&path, &["alpha", "side", "t_star", "m_k"], samples.iter().map(|s| vec![s.alpha, s.side as f64, s.t_star, s.value]))?;
    written.push(path);
    Ok(written)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Build(a) => build(a),
        Command::Verify(a) => verify(a),
        Command::Plotdata(a) => match plotdata(a) {
            Ok(paths) => {
                println!("{}", serde_json::to_string_pretty(&json!({"status": "ok", "files": paths})).expect("serializable"));
                ExitCode::SUCCESS
            }
            Err(e) => fail(1, json!({"status": "plotdata_failed", "error": e})),
        },
    }
}
