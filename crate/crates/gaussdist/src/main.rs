//! `gaussdist`: computes optimal isoenergetic Gaussian state pairs, polar
//! curve sweeps, scaling tables, and runs the self-verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument error, 3 I/O
//! error.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gaussdist::fidelity::{helstrom_error, pure_fidelity};
use gaussdist::gaussian_core::{state_from_params, PureStateParams};
use gaussdist::multimode;
use gaussdist::optimum;
use gaussdist::verify;
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "gaussdist",
    version,
    about = "Energy-constrained Gaussian state discrimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal pair at per-mode energy E: parameters, fidelity, trace
    /// distance, Helstrom error, and closed-form vs numeric comparison.
    Optimal {
        #[arg(long)]
        energy: f64,
        #[arg(long, default_value_t = 1)]
        modes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Polar curves R₁(ϑ), R₂(ϑ) over ϑ ∈ (0, π/2) with an intersection
    /// footer.
    Polar {
        #[arg(long)]
        energy: f64,
        #[arg(long, default_value_t = 2048)]
        points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling table: -log fidelity of the coherent, centered, and optimal
    /// families plus -log Helstrom error across an energy sweep.
    Scaling {
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the self-verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum CliError {
    Argument(String),
    Io(String),
    Verification,
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<gaussdist::Error> for CliError {
    fn from(e: gaussdist::Error) -> Self {
        CliError::Argument(e.to_string())
    }
}

/// 17 significant digits, stable across platforms.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn metadata(seed: u64) -> serde_json::Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "command": std::env::args().collect::<Vec<_>>().join(" "),
    })
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn std::io::Write>, CliError> {
    match out {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            Ok(Box::new(std::io::BufWriter::new(file)))
        }
    }
}

/// Emits `(field, value)` rows as a two-column CSV or a flat JSON object.
fn write_fields(
    w: &mut dyn std::io::Write,
    fields: &[(&str, f64)],
    format: Format,
    seed: u64,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            writeln!(w, "field,value")?;
            for (name, value) in fields {
                writeln!(w, "{name},{}", num(*value))?;
            }
        }
        Format::Json => {
            let mut map = serde_json::Map::new();
            for (name, value) in fields {
                map.insert(name.to_string(), json!(value));
            }
            let doc = json!({ "metadata": metadata(seed), "fields": map });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn cmd_optimal(
    energy: f64,
    modes: usize,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(energy > 0.0) || modes < 1 {
        return Err(CliError::Argument(format!(
            "requires --energy > 0 and --modes >= 1 (got energy {energy}, modes {modes})"
        )));
    }
    let total = modes as f64 * energy;
    let pair = optimum::optimal_pair(total)?;
    let closed = if modes == 1 {
        pair.fidelity
    } else {
        let opt = multimode::spectrum_minimize(modes, energy)?;
        let (a, b) = opt.pair;
        let direct = pure_fidelity(&a, &b)?;
        if (direct - opt.fidelity).abs() / opt.fidelity > 1e-8 {
            return Err(CliError::Verification);
        }
        opt.fidelity
    };
    let numeric = optimum::numeric_minimize(total, seed)?.fidelity;
    let trace_distance = 2.0 * (1.0 - closed).max(0.0).sqrt();
    let p_err = helstrom_error(closed)?;
    let m1 = pair.state1.mean();
    let m2 = pair.state2.mean();
    let cov = pair.state1.covariance();

    let fields = [
        ("energy_per_mode", energy),
        ("modes", modes as f64),
        ("total_energy", total),
        ("d_c", pair.d_c),
        ("r", pair.r),
        ("state1_mean_q", m1[0]),
        ("state1_mean_p", m1[1]),
        ("state2_mean_q", m2[0]),
        ("state2_mean_p", m2[1]),
        ("cov_qq", cov[0][0]),
        ("cov_qp", cov[0][1]),
        ("cov_pp", cov[1][1]),
        ("fidelity", closed),
        ("fidelity_numeric", numeric),
        ("discrepancy", (closed - numeric).abs() / closed),
        ("trace_distance", trace_distance),
        ("p_err", p_err),
    ];
    let mut w = open_out(&out)?;
    write_fields(w.as_mut(), &fields, format, seed)
}

/// ϑ grid over (0, π/2) with exactly `points` nodes, containing π/4 exactly.
fn polar_grid(points: usize) -> Vec<f64> {
    let half = points / 2;
    let rest = points - half;
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut grid: Vec<f64> = (1..=half)
        .map(|i| i as f64 / half as f64 * quarter)
        .collect();
    grid.extend((1..=rest).map(|j| quarter + j as f64 / (rest + 1) as f64 * quarter));
    grid
}

fn cmd_polar(
    energy: f64,
    points: usize,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(energy > 0.0) {
        return Err(CliError::Argument(format!(
            "requires --energy > 0 (got {energy})"
        )));
    }
    if points < 16 {
        return Err(CliError::Argument(format!(
            "requires --points >= 16 (got {points})"
        )));
    }
    let grid = polar_grid(points);
    let mut rows = Vec::with_capacity(points);
    for &theta in &grid {
        let (r1, r2) = optimum::polar_curves(energy, theta)?;
        rows.push((theta, r1, r2));
    }
    let report = optimum::find_intersections(energy, points.max(256))?;

    let mut w = open_out(&out)?;
    match format {
        Format::Csv => {
            writeln!(w, "theta,R1,R2,defined2")?;
            for (theta, r1, r2) in &rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    num(*theta),
                    num(r1.unwrap_or(f64::NAN)),
                    num(r2.unwrap_or(f64::NAN)),
                    u8::from(r2.is_some())
                )?;
            }
            writeln!(w, "# intersections,{}", report.intersections.len())?;
            for inter in &report.intersections {
                writeln!(
                    w,
                    "# intersection,{},{}",
                    num(inter.theta),
                    num(inter.radius)
                )?;
            }
        }
        Format::Json => {
            let doc = json!({
                "metadata": metadata(seed),
                "energy": energy,
                "rows": rows.iter().map(|(theta, r1, r2)| json!({
                    "theta": theta,
                    "R1": r1,
                    "R2": r2,
                    "defined2": r2.is_some(),
                })).collect::<Vec<_>>(),
                "intersections": report.intersections.iter().map(|i| json!({
                    "theta": i.theta,
                    "radius": i.radius,
                    "residual": i.residual,
                })).collect::<Vec<_>>(),
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn cmd_scaling(
    start: f64,
    stop: f64,
    steps: usize,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(start > 0.0) || !(start < stop) || steps < 2 {
        return Err(CliError::Argument(format!(
            "requires 0 < --start < --stop and --steps >= 2 \
             (got start {start}, stop {stop}, steps {steps})"
        )));
    }
    let mut rows = Vec::with_capacity(steps);
    for i in 0..steps {
        let e = start + i as f64 * (stop - start) / (steps - 1) as f64;
        // coherent pair ±√E, evaluated through the fidelity formula
        let plus = state_from_params(&[PureStateParams::coherent(Complex64::new(e.sqrt(), 0.0))?])?;
        let minus =
            state_from_params(&[PureStateParams::coherent(Complex64::new(-e.sqrt(), 0.0))?])?;
        let f_coherent = pure_fidelity(&plus, &minus)?;
        let (_, f_centered) = optimum::centered_minimum(e)?;
        let pair = optimum::optimal_pair(e)?;
        rows.push((
            e,
            -f_coherent.ln(),
            -f_centered.ln(),
            -pair.fidelity.ln(),
            -pair.p_err.ln(),
        ));
    }

    let mut w = open_out(&out)?;
    match format {
        Format::Csv => {
            writeln!(
                w,
                "E,neg_log_F_coherent,neg_log_F_centered,neg_log_F_optimal,neg_log_perr_optimal"
            )?;
            for (e, a, b, c, d) in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    num(*e),
                    num(*a),
                    num(*b),
                    num(*c),
                    num(*d)
                )?;
            }
        }
        Format::Json => {
            let doc = json!({
                "metadata": metadata(seed),
                "rows": rows.iter().map(|(e, a, b, c, d)| json!({
                    "E": e,
                    "neg_log_F_coherent": a,
                    "neg_log_F_centered": b,
                    "neg_log_F_optimal": c,
                    "neg_log_perr_optimal": d,
                })).collect::<Vec<_>>(),
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

fn cmd_verify(level: LevelArg, seed: u64) -> Result<(), CliError> {
    let level = match level {
        LevelArg::Fast => verify::Level::Fast,
        LevelArg::Full => verify::Level::Full,
    };
    let results = verify::run(level, seed);
    let mut all_passed = true;
    for check in &results {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} — {}", check.name, check.detail);
        all_passed &= check.passed;
    }
    if all_passed {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        let failed: Vec<&str> = results
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        eprintln!("failed checks: {}", failed.join(", "));
        Err(CliError::Verification)
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimal {
            energy,
            modes,
            seed,
            format,
            out,
        } => cmd_optimal(energy, modes, seed, format, out),
        Command::Polar {
            energy,
            points,
            seed,
            format,
            out,
        } => cmd_polar(energy, points, seed, format, out),
        Command::Scaling {
            start,
            stop,
            steps,
            seed,
            format,
            out,
        } => cmd_scaling(start, stop, steps, seed, format, out),
        Command::Verify { level, seed } => cmd_verify(level, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Verification) => ExitCode::from(1),
        Err(CliError::Argument(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
