//! Command-line dispatch: argument parsing, CSV/JSON formatting, and the
//! results cache for expensive enumerations.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 numerical-contract
//! failure (a verify residual above tolerance).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cache::{Cache, CacheKey};
use crate::counting::{count_points, poisson_main_term, smoothed_sum};
use crate::decomp::{verify_inductive, verify_reduction};
use crate::error::{Error, Result};
use crate::experiments::{
    compact_set_mean_square, growth_fit, shear_average, shear_mean_square,
};
use crate::lattice::LatticeBasis;
use crate::oscsum::{h_smoothed, h_sum, h_sum_series, OscSumQuery};
use crate::specfun::{osc_integral_j, sum2int_1d};

/// Format a real with 9 significant digits, plain decimal where reasonable.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        let prec = (8 - mag).max(0) as usize;
        let s = format!("{x:.prec$}");
        // trim trailing zeros but keep at least one digit after the point
        if s.contains('.') {
            let t = s.trim_end_matches('0');
            let t = t.strip_suffix('.').unwrap_or(t);
            t.to_string()
        } else {
            s
        }
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Parser)]
#[command(name = "shearcount", version, about = "Lattice point counts, oscillatory sums, and shear-family experiments")]
struct Cli {
    /// Cap internal parallelism at N threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Bypass the on-disk results cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count lattice points of the basis inside the ball of the given radius.
    Count {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        radius: f64,
        /// Also evaluate the smoothed sum of this order.
        #[arg(long)]
        smooth: Option<u32>,
    },
    /// Special-function evaluations.
    Specfun {
        #[command(subcommand)]
        which: SpecfunCommand,
    },
    /// Sawtooth sums H_T and their smoothed versions.
    Hsum {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Torus point, comma-separated.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
        #[arg(long = "T")]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        j: u32,
        /// Also print the truncated series value with this many terms.
        #[arg(long)]
        series: Option<usize>,
    },
    /// Verify the reduction or inductive identity; fails (exit 2) above tolerance.
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Mean square of the remainder over a shear family.
    Meansquare(MeanSquareArgs),
    /// Shear-averaged remainder against its predicted value.
    Sharpness {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long = "T-grid")]
        t_grid: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gnuplot: bool,
    },
    /// Mean squares over a finite set of unimodular diagonal lattices.
    Compact {
        #[arg(long)]
        d: usize,
        /// Diagonal tuples, entries comma-separated, tuples semicolon-separated.
        #[arg(long)]
        a: String,
        #[arg(long = "T-grid")]
        t_grid: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpecfunCommand {
    /// The oscillatory Bessel integral.
    J {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        k: u32,
        #[arg(long = "X")]
        x: f64,
    },
    /// The 1D smoothed sum with its main term and error.
    Sum2int {
        #[arg(long = "T")]
        radius: f64,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    Reduction {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long = "T")]
        radius: f64,
        #[arg(long)]
        json: bool,
    },
    Inductive {
        #[arg(long)]
        basis: PathBuf,
        #[arg(long = "T")]
        radius: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct MeanSquareArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long)]
    basis: Option<PathBuf>,
    /// Log-spaced radius grid "a:b:n".
    #[arg(long = "T-grid")]
    t_grid: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reject (d, l) outside the supported family range.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    gnuplot: bool,
}

#[derive(Serialize)]
struct VerifyJson {
    lhs: f64,
    pieces: Vec<f64>,
    residual: f64,
    tolerance: f64,
    pass: bool,
}

/// Parse "a:b:n" into n log-spaced radii.
fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("T-grid must be a:b:n, got '{s}'")));
    }
    let a: f64 = parts[0].parse().map_err(|e| Error::Parse(format!("bad T-grid start: {e}")))?;
    let b: f64 = parts[1].parse().map_err(|e| Error::Parse(format!("bad T-grid end: {e}")))?;
    let n: usize = parts[2].parse().map_err(|e| Error::Parse(format!("bad T-grid count: {e}")))?;
    if !(a > 0.0) || b < a || n < 1 {
        return Err(Error::Parse(format!("T-grid needs 0 < a <= b and n >= 1, got '{s}'")));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
        .collect())
}

fn read_basis(path: &PathBuf) -> Result<LatticeBasis> {
    let text = std::fs::read_to_string(path)?;
    LatticeBasis::parse_text(&text)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn gnuplot_script(csv: &PathBuf, ycol: usize, ylabel: &str) -> String {
    format!(
        "set datafile separator ','\nset logscale xy\nset xlabel 'T'\nset ylabel '{}'\nplot '{}' using 3:{} with linespoints title '{}'\n",
        ylabel,
        csv.display(),
        ycol,
        ylabel
    )
}

/// Run one command; returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap help/version are not errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cache = if cli.no_cache { Cache::disabled() } else { Cache::from_env() };
    match run(cli.command, &cache) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cmd: Command, cache: &Cache) -> Result<i32> {
    match cmd {
        Command::Count { basis, radius, smooth } => {
            let g = read_basis(&basis)?;
            let key = CacheKey::new("count", &g, radius);
            let (vals, _hit) = cache.get_or_compute(&key, || {
                let r = count_points(&g, radius)?;
                Ok(vec![r.count as f64, r.main_term, r.remainder, r.boundary_hits as f64])
            })?;
            let mut line = format!(
                "{},{},{},{}",
                fmt_real(radius),
                vals[0] as u64,
                fmt_real(vals[1]),
                fmt_real(vals[2])
            );
            if let Some(k) = smooth {
                let skey = CacheKey::new(&format!("smooth{k}"), &g, radius);
                let (svals, _) = cache.get_or_compute(&skey, || {
                    Ok(vec![smoothed_sum(&g, radius, k)?])
                })?;
                let main = poisson_main_term(&g, radius, k);
                let _ = write!(line, ",{},{}", fmt_real(svals[0]), fmt_real(main));
            }
            println!("{line}");
            if vals[3] > 0.0 {
                eprintln!(
                    "warning: {} points within the boundary band of T = {}",
                    vals[3] as u64, radius
                );
            }
            Ok(0)
        }
        Command::Specfun { which } => {
            match which {
                SpecfunCommand::J { nu, k, x } => {
                    let v = osc_integral_j(nu, k, x)?;
                    println!("{},{},{},{}", fmt_real(nu), k, fmt_real(x), fmt_real(v));
                }
                SpecfunCommand::Sum2int { radius, k } => {
                    let r = sum2int_1d(radius, k)?;
                    println!(
                        "{},{},{},{},{}",
                        fmt_real(radius),
                        k,
                        fmt_real(r.sum),
                        fmt_real(r.main),
                        fmt_real(r.error)
                    );
                }
            }
            Ok(0)
        }
        Command::Hsum { basis, lambda, x, radius, j, series } => {
            let g = read_basis(&basis)?;
            let q = OscSumQuery::new(g, lambda, x, radius, j)?;
            let v = if j == 0 { h_sum(&q)? } else { h_smoothed(&q)? };
            let mut line = format!("{},{},{},{}", fmt_real(radius), fmt_real(lambda), j, fmt_real(v));
            if let Some(m) = series {
                let s = if j == 0 {
                    h_sum_series(&q, m)?
                } else {
                    crate::oscsum::h_smoothed_series(&q, m)?
                };
                let _ = write!(line, ",{}", fmt_real(s));
            }
            println!("{line}");
            Ok(0)
        }
        Command::Verify { which } => {
            let (report, tolerance, json) = match which {
                VerifyCommand::Reduction { basis, radius, json } => {
                    let g = read_basis(&basis)?;
                    let rep = verify_reduction(&g, radius)?;
                    let tol = 1e-6 * (1.0 + rep.lhs);
                    (rep, tol, json)
                }
                VerifyCommand::Inductive { basis, radius, k, json } => {
                    let g = read_basis(&basis)?;
                    let rep = verify_inductive(&g, radius, k)?;
                    let tol = 1e-5 * (1.0 + rep.lhs);
                    (rep, tol, json)
                }
            };
            let pass = report.residual.abs() <= tolerance;
            if json {
                let mut pieces = vec![report.main_piece];
                pieces.extend_from_slice(&report.h_pieces);
                let doc = VerifyJson {
                    lhs: report.lhs,
                    pieces,
                    residual: report.residual,
                    tolerance,
                    pass,
                };
                println!("{}", serde_json::to_string_pretty(&doc)?);
            } else {
                println!(
                    "lhs={} main={} residual={} tolerance={} pass={}",
                    fmt_real(report.lhs),
                    fmt_real(report.main_piece),
                    fmt_real(report.residual),
                    fmt_real(tolerance),
                    pass
                );
            }
            Ok(if pass { 0 } else { 2 })
        }
        Command::Meansquare(args) => {
            let g = match (&args.basis, args.d) {
                (Some(path), _) => read_basis(path)?,
                (None, Some(d)) => LatticeBasis::identity(d),
                (None, None) => {
                    return Err(Error::Parse("meansquare needs --basis or --d".into()))
                }
            };
            let ts = parse_t_grid(&args.t_grid)?;
            let ests = shear_mean_square(&g, args.l, &ts, args.samples, args.seed, args.strict)?;
            let mut csv = String::from(
                "family_d,family_l,T,n_samples,mean,mean_square,std_error,bound_ratio\n",
            );
            for e in &ests {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    e.family_d,
                    e.family_l,
                    fmt_real(e.radius),
                    e.samples,
                    fmt_real(e.mean),
                    fmt_real(e.mean_square),
                    fmt_real(e.std_error),
                    fmt_real(e.bound_ratio)
                );
            }
            emit(&args.out, &csv)?;
            if let Ok(fit) = growth_fit(&ests) {
                eprintln!("growth fit: slope {} r2 {}", fmt_real(fit.slope), fmt_real(fit.r2));
            }
            if args.gnuplot {
                if let Some(out) = &args.out {
                    let gp = out.with_extension("gp");
                    std::fs::write(&gp, gnuplot_script(out, 6, "mean_square"))?;
                }
            }
            Ok(0)
        }
        Command::Sharpness { basis, t_grid, samples, seed, out, gnuplot } => {
            let g = read_basis(&basis)?;
            let ts = parse_t_grid(&t_grid)?;
            let ests = shear_average(&g, &ts, samples, seed)?;
            let mut csv = String::from("T,avg,std_error,predicted\n");
            for e in &ests {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_real(e.radius),
                    fmt_real(e.average),
                    fmt_real(e.std_error),
                    fmt_real(e.predicted)
                );
            }
            emit(&out, &csv)?;
            if gnuplot {
                if let Some(o) = &out {
                    let gp = o.with_extension("gp");
                    std::fs::write(&gp, gnuplot_script(o, 2, "avg"))?;
                }
            }
            Ok(0)
        }
        Command::Compact { d, a, t_grid, samples, seed, out } => {
            let tuples: Vec<Vec<f64>> = a
                .split(';')
                .map(|t| {
                    t.split(',')
                        .map(|v| {
                            v.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::Parse(format!("bad diagonal entry '{v}': {e}")))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let ts = parse_t_grid(&t_grid)?;
            let summary = compact_set_mean_square(d, &tuples, &ts, samples, seed)?;
            let mut csv = String::from(
                "family_d,family_l,T,n_samples,mean,mean_square,std_error,bound_ratio\n",
            );
            for slice in &summary.per_slice {
                for e in slice {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{}",
                        e.family_d,
                        e.family_l,
                        fmt_real(e.radius),
                        e.samples,
                        fmt_real(e.mean),
                        fmt_real(e.mean_square),
                        fmt_real(e.std_error),
                        fmt_real(e.bound_ratio)
                    );
                }
            }
            for (t, m) in &summary.max_bound_ratio {
                let _ = writeln!(csv, "max,,{},,,,,{}", fmt_real(*t), fmt_real(*m));
            }
            emit(&out, &csv)?;
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_real_nine_digits() {
        assert_eq!(fmt_real(1.5), "1.5");
        assert_eq!(fmt_real(9.0), "9");
        assert_eq!(fmt_real(std::f64::consts::PI * 2.25), "7.06858347");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-1.9314165359), "-1.93141654");
    }

    #[test]
    fn t_grid_parses_log_spacing() {
        let g = parse_t_grid("8:128:5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[0] - 8.0).abs() < 1e-12);
        assert!((g[4] - 128.0).abs() < 1e-9);
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-9);
        assert!(parse_t_grid("8:128").is_err());
        assert!(parse_t_grid("0:4:3").is_err());
    }

    #[test]
    fn dispatch_missing_flag_is_usage_error() {
        assert_eq!(dispatch(["shearcount", "count", "--basis", "/nonexistent"]), 1);
    }
}
