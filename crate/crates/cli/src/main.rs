mod spec;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ergolab::correspondence::{averaged_correlation, correspondence_table, MONOTONE_GAP_EPS};
use ergolab::experiments::{
    complement_witness_search, covering_curve, hindman_counterexample, sweeping_classifier, ScanParams,
};
use ergolab::real::Real;
use ergolab::sets::{banach_lower_bound, upper_density_along, ShiftExpr};
use ergolab::weyl::{correlation_vs_product, ergodicity_scan, spectral_identity_check, TrigPoly};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use spec::{parse_count, parse_counts, parse_folner, parse_grid, parse_seq, parse_set, parse_window};

const AFTER_HELP: &str = "\
SPECS
  set:      hindman | evens | all | empty | periodic m=M r=R1,R2 | ab a=P/Q b=P/Q
            | rot alpha=X [u=X] v=X [x0=X] | intervals [a,b)[c,d)
  seq:      id | log | poly2log | pow [b=X] c=X | powsum [b=X] c=X d=X a=X
            | powlog [b=X] c=X d=X | powlogsum [b=X] c=X d=X a=X | prime c=X [n=COUNT] | list k1,k2,...
  folner:   initial | dyadic | shifted base=I step=I scale=COUNT | list [a,b)[c,d)
  expr:     E | ~E | E@h | ~E@h | (e1 | e2) | (e1 & e2)
  reals:    decimals, p/q, golden, phi, sqrt2, sqrt3
  counts:   65536 | 1e6 | 2^16

CSV HEADERS
  density         N,numer,denom,decimal
  banach          numer,denom,decimal,witnessLo,witnessHi
  cover           K,shifts,numer,denom,decimal,witnessLo,witnessHi
  counterexample  K,N,numer,denom,decimal,bound,within
  weyl            x,N,magnitude   then a blank line and  x,ratio,verdict
  spectral        N,lhs,rhs,gap
  correlate       h,average       (with --seq: numer,denom,average,density,product,deviation)
  cylinder        exprId,N,numer,denom,decimal
  witness         h,numer,denom,decimal,witnessLo,witnessHi
  classify        set,K,shifts,numer,denom,decimal,curveVerdict   then verdict and caveat lines

ENVIRONMENT
  ERGOLAB_THREADS   worker thread count (output does not depend on it)

EXIT STATUS
  0 success, 1 selftest failure, 2 parse, range or computation error";

#[derive(Parser, Debug)]
#[command(name = "ergolab", version, about = "Exact density and ergodic-sequence experiments on subsets of the integers")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Window length.
    #[arg(long = "L", value_parser = parse_count)]
    len: u64,
    /// Search bound: windows lie in [0, B).
    #[arg(long = "B", value_parser = parse_count)]
    bound: u64,
    /// Window step; defaults to L/2.
    #[arg(long, value_parser = parse_count)]
    stride: Option<u64>,
}

impl ScanArgs {
    fn params(&self) -> ScanParams {
        ScanParams::new(self.len, self.bound, self.stride)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact densities along a Følner family and their running maximum.
    Density {
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "E")]
        expr: String,
        #[arg(long, default_value = "initial")]
        folner: String,
        #[arg(long)]
        nmax: u32,
    },
    /// Best-window density, a certified lower bound for the upper Banach density.
    Banach {
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "E")]
        expr: String,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Best-window density of the union of E - k_n over n <= K, per K.
    Cover {
        #[arg(long)]
        set: String,
        #[arg(long)]
        seq: String,
        #[arg(long)]
        ks: String,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Dyadic densities of unions of E - i, i <= K, for the block set.
    Counterexample {
        #[arg(long)]
        ks: String,
        #[arg(long)]
        nmax: u32,
    },
    /// |S_N(x)| over a grid of x and checkpoints N, with decay verdicts.
    Weyl {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        ns: String,
        #[arg(long, default_value = "default")]
        grid: String,
    },
    /// Both sides of the spectral identity for a rotation and a trigonometric polynomial.
    Spectral {
        #[arg(long)]
        seq: String,
        #[arg(long)]
        alpha: String,
        #[arg(long, value_parser = parse_count)]
        n: u64,
        /// Coefficients c_-J..c_J as `re` or `re:im`, comma-separated.
        #[arg(long, conflicts_with = "degree")]
        coeffs: Option<String>,
        /// Draw random coefficients of this degree from --seed.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Quadrature points; a power of two above 4·degree.
        #[arg(long)]
        grid_size: Option<usize>,
    },
    /// Partial averages of dens(E ∩ (E - g)), g < h, against dens(E)².
    Correlate {
        #[arg(long)]
        set: String,
        #[arg(long, default_value = "initial")]
        folner: String,
        /// Index of the fixed Følner window.
        #[arg(long, value_parser = parse_count, required_unless_present = "seq")]
        k: Option<u64>,
        #[arg(long, value_parser = parse_count, required_unless_present = "seq")]
        h: Option<u64>,
        /// Average over shifts k_n of this sequence instead.
        #[arg(long, requires_all = ["navg", "window"])]
        seq: Option<String>,
        #[arg(long, value_parser = parse_count)]
        navg: Option<u64>,
        /// Window `lo,hi` for --seq.
        #[arg(long)]
        window: Option<String>,
    },
    /// Densities of shift expressions along a Følner family.
    Cylinder {
        #[arg(long)]
        set: String,
        /// Expressions separated by `;`.
        #[arg(long)]
        exprs: String,
        #[arg(long, default_value = "initial")]
        folner: String,
        #[arg(long)]
        nmax: u32,
        #[arg(long, default_value_t = MONOTONE_GAP_EPS)]
        eps: f64,
    },
    /// The shift h <= hmax maximizing the best-window density of E^c ∩ (E - h).
    Witness {
        #[arg(long)]
        set: String,
        #[arg(long, value_parser = parse_count)]
        hmax: u64,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Heuristic sweeping-out evidence from covering curves on several sets.
    Classify {
        #[arg(long)]
        seq: String,
        /// Set specs separated by `;`.
        #[arg(long, default_value = "hindman;evens;rot alpha=golden v=1/2")]
        sets: String,
        #[arg(long)]
        ks: String,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Seeded randomized checks of every library invariant.
    Selftest {
        #[arg(long, default_value_t = 2026)]
        seed: u64,
    },
}

/// A failure reported with exit status 2.
#[derive(Debug)]
struct Fail(String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

fn max_of(ks: &[u64]) -> u64 {
    ks.iter().copied().max().unwrap_or(1)
}

fn parse_expr(text: &str) -> Result<ShiftExpr, Fail> {
    text.parse().map_err(|e| Fail(format!("expression {text:?} {e}")))
}

fn to_u32(v: u64, what: &str) -> Result<u32, Fail> {
    u32::try_from(v).map_err(|_| Fail(format!("{what} {v} is too large")))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

fn coeffs_from_text(text: &str) -> Result<Vec<Complex64>, Fail> {
    text.split(',')
        .map(|item| {
            let (re, im) = item.split_once(':').unwrap_or((item, "0"));
            let re: f64 = re.trim().parse().map_err(|_| Fail(format!("bad coefficient {item:?}")))?;
            let im: f64 = im.trim().parse().map_err(|_| Fail(format!("bad coefficient {item:?}")))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

fn run(command: Command, format: Format) -> Result<(String, bool), Fail> {
    let csv = format == Format::Csv;
    let text = match command {
        Command::Density { set, expr, folner, nmax } => {
            let curve = upper_density_along(&parse_expr(&expr)?, &parse_set(&set)?, &parse_folner(&folner)?, nmax)?;
            if csv {
                let mut out = String::from("N,numer,denom,decimal\n");
                for t in &curve.terms {
                    out.push_str(&format!("{},{},{},{}\n", t.n, t.value.numer, t.value.denom, t.value.decimal()));
                }
                out
            } else {
                pretty(&json!({ "set": set, "expr": expr, "folner": folner, "curve": curve }))
            }
        }
        Command::Banach { set, expr, scan } => {
            let p = scan.params();
            let b = banach_lower_bound(&parse_expr(&expr)?, &parse_set(&set)?, p.len, p.bound, p.stride)?;
            if csv {
                format!(
                    "numer,denom,decimal,witnessLo,witnessHi\n{},{},{},{},{}\n",
                    b.density.numer,
                    b.density.denom,
                    b.density.decimal(),
                    b.witness.lo,
                    b.witness.hi
                )
            } else {
                pretty(&json!({ "set": set, "expr": expr, "scan": p, "bound": b }))
            }
        }
        Command::Cover { set, seq, ks, scan } => {
            let ks = parse_counts(&ks, false)?;
            let report = covering_curve(&parse_set(&set)?, &parse_seq(&seq, max_of(&ks))?, &ks, scan.params())?;
            if csv {
                report.to_csv()
            } else {
                pretty(&json!({ "report": report, "monotone": report.is_monotone() }))
            }
        }
        Command::Counterexample { ks, nmax } => {
            let table = hindman_counterexample(nmax, &parse_counts(&ks, true)?)?;
            if csv {
                table.to_csv()
            } else {
                pretty(&json!({ "table": table, "allWithin": table.all_within() }))
            }
        }
        Command::Weyl { seq, ns, grid } => {
            let ns = parse_counts(&ns, false)?;
            let report = ergodicity_scan(&parse_seq(&seq, max_of(&ns))?, &ns, &parse_grid(&grid)?)?;
            if csv {
                let mut out = report.to_csv();
                out.push_str("\nx,ratio,verdict\n");
                for v in &report.verdicts {
                    let verdict = serde_json::to_value(v.verdict)?;
                    out.push_str(&format!("{},{:.12e},{}\n", v.x, v.ratio, verdict.as_str().unwrap_or_default()));
                }
                out
            } else {
                pretty(&json!(report))
            }
        }
        Command::Spectral { seq, alpha, n, coeffs, degree, seed, grid_size } => {
            let f = match (coeffs, degree) {
                (Some(text), _) => TrigPoly::new(coeffs_from_text(&text)?)?,
                (None, Some(d)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let c = (0..2 * d + 1)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect();
                    TrigPoly::new(c)?
                }
                (None, None) => TrigPoly::monomial(1),
            };
            let grid = grid_size.unwrap_or_else(|| (4 * f.degree() + 1).next_power_of_two().max(16));
            let alpha = Real::parse(&alpha).ok_or_else(|| Fail(format!("alpha: not a number: {alpha:?}")))?;
            let check = spectral_identity_check(&parse_seq(&seq, n)?, &alpha, &f, n, grid)?;
            if csv {
                format!("N,lhs,rhs,gap\n{n},{:.17e},{:.17e},{:.3e}\n", check.lhs, check.rhs, check.gap)
            } else {
                pretty(&json!({ "seq": seq, "alpha": alpha.label(), "N": n, "degree": f.degree(), "gridSize": grid, "check": check }))
            }
        }
        Command::Correlate { set, folner, k, h, seq: Some(seq), navg, window } => {
            let _ = (folner, k, h);
            let navg = navg.expect("required by clap");
            let window = parse_window(&window.expect("required by clap"))?;
            let r = correlation_vs_product(&parse_seq(&seq, navg)?, &parse_set(&set)?, true, navg, window)?;
            if csv {
                format!(
                    "numer,denom,average,density,product,deviation\n{},{},{:.12},{:.12},{:.12},{:.12}\n",
                    r.numer, r.denom, r.average, r.density, r.product, r.deviation
                )
            } else {
                pretty(&json!({ "set": set, "seq": seq, "window": window, "report": r }))
            }
        }
        Command::Correlate { set, folner, k, h, seq: None, .. } => {
            let k = to_u32(k.expect("required by clap"), "K")?;
            let a = averaged_correlation(&parse_set(&set)?, &parse_folner(&folner)?, k, h.expect("required by clap"))?;
            if csv {
                a.to_csv()
            } else {
                let partial: Vec<String> = a.partial.iter().map(ToString::to_string).collect();
                pretty(&json!({
                    "set": set,
                    "window": a.window,
                    "partial": partial,
                    "final": a.last().to_string(),
                    "finalDecimal": ergolab::sets::decimal12(a.last()),
                    "reference": a.reference.to_string(),
                    "boundary": a.boundary.to_string(),
                    "minMargin": a.min_margin().to_string(),
                }))
            }
        }
        Command::Cylinder { set, exprs, folner, nmax, eps } => {
            let exprs: Vec<ShiftExpr> = exprs.split(';').map(parse_expr).collect::<Result<_, _>>()?;
            let table = correspondence_table(&parse_set(&set)?, &exprs, &parse_folner(&folner)?, nmax, eps)?;
            if csv {
                table.to_csv()
            } else {
                pretty(&json!(table))
            }
        }
        Command::Witness { set, hmax, scan } => {
            let found = complement_witness_search(&parse_set(&set)?, hmax, scan.params())?;
            if csv {
                let mut out = String::from("h,numer,denom,decimal,witnessLo,witnessHi\n");
                if let Some(w) = &found {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        w.h,
                        w.density.numer,
                        w.density.denom,
                        w.density.decimal(),
                        w.witness.lo,
                        w.witness.hi
                    ));
                }
                out
            } else {
                pretty(&json!({ "set": set, "witness": found }))
            }
        }
        Command::Classify { seq, sets, ks, scan } => {
            let ks = parse_counts(&ks, false)?;
            let sets = sets
                .split(';')
                .map(|s| Ok((s.trim().to_string(), parse_set(s)?)))
                .collect::<Result<Vec<_>, Fail>>()?;
            let c = sweeping_classifier(&parse_seq(&seq, max_of(&ks))?, &sets, &ks, scan.params())?;
            if csv {
                let mut out = String::from("set,K,shifts,numer,denom,decimal,curveVerdict\n");
                for s in &c.sets {
                    let verdict = serde_json::to_value(s.verdict)?;
                    for r in &s.curve.rows {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            s.name,
                            r.k,
                            r.distinct_shifts,
                            r.density.numer,
                            r.density.denom,
                            r.density.decimal(),
                            verdict.as_str().unwrap_or_default()
                        ));
                    }
                }
                out.push_str(&format!("\nverdict,{}\ncaveat,\"{}\"\n", c.verdict, c.caveat));
                out
            } else {
                pretty(&json!(c))
            }
        }
        Command::Selftest { seed } => {
            let report = ergolab::selftest::run(seed);
            let text = if csv {
                report.render()
            } else {
                let checks: Vec<_> = report
                    .results
                    .iter()
                    .map(|r| json!({ "name": r.name, "trials": r.trials, "failure": r.failure }))
                    .collect();
                pretty(&json!({ "seed": seed, "passed": report.passed(), "checks": checks }))
            };
            return Ok((text, report.passed()));
        }
    };
    Ok((text, true))
}

fn configure_threads() -> Result<(), Fail> {
    let Ok(value) = std::env::var("ERGOLAB_THREADS") else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Fail(format!("ERGOLAB_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(cli.command, cli.out.format));
    let (text, passed) = match result {
        Ok(v) => v,
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(2);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("ergolab").chain(args.iter().copied()))
    }

    #[test]
    fn scan_flags_accept_count_forms() {
        let cli = parse(&["cover", "--set", "hindman", "--seq", "id", "--ks", "1,16", "--L", "2^10", "--B", "65536"]).unwrap();
        let Command::Cover { scan, .. } = cli.command else { panic!("wrong subcommand") };
        assert_eq!(scan.params(), ScanParams::new(1024, 65536, None));
    }

    #[test]
    fn correlate_modes() {
        assert!(parse(&["correlate", "--set", "evens", "--k", "100", "--h", "10"]).is_ok());
        assert!(parse(&["correlate", "--set", "evens"]).is_err());
        assert!(parse(&["correlate", "--set", "evens", "--seq", "id"]).is_err());
        assert!(parse(&["correlate", "--set", "evens", "--seq", "id", "--navg", "10", "--window", "0,100"]).is_ok());
    }

    #[test]
    fn computation_errors_map_to_fail() {
        let cli = parse(&["density", "--set", "hindman", "--folner", "dyadic", "--nmax", "0"]).unwrap();
        assert!(run(cli.command, Format::Csv).is_err());
        let cli = parse(&["density", "--set", "hindman", "--expr", "(E |", "--nmax", "3"]).unwrap();
        let Err(Fail(msg)) = run(cli.command, Format::Csv) else { panic!("accepted a broken expression") };
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn density_csv_rows() {
        let cli = parse(&["density", "--set", "hindman", "--folner", "dyadic", "--nmax", "3"]).unwrap();
        let (text, ok) = run(cli.command, Format::Csv).unwrap();
        assert!(ok);
        assert_eq!(text, "N,numer,denom,decimal\n1,5,8,0.625000000000\n2,21,32,0.656250000000\n3,85,128,0.664062500000\n");
    }
}
