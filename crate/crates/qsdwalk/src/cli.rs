//! The `qsdwalk` command line: bounds at a point, parameter sweeps,
//! schedule dumps, the counting emulator, equality loci, and figure data.
//!
//! Angles accept plain radians (`0.7854`), rationals of pi (`pi/4`,
//! `0.25pi`, `5pi/12`), or degrees (`45deg`). Exit codes: 0 success,
//! 1 runtime error, 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::Ensemble;
use crate::optics::{
    angles_for_schedule, estimate_figure_of_merit, preparation_angle, simulate_counts,
    write_count_records_jsonl,
};
use crate::scan::{
    equality_locus, figure_data, printed_mcd_locus, rows_to_json, scan, write_rows_csv, Figure,
    GridSpec, OutputFormat, ScanConfig,
};
use crate::strategies::{
    bounds_report, mcd_confidence_quantum, mcd_povm, med_povm, med_success_quantum, mu_value,
    MuConvention, Strategy,
};
use crate::walk::{derive_outcome_map, schedule_json, schedule_mcd, schedule_med, CoinSchedule};

/// Parses an angle expression: radians, `a pi / b` forms, or degrees.
pub fn parse_angle(input: &str) -> Result<f64> {
    let compact: String = input
        .trim()
        .to_ascii_lowercase()
        .chars()
        .filter(|c| *c != ' ' && *c != '*')
        .collect();
    let fail = || Error::AngleParse(input.to_string());
    if let Some(deg) = compact.strip_suffix("deg") {
        return deg.parse::<f64>().map(f64::to_radians).map_err(|_| fail());
    }
    if let Some(at) = compact.find("pi") {
        let (front, back) = compact.split_at(at);
        let numerator = match front {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| fail())?,
        };
        let denominator = match &back[2..] {
            "" => 1.0,
            rest => rest
                .strip_prefix('/')
                .ok_or_else(fail)?
                .parse::<f64>()
                .map_err(|_| fail())?,
        };
        if denominator == 0.0 {
            return Err(fail());
        }
        return Ok(numerator * std::f64::consts::PI / denominator);
    }
    compact.parse::<f64>().map_err(|_| fail())
}

fn angle_arg(s: &str) -> std::result::Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn strategy_arg(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn convention_arg(s: &str) -> std::result::Result<MuConvention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn format_arg(s: &str) -> std::result::Result<OutputFormat, String> {
    match s.to_ascii_lowercase().as_str() {
        "csv" => Ok(OutputFormat::Csv),
        "json" => Ok(OutputFormat::Json),
        _ => Err(format!("'{s}' is not one of: csv, json")),
    }
}

fn figure_arg(s: &str) -> std::result::Result<Figure, String> {
    Figure::parse(s).map_err(|e| e.to_string())
}

/// Default output directory: `$QSDWALK_OUT` if set, else the working
/// directory.
fn default_out_dir() -> PathBuf {
    std::env::var_os("QSDWALK_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Parser)]
#[command(
    name = "qsdwalk",
    version,
    about = "Mirror-symmetric qubit-trine discrimination: optimal measurements, \
             noncontextual bounds, walk compilation, and shot-noise emulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum value vs noncontextual bound at one (p, theta) point
    Bounds(BoundsArgs),
    /// Sweep a (p, theta) grid and emit CSV or JSON rows
    Scan(ScanArgs),
    /// Dump the compiled coin schedule with waveplate settings
    Walk(WalkArgs),
    /// Emulate repeated photon-counting runs at one point
    Experiment(ExperimentArgs),
    /// Solve gap(p) = 0 at fixed theta by bisection
    Locus(LocusArgs),
    /// Write the data files behind one of the standard figures
    Figure(FigureArgs),
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_parser = strategy_arg)]
    strategy: Strategy,
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = angle_arg)]
    theta: f64,
}

#[derive(Args)]
struct GridArgs {
    /// Prior weight bound; pass twice for a range (min then max)
    #[arg(long = "p", value_name = "P", num_args = 1, action = clap::ArgAction::Append)]
    p: Vec<f64>,
    /// State angle bound; pass twice for a range (min then max)
    #[arg(long = "theta", value_name = "ANGLE", value_parser = angle_arg,
          num_args = 1, action = clap::ArgAction::Append)]
    theta: Vec<f64>,
    /// Number of p grid points
    #[arg(long, default_value_t = 50)]
    p_count: usize,
    /// Number of theta grid points
    #[arg(long, default_value_t = 50)]
    theta_count: usize,
}

impl GridArgs {
    fn p_grid(&self) -> std::result::Result<GridSpec, Error> {
        grid_from("p", &self.p, self.p_count, 0.01, 0.5)
    }

    fn theta_grid(&self) -> std::result::Result<GridSpec, Error> {
        grid_from(
            "theta",
            &self.theta,
            self.theta_count,
            0.01,
            std::f64::consts::FRAC_PI_2 - 0.01,
        )
    }
}

fn grid_from(
    field: &'static str,
    values: &[f64],
    count: usize,
    default_min: f64,
    default_max: f64,
) -> Result<GridSpec> {
    match values {
        [] => Ok(GridSpec::new(default_min, default_max, count)),
        [v] => Ok(GridSpec::new(*v, *v, count.max(2))),
        [lo, hi] => Ok(GridSpec::new(*lo, *hi, count)),
        _ => Err(Error::Config {
            field,
            message: format!(
                "expected at most two --{field} values, got {}",
                values.len()
            ),
        }),
    }
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_parser = strategy_arg)]
    strategy: Strategy,
    #[command(flatten)]
    grid: GridArgs,
    /// Photons per Monte Carlo run; 0 disables the Monte Carlo columns
    #[arg(long, default_value_t = 0)]
    photons: u64,
    /// Monte Carlo runs per grid point
    #[arg(long, default_value_t = 30)]
    runs: u32,
    /// Seed for all randomized columns
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coin-parameter convention used by schedule-related output
    #[arg(long, value_parser = convention_arg, default_value = "derived")]
    convention: MuConvention,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = format_arg, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, value_parser = strategy_arg)]
    strategy: Strategy,
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = angle_arg)]
    theta: f64,
    #[arg(long, value_parser = convention_arg, default_value = "derived")]
    convention: MuConvention,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = strategy_arg)]
    strategy: Strategy,
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = angle_arg)]
    theta: f64,
    /// Photons per run
    #[arg(long, default_value_t = 100_000)]
    photons: u64,
    #[arg(long, default_value_t = 30)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write per-run joint counts as JSON lines to this file
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct LocusArgs {
    #[arg(long, value_parser = strategy_arg)]
    strategy: Strategy,
    #[arg(long, value_parser = angle_arg)]
    theta: f64,
    /// Bisection bracket (lo hi)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"],
          default_values_t = vec![0.01, 0.5])]
    bracket: Vec<f64>,
}

#[derive(Args)]
struct FigureArgs {
    /// Which figure: fig3a, fig3b, fig4a, fig4b
    #[arg(value_parser = figure_arg)]
    which: Figure,
    #[command(flatten)]
    grid: GridArgs,
    /// Photons per Monte Carlo point (line figures only); 0 disables
    #[arg(long, default_value_t = 100_000)]
    photons: u64,
    #[arg(long, default_value_t = 30)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to $QSDWALK_OUT or the working directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn write_or_stdout(path: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Bounds(args) => {
            let report = bounds_report(args.p, args.theta, args.strategy)?;
            let doc = json!({
                "strategy": report.strategy,
                "p": report.p,
                "theta": report.theta,
                "quantum": report.quantum_value,
                "noncontextual": report.noncontextual_value,
                "gap": report.gap,
                "advantage": report.advantage,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
            Ok(())
        }
        Command::Scan(args) => {
            let config = ScanConfig {
                strategy: args.strategy,
                p_grid: args.grid.p_grid()?,
                theta_grid: args.grid.theta_grid()?,
                mu_convention: args.convention,
                photons: args.photons,
                runs: args.runs,
                seed: args.seed,
                output_path: args.out.clone(),
                format: args.format,
            };
            let rows = scan(&config)?;
            let mut bytes = Vec::new();
            match config.format {
                OutputFormat::Csv => {
                    write_rows_csv(&rows, &config, &mut bytes).map_err(|source| Error::Io {
                        path: PathBuf::from("<buffer>"),
                        source,
                    })?
                }
                OutputFormat::Json => {
                    bytes = serde_json::to_vec_pretty(&rows_to_json(&rows, &config))
                        .expect("serializable");
                    bytes.push(b'\n');
                }
            }
            write_or_stdout(config.output_path.as_ref(), &bytes)
        }
        Command::Walk(args) => {
            let doc = walk_dump(args.strategy, args.p, args.theta, args.convention)?;
            let mut bytes = serde_json::to_vec_pretty(&doc).expect("serializable");
            bytes.push(b'\n');
            write_or_stdout(args.out.as_ref(), &bytes)
        }
        Command::Experiment(args) => {
            let ensemble = Ensemble::mirror(args.p, args.theta)?;
            let (povm, analytic) = match args.strategy {
                Strategy::Med => (
                    med_povm(args.p, args.theta)?.povm,
                    med_success_quantum(args.p, args.theta)?,
                ),
                Strategy::Mcd => (
                    mcd_povm(args.p, args.theta)?.povm,
                    mcd_confidence_quantum(args.p, args.theta)?,
                ),
            };
            let records =
                simulate_counts(&ensemble, &povm, None, args.photons, args.runs, args.seed)?;
            if let Some(path) = &args.records {
                let file = std::fs::File::create(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                write_count_records_jsonl(&records, std::io::BufWriter::new(file)).map_err(
                    |source| Error::Io {
                        path: path.clone(),
                        source,
                    },
                )?;
            }
            let estimate = estimate_figure_of_merit(&records, args.strategy, &povm.labels)?;
            let doc = json!({
                "strategy": args.strategy,
                "p": args.p,
                "theta": args.theta,
                "photons": args.photons,
                "runs": args.runs,
                "seed": args.seed,
                "analytic": analytic,
                "mc_mean": estimate.mean,
                "mc_std": estimate.std,
                "included_runs": estimate.runs,
                "excluded_runs": estimate.excluded_runs,
                "records": args.records,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
            Ok(())
        }
        Command::Locus(args) => {
            let bracket = (args.bracket[0], args.bracket[1]);
            let root = equality_locus(args.strategy, args.theta, bracket)?;
            let gap_at_root = root
                .map(|p| bounds_report(p, args.theta, args.strategy).map(|r| r.gap))
                .transpose()?;
            let printed = match args.strategy {
                Strategy::Mcd => {
                    let p = printed_mcd_locus(args.theta);
                    Some(json!({
                        "p": p,
                        "in_range": p > 0.0 && p <= 0.5,
                    }))
                }
                Strategy::Med => None,
            };
            let doc = json!({
                "strategy": args.strategy,
                "theta": args.theta,
                "bracket": args.bracket,
                "root": root,
                "gap_at_root": gap_at_root,
                "printed_curve": printed,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
            Ok(())
        }
        Command::Figure(args) => {
            let config = ScanConfig {
                strategy: args.which.strategy(),
                p_grid: args.grid.p_grid()?,
                theta_grid: args.grid.theta_grid()?,
                mu_convention: MuConvention::Derived,
                photons: args.photons,
                runs: args.runs,
                seed: args.seed,
                output_path: None,
                format: OutputFormat::Csv,
            };
            let out_dir = args.out_dir.unwrap_or_else(default_out_dir);
            std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
                path: out_dir.clone(),
                source,
            })?;
            let files = figure_data(args.which, &config, &out_dir)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

/// Assembles the `walk` subcommand document: schedule, plate settings,
/// outcome map, and per-state outcome probabilities.
fn walk_dump(
    strategy: Strategy,
    p: f64,
    theta: f64,
    convention: MuConvention,
) -> Result<serde_json::Value> {
    let (schedule, povm, coin_parameter): (CoinSchedule, _, f64) = match strategy {
        Strategy::Med => {
            let schedule = schedule_med(p, theta, convention)?;
            // The schedule realizes the measurement family at the coin
            // parameter of the chosen convention.
            let mu = mu_value(p, theta, convention).clamp(0.0, 1.0);
            let solution = med_povm(p, theta)?;
            let povm = if solution.branch == crate::strategies::MedBranch::Projective {
                solution.povm
            } else {
                crate::strategies::med_family_povm(mu)
            };
            (schedule, povm, mu)
        }
        Strategy::Mcd => {
            let schedule = schedule_mcd(p, theta)?;
            let solution = mcd_povm(p, theta)?;
            let nu = solution.nu;
            (schedule, solution.povm, nu)
        }
    };
    let map = derive_outcome_map(&schedule, &povm)?;
    let plates = angles_for_schedule(&schedule)?;
    let ensemble = Ensemble::mirror(p, theta)?;

    let preparation: Vec<_> = [theta, -theta, 0.0]
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let setting = preparation_angle(t)?;
            Ok(json!({
                "state": i,
                "element": "H1",
                "angle": setting.angle,
                "angle_over_pi": setting.angle / std::f64::consts::PI,
            }))
        })
        .collect::<Result<_>>()?;
    let waveplates: Vec<_> = plates
        .iter()
        .map(|s| {
            json!({
                "element": s.element,
                "angle": s.angle,
                "angle_over_pi": s.angle / std::f64::consts::PI,
            })
        })
        .collect();
    let outcome_map: Vec<_> = map
        .position_to_outcome
        .iter()
        .map(|(&x, &k)| {
            json!({
                "position": x,
                "outcome": k,
                "label": povm.labels[k].to_string(),
            })
        })
        .collect();
    let probabilities: Vec<_> = ensemble
        .states()
        .iter()
        .enumerate()
        .map(|(i, psi)| {
            let q = povm.probabilities(&psi.density())?;
            Ok(json!({ "state": i, "outcome_probabilities": q }))
        })
        .collect::<Result<_>>()?;

    let mut doc = schedule_json(&schedule);
    let obj = doc.as_object_mut().expect("schedule json is an object");
    obj.insert("strategy".into(), json!(strategy));
    obj.insert("p".into(), json!(p));
    obj.insert("theta".into(), json!(theta));
    obj.insert("convention".into(), json!(convention));
    obj.insert("coin_parameter".into(), json!(coin_parameter));
    obj.insert("preparation".into(), json!(preparation));
    obj.insert("waveplates".into(), json!(waveplates));
    obj.insert("outcome_map".into(), json!(outcome_map));
    obj.insert("born_probabilities".into(), json!(probabilities));
    Ok(doc)
}
