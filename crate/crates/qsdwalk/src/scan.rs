//! Parameter-space sweeps, equality-locus solving, and figure data files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::Ensemble;
use crate::optics::{estimate_figure_of_merit, simulate_counts};
use crate::rng;
use crate::strategies::{bounds_report, mcd_povm, med_povm, MuConvention, Strategy};

/// Inclusive linear grid `min..=max` with `count` points.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, count: usize) -> Self {
        GridSpec { min, max, count }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count <= 1 || self.max == self.min {
            return vec![self.min; self.count];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == self.count - 1 {
                    // Land on the endpoint exactly; accumulation can
                    // overshoot the domain boundary otherwise.
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Everything a sweep needs. Grids must sit inside `(0, 1/2] x (0, pi/2)`;
/// `photons = 0` disables the Monte Carlo columns.
#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub strategy: Strategy,
    pub p_grid: GridSpec,
    pub theta_grid: GridSpec,
    pub mu_convention: MuConvention,
    pub photons: u64,
    pub runs: u32,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        let check_grid = |field: &'static str, g: &GridSpec, lo: f64, hi: f64, hi_closed: bool| {
            let hi_ok = if hi_closed { g.max <= hi } else { g.max < hi };
            if !(g.min > lo && hi_ok && g.min <= g.max) {
                return Err(Error::Config {
                    field,
                    message: format!(
                        "[{}, {}] must sit inside ({lo}, {hi}{}",
                        g.min,
                        g.max,
                        if hi_closed { "]" } else { ")" }
                    ),
                });
            }
            if g.count < 2 {
                return Err(Error::Config {
                    field,
                    message: format!("count {} < 2", g.count),
                });
            }
            Ok(())
        };
        check_grid("p_grid", &self.p_grid, 0.0, 0.5, true)?;
        check_grid(
            "theta_grid",
            &self.theta_grid,
            0.0,
            std::f64::consts::FRAC_PI_2,
            false,
        )?;
        if self.photons > 0 && self.runs == 0 {
            return Err(Error::Config {
                field: "runs",
                message: "need at least one run when photons > 0".into(),
            });
        }
        Ok(())
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub p: f64,
    pub theta: f64,
    pub quantum: f64,
    pub noncontextual: f64,
    pub gap: f64,
    pub advantage: bool,
    pub mc_mean: Option<f64>,
    pub mc_std: Option<f64>,
}

/// Evaluates the sweep in deterministic grid order (theta outer, p inner).
/// Monte Carlo columns are keyed by `(seed, row index)`, so any execution
/// order gives identical results.
pub fn scan(config: &ScanConfig) -> Result<Vec<RegionRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.p_grid.count * config.theta_grid.count);
    for theta in config.theta_grid.points() {
        for p in config.p_grid.points() {
            let index = rows.len() as u64;
            let report = bounds_report(p, theta, config.strategy)?;
            let (mc_mean, mc_std) = if config.photons > 0 {
                let ensemble = Ensemble::mirror(p, theta)?;
                let povm = match config.strategy {
                    Strategy::Med => med_povm(p, theta)?.povm,
                    Strategy::Mcd => mcd_povm(p, theta)?.povm,
                };
                let records = simulate_counts(
                    &ensemble,
                    &povm,
                    None,
                    config.photons,
                    config.runs,
                    rng::mix(&[config.seed, index]),
                )?;
                let estimate = estimate_figure_of_merit(&records, config.strategy, &povm.labels)?;
                (Some(estimate.mean), Some(estimate.std))
            } else {
                (None, None)
            };
            rows.push(RegionRow {
                p,
                theta,
                quantum: report.quantum_value,
                noncontextual: report.noncontextual_value,
                gap: report.gap,
                advantage: report.advantage,
                mc_mean,
                mc_std,
            });
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Fixed-schema CSV:
/// `p,theta,quantum,noncontextual,gap,advantage,mc_mean,mc_std,n_photons,runs,seed`.
/// Missing Monte Carlo fields are emitted empty.
pub fn write_rows_csv<W: Write>(
    rows: &[RegionRow],
    config: &ScanConfig,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "p,theta,quantum,noncontextual,gap,advantage,mc_mean,mc_std,n_photons,runs,seed"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.p,
            r.theta,
            r.quantum,
            r.noncontextual,
            r.gap,
            r.advantage,
            opt(r.mc_mean),
            opt(r.mc_std),
            config.photons,
            config.runs,
            config.seed
        )?;
    }
    Ok(())
}

/// JSON document with the config echoed back and one object per row.
pub fn rows_to_json(rows: &[RegionRow], config: &ScanConfig) -> Value {
    json!({
        "config": config,
        "rows": rows,
    })
}

/// Root of `gap(p)` on the bracket by bisection, to `|gap| < 1e-10`.
/// Endpoints already on the locus count as roots; otherwise `None` when
/// the gap does not change sign (the touching loci of MCD are invisible
/// to bisection by construction).
pub fn equality_locus(
    strategy: Strategy,
    theta: f64,
    p_bracket: (f64, f64),
) -> Result<Option<f64>> {
    const TOL: f64 = 1e-10;
    let (mut lo, mut hi) = p_bracket;
    if !(lo > 0.0 && hi <= 0.5 && lo < hi) {
        return Err(Error::Domain {
            name: "p_bracket",
            value: lo,
            requirement: "0 < lo < hi <= 1/2",
        });
    }
    let gap = |p: f64| bounds_report(p, theta, strategy).map(|r| r.gap);
    let mut g_lo = gap(lo)?;
    let g_hi = gap(hi)?;
    if g_lo.abs() < TOL {
        return Ok(Some(lo));
    }
    if g_hi.abs() < TOL {
        return Ok(Some(hi));
    }
    if g_lo.signum() == g_hi.signum() {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g_mid = gap(mid)?;
        if g_mid.abs() < TOL {
            return Ok(Some(mid));
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// The closed-form MCD equality-locus curve as printed in circulation:
/// `p = (csc^2 theta - 2 cos 2 theta) / (2 (3 + 4 cos 4 theta))`.
/// Reported for side-by-side comparison only; spot checks put it outside
/// `(0, 1/2)` where the numerically solved locus is in range, so the
/// bisection result is authoritative.
pub fn printed_mcd_locus(theta: f64) -> f64 {
    let csc2 = 1.0 / theta.sin().powi(2);
    (csc2 - 2.0 * (2.0 * theta).cos()) / (2.0 * (3.0 + 4.0 * (4.0 * theta).cos()))
}

/// Figure data products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// MED slices vs p at theta in {pi/12, pi/4, 5pi/12}.
    Fig3a,
    /// MED gap surface over (p, theta).
    Fig3b,
    /// MCD slices vs p at theta in {pi/6, pi/4, pi/3}.
    Fig4a,
    /// MCD gap surface over (p, theta).
    Fig4b,
}

impl Figure {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fig3a" => Ok(Figure::Fig3a),
            "fig3b" => Ok(Figure::Fig3b),
            "fig4a" => Ok(Figure::Fig4a),
            "fig4b" => Ok(Figure::Fig4b),
            _ => Err(Error::Config {
                field: "figure",
                message: format!("'{s}' is not one of: fig3a, fig3b, fig4a, fig4b"),
            }),
        }
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            Figure::Fig3a | Figure::Fig3b => Strategy::Med,
            Figure::Fig4a | Figure::Fig4b => Strategy::Mcd,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig4a => "fig4a",
            Figure::Fig4b => "fig4b",
        }
    }

    /// Fixed theta slices of the line-plot figures.
    pub fn theta_slices(&self) -> Option<[f64; 3]> {
        use std::f64::consts::PI;
        match self {
            Figure::Fig3a => Some([PI / 12.0, PI / 4.0, 5.0 * PI / 12.0]),
            Figure::Fig4a => Some([PI / 6.0, PI / 4.0, PI / 3.0]),
            _ => None,
        }
    }
}

/// Monte Carlo sampling points of the line-plot figures.
const FIGURE_POINT_PS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

/// Writes the data files behind one figure into `out_dir` and returns the
/// paths. Line figures produce `<name>_curves.csv` plus, when
/// `config.photons > 0`, `<name>_points.csv` with Monte Carlo error bars;
/// surface figures produce `<name>_surface.csv` with the scan schema.
pub fn figure_data(figure: Figure, config: &ScanConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let strategy = figure.strategy();
    let mut written = Vec::new();
    match figure.theta_slices() {
        Some(slices) => {
            let curves_path = out_dir.join(format!("{}_curves.csv", figure.name()));
            let mut w = create(&curves_path)?;
            writeln!(w, "theta,p,quantum,noncontextual,gap,advantage").map_err(|source| {
                Error::Io {
                    path: curves_path.clone(),
                    source,
                }
            })?;
            for &theta in &slices {
                for p in config.p_grid.points() {
                    let r = bounds_report(p, theta, strategy)?;
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        theta, p, r.quantum_value, r.noncontextual_value, r.gap, r.advantage
                    )
                    .map_err(|source| Error::Io {
                        path: curves_path.clone(),
                        source,
                    })?;
                }
            }
            written.push(curves_path);

            if config.photons > 0 {
                let points_path = out_dir.join(format!("{}_points.csv", figure.name()));
                let mut w = create(&points_path)?;
                writeln!(w, "theta,p,mc_mean,mc_std,n_photons,runs,seed").map_err(|source| {
                    Error::Io {
                        path: points_path.clone(),
                        source,
                    }
                })?;
                let mut index = 0u64;
                for &theta in &slices {
                    for &p in &FIGURE_POINT_PS {
                        let ensemble = Ensemble::mirror(p, theta)?;
                        let povm = match strategy {
                            Strategy::Med => med_povm(p, theta)?.povm,
                            Strategy::Mcd => mcd_povm(p, theta)?.povm,
                        };
                        let records = simulate_counts(
                            &ensemble,
                            &povm,
                            None,
                            config.photons,
                            config.runs,
                            rng::mix(&[config.seed, index]),
                        )?;
                        let estimate = estimate_figure_of_merit(&records, strategy, &povm.labels)?;
                        writeln!(
                            w,
                            "{},{},{},{},{},{},{}",
                            theta,
                            p,
                            estimate.mean,
                            estimate.std,
                            config.photons,
                            config.runs,
                            config.seed
                        )
                        .map_err(|source| Error::Io {
                            path: points_path.clone(),
                            source,
                        })?;
                        index += 1;
                    }
                }
                written.push(points_path);
            }
        }
        None => {
            let surface_path = out_dir.join(format!("{}_surface.csv", figure.name()));
            let surface_config = ScanConfig {
                strategy,
                photons: 0,
                ..config.clone()
            };
            let rows = scan(&surface_config)?;
            let mut w = create(&surface_path)?;
            write_rows_csv(&rows, &surface_config, &mut w).map_err(|source| Error::Io {
                path: surface_path.clone(),
                source,
            })?;
            written.push(surface_path);
        }
    }
    Ok(written)
}
