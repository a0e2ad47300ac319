//! Half-wave-plate realization of the coin schedules and a shot-noise
//! emulator for the photon-counting experiment.
//!
//! A half-wave plate at fast-axis angle `h` acts on polarization as the
//! real symmetric unitary `[[cos 2h, sin 2h], [sin 2h, -cos 2h]]`. Every
//! coin in the compiled schedules is of that form, so each maps to a
//! single plate angle; identity coins need no plate at all.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::model::{Ensemble, OutcomeLabel, Povm};
use crate::rng;
use crate::strategies::Strategy;
use crate::walk::{CoinSchedule, OutcomeMap};

/// Physical plate identifiers: H1 prepares the input state, H2/H5 are the
/// NOT plates, H3 the splitting coin, H4 the mixing coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaveplateId {
    H1,
    H2,
    H3,
    H4,
    H5,
}

impl fmt::Display for WaveplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One plate setting, angle in radians normalized to `(-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveplateSetting {
    pub element: WaveplateId,
    pub angle: f64,
}

fn normalize_angle(mut h: f64) -> f64 {
    while h > std::f64::consts::FRAC_PI_2 {
        h -= std::f64::consts::PI;
    }
    while h <= -std::f64::consts::FRAC_PI_2 {
        h += std::f64::consts::PI;
    }
    h
}

/// Jones matrix of a half-wave plate at fast-axis angle `h`:
/// `[[cos 2h, sin 2h], [sin 2h, -cos 2h]]`. Unitary, Hermitian,
/// determinant -1 for every `h`.
pub fn hwp_matrix(h: f64) -> Mat2 {
    let (s, c) = (2.0 * h).sin_cos();
    Mat2::from_real(c, s, s, -c)
}

/// H1 setting preparing `cos(t)|0> + sin(t)|1>` from `|0>`: half the
/// state angle, since `hwp(t/2) |0> = (cos t, sin t)`.
pub fn preparation_angle(theta_state: f64) -> Result<WaveplateSetting> {
    if !(-std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2).contains(&theta_state) {
        return Err(Error::Domain {
            name: "theta_state",
            value: theta_state,
            requirement: "-pi/2 <= theta <= pi/2",
        });
    }
    Ok(WaveplateSetting {
        element: WaveplateId::H1,
        angle: theta_state / 2.0,
    })
}

/// Plate angle realizing a real-symmetric determinant -1 coin, via
/// `h = atan2(C01, C00) / 2`.
fn plate_angle(m: &Mat2, layer: usize, position: i64) -> Result<f64> {
    let real_symmetric = m.e[0].im.abs() < 1e-12
        && m.e[1].im.abs() < 1e-12
        && m.e[2].im.abs() < 1e-12
        && m.e[3].im.abs() < 1e-12
        && (m.e[1].re - m.e[2].re).abs() < 1e-12
        && (m.e[0].re + m.e[3].re).abs() < 1e-12;
    if !real_symmetric || (m.det().re + 1.0).abs() > 1e-9 {
        return Err(Error::NeedsQwp { layer, position });
    }
    Ok(normalize_angle(0.5 * m.e[1].re.atan2(m.e[0].re)))
}

fn is_identity(m: &Mat2) -> bool {
    m.max_abs_diff(&Mat2::identity()) < 1e-12
}

/// Plate settings for a compiled two-step schedule. Identity coins are
/// "no plate" and are omitted; the remaining slots have fixed roles:
/// layer 1 holds H3 (x = 1) and H2 (x = -1), layer 2 holds H4 (x = 0),
/// layer 3 holds H5 (x = -1).
pub fn angles_for_schedule(schedule: &CoinSchedule) -> Result<Vec<WaveplateSetting>> {
    let roles: [(usize, i64, WaveplateId); 4] = [
        (1, -1, WaveplateId::H2),
        (1, 1, WaveplateId::H3),
        (2, 0, WaveplateId::H4),
        (3, -1, WaveplateId::H5),
    ];
    let mut settings = Vec::new();
    for (layer_idx, layer) in schedule.layers.iter().enumerate() {
        for (&x, m) in &layer.coins {
            if is_identity(m) {
                continue;
            }
            let element = roles
                .iter()
                .find(|(l, pos, _)| *l == layer_idx && *pos == x)
                .map(|(_, _, id)| *id)
                .ok_or(Error::Config {
                    field: "schedule",
                    message: format!("no plate slot for a coin at layer {layer_idx}, position {x}"),
                })?;
            settings.push(WaveplateSetting {
                element,
                angle: plate_angle(m, layer_idx, x)?,
            });
        }
    }
    Ok(settings)
}

/// Joint (prepared state, outcome) counts from one run of the emulator.
#[derive(Debug, Clone, Serialize)]
pub struct PhotonCountRecord {
    pub run_id: u32,
    pub seed: u64,
    pub total: u64,
    /// `counts[i][k]`: photons prepared in state `i` that fired outcome `k`.
    pub counts: Vec<Vec<u64>>,
}

impl PhotonCountRecord {
    /// Marginal counts per outcome.
    pub fn outcome_totals(&self) -> Vec<u64> {
        let n = self.counts.first().map_or(0, Vec::len);
        (0..n)
            .map(|k| self.counts.iter().map(|row| row[k]).sum())
            .collect()
    }
}

/// Emulates `runs` repetitions of an `photons_per_run`-photon counting
/// experiment. Each photon independently samples a prepared state from
/// the priors and then an outcome from the Born probabilities
/// `<psi_i| Pi_k |psi_i>`.
///
/// Sampling is keyed by `(seed, run, photon)` through the counter
/// generator, so results are bit-reproducible and independent of
/// execution order. The outcome map, when provided, is only checked for
/// consistency with the measurement's effective outcomes; probabilities
/// always come from the measurement itself.
pub fn simulate_counts(
    ensemble: &Ensemble,
    povm: &Povm,
    outcome_map: Option<&OutcomeMap>,
    photons_per_run: u64,
    runs: u32,
    seed: u64,
) -> Result<Vec<PhotonCountRecord>> {
    if photons_per_run == 0 {
        return Err(Error::Config {
            field: "photons",
            message: "need at least one photon per run".into(),
        });
    }
    if runs == 0 {
        return Err(Error::Config {
            field: "runs",
            message: "need at least one run".into(),
        });
    }
    let diagnostics = povm.validate();
    if !diagnostics.pass() {
        return Err(Error::InvalidPovm(diagnostics));
    }
    if let Some(map) = outcome_map {
        let effective = povm.elements.iter().filter(|m| m.max_abs() > 1e-12).count();
        if map.position_to_outcome.len() != effective {
            return Err(Error::Config {
                field: "outcome_map",
                message: format!(
                    "map covers {} positions but the measurement has {} effective outcomes",
                    map.position_to_outcome.len(),
                    effective
                ),
            });
        }
    }

    // Born probability table q[i][k], clamped onto the simplex.
    let born: Vec<Vec<f64>> = ensemble
        .states()
        .iter()
        .map(|psi| {
            povm.elements
                .iter()
                .map(|m| psi.expectation(m).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let priors = ensemble.priors();

    let mut records = Vec::with_capacity(runs as usize);
    for run in 0..runs {
        let key = rng::mix(&[seed, run as u64]);
        let mut counts = vec![vec![0u64; povm.len()]; 3];
        for photon in 0..photons_per_run {
            let u_state = rng::unit(key, 2 * photon);
            let u_outcome = rng::unit(key, 2 * photon + 1);
            let i = sample_index(priors, u_state);
            let k = sample_index(&born[i], u_outcome);
            counts[i][k] += 1;
        }
        records.push(PhotonCountRecord {
            run_id: run,
            seed,
            total: photons_per_run,
            counts,
        });
    }
    Ok(records)
}

/// Inverse-CDF draw; any residual probability mass lands on the last
/// nonzero-weight bucket.
fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_nonzero = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}

/// Mean and spread of a per-run figure of merit.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentEstimate {
    pub mean: f64,
    /// Sample standard deviation over runs (0 for a single run).
    pub std: f64,
    /// Number of runs that entered the estimate.
    pub runs: usize,
    pub per_run_values: Vec<f64>,
    /// MCD runs dropped because the conclusive outcome never fired.
    pub excluded_runs: usize,
}

/// Per-run figure of merit from count records:
///
/// * MED: success fraction `sum_i count(i, guess-i) / total`;
/// * MCD: plug-in confidence `count(state 0, guess-0) / count(guess-0)`,
///   with empty-denominator runs excluded and reported.
pub fn estimate_figure_of_merit(
    records: &[PhotonCountRecord],
    strategy: Strategy,
    labels: &[OutcomeLabel],
) -> Result<ExperimentEstimate> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let guess_outcome = |state: usize| labels.iter().position(|l| *l == OutcomeLabel::Guess(state));
    let mut per_run_values = Vec::with_capacity(records.len());
    let mut excluded_runs = 0usize;
    for record in records {
        match strategy {
            Strategy::Med => {
                let mut hits = 0u64;
                for state in 0..3 {
                    if let Some(k) = guess_outcome(state) {
                        hits += record.counts[state][k];
                    }
                }
                per_run_values.push(hits as f64 / record.total as f64);
            }
            Strategy::Mcd => {
                let k = guess_outcome(0).ok_or(Error::Config {
                    field: "labels",
                    message: "no guess-0 outcome to condition on".into(),
                })?;
                let fired: u64 = record.counts.iter().map(|row| row[k]).sum();
                if fired == 0 {
                    excluded_runs += 1;
                    continue;
                }
                per_run_values.push(record.counts[0][k] as f64 / fired as f64);
            }
        }
    }
    if per_run_values.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let n = per_run_values.len() as f64;
    let mean = per_run_values.iter().sum::<f64>() / n;
    let std = if per_run_values.len() > 1 {
        (per_run_values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };
    Ok(ExperimentEstimate {
        mean,
        std,
        runs: per_run_values.len(),
        per_run_values,
        excluded_runs,
    })
}

/// Serializes records as JSON lines, one aggregated row per
/// (run, prepared state, outcome):
/// `{"run":..,"seed":..,"n":..,"true_state":..,"outcome":..,"count":..}`.
pub fn write_count_records_jsonl<W: std::io::Write>(
    records: &[PhotonCountRecord],
    mut w: W,
) -> std::io::Result<()> {
    for record in records {
        for (i, row) in record.counts.iter().enumerate() {
            for (k, &count) in row.iter().enumerate() {
                writeln!(
                    w,
                    "{{\"run\":{},\"seed\":{},\"n\":{},\"true_state\":{},\"outcome\":{},\"count\":{}}}",
                    record.run_id, record.seed, record.total, i, k, count
                )?;
            }
        }
    }
    Ok(())
}
