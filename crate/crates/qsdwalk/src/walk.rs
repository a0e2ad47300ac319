//! Discrete-time quantum walk engine and measurement compilation.
//!
//! A walker moves on the integer line carrying a qubit coin. Each layer
//! applies a position-dependent coin unitary and then the conditional
//! shift `T` (coin `|0>` moves right, coin `|1>` moves left). Measuring
//! the final position realizes a POVM on the initial coin state; the
//! schedules built here realize the optimal MED/MCD measurements of the
//! mirror-symmetric ensemble.
//!
//! Which final position carries which outcome is never hard-coded: it is
//! recovered by probing the compiled walk and matching statistics against
//! the target measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64};
use crate::model::{check_parameters, Povm, PureState, ALGEBRAIC_TOL};
use crate::rng;
use crate::strategies::{mcd_nu, med_threshold, mu_value, MuConvention};

/// One coin layer: sparse position -> unitary map plus a default applied
/// everywhere else.
#[derive(Debug, Clone)]
pub struct CoinLayer {
    pub coins: BTreeMap<i64, Mat2>,
    pub default: Mat2,
}

impl CoinLayer {
    pub fn uniform(default: Mat2) -> Self {
        CoinLayer {
            coins: BTreeMap::new(),
            default,
        }
    }

    pub fn with(mut self, position: i64, coin: Mat2) -> Self {
        self.coins.insert(position, coin);
        self
    }

    fn coin_at(&self, position: i64) -> &Mat2 {
        self.coins.get(&position).unwrap_or(&self.default)
    }

    /// Largest unitarity defect across the mapped coins and the default,
    /// with the offending position (`None` for the default).
    fn worst_defect(&self) -> (Option<i64>, f64) {
        let mut worst = (None, self.default.unitarity_defect());
        for (&x, m) in &self.coins {
            let d = m.unitarity_defect();
            if d > worst.1 {
                worst = (Some(x), d);
            }
        }
        worst
    }
}

/// An ordered list of coin layers; a conditional shift follows each one.
#[derive(Debug, Clone)]
pub struct CoinSchedule {
    pub layers: Vec<CoinLayer>,
}

impl CoinSchedule {
    /// Every matrix must be unitary within [`ALGEBRAIC_TOL`].
    pub fn validate(&self) -> Result<()> {
        for (i, layer) in self.layers.iter().enumerate() {
            let (position, defect) = layer.worst_defect();
            if defect > ALGEBRAIC_TOL {
                return Err(Error::NonUnitaryCoin {
                    layer: i,
                    position: position.unwrap_or(0),
                    defect,
                });
            }
        }
        Ok(())
    }
}

/// Joint walker/coin amplitudes, stored sparsely over occupied sites.
#[derive(Debug, Clone)]
pub struct WalkState {
    amplitudes: BTreeMap<i64, [C64; 2]>,
}

impl WalkState {
    /// All amplitude at position 0 with the given coin state.
    pub fn at_origin(coin: &PureState) -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(0, [coin.a0, coin.a1]);
        WalkState { amplitudes }
    }

    pub fn amplitudes(&self) -> &BTreeMap<i64, [C64; 2]> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .values()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }

    /// `P(x) = |alpha_x|^2 + |beta_x|^2` over occupied sites.
    pub fn position_distribution(&self) -> BTreeMap<i64, f64> {
        self.amplitudes
            .iter()
            .map(|(&x, a)| (x, a[0].norm_sqr() + a[1].norm_sqr()))
            .collect()
    }
}

/// Conditional shift: coin `|0>` to `x + 1`, coin `|1>` to `x - 1`.
pub fn apply_shift(state: &WalkState) -> WalkState {
    let mut out: BTreeMap<i64, [C64; 2]> = BTreeMap::new();
    let zero = C64::new(0.0, 0.0);
    for (&x, a) in &state.amplitudes {
        if a[0] != zero {
            out.entry(x + 1).or_insert([zero, zero])[0] += a[0];
        }
        if a[1] != zero {
            out.entry(x - 1).or_insert([zero, zero])[1] += a[1];
        }
    }
    WalkState { amplitudes: out }
}

/// Applies one coin layer (position-dependent unitaries, default
/// elsewhere). Rejects non-unitary layers.
pub fn apply_coin_layer(state: &WalkState, layer: &CoinLayer) -> Result<WalkState> {
    let (position, defect) = layer.worst_defect();
    if defect > ALGEBRAIC_TOL {
        return Err(Error::NonUnitaryCoin {
            layer: 0,
            position: position.unwrap_or(0),
            defect,
        });
    }
    let amplitudes = state
        .amplitudes
        .iter()
        .map(|(&x, a)| (x, layer.coin_at(x).apply(*a)))
        .collect();
    Ok(WalkState { amplitudes })
}

/// Runs the walk from position 0: alternate coin layer and shift for
/// every layer in the schedule. Returns the final position distribution
/// and state.
pub fn run_walk(
    coin: &PureState,
    schedule: &CoinSchedule,
) -> Result<(BTreeMap<i64, f64>, WalkState)> {
    schedule.validate()?;
    let mut state = WalkState::at_origin(coin);
    for layer in &schedule.layers {
        // Already validated; apply without re-checking each layer.
        let amplitudes = state
            .amplitudes
            .iter()
            .map(|(&x, a)| (x, layer.coin_at(x).apply(*a)))
            .collect();
        state = apply_shift(&WalkState { amplitudes });
    }
    Ok((state.position_distribution(), state))
}

/// Real symmetric reflection `[[sqrt(1 - m^2), m], [m, -sqrt(1 - m^2)]]`;
/// the coin that splits off an `sqrt(1 - m^2)` branch. `m = 1` gives NOT.
pub fn reflection_coin(m: f64) -> Mat2 {
    let c = (1.0 - m * m).max(0.0).sqrt();
    Mat2::from_real(c, m, m, -c)
}

/// The four-layer walk template shared by both strategies:
/// identity, then the splitting coin at `x = 1` with NOT at `x = -1`,
/// then the mixing coin at the origin, then identity at `x = 1` with NOT
/// at `x = -1`.
fn two_step_schedule(splitting_coin: Mat2) -> CoinSchedule {
    let identity = Mat2::identity();
    CoinSchedule {
        layers: vec![
            CoinLayer::uniform(identity).with(0, identity),
            CoinLayer::uniform(identity)
                .with(1, splitting_coin)
                .with(-1, Mat2::not()),
            CoinLayer::uniform(identity).with(0, Mat2::hadamard()),
            CoinLayer::uniform(identity)
                .with(1, identity)
                .with(-1, Mat2::not()),
        ],
    }
}

/// Coin schedule realizing the optimal MED measurement. Below the branch
/// threshold the splitting coin uses `mu` under the chosen convention;
/// at or above it the splitting coin is NOT.
pub fn schedule_med(p: f64, theta: f64, convention: MuConvention) -> Result<CoinSchedule> {
    check_parameters(p, theta)?;
    let splitting = if p < med_threshold(theta)? {
        reflection_coin(mu_value(p, theta, convention).min(1.0))
    } else {
        Mat2::not()
    };
    Ok(two_step_schedule(splitting))
}

/// Coin schedule realizing the three-outcome MCD measurement. Only
/// exists for `nu <= 1`; beyond that the four-element measurement is
/// evaluated algebraically instead of being walk-compiled.
pub fn schedule_mcd(p: f64, theta: f64) -> Result<CoinSchedule> {
    let nu = mcd_nu(p, theta)?;
    if nu > 1.0 {
        return Err(Error::UnsupportedSchedule { nu });
    }
    Ok(two_step_schedule(reflection_coin(nu)))
}

/// Map from final walker position to measurement outcome index.
#[derive(Debug, Clone)]
pub struct OutcomeMap {
    pub position_to_outcome: BTreeMap<i64, usize>,
}

impl OutcomeMap {
    /// Position carrying outcome `k`, if any (zero elements have none).
    pub fn position_of(&self, outcome: usize) -> Option<i64> {
        self.position_to_outcome
            .iter()
            .find(|(_, &k)| k == outcome)
            .map(|(&x, _)| x)
    }
}

/// Residual table attached to compilation-mismatch errors.
#[derive(Debug, Clone)]
pub struct MismatchReport {
    pub positions: Vec<i64>,
    pub outcomes: Vec<usize>,
    /// `residuals[i][j]`: worst probe deviation of position `i` against
    /// outcome `j`.
    pub residuals: Vec<Vec<f64>>,
    pub best_residual: f64,
    pub note: String,
}

impl fmt::Display for MismatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  {}", self.note)?;
        writeln!(f, "  best achievable residual: {:.3e}", self.best_residual)?;
        for (i, &x) in self.positions.iter().enumerate() {
            let row: Vec<String> = self
                .outcomes
                .iter()
                .enumerate()
                .map(|(j, k)| format!("Pi_{k}: {:.3e}", self.residuals[i][j]))
                .collect();
            writeln!(f, "  x = {x:>3}  {}", row.join("  "))?;
        }
        Ok(())
    }
}

/// Probe states spanning the qubit operator space: the poles, the real
/// superpositions, and the circular pair.
fn probe_states() -> Vec<PureState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| C64::new(re, im);
    vec![
        PureState::new_unchecked(c(1.0, 0.0), c(0.0, 0.0)),
        PureState::new_unchecked(c(0.0, 0.0), c(1.0, 0.0)),
        PureState::new_unchecked(c(h, 0.0), c(h, 0.0)),
        PureState::new_unchecked(c(h, 0.0), c(-h, 0.0)),
        PureState::new_unchecked(c(h, 0.0), c(0.0, h)),
        PureState::new_unchecked(c(h, 0.0), c(0.0, -h)),
    ]
}

/// Support threshold for "this final position is occupied".
const SUPPORT_EPS: f64 = 1e-12;

/// Best bijective assignment of occupied final positions to nonzero
/// measurement outcomes, minimizing the worst probe residual. Errors only
/// when the counts cannot match.
fn best_assignment(schedule: &CoinSchedule, povm: &Povm) -> Result<(OutcomeMap, MismatchReport)> {
    let probes = probe_states();
    let mut distributions = Vec::with_capacity(probes.len());
    for probe in &probes {
        distributions.push(run_walk(probe, schedule)?.0);
    }

    let mut positions: Vec<i64> = Vec::new();
    for dist in &distributions {
        for (&x, &prob) in dist {
            if prob > SUPPORT_EPS && !positions.contains(&x) {
                positions.push(x);
            }
        }
    }
    positions.sort_unstable();

    let outcomes: Vec<usize> = povm
        .elements
        .iter()
        .enumerate()
        .filter(|(_, m)| m.max_abs() > SUPPORT_EPS)
        .map(|(k, _)| k)
        .collect();

    // residuals[i][j] = worst probe deviation of positions[i] vs outcomes[j].
    let residuals: Vec<Vec<f64>> = positions
        .iter()
        .map(|&x| {
            outcomes
                .iter()
                .map(|&k| {
                    probes
                        .iter()
                        .zip(distributions.iter())
                        .map(|(probe, dist)| {
                            let walk_p = dist.get(&x).copied().unwrap_or(0.0);
                            (walk_p - probe.expectation(&povm.elements[k])).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();

    if positions.len() != outcomes.len() {
        return Err(Error::CompilationMismatch(MismatchReport {
            note: format!(
                "{} occupied final positions cannot fit {} effective outcomes",
                positions.len(),
                outcomes.len()
            ),
            best_residual: f64::INFINITY,
            positions,
            outcomes,
            residuals,
        }));
    }

    // Exhaustive search over assignments (at most 4! = 24).
    let n = positions.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    permutations(&mut order, 0, &mut |perm| {
        let worst = (0..n).map(|i| residuals[i][perm[i]]).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            best = Some((worst, perm.to_vec()));
        }
    });
    let (best_residual, perm) = best.expect("at least one assignment");

    let mut position_to_outcome = BTreeMap::new();
    for (i, &x) in positions.iter().enumerate() {
        position_to_outcome.insert(x, outcomes[perm[i]]);
    }
    let report = MismatchReport {
        note: "best-fit assignment".to_string(),
        positions,
        outcomes,
        residuals,
        best_residual,
    };
    Ok((
        OutcomeMap {
            position_to_outcome,
        },
        report,
    ))
}

fn permutations(order: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == order.len() {
        visit(order);
        return;
    }
    for i in k..order.len() {
        order.swap(k, i);
        permutations(order, k + 1, visit);
        order.swap(k, i);
    }
}

/// Derives the position -> outcome map by probing, requiring the best-fit
/// residual to be below `1e-9`; otherwise returns the residual table as a
/// compilation-mismatch error.
pub fn derive_outcome_map(schedule: &CoinSchedule, povm: &Povm) -> Result<OutcomeMap> {
    let (map, report) = best_assignment(schedule, povm)?;
    if report.best_residual > 1e-9 {
        let mut report = report;
        report.note = format!(
            "no assignment reproduces the measurement within 1e-9 \
             (best {:.3e})",
            report.best_residual
        );
        return Err(Error::CompilationMismatch(report));
    }
    Ok(map)
}

/// Maximum deviation `|P_walk(outcome) - <psi| Pi |psi>|` over
/// `sample_count` Haar-random coin states and all outcomes, under the
/// best-fit outcome assignment.
pub fn verify_schedule(schedule: &CoinSchedule, povm: &Povm, sample_count: usize) -> Result<f64> {
    let (map, _) = best_assignment(schedule, povm)?;
    let key = rng::mix(&[0x5EED_u64, 0x57A7E]);
    let mut max_deviation: f64 = 0.0;
    for j in 0..sample_count {
        let psi = rng::haar_state(key, j as u64);
        let (dist, _) = run_walk(&psi, schedule)?;
        for (k, element) in povm.elements.iter().enumerate() {
            let walk_p = map
                .position_of(k)
                .and_then(|x| dist.get(&x).copied())
                .unwrap_or(0.0);
            let born = psi.expectation(element);
            max_deviation = max_deviation.max((walk_p - born).abs());
        }
    }
    Ok(max_deviation)
}

fn mat_json(m: &Mat2) -> Value {
    json!([
        [[m.e[0].re, m.e[0].im], [m.e[1].re, m.e[1].im]],
        [[m.e[2].re, m.e[2].im], [m.e[3].re, m.e[3].im]]
    ])
}

/// JSON dump of a schedule: per-step position -> matrix entries, each
/// complex number as `[re, im]`.
pub fn schedule_json(schedule: &CoinSchedule) -> Value {
    let steps: Vec<Value> = schedule
        .layers
        .iter()
        .map(|layer| {
            let coins: Vec<Value> = layer
                .coins
                .iter()
                .map(|(&x, m)| json!({ "x": x, "matrix": mat_json(m) }))
                .collect();
            json!({ "default": mat_json(&layer.default), "coins": coins })
        })
        .collect();
    json!({ "steps": steps })
}
