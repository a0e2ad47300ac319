//! Optimal discrimination strategies for the mirror-symmetric ensemble.
//!
//! Two figures of merit are covered:
//!
//! * minimum-error discrimination (MED): maximize the probability of
//!   guessing the prepared state, `sum_i p_i <psi_i| Pi_i |psi_i>`;
//! * maximum-confidence discrimination (MCD): maximize the posterior
//!   `p_1 Tr(rho_1 Pi_1) / Tr(rho Pi_1)` of the guess being right.
//!
//! Each quantum value comes with the bound attainable by noncontextual
//! ontological models, and with independent oracles (brute-force search,
//! spectral identity) that adjudicate the closed forms.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::model::{check_parameters, Ensemble, OutcomeLabel, Povm};

/// Gaps smaller than this are treated as "no advantage", so the equality
/// locus itself is classified as classical.
pub const ADVANTAGE_EPS: f64 = 1e-9;

/// Which figure of merit is being optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Med,
    Mcd,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Med => write!(f, "med"),
            Strategy::Mcd => write!(f, "mcd"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "med" => Ok(Strategy::Med),
            "mcd" => Ok(Strategy::Mcd),
            _ => Err(Error::Config {
                field: "strategy",
                message: format!("'{s}' is not one of: med, mcd"),
            }),
        }
    }
}

/// Convention for the MED coin parameter `mu`.
///
/// `Derived` uses the optimal denominator `1 - p (2 + cos^2 theta)`,
/// which the brute-force oracle confirms. `Printed` uses the variant
/// denominator `1 - p (2 + p cos^2 theta)` that circulated with the
/// published waveplate-angle tables; it is suboptimal but kept so those
/// hardware settings can be reproduced exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MuConvention {
    Derived,
    Printed,
}

impl fmt::Display for MuConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuConvention::Derived => write!(f, "derived"),
            MuConvention::Printed => write!(f, "printed"),
        }
    }
}

impl FromStr for MuConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "derived" => Ok(MuConvention::Derived),
            "printed" => Ok(MuConvention::Printed),
            _ => Err(Error::Config {
                field: "convention",
                message: format!("'{s}' is not one of: derived, printed"),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// MED
// ---------------------------------------------------------------------------

/// Which arm of the optimal MED solution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedBranch {
    /// Full three-element measurement (`p < p*(theta)`).
    ThreeElement,
    /// Projective discrimination of the mirror pair only.
    Projective,
}

/// The optimal MED measurement at one parameter point.
#[derive(Debug, Clone)]
pub struct MedSolution {
    pub branch: MedBranch,
    /// Coin parameter actually used; 1 on the projective branch.
    pub mu: f64,
    pub povm: Povm,
    /// Branch boundary `p*(theta)`.
    pub threshold_p: f64,
}

/// Branch boundary `p*(theta) = 1 / (2 + cos(theta) (cos(theta) + sin(theta)))`.
/// Below it the full three-element measurement is physical.
pub fn med_threshold(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            requirement: "0 < theta < pi/2",
        });
    }
    let c = theta.cos();
    Ok(1.0 / (2.0 + c * (c + theta.sin())))
}

/// Closed-form optimal `mu = p cos sin / (1 - p (2 + cos^2))`, not capped.
/// Exceeds 1 above `p*(theta)`, where the three-element measurement stops
/// being physical.
pub fn med_mu(p: f64, theta: f64) -> Result<f64> {
    check_parameters(p, theta)?;
    Ok(mu_value(p, theta, MuConvention::Derived))
}

/// `mu` under either convention; see [`MuConvention`].
pub fn mu_value(p: f64, theta: f64, convention: MuConvention) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    match convention {
        MuConvention::Derived => p * c * s / (1.0 - p * (2.0 + c * c)),
        MuConvention::Printed => p * c * s / (1.0 - p * (2.0 + p * c * c)),
    }
}

/// The symmetric pair `{1/2 [[m^2, +-m], [+-m, 1]]}` plus the leftover
/// `diag(1 - m^2, 0)`, which is the shape shared by MED (m = mu) and the
/// three-outcome MCD reduction (m = nu, reordered).
fn symmetric_triple(m: f64) -> (Mat2, Mat2, Mat2) {
    let pair_plus = Mat2::from_real(m * m / 2.0, m / 2.0, m / 2.0, 0.5);
    let pair_minus = Mat2::from_real(m * m / 2.0, -m / 2.0, -m / 2.0, 0.5);
    let leftover = Mat2::diag(1.0 - m * m, 0.0);
    (pair_plus, pair_minus, leftover)
}

/// Optimal MED measurement. Below `p*(theta)` the three-element family
/// with the derived `mu`; at or above it the projective pair on the
/// mirror states plus a zero third element (labels preserved).
pub fn med_povm(p: f64, theta: f64) -> Result<MedSolution> {
    check_parameters(p, theta)?;
    let threshold_p = med_threshold(theta)?;
    let labels = vec![
        OutcomeLabel::Guess(0),
        OutcomeLabel::Guess(1),
        OutcomeLabel::Guess(2),
    ];
    if p < threshold_p {
        let mu = mu_value(p, theta, MuConvention::Derived);
        let (e1, e2, e3) = symmetric_triple(mu);
        Ok(MedSolution {
            branch: MedBranch::ThreeElement,
            mu,
            povm: Povm::new(vec![e1, e2, e3], labels),
            threshold_p,
        })
    } else {
        let (e1, e2, _) = symmetric_triple(1.0);
        Ok(MedSolution {
            branch: MedBranch::Projective,
            mu: 1.0,
            povm: Povm::new(vec![e1, e2, Mat2::zero()], labels),
            threshold_p,
        })
    }
}

/// The three-element measurement family at an explicit coin parameter
/// `m in [0, 1]`: the symmetric pair plus `diag(1 - m^2, 0)`, with guess
/// labels. [`med_povm`] picks the optimal point of this family; passing a
/// suboptimal `m` (for example the printed-convention `mu`) yields the
/// measurement such a setting actually realizes.
pub fn med_family_povm(m: f64) -> Povm {
    let (e1, e2, e3) = symmetric_triple(m);
    Povm::new(
        vec![e1, e2, e3],
        vec![
            OutcomeLabel::Guess(0),
            OutcomeLabel::Guess(1),
            OutcomeLabel::Guess(2),
        ],
    )
}

/// Quantum MED success probability, computed operationally as
/// `sum_i p_i <psi_i| Pi_i |psi_i>` from the constructed measurement.
/// On the projective branch this equals `p (1 + sin 2 theta)` exactly.
pub fn med_success_quantum(p: f64, theta: f64) -> Result<f64> {
    let ensemble = Ensemble::mirror(p, theta)?;
    let solution = med_povm(p, theta)?;
    Ok(success_from_povm(&ensemble, &solution.povm))
}

/// `sum_i p_i <psi_i| Pi_(guess=i) |psi_i>` for any guess-labelled
/// measurement.
pub fn success_from_povm(ensemble: &Ensemble, povm: &Povm) -> f64 {
    let mut total = 0.0;
    for (k, label) in povm.labels.iter().enumerate() {
        if let OutcomeLabel::Guess(i) = label {
            total += ensemble.priors()[*i] * ensemble.states()[*i].expectation(&povm.elements[k]);
        }
    }
    total
}

/// Noncontextual bound on the MED success probability. The two arms agree
/// at the branch point `p = 1/3`.
pub fn med_success_noncontextual(p: f64, theta: f64) -> Result<f64> {
    check_parameters(p, theta)?;
    let c2 = theta.cos().powi(2);
    let c2_2 = (2.0 * theta).cos().powi(2);
    Ok(if p >= 1.0 / 3.0 {
        1.0 - (1.0 - 2.0 * p) * c2 - p * c2_2
    } else {
        1.0 - p * c2 - p * c2_2
    })
}

/// The MED objective `S(mu) = p (mu cos + sin)^2 + (1 - 2p)(1 - mu^2)`
/// that the three-element family trades off.
pub fn med_objective(p: f64, theta: f64, mu: f64) -> f64 {
    let (c, s) = (theta.cos(), theta.sin());
    let reach = mu * c + s;
    p * reach * reach + (1.0 - 2.0 * p) * (1.0 - mu * mu)
}

/// Brute-force maximization of [`med_objective`] over `mu in [0, 1]`:
/// grid search with `grid_size` cells plus golden-section refinement of
/// the winning cell. Independent check on the closed-form `mu`.
///
/// Returns `(mu_star, s_star)`.
pub fn brute_force_optimize_med(p: f64, theta: f64, grid_size: usize) -> Result<(f64, f64)> {
    check_parameters(p, theta)?;
    if grid_size < 1000 {
        return Err(Error::Config {
            field: "grid_size",
            message: format!("{grid_size} < 1000 is too coarse for the oracle"),
        });
    }
    let h = 1.0 / grid_size as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=grid_size {
        let s = med_objective(p, theta, i as f64 * h);
        if s > best {
            best = s;
            best_i = i;
        }
    }
    // Golden-section refinement inside the two cells around the winner.
    // The objective is concave in mu, so unimodality holds.
    let mut lo = (best_i as f64 - 1.0).max(0.0) * h;
    let mut hi = ((best_i + 1) as f64 * h).min(1.0);
    let inv_phi = 0.618_033_988_749_894_9;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = med_objective(p, theta, a);
    let mut fb = med_objective(p, theta, b);
    for _ in 0..120 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = med_objective(p, theta, b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = med_objective(p, theta, a);
        }
    }
    let mu_star = 0.5 * (lo + hi);
    Ok((mu_star, med_objective(p, theta, mu_star)))
}

// ---------------------------------------------------------------------------
// MCD
// ---------------------------------------------------------------------------

/// The maximum-confidence measurement at one parameter point.
///
/// Elements are ordered `[Pi_0, Pi_1, Pi_2, Pi_4]`: the inconclusive
/// leftover along `|0>`, the two mirror-pair guesses, and the inconclusive
/// leftover along `|1>` (nonzero only when `nu > 1` forces `xi < 1`).
#[derive(Debug, Clone)]
pub struct McdSolution {
    /// `nu = p sin(2 theta) / (1 - 2 p sin^2 theta)`.
    pub nu: f64,
    /// Scale of the guessing pair, `min(1, 1/nu^2)` by default.
    pub xi: f64,
    pub povm: Povm,
    /// Indices of the outcomes that yield no state guess.
    pub inconclusive_indices: Vec<usize>,
}

/// `nu = p sin(2 theta) / (1 - 2 p sin^2 theta)`.
pub fn mcd_nu(p: f64, theta: f64) -> Result<f64> {
    check_parameters(p, theta)?;
    let s2 = theta.sin().powi(2);
    Ok(p * (2.0 * theta).sin() / (1.0 - 2.0 * p * s2))
}

/// Maximum-confidence measurement with the default scale
/// `xi = min(1, 1/nu^2)`, the largest physical choice (it minimizes the
/// inconclusive rate; the confidence itself is xi-invariant).
pub fn mcd_povm(p: f64, theta: f64) -> Result<McdSolution> {
    let nu = mcd_nu(p, theta)?;
    mcd_povm_with_xi(p, theta, (1.0 / (nu * nu)).min(1.0))
}

/// Maximum-confidence measurement with an explicit scale
/// `xi in (0, min(1, 1/nu^2)]`.
pub fn mcd_povm_with_xi(p: f64, theta: f64, xi: f64) -> Result<McdSolution> {
    let nu = mcd_nu(p, theta)?;
    let xi_max = (1.0 / (nu * nu)).min(1.0);
    if !(xi > 0.0 && xi <= xi_max + 1e-15) {
        return Err(Error::Domain {
            name: "xi",
            value: xi,
            requirement: "0 < xi <= min(1, 1/nu^2)",
        });
    }
    let pair_plus = Mat2::from_real(nu * nu * xi / 2.0, nu * xi / 2.0, nu * xi / 2.0, xi / 2.0);
    let pair_minus = Mat2::from_real(nu * nu * xi / 2.0, -nu * xi / 2.0, -nu * xi / 2.0, xi / 2.0);
    let leftover_zero = Mat2::diag(1.0 - nu * nu * xi, 0.0);
    let leftover_one = Mat2::diag(0.0, 1.0 - xi);
    Ok(McdSolution {
        nu,
        xi,
        povm: Povm::new(
            vec![leftover_zero, pair_plus, pair_minus, leftover_one],
            vec![
                OutcomeLabel::Inconclusive,
                OutcomeLabel::Guess(0),
                OutcomeLabel::Guess(1),
                OutcomeLabel::Inconclusive,
            ],
        ),
        inconclusive_indices: vec![0, 3],
    })
}

/// Posterior confidence `p_1 Tr(rho_1 Pi_1) / Tr(rho Pi_1)` of an
/// arbitrary measurement outcome, given the ensemble.
pub fn confidence_from_povm(ensemble: &Ensemble, povm: &Povm, outcome: usize, state: usize) -> f64 {
    let element = &povm.elements[outcome];
    let joint = ensemble.priors()[state] * ensemble.states()[state].expectation(element);
    let marginal = (*ensemble.average().matrix() * *element).trace().re;
    joint / marginal
}

/// Quantum MCD confidence, computed from the constructed measurement as
/// the ratio `p_1 Tr(rho_1 Pi_1) / Tr(rho Pi_1)`.
pub fn mcd_confidence_quantum(p: f64, theta: f64) -> Result<f64> {
    let ensemble = Ensemble::mirror(p, theta)?;
    let solution = mcd_povm(p, theta)?;
    Ok(confidence_from_povm(&ensemble, &solution.povm, 1, 0))
}

/// Closed form `(1 + 2 p cos 2 theta) / (2 - 4 p sin^2 theta)` for the
/// quantum MCD confidence. Kept separate from the ratio so the two can be
/// cross-checked.
pub fn mcd_confidence_closed_form(p: f64, theta: f64) -> Result<f64> {
    check_parameters(p, theta)?;
    Ok((1.0 + 2.0 * p * (2.0 * theta).cos()) / (2.0 - 4.0 * p * theta.sin().powi(2)))
}

/// Spectral oracle for the maximum confidence of state `i` (0-based):
/// `p_i <psi_i| rho^{-1} |psi_i>` for a pure state, the standard identity
/// `C_i = p_i lambda_max(rho^{-1/2} rho_i rho^{-1/2})` specialized to
/// rank one.
pub fn max_confidence_eigen_oracle(ensemble: &Ensemble, i: usize) -> Result<f64> {
    assert!(i < 3, "state index out of range");
    let rho = ensemble.average();
    let min_eig = rho.eigenvalues()[0];
    if min_eig < 1e-12 {
        return Err(Error::SingularAverage {
            eigenvalue: min_eig,
        });
    }
    let inv = rho.matrix().inverse().ok_or(Error::SingularAverage {
        eigenvalue: min_eig,
    })?;
    Ok(ensemble.priors()[i] * ensemble.states()[i].expectation(&inv))
}

/// Noncontextual bound on the MCD confidence:
/// `1 / (1 + cos^2 2 theta + (1/p - 2) cos^2 theta)`.
pub fn mcd_confidence_noncontextual(p: f64, theta: f64) -> Result<f64> {
    check_parameters(p, theta)?;
    let c2 = theta.cos().powi(2);
    let c2_2 = (2.0 * theta).cos().powi(2);
    Ok(1.0 / (1.0 + c2_2 + (1.0 / p - 2.0) * c2))
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Quantum value vs noncontextual bound at one parameter point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundsReport {
    pub strategy: Strategy,
    pub p: f64,
    pub theta: f64,
    pub quantum_value: f64,
    pub noncontextual_value: f64,
    pub gap: f64,
    pub advantage: bool,
}

/// Assembles quantum value, noncontextual bound, gap, and the advantage
/// flag (`gap > 1e-9`).
pub fn bounds_report(p: f64, theta: f64, strategy: Strategy) -> Result<BoundsReport> {
    let (quantum_value, noncontextual_value) = match strategy {
        Strategy::Med => (
            med_success_quantum(p, theta)?,
            med_success_noncontextual(p, theta)?,
        ),
        Strategy::Mcd => (
            mcd_confidence_quantum(p, theta)?,
            mcd_confidence_noncontextual(p, theta)?,
        ),
    };
    let gap = quantum_value - noncontextual_value;
    Ok(BoundsReport {
        strategy,
        p,
        theta,
        quantum_value,
        noncontextual_value,
        gap,
        advantage: gap > ADVANTAGE_EPS,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::model::PureState;
    use crate::rng::Stream;

    const PI_12: f64 = PI / 12.0;
    const PI_3: f64 = PI / 3.0;

    #[test]
    fn threshold_values() {
        // Direct evaluation; 1/3 is exact at pi/4 since cos(cos+sin) = 1.
        assert_abs_diff_eq!(
            med_threshold(PI_12).unwrap(),
            0.3141677692349533,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            med_threshold(FRAC_PI_4).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(med_threshold(1e-9).unwrap(), 1.0 / 3.0, epsilon = 1e-8);
        assert!(med_threshold(2.0).is_err());
    }

    #[test]
    fn med_three_element_matches_brute_force() {
        // The brute-force oracle is the ground truth for mu. It selects
        // the derived denominator and rejects the printed variant.
        // Value-comparison optimization cannot localize a quadratic
        // maximum beyond ~sqrt(machine eps), hence the 1e-7 band.
        let (mu_star, s_star) = brute_force_optimize_med(0.3, PI_12, 1_000_000).unwrap();
        assert_abs_diff_eq!(mu_star, 0.6244994146317797, epsilon = 1e-7);
        let solution = med_povm(0.3, PI_12).unwrap();
        assert_eq!(solution.branch, MedBranch::ThreeElement);
        assert_abs_diff_eq!(solution.mu, mu_star, epsilon = 1e-7);
        assert!(solution.povm.validate().pass());
        // Pi_3 = diag(1 - mu^2, 0).
        assert_abs_diff_eq!(
            solution.povm.elements[2].e[0].re,
            0.6100004811245645,
            epsilon = 1e-12
        );
        let printed = mu_value(0.3, PI_12, MuConvention::Printed);
        assert_abs_diff_eq!(printed, 0.23732010029835834, epsilon = 1e-12);
        assert!(s_star > med_objective(0.3, PI_12, printed) + 1e-6);

        let (mu_small, _) = brute_force_optimize_med(0.1, PI_12, 1_000_000).unwrap();
        assert_abs_diff_eq!(mu_small, 0.035375753408660955, epsilon = 1e-7);
    }

    #[test]
    fn med_projective_branch() {
        let solution = med_povm(0.4, FRAC_PI_4).unwrap();
        assert_eq!(solution.branch, MedBranch::Projective);
        assert_eq!(
            solution.povm.elements[0],
            Mat2::from_real(0.5, 0.5, 0.5, 0.5)
        );
        assert_eq!(solution.povm.elements[2], Mat2::zero());
        assert!(solution.povm.validate().pass());
    }

    #[test]
    fn med_branch_is_continuous_at_threshold() {
        let theta = PI_12;
        let pstar = med_threshold(theta).unwrap();
        // mu(p*) = 1, and the three-element elements coincide with the
        // projective pair there.
        assert_abs_diff_eq!(med_mu(pstar, theta).unwrap(), 1.0, epsilon = 1e-12);
        let below = med_povm(pstar - 1e-12, theta).unwrap();
        let at = med_povm(pstar, theta).unwrap();
        assert_eq!(at.branch, MedBranch::Projective);
        for (a, b) in below.povm.elements.iter().zip(at.povm.elements.iter()) {
            assert!(a.max_abs_diff(b) < 1e-9);
        }
    }

    #[test]
    fn med_success_quantum_values() {
        // Projective branch closed form p (1 + sin 2 theta).
        assert_abs_diff_eq!(
            med_success_quantum(0.4, FRAC_PI_4).unwrap(),
            0.8,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            med_success_quantum(0.4, PI_12).unwrap(),
            0.6,
            epsilon = 1e-12
        );
        // Three-element branch: operational sum, frozen from the oracle.
        assert_abs_diff_eq!(
            med_success_quantum(0.3, PI_12).unwrap(),
            0.46693364552971767,
            epsilon = 1e-12
        );
    }

    #[test]
    fn med_noncontextual_values() {
        assert_abs_diff_eq!(
            med_success_noncontextual(0.3, PI_12).unwrap(),
            0.4950961894323341,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            med_success_noncontextual(0.4, PI_12).unwrap(),
            0.5133974596215561,
            epsilon = 1e-12
        );
        // Both arms agree at p = 1/3.
        for theta in [0.2, FRAC_PI_4, 1.3] {
            let below = med_success_noncontextual(1.0 / 3.0 - 1e-12, theta).unwrap();
            let at = med_success_noncontextual(1.0 / 3.0, theta).unwrap();
            assert_abs_diff_eq!(below, at, epsilon = 1e-10);
        }
    }

    #[test]
    fn mcd_reduces_to_three_elements_when_nu_small() {
        let solution = mcd_povm(0.1, PI_3).unwrap();
        assert_abs_diff_eq!(solution.nu, 0.10188534162169868, epsilon = 1e-15);
        assert_eq!(solution.xi, 1.0);
        assert_abs_diff_eq!(
            solution.povm.elements[0].e[0].re,
            0.9896193771626297,
            epsilon = 1e-12
        );
        // Pi_4 vanishes at xi = 1.
        assert_eq!(solution.povm.elements[3], Mat2::diag(0.0, 0.0));
        assert!(solution.povm.validate().pass());
        assert_eq!(solution.inconclusive_indices, vec![0, 3]);
    }

    #[test]
    fn mcd_clamps_xi_when_nu_exceeds_one() {
        // Frozen from the direct-evaluation oracle: nu = 1.19911...,
        // xi = 1/nu^2 = 0.69547...
        let solution = mcd_povm(0.45, PI_3).unwrap();
        assert_abs_diff_eq!(solution.nu, 1.199112097547684, epsilon = 1e-12);
        assert_abs_diff_eq!(solution.xi, 0.6954732510288067, epsilon = 1e-12);
        assert!(solution.povm.validate().pass());
        // Leftover along |0> is exactly zero here.
        assert!(solution.povm.elements[0].max_abs() < 1e-15);
        assert!(solution.povm.elements[3].e[3].re > 0.0);
    }

    #[test]
    fn mcd_degenerate_limit_near_theta_pi_2() {
        let solution = mcd_povm(0.3, std::f64::consts::FRAC_PI_2 - 1e-9).unwrap();
        assert!(solution.nu < 1e-8);
        let pair_sum = solution.povm.elements[1] + solution.povm.elements[2];
        assert!(pair_sum.max_abs_diff(&Mat2::diag(0.0, 1.0)) < 1e-8);
        assert!(solution.povm.elements[0].max_abs_diff(&Mat2::diag(1.0, 0.0)) < 1e-8);
    }

    #[test]
    fn confidence_triple_agreement() {
        // Ratio, spectral oracle, and closed form must coincide.
        let ratio = mcd_confidence_quantum(0.1, PI_3).unwrap();
        let closed = mcd_confidence_closed_form(0.1, PI_3).unwrap();
        let ensemble = Ensemble::mirror(0.1, PI_3).unwrap();
        let eigen = max_confidence_eigen_oracle(&ensemble, 0).unwrap();
        assert_abs_diff_eq!(ratio, 9.0 / 17.0, epsilon = 1e-12);
        assert_abs_diff_eq!(closed, 9.0 / 17.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eigen, 9.0 / 17.0, epsilon = 1e-12);
        // Other frozen points of the closed form.
        assert_abs_diff_eq!(
            mcd_confidence_quantum(0.25, FRAC_PI_4).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mcd_confidence_closed_form(1e-9, 0.7).unwrap(),
            0.5,
            epsilon = 1e-8
        );
    }

    #[test]
    fn eigen_oracle_per_state() {
        let ensemble = Ensemble::mirror(0.1, PI_3).unwrap();
        // Axis state: (1 - 2p) / (1 - 2 p sin^2 theta) = 0.8 / 0.85.
        assert_abs_diff_eq!(
            max_confidence_eigen_oracle(&ensemble, 2).unwrap(),
            0.8 / 0.85,
            epsilon = 1e-12
        );
        // Mirror pair gives equal confidences.
        let c1 = max_confidence_eigen_oracle(&ensemble, 0).unwrap();
        let c2 = max_confidence_eigen_oracle(&ensemble, 1).unwrap();
        assert_abs_diff_eq!(c1, c2, epsilon = 1e-14);
    }

    #[test]
    fn eigen_oracle_rejects_singular_average() {
        // p = 1/2, theta -> pi/2 keeps rho regular; tiny p sin^2 theta
        // makes it numerically singular.
        let ensemble = Ensemble::mirror(1e-14, 1e-4).unwrap();
        assert!(matches!(
            max_confidence_eigen_oracle(&ensemble, 0),
            Err(Error::SingularAverage { .. })
        ));
    }

    #[test]
    fn mcd_noncontextual_values() {
        assert_abs_diff_eq!(
            mcd_confidence_noncontextual(0.1, PI_3).unwrap(),
            4.0 / 13.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mcd_confidence_noncontextual(0.25, FRAC_PI_4).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            mcd_confidence_noncontextual(0.3, std::f64::consts::FRAC_PI_2 - 1e-9).unwrap(),
            0.5,
            epsilon = 1e-8
        );
    }

    #[test]
    fn confidence_is_xi_invariant() {
        let ensemble = Ensemble::mirror(0.2, 0.9).unwrap();
        let reference = mcd_confidence_quantum(0.2, 0.9).unwrap();
        for xi in [0.05, 0.3, 0.7, 1.0] {
            let solution = mcd_povm_with_xi(0.2, 0.9, xi).unwrap();
            let c = confidence_from_povm(&ensemble, &solution.povm, 1, 0);
            assert_abs_diff_eq!(c, reference, epsilon = 1e-12);
        }
    }

    #[test]
    fn bounds_report_spot_values() {
        let r = bounds_report(0.4, PI_12, Strategy::Med).unwrap();
        assert_abs_diff_eq!(r.gap, 0.08660254037844395, epsilon = 1e-12);
        assert!(r.advantage);

        let r = bounds_report(0.4, FRAC_PI_4, Strategy::Med).unwrap();
        assert_abs_diff_eq!(r.gap, -0.1, epsilon = 1e-12);
        assert!(!r.advantage);

        let r = bounds_report(0.1, PI_3, Strategy::Mcd).unwrap();
        assert_abs_diff_eq!(r.gap, 49.0 / 221.0, epsilon = 1e-12);
        assert!(r.advantage);
        assert_abs_diff_eq!(
            r.gap,
            r.quantum_value - r.noncontextual_value,
            epsilon = 1e-15
        );
    }

    #[test]
    fn med_advantage_sign_pattern() {
        // Spot set frozen from direct evaluation of the two bounds.
        for (p, theta, expected) in [
            (0.4, PI_12, true),
            (0.45, 5.0 * PI_12, true),
            (0.5, PI_12, true),
            (0.1, PI_12, false),
            (0.3, PI_12, false),
        ] {
            let r = bounds_report(p, theta, Strategy::Med).unwrap();
            assert_eq!(r.advantage, expected, "({p}, {theta})");
        }
        for i in 0..50 {
            let p = 0.5 * (i as f64 + 1.0) / 50.0;
            assert!(
                !bounds_report(p, FRAC_PI_4, Strategy::Med)
                    .unwrap()
                    .advantage
            );
        }
    }

    #[test]
    fn closed_form_mu_is_optimal_on_random_grid() {
        // 1000 random (p, theta) with p < p*(theta): the closed form must
        // dominate every mu on a 10^4 grid.
        let mut stream = Stream::new(0xC0FFEE);
        for _ in 0..1000 {
            let theta = stream.next_open(0.0, std::f64::consts::FRAC_PI_2);
            let pstar = med_threshold(theta).unwrap();
            let p = stream.next_open(0.0, pstar);
            let mu = med_mu(p, theta).unwrap();
            let s_closed = med_objective(p, theta, mu);
            for i in 0..=10_000 {
                let m = i as f64 / 10_000.0;
                assert!(
                    s_closed >= med_objective(p, theta, m) - 1e-12,
                    "p={p} theta={theta} m={m}"
                );
            }
        }
    }

    #[test]
    fn ratio_and_eigen_oracle_agree_on_grid() {
        // 50x50 interior grid, away from the singular rho boundaries.
        for i in 0..50 {
            let p = 0.5 * (i as f64 + 1.0) / 50.0;
            for j in 0..50 {
                let theta = std::f64::consts::FRAC_PI_2 * (j as f64 + 1.0) / 51.0;
                let ratio = mcd_confidence_quantum(p, theta).unwrap();
                let ensemble = Ensemble::mirror(p, theta).unwrap();
                let eigen = max_confidence_eigen_oracle(&ensemble, 0).unwrap();
                assert_abs_diff_eq!(ratio, eigen, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn mirror_symmetry_of_strategy_povms() {
        let mut stream = Stream::new(0xABCD);
        for _ in 0..200 {
            let theta = stream.next_open(0.0, std::f64::consts::FRAC_PI_2);
            let p = stream.next_open(0.0, 0.5);
            let e = Ensemble::mirror(p, theta).unwrap();
            let psi1 = &e.states()[0];
            let psi2 = &e.states()[1];
            let med = med_povm(p, theta).unwrap().povm;
            let mcd = mcd_povm(p, theta).unwrap().povm;
            for (povm, a, b) in [(&med, 0usize, 1usize), (&mcd, 1, 2)] {
                let direct1 = psi1.expectation(&povm.elements[a]);
                let direct2 = psi2.expectation(&povm.elements[b]);
                assert_abs_diff_eq!(direct1, direct2, epsilon = 1e-12);
                let cross1 = psi1.expectation(&povm.elements[b]);
                let cross2 = psi2.expectation(&povm.elements[a]);
                assert_abs_diff_eq!(cross1, cross2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn outcome_probability_frozen_examples() {
        // Matrix-product oracle values, frozen.
        let med = med_povm(0.3, PI_12).unwrap();
        let q = med
            .povm
            .probabilities(&PureState::zero().density())
            .unwrap();
        assert_abs_diff_eq!(q[2], 0.6100004811245645, epsilon = 1e-12);

        let mcd = mcd_povm(0.1, PI_3).unwrap();
        let psi1 = Ensemble::mirror(0.1, PI_3).unwrap().states()[0];
        let q = mcd.povm.probabilities(&psi1.density()).unwrap();
        assert_abs_diff_eq!(q[1], 0.4204152249134948, epsilon = 1e-12);
    }
}
