//! Qubit states, ensembles, and measurements.
//!
//! The ensemble of interest is a mirror-symmetric triple: two states at
//! Bloch angle +-2*theta around `|0>` and `|0>` itself, with priors
//! `(p, p, 1 - 2p)`. All algebraic identities are enforced to
//! [`ALGEBRAIC_TOL`]; everything here is a few flops on 2x2 matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::mat2::{Mat2, C64};

/// Tolerance for algebraic identities (Hermiticity, completeness, norms).
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Checks `0 < p <= 1/2`, `0 < theta < pi/2` and returns a domain error
/// naming the violated bound otherwise.
pub fn check_parameters(p: f64, theta: f64) -> Result<()> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            requirement: "0 < p <= 1/2",
        });
    }
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain {
            name: "theta",
            value: theta,
            requirement: "0 < theta < pi/2",
        });
    }
    Ok(())
}

/// A normalized qubit pure state `a0 |0> + a1 |1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    pub a0: C64,
    pub a1: C64,
}

impl PureState {
    /// Validating constructor: requires `|a0|^2 + |a1|^2 = 1` within
    /// [`ALGEBRAIC_TOL`].
    pub fn new(a0: C64, a1: C64) -> Result<Self> {
        let n = a0.norm_sqr() + a1.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(Error::Domain {
                name: "state norm",
                value: n,
                requirement: "|a0|^2 + |a1|^2 = 1 within 1e-12",
            });
        }
        Ok(PureState { a0, a1 })
    }

    /// Caller guarantees normalization (used on hot paths).
    pub fn new_unchecked(a0: C64, a1: C64) -> Self {
        PureState { a0, a1 }
    }

    /// Real-amplitude state `cos(t) |0> + sin(t) |1>`.
    pub fn real(t: f64) -> Self {
        PureState::new_unchecked(C64::new(t.cos(), 0.0), C64::new(t.sin(), 0.0))
    }

    pub fn zero() -> Self {
        PureState::new_unchecked(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.a0, self.a1]
    }

    /// `<psi| M |psi>`, real part. Exact for Hermitian `M`.
    pub fn expectation(&self, m: &Mat2) -> f64 {
        let v = m.apply([self.a0, self.a1]);
        (self.a0.conj() * v[0] + self.a1.conj() * v[1]).re
    }

    /// Rank-1 density operator `|psi><psi|`.
    pub fn density(&self) -> Density {
        Density {
            matrix: Mat2::outer([self.a0, self.a1]),
        }
    }
}

/// A validated qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density {
    matrix: Mat2,
}

impl Density {
    /// Validates Hermiticity, unit trace, and positivity within
    /// [`ALGEBRAIC_TOL`].
    pub fn new(matrix: Mat2) -> Result<Self> {
        let hermiticity_defect = matrix.hermiticity_defect();
        let trace_defect = (matrix.trace().re - 1.0).abs() + matrix.trace().im.abs();
        let min_eigenvalue = matrix.eigvals_hermitian()[0];
        if !matrix.is_finite()
            || hermiticity_defect > ALGEBRAIC_TOL
            || trace_defect > ALGEBRAIC_TOL
            || min_eigenvalue < -ALGEBRAIC_TOL
        {
            return Err(Error::InvalidDensity {
                hermiticity_defect,
                trace_defect,
                min_eigenvalue,
            });
        }
        Ok(Density { matrix })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.matrix.eigvals_hermitian()
    }
}

/// Three mirror-symmetric pure states with priors `(p, p, 1 - 2p)`.
#[derive(Debug, Clone, Copy)]
pub struct Ensemble {
    states: [PureState; 3],
    priors: [f64; 3],
    p: f64,
    theta: f64,
}

impl Ensemble {
    /// The mirror-symmetric ensemble at `(p, theta)`:
    /// `psi_1 = cos(theta)|0> + sin(theta)|1>`, `psi_2` its mirror image,
    /// `psi_3 = |0>`.
    pub fn mirror(p: f64, theta: f64) -> Result<Self> {
        check_parameters(p, theta)?;
        Ok(Ensemble {
            states: [
                PureState::real(theta),
                PureState::real(-theta),
                PureState::zero(),
            ],
            priors: [p, p, 1.0 - 2.0 * p],
            p,
            theta,
        })
    }

    pub fn states(&self) -> &[PureState; 3] {
        &self.states
    }

    pub fn priors(&self) -> &[f64; 3] {
        &self.priors
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The ensemble average `rho = sum_i p_i |psi_i><psi_i|`. For mirror
    /// ensembles this is `diag(1 - 2p sin^2 theta, 2p sin^2 theta)`: the
    /// `+-sin(theta)` cross terms cancel.
    pub fn average(&self) -> Density {
        let mut m = Mat2::zero();
        for (state, &prior) in self.states.iter().zip(self.priors.iter()) {
            m = m + state.density().matrix().scale(prior);
        }
        Density { matrix: m }
    }
}

/// Tag attached to a measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeLabel {
    /// Outcome means "guess state `i`" (0-based index into the ensemble).
    Guess(usize),
    /// Outcome yields no state guess.
    Inconclusive,
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeLabel::Guess(i) => write!(f, "guess-{i}"),
            OutcomeLabel::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Positivity/completeness report for one measurement element.
#[derive(Debug, Clone, Copy)]
pub struct ElementCheck {
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

/// Diagnostics from [`Povm::validate`]. Purely informational: building
/// one never fails.
#[derive(Debug, Clone)]
pub struct PovmDiagnostics {
    pub elements: Vec<ElementCheck>,
    /// Largest entry magnitude of `sum_k Pi_k - I`.
    pub completeness_defect: f64,
    pub tolerance: f64,
}

impl PovmDiagnostics {
    /// All elements Hermitian and positive, and the sum is the identity,
    /// within the tolerance band.
    pub fn pass(&self) -> bool {
        self.completeness_defect <= self.tolerance
            && self.elements.iter().all(|c| {
                c.hermiticity_defect <= self.tolerance && c.min_eigenvalue >= -self.tolerance
            })
    }
}

impl fmt::Display for PovmDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.elements.iter().enumerate() {
            writeln!(
                f,
                "  element {k}: min eigenvalue {:.3e}, hermiticity defect {:.3e}",
                c.min_eigenvalue, c.hermiticity_defect
            )?;
        }
        write!(
            f,
            "  completeness defect {:.3e} (tolerance {:.0e})",
            self.completeness_defect, self.tolerance
        )
    }
}

/// An ordered list of measurement elements with outcome tags.
///
/// Construction is unchecked; [`Povm::validate`] produces diagnostics and
/// the probability routines refuse invalid measurements.
#[derive(Debug, Clone)]
pub struct Povm {
    pub elements: Vec<Mat2>,
    pub labels: Vec<OutcomeLabel>,
}

impl Povm {
    pub fn new(elements: Vec<Mat2>, labels: Vec<OutcomeLabel>) -> Self {
        assert_eq!(elements.len(), labels.len(), "one label per element");
        Povm { elements, labels }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Per-element positivity/Hermiticity and overall completeness report.
    pub fn validate(&self) -> PovmDiagnostics {
        let elements = self
            .elements
            .iter()
            .map(|m| ElementCheck {
                min_eigenvalue: m.eigvals_hermitian()[0],
                hermiticity_defect: m.hermiticity_defect(),
            })
            .collect();
        let sum = self.elements.iter().fold(Mat2::zero(), |acc, m| acc + *m);
        PovmDiagnostics {
            elements,
            completeness_defect: sum.max_abs_diff(&Mat2::identity()),
            tolerance: ALGEBRAIC_TOL,
        }
    }

    /// Raw Born probabilities `Tr(rho Pi_k)`, no validation, no clamping.
    pub fn raw_probabilities(&self, rho: &Density) -> Vec<f64> {
        self.elements
            .iter()
            .map(|m| (*rho.matrix() * *m).trace().re)
            .collect()
    }

    /// Born probabilities of a validated measurement, clamped to `[0, 1]`.
    ///
    /// Returns the per-element diagnostics as an error if the measurement
    /// is invalid.
    pub fn probabilities(&self, rho: &Density) -> Result<Vec<f64>> {
        let diagnostics = self.validate();
        if !diagnostics.pass() {
            return Err(Error::InvalidPovm(diagnostics));
        }
        Ok(self
            .raw_probabilities(rho)
            .iter()
            .map(|q| q.clamp(0.0, 1.0))
            .collect())
    }
}
