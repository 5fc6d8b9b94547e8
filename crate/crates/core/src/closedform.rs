//! Exact solutions `X(t) = A·(Id − t·A·B)⁻¹` of the quadratic matrix ODEs
//! and the spectral blowup/eternity predictor, in both time directions.
//!
//! All operations require (and check) that `A` and `B` commute; that is the
//! hypothesis under which the closed form solves `dX/dt = B·X·X`,
//! `dX/dt = X·B·X`, and `dX/dt = X·X·B` simultaneously.

use crate::linalg::{
    self, lu_solve, rayleigh_max, real_eigenvalues, LinalgError, Matrix, SYMMETRY_REL_TOL,
};
use serde::Serialize;
use thiserror::Error;

/// Relative commutation gate: `‖AB−BA‖_F/(1+‖A‖_F·‖B‖_F) ≤ 1e-10`.
pub const COMMUTATION_REL_TOL: f64 = 1e-10;

/// Eigenvalues below `1e-12·‖AB‖_F` in magnitude count as zero: they are no
/// pole of the resolvent at any finite time.
pub const EIGENVALUE_ZERO_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("matrices do not commute: ‖AB−BA‖_F = {residual:.3e} (relative {relative:.3e})")]
    NotCommuting { residual: f64, relative: f64 },
    #[error("resolvent Id − t·AB is singular at t = {t}")]
    SingularResolvent { t: f64 },
    #[error("matrix is not symmetric within tolerance")]
    NotSymmetric,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Blowup,
    Eternal,
}

/// Which argument carried the prediction.
///
/// `SymmetricCommuting` means the Courant minimax route applied: the
/// predicted pole is certified by a witness eigenvector and cannot cancel.
/// `GeneralRealSpectrum` reports the first real pole of the resolvent as a
/// *candidate* blowup time; cancellation by the numerator `A` is possible
/// in principle and is left to the integration harness to confirm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    SymmetricCommuting,
    GeneralRealSpectrum,
}

/// Outcome of the blowup predictor.
///
/// Sign conventions: `blowup_time` is always positive and measures elapsed
/// time in the direction of the flow. For the backward direction the flow
/// is reflected (`s = −t`), whose generator is `−AB`; `eigenvalue` is then
/// the responsible eigenvalue of that reflected generator, so
/// `blowup_time·eigenvalue = 1` holds in both directions and the witness
/// satisfies `(±AB)·w = eigenvalue·w`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    pub direction: Direction,
    pub verdict: Verdict,
    pub blowup_time: Option<f64>,
    pub eigenvalue: Option<f64>,
    pub witness: Option<Vec<f64>>,
    pub method: Method,
}

/// Result of the commutation test for a pair of operators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutationCheck {
    pub commutes: bool,
    /// `‖AB−BA‖_F`
    pub residual: f64,
    /// `residual / (1 + ‖A‖_F·‖B‖_F)`
    pub relative_residual: f64,
}

/// Measures how far `a` and `b` are from commuting.
pub fn commutes(a: &Matrix, b: &Matrix) -> Result<CommutationCheck, LinalgError> {
    let bracket = linalg::commutator(a, b)?;
    let residual = bracket.frobenius_norm();
    let relative_residual = residual / (1.0 + a.frobenius_norm() * b.frobenius_norm());
    Ok(CommutationCheck {
        commutes: relative_residual <= COMMUTATION_REL_TOL,
        residual,
        relative_residual,
    })
}

fn require_commuting(a: &Matrix, b: &Matrix) -> Result<(), ClosedFormError> {
    let check = commutes(a, b)?;
    if !check.commutes {
        return Err(ClosedFormError::NotCommuting {
            residual: check.residual,
            relative: check.relative_residual,
        });
    }
    Ok(())
}

/// Evaluates the closed-form solution `X(t) = A·(Id − t·AB)⁻¹` of the
/// commuting-pair ODEs, computed as the solve `(Id − t·AB)·X = A` (left and
/// right resolvents agree because `A` commutes with `AB`).
pub fn exact_solution(a: &Matrix, b: &Matrix, t: f64) -> Result<Matrix, ClosedFormError> {
    require_commuting(a, b)?;
    resolve(a, b, t)
}

/// `X(t) = A·(Id − t·A)⁻¹`, the `B = Id` specialization.
pub fn sullivan_solution(a: &Matrix, t: f64) -> Result<Matrix, ClosedFormError> {
    resolve(a, &Matrix::identity(a.n()), t)
}

/// Closed-form evaluation without the commutation gate (callers check it).
fn resolve(a: &Matrix, b: &Matrix, t: f64) -> Result<Matrix, ClosedFormError> {
    let ab = a.matmul(b)?;
    let mut system = Matrix::identity(a.n());
    system.add_scaled_in_place(-t, &ab);
    match lu_solve(&system, a) {
        Ok(x) => Ok(x),
        Err(LinalgError::Singular { .. }) => Err(ClosedFormError::SingularResolvent { t }),
        Err(e) => Err(e.into()),
    }
}

/// `‖X(t)·(Id − t·AB) − A‖_F`: how well the closed-form solution satisfies
/// the defining resolvent identity at time `t`.
pub fn resolvent_identity_check(a: &Matrix, b: &Matrix, t: f64) -> Result<f64, ClosedFormError> {
    require_commuting(a, b)?;
    let x = resolve(a, b, t)?;
    let ab = a.matmul(b)?;
    let mut system = Matrix::identity(a.n());
    system.add_scaled_in_place(-t, &ab);
    Ok(x.matmul(&system)?.sub(a)?.frobenius_norm())
}

/// Predicts blowup or eternity for the flow started at `A`, in the given
/// time direction.
///
/// Symmetric commuting pairs take the Courant minimax route with a witness
/// eigenvector; everything else falls back to the real spectrum of `AB`,
/// whose verdicts are candidate poles (see [`Method`]).
pub fn predict_blowup(
    a: &Matrix,
    b: &Matrix,
    direction: Direction,
) -> Result<BlowupReport, ClosedFormError> {
    require_commuting(a, b)?;
    let ab = a.matmul(b)?;
    let both_symmetric =
        a.is_symmetric_within(SYMMETRY_REL_TOL) && b.is_symmetric_within(SYMMETRY_REL_TOL);
    if both_symmetric {
        predict_symmetric(&ab, direction).map_err(Into::into)
    } else {
        predict_general(&ab, direction).map_err(Into::into)
    }
}

/// Spectral predictor on a precomputed product matrix `m = A·B`, always via
/// the general real-spectrum route. This is the surface behind the CLI's
/// `--force-general` escape hatch for non-commuting pairs.
pub fn predict_blowup_product(
    m: &Matrix,
    direction: Direction,
) -> Result<BlowupReport, LinalgError> {
    predict_general(m, direction)
}

fn predict_symmetric(ab: &Matrix, direction: Direction) -> Result<BlowupReport, LinalgError> {
    // symmetrize: AB inherits the asymmetry of the inputs' rounding only
    let sym = Matrix::from_fn(ab.n(), |i, j| 0.5 * (ab.get(i, j) + ab.get(j, i)));
    let zero_floor = EIGENVALUE_ZERO_REL_TOL * sym.frobenius_norm();
    // the reflected flow (backward direction) is generated by −AB
    let generator = match direction {
        Direction::Forward => sym,
        Direction::Backward => sym.scaled(-1.0),
    };
    let (lambda, witness) = rayleigh_max(&generator)?;
    if lambda > zero_floor {
        Ok(BlowupReport {
            direction,
            verdict: Verdict::Blowup,
            blowup_time: Some(1.0 / lambda),
            eigenvalue: Some(lambda),
            witness: Some(witness),
            method: Method::SymmetricCommuting,
        })
    } else {
        Ok(BlowupReport {
            direction,
            verdict: Verdict::Eternal,
            blowup_time: None,
            eigenvalue: None,
            witness: None,
            method: Method::SymmetricCommuting,
        })
    }
}

fn predict_general(m: &Matrix, direction: Direction) -> Result<BlowupReport, LinalgError> {
    let zero_floor = EIGENVALUE_ZERO_REL_TOL * m.frobenius_norm();
    let spectrum = real_eigenvalues(m)?;
    // eigenvalue of the direction-adjusted generator (±AB) responsible for
    // the first pole: the largest positive one
    let lambda = spectrum
        .real_eigenvalues
        .iter()
        .map(|&x| direction.sign() * x)
        .filter(|&x| x > zero_floor)
        .fold(None, |best: Option<f64>, x| {
            Some(best.map_or(x, |b| b.max(x)))
        });
    Ok(match lambda {
        Some(lambda) => BlowupReport {
            direction,
            verdict: Verdict::Blowup,
            blowup_time: Some(1.0 / lambda),
            eigenvalue: Some(lambda),
            witness: None,
            method: Method::GeneralRealSpectrum,
        },
        None => BlowupReport {
            direction,
            verdict: Verdict::Eternal,
            blowup_time: None,
            eigenvalue: None,
            witness: None,
            method: Method::GeneralRealSpectrum,
        },
    })
}

/// `λ(t) = max_{⟨x,x⟩=1} ⟨t·AB·x, x⟩`, the largest Rayleigh quotient of the
/// scaled product; linear in `t` with `λ(0) = 0`.
pub fn lambda_curve(a: &Matrix, b: &Matrix, t: f64) -> Result<f64, ClosedFormError> {
    let ab = symmetric_product(a, b)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let (value, _) = rayleigh_max(&ab.scaled(t))?;
    Ok(value)
}

/// Smallest `T > 0` with `λ(T) = 1`, located by bisection; `None` when the
/// curve never reaches 1 (i.e. `λ_max(AB) ≤ 0`).
///
/// Agrees with [`predict_blowup`]'s forward blowup time to the bisection
/// tolerance `1e-12` (scaled by the bracket) whenever both exist.
pub fn first_crossing(a: &Matrix, b: &Matrix) -> Result<Option<f64>, ClosedFormError> {
    let ab = symmetric_product(a, b)?;
    let zero_floor = EIGENVALUE_ZERO_REL_TOL * ab.frobenius_norm();
    let (lambda_max, _) = rayleigh_max(&ab)?;
    if lambda_max <= zero_floor {
        return Ok(None);
    }
    // sign check passed: λ(t) = t·λ_max crosses 1 inside (0, 10/λ_max]
    let mut lo = 0.0_f64;
    let mut hi = 10.0 / lambda_max;
    let eval = |t: f64| -> Result<f64, ClosedFormError> {
        let (v, _) = rayleigh_max(&ab.scaled(t))?;
        Ok(v)
    };
    debug_assert!(eval(hi)? >= 1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * (1.0 + hi) || mid == lo || mid == hi {
            return Ok(Some(mid));
        }
        if eval(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Symmetric commuting product `AB` for the λ-curve operations; rejects
/// asymmetric inputs and non-commuting pairs.
fn symmetric_product(a: &Matrix, b: &Matrix) -> Result<Matrix, ClosedFormError> {
    if !a.is_symmetric_within(SYMMETRY_REL_TOL) || !b.is_symmetric_within(SYMMETRY_REL_TOL) {
        return Err(ClosedFormError::NotSymmetric);
    }
    require_commuting(a, b)?;
    let ab = a.matmul(b)?;
    Ok(Matrix::from_fn(ab.n(), |i, j| {
        0.5 * (ab.get(i, j) + ab.get(j, i))
    }))
}
