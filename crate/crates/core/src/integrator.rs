//! Adaptive embedded Runge–Kutta integration of the quadratic matrix ODE
//! right-hand sides, with blowup detection and simple-pole time
//! extrapolation. This is the numerical oracle that validates the closed
//! forms and probes the systems without one.

use crate::closedform::{self, ClosedFormError};
use crate::linalg::{self, LinalgError, Matrix};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum IntegrateError {
    #[error("invalid integration options: {0}")]
    InvalidOptions(String),
    #[error("insufficient samples for pole extrapolation: {0}")]
    InsufficientSamples(String),
    #[error("{0} has no closed form to compare against")]
    NoClosedForm(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
}

/// Which norm feeds the scalar factor of `dX/dt = |X|·X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormChoice {
    Operator2,
    Frobenius,
}

/// Right-hand side of the matrix ODE being integrated.
#[derive(Debug, Clone)]
pub enum RhsKind {
    /// `dX/dt = X·X`
    SquareXX,
    /// `dX/dt = B·X·X`
    BXX { b: Matrix },
    /// `dX/dt = X·B·X`
    XBX { b: Matrix },
    /// `dX/dt = X·X·B`
    XXB { b: Matrix },
    /// `dX/dt = [B,X]·X = (BX−XB)·X`
    CommutatorBXX { b: Matrix },
    /// `dX/dt = |X|·X`
    NormXX { norm: NormChoice },
}

impl RhsKind {
    pub fn name(&self) -> &'static str {
        match self {
            RhsKind::SquareXX => "xx",
            RhsKind::BXX { .. } => "bxx",
            RhsKind::XBX { .. } => "xbx",
            RhsKind::XXB { .. } => "xxb",
            RhsKind::CommutatorBXX { .. } => "commutator",
            RhsKind::NormXX { .. } => "norm",
        }
    }

    fn check_dimension(&self, n: usize) -> Result<(), LinalgError> {
        match self {
            RhsKind::BXX { b } | RhsKind::XBX { b } | RhsKind::XXB { b }
            | RhsKind::CommutatorBXX { b } => {
                if b.n() != n {
                    return Err(LinalgError::DimensionMismatch {
                        left: b.n(),
                        right: n,
                    });
                }
                Ok(())
            }
            RhsKind::SquareXX | RhsKind::NormXX { .. } => Ok(()),
        }
    }
}

/// Evaluates the chosen right-hand side at state `x`.
pub fn rhs_eval(kind: &RhsKind, x: &Matrix) -> Result<Matrix, LinalgError> {
    kind.check_dimension(x.n())?;
    match kind {
        RhsKind::SquareXX => x.matmul(x),
        RhsKind::BXX { b } => b.matmul(x)?.matmul(x),
        RhsKind::XBX { b } => x.matmul(b)?.matmul(x),
        RhsKind::XXB { b } => x.matmul(x)?.matmul(b),
        RhsKind::CommutatorBXX { b } => linalg::commutator(b, x)?.matmul(x),
        RhsKind::NormXX { norm } => {
            let factor = match norm {
                NormChoice::Operator2 => linalg::norms(x).1,
                NormChoice::Frobenius => x.frobenius_norm(),
            };
            Ok(x.scaled(factor))
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    /// Relative tolerance on the Frobenius norm of the embedded difference.
    pub rtol: f64,
    /// Absolute tolerance on the same.
    pub atol: f64,
    /// Frobenius-norm threshold that declares blowup.
    pub blowup_norm: f64,
    /// Hard cap on attempted steps.
    pub max_steps: usize,
    /// Retain (subsampled) state snapshots along the trajectory.
    pub keep_snapshots: bool,
    /// Explicit first step; estimated from the initial slope when absent.
    pub initial_step: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            blowup_norm: 1e8,
            max_steps: 2_000_000,
            keep_snapshots: false,
            initial_step: None,
        }
    }
}

impl IntegrationOptions {
    fn validate(&self) -> Result<(), IntegrateError> {
        let all_positive = self.rtol > 0.0
            && self.atol > 0.0
            && self.blowup_norm > 0.0
            && self.max_steps > 0
            && self.initial_step.is_none_or(|h| h > 0.0);
        if !all_positive {
            return Err(IntegrateError::InvalidOptions(
                "tolerances, thresholds, and steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryStatus {
    /// Reached the horizon.
    Completed,
    /// Norm crossed the blowup threshold, the step size collapsed while the
    /// norm was growing, or (with `non_finite`) the state stopped being
    /// representable.
    BlowupDetected { non_finite: bool },
    /// Step size collapsed without blowup-scale norm growth.
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub state: Matrix,
}

/// Output of one integration run. `times` are signed and strictly monotone
/// in the direction of integration; `frob_norms` is parallel to `times`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub frob_norms: Vec<f64>,
    pub snapshots: Option<Vec<Snapshot>>,
    pub status: TrajectoryStatus,
    pub final_state: Matrix,
}

impl Trajectory {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least the initial sample")
    }
}

const SAFETY: f64 = 0.9;
const FACTOR_MIN: f64 = 0.2;
const FACTOR_MAX: f64 = 5.0;
const MAX_SNAPSHOTS: usize = 1024;
/// Norm growth (relative to the initial condition) required to call a step
/// collapse a blowup rather than an integration failure.
const BLOWUP_GROWTH_FACTOR: f64 = 1e3;

// Dormand–Prince 5(4) tableau (stage times omitted: the systems are
// autonomous).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// 5th-order minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `dX/dt = F(X)` from `X(0) = a` toward `horizon` (negative
/// horizon integrates the backward flow `dY/ds = −F(Y)`, `s = −t`) with a
/// Dormand–Prince 5(4) embedded pair. Deterministic for fixed inputs.
pub fn integrate(
    kind: &RhsKind,
    a: &Matrix,
    horizon: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory, IntegrateError> {
    if !(horizon.is_finite() && horizon != 0.0) {
        return Err(IntegrateError::InvalidOptions(
            "horizon must be finite and non-zero".into(),
        ));
    }
    opts.validate()?;
    kind.check_dimension(a.n())?;

    let time_sign = horizon.signum();
    let length = horizon.abs();
    let dt_min = 1e-13 * length;
    let initial_norm = a.frobenius_norm();
    let growth_bar = BLOWUP_GROWTH_FACTOR * (1.0 + initial_norm);

    // backward flow: integrate dY/ds = −F(Y) in the reflected variable s = −t
    let f = |x: &Matrix| -> Result<Matrix, LinalgError> {
        let mut dx = rhs_eval(kind, x)?;
        if time_sign < 0.0 {
            dx = dx.scaled(-1.0);
        }
        Ok(dx)
    };

    let mut recorder = Recorder::new(opts.keep_snapshots);
    let mut s = 0.0_f64;
    let mut y = a.clone();
    recorder.record(0.0, &y);

    let mut k1 = f(&y)?;
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let slope = k1.frobenius_norm();
        (0.01 * length).min(0.1 * (1.0 + initial_norm) / (1.0 + slope))
    });
    h = h.min(length);

    let mut status = None;
    let mut steps = 0usize;
    while status.is_none() {
        steps += 1;
        if steps > opts.max_steps {
            status = Some(TrajectoryStatus::StepUnderflow);
            break;
        }
        let last = s + h >= length;
        if last {
            h = length - s;
        }

        // stages (FSAL: k7 at t+h doubles as next step's k1)
        let mut k = Vec::with_capacity(7);
        k.push(k1.clone());
        let mut finite = true;
        for stage in 1..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let coeff = A[stage][j];
                if coeff != 0.0 {
                    yi.add_scaled_in_place(h * coeff, kj);
                }
            }
            match f(&yi) {
                Ok(ki) => {
                    finite &= ki.is_finite();
                    k.push(ki);
                }
                Err(e) => return Err(e.into()),
            }
            if !finite {
                break;
            }
        }

        let (y_new, err) = if finite {
            let mut y_new = y.clone();
            let mut err_mat = Matrix::zeros(y.n());
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y_new.add_scaled_in_place(h * B5[j], kj);
                }
                if E[j] != 0.0 {
                    err_mat.add_scaled_in_place(h * E[j], kj);
                }
            }
            finite = y_new.is_finite();
            (y_new, err_mat.frobenius_norm())
        } else {
            (y.clone(), f64::INFINITY)
        };

        let scale = opts.atol
            + opts.rtol * y.frobenius_norm().max(y_new.frobenius_norm());
        let accepted = finite && err.is_finite() && err <= scale;

        if accepted {
            s += h;
            y = y_new;
            k1 = k.pop().expect("seven stages");
            recorder.record(time_sign * s, &y);

            let norm = y.frobenius_norm();
            if norm > opts.blowup_norm {
                status = Some(TrajectoryStatus::BlowupDetected { non_finite: false });
            } else if last {
                status = Some(TrajectoryStatus::Completed);
            }
        }

        if status.is_none() {
            let factor = if !finite || !err.is_finite() || err == 0.0 {
                if finite && err == 0.0 {
                    FACTOR_MAX
                } else {
                    FACTOR_MIN
                }
            } else {
                (SAFETY * (scale / err).powf(0.2)).clamp(FACTOR_MIN, FACTOR_MAX)
            };
            h *= factor;
            if h < dt_min {
                let grew = y.frobenius_norm() >= growth_bar;
                status = Some(if grew || !finite {
                    TrajectoryStatus::BlowupDetected {
                        non_finite: !finite,
                    }
                } else {
                    TrajectoryStatus::StepUnderflow
                });
            }
        }
    }

    let (times, frob_norms, snapshots) = recorder.finish();
    Ok(Trajectory {
        times,
        frob_norms,
        snapshots,
        status: status.expect("loop exits with a status"),
        final_state: y,
    })
}

struct Recorder {
    times: Vec<f64>,
    norms: Vec<f64>,
    snapshots: Option<Vec<Snapshot>>,
    stride: usize,
    accepted: usize,
}

impl Recorder {
    fn new(keep_snapshots: bool) -> Self {
        Self {
            times: Vec::new(),
            norms: Vec::new(),
            snapshots: keep_snapshots.then(Vec::new),
            stride: 1,
            accepted: 0,
        }
    }

    fn record(&mut self, t: f64, state: &Matrix) {
        self.times.push(t);
        self.norms.push(state.frobenius_norm());
        if let Some(snaps) = self.snapshots.as_mut() {
            if self.accepted % self.stride == 0 {
                snaps.push(Snapshot {
                    t,
                    state: state.clone(),
                });
                if snaps.len() > MAX_SNAPSHOTS {
                    // thin to every other snapshot and double the stride
                    let mut idx = 0;
                    snaps.retain(|_| {
                        let keep = idx % 2 == 0;
                        idx += 1;
                        keep
                    });
                    self.stride *= 2;
                }
            }
            self.accepted += 1;
        }
    }

    fn finish(self) -> (Vec<f64>, Vec<f64>, Option<Vec<Snapshot>>) {
        (self.times, self.norms, self.snapshots)
    }
}

/// Pole-time estimate from the tail of a blowup trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupEstimate {
    pub estimated_time: f64,
    /// Time span of the samples used for the fit.
    pub window: (f64, f64),
    /// RMS residual of the straight-line fit of `1/‖X‖` against `t`.
    pub fit_residual: f64,
    pub pole_order_assumed: u32,
}

const FIT_SAMPLES: usize = 8;
const QUALIFYING_NORM: f64 = 1e3;

/// Extrapolates the blowup time from the last eight qualifying samples
/// (`‖X‖_F ≥ 1e3`) by fitting `1/‖X(t)‖` with a straight line and taking
/// its root, the simple-pole model suggested by the closed form's
/// `1/(T−t)` behavior.
pub fn estimate_blowup_time(traj: &Trajectory) -> Result<BlowupEstimate, IntegrateError> {
    if !matches!(traj.status, TrajectoryStatus::BlowupDetected { .. }) {
        return Err(IntegrateError::InsufficientSamples(
            "trajectory did not detect blowup".into(),
        ));
    }
    let qualifying: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(traj.frob_norms.iter())
        .filter(|(_, &norm)| norm >= QUALIFYING_NORM)
        .map(|(&t, &norm)| (t, 1.0 / norm))
        .collect();
    if qualifying.len() < FIT_SAMPLES {
        return Err(IntegrateError::InsufficientSamples(format!(
            "need {FIT_SAMPLES} samples with ‖X‖_F ≥ {QUALIFYING_NORM:.0e}, have {}",
            qualifying.len()
        )));
    }
    let tail = &qualifying[qualifying.len() - FIT_SAMPLES..];

    // least-squares line y = alpha + beta·t
    let m = tail.len() as f64;
    let sum_t: f64 = tail.iter().map(|(t, _)| t).sum();
    let sum_y: f64 = tail.iter().map(|(_, y)| y).sum();
    let mean_t = sum_t / m;
    let mean_y = sum_y / m;
    let sxx: f64 = tail.iter().map(|(t, _)| (t - mean_t).powi(2)).sum();
    let sxy: f64 = tail
        .iter()
        .map(|(t, y)| (t - mean_t) * (y - mean_y))
        .sum();
    if sxx == 0.0 || sxy == 0.0 {
        return Err(IntegrateError::InsufficientSamples(
            "degenerate sample window for the pole fit".into(),
        ));
    }
    let beta = sxy / sxx;
    let alpha = mean_y - beta * mean_t;
    let estimated_time = -alpha / beta;
    let fit_residual = (tail
        .iter()
        .map(|(t, y)| (y - (alpha + beta * t)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();

    let t_lo = tail.iter().map(|(t, _)| *t).fold(f64::INFINITY, f64::min);
    let t_hi = tail
        .iter()
        .map(|(t, _)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BlowupEstimate {
        estimated_time,
        window: (t_lo, t_hi),
        fit_residual,
        pole_order_assumed: 1,
    })
}

/// Integrates from 0 to each requested time and reports
/// `‖X_numeric(t) − X_exact(t)‖_F / (1 + ‖X_exact(t)‖_F)` against the
/// closed form. Only the right-hand sides covered by the closed form are
/// accepted, and `kind`'s multiplier must be the given `b`.
pub fn compare_exact_numeric(
    a: &Matrix,
    b: &Matrix,
    kind: &RhsKind,
    ts: &[f64],
    opts: &IntegrationOptions,
) -> Result<Vec<f64>, IntegrateError> {
    match kind {
        RhsKind::SquareXX | RhsKind::BXX { .. } | RhsKind::XBX { .. } | RhsKind::XXB { .. } => {}
        RhsKind::CommutatorBXX { .. } => {
            return Err(IntegrateError::NoClosedForm("dX/dt = [B,X]·X"))
        }
        RhsKind::NormXX { .. } => return Err(IntegrateError::NoClosedForm("dX/dt = |X|·X")),
    }
    let mut errors = Vec::with_capacity(ts.len());
    for &t in ts {
        let exact = closedform::exact_solution(a, b, t)?;
        let numeric = if t == 0.0 {
            a.clone()
        } else {
            let traj = integrate(kind, a, t, opts)?;
            if traj.status != TrajectoryStatus::Completed {
                return Err(IntegrateError::InvalidOptions(format!(
                    "integration to t = {t} ended with {:?} before the horizon",
                    traj.status
                )));
            }
            traj.final_state
        };
        let err = numeric.sub(&exact)?.frobenius_norm() / (1.0 + exact.frobenius_norm());
        errors.push(err);
    }
    Ok(errors)
}

/// Writes a trajectory as CSV. Columns are `t,frob_norm`, plus
/// `operator2_norm` for rows with a retained snapshot when requested.
pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory,
    include_operator2: bool,
    mut out: W,
) -> io::Result<()> {
    if include_operator2 {
        writeln!(out, "t,frob_norm,operator2_norm")?;
    } else {
        writeln!(out, "t,frob_norm")?;
    }
    let mut snapshots = traj
        .snapshots
        .as_deref()
        .unwrap_or(&[])
        .iter()
        .peekable();
    for (t, norm) in traj.times.iter().zip(traj.frob_norms.iter()) {
        if include_operator2 {
            let op2 = snapshots
                .peek()
                .filter(|snap| snap.t == *t)
                .map(|snap| linalg::norms(&snap.state).1);
            if op2.is_some() {
                snapshots.next();
            }
            match op2 {
                Some(v) => writeln!(out, "{t:.16e},{norm:.16e},{v:.16e}")?,
                None => writeln!(out, "{t:.16e},{norm:.16e},")?,
            }
        } else {
            writeln!(out, "{t:.16e},{norm:.16e}")?;
        }
    }
    Ok(())
}
