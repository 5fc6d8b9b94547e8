//! Random-matrix ensembles and Monte Carlo sweeps: how likely is finite-time
//! blowup in the initial condition, and do the spectral predictor and the
//! integrator agree trial by trial.
//!
//! Every trial is a pure function of `(seed, index)`, so sweeps are
//! order-independent and may run in parallel while reproducing bit-identical
//! statistics.

use crate::closedform::{self, Direction, Verdict};
use crate::integrator::{
    estimate_blowup_time, integrate, IntegrationOptions, RhsKind, TrajectoryStatus,
};
use crate::linalg::{qr, Matrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::io::{self, Write};
use thiserror::Error;

/// Family of random initial conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleTag {
    /// i.i.d. standard normal entries.
    Ginibre,
    /// Symmetrized Ginibre `(M+Mᵀ)/2`.
    Goe,
    /// Antisymmetrized Ginibre `(M−Mᵀ)/2`.
    SkewSymmetric,
    /// `(Q·D₁·Qᵀ, Q·D₂·Qᵀ)` with a Haar-ish orthogonal `Q` and normal
    /// diagonals: a commuting symmetric pair.
    CommutingSymmetricPair,
    /// Two independent normal diagonal matrices.
    DiagonalPair,
}

impl EnsembleTag {
    pub fn yields_pair(self) -> bool {
        matches!(
            self,
            EnsembleTag::CommutingSymmetricPair | EnsembleTag::DiagonalPair
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleKind {
    pub tag: EnsembleTag,
    pub n: usize,
    /// Entry standard deviation.
    pub scale: f64,
}

impl EnsembleKind {
    pub fn new(tag: EnsembleTag, n: usize) -> Self {
        Self { tag, n, scale: 1.0 }
    }
}

/// What to use for the multiplier `B` in a sweep trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BPolicy {
    Identity,
    /// Use the sampled pair's second matrix; requires a pair ensemble.
    SampledPair,
}

/// A sampled initial condition: one matrix, or a commuting `(A, B)` pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Single(Matrix),
    Pair(Matrix, Matrix),
}

impl Sample {
    pub fn a(&self) -> &Matrix {
        match self {
            Sample::Single(a) | Sample::Pair(a, _) => a,
        }
    }
}

fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    // counter-style key: each (seed, index) owns an independent stream
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&0x6d61_7472_6978_6f64_u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn ginibre(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let g: f64 = rng.sample(StandardNormal);
            m.set(i, j, scale * g);
        }
    }
    m
}

fn normal_diagonal(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Matrix {
    let diag: Vec<f64> = (0..n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::diagonal(&diag)
}

/// Orthogonal factor of a Ginibre sample, sign-fixed so the triangular
/// factor has a positive diagonal.
fn haar_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = ginibre(rng, n, 1.0);
    let (mut q, r) = qr(&g);
    for j in 0..n {
        if r.get(j, j) < 0.0 {
            for i in 0..n {
                let v = -q.get(i, j);
                q.set(i, j, v);
            }
        }
    }
    q
}

/// Draws trial `index` of the ensemble. Bit-identical for identical
/// `(kind, seed, index)` triples.
pub fn sample_ensemble(kind: &EnsembleKind, seed: u64, index: u64) -> Sample {
    let mut rng = trial_rng(seed, index);
    let n = kind.n;
    match kind.tag {
        EnsembleTag::Ginibre => Sample::Single(ginibre(&mut rng, n, kind.scale)),
        EnsembleTag::Goe => {
            let m = ginibre(&mut rng, n, kind.scale);
            Sample::Single(Matrix::from_fn(n, |i, j| {
                0.5 * (m.get(i, j) + m.get(j, i))
            }))
        }
        EnsembleTag::SkewSymmetric => {
            let m = ginibre(&mut rng, n, kind.scale);
            Sample::Single(Matrix::from_fn(n, |i, j| {
                0.5 * (m.get(i, j) - m.get(j, i))
            }))
        }
        EnsembleTag::CommutingSymmetricPair => {
            let q = haar_orthogonal(&mut rng, n);
            let d1 = normal_diagonal(&mut rng, n, kind.scale);
            let d2 = normal_diagonal(&mut rng, n, kind.scale);
            let qt = q.transpose();
            let a = q.matmul(&d1).unwrap().matmul(&qt).unwrap();
            let b = q.matmul(&d2).unwrap().matmul(&qt).unwrap();
            Sample::Pair(a, b)
        }
        EnsembleTag::DiagonalPair => Sample::Pair(
            normal_diagonal(&mut rng, n, kind.scale),
            normal_diagonal(&mut rng, n, kind.scale),
        ),
    }
}

/// One row of a sweep: per-trial verdicts and times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: u64,
    pub blowup_forward: bool,
    pub blowup_backward: bool,
    /// Predicted forward blowup time, when the forward verdict is blowup.
    pub t_forward: Option<f64>,
    /// Integrator pole estimate (agreement sweeps only).
    pub t_estimate: Option<f64>,
    /// Predictor/integrator agreement (agreement sweeps only).
    pub agree: Option<bool>,
    /// The eigensolver failed on this trial.
    pub solver_failure: bool,
}

/// Aggregate statistics of a Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepStats {
    pub trials: u64,
    /// Fraction of (solver-clean) trials predicted to blow up forward.
    pub blowup_fraction_forward: f64,
    /// Fraction predicted to blow up in at least one time direction.
    pub blowup_fraction_either: f64,
    /// (q10, q50, q90) of the finite forward blowup times; present only
    /// with at least ten observations.
    pub blowup_time_quantiles: Option<(f64, f64, f64)>,
    pub seed: u64,
    /// Trials on which prediction and integration agreed (agreement sweeps).
    pub prediction_integration_agreements: u64,
    /// Trials dropped because an eigensolver did not converge.
    pub solver_failures: u64,
}

/// A sweep's aggregate plus its per-trial rows (for CSV export).
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub stats: SweepStats,
    pub records: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("the {0:?} ensemble yields single matrices; the sampled-pair B policy needs a pair ensemble")]
    PolicyNeedsPair(EnsembleTag),
    #[error("trials must be at least 1")]
    NoTrials,
}

/// Predicts blowup in both directions for each sampled trial and aggregates
/// the fractions and forward-time quantiles.
pub fn blowup_probability_sweep(
    kind: &EnsembleKind,
    b_policy: BPolicy,
    trials: u64,
    seed: u64,
) -> Result<SweepStats, SweepError> {
    probability_sweep_run(kind, b_policy, trials, seed).map(|run| run.stats)
}

/// [`blowup_probability_sweep`] with the per-trial records retained.
pub fn probability_sweep_run(
    kind: &EnsembleKind,
    b_policy: BPolicy,
    trials: u64,
    seed: u64,
) -> Result<SweepRun, SweepError> {
    if trials == 0 {
        return Err(SweepError::NoTrials);
    }
    if b_policy == BPolicy::SampledPair && !kind.tag.yields_pair() {
        return Err(SweepError::PolicyNeedsPair(kind.tag));
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|index| probability_trial(kind, b_policy, seed, index))
        .collect();
    Ok(aggregate(records, trials, seed))
}

fn probability_trial(
    kind: &EnsembleKind,
    b_policy: BPolicy,
    seed: u64,
    index: u64,
) -> TrialRecord {
    let sample = sample_ensemble(kind, seed, index);
    let (a, b) = match (&sample, b_policy) {
        (Sample::Pair(a, b), BPolicy::SampledPair) => (a.clone(), b.clone()),
        _ => (sample.a().clone(), Matrix::identity(kind.n)),
    };
    let forward = closedform::predict_blowup(&a, &b, Direction::Forward);
    let backward = closedform::predict_blowup(&a, &b, Direction::Backward);
    match (forward, backward) {
        (Ok(fwd), Ok(bwd)) => TrialRecord {
            index,
            blowup_forward: fwd.verdict == Verdict::Blowup,
            blowup_backward: bwd.verdict == Verdict::Blowup,
            t_forward: fwd.blowup_time,
            t_estimate: None,
            agree: None,
            solver_failure: false,
        },
        _ => TrialRecord {
            index,
            blowup_forward: false,
            blowup_backward: false,
            t_forward: None,
            t_estimate: None,
            agree: None,
            solver_failure: true,
        },
    }
}

/// Samples commuting symmetric pairs, predicts the forward flow, and
/// checks the integrator against the prediction: blowup verdicts must be
/// confirmed by a pole estimate within 2%, eternal verdicts by reaching the
/// horizon `10·(1 + 1/‖AB‖_F)`.
pub fn agreement_sweep(trials: u64, n: usize, seed: u64) -> Result<SweepStats, SweepError> {
    agreement_sweep_run(trials, n, seed).map(|run| run.stats)
}

/// [`agreement_sweep`] with the per-trial records retained.
pub fn agreement_sweep_run(trials: u64, n: usize, seed: u64) -> Result<SweepRun, SweepError> {
    if trials == 0 {
        return Err(SweepError::NoTrials);
    }
    let kind = EnsembleKind::new(EnsembleTag::CommutingSymmetricPair, n);
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|index| agreement_trial(&kind, seed, index))
        .collect();
    Ok(aggregate(records, trials, seed))
}

/// Relative mismatch allowed between predicted pole and integrator estimate.
pub const AGREEMENT_REL_TOL: f64 = 0.02;

fn agreement_trial(kind: &EnsembleKind, seed: u64, index: u64) -> TrialRecord {
    let (a, b) = match sample_ensemble(kind, seed, index) {
        Sample::Pair(a, b) => (a, b),
        Sample::Single(a) => {
            let id = Matrix::identity(a.n());
            (a, id)
        }
    };
    let forward = closedform::predict_blowup(&a, &b, Direction::Forward);
    let backward = closedform::predict_blowup(&a, &b, Direction::Backward);
    let (fwd, bwd) = match (forward, backward) {
        (Ok(f), Ok(bk)) => (f, bk),
        _ => {
            return TrialRecord {
                index,
                blowup_forward: false,
                blowup_backward: false,
                t_forward: None,
                t_estimate: None,
                agree: None,
                solver_failure: true,
            }
        }
    };
    let rhs = RhsKind::BXX { b: b.clone() };
    let opts = IntegrationOptions::default();
    let (t_estimate, agree) = match (fwd.verdict, fwd.blowup_time) {
        (Verdict::Blowup, Some(t_predicted)) => {
            let traj = integrate(&rhs, &a, 1.5 * t_predicted, &opts);
            match traj {
                Ok(traj) if matches!(traj.status, TrajectoryStatus::BlowupDetected { .. }) => {
                    match estimate_blowup_time(&traj) {
                        Ok(est) => {
                            let rel = (est.estimated_time - t_predicted).abs() / t_predicted;
                            (Some(est.estimated_time), Some(rel <= AGREEMENT_REL_TOL))
                        }
                        Err(_) => (None, Some(false)),
                    }
                }
                _ => (None, Some(false)),
            }
        }
        _ => {
            // eternal: must reach a horizon scaled by the inverse energy of AB
            let ab_norm = a.matmul(&b).map(|m| m.frobenius_norm()).unwrap_or(0.0);
            let horizon = 10.0 * (1.0 + 1.0 / ab_norm.max(1e-6));
            let completed = integrate(&rhs, &a, horizon, &opts)
                .map(|traj| traj.status == TrajectoryStatus::Completed)
                .unwrap_or(false);
            (None, Some(completed))
        }
    };
    TrialRecord {
        index,
        blowup_forward: fwd.verdict == Verdict::Blowup,
        blowup_backward: bwd.verdict == Verdict::Blowup,
        t_forward: fwd.blowup_time,
        t_estimate,
        agree,
        solver_failure: false,
    }
}

/// Order-independent aggregation: every statistic is a function of the
/// record multiset, and records come back indexed.
fn aggregate(records: Vec<TrialRecord>, trials: u64, seed: u64) -> SweepRun {
    let solver_failures = records.iter().filter(|r| r.solver_failure).count() as u64;
    let clean = (trials - solver_failures).max(1) as f64;
    let forward = records.iter().filter(|r| r.blowup_forward).count() as f64;
    let either = records
        .iter()
        .filter(|r| r.blowup_forward || r.blowup_backward)
        .count() as f64;
    let agreements = records
        .iter()
        .filter(|r| r.agree == Some(true))
        .count() as u64;

    let mut finite_times: Vec<f64> = records.iter().filter_map(|r| r.t_forward).collect();
    finite_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantiles = if finite_times.len() >= 10 {
        Some((
            quantile(&finite_times, 0.10),
            quantile(&finite_times, 0.50),
            quantile(&finite_times, 0.90),
        ))
    } else {
        None
    };

    SweepRun {
        stats: SweepStats {
            trials,
            blowup_fraction_forward: forward / clean,
            blowup_fraction_either: either / clean,
            blowup_time_quantiles: quantiles,
            seed,
            prediction_integration_agreements: agreements,
            solver_failures,
        },
        records,
    }
}

/// Empirical quantile with linear interpolation on the sorted sample.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Config echo included in every exported sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub mode: &'static str,
    pub ensemble: EnsembleTag,
    pub n: usize,
    pub scale: f64,
    pub b_policy: Option<BPolicy>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepReport<'a> {
    config: &'a SweepConfig,
    stats: &'a SweepStats,
}

/// Serializes a sweep (stats plus config echo) as pretty JSON. The output
/// is byte-identical across runs and thread schedules for identical inputs.
pub fn sweep_json(config: &SweepConfig, stats: &SweepStats) -> String {
    let mut text = serde_json::to_string_pretty(&SweepReport { config, stats })
        .expect("sweep stats serialize");
    text.push('\n');
    text
}

/// Writes per-trial rows as CSV:
/// `index,verdict_fwd,verdict_bwd,T_fwd,T_est,agree`.
pub fn write_trials_csv<W: Write>(records: &[TrialRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "index,verdict_fwd,verdict_bwd,T_fwd,T_est,agree")?;
    for r in records {
        let verdict = |b: bool| if b { "blowup" } else { "eternal" };
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let agree = r
            .agree
            .map(|a| if a { "1" } else { "0" })
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.index,
            verdict(r.blowup_forward),
            verdict(r.blowup_backward),
            opt(r.t_forward),
            opt(r.t_estimate),
            agree,
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::commutes;

    #[test]
    fn sampling_is_deterministic() {
        let kind = EnsembleKind::new(EnsembleTag::Ginibre, 4);
        let a = sample_ensemble(&kind, 7, 3);
        let b = sample_ensemble(&kind, 7, 3);
        assert_eq!(a, b);
        let c = sample_ensemble(&kind, 7, 4);
        assert_ne!(a, c);
        let d = sample_ensemble(&kind, 8, 3);
        assert_ne!(a, d);
    }

    #[test]
    fn goe_samples_are_symmetric() {
        let kind = EnsembleKind::new(EnsembleTag::Goe, 6);
        for index in 0..5 {
            let Sample::Single(m) = sample_ensemble(&kind, 11, index) else {
                panic!("single ensemble")
            };
            assert!(m.symmetry_residual() <= 1e-15);
        }
    }

    #[test]
    fn skew_samples_are_antisymmetric() {
        let kind = EnsembleKind::new(EnsembleTag::SkewSymmetric, 5);
        let Sample::Single(m) = sample_ensemble(&kind, 2, 0) else {
            panic!("single ensemble")
        };
        let sum = m.add(&m.transpose()).unwrap().frobenius_norm();
        assert!(sum <= 1e-15);
    }

    #[test]
    fn commuting_pair_commutes() {
        let kind = EnsembleKind::new(EnsembleTag::CommutingSymmetricPair, 6);
        for index in 0..10 {
            let Sample::Pair(a, b) = sample_ensemble(&kind, 5, index) else {
                panic!("pair ensemble")
            };
            let check = commutes(&a, &b).unwrap();
            assert!(check.commutes, "index {index}: {check:?}");
            assert!(a.is_symmetric_within(1e-12));
            assert!(b.is_symmetric_within(1e-12));
        }
    }

    #[test]
    fn odd_dimension_always_blows_up_somewhere() {
        let kind = EnsembleKind::new(EnsembleTag::Ginibre, 3);
        let stats = blowup_probability_sweep(&kind, BPolicy::Identity, 500, 42).unwrap();
        assert_eq!(stats.blowup_fraction_either, 1.0);
        assert_eq!(stats.solver_failures, 0);
    }

    #[test]
    fn goe_always_blows_up_somewhere() {
        let kind = EnsembleKind::new(EnsembleTag::Goe, 4);
        let stats = blowup_probability_sweep(&kind, BPolicy::Identity, 500, 9).unwrap();
        assert_eq!(stats.blowup_fraction_either, 1.0);
    }

    #[test]
    fn forward_fraction_never_exceeds_either() {
        for tag in [
            EnsembleTag::Ginibre,
            EnsembleTag::Goe,
            EnsembleTag::SkewSymmetric,
            EnsembleTag::DiagonalPair,
        ] {
            let kind = EnsembleKind::new(tag, 4);
            let stats = blowup_probability_sweep(&kind, BPolicy::Identity, 200, 3).unwrap();
            assert!(stats.blowup_fraction_forward <= stats.blowup_fraction_either);
        }
    }

    // Monte Carlo oracle: a 10⁷-trial pre-run of this sweep froze the
    // reference either-direction fraction 0.70706 for 2×2 Ginibre (the
    // probability that both eigenvalues are real).
    #[test]
    fn ginibre_two_by_two_real_eigenvalue_probability() {
        let kind = EnsembleKind::new(EnsembleTag::Ginibre, 2);
        let stats = blowup_probability_sweep(&kind, BPolicy::Identity, 1_000_000, 2024).unwrap();
        assert!(
            (stats.blowup_fraction_either - 0.70706).abs() <= 0.002,
            "fraction {}",
            stats.blowup_fraction_either
        );
    }

    #[test]
    fn sampled_pair_policy_requires_pair_ensemble() {
        let kind = EnsembleKind::new(EnsembleTag::Ginibre, 3);
        assert!(matches!(
            blowup_probability_sweep(&kind, BPolicy::SampledPair, 10, 0),
            Err(SweepError::PolicyNeedsPair(EnsembleTag::Ginibre))
        ));
    }

    #[test]
    fn agreement_sweep_small_run_agrees() {
        let run = agreement_sweep_run(10, 4, 77).unwrap();
        assert_eq!(run.stats.prediction_integration_agreements, 10);
        assert_eq!(run.stats.solver_failures, 0);
        for r in &run.records {
            assert_eq!(r.agree, Some(true));
            if r.blowup_forward {
                let t = r.t_forward.unwrap();
                let est = r.t_estimate.unwrap();
                assert!((est - t).abs() / t <= AGREEMENT_REL_TOL);
            }
        }
    }

    #[test]
    fn degenerate_zero_initial_condition_is_eternal_and_completes() {
        let a = Matrix::zeros(3);
        let b = Matrix::diagonal(&[1.0, -2.0, 0.5]);
        let fwd = closedform::predict_blowup(&a, &b, Direction::Forward).unwrap();
        assert_eq!(fwd.verdict, Verdict::Eternal);
        let traj = integrate(
            &RhsKind::BXX { b },
            &a,
            10.0,
            &IntegrationOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        assert_eq!(traj.final_state.frobenius_norm(), 0.0);
    }

    #[test]
    fn scaled_pair_with_unit_top_eigenvalue() {
        // scale a sampled pair so λ_max(AB) = 1 exactly: predicted T = 1
        let kind = EnsembleKind::new(EnsembleTag::CommutingSymmetricPair, 4);
        let Sample::Pair(a, b) = sample_ensemble(&kind, 31, 0) else {
            panic!("pair ensemble")
        };
        let ab = a.matmul(&b).unwrap();
        let sym = Matrix::from_fn(4, |i, j| 0.5 * (ab.get(i, j) + ab.get(j, i)));
        let (lambda_max, _) = crate::linalg::rayleigh_max(&sym).unwrap();
        // rescale (flipping sign if needed) so λ_max(AB) = 1 exactly
        let a = if lambda_max > 0.0 {
            a.scaled(1.0 / lambda_max)
        } else {
            let (neg_min, _) = crate::linalg::rayleigh_max(&sym.scaled(-1.0)).unwrap();
            a.scaled(-1.0 / neg_min)
        };
        let report = closedform::predict_blowup(&a, &b, Direction::Forward).unwrap();
        assert_eq!(report.verdict, Verdict::Blowup);
        let t = report.blowup_time.unwrap();
        assert!((t - 1.0).abs() <= 1e-10, "T = {t}");
        let traj = integrate(
            &RhsKind::BXX { b },
            &a,
            1.5,
            &IntegrationOptions::default(),
        )
        .unwrap();
        let est = estimate_blowup_time(&traj).unwrap().estimated_time.abs();
        assert!((0.98..=1.02).contains(&est), "estimate {est}");
    }

    #[test]
    fn sweep_json_is_reproducible_across_thread_counts() {
        let kind = EnsembleKind::new(EnsembleTag::Ginibre, 3);
        let config = SweepConfig {
            mode: "probability",
            ensemble: kind.tag,
            n: kind.n,
            scale: kind.scale,
            b_policy: Some(BPolicy::Identity),
            trials: 200,
            seed: 123,
        };
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| blowup_probability_sweep(&kind, BPolicy::Identity, 200, 123).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| blowup_probability_sweep(&kind, BPolicy::Identity, 200, 123).unwrap());
        assert_eq!(sweep_json(&config, &single), sweep_json(&config, &multi));
    }

    #[test]
    fn quantiles_need_ten_observations() {
        let kind = EnsembleKind::new(EnsembleTag::Goe, 3);
        let few = blowup_probability_sweep(&kind, BPolicy::Identity, 5, 1).unwrap();
        // 5 trials can yield at most 5 finite forward times
        assert!(few.blowup_time_quantiles.is_none());
        let many = blowup_probability_sweep(&kind, BPolicy::Identity, 200, 1).unwrap();
        if let Some((q10, q50, q90)) = many.blowup_time_quantiles {
            assert!(q10 <= q50 && q50 <= q90);
            assert!(q10 > 0.0);
        }
    }

    #[test]
    fn trials_csv_has_expected_shape() {
        let run = probability_sweep_run(
            &EnsembleKind::new(EnsembleTag::DiagonalPair, 2),
            BPolicy::SampledPair,
            4,
            6,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&run.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,verdict_fwd,verdict_bwd,T_fwd,T_est,agree");
        assert_eq!(lines.len(), 5);
        for (i, line) in lines[1..].iter().enumerate() {
            assert!(line.starts_with(&format!("{i},")));
        }
    }
}
