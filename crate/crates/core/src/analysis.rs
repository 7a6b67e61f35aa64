//! Steady-state estimation-error analysis of a designed estimator running on
//! a (possibly perturbed) true plant.
//!
//! Each filter is appended to the plant to form the augmented system
//! `Ā = [[A_true, 0], [G C, F]]`, `B̄ = diag(B, G)`, whose stationary
//! covariance `[[Σ, M], [Mᵀ, N]]` gives the filter error `Σ − M − Mᵀ + N`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{design_estimator, EstimatorDesign, EstimatorKind, FilterDesign, SmootherDesign};
use crate::matops::{solve_lyapunov, Mat};
use crate::models::{apply_uncertainty, compute_r_sq, measurement_row, ProcessModel, SqueezingConfig, UncertaintySpec};

/// Stationary second moments of plant and one filter.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedStats {
    /// `E[x xᵀ]`
    pub sigma: Mat,
    /// `E[x x̂ᵀ]`
    pub m: Mat,
    /// `E[x̂ x̂ᵀ]`
    pub n: Mat,
    /// `E[(x − x̂)(x − x̂)ᵀ]`
    pub error: Mat,
}

/// Stationary error statistics of filter `f` on the plant `(a_true, b)`.
pub fn filter_error_cov(a_true: &Mat, b: &Mat, f: &FilterDesign) -> Result<AugmentedStats> {
    let n = a_true.rows();
    if f.dynamics.rows() != n || b.rows() != n {
        return Err(Error::Shape("filter and plant dimensions differ".into()));
    }
    let (p, q) = (b.cols(), f.gain.cols());
    let a_bar = Mat::from_blocks(a_true, &Mat::zeros(n, n), &f.plant_coupling(), &f.dynamics)?;
    let b_bar = Mat::from_blocks(b, &Mat::zeros(n, q), &Mat::zeros(n, p), &f.gain)?;
    let cov = solve_lyapunov(&a_bar, &(&b_bar * &b_bar.transpose()))?;
    let sigma = cov.block(0, 0, n, n);
    let m = cov.block(0, n, n, n);
    let nn = cov.block(n, n, n, n);
    let error = (&(&(&sigma - &m) - &m.transpose()) + &nn).symmetrize();
    Ok(AugmentedStats { sigma, m, n: nn, error })
}

/// Forward/backward error cross-covariance `E[e_f e_bᵀ]`.
///
/// The two filters see disjoint noise records, so they are conditionally
/// independent given the current state:
/// `Σ − M_fᵀ − M_b + M_fᵀ Σ⁻¹ M_b`.
pub fn cross_cov(sigma: &Mat, m_f: &Mat, m_b: &Mat) -> Result<Mat> {
    let sigma_inv = sigma.try_inverse().map_err(|_| Error::SingularSigma)?;
    if !sigma.is_positive_definite() {
        return Err(Error::SingularSigma);
    }
    let mft = m_f.transpose();
    Ok(&(&(sigma - &mft) - m_b) + &(&(&mft * &sigma_inv) * m_b))
}

/// How the robust smoother weights are applied to the filter errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CombineMode {
    /// Scalar weights from the (1,1) entries of `X` and `Y` applied to the
    /// phase errors.
    #[default]
    ScalarFirst,
    /// Full matrix weights `(X+Y)⁻¹X`, `(X+Y)⁻¹Y`, then the (1,1) entry.
    MatrixFirst,
}

impl CombineMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CombineMode::ScalarFirst => "scalar-first",
            CombineMode::MatrixFirst => "matrix-first",
        }
    }
}

impl std::str::FromStr for CombineMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar-first" => Ok(CombineMode::ScalarFirst),
            "matrix-first" => Ok(CombineMode::MatrixFirst),
            other => Err(Error::Config(format!("unknown combine mode '{other}'"))),
        }
    }
}

/// Minimum-variance scalar combination of two correlated estimates.
pub fn optimal_smoother_error(sf: f64, sb: f64, sfb: f64) -> Result<f64> {
    let den = sf + sb - 2.0 * sfb;
    if den.is_nan() || den <= 1e-14 * (sf.abs() + sb.abs()) {
        return Err(Error::DegenerateDenominator(den));
    }
    Ok((sf * sb - sfb * sfb) / den)
}

/// Phase error of the robust combination.
pub fn combine_smoother(s: &SmootherDesign, ef: &Mat, eb: &Mat, efb: &Mat, mode: CombineMode) -> f64 {
    match mode {
        CombineMode::ScalarFirst => {
            let (k1, k2) = (s.scalar_k1, s.scalar_k2);
            k1 * k1 * ef.get(0, 0) + k2 * k2 * eb.get(0, 0) + 2.0 * k1 * k2 * efb.get(0, 0)
        }
        CombineMode::MatrixFirst => {
            let (k1, k2) = (&s.k1, &s.k2);
            let cross = &(k1 * efb) * &k2.transpose();
            let total = &(&(&(k1 * ef) * &k1.transpose()) + &(&(k2 * eb) * &k2.transpose()))
                + &(&cross + &cross.transpose());
            total.get(0, 0)
        }
    }
}

/// Controls for [`evaluate_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub mode: CombineMode,
    /// Relative tolerance on successive forward-error iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// Use this `R̄` directly instead of the self-consistent value.
    pub fixed_r_sq: Option<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mode: CombineMode::ScalarFirst,
            tol: 1e-6,
            max_iter: 200,
            fixed_r_sq: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub kind: EstimatorKind,
    pub delta: f64,
    /// Smoothed phase mean-square error (rad²).
    pub smoother: f64,
    pub forward: f64,
    pub backward: f64,
    pub cross: f64,
    /// Effective measurement noise the estimator was designed for.
    pub r_sq: f64,
    pub iterations: usize,
    pub design: EstimatorDesign,
}

/// Errors of an estimator designed for measurement row `c` on the plant
/// perturbed by `delta`.
pub fn evaluate_design(
    design: &EstimatorDesign,
    m: &ProcessModel,
    a_true: &Mat,
    mode: CombineMode,
) -> Result<(f64, f64, f64, f64)> {
    let fwd = filter_error_cov(a_true, &m.b, &design.forward)?;
    let bwd = filter_error_cov(a_true, &m.b, &design.backward)?;
    let efb = cross_cov(&fwd.sigma, &fwd.m, &bwd.m)?;
    let (sf, sb, sfb) = (fwd.error.get(0, 0), bwd.error.get(0, 0), efb.get(0, 0));
    let s = match design.kind {
        EstimatorKind::Optimal => optimal_smoother_error(sf, sb, sfb)?,
        EstimatorKind::Robust => combine_smoother(&design.smoother, &fwd.error, &bwd.error, &efb, mode),
    };
    Ok((s, sf, sb, sfb))
}

fn forward_error(design: &EstimatorDesign, m: &ProcessModel, a_true: &Mat) -> Result<f64> {
    Ok(filter_error_cov(a_true, &m.b, &design.forward)?.error.get(0, 0))
}

/// Self-consistent evaluation: the squeezing noise seen by the estimator
/// depends on its own forward phase error, which in turn depends on the
/// noise it was designed for.
pub fn evaluate_error(
    kind: EstimatorKind,
    m: &ProcessModel,
    u: &UncertaintySpec,
    sq: &SqueezingConfig,
    delta: f64,
    opts: &EvalOptions,
) -> Result<ErrorReport> {
    let a_true = apply_uncertainty(m, u, delta)?;
    let design_at = |r_sq: f64| -> Result<EstimatorDesign> {
        let c = measurement_row(sq.alpha_sq, r_sq, m.n())?;
        design_estimator(kind, m, u, &c)
    };

    let (r_sq, iterations) = match opts.fixed_r_sq {
        Some(r) => (r, 0),
        None => {
            let mut sf = 0.0;
            let mut last_sign = 0.0;
            let mut alternations = 0;
            let mut damping = 1.0;
            let mut done = None;
            for it in 1..=opts.max_iter {
                let r = compute_r_sq(sf, sq.r_m, sq.r_p)?;
                let next = forward_error(&design_at(r)?, m, &a_true)?;
                if !next.is_finite() {
                    return Err(Error::FixedPointDiverged(format!("non-finite iterate at step {it}")));
                }
                let step = next - sf;
                if step.abs() <= opts.tol * next.abs().max(opts.tol) {
                    done = Some((compute_r_sq(next, sq.r_m, sq.r_p)?, it));
                    break;
                }
                let sign = step.signum();
                if sign == -last_sign {
                    alternations += 1;
                    if alternations >= 4 {
                        damping *= 0.5;
                        alternations = 0;
                        log::debug!("fixed point oscillating, damping set to {damping}");
                    }
                } else {
                    alternations = 0;
                }
                last_sign = sign;
                sf += damping * step;
            }
            done.ok_or_else(|| {
                Error::FixedPointDiverged(format!("no convergence in {} iterations", opts.max_iter))
            })?
        }
    };

    let design = design_at(r_sq)?;
    let (smoother, forward, backward, cross) = evaluate_design(&design, m, &a_true, opts.mode)?;
    Ok(ErrorReport {
        kind,
        delta,
        smoother,
        forward,
        backward,
        cross,
        r_sq,
        iterations,
        design,
    })
}

/// `n` equally spaced points on `[−1, 1]`.
pub fn delta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|i| {
                let d = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                // Land exactly on 0 and the end points.
                if d.abs() < 1e-15 {
                    0.0
                } else {
                    d.clamp(-1.0, 1.0)
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct WorstCase {
    pub delta_star: f64,
    pub report: ErrorReport,
    /// Smoother error at every grid point, in grid order.
    pub curve: Vec<(f64, f64)>,
}

/// Largest smoother error over `grid`; ties go to the smallest `|δ|`, then
/// to the earlier grid point.
pub fn worst_case_error(
    kind: EstimatorKind,
    m: &ProcessModel,
    u: &UncertaintySpec,
    sq: &SqueezingConfig,
    grid: &[f64],
    opts: &EvalOptions,
) -> Result<WorstCase> {
    if grid.is_empty() {
        return Err(Error::InvalidParam("empty uncertainty grid".into()));
    }
    let reports: Vec<Result<ErrorReport>> = grid
        .par_iter()
        .map(|&d| evaluate_error(kind, m, u, sq, d, opts))
        .collect();
    let mut best: Option<ErrorReport> = None;
    let mut curve = Vec::with_capacity(grid.len());
    for r in reports {
        let r = r?;
        curve.push((r.delta, r.smoother));
        let better = match &best {
            None => true,
            Some(b) => r.smoother > b.smoother || (r.smoother == b.smoother && r.delta.abs() < b.delta.abs()),
        };
        if better {
            best = Some(r);
        }
    }
    let report = best.expect("grid is non-empty");
    Ok(WorstCase {
        delta_star: report.delta,
        report,
        curve,
    })
}
