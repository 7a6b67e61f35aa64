//! Steady-state forward/backward filter designs (Kalman and robust) and the
//! rules that combine them into a fixed-interval smoother.
//!
//! Every filter is stored in its forward-time statistical representation:
//! the estimate obeys `x̂̇ = F x̂ + G θ` with `θ = C x + w`. For the backward
//! filters this is the reversed-time recursion run on the stationary
//! output, whose statistics match the forward-time record.
//!
//! Robust filters are stored in estimate coordinates. The forward state
//! `η` with `η̇ = −(A + W X)ᵀ η + Cᵀ θ` gives the estimate `X⁻¹ η`, so
//! `F = X⁻¹(−(A + W X)ᵀ)X` and `G = X⁻¹ Cᵀ`; the backward state is handled
//! the same way with `Y` and `(A − W Y)ᵀ`.

use crate::error::{Error, Result};
use crate::matops::{solve_filter_are, solve_robust_are, Branch, Mat};
use crate::models::{ProcessModel, UncertaintySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Optimal,
    Robust,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Optimal => "optimal",
            EstimatorKind::Robust => "robust",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterDesign {
    /// Estimate dynamics `F` (1/s).
    pub dynamics: Mat,
    /// Gain applied to the scaled measurement θ.
    pub gain: Mat,
    /// `P_f`/`P_b` for Kalman filters, `X`/`Y` for robust ones.
    pub covariance: Mat,
    /// Measurement row the filter was designed for.
    pub measurement: Mat,
    pub direction: Direction,
    pub kind: EstimatorKind,
}

impl FilterDesign {
    /// Block coupling the plant state into the estimate, `G C`.
    pub fn plant_coupling(&self) -> Mat {
        &self.gain * &self.measurement
    }

    /// Robust filters only: the information-state dynamics
    /// `−(A + W X)ᵀ` (forward) or `(A − W Y)ᵀ` (backward).
    pub fn information_dynamics(&self) -> Option<Mat> {
        match self.kind {
            EstimatorKind::Optimal => None,
            EstimatorKind::Robust => {
                let inv = self.covariance.try_inverse().ok()?;
                Some(&(&self.covariance * &self.dynamics) * &inv)
            }
        }
    }
}

/// Smoother combination weights `x̂ = k₁ x̂_f + k₂ x̂_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherDesign {
    pub k1: Mat,
    pub k2: Mat,
    /// Weights built from the (1,1) entries only.
    pub scalar_k1: f64,
    pub scalar_k2: f64,
    pub kind: EstimatorKind,
}

impl SmootherDesign {
    /// Robust ellipsoid-centre weights `k₁ = (X+Y)⁻¹X`, `k₂ = (X+Y)⁻¹Y`.
    pub fn robust(x: &Mat, y: &Mat) -> Result<Self> {
        let sum = x + y;
        let k1 = sum.solve(x)?;
        let k2 = sum.solve(y)?;
        let (x11, y11) = (x.get(0, 0), y.get(0, 0));
        Ok(SmootherDesign {
            k1,
            k2,
            scalar_k1: x11 / (x11 + y11),
            scalar_k2: y11 / (x11 + y11),
            kind: EstimatorKind::Robust,
        })
    }

    /// Information-weighted Kalman combination `P_s P_f⁻¹`, `P_s P_b⁻¹`.
    pub fn optimal(p_f: &Mat, p_b: &Mat) -> Result<Self> {
        let p_s = optimal_smoother_cov(p_f, p_b)?;
        let k1 = &p_s * &p_f.try_inverse()?;
        let k2 = &p_s * &p_b.try_inverse()?;
        let (f, b) = (p_f.get(0, 0), p_b.get(0, 0));
        Ok(SmootherDesign {
            k1,
            k2,
            scalar_k1: b / (f + b),
            scalar_k2: f / (f + b),
            kind: EstimatorKind::Optimal,
        })
    }
}

/// Both filters plus the smoother weights of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorDesign {
    pub forward: FilterDesign,
    pub backward: FilterDesign,
    pub smoother: SmootherDesign,
    pub kind: EstimatorKind,
}

fn check_measurement(m: &ProcessModel, c: &Mat) -> Result<()> {
    if c.rows() != 1 || c.cols() != m.n() {
        return Err(Error::Shape(format!(
            "measurement row is {}x{}, expected 1x{}",
            c.rows(),
            c.cols(),
            m.n()
        )));
    }
    Ok(())
}

/// Forward and backward steady-state Kalman filters for the nominal model
/// with unit noise intensities. The backward filter is the forward design
/// with `A, B → −A, −B`.
pub fn design_optimal_filters(m: &ProcessModel, c: &Mat) -> Result<(FilterDesign, FilterDesign)> {
    check_measurement(m, c)?;
    let one = Mat::scalar(1.0);
    let p_f = solve_filter_are(&m.a, &m.b, c, &one, &one)?;
    let p_b = solve_filter_are(&(-&m.a), &(-&m.b), c, &one, &one)?;
    let k_f = &p_f * &c.transpose();
    let k_b = &p_b * &c.transpose();
    let fwd = FilterDesign {
        dynamics: &m.a - &(&k_f * c),
        gain: k_f,
        covariance: p_f,
        measurement: c.clone(),
        direction: Direction::Forward,
        kind: EstimatorKind::Optimal,
    };
    let bwd = FilterDesign {
        dynamics: &(-&m.a) - &(&k_b * c),
        gain: k_b,
        covariance: p_b,
        measurement: c.clone(),
        direction: Direction::Backward,
        kind: EstimatorKind::Optimal,
    };
    Ok((fwd, bwd))
}

/// `(P_f⁻¹ + P_b⁻¹)⁻¹`.
pub fn optimal_smoother_cov(p_f: &Mat, p_b: &Mat) -> Result<Mat> {
    if !p_f.is_positive_definite() || !p_b.is_positive_definite() {
        return Err(Error::SingularInput);
    }
    let info = &p_f.try_inverse()? + &p_b.try_inverse()?;
    Ok(info.try_inverse()?.symmetrize())
}

/// Robust forward/backward filters and smoother weights for the uncertain
/// model with `Q = R = 1` and no known input.
pub fn design_robust_filters(
    m: &ProcessModel,
    u: &UncertaintySpec,
    c: &Mat,
) -> Result<(FilterDesign, FilterDesign, SmootherDesign)> {
    check_measurement(m, c)?;
    let w = &u.b1 * &u.b1.transpose();
    let ct = c.transpose();
    let mm = (&(&u.k.transpose() * &u.k) - &(&ct * c)).symmetrize();
    let x = solve_robust_are(&m.a, &w, &mm, Branch::Forward)?;
    let y = solve_robust_are(&m.a, &w, &mm, Branch::Backward)?;
    let x_inv = x.try_inverse()?;
    let y_inv = y.try_inverse()?;

    let fwd_info = -&(&m.a + &(&w * &x)).transpose();
    let bwd_info = (&m.a - &(&w * &y)).transpose();
    let fwd = FilterDesign {
        dynamics: &(&x_inv * &fwd_info) * &x,
        gain: &x_inv * &ct,
        covariance: x.clone(),
        measurement: c.clone(),
        direction: Direction::Forward,
        kind: EstimatorKind::Robust,
    };
    let bwd = FilterDesign {
        dynamics: &(&y_inv * &bwd_info) * &y,
        gain: &y_inv * &ct,
        covariance: y.clone(),
        measurement: c.clone(),
        direction: Direction::Backward,
        kind: EstimatorKind::Robust,
    };
    let smoother = SmootherDesign::robust(&x, &y)?;
    Ok((fwd, bwd, smoother))
}

/// Designs either estimator for measurement row `c`.
pub fn design_estimator(
    kind: EstimatorKind,
    m: &ProcessModel,
    u: &UncertaintySpec,
    c: &Mat,
) -> Result<EstimatorDesign> {
    match kind {
        EstimatorKind::Optimal => {
            let (forward, backward) = design_optimal_filters(m, c)?;
            let smoother = SmootherDesign::optimal(&forward.covariance, &backward.covariance)?;
            Ok(EstimatorDesign {
                forward,
                backward,
                smoother,
                kind,
            })
        }
        EstimatorKind::Robust => {
            let (forward, backward, smoother) = design_robust_filters(m, u, c)?;
            Ok(EstimatorDesign {
                forward,
                backward,
                smoother,
                kind,
            })
        }
    }
}

/// `k₁ x̂_f + k₂ x̂_b` for column-vector estimates.
pub fn robust_combine(k1: &Mat, k2: &Mat, xf_hat: &Mat, xb_hat: &Mat) -> Result<Mat> {
    if k1.cols() != xf_hat.rows() || k2.cols() != xb_hat.rows() || k1.rows() != k2.rows() {
        return Err(Error::Shape("robust_combine: incompatible shapes".into()));
    }
    Ok(&(k1 * xf_hat) + &(k2 * xb_hat))
}
