//! Coherent-beam reference levels: the coherent state limit (CSL) and the
//! standard quantum limit (SQL) of ideal dual-homodyne detection.
//!
//! Both are matched designs: at every `δ` the estimator is redesigned for
//! the true plant, so no mismatch analysis is involved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::optimal_smoother_cov;
use crate::matops::{solve_filter_are, Mat};
use crate::models::{apply_uncertainty, measurement_row, ProcessModel, UncertaintySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Csl,
    Sql,
}

impl BaselineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineKind::Csl => "csl",
            BaselineKind::Sql => "sql",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineCurve {
    pub deltas: Vec<f64>,
    /// Phase mean-square error (rad²) at each `δ`.
    pub values: Vec<f64>,
    pub kind: BaselineKind,
}

impl BaselineCurve {
    pub fn compute(
        kind: BaselineKind,
        m: &ProcessModel,
        u: &UncertaintySpec,
        alpha_sq: f64,
        deltas: &[f64],
    ) -> Result<Self> {
        let f = match kind {
            BaselineKind::Csl => compute_csl,
            BaselineKind::Sql => compute_sql,
        };
        let values = deltas
            .par_iter()
            .map(|&d| f(m, u, alpha_sq, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(BaselineCurve {
            deltas: deltas.to_vec(),
            values,
            kind,
        })
    }

    /// Largest value over the grid and the `δ` where it occurs.
    pub fn worst(&self) -> Option<(f64, f64)> {
        self.deltas
            .iter()
            .zip(&self.values)
            .fold(None, |acc: Option<(f64, f64)>, (&d, &v)| match acc {
                Some((_, best)) if best >= v => acc,
                _ => Some((d, v)),
            })
    }
}

/// Optimal smoother error with a coherent beam (`R̄ = 1`), designed for the
/// perturbed plant.
pub fn compute_csl(m: &ProcessModel, u: &UncertaintySpec, alpha_sq: f64, delta: f64) -> Result<f64> {
    let a = apply_uncertainty(m, u, delta)?;
    let c = measurement_row(alpha_sq, 1.0, m.n())?;
    let one = Mat::scalar(1.0);
    let p_f = solve_filter_are(&a, &m.b, &c, &one, &one)?;
    let p_b = solve_filter_are(&(-&a), &(-&m.b), &c, &one, &one)?;
    Ok(optimal_smoother_cov(&p_f, &p_b)?.get(0, 0))
}

/// Kalman filter error for the linearized dual-homodyne record
/// `ϑ = φ + (ν₁ + ν₂)/(2|α|)`, i.e. unit gain on φ and noise intensity
/// `1/(2|α|²)`.
pub fn compute_sql(m: &ProcessModel, u: &UncertaintySpec, alpha_sq: f64, delta: f64) -> Result<f64> {
    if !(alpha_sq.is_finite() && alpha_sq > 0.0) {
        return Err(Error::InvalidParam(format!("alpha_sq must be positive, got {alpha_sq}")));
    }
    let a = apply_uncertainty(m, u, delta)?;
    let mut row = vec![0.0; m.n()];
    row[0] = 1.0;
    let c = Mat::row(&row)?;
    let p = solve_filter_are(&a, &m.b, &c, &Mat::scalar(1.0), &Mat::scalar(0.5 / alpha_sq))?;
    Ok(p.get(0, 0))
}
