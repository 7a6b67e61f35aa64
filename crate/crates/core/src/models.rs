//! Phase-noise process models, their structured uncertainty, and the
//! squeezed homodyne measurement.

use crate::error::{Error, Result};
use crate::matops::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessKind {
    /// Ornstein–Uhlenbeck: `φ̇ = −λφ + √κ v`.
    Ou,
    /// Second-order resonance `κ / (s² + 2ζω_r s + ω_r²)`.
    Resonant,
}

/// Defining scalars of a process model. Rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessParams {
    Ou { lambda: f64, kappa: f64 },
    Resonant { kappa: f64, zeta: f64, omega_r: f64 },
}

impl ProcessParams {
    pub fn kind(&self) -> ProcessKind {
        match self {
            ProcessParams::Ou { .. } => ProcessKind::Ou,
            ProcessParams::Resonant { .. } => ProcessKind::Resonant,
        }
    }
}

/// State-space process `ẋ = A x + B v` driven by unit white noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessModel {
    pub a: Mat,
    pub b: Mat,
    pub params: ProcessParams,
}

impl ProcessModel {
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn kind(&self) -> ProcessKind {
        self.params.kind()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!("{name} must be positive, got {v}")))
    }
}

pub fn build_process(params: ProcessParams) -> Result<ProcessModel> {
    match params {
        ProcessParams::Ou { lambda, kappa } => {
            positive("lambda", lambda)?;
            positive("kappa", kappa)?;
            Ok(ProcessModel {
                a: Mat::scalar(-lambda),
                b: Mat::scalar(kappa.sqrt()),
                params,
            })
        }
        ProcessParams::Resonant {
            kappa,
            zeta,
            omega_r,
        } => {
            positive("kappa", kappa)?;
            positive("zeta", zeta)?;
            positive("omega_r", omega_r)?;
            Ok(ProcessModel {
                a: Mat::from_rows(&[&[0.0, 1.0], &[-omega_r * omega_r, -2.0 * zeta * omega_r]])?,
                b: Mat::column(&[0.0, kappa])?,
                params,
            })
        }
    }
}

/// Structured uncertainty `A → A + B₁ Δ K` with `|Δ| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySpec {
    pub mu: f64,
    /// Uncertainty output row (1×n).
    pub k: Mat,
    /// Uncertainty input column (n×1), equal to the process-noise column.
    pub b1: Mat,
}

impl UncertaintySpec {
    /// OU: uncertainty in λ. Resonant: uncertainty in the ω_r² entry only;
    /// the damping term is left exact.
    pub fn for_model(m: &ProcessModel, mu: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParam(format!("mu must lie in [0, 1), got {mu}")));
        }
        let k = match m.params {
            ProcessParams::Ou { lambda, kappa } => Mat::scalar(mu * lambda / kappa.sqrt()),
            ProcessParams::Resonant { kappa, omega_r, .. } => {
                Mat::row(&[-mu * omega_r * omega_r / kappa, 0.0])?
            }
        };
        Ok(UncertaintySpec {
            mu,
            k,
            b1: m.b.clone(),
        })
    }

    /// The rank-one perturbation `B₁ Δ K`.
    pub fn perturbation(&self, delta: f64) -> Mat {
        (&self.b1 * &self.k).scale(delta)
    }
}

/// True dynamics matrix `A + B₁ δ K` for an admissible `δ`.
pub fn apply_uncertainty(m: &ProcessModel, u: &UncertaintySpec, delta: f64) -> Result<Mat> {
    if !delta.is_finite() || delta.abs() > 1.0 {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if delta == 0.0 {
        return Ok(m.a.clone());
    }
    Ok(&m.a + &u.perturbation(delta))
}

/// Squeezing parameters after mixing a pure squeezed state with vacuum at
/// loss `l_sq`:
/// `e^{−2 r_m} = (1−l)e^{−2r} + l`, `e^{2 r_p} = (1−l)e^{2r} + l`.
pub fn effective_squeezing(r_pure: f64, l_sq: f64) -> Result<(f64, f64)> {
    if !(r_pure.is_finite() && r_pure >= 0.0) {
        return Err(Error::InvalidParam(format!("r_pure must be >= 0, got {r_pure}")));
    }
    if !(0.0..1.0).contains(&l_sq) {
        return Err(Error::InvalidParam(format!("l_sq must lie in [0, 1), got {l_sq}")));
    }
    if l_sq == 0.0 {
        return Ok((r_pure, r_pure));
    }
    let r_m = -0.5 * ((1.0 - l_sq) * (-2.0 * r_pure).exp() + l_sq).ln();
    let r_p = 0.5 * ((1.0 - l_sq) * (2.0 * r_pure).exp() + l_sq).ln();
    Ok((r_m.max(0.0), r_p.max(0.0)))
}

/// `R̄_sq = σ_f² e^{2 r_p} + (1 − σ_f²) e^{−2 r_m}`.
pub fn compute_r_sq(sigma_f_sq: f64, r_m: f64, r_p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&sigma_f_sq) {
        return Err(Error::SigmaOutOfRange(sigma_f_sq));
    }
    Ok(sigma_f_sq * (2.0 * r_p).exp() + (1.0 - sigma_f_sq) * (-2.0 * r_m).exp())
}

/// Scaled homodyne measurement row `[2|α|/√R̄_sq, 0, …]`.
pub fn measurement_row(alpha_sq: f64, r_sq: f64, n: usize) -> Result<Mat> {
    positive("alpha_sq", alpha_sq)?;
    positive("R_sq", r_sq)?;
    let mut row = vec![0.0; n.max(1)];
    row[0] = 2.0 * alpha_sq.sqrt() / r_sq.sqrt();
    Mat::row(&row)
}

/// Squeezed-quadrature variance relative to shot noise, in dB (≤ 0).
pub fn squeezing_db(r_m: f64) -> f64 {
    10.0 * (-2.0 * r_m).exp().log10()
}

/// Inverse of [`squeezing_db`] for a pure (lossless) state.
pub fn r_from_db(db: f64) -> f64 {
    -db / (20.0 * std::f64::consts::LOG10_E)
}

/// Photon flux and squeezing of the probe beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingConfig {
    /// Photon flux |α|² (1/s).
    pub alpha_sq: f64,
    /// Pure squeezing parameter, when the effective pair came from the loss model.
    pub r_pure: Option<f64>,
    pub l_sq: Option<f64>,
    pub r_m: f64,
    pub r_p: f64,
}

impl SqueezingConfig {
    pub fn from_loss(alpha_sq: f64, r_pure: f64, l_sq: f64) -> Result<Self> {
        positive("alpha_sq", alpha_sq)?;
        let (r_m, r_p) = effective_squeezing(r_pure, l_sq)?;
        Ok(SqueezingConfig {
            alpha_sq,
            r_pure: Some(r_pure),
            l_sq: Some(l_sq),
            r_m,
            r_p,
        })
    }

    /// Effective squeezing pair given directly.
    pub fn explicit(alpha_sq: f64, r_m: f64, r_p: f64) -> Result<Self> {
        positive("alpha_sq", alpha_sq)?;
        if !(r_m.is_finite() && r_m >= 0.0 && r_p.is_finite() && r_p >= r_m) {
            return Err(Error::InvalidParam(format!(
                "need r_p >= r_m >= 0, got r_m={r_m}, r_p={r_p}"
            )));
        }
        Ok(SqueezingConfig {
            alpha_sq,
            r_pure: None,
            l_sq: None,
            r_m,
            r_p,
        })
    }

    pub fn coherent(alpha_sq: f64) -> Result<Self> {
        SqueezingConfig::explicit(alpha_sq, 0.0, 0.0)
    }

    /// `R̄_sq` with perfect tracking (σ_f² = 0).
    pub fn r_sq_floor(&self) -> f64 {
        (-2.0 * self.r_m).exp()
    }

    pub fn r_sq_ceiling(&self) -> f64 {
        (2.0 * self.r_p).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ou() -> ProcessModel {
        build_process(ProcessParams::Ou {
            lambda: 5.9e4,
            kappa: 1.9e4,
        })
        .unwrap()
    }

    fn resonant() -> ProcessModel {
        build_process(ProcessParams::Resonant {
            kappa: 9e4,
            zeta: 0.1,
            omega_r: 6.283e3,
        })
        .unwrap()
    }

    #[test]
    fn ou_matrices() {
        let m = ou();
        assert_eq!(m.a.get(0, 0), -5.9e4);
        assert!((m.b.get(0, 0) - 1.9e4_f64.sqrt()).abs() < 1e-12);
        assert!(m.a.is_hurwitz());
    }

    #[test]
    fn resonant_matrices() {
        let m = resonant();
        assert_eq!(m.n(), 2);
        assert!((m.a.get(1, 0) + 3.948e7).abs() / 3.948e7 < 1e-4);
        assert!((m.a.get(1, 1) + 1.2566e3).abs() / 1.2566e3 < 1e-4);
        assert_eq!(m.b.to_row_major(), vec![0.0, 9e4]);

        let crit = build_process(ProcessParams::Resonant {
            kappa: 1.0,
            zeta: 1.0,
            omega_r: 1.0,
        })
        .unwrap();
        assert_eq!(crit.a.to_row_major(), vec![0.0, 1.0, -1.0, -2.0]);
    }

    #[test]
    fn nonpositive_params_rejected() {
        for p in [
            ProcessParams::Ou { lambda: 0.0, kappa: 1.0 },
            ProcessParams::Ou { lambda: 1.0, kappa: -1.0 },
            ProcessParams::Resonant { kappa: 1.0, zeta: 0.0, omega_r: 1.0 },
            ProcessParams::Resonant { kappa: 1.0, zeta: 0.1, omega_r: -2.0 },
        ] {
            assert!(matches!(build_process(p), Err(Error::InvalidParam(_))));
        }
    }

    #[test]
    fn ou_uncertainty_scales_lambda() {
        let m = ou();
        let u = UncertaintySpec::for_model(&m, 0.8).unwrap();
        let a = apply_uncertainty(&m, &u, 1.0).unwrap();
        assert!((a.get(0, 0) + 0.2 * 5.9e4).abs() < 1e-9);
        assert_eq!(apply_uncertainty(&m, &u, 0.0).unwrap(), m.a);
        assert!(matches!(
            apply_uncertainty(&m, &u, 1.5),
            Err(Error::DeltaOutOfRange(_))
        ));
    }

    #[test]
    fn resonant_uncertainty_touches_only_stiffness_entry() {
        let m = resonant();
        let u = UncertaintySpec::for_model(&m, 0.8).unwrap();
        let a = apply_uncertainty(&m, &u, -1.0).unwrap();
        let w2 = 6.283e3_f64.powi(2);
        // B₁ δ K evaluated entry by entry.
        let b1 = [0.0, 9e4];
        let k = [-0.8 * w2 / 9e4, 0.0];
        for (i, bi) in b1.iter().enumerate() {
            for (j, kj) in k.iter().enumerate() {
                let expect = m.a.get(i, j) - bi * kj;
                assert!((a.get(i, j) - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
            }
        }
        assert!((a.get(1, 0) + 0.2 * w2).abs() < 1e-6);
    }

    #[test]
    fn mu_must_be_below_one() {
        assert!(UncertaintySpec::for_model(&ou(), 1.0).is_err());
        assert!(UncertaintySpec::for_model(&ou(), -0.1).is_err());
    }

    #[test]
    fn squeezing_loss_model() {
        assert_eq!(effective_squeezing(0.7, 0.0).unwrap(), (0.7, 0.7));
        let (rm, rp) = effective_squeezing(0.0, 0.33).unwrap();
        assert!(rm.abs() < 1e-15 && rp.abs() < 1e-15);
        let (rm, rp) = effective_squeezing(0.737, 0.33).unwrap();
        assert!((rm - 0.36).abs() < 0.02, "r_m = {rm}");
        assert!((rp - 0.59).abs() < 0.02, "r_p = {rp}");
        assert!(effective_squeezing(0.5, 1.0).is_err());
    }

    #[test]
    fn r_sq_limits() {
        let (rm, rp) = (0.48, 1.11);
        assert!((compute_r_sq(0.0, rm, rp).unwrap() - (-2.0 * rm).exp()).abs() < 1e-15);
        assert!((compute_r_sq(1.0, rm, rp).unwrap() - (2.0 * rp).exp()).abs() < 1e-15);
        assert_eq!(compute_r_sq(0.3, 0.0, 0.0).unwrap(), 1.0);
        assert!(matches!(compute_r_sq(1.2, rm, rp), Err(Error::SigmaOutOfRange(_))));
        assert!(matches!(compute_r_sq(-0.1, rm, rp), Err(Error::SigmaOutOfRange(_))));
    }

    #[test]
    fn measurement_rows() {
        assert_eq!(measurement_row(1e6, 1.0, 1).unwrap().to_row_major(), vec![2000.0]);
        assert_eq!(
            measurement_row(25e4, 1.0, 2).unwrap().to_row_major(),
            vec![1000.0, 0.0]
        );
        let a = measurement_row(1e6, 0.8, 1).unwrap().get(0, 0);
        let b = measurement_row(1e6, 0.4, 1).unwrap().get(0, 0);
        assert!((b / a - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn db_convention() {
        assert_eq!(squeezing_db(0.0), 0.0);
        let r = -0.5 * 0.1_f64.ln();
        assert!((squeezing_db(r) + 10.0).abs() < 1e-12);
        assert!((squeezing_db(1.485) + 12.9).abs() < 0.05);
        assert!((r_from_db(squeezing_db(1.3)) - 1.3).abs() < 1e-12);
    }
}
