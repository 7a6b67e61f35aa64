//! Shared fixtures for the benchmarks under `benches/`.

use rpsmooth::models::measurement_row;
use rpsmooth::{build_process, Mat, ProcessModel, ProcessParams, SqueezingConfig, UncertaintySpec};

/// A model with its squeezing and uncertainty at a representative level.
pub struct Fixture {
    pub name: &'static str,
    pub model: ProcessModel,
    pub squeezing: SqueezingConfig,
    pub uncertainty: UncertaintySpec,
    /// Measurement row at the explicit squeezing's nominal `R̄ = e^{-2 r_m}`.
    pub c: Mat,
}

pub fn ou(mu: f64) -> Fixture {
    let model = build_process(ProcessParams::Ou {
        lambda: 5.9e4,
        kappa: 1.9e4,
    })
    .expect("valid OU parameters");
    fixture("ou", model, SqueezingConfig::explicit(1e6, 0.36, 0.59).expect("valid squeezing"), mu)
}

pub fn resonant(mu: f64) -> Fixture {
    let model = build_process(ProcessParams::Resonant {
        kappa: 9e4,
        zeta: 0.1,
        omega_r: 6.283e3,
    })
    .expect("valid resonant parameters");
    fixture("resonant", model, SqueezingConfig::explicit(2.5e5, 0.48, 1.11).expect("valid squeezing"), mu)
}

fn fixture(name: &'static str, model: ProcessModel, squeezing: SqueezingConfig, mu: f64) -> Fixture {
    let uncertainty = UncertaintySpec::for_model(&model, mu).expect("valid uncertainty level");
    let r = (-2.0 * squeezing.r_m).exp();
    let c = measurement_row(squeezing.alpha_sq, r, model.n()).expect("valid measurement");
    Fixture {
        name,
        model,
        squeezing,
        uncertainty,
        c,
    }
}
