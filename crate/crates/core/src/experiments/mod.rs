//! Parameter sweeps that regenerate the comparison curves, the squeezing
//! optimization, and their CSV output.

mod config;
mod csv;
mod optimize;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use config::{Config, KNOWN_KEYS};
pub use csv::{format_float, write_csv, write_mc_csv};
pub use optimize::{minimize_scalar, Minimum, R_MAX};

use crate::analysis::{delta_grid, evaluate_error, worst_case_error, CombineMode, EvalOptions};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::limits::{BaselineCurve, BaselineKind};
use crate::models::{build_process, r_from_db, squeezing_db, ProcessModel, ProcessParams, SqueezingConfig, UncertaintySpec};
use crate::montecarlo::{prepare_tracking, simulate_tracking, SimConfig};

/// Width of the final squeezing bracket.
pub const SQUEEZE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    OuDelta,
    OuMu,
    ResDelta,
    ResMu,
    ResZeta,
    ResSqueeze,
    ResFlux,
    McValidate,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::OuDelta,
        ExperimentId::OuMu,
        ExperimentId::ResDelta,
        ExperimentId::ResMu,
        ExperimentId::ResZeta,
        ExperimentId::ResSqueeze,
        ExperimentId::ResFlux,
        ExperimentId::McValidate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::OuDelta => "ou-delta",
            ExperimentId::OuMu => "ou-mu",
            ExperimentId::ResDelta => "res-delta",
            ExperimentId::ResMu => "res-mu",
            ExperimentId::ResZeta => "res-zeta",
            ExperimentId::ResSqueeze => "res-squeeze",
            ExperimentId::ResFlux => "res-flux",
            ExperimentId::McValidate => "mc-validate",
        }
    }

    fn is_ou(&self) -> bool {
        matches!(self, ExperimentId::OuDelta | ExperimentId::OuMu | ExperimentId::McValidate)
    }

    /// Name of the swept quantity, used as the first CSV header.
    pub fn sweep_name(&self) -> &'static str {
        match self {
            ExperimentId::OuDelta | ExperimentId::ResDelta => "delta",
            ExperimentId::OuMu | ExperimentId::ResMu => "mu",
            ExperimentId::ResZeta => "zeta",
            ExperimentId::ResSqueeze => "squeezing_db",
            ExperimentId::ResFlux => "alpha_sq",
            ExperimentId::McValidate => "point",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

/// Swept axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 3 {
            return Err(Error::Config(format!("grid needs at least 3 points, got {}", self.count)));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.start == self.stop {
            return Err(Error::Config("grid end points must be finite and distinct".into()));
        }
        if self.log && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::Config("log grid needs positive end points".into()));
        }
        let last = (self.count - 1) as f64;
        let pts = (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    self.start
                } else if i == self.count - 1 {
                    self.stop
                } else if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect();
        Ok(pts)
    }
}

/// Where the squeezing parameters come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezingSource {
    /// Effective pair given directly.
    Explicit { r_m: f64, r_p: f64 },
    /// Pure squeezing degraded by loss; `r_pure` is optimized when absent.
    Loss { r_pure: Option<f64>, l_sq: f64 },
}

/// Model and scenario parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub id: ExperimentId,
    pub lambda: f64,
    pub kappa: f64,
    pub zeta: f64,
    pub omega_r: f64,
    pub alpha_sq: f64,
    pub squeezing: SqueezingSource,
    pub mu: f64,
    pub grid: GridSpec,
    /// δ points used for every worst-case evaluation.
    pub delta_points: usize,
    /// δ points used inside the squeezing objective of the flux sweep.
    pub objective_points: usize,
    pub combine: CombineMode,
    pub seed: u64,
    /// Monte Carlo overrides; defaults follow the setup's time constants.
    pub dt: Option<f64>,
    pub t_total: Option<f64>,
    pub batches: usize,
}

impl SweepSpec {
    pub fn defaults(id: ExperimentId) -> Self {
        let ou = id.is_ou();
        let (squeezing, mu, grid) = match id {
            ExperimentId::OuDelta | ExperimentId::ResDelta => (
                explicit_default(ou),
                0.8,
                GridSpec { start: -1.0, stop: 1.0, count: 201, log: false },
            ),
            ExperimentId::OuMu | ExperimentId::ResMu => (
                explicit_default(ou),
                0.8,
                GridSpec { start: 0.0, stop: 0.9, count: 19, log: false },
            ),
            ExperimentId::ResZeta => (
                SqueezingSource::Loss { r_pure: None, l_sq: 0.33 },
                0.8,
                GridSpec { start: 0.05, stop: 1.0, count: 20, log: false },
            ),
            ExperimentId::ResSqueeze => (
                SqueezingSource::Loss { r_pure: None, l_sq: 0.0 },
                0.4,
                GridSpec { start: 0.0, stop: -20.0, count: 41, log: false },
            ),
            ExperimentId::ResFlux => (
                SqueezingSource::Loss { r_pure: None, l_sq: 0.33 },
                0.4,
                GridSpec { start: 4e4, stop: 1e6, count: 20, log: true },
            ),
            ExperimentId::McValidate => (
                explicit_default(true),
                0.8,
                GridSpec { start: 0.0, stop: 1.0, count: 3, log: false },
            ),
        };
        SweepSpec {
            id,
            lambda: 5.9e4,
            kappa: if ou { 1.9e4 } else { 9e4 },
            zeta: 0.1,
            omega_r: 6.283e3,
            alpha_sq: if ou { 1e6 } else { 2.5e5 },
            squeezing,
            mu,
            grid,
            delta_points: 201,
            objective_points: 21,
            combine: CombineMode::ScalarFirst,
            seed: 1,
            dt: None,
            t_total: None,
            batches: 40,
        }
    }

    /// Defaults overridden by every key present in `cfg`.
    pub fn from_config(id: ExperimentId, cfg: &Config) -> Result<Self> {
        let mut s = SweepSpec::defaults(id);
        macro_rules! take {
            ($key:literal, $field:expr) => {
                if let Some(v) = cfg.get($key)? {
                    $field = v;
                }
            };
        }
        take!("lambda", s.lambda);
        take!("kappa", s.kappa);
        take!("zeta", s.zeta);
        take!("omega_r", s.omega_r);
        take!("alpha_sq", s.alpha_sq);
        take!("mu", s.mu);
        take!("grid", s.grid.count);
        take!("start", s.grid.start);
        take!("stop", s.grid.stop);
        take!("delta_points", s.delta_points);
        take!("objective_points", s.objective_points);
        take!("seed", s.seed);
        take!("batches", s.batches);
        if let Some(c) = cfg.raw("combine") {
            s.combine = c.parse()?;
        }
        s.dt = cfg.get("dt")?.or(s.dt);
        s.t_total = cfg.get("t_total")?.or(s.t_total);

        let r_m: Option<f64> = cfg.get("r_m")?;
        let r_p: Option<f64> = cfg.get("r_p")?;
        let r_pure: Option<f64> = cfg.get("r_pure")?;
        let l_sq: Option<f64> = cfg.get("l_sq")?;
        match (r_m, r_p) {
            (Some(r_m), Some(r_p)) => s.squeezing = SqueezingSource::Explicit { r_m, r_p },
            (None, None) => {
                if r_pure.is_some() || l_sq.is_some() {
                    let default_loss = match s.squeezing {
                        SqueezingSource::Loss { l_sq, .. } => l_sq,
                        SqueezingSource::Explicit { .. } => 0.0,
                    };
                    s.squeezing = SqueezingSource::Loss {
                        r_pure,
                        l_sq: l_sq.unwrap_or(default_loss),
                    };
                }
            }
            _ => return Err(Error::Config("r_m and r_p must be given together".into())),
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        for (name, v) in [
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("zeta", self.zeta),
            ("omega_r", self.omega_r),
            ("alpha_sq", self.alpha_sq),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1), got {}", self.mu));
        }
        if self.delta_points < 1 || self.objective_points < 1 {
            return bad("delta grids need at least one point".into());
        }
        if self.id != ExperimentId::McValidate {
            self.grid.points()?;
        }
        match self.squeezing {
            SqueezingSource::Explicit { r_m, r_p } => {
                SqueezingConfig::explicit(self.alpha_sq, r_m, r_p)?;
            }
            SqueezingSource::Loss { r_pure, l_sq } => {
                SqueezingConfig::from_loss(self.alpha_sq, r_pure.unwrap_or(0.0), l_sq)?;
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<ProcessModel> {
        self.model_with_zeta(self.zeta)
    }

    fn model_with_zeta(&self, zeta: f64) -> Result<ProcessModel> {
        if self.id.is_ou() {
            build_process(ProcessParams::Ou {
                lambda: self.lambda,
                kappa: self.kappa,
            })
        } else {
            build_process(ProcessParams::Resonant {
                kappa: self.kappa,
                zeta,
                omega_r: self.omega_r,
            })
        }
    }

    /// Squeezing at flux `alpha_sq` with pure level `r_pure` when the
    /// source is the loss model.
    fn squeezing_at(&self, alpha_sq: f64, r_pure: Option<f64>) -> Result<SqueezingConfig> {
        match self.squeezing {
            SqueezingSource::Explicit { r_m, r_p } => SqueezingConfig::explicit(alpha_sq, r_m, r_p),
            SqueezingSource::Loss { r_pure: fixed, l_sq } => {
                let r = r_pure.or(fixed).ok_or_else(|| {
                    Error::Config("r_pure is required for this experiment (or give r_m and r_p)".into())
                })?;
                SqueezingConfig::from_loss(alpha_sq, r, l_sq)
            }
        }
    }

    fn loss(&self) -> f64 {
        match self.squeezing {
            SqueezingSource::Loss { l_sq, .. } => l_sq,
            SqueezingSource::Explicit { .. } => 0.0,
        }
    }

    fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            mode: self.combine,
            ..EvalOptions::default()
        }
    }
}

fn explicit_default(ou: bool) -> SqueezingSource {
    if ou {
        SqueezingSource::Explicit { r_m: 0.36, r_p: 0.59 }
    } else {
        SqueezingSource::Explicit { r_m: 0.48, r_p: 1.11 }
    }
}

/// Result of one estimator at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub sigma2: f64,
    pub delta_star: f64,
    pub r_sq: f64,
    pub iterations: usize,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub optimal: Option<PointValue>,
    pub robust: Option<PointValue>,
    pub csl: Option<f64>,
    pub sql: Option<f64>,
    pub r_pure: Option<f64>,
    /// Loss-degraded squeezing level (dB), squeezing sweeps only.
    pub effective_db: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn new(x: f64) -> Self {
        SweepRow {
            x,
            optimal: None,
            robust: None,
            csl: None,
            sql: None,
            r_pure: None,
            effective_db: None,
            error: None,
        }
    }

    /// `10 log₁₀(σ²_optimal / σ²_robust)`.
    pub fn improvement_db(&self) -> Option<f64> {
        match (self.optimal, self.robust) {
            (Some(o), Some(r)) => Some(10.0 * (o.sigma2 / r.sigma2).log10()),
            _ => None,
        }
    }

    fn note(&mut self, what: &str, e: Error) {
        let msg = format!("{what}: {e}");
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub id: ExperimentId,
    pub has_baselines: bool,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

fn point(kind: EstimatorKind, m: &ProcessModel, u: &UncertaintySpec, sq: &SqueezingConfig, grid: &[f64], o: &EvalOptions) -> Result<PointValue> {
    let w = worst_case_error(kind, m, u, sq, grid, o)?;
    Ok(PointValue {
        sigma2: w.report.smoother,
        delta_star: w.delta_star,
        r_sq: w.report.r_sq,
        iterations: w.report.iterations,
    })
}

/// Worst-case errors of both estimators, filled into `row`.
fn fill_worst(row: &mut SweepRow, m: &ProcessModel, u: &UncertaintySpec, sq: &SqueezingConfig, grid: &[f64], o: &EvalOptions) {
    for kind in [EstimatorKind::Optimal, EstimatorKind::Robust] {
        match point(kind, m, u, sq, grid, o) {
            Ok(v) if kind == EstimatorKind::Optimal => row.optimal = Some(v),
            Ok(v) => row.robust = Some(v),
            Err(e) => row.note(kind.as_str(), e),
        }
    }
}

fn fill_baselines(row: &mut SweepRow, m: &ProcessModel, u: &UncertaintySpec, alpha_sq: f64, grid: &[f64]) {
    for kind in [BaselineKind::Csl, BaselineKind::Sql] {
        match BaselineCurve::compute(kind, m, u, alpha_sq, grid) {
            Ok(c) => {
                let v = c.worst().map(|(_, v)| v);
                match kind {
                    BaselineKind::Csl => row.csl = v,
                    BaselineKind::Sql => row.sql = v,
                }
            }
            Err(e) => row.note(kind.as_str(), e),
        }
    }
}

/// Squeezing objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Optimal smoother error on the exact model.
    NominalError,
    /// Worst-case robust smoother error over the δ grid.
    WorstRobust,
}

/// Everything fixed while the squeezing level varies.
#[derive(Debug, Clone)]
pub struct SqueezeContext<'a> {
    pub model: &'a ProcessModel,
    pub mu: f64,
    pub alpha_sq: f64,
    pub l_sq: f64,
    pub deltas: &'a [f64],
    pub opts: EvalOptions,
}

/// Pure squeezing parameter in `[0, 3]` minimizing `objective`.
pub fn optimize_squeezing(objective: Objective, ctx: &SqueezeContext<'_>) -> Result<Minimum> {
    let u0 = UncertaintySpec::for_model(ctx.model, 0.0)?;
    let u = UncertaintySpec::for_model(ctx.model, ctx.mu)?;
    let f = |r: f64| -> f64 {
        let value = SqueezingConfig::from_loss(ctx.alpha_sq, r, ctx.l_sq).and_then(|sq| match objective {
            Objective::NominalError => {
                evaluate_error(EstimatorKind::Optimal, ctx.model, &u0, &sq, 0.0, &ctx.opts).map(|r| r.smoother)
            }
            Objective::WorstRobust => {
                worst_case_error(EstimatorKind::Robust, ctx.model, &u, &sq, ctx.deltas, &ctx.opts)
                    .map(|w| w.report.smoother)
            }
        });
        value.unwrap_or(f64::INFINITY)
    };
    minimize_scalar(f, 0.0, R_MAX, SQUEEZE_TOL)
}

/// Runs a parameter sweep. Per-point failures are recorded in the rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let xs = spec.grid.points()?;
    let deltas = delta_grid(spec.delta_points);
    let opts = spec.eval_options();
    let id = spec.id;
    let base = spec.model()?;

    let rows: Vec<SweepRow> = match id {
        ExperimentId::OuDelta | ExperimentId::ResDelta => {
            let u = UncertaintySpec::for_model(&base, spec.mu)?;
            let sq = spec.squeezing_at(spec.alpha_sq, None)?;
            xs.par_iter()
                .map(|&d| {
                    let mut row = SweepRow::new(d);
                    fill_worst(&mut row, &base, &u, &sq, &[d], &opts);
                    if id == ExperimentId::ResDelta {
                        fill_baselines(&mut row, &base, &u, spec.alpha_sq, &[d]);
                    }
                    row
                })
                .collect()
        }
        ExperimentId::OuMu | ExperimentId::ResMu => {
            let sq = spec.squeezing_at(spec.alpha_sq, None)?;
            xs.par_iter()
                .map(|&mu| {
                    let mut row = SweepRow::new(mu);
                    match UncertaintySpec::for_model(&base, mu) {
                        Ok(u) => {
                            fill_worst(&mut row, &base, &u, &sq, &deltas, &opts);
                            if id == ExperimentId::ResMu {
                                fill_baselines(&mut row, &base, &u, spec.alpha_sq, &deltas);
                            }
                        }
                        Err(e) => row.note("mu", e),
                    }
                    row
                })
                .collect()
        }
        ExperimentId::ResZeta => xs
            .par_iter()
            .map(|&zeta| {
                let mut row = SweepRow::new(zeta);
                let run = |row: &mut SweepRow| -> Result<()> {
                    let m = spec.model_with_zeta(zeta)?;
                    let u = UncertaintySpec::for_model(&m, spec.mu)?;
                    let r = match spec.squeezing {
                        SqueezingSource::Loss { r_pure: None, l_sq } => {
                            let ctx = SqueezeContext {
                                model: &m,
                                mu: spec.mu,
                                alpha_sq: spec.alpha_sq,
                                l_sq,
                                deltas: &deltas,
                                opts,
                            };
                            Some(optimize_squeezing(Objective::NominalError, &ctx)?.x)
                        }
                        _ => None,
                    };
                    row.r_pure = r.or(match spec.squeezing {
                        SqueezingSource::Loss { r_pure, .. } => r_pure,
                        SqueezingSource::Explicit { .. } => None,
                    });
                    let sq = spec.squeezing_at(spec.alpha_sq, r)?;
                    fill_worst(row, &m, &u, &sq, &deltas, &opts);
                    Ok(())
                };
                if let Err(e) = run(&mut row) {
                    row.note("squeezing", e);
                }
                row
            })
            .collect(),
        ExperimentId::ResSqueeze => {
            let u = UncertaintySpec::for_model(&base, spec.mu)?;
            let csl = BaselineCurve::compute(BaselineKind::Csl, &base, &u, spec.alpha_sq, &deltas)?
                .worst()
                .map(|(_, v)| v);
            let l_sq = spec.loss();
            xs.par_iter()
                .map(|&db| {
                    let r = r_from_db(db);
                    let mut row = SweepRow::new(db);
                    row.r_pure = Some(r);
                    row.csl = csl;
                    match SqueezingConfig::from_loss(spec.alpha_sq, r, l_sq) {
                        Ok(sq) => {
                            row.effective_db = Some(squeezing_db(sq.r_m));
                            fill_worst(&mut row, &base, &u, &sq, &deltas, &opts);
                        }
                        Err(e) => row.note("squeezing", e),
                    }
                    row
                })
                .collect()
        }
        ExperimentId::ResFlux => {
            let u = UncertaintySpec::for_model(&base, spec.mu)?;
            let objective_deltas = delta_grid(spec.objective_points);
            xs.par_iter()
                .map(|&alpha_sq| {
                    let mut row = SweepRow::new(alpha_sq);
                    let run = |row: &mut SweepRow| -> Result<()> {
                        let r = match spec.squeezing {
                            SqueezingSource::Loss { r_pure: None, l_sq } => {
                                let ctx = SqueezeContext {
                                    model: &base,
                                    mu: spec.mu,
                                    alpha_sq,
                                    l_sq,
                                    deltas: &objective_deltas,
                                    opts,
                                };
                                Some(optimize_squeezing(Objective::WorstRobust, &ctx)?.x)
                            }
                            SqueezingSource::Loss { r_pure, .. } => r_pure,
                            SqueezingSource::Explicit { .. } => None,
                        };
                        row.r_pure = r;
                        let sq = spec.squeezing_at(alpha_sq, r)?;
                        fill_worst(row, &base, &u, &sq, &deltas, &opts);
                        Ok(())
                    };
                    if let Err(e) = run(&mut row) {
                        row.note("squeezing", e);
                    }
                    row
                })
                .collect()
        }
        ExperimentId::McValidate => {
            return Err(Error::Config("mc-validate is not a sweep; use run_mc_validation".into()))
        }
    };
    Ok(SweepTable {
        id,
        has_baselines: matches!(id, ExperimentId::ResDelta | ExperimentId::ResMu),
        rows,
    })
}

/// Analytic versus simulated errors at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub label: String,
    pub kind: EstimatorKind,
    pub mu: f64,
    pub delta: f64,
    pub quantity: &'static str,
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
}

impl McRow {
    pub fn z_score(&self) -> f64 {
        (self.empirical - self.analytic) / self.stderr
    }

    pub fn rel_error(&self) -> f64 {
        (self.empirical - self.analytic).abs() / self.analytic.abs()
    }

    /// Within 3 standard errors and 5 % of the analytic value.
    pub fn passes(&self) -> bool {
        self.z_score().abs() <= 3.0 && self.rel_error() <= 0.05
    }
}

/// Reference points of the Monte Carlo check: Kalman smoother on the
/// exact model and robust smoother at the edge of the uncertainty set.
pub const MC_POINTS: [(EstimatorKind, f64, f64); 2] =
    [(EstimatorKind::Optimal, 0.0, 0.0), (EstimatorKind::Robust, 0.8, 1.0)];

/// Simulates both reference points (in parallel) and tabulates the
/// forward, backward and smoothed errors against the analytic pipeline.
pub fn run_mc_validation(spec: &SweepSpec) -> Result<Vec<McRow>> {
    let m = spec.model()?;
    let sq = spec.squeezing_at(spec.alpha_sq, None)?;
    let opts = spec.eval_options();
    let per_point: Vec<Result<Vec<McRow>>> = MC_POINTS
        .par_iter()
        .map(|&(kind, mu, delta)| {
            let u = UncertaintySpec::for_model(&m, mu)?;
            let setup = prepare_tracking(&m, &u, &sq, kind, delta, &opts)?;
            let mut cfg: SimConfig = setup.default_config(spec.seed);
            cfg.batches = spec.batches;
            if let Some(dt) = spec.dt {
                cfg.dt = dt;
            }
            if let Some(t) = spec.t_total {
                cfg.t_total = t;
            }
            let r = simulate_tracking(&setup, &cfg)?;
            let a = &setup.analytic;
            let label = format!("{}-mu{}-delta{}", kind.as_str(), mu, delta);
            let row = |quantity, analytic, empirical, stderr| McRow {
                label: label.clone(),
                kind,
                mu,
                delta,
                quantity,
                analytic,
                empirical,
                stderr,
            };
            Ok(vec![
                row("sigma_f", a.forward, r.emp_sigma_f_sq, r.stderr_f),
                row("sigma_b", a.backward, r.emp_sigma_b_sq, r.stderr_b),
                row("sigma_fb", a.cross, r.emp_sigma_fb_sq, r.stderr_fb),
                row("sigma", a.smoother, r.emp_sigma_sq, r.stderr_s),
            ])
        })
        .collect();
    let mut rows = Vec::new();
    for p in per_point {
        rows.extend(p?);
    }
    Ok(rows)
}
