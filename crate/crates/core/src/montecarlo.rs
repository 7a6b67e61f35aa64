//! Time-domain Euler–Maruyama simulation of the linearized tracking loop,
//! used to check the analytic covariances empirically.
//!
//! One step of length `dt` advances
//!
//! ```text
//! x_{k+1}  = x_k + A_true x_k dt + B √dt z_p
//! dy_k     = C x_k dt + √dt z_m
//! x̂f_{k+1} = x̂f_k + F_f x̂f_k dt + G_f dy_k
//! x̂b_k     = x̂b_{k+1} + F_b x̂b_{k+1} dt + G_b dy_k      (x̂b_N = 0)
//! ```
//!
//! so at `t_k` the forward estimate has seen increments `0..k` and the
//! backward estimate increments `k..N`.
//!
//! Gaussian draws come from `ChaCha8Rng` seeded with the run seed, one
//! stream per block of 2¹⁶ substeps (stream index = block index), sampled
//! with `rand_distr::StandardNormal` in the order (process, measurement)
//! per substep. A step made of `s` substeps uses `Σz/√s`, so a run with
//! `noise_substeps = 2` sees the same Brownian path as a run at `dt/2`.
//!
//! The record is never stored whole: the forward pass keeps block-start
//! checkpoints and the backward pass regenerates one block at a time.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::{evaluate_error, CombineMode, ErrorReport, EvalOptions};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorDesign, EstimatorKind, FilterDesign};
use crate::matops::{Mat, MAX_STATE_DIM};
use crate::models::{apply_uncertainty, measurement_row, ProcessModel, SqueezingConfig, UncertaintySpec};

const BLOCK_DRAWS: u64 = 1 << 16;
const UNSTABLE_NORM: f64 = 1e6;
const TRACE_MAGIC: &[u8; 8] = b"RPSTRC01";

/// A designed estimator together with the plant it is simulated against.
#[derive(Debug, Clone)]
pub struct TrackingSetup {
    pub a_true: Mat,
    pub b: Mat,
    /// Measurement row at the converged `R̄`.
    pub c: Mat,
    pub design: EstimatorDesign,
    pub mode: CombineMode,
    /// Analytic errors the simulation should reproduce.
    pub analytic: ErrorReport,
}

/// Runs the analytic pipeline for one point and keeps what the simulation
/// needs.
pub fn prepare_tracking(
    m: &ProcessModel,
    u: &UncertaintySpec,
    sq: &SqueezingConfig,
    kind: EstimatorKind,
    delta: f64,
    opts: &EvalOptions,
) -> Result<TrackingSetup> {
    let analytic = evaluate_error(kind, m, u, sq, delta, opts)?;
    Ok(TrackingSetup {
        a_true: apply_uncertainty(m, u, delta)?,
        b: m.b.clone(),
        c: measurement_row(sq.alpha_sq, analytic.r_sq, m.n())?,
        design: analytic.design.clone(),
        mode: opts.mode,
        analytic,
    })
}

impl TrackingSetup {
    fn pole_moduli(&self) -> Vec<f64> {
        [&self.a_true, &self.design.forward.dynamics, &self.design.backward.dynamics]
            .iter()
            .flat_map(|m| m.eigenvalues())
            .map(|(re, im)| re.hypot(im))
            .collect()
    }

    /// Largest pole modulus of plant and filters (rad/s).
    pub fn fastest_pole(&self) -> f64 {
        self.pole_moduli().into_iter().fold(0.0, f64::max)
    }

    /// Smallest pole modulus of plant and filters (rad/s).
    pub fn slowest_pole(&self) -> f64 {
        self.pole_moduli().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Step, horizon and burn-in scaled to the setup's time constants.
    pub fn default_config(&self, seed: u64) -> SimConfig {
        let tau_max = 1.0 / self.slowest_pole();
        let burn_in = 20.0 * tau_max;
        SimConfig {
            dt: 0.0035 / self.fastest_pole(),
            t_total: (100.0 * tau_max + 2.0 * burn_in).max(0.25),
            burn_in,
            seed,
            ..SimConfig::default()
        }
    }

    /// Weight of the forward-design estimate in the smoothed phase.
    fn combination_rows(&self) -> ([f64; MAX_STATE_DIM], [f64; MAX_STATE_DIM]) {
        let n = self.a_true.rows();
        let mut wf = [0.0; MAX_STATE_DIM];
        let mut wb = [0.0; MAX_STATE_DIM];
        let s = &self.design.smoother;
        match (self.design.kind, self.mode) {
            (EstimatorKind::Optimal, _) => {
                let r = &self.analytic;
                let w = (r.backward - r.cross) / (r.forward + r.backward - 2.0 * r.cross);
                wf[0] = w;
                wb[0] = 1.0 - w;
            }
            (EstimatorKind::Robust, CombineMode::ScalarFirst) => {
                wf[0] = s.scalar_k1;
                wb[0] = s.scalar_k2;
            }
            (EstimatorKind::Robust, CombineMode::MatrixFirst) => {
                for j in 0..n {
                    wf[j] = s.k1.get(0, j);
                    wb[j] = s.k2.get(0, j);
                }
            }
        }
        (wf, wb)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub path: PathBuf,
    /// Write every `stride`-th step.
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Step (s).
    pub dt: f64,
    /// Horizon (s).
    pub t_total: f64,
    /// Discarded at both ends of the record, where one of the filters has
    /// not yet reached steady state (s).
    pub burn_in: f64,
    pub seed: u64,
    /// Number of batches for the batch-means standard errors.
    pub batches: usize,
    /// Gaussian draws summed into each step (power of two, at most 64).
    pub noise_substeps: u32,
    /// When false both noise sources are switched off.
    pub inject_noise: bool,
    /// Plant state at `t = 0`; zero when absent.
    pub initial_state: Option<Vec<f64>>,
    /// Run the backward design forward in time and the forward design
    /// backward in time.
    pub reverse_roles: bool,
    pub trace: Option<TraceOptions>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-8,
            t_total: 0.25,
            burn_in: 0.0,
            seed: 0,
            batches: 40,
            noise_substeps: 1,
            inject_noise: true,
            initial_state: None,
            reverse_roles: false,
            trace: None,
        }
    }
}

/// Empirical second moments of the phase errors with batch-means standard
/// errors. `f` and `b` refer to the filters run forward and backward in
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub emp_sigma_f_sq: f64,
    pub emp_sigma_b_sq: f64,
    pub emp_sigma_fb_sq: f64,
    pub emp_sigma_sq: f64,
    pub stderr_f: f64,
    pub stderr_b: f64,
    pub stderr_fb: f64,
    pub stderr_s: f64,
    pub steps: u64,
    pub samples: u64,
}

struct Compiled {
    n: usize,
    a: [f64; MAX_STATE_DIM * MAX_STATE_DIM],
    b: [f64; MAX_STATE_DIM],
    c: [f64; MAX_STATE_DIM],
    fa: [f64; MAX_STATE_DIM * MAX_STATE_DIM],
    ga: [f64; MAX_STATE_DIM],
    fb: [f64; MAX_STATE_DIM * MAX_STATE_DIM],
    gb: [f64; MAX_STATE_DIM],
    wa: [f64; MAX_STATE_DIM],
    wb: [f64; MAX_STATE_DIM],
}

fn flat_matrix(m: &Mat) -> [f64; MAX_STATE_DIM * MAX_STATE_DIM] {
    let mut out = [0.0; MAX_STATE_DIM * MAX_STATE_DIM];
    for (dst, src) in out.iter_mut().zip(m.to_row_major()) {
        *dst = src;
    }
    out
}

fn flat_vector(m: &Mat) -> [f64; MAX_STATE_DIM] {
    let mut out = [0.0; MAX_STATE_DIM];
    for (dst, src) in out.iter_mut().zip(m.to_row_major()) {
        *dst = src;
    }
    out
}

impl Compiled {
    fn new(setup: &TrackingSetup, reverse_roles: bool) -> Result<Self> {
        let n = setup.a_true.rows();
        if n > MAX_STATE_DIM || setup.b.cols() != 1 {
            return Err(Error::Shape("simulation needs n <= 8 and a single noise input".into()));
        }
        let (mut wa, mut wb) = setup.combination_rows();
        let (mut fwd, mut bwd): (&FilterDesign, &FilterDesign) = (&setup.design.forward, &setup.design.backward);
        if reverse_roles {
            std::mem::swap(&mut fwd, &mut bwd);
            std::mem::swap(&mut wa, &mut wb);
        }
        Ok(Compiled {
            n,
            a: flat_matrix(&setup.a_true),
            b: flat_vector(&setup.b),
            c: flat_vector(&setup.c),
            fa: flat_matrix(&fwd.dynamics),
            ga: flat_vector(&fwd.gain),
            fb: flat_matrix(&bwd.dynamics),
            gb: flat_vector(&bwd.gain),
            wa,
            wb,
        })
    }
}

#[inline]
fn euler(n: usize, f: &[f64], g: &[f64], x: &mut [f64; MAX_STATE_DIM], dt: f64, drive: f64) {
    let mut next = [0.0; MAX_STATE_DIM];
    for i in 0..n {
        let row = &f[i * n..(i + 1) * n];
        let mut acc = 0.0;
        for j in 0..n {
            acc += row[j] * x[j];
        }
        next[i] = x[i] + acc * dt + g[i] * drive;
    }
    x[..n].copy_from_slice(&next[..n]);
}

#[inline]
fn dot(n: usize, a: &[f64], b: &[f64]) -> f64 {
    a[..n].iter().zip(&b[..n]).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm_sq(n: usize, x: &[f64]) -> f64 {
    x[..n].iter().map(|v| v * v).sum()
}

/// Per-block noise source.
struct Noise {
    rng: ChaCha8Rng,
    substeps: u32,
    scale: f64,
    on: bool,
}

impl Noise {
    fn block(seed: u64, block: u64, substeps: u32, on: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        Noise {
            rng,
            substeps,
            scale: 1.0 / (substeps as f64).sqrt(),
            on,
        }
    }

    /// `(z_p, z_m)` for one step.
    #[inline]
    fn next(&mut self) -> (f64, f64) {
        if !self.on {
            return (0.0, 0.0);
        }
        let (mut p, mut m) = (0.0, 0.0);
        for _ in 0..self.substeps {
            p += self.rng.sample::<f64, _>(StandardNormal);
            m += self.rng.sample::<f64, _>(StandardNormal);
        }
        (p * self.scale, m * self.scale)
    }
}

/// Plant and forward-filter state carried across blocks.
#[derive(Clone, Copy)]
struct Checkpoint {
    x: [f64; MAX_STATE_DIM],
    xa: [f64; MAX_STATE_DIM],
}

fn validate(cfg: &SimConfig, n: usize) -> Result<(u64, u64, u64)> {
    let bad = |s: &str| Err(Error::Config(s.to_string()));
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return bad("dt must be positive");
    }
    if !(cfg.t_total.is_finite() && cfg.t_total > 0.0) {
        return bad("horizon must be positive");
    }
    if !(cfg.burn_in.is_finite() && cfg.burn_in >= 0.0) {
        return bad("burn-in must be non-negative");
    }
    if cfg.batches < 2 {
        return bad("need at least two batches");
    }
    if !cfg.noise_substeps.is_power_of_two() || cfg.noise_substeps > 64 {
        return bad("noise_substeps must be a power of two no larger than 64");
    }
    if let Some(x0) = &cfg.initial_state {
        if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
            return bad("initial state has the wrong length or non-finite entries");
        }
    }
    if let Some(t) = &cfg.trace {
        if t.stride == 0 {
            return bad("trace stride must be positive");
        }
    }
    let steps = (cfg.t_total / cfg.dt).round() as u64;
    let skip = (cfg.burn_in / cfg.dt).ceil() as u64;
    if steps <= 2 * skip || (steps - 2 * skip) < cfg.batches as u64 {
        return bad("horizon too short for the burn-in and batch count");
    }
    Ok((steps, skip, (steps - 2 * skip) / cfg.batches as u64))
}

/// Simulates the loop and returns empirical error moments over the record
/// with `burn_in` removed at both ends. Deterministic given the config.
pub fn simulate_tracking(setup: &TrackingSetup, cfg: &SimConfig) -> Result<SimResult> {
    let k = Compiled::new(setup, cfg.reverse_roles)?;
    let n = k.n;
    let (steps, skip, batch_len) = validate(cfg, n)?;
    let per_block = BLOCK_DRAWS / cfg.noise_substeps as u64;
    let blocks = steps.div_ceil(per_block);
    let dt = cfg.dt;
    let sdt = dt.sqrt();
    let limit = UNSTABLE_NORM * UNSTABLE_NORM;

    let mut trace = match &cfg.trace {
        Some(t) => Some(TraceWriter::create(&t.path, dt, cfg.t_total, cfg.seed, steps.div_ceil(t.stride))?),
        None => None,
    };

    // Forward pass: checkpoints, trace and stability check.
    let mut cp = Checkpoint {
        x: [0.0; MAX_STATE_DIM],
        xa: [0.0; MAX_STATE_DIM],
    };
    if let Some(x0) = &cfg.initial_state {
        cp.x[..n].copy_from_slice(x0);
    }
    let mut checkpoints = Vec::with_capacity(blocks as usize);
    for blk in 0..blocks {
        checkpoints.push(cp);
        let mut noise = Noise::block(cfg.seed, blk, cfg.noise_substeps, cfg.inject_noise);
        let end = ((blk + 1) * per_block).min(steps);
        for step in blk * per_block..end {
            let (zp, zm) = noise.next();
            let dy = dot(n, &k.c, &cp.x) * dt + sdt * zm;
            if let Some(t) = trace.as_mut() {
                let stride = cfg.trace.as_ref().map_or(1, |o| o.stride);
                if step % stride == 0 {
                    t.record(step as f64 * dt, cp.x[0], cp.xa[0], dy / dt)?;
                }
            }
            euler(n, &k.a, &k.b, &mut cp.x, dt, sdt * zp);
            euler(n, &k.fa, &k.ga, &mut cp.xa, dt, dy);
            let norm = norm_sq(n, &cp.x).max(norm_sq(n, &cp.xa));
            if norm.is_nan() || norm > limit {
                return Err(Error::Unstable {
                    step: step + 1,
                    norm: norm.sqrt(),
                });
            }
        }
    }
    if let Some(t) = trace {
        t.finish()?;
    }

    // Backward pass over regenerated blocks.
    let batches = cfg.batches;
    let lo = skip;
    let hi = skip + batch_len * batches as u64;
    let mut sums = vec![[0.0f64; 4]; batches];
    let mut xb = [0.0; MAX_STATE_DIM];
    let cap = per_block as usize;
    let mut xs = vec![0.0; cap * n];
    let mut xas = vec![0.0; cap * n];
    let mut dys = vec![0.0; cap];
    for blk in (0..blocks).rev() {
        let start = blk * per_block;
        let end = (start + per_block).min(steps);
        let len = (end - start) as usize;
        let mut c = checkpoints[blk as usize];
        let mut noise = Noise::block(cfg.seed, blk, cfg.noise_substeps, cfg.inject_noise);
        for i in 0..len {
            let (zp, zm) = noise.next();
            let dy = dot(n, &k.c, &c.x) * dt + sdt * zm;
            xs[i * n..(i + 1) * n].copy_from_slice(&c.x[..n]);
            xas[i * n..(i + 1) * n].copy_from_slice(&c.xa[..n]);
            dys[i] = dy;
            euler(n, &k.a, &k.b, &mut c.x, dt, sdt * zp);
            euler(n, &k.fa, &k.ga, &mut c.xa, dt, dy);
        }
        for i in (0..len).rev() {
            euler(n, &k.fb, &k.gb, &mut xb, dt, dys[i]);
            let norm = norm_sq(n, &xb);
            if norm.is_nan() || norm > limit {
                return Err(Error::Unstable {
                    step: start + i as u64,
                    norm: norm.sqrt(),
                });
            }
            let step = start + i as u64;
            if step < lo || step >= hi {
                continue;
            }
            let x = &xs[i * n..(i + 1) * n];
            let xa = &xas[i * n..(i + 1) * n];
            let ef = x[0] - xa[0];
            let eb = x[0] - xb[0];
            let es = x[0] - dot(n, &k.wa, xa) - dot(n, &k.wb, &xb);
            let s = &mut sums[((step - lo) / batch_len) as usize];
            s[0] += ef * ef;
            s[1] += eb * eb;
            s[2] += ef * eb;
            s[3] += es * es;
        }
    }

    let stats: Vec<(f64, f64)> = (0..4)
        .map(|q| {
            let means: Vec<f64> = sums.iter().map(|s| s[q] / batch_len as f64).collect();
            batch_means(&means)
        })
        .collect();
    Ok(SimResult {
        emp_sigma_f_sq: stats[0].0,
        emp_sigma_b_sq: stats[1].0,
        emp_sigma_fb_sq: stats[2].0,
        emp_sigma_sq: stats[3].0,
        stderr_f: stats[0].1,
        stderr_b: stats[1].1,
        stderr_fb: stats[2].1,
        stderr_s: stats[3].1,
        steps,
        samples: batch_len * batches as u64,
    })
}

/// Grand mean and its standard error from equally sized batch means.
pub fn batch_means(means: &[f64]) -> (f64, f64) {
    let b = means.len() as f64;
    let mean = means.iter().sum::<f64>() / b;
    if means.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (b - 1.0);
    (mean, (var / b).sqrt())
}

struct TraceWriter {
    out: BufWriter<File>,
    expected: u64,
    written: u64,
}

impl TraceWriter {
    fn create(path: &Path, dt: f64, t_total: f64, seed: u64, count: u64) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(TRACE_MAGIC)?;
        out.write_all(&dt.to_le_bytes())?;
        out.write_all(&t_total.to_le_bytes())?;
        out.write_all(&seed.to_le_bytes())?;
        out.write_all(&count.to_le_bytes())?;
        Ok(TraceWriter {
            out,
            expected: count,
            written: 0,
        })
    }

    fn record(&mut self, t: f64, phi: f64, phi_f: f64, theta: f64) -> Result<()> {
        for v in [t, phi, phi_f, theta] {
            self.out.write_all(&v.to_le_bytes())?;
        }
        self.written += 1;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        debug_assert_eq!(self.written, self.expected);
        self.out.flush()?;
        Ok(())
    }
}

/// A raw trace file: header fields and `(t, φ, φ̂_f, θ)` records.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub t_total: f64,
    pub seed: u64,
    pub records: Vec<[f64; 4]>,
}

/// Reads a trace written by [`simulate_tracking`].
///
/// Layout: magic `RPSTRC01`, then little-endian `f64 dt`, `f64 T`,
/// `u64 seed`, `u64 count`, followed by `count` records of four
/// little-endian `f64`.
pub fn read_trace(path: &Path) -> Result<Trace> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != TRACE_MAGIC {
        return Err(Error::Config(format!("{} is not a trace file", path.display())));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let dt = f64::from_le_bytes(next(&mut r)?);
    let t_total = f64::from_le_bytes(next(&mut r)?);
    let seed = u64::from_le_bytes(next(&mut r)?);
    let count = u64::from_le_bytes(next(&mut r)?);
    let mut records = Vec::with_capacity(count.min(1 << 24) as usize);
    for _ in 0..count {
        let mut rec = [0.0; 4];
        for v in rec.iter_mut() {
            *v = f64::from_le_bytes(next(&mut r)?);
        }
        records.push(rec);
    }
    Ok(Trace {
        dt,
        t_total,
        seed,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_process, ProcessParams};

    fn setup(kind: EstimatorKind, mu: f64, delta: f64) -> TrackingSetup {
        let m = build_process(ProcessParams::Ou {
            lambda: 5.9e4,
            kappa: 1.9e4,
        })
        .unwrap();
        let u = UncertaintySpec::for_model(&m, mu).unwrap();
        let sq = SqueezingConfig::explicit(1e6, 0.36, 0.59).unwrap();
        prepare_tracking(&m, &u, &sq, kind, delta, &EvalOptions::default()).unwrap()
    }

    fn short(seed: u64) -> SimConfig {
        SimConfig {
            dt: 1e-7,
            t_total: 0.02,
            burn_in: 5e-4,
            seed,
            batches: 10,
            ..SimConfig::default()
        }
    }

    #[test]
    fn batch_means_of_constant_has_zero_error() {
        assert_eq!(batch_means(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = batch_means(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let s = setup(EstimatorKind::Robust, 0.8, 1.0);
        let a = simulate_tracking(&s, &short(7)).unwrap();
        let b = simulate_tracking(&s, &short(7)).unwrap();
        assert_eq!(a, b);
        let c = simulate_tracking(&s, &short(8)).unwrap();
        assert_ne!(a.emp_sigma_sq, c.emp_sigma_sq);
    }

    #[test]
    fn noiseless_run_decays() {
        let s = setup(EstimatorKind::Optimal, 0.0, 0.0);
        let cfg = SimConfig {
            inject_noise: false,
            initial_state: Some(vec![0.5]),
            ..short(1)
        };
        let r = simulate_tracking(&s, &cfg).unwrap();
        assert!(r.emp_sigma_f_sq < 1e-12 && r.emp_sigma_b_sq < 1e-12 && r.emp_sigma_sq < 1e-12);
    }

    #[test]
    fn coarse_step_reports_instability() {
        let s = setup(EstimatorKind::Optimal, 0.0, 0.0);
        let cfg = SimConfig {
            dt: 1e-4,
            t_total: 1.0,
            burn_in: 0.0,
            ..SimConfig::default()
        };
        assert!(matches!(simulate_tracking(&s, &cfg), Err(Error::Unstable { .. })));
    }

    #[test]
    fn invalid_configs_rejected() {
        let s = setup(EstimatorKind::Optimal, 0.0, 0.0);
        for cfg in [
            SimConfig { dt: 0.0, ..short(1) },
            SimConfig { batches: 1, ..short(1) },
            SimConfig { noise_substeps: 3, ..short(1) },
            SimConfig { burn_in: 0.02, ..short(1) },
            SimConfig {
                initial_state: Some(vec![1.0, 2.0]),
                ..short(1)
            },
        ] {
            assert!(matches!(simulate_tracking(&s, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn trace_round_trip() {
        let s = setup(EstimatorKind::Optimal, 0.0, 0.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.trace");
        let cfg = SimConfig {
            t_total: 1e-3,
            burn_in: 0.0,
            trace: Some(TraceOptions {
                path: path.clone(),
                stride: 7,
            }),
            ..short(3)
        };
        let r = simulate_tracking(&s, &cfg).unwrap();
        let t = read_trace(&path).unwrap();
        assert_eq!(t.seed, 3);
        assert_eq!(t.dt, 1e-7);
        assert_eq!(t.records.len() as u64, r.steps.div_ceil(7));
        assert_eq!(t.records[0][..3], [0.0, 0.0, 0.0]);
        assert!((t.records[1][0] - 7e-7).abs() < 1e-18);
    }
}
