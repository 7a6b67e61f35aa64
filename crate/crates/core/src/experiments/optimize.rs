//! One-dimensional minimization of the squeezing level.

use crate::error::{Error, Result};

/// Search interval for the pure squeezing parameter.
pub const R_MAX: f64 = 3.0;

const GRID_FALLBACK: usize = 61;
const PRESCAN: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Set when the objective looked multimodal and the grid fallback ran.
    pub non_unimodal: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

struct Probe<'a, F> {
    f: &'a mut F,
    seen: Vec<(f64, f64)>,
}

impl<F: FnMut(f64) -> f64> Probe<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.seen.push((x, v));
        v
    }

    fn golden(&mut self, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.eval(c);
        let mut fd = self.eval(d);
        while b - a > tol {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.eval(d);
            }
        }
        (a, b)
    }

    fn best_in(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        self.seen
            .iter()
            .filter(|(x, _)| *x >= a && *x <= b)
            .copied()
            .min_by(|p, q| p.1.total_cmp(&q.1))
    }
}

/// Number of separate descent regions in a sampled curve.
fn local_minima(v: &[f64]) -> usize {
    (0..v.len())
        .filter(|&i| {
            let left = i == 0 || v[i] < v[i - 1];
            let right = i + 1 == v.len() || v[i] <= v[i + 1];
            left && right && v[i].is_finite()
        })
        .count()
}

/// Minimizes `f` on `[lo, hi]` by golden-section search to a bracket width
/// below `tol`. A 7-point pre-scan with more than one local minimum, or a
/// point evaluated along the way that beats the final bracket, marks the
/// objective as multimodal: `f` is then sampled on a 61-point grid and the
/// best cell is refined again. Non-finite values count as +∞.
pub fn minimize_scalar<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum> {
    if !(lo < hi && tol > 0.0) {
        return Err(Error::InvalidParam(format!("bad search interval [{lo}, {hi}]")));
    }
    let mut p = Probe { f: &mut f, seen: Vec::new() };
    let scan: Vec<f64> = (0..PRESCAN)
        .map(|i| p.eval(lo + (hi - lo) * i as f64 / (PRESCAN - 1) as f64))
        .collect();
    let (a, b) = p.golden(lo, hi, tol);
    let inside = p.best_in(a, b).unwrap_or((0.5 * (a + b), f64::INFINITY));
    let global = p.best_in(lo, hi).expect("at least two evaluations");
    let non_unimodal = local_minima(&scan) > 1 || global.1 < inside.1;
    let mut best = inside;
    if non_unimodal || !inside.1.is_finite() {
        if non_unimodal {
            log::warn!("objective is not unimodal on [{lo}, {hi}]; falling back to a grid scan");
        }
        let h = (hi - lo) / (GRID_FALLBACK - 1) as f64;
        let grid: Vec<(f64, f64)> = (0..GRID_FALLBACK)
            .map(|i| {
                let x = lo + h * i as f64;
                (x, p.eval(x))
            })
            .collect();
        let (i, _) = grid
            .iter()
            .enumerate()
            .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
            .expect("non-empty grid");
        let (ra, rb) = ((grid[i].0 - h).max(lo), (grid[i].0 + h).min(hi));
        p.golden(ra, rb, tol);
        best = p.best_in(lo, hi).expect("evaluated");
    }
    if !best.1.is_finite() {
        return Err(Error::NoAdmissibleSolution(
            "objective is infinite over the whole search interval".into(),
        ));
    }
    Ok(Minimum {
        x: best.0,
        value: best.1,
        evaluations: p.seen.len(),
        non_unimodal,
    })
}
