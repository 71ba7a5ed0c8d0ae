//! Oracles shared by the integration tests.

#![allow(dead_code)]

use gfbbm::stability::{RegionCell, Verdict};
use gfbbm::{GroundStateMap, ModelParams, SpectralGrid};

/// Grid whose half-length is `natural_half_length` in units of the wave's
/// natural length `1/theta`.
pub fn scaled_grid(params: &ModelParams, natural_half_length: f64, n: usize) -> SpectralGrid {
    let theta = GroundStateMap::new(params).unwrap().length_factor;
    SpectralGrid::new(natural_half_length / theta, n).unwrap()
}

/// Critical speeds `mid +- half` of the quadratic `dK/dc = 0`, written out
/// independently of the library.
pub fn quadratic_roots(alpha: f64, p: f64) -> Option<(f64, f64)> {
    let r = 2.0 * alpha - p + alpha * p;
    if r < 0.0 {
        return None;
    }
    let den = 5.0 * alpha * (p + 2.0);
    let mid = (6.0 * alpha + 2.0 * p + 3.0 * alpha * p) / den;
    let half = (2.0 * r).sqrt() * p / den;
    Some((mid + half, mid - half))
}

/// Every curve across which the p-family verdict may change, as functions
/// whose sign flips on crossing.
pub fn boundary_functions(p: u32, alpha: f64, c: f64) -> Vec<f64> {
    let pf = p as f64;
    let mut f = vec![
        alpha - pf / (pf + 2.0),
        alpha - 0.5,
        alpha - 1.0,
        c - 0.6,
        c - 1.0,
    ];
    if let Some((c1, c2)) = quadratic_roots(alpha, pf) {
        f.push(c - c1);
        f.push(c - c2);
    } else {
        f.push(f64::NAN);
        f.push(f64::NAN);
    }
    f
}

/// True when some boundary curve separates the two lattice points (or one
/// of them lies on a curve).
pub fn separated(p: u32, a: (f64, f64), b: (f64, f64)) -> bool {
    let fa = boundary_functions(p, a.0, a.1);
    let fb = boundary_functions(p, b.0, b.1);
    fa.iter().zip(&fb).any(|(x, y)| {
        if x.is_nan() != y.is_nan() {
            // A root curve appears or disappears between the points.
            return true;
        }
        x.is_finite() && y.is_finite() && (x * y <= 0.0)
    })
}

/// Neighbouring lattice cells (in alpha or in c) whose verdicts differ
/// without a boundary curve between them.
pub fn unexplained_transitions(
    p: u32,
    alphas: &[f64],
    speeds: &[f64],
    cells: &[RegionCell],
) -> Vec<((f64, f64), (f64, f64))> {
    let nc = speeds.len();
    let at = |i: usize, j: usize| -> &RegionCell { &cells[i * nc + j] };
    let mut bad = Vec::new();
    for i in 0..alphas.len() {
        for j in 0..nc {
            let here = at(i, j);
            let mut check = |other: &RegionCell| {
                if here.verdict != other.verdict
                    && !separated(p, (here.alpha, here.c), (other.alpha, other.c))
                {
                    bad.push(((here.alpha, here.c), (other.alpha, other.c)));
                }
            };
            if j + 1 < nc {
                check(at(i, j + 1));
            }
            if i + 1 < alphas.len() {
                check(at(i + 1, j));
            }
        }
    }
    bad
}

pub fn count(cells: &[RegionCell], v: Verdict, pred: impl Fn(&RegionCell) -> bool) -> usize {
    cells.iter().filter(|c| c.verdict == v && pred(c)).count()
}

/// Least-squares slope of `ys` against `ts`.
pub fn slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let num: f64 = ts.iter().zip(ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let den: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    num / den
}
