//! Pseudo-spectral RK4 integration of
//! `u_t + u_x + (1/2)(u^{p+1})_x + (3/4) D^alpha u_x + (5/4) D^alpha u_t = 0`.
//!
//! The state is advanced in Fourier space:
//! `u_hat_t = -i [omega(xi) u_hat + nu(xi) FT(u^{p+1})]` with
//! `omega = xi (1 + (3/4)|xi|^alpha) / (1 + (5/4)|xi|^alpha)` and
//! `nu = (xi / 2) / (1 + (5/4)|xi|^alpha)`. The power is formed pointwise in
//! physical space, so each RK4 stage costs two FFTs.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::solitary::{locate_extremum, SolitaryWave};
use crate::spectral::{riesz, SpectralGrid};

/// RK4 is stable on the imaginary axis up to `2 sqrt 2`; steps with
/// `max |omega| dt` above this are refused.
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

/// Default time step.
pub const DEFAULT_DT: f64 = 5e-4;

/// Default spacing of recorded samples.
pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub field: Vec<f64>,
    pub time: f64,
    pub step_count: u64,
}

impl EvolutionState {
    pub fn new(field: Vec<f64>) -> Self {
        Self {
            field,
            time: 0.0,
            step_count: 0,
        }
    }
}

/// Conserved quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub time: f64,
    /// `I = int u`.
    pub mass: f64,
    /// `F = (1/2) int (u^2 + (5/4)|D^{alpha/2} u|^2)`.
    pub momentum: f64,
    /// `H = -(1/2) int (u^2 + u^{p+2}/(p+2) + (3/4)|D^{alpha/2} u|^2)`.
    pub energy: f64,
}

/// Initial data `gamma * Q_c`.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub gamma: f64,
    pub base_wave: SolitaryWave,
}

impl PerturbationSpec {
    pub fn new(gamma: f64, base_wave: SolitaryWave) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!(
                "perturbation gamma = {gamma} must be positive"
            )));
        }
        Ok(Self { gamma, base_wave })
    }
}

/// Precomputed symbols and FFT workspace for one `(params, grid)` pair.
#[derive(Debug, Clone)]
pub struct Evolver {
    params: ModelParams,
    grid: SpectralGrid,
    omega: Vec<f64>,
    nu: Vec<f64>,
    nonlinear: bool,
}

struct Workspace {
    stage: Vec<Complex64>,
    power: Vec<Complex64>,
    scratch: Vec<Complex64>,
    k: [Vec<Complex64>; 4],
}

impl Workspace {
    fn new(grid: &SpectralGrid) -> Self {
        let n = grid.len();
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            stage: z.clone(),
            power: z.clone(),
            scratch: vec![Complex64::new(0.0, 0.0); grid.scratch_len()],
            k: [z.clone(), z.clone(), z.clone(), z],
        }
    }
}

impl Evolver {
    pub fn new(params: &ModelParams, grid: &SpectralGrid) -> Self {
        Self::build(params, grid, true)
    }

    /// Evolver for the linear part only (the `u^{p+1}` term dropped).
    pub fn linear(params: &ModelParams, grid: &SpectralGrid) -> Self {
        Self::build(params, grid, false)
    }

    fn build(params: &ModelParams, grid: &SpectralGrid, nonlinear: bool) -> Self {
        let ny = grid.nyquist_index();
        let mut omega = Vec::with_capacity(grid.len());
        let mut nu = Vec::with_capacity(grid.len());
        for (k, &xi) in grid.wavenumbers().iter().enumerate() {
            let s = riesz(xi, params.alpha);
            let den = 1.0 + 1.25 * s;
            // Odd symbols: the unpaired Nyquist mode is frozen.
            if k == ny {
                omega.push(0.0);
                nu.push(0.0);
            } else {
                omega.push(xi * (1.0 + 0.75 * s) / den);
                nu.push(if nonlinear { 0.5 * xi / den } else { 0.0 });
            }
        }
        Self {
            params: *params,
            grid: grid.clone(),
            omega,
            nu,
            nonlinear,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `max |omega(xi)|` over the grid.
    pub fn max_frequency(&self) -> f64 {
        self.omega.iter().fold(0.0f64, |m, w| m.max(w.abs()))
    }

    /// Rejects steps outside the RK4 stability region; warns when `dt`
    /// exceeds the grid-crossing time `h / max phase speed` (phase speed <= 1).
    pub fn check_step(&self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!(
                "time step dt = {dt} must be positive"
            )));
        }
        let w = self.max_frequency();
        if w * dt > RK4_STABILITY_LIMIT {
            return Err(Error::Config(format!(
                "dt = {dt} violates the RK4 stability bound max|omega| dt <= {RK4_STABILITY_LIMIT} \
                 (max|omega| = {w:.6}, so dt must be <= {:.6e})",
                RK4_STABILITY_LIMIT / w
            )));
        }
        if dt > self.grid.spacing() {
            warn!(
                "dt = {dt} exceeds the grid spacing {} divided by the maximal phase speed 1",
                self.grid.spacing()
            );
        }
        Ok(())
    }

    /// `k = -i [omega v + nu FT(u^{p+1})]` for the spectrum `v`.
    fn spectral_rhs(
        &self,
        v: &[Complex64],
        out: &mut [Complex64],
        ws: &mut WorkspaceView<'_>,
    ) -> bool {
        let mut finite = true;
        if self.nonlinear {
            ws.power.copy_from_slice(v);
            self.grid.inverse_with_scratch(ws.power, ws.scratch);
            let e = self.params.p as i32 + 1;
            for z in ws.power.iter_mut() {
                let u = z.re.powi(e);
                finite &= u.is_finite();
                *z = Complex64::new(u, 0.0);
            }
            self.grid.forward_with_scratch(ws.power, ws.scratch);
        }
        for (j, o) in out.iter_mut().enumerate() {
            let mut a = self.omega[j] * v[j];
            if self.nonlinear {
                a += self.nu[j] * ws.power[j];
            }
            *o = Complex64::new(a.im, -a.re);
        }
        finite
    }

    /// Time derivative `u_t` at the grid nodes.
    pub fn rhs(&self, field: &[f64]) -> Result<Vec<f64>> {
        let v = self.grid.forward(field)?;
        let mut ws = Workspace::new(&self.grid);
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        let ok = self.spectral_rhs(&v, &mut out, &mut ws.view());
        if !ok {
            return Err(Error::BlowUp {
                last_finite_time: 0.0,
            });
        }
        self.grid.inverse_in_place(&mut out);
        Ok(out.into_iter().map(|z| z.re).collect())
    }

    fn rk4_spectral(&self, v: &mut [Complex64], dt: f64, ws: &mut Workspace) -> bool {
        let n = v.len();
        let mut ok = true;
        let Workspace {
            stage,
            power,
            scratch,
            k,
        } = ws;
        let [k1, k2, k3, k4] = k;
        let mut view = WorkspaceView { power, scratch };
        ok &= self.spectral_rhs(v, k1, &mut view);
        for j in 0..n {
            stage[j] = v[j] + 0.5 * dt * k1[j];
        }
        ok &= self.spectral_rhs(stage, k2, &mut view);
        for j in 0..n {
            stage[j] = v[j] + 0.5 * dt * k2[j];
        }
        ok &= self.spectral_rhs(stage, k3, &mut view);
        for j in 0..n {
            stage[j] = v[j] + dt * k3[j];
        }
        ok &= self.spectral_rhs(stage, k4, &mut view);
        let w = dt / 6.0;
        for j in 0..n {
            v[j] += w * (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]);
            ok &= v[j].re.is_finite() && v[j].im.is_finite();
        }
        ok
    }

    /// One classical RK4 step.
    pub fn step_rk4(&self, state: &EvolutionState, dt: f64) -> Result<EvolutionState> {
        self.check_step(dt)?;
        let mut v = self.grid.forward(&state.field)?;
        let mut ws = Workspace::new(&self.grid);
        if !self.rk4_spectral(&mut v, dt, &mut ws) {
            return Err(Error::BlowUp {
                last_finite_time: state.time,
            });
        }
        self.grid.inverse_in_place(&mut v);
        Ok(EvolutionState {
            field: v.into_iter().map(|z| z.re).collect(),
            time: state.time + dt,
            step_count: state.step_count + 1,
        })
    }

    /// Advances `steps` RK4 steps of size `dt`; time is recomputed as
    /// `t0 + k dt` rather than accumulated.
    pub fn advance(&self, state: &EvolutionState, dt: f64, steps: u64) -> Result<EvolutionState> {
        self.check_step(dt)?;
        let mut v = self.grid.forward(&state.field)?;
        let mut ws = Workspace::new(&self.grid);
        for k in 0..steps {
            if !self.rk4_spectral(&mut v, dt, &mut ws) {
                return Err(Error::BlowUp {
                    last_finite_time: state.time + k as f64 * dt,
                });
            }
        }
        self.grid.inverse_in_place(&mut v);
        Ok(EvolutionState {
            field: v.into_iter().map(|z| z.re).collect(),
            time: state.time + steps as f64 * dt,
            step_count: state.step_count + steps,
        })
    }

    /// Exact flow of the linear part: multiplies the spectrum by
    /// `exp(-i t omega(xi))`.
    pub fn linear_propagator(&self, field: &[f64], t: f64) -> Result<Vec<f64>> {
        let mut v = self.grid.forward(field)?;
        for (z, &w) in v.iter_mut().zip(&self.omega) {
            *z *= Complex64::from_polar(1.0, -t * w);
        }
        self.grid.inverse_in_place(&mut v);
        Ok(v.into_iter().map(|z| z.re).collect())
    }

    pub fn invariants(&self, state: &EvolutionState) -> Result<InvariantRecord> {
        invariants(&state.field, state.time, &self.params, &self.grid)
    }
}

struct WorkspaceView<'a> {
    power: &'a mut [Complex64],
    scratch: &'a mut [Complex64],
}

impl Workspace {
    fn view(&mut self) -> WorkspaceView<'_> {
        WorkspaceView {
            power: &mut self.power,
            scratch: &mut self.scratch,
        }
    }
}

/// Quadratures of `I`, `F` and `H`; the quadratic parts are evaluated in
/// Fourier space (exact for trigonometric polynomials on the grid).
pub fn invariants(
    field: &[f64],
    time: f64,
    params: &ModelParams,
    grid: &SpectralGrid,
) -> Result<InvariantRecord> {
    let spec = grid.forward(field)?;
    let a = params.alpha;
    let p = params.p as i32;
    let mass = grid.integrate(field);
    let momentum = 0.5 * grid.spectral_l2(&spec, |xi| 1.0 + 1.25 * riesz(xi, a));
    let quad = grid.spectral_l2(&spec, |xi| 1.0 + 0.75 * riesz(xi, a));
    let power = grid.spacing() * field.iter().map(|u| u.powi(p + 2)).sum::<f64>();
    let energy = -0.5 * (quad + power / (p as f64 + 2.0));
    Ok(InvariantRecord {
        time,
        mass,
        momentum,
        energy,
    })
}

/// F-norm distance from `field` to the orbit of translates of `reference`,
/// `min_{x0} ||u - Q(. - x0)||` with `||v||^2 = int (v^2 + (5/4)|D^{alpha/2} v|^2)`.
/// Returns `(distance, best_shift)`.
pub fn orbital_distance(
    grid: &SpectralGrid,
    alpha: f64,
    field: &[f64],
    reference: &[f64],
) -> Result<(f64, f64)> {
    let u = grid.forward(field)?;
    let q = grid.forward(reference)?;
    let w: Vec<f64> = grid
        .wavenumbers()
        .iter()
        .map(|&xi| 1.0 + 1.25 * riesz(xi, alpha))
        .collect();
    let n = grid.len();
    let norm = 2.0 * grid.half_length() / (n as f64 * n as f64);
    let uu = grid.spectral_l2(&u, |xi| 1.0 + 1.25 * riesz(xi, alpha));
    let qq = grid.spectral_l2(&q, |xi| 1.0 + 1.25 * riesz(xi, alpha));
    // a_k = w_k u_k conj(q_k); cross(x0) = Re sum a_k e^{i xi_k x0}.
    let a: Vec<Complex64> = (0..n).map(|k| w[k] * u[k] * q[k].conj()).collect();
    let mut corr = a.clone();
    grid.inverse_in_place(&mut corr);
    let h = grid.spacing();
    let (j, _) = corr
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bj, bv), (j, z)| {
            if z.re > bv {
                (j, z.re)
            } else {
                (bj, bv)
            }
        });
    let x_grid = if j > n / 2 {
        (j as f64 - n as f64) * h
    } else {
        j as f64 * h
    };
    let xis = grid.wavenumbers();
    let cross = |x0: f64| -> f64 {
        a.iter()
            .zip(xis)
            .map(|(z, &xi)| {
                let (s, c) = (xi * x0).sin_cos();
                z.re * c - z.im * s
            })
            .sum::<f64>()
    };
    let best = golden_max(cross, x_grid - h, x_grid + h, 1e-12 * (1.0 + h));
    let d2 = uu + qq - 2.0 * norm * cross(best);
    Ok((d2.max(0.0).sqrt(), best))
}

/// Golden-section search for the maximum of a unimodal function.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSettings {
    pub dt: f64,
    pub t_final: f64,
    pub sample_interval: f64,
    /// Keep the full field at every sample time.
    pub keep_snapshots: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: 50.0,
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
            keep_snapshots: false,
        }
    }
}

/// One row of an evolution trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    /// Signed extremum of `u` in the direction of the wave.
    pub peak: f64,
    pub x_peak: f64,
    pub orbital_distance: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
}

/// Time and field of one stored sample.
pub type Snapshot = (f64, Vec<f64>);

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub params: ModelParams,
    pub gamma: f64,
    pub dt: f64,
    pub samples: Vec<TraceSample>,
    /// `(t, u)` pairs when snapshots were requested.
    pub snapshots: Vec<Snapshot>,
}

impl EvolutionTrace {
    /// `max_t |F(t) - F(0)|`.
    pub fn momentum_drift(&self) -> f64 {
        self.drift(|s| s.momentum)
    }

    pub fn mass_drift(&self) -> f64 {
        self.drift(|s| s.mass)
    }

    pub fn energy_drift(&self) -> f64 {
        self.drift(|s| s.energy)
    }

    fn drift(&self, f: impl Fn(&TraceSample) -> f64) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let f0 = f(first);
        self.samples
            .iter()
            .fold(0.0f64, |m, s| m.max((f(s) - f0).abs()))
    }
}

fn sample_count(interval: f64, dt: f64, what: &str) -> Result<u64> {
    let k = (interval / dt).round();
    if !(k >= 1.0) || ((k * dt - interval).abs() > 1e-9 * interval.max(1.0)) {
        return Err(Error::Config(format!(
            "{what} = {interval} must be a positive integer multiple of dt = {dt}"
        )));
    }
    Ok(k as u64)
}

/// Evolves `gamma * Q_c` and records peak, orbital distance from the orbit
/// of `Q_c`, and the invariants at every sample time.
pub fn run_experiment(
    spec: &PerturbationSpec,
    settings: &ExperimentSettings,
) -> Result<EvolutionTrace> {
    let wave = &spec.base_wave;
    let params = wave.params;
    let grid = &wave.grid;
    let sign = params.require_wave()?.sign();
    if !(settings.t_final > 0.0) {
        return Err(Error::Config(format!(
            "t_final = {} must be positive",
            settings.t_final
        )));
    }
    let evolver = Evolver::new(&params, grid);
    evolver.check_step(settings.dt)?;
    let per_sample = sample_count(settings.sample_interval, settings.dt, "sample interval")?;
    let total = sample_count(settings.t_final, settings.dt, "t_final")?;

    let record = |state: &EvolutionState| -> Result<TraceSample> {
        let inv = evolver.invariants(state)?;
        let (x_peak, peak) = locate_extremum(grid, &state.field, sign)?;
        let (dist, _) = orbital_distance(grid, params.alpha, &state.field, &wave.profile)?;
        Ok(TraceSample {
            t: state.time,
            peak,
            x_peak,
            orbital_distance: dist,
            mass: inv.mass,
            momentum: inv.momentum,
            energy: inv.energy,
        })
    };

    let mut state = EvolutionState::new(wave.profile.iter().map(|q| spec.gamma * q).collect());
    let mut samples = vec![record(&state)?];
    let mut snapshots = Vec::new();
    if settings.keep_snapshots {
        snapshots.push((0.0, state.field.clone()));
    }
    let mut done = 0u64;
    while done < total {
        let steps = per_sample.min(total - done);
        let next = evolver.advance(&state, settings.dt, steps)?;
        done += steps;
        state = EvolutionState {
            time: done as f64 * settings.dt,
            ..next
        };
        samples.push(record(&state)?);
        if settings.keep_snapshots {
            snapshots.push((state.time, state.field.clone()));
        }
    }
    Ok(EvolutionTrace {
        params,
        gamma: spec.gamma,
        dt: settings.dt,
        samples,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitary::exact_solution;
    use crate::spectral::max_abs_diff;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn mp(alpha: f64, c: f64) -> ModelParams {
        ModelParams::new(alpha, 1, c).unwrap()
    }

    #[test]
    fn constant_has_zero_rhs() {
        let g = SpectralGrid::new(8.0, 64).unwrap();
        let e = Evolver::new(&mp(1.2, 1.5), &g);
        let r = e.rhs(&vec![0.7; 64]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn traveling_wave_relation() {
        let g = SpectralGrid::new(32.0, 512).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let e = Evolver::new(&w.params, &g);
        let r = e.rhs(&w.profile).unwrap();
        // Q = 3(c-1) sech^2(a x) with a = sqrt(4(c-1)/(5c-3)) / 2 = 1/3.
        let (amp, a) = (1.5, 1.0 / 3.0);
        let want: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| {
                let s = 1.0 / (a * x).cosh();
                let dq = -2.0 * a * amp * s * s * (a * x).tanh();
                -1.5 * dq
            })
            .collect();
        assert!(max_abs_diff(&r, &want) < 1e-8);
    }

    #[test]
    fn linear_phase_speed() {
        let g = SpectralGrid::new(PI, 32).unwrap();
        let e = Evolver::linear(&mp(2.0, 1.5), &g);
        let eps = 1e-3;
        let u: Vec<f64> = g.nodes().iter().map(|x| eps * x.cos()).collect();
        let r = e.rhs(&u).unwrap();
        let w = 1.75 / 2.25;
        let want: Vec<f64> = g.nodes().iter().map(|x| eps * w * x.sin()).collect();
        assert!(max_abs_diff(&r, &want) < 1e-15);
        assert_relative_eq!(w, 0.77778, epsilon = 1e-5);
    }

    #[test]
    fn propagator_identities() {
        let g = SpectralGrid::new(PI, 32).unwrap();
        let e = Evolver::new(&mp(2.0, 1.5), &g);
        let u: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        assert!(max_abs_diff(&e.linear_propagator(&u, 0.0).unwrap(), &u) < 1e-15);
        let period = 2.0 * PI * 2.25 / 1.75;
        assert!(max_abs_diff(&e.linear_propagator(&u, period).unwrap(), &u) < 1e-13);
        let c = vec![0.4; 32];
        assert!(max_abs_diff(&e.linear_propagator(&c, 17.0).unwrap(), &c) < 1e-15);

        let g = SpectralGrid::new(16.0, 256).unwrap();
        let e = Evolver::new(&mp(0.7, 1.5), &g);
        let bump: Vec<f64> = g
            .nodes()
            .iter()
            .map(|x| (-x * x).exp() * (1.0 + x))
            .collect();
        let there = e.linear_propagator(&bump, 3.7).unwrap();
        let back = e.linear_propagator(&there, -3.7).unwrap();
        assert!(max_abs_diff(&back, &bump) < 1e-12);
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = SpectralGrid::new(8.0, 64).unwrap();
        let e = Evolver::new(&mp(1.0, 1.5), &g);
        let s = e
            .step_rk4(&EvolutionState::new(vec![0.0; 64]), 0.01)
            .unwrap();
        assert!(s.field.iter().all(|&v| v == 0.0));
        assert_eq!(s.step_count, 1);
        assert_relative_eq!(s.time, 0.01);
    }

    #[test]
    fn one_step_local_error_is_fifth_order() {
        let g = SpectralGrid::new(PI, 32).unwrap();
        let e = Evolver::linear(&mp(2.0, 1.5), &g);
        let u: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let err = |dt: f64| {
            let s = e.step_rk4(&EvolutionState::new(u.clone()), dt).unwrap();
            max_abs_diff(&s.field, &e.linear_propagator(&u, dt).unwrap())
        };
        let ratio = err(0.2) / err(0.1);
        assert!((ratio - 32.0).abs() < 2.0, "{ratio}");
    }

    #[test]
    fn global_order_ratio() {
        let g = SpectralGrid::new(16.0, 128).unwrap();
        let e = Evolver::linear(&mp(1.0, 1.5), &g);
        let u: Vec<f64> = g.nodes().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let exact = e.linear_propagator(&u, 1.0).unwrap();
        let err = |steps: u64| {
            let s = e
                .advance(&EvolutionState::new(u.clone()), 1.0 / steps as f64, steps)
                .unwrap();
            max_abs_diff(&s.field, &exact)
        };
        let ratio = err(20) / err(40);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn unstable_step_is_refused() {
        let g = SpectralGrid::new(8.0, 64).unwrap();
        let e = Evolver::new(&mp(2.0, 1.5), &g);
        let dt = 3.0 / e.max_frequency();
        let err = e
            .step_rk4(&EvolutionState::new(vec![0.0; 64]), dt)
            .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(e.check_step(2.7 / e.max_frequency()).is_ok());
    }

    #[test]
    fn cosine_invariants() {
        let g = SpectralGrid::new(PI, 64).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| x.cos()).collect();
        let r = invariants(&u, 0.0, &mp(2.0, 1.5), &g).unwrap();
        assert!(r.mass.abs() < 1e-14);
        assert_relative_eq!(r.momentum, 9.0 * PI / 8.0, max_relative = 1e-14);
        assert_relative_eq!(r.energy, -7.0 * PI / 8.0, max_relative = 1e-14);
        let z = invariants(&vec![0.0; 64], 0.0, &mp(2.0, 1.5), &g).unwrap();
        assert_eq!((z.mass, z.momentum, z.energy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn blow_up_is_reported() {
        let g = SpectralGrid::new(8.0, 64).unwrap();
        let e = Evolver::new(&mp(2.0, 1.5), &g);
        let mut u = vec![0.0; 64];
        u[3] = 1e200;
        let err = e.step_rk4(&EvolutionState::new(u), 1e-3).unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }

    #[test]
    fn exact_wave_translates() {
        let g = SpectralGrid::new(64.0, 1024).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let e = Evolver::new(&w.params, &g);
        let s = e
            .advance(&EvolutionState::new(w.profile.clone()), 5e-4, 2000)
            .unwrap();
        assert_relative_eq!(s.time, 1.0, epsilon = 1e-12);
        let want = exact_solution(1.5, &g).unwrap().profile;
        let want = g.translate(&want, 1.5).unwrap();
        let err = max_abs_diff(&s.field, &want);
        assert!(err < 1e-5, "{err:e}");
    }

    #[test]
    fn orbital_distance_finds_shift() {
        let g = SpectralGrid::new(32.0, 512).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let moved = g.translate(&w.profile, 3.217).unwrap();
        let (d, x0) = orbital_distance(&g, 2.0, &moved, &w.profile).unwrap();
        assert!(d < 1e-6, "{d:e}");
        assert_relative_eq!(x0, 3.217, epsilon = 1e-7);
        let scaled: Vec<f64> = w.profile.iter().map(|q| 1.1 * q).collect();
        let (d, _) = orbital_distance(&g, 2.0, &scaled, &w.profile).unwrap();
        let norm = (2.0 * w.momentum().unwrap()).sqrt();
        assert_relative_eq!(d, 0.1 * norm, max_relative = 1e-9);
    }

    #[test]
    fn unperturbed_experiment() {
        let g = SpectralGrid::new(32.0, 512).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        let spec = PerturbationSpec::new(1.0, w).unwrap();
        let settings = ExperimentSettings {
            dt: 1e-3,
            t_final: 2.0,
            sample_interval: 0.5,
            keep_snapshots: true,
        };
        let trace = run_experiment(&spec, &settings).unwrap();
        assert_eq!(trace.samples.len(), 5);
        assert_eq!(trace.snapshots.len(), 5);
        let last = trace.samples.last().unwrap();
        assert_relative_eq!(last.t, 2.0);
        assert_relative_eq!(last.x_peak, 3.0, epsilon = 1e-6);
        assert_relative_eq!(last.peak, 1.5, epsilon = 1e-6);
        assert!(trace.samples.iter().all(|s| s.orbital_distance < 1e-4));
        assert!(trace.mass_drift() < 1e-12);
        assert!(trace.momentum_drift() < 1e-9);
    }

    #[test]
    fn experiment_validates_inputs() {
        let g = SpectralGrid::new(32.0, 256).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        assert!(PerturbationSpec::new(0.0, w.clone()).is_err());
        let spec = PerturbationSpec::new(1.1, w).unwrap();
        let bad = ExperimentSettings {
            dt: 3e-4,
            t_final: 1.0,
            sample_interval: 0.5,
            keep_snapshots: false,
        };
        assert!(matches!(run_experiment(&spec, &bad), Err(Error::Config(_))));
    }
}
