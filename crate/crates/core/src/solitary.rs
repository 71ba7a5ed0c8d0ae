//! Solitary-wave profiles.
//!
//! A wave `u = Q_c(x - ct)` solves
//!
//! ```text
//! ((5/4)c - 3/4) D^alpha Q + (c - 1) Q - (1/2) Q^{p+1} = 0.
//! ```
//!
//! Positive waves (`c > 1`) are found directly by Petviashvili iteration.
//! Negative waves (`c < 3/5`, odd `p`) are found as `Q = -R`, where `R > 0`
//! solves the reflected equation whose linear part
//! `(3/4 - (5/4)c)|xi|^alpha + 1 - c` is positive definite.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Branch, GroundStateMap, ModelParams};
use crate::spectral::{max_abs, max_abs_diff, riesz, SpectralGrid};

/// Seed for the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialGuess {
    /// Gaussian sized from the ground-state scaling of the parameters.
    Auto,
    /// `amplitude * exp(-x^2 / width^2)`. The amplitude is taken positive;
    /// the branch fixes the sign.
    Gaussian { amplitude: f64, width: f64 },
    /// Explicit samples (of `|Q|`).
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PetviashviliSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Exponent of the stabilizing factor; `(p + 1)/p` when `None`.
    pub nu: Option<f64>,
    pub initial_guess: InitialGuess,
}

impl Default for PetviashviliSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 500,
            nu: None,
            initial_guess: InitialGuess::Auto,
        }
    }
}

impl PetviashviliSettings {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged solitary-wave profile, centered so its extremum sits at `x = 0`.
#[derive(Debug, Clone)]
pub struct SolitaryWave {
    pub params: ModelParams,
    pub grid: SpectralGrid,
    pub profile: Vec<f64>,
    /// Max-norm of the profile-equation residual at the samples.
    pub residual: f64,
    pub iterations: usize,
    pub stabilizing_factor_history: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Normalized ground state `phi` solving `D^alpha phi + phi - phi^{p+1} = 0`.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub alpha: f64,
    pub p: u32,
    pub grid: SpectralGrid,
    pub profile: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// `a D^alpha u + b u - kappa u^{p+1} = 0` with `a, b, kappa > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ProfileEquation {
    pub alpha: f64,
    pub p: u32,
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
}

impl ProfileEquation {
    /// Equation for `|Q_c|` on the branch of `params`.
    pub(crate) fn for_wave(params: &ModelParams, branch: Branch) -> Self {
        let s = branch.sign();
        Self {
            alpha: params.alpha,
            p: params.p,
            a: s * params.dispersion_coefficient(),
            b: s * params.linear_coefficient(),
            kappa: 0.5,
        }
    }

    pub(crate) fn normalized(alpha: f64, p: u32) -> Self {
        Self {
            alpha,
            p,
            a: 1.0,
            b: 1.0,
            kappa: 1.0,
        }
    }

    pub(crate) fn symbol(&self, xi: f64) -> f64 {
        self.a * riesz(xi, self.alpha) + self.b
    }

    pub(crate) fn residual(&self, grid: &SpectralGrid, u: &[f64]) -> Result<f64> {
        let lin = grid.apply_symbol(u, |xi| Complex64::new(self.symbol(xi), 0.0))?;
        Ok(lin.iter().zip(u).fold(0.0f64, |m, (l, v)| {
            m.max((l - self.kappa * v.powi(self.p as i32 + 1)).abs())
        }))
    }

    /// One application of the iteration map: returns the next iterate and
    /// the stabilizing factor `M` (before raising to `nu`).
    fn step(&self, grid: &SpectralGrid, u: &[f64], nu: f64) -> Result<(Vec<f64>, f64)> {
        let pow = self.p as i32 + 1;
        let u_hat = grid.forward(u)?;
        let nl: Vec<f64> = u.iter().map(|v| v.powi(pow)).collect();
        let nl_hat = grid.forward(&nl)?;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((uh, nh), &xi) in u_hat.iter().zip(&nl_hat).zip(grid.wavenumbers()) {
            num += self.symbol(xi) * uh.norm_sqr();
            den += self.kappa * (nh * uh.conj()).re;
        }
        if den == 0.0 || !den.is_finite() || !num.is_finite() {
            return Err(Error::Divergence { iteration: 0 });
        }
        let m = num / den;
        let factor = m.abs().powf(nu) * m.signum();
        let mut next = nl_hat;
        for (v, &xi) in next.iter_mut().zip(grid.wavenumbers()) {
            *v *= factor * self.kappa / self.symbol(xi);
        }
        let next = grid.inverse_real(next, max_abs(u))?;
        Ok((next, m))
    }

    fn check_positive(&self, grid: &SpectralGrid) -> Result<()> {
        if let Some(&xi) = grid
            .wavenumbers()
            .iter()
            .find(|&&xi| !(self.symbol(xi) > 0.0))
        {
            return Err(Error::Existence(format!(
                "linear symbol {}|xi|^{} + {} is not positive at xi = {xi}",
                self.a, self.alpha, self.b
            )));
        }
        Ok(())
    }
}

struct Converged {
    profile: Vec<f64>,
    iterations: usize,
    history: Vec<f64>,
    residual: f64,
}

fn run_iteration(
    eq: &ProfileEquation,
    grid: &SpectralGrid,
    mut u: Vec<f64>,
    settings: &PetviashviliSettings,
) -> Result<Converged> {
    settings.validate()?;
    eq.check_positive(grid)?;
    grid.check_len(&u)?;
    let nu = settings.nu.unwrap_or((eq.p as f64 + 1.0) / eq.p as f64);
    let tol = settings.tolerance;
    let mut history = Vec::new();
    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=settings.max_iterations {
        let (next, m) = eq.step(grid, &u, nu).map_err(|e| match e {
            Error::Divergence { .. } => Error::Divergence { iteration: it },
            e => e,
        })?;
        if next.iter().any(|v| !v.is_finite()) || !m.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        history.push(m);
        let scale = max_abs(&next).max(1.0);
        change = max_abs_diff(&next, &u);
        u = next;
        if change < tol * scale {
            residual = eq.residual(grid, &u)?;
            if residual < 100.0 * tol * scale {
                return Ok(Converged {
                    profile: u,
                    iterations: it,
                    history,
                    residual,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iterations,
        change,
        residual: if residual.is_finite() {
            residual
        } else {
            eq.residual(grid, &u)?
        },
    })
}

fn gaussian(grid: &SpectralGrid, amplitude: f64, width: f64) -> Vec<f64> {
    grid.nodes()
        .iter()
        .map(|x| amplitude * (-(x * x) / (width * width)).exp())
        .collect()
}

fn initial_profile(
    grid: &SpectralGrid,
    guess: &InitialGuess,
    default_amplitude: f64,
    default_width: f64,
) -> Result<Vec<f64>> {
    match guess {
        InitialGuess::Auto => Ok(gaussian(grid, default_amplitude, default_width)),
        InitialGuess::Gaussian { amplitude, width } => {
            if !(*width > 0.0) || *amplitude == 0.0 {
                return Err(Error::Config(
                    "Gaussian seed needs a nonzero amplitude and positive width".into(),
                ));
            }
            Ok(gaussian(grid, amplitude.abs(), *width))
        }
        InitialGuess::Explicit(v) => {
            grid.check_len(v)?;
            Ok(v.iter().map(|x| x.abs()).collect())
        }
    }
}

/// Location and value of the extremum of `sign * field`, refined to sub-grid
/// accuracy with Newton steps on the trigonometric interpolant.
pub fn locate_extremum(grid: &SpectralGrid, field: &[f64], sign: f64) -> Result<(f64, f64)> {
    grid.check_len(field)?;
    let (j, _) = field
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |(bj, bv), (j, &v)| {
            if sign * v > bv {
                (j, sign * v)
            } else {
                (bj, bv)
            }
        });
    let spec = grid.forward(field)?;
    let x0 = grid.nodes()[j];
    let h = grid.spacing();
    let mut x = x0;
    for _ in 0..8 {
        let (d1, d2) = grid.interpolate_derivatives(&spec, x);
        if d2 == 0.0 {
            break;
        }
        let dx = d1 / d2;
        x -= dx;
        if (x - x0).abs() > h {
            x = x0;
            break;
        }
        if dx.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok((x, grid.interpolate_spectrum(&spec, x)))
}

/// Circularly shifts `field` so the extremum of `sign * field` lands at `x = 0`.
pub fn center_profile(grid: &SpectralGrid, field: &[f64], sign: f64) -> Result<Vec<f64>> {
    let (x_peak, _) = locate_extremum(grid, field, sign)?;
    if x_peak.abs() <= 1e-14 * grid.half_length() {
        return Ok(field.to_vec());
    }
    grid.translate(field, -x_peak)
}

impl SolitaryWave {
    fn sign(&self) -> f64 {
        self.params.branch().sign()
    }

    /// Residual of the profile equation at the samples.
    pub fn equation_residual(&self) -> Result<f64> {
        let branch = self.params.require_wave()?;
        let s = branch.sign();
        let r: Vec<f64> = self.profile.iter().map(|v| s * v).collect();
        ProfileEquation::for_wave(&self.params, branch).residual(&self.grid, &r)
    }

    pub fn peak(&self) -> f64 {
        let s = self.sign();
        self.profile
            .iter()
            .fold(0.0f64, |m, &v| if s * v > s * m { v } else { m })
    }

    /// `int Q^2`.
    pub fn l2_squared(&self) -> f64 {
        self.grid.l2_squared(&self.profile)
    }

    /// Momentum `F(Q) = (1/2) int (Q^2 + (5/4)|D^{alpha/2} Q|^2)`.
    pub fn momentum(&self) -> Result<f64> {
        momentum_of(&self.grid, &self.profile, self.params.alpha)
    }

    /// Derivative `Q'`.
    pub fn derivative(&self) -> Result<Vec<f64>> {
        self.grid.derivative(&self.profile)
    }

    /// Applies the iteration map once more to the converged profile; returns
    /// the max-norm change and the stabilizing factor.
    pub fn fixed_point_check(&self) -> Result<(f64, f64)> {
        let branch = self.params.require_wave()?;
        let eq = ProfileEquation::for_wave(&self.params, branch);
        let s = branch.sign();
        let r: Vec<f64> = self.profile.iter().map(|v| s * v).collect();
        let nu = (eq.p as f64 + 1.0) / eq.p as f64;
        let (next, m) = eq.step(&self.grid, &r, nu)?;
        Ok((max_abs_diff(&next, &r), m))
    }

    fn diagnose(&mut self) {
        let peak = self.peak().abs();
        let s = self.sign();
        let n = self.grid.len();
        if peak == 0.0 {
            return;
        }
        let c = self.grid.center_index();
        if (self.profile[c] - self.peak()).abs() > 1e-8 * peak {
            self.warn("profile extremum is not at the grid center".to_string());
        }
        let min_signed = self
            .profile
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(s * v));
        if min_signed < -1e-8 * peak {
            self.warn(format!(
                "profile changes sign: ripple {min_signed:e} relative to peak {peak:e}"
            ));
        }
        let asym = (1..n / 2).fold(0.0f64, |m, k| {
            m.max((self.profile[c + k] - self.profile[c - k]).abs())
        });
        if asym > 1e-8 * peak {
            self.warn(format!(
                "profile is not even about its peak (asymmetry {asym:e})"
            ));
        }
        let edge = self.profile[0].abs();
        if edge > 1e-8 * peak {
            self.warn(format!(
                "domain too small: |Q(-L)| = {edge:e} exceeds 1e-8 of the peak"
            ));
        }
        let nl: Vec<f64> = self
            .profile
            .iter()
            .map(|v| v.powi(self.params.p as i32 + 1))
            .collect();
        if let Ok(tail) = self.grid.spectral_tail_ratio(&nl) {
            if tail > 1e-12 {
                self.warn(format!(
                    "top third of the spectrum of Q^(p+1) is {tail:e}; grid may alias"
                ));
            }
        }
    }

    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

pub(crate) fn momentum_of(grid: &SpectralGrid, field: &[f64], alpha: f64) -> Result<f64> {
    let spec = grid.forward(field)?;
    Ok(0.5 * grid.spectral_l2(&spec, |xi| 1.0 + 1.25 * riesz(xi, alpha)))
}

/// Petviashvili iteration for the solitary wave at `params`.
pub fn solve_petviashvili(
    params: &ModelParams,
    grid: &SpectralGrid,
    settings: &PetviashviliSettings,
) -> Result<SolitaryWave> {
    let branch = params.require_wave()?;
    let map = GroundStateMap::new(params)?;
    let eq = ProfileEquation::for_wave(params, branch);
    let seed = initial_profile(
        grid,
        &settings.initial_guess,
        1.5 * map.amplitude_factor,
        2.0 / map.length_factor,
    )?;
    let done = run_iteration(&eq, grid, seed, settings)?;
    let s = branch.sign();
    let signed: Vec<f64> = done.profile.iter().map(|v| s * v).collect();
    let profile = center_profile(grid, &signed, s)?;
    let residual = eq.residual(grid, &profile.iter().map(|v| s * v).collect::<Vec<_>>())?;
    debug_assert!(residual.is_finite());
    let mut wave = SolitaryWave {
        params: *params,
        grid: grid.clone(),
        profile,
        residual: residual.max(done.residual),
        iterations: done.iterations,
        stabilizing_factor_history: done.history,
        warnings: Vec::new(),
    };
    wave.diagnose();
    Ok(wave)
}

/// Normalized ground state on `grid`.
pub fn solve_ground_state(
    alpha: f64,
    p: u32,
    grid: &SpectralGrid,
    settings: &PetviashviliSettings,
) -> Result<GroundState> {
    // Existence of phi does not depend on c; any positive-branch speed will do.
    ModelParams::new(alpha, p, 2.0)?.require_wave()?;
    let eq = ProfileEquation::normalized(alpha, p);
    let seed = initial_profile(grid, &settings.initial_guess, 1.5, 2.0)?;
    let done = run_iteration(&eq, grid, seed, settings)?;
    let profile = center_profile(grid, &done.profile, 1.0)?;
    let residual = eq.residual(grid, &profile)?;
    Ok(GroundState {
        alpha,
        p,
        grid: grid.clone(),
        profile,
        residual,
        iterations: done.iterations,
    })
}

/// Closed-form wave for `alpha = 2, p = 1`:
/// `3(c - 1) sech^2((1/2) sqrt(4(c - 1)/(5c - 3)) x)`.
pub fn exact_solution(c: f64, grid: &SpectralGrid) -> Result<SolitaryWave> {
    let params = ModelParams::new(2.0, 1, c)?;
    params.require_wave()?;
    let amplitude = 3.0 * (c - 1.0);
    let k = exact_inner_coefficient(c);
    let profile: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|x| amplitude / (k * x).cosh().powi(2))
        .collect();
    let mut wave = SolitaryWave {
        params,
        grid: grid.clone(),
        profile,
        residual: 0.0,
        iterations: 0,
        stabilizing_factor_history: Vec::new(),
        warnings: Vec::new(),
    };
    wave.residual = wave.equation_residual()?;
    Ok(wave)
}

/// `(1/2) sqrt(4(c - 1)/(5c - 3))`.
pub fn exact_inner_coefficient(c: f64) -> f64 {
    0.5 * (4.0 * (c - 1.0) / (5.0 * c - 3.0)).sqrt()
}

/// Rescales a normalized ground state to the wave at `params`, sampled on `grid`.
pub fn ground_state_rescale(
    ground: &GroundState,
    params: &ModelParams,
    grid: &SpectralGrid,
) -> Result<SolitaryWave> {
    if ground.alpha != params.alpha || ground.p != params.p {
        return Err(Error::Config(format!(
            "ground state (alpha = {}, p = {}) does not match parameters (alpha = {}, p = {})",
            ground.alpha, ground.p, params.alpha, params.p
        )));
    }
    let map = GroundStateMap::new(params)?;
    let reach = map.length_factor * grid.half_length();
    if reach > ground.grid.half_length() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "rescaled domain theta * L = {reach} exceeds the ground-state domain {}",
            ground.grid.half_length()
        )));
    }
    let spec = ground.grid.forward(&ground.profile)?;
    let scale = map.sign * map.amplitude_factor;
    let profile: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            scale
                * ground
                    .grid
                    .interpolate_spectrum(&spec, map.length_factor * x)
        })
        .collect();
    let mut wave = SolitaryWave {
        params: *params,
        grid: grid.clone(),
        profile,
        residual: 0.0,
        iterations: ground.iterations,
        stabilizing_factor_history: Vec::new(),
        warnings: Vec::new(),
    };
    // Sample spacing in ground-state coordinates must resolve phi.
    let cutoff = std::f64::consts::PI / (map.length_factor * grid.spacing());
    let peak = spec.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let beyond = spec
        .iter()
        .zip(ground.grid.wavenumbers())
        .filter(|(_, xi)| xi.abs() > cutoff)
        .fold(0.0f64, |m, (v, _)| m.max(v.norm()));
    if beyond > 1e-10 * peak {
        wave.warn(format!(
            "target grid under-resolves the rescaled profile (tail {:e})",
            beyond / peak
        ));
    }
    wave.residual = wave.equation_residual()?;
    wave.diagnose();
    Ok(wave)
}

/// Pohozaev check: `(measured, predicted)` values of
/// `int |D^{alpha/2} Q|^2 / int Q^2`.
pub fn pohozaev_ratio(wave: &SolitaryWave) -> Result<(f64, f64)> {
    let spec = wave.grid.forward(&wave.profile)?;
    let mass = wave.grid.spectral_l2(&spec, |_| 1.0);
    if !(mass > 0.0) {
        return Err(Error::Degenerate("profile has zero L2 norm".into()));
    }
    let alpha = wave.params.alpha;
    let grad = wave.grid.spectral_l2(&spec, |xi| riesz(xi, alpha));
    Ok((grad / mass, pohozaev_prediction(&wave.params)))
}

/// `4p(c - 1) / ((5c - 3)(alpha(p + 2) - p))`.
pub fn pohozaev_prediction(params: &ModelParams) -> f64 {
    let p = params.p_f64();
    let c = params.c;
    4.0 * p * (c - 1.0) / ((5.0 * c - 3.0) * (params.alpha * (p + 2.0) - p))
}
