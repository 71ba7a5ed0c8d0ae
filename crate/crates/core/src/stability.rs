//! Stability classification of solitary waves.
//!
//! Two independent routes are provided:
//!
//! * analytic: the sign of `dK/dc` for the closed-form
//!   `K(c) = |c-1|^{2/p} ((5c-3)/(4(c-1)))^{1/alpha} (1 + 5p(c-1)/((5c-3)(alpha(p+2)-p)))`,
//!   to which the momentum `F(Q_c)` is proportional;
//! * numeric: negative-eigenvalue counts of the dense linearized operator and
//!   the sign of `I = -dF/dc` from re-solved neighbouring waves.
//!
//! A wave is spectrally stable when the linearized operator has exactly one
//! negative eigenvalue and `I < 0` (so the index `n(L) - n(I)` vanishes).

use log::warn;
use nalgebra::{DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Branch, ModelParams, NEGATIVE_SPEED_LIMIT};
use crate::solitary::{solve_petviashvili, GroundState, PetviashviliSettings, SolitaryWave};
use crate::spectral::{riesz, SpectralGrid};
use crate::sweep;

/// Largest grid for which dense matrices are assembled.
pub const DENSE_CAP: usize = 1 << 12;

/// Default speed increment for the momentum derivative.
pub const DEFAULT_DC: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    SpectrallyStable,
    SpectrallyUnstable,
    NoSolitaryWave,
    HamiltonianUndefined,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::SpectrallyStable => "SpectrallyStable",
            Verdict::SpectrallyUnstable => "SpectrallyUnstable",
            Verdict::NoSolitaryWave => "NoSolitaryWave",
            Verdict::HamiltonianUndefined => "HamiltonianUndefined",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: ModelParams,
    pub method: Method,
    /// Sign of `dK/dc`: -1, 0 or +1 (0 also when `K` is undefined).
    pub k_derivative_sign: i8,
    pub roots: Option<(f64, f64)>,
    /// Negative eigenvalues of the linearized operator.
    pub n_negative: usize,
    /// Cosine between the near-kernel eigenvector and `Q'` (numeric only).
    pub kernel_quality: Option<f64>,
    /// Number of negative eigenvalues of the scalar `I`: 1 when `I < 0`.
    pub n_i: u8,
    /// `n_negative - n_i`: negative directions left on the momentum-orthogonal subspace.
    pub index: i64,
    pub momentum_derivative: Option<f64>,
    pub essential_edge_estimate: Option<f64>,
    pub verdict: Verdict,
}

fn undefined_k(params: &ModelParams) -> Result<()> {
    if !params.hamiltonian_defined() {
        return Err(Error::HamiltonianUndefined {
            alpha: params.alpha,
            p: params.p,
            bound: params.alpha_threshold(),
        });
    }
    if params.c >= NEGATIVE_SPEED_LIMIT && params.c <= 1.0 {
        return Err(Error::NoSolution {
            c: params.c,
            reason: "K(c) is defined only on (0, 3/5) and (1, inf)".into(),
        });
    }
    Ok(())
}

/// `K(c)`; the momentum of the wave is `F(Q_c) = 2^{2/p - 1} K(c) ||phi||^2`.
///
/// For `c < 3/5` the power `(c-1)^{2/p}` is taken as `((c-1)^2)^{1/p}` and
/// the base of the `1/alpha` power is the (positive) ratio itself.
pub fn k_of_c(params: &ModelParams) -> Result<f64> {
    undefined_k(params)?;
    let p = params.p_f64();
    let c = params.c;
    let s = c - 1.0;
    let r = 5.0 * c - 3.0;
    let beta = params.alpha * (p + 2.0) - p;
    Ok((s * s).powf(1.0 / p)
        * (r / (4.0 * s)).powf(1.0 / params.alpha)
        * (1.0 + 5.0 * p * s / (r * beta)))
}

/// `d ln K / dc`, which carries the sign of `dK/dc` since `K > 0`.
pub fn k_log_derivative(params: &ModelParams) -> Result<f64> {
    undefined_k(params)?;
    let p = params.p_f64();
    let c = params.c;
    let s = c - 1.0;
    let r = 5.0 * c - 3.0;
    let beta = params.alpha * (p + 2.0) - p;
    let g = 5.0 * p * s / (r * beta);
    let dg = 10.0 * p / (beta * r * r);
    Ok(2.0 / (p * s) + (5.0 / r - 1.0 / s) / params.alpha + dg / (1.0 + g))
}

pub fn k_derivative(params: &ModelParams) -> Result<f64> {
    Ok(k_of_c(params)? * k_log_derivative(params)?)
}

/// `2^{2/p - 1}`: constant linking `F(Q_c)` to `K(c) ||phi||^2`.
pub fn momentum_scale(p: u32) -> f64 {
    2f64.powf(2.0 / p as f64 - 1.0)
}

/// Zeros `(c1, c2)` of `dK/dc`, `c1 > c2`:
/// `(6 alpha + 2p + 3 alpha p +- sqrt(2) p sqrt(2 alpha - p + alpha p)) / (5 alpha (p + 2))`.
pub fn critical_speeds(alpha: f64, p: u32) -> Result<(f64, f64)> {
    let p = p as f64;
    let radicand = 2.0 * alpha - p + alpha * p;
    if radicand < 0.0 {
        return Err(Error::NoRealRoot { radicand });
    }
    let base = 6.0 * alpha + 2.0 * p + 3.0 * alpha * p;
    let spread = std::f64::consts::SQRT_2 * p * radicand.sqrt();
    let den = 5.0 * alpha * (p + 2.0);
    Ok(((base + spread) / den, (base - spread) / den))
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Analytic classification from the sign of `dK/dc`.
pub fn classify(params: &ModelParams) -> StabilityReport {
    let roots = critical_speeds(params.alpha, params.p).ok();
    let mut report = StabilityReport {
        params: *params,
        method: Method::Analytic,
        k_derivative_sign: 0,
        roots,
        n_negative: 0,
        kernel_quality: None,
        n_i: 0,
        index: 0,
        momentum_derivative: None,
        essential_edge_estimate: None,
        verdict: Verdict::NoSolitaryWave,
    };
    match params.require_wave() {
        Err(Error::HamiltonianUndefined { .. }) => {
            report.verdict = Verdict::HamiltonianUndefined;
            return report;
        }
        Err(_) => return report,
        Ok(_) => {}
    }
    let sign = k_log_derivative(params).map(sign_of).unwrap_or(0);
    report.k_derivative_sign = sign;
    report.n_negative = 1;
    report.n_i = u8::from(sign > 0);
    report.index = 1 - report.n_i as i64;
    report.verdict = verdict_from_counts(report.n_negative, report.n_i);
    report
}

fn verdict_from_counts(n_negative: usize, n_i: u8) -> Verdict {
    if n_negative == 1 && n_i == 1 {
        Verdict::SpectrallyStable
    } else {
        Verdict::SpectrallyUnstable
    }
}

/// One cell of a region map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub alpha: f64,
    pub c: f64,
    pub verdict: Verdict,
}

/// Classifies every `(alpha, c)` pair of the lattice, sorted by `(alpha, c)`.
pub fn region_map(p: u32, alphas: &[f64], speeds: &[f64]) -> Result<Vec<RegionCell>> {
    if alphas.is_empty() || speeds.is_empty() {
        return Err(Error::Config(
            "region map needs non-empty alpha and c ranges".into(),
        ));
    }
    let points: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| speeds.iter().map(move |&c| (a, c)))
        .collect();
    let cells = sweep::map_points(&points, |&(alpha, c)| {
        ModelParams::new(alpha, p, c).map(|m| RegionCell {
            alpha,
            c,
            verdict: classify(&m).verdict,
        })
    });
    let mut cells = cells.into_iter().collect::<Result<Vec<_>>>()?;
    cells.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.c.total_cmp(&b.c)));
    Ok(cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `((5/4)c - 3/4) D^alpha + c - 1 - ((p+1)/2) Q^p`, positive branch.
    Lc,
    /// `(3/4 - (5/4)c) D^alpha + 1 - c - ((p+1)/2) R^p` with `R = -Q > 0`.
    LcMinus,
    /// `(I + (5/4) D^alpha)^{-1} d/dx` composed with the linearized operator.
    JLc,
    /// `D^alpha + 1 - (p+1) phi^p` for the normalized ground state.
    GroundState,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: DMatrix<f64>,
    pub params: Option<ModelParams>,
    pub grid: SpectralGrid,
}

impl OperatorMatrix {
    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, OperatorKind::JLc)
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).as_slice().to_vec()
    }
}

fn check_cap(grid: &SpectralGrid, cap: usize) -> Result<()> {
    if grid.len() > cap {
        return Err(Error::Resource { n: grid.len(), cap });
    }
    Ok(())
}

/// Dense circulant matrix of a Fourier multiplier. `parity` is +1 for even
/// symbols (real, symmetric result) and -1 for odd ones (skew result).
fn circulant(grid: &SpectralGrid, symbol: &[Complex64], parity: f64) -> DMatrix<f64> {
    let n = grid.len();
    let mut col = symbol.to_vec();
    grid.inverse_in_place(&mut col);
    let mut first: Vec<f64> = col.iter().map(|v| v.re).collect();
    for j in 1..n / 2 {
        let avg = 0.5 * (first[j] + parity * first[n - j]);
        first[j] = avg;
        first[n - j] = parity * avg;
    }
    if parity < 0.0 {
        first[0] = 0.0;
        first[n / 2] = 0.0;
    }
    let mut data = vec![0.0; n * n];
    // Column-major: entry (i, j) at j * n + i equals first[(i - j) mod n].
    sweep::fill_indexed(&mut data, |idx| {
        let (j, i) = (idx / n, idx % n);
        first[(i + n - j) % n]
    });
    DMatrix::from_vec(n, n, data)
}

/// `a D^alpha + b - potential` on the grid.
pub fn assemble_operator(
    grid: &SpectralGrid,
    alpha: f64,
    a: f64,
    b: f64,
    potential: &[f64],
    kind: OperatorKind,
    params: Option<ModelParams>,
) -> Result<OperatorMatrix> {
    check_cap(grid, DENSE_CAP)?;
    grid.check_len(potential)?;
    let symbol = grid.tabulate(|xi| Complex64::new(a * riesz(xi, alpha) + b, 0.0));
    let mut matrix = circulant(grid, &symbol, 1.0);
    for (i, v) in potential.iter().enumerate() {
        matrix[(i, i)] -= v;
    }
    Ok(OperatorMatrix {
        kind,
        matrix,
        params,
        grid: grid.clone(),
    })
}

/// Linearized operator around `wave`: `L_c` on the positive branch and
/// `L_c^- = -L_c` (the linearization of the reflected equation) on the
/// negative one.
pub fn assemble_lc(wave: &SolitaryWave) -> Result<OperatorMatrix> {
    let params = wave.params;
    let branch = params.require_wave()?;
    let s = branch.sign();
    let p = params.p as i32;
    let potential: Vec<f64> = wave
        .profile
        .iter()
        .map(|q| 0.5 * (p as f64 + 1.0) * (s * q).powi(p))
        .collect();
    let kind = if branch == Branch::Negative {
        OperatorKind::LcMinus
    } else {
        OperatorKind::Lc
    };
    assemble_operator(
        &wave.grid,
        params.alpha,
        s * params.dispersion_coefficient(),
        s * params.linear_coefficient(),
        &potential,
        kind,
        Some(params),
    )
}

/// `P = D^alpha + 1 - (p+1) phi^p`.
pub fn assemble_ground_state_operator(ground: &GroundState) -> Result<OperatorMatrix> {
    let p = ground.p as i32;
    let potential: Vec<f64> = ground
        .profile
        .iter()
        .map(|v| (p as f64 + 1.0) * v.powi(p))
        .collect();
    assemble_operator(
        &ground.grid,
        ground.alpha,
        1.0,
        1.0,
        &potential,
        OperatorKind::GroundState,
        None,
    )
}

/// Dense `J = (I + (5/4) D^alpha)^{-1} d/dx`.
pub fn assemble_j(grid: &SpectralGrid, alpha: f64) -> Result<DMatrix<f64>> {
    check_cap(grid, DENSE_CAP)?;
    let symbol = grid.tabulate(|xi| Complex64::new(0.0, xi / (1.0 + 1.25 * riesz(xi, alpha))));
    Ok(circulant(grid, &symbol, -1.0))
}

/// `J L_c` for the wave (always the operator of the original equation, so
/// on the negative branch this is `-J L_c^-`).
pub fn assemble_jlc(wave: &SolitaryWave) -> Result<OperatorMatrix> {
    let lc = assemble_lc(wave)?;
    let s = wave.params.branch().sign();
    let j = assemble_j(&wave.grid, wave.params.alpha)?;
    let matrix = (j * lc.matrix) * s;
    Ok(OperatorMatrix {
        kind: OperatorKind::JLc,
        matrix,
        params: Some(wave.params),
        grid: wave.grid.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCounts {
    pub n_negative: usize,
    pub n_zero: usize,
    /// `|<v0, Q'>| / (|v0| |Q'|)` for the eigenvector of smallest `|lambda|`.
    pub kernel_quality: Option<f64>,
    /// Smallest eigenvalue whose eigenvector is spatially extended.
    pub essential_edge_estimate: f64,
    pub spectral_radius: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
}

/// Participation ratio above which an eigenvector counts as extended.
pub const EXTENDED_PARTICIPATION: f64 = 0.25;

/// `(sum v^2)^2 / (N sum v^4)`: about `width / (2L)` for localized vectors,
/// order one for extended ones.
pub fn participation_ratio(v: &[f64]) -> f64 {
    let s2: f64 = v.iter().map(|x| x * x).sum();
    let s4: f64 = v.iter().map(|x| x.powi(4)).sum();
    if s4 == 0.0 {
        return 0.0;
    }
    s2 * s2 / (v.len() as f64 * s4)
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))
}

/// Eigenvalue counts of a symmetric operator matrix. `kernel_direction`
/// (normally `Q'`) is compared with the eigenvector nearest zero.
pub fn spectrum_counts_with(
    matrix: &OperatorMatrix,
    kernel_direction: Option<&[f64]>,
) -> Result<SpectrumCounts> {
    if !matrix.is_symmetric() {
        return Err(Error::Config(
            "spectrum counts need a symmetric operator; use growing_modes for J L_c".into(),
        ));
    }
    let eig = symmetric_eigen(&matrix.matrix)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let radius = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-6 * radius;
    let n_negative = eigenvalues.iter().filter(|&&v| v < -eps).count();
    let n_zero = eigenvalues.iter().filter(|&&v| v.abs() <= eps).count();

    let nearest = (0..n)
        .min_by(|&a, &b| {
            eig.eigenvalues[a]
                .abs()
                .total_cmp(&eig.eigenvalues[b].abs())
        })
        .ok_or_else(|| Error::Numeric("empty spectrum".into()))?;
    let kernel_quality = kernel_direction.map(|d| {
        let v = eig.eigenvectors.column(nearest);
        let dot: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
        let nd: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot.abs() / (v.norm() * nd)
    });

    let essential_edge_estimate = order
        .iter()
        .find(|&&i| {
            let col: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            participation_ratio(&col) > EXTENDED_PARTICIPATION
        })
        .map(|&i| eig.eigenvalues[i])
        .unwrap_or(f64::NAN);

    Ok(SpectrumCounts {
        n_negative,
        n_zero,
        kernel_quality,
        essential_edge_estimate,
        spectral_radius: radius,
        eigenvalues,
    })
}

/// Eigenvalue counts of the linearized operator around `wave`.
pub fn spectrum_counts(matrix: &OperatorMatrix, wave: &SolitaryWave) -> Result<SpectrumCounts> {
    let d = wave.derivative()?;
    spectrum_counts_with(matrix, Some(&d))
}

/// Solves the waves at `c +- dc` on the same grid and returns the central
/// difference `I = -(F(c + dc) - F(c - dc)) / (2 dc)`.
pub fn momentum_derivative(
    params: &ModelParams,
    dc: f64,
    grid: &SpectralGrid,
    settings: &PetviashviliSettings,
) -> Result<f64> {
    if !(dc > 0.0) {
        return Err(Error::Config(format!(
            "speed increment dc = {dc} must be positive"
        )));
    }
    let lo = params.with_speed(params.c - dc)?;
    let hi = params.with_speed(params.c + dc)?;
    if lo.branch() != params.branch() || hi.branch() != params.branch() {
        return Err(Error::Config(format!(
            "c +- dc = [{}, {}] leaves the branch of c = {}",
            lo.c, hi.c, params.c
        )));
    }
    let (f_lo, f_hi) = sweep::join(
        || solve_petviashvili(&lo, grid, settings).and_then(|w| w.momentum()),
        || solve_petviashvili(&hi, grid, settings).and_then(|w| w.momentum()),
    );
    Ok(-(f_hi? - f_lo?) / (2.0 * dc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowingModes {
    pub eigenvalues: Vec<Complex64>,
    pub max_real_part: f64,
    /// Max-row-sum norm of the matrix.
    pub operator_norm: f64,
}

/// Eigenvalues of a general real matrix.
pub fn nonsymmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("Schur decomposition did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Spectrum of `J L_c`; eigenvalues with positive real part signal spectral
/// instability.
pub fn growing_modes(wave: &SolitaryWave) -> Result<GrowingModes> {
    let jl = assemble_jlc(wave)?;
    growing_modes_of(&jl.matrix)
}

pub fn growing_modes_of(m: &DMatrix<f64>) -> Result<GrowingModes> {
    let eigenvalues = nonsymmetric_eigenvalues(m)?;
    let max_real_part = eigenvalues
        .iter()
        .fold(f64::NEG_INFINITY, |a, z| a.max(z.re));
    Ok(GrowingModes {
        eigenvalues,
        max_real_part,
        operator_norm: inf_norm(m),
    })
}

/// Numeric stability report: dense spectrum of the linearized operator plus
/// the momentum derivative from neighbouring waves on the same grid.
pub fn analyze(
    wave: &SolitaryWave,
    settings: &PetviashviliSettings,
    dc: f64,
) -> Result<StabilityReport> {
    analyze_with_spectrum(wave, settings, dc).map(|(report, _)| report)
}

/// [`analyze`], also returning the eigenvalue counts it was built from.
pub fn analyze_with_spectrum(
    wave: &SolitaryWave,
    settings: &PetviashviliSettings,
    dc: f64,
) -> Result<(StabilityReport, SpectrumCounts)> {
    let params = wave.params;
    let lc = assemble_lc(wave)?;
    let asym = lc.asymmetry();
    let scale = lc.matrix.amax();
    if asym > 1e-10 * scale.max(1.0) {
        warn!("linearized operator asymmetry {asym:e}");
    }
    let counts = spectrum_counts(&lc, wave)?;
    let i_value = momentum_derivative(&params, dc, &wave.grid, settings)?;
    let n_i = u8::from(i_value < 0.0);
    let analytic = classify(&params);
    let report = StabilityReport {
        params,
        method: Method::Numeric,
        k_derivative_sign: analytic.k_derivative_sign,
        roots: analytic.roots,
        n_negative: counts.n_negative,
        kernel_quality: counts.kernel_quality,
        n_i,
        index: counts.n_negative as i64 - n_i as i64,
        momentum_derivative: Some(i_value),
        essential_edge_estimate: Some(counts.essential_edge_estimate),
        verdict: verdict_from_counts(counts.n_negative, n_i),
    };
    Ok((report, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitary::exact_solution;
    use approx::assert_relative_eq;

    fn mp(alpha: f64, p: u32, c: f64) -> ModelParams {
        ModelParams::new(alpha, p, c).unwrap()
    }

    #[test]
    fn k_at_reference_point() {
        // 0.25 * 1.5 * (1 + 1/9)
        let k = k_of_c(&mp(2.0, 1, 1.5)).unwrap();
        assert_relative_eq!(k, 0.25 * 1.5 * (10.0 / 9.0), max_relative = 1e-14);
        assert_relative_eq!(k, 0.4166666666666667, max_relative = 1e-14);
    }

    #[test]
    fn k_errors() {
        assert!(matches!(
            k_of_c(&mp(2.0, 1, 0.8)),
            Err(Error::NoSolution { .. })
        ));
        assert!(matches!(
            k_of_c(&mp(0.3, 1, 1.5)),
            Err(Error::HamiltonianUndefined { .. })
        ));
    }

    #[test]
    fn log_derivative_matches_finite_differences() {
        for &(a, p, c) in &[
            (2.0, 1, 1.5),
            (0.45, 1, 1.01),
            (0.75, 1, 0.5),
            (1.5, 1, 0.3),
            (0.8, 2, 1.2),
            (1.2, 3, 0.4),
        ] {
            let h = 1e-6;
            let kp = k_of_c(&mp(a, p, c + h)).unwrap();
            let km = k_of_c(&mp(a, p, c - h)).unwrap();
            let fd = (kp - km) / (2.0 * h);
            let an = k_derivative(&mp(a, p, c)).unwrap();
            assert_relative_eq!(an, fd, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn root_values() {
        let (c1, _) = critical_speeds(0.45, 1).unwrap();
        assert_relative_eq!(c1, (6.05 + 0.7f64.sqrt()) / 6.75, max_relative = 1e-15);
        assert_relative_eq!(c1, 1.02025, epsilon = 1e-5);
        let (_, c2) = critical_speeds(2.0, 1).unwrap();
        assert_relative_eq!(c2, (20.0 - 10f64.sqrt()) / 30.0, max_relative = 1e-15);
        let (c1, _) = critical_speeds(0.75, 2).unwrap();
        assert_relative_eq!(c1, (3.25 + 0.5f64.sqrt()) / 3.75, max_relative = 1e-14);
        assert_relative_eq!(c1, 1.05523, epsilon = 1e-5);
        assert!(matches!(
            critical_speeds(0.1, 3),
            Err(Error::NoRealRoot { .. })
        ));
    }

    #[test]
    fn roots_are_zeros_of_the_derivative() {
        for &(a, p) in &[(0.45, 1u32), (1.5, 1), (0.75, 2), (1.8, 3)] {
            let (c1, c2) = critical_speeds(a, p).unwrap();
            for c in [c1, c2] {
                if let Ok(d) = k_log_derivative(&mp(a, p, c)) {
                    assert!(d.abs() < 1e-9, "alpha {a} p {p} c {c}: {d}");
                }
            }
        }
    }

    #[test]
    fn sign_table() {
        let c1 = critical_speeds(0.4, 1).unwrap().0;
        let cases = [
            (0.4, 0.5, -1),
            (0.4, c1 + 0.1, 1),
            (0.75, 0.5, -1),
            (0.75, 2.0, 1),
            (1.5, 0.58, 1),
            (1.5, 0.3, -1),
        ];
        for (a, c, s) in cases {
            let d = k_log_derivative(&mp(a, 1, c)).unwrap();
            assert_eq!(sign_of(d), s, "alpha {a} c {c}");
        }
    }

    #[test]
    fn classify_reference_points() {
        assert_eq!(
            classify(&mp(0.6, 1, 1.1)).verdict,
            Verdict::SpectrallyStable
        );
        // c1(0.45) = 1.02025: 1.01 lies below it, 1.035 above.
        assert_eq!(
            classify(&mp(0.45, 1, 1.01)).verdict,
            Verdict::SpectrallyUnstable
        );
        assert_eq!(
            classify(&mp(0.45, 1, 1.035)).verdict,
            Verdict::SpectrallyStable
        );
        assert_eq!(
            classify(&mp(0.6, 1, 0.5)).verdict,
            Verdict::SpectrallyUnstable
        );
        assert_eq!(classify(&mp(0.8, 1, 0.8)).verdict, Verdict::NoSolitaryWave);
        assert_eq!(
            classify(&mp(0.3, 1, 1.5)).verdict,
            Verdict::HamiltonianUndefined
        );
        assert_eq!(classify(&mp(1.0, 2, 0.5)).verdict, Verdict::NoSolitaryWave);
        let r = classify(&mp(2.0, 1, 1.5));
        assert_eq!((r.n_negative, r.n_i, r.index), (1, 1, 0));
        let r = classify(&mp(2.0, 1, 0.3));
        assert_eq!((r.n_negative, r.n_i, r.index), (1, 0, 1));
    }

    #[test]
    fn zero_potential_spectrum() {
        let g = SpectralGrid::new(16.0, 64).unwrap();
        let params = mp(1.3, 1, 1.5);
        let a = params.dispersion_coefficient();
        let b = params.linear_coefficient();
        let op = assemble_operator(
            &g,
            1.3,
            a,
            b,
            &vec![0.0; 64],
            OperatorKind::Lc,
            Some(params),
        )
        .unwrap();
        assert!(op.asymmetry() < 1e-12);
        let counts = spectrum_counts_with(&op, None).unwrap();
        assert_eq!(counts.n_negative, 0);
        let mut want: Vec<f64> = g
            .wavenumbers()
            .iter()
            .map(|&xi| a * riesz(xi, 1.3) + b)
            .collect();
        want.sort_by(f64::total_cmp);
        for (x, y) in counts.eigenvalues.iter().zip(&want) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12, max_relative = 1e-12);
        }
        assert_relative_eq!(counts.eigenvalues[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn dense_cap() {
        let g = SpectralGrid::new(64.0, 1 << 13).unwrap();
        let w = exact_solution(1.5, &g).unwrap();
        assert!(matches!(
            assemble_lc(&w).unwrap_err(),
            Error::Resource { .. }
        ));
    }

    #[test]
    fn j_is_skew_and_diagonal_in_fourier() {
        let g = SpectralGrid::new(8.0, 32).unwrap();
        let j = assemble_j(&g, 1.2).unwrap();
        let skew = (&j + j.transpose()).amax();
        assert!(skew < 1e-14);
        let modes = growing_modes_of(&j).unwrap();
        let mut got: Vec<f64> = modes.eigenvalues.iter().map(|z| z.im).collect();
        assert!(modes.eigenvalues.iter().all(|z| z.re.abs() < 1e-12));
        let mut want: Vec<f64> = g
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(k, &xi)| {
                if k == g.nyquist_index() {
                    0.0
                } else {
                    xi / (1.0 + 1.25 * riesz(xi, 1.2))
                }
            })
            .collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn numeric_report_on_exact_waves() {
        let g = SpectralGrid::new(32.0, 256).unwrap();
        let settings = PetviashviliSettings::default();
        for (c, stable) in [(1.5, true), (0.3, false)] {
            let w = exact_solution(c, &g).unwrap();
            let r = analyze(&w, &settings, DEFAULT_DC).unwrap();
            assert_eq!(r.n_negative, 1, "c = {c}");
            assert!(r.kernel_quality.unwrap() > 0.999, "{:?}", r.kernel_quality);
            assert_eq!(r.verdict == Verdict::SpectrallyStable, stable);
            assert_eq!(r.verdict, classify(&w.params).verdict);
            let edge = r.essential_edge_estimate.unwrap();
            assert!(
                (edge - (c - 1.0f64).abs()).abs() < 0.05,
                "c = {c}: edge {edge}"
            );
        }
    }

    #[test]
    fn momentum_derivative_is_second_order_in_dc() {
        // alpha = 2, p = 1: |phi|^2 = 6, so I = -2 * 6 * K'(c).
        let m = ModelParams::new(2.0, 1, 1.5).unwrap();
        let g = SpectralGrid::new(48.0, 1024).unwrap();
        let exact = -12.0 * k_derivative(&m).unwrap();
        let err = |dc: f64| {
            (momentum_derivative(&m, dc, &g, &PetviashviliSettings::default()).unwrap() - exact)
                .abs()
        };
        let ratio = err(0.04) / err(0.02);
        assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        assert!(err(DEFAULT_DC) < 1e-6 * exact.abs());
    }
}
