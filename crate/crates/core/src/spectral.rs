//! Periodic Fourier collocation on `[-L, L)`.
//!
//! Transforms are unnormalized forward / `1/N` inverse. With that convention
//! the grid quadrature `h * sum(u_j^2)` equals `(2L / N^2) * sum(|u_hat_k|^2)`,
//! which is what [`SpectralGrid::spectral_l2`] computes.
//!
//! The unpaired Nyquist mode is multiplied by the real part of a symbol, so
//! odd symbols such as `i xi` annihilate it and outputs of real fields stay real.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative bound on the imaginary residue tolerated after a multiplier.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Uniform periodic grid with cached FFT plans. Cheap to clone; the plans
/// are shared.
#[derive(Clone)]
pub struct SpectralGrid {
    half_length: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n_points", &self.nodes.len())
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.half_length == other.half_length && self.nodes.len() == other.nodes.len()
    }
}

impl SpectralGrid {
    /// Grid of `n_points` nodes on `[-half_length, half_length)`.
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Config(format!(
                "half-length L = {half_length} must be positive"
            )));
        }
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "number of grid points N = {n_points} must be a power of two >= 8"
            )));
        }
        let h = 2.0 * half_length / n_points as f64;
        let nodes = (0..n_points).map(|j| -half_length + j as f64 * h).collect();
        let wavenumbers = (0..n_points)
            .map(|k| {
                let k = if k < n_points / 2 {
                    k as f64
                } else {
                    k as f64 - n_points as f64
                };
                PI * k / half_length
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            half_length,
            nodes,
            wavenumbers,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.len() as f64
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn nyquist_index(&self) -> usize {
        self.len() / 2
    }

    /// `pi N / (2L)`.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.len() as f64 / (2.0 * self.half_length)
    }

    /// Index of the node at `x = 0`.
    pub fn center_index(&self) -> usize {
        self.len() / 2
    }

    pub fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: field.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(field)?;
        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        Ok(buf)
    }

    /// In-place forward transform of a complex buffer of grid length.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Scratch length needed by the `*_with_scratch` transforms.
    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Allocation-free forward transform for hot loops.
    pub fn forward_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    /// Allocation-free inverse transform, including the `1/N` factor.
    pub fn inverse_with_scratch(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.len() as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// Inverse transform to a real field. Fails if the imaginary residue
    /// exceeds `SYMMETRY_TOLERANCE` relative to `reference_norm` (or to the
    /// output's own max-norm, whichever is larger).
    pub fn inverse_real(
        &self,
        mut spectrum: Vec<Complex64>,
        reference_norm: f64,
    ) -> Result<Vec<f64>> {
        if spectrum.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: spectrum.len(),
            });
        }
        self.inverse_in_place(&mut spectrum);
        let mut max_re = 0.0f64;
        let mut max_im = 0.0f64;
        for v in &spectrum {
            max_re = max_re.max(v.re.abs());
            max_im = max_im.max(v.im.abs());
        }
        let limit = SYMMETRY_TOLERANCE * reference_norm.max(max_re).max(f64::MIN_POSITIVE);
        if max_im > limit {
            return Err(Error::Symmetry {
                residue: max_im,
                limit,
            });
        }
        Ok(spectrum.into_iter().map(|v| v.re).collect())
    }

    /// Multiplies the spectrum of a real field by `symbol(xi_k)`.
    pub fn apply_symbol<S>(&self, field: &[f64], symbol: S) -> Result<Vec<f64>>
    where
        S: Fn(f64) -> Complex64,
    {
        let mut spec = self.forward(field)?;
        self.multiply_spectrum(&mut spec, symbol);
        self.inverse_real(spec, max_abs(field))
    }

    /// Pointwise multiplication of a spectrum, with the Nyquist rule applied.
    pub fn multiply_spectrum<S>(&self, spec: &mut [Complex64], symbol: S)
    where
        S: Fn(f64) -> Complex64,
    {
        let ny = self.nyquist_index();
        for (k, (v, &xi)) in spec.iter_mut().zip(&self.wavenumbers).enumerate() {
            let s = symbol(xi);
            *v *= if k == ny {
                Complex64::new(s.re, 0.0)
            } else {
                s
            };
        }
    }

    /// Tabulates `symbol` on the wavenumbers, with the Nyquist rule applied.
    pub fn tabulate<S>(&self, symbol: S) -> Vec<Complex64>
    where
        S: Fn(f64) -> Complex64,
    {
        let ny = self.nyquist_index();
        self.wavenumbers
            .iter()
            .enumerate()
            .map(|(k, &xi)| {
                let s = symbol(xi);
                if k == ny {
                    Complex64::new(s.re, 0.0)
                } else {
                    s
                }
            })
            .collect()
    }

    /// `D^order field` with symbol `|xi|^order`.
    pub fn fractional_derivative(&self, field: &[f64], order: f64) -> Result<Vec<f64>> {
        if !(order >= 0.0) {
            return Err(Error::Config(format!(
                "derivative order {order} must be nonnegative"
            )));
        }
        self.apply_symbol(field, |xi| Complex64::new(riesz(xi, order), 0.0))
    }

    /// First derivative `d/dx`.
    pub fn derivative(&self, field: &[f64]) -> Result<Vec<f64>> {
        self.apply_symbol(field, |xi| Complex64::new(0.0, xi))
    }

    /// Applies `(I + (5/4) D^alpha)^{-1}`.
    pub fn invert_bbm_operator(&self, field: &[f64], alpha: f64) -> Result<Vec<f64>> {
        self.apply_symbol(field, |xi| {
            Complex64::new(1.0 / (1.0 + 1.25 * riesz(xi, alpha)), 0.0)
        })
    }

    /// Translates a field: returns samples of `u(x - shift)`.
    pub fn translate(&self, field: &[f64], shift: f64) -> Result<Vec<f64>> {
        self.apply_symbol(field, |xi| Complex64::from_polar(1.0, -xi * shift))
    }

    /// Grid quadrature `h * sum(u)`.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        self.spacing() * field.iter().sum::<f64>()
    }

    /// `h * sum(u^2)`.
    pub fn l2_squared(&self, field: &[f64]) -> f64 {
        self.spacing() * field.iter().map(|v| v * v).sum::<f64>()
    }

    /// `(2L/N^2) * sum(weight(xi_k) |u_hat_k|^2)`; with weight 1 this equals
    /// [`SpectralGrid::l2_squared`] of the underlying field.
    pub fn spectral_l2<W>(&self, spectrum: &[Complex64], weight: W) -> f64
    where
        W: Fn(f64) -> f64,
    {
        let n = self.len() as f64;
        let sum: f64 = spectrum
            .iter()
            .zip(&self.wavenumbers)
            .map(|(v, &xi)| weight(xi) * v.norm_sqr())
            .sum();
        2.0 * self.half_length / (n * n) * sum
    }

    /// Evaluates the trigonometric interpolant of a spectrum at `x`.
    pub fn interpolate_spectrum(&self, spectrum: &[Complex64], x: f64) -> f64 {
        let offset = x + self.half_length;
        let ny = self.nyquist_index();
        let mut acc = 0.0;
        for (k, (v, &xi)) in spectrum.iter().zip(&self.wavenumbers).enumerate() {
            let phase = xi * offset;
            let term = v.re * phase.cos() - v.im * phase.sin();
            acc += if k == ny { v.re * phase.cos() } else { term };
        }
        acc / self.len() as f64
    }

    /// First and second derivatives of the interpolant at `x`.
    pub fn interpolate_derivatives(&self, spectrum: &[Complex64], x: f64) -> (f64, f64) {
        let offset = x + self.half_length;
        let ny = self.nyquist_index();
        let (mut d1, mut d2) = (0.0, 0.0);
        for (k, (v, &xi)) in spectrum.iter().zip(&self.wavenumbers).enumerate() {
            if k == ny {
                continue;
            }
            let (s, c) = (xi * offset).sin_cos();
            // d/dx Re(v e^{i xi x}) = Re(i xi v e^{i xi x})
            d1 += -xi * (v.re * s + v.im * c);
            d2 += -xi * xi * (v.re * c - v.im * s);
        }
        let n = self.len() as f64;
        (d1 / n, d2 / n)
    }

    /// Ratio of the largest coefficient in the top third of the spectrum to
    /// the largest coefficient overall.
    pub fn spectral_tail_ratio(&self, field: &[f64]) -> Result<f64> {
        let spec = self.forward(field)?;
        let kmax = self.max_wavenumber();
        let mut top = 0.0f64;
        let mut all = 0.0f64;
        for (v, &xi) in spec.iter().zip(&self.wavenumbers) {
            let a = v.norm();
            all = all.max(a);
            if xi.abs() > 2.0 * kmax / 3.0 {
                top = top.max(a);
            }
        }
        Ok(if all > 0.0 { top / all } else { 0.0 })
    }
}

/// `|xi|^order`, with `0^0 = 1`.
pub fn riesz(xi: f64, order: f64) -> f64 {
    if order == 0.0 {
        1.0
    } else {
        xi.abs().powf(order)
    }
}

pub fn max_abs(field: &[f64]) -> f64 {
    field.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
