//! Model parameters `(alpha, p, c)` and the regime logic derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower edge of the forbidden speed strip `[3/5, 1]`.
pub const NEGATIVE_SPEED_LIMIT: f64 = 0.6;

/// Which family of solitary waves exists at a given speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `c > 1`: positive waves.
    Positive,
    /// `c < 3/5` with odd `p`: negative waves.
    Negative,
    /// Everything else.
    None,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
            Branch::None => 0.0,
        }
    }
}

/// Order of the fractional derivative, nonlinearity exponent and wave speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub p: u32,
    pub c: f64,
}

impl ModelParams {
    /// Validates the raw ranges: `alpha` in `(0, 2]`, `p >= 1`, `c > 0`.
    ///
    /// Regime questions (does a wave exist here?) are answered separately by
    /// [`ModelParams::require_wave`], so points like `c = 0.8` can still be
    /// classified.
    pub fn new(alpha: f64, p: u32, c: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Config(format!("alpha = {alpha} must lie in (0, 2]")));
        }
        if p == 0 {
            return Err(Error::Config("p must be a positive integer".into()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!(
                "wave speed c = {c} must be positive"
            )));
        }
        Ok(Self { alpha, p, c })
    }

    pub fn p_f64(&self) -> f64 {
        self.p as f64
    }

    /// `p / (p + 2)`: the Hamiltonian needs `alpha` strictly above this.
    pub fn alpha_threshold(&self) -> f64 {
        let p = self.p_f64();
        p / (p + 2.0)
    }

    pub fn hamiltonian_defined(&self) -> bool {
        self.alpha > self.alpha_threshold()
    }

    /// Critical exponent: `2 alpha / (1 - alpha)` for `alpha < 1`, unbounded otherwise.
    pub fn p_max(&self) -> f64 {
        if self.alpha < 1.0 {
            2.0 * self.alpha / (1.0 - self.alpha)
        } else {
            f64::INFINITY
        }
    }

    pub fn branch(&self) -> Branch {
        if self.c > 1.0 {
            Branch::Positive
        } else if self.c < NEGATIVE_SPEED_LIMIT && self.p % 2 == 1 {
            Branch::Negative
        } else {
            Branch::None
        }
    }

    /// Coefficient of `D^alpha` in the profile equation, `(5c - 3) / 4`.
    pub fn dispersion_coefficient(&self) -> f64 {
        1.25 * self.c - 0.75
    }

    /// Coefficient of the linear term in the profile equation, `c - 1`.
    pub fn linear_coefficient(&self) -> f64 {
        self.c - 1.0
    }

    /// Returns the branch on which a ground state exists, or the reason none does.
    pub fn require_wave(&self) -> Result<Branch> {
        if !self.hamiltonian_defined() {
            return Err(Error::HamiltonianUndefined {
                alpha: self.alpha,
                p: self.p,
                bound: self.alpha_threshold(),
            });
        }
        if self.p_f64() >= self.p_max() {
            return Err(Error::Existence(format!(
                "p = {} must stay below the critical exponent {} at alpha = {}",
                self.p,
                self.p_max(),
                self.alpha
            )));
        }
        match self.branch() {
            Branch::None if self.c >= NEGATIVE_SPEED_LIMIT && self.c <= 1.0 => {
                Err(Error::NoSolution {
                    c: self.c,
                    reason: "speeds in [3/5, 1] admit no nontrivial solitary wave".into(),
                })
            }
            Branch::None => Err(Error::NoSolution {
                c: self.c,
                reason: format!("negative waves at c < 3/5 need odd p (p = {})", self.p),
            }),
            b => Ok(b),
        }
    }

    pub fn with_speed(&self, c: f64) -> Result<Self> {
        Self::new(self.alpha, self.p, c)
    }
}

/// Scaling between a solitary wave and the normalized ground state:
/// `Q_c(x) = sign * amplitude_factor * phi(length_factor * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateMap {
    pub amplitude_factor: f64,
    pub length_factor: f64,
    pub sign: f64,
}

impl GroundStateMap {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let branch = params.require_wave()?;
        let shift = (params.c - 1.0).abs();
        // Both factors of the ratio share a sign on either branch.
        let ratio = 4.0 * (params.c - 1.0) / (5.0 * params.c - 3.0);
        Ok(Self {
            amplitude_factor: (2.0 * shift).powf(1.0 / params.p_f64()),
            length_factor: ratio.powf(1.0 / params.alpha),
            sign: branch.sign(),
        })
    }
}
