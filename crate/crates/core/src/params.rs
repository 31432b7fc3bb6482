use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical and traffic constants of the bipolar network, all in linear units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Link density (links per m²).
    pub lambda: f64,
    /// Transmitter to receiver distance (m).
    pub r: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// SINR decoding threshold (linear).
    pub threshold: f64,
    /// Transmit power over noise power (linear). `f64::INFINITY` means noise free.
    pub rho: f64,
    /// Per-slot packet arrival probability.
    pub xi: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemParams {
    pub fn new(lambda: f64, r: f64, alpha: f64, threshold: f64, rho: f64, xi: f64) -> Result<Self> {
        let p = SystemParams {
            lambda,
            r,
            alpha,
            threshold,
            rho,
            xi,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the usual link-budget units: threshold in dB,
    /// transmit and noise power in dBm.
    pub fn from_link_budget(
        lambda: f64,
        r: f64,
        alpha: f64,
        threshold_db: f64,
        p_tx_dbm: f64,
        noise_dbm: f64,
        xi: f64,
    ) -> Result<Self> {
        Self::new(
            lambda,
            r,
            alpha,
            db_to_linear(threshold_db),
            db_to_linear(p_tx_dbm - noise_dbm),
            xi,
        )
    }

    /// Default experiment parameters (alpha 3.8, xi 0.3, T = 0 dB,
    /// 23.7 dBm transmit power, -90 dBm noise, 1e-4 links/m²) at link distance `r`.
    pub fn reference(r: f64) -> Self {
        Self::from_link_budget(1e-4, r, 3.8, 0.0, 23.7, -90.0, 0.3)
            .expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha <= 2.0 || !self.alpha.is_finite() {
            return Err(Error::DivergentIntegral(self.alpha));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be positive, got {}", self.lambda)));
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(invalid("r", format!("must be positive, got {}", self.r)));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(invalid("threshold", format!("must be positive, got {}", self.threshold)));
        }
        if !(self.rho > 0.0) {
            return Err(invalid("rho", format!("must be positive, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(invalid("xi", format!("must lie in [0, 1], got {}", self.xi)));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        2.0 / self.alpha
    }

    /// `T r^alpha`, the normaliser of the distance measure.
    pub fn t_r_alpha(&self) -> f64 {
        self.threshold * self.r.powf(self.alpha)
    }

    /// Length scale `(T r^alpha)^(1/alpha)`; `D = (d / scale)^alpha`.
    pub fn scale(&self) -> f64 {
        self.threshold.powf(1.0 / self.alpha) * self.r
    }

    /// `lambda * pi * r^2 * T^delta`.
    pub fn interference_mass(&self) -> f64 {
        let a = self.scale();
        self.lambda * std::f64::consts::PI * a * a
    }

    /// `D = d^alpha / (T r^alpha)` for a distance `d` in metres.
    pub fn distance_measure(&self, d: f64) -> f64 {
        (d / self.scale()).powf(self.alpha)
    }

    /// `T r^alpha / rho`, zero when noise free.
    pub fn noise_exponent(&self) -> f64 {
        if self.rho.is_infinite() {
            0.0
        } else {
            self.t_r_alpha() / self.rho
        }
    }

    /// Success probability of an isolated link, `exp(-T r^alpha / rho)`.
    pub fn noise_only_success(&self) -> f64 {
        (-self.noise_exponent()).exp()
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }
}
