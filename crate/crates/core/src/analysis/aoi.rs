use crate::error::{invalid, Error, Result};

use super::eta::EtaDistribution;
use super::success::SuccessCdf;

/// Region mass below which the double integral is flagged.
const REGION_GUARD: f64 = 0.5;

/// Peak AoI from the joint law of access and success probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakAoi {
    pub value: f64,
    /// Product-measure mass of `{u v > xi}`.
    pub stable_mass: f64,
    pub heavy_instability: bool,
}

/// `1/xi + sum (1 - xi) / (u v - xi)` over pairs of success and access masses
/// with `u v > xi`. The restricted sum is not renormalised by its mass.
pub fn peak_aoi_exact(xi: f64, success: &[(f64, f64)], access: &[(f64, f64)]) -> Result<PeakAoi> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid("xi", format!("must lie in (0, 1), got {xi}")));
    }
    let mut value = 1.0 / xi;
    let mut stable_mass = 0.0;
    for &(v, mv) in access {
        if mv <= 0.0 {
            continue;
        }
        for &(u, mu) in success {
            let s = u * v;
            if mu > 0.0 && s > xi {
                value += mv * mu * (1.0 - xi) / (s - xi);
                stable_mass += mv * mu;
            }
        }
    }
    Ok(PeakAoi { value, stable_mass, heavy_instability: stable_mass < REGION_GUARD })
}

/// The same sum from the analytical distributions.
pub fn peak_aoi_from_curves(xi: f64, success: &SuccessCdf, eta: &EtaDistribution) -> Result<PeakAoi> {
    peak_aoi_exact(xi, &success.stieltjes_masses(), &eta.stieltjes_masses())
}

/// `1/xi + (1 - xi) / (E[eta] E[mu] - xi)`.
pub fn peak_aoi_mean_approx(xi: f64, mean_eta: f64, mean_mu: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid("xi", format!("must lie in (0, 1), got {xi}")));
    }
    let service = mean_eta * mean_mu;
    if service <= xi {
        return Err(Error::Unstable { service, arrival: xi });
    }
    Ok(1.0 / xi + (1.0 - xi) / (service - xi))
}
