//! Analytical characterisation of the policy: the law of the access
//! probability, the conditional access function `Z`, the success-probability
//! distribution, stability and peak AoI.

mod aoi;
mod eta;
mod success;

pub use aoi::{peak_aoi_exact, peak_aoi_from_curves, peak_aoi_mean_approx, PeakAoi};
pub use eta::{
    eta_atom_one, eta_ccdf, eta_ccdf_plancherel, laplace_u, mean_eta, v_term, z_function, EtaDistribution, EtaModel,
    EtaOptions,
};
pub use success::{
    default_u_grid, mean_success_probability, ActivityLaw, stability_max_arrival, success_cdf_fixed_point, success_mgf, MeanSuccess, SuccessCdf,
    SuccessModel, SuccessOptions,
};

use serde::Serialize;

use crate::error::Result;
use crate::geometry::StoppingSetSpec;
use crate::params::SystemParams;

/// Radius of the deterministic disk used for a stopping-set rule. A
/// nearest-`p` rule is replaced by the disk of the same mean area,
/// `sqrt(p / (pi lambda))`.
pub fn analysis_radius(spec: &StoppingSetSpec, params: &SystemParams) -> Result<f64> {
    spec.validate()?;
    Ok(match *spec {
        StoppingSetSpec::Empty => 0.0,
        StoppingSetSpec::Disk { radius } => radius,
        StoppingSetSpec::NearestReceivers { p } => (p as f64 / (std::f64::consts::PI * params.lambda)).sqrt(),
    })
}

/// One point of an analytical curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub quantity: String,
    pub x: f64,
    pub value: f64,
    pub converged: bool,
}

/// `quantity,x,value,converged` rows after a `#`-prefixed JSON header line.
pub fn curves_to_csv(header_json: &str, points: &[CurvePoint]) -> String {
    let mut out = format!("# {header_json}\nquantity,x,value,converged\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.quantity, p.x, p.value, p.converged));
    }
    out
}
