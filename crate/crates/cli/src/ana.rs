use anyhow::Result;
use aoi_core::analysis::{
    default_u_grid, peak_aoi_exact, peak_aoi_mean_approx, EtaModel, EtaOptions, SuccessCdf, SuccessModel, SuccessOptions,
};
use aoi_core::{Error, SystemParams};
use serde::Serialize;

use crate::config::Method;

const MEAN_TOL: f64 = 1e-10;

/// Analytical model of one access rule. The baseline is modelled as a
/// constant access probability of one.
pub fn model_for(method: Method, params: &SystemParams) -> Result<SuccessModel> {
    let opts = SuccessOptions::default();
    Ok(match method.spec() {
        Some(spec) => SuccessModel::new(&spec, params, &opts)?,
        None => SuccessModel::from_eta(EtaModel::constant(params, 1.0, EtaOptions::default())?, &opts)?,
    })
}

/// Peak AoI estimate; `None` marks an unstable operating point.
pub fn approx_peak_aoi(model: &SuccessModel, xi: f64) -> Result<Option<f64>> {
    let mu = model.mean_success_at(xi, MEAN_TOL);
    match peak_aoi_mean_approx(xi, model.eta.mean(), mu.value) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Unstable { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactAoi {
    pub value: f64,
    pub stable_mass: f64,
    pub heavy_instability: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub method: String,
    pub xi: f64,
    pub lambda: f64,
    pub observation_radius: f64,
    pub tail: f64,
    pub mean_access_probability: f64,
    pub access_atom_at_one: f64,
    pub mean_success_probability: f64,
    pub mean_success_converged: bool,
    pub max_stable_arrival: f64,
    pub stable: bool,
    /// Mean-based peak AoI, or the string `unstable`.
    pub peak_aoi_approx: serde_json::Value,
    pub peak_aoi_exact: ExactAoi,
    pub fixed_point_converged: bool,
    pub fixed_point_iterations: usize,
    pub fixed_point_residual: f64,
}

/// Curves and summary of one analysed configuration.
pub struct Analysis {
    pub model: SuccessModel,
    pub kappa: Vec<f64>,
    pub eta_ccdf: Vec<f64>,
    pub success: SuccessCdf,
    pub summary: Summary,
}

pub fn analyse(method: Method, params: &SystemParams) -> Result<Analysis> {
    let model = model_for(method, params)?;
    let xi = params.xi;
    let dist = model.eta.distribution();
    let success = model.fixed_point(&default_u_grid(xi), &SuccessOptions::default())?;
    let mu = model.mean_success_at(xi, MEAN_TOL);
    let approx = approx_peak_aoi(&model, xi)?;
    let exact = peak_aoi_exact(xi, &success.stieltjes_masses(), &dist.stieltjes_masses())?;
    let summary = Summary {
        method: method.label(),
        xi,
        lambda: params.lambda,
        observation_radius: model.eta.r_obs,
        tail: model.eta.tail,
        mean_access_probability: model.eta.mean(),
        access_atom_at_one: dist.atom_one,
        mean_success_probability: mu.value,
        mean_success_converged: mu.converged,
        max_stable_arrival: model.max_stable_arrival()?,
        stable: mu.stable,
        peak_aoi_approx: approx.map_or_else(|| serde_json::json!("unstable"), |v| serde_json::json!(v)),
        peak_aoi_exact: ExactAoi {
            value: exact.value,
            stable_mass: exact.stable_mass,
            heavy_instability: exact.heavy_instability,
        },
        fixed_point_converged: success.converged,
        fixed_point_iterations: success.iterations,
        fixed_point_residual: success.residual,
    };
    Ok(Analysis { kappa: dist.kappa_grid, eta_ccdf: dist.ccdf, model, success, summary })
}
