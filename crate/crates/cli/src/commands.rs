use std::path::Path;

use anyhow::Result;
use aoi_core::simulator::empirical_distributions;
use serde::Serialize;

use crate::ana::{analyse, approx_peak_aoi, model_for, Analysis, Summary};
use crate::config::{ExperimentConfig, Method, SweepParameter};
use crate::output::{cell, Writer};
use crate::sim::{aggregate, dominant_rows, empirical_z, runs, simulate, Aggregate, Outcome};

const Z_BIN: f64 = 10.0;
const Z_MAX: f64 = 500.0;
const UNSTABLE: &str = "unstable";

fn own_method(cfg: &ExperimentConfig) -> Method {
    Method::from(cfg.spec)
}

fn peak_cell(v: Option<f64>) -> String {
    v.map_or_else(|| UNSTABLE.to_string(), |x| x.to_string())
}

#[derive(Serialize)]
struct DominantReport {
    links: usize,
    within_three_se: f64,
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let params = cfg.system_params();
    let w = Writer::new(out, cfg)?;
    let outcomes = simulate(&cfg.sim, &params, own_method(cfg));
    write_realizations(&w, &outcomes)?;
    let agg = aggregate(&outcomes);
    let dominant = if cfg.sim.dominant {
        let rows = dominant_rows(&outcomes, &params)?;
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.realization.to_string(),
                    r.link.to_string(),
                    r.attempts.to_string(),
                    r.mu_hat.to_string(),
                    r.mu_theory.to_string(),
                    r.z.to_string(),
                ]
            })
            .collect();
        w.csv("dominant.csv", &["realization", "link_id", "attempts", "mu_hat_emp", "mu_theory", "z"], &table)?;
        let within = rows.iter().filter(|r| r.z.abs() <= 3.0).count();
        Some(DominantReport { links: rows.len(), within_three_se: within as f64 / rows.len().max(1) as f64 })
    } else {
        None
    };
    #[derive(Serialize)]
    struct Doc {
        aggregate: Aggregate,
        dominant: Option<DominantReport>,
    }
    w.json("aggregate.json", &Doc { aggregate: agg, dominant })?;
    Ok(())
}

fn write_realizations(w: &Writer, outcomes: &[Outcome]) -> Result<()> {
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| match &o.run {
            Ok(run) => {
                let s = run.stats.summary();
                vec![
                    o.index.to_string(),
                    o.seed.to_string(),
                    s.links.to_string(),
                    s.included_links.to_string(),
                    cell(s.mean_peak_aoi),
                    cell(s.median_peak_aoi),
                    s.unstable_fraction.to_string(),
                    s.mean_queue.to_string(),
                    String::new(),
                ]
            }
            Err(e) => {
                let mut row = vec![o.index.to_string(), o.seed.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.replace([',', '\n'], ";"));
                row
            }
        })
        .collect();
    w.csv(
        "realizations.csv",
        &[
            "realization",
            "seed",
            "links",
            "included_links",
            "peak_aoi",
            "median_peak_aoi",
            "unstable_fraction",
            "mean_queue",
            "error",
        ],
        &rows,
    )?;
    Ok(())
}

/// `figure3.csv` to `figure5.csv`; empirical columns stay empty without simulations.
fn write_curves(w: &Writer, a: &Analysis, outcomes: Option<&[Outcome]>) -> Result<(Option<f64>, Option<f64>)> {
    let lambda = a.model.params.lambda.to_string();
    let xi = a.model.params.xi.to_string();
    let emp_z = outcomes.map(|o| empirical_z(o, Z_BIN, Z_MAX));
    let n_bins = (Z_MAX / Z_BIN).round() as usize;
    let fig3: Vec<Vec<String>> = (0..n_bins)
        .map(|b| {
            let l = (b as f64 + 0.5) * Z_BIN;
            let (emp, n) = match &emp_z {
                Some(z) => (cell(z[b].1), z[b].2.to_string()),
                None => (String::new(), String::new()),
            };
            vec![l.to_string(), a.model.eta.z(l).to_string(), emp, n]
        })
        .collect();
    w.csv("figure3.csv", &["l", "Z_analysis", "Z_empirical", "n"], &fig3)?;

    let pooled: Vec<_> = outcomes.map(|o| runs(o).map(|r| r.stats.clone()).collect()).unwrap_or_default();
    let curves = |grid: &[f64]| {
        if pooled.is_empty() {
            Ok(None)
        } else {
            empirical_distributions(&pooled, grid).map(Some)
        }
    };
    let ks = |ana: &[f64], emp: &[f64]| ana.iter().zip(emp).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let e4 = curves(&a.kappa)?;
    let fig4: Vec<Vec<String>> = (0..a.kappa.len())
        .map(|k| {
            vec![
                a.kappa[k].to_string(),
                a.eta_ccdf[k].to_string(),
                cell(e4.as_ref().map(|e| e.gamma_ccdf[k])),
                lambda.clone(),
            ]
        })
        .collect();
    w.csv("figure4.csv", &["kappa", "ccdf_analysis", "ccdf_empirical", "lambda"], &fig4)?;

    let u = &a.success.u_grid;
    let e5 = curves(u)?;
    let fig5: Vec<Vec<String>> = (0..u.len())
        .map(|k| {
            vec![u[k].to_string(), a.success.f[k].to_string(), cell(e5.as_ref().map(|e| e.success_cdf[k])), xi.clone()]
        })
        .collect();
    w.csv("figure5.csv", &["u", "F_analysis", "F_empirical", "xi"], &fig5)?;
    Ok((e4.map(|e| ks(&a.eta_ccdf, &e.gamma_ccdf)), e5.map(|e| ks(&a.success.f, &e.success_cdf))))
}

pub fn cmd_analyze(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let w = Writer::new(out, cfg)?;
    let a = analyse(own_method(cfg), &cfg.system_params())?;
    write_curves(&w, &a, None)?;
    w.json("analysis.json", &a.summary)?;
    Ok(())
}

pub fn cmd_compare(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let params = cfg.system_params();
    let w = Writer::new(out, cfg)?;
    let method = own_method(cfg);
    let a = analyse(method, &params)?;
    let outcomes = simulate(&cfg.sim, &params, method);
    write_realizations(&w, &outcomes)?;
    let (ks_access, ks_success) = write_curves(&w, &a, Some(&outcomes))?;
    let sim = aggregate(&outcomes);
    let gap = match (a.summary.peak_aoi_approx.as_f64(), sim.network_peak_aoi) {
        (Some(x), Some(y)) => Some((x - y).abs() / y),
        _ => None,
    };
    #[derive(Serialize)]
    struct Doc {
        analysis: Summary,
        simulation: Aggregate,
        ks_access_probability: Option<f64>,
        ks_success_probability: Option<f64>,
        peak_aoi_relative_gap: Option<f64>,
    }
    w.json(
        "compare.json",
        &Doc {
            analysis: a.summary,
            simulation: sim,
            ks_access_probability: ks_access,
            ks_success_probability: ks_success,
            peak_aoi_relative_gap: gap,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct SweepPoint {
    value: f64,
    method: String,
    analysis_peak_aoi: Option<f64>,
    mean_access_probability: f64,
    mean_success_probability: f64,
    simulation: Aggregate,
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| anyhow::anyhow!("config has no sweep section"))?;
    let base = cfg.system_params();
    let w = Writer::new(out, cfg)?;
    let (column, default_name) = match sweep.parameter {
        SweepParameter::Xi => ("xi", "figure6"),
        SweepParameter::Lambda => ("lambda", "figure8"),
    };
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for method in cfg.methods() {
        for &v in &sweep.values {
            let params = match sweep.parameter {
                SweepParameter::Xi => base.with_xi(v),
                SweepParameter::Lambda => base.with_lambda(v),
            };
            let model = model_for(method, &params)?;
            let ana = approx_peak_aoi(&model, params.xi)?;
            let sim = aggregate(&simulate(&cfg.sim, &params, method));
            rows.push(vec![v.to_string(), peak_cell(ana), method.label(), "analysis".to_string()]);
            rows.push(vec![v.to_string(), peak_cell(sim.network_peak_aoi), method.label(), "simulation".to_string()]);
            points.push(SweepPoint {
                value: v,
                method: method.label(),
                analysis_peak_aoi: ana,
                mean_access_probability: model.eta.mean(),
                mean_success_probability: model.mean_success_at(params.xi, 1e-10).value,
                simulation: sim,
            });
        }
    }
    let name = sweep.name.as_deref().unwrap_or(default_name);
    w.csv(&format!("{name}.csv"), &[column, "peak_aoi", "method", "source"], &rows)?;
    w.json(&format!("{name}.json"), &points)?;
    Ok(())
}
