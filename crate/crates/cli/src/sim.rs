use anyhow::Result;
use aoi_core::geometry::{sample_network, NetworkRealization};
use aoi_core::policy::{assign_policies, PolicyAssignment};
use aoi_core::simulator::{dominant_success_probability, run_slotted, SimStats};
use aoi_core::SystemParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Method, SimSection};

/// One simulated realization. Failures are kept as messages so a bad
/// realization does not sink the batch.
pub struct Outcome {
    pub index: usize,
    pub seed: u64,
    pub run: std::result::Result<Run, String>,
}

pub struct Run {
    pub net: NetworkRealization,
    pub policy: PolicyAssignment,
    pub stats: SimStats,
}

pub fn policy_for(method: Method, net: &NetworkRealization, params: &SystemParams) -> Result<PolicyAssignment> {
    Ok(match method.spec() {
        Some(spec) => assign_policies(net, &spec, params)?,
        None => PolicyAssignment::uniform(net.len(), 1.0),
    })
}

fn realization(sim: &SimSection, params: &SystemParams, method: Method, k: usize) -> Result<Run> {
    let cfg = sim.run_config(k);
    let net = sample_network(params, sim.window, sim.wrap, cfg.seed)?;
    let policy = policy_for(method, &net, params)?;
    let stats = run_slotted(&net, &policy, params, &cfg)?;
    Ok(Run { net, policy, stats })
}

/// Runs every realization in parallel; results come back in index order.
pub fn simulate(sim: &SimSection, params: &SystemParams, method: Method) -> Vec<Outcome> {
    (0..sim.realizations)
        .into_par_iter()
        .map(|k| Outcome {
            index: k,
            seed: sim.run_config(k).seed,
            run: realization(sim, params, method, k).map_err(|e| format!("{e:#}")),
        })
        .collect()
}

pub fn runs(outcomes: &[Outcome]) -> impl Iterator<Item = &Run> {
    outcomes.iter().filter_map(|o| o.run.as_ref().ok())
}

/// Network-level figures pooled over the included links of all realizations.
#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub realizations: usize,
    pub failed_realizations: usize,
    pub links: usize,
    /// Mean of the per-link peak AoI over stable links.
    pub network_peak_aoi: Option<f64>,
    pub unstable_fraction: f64,
    pub mean_access_probability: f64,
    pub mean_success_rate: Option<f64>,
}

pub fn aggregate(outcomes: &[Outcome]) -> Aggregate {
    let (mut links, mut unstable, mut gamma) = (0usize, 0usize, 0.0);
    let (mut peaks, mut mus) = (Vec::new(), Vec::new());
    for run in runs(outcomes) {
        let st = &run.stats;
        for (i, l) in st.links.iter().enumerate().filter(|(_, l)| l.included) {
            links += 1;
            gamma += l.gamma;
            mus.extend(l.mu_hat());
            if st.is_stable(i) {
                peaks.extend(l.peak_aoi_mean());
            } else {
                unstable += 1;
            }
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let n = links.max(1) as f64;
    Aggregate {
        realizations: outcomes.len(),
        failed_realizations: outcomes.iter().filter(|o| o.run.is_err()).count(),
        links,
        network_peak_aoi: mean(&peaks),
        unstable_fraction: unstable as f64 / n,
        mean_access_probability: gamma / n,
        mean_success_rate: mean(&mus),
    }
}

/// Empirical success rate of one link under full buffers next to the
/// product-form prediction.
#[derive(Debug, Clone, Serialize)]
pub struct DominantRow {
    pub realization: usize,
    pub link: usize,
    pub attempts: u64,
    pub mu_hat: f64,
    pub mu_theory: f64,
    /// Difference in binomial standard errors.
    pub z: f64,
}

pub fn dominant_rows(outcomes: &[Outcome], params: &SystemParams) -> Result<Vec<DominantRow>> {
    let mut rows = Vec::new();
    for o in outcomes {
        let Ok(run) = &o.run else { continue };
        for (i, l) in run.stats.links.iter().enumerate() {
            let Some(mu_hat) = l.mu_hat() else { continue };
            let mu = dominant_success_probability(&run.net, &run.policy, params, i)?;
            let se = (mu * (1.0 - mu) / l.attempts as f64).sqrt();
            let z = if se > 0.0 { (mu_hat - mu) / se } else if mu_hat == mu { 0.0 } else { f64::INFINITY };
            rows.push(DominantRow { realization: o.index, link: i, attempts: l.attempts, mu_hat, mu_theory: mu, z });
        }
    }
    Ok(rows)
}

/// Mean access probability of interferers binned by their distance to a
/// receiver: `(bin centre, mean, count)` over `[0, l_max)`.
pub fn empirical_z(outcomes: &[Outcome], bin: f64, l_max: f64) -> Vec<(f64, Option<f64>, usize)> {
    let nb = (l_max / bin).round() as usize;
    let mut sum = vec![0.0; nb];
    let mut cnt = vec![0usize; nb];
    for run in runs(outcomes) {
        let net = &run.net;
        for i in 0..net.len() {
            for j in 0..net.len() {
                if i == j {
                    continue;
                }
                let b = (net.distance(net.transmitters[j], net.receivers[i]) / bin) as usize;
                if b < nb {
                    sum[b] += run.policy.gamma[j];
                    cnt[b] += 1;
                }
            }
        }
    }
    (0..nb)
        .map(|b| ((b as f64 + 0.5) * bin, (cnt[b] > 0).then(|| sum[b] / cnt[b] as f64), cnt[b]))
        .collect()
}
