//! Slotted-time simulation of the interacting queues.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::NetworkRealization;
use crate::params::SystemParams;
use crate::policy::PolicyAssignment;

/// How the Rayleigh fades enter the decoding decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FadingMode {
    /// One uniform per attempt against the exact success probability given
    /// the active set.
    #[default]
    Integrated,
    /// Explicit Exp(1) fades and an SINR test.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub slots: u64,
    pub warmup: u64,
    /// Every transmitter always has something to send.
    pub dominant: bool,
    pub seed: u64,
    /// Restrict statistics to the guard region (open windows only).
    pub guard: bool,
    #[serde(default)]
    pub fading: FadingMode,
}

impl SimConfig {
    /// Default warm-up: 20% of the horizon, at least 2000 slots when the
    /// horizon allows it.
    pub fn new(slots: u64, seed: u64) -> Self {
        SimConfig {
            slots,
            warmup: default_warmup(slots),
            dominant: false,
            seed,
            guard: false,
            fading: FadingMode::Integrated,
        }
    }

    pub fn dominant(mut self, on: bool) -> Self {
        self.dominant = on;
        self
    }

    pub fn with_fading(mut self, mode: FadingMode) -> Self {
        self.fading = mode;
        self
    }

    pub fn with_warmup(mut self, warmup: u64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(invalid("slots", "must be at least 1"));
        }
        if self.warmup >= self.slots {
            return Err(invalid("warmup", format!("{} must be below slots = {}", self.warmup, self.slots)));
        }
        Ok(())
    }
}

pub fn default_warmup(slots: u64) -> u64 {
    (slots / 5).max(2000.min(slots / 2))
}

/// Per-link state of the slot loop.
#[derive(Debug, Clone, Default)]
pub struct LinkState {
    /// Generation slots of queued packets, oldest first.
    pub queue: VecDeque<u64>,
    pub aoi: u64,
    pub peak_sum: f64,
    pub n_peaks: u64,
    pub min_peak: u64,
    pub attempts: u64,
    pub successes: u64,
    pub busy_slots: u64,
    pub arrivals: u64,
    pub departures: u64,
    pub queue_len_sum: u64,
}

/// Per-link results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub gamma: f64,
    pub attempts: u64,
    pub successes: u64,
    pub busy_slots: u64,
    pub peak_sum: f64,
    pub n_peaks: u64,
    /// Smallest peak sample (0 when none).
    pub min_peak: u64,
    /// Arrivals and departures over the whole horizon, warm-up included.
    pub total_arrivals: u64,
    pub total_departures: u64,
    pub final_queue: u64,
    pub mean_queue: f64,
    pub included: bool,
}

impl LinkStats {
    /// Successes per attempt, `None` without attempts.
    pub fn mu_hat(&self) -> Option<f64> {
        (self.attempts > 0).then(|| self.successes as f64 / self.attempts as f64)
    }

    pub fn peak_aoi_mean(&self) -> Option<f64> {
        (self.n_peaks > 0).then(|| self.peak_sum / self.n_peaks as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub links: Vec<LinkStats>,
    /// Number of slots that entered the statistics.
    pub counted_slots: u64,
    pub xi: f64,
    pub config: SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    All,
    StableOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub mean_peak_aoi: Option<f64>,
    pub median_peak_aoi: Option<f64>,
    pub unstable_fraction: f64,
    pub mean_queue: f64,
    pub links: usize,
    pub included_links: usize,
}

impl SimStats {
    /// Whether the empirical service rate `gamma * mu_hat` exceeds `xi`.
    pub fn is_stable(&self, i: usize) -> bool {
        let l = &self.links[i];
        l.mu_hat().is_some_and(|m| l.gamma * m > self.xi)
    }

    pub fn summary(&self) -> NetworkSummary {
        let included: Vec<usize> = (0..self.links.len()).filter(|&i| self.links[i].included).collect();
        let unstable = included.iter().filter(|&&i| !self.is_stable(i)).count();
        let mut peaks: Vec<f64> = included
            .iter()
            .filter(|&&i| self.is_stable(i))
            .filter_map(|&i| self.links[i].peak_aoi_mean())
            .collect();
        peaks.sort_by(f64::total_cmp);
        let median = if peaks.is_empty() {
            None
        } else if peaks.len() % 2 == 1 {
            Some(peaks[peaks.len() / 2])
        } else {
            Some(0.5 * (peaks[peaks.len() / 2 - 1] + peaks[peaks.len() / 2]))
        };
        let n = included.len().max(1) as f64;
        NetworkSummary {
            mean_peak_aoi: measure_peak_aoi(self, Inclusion::StableOnly).ok(),
            median_peak_aoi: median,
            unstable_fraction: unstable as f64 / n,
            mean_queue: included.iter().map(|&i| self.links[i].mean_queue).sum::<f64>() / n,
            links: self.links.len(),
            included_links: included.len(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("link_id,gamma,attempts,successes,mu_hat_emp,a_emp,peak_aoi_mean,n_peaks\n");
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for (i, l) in self.links.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                i,
                l.gamma,
                l.attempts,
                l.successes,
                fmt(l.mu_hat()),
                l.busy_slots as f64 / self.counted_slots as f64,
                fmt(l.peak_aoi_mean()),
                l.n_peaks
            ));
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Doc<'a> {
            summary: NetworkSummary,
            config: &'a SimConfig,
            xi: f64,
            seed: u64,
        }
        let doc = Doc { summary: self.summary(), config: &self.config, xi: self.xi, seed: self.config.seed };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// Row-major `n x n` interference tables for receiver `i` and transmitter `j`:
/// `gain = D_ji / (1 + D_ji)`, `inv_d = 1 / D_ji`, with neutral diagonals.
struct InterferenceTable {
    n: usize,
    gain: Vec<f64>,
    inv_d: Vec<f64>,
}

impl InterferenceTable {
    fn build(net: &NetworkRealization, params: &SystemParams, with_inv: bool) -> Self {
        let n = net.len();
        let mut gain = vec![1.0; n * n];
        let mut inv_d = if with_inv { vec![0.0; n * n] } else { Vec::new() };
        for i in 0..n {
            let y = net.receivers[i];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = params.distance_measure(net.distance(net.transmitters[j], y));
                gain[i * n + j] = d / (1.0 + d);
                if with_inv {
                    inv_d[i * n + j] = 1.0 / d;
                }
            }
        }
        InterferenceTable { n, gain, inv_d }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.gain[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    fn inv_row(&self, i: usize) -> &[f64] {
        &self.inv_d[i * self.n..(i + 1) * self.n]
    }
}

fn link_streams(seed: u64, i: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut arrivals = ChaCha8Rng::seed_from_u64(seed);
    arrivals.set_stream(2 * i as u64);
    let mut channel = ChaCha8Rng::seed_from_u64(seed);
    channel.set_stream(2 * i as u64 + 1);
    (arrivals, channel)
}

/// Runs the slotted network.
///
/// Each slot: links with a packet (all links in dominant mode) attempt with
/// probability `gamma_i`; attempts are decoded against the set of concurrent
/// attempts; a delivery records the pre-reset age as a peak sample and resets
/// the age to `t - G + 1`. Packets generated in slot `t` join the queue at the
/// end of the slot.
pub fn run_slotted(net: &NetworkRealization, pol: &PolicyAssignment, params: &SystemParams, cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    params.validate()?;
    let n = net.len();
    if pol.len() != n {
        return Err(Error::SizeMismatch(format!("{} policies for {} links", pol.len(), n)));
    }
    let table = InterferenceTable::build(net, params, cfg.fading == FadingMode::Sampled);
    let noise = params.noise_exponent();
    let noise_success = (-noise).exp();
    let mut states: Vec<LinkState> = (0..n).map(|_| LinkState { aoi: 1, ..Default::default() }).collect();
    let mut streams: Vec<(ChaCha8Rng, ChaCha8Rng)> = (0..n).map(|i| link_streams(cfg.seed, i)).collect();
    let mut active = vec![false; n];
    let mut active_list: Vec<usize> = Vec::with_capacity(n);
    let mut success = vec![false; n];

    for t in 0..cfg.slots {
        let counted = t >= cfg.warmup;
        active_list.clear();
        for i in 0..n {
            let has_packet = !states[i].queue.is_empty();
            let wants = has_packet || cfg.dominant;
            active[i] = wants && streams[i].1.gen::<f64>() < pol.gamma[i];
            if active[i] {
                active_list.push(i);
            }
            if counted && has_packet {
                states[i].busy_slots += 1;
            }
        }
        for &i in &active_list {
            let rng = &mut streams[i].1;
            success[i] = match cfg.fading {
                FadingMode::Integrated => {
                    let row = table.row(i);
                    let p = active_list.iter().fold(noise_success, |acc, &j| acc * row[j]);
                    rng.gen::<f64>() < p
                }
                FadingMode::Sampled => {
                    let own: f64 = rng.sample(Exp1);
                    let row = table.inv_row(i);
                    let mut threshold = noise;
                    for &j in &active_list {
                        if j != i {
                            let h: f64 = rng.sample(Exp1);
                            threshold += h * row[j];
                        }
                    }
                    own > threshold
                }
            };
        }
        for i in 0..n {
            let s = &mut states[i];
            let delivered = active[i] && success[i] && !s.queue.is_empty();
            if counted && active[i] {
                s.attempts += 1;
                if success[i] {
                    s.successes += 1;
                }
            }
            if delivered {
                let g = s.queue.pop_front().expect("non-empty queue");
                s.departures += 1;
                if counted {
                    s.peak_sum += s.aoi as f64;
                    s.min_peak = if s.n_peaks == 0 { s.aoi } else { s.min_peak.min(s.aoi) };
                    s.n_peaks += 1;
                }
                s.aoi = t - g + 1;
            } else {
                s.aoi += 1;
            }
            success[i] = false;
            if params.xi > 0.0 && streams[i].0.gen::<f64>() < params.xi {
                s.queue.push_back(t);
                s.arrivals += 1;
            }
            if counted {
                s.queue_len_sum += s.queue.len() as u64;
            }
        }
    }

    let counted_slots = cfg.slots - cfg.warmup;
    let links = states
        .into_iter()
        .enumerate()
        .map(|(i, s)| LinkStats {
            gamma: pol.gamma[i],
            attempts: s.attempts,
            successes: s.successes,
            busy_slots: s.busy_slots,
            peak_sum: s.peak_sum,
            n_peaks: s.n_peaks,
            min_peak: s.min_peak,
            total_arrivals: s.arrivals,
            total_departures: s.departures,
            final_queue: s.queue.len() as u64,
            mean_queue: s.queue_len_sum as f64 / counted_slots as f64,
            included: !cfg.guard || net.in_guard(i),
        })
        .collect();
    Ok(SimStats { links, counted_slots, xi: params.xi, config: *cfg })
}

/// Network peak AoI: the per-link sample means averaged over included links.
pub fn measure_peak_aoi(stats: &SimStats, inclusion: Inclusion) -> Result<f64> {
    let vals: Vec<f64> = (0..stats.links.len())
        .filter(|&i| stats.links[i].included)
        .filter(|&i| inclusion == Inclusion::All || stats.is_stable(i))
        .filter_map(|i| stats.links[i].peak_aoi_mean())
        .collect();
    if vals.is_empty() {
        return Err(Error::EmptyStatistics);
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Success probability of link `i` when every transmitter always holds a
/// packet: `exp(-T r^alpha / rho) * prod_{j != i} (1 - gamma_j / (1 + D_ji))`.
pub fn dominant_success_probability(net: &NetworkRealization, pol: &PolicyAssignment, params: &SystemParams, i: usize) -> Result<f64> {
    if i >= net.len() {
        return Err(Error::IndexOutOfRange { index: i, len: net.len() });
    }
    if pol.len() != net.len() {
        return Err(Error::SizeMismatch(format!("{} policies for {} links", pol.len(), net.len())));
    }
    let y = net.receivers[i];
    let mut p = params.noise_only_success();
    for j in 0..net.len() {
        if j != i {
            let d = params.distance_measure(net.distance(net.transmitters[j], y));
            p *= 1.0 - pol.gamma[j] / (1.0 + d);
        }
    }
    Ok(p)
}

/// Empirical curves pooled over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurves {
    pub grid: Vec<f64>,
    /// `P(gamma > grid[k])`.
    pub gamma_ccdf: Vec<f64>,
    /// `P(mu_hat <= grid[k])`.
    pub success_cdf: Vec<f64>,
    pub gamma_samples: usize,
    pub success_samples: usize,
    /// Links left out of the success curve for lack of attempts.
    pub zero_attempt_links: usize,
}

pub fn empirical_distributions(runs: &[SimStats], grid: &[f64]) -> Result<EmpiricalCurves> {
    if runs.is_empty() {
        return Err(Error::EmptyStatistics);
    }
    let mut gammas = Vec::new();
    let mut mus = Vec::new();
    let mut zero = 0usize;
    for run in runs {
        for l in run.links.iter().filter(|l| l.included) {
            gammas.push(l.gamma);
            match l.mu_hat() {
                Some(m) => mus.push(m),
                None => zero += 1,
            }
        }
    }
    let frac = |v: &[f64], pred: &dyn Fn(f64) -> bool| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().filter(|&&x| pred(x)).count() as f64 / v.len() as f64
        }
    };
    Ok(EmpiricalCurves {
        grid: grid.to_vec(),
        gamma_ccdf: grid.iter().map(|&k| frac(&gammas, &|g| g > k)).collect(),
        success_cdf: grid.iter().map(|&u| frac(&mus, &|m| m <= u)).collect(),
        gamma_samples: gammas.len(),
        success_samples: mus.len(),
        zero_attempt_links: zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_network, StoppingSetSpec, Wrap};
    use crate::policy::assign_policies;

    fn single_link(params: &SystemParams) -> NetworkRealization {
        NetworkRealization::from_points(1000.0, Wrap::Torus, vec![[0.0, 0.0]], vec![[params.r, 0.0]], 0).unwrap()
    }

    fn noiseless(xi: f64) -> SystemParams {
        SystemParams::new(1e-4, 25.0, 3.8, 1.0, f64::INFINITY, xi).unwrap()
    }

    fn lemma2(xi: f64, service: f64) -> f64 {
        1.0 / xi + (1.0 - xi) / (service - xi)
    }

    #[test]
    fn isolated_noiseless_link() {
        let p = noiseless(0.5);
        let stats = run_slotted(&single_link(&p), &PolicyAssignment::uniform(1, 1.0), &p, &SimConfig::new(100_000, 3)).unwrap();
        let l = &stats.links[0];
        assert_eq!(l.attempts, l.successes);
        let peak = measure_peak_aoi(&stats, Inclusion::All).unwrap();
        assert!((peak - 3.0).abs() < 0.06, "{peak}");
        assert!(l.min_peak >= 2);
    }

    #[test]
    fn geo_geo_1_reference() {
        // success per attempt 0.8 through receiver noise
        let base = noiseless(0.3);
        let rho = base.t_r_alpha() / (1.0f64 / 0.8).ln();
        let p = SystemParams { rho, ..base };
        let stats = run_slotted(&single_link(&p), &PolicyAssignment::uniform(1, 1.0), &p, &SimConfig::new(1_000_000, 5)).unwrap();
        let peak = measure_peak_aoi(&stats, Inclusion::All).unwrap();
        let expected = lemma2(0.3, 0.8);
        assert!((peak / expected - 1.0).abs() < 0.02, "{peak} vs {expected}");

        // same service rate through the access probability instead
        let p = noiseless(0.3);
        let stats = run_slotted(&single_link(&p), &PolicyAssignment::uniform(1, 0.8), &p, &SimConfig::new(1_000_000, 6)).unwrap();
        let peak = measure_peak_aoi(&stats, Inclusion::All).unwrap();
        assert!((peak / expected - 1.0).abs() < 0.02, "{peak} vs {expected}");
    }

    #[test]
    fn no_traffic() {
        let p = noiseless(0.0);
        let stats = run_slotted(&single_link(&p), &PolicyAssignment::uniform(1, 1.0), &p, &SimConfig::new(5000, 1)).unwrap();
        assert_eq!(stats.links[0].attempts, 0);
        assert_eq!(stats.links[0].n_peaks, 0);
        assert!(stats.links[0].mu_hat().is_none());
        assert_eq!(measure_peak_aoi(&stats, Inclusion::All), Err(Error::EmptyStatistics));
    }

    #[test]
    fn unstable_link_excluded() {
        let p = noiseless(0.6);
        let net = NetworkRealization::from_points(
            1000.0,
            Wrap::Torus,
            vec![[0.0, 0.0], [500.0, 500.0]],
            vec![[25.0, 0.0], [525.0, 500.0]],
            0,
        )
        .unwrap();
        let pol = PolicyAssignment { gamma: vec![1.0, 0.4], ..PolicyAssignment::uniform(2, 1.0) };
        let stats = run_slotted(&net, &pol, &p, &SimConfig::new(40_000, 2)).unwrap();
        assert!(stats.is_stable(0) && !stats.is_stable(1));
        let stable = measure_peak_aoi(&stats, Inclusion::StableOnly).unwrap();
        assert!((stable - stats.links[0].peak_aoi_mean().unwrap()).abs() < 1e-12);
        assert!(measure_peak_aoi(&stats, Inclusion::All).unwrap() > stable);
        assert!((stats.summary().unstable_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_peaks_average() {
        let mk = |sum: f64, n: u64| LinkStats {
            gamma: 1.0,
            attempts: n,
            successes: n,
            busy_slots: 0,
            peak_sum: sum,
            n_peaks: n,
            min_peak: 4,
            total_arrivals: n,
            total_departures: n,
            final_queue: 0,
            mean_queue: 0.0,
            included: true,
        };
        let stats = SimStats {
            links: vec![mk(40.0, 10), mk(12.0, 3)],
            counted_slots: 100,
            xi: 0.1,
            config: SimConfig::new(200, 0),
        };
        assert_eq!(measure_peak_aoi(&stats, Inclusion::All).unwrap(), 4.0);
    }

    fn dense_case(seed: u64) -> (SystemParams, NetworkRealization, PolicyAssignment) {
        let p = SystemParams::reference(25.0).with_lambda(3e-4);
        let net = sample_network(&p, 600.0, Wrap::Torus, seed).unwrap();
        let pol = assign_policies(&net, &StoppingSetSpec::Disk { radius: 150.0 }, &p).unwrap();
        (p, net, pol)
    }

    fn dominant_agreement(mode: FadingMode) {
        let (p, net, pol) = dense_case(12);
        let cfg = SimConfig::new(20_000, 9).dominant(true).with_fading(mode);
        let stats = run_slotted(&net, &pol, &p, &cfg).unwrap();
        let mut ok = 0;
        for i in 0..net.len() {
            let exact = dominant_success_probability(&net, &pol, &p, i).unwrap();
            let l = &stats.links[i];
            let n = l.attempts as f64;
            let se = (exact * (1.0 - exact) / n).sqrt();
            if (l.mu_hat().unwrap() - exact).abs() <= 3.0 * se + 1e-12 {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * net.len() as f64, "{ok}/{}", net.len());
    }

    #[test]
    fn dominant_service_matches_product_formula() {
        dominant_agreement(FadingMode::Integrated);
    }

    #[test]
    fn dominant_service_matches_with_sampled_fades() {
        dominant_agreement(FadingMode::Sampled);
    }

    #[test]
    fn dominant_formula_examples() {
        let p = noiseless(0.3);
        let one = single_link(&p);
        assert_eq!(dominant_success_probability(&one, &PolicyAssignment::uniform(1, 1.0), &p, 0).unwrap(), 1.0);
        // interferer at distance r from receiver 0 gives D = 1
        let net = NetworkRealization::from_points(
            1000.0,
            Wrap::Torus,
            vec![[0.0, 0.0], [50.0, 0.0]],
            vec![[25.0, 0.0], [75.0, 0.0]],
            0,
        )
        .unwrap();
        let mu = dominant_success_probability(&net, &PolicyAssignment::uniform(2, 1.0), &p, 0).unwrap();
        assert!((mu - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dominant_formula_against_fade_sampling() {
        let p = SystemParams::reference(25.0).with_lambda(5e-5);
        let net = sample_network(&p, 1000.0, Wrap::Torus, 77).unwrap();
        assert!(net.len() >= 35);
        let gamma: Vec<f64> = (0..net.len()).map(|j| 0.3 + 0.7 * ((j * 37 % 11) as f64 / 10.0)).collect();
        let pol = PolicyAssignment { gamma, ..PolicyAssignment::uniform(net.len(), 1.0) };
        let exact = dominant_success_probability(&net, &pol, &p, 0).unwrap();
        let y = net.receivers[0];
        let inv_d: Vec<f64> = (1..net.len())
            .map(|j| 1.0 / p.distance_measure(net.distance(net.transmitters[j], y)))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 1_000_000;
        let mut hits = 0u64;
        for _ in 0..draws {
            let own: f64 = rng.sample(Exp1);
            let mut thr = p.noise_exponent();
            for (k, w) in inv_d.iter().enumerate() {
                if rng.gen::<f64>() < pol.gamma[k + 1] {
                    let h: f64 = rng.sample(Exp1);
                    thr += h * w;
                }
            }
            hits += (own > thr) as u64;
        }
        let est = hits as f64 / draws as f64;
        let se = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact}");
    }

    #[test]
    fn reproducible_and_conservative() {
        let (p, net, pol) = dense_case(4);
        let p = p.with_xi(0.2);
        let cfg = SimConfig::new(6000, 11);
        let a = run_slotted(&net, &pol, &p, &cfg).unwrap();
        let b = run_slotted(&net, &pol, &p, &cfg).unwrap();
        assert_eq!(a, b);
        for l in &a.links {
            assert_eq!(l.total_arrivals - l.total_departures, l.final_queue);
            assert!(l.successes <= l.attempts);
            assert!(l.n_peaks == 0 || l.min_peak >= 2);
            let a_emp = l.busy_slots as f64 / a.counted_slots as f64;
            assert!((0.0..=1.0).contains(&a_emp));
        }
    }

    #[test]
    fn more_traffic_longer_queues() {
        let (p, net, pol) = dense_case(8);
        let cfg = SimConfig::new(8000, 2);
        let mut prev = -1.0;
        for xi in [0.05, 0.15, 0.3] {
            let s = run_slotted(&net, &pol, &p.with_xi(xi), &cfg).unwrap();
            let q = s.summary().mean_queue;
            assert!(q >= prev, "xi={xi}: {q} < {prev}");
            prev = q;
        }
    }

    #[test]
    fn size_mismatch_and_bad_config() {
        let p = noiseless(0.3);
        let net = single_link(&p);
        assert!(matches!(
            run_slotted(&net, &PolicyAssignment::uniform(2, 1.0), &p, &SimConfig::new(100, 0)),
            Err(Error::SizeMismatch(_))
        ));
        let bad = SimConfig::new(100, 0).with_warmup(100);
        assert!(run_slotted(&net, &PolicyAssignment::uniform(1, 1.0), &p, &bad).is_err());
    }

    #[test]
    fn empirical_curves() {
        let (p, net, pol) = dense_case(3);
        let all_ones = PolicyAssignment::uniform(net.len(), 1.0);
        let s = run_slotted(&net, &all_ones, &p, &SimConfig::new(3000, 1).dominant(true)).unwrap();
        let grid = [0.0, 0.5, 0.999, 1.0];
        let c = empirical_distributions(&[s], &grid).unwrap();
        assert_eq!(c.gamma_ccdf, vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(c.success_cdf[3], 1.0);
        assert!(empirical_distributions(&[], &grid).is_err());
        let _ = pol;
    }

    #[test]
    fn dominant_success_cdf_close_to_exact() {
        let (p, net, pol) = dense_case(21);
        let s = run_slotted(&net, &pol, &p, &SimConfig::new(20_000, 4).dominant(true)).unwrap();
        let mut exact: Vec<f64> = (0..net.len()).map(|i| dominant_success_probability(&net, &pol, &p, i).unwrap()).collect();
        let mut emp: Vec<f64> = s.links.iter().map(|l| l.mu_hat().unwrap()).collect();
        exact.sort_by(f64::total_cmp);
        emp.sort_by(f64::total_cmp);
        let ks = (0..=200)
            .map(|k| {
                let u = k as f64 / 200.0;
                let fe = exact.iter().filter(|&&x| x <= u).count() as f64 / exact.len() as f64;
                let fm = emp.iter().filter(|&&x| x <= u).count() as f64 / emp.len() as f64;
                (fe - fm).abs()
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02 + 1.0 / net.len() as f64, "KS {ks}");
    }

    #[test]
    fn csv_and_json() {
        let p = noiseless(0.5);
        let s = run_slotted(&single_link(&p), &PolicyAssignment::uniform(1, 1.0), &p, &SimConfig::new(3000, 1)).unwrap();
        assert!(s.to_csv().starts_with("link_id,gamma,attempts,successes,mu_hat_emp,a_emp,peak_aoi_mean,n_peaks\n0,1,"));
        let j: serde_json::Value = serde_json::from_str(&s.summary_json().unwrap()).unwrap();
        assert_eq!(j["seed"], 1);
    }
}
