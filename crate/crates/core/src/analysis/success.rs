use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::StoppingSetSpec;
use crate::numerics::{find_root_monotone, gauss_legendre, gil_pelaez_cdf, lattice_cdf, one_minus_pow_j, InversionResult, LatticeMeasure};
use crate::params::SystemParams;
use crate::policy::unit_tail;

use super::eta::{EtaModel, EtaOptions};

const U_MIN: f64 = 1e-4;
const DAMPING: f64 = 0.5;
/// Sub-points per grid cell in the interferer success integral.
const SUB_CELLS: usize = 4;

/// How an interferer's access probability enters its activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityLaw {
    /// The conditional mean `Z` stands in for the access probability.
    #[default]
    MeanAccess,
    /// The full conditional law of the access probability given the distance.
    ConditionalLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessOptions {
    pub activity: ActivityLaw,
    pub tol: f64,
    pub max_iter: usize,
    /// Lattice points for the interference exponent.
    pub lattice: usize,
    pub eta: EtaOptions,
}

impl Default for SuccessOptions {
    fn default() -> Self {
        SuccessOptions { activity: ActivityLaw::MeanAccess, tol: 1e-4, max_iter: 50, lattice: 4096, eta: EtaOptions::default() }
    }
}

/// CDF of the conditional success probability on `u_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessCdf {
    pub u_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

impl SuccessCdf {
    /// Piecewise-linear in `u`, `F(u_0)` below the grid and 1 above it.
    pub fn eval(&self, u: f64) -> f64 {
        let g = &self.u_grid;
        if u < g[0] {
            return self.f[0];
        }
        if u >= g[g.len() - 1] {
            return 1.0;
        }
        let k = g.partition_point(|&x| x <= u) - 1;
        let t = (u - g[k]) / (g[k + 1] - g[k]);
        self.f[k] + t * (self.f[k + 1] - self.f[k])
    }

    /// Left-increment masses: `F(u_0)` at zero, each grid increment at the
    /// left end of its cell, and `1 - F(1)` at one.
    pub fn stieltjes_masses(&self) -> Vec<(f64, f64)> {
        self.cell_masses(1)
    }

    /// Like `stieltjes_masses`, with each cell increment spread over `sub`
    /// equal parts placed at their midpoints (`sub = 1` keeps the left end).
    pub fn cell_masses(&self, sub: usize) -> Vec<(f64, f64)> {
        let g = &self.u_grid;
        let mut out = Vec::with_capacity(sub * g.len() + 1);
        out.push((0.0, self.f[0]));
        for k in 0..g.len() - 1 {
            let m = (self.f[k + 1] - self.f[k]).max(0.0);
            if sub == 1 {
                out.push((g[k], m));
                continue;
            }
            let h = (g[k + 1] - g[k]) / sub as f64;
            for j in 0..sub {
                out.push((g[k] + (j as f64 + 0.5) * h, m / sub as f64));
            }
        }
        out.push((1.0, (1.0 - self.f[self.f.len() - 1]).max(0.0)));
        out
    }

    /// `∫_0^1 (1 - F(u)) du`.
    pub fn mean(&self) -> f64 {
        let g = &self.u_grid;
        let mut acc = g[0] * (1.0 - self.f[0]);
        for k in 0..g.len() - 1 {
            acc += 0.5 * (g[k + 1] - g[k]) * (2.0 - self.f[k] - self.f[k + 1]);
        }
        acc + (1.0 - g[g.len() - 1]) * (1.0 - self.f[self.f.len() - 1])
    }
}

/// 256-point grid on `[1e-4, 1]`: geometric, uniform on `[0.02, 1]`, and
/// denser around `xi` and toward 1.
pub fn default_u_grid(xi: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..128).map(|i| U_MIN * (1.0 / U_MIN).powf(i as f64 / 127.0)).collect();
    g.extend((0..64).map(|i| 0.02 + 0.98 * i as f64 / 63.0));
    g.extend((0..32).map(|i| xi * 0.8 * (1.25f64 / 0.8).powf(i as f64 / 31.0)));
    g.extend((0..32).map(|i| 1.0 - 0.05 * 1e-3f64.powf(i as f64 / 31.0)));
    g.retain(|&u| (U_MIN..=1.0).contains(&u));
    g.sort_by(f64::total_cmp);
    g.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs());
    g
}

#[derive(Debug, Clone)]
struct Node {
    weight: f64,
    gain: f64,
    z: f64,
    /// Access law of an interferer at this node, ascending in value.
    law: Vec<(f64, f64)>,
}

/// Quadrature over the interferer coordinate `u = (d / a)^2` together with
/// the conditional access probability at each node.
#[derive(Debug, Clone)]
pub struct SuccessModel {
    pub params: SystemParams,
    pub eta: EtaModel,
    nodes: Vec<Node>,
    far_law: Vec<(f64, f64)>,
    u_max: f64,
}

impl SuccessModel {
    pub fn new(spec: &StoppingSetSpec, params: &SystemParams, opts: &SuccessOptions) -> Result<Self> {
        Self::from_eta(EtaModel::new(spec, params, opts.eta)?, opts)
    }

    pub fn from_eta(eta: EtaModel, opts: &SuccessOptions) -> Result<Self> {
        let params = eta.params;
        let params = &params;
        let a = params.scale();
        let u_r = (eta.r_obs / a).powi(2);
        let u_max = 1e4f64.max(4.0 * u_r);
        let mut breaks = vec![0.0, U_MIN];
        let mut x = U_MIN;
        while x < u_max {
            x = (2.0 * x).min(u_max);
            breaks.push(x);
        }
        if u_r > 0.0 && u_r < u_max {
            breaks.push(u_r);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let law_of = |d: Option<f64>, z: f64| match opts.activity {
            ActivityLaw::MeanAccess => vec![(z, 1.0)],
            ActivityLaw::ConditionalLaw => eta.access_law(d),
        };
        let far_law = law_of(None, eta.mean());
        let rule = gauss_legendre(8);
        let mut nodes = Vec::new();
        for w in breaks.windows(2) {
            for (u, weight) in rule.mapped(w[0], w[1]) {
                let d = u.powf(0.5 * params.alpha);
                let (z, law) = if u <= u_r && eta.r_obs > 0.0 {
                    let z = eta.z_of_measure(d);
                    (z, law_of(Some(d), z))
                } else {
                    (eta.mean(), far_law.clone())
                };
                nodes.push(Node { weight, gain: 1.0 / (1.0 + d), z, law });
            }
        }
        Ok(SuccessModel { params: *params, eta, nodes, far_law, u_max })
    }

    fn z_far(&self) -> f64 {
        self.eta.mean()
    }

    /// `∫_{u_max}^∞ du / (1 + u^{alpha/2})`.
    fn far_weight(&self) -> f64 {
        2.0 * unit_tail(self.u_max.sqrt(), self.params.alpha).unwrap_or(0.0)
    }

    /// Contribution beyond the quadrature range, where every jump is small
    /// and the sum is replaced by its mean.
    fn drift(&self, masses: &[(f64, f64)]) -> f64 {
        let mut q = 0.0;
        activities(self.params.xi, &self.far_law, masses, |c, m| q += c * m);
        self.params.interference_mass() * q * self.far_weight()
    }

    /// Interference exponent `-ln(1 - c)` with its Poisson intensity, for
    /// every node and every distinct activity level.
    fn jumps(&self, masses: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mass = self.params.interference_mass();
        let xi = self.params.xi;
        let mut out = Vec::new();
        for node in &self.nodes {
            activities(xi, &node.law, masses, |q, m| {
                let c = (q * node.gain).min(1.0);
                out.push((-(-c).ln_1p(), mass * node.weight * m));
            });
        }
        out
    }

    /// Right-hand side of the fixed point for the given success masses.
    pub fn rhs(&self, masses: &[(f64, f64)], u_grid: &[f64], lattice: usize) -> Result<Vec<f64>> {
        let y_max = (1.0 / u_grid[0]).ln() + 1.0;
        let step = y_max / lattice as f64;
        let mut m = LatticeMeasure::new(step, lattice)?;
        for (p, w) in self.jumps(masses) {
            m.add(p, w);
        }
        let pmf = m.compound_pmf();
        let shift = self.params.noise_exponent() + self.drift(masses);
        Ok(u_grid
            .iter()
            .map(|&u| {
                let y = -u.ln() - shift;
                if y <= 0.0 {
                    1.0
                } else {
                    1.0 - lattice_cdf(&pmf, step, y)
                }
            })
            .collect())
    }

    /// Characteristic function of `ln(1 / mu)` under the given success masses.
    pub fn characteristic(&self, masses: &[(f64, f64)]) -> impl Fn(f64) -> Complex64 + Send + Sync {
        let shift = self.params.noise_exponent() + self.drift(masses);
        let terms: Vec<(f64, f64)> = self.jumps(masses).into_iter().map(|(p, w)| (-(-p).exp_m1(), w)).collect();
        move |omega| {
            let mut expo = Complex64::new(0.0, omega * shift);
            for &(c, w) in &terms {
                expo -= one_minus_pow_j(-omega, c) * w;
            }
            expo.exp()
        }
    }

    /// Success CDF when every interferer is backlogged and transmits with its
    /// conditional access probability.
    pub fn full_buffer(&self, u_grid: &[f64], lattice: usize) -> Result<Vec<f64>> {
        validate_grid(u_grid)?;
        self.rhs(&[(0.0, 1.0)], u_grid, lattice)
    }

    pub fn fixed_point(&self, u_grid: &[f64], opts: &SuccessOptions) -> Result<SuccessCdf> {
        validate_grid(u_grid)?;
        // full-buffer start: every interferer saturated at its access probability
        let mut f = vec![1.0; u_grid.len()];
        let mut residual = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            let cur = SuccessCdf { u_grid: u_grid.to_vec(), f: f.clone(), converged: false, iterations, residual };
            let next = self.rhs(&cur.cell_masses(SUB_CELLS), u_grid, opts.lattice)?;
            residual = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if residual < opts.tol {
                f = next;
                break;
            }
            for (x, n) in f.iter_mut().zip(&next) {
                *x = DAMPING * *x + (1.0 - DAMPING) * n;
            }
            isotonic(&mut f);
        }
        for x in f.iter_mut() {
            *x = x.clamp(0.0, 1.0);
        }
        Ok(SuccessCdf { u_grid: u_grid.to_vec(), f, converged: residual < opts.tol, iterations, residual })
    }

    /// Right-hand side of the scalar mean fixed point at mean success `x`.
    pub fn mean_rhs(&self, x: f64, xi: f64) -> f64 {
        let near: f64 = self.nodes.iter().map(|n| n.weight * (xi / x).min(n.z) * n.gain).sum();
        let far = (xi / x).min(self.z_far()) * self.far_weight();
        (-self.params.noise_exponent() - self.params.interference_mass() * (near + far)).exp()
    }

    pub fn mean_success(&self, tol: f64) -> MeanSuccess {
        self.mean_success_at(self.params.xi, tol)
    }

    pub fn mean_success_at(&self, xi: f64, tol: f64) -> MeanSuccess {
        let mut x = self.params.noise_only_success();
        let mut best = (f64::INFINITY, x);
        let mut iterations = 0;
        for _ in 0..10_000 {
            iterations += 1;
            let r = self.mean_rhs(x, xi);
            let res = (r - x).abs();
            if res < best.0 {
                best = (res, x);
            }
            if res < tol {
                x = r;
                break;
            }
            x = DAMPING * x + (1.0 - DAMPING) * r;
        }
        let (residual, value) = if best.0 < tol { (best.0, x) } else { best };
        MeanSuccess {
            value,
            residual,
            iterations,
            converged: residual < tol,
            stable: value * self.eta.mean() > xi,
        }
    }

    /// Largest arrival rate with `E[mu](xi) E[eta] >= xi`.
    pub fn max_stable_arrival(&self) -> Result<f64> {
        let mean_eta = self.eta.mean();
        let g = |xi: f64| self.mean_success_at(xi, 1e-10).value * mean_eta - xi;
        if g(1.0) >= 0.0 {
            return Ok(1.0);
        }
        find_root_monotone(g, 1e-9, 1.0, 1e-9)
    }
}

/// Activity `min(xi / t, g)` of an interferer with access probability `g`
/// and success probability `t`, enumerated over the product of the two
/// discrete laws with equal activities merged: saturated pairs (`g t <= xi`)
/// transmit with probability `g`, the others with `xi / t`.
fn activities(xi: f64, access: &[(f64, f64)], success: &[(f64, f64)], mut emit: impl FnMut(f64, f64)) {
    if let [(g, mg)] = access {
        // a single access level needs no cumulative sums
        for &(t, mt) in success {
            if mt > 0.0 {
                emit(if t * g <= xi { *g } else { xi / t }, mg * mt);
            }
        }
        return;
    }
    // both laws ascend, so the saturated mass for each access level and the
    // busy mass for each success level are running sums
    let total_t: f64 = success.iter().map(|m| m.1).sum();
    let mut sat = total_t;
    let mut j = success.len();
    for &(g, mg) in access {
        while j > 0 && success[j - 1].0 * g > xi {
            j -= 1;
            sat -= success[j].1;
        }
        if mg > 0.0 && sat > 0.0 {
            emit(g, mg * sat);
        }
    }
    let total_g: f64 = access.iter().map(|m| m.1).sum();
    let mut busy = 0.0;
    let mut k = access.len();
    for &(t, mt) in success {
        while k > 0 && t * access[k - 1].0 > xi {
            k -= 1;
            busy += access[k].1;
        }
        if mt > 0.0 && busy > 0.0 {
            emit(xi / t, mt * busy.min(total_g));
        }
    }
}

fn validate_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.len() < 2 {
        return Err(invalid("u_grid", "need at least two points"));
    }
    if !(u_grid[0] > 0.0) || u_grid[u_grid.len() - 1] > 1.0 || u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("u_grid", "must be strictly increasing in (0, 1]"));
    }
    Ok(())
}

/// Pool-adjacent-violators projection onto non-decreasing sequences.
fn isotonic(f: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(f.len());
    for &v in f.iter() {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (v1, n1) = blocks[blocks.len() - 1];
            let (v0, n0) = blocks[blocks.len() - 2];
            if v0 <= v1 {
                break;
            }
            blocks.pop();
            let n = n0 + n1;
            *blocks.last_mut().unwrap() = ((v0 * n0 as f64 + v1 * n1 as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (v, n) in blocks {
        f[i..i + n].fill(v);
        i += n;
    }
}

/// Outcome of the scalar mean fixed point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSuccess {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `value * E[eta] > xi`.
    pub stable: bool,
}

pub fn success_cdf_fixed_point(
    params: &SystemParams,
    spec: &StoppingSetSpec,
    u_grid: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SuccessCdf> {
    let opts = SuccessOptions { tol, max_iter, ..SuccessOptions::default() };
    SuccessModel::new(spec, params, &opts)?.fixed_point(u_grid, &opts)
}

/// `P(mu <= u)` by Gil-Pelaez inversion of the characteristic function of
/// `ln(1 / mu)` when interferer success probabilities follow `masses`.
pub fn success_mgf(model: &SuccessModel, masses: &[(f64, f64)], u: f64, tol: f64) -> Result<InversionResult> {
    let phi = crate::numerics::ComplexFn::new(model.characteristic(masses), true);
    let mut r = gil_pelaez_cdf(&phi, -u.ln(), tol)?;
    r.value = 1.0 - r.value;
    Ok(r)
}

pub fn mean_success_probability(params: &SystemParams, spec: &StoppingSetSpec, tol: f64) -> Result<MeanSuccess> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    Ok(SuccessModel::new(spec, params, &SuccessOptions::default())?.mean_success(tol))
}

/// Largest arrival rate with `E[mu](xi) E[eta] >= xi`.
pub fn stability_max_arrival(params: &SystemParams, spec: &StoppingSetSpec) -> Result<f64> {
    SuccessModel::new(spec, params, &SuccessOptions::default())?.max_stable_arrival()
}
