use num_complex::Complex64;

use crate::error::Result;
use crate::geometry::StoppingSetSpec;
use crate::numerics::{find_root_monotone, gauss_legendre, plancherel_ccdf, ComplexFn, InversionResult, LatticeMeasure};
use crate::params::SystemParams;
use crate::policy::tail_integral;

use super::analysis_radius;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaOptions {
    /// Uniform cells on `[0, 1]` for the `kappa` integrals.
    pub kappa_cells: usize,
    /// Lattice points for the distribution of `U`.
    pub lattice: usize,
}

impl Default for EtaOptions {
    fn default() -> Self {
        EtaOptions { kappa_cells: 128, lattice: 1024 }
    }
}

/// Law of the access probability on a `kappa` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaDistribution {
    /// Interior grid points in `(0, 1)`.
    pub kappa_grid: Vec<f64>,
    /// `P(eta > kappa)`.
    pub ccdf: Vec<f64>,
    pub atom_one: f64,
    pub mean_eta: f64,
    /// Change of the mean when the grid is halved.
    pub mean_error: f64,
}

impl EtaDistribution {
    /// `(point, mass)` pairs: grid-cell increments at their left end plus the
    /// atom at one.
    pub fn stieltjes_masses(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.kappa_grid.len() + 2);
        let mut prev_k = 0.0;
        let mut prev_c = 1.0;
        for (&k, &c) in self.kappa_grid.iter().zip(&self.ccdf) {
            out.push((prev_k, prev_c - c));
            prev_k = k;
            prev_c = c;
        }
        out.push((prev_k, prev_c - self.atom_one));
        out.push((1.0, self.atom_one));
        out
    }
}

/// `kappa * tail(R)`: the outside-window part of the access condition.
pub fn v_term(kappa: f64, r_obs: f64, params: &SystemParams) -> Result<f64> {
    Ok(kappa * tail_integral(r_obs, params)?)
}

/// Per-receiver contribution to `U` at squared distance `w`.
#[inline]
fn jump(kappa: f64, w: f64, params: &SystemParams) -> f64 {
    let a2 = params.scale() * params.scale();
    kappa / ((w / a2).powf(0.5 * params.alpha) + (1.0 - kappa))
}

/// Laplace transform `E[exp(-s U(kappa))]` of the in-window sum.
pub fn laplace_u(s: Complex64, kappa: f64, r_obs: f64, params: &SystemParams) -> Complex64 {
    if r_obs <= 0.0 || s == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let rule = gauss_legendre(16);
    let w_max = r_obs * r_obs;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut hi = w_max;
    for _ in 0..40 {
        let lo = 0.5 * hi;
        for (w, wt) in rule.mapped(lo, hi) {
            acc += (Complex64::new(1.0, 0.0) - (-s * jump(kappa, w, params)).exp()) * wt;
        }
        hi = lo;
    }
    for (w, wt) in rule.mapped(0.0, hi) {
        acc += (Complex64::new(1.0, 0.0) - (-s * jump(kappa, w, params)).exp()) * wt;
    }
    (-acc * (std::f64::consts::PI * params.lambda)).exp()
}

/// Distribution of the in-window sum at one `kappa`, after removing the
/// receivers whose single contribution already reaches the threshold `b0`.
#[derive(Debug, Clone)]
struct KappaSlice {
    b0: f64,
    thin: f64,
    step: f64,
    pmf: Vec<f64>,
}

impl KappaSlice {
    fn build(kappa: f64, r_obs: f64, tail: f64, params: &SystemParams, lattice: usize) -> Result<Self> {
        let b0 = 1.0 - kappa * tail;
        if kappa == 0.0 || b0 <= 0.0 || r_obs == 0.0 {
            return Ok(KappaSlice { b0, thin: 1.0, step: 1.0, pmf: vec![1.0] });
        }
        let r2 = r_obs * r_obs;
        let a2 = params.scale() * params.scale();
        let rhs = kappa / b0 - (1.0 - kappa);
        let w_cut = if rhs > 0.0 { (a2 * rhs.powf(params.delta())).min(r2) } else { 0.0 };
        let lp = std::f64::consts::PI * params.lambda;
        let thin = (-lp * w_cut).exp();
        let step = b0 / lattice as f64;
        let mut m = LatticeMeasure::new(step, lattice)?;
        let slabs = 4 * lattice;
        let width = (r2 - w_cut) / slabs as f64;
        for k in 0..slabs {
            let w = w_cut + (k as f64 + 0.5) * width;
            m.add(jump(kappa, w, params), lp * width);
        }
        Ok(KappaSlice { b0, thin, step, pmf: m.compound_pmf() })
    }

    /// `P(U < b)` restricted to the retained receivers, times the thinning
    /// factor. The atom at zero is counted in full for every `b > 0`.
    fn prob(&self, b: f64) -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        let x = b / self.step + 0.5;
        let mut acc = self.pmf[0];
        for (k, &g) in self.pmf.iter().enumerate().skip(1) {
            let f = x - k as f64;
            if f <= 0.0 {
                break;
            }
            acc += g * f.min(1.0);
        }
        (self.thin * acc).clamp(0.0, 1.0)
    }

    fn ccdf(&self) -> f64 {
        self.prob(self.b0)
    }
}

/// Precomputed slices on a uniform `kappa` grid; answers the CCDF, the mean
/// and the conditional access function `Z`.
#[derive(Debug, Clone)]
pub struct EtaModel {
    pub params: SystemParams,
    pub r_obs: f64,
    pub tail: f64,
    grid: Vec<f64>,
    slices: Vec<KappaSlice>,
    empty_prob: f64,
    mean: f64,
    mean_error: f64,
    /// Every transmitter uses this access probability.
    constant: Option<f64>,
}

impl EtaModel {
    /// Model of a policy without local information: every transmitter
    /// accesses the channel with probability `gamma`.
    pub fn constant(params: &SystemParams, gamma: f64, opts: EtaOptions) -> Result<Self> {
        params.validate()?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(crate::error::invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
        }
        let n = opts.kappa_cells.max(2) & !1;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let slices = grid
            .iter()
            .map(|&k| {
                let b0 = if k < gamma || gamma == 1.0 { f64::INFINITY } else { 0.0 };
                KappaSlice { b0, thin: 1.0, step: 1.0, pmf: vec![1.0] }
            })
            .collect();
        Ok(EtaModel {
            params: *params,
            r_obs: 0.0,
            tail: 0.0,
            grid,
            slices,
            empty_prob: 1.0,
            mean: gamma,
            mean_error: 0.0,
            constant: Some(gamma),
        })
    }

    pub fn new(spec: &StoppingSetSpec, params: &SystemParams, opts: EtaOptions) -> Result<Self> {
        params.validate()?;
        let r_obs = analysis_radius(spec, params)?;
        Self::with_radius(r_obs, params, opts)
    }

    pub fn with_radius(r_obs: f64, params: &SystemParams, opts: EtaOptions) -> Result<Self> {
        let tail = tail_integral(r_obs, params)?;
        let n = opts.kappa_cells.max(2) & !1;
        let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let slices = grid
            .iter()
            .map(|&k| KappaSlice::build(k, r_obs, tail, params, opts.lattice))
            .collect::<Result<Vec<_>>>()?;
        let empty_prob = (-std::f64::consts::PI * params.lambda * r_obs * r_obs).exp();
        let mut model = EtaModel { params: *params, r_obs, tail, grid, slices, empty_prob, mean: 0.0, mean_error: 0.0, constant: None };
        let fine = model.integrate(|_| 0.0, 1);
        let coarse = model.integrate(|_| 0.0, 2);
        model.mean = fine;
        model.mean_error = (fine - coarse).abs();
        Ok(model)
    }

    /// `∫_0^1 P(U(kappa) < b0(kappa) - shift(kappa)) dkappa` by the trapezoid
    /// rule over every `stride`-th node. The cell where the threshold hits
    /// zero ends at the crossing, where the integrand's left limit is the
    /// probability of an empty window.
    fn integrate<F: Fn(f64) -> f64>(&self, shift: F, stride: usize) -> f64 {
        let h = |k: f64| 1.0 - k * self.tail - shift(k);
        let crossing = if h(1.0) >= 0.0 {
            f64::INFINITY
        } else {
            find_root_monotone(h, 0.0, 1.0, 1e-14).unwrap_or(0.0)
        };
        let value = |i: usize| {
            let s = &self.slices[i];
            s.prob(s.b0 - shift(self.grid[i]))
        };
        let mut acc = 0.0;
        let mut i = 0;
        while i + stride < self.grid.len() {
            let (k0, k1) = (self.grid[i], self.grid[i + stride]);
            if k1 < crossing {
                acc += 0.5 * (k1 - k0) * (value(i) + value(i + stride));
            } else {
                if k0 < crossing {
                    acc += 0.5 * (crossing - k0) * (value(i) + self.empty_prob);
                }
                break;
            }
            i += stride;
        }
        acc
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn atom_one(&self) -> f64 {
        self.slices.last().map_or(1.0, |s| s.ccdf())
    }

    /// `P(eta > kappa)` at the grid nodes.
    pub fn distribution(&self) -> EtaDistribution {
        let n = self.grid.len() - 1;
        EtaDistribution {
            kappa_grid: self.grid[1..n].to_vec(),
            ccdf: self.slices[1..n].iter().map(|s| s.ccdf()).collect(),
            atom_one: self.atom_one(),
            mean_eta: self.mean,
            mean_error: self.mean_error,
        }
    }

    /// Access probability of a transmitter whose distance measure to the
    /// observing receiver is `d` and whose window contains that receiver.
    pub fn z_of_measure(&self, d: f64) -> f64 {
        if let Some(g) = self.constant {
            return g;
        }
        self.integrate(|k| k / (1.0 - k + d), 1).clamp(0.0, 1.0)
    }

    /// Law of the access probability as `(value, mass)` pairs: grid-cell
    /// increments at cell midpoints plus the atom at one. With `Some(d)` the
    /// law is conditioned on a receiver at distance measure `d` inside the
    /// window.
    pub fn access_law(&self, d: Option<f64>) -> Vec<(f64, f64)> {
        if let Some(g) = self.constant {
            return vec![(g, 1.0)];
        }
        let shift = |k: f64| d.map_or(0.0, |d| k / (1.0 - k + d));
        let ccdf: Vec<f64> = self
            .slices
            .iter()
            .zip(&self.grid)
            .map(|(s, &k)| if k == 0.0 { 1.0 } else { s.prob(s.b0 - shift(k)) })
            .collect();
        let n = self.grid.len() - 1;
        let mut law: Vec<(f64, f64)> = (0..n)
            .map(|i| (0.5 * (self.grid[i] + self.grid[i + 1]), (ccdf[i] - ccdf[i + 1]).max(0.0)))
            .collect();
        law.push((1.0, ccdf[n]));
        law.retain(|m| m.1 > 0.0);
        law
    }

    /// `Z` at Euclidean distance `l`. Beyond the window radius the observing
    /// receiver is invisible to the transmitter and `Z` is the plain mean.
    pub fn z(&self, l: f64) -> f64 {
        if l > self.r_obs || self.r_obs == 0.0 {
            self.mean
        } else {
            self.z_of_measure(self.params.distance_measure(l))
        }
    }
}

/// `P(eta > kappa)` for one `kappa`.
pub fn eta_ccdf(kappa: f64, spec: &StoppingSetSpec, params: &SystemParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(crate::error::invalid("kappa", format!("must lie in [0, 1], got {kappa}")));
    }
    let r_obs = analysis_radius(spec, params)?;
    let tail = tail_integral(r_obs, params)?;
    Ok(KappaSlice::build(kappa, r_obs, tail, params, EtaOptions::default().lattice)?.ccdf())
}

/// `P(eta = 1)`.
pub fn eta_atom_one(spec: &StoppingSetSpec, params: &SystemParams) -> Result<f64> {
    eta_ccdf(1.0, spec, params)
}

pub fn mean_eta(spec: &StoppingSetSpec, params: &SystemParams) -> Result<f64> {
    Ok(EtaModel::new(spec, params, EtaOptions::default())?.mean())
}

pub fn z_function(l: f64, spec: &StoppingSetSpec, params: &SystemParams) -> Result<f64> {
    if !(l >= 0.0) {
        return Err(crate::error::invalid("l", format!("must be non-negative, got {l}")));
    }
    Ok(EtaModel::new(spec, params, EtaOptions::default())?.z(l))
}

/// `P(eta > kappa)` through the Fourier inversion of the Laplace transform of
/// `U`; slower, kept as an independent route.
pub fn eta_ccdf_plancherel(kappa: f64, r_obs: f64, params: &SystemParams, tol: f64) -> Result<InversionResult> {
    let b = 1.0 - v_term(kappa, r_obs, params)?;
    let p = *params;
    let atom = (-std::f64::consts::PI * p.lambda * r_obs * r_obs).exp();
    let lt = ComplexFn::new(move |w| laplace_u(Complex64::new(0.0, w), kappa, r_obs, &p), true).with_atom_at_zero(atom);
    plancherel_ccdf(&lt, b, tol)
}
