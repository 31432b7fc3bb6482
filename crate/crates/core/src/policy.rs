//! Locally adaptive channel-access probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{observed_receivers, NetworkRealization, StoppingSetSpec};
use crate::numerics::{find_root_monotone, integrate_adaptive};
use crate::params::SystemParams;

/// Residual target used by [`assign_policies`].
pub const POLICY_TOL: f64 = 1e-11;

const TAIL_REL_TOL: f64 = 1e-12;

/// What one transmitter knows: distance measures to the foreign receivers in
/// its stopping set, and the mean interference mass outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyInputs {
    pub neighbor_d: Vec<f64>,
    pub tail: f64,
}

impl PolicyInputs {
    pub fn new(neighbor_d: Vec<f64>, tail: f64) -> Result<Self> {
        if let Some(d) = neighbor_d.iter().find(|d| !(**d > 0.0) || d.is_infinite()) {
            return Err(invalid("neighbor_d", format!("entries must be positive and finite, got {d}")));
        }
        if !(tail >= 0.0) || tail.is_infinite() {
            return Err(invalid("tail", format!("must be finite and non-negative, got {tail}")));
        }
        Ok(PolicyInputs { neighbor_d, tail })
    }

    /// `1/eta - sum 1/(1 + D - eta) - tail`.
    pub fn residual(&self, eta: f64) -> f64 {
        1.0 / eta - self.neighbor_d.iter().map(|d| 1.0 / (1.0 + d - eta)).sum::<f64>() - self.tail
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PolicyAssignment {
    pub gamma: Vec<f64>,
    pub condition_met: Vec<bool>,
    pub n_observed: Vec<usize>,
    pub r_obs: Vec<f64>,
}

impl PolicyAssignment {
    /// Every link transmits with the same probability (no local information).
    pub fn uniform(n: usize, gamma: f64) -> Self {
        PolicyAssignment {
            gamma: vec![gamma; n],
            condition_met: vec![false; n],
            n_observed: vec![0; n],
            r_obs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("link_id,gamma,condition_met,n_observed,R_obs\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i, self.gamma[i], self.condition_met[i], self.n_observed[i], self.r_obs[i]
            ));
        }
        out
    }
}

/// `∫_{x0}^∞ x / (1 + x^alpha) dx` in closed intervals only.
///
/// The far part maps through `x = 1/y` and then `y = s^(1/(alpha-2))`, which
/// leaves the smooth integrand `1 / (1 + s^(alpha/(alpha-2)))` on a bounded range.
pub(crate) fn unit_tail(x0: f64, alpha: f64) -> Result<f64> {
    let k = 1.0 / (alpha - 2.0);
    let far = |upper_y: f64| -> Result<f64> {
        let s_max = upper_y.powf(alpha - 2.0);
        let p = alpha * k;
        Ok(k * integrate_adaptive(|s| 1.0 / (1.0 + s.powf(p)), 0.0, s_max, TAIL_REL_TOL)?.value)
    };
    if x0 >= 1.0 {
        far(1.0 / x0)
    } else {
        let near = integrate_adaptive(|x| x / (1.0 + x.powf(alpha)), x0, 1.0, TAIL_REL_TOL)?.value;
        Ok(near + far(1.0)?)
    }
}

/// `2 pi lambda ∫_R^∞ v / (1 + v^alpha / (T r^alpha)) dv`.
pub fn tail_integral(r_obs: f64, params: &SystemParams) -> Result<f64> {
    if !(params.alpha > 2.0) {
        return Err(Error::DivergentIntegral(params.alpha));
    }
    if !(r_obs >= 0.0) {
        return Err(invalid("r_obs", format!("must be non-negative, got {r_obs}")));
    }
    if r_obs.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 * params.interference_mass() * unit_tail(r_obs / params.scale(), params.alpha)?)
}

/// Tail over the whole plane, `lambda pi (T r^alpha)^delta * pi delta / sin(pi delta)`.
pub fn full_plane_tail(params: &SystemParams) -> f64 {
    let pd = std::f64::consts::PI * params.delta();
    params.interference_mass() * pd / pd.sin()
}

/// Whether `sum 1/D + tail > 1`, i.e. whether the node should back off.
pub fn access_condition(inputs: &PolicyInputs) -> bool {
    inputs.neighbor_d.iter().map(|d| 1.0 / d).sum::<f64>() + inputs.tail > 1.0
}

/// Access probability: the root of [`PolicyInputs::residual`] on `(0, 1)`
/// when the access condition holds, otherwise 1.
pub fn solve_access_probability(inputs: &PolicyInputs, tol: f64) -> f64 {
    if !access_condition(inputs) {
        return 1.0;
    }
    // f decreases on (0, 1], is +inf at 0+ and negative at 1
    find_root_monotone(|eta| inputs.residual(eta), 0.0, 1.0, tol).unwrap_or(1.0)
}

/// Closed form when the stopping set is the disk reaching the nearest
/// foreign receiver at distance `y_c_dist`.
pub fn closed_form_nearest(y_c_dist: f64, params: &SystemParams) -> Result<f64> {
    if !(y_c_dist > 0.0) {
        return Err(invalid("y_c_dist", format!("must be positive, got {y_c_dist}")));
    }
    let d = params.distance_measure(y_c_dist);
    let m = tail_integral(y_c_dist, params)?;
    if 1.0 / d + m <= 1.0 {
        return Ok(1.0);
    }
    // smaller root of M eta^2 - (M E + 2) eta + E = 0, with E = 1 + D
    let e = 1.0 + d;
    let big = 0.5 * e + 1.0 / m + (0.25 * e * e + 1.0 / (m * m)).sqrt();
    Ok((e / m) / big)
}

/// Policy inputs of link `i` under a stopping-set rule.
pub fn policy_inputs(i: usize, net: &NetworkRealization, spec: &StoppingSetSpec, params: &SystemParams) -> Result<(PolicyInputs, f64)> {
    let obs = observed_receivers(i, spec, net)?;
    let neighbor_d = obs.neighbors.iter().map(|&(_, dist)| params.distance_measure(dist).max(f64::MIN_POSITIVE)).collect();
    let tail = match spec {
        StoppingSetSpec::Empty => full_plane_tail(params),
        _ => tail_integral(obs.radius, params)?,
    };
    Ok((PolicyInputs { neighbor_d, tail }, obs.radius))
}

/// Runs the local rule at every link of a realization.
pub fn assign_policies(net: &NetworkRealization, spec: &StoppingSetSpec, params: &SystemParams) -> Result<PolicyAssignment> {
    spec.validate()?;
    params.validate()?;
    let n = net.len();
    let mut out = PolicyAssignment {
        gamma: Vec::with_capacity(n),
        condition_met: Vec::with_capacity(n),
        n_observed: Vec::with_capacity(n),
        r_obs: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (inputs, radius) = policy_inputs(i, net, spec, params)?;
        let met = access_condition(&inputs);
        out.gamma.push(solve_access_probability(&inputs, POLICY_TOL));
        out.condition_met.push(met);
        out.n_observed.push(inputs.neighbor_d.len());
        out.r_obs.push(radius);
    }
    Ok(out)
}
