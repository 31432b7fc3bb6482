use std::path::Path;

use anyhow::{bail, Context, Result};
use aoi_core::geometry::{StoppingSetSpec, Wrap};
use aoi_core::simulator::{default_warmup, SimConfig};
use aoi_core::SystemParams;
use serde::{Deserialize, Serialize};

/// Link-budget parameters as written in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub r: f64,
    pub alpha: f64,
    pub threshold_db: f64,
    pub p_tx_dbm: f64,
    pub noise_dbm: f64,
    pub xi: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        ParamsConfig { lambda: 1e-4, r: 25.0, alpha: 3.8, threshold_db: 0.0, p_tx_dbm: 23.7, noise_dbm: -90.0, xi: 0.3 }
    }
}

impl ParamsConfig {
    pub fn resolve(&self) -> Result<SystemParams> {
        Ok(SystemParams::from_link_budget(
            self.lambda,
            self.r,
            self.alpha,
            self.threshold_db,
            self.p_tx_dbm,
            self.noise_dbm,
            self.xi,
        )?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Side of the square window (m).
    pub window: f64,
    pub wrap: Wrap,
    pub slots: u64,
    /// Defaults to 20% of the horizon.
    pub warmup: Option<u64>,
    pub realizations: usize,
    pub seed: u64,
    pub dominant: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection { window: 2000.0, wrap: Wrap::Torus, slots: 20_000, warmup: None, realizations: 200, seed: 1, dominant: false }
    }
}

impl SimSection {
    /// Slot-loop config of realization `k`.
    pub fn run_config(&self, k: usize) -> SimConfig {
        let seed = self.seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
        SimConfig::new(self.slots, seed)
            .with_warmup(self.warmup.unwrap_or_else(|| default_warmup(self.slots)))
            .dominant(self.dominant)
    }
}

/// An access rule compared in sweeps. `baseline` lets every transmitter
/// access whenever it holds a packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Method {
    Baseline,
    Empty,
    Disk { radius: f64 },
    NearestReceivers { p: usize },
}

impl Method {
    pub fn spec(&self) -> Option<StoppingSetSpec> {
        match *self {
            Method::Baseline => None,
            Method::Empty => Some(StoppingSetSpec::Empty),
            Method::Disk { radius } => Some(StoppingSetSpec::Disk { radius }),
            Method::NearestReceivers { p } => Some(StoppingSetSpec::NearestReceivers { p }),
        }
    }

    pub fn label(&self) -> String {
        self.spec().map_or_else(|| "baseline".to_string(), |s| s.label())
    }
}

impl From<StoppingSetSpec> for Method {
    fn from(spec: StoppingSetSpec) -> Self {
        match spec {
            StoppingSetSpec::Empty => Method::Empty,
            StoppingSetSpec::Disk { radius } => Method::Disk { radius },
            StoppingSetSpec::NearestReceivers { p } => Method::NearestReceivers { p },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Xi,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Defaults to the baseline and the configured rule.
    #[serde(default)]
    pub methods: Vec<Method>,
    /// File stem of the sweep output; defaults to `figure6` for ξ and
    /// `figure8` for λ.
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub spec: StoppingSetSpec,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub outputs: OutputSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.params.resolve()?;
        self.spec.validate()?;
        let s = &self.sim;
        if !(s.window >= 4.0 * p.r) || !s.window.is_finite() {
            bail!("sim.window must be finite and at least 4r = {} m", 4.0 * p.r);
        }
        if s.realizations == 0 {
            bail!("sim.realizations must be at least 1");
        }
        s.run_config(0).validate()?;
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                bail!("sweep.values is empty");
            }
            for &v in &sw.values {
                let q = match sw.parameter {
                    SweepParameter::Xi => p.with_xi(v),
                    SweepParameter::Lambda => p.with_lambda(v),
                };
                q.validate().with_context(|| format!("sweep value {v}"))?;
            }
            for m in &sw.methods {
                if let Some(spec) = m.spec() {
                    spec.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn system_params(&self) -> SystemParams {
        self.params.resolve().expect("validated")
    }

    pub fn methods(&self) -> Vec<Method> {
        match &self.sweep {
            Some(sw) if !sw.methods.is_empty() => sw.methods.clone(),
            _ => vec![Method::Baseline, Method::from(self.spec)],
        }
    }

    /// Canonical JSON of the resolved config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
