//! Poisson bipolar network realizations and stopping-set queries.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;

pub type Point = [f64; 2];

const REALIZATION_FORMAT_VERSION: u32 = 1;

/// Boundary rule of the simulation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wrap {
    /// Square torus; distances use the minimum image.
    Torus,
    /// Plain square; statistics are restricted to an inner guard region.
    Open,
}

/// Observation window of a transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingSetSpec {
    Empty,
    Disk { radius: f64 },
    NearestReceivers { p: usize },
}

impl StoppingSetSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingSetSpec::Empty => Ok(()),
            StoppingSetSpec::Disk { radius } if radius > 0.0 && radius.is_finite() => Ok(()),
            StoppingSetSpec::Disk { radius } => Err(invalid("radius", format!("must be positive, got {radius}"))),
            StoppingSetSpec::NearestReceivers { p } if p >= 1 => Ok(()),
            StoppingSetSpec::NearestReceivers { .. } => Err(invalid("p", "must be at least 1")),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            StoppingSetSpec::Empty => "empty".to_string(),
            StoppingSetSpec::Disk { radius } => format!("disk_{radius}"),
            StoppingSetSpec::NearestReceivers { p } => format!("nearest_{p}"),
        }
    }
}

/// Sampled transmitters with their dedicated receivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub window: f64,
    pub wrap: Wrap,
    pub transmitters: Vec<Point>,
    pub receivers: Vec<Point>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RealizationDocument {
    version: u32,
    #[serde(flatten)]
    net: NetworkRealization,
}

/// Foreign receivers seen by one transmitter, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// `(link index j, ||y_j - X_i||)`, ascending in distance.
    pub neighbors: Vec<(usize, f64)>,
    /// Realized observation radius: `R` for a disk, the distance to the last
    /// returned receiver for nearest-p, zero for the empty set.
    pub radius: f64,
}

impl NetworkRealization {
    pub fn from_points(window: f64, wrap: Wrap, transmitters: Vec<Point>, receivers: Vec<Point>, seed: u64) -> Result<Self> {
        if !(window > 0.0) {
            return Err(invalid("window", format!("must be positive, got {window}")));
        }
        if transmitters.len() != receivers.len() {
            return Err(Error::SizeMismatch(format!(
                "{} transmitters vs {} receivers",
                transmitters.len(),
                receivers.len()
            )));
        }
        Ok(NetworkRealization { window, wrap, transmitters, receivers, seed })
    }

    pub fn len(&self) -> usize {
        self.transmitters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmitters.is_empty()
    }

    /// Euclidean distance, minimum image on the torus.
    #[inline]
    pub fn distance(&self, x: Point, y: Point) -> f64 {
        let mut dx = (x[0] - y[0]).abs();
        let mut dy = (x[1] - y[1]).abs();
        if self.wrap == Wrap::Torus {
            dx %= self.window;
            dy %= self.window;
            dx = dx.min(self.window - dx);
            dy = dy.min(self.window - dy);
        }
        dx.hypot(dy)
    }

    /// Whether link `i` counts toward statistics. On the torus every link
    /// does; in open mode both ends must be at least `window / 4` from every edge.
    pub fn in_guard(&self, i: usize) -> bool {
        match self.wrap {
            Wrap::Torus => true,
            Wrap::Open => {
                let m = self.window / 4.0;
                let ok = |p: Point| p.iter().all(|&c| c >= m && c <= self.window - m);
                ok(self.transmitters[i]) && ok(self.receivers[i])
            }
        }
    }

    /// Every point shifted by `shift`, wrapped back into the window on the torus.
    pub fn translated(&self, shift: Point) -> Self {
        let mv = |p: &Point| {
            let mut q = [p[0] + shift[0], p[1] + shift[1]];
            if self.wrap == Wrap::Torus {
                for c in q.iter_mut() {
                    *c = c.rem_euclid(self.window);
                }
            }
            q
        };
        NetworkRealization {
            window: self.window,
            wrap: self.wrap,
            transmitters: self.transmitters.iter().map(mv).collect(),
            receivers: self.receivers.iter().map(mv).collect(),
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = RealizationDocument { version: REALIZATION_FORMAT_VERSION, net: self.clone() };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: RealizationDocument = serde_json::from_str(s)?;
        if doc.version != REALIZATION_FORMAT_VERSION {
            return Err(Error::Serialization(format!("unsupported realization version {}", doc.version)));
        }
        NetworkRealization::from_points(doc.net.window, doc.net.wrap, doc.net.transmitters, doc.net.receivers, doc.net.seed)
    }
}

/// Samples a bipolar network on a `window x window` square.
///
/// The link count is Poisson(`lambda window²`); transmitters are uniform and
/// each receiver sits at distance `r` in a uniform direction.
pub fn sample_network(params: &SystemParams, window: f64, wrap: Wrap, seed: u64) -> Result<NetworkRealization> {
    if !(window > 0.0) {
        return Err(invalid("window", format!("must be positive, got {window}")));
    }
    if window < 4.0 * params.r {
        return Err(Error::DegenerateGeometry { window, min: 4.0 * params.r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = params.lambda * window * window;
    let count = Poisson::new(mean)
        .map_err(|e| invalid("lambda", e.to_string()))?
        .sample(&mut rng) as usize;
    let mut transmitters = Vec::with_capacity(count);
    let mut receivers = Vec::with_capacity(count);
    for _ in 0..count {
        let x = [rng.gen::<f64>() * window, rng.gen::<f64>() * window];
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        let mut y = [x[0] + params.r * theta.cos(), x[1] + params.r * theta.sin()];
        if wrap == Wrap::Torus {
            y[0] = y[0].rem_euclid(window);
            y[1] = y[1].rem_euclid(window);
        }
        transmitters.push(x);
        receivers.push(y);
    }
    Ok(NetworkRealization { window, wrap, transmitters, receivers, seed })
}

/// Foreign receivers inside link `i`'s stopping set, nearest first. The
/// link's own receiver is never part of the observation.
pub fn observed_receivers(i: usize, spec: &StoppingSetSpec, net: &NetworkRealization) -> Result<Observation> {
    if i >= net.len() {
        return Err(Error::IndexOutOfRange { index: i, len: net.len() });
    }
    let x = net.transmitters[i];
    let all = || {
        net.receivers
            .iter()
            .enumerate()
            .filter(move |(j, _)| *j != i)
            .map(move |(j, &y)| (j, net.distance(x, y)))
    };
    let by_distance = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    match *spec {
        StoppingSetSpec::Empty => Ok(Observation { neighbors: Vec::new(), radius: 0.0 }),
        StoppingSetSpec::Disk { radius } => {
            let mut neighbors: Vec<_> = all().filter(|(_, d)| *d <= radius).collect();
            neighbors.sort_by(by_distance);
            Ok(Observation { neighbors, radius })
        }
        StoppingSetSpec::NearestReceivers { p } => {
            let mut neighbors: Vec<_> = all().collect();
            if neighbors.len() > p {
                neighbors.select_nth_unstable_by(p - 1, by_distance);
                neighbors.truncate(p);
            }
            neighbors.sort_by(by_distance);
            let radius = neighbors.last().map_or(0.0, |n| n.1);
            Ok(Observation { neighbors, radius })
        }
    }
}

/// `D = ||x - y||^alpha / (T r^alpha)` under the realization's metric.
pub fn distance_measure(x: Point, y: Point, net: &NetworkRealization, params: &SystemParams) -> f64 {
    params.distance_measure(net.distance(x, y))
}
