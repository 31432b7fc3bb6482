use crate::error::{invalid, Result};

/// Lévy measure of a compound Poisson variable discretised on `{0, h, 2h, ...}`.
///
/// Each jump is split between its two neighbouring lattice points so that
/// the mean is preserved. Jumps beyond the last point are kept in
/// `overflow`: they count toward the total intensity but never toward the
/// distribution on the lattice.
#[derive(Debug, Clone)]
pub struct LatticeMeasure {
    pub step: f64,
    pub masses: Vec<f64>,
    pub overflow: f64,
}

impl LatticeMeasure {
    /// Lattice with points `0..=points` spaced by `step`.
    pub fn new(step: f64, points: usize) -> Result<Self> {
        if !(step > 0.0) || points == 0 {
            return Err(invalid("lattice", format!("need step > 0 and points > 0, got {step}, {points}")));
        }
        Ok(LatticeMeasure { step, masses: vec![0.0; points + 1], overflow: 0.0 })
    }

    pub fn last_index(&self) -> usize {
        self.masses.len() - 1
    }

    pub fn add(&mut self, jump: f64, weight: f64) {
        if !(weight > 0.0) || !(jump > 0.0) {
            return;
        }
        let x = jump / self.step;
        let n = self.last_index();
        if x >= n as f64 {
            self.overflow += weight;
            return;
        }
        let k = x.floor() as usize;
        let frac = x - k as f64;
        self.masses[k] += weight * (1.0 - frac);
        self.masses[k + 1] += weight * frac;
    }

    /// Intensity of non-trivial jumps (lattice index >= 1 plus overflow).
    pub fn total_intensity(&self) -> f64 {
        self.masses[1..].iter().sum::<f64>() + self.overflow
    }

    /// Probability masses of the compound sum at lattice points `0..=n`, by
    /// Panjer's recursion `g_n = (1/n) sum_j j m_j g_{n-j}`.
    ///
    /// The recursion starts from a scaled `g_0 = 1` and rescales on the fly, so
    /// large total intensities do not underflow.
    pub fn compound_pmf(&self) -> Vec<f64> {
        let n = self.last_index();
        let total = self.total_intensity();
        let jm: Vec<f64> = (0..=n).map(|j| j as f64 * self.masses[j]).collect();
        let mut g = vec![0.0; n + 1];
        g[0] = 1.0;
        let mut log_scale = 0.0f64;
        for i in 1..=n {
            let mut acc = 0.0;
            for j in 1..=i {
                acc += jm[j] * g[i - j];
            }
            g[i] = acc / i as f64;
            if g[i] > 1e200 {
                for v in g[..=i].iter_mut() {
                    *v *= 1e-200;
                }
                log_scale += 200.0 * std::f64::consts::LN_10;
            }
        }
        let shift = log_scale - total;
        g.iter()
            .map(|&v| if v > 0.0 { (v.ln() + shift).exp() } else { 0.0 })
            .collect()
    }
}

/// `P(X <= y)` for the continuous variable represented by lattice masses
/// `pmf` (mean-preserving rounding): the step at `y` is read as a unit ramp
/// over `[y - h/2, y + h/2]`.
pub fn lattice_cdf(pmf: &[f64], step: f64, y: f64) -> f64 {
    if y < -0.5 * step {
        return 0.0;
    }
    let x = y / step + 0.5;
    let full = (x.floor() as usize).min(pmf.len());
    let mut acc: f64 = pmf[..full].iter().sum();
    if full < pmf.len() {
        acc += pmf[full] * (x - full as f64);
    }
    acc.clamp(0.0, 1.0)
}
