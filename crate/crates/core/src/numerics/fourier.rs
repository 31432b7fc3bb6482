use num_complex::Complex64;

use super::quad::gk15;
use crate::error::{Error, Result};

const MAX_PANELS: usize = 400_000;
const STALL_PANELS: usize = 3;

/// A complex-valued function of a real frequency, e.g. a characteristic
/// function or a Laplace transform on the imaginary axis.
pub struct ComplexFn<'a> {
    func: Box<dyn Fn(f64) -> Complex64 + Send + Sync + 'a>,
    /// `f(-w) = conj(f(w))`.
    pub conjugate_symmetric: bool,
    /// Declared probability mass at zero of the underlying variable. Only the
    /// Plancherel inversion uses it; the atom is inverted analytically.
    pub atom_at_zero: f64,
}

impl<'a> ComplexFn<'a> {
    pub fn new<F>(f: F, conjugate_symmetric: bool) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'a,
    {
        ComplexFn {
            func: Box::new(f),
            conjugate_symmetric,
            atom_at_zero: 0.0,
        }
    }

    pub fn with_atom_at_zero(mut self, mass: f64) -> Self {
        self.atom_at_zero = mass;
        self
    }

    #[inline]
    pub fn eval(&self, omega: f64) -> Complex64 {
        (self.func)(omega)
    }

    fn check_normalised(&self) -> Result<()> {
        let v = self.eval(0.0);
        if (v - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(Error::NotNormalised(format!("{v}")));
        }
        Ok(())
    }

    fn check_symmetry(&self) -> Result<()> {
        if !self.conjugate_symmetric {
            return Ok(());
        }
        for w in [0.37, 1.9, 7.3, 41.0] {
            let a = self.eval(w);
            let b = self.eval(-w).conj();
            if (a - b).norm() > 1e-9 * (1.0 + a.norm()) {
                return Err(Error::SymmetryViolation(w));
            }
        }
        Ok(())
    }
}

/// Outcome of an oscillatory inversion integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Frequency at which the integration stopped.
    pub omega_max: f64,
    pub panels: usize,
    /// False when the panel cap was hit with the tail still moving.
    pub converged: bool,
}

/// `(e^{j w c} - 1) / (j w)`, with the removable point `w = 0` mapped to `c`.
#[inline]
pub fn expm1_over_j(omega: f64, c: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(c, 0.0);
    }
    let x = omega * c;
    let s = (0.5 * x).sin();
    Complex64::new(x.sin() / omega, 2.0 * s * s / omega)
}

fn panel_integral<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, depth: u32) -> f64 {
    let (v, e) = gk15(g, a, b);
    if depth == 0 || e <= 1e-12 * v.abs().max(1e-3) {
        return v;
    }
    let m = 0.5 * (a + b);
    panel_integral(g, a, m, depth - 1) + panel_integral(g, m, b, depth - 1)
}

/// `∫_0^∞ g(w) dw` for an oscillatory, slowly decaying `g`.
///
/// Panels of fixed length are accumulated; the running estimate is the mean
/// of the last two partial sums so the leading alternating term cancels.
/// Integration stops after three consecutive panels move the estimate by less
/// than `tol * 0.01`; a power-law tail fitted on the last increments is added.
fn integrate_oscillatory<F: Fn(f64) -> f64>(g: F, panel: f64, tol: f64) -> InversionResult {
    let mut prev_sum = 0.0;
    let mut sum = 0.0;
    let mut prev_avg = 0.0;
    let mut incs: Vec<f64> = Vec::new();
    let mut quiet = 0;
    for k in 0..MAX_PANELS {
        let a = k as f64 * panel;
        let b = a + panel;
        prev_sum = sum;
        sum += panel_integral(&g, a, b, 6);
        let avg = 0.5 * (sum + prev_sum);
        if k >= 1 {
            let d = avg - prev_avg;
            incs.push(d);
            if d.abs() < tol * 0.01 {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= STALL_PANELS && k >= 8 {
                let n = incs.len();
                let (d1, d2) = (incs[n - 2], incs[n - 1]);
                let (w1, w2) = (a, b);
                let mut tail = 0.0;
                if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
                    let p = (d1 / d2).ln() / (w2 / w1).ln();
                    if p > 1.05 && p < 20.0 {
                        tail = d2 * (w2 / panel) / (p - 1.0);
                    }
                }
                return InversionResult {
                    value: avg + tail,
                    error_estimate: 0.5 * tail.abs() + 3.0 * d2.abs(),
                    omega_max: b,
                    panels: k + 1,
                    converged: true,
                };
            }
        }
        prev_avg = avg;
    }
    let b = MAX_PANELS as f64 * panel;
    InversionResult {
        value: prev_avg,
        error_estimate: (sum - prev_sum).abs(),
        omega_max: b,
        panels: MAX_PANELS,
        converged: false,
    }
}

/// Gil-Pelaez inversion: `P(X < x) = 1/2 - (1/pi) ∫_0^∞ Im{e^{-j w x} phi(w)} / w dw`
/// with `phi(w) = E[e^{j w X}]`. The result is clamped to `[0, 1]`.
pub fn gil_pelaez_cdf(phi: &ComplexFn<'_>, x: f64, tol: f64) -> Result<InversionResult> {
    phi.check_normalised()?;
    phi.check_symmetry()?;
    let g = |w: f64| (Complex64::from_polar(1.0, -w * x) * phi.eval(w)).im / w;
    let panel = std::f64::consts::PI / x.abs().max(1.0);
    let mut r = integrate_oscillatory(g, panel, tol);
    r.value = (0.5 - r.value / std::f64::consts::PI).clamp(0.0, 1.0);
    r.error_estimate /= std::f64::consts::PI;
    Ok(r)
}

/// `P(U < c)` for a non-negative `U` from its Laplace transform on the
/// imaginary axis, `L(j w) = E[e^{-j w U}]`:
///
/// `(1/2pi) ∫ L(j w) (e^{j w c} - 1) / (j w) dw`.
///
/// A declared atom at zero is subtracted from `L` and added back exactly.
pub fn plancherel_ccdf(laplace: &ComplexFn<'_>, c: f64, tol: f64) -> Result<InversionResult> {
    laplace.check_normalised()?;
    laplace.check_symmetry()?;
    if c <= 0.0 {
        return Ok(InversionResult {
            value: 0.0,
            error_estimate: 0.0,
            omega_max: 0.0,
            panels: 0,
            converged: true,
        });
    }
    let atom = laplace.atom_at_zero;
    let panel = std::f64::consts::PI / c.abs().max(1.0);
    let mut r = if laplace.conjugate_symmetric {
        let g = |w: f64| ((laplace.eval(w) - atom) * expm1_over_j(w, c)).re;
        let mut r = integrate_oscillatory(g, panel, tol);
        r.value /= std::f64::consts::PI;
        r.error_estimate /= std::f64::consts::PI;
        r
    } else {
        let g = |w: f64| {
            ((laplace.eval(w) - atom) * expm1_over_j(w, c)
                + (laplace.eval(-w) - atom) * expm1_over_j(-w, c))
            .re
        };
        let mut r = integrate_oscillatory(g, panel, tol);
        r.value /= 2.0 * std::f64::consts::PI;
        r.error_estimate /= 2.0 * std::f64::consts::PI;
        r
    };
    r.value = (atom + r.value).clamp(0.0, 1.0);
    Ok(r)
}

/// `1 - (1 - x)^{j w}`, the closed form of
/// `sum_{k>=1} binom(j w, k) (-1)^{k+1} x^k` for `x` in `[0, 1]`.
pub fn one_minus_pow_j(omega: f64, x: f64) -> Complex64 {
    if x >= 1.0 {
        return Complex64::new(1.0, 0.0);
    }
    let phase = omega * (-x).ln_1p();
    Complex64::new(1.0 - phase.cos(), -phase.sin())
}

/// The same sum truncated after `terms` terms.
pub fn one_minus_pow_j_series(omega: f64, x: f64, terms: usize) -> Complex64 {
    let z = Complex64::new(0.0, omega);
    let mut binom = Complex64::new(1.0, 0.0);
    let mut xk = 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=terms {
        binom = binom * (z - (k - 1) as f64) / k as f64;
        xk *= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += binom * (sign * xk);
    }
    acc
}

/// A finite discrete measure `sum_i w_i delta(c_i)` whose Fourier transform
/// `sum_i w_i e^{-j w c_i}` is needed on a uniform frequency grid.
#[derive(Debug, Clone, Default)]
pub struct PhaseSum {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PhaseSum {
    pub fn push(&mut self, c: f64, w: f64) {
        self.points.push(c);
        self.weights.push(w);
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `sum_i w_i e^{-j n h c_i}` for `n = 0..steps`, by phase recurrence with
    /// periodic exact re-anchoring.
    pub fn eval_uniform(&self, h: f64, steps: usize) -> Vec<Complex64> {
        let m = self.points.len();
        let rot: Vec<Complex64> = self.points.iter().map(|&c| Complex64::from_polar(1.0, -h * c)).collect();
        let mut cur: Vec<Complex64> = self.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        let mut out = Vec::with_capacity(steps);
        for n in 0..steps {
            if n > 0 && n % 512 == 0 {
                for i in 0..m {
                    cur[i] = Complex64::from_polar(self.weights[i], -(n as f64) * h * self.points[i]);
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..m {
                acc += cur[i];
                cur[i] *= rot[i];
            }
            out.push(acc);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp1_cf() -> ComplexFn<'static> {
        // E[e^{j w X}] for X ~ Exp(1)
        ComplexFn::new(|w| Complex64::new(1.0, 0.0) / Complex64::new(1.0, -w), true)
    }

    fn exp1_laplace() -> ComplexFn<'static> {
        // E[e^{-j w U}] for U ~ Exp(1)
        ComplexFn::new(|w| Complex64::new(1.0, 0.0) / Complex64::new(1.0, w), true)
    }

    #[test]
    fn gil_pelaez_exponential() {
        let r = gil_pelaez_cdf(&exp1_cf(), 1.0, 1e-6).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((r.value - exact).abs() < 1e-4, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn gil_pelaez_degenerate_and_gaussian() {
        let point = ComplexFn::new(|_| Complex64::new(1.0, 0.0), true);
        let r = gil_pelaez_cdf(&point, 0.7, 1e-5).unwrap();
        assert!((r.value - 1.0).abs() < 1e-4, "{r:?}");
        let gauss = ComplexFn::new(|w| Complex64::new((-0.5 * w * w).exp(), 0.0), true);
        let r = gil_pelaez_cdf(&gauss, 0.0, 1e-8).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn plancherel_point_mass_and_exponential() {
        let zero = ComplexFn::new(|_| Complex64::new(1.0, 0.0), true).with_atom_at_zero(1.0);
        assert!((plancherel_ccdf(&zero, 0.3, 1e-6).unwrap().value - 1.0).abs() < 1e-12);

        let r = plancherel_ccdf(&exp1_laplace(), 1.0, 1e-6).unwrap();
        let exact = 1.0 - (-1.0f64).exp();
        assert!((r.value - exact).abs() < 1e-4, "{r:?}");

        assert_eq!(plancherel_ccdf(&exp1_laplace(), -0.5, 1e-6).unwrap().value, 0.0);
        assert_eq!(plancherel_ccdf(&exp1_laplace(), 0.0, 1e-6).unwrap().value, 0.0);
    }

    #[test]
    fn plancherel_agrees_with_gil_pelaez() {
        // Gamma(2, 1): shared distribution for both routes
        let cf = ComplexFn::new(|w| (Complex64::new(1.0, 0.0) / Complex64::new(1.0, -w)).powi(2), true);
        let lt = ComplexFn::new(|w| (Complex64::new(1.0, 0.0) / Complex64::new(1.0, w)).powi(2), true);
        let tol = 1e-5;
        for x in [0.3, 1.0, 2.5, 4.0] {
            let a = gil_pelaez_cdf(&cf, x, tol).unwrap().value;
            let b = plancherel_ccdf(&lt, x, tol).unwrap().value;
            let exact = 1.0 - (1.0 + x) * (-x).exp();
            assert!((a - b).abs() < 2.0 * tol + 1e-5, "x={x}: {a} vs {b}");
            assert!((a - exact).abs() < 1e-4);
        }
    }

    #[test]
    fn cdf_monotone_on_grid() {
        let lt = exp1_laplace();
        let mut prev = 0.0;
        for i in 1..30 {
            let c = i as f64 * 0.2;
            let v = plancherel_ccdf(&lt, c, 1e-5).unwrap().value;
            assert!(v >= prev - 1e-5);
            prev = v;
        }
    }

    #[test]
    fn symmetry_is_spot_checked() {
        let bad = ComplexFn::new(|w| Complex64::new(1.0, 0.0) / Complex64::new(1.0, w.abs()), true);
        assert!(matches!(plancherel_ccdf(&bad, 1.0, 1e-4), Err(Error::SymmetryViolation(_))));
        let unnormalised = ComplexFn::new(|_| Complex64::new(0.5, 0.0), true);
        assert!(matches!(gil_pelaez_cdf(&unnormalised, 1.0, 1e-4), Err(Error::NotNormalised(_))));
    }

    #[test]
    fn k_sum_closed_form_matches_series() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let omega = 5.0 * next();
            let x = 0.5 * next();
            let a = one_minus_pow_j(omega, x);
            let b = one_minus_pow_j_series(omega, x, 40);
            assert!((a - b).norm() < 1e-8, "w={omega} x={x}: {a} vs {b}");
        }
        assert_eq!(one_minus_pow_j(3.0, 1.0), Complex64::new(1.0, 0.0));
        assert_eq!(one_minus_pow_j(3.0, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phase_sum_matches_direct() {
        let mut ps = PhaseSum::default();
        ps.push(0.3, 0.5);
        ps.push(1.7, 0.25);
        ps.push(-2.1, 0.25);
        let h = 0.37;
        let vals = ps.eval_uniform(h, 2000);
        for n in [0usize, 1, 511, 512, 513, 1999] {
            let w = n as f64 * h;
            let direct: Complex64 = ps
                .points
                .iter()
                .zip(&ps.weights)
                .map(|(&c, &wt)| Complex64::from_polar(wt, -w * c))
                .sum();
            assert!((vals[n] - direct).norm() < 1e-12, "n={n}");
        }
    }
}
