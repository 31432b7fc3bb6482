use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate.
pub(crate) fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        res_k += WGK[j] * s;
        if j % 2 == 1 {
            res_g += WG[j / 2] * s;
        }
    }
    let value = res_k * half;
    let err = ((res_k - res_g) * half).abs();
    (value, err)
}

/// Globally adaptive Gauss–Kronrod quadrature on `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `tol * |I|` (or the floating-point floor).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    if !(a < b) {
        if a == b {
            return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
        }
        return Err(crate::error::invalid("bounds", format!("need a < b, got [{a}, {b}]")));
    }
    let (v0, e0) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let value: f64 = intervals.iter().map(|s| s.2).sum();
        let error: f64 = intervals.iter().map(|s| s.3).sum();
        let target = (tol * value.abs()).max(1e-300);
        if error <= target {
            return Ok(Quadrature { value, error, evaluations });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence { estimate: value, error, intervals: intervals.len() });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, e) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval no longer divisible; accept its contribution as is
            let value: f64 = intervals.iter().map(|s| s.2).sum::<f64>();
            return Err(Error::QuadratureNonConvergence { estimate: value, error: e, intervals: intervals.len() });
        }
        let (vl, el) = gk15(&f, lo, mid);
        let (vr, er) = gk15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
        // roundoff floor: stop refining once every interval error is at machine level
        let abs_sum: f64 = intervals.iter().map(|s| s.2.abs()).sum();
        let error: f64 = intervals.iter().map(|s| s.3).sum();
        if error <= 50.0 * f64::EPSILON * abs_sum {
            let value: f64 = intervals.iter().map(|s| s.2).sum();
            return Ok(Quadrature { value, error, evaluations });
        }
    }
}

/// `∫_a^∞ f(v) dv` for integrands bounded by `C v^-beta`, `beta > 1`.
///
/// The half line is cut at geometrically growing points. Past the last cut
/// the bound `C b^(1-beta) / (beta - 1)` (with `C` estimated from samples near
/// `b`) is folded into the reported error.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64, beta: f64) -> Result<Quadrature> {
    if !(beta > 1.0) {
        return Err(Error::DivergentTail(beta));
    }
    let mut lo = a;
    let mut hi = if a > 0.0 { 2.0 * a } else { a + 1.0 };
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for _ in 0..200 {
        let seg = integrate_adaptive(&f, lo, hi, tol * 0.1)?;
        value += seg.value;
        error += seg.error;
        evaluations += seg.evaluations;
        let c = [1.0, 1.25, 1.5, 2.0]
            .iter()
            .map(|k| {
                let v = hi * k;
                f(v).abs() * v.powf(beta)
            })
            .fold(0.0, f64::max);
        evaluations += 4;
        let tail = c * hi.powf(1.0 - beta) / (beta - 1.0);
        if tail + error <= tol * value.abs() || (value == 0.0 && tail == 0.0) {
            return Ok(Quadrature { value, error: error + tail, evaluations });
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::QuadratureNonConvergence { estimate: value, error, intervals: 200 })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }
}

/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}
