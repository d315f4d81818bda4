//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's ODE or PDE code: the mode equation
//! is solved in closed form through the Gauss hypergeometric function and the
//! geometry is recomputed from the embedding of the tube in R^4.

#![allow(dead_code)]

use serrin_core::{Axis, BoundaryProfile};

/// `2F1(a, b; c; x)` by its power series, for `0 <= x <= 0.9996`.
///
/// Only positive parameters are used, so every term is positive and the slow
/// tail near `x = 1` costs iterations but no accuracy.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> f64 {
    assert!((0.0..=0.9996).contains(&x), "series oracle used outside its range: x = {x}");
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    for k in 0..400_000 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        // Kahan summation keeps long alternating-free tails exact to rounding.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// The regular solution itself, `L(θ)`, in the normalisation above.
pub fn mode_function(eps: u32, delta: u32, theta: f64) -> f64 {
    let x = theta.sin().powi(2);
    let (e, d) = (eps as f64, delta as f64);
    let a = (e + d) / 2.0;
    x.powf(e / 2.0) * (1.0 - x).powf(d / 2.0) * hyp2f1(a, a + 1.0, e + 1.0, x)
}

/// `L'/L` for the regular solution with frequencies `(eps, delta)`:
/// `L = x^{eps/2} (1-x)^{delta/2} 2F1(a, a+1; eps+1; x)`, `x = sin^2 θ`, `a = (eps+delta)/2`.
pub fn log_derivative(eps: u32, delta: u32, theta: f64) -> f64 {
    let x = theta.sin().powi(2);
    let (e, d) = (eps as f64, delta as f64);
    let a = (e + d) / 2.0;
    let f = hyp2f1(a, a + 1.0, e + 1.0, x);
    let fp = a * (a + 1.0) / (e + 1.0) * hyp2f1(a + 1.0, a + 2.0, e + 2.0, x);
    let mut dldx = -d / (2.0 * (1.0 - x)) + fp / f;
    if eps > 0 {
        dldx += e / (2.0 * x);
    }
    (2.0 * theta).sin() * dldx
}

/// Riccati quantity of the library's convention: `f_n = L'/L` on the xi
/// axis, `k_n = λ L'/L` on the eta axis.
pub fn riccati(axis: Axis, n: u32, lambda: f64) -> f64 {
    match axis {
        Axis::Xi => log_derivative(0, n, lambda),
        Axis::Eta => lambda * log_derivative(n, 0, lambda),
    }
}

pub fn sigma(axis: Axis, n: u32, lambda: f64) -> f64 {
    let big_f = match axis {
        Axis::Xi => log_derivative(0, n, lambda),
        Axis::Eta => log_derivative(n, 0, lambda),
    };
    0.5 * lambda.tan() * big_f - 0.5 / lambda.cos().powi(2)
}

/// Root of the oracle `sigma` by plain bisection.
pub fn bisect_sigma(axis: Axis, n: u32, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = sigma(axis, n, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = sigma(axis, n, mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Embedding of the tube coordinates `(t, a, b)` into the unit sphere of R^4.
pub fn embed(profile: &BoundaryProfile, t: f64, a: f64, b: f64) -> [f64; 4] {
    let th = t * profile.phi(a);
    let (s, c) = th.sin_cos();
    let (eta, xi) = match profile.axis() {
        Axis::Xi => (b, a),
        Axis::Eta => (a, b),
    };
    [s * eta.cos(), s * eta.sin(), c * xi.cos(), c * xi.sin()]
}

/// Euclidean pullback metric by central differences of [`embed`].
pub fn fd_metric(profile: &BoundaryProfile, t: f64, a: f64, b: f64) -> [[f64; 3]; 3] {
    let h = 1e-5;
    let x = [t, a, b];
    let mut cols = [[0.0; 4]; 3];
    for (i, col) in cols.iter_mut().enumerate() {
        let mut p = x;
        let mut m = x;
        p[i] += h;
        m[i] -= h;
        let (ep, em) = (embed(profile, p[0], p[1], p[2]), embed(profile, m[0], m[1], m[2]));
        for k in 0..4 {
            col[k] = (ep[k] - em[k]) / (2.0 * h);
        }
    }
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = (0..4).map(|k| cols[i][k] * cols[j][k]).sum();
        }
    }
    g
}

pub fn inverse3(g: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (g[r0][c0] * g[r1][c1] - g[r0][c1] * g[r1][c0]) / det;
        }
    }
    inv
}

/// Frozen values computed once with mpmath at 40 digits from the
/// hypergeometric representation above.
pub mod frozen {
    pub const LAMBDA_XI: [f64; 7] = [
        std::f64::consts::FRAC_PI_4,
        0.530_381_500_935_139_7,
        0.399_639_067_336_524_14,
        0.320_406_470_469_101_75,
        0.267_322_030_929_444_15,
        0.229_297_370_268_564_8,
        0.200_728_642_532_463_65,
    ];
    pub const LAMBDA_ETA: [f64; 7] = [
        1.222_340_367_933_207_2,
        1.358_006_174_401_080_4,
        1.416_014_808_869_420_7,
        1.448_719_617_266_976_9,
        1.469_851_012_298_196_5,
        1.484_675_985_962_055_2,
        1.495_670_046_723_098_6,
    ];
    /// `(n, f_n(0.7), k_n(0.7))`.
    pub const RICCATI_AT_0_7: [(u32, f64, f64); 3] = [
        (1, 0.504_758_962_515_961_3, 1.242_824_022_152_614_4),
        (3, 3.062_938_717_163_126_9, 3.487_038_319_330_385_3),
        (5, 5.803_500_400_511_791_8, 5.683_045_982_524_699_4),
    ];
    pub const F1_AT_0_2: f64 = 0.102_885_478_092_004_93;
    pub const SIGMA1_XI_AT_1E_3: f64 = -0.500_000_25;
    /// `σ_1^η, σ_2^η` at `π/2 - 1e-3`.
    pub const SIGMA_ETA_NEAR_HALF_PI: [f64; 2] = [-431_451.401_1, -421_970.859_2];
    /// `σ_n^ξ · 2cos²λ / (n-1)` at `π/2 - 1e-3` for `n = 2, 3, 4`.
    pub const XI_BLOWUP_RATIO: [f64; 3] = [0.999_998_000_001, 0.999_998_875, 0.999_999_111_111];
    pub const SIGMA1_XI_AT_QUARTER_PI: f64 = -0.686_366_962_941_85;
    pub const SIGMA3_XI_AT_QUARTER_PI: f64 = 0.756_691_829_508_588;
}
