//! Scalar functions used by the estimators.

use std::f64::consts::LN_2;

use crate::{Error, Result};

/// Limit of the bias correction factor for `m -> ∞`, `1 / (2 ln 2)`.
pub const ALPHA_INF: f64 = 0.5 / LN_2;

fn check_unit(function: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { function, value: x })
    }
}

/// `σ(x) = x + Σ_{k≥1} x^(2^k) 2^(k-1)`, with `σ(1) = ∞`.
pub fn sigma(x: f64) -> Result<f64> {
    sigma_with_iterations(x).map(|(v, _)| v)
}

/// Like [`sigma`], also returning the number of loop passes until the
/// partial sum stopped changing.
pub fn sigma_with_iterations(x: f64) -> Result<(f64, u32)> {
    check_unit("sigma", x)?;
    if x == 1.0 {
        return Ok((f64::INFINITY, 0));
    }
    let mut x = x;
    let mut y = 1.0;
    let mut z = x;
    let mut iterations = 0;
    loop {
        iterations += 1;
        x *= x;
        let prev = z;
        z += x * y;
        y += y;
        if z == prev {
            return Ok((z, iterations));
        }
    }
}

/// `τ(x) = (1 - x - Σ_{k≥1} (1 - x^(2^-k))² 2^-k) / 3`.
pub fn tau(x: f64) -> Result<f64> {
    tau_with_iterations(x).map(|(v, _)| v)
}

pub fn tau_with_iterations(x: f64) -> Result<(f64, u32)> {
    check_unit("tau", x)?;
    if x == 0.0 || x == 1.0 {
        return Ok((0.0, 0));
    }
    let mut x = x;
    let mut y = 1.0;
    let mut z = 1.0 - x;
    let mut iterations = 0;
    loop {
        iterations += 1;
        x = x.sqrt();
        let prev = z;
        y *= 0.5;
        let d = 1.0 - x;
        z -= d * d * y;
        if z == prev {
            return Ok((z / 3.0, iterations));
        }
    }
}

/// `h(x) = 1 - x / (e^x - 1)`, continuous at `h(0) = 0`.
pub fn h(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain { function: "h", value: x });
    }
    if x < 0.5 {
        Ok(h_series(x))
    } else {
        Ok(1.0 - x / x.exp_m1())
    }
}

/// Bernoulli number expansion `x/2 - Σ B_2n x^2n / (2n)!`, accurate to a few
/// ulps for `x < 0.5`.
fn h_series(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let x2 = x * x;
    let poly = C.iter().rev().fold(0.0, |acc, &c| acc * x2 + c);
    0.5 * x - x2 * poly
}

/// Short Taylor polynomial of `h` used to start the recursion. Intended for
/// arguments below `0.5`, where its relative error stays below about `1e-6`.
#[inline]
pub fn h_taylor(x: f64) -> f64 {
    let x1 = 0.5 * x;
    let x2 = x1 * x1;
    x1 - x2 / 3.0 + x2 * x2 * (1.0 / 45.0 - x2 / 472.5)
}

/// Returns `h(4x)` given `h(2x)`. Relative errors in the input shrink.
#[inline]
pub fn h_recursion_step(x: f64, h2x: f64) -> f64 {
    let g = 1.0 - h2x;
    let den = x + g;
    if den == 0.0 {
        return 0.0;
    }
    (x + h2x * g) / den
}

/// `ξ(x) = ln 2 Σ_{k∈ℤ} 2^(k+x) exp(-2^(k+x))`, a 1-periodic function that
/// deviates from 1 by less than `1e-5`.
pub fn xi(x: f64) -> f64 {
    const CUTOFF: f64 = 1e-20;
    let term = |k: f64| {
        let t = (k + x).exp2();
        t * (-t).exp()
    };
    let k0 = -x.round();
    let mut sum = term(k0);
    let mut k = k0 + 1.0;
    loop {
        let t = term(k);
        sum += t;
        if t < CUTOFF * sum {
            break;
        }
        k += 1.0;
    }
    let mut k = k0 - 1.0;
    loop {
        let t = term(k);
        sum += t;
        if t < CUTOFF * sum {
            break;
        }
        k -= 1.0;
    }
    LN_2 * sum
}

/// Register count argument of [`alpha`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Registers {
    Finite(u64),
    Infinite,
}

/// Bias correction factor
/// `α_m = (m ∫_0^∞ log2((2 + x) / (1 + x))^m dx)^-1`.
///
/// The integral is evaluated after the substitution `u = 1 / (1 + x)`, which
/// gives `∫_0^1 log2(1 + u)^m / u² du`. For `m = 1` it diverges and a
/// quadrature error is returned.
pub fn alpha(m: Registers) -> Result<f64> {
    let m = match m {
        Registers::Infinite => return Ok(ALPHA_INF),
        Registers::Finite(0) => return Err(Error::Domain { function: "alpha", value: 0.0 }),
        Registers::Finite(m) => m as f64,
    };
    // Kronrod nodes are interior, so the endpoints are never evaluated
    let f = |u: f64| (m * (u.ln_1p() / LN_2).ln()).exp() / (u * u);
    // the integrand concentrates in a window of width ~1/m below u = 1
    let mut breaks = vec![0.0];
    let mut w = 0.5;
    while w > 1e-15 {
        breaks.push(1.0 - w);
        w *= 0.5;
    }
    breaks.push(1.0);
    let integral = integrate(f, &breaks, 1e-9)?;
    Ok(1.0 / (m * integral))
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature over consecutive intervals of
/// `breaks` to relative tolerance `rel_tol`.
fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 5000;
    let mut pending: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .map(|w| {
            let (v, e) = gauss_kronrod(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = pending.iter().map(|s| s.2).sum();
        let error: f64 = pending.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if error <= rel_tol * total.abs() {
            return Ok(total);
        }
        if pending.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "estimated error {error:e} above tolerance after {MAX_INTERVALS} intervals"
            )));
        }
        let (worst, _) = pending
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .unwrap();
        let (a, b, _, _) = pending.swap_remove(worst);
        let mid = 0.5 * (a + b);
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (v, e) = gauss_kronrod(&f, lo, hi);
            pending.push((lo, hi, v, e));
        }
    }
}

fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_728,
    ];
    // Gauss weights for the nodes XK[1], XK[3], XK[5], XK[7]
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut kronrod = WK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for i in 0..7 {
        let s = f(c - r * XK[i]) + f(c + r * XK[i]);
        kronrod += WK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * r, ((kronrod - gauss) * r).abs())
}

/// Precomputed `m σ(c / m)` and `m τ(1 - c / m)` for `c = 0 ..= m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTables {
    m: u32,
    sigma: Vec<f64>,
    tau: Vec<f64>,
}

impl CorrectionTables {
    pub fn new(m: u32) -> Self {
        let mf = f64::from(m);
        let sigma = (0..=m).map(|c| mf * sigma(f64::from(c) / mf).unwrap()).collect();
        let tau = (0..=m).map(|c| mf * tau(1.0 - f64::from(c) / mf).unwrap()).collect();
        Self { m, sigma, tau }
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// `m σ(zeros / m)`.
    #[inline]
    pub fn sigma(&self, zeros: u32) -> f64 {
        self.sigma[zeros as usize]
    }

    /// `m τ(1 - saturated / m)`.
    #[inline]
    pub fn tau(&self, saturated: u32) -> f64 {
        self.tau[saturated as usize]
    }
}
