use hll_core::special::{
    alpha, h, h_recursion_step, h_taylor, sigma, sigma_with_iterations, tau, tau_with_iterations, xi, Registers,
    ALPHA_INF,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// Plain term-by-term sums, using powf instead of repeated squaring.
fn sigma_series(x: f64) -> f64 {
    let mut s = x;
    for k in 1..64 {
        let t = x.powf(2f64.powi(k)) * 2f64.powi(k - 1);
        if t == 0.0 {
            break;
        }
        s += t;
    }
    s
}

fn tau_series(x: f64) -> f64 {
    let mut s = 1.0 - x;
    for k in 1..200 {
        let w = 2f64.powi(-k);
        s -= (1.0 - x.powf(w)).powi(2) * w;
    }
    s / 3.0
}

// mpmath with 40 significant digits
const SIGMA_HALF: f64 = 0.890_747_074_037_790_3;
const TAU_HALF: f64 = 0.149_929_495_864_088_1;
const XI_0_3: f64 = 0.999_990_835_143_023_1;
const H_ONE: f64 = 0.418_023_293_130_673_6;
const ALPHA_16: f64 = 0.673_102_023_867_666;
const ALPHA_128: f64 = 0.715_271_189_961_339_4;

#[test]
fn reference_values() {
    assert!(rel(sigma(0.5).unwrap(), SIGMA_HALF) < 1e-15);
    assert!(rel(sigma_series(0.5), SIGMA_HALF) < 1e-15);
    assert!(rel(tau(0.5).unwrap(), TAU_HALF) < 1e-14);
    assert!(rel(tau_series(0.5), TAU_HALF) < 1e-13);
    assert!(rel(xi(0.3), XI_0_3) < 1e-15);
    assert!(rel(h(1.0).unwrap(), H_ONE) < 1e-15);
    assert!(rel(h(1.0).unwrap(), 1.0 - 1.0 / (std::f64::consts::E - 1.0)) < 1e-15);
}

#[test]
fn series_oracles_on_grid() {
    for i in 1..100 {
        let x = f64::from(i) / 100.0;
        assert!(rel(sigma(x).unwrap(), sigma_series(x)) < 1e-13, "sigma({x})");
        let t = tau(x).unwrap();
        assert!((t - tau_series(x)).abs() < 1e-14, "tau({x})");
    }
}

#[test]
fn sigma_tau_xi_identity() {
    for i in 1..1000 {
        let x = f64::from(i) / 1000.0;
        let l = (1.0 / x).ln();
        let lhs = sigma(x).unwrap() + tau(x).unwrap();
        let rhs = ALPHA_INF * xi(l.log2()) / l;
        assert!(rel(lhs, rhs) < 1e-9, "x = {x}: {lhs} vs {rhs}");
    }
}

#[test]
fn iteration_counts() {
    for (p, sigma_n, tau_n) in [(12, 18, 21), (20, 26, 22)] {
        let m = f64::from(1u32 << p);
        let (_, ns) = sigma_with_iterations((m - 1.0) / m).unwrap();
        let (_, nt) = tau_with_iterations(1.0 / m).unwrap();
        assert!(ns.abs_diff(sigma_n) <= 1, "sigma at p = {p}: {ns}");
        assert!(nt.abs_diff(tau_n) <= 1, "tau at p = {p}: {nt}");
    }
}

#[test]
fn fixpoint_terminates_at_extremes() {
    for x in [f64::MIN_POSITIVE, 1e-300, 1e-16, 0.5, 1.0 - f64::EPSILON, 1.0 - f64::EPSILON / 2.0] {
        assert!(sigma(x).unwrap().is_finite());
        assert!(tau(x).unwrap() >= 0.0);
    }
}

#[test]
fn monotone_on_grid() {
    let grid: Vec<f64> = (1..1000).map(|i| f64::from(i) / 1000.0).collect();
    for w in grid.windows(2) {
        assert!(sigma(w[1]).unwrap() > sigma(w[0]).unwrap());
    }
    for i in 0..2000 {
        let (a, b) = (f64::from(i) * 0.01, f64::from(i + 1) * 0.01);
        assert!(h(b).unwrap() > h(a).unwrap(), "h at {a}");
    }
}

#[test]
fn tau_is_unimodal() {
    // τ vanishes at both ends, so it rises to a single maximum and then falls
    let values: Vec<f64> = (1..1000).map(|i| tau(f64::from(i) / 1000.0).unwrap()).collect();
    let peak = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(values[..=peak].windows(2).all(|w| w[1] > w[0]));
    assert!(values[peak..].windows(2).all(|w| w[1] < w[0]));
    assert!(values.iter().all(|&v| v > 0.0));
}

#[test]
fn xi_periodic() {
    for i in 0..200 {
        let x = -7.0 + f64::from(i) * 0.0731;
        assert!((xi(x + 1.0) - xi(x)).abs() < 1e-12, "x = {x}");
        assert!((xi(x + 5.0) - xi(x)).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn xi_deviation_bound() {
    let n = 1_000_000;
    let max = (0..n).map(|i| (xi(f64::from(i) / f64::from(n)) - 1.0).abs()).fold(0.0, f64::max);
    assert!((9.883e-6..=9.886e-6).contains(&max), "max |xi - 1| = {max:e}");
}

#[test]
fn h_limits() {
    assert_eq!(h(0.0).unwrap(), 0.0);
    assert!(h(40.0).unwrap() > 1.0 - 1e-15);
    assert!(h(40.0).unwrap() < 1.0);
    for x in [1e-300, 1e-10, 1e-3, 0.3, 0.49999, 0.5, 2.0, 700.0, 800.0] {
        let v = h(x).unwrap();
        assert!((0.0..=1.0).contains(&v), "h({x}) = {v}");
    }
}

#[test]
fn h_small_arguments_avoid_cancellation() {
    // h(x) ≈ x/2 - x²/12 as x -> 0
    for x in [1e-12, 1e-8, 1e-5] {
        let approx = x / 2.0 - x * x / 12.0;
        assert!(rel(h(x).unwrap(), approx) < 1e-12);
    }
}

#[test]
fn recursion_step_reproduces_h() {
    assert!((h_recursion_step(0.25, h(0.5).unwrap()) - h(1.0).unwrap()).abs() < 1e-12);
    for i in 1..400 {
        let x = f64::from(i) * 0.05;
        let got = h_recursion_step(x, h(2.0 * x).unwrap());
        assert!(rel(got, h(4.0 * x).unwrap()) < 1e-13, "x = {x}");
    }
}

#[test]
fn taylor_start_accuracy() {
    for i in 1..500 {
        let x = f64::from(i) / 1000.0;
        assert!(rel(h_taylor(x), h(x).unwrap()) < 2e-8, "x = {x}");
    }
}

#[test]
fn alpha_values() {
    assert_eq!(alpha(Registers::Infinite).unwrap(), ALPHA_INF);
    assert!((ALPHA_INF - 0.721_347_52).abs() < 1e-8);
    assert!(rel(alpha(Registers::Finite(16)).unwrap(), ALPHA_16) < 1e-9);
    assert!(rel(alpha(Registers::Finite(128)).unwrap(), ALPHA_128) < 1e-9);
    let big = alpha(Registers::Finite(1 << 16)).unwrap();
    assert!((big - ALPHA_INF).abs() < 1e-3, "alpha(2^16) = {big}");
    // the known large-m approximation 0.7213 / (1 + 1.079 / m)
    let m = 4096.0;
    assert!((alpha(Registers::Finite(4096)).unwrap() - 0.7213 / (1.0 + 1.079 / m)).abs() < 1e-4);
}

#[test]
fn alpha_sequence_increases_to_limit() {
    let mut prev = 0.0;
    for p in 1..=20 {
        let a = alpha(Registers::Finite(1 << p)).unwrap();
        assert!(a > prev && a < ALPHA_INF, "p = {p}: {a}");
        prev = a;
    }
}

#[test]
fn alpha_one_diverges() {
    assert!(alpha(Registers::Finite(1)).is_err());
}

proptest! {
    #[test]
    fn recursion_contracts_relative_error(x in 0.0f64..100.0, e in -0.1f64..0.1) {
        let exact = h(2.0 * x).unwrap();
        let out_exact = h_recursion_step(x, exact);
        let out = h_recursion_step(x, exact * (1.0 + e));
        prop_assume!(out_exact > 0.0);
        let err = ((out - out_exact) / out_exact).abs();
        prop_assert!(err <= 0.741 * e.abs() + 1e-15, "x = {}, e = {}, err = {}", x, e, err);
    }

    #[test]
    fn sigma_matches_series(x in 0.0f64..0.999) {
        prop_assert!(rel(sigma(x).unwrap().max(1e-300), sigma_series(x).max(1e-300)) < 1e-12);
    }

    #[test]
    fn identity_holds(x in 0.001f64..0.999) {
        let l = (1.0 / x).ln();
        prop_assert!(rel(sigma(x).unwrap() + tau(x).unwrap(), ALPHA_INF * xi(l.log2()) / l) < 1e-9);
    }
}
