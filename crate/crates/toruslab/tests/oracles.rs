//! Cross-module checks against independent quadrature oracles: the closed
//! forms that assemble Gram and HUM matrices are re-derived here by dense
//! numerical integration that never touches the production code paths.

use num_complex::Complex64;
use std::f64::consts::PI;

use toruslab::hum::HumSystem;
use toruslab::mass_op::MassControlOperator;
use toruslab::observability::{gram_matrix, translation_delta0, FrequencySet};
use toruslab::region::{IntervalUnion, SpaceTimeRegion};
use toruslab::rng::SeededRng;
use toruslab::spectral::{DispersionSymbol, FourierState};

const TWO_PI: f64 = 2.0 * PI;

/// Composite Simpson on `[a, b]` with `n` panels (n even).
fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * (h / 3.0)
}

#[test]
fn gram_entries_match_dense_quadrature() {
    // G = [0,π) × [0,π): entries ∬_G e^{i(λ−μ)·z} dz against ~10^6-point
    // composite Simpson per rectangle (1000 panels per axis)
    let g = SpaceTimeRegion::product(
        &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
        &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
    );
    let p = DispersionSymbol::kdv();
    let freqs = FrequencySet::band(p.clone(), 0, 2);
    let rep = gram_matrix(&freqs, &g);
    let pts = freqs.points();
    for (i, &(ki, pi_)) in pts.iter().enumerate() {
        for (j, &(kj, pj)) in pts.iter().enumerate() {
            let dk = (ki - kj) as f64;
            let dp = (pi_ - pj) as f64;
            let t_int = simpson(|t| Complex64::from_polar(1.0, dp * t), 0.0, PI, 1000);
            let x_int = simpson(|x| Complex64::from_polar(1.0, dk * x), 0.0, PI, 1000);
            let oracle = t_int * x_int;
            let gap = (rep.gram[(i, j)] - oracle).norm();
            assert!(gap <= 1e-8, "entry ({ki},{kj}): gap {gap}");
        }
    }
}

#[test]
fn twisted_gram_matches_time_quadrature() {
    // Φ[j,k] = (Σ_l L(k,l) conj(L(j,l))) · ∫_{E_T} e^{i(k³−j³)t} dt, with the
    // l-sum truncated far out and the time integral by Simpson per interval
    let e_t = IntervalUnion::new(&[(0.0, 0.7), (1.1, 1.6)], 2.0).unwrap();
    let f = IntervalUnion::new(&[(0.5, 2.0)], TWO_PI).unwrap();
    let n_max = 3;
    let sys = HumSystem::new(e_t.clone(), f.clone(), DispersionSymbol::kdv(), n_max, 0.0).unwrap();
    let op = MassControlOperator::with_table_span(f, n_max, 4000).unwrap();
    let p = DispersionSymbol::kdv();
    let modes: Vec<i64> = (-(n_max as i64)..=n_max as i64).filter(|&k| k != 0).collect();
    for (row, &j) in modes.iter().enumerate() {
        for (col, &k) in modes.iter().enumerate() {
            let mut lsum = Complex64::ZERO;
            for l in -3500..=3500 {
                lsum += op.l_coeff(k, l) * op.l_coeff(j, l).conj();
            }
            let dp = (p.eval(k) - p.eval(j)) as f64;
            let mut t_int = Complex64::ZERO;
            for &(a, b) in e_t.intervals() {
                t_int += simpson(|t| Complex64::from_polar(1.0, dp * t), a, b, 2000);
            }
            let oracle = lsum * t_int;
            let gap = (sys.phi()[(row, col)] - oracle).norm();
            let tail = op.l_sum_tail_bound(k, j, 3500) * e_t.measure();
            assert!(gap <= tail + 1e-9, "Phi({j},{k}): gap {gap}, tail {tail}");
        }
    }
}

#[test]
fn mass_operator_norm_matches_grid_quadrature() {
    // ‖ℒ(e^{ix})‖² for F = [0,π) against per-interval Simpson quadrature of
    // the pointwise definition at 2^14 nodes
    let f = IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap();
    let op = MassControlOperator::new(f.clone(), 64).unwrap();
    let state = FourierState::delta(64, 1);
    let mut quad = 0.0;
    for &(a, b) in f.intervals() {
        let n = 1 << 14;
        let h = (b - a) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            // sample strictly inside the support to dodge the boundary
            let x = (a + i as f64 * h).clamp(a, b - 1e-12);
            acc += w * op.eval_pointwise(&state, x).norm_sqr();
        }
        quad += acc * h / 3.0;
    }
    let closed = (1.0 - 4.0 / (PI * PI)) / PI;
    assert!((quad - closed).abs() <= 1e-7, "quad {quad} vs closed {closed}");
    // and the truncated coefficient norm approaches it from below
    let table = op.apply(&state).l2_norm().powi(2);
    assert!(table <= closed + 1e-12);
    assert!(closed - table <= 1.5e-3, "truncation left {}", closed - table);
}

#[test]
fn translation_stability_scan_reports_positive_radius() {
    let g = SpaceTimeRegion::product(
        &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
        &IntervalUnion::full_torus(),
    );
    let freqs = FrequencySet::band(DispersionSymbol::kdv(), 3, 10);
    let delta0 = translation_delta0(&freqs, &g, 12);
    assert!(delta0.is_some());
    assert!(delta0.unwrap() > 0.0);
}

#[test]
fn forced_linear_flow_matches_integrator_on_small_data() {
    // cross-check: the algebraic endpoint v(T) = S(T)(v0 − Φψ) against the
    // time stepper with the nonlinearity suppressed by amplitude scaling
    let mut rng = SeededRng::new(77);
    let e_t = IntervalUnion::new(&[(0.0, 1.0), (1.5, 2.0)], 2.0).unwrap();
    let f = IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap();
    let n_max = 8;
    let sys = HumSystem::new(e_t, f, DispersionSymbol::kdv(), n_max, 0.0).unwrap();
    // amplitude ε: nonlinear contribution is O(ε²), endpoint checked at O(ε)
    let eps = 1e-6;
    let mut v0 = FourierState::zeros(n_max);
    let mut v1 = FourierState::zeros(n_max);
    for k in -(n_max as i64)..=(n_max as i64) {
        if k != 0 {
            v0.set_coeff(k, rng.complex_gaussian() * eps);
            v1.set_coeff(k, rng.complex_gaussian() * eps);
        }
    }
    let sol = sys.synthesize_control(&v0, &v1, 1e-12).unwrap();
    let integ = toruslab::kdv::KdvIntegrator::new(n_max, DispersionSymbol::kdv(), 0.0);
    let traj = integ
        .integrate(
            &v0,
            &toruslab::kdv::ForcingSource::Hum { sys: &sys, psi: &sol.psi },
            2.0,
            1e-3,
        )
        .unwrap();
    let err = traj.final_state().l2_distance(&v1);
    assert!(err <= 1e-4 * eps, "relative endpoint gap {}", err / eps);
}
