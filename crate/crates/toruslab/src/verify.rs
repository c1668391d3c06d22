//! The identity-verification battery behind the `verify` workflow: one
//! deterministic, seeded pass over every module's checkable identities.
//!
//! Each check reports the measured value against its bound; the battery is
//! the quick answer to "is this build numerically sane" and doubles as the
//! reproducibility fixture (fixed seed ⇒ byte-identical JSON).

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::damping::{
    energy_identity_gap, resolvent_ratio, solve_damped, DampingField, SpatialProfile,
};
use crate::hum::{HumSystem, SpaceTimeMode};
use crate::kdv::{picard_control, ForcingSource, KdvIntegrator};
use crate::mass_op::MassControlOperator;
use crate::observability::{
    augmented_sweep, count_coincidences, gram_matrix, highfreq_threshold, l4_bound_constant,
    strichartz_l4_ratio, theta_bound, FrequencySet,
};
use crate::region::{IntervalUnion, SpaceTimeRegion};
use crate::rng::SeededRng;
use crate::spectral::{evolve_free, DispersionSymbol, FourierState, GridTransform};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity (a gap, ratio or extreme value).
    pub value: f64,
    /// The bound it was held against.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_max: usize,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

fn random_state(rng: &mut SeededRng, n_max: usize) -> FourierState {
    let mut s = FourierState::zeros(n_max);
    for k in -(n_max as i64)..=(n_max as i64) {
        s.set_coeff(k, rng.complex_gaussian());
    }
    s
}

fn random_zero_mean(rng: &mut SeededRng, n_max: usize) -> FourierState {
    random_state(rng, n_max).project_zero_mean()
}

fn random_intervals(rng: &mut SeededRng, period: f64, max_pieces: usize) -> IntervalUnion {
    loop {
        let n = rng.int_range(1, max_pieces as i64) as usize;
        let mut endpoints: Vec<f64> = (0..2 * n).map(|_| rng.range(0.0, period)).collect();
        endpoints.sort_by(f64::total_cmp);
        let pairs: Vec<(f64, f64)> = endpoints.chunks(2).map(|c| (c[0], c[1])).collect();
        if pairs.iter().all(|&(a, b)| b - a > 1e-3) {
            return IntervalUnion::new(&pairs, period).unwrap();
        }
    }
}

/// Run the whole battery with the given seed and truncation.
pub fn run_verify(seed: u64, n_max: usize) -> VerifyReport {
    let mut rng = SeededRng::new(seed);
    let mut checks = Vec::new();
    let mut push = |name: &'static str, value: f64, bound: f64| {
        checks.push(Check { name, passed: value <= bound, value, bound });
    };
    let p = DispersionSymbol::kdv();

    // --- spectral core ---
    {
        let s = random_state(&mut rng, n_max);
        let t = rng.range(-3.0, 3.0);
        let evolved = evolve_free(&s, &p, t);
        push(
            "evolve_norm_preservation",
            (evolved.l2_norm() - s.l2_norm()).abs() / s.l2_norm(),
            1e-12,
        );
        // dyadic times keep t1 + t2 exact at any truncation
        let (t1, t2) = (
            rng.int_range(-32, 32) as f64 / 16.0,
            rng.int_range(-32, 32) as f64 / 16.0,
        );
        let once = evolve_free(&s, &p, t1 + t2);
        let twice = evolve_free(&evolve_free(&s, &p, t1), &p, t2);
        push("evolve_group_property", once.l2_distance(&twice) / s.l2_norm(), 1e-12);
        let grid = GridTransform::new(4 * n_max);
        let back = grid.from_grid(&grid.to_grid(&s).unwrap(), n_max).unwrap();
        push("grid_round_trip", back.l2_distance(&s) / s.l2_norm(), 1e-13);
    }

    // --- regions ---
    {
        let time = random_intervals(&mut rng, TWO_PI, 3);
        let space = random_intervals(&mut rng, TWO_PI, 3);
        let g = SpaceTimeRegion::product(&time, &space);
        let total = g.measure() / g.cell_volume();
        let n = 6;
        push(
            "region_plancherel",
            (g.ball_energy(n) + g.tail_energy(n) - total).abs(),
            1e-12,
        );
        let alpha = rng.int_range(-9, 9);
        push(
            "indicator_conjugate_symmetry",
            (time.indicator_fourier(alpha) - time.indicator_fourier(-alpha).conj()).norm(),
            1e-14,
        );
        let h = rng.range(0.0, 1.0);
        let shifted = time.translate(h);
        let additivity = (time.intersect(&shifted).measure()
            + time.set_difference(&shifted).measure()
            - time.measure())
        .abs();
        push("set_algebra_additivity", additivity, 1e-12);
    }

    // --- mass operator ---
    {
        let f = random_intervals(&mut rng, TWO_PI, 4);
        let op = MassControlOperator::new(f, n_max).unwrap();
        let cutoff = 2048;
        let k = rng.int_range(1, n_max as i64);
        let row = op.row_identity_check(k, cutoff);
        push("mass_op_row_identity", row.gap, row.tail_bound + 1e-10);
        let m = rng.int_range(-(n_max as i64), -1);
        let inner = op.inner_identity_check(k, m, cutoff);
        push("mass_op_inner_identity", inner.gap, inner.tail_bound + 1e-10);
        let s1 = random_state(&mut rng, n_max);
        let s2 = random_state(&mut rng, n_max);
        let adj = (op.apply(&s1).inner(&s2) - s1.inner(&op.apply(&s2))).norm();
        push("mass_op_self_adjoint", adj / (s1.l2_norm() * s2.l2_norm()), 1e-12);
        push("mass_op_zero_mean_output", op.apply(&s1).coeff(0).norm() / s1.l2_norm(), 1e-14);
        let delta = op.coercivity_delta(1000).unwrap();
        let brute = op.coercivity_brute_force(1000);
        push("coercivity_matches_brute_force", (delta - brute).abs(), 1e-10);
    }

    // --- observability ---
    {
        let bound = theta_bound(&p) as usize;
        let mut worst = 0usize;
        for _ in 0..60 {
            let k1 = rng.int_range(-40, 40);
            let k2 = rng.int_range(-40, 40);
            if k1 == k2 {
                continue;
            }
            let alpha = (k1 - k2, p.eval(k1) - p.eval(k2));
            worst = worst.max(count_coincidences(&p, alpha, 60));
        }
        push("theta_bound_scan", worst as f64, bound as f64);

        let mut two = FourierState::zeros(2);
        two.set_coeff(0, Complex64::new(1.0, 0.0));
        two.set_coeff(1, Complex64::new(1.0, 0.0));
        let ratio = strichartz_l4_ratio(&two, &p, 16).unwrap();
        push(
            "l4_two_mode_closed_form",
            (ratio - (6.0 * PI * PI).powf(0.25)).abs(),
            1e-10,
        );
        let c_bound = l4_bound_constant(theta_bound(&p));
        let mut worst_ratio = 0.0f64;
        for _ in 0..20 {
            let mut s = FourierState::zeros(8);
            for _ in 0..8 {
                s.set_coeff(rng.int_range(-8, 8), rng.complex_gaussian());
            }
            if s.coeff_energy() > 0.0 {
                worst_ratio = worst_ratio.max(strichartz_l4_ratio(&s, &p, 64).unwrap());
            }
        }
        push("l4_constructive_bound", worst_ratio, c_bound);

        let g = SpaceTimeRegion::product(
            &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
            &IntervalUnion::full_torus(),
        );
        let n = highfreq_threshold(&g, &p).unwrap();
        let target = g.measure() / g.cell_volume() / 2.0;
        let c_d = theta_bound(&p) as f64;
        let holds = ((c_d * g.tail_energy(n)).sqrt() < target) as i32 as f64;
        let fails_below = if n == 0 {
            1.0
        } else {
            ((c_d * g.tail_energy(n - 1)).sqrt() >= target) as i32 as f64
        };
        push("threshold_definition_recheck", 2.0 - holds - fails_below, 0.0);

        let steps = augmented_sweep(&p, &g, n, 8).unwrap();
        let full = gram_matrix(&FrequencySet::full_band(p.clone(), 8), &g);
        push(
            "sweep_order_independence",
            (steps.last().unwrap().lambda_min - full.lambda_min).abs(),
            1e-10,
        );

        // the zero shift is the identity: λ_min on G ∩ (G − 0) equals λ_min on G
        let band = FrequencySet::band(p.clone(), n, 8);
        let base = gram_matrix(&band, &g).lambda_min;
        let scan = crate::observability::translation_stability(&band, &g, &[(0.0, 0.0)]);
        let shifted = scan.samples[0].lambda_min.unwrap_or(0.0);
        push("translation_zero_shift_identity", (shifted - base).abs() / base, 1e-12);
    }

    // --- HUM control ---
    let e_t = IntervalUnion::new(&[(0.0, 1.0), (1.5, 2.0)], 2.0).unwrap();
    let f = IntervalUnion::new(&[(0.0, PI), (4.0, 5.0)], TWO_PI).unwrap();
    {
        let sys = HumSystem::new(e_t.clone(), f.clone(), p.clone(), n_max, 0.0).unwrap();
        push("twisted_gram_positive", -sys.lambda_min_phi(), 0.0);
        let w0 = random_zero_mean(&mut rng, n_max);
        let v0 = random_zero_mean(&mut rng, n_max);
        let modes: Vec<SpaceTimeMode> = (0..5)
            .map(|_| SpaceTimeMode {
                k: rng.int_range(-(n_max as i64), n_max as i64),
                omega: rng.range(-20.0, 20.0),
                amp: rng.complex_gaussian(),
            })
            .collect();
        let gap = sys.duality_identity_gap(&modes, &w0, &v0);
        push("duality_identity", gap / w0.l2_norm().max(1.0), 1e-10);
        let v1 = random_zero_mean(&mut rng, n_max);
        let sol = sys.synthesize_control(&v0, &v1, 1e-10).unwrap();
        push("hum_endpoint_residual", sol.endpoint_residual, 1e-8);
    }

    // --- nonlinear KdV ---
    {
        let integ = KdvIntegrator::new(n_max, p.clone(), 0.0);
        let u0 = FourierState::sine(n_max, 1, 0.01);
        let traj = integ.integrate(&u0, &ForcingSource::None, 0.5, 1e-3).unwrap();
        push(
            "kdv_l2_conservation",
            (traj.final_state().l2_norm() - u0.l2_norm()).abs() / u0.l2_norm(),
            1e-10,
        );
        push("kdv_mass_conservation", traj.mass_drift(), 1e-12);
        let mut real_state = FourierState::zeros(n_max);
        for k in 1..=(n_max as i64) {
            let c = rng.complex_gaussian() * 0.05;
            real_state.set_coeff(k, c);
            real_state.set_coeff(-k, c.conj());
        }
        let q = integ.quadratic(&real_state);
        push(
            "kdv_skew_nonlinearity",
            real_state.inner(&q).norm() / real_state.l2_norm().powi(3).max(1e-300),
            1e-12,
        );
        let sys = HumSystem::new(e_t.clone(), f.clone(), p.clone(), n_max.min(16), 0.0).unwrap();
        let run = picard_control(
            &FourierState::sine(n_max.min(16), 1, 0.01),
            &FourierState::sine(n_max.min(16), 2, 0.01),
            &sys,
            1e-3,
            8,
            1e-6,
            1e-10,
        )
        .unwrap();
        push("picard_converged", if run.converged { 0.0 } else { 1.0 }, 0.0);
    }

    // --- damping ---
    {
        let field = DampingField::TimeIndependent {
            profile: SpatialProfile::Indicator {
                region: IntervalUnion::full_torus(),
                amplitude: 1.0,
            },
        };
        let u0 = random_state(&mut rng, n_max);
        let traj = solve_damped(&u0, &field, &p, 1.0, 1e-3).unwrap();
        push(
            "damping_uniform_exact",
            (traj.final_state().l2_norm() - (-1.0f64).exp() * u0.l2_norm()).abs()
                / u0.l2_norm(),
            1e-10,
        );
        let mut monotone = 0.0f64;
        for w in traj.states().windows(2) {
            monotone = monotone.max(w[1].l2_norm() - w[0].l2_norm());
        }
        push("damping_monotone_energy", monotone, 1e-14);
        push(
            "energy_identity_uniform",
            energy_identity_gap(&traj, &field, 0.0, 1.0).unwrap(),
            1e-8,
        );
        let r = resolvent_ratio(&p, Complex64::new(0.0, 1.0), &FourierState::delta(4, 0), 64)
            .unwrap();
        push("resolvent_constant_mode", (r - 1.0 / TWO_PI).abs(), 1e-12);

        let modes: Vec<SpaceTimeMode> = (0..4)
            .map(|_| SpaceTimeMode {
                k: rng.int_range(-8, 8),
                omega: rng.range(-15.0, 15.0),
                amp: rng.complex_gaussian(),
            })
            .collect();
        let ratio =
            crate::damping::duhamel_linfty_l2_ratio(&modes, &p, 1.0, 64).unwrap_or(f64::NAN);
        push(
            "duhamel_mixed_norm_finite",
            if ratio.is_finite() && ratio > 0.0 { 0.0 } else { 1.0 },
            0.0,
        );
    }

    let all_passed = checks.iter().all(|c| c.passed);
    VerifyReport { seed, n_max, all_passed, checks }
}
