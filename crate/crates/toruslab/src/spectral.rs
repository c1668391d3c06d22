//! Truncated Fourier representation of torus functions and the free
//! dispersive flow.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * coefficients are `û(k) = (1/2π) ∫_𝕋 u(x) e^{-ikx} dx`, so that
//!   `u(x) = Σ_k û(k) e^{ikx}` and `‖u‖²_{L²} = 2π Σ_k |û(k)|²`;
//! * the free flow of a symbol `p` multiplies `û(k)` by `e^{i p(k) t}`;
//! * states are truncated symmetrically to `|k| ≤ n_max`, and coefficients
//!   outside the band read as exact zeros.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::phase::{phase_mod_2pi, unit_phase};

/// Complex coefficient vector on the symmetric band `k ∈ [-n_max, n_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierState {
    n_max: usize,
    coeffs: Vec<Complex64>,
}

impl FourierState {
    /// The zero state at truncation `n_max`.
    pub fn zeros(n_max: usize) -> Self {
        Self { n_max, coeffs: vec![Complex64::ZERO; 2 * n_max + 1] }
    }

    /// State with a single unit coefficient at frequency `k`.
    pub fn delta(n_max: usize, k: i64) -> Self {
        let mut s = Self::zeros(n_max);
        s.set_coeff(k, Complex64::new(1.0, 0.0));
        s
    }

    /// `a · sin(kx)` as a state: coefficients `∓ i a/2` at `±k` (zero for k = 0).
    pub fn sine(n_max: usize, k: i64, amplitude: f64) -> Self {
        let mut s = Self::zeros(n_max);
        if k != 0 {
            s.set_coeff(k, Complex64::new(0.0, -amplitude / 2.0));
            s.set_coeff(-k, Complex64::new(0.0, amplitude / 2.0));
        }
        s
    }

    /// `a · cos(kx)` as a state: coefficients `a/2` at `±k` (the constant `a`
    /// for k = 0).
    pub fn cosine(n_max: usize, k: i64, amplitude: f64) -> Self {
        let mut s = Self::zeros(n_max);
        if k == 0 {
            s.set_coeff(0, Complex64::new(amplitude, 0.0));
        } else {
            s.set_coeff(k, Complex64::new(amplitude / 2.0, 0.0));
            s.set_coeff(-k, Complex64::new(amplitude / 2.0, 0.0));
        }
        s
    }

    pub fn from_coeffs(n_max: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), 2 * n_max + 1, "coefficient vector length mismatch");
        Self { n_max, coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficient at frequency `k`; exact zero outside the band.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let n = self.n_max as i64;
        if k < -n || k > n {
            Complex64::ZERO
        } else {
            self.coeffs[(k + n) as usize]
        }
    }

    /// Set the coefficient at `k`; panics outside the band.
    #[inline]
    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        let n = self.n_max as i64;
        assert!((-n..=n).contains(&k), "frequency {k} outside band |k| <= {n}");
        self.coeffs[(k + n) as usize] = value;
    }

    /// Iterate `(k, coefficient)` over the stored band.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n_max as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - n, c))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Spatial mean `⟨u⟩_𝕋 = û(0)`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(0)
    }

    pub fn is_zero_mean(&self, tol: f64) -> bool {
        self.mean().norm() <= tol
    }

    /// Copy with the `k = 0` coefficient set to exact zero.
    pub fn project_zero_mean(&self) -> Self {
        let mut s = self.clone();
        s.set_coeff(0, Complex64::ZERO);
        s
    }

    /// Copy truncated or padded to a new band.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut s = Self::zeros(n_max);
        let n = n_max.min(self.n_max) as i64;
        for k in -n..=n {
            s.set_coeff(k, self.coeff(k));
        }
        s
    }

    /// `‖u‖_{L²(𝕋)} = sqrt(2π Σ_k |û(k)|²)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (2.0 * std::f64::consts::PI * sum).sqrt()
    }

    /// `Σ_k |û(k)|²` (the coefficient energy without the 2π factor).
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_distance(&self, other: &Self) -> f64 {
        let n = self.n_max.max(other.n_max) as i64;
        let sum: f64 = (-n..=n).map(|k| (self.coeff(k) - other.coeff(k)).norm_sqr()).sum();
        (2.0 * std::f64::consts::PI * sum).sqrt()
    }

    /// L² inner product `⟨u, v⟩ = 2π Σ_k û(k) conj(v̂(k))`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let n = self.n_max.max(other.n_max) as i64;
        let sum: Complex64 = (-n..=n).map(|k| self.coeff(k) * other.coeff(k).conj()).sum();
        sum * (2.0 * std::f64::consts::PI)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { n_max: self.n_max, coeffs: self.coeffs.iter().map(|c| c * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n_max = self.n_max.max(other.n_max);
        let n = n_max as i64;
        let coeffs = (-n..=n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        Self { n_max, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }
}

/// Monic integer-coefficient dispersion symbol `p(k)`, degree `d ≥ 2`.
///
/// `p(k)` is evaluated in exact integer arithmetic; the phase `e^{i p(k) t}`
/// is produced by extended-precision reduction so phase error stays flat in k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispersionSymbol {
    /// Ascending coefficients `c_0 + c_1 k + … + c_d k^d`, with `c_d = 1`.
    coeffs: Vec<i64>,
}

impl DispersionSymbol {
    pub fn new(coeffs: Vec<i64>) -> Self {
        assert!(coeffs.len() >= 3, "degree must be at least 2");
        assert_eq!(*coeffs.last().unwrap(), 1, "symbol must be monic");
        Self { coeffs }
    }

    /// Airy / KdV symbol `p(k) = k³`.
    pub fn kdv() -> Self {
        Self::new(vec![0, 0, 0, 1])
    }

    /// Schrödinger symbol `p(k) = k²`.
    pub fn schrodinger() -> Self {
        Self::new(vec![0, 0, 1])
    }

    /// `p(k) = k⁴ + k²`.
    pub fn quartic() -> Self {
        Self::new(vec![0, 0, 1, 0, 1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.coeffs
    }

    /// Exact integer evaluation by Horner's rule.
    pub fn eval(&self, k: i64) -> i128 {
        let k = k as i128;
        let mut acc: i128 = 0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * k + c as i128;
        }
        acc
    }

    /// The lattice point `λ_k = (k, p(k))`.
    pub fn lattice_point(&self, k: i64) -> (i64, i128) {
        (k, self.eval(k))
    }

    /// Phase `p(k) · t mod 2π`.
    pub fn phase(&self, k: i64, t: f64) -> f64 {
        phase_mod_2pi(self.eval(k), t)
    }

    /// `e^{i p(k) t}`.
    pub fn propagator(&self, k: i64, t: f64) -> Complex64 {
        unit_phase(self.eval(k), t)
    }
}

/// Free dispersive flow: multiply each coefficient by `e^{i p(k) t}`.
pub fn evolve_free(state: &FourierState, p: &DispersionSymbol, t: f64) -> FourierState {
    let mut out = state.clone();
    let n = state.n_max() as i64;
    for k in -n..=n {
        let c = state.coeff(k);
        if c != Complex64::ZERO {
            out.set_coeff(k, c * p.propagator(k, t));
        }
    }
    out
}

/// Cached FFT plans for moving between the coefficient band and an
/// equispaced grid `x_j = 2πj/n_points`.
pub struct GridTransform {
    n_points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl GridTransform {
    pub fn new(n_points: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n_points,
            forward: planner.plan_fft_forward(n_points),
            inverse: planner.plan_fft_inverse(n_points),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Values `u(x_j) = Σ_k û(k) e^{i k x_j}`. Errors if the grid cannot hold
    /// the band without aliasing.
    pub fn to_grid(&self, state: &FourierState) -> Result<Vec<Complex64>> {
        let need = 2 * state.n_max() + 1;
        if self.n_points < need {
            return Err(Error::Aliasing { got: self.n_points, need, n_max: state.n_max() });
        }
        let mut bins = vec![Complex64::ZERO; self.n_points];
        let m = self.n_points as i64;
        for (k, c) in state.iter() {
            if c != Complex64::ZERO {
                bins[(k.rem_euclid(m)) as usize] = c;
            }
        }
        self.inverse.process(&mut bins);
        Ok(bins)
    }

    /// Recover the coefficient band from grid values (inverse of `to_grid`
    /// for band-limited data).
    pub fn from_grid(&self, values: &[Complex64], n_max: usize) -> Result<FourierState> {
        assert_eq!(values.len(), self.n_points);
        let need = 2 * n_max + 1;
        if self.n_points < need {
            return Err(Error::Aliasing { got: self.n_points, need, n_max });
        }
        let mut bins = values.to_vec();
        self.forward.process(&mut bins);
        let m = self.n_points as i64;
        let scale = 1.0 / self.n_points as f64;
        let mut out = FourierState::zeros(n_max);
        for k in -(n_max as i64)..=(n_max as i64) {
            out.set_coeff(k, bins[(k.rem_euclid(m)) as usize] * scale);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use std::f64::consts::PI;

    fn random_state(rng: &mut SeededRng, n_max: usize) -> FourierState {
        let mut s = FourierState::zeros(n_max);
        for k in -(n_max as i64)..=(n_max as i64) {
            s.set_coeff(k, rng.complex_gaussian());
        }
        s
    }

    #[test]
    fn kdv_delta_half_turn() {
        // p(k)=k³, δ at k=1, t=π: coefficient e^{iπ} = −1
        let s = FourierState::delta(4, 1);
        let out = evolve_free(&s, &DispersionSymbol::kdv(), PI);
        assert!((out.coeff(1) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_time_is_identity() {
        let mut rng = SeededRng::new(1);
        let s = random_state(&mut rng, 8);
        let out = evolve_free(&s, &DispersionSymbol::kdv(), 0.0);
        assert_eq!(s, out);
    }

    #[test]
    fn schrodinger_quarter_phase() {
        // p(k)=k², δ at k=2, t=π/4 → e^{i 4 π/4} = e^{iπ} = −1
        let s = FourierState::delta(4, 2);
        let out = evolve_free(&s, &DispersionSymbol::schrodinger(), PI / 4.0);
        assert!((out.coeff(2) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn l2_norm_single_mode() {
        let s = FourierState::delta(5, 3);
        assert!((s.l2_norm() - (2.0 * PI).sqrt()).abs() < 1e-15);
        assert_eq!(FourierState::zeros(5).l2_norm(), 0.0);
        let mut two = FourierState::zeros(5);
        two.set_coeff(0, Complex64::new(1.0, 0.0));
        two.set_coeff(1, Complex64::new(1.0, 0.0));
        assert!((two.l2_norm() - (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn norm_preserved_by_flow() {
        let mut rng = SeededRng::new(2);
        for p in [DispersionSymbol::kdv(), DispersionSymbol::quartic()] {
            for _ in 0..20 {
                let s = random_state(&mut rng, 32);
                let t = rng.range(-5.0, 5.0);
                let out = evolve_free(&s, &p, t);
                assert!((out.l2_norm() - s.l2_norm()).abs() <= 1e-12 * s.l2_norm());
            }
        }
    }

    #[test]
    fn flow_group_property() {
        let mut rng = SeededRng::new(3);
        let p = DispersionSymbol::kdv();
        // dyadic times: t1 + t2 is exact, so this isolates the phase
        // arithmetic from input rounding
        for _ in 0..10 {
            let s = random_state(&mut rng, 24);
            let (t1, t2) = (
                rng.int_range(-48, 48) as f64 / 16.0,
                rng.int_range(-48, 48) as f64 / 16.0,
            );
            let once = evolve_free(&s, &p, t1 + t2);
            let twice = evolve_free(&evolve_free(&s, &p, t1), &p, t2);
            assert!(once.l2_distance(&twice) <= 1e-12 * s.l2_norm());
        }
        // generic times: the achievable agreement is bounded by the rounding
        // of t1 + t2 amplified by p(n_max)
        for _ in 0..10 {
            let s = random_state(&mut rng, 24);
            let (t1, t2) = (rng.range(-3.0, 3.0), rng.range(-3.0, 3.0));
            let once = evolve_free(&s, &p, t1 + t2);
            let twice = evolve_free(&evolve_free(&s, &p, t1), &p, t2);
            assert!(once.l2_distance(&twice) <= 2e-11 * s.l2_norm());
        }
    }

    #[test]
    fn zero_mean_preserved() {
        let mut rng = SeededRng::new(4);
        let s = random_state(&mut rng, 16).project_zero_mean();
        let out = evolve_free(&s, &DispersionSymbol::kdv(), 1.7);
        assert_eq!(out.coeff(0), Complex64::ZERO);
    }

    #[test]
    fn constant_mode_to_grid() {
        let g = GridTransform::new(8);
        let s = FourierState::delta(1, 0);
        let values = g.to_grid(&s).unwrap();
        for v in values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn first_mode_to_grid() {
        let g = GridTransform::new(8);
        let s = FourierState::delta(1, 1);
        let values = g.to_grid(&s).unwrap();
        for (j, v) in values.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 8.0;
            assert!((v - Complex64::from_polar(1.0, x)).norm() < 1e-13);
        }
    }

    #[test]
    fn grid_round_trip() {
        let mut rng = SeededRng::new(5);
        let s = random_state(&mut rng, 20);
        let g = GridTransform::new(64);
        let back = g.from_grid(&g.to_grid(&s).unwrap(), 20).unwrap();
        assert!(back.l2_distance(&s) <= 1e-13 * s.l2_norm());
    }

    #[test]
    fn grid_too_small_rejected() {
        let g = GridTransform::new(8);
        let s = FourierState::delta(10, 1);
        assert!(matches!(g.to_grid(&s), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn degenerate_wave_constructors() {
        // sin(0·x) = 0; cos(0·x) = 1 lands entirely on the mean mode
        assert_eq!(FourierState::sine(4, 0, 3.0).l2_norm(), 0.0);
        let c = FourierState::cosine(4, 0, 3.0);
        assert_eq!(c.coeff(0), Complex64::new(3.0, 0.0));
        assert!((c.l2_norm() - 3.0 * (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn symbol_exact_integers() {
        let p = DispersionSymbol::quartic();
        assert_eq!(p.eval(3), 81 + 9);
        assert_eq!(p.eval(-200), 200i128.pow(4) + 200 * 200);
        assert_eq!(p.degree(), 4);
    }
}
