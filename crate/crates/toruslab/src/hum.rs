//! Linear mass-conserved control by the Hilbert uniqueness method.
//!
//! The linearized equation `∂_t v + ∂_x³ v (+ c ∂_x v) = ℒ(h) 𝟙_{E_T×F}` is
//! steered between zero-mean states. With `S(t)` the free group and
//! `h = −ℒ(S(t)ψ)` the effective forcing is `−ℒ²(S(t)ψ) 𝟙_{E_T×F}`, and the
//! endpoint map reduces to the Hermitian positive operator
//!
//! `Φ = ∫_{E_T} S(−τ) ℒ² S(τ) dτ`,
//!
//! whose mode-basis matrix has the closed form
//! `Φ[j,k] = (1/|F|) L(k,j) ∫_{E_T} e^{i(p_c(k) − p_c(j)) τ} dτ`
//! (`ℒ² = (1/|F|) ℒ` since `ℒ` is `1/|F|` times an orthogonal projection).
//! Positivity of Φ is exactly the twisted observability inequality at this
//! truncation. Solving `Φψ = v₀ − S(−T)v₁` yields the control; the driven
//! endpoint is then `v(T) = S(T)(v₀ − Φψ)` by per-mode Duhamel integration,
//! so the endpoint residual is the linear-solve residual.
//!
//! Mean-M data are handled by subtracting the spatial mean and adding the
//! drift `c ∂_x`, which shifts the symbol to `p_c(k) = p(k) − c·k`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mass_op::MassControlOperator;
use crate::observability::GramReport;
use crate::region::IntervalUnion;
use crate::spectral::{DispersionSymbol, FourierState};

const TWO_PI: f64 = 2.0 * PI;

/// Tolerance on `|û(0)|/‖u‖` for accepting a state as zero-mean.
const ZERO_MEAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HumSystem {
    e_t: IntervalUnion,
    op: MassControlOperator,
    p: DispersionSymbol,
    drift: f64,
    n_max: usize,
    /// Zero-mean mode list `[-N..-1, 1..N]` indexing the Φ matrix.
    modes: Vec<i64>,
    phi: DMatrix<Complex64>,
    lambda_min_phi: f64,
    lambda_max_phi: f64,
}

/// Outcome of a control synthesis.
#[derive(Clone, Debug)]
pub struct ControlSolution {
    /// Adjoint datum `ψ = Φ⁻¹(v₀ − S(−T)v₁)`, zero-mean.
    pub psi: FourierState,
    /// `‖v(T) − v₁‖ / max(‖v₀‖, ‖v₁‖, 1e-14)`.
    pub endpoint_residual: f64,
    /// `‖h‖_{L²(E_T×𝕋)} = (2π ψ*Φψ)^{1/2}`.
    pub cost: f64,
    /// `cost / (‖v₀‖ + ‖v₁‖)` when the data are nonzero.
    pub cost_constant: Option<f64>,
    pub cg_iterations: usize,
}

/// One space-time forcing mode `amp · e^{i(ω t + k x)}`, the shape used by
/// the duality-identity checks.
#[derive(Clone, Copy, Debug)]
pub struct SpaceTimeMode {
    pub k: i64,
    pub omega: f64,
    pub amp: Complex64,
}

impl HumSystem {
    /// Build the system and assemble Φ. `e_t` lives on the cell
    /// `[0, T)` with `T = e_t.period()`; `f` on the torus.
    pub fn new(
        e_t: IntervalUnion,
        f: IntervalUnion,
        p: DispersionSymbol,
        n_max: usize,
        drift: f64,
    ) -> Result<Self> {
        if e_t.measure() <= 0.0 || f.measure() <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        let op = MassControlOperator::new(f, n_max)?;
        let n = n_max as i64;
        let modes: Vec<i64> = (-n..=n).filter(|&k| k != 0).collect();
        let dim = modes.len();
        let mut phi = DMatrix::from_element(dim, dim, Complex64::ZERO);
        let inv_f = 1.0 / op.measure_f();
        for (row, &j) in modes.iter().enumerate() {
            for (col, &k) in modes.iter().enumerate() {
                let t_int = e_t
                    .osc_integral(p.eval(k) - p.eval(j), -drift * (k - j) as f64);
                phi[(row, col)] = op.l_coeff(k, j) * t_int * inv_f;
            }
        }
        // enforce exact Hermitian symmetry before the eigensolve
        for row in 0..dim {
            for col in 0..row {
                let sym = 0.5 * (phi[(row, col)] + phi[(col, row)].conj());
                phi[(row, col)] = sym;
                phi[(col, row)] = sym.conj();
            }
            phi[(row, row)] = Complex64::new(phi[(row, row)].re, 0.0);
        }
        let eig = phi.clone().symmetric_eigen();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in eig.eigenvalues.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo <= 0.0 {
            return Err(Error::PhiNotPositive { lambda: lo });
        }
        Ok(Self { e_t, op, p, drift, n_max, modes, phi, lambda_min_phi: lo, lambda_max_phi: hi })
    }

    pub fn e_t(&self) -> &IntervalUnion {
        &self.e_t
    }

    pub fn mass_op(&self) -> &MassControlOperator {
        &self.op
    }

    pub fn symbol(&self) -> &DispersionSymbol {
        &self.p
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn t_horizon(&self) -> f64 {
        self.e_t.period()
    }

    pub fn phi(&self) -> &DMatrix<Complex64> {
        &self.phi
    }

    pub fn lambda_min_phi(&self) -> f64 {
        self.lambda_min_phi
    }

    pub fn condition_number(&self) -> f64 {
        self.lambda_max_phi / self.lambda_min_phi
    }

    /// The twisted Gram as a spectral report (`Φ` with its eigen summary).
    pub fn twisted_gram(&self) -> GramReport {
        let mut rep =
            GramReport::from_parts(self.phi.clone(), self.modes.clone(), self.e_t.measure());
        rep.theta = Some(crate::observability::theta_bound(&self.p));
        rep
    }

    /// Propagator phase of the drifted symbol, `e^{i p_c(k) t}`.
    pub fn propagator(&self, k: i64, t: f64) -> Complex64 {
        let base = self.p.propagator(k, t);
        if self.drift == 0.0 {
            base
        } else {
            base * Complex64::from_polar(1.0, -self.drift * k as f64 * t)
        }
    }

    /// Free flow of the drifted symbol applied to a state.
    pub fn evolve(&self, state: &FourierState, t: f64) -> FourierState {
        let mut out = state.clone();
        for (k, c) in state.iter() {
            if c != Complex64::ZERO {
                out.set_coeff(k, c * self.propagator(k, t));
            }
        }
        out
    }

    fn to_vector(&self, state: &FourierState) -> DVector<Complex64> {
        DVector::from_iterator(self.modes.len(), self.modes.iter().map(|&k| state.coeff(k)))
    }

    fn to_state(&self, v: &DVector<Complex64>) -> FourierState {
        let mut s = FourierState::zeros(self.n_max);
        for (i, &k) in self.modes.iter().enumerate() {
            s.set_coeff(k, v[i]);
        }
        s
    }

    /// `Φ` applied to a zero-mean state.
    pub fn apply_phi(&self, state: &FourierState) -> FourierState {
        self.to_state(&(&self.phi * self.to_vector(state)))
    }

    fn require_zero_mean(&self, state: &FourierState) -> Result<()> {
        let mean = state.mean().norm();
        if mean > ZERO_MEAN_TOL * state.l2_norm().max(1.0) {
            return Err(Error::NotZeroMean { mean_abs: mean });
        }
        Ok(())
    }

    /// Control `h(t, ·) = −ℒ(S(t)ψ)` masked by `𝟙_{E_T}(t)`.
    pub fn control_at(&self, psi: &FourierState, t: f64) -> FourierState {
        if !self.time_mask(t) {
            return FourierState::zeros(self.n_max);
        }
        self.op.apply(&self.evolve(psi, t)).scaled(Complex64::new(-1.0, 0.0))
    }

    /// Effective forcing `ℒ(h)𝟙 = −(1/|F|) ℒ(S(t)ψ)` at time `t`.
    pub fn forcing_at(&self, psi: &FourierState, t: f64) -> FourierState {
        if !self.time_mask(t) {
            return FourierState::zeros(self.n_max);
        }
        self.forcing_profile(psi, t)
    }

    /// The forcing profile `−(1/|F|) ℒ(S(t)ψ)` without the time mask; the
    /// integrator applies the mask once per step.
    pub fn forcing_profile(&self, psi: &FourierState, t: f64) -> FourierState {
        let scale = Complex64::new(-1.0 / self.op.measure_f(), 0.0);
        self.op.apply(&self.evolve(psi, t)).scaled(scale)
    }

    /// Time mask `𝟙_{E_T}(t)` without wrap-around (time is not periodic).
    pub fn time_mask(&self, t: f64) -> bool {
        self.e_t.intervals().iter().any(|&(a, b)| a <= t && t < b)
    }

    /// Solve `Φψ = v₀ − S(−T)v₁` and report the control data.
    ///
    /// The endpoint `v(T) = S(T)(v₀ − Φψ)` follows from exact per-mode
    /// Duhamel integration of the forcing, so the reported residual is
    /// `‖Φψ − rhs‖` scaled by the data size.
    pub fn synthesize_control(
        &self,
        v0: &FourierState,
        v1: &FourierState,
        tol: f64,
    ) -> Result<ControlSolution> {
        self.require_zero_mean(v0)?;
        self.require_zero_mean(v1)?;
        let t = self.t_horizon();
        let rhs_state = v0.sub(&self.evolve(v1, -t));
        let rhs = self.to_vector(&rhs_state);
        let (psi_vec, cg_iterations) = self.cg_solve(&rhs, tol)?;
        let psi = self.to_state(&psi_vec);

        let residual_vec = &self.phi * &psi_vec - &rhs;
        let endpoint_err = (TWO_PI * residual_vec.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        let scale = v0.l2_norm().max(v1.l2_norm()).max(1e-14);

        let quad = (psi_vec.adjoint() * (&self.phi * &psi_vec))[(0, 0)].re.max(0.0);
        let cost = (TWO_PI * quad).sqrt();
        let data = v0.l2_norm() + v1.l2_norm();
        Ok(ControlSolution {
            psi,
            endpoint_residual: endpoint_err / scale,
            cost,
            cost_constant: (data > 0.0).then(|| cost / data),
            cg_iterations,
        })
    }

    /// Endpoint of the driven linear flow for a synthesized control:
    /// `v(T) = S(T)(v₀ − Φψ)`.
    pub fn linear_endpoint(&self, v0: &FourierState, psi: &FourierState) -> FourierState {
        let inner = v0.sub(&self.apply_phi(psi));
        self.evolve(&inner, self.t_horizon())
    }

    /// Conjugate-gradient solve of the Hermitian positive system `Φx = b`.
    fn cg_solve(&self, b: &DVector<Complex64>, tol: f64) -> Result<(DVector<Complex64>, usize)> {
        let n = b.len();
        let b_norm = b.norm();
        if b_norm == 0.0 {
            return Ok((DVector::from_element(n, Complex64::ZERO), 0));
        }
        let mut x = DVector::from_element(n, Complex64::ZERO);
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rs_old: f64 = r.iter().map(|c| c.norm_sqr()).sum();
        let max_iter = 20 * n + 100;
        for iter in 0..max_iter {
            if rs_old.sqrt() <= tol * b_norm {
                return Ok((x, iter));
            }
            let ap = &self.phi * &p;
            let p_ap = (p.adjoint() * &ap)[(0, 0)].re;
            if p_ap <= 0.0 {
                return Err(Error::PhiNotPositive { lambda: p_ap });
            }
            let alpha = Complex64::new(rs_old / p_ap, 0.0);
            x += p.map(|v| v * alpha);
            r -= ap.map(|v| v * alpha);
            let rs_new: f64 = r.iter().map(|c| c.norm_sqr()).sum();
            let beta = Complex64::new(rs_new / rs_old, 0.0);
            p = &r + p.map(|v| v * beta);
            rs_old = rs_new;
        }
        Err(Error::SolveStagnation {
            residual: rs_old.sqrt() / b_norm,
            condition: self.condition_number(),
        })
    }

    /// Gap in the duality identity
    /// `⟨ℒ²(h)𝟙_{E_T×F}, S(t)w₀⟩_{L²([0,T]×𝕋)} = ⟨v(T), S(T)w₀⟩ − ⟨v₀, w₀⟩`
    /// for a forcing given as a finite sum of space-time modes, with `v`
    /// integrated by exact per-mode Duhamel from `v(0) = v₀`.
    pub fn duality_identity_gap(
        &self,
        h_modes: &[SpaceTimeMode],
        w0: &FourierState,
        v0: &FourierState,
    ) -> f64 {
        let inv_f = 1.0 / self.op.measure_f();
        let n = self.n_max as i64;
        let t = self.t_horizon();

        // all closed-form time integrals ∫_{E_T} e^{i(ω − p_c(j))τ} dτ
        let mut lhs = Complex64::ZERO;
        let mut v_t = self.evolve(v0, t);
        for j in -n..=n {
            let pj = self.p.eval(j);
            let mut forced = Complex64::ZERO;
            for m in h_modes {
                let l_kj = self.op.l_coeff(m.k, j);
                if l_kj == Complex64::ZERO {
                    continue;
                }
                let t_int =
                    self.e_t.osc_integral(-pj, m.omega + self.drift * j as f64);
                forced += l_kj * m.amp * t_int;
            }
            forced *= inv_f;
            // LHS accumulates ⟨ℒ²h 𝟙, S(τ)w₀⟩: the j-th coefficient of
            // ℒ²h(τ) against conj(e^{i p_c(j) τ} ŵ₀(j))
            lhs += forced * w0.coeff(j).conj() * TWO_PI;
            // Duhamel: v̂(T,j) += e^{i p_c(j) T} · forced
            let add = self.propagator(j, t) * forced;
            v_t.set_coeff(j, v_t.coeff(j) + add);
        }
        let s_t_w0 = self.evolve(w0, t);
        let rhs = v_t.inner(&s_t_w0) - v0.inner(w0);
        (lhs - rhs).norm()
    }
}
