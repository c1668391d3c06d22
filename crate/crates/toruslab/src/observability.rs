//! Observability diagnostics on space-time regions.
//!
//! For a finite frequency set `Λ = {λ_k = (k, p(k))}` and a region `G`, the
//! quadratic form `∬_G |Σ a_k e^{iλ_k·z}|² dz = a* M a` is carried by the
//! Hermitian Gram matrix `M[i][j] = ∬_G e^{i(λ_i−λ_j)·z} dz`, assembled here
//! in closed form. Its smallest eigenvalue turns the qualitative statement
//! "an observability constant exists" into a concrete number at each
//! truncation: `Σ|a_k|² ≤ (1/λ_min) ∬_G |…|²`.
//!
//! The module also provides the supporting quantities used to certify the
//! high-frequency band: the lattice coincidence count Θ, the L⁴ and
//! L∞ₓL²ₜ Strichartz ratios, the indicator tail threshold, translation
//! stability of λ_min, and the augmented low-frequency sweep.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phase::oscillatory_integral;
use crate::region::SpaceTimeRegion;
use crate::spectral::{DispersionSymbol, FourierState};

const TWO_PI: f64 = 2.0 * PI;

/// Smallest eigenvalue (relative to the largest) below which a Gram matrix
/// is treated as numerically singular and the constant reported unavailable.
pub const EIGEN_TOL: f64 = 1e-12;

/// A finite set of lattice points `λ_k = (k, p(k))`, each `k` at most once.
#[derive(Clone, Debug)]
pub struct FrequencySet {
    symbol: DispersionSymbol,
    ks: Vec<i64>,
    points: Vec<(i64, i128)>,
}

impl FrequencySet {
    pub fn new(symbol: DispersionSymbol) -> Self {
        Self { symbol, ks: Vec::new(), points: Vec::new() }
    }

    /// Band `{(k, p(k)) : lo < |k| ≤ hi}`.
    pub fn band(symbol: DispersionSymbol, lo_exclusive: i64, hi_inclusive: i64) -> Self {
        let mut set = Self::new(symbol);
        for k in -hi_inclusive..=hi_inclusive {
            if k.abs() > lo_exclusive {
                set.insert(k).expect("band frequencies are distinct");
            }
        }
        set
    }

    /// All modes `|k| ≤ n_max`, including `k = 0`.
    pub fn full_band(symbol: DispersionSymbol, n_max: i64) -> Self {
        Self::band(symbol, -1, n_max)
    }

    pub fn from_ks(symbol: DispersionSymbol, ks: &[i64]) -> Result<Self> {
        let mut set = Self::new(symbol);
        for &k in ks {
            set.insert(k)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, k: i64) -> Result<()> {
        if self.ks.contains(&k) {
            return Err(Error::DuplicateFrequency { k });
        }
        self.ks.push(k);
        self.points.push(self.symbol.lattice_point(k));
        Ok(())
    }

    pub fn symbol(&self) -> &DispersionSymbol {
        &self.symbol
    }

    pub fn ks(&self) -> &[i64] {
        &self.ks
    }

    pub fn points(&self) -> &[(i64, i128)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gram matrix of a frequency set over a region, with its spectral summary.
#[derive(Clone, Debug)]
pub struct GramReport {
    pub gram: DMatrix<Complex64>,
    pub ks: Vec<i64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `1/λ_min`, or `None` when `λ_min` is at eigensolver tolerance.
    pub observability_constant: Option<f64>,
    pub condition_number: Option<f64>,
    pub region_measure: f64,
    pub n_threshold: Option<i64>,
    pub theta: Option<u32>,
    pub tail_energy: Option<f64>,
}

impl GramReport {
    pub(crate) fn from_parts(
        gram: DMatrix<Complex64>,
        ks: Vec<i64>,
        region_measure: f64,
    ) -> Self {
        Self::from_gram(gram, ks, region_measure)
    }

    fn from_gram(gram: DMatrix<Complex64>, ks: Vec<i64>, region_measure: f64) -> Self {
        let dim = gram.nrows();
        let (lambda_min, lambda_max) = if dim == 0 {
            (0.0, 0.0)
        } else {
            let eig = gram.clone().symmetric_eigen();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &v in eig.eigenvalues.iter() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        };
        let available = lambda_min > EIGEN_TOL * lambda_max.max(1e-300) && lambda_min > 0.0;
        GramReport {
            gram,
            ks,
            lambda_min,
            lambda_max,
            observability_constant: available.then(|| 1.0 / lambda_min),
            condition_number: available.then(|| lambda_max / lambda_min),
            region_measure,
            n_threshold: None,
            theta: None,
            tail_energy: None,
        }
    }
}

/// Number of integer pairs `(k₁, k₂)` in `[-k_box, k_box]²` with
/// `λ_{k₁} − λ_{k₂} = α`, by exhaustive scan.
pub fn count_coincidences(p: &DispersionSymbol, alpha: (i64, i128), k_box: i64) -> usize {
    let mut count = 0;
    for k1 in -k_box..=k_box {
        let p1 = p.eval(k1);
        for k2 in -k_box..=k_box {
            if k1 - k2 == alpha.0 && p1 - p.eval(k2) == alpha.1 {
                count += 1;
            }
        }
    }
    count
}

/// The proof-side bound on Θ: a monic degree-`d` symbol admits at most
/// `d − 1` coincidences for any `α ≠ 0`.
pub fn theta_bound(p: &DispersionSymbol) -> u32 {
    (p.degree() - 1) as u32
}

/// Constructive L⁴ bound constant: `‖f‖²_{L⁴(𝕋²)} ≤ 2π(1 + √Θ) Σ|a_k|²`.
///
/// Plancherel on 𝕋² gives `‖f f̄‖²_{L²} = 4π² Σ_β |c_β|²` with
/// `c_β = Σ_{λ_{k₁}−λ_{k₂}=β} a_{k₁} ā_{k₂}`; the constant term contributes
/// `2π Σ|a_k|²` and Cauchy–Schwarz with at most Θ pairs per β bounds the
/// rest by `2π √Θ Σ|a_k|²`.
pub fn l4_bound_constant(theta: u32) -> f64 {
    (TWO_PI * (1.0 + (theta as f64).sqrt())).sqrt()
}

/// `‖Σ a_k e^{i(kx + p(k)t)}‖_{L⁴(𝕋²)} / (Σ|a_k|²)^{1/2}`, integrated
/// exactly through the mode-pair expansion.
///
/// `grid_n` is the resolution contract for sampled evaluation of `|f|⁴`:
/// resolutions below `4 n_max + 1` would alias and are rejected.
pub fn strichartz_l4_ratio(
    state: &FourierState,
    p: &DispersionSymbol,
    grid_n: usize,
) -> Result<f64> {
    let need = 4 * state.n_max() + 1;
    if grid_n < need {
        return Err(Error::Aliasing { got: grid_n, need, n_max: state.n_max() });
    }
    let energy = state.coeff_energy();
    if energy == 0.0 {
        return Err(Error::ZeroState { context: "L4 ratio" });
    }
    let modes: Vec<(i64, i128, Complex64)> = state
        .iter()
        .filter(|(_, c)| *c != Complex64::ZERO)
        .map(|(k, c)| (k, p.eval(k), c))
        .collect();
    let mut pair_sums: BTreeMap<(i64, i128), Complex64> = BTreeMap::new();
    for &(k1, p1, c1) in &modes {
        for &(k2, p2, c2) in &modes {
            *pair_sums.entry((k1 - k2, p1 - p2)).or_insert(Complex64::ZERO) += c1 * c2.conj();
        }
    }
    let sum_sq: f64 = pair_sums.values().map(|c| c.norm_sqr()).sum();
    let l4 = (4.0 * PI * PI * sum_sq).powf(0.25);
    Ok(l4 / energy.sqrt())
}

/// `sup_x (∫_0^T |e^{itP(D)}u₀|²(x) dt)^{1/2} / ‖u₀‖_{L²}` with the time
/// integral exact per mode pair and the sup taken over `grid_n` samples.
pub fn linfty_l2_ratio(
    state: &FourierState,
    p: &DispersionSymbol,
    t_horizon: f64,
    grid_n: usize,
) -> Result<f64> {
    let need = 2 * state.n_max() + 1;
    if grid_n < need {
        return Err(Error::Aliasing { got: grid_n, need, n_max: state.n_max() });
    }
    let norm = state.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroState { context: "Linfty-L2 ratio" });
    }
    let modes: Vec<(i64, i128, Complex64)> = state
        .iter()
        .filter(|(_, c)| *c != Complex64::ZERO)
        .map(|(k, c)| (k, p.eval(k), c))
        .collect();
    // time integrals ∫_0^T e^{i(p(k)−p(l))t} dt
    let m = modes.len();
    let mut time_int = vec![Complex64::ZERO; m * m];
    for (i, &(_, pi, _)) in modes.iter().enumerate() {
        for (j, &(_, pj, _)) in modes.iter().enumerate() {
            time_int[i * m + j] = oscillatory_integral(pi - pj, 0.0, 0.0, t_horizon);
        }
    }
    let mut sup = 0.0f64;
    for g in 0..grid_n {
        let x = TWO_PI * g as f64 / grid_n as f64;
        let mut acc = Complex64::ZERO;
        for (i, &(ki, _, ci)) in modes.iter().enumerate() {
            for (j, &(kj, _, cj)) in modes.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, (ki - kj) as f64 * x);
                acc += ci * cj.conj() * phase * time_int[i * m + j];
            }
        }
        sup = sup.max(acc.re.max(0.0));
    }
    Ok(sup.sqrt() / norm)
}

/// Smallest `N` such that `(d−1)^{1/2} · tail_energy(G, N)^{1/2}` is below
/// half the normalized measure `|G| / (2π · t_period)`, found by doubling
/// then bisection. This is the cutoff above which the band Gram is
/// diagonally dominant enough for the `|G|/2` lower bound.
pub fn highfreq_threshold(g: &SpaceTimeRegion, p: &DispersionSymbol) -> Result<i64> {
    const CAP: i64 = 1 << 13;
    if g.measure() <= 0.0 {
        return Err(Error::EmptyRegion);
    }
    let c_d = theta_bound(p) as f64;
    let target = g.measure() / g.cell_volume() / 2.0;
    let ok = |n: i64| (c_d * g.tail_energy(n)).sqrt() < target;
    if ok(0) {
        return Ok(0);
    }
    let mut hi = 1i64;
    while !ok(hi) {
        hi *= 2;
        if hi > CAP {
            return Err(Error::ThresholdSearchFailed { cap: CAP });
        }
    }
    let mut lo = hi / 2; // ok(lo) is false
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Assemble the Hermitian Gram matrix of `freqs` over `G` in closed form.
pub fn gram_matrix(freqs: &FrequencySet, g: &SpaceTimeRegion) -> GramReport {
    let pts = freqs.points();
    let n = pts.len();
    let mut gram = DMatrix::from_element(n, n, Complex64::ZERO);
    for i in 0..n {
        gram[(i, i)] = Complex64::new(g.measure(), 0.0);
        for j in 0..i {
            let dk = pts[i].0 - pts[j].0;
            let dp = pts[i].1 - pts[j].1;
            let v = g.osc_integral(dp, 0.0, dk);
            gram[(i, j)] = v;
            gram[(j, i)] = v.conj();
        }
    }
    GramReport::from_gram(gram, freqs.ks().to_vec(), g.measure())
}

/// Full certificate for a band: threshold `N`, Θ bound, tail energy at `N`,
/// and the Gram on `{N < |k| ≤ n_max}`.
pub fn band_certificate(
    g: &SpaceTimeRegion,
    p: &DispersionSymbol,
    n_max: i64,
) -> Result<GramReport> {
    let n = highfreq_threshold(g, p)?;
    let freqs = FrequencySet::band(p.clone(), n, n_max.max(n));
    let mut report = gram_matrix(&freqs, g);
    report.n_threshold = Some(n);
    report.theta = Some(theta_bound(p));
    report.tail_energy = Some(g.tail_energy(n));
    Ok(report)
}

/// λ_min of the Gram on `G ∩ (G + h)` for each listed shift.
#[derive(Clone, Debug)]
pub struct TranslationScan {
    pub samples: Vec<TranslationSample>,
    /// Smallest λ_min over the scan and the shift attaining it, when any
    /// intersection kept positive measure.
    pub worst: Option<TranslationSample>,
}

#[derive(Clone, Copy, Debug)]
pub struct TranslationSample {
    pub h: (f64, f64),
    /// `None` when the intersection is empty or numerically singular.
    pub lambda_min: Option<f64>,
}

pub fn translation_stability(
    freqs: &FrequencySet,
    g: &SpaceTimeRegion,
    shifts: &[(f64, f64)],
) -> TranslationScan {
    let mut samples = Vec::with_capacity(shifts.len());
    for &(ht, hx) in shifts {
        let inter = g.intersect(&g.translate(ht, hx));
        let lambda_min = if inter.is_empty() {
            None
        } else {
            let rep = gram_matrix(freqs, &inter);
            rep.observability_constant.map(|_| rep.lambda_min)
        };
        samples.push(TranslationSample { h: (ht, hx), lambda_min });
    }
    let worst = samples
        .iter()
        .filter(|s| s.lambda_min.is_some())
        .min_by(|a, b| a.lambda_min.unwrap().total_cmp(&b.lambda_min.unwrap()))
        .copied();
    TranslationScan { samples, worst }
}

/// Geometric shift scan `h_j = 2^{-j} · cell`, `j = 1..=j_max`: returns the
/// largest shift magnitude `δ₀` below which λ_min stays at or above half its
/// `h = 0` value (the stability radius the translation lemma asserts).
pub fn translation_delta0(
    freqs: &FrequencySet,
    g: &SpaceTimeRegion,
    j_max: u32,
) -> Option<f64> {
    let base = gram_matrix(freqs, g).lambda_min;
    let mut delta = None;
    for j in (1..=j_max).rev() {
        let scale = 2f64.powi(-(j as i32));
        let h = (g.t_period() * scale, TWO_PI * scale);
        let inter = g.intersect(&g.translate(h.0, h.1));
        let ok = !inter.is_empty() && gram_matrix(freqs, &inter).lambda_min >= 0.5 * base;
        if ok {
            delta = Some((h.0 * h.0 + h.1 * h.1).sqrt());
        } else {
            break;
        }
    }
    delta
}

/// One step of the augmented low-frequency sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepStep {
    /// `None` for the initial high-frequency band.
    pub added_k: Option<i64>,
    pub dim: usize,
    pub lambda_min: f64,
    pub constant: Option<f64>,
}

/// Starting from the band `{N < |k| ≤ n_max}`, add the low-frequency points
/// `k₀ = 0, ±1, …, ±N` one at a time, recording λ_min after each insertion.
/// The Gram is grown by bordering, so the final step covers the full band
/// `|k| ≤ n_max`.
pub fn augmented_sweep(
    p: &DispersionSymbol,
    g: &SpaceTimeRegion,
    n_threshold: i64,
    n_max: i64,
) -> Result<Vec<SweepStep>> {
    assert!(n_max >= n_threshold);
    let mut freqs = FrequencySet::band(p.clone(), n_threshold, n_max);
    let mut gram = gram_matrix(&freqs, g).gram;
    let mut steps = Vec::new();
    let record = |gram: &DMatrix<Complex64>, ks: &[i64], added: Option<i64>| {
        let rep = GramReport::from_gram(gram.clone(), ks.to_vec(), g.measure());
        SweepStep {
            added_k: added,
            dim: gram.nrows(),
            lambda_min: rep.lambda_min,
            constant: rep.observability_constant,
        }
    };
    steps.push(record(&gram, freqs.ks(), None));
    let mut order = vec![0i64];
    for k in 1..=n_threshold {
        order.push(k);
        order.push(-k);
    }
    for k0 in order {
        freqs.insert(k0)?;
        let pts = freqs.points();
        let n = pts.len();
        let new = pts[n - 1];
        let mut grown = DMatrix::from_element(n, n, Complex64::ZERO);
        grown.view_mut((0, 0), (n - 1, n - 1)).copy_from(&gram);
        grown[(n - 1, n - 1)] = Complex64::new(g.measure(), 0.0);
        for j in 0..n - 1 {
            let v = g.osc_integral(new.1 - pts[j].1, 0.0, new.0 - pts[j].0);
            grown[(n - 1, j)] = v;
            grown[(j, n - 1)] = v.conj();
        }
        gram = grown;
        steps.push(record(&gram, freqs.ks(), Some(k0)));
    }
    Ok(steps)
}

/// Nonnegative weight sampled at the midpoints of a uniform tensor grid of
/// cells over `[0, t_period) × [0, 2π)`. Integrals against the weight are
/// piecewise-constant in the weight and exact per cell in the oscillation.
#[derive(Clone, Debug)]
pub struct WeightGrid {
    values: Vec<f64>,
    nt: usize,
    nx: usize,
    t_period: f64,
}

impl WeightGrid {
    pub fn sample(
        nt: usize,
        nx: usize,
        t_period: f64,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nt * nx);
        let dt = t_period / nt as f64;
        let dx = TWO_PI / nx as f64;
        let mut min_val = f64::INFINITY;
        for i in 0..nt {
            for j in 0..nx {
                let v = f((i as f64 + 0.5) * dt, (j as f64 + 0.5) * dx);
                min_val = min_val.min(v);
                values.push(v);
            }
        }
        if min_val < 0.0 {
            return Err(Error::NegativeDamping { min_value: min_val });
        }
        Ok(Self { values, nt, nx, t_period })
    }

    pub fn from_region_indicator(nt: usize, nx: usize, g: &SpaceTimeRegion) -> Self {
        Self::sample(nt, nx, g.t_period(), |t, x| if g.contains(t, x) { 1.0 } else { 0.0 })
            .expect("indicator is nonnegative")
    }
}

/// Gram of `freqs` against the weight `|a|²`: entries
/// `∬ a(t,x)² e^{i(λ−μ)·z} dz`, cellwise exact in the oscillation.
pub fn weighted_observability(weight: &WeightGrid, freqs: &FrequencySet) -> GramReport {
    let pts = freqs.points();
    let n = pts.len();
    let nt = weight.nt;
    let nx = weight.nx;
    let dt = weight.t_period / nt as f64;
    let dx = TWO_PI / nx as f64;
    let mut weight_measure = 0.0;
    for v in &weight.values {
        weight_measure += v * v * dt * dx;
    }
    let mut gram = DMatrix::from_element(n, n, Complex64::ZERO);
    for i in 0..n {
        gram[(i, i)] = Complex64::new(weight_measure, 0.0);
        for j in 0..i {
            let dpk = pts[i].1 - pts[j].1;
            let dk = pts[i].0 - pts[j].0;
            let t_ints: Vec<Complex64> = (0..nt)
                .map(|it| {
                    oscillatory_integral(dpk, 0.0, it as f64 * dt, (it + 1) as f64 * dt)
                })
                .collect();
            let x_ints: Vec<Complex64> = (0..nx)
                .map(|ix| {
                    oscillatory_integral(dk as i128, 0.0, ix as f64 * dx, (ix + 1) as f64 * dx)
                })
                .collect();
            let mut acc = Complex64::ZERO;
            for (it, t_val) in t_ints.iter().enumerate() {
                let mut row = Complex64::ZERO;
                for (ix, x_val) in x_ints.iter().enumerate() {
                    let a = weight.values[it * nx + ix];
                    row += a * a * x_val;
                }
                acc += t_val * row;
            }
            gram[(i, j)] = acc;
            gram[(j, i)] = acc.conj();
        }
    }
    GramReport::from_gram(gram, freqs.ks().to_vec(), weight_measure)
}
