//! The mass-conserving control shaping operator
//! `ℒ(h) = (1/|F|) 𝟙_F (h − ⟨h⟩_F)`.
//!
//! `ℒ` is linear, bounded and self-adjoint, maps into zero-mean functions
//! supported on `F`, and in the Fourier basis has the matrix
//! `L(k,l) = ĝ(l−k) − 2π ĝ(−k) ĝ(l)` with `g = 𝟙_F/|F|`. Three identities tie
//! the rows of `L` back to closed forms in `ĝ` and drive the verification
//! suite:
//!
//! * `2π Σ_l |L(k,l)|² = (1/|F|)(1 − 4π²|ĝ(k)|²)`,
//! * `2π Σ_l L(k,l) conj(L(m,l)) = (2π/|F|)(ĝ(m−k) − 2π conj(ĝ(k)) ĝ(m))`,
//! * `‖ℒ(e^{ikx})‖² ≥ δ(F) > 0` for `k ≠ 0` (coercivity).
//!
//! Truncated `l`-sums are always reported together with the analytic tail
//! bound obtained from `|ĝ(n)| ≤ m/(π|F||n|)`, so the identity checks stay
//! falsifiable.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::region::IntervalUnion;
use crate::spectral::FourierState;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Debug)]
pub struct MassControlOperator {
    f_region: IntervalUnion,
    measure_f: f64,
    n_intervals: usize,
    n_max: usize,
    span: i64,
    /// ĝ(m) for |m| ≤ span, index m + span.
    ghat: Vec<Complex64>,
}

/// Result of checking one of the row/inner-product identities.
#[derive(Clone, Copy, Debug)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
    /// Analytic bound on the part of the l-sum cut by truncation.
    pub tail_bound: f64,
}

impl MassControlOperator {
    /// Build the operator for `g = 𝟙_F/|F|` with tables sized for states
    /// truncated at `n_max`.
    pub fn new(f_region: IntervalUnion, n_max: usize) -> Result<Self> {
        Self::with_table_span(f_region, n_max, 4 * n_max as i64 + 8)
    }

    /// As `new`, with an explicit ĝ table span for identity checks whose
    /// l-sums run far beyond the state band.
    pub fn with_table_span(f_region: IntervalUnion, n_max: usize, span: i64) -> Result<Self> {
        let measure_f = f_region.measure();
        if measure_f <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        let span = span.max(4 * n_max as i64 + 8);
        let mut ghat = vec![Complex64::ZERO; (2 * span + 1) as usize];
        for m in 0..=span {
            let v = if m == 0 {
                // g has unit integral, so ĝ(0) = 1/2π exactly.
                Complex64::new(1.0 / TWO_PI, 0.0)
            } else {
                f_region.indicator_fourier(m) / measure_f
            };
            ghat[(m + span) as usize] = v;
            ghat[(-m + span) as usize] = v.conj();
        }
        Ok(Self {
            n_intervals: f_region.n_intervals(),
            f_region,
            measure_f,
            n_max,
            span,
            ghat,
        })
    }

    pub fn f_region(&self) -> &IntervalUnion {
        &self.f_region
    }

    pub fn measure_f(&self) -> f64 {
        self.measure_f
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// ĝ(m), table lookup inside the tabulated span, closed form beyond.
    pub fn ghat(&self, m: i64) -> Complex64 {
        if m == 0 {
            Complex64::new(1.0 / TWO_PI, 0.0)
        } else if m.abs() <= self.span {
            self.ghat[(m + self.span) as usize]
        } else {
            self.f_region.indicator_fourier(m) / self.measure_f
        }
    }

    /// Matrix coefficient `L(k,l) = ĝ(l−k) − 2π ĝ(−k) ĝ(l)`.
    pub fn l_coeff(&self, k: i64, l: i64) -> Complex64 {
        self.ghat(l - k) - TWO_PI * self.ghat(-k) * self.ghat(l)
    }

    /// Dense block of `L(k,l)` over the given inclusive ranges.
    pub fn l_matrix(
        &self,
        k_range: (i64, i64),
        l_range: (i64, i64),
    ) -> nalgebra::DMatrix<Complex64> {
        let rows = (k_range.1 - k_range.0 + 1) as usize;
        let cols = (l_range.1 - l_range.0 + 1) as usize;
        nalgebra::DMatrix::from_fn(rows, cols, |i, j| {
            self.l_coeff(k_range.0 + i as i64, l_range.0 + j as i64)
        })
    }

    /// `ℒ` applied to a truncated state: output coefficient at `l` is
    /// `Σ_k L(k,l) û(k)`, restricted to `|l| ≤ n_max`. The output mean is an
    /// exact zero (`L(k,0) = 0` in closed form).
    pub fn apply(&self, state: &FourierState) -> FourierState {
        let n = self.n_max.min(state.n_max()) as i64;
        let n_out = self.n_max as i64;
        let mut out = FourierState::zeros(self.n_max);
        for l in -n_out..=n_out {
            let mut acc = Complex64::ZERO;
            for k in -n..=n {
                let c = state.coeff(k);
                if c != Complex64::ZERO {
                    acc += self.l_coeff(k, l) * c;
                }
            }
            out.set_coeff(l, acc);
        }
        out
    }

    /// Pointwise evaluation of `ℒ(h)(x)` straight from the definition, with
    /// the `F`-average in closed form. Used by the grid-sampling checks.
    pub fn eval_pointwise(&self, state: &FourierState, x: f64) -> Complex64 {
        if !self.f_region.contains(x) {
            return Complex64::ZERO;
        }
        let mut hx = Complex64::ZERO;
        let mut avg = Complex64::ZERO;
        for (k, c) in state.iter() {
            if c != Complex64::ZERO {
                hx += c * Complex64::from_polar(1.0, k as f64 * x);
                avg += c * self.ghat(-k);
            }
        }
        (hx - TWO_PI * avg) / self.measure_f
    }

    /// Decay envelope constant: `|ĝ(n)| ≤ c_f/|n|` with `c_f = m/(π|F|)`.
    pub fn ghat_envelope(&self) -> f64 {
        self.n_intervals as f64 / (PI * self.measure_f)
    }

    /// Bound on `2π Σ_{|l| > cutoff} |L(k,l)| |L(m,l)|`.
    pub fn l_sum_tail_bound(&self, k: i64, m: i64, cutoff: i64) -> f64 {
        assert!(cutoff > k.abs() && cutoff > m.abs(), "cutoff must exceed |k|, |m|");
        // Σ_{|n| > M} 1/n² < 2/M
        let s = |mm: i64| 2.0 / mm.max(1) as f64;
        let cf2 = self.ghat_envelope().powi(2);
        let sk = s(cutoff - k.abs());
        let sm = s(cutoff - m.abs());
        let s0 = s(cutoff);
        let gk = self.ghat(k).norm();
        let gm = self.ghat(m).norm();
        TWO_PI
            * cf2
            * ((sk * sm).sqrt()
                + TWO_PI * gm * (sk * s0).sqrt()
                + TWO_PI * gk * (s0 * sm).sqrt()
                + TWO_PI * TWO_PI * gk * gm * s0)
    }

    /// Row identity `2π Σ_l |L(k,l)|² = (1/|F|)(1 − 4π²|ĝ(k)|²)`, with the
    /// l-sum truncated at `|l| ≤ cutoff`.
    pub fn row_identity_check(&self, k: i64, cutoff: i64) -> IdentityCheck {
        let mut sum = 0.0;
        for l in -cutoff..=cutoff {
            sum += self.l_coeff(k, l).norm_sqr();
        }
        let lhs = Complex64::new(TWO_PI * sum, 0.0);
        let rhs = Complex64::new(
            (1.0 - 4.0 * PI * PI * self.ghat(k).norm_sqr()) / self.measure_f,
            0.0,
        );
        IdentityCheck {
            lhs,
            rhs,
            gap: (lhs - rhs).norm(),
            tail_bound: self.l_sum_tail_bound(k, k, cutoff),
        }
    }

    /// Inner-product identity
    /// `2π Σ_l L(k,l) conj(L(m,l)) = (2π/|F|)(ĝ(m−k) − 2π conj(ĝ(k)) ĝ(m))`.
    pub fn inner_identity_check(&self, k: i64, m: i64, cutoff: i64) -> IdentityCheck {
        let mut sum = Complex64::ZERO;
        for l in -cutoff..=cutoff {
            sum += self.l_coeff(k, l) * self.l_coeff(m, l).conj();
        }
        let lhs = TWO_PI * sum;
        let rhs = (TWO_PI / self.measure_f)
            * (self.ghat(m - k) - TWO_PI * self.ghat(k).conj() * self.ghat(m));
        IdentityCheck {
            lhs,
            rhs,
            gap: (lhs - rhs).norm(),
            tail_bound: self.l_sum_tail_bound(k, m, cutoff),
        }
    }

    /// Closed form for `Σ_l L(k,l) conj(L(m,l))` (no truncation): equals
    /// `(1/|F|) L(k,m)`, a consequence of `ℒ² = (1/|F|) ℒ`.
    pub fn l_gram_closed(&self, k: i64, m: i64) -> Complex64 {
        self.l_coeff(k, m) / self.measure_f
    }

    /// Coercivity constant `δ(F) > 0` with
    /// `‖ℒ(e^{ikx})‖² ≥ δ` for all `k ≠ 0`:
    /// exact minimum over `0 < |k| ≤ k_switch`, Riemann–Lebesgue tail bound
    /// `(1/|F|)(1 − (2m/(|F| k_switch))²)` beyond.
    pub fn coercivity_delta(&self, k_switch: i64) -> Result<f64> {
        assert!(k_switch >= 1);
        let ratio = 2.0 * self.n_intervals as f64 / (self.measure_f * k_switch as f64);
        if ratio >= 1.0 {
            return Err(Error::CoercivitySwitchTooSmall {
                k_switch,
                needed: 2.0 * self.n_intervals as f64 / self.measure_f,
            });
        }
        let tail = (1.0 - ratio * ratio) / self.measure_f;
        let mut low = f64::INFINITY;
        for k in 1..=k_switch {
            for sk in [k, -k] {
                let v = (1.0 - 4.0 * PI * PI * self.ghat(sk).norm_sqr()) / self.measure_f;
                low = low.min(v);
            }
        }
        Ok(low.min(tail))
    }

    /// Brute-force scan of `min_{0<|k|≤k_max} ‖ℒ(e^{ikx})‖²`, the oracle for
    /// `coercivity_delta`.
    pub fn coercivity_brute_force(&self, k_max: i64) -> f64 {
        let mut low = f64::INFINITY;
        for k in 1..=k_max {
            let v = (1.0 - 4.0 * PI * PI * self.ghat(k).norm_sqr()) / self.measure_f;
            low = low.min(v);
        }
        low
    }
}
