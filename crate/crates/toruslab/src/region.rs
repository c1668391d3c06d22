//! Exact representation of observation and control regions.
//!
//! Regions are finite unions of half-open intervals on a periodic cell
//! (1-D) and finite unions of axis-aligned rectangles on a time × space
//! cell (2-D). Every integral of `e^{-iα·z}` over a region is evaluated in
//! closed form, so indicator transforms, Gram entries and tail energies
//! carry no quadrature error.
//!
//! Indicator transforms are normalized as
//! `𝟙̂_G(α) = (1/(period volume)) ∫ 𝟙_G e^{-iα·z} dz`, so Plancherel reads
//! `Σ_α |𝟙̂_G(α)|² = |G| / (period volume)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::phase::oscillatory_integral;

const TWO_PI: f64 = 2.0 * PI;

/// A sorted union of pairwise-disjoint half-open intervals `[a, b)` inside
/// the cell `[0, period)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
    period: f64,
}

impl IntervalUnion {
    /// Build from raw `[start, end)` pairs. Endpoints must satisfy
    /// `0 ≤ start < end ≤ period`; overlapping or adjacent pieces are merged.
    pub fn new(intervals: &[(f64, f64)], period: f64) -> Result<Self> {
        assert!(period > 0.0, "period must be positive");
        for &(a, b) in intervals {
            if !(a >= 0.0 && a < b && b <= period) {
                return Err(Error::InvalidInterval { start: a, end: b, period });
            }
        }
        Ok(Self::normalized(intervals.to_vec(), period))
    }

    /// Full cell `[0, period)`.
    pub fn full(period: f64) -> Self {
        Self { intervals: vec![(0.0, period)], period }
    }

    pub fn empty(period: f64) -> Self {
        Self { intervals: Vec::new(), period }
    }

    /// The full torus cell `[0, 2π)`.
    pub fn full_torus() -> Self {
        Self::full(TWO_PI)
    }

    fn normalized(mut intervals: Vec<(f64, f64)>, period: f64) -> Self {
        intervals.retain(|&(a, b)| b > a);
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (a, b) in intervals {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged, period }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = x.rem_euclid(self.period);
        self.intervals.iter().any(|&(a, b)| a <= x && x < b)
    }

    /// Translate by `h` with wrap-around modulo the period.
    pub fn translate(&self, h: f64) -> Self {
        let mut pieces = Vec::with_capacity(2 * self.intervals.len());
        for &(a, b) in &self.intervals {
            let len = b - a;
            let a2 = (a + h).rem_euclid(self.period);
            if a2 + len <= self.period {
                pieces.push((a2, a2 + len));
            } else {
                pieces.push((a2, self.period));
                pieces.push((0.0, a2 + len - self.period));
            }
        }
        Self::normalized(pieces, self.period)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.period, other.period, "period mismatch");
        let mut pieces = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if hi > lo {
                    pieces.push((lo, hi));
                }
            }
        }
        Self::normalized(pieces, self.period)
    }

    pub fn set_difference(&self, other: &Self) -> Self {
        assert_eq!(self.period, other.period, "period mismatch");
        let mut pieces = vec![];
        for &(a, b) in &self.intervals {
            let mut current = vec![(a, b)];
            for &(c, d) in &other.intervals {
                let mut next = Vec::new();
                for (lo, hi) in current {
                    if d <= lo || c >= hi {
                        next.push((lo, hi));
                    } else {
                        if c > lo {
                            next.push((lo, c));
                        }
                        if d < hi {
                            next.push((d, hi));
                        }
                    }
                }
                current = next;
            }
            pieces.extend(current);
        }
        Self::normalized(pieces, self.period)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.period).set_difference(self)
    }

    /// Plain oscillatory integral `∫ e^{i(ω_int + ω_re) s} ds` over the union.
    pub fn osc_integral(&self, omega_int: i128, omega_re: f64) -> Complex64 {
        self.intervals
            .iter()
            .map(|&(a, b)| oscillatory_integral(omega_int, omega_re, a, b))
            .sum()
    }

    /// Normalized indicator coefficient
    /// `𝟙̂(α) = (1/period) ∫ e^{-i (2πα/period) s} ds`.
    pub fn indicator_fourier(&self, alpha: i64) -> Complex64 {
        let v = if self.period == TWO_PI {
            self.osc_integral(-(alpha as i128), 0.0)
        } else {
            self.osc_integral(0, -(alpha as f64) * TWO_PI / self.period)
        };
        v / self.period
    }
}

/// A finite union of pairwise-disjoint axis-aligned rectangles
/// `[t0, t1) × [x0, x1)` inside `[0, t_period) × [0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeRegion {
    rects: Vec<Rect>,
    t_period: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Rect {
    fn area(&self) -> f64 {
        (self.t1 - self.t0) * (self.x1 - self.x0)
    }

    fn intersect(&self, other: &Rect) -> Option<Rect> {
        let t0 = self.t0.max(other.t0);
        let t1 = self.t1.min(other.t1);
        let x0 = self.x0.max(other.x0);
        let x1 = self.x1.min(other.x1);
        (t1 > t0 && x1 > x0).then_some(Rect { t0, t1, x0, x1 })
    }

    /// `self ∖ other` as up to four disjoint rectangles.
    fn subtract(&self, other: &Rect) -> Vec<Rect> {
        let Some(ov) = self.intersect(other) else {
            return vec![*self];
        };
        let mut out = Vec::with_capacity(4);
        if ov.t0 > self.t0 {
            out.push(Rect { t0: self.t0, t1: ov.t0, x0: self.x0, x1: self.x1 });
        }
        if ov.t1 < self.t1 {
            out.push(Rect { t0: ov.t1, t1: self.t1, x0: self.x0, x1: self.x1 });
        }
        if ov.x0 > self.x0 {
            out.push(Rect { t0: ov.t0, t1: ov.t1, x0: self.x0, x1: ov.x0 });
        }
        if ov.x1 < self.x1 {
            out.push(Rect { t0: ov.t0, t1: ov.t1, x0: ov.x1, x1: self.x1 });
        }
        out
    }
}

impl SpaceTimeRegion {
    /// Product region `E_T × F`: time union × space union, one rectangle per
    /// pair of intervals.
    pub fn product(time: &IntervalUnion, space: &IntervalUnion) -> Self {
        assert!(
            (space.period() - TWO_PI).abs() < 1e-12,
            "space factor must live on the 2π torus"
        );
        let mut rects = Vec::new();
        for &(t0, t1) in time.intervals() {
            for &(x0, x1) in space.intervals() {
                rects.push(Rect { t0, t1, x0, x1 });
            }
        }
        Self { rects, t_period: time.period() }
    }

    pub fn full_cell(t_period: f64) -> Self {
        Self::product(&IntervalUnion::full(t_period), &IntervalUnion::full_torus())
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn t_period(&self) -> f64 {
        self.t_period
    }

    /// (time period, space period) of the cell.
    pub fn cell_volume(&self) -> f64 {
        self.t_period * TWO_PI
    }

    pub fn measure(&self) -> f64 {
        self.rects.iter().map(Rect::area).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        let t = t.rem_euclid(self.t_period);
        let x = x.rem_euclid(TWO_PI);
        self.rects.iter().any(|r| r.t0 <= t && t < r.t1 && r.x0 <= x && x < r.x1)
    }

    /// Translate by `(h_t, h_x)` with wrap-around on both axes.
    pub fn translate(&self, h_t: f64, h_x: f64) -> Self {
        let mut rects = Vec::new();
        for r in &self.rects {
            let t_pieces = wrap_interval(r.t0 + h_t, r.t1 - r.t0, self.t_period);
            let x_pieces = wrap_interval(r.x0 + h_x, r.x1 - r.x0, TWO_PI);
            for &(t0, t1) in &t_pieces {
                for &(x0, x1) in &x_pieces {
                    rects.push(Rect { t0, t1, x0, x1 });
                }
            }
        }
        Self { rects, t_period: self.t_period }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        assert_eq!(self.t_period, other.t_period, "time period mismatch");
        let rects = self
            .rects
            .iter()
            .flat_map(|a| other.rects.iter().filter_map(|b| a.intersect(b)))
            .collect();
        Self { rects, t_period: self.t_period }
    }

    pub fn set_difference(&self, other: &Self) -> Self {
        assert_eq!(self.t_period, other.t_period, "time period mismatch");
        let mut rects = Vec::new();
        for r in &self.rects {
            let mut current = vec![*r];
            for b in &other.rects {
                current = current.iter().flat_map(|piece| piece.subtract(b)).collect();
            }
            rects.extend(current);
        }
        Self { rects, t_period: self.t_period }
    }

    /// `∬ e^{i((ωt_int + ωt_re) t + ωx x)} dt dx`, exact per rectangle.
    pub fn osc_integral(&self, omega_t_int: i128, omega_t_re: f64, omega_x: i64) -> Complex64 {
        self.rects
            .iter()
            .map(|r| {
                oscillatory_integral(omega_t_int, omega_t_re, r.t0, r.t1)
                    * oscillatory_integral(omega_x as i128, 0.0, r.x0, r.x1)
            })
            .sum()
    }

    /// Normalized indicator coefficient at the lattice index `(α_t, α_x)`:
    /// time frequency `2πα_t/t_period`, space frequency `α_x`.
    pub fn indicator_fourier(&self, alpha: (i64, i64)) -> Complex64 {
        let (at, ax) = alpha;
        let v = if self.t_period == TWO_PI {
            self.osc_integral(-(at as i128), 0.0, -ax)
        } else {
            self.osc_integral(0, -(at as f64) * TWO_PI / self.t_period, -ax)
        };
        v / self.cell_volume()
    }

    /// `Σ_{|α| > N} |𝟙̂_G(α)|²` via Plancherel: total normalized energy minus
    /// the ball `|α| ≤ N` (Euclidean norm on the index lattice).
    pub fn tail_energy(&self, n: i64) -> f64 {
        assert!(n >= 0);
        let total = self.measure() / self.cell_volume();
        (total - self.ball_energy(n)).max(0.0)
    }

    /// `Σ_{|α| ≤ N} |𝟙̂_G(α)|²`, with the per-rectangle axis factors
    /// tabulated once so the lattice sum is lookups.
    pub fn ball_energy(&self, n: i64) -> f64 {
        let nr = self.rects.len();
        let width = (2 * n + 1) as usize;
        let mut t_tab = vec![Complex64::ZERO; nr * width];
        let mut x_tab = vec![Complex64::ZERO; nr * width];
        for (r, rect) in self.rects.iter().enumerate() {
            for (i, a) in (-n..=n).enumerate() {
                t_tab[r * width + i] = if self.t_period == TWO_PI {
                    oscillatory_integral(-(a as i128), 0.0, rect.t0, rect.t1)
                } else {
                    oscillatory_integral(
                        0,
                        -(a as f64) * TWO_PI / self.t_period,
                        rect.t0,
                        rect.t1,
                    )
                };
                x_tab[r * width + i] = oscillatory_integral(-(a as i128), 0.0, rect.x0, rect.x1);
            }
        }
        let inv_vol = 1.0 / self.cell_volume();
        let mut sum = 0.0;
        for (it, at) in (-n..=n).enumerate() {
            let max_ax = ((n * n - at * at) as f64).sqrt().floor() as i64;
            for ax in -max_ax..=max_ax {
                let ix = (ax + n) as usize;
                let mut v = Complex64::ZERO;
                for r in 0..nr {
                    v += t_tab[r * width + it] * x_tab[r * width + ix];
                }
                sum += (v * inv_vol).norm_sqr();
            }
        }
        sum
    }
}

fn wrap_interval(start: f64, len: f64, period: f64) -> Vec<(f64, f64)> {
    let a = start.rem_euclid(period);
    if a + len <= period {
        vec![(a, a + len)]
    } else {
        vec![(a, period), (0.0, a + len - period)]
    }
}

/// Parse one scalar token: plain decimals plus `pi` forms (`pi`, `2pi`,
/// `pi/2`, `3pi/4`, `0.5pi`).
pub fn parse_scalar(token: &str) -> std::result::Result<f64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty scalar".into());
    }
    if let Some(idx) = t.find("pi") {
        let (pre, rest) = t.split_at(idx);
        let rest = &rest[2..];
        let coeff = match pre.trim() {
            "" => 1.0,
            "-" => -1.0,
            s => s.parse::<f64>().map_err(|_| format!("bad coefficient '{s}' in '{t}'"))?,
        };
        let den = match rest.trim() {
            "" => 1.0,
            s => {
                let s = s
                    .strip_prefix('/')
                    .ok_or_else(|| format!("expected '/denominator' after pi in '{t}'"))?;
                s.trim().parse::<f64>().map_err(|_| format!("bad denominator in '{t}'"))?
            }
        };
        Ok(coeff * PI / den)
    } else {
        t.parse::<f64>().map_err(|_| format!("bad number '{t}'"))
    }
}

/// Parse a region description: whitespace- or comma-separated list of
/// `[start, end)` pairs, e.g. `[0, pi) [3pi/2, 2pi)`.
pub fn parse_interval_union(text: &str, period: f64) -> std::result::Result<IntervalUnion, String> {
    let mut intervals = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .find('[')
            .ok_or_else(|| format!("expected '[' at '{rest}'"))?;
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| format!("unterminated interval at '{}'", &rest[open..]))?
            + open;
        let body = &rest[open + 1..close];
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 2 {
            return Err(format!("interval '[{body})' must have exactly two endpoints"));
        }
        let a = parse_scalar(parts[0])?;
        let b = parse_scalar(parts[1])?;
        intervals.push((a, b));
        rest = rest[close + 1..].trim_start_matches([',', ' ', '\t']);
    }
    if intervals.is_empty() {
        return Err("no intervals found".into());
    }
    IntervalUnion::new(&intervals, period)
        .map_err(|e| format!("invalid region: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures() {
        let u = IntervalUnion::new(&[(0.0, PI), (1.5 * PI, TWO_PI)], TWO_PI).unwrap();
        assert!((u.measure() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(IntervalUnion::empty(TWO_PI).measure(), 0.0);
        let g = SpaceTimeRegion::product(
            &IntervalUnion::new(&[(0.0, 1.0)], TWO_PI).unwrap(),
            &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
        );
        assert!((g.measure() - PI).abs() < 1e-15);
    }

    #[test]
    fn indicator_closed_forms() {
        let half = IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap();
        // α = 0: measure ratio
        assert!((half.indicator_fourier(0) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        // α = 1: (1/2π)∫_0^π e^{-ix} dx = −i/π
        let v = half.indicator_fourier(1);
        assert!((v - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-14);
        assert!((v.norm() - 1.0 / PI).abs() < 1e-14);
        // full torus at α ≠ 0: orthogonality
        assert!(IntervalUnion::full_torus().indicator_fourier(5).norm() < 1e-15);
    }

    #[test]
    fn indicator_conjugate_symmetry() {
        let u = IntervalUnion::new(&[(0.3, 1.1), (2.0, 4.5)], TWO_PI).unwrap();
        for alpha in [-7i64, -2, 1, 3, 11] {
            let a = u.indicator_fourier(alpha);
            let b = u.indicator_fourier(-alpha).conj();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn translate_and_algebra() {
        let g = IntervalUnion::new(&[(0.0, 1.0)], TWO_PI).unwrap();
        let t = g.translate(0.5);
        assert_eq!(t.intervals(), &[(0.5, 1.5)]);
        // h = 0 identity
        assert_eq!(g.intersect(&g.translate(0.0)), g);
        // measure additivity |G| = |G∩(G−h)| + |G∖(G−h)|
        let big = IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap();
        for h in [0.1, 0.01, 0.001] {
            let shifted = big.translate(-h);
            let inter = big.intersect(&shifted);
            let diff = big.set_difference(&shifted);
            assert!((inter.measure() + diff.measure() - big.measure()).abs() < 1e-13);
            // closed form: |G∖(G−h)| = min(h, π)
            assert!((diff.measure() - h.min(PI)).abs() < 1e-13, "h={h}");
        }
    }

    #[test]
    fn wrapping_translate() {
        let g = IntervalUnion::new(&[(5.0, 6.0)], TWO_PI).unwrap();
        let t = g.translate(1.0);
        // 6.0 + 1.0 wraps past 2π ≈ 6.283
        assert_eq!(t.n_intervals(), 2);
        assert!((t.measure() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn region_tail_energy() {
        // full cell: only α = 0 survives
        let full = SpaceTimeRegion::full_cell(TWO_PI);
        assert!(full.tail_energy(0) < 1e-14);
        // G = [0,π) × [0,2π): total = 1/2, |𝟙̂(0)|² = 1/4
        let g = SpaceTimeRegion::product(
            &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
            &IntervalUnion::full_torus(),
        );
        assert!((g.tail_energy(0) - 0.25).abs() < 1e-13);
        // Plancherel cross-check against direct summation over a large ball:
        // tail(0) = Σ_{α≠0} |𝟙̂|², summed directly over |α| ≤ 2·10³ on the
        // time axis (the space factor kills everything off-axis here).
        let mut direct = 0.0;
        for at in -2000i64..=2000 {
            if at != 0 {
                direct += g.indicator_fourier((at, 0)).norm_sqr();
            }
        }
        assert!((direct - 0.25).abs() < 1e-4);
        // monotone in N
        for n in 0..6 {
            assert!(g.tail_energy(n + 1) <= g.tail_energy(n) + 1e-15);
        }
    }

    #[test]
    fn region_plancherel_invariant() {
        let g = SpaceTimeRegion::product(
            &IntervalUnion::new(&[(0.2, 0.9), (1.4, 2.0)], TWO_PI).unwrap(),
            &IntervalUnion::new(&[(0.0, 1.0), (3.0, 4.0)], TWO_PI).unwrap(),
        );
        for n in [0i64, 3, 7] {
            let total = g.ball_energy(n) + g.tail_energy(n);
            assert!((total - g.measure() / g.cell_volume()).abs() < 1e-12);
        }
    }

    #[test]
    fn region_set_algebra() {
        let g = SpaceTimeRegion::product(
            &IntervalUnion::new(&[(0.0, 1.0)], 2.0).unwrap(),
            &IntervalUnion::new(&[(0.0, PI)], TWO_PI).unwrap(),
        );
        let shifted = g.translate(0.3, 0.7);
        assert!((shifted.measure() - g.measure()).abs() < 1e-13);
        let inter = g.intersect(&shifted);
        let diff = g.set_difference(&shifted);
        assert!((inter.measure() + diff.measure() - g.measure()).abs() < 1e-13);
        // disjoint translate in time: empty intersection
        let far = g.translate(1.0, 0.0);
        assert!(g.intersect(&far).is_empty());
    }

    #[test]
    fn scalar_parsing() {
        assert_eq!(parse_scalar("pi").unwrap(), PI);
        assert_eq!(parse_scalar("2pi").unwrap(), TWO_PI);
        assert_eq!(parse_scalar("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_scalar("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_scalar("1.5").unwrap(), 1.5);
        assert_eq!(parse_scalar("0.5pi").unwrap(), 0.5 * PI);
        assert!(parse_scalar("").is_err());
        assert!(parse_scalar("pj").is_err());
    }

    #[test]
    fn interval_parsing() {
        let u = parse_interval_union("[0, pi) [3pi/2, 2pi)", TWO_PI).unwrap();
        assert_eq!(u.n_intervals(), 2);
        assert!((u.measure() - 1.5 * PI).abs() < 1e-14);
        assert!(parse_interval_union("[0, )", TWO_PI).is_err());
        assert!(parse_interval_union("[2, 1)", TWO_PI).is_err());
        assert!(parse_interval_union("", TWO_PI).is_err());
    }
}
