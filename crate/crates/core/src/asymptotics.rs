//! Closed-form quantities: the traversal root α, the column-crossing rate
//! f, the threshold constants, the three-term expansion of p_c and its
//! fixed-point refinement, and the crossover arithmetic that explains why
//! simulations at feasible L sit far from the asymptotics.
//!
//! Every "log" is natural. Very large systems are handled through
//! `ℓ = ln L` and `t = ln ln L`; `L` itself is never formed.

use serde::Serialize;

use crate::error::{Error, Result};

pub const C1: f64 = 1.0 / 12.0;

/// `(1/6) ln(8 / 3e)`, negative.
pub fn c2() -> f64 {
    (8.0 / (3.0 * std::f64::consts::E)).ln() / 6.0
}

/// Coefficient of the third term of the b = 2 expansion, `(ln(9/2) + 1)/6`.
pub fn third_coefficient() -> f64 {
    (4.5f64.ln() + 1.0) / 6.0
}

/// Positive root of `X³ − uX² − u(1−u)X − u(1−u)²` for `u ∈ [0, 1]`.
pub fn alpha(u: f64) -> f64 {
    assert!((0.0..=1.0).contains(&u), "alpha needs u in [0,1], got {u}");
    if u == 0.0 {
        return 0.0;
    }
    if u > 0.5 {
        return 1.0 - one_minus_alpha(1.0 - u);
    }
    let poly = |x: f64| ((x - u) * x - u * (1.0 - u)) * x - u * (1.0 - u) * (1.0 - u);
    let deriv = |x: f64| (3.0 * x - 2.0 * u) * x - u * (1.0 - u);
    let guess = (u - 3.0 * u * u).clamp(f64::MIN_POSITIVE, 1.0);
    safeguarded_newton(poly, deriv, 0.0, 1.0, guess)
}

/// `1 − α(1 − q)`, computed without cancellation: with `α = 1 − δ` the
/// cubic becomes `δ³ − (q+2)δ² + (q²+q+1)δ − q³`.
pub fn one_minus_alpha(q: f64) -> f64 {
    assert!((0.0..=1.0).contains(&q));
    if q == 0.0 {
        return 0.0;
    }
    if q >= 0.5 {
        return 1.0 - alpha(1.0 - q);
    }
    let a = q + 2.0;
    let b = q * q + q + 1.0;
    let c = q * q * q;
    let poly = |d: f64| ((d - a) * d + b) * d - c;
    let deriv = |d: f64| (3.0 * d - 2.0 * a) * d + b;
    // Q(0) = −q³ < 0 and Q(q) = q(1 − q) > 0, so the root lies in (0, q).
    let guess = c / b;
    safeguarded_newton(poly, deriv, 0.0, q, guess)
}

/// Newton iteration kept inside a sign-change bracket; falls back to
/// bisection whenever a step leaves the bracket or stalls.
fn safeguarded_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
) -> f64 {
    let flo = f(lo);
    debug_assert!(flo <= 0.0 && f(hi) >= 0.0, "root not bracketed");
    if flo == 0.0 {
        return lo;
    }
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= f64::MIN_POSITIVE {
            return next;
        }
        x = next;
    }
    x
}

/// `f(p, y) = −ln α(1 − (1−p)^y)`.
pub fn f_of(p: f64, y: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0 && y > 0.0, "f_of needs 0<p<1, y>0");
    let q = (y * (-p).ln_1p()).exp();
    -(-one_minus_alpha(q)).ln_1p()
}

/// Two-term exponent of `ln P(R internally filled)` for a critical
/// droplet. The lower and upper bounds share it; the `o((1/p) ln(1/p))`
/// slack is left to the caller.
pub fn droplet_log_prob_bounds(p: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && p < (-1.0f64).exp()) {
        return Err(Error::Domain(format!("droplet exponent needs 0 < p < 1/e, got {p}")));
    }
    let l = (1.0 / p).ln();
    let e = -2.0 * C1 / p * l * l + 2.0 * c2() / p * l;
    Ok((e, e))
}

/// Exact binomial coefficient, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> u128 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of growth configurations of the `(1,b)` model:
/// `C(2b,b) − ((2b−1)/(b+1))·C(2b−2,b) − 1 + C(2b,b−1) − C(2b−2,b−3)`.
pub fn growth_count_formula(b: u32) -> Result<u128> {
    if b < 2 {
        return Err(Error::InvalidParameter(format!("growth count needs b >= 2, got {b}")));
    }
    let bi = b as i64;
    let num = (2 * b as u128 - 1) * binomial(2 * bi - 2, bi);
    if !num.is_multiple_of(b as u128 + 1) {
        return Err(Error::NonIntegralTerm(b));
    }
    let shifted = num / (b as u128 + 1);
    let total = binomial(2 * bi, bi) + binomial(2 * bi, bi - 1)
        - shifted
        - 1
        - binomial(2 * bi - 2, bi - 3);
    Ok(total)
}

/// Leading coefficient `(b−1)² / (4(b+1))` of the `(1,b)` threshold.
pub fn leading_coefficient(b: u32) -> f64 {
    let b = b as f64;
    (b - 1.0) * (b - 1.0) / (4.0 * (b + 1.0))
}

/// `C(b)` of the `(1,b)` expansion.
pub fn c_of_b(b: u32) -> Result<f64> {
    let g = growth_count_formula(b)? as f64;
    let bf = b as f64;
    Ok(2.0 / (bf - 1.0) * (g / ((bf + 1.0) * std::f64::consts::E)).ln()
        + 2.0 * leading_coefficient(b).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticConstants {
    pub c1: f64,
    pub c2: f64,
    pub b: u32,
    pub cb: f64,
    pub growth_count: u128,
}

impl AsymptoticConstants {
    pub fn new(b: u32) -> Result<Self> {
        Ok(Self {
            c1: C1,
            c2: c2(),
            b,
            cb: c_of_b(b)?,
            growth_count: growth_count_formula(b)?,
        })
    }
}

/// The three terms of the p_c expansion as signed contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PcTerms {
    pub log_l: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
}

impl PcTerms {
    pub fn one_term(&self) -> f64 {
        self.term1
    }

    pub fn two_term(&self) -> f64 {
        self.term1 + self.term2
    }

    pub fn three_term(&self) -> f64 {
        self.term1 + self.term2 + self.term3
    }
}

fn loglogs(log_l: f64) -> Result<(f64, f64)> {
    if !(log_l > 1.0) || !log_l.is_finite() {
        return Err(Error::Domain(format!(
            "three-term expansion needs ln L > 1, got {log_l}"
        )));
    }
    let t = log_l.ln();
    Ok((t, t.ln()))
}

/// Terms of `p_c` for the `(1,b)` model with `ℓ = ln L`. For `b = 2` these
/// are `t²/(12ℓ)`, `−ts/(3ℓ)` and `((ln(9/2)+1)/6)·t/ℓ` with `t = ln ℓ`,
/// `s = ln t`.
pub fn pc_terms(log_l: f64, b: u32) -> Result<PcTerms> {
    let (t, s) = loglogs(log_l)?;
    let (term1, term2, term3) = if b == 2 {
        (
            t * t / (12.0 * log_l),
            -t * s / (3.0 * log_l),
            third_coefficient() * t / log_l,
        )
    } else {
        let k = leading_coefficient(b);
        let cb = c_of_b(b)?;
        (k * t * t / log_l, -4.0 * k * t * s / log_l, -k * cb * t / log_l)
    };
    Ok(PcTerms {
        log_l,
        term1,
        term2,
        term3,
    })
}

pub fn pc_threeterm(log_l: f64, b: u32) -> Result<f64> {
    Ok(pc_terms(log_l, b)?.three_term())
}

/// The factored form `K (t/ℓ)(t − 4s − C(b))`.
pub fn pc_threeterm_factored(log_l: f64, b: u32) -> Result<f64> {
    let (t, s) = loglogs(log_l)?;
    Ok(leading_coefficient(b) * t / log_l * (t - 4.0 * s - c_of_b(b)?))
}

/// Fixed point of `p = [C₁ ln²(1/p) − (C₂ − η) ln(1/p)] / ℓ`, iterated from
/// `C₁ (ln ℓ)² / ℓ` until successive iterates agree to 1e-15 relative.
pub fn invert_pc(log_l: f64, eta: f64) -> Result<f64> {
    Ok(invert_pc_trace(log_l, eta)?.0)
}

/// Like [`invert_pc`], also returning every iterate.
pub fn invert_pc_trace(log_l: f64, eta: f64) -> Result<(f64, Vec<f64>)> {
    if !(log_l > 1.0) || !log_l.is_finite() {
        return Err(Error::Domain(format!("inversion needs ln L > 1, got {log_l}")));
    }
    let c2 = c2();
    let map = |p: f64| {
        let l = (1.0 / p).ln();
        (C1 * l * l - (c2 - eta) * l) / log_l
    };
    let t = log_l.ln();
    let mut p = C1 * t * t / log_l;
    let mut trace = vec![p];
    for _ in 0..200 {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("iterate left (0,1): {p}")));
        }
        let next = map(p);
        trace.push(next);
        if (next - p).abs() < 1e-15 * next.abs() {
            return Ok((next, trace));
        }
        p = next;
    }
    Err(Error::NoConvergence(200))
}

/// The `ℓ = ln L` at which `p` is the fixed point of [`invert_pc`].
pub fn log_l_for_pc(p: f64, eta: f64) -> f64 {
    let l = (1.0 / p).ln();
    (C1 * l * l - (c2() - eta) * l) / p
}

/// One solved crossover. `t = ln ln L`; `L` is reported through its
/// decimal logarithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossover {
    pub name: String,
    pub description: String,
    pub t: f64,
    pub log10_l: f64,
    pub log10_log10_l: f64,
    /// Value quoted in the literature, as `log10 L`, when there is one.
    pub quoted_log10_l: Option<f64>,
}

impl Crossover {
    fn new(name: &str, description: &str, t: f64, quoted: Option<f64>) -> Self {
        // log10 L = e^t / ln 10, computed in logs to survive huge t.
        let log10_log10_l = t / std::f64::consts::LN_10 - std::f64::consts::LN_10.log10();
        let log10_l = 10f64.powf(log10_log10_l);
        Self {
            name: name.into(),
            description: description.into(),
            t,
            log10_l,
            log10_log10_l,
            quoted_log10_l: quoted,
        }
    }

    /// `L` itself when representable.
    pub fn l(&self) -> Option<f64> {
        let l = 10f64.powf(self.log10_l);
        l.is_finite().then_some(l)
    }
}

/// Root of `g` on `[lo, hi]` by bisection; `g(lo)` and `g(hi)` must differ
/// in sign.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (mut glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo.signum() == ghi.signum() {
        return Err(Error::Domain(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || (hi - lo) <= 1e-15 * mid.abs() {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The crossover arithmetic of the slow-convergence discussion, solved in
/// `t = ln ln L`:
///
/// * `4 ln t = t`: the window where the second term exceeds the first;
/// * `4 ln t / t = 0.01`: where the second term is within 1% of the first;
/// * third term against first and second, both as isolated terms and with
///   the third compared to the two-term partial sum.
pub fn paradox_crossovers() -> Vec<Crossover> {
    let c3 = third_coefficient();
    // 4 ln t − t peaks at t = 4.
    let lower = bisect(|t| 4.0 * t.ln() - t, 1.0 + 1e-9, 4.0).expect("bracketed");
    let upper = bisect(|t| 4.0 * t.ln() - t, 4.0, 100.0).expect("bracketed");
    let one_percent = bisect(|t| 4.0 * t.ln() / t - 0.01, 100.0, 1e5).expect("bracketed");
    // Isolated terms, t > e: c3·t > t²/12 ⟺ t < 12·c3; c3·t > t·ln t/3 ⟺ ln t < 3·c3.
    let third_vs_first = 12.0 * c3;
    let third_vs_second = (3.0 * c3).exp();
    // Partial sums: c3·t > t²/12 − t·ln t/3, i.e. t/12 − ln t/3 − c3 = 0
    // above the minimum of t/12 − ln t/3 at t = 4.
    let third_vs_partial = bisect(|t| t / 12.0 - t.ln() / 3.0 - c3, 4.0, 1e4).expect("bracketed");
    vec![
        Crossover::new(
            "second_exceeds_first_lower",
            "lower root of 4 ln t = t: second term larger than first above this L",
            lower,
            Some(66f64.log10()),
        ),
        Crossover::new(
            "second_exceeds_first_upper",
            "upper root of 4 ln t = t: second term larger than first below this L",
            upper,
            Some(2390.0),
        ),
        Crossover::new(
            "second_within_one_percent",
            "4 ln t / t = 0.01: second term below 1% of the first beyond this L",
            one_percent,
            Some(10f64.powf(1403.0)),
        ),
        Crossover::new(
            "third_exceeds_first_isolated",
            "third term larger than first term (isolated terms) below this L",
            third_vs_first,
            Some(60.0),
        ),
        Crossover::new(
            "third_exceeds_second_isolated",
            "third term larger than second term (isolated terms) below this L",
            third_vs_second,
            Some(13.0),
        ),
        Crossover::new(
            "third_exceeds_two_term_partial_sum",
            "third term larger than the two-term partial sum below this L",
            third_vs_partial,
            None,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(u: f64) -> f64 {
        let a = alpha(u);
        a * a * a - u * a * a - u * (1.0 - u) * a - u * (1.0 - u) * (1.0 - u)
    }

    #[test]
    fn alpha_endpoints_and_small_u() {
        assert_eq!(alpha(0.0), 0.0);
        assert!((alpha(1.0) - 1.0).abs() < 1e-15);
        let a = alpha(0.1);
        assert!(residual(0.1).abs() < 1e-12);
        assert!(a >= 0.07);
    }

    #[test]
    fn alpha_residuals_on_grid() {
        for i in 1..=1000 {
            let u = i as f64 / 1000.0;
            assert!(residual(u).abs() < 1e-12 * u.max(1.0), "u = {u}");
        }
    }

    #[test]
    fn one_minus_alpha_is_accurate_near_one() {
        // δ ≈ q³ / (1 + q + q²) to leading order.
        for q in [1e-3, 1e-5, 1e-8] {
            let d = one_minus_alpha(q);
            let approx = q * q * q / (1.0 + q + q * q);
            assert!((d / approx - 1.0).abs() < 10.0 * q, "q = {q}");
        }
    }

    #[test]
    fn f_decreases_in_y_and_tracks_exponential() {
        let p = 0.05;
        let mut prev = f64::INFINITY;
        for y in 1..200 {
            let f = f_of(p, y as f64);
            assert!(f > 0.0 && f < prev);
            prev = f;
        }
        let y = 2.0 / p * (1.0 / p).ln().ln();
        let rel = (f_of(p, y) / (-3.0 * p * y).exp() - 1.0).abs();
        let scale = (1.0 / p).ln().powi(-2);
        assert!(rel < 3.0 * scale, "rel {rel} vs {scale}");
    }

    #[test]
    fn f_small_py_lower_bound() {
        let (p, y) = (0.001, 10.0);
        assert!(f_of(p, y) >= 0.5 * p * y - 3.0 * p * p * y * y);
    }

    #[test]
    fn constant_identity() {
        let lhs = -(c2() + 2.0 * C1 * C1.ln());
        assert!((lhs - third_coefficient()).abs() < 1e-12);
        assert!(c2() < 0.0);
    }

    #[test]
    fn growth_counts() {
        assert_eq!(growth_count_formula(2).unwrap(), 8);
        assert_eq!(growth_count_formula(3).unwrap(), 28);
        assert_eq!(growth_count_formula(4).unwrap(), 98);
        for b in 2..30 {
            growth_count_formula(b).unwrap();
        }
        assert!(growth_count_formula(1).is_err());
    }

    #[test]
    fn c_of_two_reduces_to_leading_constant() {
        let c = c_of_b(2).unwrap();
        let expected = -2.0 * (4.5 * std::f64::consts::E).ln();
        assert!((c - expected).abs() < 1e-12);
    }

    #[test]
    fn expanded_and_factored_forms_agree() {
        let mut e = 2.0;
        while e <= 300.0 {
            let l = 10f64.powf(e);
            let a = pc_threeterm(l, 2).unwrap();
            let b = pc_threeterm_factored(l, 2).unwrap();
            assert!(((a - b) / b).abs() < 1e-13, "logL = 1e{e}");
            e += 0.5;
        }
        assert!(pc_threeterm(1.0, 2).is_err());
    }

    #[test]
    fn slow_convergence_ratio() {
        let t = pc_terms(1e6, 2).unwrap();
        assert!((-t.term2 / t.term1) > 0.7);
    }

    #[test]
    fn droplet_exponent() {
        let (lo, hi) = droplet_log_prob_bounds(0.1).unwrap();
        let l = 10f64.ln();
        let expected = -(1.0 / 0.6) * l * l + (1.0 / 0.3) * (8.0 / (3.0 * std::f64::consts::E)).ln() * l;
        assert!((lo - expected).abs() < 1e-12 && lo == hi);
        assert!(lo < 0.0);
        assert!(droplet_log_prob_bounds(0.5).is_err());
    }

    #[test]
    fn inversion_round_trip_and_monotonicity() {
        let p = 0.02;
        let l = log_l_for_pc(p, 0.0);
        assert!((invert_pc(l, 0.0).unwrap() / p - 1.0).abs() < 1e-12);
        let mut prev = 1.0;
        for e in [2.0, 3.0, 6.0, 9.0, 12.0, 30.0] {
            let v = invert_pc(10f64.powf(e), 0.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn crossovers_land_near_quoted_values() {
        let c = paradox_crossovers();
        let l = c[0].l().unwrap();
        assert!((60.0..=70.0).contains(&l), "{l}");
        assert!((2380.0..=2400.0).contains(&c[1].log10_l));
        assert!((1402.0..=1405.0).contains(&c[2].log10_log10_l));
        assert!((c[3].log10_l - 65.0).abs() < 0.5);
        assert!((c[4].log10_l - 14.35).abs() < 0.1);
    }
}
