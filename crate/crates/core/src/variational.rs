//! Growth potentials ψ, φ, the nested-rectangle cost `U^p`, path weights
//! `∫ ψ(x) dy + φ(y) dx`, the shortest monotone path `W`, the optimal
//! trajectory Δ and the closed-form optimum.
//!
//! Internally everything runs in scaled coordinates `X = ln x`, `Y = p·y`
//! with weights multiplied by `p`, and the density enters only through
//! `Λ = ln(1/p)`. This keeps the critical scales (`x ~ p⁻²`,
//! `y ~ (1/p) ln(1/p)`) representable for densities far below `f64`'s
//! range. The raw-coordinate functions are thin wrappers.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialParams {
    /// `Λ = ln(1/p)`.
    pub log_inv_p: f64,
    /// `ξ = ⌈Λ²⌉`.
    pub xi: f64,
    /// `δ_ξ = 1 − 2/ξ`.
    pub delta_xi: f64,
}

impl PotentialParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
        }
        Self::from_log_inv_p(-p.ln())
    }

    /// Parameters for `p = e^{−Λ}`; valid even when `p` underflows.
    pub fn from_log_inv_p(log_inv_p: f64) -> Result<Self> {
        if !(log_inv_p > 0.0 && log_inv_p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ln(1/p) must be positive and finite, got {log_inv_p}"
            )));
        }
        let xi = (log_inv_p * log_inv_p).ceil().max(1.0);
        Ok(Self {
            log_inv_p,
            xi,
            delta_xi: 1.0 - 2.0 / xi,
        })
    }

    /// The density itself (0 once it underflows).
    pub fn p(&self) -> f64 {
        (-self.log_inv_p).exp()
    }

    /// `ln(3ξ²/p)`: start of ψ's logarithmic branch, in `X`.
    pub fn psi_knee(&self) -> f64 {
        self.log_inv_p + (3.0 * self.xi * self.xi).ln()
    }

    /// `ln(p⁻²)`: end of ψ's support, in `X`.
    pub fn psi_cutoff(&self) -> f64 {
        2.0 * self.log_inv_p
    }

    /// `4 ln ln(1/p)`: start of φ's support, in `Y`.
    pub fn phi_cutoff(&self) -> f64 {
        4.0 * self.log_inv_p.ln()
    }

    /// ψ at `x = e^X`. The two branches follow the two indicators of the
    /// definition literally: the constant branch for `x < 3ξ²/p`, the
    /// logarithmic branch for `3ξ²/p ≤ x ≤ p⁻²`, zero otherwise.
    pub fn psi_log(&self, x_log: f64) -> f64 {
        let l = self.log_inv_p;
        if x_log < self.psi_knee() {
            l - (24.0 * self.xi * self.xi + 8.0).ln() - 1.0 / self.xi
        } else if x_log <= self.psi_cutoff() {
            // −ln(8p²x + 8p) = Λ − ln 8 − ln(1 + px)
            l - 8f64.ln() - (x_log - l).exp().ln_1p() - 1.0 / self.xi
        } else {
            0.0
        }
    }

    /// φ at `y = Y/p`: `e^{−3Y}` above the cutoff, zero below.
    pub fn phi_scaled(&self, y_scaled: f64) -> f64 {
        if y_scaled > self.phi_cutoff() {
            (-3.0 * y_scaled).exp()
        } else {
            0.0
        }
    }

    /// `p ∫ φ(y) dx` along a horizontal move from `e^{X1}` to `e^{X2}` at
    /// height `Y`, i.e. `e^{−3Y}(e^{X2−Λ} − e^{X1−Λ})`, without overflow.
    ///
    /// A horizontal run exactly at the cutoff height is charged the limit
    /// from above. With the strict indicator such a run would be free, and
    /// every path from the bottom-left corner could slide along the cutoff
    /// line at no cost, which is not the intended functional.
    pub fn horizontal_cost(&self, y_scaled: f64, x1_log: f64, x2_log: f64) -> f64 {
        if y_scaled < self.phi_cutoff() || x2_log <= x1_log {
            return 0.0;
        }
        (x1_log - self.log_inv_p - 3.0 * y_scaled).exp() * (x2_log - x1_log).exp_m1()
    }

    /// `p ∫ ψ(x) dy` along a vertical move of scaled height `dy` at `X`.
    pub fn vertical_cost(&self, x_log: f64, dy_scaled: f64) -> f64 {
        self.psi_log(x_log) * dy_scaled
    }
}

/// ψ at raw width `x > 0`.
pub fn psi(x: f64, params: &PotentialParams) -> f64 {
    params.psi_log(x.ln())
}

/// φ at raw height `y`.
pub fn phi(y: f64, params: &PotentialParams) -> f64 {
    params.phi_scaled(params.p() * y)
}

/// `U^p = δ_ξ (t ψ(x+s) + s φ(y+t))` for a rectangle of dimensions
/// `inner = (x, y)` inside one of dimensions `outer = (x+s, y+t)`.
pub fn u_p(inner: (f64, f64), outer: (f64, f64), params: &PotentialParams) -> Result<f64> {
    let (s, t) = (outer.0 - inner.0, outer.1 - inner.1);
    if s < 0.0 || t < 0.0 {
        return Err(Error::NegativeGrowth { s, t });
    }
    let mut v = 0.0;
    if t > 0.0 {
        v += t * psi(outer.0, params);
    }
    if s > 0.0 {
        v += s * phi(outer.1, params);
    }
    Ok(params.delta_xi * v)
}

/// `p · U^p` in scaled coordinates.
pub fn u_p_scaled(inner: (f64, f64), outer: (f64, f64), params: &PotentialParams) -> Result<f64> {
    let (s, t) = (outer.0 - inner.0, outer.1 - inner.1);
    if s < 0.0 || t < 0.0 {
        return Err(Error::NegativeGrowth { s, t });
    }
    Ok(params.delta_xi
        * (params.vertical_cost(outer.0, t) + params.horizontal_cost(outer.1, inner.0, outer.0)))
}

/// A monotone polyline in the `(x, y)` plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthPath {
    pub points: Vec<(f64, f64)>,
}

impl GrowthPath {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let path = Self { points };
        path.validate()?;
        Ok(path)
    }

    /// Coordinate-wise non-decreasing with distinct consecutive points.
    pub fn validate(&self) -> Result<()> {
        for (i, w) in self.points.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            if b.0 < a.0 || b.1 < a.1 || a == b {
                return Err(Error::NonMonotonePath(i + 1));
            }
        }
        Ok(())
    }
}

/// `∫ −ln(8p²x + 8p) dx = −[(x + 1/p) ln(8p²(x + 1/p)) − x]`.
fn psi_mid_antiderivative(x: f64, p: f64) -> f64 {
    let z = x + 1.0 / p;
    -(z * (8.0 * p * p * z).ln() - x)
}

/// `∫_{x1}^{x2} ψ(x) dx` in closed form, split at the branch points.
fn psi_integral(x1: f64, x2: f64, params: &PotentialParams) -> f64 {
    let p = params.p();
    let knee = 3.0 * params.xi * params.xi / p;
    let cutoff = 1.0 / (p * p);
    let mut cuts = vec![x1];
    for c in [knee, cutoff] {
        if c > x1 && c < x2 {
            cuts.push(c);
        }
    }
    cuts.push(x2);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let mid = 0.5 * (a + b);
            if mid < knee {
                psi(mid, params) * (b - a)
            } else if mid <= cutoff {
                psi_mid_antiderivative(b, p) - psi_mid_antiderivative(a, p) - (b - a) / params.xi
            } else {
                0.0
            }
        })
        .sum()
}

/// `∫_{y1}^{y2} φ(y) dy` in closed form.
fn phi_integral(y1: f64, y2: f64, params: &PotentialParams) -> f64 {
    let p = params.p();
    let lo = y1.max(params.phi_cutoff() / p);
    if lo >= y2 {
        return 0.0;
    }
    ((-3.0 * p * lo).exp() - (-3.0 * p * y2).exp()) / (3.0 * p)
}

/// Exact line integral of `ψ(x) dy + φ(y) dx` along a straight segment.
pub fn segment_weight(a: (f64, f64), b: (f64, f64), params: &PotentialParams) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let vertical = if dy == 0.0 {
        0.0
    } else if dx == 0.0 {
        psi(a.0, params) * dy
    } else {
        dy / dx * psi_integral(a.0, b.0, params)
    };
    let horizontal = if dx == 0.0 {
        0.0
    } else if dy == 0.0 {
        let p = params.p();
        params.horizontal_cost(p * a.1, a.0.ln(), b.0.ln()) / p
    } else {
        dx / dy * phi_integral(a.1, b.1, params)
    };
    vertical + horizontal
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Segment integral by adaptive quadrature (pieces split at the
/// discontinuities of ψ and φ), tolerance `1e-9`.
pub fn segment_weight_quadrature(a: (f64, f64), b: (f64, f64), params: &PotentialParams) -> f64 {
    let p = params.p();
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let at = |s: f64| (a.0 + s * dx, a.1 + s * dy);
    let integrand = |s: f64| {
        let (x, y) = at(s);
        psi(x, params) * dy + phi(y, params) * dx
    };
    let mut cuts = vec![0.0, 1.0];
    if dx != 0.0 {
        for c in [3.0 * params.xi * params.xi / p, 1.0 / (p * p)] {
            let s = (c - a.0) / dx;
            if s > 0.0 && s < 1.0 {
                cuts.push(s);
            }
        }
    }
    if dy != 0.0 {
        let s = (params.phi_cutoff() / p - a.1) / dy;
        if s > 0.0 && s < 1.0 {
            cuts.push(s);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&integrand, w[0], w[1], 1e-9))
        .sum()
}

/// Weight of a monotone polyline, segment by segment in closed form.
pub fn path_weight(path: &GrowthPath, params: &PotentialParams) -> Result<f64> {
    path.validate()?;
    Ok(path
        .points
        .windows(2)
        .map(|w| segment_weight(w[0], w[1], params))
        .sum())
}

/// [`path_weight`] by adaptive quadrature.
pub fn path_weight_quadrature(path: &GrowthPath, params: &PotentialParams) -> Result<f64> {
    path.validate()?;
    Ok(path
        .points
        .windows(2)
        .map(|w| segment_weight_quadrature(w[0], w[1], params))
        .sum())
}

/// Weight (×p) of an axis-aligned staircase in scaled coordinates.
pub fn staircase_weight_scaled(points: &[(f64, f64)], params: &PotentialParams) -> Result<f64> {
    let mut total = 0.0;
    for (i, w) in points.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if b.0 < a.0 || b.1 < a.1 || (a.0 != b.0 && a.1 != b.1) {
            return Err(Error::NonMonotonePath(i + 1));
        }
        total += if a.0 == b.0 {
            params.vertical_cost(a.0, b.1 - a.1)
        } else {
            params.horizontal_cost(a.1, a.0, b.0)
        };
    }
    Ok(total)
}

/// Shortest monotone staircase between two scaled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledOptimum {
    /// `p · W`.
    pub weight: f64,
    /// Corner points `(X, Y)` from `a` to `b`.
    pub path: Vec<(f64, f64)>,
}

/// Dynamic programme over the `(n+1) × (n+1)` lattice spanned by `n`
/// equal steps in `X = ln x` and in `Y = p y`. Moves are unit steps right
/// or up; each edge costs its exact integral. Grids at `n` and `2n` are
/// nested, so the optimum can only decrease as `n` doubles.
pub fn w_min_scaled(
    a: (f64, f64),
    b: (f64, f64),
    params: &PotentialParams,
    grid_n: usize,
) -> Result<ScaledOptimum> {
    if !(a.0 <= b.0 && a.1 <= b.1) {
        return Err(Error::InvalidBox { lo: a, hi: b });
    }
    if grid_n < 64 {
        return Err(Error::InvalidParameter(format!("grid_n must be >= 64, got {grid_n}")));
    }
    if a == b {
        return Ok(ScaledOptimum {
            weight: 0.0,
            path: Vec::new(),
        });
    }
    let n = grid_n;
    let xs: Vec<f64> = (0..=n).map(|i| a.0 + (b.0 - a.0) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = (0..=n).map(|j| a.1 + (b.1 - a.1) * j as f64 / n as f64).collect();
    let dy = (b.1 - a.1) / n as f64;
    let vert: Vec<f64> = xs.iter().map(|&x| params.vertical_cost(x, dy)).collect();
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut cost = vec![f64::INFINITY; (n + 1) * (n + 1)];
    // 0 = came from the left, 1 = came from below.
    let mut from = vec![0u8; (n + 1) * (n + 1)];
    cost[0] = 0.0;
    for j in 0..=n {
        for i in 0..=n {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut dir = 0u8;
            if i > 0 {
                let c = cost[idx(i - 1, j)] + params.horizontal_cost(ys[j], xs[i - 1], xs[i]);
                if c < best {
                    best = c;
                    dir = 0;
                }
            }
            if j > 0 {
                let c = cost[idx(i, j - 1)] + vert[i];
                if c < best {
                    best = c;
                    dir = 1;
                }
            }
            cost[idx(i, j)] = best;
            from[idx(i, j)] = dir;
        }
    }
    let mut moves = Vec::with_capacity(2 * n);
    let (mut i, mut j) = (n, n);
    while i > 0 || j > 0 {
        let d = from[idx(i, j)];
        moves.push(d);
        if d == 0 {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    moves.reverse();
    let mut path = vec![(xs[0], ys[0])];
    let (mut i, mut j) = (0usize, 0usize);
    for (k, &d) in moves.iter().enumerate() {
        if d == 0 {
            i += 1;
        } else {
            j += 1;
        }
        let corner = k + 1 == moves.len() || moves[k + 1] != d;
        if corner {
            path.push((xs[i], ys[j]));
        }
    }
    Ok(ScaledOptimum {
        weight: cost[idx(n, n)],
        path,
    })
}

/// [`w_min_scaled`] in raw coordinates: returns `W` and the argmin path.
pub fn w_min(
    a: (f64, f64),
    b: (f64, f64),
    params: &PotentialParams,
    grid_n: usize,
) -> Result<(f64, GrowthPath)> {
    if !(a.0 <= b.0 && a.1 <= b.1) || a.0 <= 0.0 {
        return Err(Error::InvalidBox { lo: a, hi: b });
    }
    let p = params.p();
    let opt = w_min_scaled((a.0.ln(), p * a.1), (b.0.ln(), p * b.1), params, grid_n)?;
    let points = opt.path.iter().map(|&(x, y)| (x.exp(), y / p)).collect();
    Ok((opt.weight / p, GrowthPath { points }))
}

/// The trajectory `x(y) = e^{3py}/(3p)` on which `ψ'(x) = φ'(y)`, with
/// its endpoints `u = ((1/3p) Λ¹², (4/p) ln Λ)` and `v = (p⁻², (1/3p) ln(3/p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaCurve {
    pub params: PotentialParams,
    /// `u` in scaled coordinates `(X, Y)`.
    pub u_scaled: (f64, f64),
    /// `v` in scaled coordinates.
    pub v_scaled: (f64, f64),
}

impl DeltaCurve {
    /// `X(Y) = 3Y + Λ − ln 3`.
    pub fn x_log_of(&self, y_scaled: f64) -> f64 {
        3.0 * y_scaled + self.params.log_inv_p - 3f64.ln()
    }

    pub fn y_scaled_of(&self, x_log: f64) -> f64 {
        (x_log - self.params.log_inv_p + 3f64.ln()) / 3.0
    }

    /// Raw `x(y)`.
    pub fn x_of(&self, y: f64) -> f64 {
        self.x_log_of(self.params.p() * y).exp()
    }

    /// Raw `y(x)`.
    pub fn y_of(&self, x: f64) -> f64 {
        self.y_scaled_of(x.ln()) / self.params.p()
    }

    pub fn u(&self) -> (f64, f64) {
        let p = self.params.p();
        (self.u_scaled.0.exp(), self.u_scaled.1 / p)
    }

    pub fn v(&self) -> (f64, f64) {
        let p = self.params.p();
        (self.v_scaled.0.exp(), self.v_scaled.1 / p)
    }

    /// Whether `u ≤ v` coordinate-wise, i.e. the curve segment exists.
    pub fn is_ordered(&self) -> bool {
        self.u_scaled.0 <= self.v_scaled.0 && self.u_scaled.1 <= self.v_scaled.1
    }
}

pub fn delta_curve(params: &PotentialParams) -> DeltaCurve {
    let l = params.log_inv_p;
    DeltaCurve {
        params: *params,
        u_scaled: (12.0 * l.ln() - 3f64.ln() + l, 4.0 * l.ln()),
        v_scaled: (2.0 * l, (3f64.ln() + l) / 3.0),
    }
}

/// `p · ∫ ψ dy + φ dx` along Δ between scaled heights `y1 ≤ y2`. On Δ,
/// `φ(y) x'(y) = 1` wherever φ is non-zero.
pub fn delta_weight_scaled(params: &PotentialParams, y1: f64, y2: f64) -> f64 {
    let curve = delta_curve(params);
    let f = |y: f64| {
        params.psi_log(curve.x_log_of(y)) + if y > params.phi_cutoff() { 1.0 } else { 0.0 }
    };
    let mut cuts = vec![y1, y2];
    for x in [params.psi_knee(), params.psi_cutoff()] {
        let y = curve.y_scaled_of(x);
        if y > y1 && y < y2 {
            cuts.push(y);
        }
    }
    if params.phi_cutoff() > y1 && params.phi_cutoff() < y2 {
        cuts.push(params.phi_cutoff());
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-12))
        .sum()
}

/// Sum of `p · U^p` over the nested rectangles `(x(Y_k), Y_k)` of Δ at
/// `steps` equal scaled heights between `y1` and `y2`.
pub fn trajectory_sum_scaled(params: &PotentialParams, y1: f64, y2: f64, steps: usize) -> Result<f64> {
    let curve = delta_curve(params);
    let h = (y2 - y1) / steps as f64;
    let mut total = 0.0;
    for k in 0..steps {
        let ya = y1 + h * k as f64;
        let yb = ya + h;
        total += u_p_scaled(
            (curve.x_log_of(ya), ya),
            (curve.x_log_of(yb), yb),
            params,
        )?;
    }
    Ok(total)
}

/// The closed form `(1/6p) Λ² − (4/p) Λ ln Λ − (1/3p) ln(8/3e) Λ` of the
/// optimum between `u` and `v`, multiplied by `p`.
pub fn w_closed_scaled(params: &PotentialParams) -> f64 {
    let l = params.log_inv_p;
    l * l / 6.0 - 4.0 * l * l.ln() - (8.0 / (3.0 * std::f64::consts::E)).ln() / 3.0 * l
}

/// The closed form `(1/6p) Λ² − (4/p) Λ ln Λ − (1/3p) ln(8/3e) Λ`.
pub fn w_closed(params: &PotentialParams) -> Result<f64> {
    let p = params.p();
    if !(p < 0.2) {
        return Err(Error::Domain(format!("closed form needs p < 0.2, got {p}")));
    }
    Ok(w_closed_scaled(params) / p)
}

/// The entry contribution `−(ln(8p²u₁ + 8p) + 1/ξ)(u₂ − a₂)` for a start
/// height `a₂`, multiplied by `p`; its leading part is `4 Λ ln Λ`.
pub fn w_entry_scaled(params: &PotentialParams, a2_scaled: f64) -> f64 {
    let curve = delta_curve(params);
    let l = params.log_inv_p;
    let psi_u = l - 8f64.ln() - (curve.u_scaled.0 - l).exp().ln_1p() - 1.0 / params.xi;
    psi_u * (curve.u_scaled.1 - a2_scaled)
}

/// [`w_closed`] plus the entry contribution from height `a₂`.
pub fn w_closed_with_entry(params: &PotentialParams, a2: f64) -> Result<f64> {
    let p = params.p();
    Ok(w_closed(params)? + w_entry_scaled(params, p * a2) / p)
}

/// `X` of the vertical run of a staircase that covers scaled height `y`.
pub fn staircase_x_at(path: &[(f64, f64)], y: f64) -> Option<f64> {
    path.windows(2)
        .find(|w| w[0].0 == w[1].0 && w[0].1 < y && y <= w[1].1)
        .map(|w| w[0].0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> PotentialParams {
        PotentialParams::new(p).unwrap()
    }

    #[test]
    fn params_definitions() {
        let pp = params(0.05);
        assert_eq!(pp.xi, 9.0);
        assert!((pp.delta_xi - 7.0 / 9.0).abs() < 1e-15);
        assert!(PotentialParams::new(0.0).is_err());
        let tiny = PotentialParams::from_log_inv_p(1000.0).unwrap();
        assert_eq!(tiny.p(), 0.0);
        assert_eq!(tiny.xi, 1e6);
    }

    #[test]
    fn psi_branches_and_continuity() {
        let pp = params(1e-6);
        let p = pp.p();
        let knee = 3.0 * pp.xi * pp.xi / p;
        let left = psi(knee * (1.0 - 1e-12), &pp);
        let at = psi(knee, &pp);
        let direct = -((24.0 * p * pp.xi * pp.xi + 8.0 * p).ln() + 1.0 / pp.xi);
        assert!((left - direct).abs() < 1e-9 && (at - direct).abs() < 1e-9);
        assert_eq!(psi(1.0 / (p * p) * 1.01, &pp), 0.0);
        let x: f64 = 5e11;
        let raw = -((8.0 * p * p * x + 8.0 * p).ln() + 1.0 / pp.xi);
        assert!((psi(x, &pp) - raw).abs() < 1e-9);
    }

    #[test]
    fn phi_cutoff_and_value() {
        let pp = params(0.05);
        let l = 20f64.ln();
        assert_eq!(phi(3.0 / 0.05 * l.ln(), &pp), 0.0);
        let y = 5.0 / 0.05 * l.ln();
        assert!((phi(y, &pp) - (-3.0 * 0.05 * y).exp()).abs() < 1e-15);
    }

    #[test]
    fn u_p_cases() {
        let pp = params(0.01);
        assert_eq!(u_p((10.0, 5.0), (10.0, 5.0), &pp).unwrap(), 0.0);
        let y = 2000.0;
        let h = u_p((10.0, y), (30.0, y), &pp).unwrap();
        assert!((h - pp.delta_xi * 20.0 * phi(y, &pp)).abs() < 1e-15);
        assert!(matches!(
            u_p((10.0, 5.0), (9.0, 6.0), &pp),
            Err(Error::NegativeGrowth { .. })
        ));
    }

    #[test]
    fn segment_closed_form_matches_quadrature() {
        let pp = params(1e-4);
        let p = pp.p();
        let segs = [
            ((1e5, 10.0), (1e9, 8e4)),
            ((1e9, 2e4), (5e9, 2e4)),
            ((2e9, 1e3), (2e9, 9e4)),
            ((3e7, 5e4), (8e8, 6e4)),
            ((1.0 / (p * p) * 0.5, 3e4), (1.0 / (p * p) * 2.0, 9e4)),
        ];
        for (a, b) in segs {
            let exact = segment_weight(a, b, &pp);
            let quad = segment_weight_quadrature(a, b, &pp);
            assert!((exact - quad).abs() < 1e-6 * exact.abs().max(1.0), "{a:?}->{b:?}: {exact} vs {quad}");
        }
    }

    #[test]
    fn path_validation() {
        assert!(matches!(
            GrowthPath::new(vec![(1.0, 1.0), (0.5, 2.0)]),
            Err(Error::NonMonotonePath(1))
        ));
        assert!(GrowthPath::new(vec![(1.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn delta_curve_endpoints() {
        let pp = params(1e-22);
        let c = delta_curve(&pp);
        let p = pp.p();
        let l = pp.log_inv_p;
        assert!((c.y_of(1.0 / (p * p)) * 3.0 * p / (3.0 / p).ln() - 1.0).abs() < 1e-12);
        let y = 4.0 / p * l.ln();
        assert!((c.x_of(y) * 3.0 * p / l.powi(12) - 1.0).abs() < 1e-12);
        assert!(c.is_ordered());
        assert!(!delta_curve(&params(0.05)).is_ordered());
    }

    #[test]
    fn dp_degenerate_and_invalid_boxes() {
        let pp = params(1e-22);
        let o = w_min_scaled((50.0, 16.0), (50.0, 16.0), &pp, 64).unwrap();
        assert_eq!(o.weight, 0.0);
        assert!(o.path.is_empty());
        assert!(matches!(
            w_min_scaled((51.0, 16.0), (50.0, 17.0), &pp, 64),
            Err(Error::InvalidBox { .. })
        ));
    }

    #[test]
    fn closed_form_leading_ratio_tends_to_one() {
        let mut prev = f64::NEG_INFINITY;
        for l in [10.0, 100.0, 1e3, 1e5] {
            let pp = PotentialParams::from_log_inv_p(l).unwrap();
            let r = w_closed_scaled(&pp) * 6.0 / (l * l);
            assert!(r > prev, "ratio should grow towards 1 as p falls");
            prev = r;
        }
        assert!(prev > 0.99 && prev < 1.0);
        // Second term negative, third positive because ln(8/3e) < 0.
        let l = 20f64.ln();
        assert!(-4.0 * l * l.ln() < 0.0);
        assert!(-(8.0 / (3.0 * std::f64::consts::E)).ln() / 3.0 * l > 0.0);
    }
}
