use bootlab::variational::{
    delta_curve, delta_weight_scaled, path_weight, path_weight_quadrature, phi, psi,
    staircase_weight_scaled, staircase_x_at, trajectory_sum_scaled, u_p, w_min, w_min_scaled,
    GrowthPath, PotentialParams,
};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// `ln(1/p)` for `p = 1e-22`, where the trajectory segment between `u`
/// and `v` is non-degenerate.
const L22: f64 = 50.656_872_045_869_03;

fn tiny() -> PotentialParams {
    PotentialParams::from_log_inv_p(L22).unwrap()
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn psi_and_phi_are_non_increasing_and_convex() {
    for p in [0.05, 1e-4, 1e-10] {
        let pp = PotentialParams::new(p).unwrap();
        let knee = 3.0 * pp.xi * pp.xi / p;
        let cutoff = 1.0 / (p * p);
        if knee < cutoff {
            let n = 400;
            let xs: Vec<f64> = (0..=n)
                .map(|i| knee * (cutoff / knee).powf(i as f64 / n as f64))
                .collect();
            for w in xs.windows(3) {
                let (a, b, c) = (psi(w[0], &pp), psi(w[1], &pp), psi(w[2], &pp));
                assert!(b <= a + 1e-12);
                let lam = (w[2] - w[1]) / (w[2] - w[0]);
                assert!(b <= lam * a + (1.0 - lam) * c + 1e-9, "convexity at {}", w[1]);
            }
        }
        let y0 = pp.phi_cutoff() / p;
        let ys: Vec<f64> = (1..=300).map(|i| y0 * (1.0 + i as f64 / 100.0)).collect();
        for w in ys.windows(3) {
            let (a, b, c) = (phi(w[0], &pp), phi(w[1], &pp), phi(w[2], &pp));
            assert!(b <= a && b >= 0.0);
            assert!(b <= 0.5 * (a + c) + 1e-15);
        }
    }
}

#[test]
fn psi_sign_changes_where_the_logarithm_does() {
    // ψ < 0 once 8p²x + 8p exceeds e^{-1/ξ}, i.e. just below x = p⁻²/8.
    let pp = PotentialParams::new(1e-6).unwrap();
    let p = pp.p();
    let zero = ((-1.0 / pp.xi).exp() - 8.0 * p) / (8.0 * p * p);
    assert!(psi(zero * 0.999, &pp) > 0.0);
    assert!(psi(zero * 1.001, &pp) < 0.0);
    assert!(psi(1.0 / (p * p), &pp) < 0.0);
}

#[test]
fn quadrature_cross_checks_exact_path_weight() {
    let pp = PotentialParams::new(1e-4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let mut pts = vec![(1e3, 0.0)];
        for _ in 0..6 {
            let (x, y) = *pts.last().unwrap();
            pts.push((x * (1.0 + 5.0 * unit(&mut rng)), y + 2e4 * unit(&mut rng) + 1.0));
        }
        let g = GrowthPath::new(pts).unwrap();
        let a = path_weight(&g, &pp).unwrap();
        let b = path_weight_quadrature(&g, &pp).unwrap();
        assert!((a - b).abs() < 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn single_segments_have_the_closed_form() {
    let pp = PotentialParams::new(0.01).unwrap();
    let (a, b) = ((100.0, 3000.0), (900.0, 3000.0));
    let w = path_weight(&GrowthPath::new(vec![a, b]).unwrap(), &pp).unwrap();
    assert!((w - phi(3000.0, &pp) * 800.0).abs() < 1e-12);
    let (a, b) = ((5e4, 10.0), (5e4, 90.0));
    let w = path_weight(&GrowthPath::new(vec![a, b]).unwrap(), &pp).unwrap();
    assert!((w - psi(5e4, &pp) * 80.0).abs() < 1e-9);
    // L-path: horizontal at constant φ, then vertical at the far column.
    let g = GrowthPath::new(vec![(100.0, 3000.0), (900.0, 3000.0), (900.0, 3500.0)]).unwrap();
    let closed = phi(3000.0, &pp) * 800.0 + psi(900.0, &pp) * 500.0;
    assert!((path_weight(&g, &pp).unwrap() - closed).abs() < 1e-9);
}

#[test]
fn dp_tracks_delta_at_tiny_density() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let opt = w_min_scaled(c.u_scaled, c.v_scaled, &pp, 512).unwrap();
    let (y1, y2) = (c.u_scaled.1, c.v_scaled.1);
    for k in 0..200 {
        let y = y1 + (y2 - y1) * (0.1 + 0.8 * (k as f64 + 0.5) / 200.0);
        let x = staircase_x_at(&opt.path, y).unwrap();
        assert!(((x - c.x_log_of(y)).exp() - 1.0).abs() < 0.05);
    }
    let along = delta_weight_scaled(&pp, y1, y2);
    assert!(opt.weight >= along - 1e-9);
    assert!((opt.weight - along) / along.abs() < 0.02);
}

#[test]
fn dp_converges_from_above_on_nested_grids() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let mut prev = f64::INFINITY;
    for n in [64, 128, 256, 512, 1024] {
        let w = w_min_scaled(c.u_scaled, c.v_scaled, &pp, n).unwrap().weight;
        assert!(w <= prev + 1e-12);
        if n == 1024 {
            assert!((prev - w) / w.abs() < 0.01);
        }
        prev = w;
    }
}

#[test]
fn delta_is_stationary_for_the_potentials() {
    // ψ'(x(y)) x'(y) and φ'(y) must agree; compare relative to |φ'|.
    let pp = tiny();
    let c = delta_curve(&pp);
    let p = pp.p();
    let (y1, y2) = (c.u().1, c.v().1);
    for k in 0..100 {
        let y = y1 + (y2 - y1) * (k as f64 + 0.5) / 100.0;
        let x = c.x_of(y);
        let dpsi = -1.0 / (x + 1.0 / p);
        let dphi = -3.0 * p * phi(y, &pp);
        assert!(((dpsi - dphi) / dphi).abs() < 1e-9);
    }
}

/// Below φ's cutoff horizontal moves are free, and beyond `p⁻²` vertical
/// moves cost nothing, so any start strictly below `u` reaches any end
/// right of `v` at weight `≤ 0`. The split is therefore checked with `a`
/// level with `u` and `b` directly above `v`.
#[test]
fn decomposition_through_u_and_v() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let (u, v) = (c.u_scaled, c.v_scaled);
    let a = (u.0 - 3.0, u.1);
    let b = (v.0, v.1 + 1.0);
    let n = 512;
    let whole = w_min_scaled(a, b, &pp, n).unwrap().weight;
    let parts = w_min_scaled(a, u, &pp, n).unwrap().weight
        + w_min_scaled(u, v, &pp, n).unwrap().weight
        + w_min_scaled(v, b, &pp, n).unwrap().weight;
    assert!((whole - parts).abs() <= 0.02 * parts.abs(), "{whole} vs {parts}");
    let below = (u.0 - 3.0, u.1 - 1.0);
    let right = (v.0 + 1.0, v.1 + 1.0);
    assert!(w_min_scaled(below, right, &pp, 128).unwrap().weight <= 0.0);
}

#[test]
fn subadditivity_on_random_triples() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let lo = c.u_scaled;
        let span = (c.v_scaled.0 - lo.0, c.v_scaled.1 - lo.1);
        let mut pts: Vec<(f64, f64)> = (0..3)
            .map(|_| (lo.0 + span.0 * unit(&mut rng), lo.1 + span.1 * unit(&mut rng)))
            .collect();
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        pts = xs.into_iter().zip(ys).collect();
        let w = |a, b| w_min_scaled(a, b, &pp, 256).unwrap().weight;
        let direct = w(pts[0], pts[2]);
        let via = w(pts[0], pts[1]) + w(pts[1], pts[2]);
        assert!(direct <= via + 1e-3 * via.abs().max(1.0), "{direct} > {via}");
    }
}

/// Monotone staircase from `u` to `v` whose corners sit left of Δ; `shrink`
/// pulls every corner further left.
fn staircase_left_of_delta(levels: &[f64], s: &[f64], shrink: &[f64]) -> Vec<(f64, f64)> {
    let pp = tiny();
    let c = delta_curve(&pp);
    let (u, v) = (c.u_scaled, c.v_scaled);
    let mut pts = vec![u];
    let mut x = u.0;
    for (i, &y) in levels.iter().enumerate() {
        pts.push((x, y));
        x = x.max(u.0 + (c.x_log_of(y) - u.0) * s[i] * shrink[i]);
        pts.push((x, y));
    }
    pts.push((x, v.1));
    pts.push(v);
    pts.dedup();
    pts
}

#[test]
fn northwest_dominance_on_random_staircases() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..100 {
        let k = 2 + (rng.next_u32() % 8) as usize;
        let mut levels: Vec<f64> = (0..k)
            .map(|_| c.u_scaled.1 + (c.v_scaled.1 - c.u_scaled.1) * unit(&mut rng))
            .collect();
        levels.sort_by(f64::total_cmp);
        let s: Vec<f64> = (0..k).map(|_| unit(&mut rng)).collect();
        let t: Vec<f64> = (0..k).map(|_| unit(&mut rng)).collect();
        let ones = vec![1.0; k];
        let g2 = staircase_left_of_delta(&levels, &s, &ones);
        let g1 = staircase_left_of_delta(&levels, &s, &t);
        let w1 = staircase_weight_scaled(&g1, &pp).unwrap();
        let w2 = staircase_weight_scaled(&g2, &pp).unwrap();
        assert!(w1 >= w2 - 1e-9 * w2.abs(), "{w1} < {w2}");
    }
}

#[test]
fn trajectory_sums_approach_the_delta_integral() {
    let pp = tiny();
    let c = delta_curve(&pp);
    let (y1, y2) = (c.u_scaled.1, c.v_scaled.1);
    let target = pp.delta_xi * delta_weight_scaled(&pp, y1, y2);
    let coarse = trajectory_sum_scaled(&pp, y1, y2, 1_000).unwrap();
    let fine = trajectory_sum_scaled(&pp, y1, y2, 100_000).unwrap();
    assert!((fine - target).abs() < (coarse - target).abs() + 1e-12);
    assert!((fine - target).abs() / target.abs() < 0.05);
    // Unit-height steps at a moderate density, where only ψ contributes.
    let pp = PotentialParams::new(0.05).unwrap();
    let m = ((3.0f64 / 0.05).ln() / 0.15).ceil();
    let sum = trajectory_sum_scaled(&pp, 0.05, 0.05 * m, (m - 1.0) as usize).unwrap();
    let integral = pp.delta_xi * delta_weight_scaled(&pp, 0.05, 0.05 * m);
    assert!((sum - integral).abs() / integral.abs() < 0.05);
}

#[test]
fn raw_w_min_wraps_the_scaled_programme() {
    let pp = PotentialParams::new(0.001).unwrap();
    let (w, path) = w_min((1e4, 500.0), (1e6, 3000.0), &pp, 128).unwrap();
    let scaled = w_min_scaled((1e4f64.ln(), 0.5), (1e6f64.ln(), 3.0), &pp, 128).unwrap();
    assert!((w - scaled.weight / 0.001).abs() < 1e-6 * w.abs().max(1.0));
    assert_eq!(path.points.len(), scaled.path.len());
    assert!(w_min((0.0, 1.0), (1.0, 2.0), &pp, 128).is_err());
}

proptest! {
    #[test]
    fn u_p_is_additive_along_a_column(x in 1e3f64..1e5, y in 0.0f64..5e3, t1 in 0.0f64..500.0, t2 in 0.0f64..500.0) {
        let pp = PotentialParams::new(1e-3).unwrap();
        let a = u_p((x, y), (x, y + t1), &pp).unwrap();
        let b = u_p((x, y + t1), (x, y + t1 + t2), &pp).unwrap();
        let ab = u_p((x, y), (x, y + t1 + t2), &pp).unwrap();
        prop_assert!((a + b - ab).abs() <= 1e-9 * ab.abs().max(1.0));
    }
}
