use bootlab::asymptotics::f_of;
use bootlab::exact::{
    event_counts, event_prob_exhaustive, hor_trav_prob_exact, no_empty_triple_prob,
    probability_from_counts, RectOracle,
};
use bootlab::lattice::{event_holds, EventKind, Grid, NeighbourhoodRule, Rect};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[test]
fn exhaustive_hor_trav_equals_chain_up_to_six_by_three() {
    for w in 1..=6u64 {
        for h in 1..=3u64 {
            for p in [0.05, 0.2, 0.5, 0.8] {
                let ex = event_prob_exhaustive(&Rect::with_dims(w, h), p, EventKind::HorTrav).unwrap();
                let dp = hor_trav_prob_exact(w, h, p).unwrap();
                assert!((ex - dp).abs() < 1e-12, "{w}x{h} p={p}: {ex} vs {dp}");
            }
        }
    }
}

#[test]
fn exhaustive_counts_match_direct_evaluation() {
    let rule = NeighbourhoodRule::anisotropic_12();
    let (w, h) = (4usize, 3usize);
    for kind in EventKind::ALL {
        let counts = event_counts(w as u64, h as u64, kind, &rule).unwrap();
        let mut direct = vec![0u64; w * h + 1];
        for mask in 0u32..1 << (w * h) {
            let cells: Vec<(usize, usize)> =
                (0..w * h).filter(|i| mask >> i & 1 == 1).map(|i| (i % w, i / w)).collect();
            let g = Grid::from_cells(w, h, &cells).unwrap();
            if event_holds(kind, &Rect::with_dims(w as u64, h as u64), &g, &rule) {
                direct[cells.len()] += 1;
            }
        }
        assert_eq!(counts, direct, "{kind:?}");
        assert!((probability_from_counts(&counts, 1.0) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn traversal_characterisation_on_random_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    let mut traversable = 0;
    while checked < 10_000 {
        let w = 2 + (rng.next_u32() % 5);
        let h = 1 + (rng.next_u32() % 4);
        let oracle = RectOracle::new(w, h).unwrap();
        let density = (rng.next_u32() % 1000) as f64 / 1000.0;
        let mut s = 0u128;
        for y in 0..h {
            for x in 0..w {
                if ((rng.next_u32() % 1000) as f64) < density * 1000.0 {
                    s |= oracle.bit(x, y);
                }
            }
        }
        let up = oracle.up_traversable(s);
        let spans = oracle.spans_every_row(oracle.closure(s));
        assert_eq!(up, spans, "{w}x{h} seeds {s:#b}");
        traversable += up as u32;
        checked += 1;
    }
    assert!(traversable > 500 && traversable < 9_500);
}

/// The traversal probability sits below `e^{-(x-2)f}` everywhere on the grid.
/// The matching lower bound `e^{-xf}` holds for the relaxed event without
/// the rightmost-column condition; for traversal itself it is off by the
/// constant prefactor of the chain (checked in the acceptance target).
#[test]
fn hor_trav_bounds_on_grid() {
    for p in [0.05, 0.1, 0.2] {
        for y in 1..=40u64 {
            let f = f_of(p, y as f64);
            for x in 3..=200u64 {
                let v = hor_trav_prob_exact(x, y, p).unwrap();
                let relaxed = no_empty_triple_prob(x, y, p).unwrap();
                let lo = (-(x as f64) * f).exp();
                let hi = (-((x - 2) as f64) * f).exp();
                assert!(v <= hi * (1.0 + 1e-12), "upper x={x} y={y} p={p}");
                assert!(relaxed <= hi * (1.0 + 1e-12), "relaxed upper x={x} y={y} p={p}");
                assert!(lo <= relaxed * (1.0 + 1e-12), "relaxed lower x={x} y={y} p={p}");
            }
        }
    }
}

#[test]
fn successive_ratios_converge_to_root() {
    for p in [0.05, 0.1, 0.2] {
        for y in [1u64, 5, 20] {
            let u = 1.0 - (1.0f64 - p).powi(y as i32);
            let r = hor_trav_prob_exact(201, y, p).unwrap() / hor_trav_prob_exact(200, y, p).unwrap();
            let a = bootlab::asymptotics::alpha(u);
            assert!((r / a - 1.0).abs() < 1e-6, "p={p} y={y}: {r} vs {a}");
        }
    }
}

proptest! {
    #[test]
    fn hor_trav_is_monotone_in_p_and_width(x in 1u64..60, y in 1u64..10, p in 0.01f64..0.9) {
        let a = hor_trav_prob_exact(x, y, p).unwrap();
        let b = hor_trav_prob_exact(x, y, (p + 0.05).min(1.0)).unwrap();
        let c = hor_trav_prob_exact(x + 1, y, p).unwrap();
        prop_assert!(b >= a - 1e-15);
        prop_assert!(c <= a + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

/// Growth configurations by a one-dimensional simulation of the row above
/// a fully infected row: an empty site is infected once it sees `b` row
/// sites within distance `b`, counting the site directly above it.
fn growth_classes_by_row_simulation(b: i64) -> usize {
    let fills = |row: &[i64], above: bool| -> bool {
        let span = 6 * b;
        let mut inf: std::collections::BTreeSet<i64> = row.iter().copied().collect();
        loop {
            let before = inf.len();
            for x in -span..=span {
                if inf.contains(&x) {
                    continue;
                }
                let seen = (1..=b).flat_map(|d| [x - d, x + d]).filter(|y| inf.contains(y)).count()
                    + (above && x == 0) as usize;
                if seen >= b as usize {
                    inf.insert(x);
                }
            }
            if inf.len() == before {
                return (-span..=span).all(|x| inf.contains(&x));
            }
        }
    };
    let positions: Vec<i64> = (-b..=b).filter(|&d| d != 0).collect();
    let mut classes = std::collections::BTreeSet::new();
    for above in [false, true] {
        let k = (b - above as i64) as usize;
        for row in subsets_of_size(&positions, k) {
            if fills(&row, above) {
                let mut cells: Vec<(i64, i64)> = row.iter().map(|&x| (x, 0)).collect();
                if above {
                    cells.push((0, 1));
                }
                let m = cells.iter().map(|c| c.0).min().unwrap();
                let mut shape: Vec<(i64, i64)> = cells.iter().map(|&(x, y)| (x - m, y)).collect();
                shape.sort_unstable();
                classes.insert(shape);
            }
        }
    }
    classes.len()
}

fn subsets_of_size(items: &[i64], k: usize) -> Vec<Vec<i64>> {
    (0u32..1 << items.len())
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..items.len()).filter(|i| m >> i & 1 == 1).map(|i| items[i]).collect())
        .collect()
}

#[test]
fn growth_configurations_match_row_simulation() {
    for b in 2..=5u32 {
        let direct = growth_classes_by_row_simulation(b as i64);
        assert_eq!(bootlab::exact::enumerate_growth_configs(b).unwrap().count, direct, "b={b}");
    }
    assert_eq!(growth_classes_by_row_simulation(4), 97);
}
