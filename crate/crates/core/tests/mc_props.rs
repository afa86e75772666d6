use bootlab::exact::{event_prob_exhaustive, hor_trav_prob_exact};
use bootlab::lattice::{ClosureWorkspace, EventKind, Grid, NeighbourhoodRule, Rect};
use bootlab::mc::{
    estimate_event, sample_seeds, tally, EstimateRecord, EventSpec, McEstimate, TrialPlan,
};
use proptest::prelude::*;

fn plan(event: EventSpec, trials: u64, seed: u64) -> TrialPlan {
    TrialPlan {
        master_seed: seed,
        trials,
        event,
        parallel_width: 2,
    }
}

#[test]
fn wilson_intervals_cover_exact_values() {
    let rule = NeighbourhoodRule::anisotropic_12();
    let cases = [
        (EventSpec::new(rule.clone(), 20, 5, EventKind::HorTrav, 0.15), hor_trav_prob_exact(20, 5, 0.15).unwrap()),
        (
            EventSpec::new(rule.clone(), 5, 3, EventKind::UpTrav, 0.2),
            event_prob_exhaustive(&Rect::with_dims(5, 3), 0.2, EventKind::UpTrav).unwrap(),
        ),
    ];
    for (event, truth) in cases {
        let covered = (0..100)
            .filter(|&rep| estimate_event(&plan(event.clone(), 2_000, 1000 + rep)).unwrap().covers(truth))
            .count();
        assert!(covered >= 90, "{covered}/100 for {:?}", event.kind);
    }
}

#[test]
fn fkg_for_disjoint_row_bands() {
    // A = bottom band up-traversable, B = top band up-traversable; both
    // increasing, so P(A ∩ B) ≥ P(A) P(B).
    let rule = NeighbourhoodRule::anisotropic_12();
    let (w, h, p) = (8usize, 4usize, 0.3);
    let n = 20_000u64;
    let (mut a, mut b, mut ab) = (0u64, 0u64, 0u64);
    let mut ws = ClosureWorkspace::new();
    for i in 0..n {
        let seeds = sample_seeds(w, h, p, 77, i);
        let band = |y0: usize, ws: &mut ClosureWorkspace| {
            let mut g = Grid::bounded(w, 3);
            for x in 0..w {
                g.set(x, 0, true);
                for dy in 0..2 {
                    if seeds.get(x, y0 + dy) {
                        g.set(x, dy + 1, true);
                    }
                }
            }
            ws.fills(&g, &rule)
        };
        let (ea, eb) = (band(0, &mut ws), band(2, &mut ws));
        a += ea as u64;
        b += eb as u64;
        ab += (ea && eb) as u64;
    }
    let (pa, pb, pab) = (a as f64 / n as f64, b as f64 / n as f64, ab as f64 / n as f64);
    let sigma = (pab * (1.0 - pab) / n as f64).sqrt();
    assert!(pab >= pa * pb - 3.0 * sigma, "{pab} < {pa}*{pb}");
}

#[test]
fn records_serialize_as_json_lines() {
    let ev = EventSpec::new(NeighbourhoodRule::anisotropic_12(), 6, 3, EventKind::UpTrav, 0.4);
    let est = estimate_event(&plan(ev.clone(), 100, 5)).unwrap();
    let line = EstimateRecord::new(&ev, &est, 5).to_json_line();
    let v: serde_json::Value = serde_json::from_str(&line).unwrap();
    for key in ["event", "p", "L", "trials", "successes", "ci_lo", "ci_hi", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["event"], "up_trav");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tallies_split_anywhere(cut in 0u64..300, seed in any::<u64>()) {
        let ev = EventSpec::new(NeighbourhoodRule::anisotropic_12(), 7, 3, EventKind::UpTrav, 0.35);
        prop_assert_eq!(tally(&ev, seed, 0, 300), tally(&ev, seed, 0, cut) + tally(&ev, seed, cut, 300));
    }

    #[test]
    fn wilson_interval_brackets_point_estimate(s in 0u64..1000, extra in 0u64..1000) {
        let n = s + extra.max(1);
        let e = McEstimate::from_counts(s, n);
        prop_assert!(e.ci_lo <= e.p_hat && e.p_hat <= e.ci_hi);
        prop_assert!(e.ci_lo >= 0.0 && e.ci_hi <= 1.0);
    }
}
