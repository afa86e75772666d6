use crate::error::{Error, Result};
use crate::lattice::{EventKind, NeighbourhoodRule, Rect, SmallBoard};
use crate::par;

/// Largest rectangle (in sites) the exhaustive oracle accepts.
pub const MAX_EXHAUSTIVE_CELLS: u64 = 24;

const CHUNK_BITS: u32 = 14;

/// Number of seed subsets of a `width × height` rectangle of each
/// cardinality for which `event` holds. Entry `k` counts subsets of size
/// `k`, so the event probability is `Σ counts[k] p^k (1−p)^{n−k}`.
pub fn event_counts(
    width: u64,
    height: u64,
    event: EventKind,
    rule: &NeighbourhoodRule,
) -> Result<Vec<u64>> {
    let n = width * height;
    if width == 0 || height == 0 {
        return Err(Error::InvalidParameter("empty rectangle".into()));
    }
    if n > MAX_EXHAUSTIVE_CELLS {
        return Err(Error::InstanceTooLarge(format!(
            "{width}x{height} has {n} cells; exhaustive limit is {MAX_EXHAUSTIVE_CELLS}"
        )));
    }
    let layout = event.layout(width as usize, height as usize);
    let board = SmallBoard::new(layout.width as u32, layout.height as u32, rule)?;
    let mut boundary = 0u128;
    for y in 0..layout.height {
        for x in 0..layout.width {
            if layout.is_boundary(x, y) {
                boundary |= board.bit(x as u32, y as u32);
            }
        }
    }
    // Byte-indexed lookup tables scatter subset bits onto board bits.
    let cell_bits: Vec<u128> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| {
            board.bit(
                (x as usize + layout.origin.0) as u32,
                (y as usize + layout.origin.1) as u32,
            )
        })
        .collect();
    let tables: Vec<[u128; 256]> = (0..3)
        .map(|byte| {
            let mut t = [0u128; 256];
            for (v, slot) in t.iter_mut().enumerate() {
                for bit in 0..8 {
                    let idx = byte * 8 + bit;
                    if v >> bit & 1 == 1 && idx < cell_bits.len() {
                        *slot |= cell_bits[idx];
                    }
                }
            }
            t
        })
        .collect();
    let n = n as u32;
    let total: u64 = 1 << n;
    let chunk = 1u64 << CHUNK_BITS.min(n);
    let chunks = (total / chunk) as usize;
    let full = board.full();
    let counts = par::map_reduce(
        chunks,
        || vec![0u64; n as usize + 1],
        |c| {
            let mut local = vec![0u64; n as usize + 1];
            let start = c as u64 * chunk;
            for s in start..start + chunk {
                let m = boundary
                    | tables[0][(s & 0xff) as usize]
                    | tables[1][(s >> 8 & 0xff) as usize]
                    | tables[2][(s >> 16 & 0xff) as usize];
                if board.closure(m) == full {
                    local[s.count_ones() as usize] += 1;
                }
            }
            local
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    Ok(counts)
}

/// Evaluates `Σ counts[k] p^k (1−p)^{n−k}`.
pub fn probability_from_counts(counts: &[u64], p: f64) -> f64 {
    let n = counts.len() as i32 - 1;
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi(n - k as i32))
        .sum()
}

/// Exact probability of `event` on `rect` under the `(1,2)` rule,
/// summing over every seed subset of the rectangle.
pub fn event_prob_exhaustive(rect: &Rect, p: f64, event: EventKind) -> Result<f64> {
    event_prob_exhaustive_with(rect, p, event, &NeighbourhoodRule::anisotropic_12())
}

pub fn event_prob_exhaustive_with(
    rect: &Rect,
    p: f64,
    event: EventKind,
    rule: &NeighbourhoodRule,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0,1], got {p}")));
    }
    let counts = event_counts(rect.width(), rect.height(), event, rule)?;
    Ok(probability_from_counts(&counts, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::hor_trav_prob_exact;

    #[test]
    fn full_density_fills() {
        let rect = Rect::with_dims(4, 3);
        let v = event_prob_exhaustive(&rect, 1.0, EventKind::InternallyFilled).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn hor_trav_agrees_with_chain() {
        for (x, y) in [(3, 1), (5, 2), (7, 3), (4, 4)] {
            for p in [0.1, 0.5, 0.8] {
                let e = event_prob_exhaustive(&Rect::with_dims(x, y), p, EventKind::HorTrav).unwrap();
                let d = hor_trav_prob_exact(x, y, p).unwrap();
                assert!((e - d).abs() < 1e-12, "{x}x{y} p={p}: {e} vs {d}");
            }
        }
    }

    #[test]
    fn up_and_down_counts_coincide() {
        let rule = NeighbourhoodRule::anisotropic_12();
        for (x, y) in [(4, 2), (5, 3), (3, 4)] {
            assert_eq!(
                event_counts(x, y, EventKind::UpTrav, &rule).unwrap(),
                event_counts(x, y, EventKind::DownTrav, &rule).unwrap()
            );
        }
    }

    #[test]
    fn cap_enforced() {
        let r = Rect::with_dims(5, 5);
        assert!(matches!(
            event_prob_exhaustive(&r, 0.5, EventKind::UpTrav),
            Err(Error::InstanceTooLarge(_))
        ));
    }
}
