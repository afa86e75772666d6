use itertools::Itertools;
use serde::Serialize;

use super::exhaustive::MAX_EXHAUSTIVE_CELLS;
use super::spanning::RectOracle;
use crate::error::{Error, Result};
use crate::lattice::{bits, Grid, Rect};

pub type Cell = (i64, i64);

struct Local {
    rect: Rect,
    oracle: RectOracle,
}

impl Local {
    fn new(rect: &Rect) -> Result<Self> {
        if rect.area() > MAX_EXHAUSTIVE_CELLS {
            return Err(Error::InstanceTooLarge(format!(
                "{}x{} rectangle exceeds {MAX_EXHAUSTIVE_CELLS} cells",
                rect.width(),
                rect.height()
            )));
        }
        Ok(Self {
            rect: *rect,
            oracle: RectOracle::new(rect.width() as u32, rect.height() as u32)?,
        })
    }

    fn bit(&self, c: Cell) -> u128 {
        self.oracle
            .bit((c.0 - self.rect.x0) as u32, (c.1 - self.rect.y0) as u32)
    }

    fn cell(&self, local: (u32, u32)) -> Cell {
        (local.0 as i64 + self.rect.x0, local.1 as i64 + self.rect.y0)
    }

    fn mask(&self, cells: &[Cell]) -> u128 {
        cells.iter().fold(0, |m, &c| m | self.bit(c))
    }
}

fn seeds_in_rect(rect: &Rect, seeds: &Grid) -> Vec<Cell> {
    let mut v: Vec<Cell> = seeds
        .iter_occupied()
        .map(|(x, y)| (x as i64, y as i64))
        .filter(|&(x, y)| rect.contains(x, y))
        .collect();
    v.sort_by_key(|&(x, y)| (y, x));
    v
}

/// A minimum-size subset of `seeds ∩ rect` by which `rect` is
/// up-traversable (full row below adjoined). Ties go to the
/// lexicographically least subset in row-major order.
pub fn minimal_up_traversable_subset(rect: &Rect, seeds: &Grid) -> Result<Vec<Cell>> {
    let local = Local::new(rect)?;
    minimal_subset(&local, &seeds_in_rect(rect, seeds))
}

fn minimal_subset(local: &Local, seeds: &[Cell]) -> Result<Vec<Cell>> {
    if !local.oracle.up_traversable(local.mask(seeds)) {
        return Err(Error::NotTraversable);
    }
    for k in 0..=seeds.len() {
        for combo in (0..seeds.len()).combinations(k) {
            let m = combo.iter().fold(0, |m, &i| m | local.bit(seeds[i]));
            if local.oracle.up_traversable(m) {
                return Ok(combo.into_iter().map(|i| seeds[i]).collect());
            }
        }
    }
    unreachable!("the full seed set is traversable")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowPair {
    pub row: i64,
    pub pair: [Cell; 2],
    /// Generation at which the later of the two sites appeared; 0 when the
    /// pair is present in the minimal set itself.
    pub created_at: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningReport {
    pub tau: u32,
    pub minimal_set: Vec<Cell>,
    pub per_row_pairs: Vec<RowPair>,
}

/// First `t` at which `B^t(A)` contains a spanning pair for every row of
/// `rect`, where `A` is [`minimal_up_traversable_subset`].
pub fn spanning_time(rect: &Rect, seeds: &Grid) -> Result<SpanningReport> {
    let local = Local::new(rect)?;
    let a = minimal_subset(&local, &seeds_in_rect(rect, seeds))?;
    let board = local.oracle.board();
    let mut born = vec![u32::MAX; 128];
    let mut s = local.mask(&a);
    for i in bits(s) {
        born[i as usize] = 0;
    }
    let mut t = 0u32;
    while !local.oracle.spans_every_row(s) {
        let next = board.step(s);
        if next == s {
            return Err(Error::StructureViolation(
                "traversable set whose closure misses a spanning pair".into(),
            ));
        }
        t += 1;
        for i in bits(next & !s) {
            born[i as usize] = t;
        }
        s = next;
    }
    let w = local.oracle.width();
    let per_row_pairs = (0..local.oracle.height())
        .map(|y| {
            let (u, v) = local.oracle.row_pair(s, y).expect("checked above");
            let created = born[(u.1 * w + u.0) as usize].max(born[(v.1 * w + v.0) as usize]);
            RowPair {
                row: y as i64 + rect.y0,
                pair: [local.cell(u), local.cell(v)],
                created_at: created,
            }
        })
        .collect();
    Ok(SpanningReport {
        tau: t,
        minimal_set: a,
        per_row_pairs,
    })
}

const CHAIN_STEPS: [Cell; 4] = [(-2, 1), (-1, 1), (1, 1), (2, 1)];
const FINAL_STEPS: [Cell; 12] = [
    (-4, 0),
    (-3, 0),
    (-2, 0),
    (-1, 0),
    (1, 0),
    (2, 0),
    (3, 0),
    (4, 0),
    (-2, 1),
    (-1, 1),
    (1, 1),
    (2, 1),
];

/// Splits a minimal, spanning-time-zero traversal set into ordered chains:
/// every step but the last moves by `(±1,1)` or `(±2,1)`, the last by one
/// of the spanning-pair displacements. There are `|A| − y` chains.
pub fn decompose_paths(minimal_set: &[Cell], rect: &Rect) -> Result<Vec<Vec<Cell>>> {
    let local = Local::new(rect)?;
    if minimal_set.iter().any(|&(x, y)| !rect.contains(x, y)) {
        return Err(Error::InvalidArgument("minimal set leaves the rectangle".into()));
    }
    let a = local.mask(minimal_set);
    let h = local.oracle.height();
    let w = local.oracle.width();
    let span = local.oracle.span_oracle();
    // Candidate spanning pairs (as masks) for each row, drawn from A.
    let candidates: Vec<Vec<u128>> = (0..h)
        .map(|y| {
            let row: Vec<(u32, u32)> = (y..(y + 2).min(h))
                .flat_map(|yy| (0..w).map(move |x| (x, yy)))
                .filter(|&(x, yy)| a & local.oracle.bit(x, yy) != 0)
                .collect();
            row.iter()
                .tuple_combinations()
                .filter(|(p, q)| span.spans((p.0, p.1 - y), (q.0, q.1 - y)))
                .map(|(p, q)| local.oracle.bit(p.0, p.1) | local.oracle.bit(q.0, q.1))
                .collect()
        })
        .collect();
    let mut choice = Vec::with_capacity(h as usize);
    let mut result = None;
    search(&candidates, a, &mut choice, &mut |pairs| {
        let chains = chains_from_pairs(pairs)?;
        let valid = chains.len() + h as usize == minimal_set.len()
            && chains.iter().all(|c| chain_ok(&local, c));
        valid.then(|| {
            chains
                .into_iter()
                .map(|c| c.into_iter().map(|i| local.cell(local.oracle.board().coords(i))).collect())
                .collect::<Vec<Vec<Cell>>>()
        })
    }, &mut result);
    result.ok_or_else(|| {
        Error::StructureViolation("no assignment of spanning pairs forms valid chains".into())
    })
}

fn search<F>(
    candidates: &[Vec<u128>],
    target: u128,
    choice: &mut Vec<u128>,
    accept: &mut F,
    out: &mut Option<Vec<Vec<Cell>>>,
) where
    F: FnMut(&[u128]) -> Option<Vec<Vec<Cell>>>,
{
    if out.is_some() {
        return;
    }
    let row = choice.len();
    if row == candidates.len() {
        let union = choice.iter().fold(0, |m, p| m | p);
        if union == target {
            *out = accept(choice);
        }
        return;
    }
    for &p in &candidates[row] {
        choice.push(p);
        search(candidates, target, choice, accept, out);
        choice.pop();
        if out.is_some() {
            return;
        }
    }
}

/// Groups consecutive rows whose pairs share a site and orders each group
/// into a chain of bit indices.
fn chains_from_pairs(pairs: &[u128]) -> Option<Vec<Vec<u32>>> {
    let mut chains = Vec::new();
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start;
        while end + 1 < pairs.len() && pairs[end] & pairs[end + 1] != 0 {
            end += 1;
        }
        let group = &pairs[start..=end];
        let mut chain = Vec::new();
        if group.len() == 1 {
            chain.extend(bits(group[0]));
        } else {
            let shared: Vec<u128> = group.windows(2).map(|w| w[0] & w[1]).collect();
            if shared.iter().any(|s| s.count_ones() != 1) {
                return None;
            }
            chain.push((group[0] & !shared[0]).trailing_zeros());
            for s in &shared {
                chain.push(s.trailing_zeros());
            }
            chain.push((group[group.len() - 1] & !shared[shared.len() - 1]).trailing_zeros());
        }
        chains.push(chain);
        start = end + 1;
    }
    // Pairs of non-adjacent rows must be disjoint.
    for i in 0..pairs.len() {
        for j in i + 2..pairs.len() {
            if pairs[i] & pairs[j] != 0 {
                return None;
            }
        }
    }
    Some(chains)
}

fn chain_ok(local: &Local, chain: &[u32]) -> bool {
    let coords: Vec<Cell> = chain
        .iter()
        .map(|&i| {
            let (x, y) = local.oracle.board().coords(i);
            (x as i64, y as i64)
        })
        .collect();
    let n = coords.len();
    (1..n).all(|i| {
        let d = (coords[i].0 - coords[i - 1].0, coords[i].1 - coords[i - 1].1);
        if i + 1 < n {
            CHAIN_STEPS.contains(&d)
        } else {
            FINAL_STEPS.contains(&d)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize, cells: &[(usize, usize)]) -> Grid {
        Grid::from_cells(w, h, cells).unwrap()
    }

    #[test]
    fn pair_per_row_is_already_minimal() {
        let rect = Rect::with_dims(8, 2);
        let g = grid(8, 2, &[(0, 0), (1, 0), (6, 1), (7, 1)]);
        let a = minimal_up_traversable_subset(&rect, &g).unwrap();
        assert_eq!(a, vec![(0, 0), (1, 0), (6, 1), (7, 1)]);
        let r = spanning_time(&rect, &g).unwrap();
        assert_eq!(r.tau, 0);
        assert!(r.per_row_pairs.iter().all(|p| p.created_at == 0));
    }

    #[test]
    fn redundant_site_is_dropped() {
        let rect = Rect::with_dims(8, 2);
        let g = grid(8, 2, &[(0, 0), (1, 0), (3, 0), (6, 1), (7, 1)]);
        let a = minimal_up_traversable_subset(&rect, &g).unwrap();
        assert_eq!(a, vec![(0, 0), (1, 0), (6, 1), (7, 1)]);
    }

    #[test]
    fn untraversable_is_rejected() {
        let rect = Rect::with_dims(8, 2);
        let g = grid(8, 2, &[(0, 0)]);
        assert_eq!(minimal_up_traversable_subset(&rect, &g), Err(Error::NotTraversable));
        assert_eq!(spanning_time(&rect, &g).unwrap_err(), Error::NotTraversable);
    }

    #[test]
    fn two_row_infector_has_spanning_time_one() {
        let rect = Rect::with_dims(5, 2);
        let g = grid(5, 2, &[(0, 0), (0, 1), (3, 1), (4, 1)]);
        let r = spanning_time(&rect, &g).unwrap();
        assert_eq!(r.tau, 1);
        assert_eq!(r.minimal_set.len(), 4);
        assert_eq!(r.per_row_pairs[0].created_at, 1);
    }

    #[test]
    fn full_rectangle_spans_immediately() {
        let rect = Rect::with_dims(4, 3);
        let g = Grid::full(4, 3, Default::default());
        assert_eq!(spanning_time(&rect, &g).unwrap().tau, 0);
    }

    #[test]
    fn single_pair_is_one_chain() {
        let rect = Rect::with_dims(5, 1);
        let chains = decompose_paths(&[(1, 0), (3, 0)], &rect).unwrap();
        assert_eq!(chains, vec![vec![(1, 0), (3, 0)]]);
    }

    #[test]
    fn overlapping_pairs_form_one_chain() {
        // Row 0 spanned by {(1,0),(2,1)}, row 1 by {(2,1),(4,1)}.
        let rect = Rect::with_dims(6, 2);
        let chains = decompose_paths(&[(1, 0), (2, 1), (4, 1)], &rect).unwrap();
        assert_eq!(chains, vec![vec![(1, 0), (2, 1), (4, 1)]]);
    }
}
