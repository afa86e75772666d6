use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use super::shapes::ShapeClass;
use crate::error::{Error, Result};
use crate::lattice::{bits, NeighbourhoodRule, SmallBoard};

/// Literal spanning-pair test for a row of a given width.
///
/// A pair `P` spans the row `[a,b] × {c}` when that row lies in
/// `⟨P ∪ [a,b] × {c−1}⟩`. Pairs live in rows `c` and `c + 1`; cells are
/// addressed as `(x, dy)` with `dy ∈ {0, 1}`. The closure of a `(1,b)`
/// rule never leaves the bounding box of its initial set, so a three-row
/// board of the row's width is exact.
#[derive(Debug, Clone)]
pub struct SpanOracle {
    width: u32,
    table: Vec<bool>,
}

impl SpanOracle {
    pub fn new(width: u32, rule: &NeighbourhoodRule) -> Result<Self> {
        let board = SmallBoard::new(width, 3, rule)?;
        let below = board.rect_mask(0, 0, width - 1, 0);
        let target = board.rect_mask(0, 1, width - 1, 1);
        let n = 2 * width as usize;
        let mut table = vec![false; n * n];
        let cell = |i: usize| board.bit(i as u32 % width, 1 + i as u32 / width);
        for i in 0..n {
            for j in i + 1..n {
                let closed = board.closure(below | cell(i) | cell(j));
                let spans = closed & target == target;
                table[i * n + j] = spans;
                table[j * n + i] = spans;
            }
        }
        Ok(Self { width, table })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn spans(&self, a: (u32, u32), b: (u32, u32)) -> bool {
        let n = 2 * self.width as usize;
        let i = (a.1 * self.width + a.0) as usize;
        let j = (b.1 * self.width + b.0) as usize;
        self.table[i * n + j]
    }

    /// First spanning pair (in index order) among the occupied cells of
    /// the target row (`row` mask) and the row above (`above` mask).
    pub fn find_pair(&self, row: u64, above: u64) -> Option<((u32, u32), (u32, u32))> {
        let cells: Vec<(u32, u32)> = bit_iter(row)
            .map(|x| (x, 0))
            .chain(bit_iter(above).map(|x| (x, 1)))
            .collect();
        cells
            .iter()
            .tuple_combinations()
            .find(|(a, b)| self.spans(**a, **b))
            .map(|(a, b)| (*a, *b))
    }
}

fn bit_iter(m: u64) -> impl Iterator<Item = u32> {
    bits(m as u128)
}

/// Oracle for a `width × height` rectangle under the `(1,2)` rule:
/// closure inside the rectangle, up-traversability, and the per-row
/// spanning-pair test of the traversal characterisation.
#[derive(Debug, Clone)]
pub struct RectOracle {
    width: u32,
    height: u32,
    inner: SmallBoard,
    up: SmallBoard,
    span: SpanOracle,
}

impl RectOracle {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width as u64 * (height as u64 + 1) > 128 || width > 42 {
            return Err(Error::InstanceTooLarge(format!(
                "{width}x{height} rectangle exceeds the packed-board limit"
            )));
        }
        let rule = NeighbourhoodRule::anisotropic_12();
        Ok(Self {
            width,
            height,
            inner: SmallBoard::new(width, height, &rule)?,
            up: SmallBoard::new(width, height + 1, &rule)?,
            span: SpanOracle::new(width, &rule)?,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn board(&self) -> &SmallBoard {
        &self.inner
    }

    pub fn span_oracle(&self) -> &SpanOracle {
        &self.span
    }

    pub fn bit(&self, x: u32, y: u32) -> u128 {
        self.inner.bit(x, y)
    }

    /// Whether the rectangle fills with the full row below adjoined.
    pub fn up_traversable(&self, seeds: u128) -> bool {
        let row = (1u128 << self.width) - 1;
        let m = row | (seeds << self.width);
        self.up.closure(m) == self.up.full()
    }

    pub fn closure(&self, seeds: u128) -> u128 {
        self.inner.closure(seeds)
    }

    fn row_bits(&self, s: u128, y: u32) -> u64 {
        if y >= self.height {
            return 0;
        }
        let row = (1u128 << self.width) - 1;
        ((s >> (y * self.width)) & row) as u64
    }

    /// A spanning pair for row `y` contained in `s`, as rectangle cells.
    pub fn row_pair(&self, s: u128, y: u32) -> Option<((u32, u32), (u32, u32))> {
        self.span
            .find_pair(self.row_bits(s, y), self.row_bits(s, y + 1))
            .map(|(a, b)| ((a.0, a.1 + y), (b.0, b.1 + y)))
    }

    pub fn spans_every_row(&self, s: u128) -> bool {
        (0..self.height).all(|y| self.row_pair(s, y).is_some())
    }
}

fn anisotropic_b(rule: &NeighbourhoodRule) -> Result<u32> {
    rule.anisotropic_b().ok_or_else(|| {
        Error::InvalidParameter("spanning configurations need an anisotropic (1,b) rule".into())
    })
}

/// Two-site sets, up to translation, that fill a row of width `width`
/// when the row below is infected.
pub fn spanning_pairs_on_width(rule: &NeighbourhoodRule, width: u32) -> Result<Vec<ShapeClass>> {
    let oracle = SpanOracle::new(width, rule)?;
    let n = 2 * width;
    let mut shapes = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let a = (i % width, i / width);
            let b = (j % width, j / width);
            if oracle.spans(a, b) {
                shapes.insert(ShapeClass::canonical([
                    (a.0 as i64, a.1 as i64),
                    (b.0 as i64, b.1 as i64),
                ]));
            }
        }
    }
    Ok(shapes.into_iter().collect())
}

/// All spanning pairs of a `(1,b)` rule, tested on a row of width
/// `4b + 9` so that every candidate sits well clear of the ends.
pub fn enumerate_spanning_pairs(rule: &NeighbourhoodRule) -> Result<Vec<ShapeClass>> {
    let b = anisotropic_b(rule)?;
    spanning_pairs_on_width(rule, 4 * b + 9)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrowthConfigs {
    pub b: u32,
    pub count: usize,
    pub shapes: Vec<ShapeClass>,
}

/// `b`-site subsets of `{(±1..±b, 0), (0, 1)}` around an empty site `z`
/// that fill `z`'s row (width `width`) when the row below is infected,
/// identified up to horizontal translation.
pub fn growth_configs_on_width(b: u32, width: u32) -> Result<GrowthConfigs> {
    if !(2..=6).contains(&b) {
        return Err(Error::InvalidParameter(format!(
            "growth-configuration enumeration supports 2 <= b <= 6, got {b}"
        )));
    }
    let rule = NeighbourhoodRule::anisotropic(b)?;
    let board = SmallBoard::new(width, 3, &rule)?;
    let below = board.rect_mask(0, 0, width - 1, 0);
    let target = board.rect_mask(0, 1, width - 1, 1);
    let zx = (width / 2) as i64;
    let bi = b as i64;
    let window: Vec<(i64, i64)> = (-bi..=bi)
        .filter(|&d| d != 0)
        .map(|d| (zx + d, 1))
        .chain(std::iter::once((zx, 2)))
        .collect();
    if window.iter().any(|&(x, _)| x < 0 || x >= width as i64) {
        return Err(Error::InvalidParameter(format!("row width {width} too small for b = {b}")));
    }
    let mut shapes = BTreeSet::new();
    for combo in window.iter().combinations(b as usize) {
        let mut m = below;
        for &&(x, y) in &combo {
            m |= board.bit(x as u32, y as u32);
        }
        if board.closure(m) & target == target {
            shapes.insert(ShapeClass::canonical(combo.into_iter().copied()));
        }
    }
    let shapes: Vec<_> = shapes.into_iter().collect();
    Ok(GrowthConfigs {
        b,
        count: shapes.len(),
        shapes,
    })
}

pub fn enumerate_growth_configs(b: u32) -> Result<GrowthConfigs> {
    growth_configs_on_width(b, 4 * b + 9)
}

/// Result of the infector search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InfectorReport {
    pub rows: u32,
    pub window_halfwidth: u32,
    pub max_cardinality: u32,
    pub subsets_examined: u64,
    /// Every infector found, canonical and deduplicated.
    pub infectors: Vec<ShapeClass>,
    /// Those that are not themselves a single spanning pair.
    pub non_pair: Vec<ShapeClass>,
}

/// Largest infector cardinality searched. In the default two-row,
/// half-width-6 window the largest infector has 8 sites; searching two
/// sizes beyond that shows the list is complete.
pub const INFECTOR_MAX_CARDINALITY: u32 = 10;

/// Minimal sets `M` inside a window of `rows` rows and `2h + 1` columns,
/// meeting every row of the window, whose closure contains a spanning pair
/// for the bottom row, and no proper subset of which does.
///
/// Spanning pairs are recognised by shape (one of the `(1,2)` pair classes
/// with at least one site in the target row), i.e. for a row long enough
/// that its ends play no role. Within the window the closure of `M` is
/// exact because `(1,2)` closures stay inside the bounding box.
pub fn enumerate_infectors(rows: u32, window_halfwidth: u32) -> Result<InfectorReport> {
    enumerate_infectors_up_to(rows, window_halfwidth, INFECTOR_MAX_CARDINALITY)
}

pub fn enumerate_infectors_up_to(
    rows: u32,
    window_halfwidth: u32,
    max_cardinality: u32,
) -> Result<InfectorReport> {
    if !(1..=2).contains(&rows) {
        return Err(Error::InvalidParameter(format!("rows must be 1 or 2, got {rows}")));
    }
    if window_halfwidth < 6 {
        return Err(Error::InvalidParameter(format!(
            "window half-width must be at least 6, got {window_halfwidth}"
        )));
    }
    let width = 2 * window_halfwidth + 1;
    let n = (width * rows) as i64;
    let budget: u128 = (0..=max_cardinality as i64)
        .map(|k| crate::asymptotics::binomial(n, k))
        .sum();
    if budget > 1 << 26 || n > 64 {
        return Err(Error::InstanceTooLarge(format!(
            "window of {n} cells admits {budget} subsets of size <= {max_cardinality}"
        )));
    }
    let rule = NeighbourhoodRule::anisotropic_12();
    let pair_shapes: BTreeSet<ShapeClass> = enumerate_spanning_pairs(&rule)?.into_iter().collect();
    let board = SmallBoard::new(width, rows, &rule)?;
    let row0 = (1u128 << width) - 1;
    let has_pair = |m: u128| -> bool {
        let closed = board.closure(m);
        let cells: Vec<u32> = bits(closed).collect();
        cells.iter().tuple_combinations().any(|(&a, &b)| {
            // Canonical shapes ignore absolute height; the pair must touch
            // the target row.
            if a >= width && b >= width {
                return false;
            }
            let (ax, ay) = board.coords(a);
            let (bx, by) = board.coords(b);
            pair_shapes.contains(&ShapeClass::canonical([
                (ax as i64, ay as i64),
                (bx as i64, by as i64),
            ]))
        })
    };
    let mut infectors = BTreeSet::new();
    let mut examined = 0u64;
    for k in 1..=max_cardinality.min(n as u32) {
        for combo in (0..n as u32).combinations(k as usize) {
            let m: u128 = combo.iter().fold(0, |acc, &i| acc | 1u128 << i);
            if rows == 2 && (m & row0 == 0 || m & !row0 == 0) {
                continue;
            }
            examined += 1;
            if !has_pair(m) {
                continue;
            }
            let minimal = bits(m).all(|i| !has_pair(m & !(1u128 << i)));
            if minimal {
                infectors.insert(ShapeClass::canonical(bits(m).map(|i| {
                    let (x, y) = board.coords(i);
                    (x as i64, y as i64)
                })));
            }
        }
    }
    let infectors: Vec<ShapeClass> = infectors.into_iter().collect();
    let non_pair = infectors
        .iter()
        .filter(|s| !(s.len() == 2 && pair_shapes.contains(*s)))
        .cloned()
        .collect();
    Ok(InfectorReport {
        rows,
        window_halfwidth,
        max_cardinality,
        subsets_examined: examined,
        infectors,
        non_pair,
    })
}
