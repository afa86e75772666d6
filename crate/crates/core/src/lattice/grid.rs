use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Off-grid neighbours are permanently uninfected.
    #[default]
    Bounded,
    /// Both axes wrap.
    Torus,
}

/// Dense occupancy field, one bit per site, packed row by row into `u64`
/// words. Row `y = 0` is the bottom row; bit `x % 64` of word `x / 64`
/// holds column `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    words_per_row: usize,
    topology: Topology,
    bits: Vec<u64>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Grid {}x{} {:?}", self.width, self.height, self.topology)?;
        for y in (0..self.height).rev() {
            let row: String = (0..self.width)
                .map(|x| if self.get(x, y) { '#' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl Grid {
    pub fn new(width: usize, height: usize, topology: Topology) -> Self {
        assert!(width > 0 && height > 0, "grid dimensions must be positive");
        let words_per_row = width.div_ceil(64);
        Self {
            width,
            height,
            words_per_row,
            topology,
            bits: vec![0; words_per_row * height],
        }
    }

    pub fn bounded(width: usize, height: usize) -> Self {
        Self::new(width, height, Topology::Bounded)
    }

    pub fn full(width: usize, height: usize, topology: Topology) -> Self {
        let mut g = Self::new(width, height, topology);
        for y in 0..height {
            for x in 0..width {
                g.set(x, y, true);
            }
        }
        g
    }

    /// Bounded grid with the listed cells occupied.
    pub fn from_cells(width: usize, height: usize, cells: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::bounded(width, height);
        for &(x, y) in cells {
            if x >= width || y >= height {
                return Err(Error::InvalidArgument(format!(
                    "cell ({x},{y}) outside {width}x{height} grid"
                )));
            }
            g.set(x, y, true);
        }
        Ok(g)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        let w = self.bits[y * self.words_per_row + x / 64];
        (w >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        let idx = y * self.words_per_row + x / 64;
        let mask = 1u64 << (x % 64);
        if value {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    /// Signed lookup: off-grid coordinates wrap on a torus and read as
    /// uninfected on a bounded grid.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        match self.resolve(x, y) {
            Some((x, y)) => self.get(x, y),
            None => false,
        }
    }

    pub(crate) fn resolve(&self, x: i64, y: i64) -> Option<(usize, usize)> {
        let (w, h) = (self.width as i64, self.height as i64);
        match self.topology {
            Topology::Torus => Some((x.rem_euclid(w) as usize, y.rem_euclid(h) as usize)),
            Topology::Bounded => {
                (x >= 0 && x < w && y >= 0 && y < h).then_some((x as usize, y as usize))
            }
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_occupied(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |y| {
            let row = self.row(y);
            row.iter().enumerate().flat_map(move |(wi, &word)| {
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((wi * 64 + b, y))
                })
            })
        })
    }

    /// `self ⊆ other` (dimensions must agree).
    pub fn is_subset_of(&self, other: &Grid) -> bool {
        assert_eq!((self.width, self.height), (other.width, other.height));
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &Grid) -> Grid {
        assert_eq!((self.width, self.height), (other.width, other.height));
        let mut out = self.clone();
        for (a, b) in out.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        out
    }

    pub fn with_topology(mut self, topology: Topology) -> Self {
        self.topology = topology;
        self
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub(crate) fn row(&self, y: usize) -> &[u64] {
        &self.bits[y * self.words_per_row..(y + 1) * self.words_per_row]
    }

    pub(crate) fn row_mut(&mut self, y: usize) -> &mut [u64] {
        let wpr = self.words_per_row;
        &mut self.bits[y * wpr..(y + 1) * wpr]
    }

    /// Mask of valid bits in the last word of a row.
    pub(crate) fn tail_mask(&self) -> u64 {
        match self.width % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }
}

/// Inclusive axis-aligned rectangle `[x0, x1] × [y0, y1]` in 0-based
/// lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self> {
        if x0 > x1 || y0 > y1 {
            return Err(Error::InvalidArgument(format!(
                "degenerate rectangle [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    /// Rectangle of the given dimensions with lower-left corner at the origin.
    pub fn with_dims(width: u64, height: u64) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            x0: 0,
            y0: 0,
            x1: width as i64 - 1,
            y1: height as i64 - 1,
        }
    }

    /// Converts the 1-based `[a, b] × [c, d]` notation.
    pub fn from_one_based(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(a - 1, c - 1, b - 1, d - 1)
    }

    pub fn width(&self) -> u64 {
        (self.x1 - self.x0 + 1) as u64
    }

    pub fn height(&self) -> u64 {
        (self.y1 - self.y0 + 1) as u64
    }

    pub fn dims(&self) -> (u64, u64) {
        (self.width(), self.height())
    }

    pub fn area(&self) -> u64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x0 <= other.x0 && other.x1 <= self.x1 && self.y0 <= other.y0 && other.y1 <= self.y1
    }

    pub fn translate(&self, dx: i64, dy: i64) -> Rect {
        Rect {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            x1: self.x1 + dx,
            y1: self.y1 + dy,
        }
    }

    /// Smallest rectangle containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| (x, y)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_across_word_boundary() {
        let mut g = Grid::bounded(130, 3);
        for x in [0, 63, 64, 65, 127, 128, 129] {
            g.set(x, 1, true);
        }
        assert_eq!(g.count(), 7);
        assert!(g.get(64, 1) && g.get(129, 1) && !g.get(66, 1));
        let cells: Vec<_> = g.iter_occupied().collect();
        assert_eq!(cells.len(), 7);
        assert_eq!(cells[6], (129, 1));
        g.set(64, 1, false);
        assert!(!g.get(64, 1));
    }

    #[test]
    fn signed_lookup_respects_topology() {
        let mut g = Grid::new(4, 3, Topology::Torus);
        g.set(3, 2, true);
        assert!(g.get_signed(-1, -1));
        let b = g.clone().with_topology(Topology::Bounded);
        assert!(!b.get_signed(-1, -1));
        assert!(b.get_signed(3, 2));
    }

    #[test]
    fn rect_dims_and_conversion() {
        let r = Rect::from_one_based(1, 20, 1, 5).unwrap();
        assert_eq!(r, Rect::new(0, 0, 19, 4).unwrap());
        assert_eq!(r.dims(), (20, 5));
        assert!(Rect::new(2, 0, 1, 0).is_err());
        assert!(r.contains_rect(&Rect::new(3, 1, 5, 4).unwrap()));
        assert_eq!(r.cells().count(), 100);
    }
}
