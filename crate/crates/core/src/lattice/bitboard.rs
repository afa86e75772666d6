use super::rule::NeighbourhoodRule;
use crate::error::{Error, Result};

const MAX_THRESHOLD: usize = 32;

/// A tiny bounded lattice (at most 128 sites) packed into one `u128`.
///
/// Site `(x, y)` is bit `y * width + x`. Exhaustive oracles evaluate
/// millions of closures on such boards, so every step is a handful of
/// shifts and masks.
#[derive(Debug, Clone)]
pub struct SmallBoard {
    width: u32,
    height: u32,
    threshold: usize,
    /// Per offset: shift amount and mask of sites whose neighbour exists.
    shifts: Vec<(i32, u128)>,
    full: u128,
}

impl SmallBoard {
    pub fn new(width: u32, height: u32, rule: &NeighbourhoodRule) -> Result<Self> {
        let cells = width as u64 * height as u64;
        if width == 0 || height == 0 || cells > 128 {
            return Err(Error::InstanceTooLarge(format!(
                "{width}x{height} board does not fit in 128 bits"
            )));
        }
        let threshold = rule.threshold() as usize;
        if threshold > MAX_THRESHOLD {
            return Err(Error::InvalidParameter(format!(
                "threshold {threshold} too large for the packed board"
            )));
        }
        let mut shifts = Vec::with_capacity(rule.offsets().len());
        for &(dx, dy) in rule.offsets() {
            let mut valid = 0u128;
            for y in 0..height as i32 {
                for x in 0..width as i32 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && nx < width as i32 && ny >= 0 && ny < height as i32 {
                        valid |= 1u128 << (y as u32 * width + x as u32);
                    }
                }
            }
            if valid != 0 {
                shifts.push((dx + dy * width as i32, valid));
            }
        }
        let full = if cells == 128 {
            u128::MAX
        } else {
            (1u128 << cells) - 1
        };
        Ok(Self {
            width,
            height,
            threshold,
            shifts,
            full,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn full(&self) -> u128 {
        self.full
    }

    #[inline]
    pub fn bit(&self, x: u32, y: u32) -> u128 {
        1u128 << (y * self.width + x)
    }

    /// Coordinates of bit index `i`.
    #[inline]
    pub fn coords(&self, i: u32) -> (u32, u32) {
        (i % self.width, i / self.width)
    }

    /// Mask of the inclusive rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect_mask(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> u128 {
        let mut m = 0;
        for y in y0..=y1 {
            for x in x0..=x1 {
                m |= self.bit(x, y);
            }
        }
        m
    }

    #[inline]
    pub fn step(&self, s: u128) -> u128 {
        let r = self.threshold;
        let mut ge = [0u128; MAX_THRESHOLD + 1];
        ge[0] = u128::MAX;
        for &(k, valid) in &self.shifts {
            let m = shift(s, k) & valid;
            for j in (1..=r).rev() {
                ge[j] |= ge[j - 1] & m;
            }
        }
        s | (ge[r] & self.full)
    }

    #[inline]
    pub fn closure(&self, mut s: u128) -> u128 {
        loop {
            let next = self.step(s);
            if next == s {
                return s;
            }
            s = next;
        }
    }

    /// Iterate `B` exactly `t` times (stopping early at a fixpoint).
    pub fn iterate(&self, mut s: u128, t: u32) -> u128 {
        for _ in 0..t {
            let next = self.step(s);
            if next == s {
                break;
            }
            s = next;
        }
        s
    }
}

/// Bit `v` of the result is bit `v + k` of `s`.
#[inline]
fn shift(s: u128, k: i32) -> u128 {
    if k >= 0 {
        s.checked_shr(k as u32).unwrap_or(0)
    } else {
        s.checked_shl((-k) as u32).unwrap_or(0)
    }
}

/// Iterator over the set bits of a mask, lowest first.
pub fn bits(mut m: u128) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let b = m.trailing_zeros();
        m &= m - 1;
        Some(b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{closure, Grid};

    #[test]
    fn matches_grid_closure() {
        let rule = NeighbourhoodRule::anisotropic_12();
        let board = SmallBoard::new(7, 4, &rule).unwrap();
        let cells = [(0, 0), (1, 0), (4, 1), (5, 1), (2, 2), (6, 3), (3, 3)];
        let mut s = 0;
        for &(x, y) in &cells {
            s |= board.bit(x, y);
        }
        let g = Grid::from_cells(7, 4, &cells.map(|(x, y)| (x as usize, y as usize))).unwrap();
        let (c, _) = closure(&g, &rule);
        let got = board.closure(s);
        for y in 0..4 {
            for x in 0..7 {
                assert_eq!(c.get(x as usize, y as usize), got & board.bit(x, y) != 0);
            }
        }
    }

    #[test]
    fn rejects_oversized_boards() {
        let rule = NeighbourhoodRule::anisotropic_12();
        assert!(SmallBoard::new(13, 10, &rule).is_err());
        assert!(SmallBoard::new(16, 8, &rule).is_ok());
    }
}
