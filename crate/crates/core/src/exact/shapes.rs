use serde::{Deserialize, Serialize};

/// A finite cell set up to translation. The representative is translated
/// so that its bottom-most, then left-most, cell sits at the origin; cells
/// are kept sorted by `(y, x)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShapeClass {
    cells: Vec<(i32, i32)>,
}

impl ShapeClass {
    pub fn canonical<I: IntoIterator<Item = (i64, i64)>>(cells: I) -> Self {
        let mut v: Vec<(i64, i64)> = cells.into_iter().map(|(x, y)| (y, x)).collect();
        v.sort_unstable();
        v.dedup();
        let (oy, ox) = v.first().copied().unwrap_or((0, 0));
        Self {
            cells: v
                .into_iter()
                .map(|(y, x)| ((x - ox) as i32, (y - oy) as i32))
                .collect(),
        }
    }

    pub fn cells(&self) -> &[(i32, i32)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Number of distinct rows the shape meets.
    pub fn rows(&self) -> usize {
        let mut ys: Vec<i32> = self.cells.iter().map(|c| c.1).collect();
        ys.dedup();
        ys.len()
    }

    /// Horizontal extent `max x − min x + 1`.
    pub fn width(&self) -> u32 {
        let min = self.cells.iter().map(|c| c.0).min().unwrap_or(0);
        let max = self.cells.iter().map(|c| c.0).max().unwrap_or(-1);
        (max - min + 1) as u32
    }

    /// Reflection `x ↦ −x`.
    pub fn mirror(&self) -> Self {
        Self::canonical(self.cells.iter().map(|&(x, y)| (-(x as i64), y as i64)))
    }

    pub fn translated(&self, dx: i64, dy: i64) -> Vec<(i64, i64)> {
        self.cells
            .iter()
            .map(|&(x, y)| (x as i64 + dx, y as i64 + dy))
            .collect()
    }
}

/// Shapes as a JSON array of `[x, y]` cell lists.
pub fn shapes_to_json(shapes: &[ShapeClass]) -> serde_json::Value {
    serde_json::to_value(shapes).expect("shapes serialize")
}
