use serde::{Deserialize, Serialize};

use super::dynamics::ClosureWorkspace;
use super::grid::{Grid, Rect};
use super::rule::NeighbourhoodRule;
use crate::error::{Error, Result};

/// The rectangle events. Each one adjoins a fixed infected boundary to the
/// rectangle and asks whether the confined closure covers everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    InternallyFilled,
    HorTrav,
    UpTrav,
    DownTrav,
}

impl EventKind {
    pub const ALL: [EventKind; 4] = [
        EventKind::InternallyFilled,
        EventKind::HorTrav,
        EventKind::UpTrav,
        EventKind::DownTrav,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::InternallyFilled => "internally_filled",
            EventKind::HorTrav => "hor_trav",
            EventKind::UpTrav => "up_trav",
            EventKind::DownTrav => "down_trav",
        }
    }

    /// Local region for a `width × height` rectangle: the rectangle plus
    /// the adjoined boundary, which is always a full strip of the region.
    pub fn layout(self, width: usize, height: usize) -> EventLayout {
        match self {
            EventKind::InternallyFilled => EventLayout {
                width,
                height,
                origin: (0, 0),
                boundary: None,
            },
            EventKind::HorTrav => EventLayout {
                width: width + 2,
                height,
                origin: (2, 0),
                boundary: Some(Strip::Columns(0, 1)),
            },
            EventKind::UpTrav => EventLayout {
                width,
                height: height + 1,
                origin: (0, 1),
                boundary: Some(Strip::Rows(0, 0)),
            },
            EventKind::DownTrav => EventLayout {
                width,
                height: height + 1,
                origin: (0, 0),
                boundary: Some(Strip::Rows(height, height)),
            },
        }
    }
}

impl std::str::FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name() == s || k.name().replace('_', "-") == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown event '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strip {
    Columns(usize, usize),
    Rows(usize, usize),
}

/// Where the rectangle and its infected boundary sit in the local region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventLayout {
    pub width: usize,
    pub height: usize,
    /// Local coordinates of the rectangle's lower-left site.
    pub origin: (usize, usize),
    pub boundary: Option<Strip>,
}

impl EventLayout {
    pub fn is_boundary(&self, x: usize, y: usize) -> bool {
        match self.boundary {
            None => false,
            Some(Strip::Columns(a, b)) => (a..=b).contains(&x),
            Some(Strip::Rows(a, b)) => (a..=b).contains(&y),
        }
    }

    /// An empty local grid with only the boundary infected.
    pub fn blank(&self) -> Grid {
        let mut g = Grid::bounded(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.is_boundary(x, y) {
                    g.set(x, y, true);
                }
            }
        }
        g
    }
}

fn seeded(seeds: &Grid, x: i64, y: i64) -> bool {
    x >= 0
        && y >= 0
        && (x as usize) < seeds.width()
        && (y as usize) < seeds.height()
        && seeds.get(x as usize, y as usize)
}

/// Local grid for `kind` on `rect`, with `seeds ∩ rect` copied in.
pub fn event_grid(kind: EventKind, rect: &Rect, seeds: &Grid) -> (EventLayout, Grid) {
    let (w, h) = (rect.width() as usize, rect.height() as usize);
    let layout = kind.layout(w, h);
    let mut g = layout.blank();
    for (x, y) in rect.cells() {
        if seeded(seeds, x, y) {
            let lx = (x - rect.x0) as usize + layout.origin.0;
            let ly = (y - rect.y0) as usize + layout.origin.1;
            g.set(lx, ly, true);
        }
    }
    (layout, g)
}

/// Evaluates `kind` on `rect` with dynamics confined to the local region.
/// Seeds outside the seed grid's extent count as uninfected.
pub fn event_holds(kind: EventKind, rect: &Rect, seeds: &Grid, rule: &NeighbourhoodRule) -> bool {
    let (_, g) = event_grid(kind, rect, seeds);
    ClosureWorkspace::new().fills(&g, rule)
}

/// `R ⊂ ⟨S ∩ R⟩`.
pub fn is_internally_filled(rect: &Rect, seeds: &Grid, rule: &NeighbourhoodRule) -> bool {
    event_holds(EventKind::InternallyFilled, rect, seeds, rule)
}

/// `R` fills once the two full columns to its left are infected.
pub fn is_hor_traversable(rect: &Rect, seeds: &Grid, rule: &NeighbourhoodRule) -> bool {
    event_holds(EventKind::HorTrav, rect, seeds, rule)
}

/// `R` fills once the full row directly below it is infected.
pub fn is_up_traversable(rect: &Rect, seeds: &Grid, rule: &NeighbourhoodRule) -> bool {
    event_holds(EventKind::UpTrav, rect, seeds, rule)
}

/// `R` fills once the full row directly above it is infected.
pub fn is_down_traversable(rect: &Rect, seeds: &Grid, rule: &NeighbourhoodRule) -> bool {
    event_holds(EventKind::DownTrav, rect, seeds, rule)
}

/// `outer = ⟨(S ∩ outer) ∪ inner⟩`, with dynamics confined to `outer`.
pub fn grows_to(
    inner: &Rect,
    outer: &Rect,
    seeds: &Grid,
    rule: &NeighbourhoodRule,
) -> Result<bool> {
    if !outer.contains_rect(inner) {
        return Err(Error::InvalidArgument(format!(
            "inner {inner:?} is not contained in outer {outer:?}"
        )));
    }
    let (w, h) = (outer.width() as usize, outer.height() as usize);
    let mut g = Grid::bounded(w, h);
    for (x, y) in outer.cells() {
        if inner.contains(x, y) || seeded(seeds, x, y) {
            g.set((x - outer.x0) as usize, (y - outer.y0) as usize, true);
        }
    }
    Ok(ClosureWorkspace::new().fills(&g, rule))
}
