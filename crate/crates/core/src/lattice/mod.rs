//! The bootstrap cellular automaton: update rules, lattices, closure and
//! the rectangle events built on it.

mod bitboard;
mod dynamics;
mod events;
mod grid;
mod rule;

pub use bitboard::{bits, SmallBoard};
pub use dynamics::{bootstrap_step, closure, closure_by_sweeps, ClosureWorkspace, InfectionField, NEVER};
pub use events::{
    event_grid, event_holds, grows_to, is_down_traversable, is_hor_traversable,
    is_internally_filled, is_up_traversable, EventKind, EventLayout, Strip,
};
pub use grid::{Grid, Rect, Topology};
pub use rule::{make_rule, NeighbourhoodRule, Offset, RuleFamily};
