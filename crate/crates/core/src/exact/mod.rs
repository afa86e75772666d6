//! Exact probabilities and exhaustive enumerations on small instances.
//! These are the ground truth the Monte Carlo harness and the asymptotic
//! bounds are checked against.

mod exhaustive;
mod hortrav;
mod shapes;
mod spanning;
mod traversal;

pub use exhaustive::{
    event_counts, event_prob_exhaustive, event_prob_exhaustive_with, probability_from_counts,
    MAX_EXHAUSTIVE_CELLS,
};
pub use hortrav::{hor_trav_prob_exact, no_empty_triple_prob};
pub use shapes::{shapes_to_json, ShapeClass};
pub use spanning::{
    enumerate_growth_configs, enumerate_infectors, enumerate_infectors_up_to,
    enumerate_spanning_pairs, growth_configs_on_width, spanning_pairs_on_width, GrowthConfigs,
    InfectorReport, RectOracle, SpanOracle, INFECTOR_MAX_CARDINALITY,
};
pub use traversal::{
    decompose_paths, minimal_up_traversable_subset, spanning_time, Cell, RowPair, SpanningReport,
};
