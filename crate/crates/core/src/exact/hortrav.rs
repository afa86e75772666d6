use crate::error::{Error, Result};

/// Exact probability that an `x × y` rectangle is horizontally traversable
/// under the `(1,2)` rule at density `p`.
///
/// Traversal holds iff no three consecutive columns are empty and the
/// rightmost column is occupied, so a three-state chain over the number
/// of trailing empty columns suffices. A column is empty with probability
/// `q = (1−p)^y`.
pub fn hor_trav_prob_exact(x: u64, y: u64, p: f64) -> Result<f64> {
    Ok(chain(x, y, p)?[0])
}

/// Distribution of the number of trailing empty columns (0, 1 or 2) after
/// `x` columns, restricted to runs without three consecutive empties.
fn chain(x: u64, y: u64, p: f64) -> Result<[f64; 3]> {
    if x == 0 || y == 0 {
        return Err(Error::InvalidParameter(format!(
            "rectangle dimensions must be positive, got {x}x{y}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0,1], got {p}")));
    }
    let q = (1.0 - p).powf(y as f64);
    let mut state = [1.0, 0.0, 0.0];
    for _ in 0..x {
        let total = state[0] + state[1] + state[2];
        state = [total * (1.0 - q), state[0] * q, state[1] * q];
    }
    Ok(state)
}

/// Probability that an `x × y` rectangle has no three consecutive columns
/// without a seed (the traversal event with the rightmost-column condition
/// dropped). Same chain as [`hor_trav_prob_exact`], summed over all final
/// states.
pub fn no_empty_triple_prob(x: u64, y: u64, p: f64) -> Result<f64> {
    Ok(chain(x, y, p)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_densities() {
        assert_eq!(hor_trav_prob_exact(7, 3, 1.0).unwrap(), 1.0);
        assert_eq!(hor_trav_prob_exact(7, 3, 0.0).unwrap(), 0.0);
        assert!(hor_trav_prob_exact(0, 3, 0.5).is_err());
        assert!(hor_trav_prob_exact(3, 3, 1.5).is_err());
    }

    #[test]
    fn three_by_one_matches_pattern_count() {
        // Column patterns of length 3 (1 = occupied): last occupied and no
        // run of three empties: 001, 011, 101, 111.
        let p: f64 = 0.5;
        let brute: f64 = (0u32..8)
            .filter(|m| m & 0b100 != 0)
            .map(|m| p.powi(m.count_ones() as i32) * (1.0 - p).powi(3 - m.count_ones() as i32))
            .sum();
        assert!((hor_trav_prob_exact(3, 1, p).unwrap() - brute).abs() < 1e-15);
        assert!((brute - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relaxed_event_dominates() {
        for x in 1..30 {
            let a = hor_trav_prob_exact(x, 2, 0.1).unwrap();
            let b = no_empty_triple_prob(x, 2, 0.1).unwrap();
            assert!(b >= a);
        }
        assert_eq!(no_empty_triple_prob(2, 1, 0.0).unwrap(), 1.0);
    }
}
