use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice displacement `(dx, dy)`; `dy > 0` points up.
pub type Offset = (i32, i32);

/// Named update families.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum RuleFamily {
    TwoNeighbour,
    Anisotropic1b { b: u32 },
    Duarte,
    Custom { offsets: Vec<Offset>, threshold: u32 },
}

/// A neighbourhood together with its infection threshold.
///
/// A site becomes infected once at least `threshold` of the sites
/// `v + offset` are infected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighbourhoodRule {
    offsets: Vec<Offset>,
    threshold: u32,
    name: Option<String>,
}

impl NeighbourhoodRule {
    pub fn new(offsets: Vec<Offset>, threshold: u32, name: Option<String>) -> Result<Self> {
        let mut offsets = offsets;
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.is_empty() {
            return Err(Error::InvalidParameter("empty neighbourhood".into()));
        }
        if offsets.contains(&(0, 0)) {
            return Err(Error::InvalidParameter(
                "neighbourhood contains the origin".into(),
            ));
        }
        if threshold == 0 || threshold as usize > offsets.len() {
            return Err(Error::InvalidParameter(format!(
                "threshold {threshold} outside 1..={}",
                offsets.len()
            )));
        }
        Ok(Self {
            offsets,
            threshold,
            name,
        })
    }

    pub fn from_family(family: &RuleFamily) -> Result<Self> {
        match family {
            RuleFamily::TwoNeighbour => Self::new(
                vec![(-1, 0), (0, -1), (0, 1), (1, 0)],
                2,
                Some("two_neighbour".into()),
            ),
            RuleFamily::Anisotropic1b { b } => Self::anisotropic(*b),
            RuleFamily::Duarte => {
                Self::new(vec![(-1, 0), (0, -1), (0, 1)], 2, Some("duarte".into()))
            }
            RuleFamily::Custom { offsets, threshold } => {
                Self::new(offsets.clone(), *threshold, None)
            }
        }
    }

    /// The `(1,b)` neighbourhood with threshold `b + 1`.
    pub fn anisotropic(b: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidParameter(format!(
                "anisotropic rule needs b >= 2, got {b}"
            )));
        }
        let b = b as i32;
        let mut offsets = vec![(0, -1), (0, 1)];
        for d in 1..=b {
            offsets.push((-d, 0));
            offsets.push((d, 0));
        }
        Self::new(offsets, (b + 1) as u32, Some(format!("anisotropic_1_{b}")))
    }

    /// The `(1,2)` rule with threshold 3.
    pub fn anisotropic_12() -> Self {
        Self::anisotropic(2).expect("b = 2 is valid")
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Horizontal half-width `b` when this is a `(1,b)` rule.
    pub fn anisotropic_b(&self) -> Option<u32> {
        let b = self.offsets.iter().map(|o| o.0.unsigned_abs()).max()?;
        let reference = Self::anisotropic(b).ok()?;
        (reference.offsets == self.offsets && reference.threshold == self.threshold).then_some(b)
    }

    /// Largest `|dx|` and `|dy|` over the offsets.
    pub fn reach(&self) -> (u32, u32) {
        self.offsets.iter().fold((0, 0), |(rx, ry), &(dx, dy)| {
            (rx.max(dx.unsigned_abs()), ry.max(dy.unsigned_abs()))
        })
    }
}

/// Shorthand for [`NeighbourhoodRule::from_family`].
pub fn make_rule(family: &RuleFamily) -> Result<NeighbourhoodRule> {
    NeighbourhoodRule::from_family(family)
}
