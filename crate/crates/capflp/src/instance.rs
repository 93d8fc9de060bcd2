//! Agent instances and facility capacity vectors.
//!
//! Positions live on the unit interval and are kept sorted ascending.
//! Duplicated positions are allowed; the worst-case constructions stack
//! many agents on the same point.

use crate::error::{Error, Result};

/// A canonicalized vector of agent positions on `[0, 1]`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    positions: Vec<f64>,
}

impl Instance {
    /// Number of agents.
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Sorted positions.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Position of the agent with 1-based sorted index `index`.
    ///
    /// Panics if `index` is 0 or exceeds `n`.
    pub fn position_1based(&self, index: usize) -> f64 {
        self.positions[index - 1]
    }

    /// Positions lifted to the plane (second coordinate zero), the shape the
    /// shared game engine consumes.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.positions.iter().map(|&x| [x, 0.0]).collect()
    }
}

/// Validate and canonicalize raw positions into an [`Instance`].
///
/// Values are sorted ascending; anything non-finite or outside `[0, 1]` is
/// rejected. Inputs are compared exactly afterwards: no epsilon snapping.
pub fn make_instance(raw_positions: &[f64]) -> Result<Instance> {
    if raw_positions.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &x in raw_positions {
        if !x.is_finite() {
            return Err(Error::NonFinite { value: x });
        }
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { value: x });
        }
    }
    let mut positions = raw_positions.to_vec();
    positions.sort_by(|a, b| a.partial_cmp(b).expect("finite values are totally ordered"));
    Ok(Instance { positions })
}

/// Facility capacities `(k_1, ..., k_m)`, every entry at least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityVector {
    capacities: Vec<usize>,
}

impl CapacityVector {
    pub fn new(capacities: Vec<usize>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::EmptyInput);
        }
        if capacities.contains(&0) {
            return Err(Error::InvalidParams(
                "every facility capacity must be at least 1".into(),
            ));
        }
        Ok(CapacityVector { capacities })
    }

    /// Number of facilities.
    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn total(&self) -> usize {
        self.capacities.iter().sum()
    }

    /// The scarce-capacity regime requires the total capacity to fall
    /// strictly below the number of agents.
    pub fn check_feasible_for(&self, n: usize) -> Result<()> {
        if self.total() >= n {
            return Err(Error::CapacityInfeasible {
                total_capacity: self.total(),
                agents: n,
            });
        }
        Ok(())
    }

    /// True when every facility shares one capacity value.
    pub fn is_uniform(&self) -> bool {
        self.capacities.windows(2).all(|w| w[0] == w[1])
    }
}
