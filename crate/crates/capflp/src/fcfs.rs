//! The First-Come-First-Served game played after facility placement.
//!
//! Agents each pick one facility; a facility with capacity `k` serves the
//! `k` claimants closest to it, breaking distance ties by a fixed priority
//! ordering. A served agent's utility is the metric ceiling minus its
//! distance to the chosen facility, an unserved agent gets zero.
//!
//! One engine serves both the line and the plane: positions are stored as
//! points and the metric picks the distance and the utility ceiling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Tolerance on a unilateral deviation gain before a profile stops being an
/// equilibrium. Distances are sums of at most two subtractions, so this sits
/// far above rounding noise.
pub const NE_GAIN_TOL: f64 = 1e-12;

/// Tolerance under which two welfare values count as equal. Welfare sums n
/// terms, hence looser than the deviation tolerance.
pub const WELFARE_TOL: f64 = 1e-9;

/// Default cap on the exhaustive profile scan (`m^n` profiles).
pub const DEFAULT_NE_ENUMERATION_CAP: u128 = 1 << 20;

/// Metric the game is played under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Unit interval, utility ceiling 1.
    Line,
    /// Unit square with Euclidean distance, utility ceiling sqrt(2).
    Plane,
}

impl Metric {
    pub fn distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        match self {
            Metric::Line => (a[0] - b[0]).abs(),
            Metric::Plane => ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(),
        }
    }

    /// Diameter of the domain; utilities are `ceiling - distance`.
    pub fn utility_ceiling(&self) -> f64 {
        match self {
            Metric::Line => 1.0,
            Metric::Plane => std::f64::consts::SQRT_2,
        }
    }
}

/// One facility: a point of the domain plus its capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct Facility {
    pub position: [f64; 2],
    pub capacity: usize,
}

/// Facility positions paired with capacities, the output of a mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    facilities: Vec<Facility>,
    metric: Metric,
}

impl Placement {
    /// A placement on the unit interval.
    pub fn on_line(positions_and_capacities: &[(f64, usize)]) -> Result<Self> {
        let facilities = positions_and_capacities
            .iter()
            .map(|&(x, k)| {
                if !x.is_finite() {
                    return Err(Error::NonFinite { value: x });
                }
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::OutOfRange { value: x });
                }
                if k == 0 {
                    return Err(Error::InvalidParams("capacity must be at least 1".into()));
                }
                Ok(Facility {
                    position: [x, 0.0],
                    capacity: k,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if facilities.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Placement {
            facilities,
            metric: Metric::Line,
        })
    }

    /// A placement on the unit square.
    pub fn on_plane(positions_and_capacities: &[([f64; 2], usize)]) -> Result<Self> {
        let facilities = positions_and_capacities
            .iter()
            .map(|&(p, k)| {
                for c in p {
                    if !c.is_finite() {
                        return Err(Error::NonFinite { value: c });
                    }
                    if !(0.0..=1.0).contains(&c) {
                        return Err(Error::OutOfRange { value: c });
                    }
                }
                if k == 0 {
                    return Err(Error::InvalidParams("capacity must be at least 1".into()));
                }
                Ok(Facility {
                    position: p,
                    capacity: k,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if facilities.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Placement {
            facilities,
            metric: Metric::Plane,
        })
    }

    pub fn m(&self) -> usize {
        self.facilities.len()
    }

    pub fn facilities(&self) -> &[Facility] {
        &self.facilities
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn utility_ceiling(&self) -> f64 {
        self.metric.utility_ceiling()
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.facilities.iter().map(|f| f.capacity).collect()
    }

    pub fn total_capacity(&self) -> usize {
        self.facilities.iter().map(|f| f.capacity).sum()
    }
}

/// A pure strategy profile: one facility choice per agent, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    choices: Vec<usize>,
}

impl StrategyProfile {
    /// Build from 0-based facility choices.
    pub fn new(choices: Vec<usize>, m: usize) -> Result<Self> {
        if choices.iter().any(|&c| c >= m) {
            return Err(Error::InvalidParams(format!(
                "strategy out of range for m = {m}"
            )));
        }
        Ok(StrategyProfile { choices })
    }

    /// Build from the 1-based facility indices used in serialized form.
    pub fn from_one_based(choices: &[usize], m: usize) -> Result<Self> {
        if choices.iter().any(|&c| c == 0 || c > m) {
            return Err(Error::InvalidParams(format!(
                "1-based strategy out of range for m = {m}"
            )));
        }
        Ok(StrategyProfile {
            choices: choices.iter().map(|&c| c - 1).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.choices.len()
    }

    /// 0-based facility choices.
    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    /// 1-based facility indices, the external serialization.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.choices.iter().map(|&c| c + 1).collect()
    }
}

/// Agent ordering used to break distance ties, plus the fixed
/// lower-facility-index rule for facility ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityRule {
    /// `rank[i]` is the priority rank of agent `i`; lower rank wins ties.
    rank: Vec<usize>,
}

impl PriorityRule {
    /// Default priority: ascending agent index.
    pub fn ascending(n: usize) -> Self {
        PriorityRule {
            rank: (0..n).collect(),
        }
    }

    /// Build from an explicit ordering (a permutation of `0..n`, highest
    /// priority first).
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (r, &agent) in order.iter().enumerate() {
            if agent >= n || rank[agent] != usize::MAX {
                return Err(Error::InvalidParams(
                    "priority ordering must be a permutation of the agents".into(),
                ));
            }
            rank[agent] = r;
        }
        Ok(PriorityRule { rank })
    }

    pub fn n(&self) -> usize {
        self.rank.len()
    }

    pub fn rank(&self, agent: usize) -> usize {
        self.rank[agent]
    }
}

/// Result of resolving one strategy profile: served sets per facility and
/// per-agent utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceOutcome {
    /// Served agent indices per facility, sorted ascending.
    pub served: Vec<Vec<usize>>,
    pub utilities: Vec<f64>,
}

/// Sum of all agents' utilities.
pub fn social_welfare(outcome: &ServiceOutcome) -> f64 {
    outcome.utilities.iter().sum()
}

/// Resolve the FCFS outcome for arbitrary points under the placement's
/// metric. Facility `j` serves the `k_j` claimants closest to it, ties by
/// priority rank.
pub fn resolve_outcome_points(
    points: &[[f64; 2]],
    placement: &Placement,
    profile: &StrategyProfile,
    priority: &PriorityRule,
) -> Result<ServiceOutcome> {
    let n = points.len();
    if profile.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: profile.n(),
        });
    }
    if priority.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: priority.n(),
        });
    }
    let ceiling = placement.utility_ceiling();
    let mut served: Vec<Vec<usize>> = vec![Vec::new(); placement.m()];
    let mut utilities = vec![0.0; n];

    let mut claimants: Vec<(f64, usize, usize)> = Vec::new(); // (distance, rank, agent)
    for (j, facility) in placement.facilities.iter().enumerate() {
        claimants.clear();
        for (i, &p) in points.iter().enumerate() {
            if profile.choices[i] == j {
                claimants.push((placement.metric.distance(p, facility.position), priority.rank(i), i));
            }
        }
        claimants.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        for &(d, _, i) in claimants.iter().take(facility.capacity) {
            utilities[i] = ceiling - d;
            served[j].push(i);
        }
        served[j].sort_unstable();
    }
    Ok(ServiceOutcome { served, utilities })
}

/// Resolve the FCFS outcome on a line instance.
pub fn resolve_outcome(
    instance: &Instance,
    placement: &Placement,
    profile: &StrategyProfile,
    priority: &PriorityRule,
) -> Result<ServiceOutcome> {
    resolve_outcome_points(&instance.points(), placement, profile, priority)
}

fn utility_of_choice(
    points: &[[f64; 2]],
    placement: &Placement,
    profile: &mut StrategyProfile,
    priority: &PriorityRule,
    agent: usize,
    choice: usize,
) -> Result<f64> {
    let original = profile.choices[agent];
    profile.choices[agent] = choice;
    let outcome = resolve_outcome_points(points, placement, profile, priority)?;
    profile.choices[agent] = original;
    Ok(outcome.utilities[agent])
}

/// True when no agent can raise its utility by more than [`NE_GAIN_TOL`]
/// through a unilateral strategy change, re-resolved under the same
/// priority rule.
pub fn is_nash_equilibrium_points(
    points: &[[f64; 2]],
    placement: &Placement,
    profile: &StrategyProfile,
    priority: &PriorityRule,
) -> Result<bool> {
    let outcome = resolve_outcome_points(points, placement, profile, priority)?;
    let mut scratch = profile.clone();
    for agent in 0..points.len() {
        let current = outcome.utilities[agent];
        for alt in 0..placement.m() {
            if alt == profile.choices[agent] {
                continue;
            }
            let deviated =
                utility_of_choice(points, placement, &mut scratch, priority, agent, alt)?;
            if deviated > current + NE_GAIN_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Line wrapper over [`is_nash_equilibrium_points`].
pub fn is_nash_equilibrium(
    instance: &Instance,
    placement: &Placement,
    profile: &StrategyProfile,
    priority: &PriorityRule,
) -> Result<bool> {
    is_nash_equilibrium_points(&instance.points(), placement, profile, priority)
}

/// Construct one pure Nash equilibrium with the greedy claim routine.
///
/// All (agent, facility) distance pairs are processed in increasing
/// distance order, ties broken by the priority rank of the agent and then
/// by the lower facility index. Claiming removes the agent's remaining
/// pairs; a facility that reaches capacity drops out. Agents left without
/// an assignment default to the first facility.
pub fn construct_ne_points(
    points: &[[f64; 2]],
    placement: &Placement,
    priority: &PriorityRule,
) -> Result<StrategyProfile> {
    let n = points.len();
    if priority.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: priority.n(),
        });
    }
    let m = placement.m();
    // (distance, agent priority rank, facility index, agent index)
    let mut pairs: Vec<(f64, usize, usize, usize)> = Vec::with_capacity(n * m);
    for (i, &p) in points.iter().enumerate() {
        for (j, facility) in placement.facilities.iter().enumerate() {
            pairs.push((
                placement.metric.distance(p, facility.position),
                priority.rank(i),
                j,
                i,
            ));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite distances")
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut remaining_capacity: Vec<usize> = placement.capacities();
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    for &(_, _, j, i) in &pairs {
        if assigned[i].is_some() || remaining_capacity[j] == 0 {
            continue;
        }
        assigned[i] = Some(j);
        remaining_capacity[j] -= 1;
    }
    let choices: Vec<usize> = assigned.into_iter().map(|a| a.unwrap_or(0)).collect();
    StrategyProfile::new(choices, m)
}

/// Line wrapper over [`construct_ne_points`].
pub fn construct_ne(
    instance: &Instance,
    placement: &Placement,
    priority: &PriorityRule,
) -> Result<StrategyProfile> {
    construct_ne_points(&instance.points(), placement, priority)
}

fn decode_profile(mut code: u128, n: usize, m: usize) -> StrategyProfile {
    let mut choices = vec![0usize; n];
    for slot in choices.iter_mut() {
        *slot = (code % m as u128) as usize;
        code /= m as u128;
    }
    StrategyProfile { choices }
}

/// Exhaustively enumerate every pure Nash equilibrium, in canonical
/// (lexicographic code) order. Errors with `TooLarge` when `m^n` exceeds
/// `cap`.
pub fn enumerate_ne_points(
    points: &[[f64; 2]],
    placement: &Placement,
    priority: &PriorityRule,
    cap: u128,
) -> Result<Vec<StrategyProfile>> {
    let n = points.len() as u32;
    let m = placement.m() as u128;
    let total = m
        .checked_pow(n)
        .filter(|&t| t <= cap)
        .ok_or(Error::TooLarge {
            profiles: u128::MAX,
            cap,
        })?;
    if total > cap {
        return Err(Error::TooLarge {
            profiles: total,
            cap,
        });
    }
    let codes: Vec<u128> = (0..total).collect();
    let mut equilibria: Vec<(u128, StrategyProfile)> = codes
        .par_iter()
        .filter_map(|&code| {
            let profile = decode_profile(code, points.len(), placement.m());
            match is_nash_equilibrium_points(points, placement, &profile, priority) {
                Ok(true) => Some(Ok((code, profile))),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    equilibria.sort_by_key(|(code, _)| *code);
    Ok(equilibria.into_iter().map(|(_, p)| p).collect())
}

/// Line wrapper over [`enumerate_ne_points`].
pub fn enumerate_ne(
    instance: &Instance,
    placement: &Placement,
    priority: &PriorityRule,
    cap: u128,
) -> Result<Vec<StrategyProfile>> {
    enumerate_ne_points(&instance.points(), placement, priority, cap)
}

/// Deduplicate welfare values at [`WELFARE_TOL`], sorted ascending.
fn dedup_welfare(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite welfare"));
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if out.last().is_none_or(|&last| v - last > WELFARE_TOL) {
            out.push(v);
        }
    }
    out
}

/// Enumerate all equilibria and report whether they share one welfare
/// value (within [`WELFARE_TOL`]), together with the deduplicated welfare
/// values observed.
pub fn check_equilibrium_stability_points(
    points: &[[f64; 2]],
    placement: &Placement,
    priority: &PriorityRule,
    cap: u128,
) -> Result<(bool, Vec<f64>)> {
    let equilibria = enumerate_ne_points(points, placement, priority, cap)?;
    let welfare: Vec<f64> = equilibria
        .iter()
        .map(|p| {
            resolve_outcome_points(points, placement, p, priority).map(|o| social_welfare(&o))
        })
        .collect::<Result<Vec<_>>>()?;
    let deduped = dedup_welfare(welfare);
    Ok((deduped.len() <= 1, deduped))
}

/// Line wrapper over [`check_equilibrium_stability_points`].
pub fn check_equilibrium_stability(
    instance: &Instance,
    placement: &Placement,
    priority: &PriorityRule,
    cap: u128,
) -> Result<(bool, Vec<f64>)> {
    check_equilibrium_stability_points(&instance.points(), placement, priority, cap)
}

/// Outcome dump rows for CSV export: agent, position, strategy (1-based),
/// served flag, utility.
pub fn outcome_rows(
    instance: &Instance,
    profile: &StrategyProfile,
    outcome: &ServiceOutcome,
) -> Vec<(usize, f64, usize, bool, f64)> {
    let mut served_flags = vec![false; instance.n()];
    for facility_served in &outcome.served {
        for &i in facility_served {
            served_flags[i] = true;
        }
    }
    (0..instance.n())
        .map(|i| {
            (
                i + 1,
                instance.positions()[i],
                profile.choices[i] + 1,
                served_flags[i],
                outcome.utilities[i],
            )
        })
        .collect()
}

/// Convenience: build the placement for Example-1-style tests.
#[cfg(test)]
pub(crate) fn line_placement(positions_and_caps: &[(f64, usize)]) -> Placement {
    Placement::on_line(positions_and_caps).unwrap()
}
