//! Worst-case ratio formulas, the proof-family worst-case instance
//! generators, the matching-based welfare upper bound, empirical ratio
//! computation, and the truthfulness auditor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::assignment::max_weight_assignment;
use crate::error::{Error, Result};
use crate::fcfs::{
    construct_ne, resolve_outcome, resolve_outcome_points, social_welfare, Placement,
    PriorityRule, StrategyProfile,
};
use crate::instance::{make_instance, CapacityVector, Instance};
use crate::mechanisms::{apply_percentile, es_condition, MechanismKind, PercentileVector};

/// Tolerance for ratio attainment checks.
pub const RATIO_TOL: f64 = 1e-9;

/// A closed-form worst-case ratio together with the welfare values behind
/// it: `ratio = numerator_welfare / denominator_welfare` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFormulaResult {
    pub ratio: f64,
    pub active_case: &'static str,
    /// Optimal welfare on the extremal instance.
    pub numerator_welfare: f64,
    /// Mechanism welfare on the extremal instance.
    pub denominator_welfare: f64,
}

impl RatioFormulaResult {
    fn new(numerator: f64, denominator: f64, active_case: &'static str) -> Self {
        RatioFormulaResult {
            ratio: numerator / denominator,
            active_case,
            numerator_welfare: numerator,
            denominator_welfare: denominator,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "ratio": self.ratio,
            "case": self.active_case,
            "num": self.numerator_welfare,
            "den": self.denominator_welfare,
        })
    }
}

/// A proof-family extremal instance, with the family parameter and the
/// ratio it achieves.
#[derive(Debug, Clone)]
pub struct WorstCaseInstance {
    pub instance: Instance,
    pub lambda: f64,
    pub form_label: &'static str,
    pub achieved_ratio: f64,
}

fn floor_half(k: usize) -> usize {
    k.div_ceil(2)
}

/// Worst-case ratio of a stable wide-gap two-facility percentile
/// mechanism with capacity `k1` on sorted index `i1` and `k2` on `i2`
/// (1-based, `k1 >= k2`).
///
/// The interior case applies when both margins leave room for a half-split
/// around the facility (`i1 >= floor((k1+1)/2)` and
/// `n - i2 >= floor((k2+1)/2)`); a thin left margin with an interior right
/// facility forms the plateau case; everything else collapses to the
/// left-anchored case.
pub fn ar_wg(n: usize, k1: usize, k2: usize, i1: usize, i2: usize) -> Result<RatioFormulaResult> {
    if k1 < k2 || k2 == 0 {
        return Err(Error::InvalidParams(
            "capacities must satisfy k1 >= k2 >= 1".into(),
        ));
    }
    if i1 == 0 || i2 <= i1 || i2 > n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= i1 < i2 <= n, got ({i1}, {i2}) with n = {n}"
        )));
    }
    if k1 + k2 >= n {
        return Err(Error::Infeasible(format!(
            "k1 + k2 = {} must be below n = {n}",
            k1 + k2
        )));
    }
    if i2 - i1 < k1 + k2 - 1 {
        return Err(Error::NotEquilibriumStable(format!(
            "index gap {} below k1 + k2 - 1 = {}",
            i2 - i1,
            k1 + k2 - 1
        )));
    }
    let numerator = (k1 + k2) as f64;
    let half_k1 = (k1 + 1) as f64 / 2.0;
    let half_k2 = (k2 + 1) as f64 / 2.0;
    let right = n - i2;
    let (denominator, case) = if i1 >= floor_half(k1) && right >= floor_half(k2) {
        (
            ((k1 + right + 1) as f64).min(half_k1 + k2 as f64),
            "case-1",
        )
    } else if i1 < floor_half(k1) && i2 < n - floor_half(k2) {
        (
            ((k1 + right + 1) as f64).min((i1 + k2) as f64),
            "case-2",
        )
    } else {
        (
            (k1 as f64 + half_k2).min((k2 + i1) as f64),
            "case-3",
        )
    };
    Ok(RatioFormulaResult::new(numerator, denominator, case))
}

/// Worst-case ratio of the all-in-one mechanism on the median agent with
/// two capacities `k1 >= k2`.
pub fn ar_median_aio(n: usize, k1: usize, k2: usize) -> Result<RatioFormulaResult> {
    if k1 < k2 || k2 == 0 {
        return Err(Error::InvalidParams(
            "capacities must satisfy k1 >= k2 >= 1".into(),
        ));
    }
    if k1 + k2 >= n {
        return Err(Error::Infeasible(format!(
            "k1 + k2 = {} must be below n = {n}",
            k1 + k2
        )));
    }
    let denominator = (k1 + k2 + 1) as f64 / 2.0;
    if k1 >= n.div_ceil(2) {
        let numerator = (2 * k2 + 2 * (n / 2) + 1) as f64 / 2.0;
        Ok(RatioFormulaResult::new(
            numerator,
            denominator,
            "median-dominant-capacity",
        ))
    } else {
        let numerator = (k1 + k2) as f64;
        Ok(RatioFormulaResult::new(
            numerator,
            denominator,
            "median-balanced",
        ))
    }
}

/// Worst-case ratio of a stable evenly spread mechanism for `m` facilities
/// of uniform capacity `k`, given its extreme indices `i1` and `im`.
pub fn ar_uniform_m(
    n: usize,
    k: usize,
    m: usize,
    i1: usize,
    im: usize,
) -> Result<RatioFormulaResult> {
    if m < 2 || k == 0 {
        return Err(Error::InvalidParams(
            "need at least two facilities of positive capacity".into(),
        ));
    }
    if m * k >= n {
        return Err(Error::Infeasible(format!(
            "total capacity {} must be below n = {n}",
            m * k
        )));
    }
    if i1 == 0 || im > n || im <= i1 {
        return Err(Error::InvalidParams(format!(
            "need 1 <= i1 < im <= n, got ({i1}, {im})"
        )));
    }
    if im - i1 < (2 * k - 1) * (m - 1) {
        return Err(Error::NotEquilibriumStable(format!(
            "extreme index span {} below (2k-1)(m-1) = {}",
            im - i1,
            (2 * k - 1) * (m - 1)
        )));
    }
    let numerator = (m * k) as f64;
    let margin = floor_half(k);
    let (denominator, case) = if i1 >= margin && n - im >= margin {
        (
            (m as f64 - 0.5) * k as f64 + 0.5,
            "interior-margins",
        )
    } else {
        (
            ((m - 1) * k + i1.min(n - im)) as f64,
            "thin-margin",
        )
    };
    Ok(RatioFormulaResult::new(numerator, denominator, case))
}

/// Worst-case ratio of the all-in-one median mechanism for `m` facilities
/// of uniform capacity `k > 1`.
pub fn ar_aio_m(n: usize, k: usize, m: usize) -> Result<RatioFormulaResult> {
    if k <= 1 {
        return Err(Error::InvalidParams(
            "the single-point bound needs capacity k > 1".into(),
        ));
    }
    if m == 0 || m * k >= n {
        return Err(Error::Infeasible(format!(
            "total capacity {} must be below n = {n}",
            m * k
        )));
    }
    let denominator = (m * k + 1) as f64 / 2.0;
    if n <= (m + 1) * k {
        let numerator = (2 * (m - 1) * k + (n - (m - 1) * k) + 1) as f64 / 2.0;
        Ok(RatioFormulaResult::new(numerator, denominator, "small-population"))
    } else {
        let numerator = (m * k) as f64;
        Ok(RatioFormulaResult::new(numerator, denominator, "large-population"))
    }
}

fn distinct_capacity_orders(capacities: &[usize]) -> Vec<Vec<usize>> {
    let mut sorted = capacities.to_vec();
    sorted.sort_unstable();
    let mut orders = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; sorted.len()];
    fn recurse(
        sorted: &[usize],
        used: &mut Vec<bool>,
        current: &mut Vec<usize>,
        orders: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == sorted.len() {
            orders.push(current.clone());
            return;
        }
        let mut previous: Option<usize> = None;
        for idx in 0..sorted.len() {
            if used[idx] || previous == Some(sorted[idx]) {
                continue;
            }
            previous = Some(sorted[idx]);
            used[idx] = true;
            current.push(sorted[idx]);
            recurse(sorted, used, current, orders);
            current.pop();
            used[idx] = false;
        }
    }
    recurse(&sorted, &mut used, &mut current, &mut orders);
    orders
}

fn position_tuples(unique: &[f64], m: usize) -> Vec<Vec<f64>> {
    // Non-decreasing m-tuples over the unique positions.
    let mut tuples = Vec::new();
    let mut current = vec![0.0; m];
    fn recurse(
        unique: &[f64],
        start: usize,
        depth: usize,
        current: &mut Vec<f64>,
        tuples: &mut Vec<Vec<f64>>,
    ) {
        if depth == current.len() {
            tuples.push(current.clone());
            return;
        }
        for idx in start..unique.len() {
            current[depth] = unique[idx];
            recurse(unique, idx, depth + 1, current, tuples);
        }
    }
    recurse(unique, 0, 0, &mut current, &mut tuples);
    tuples
}

fn assignment_value_at(positions: &[f64], facility_at: &[f64], capacities: &[usize]) -> f64 {
    let weights: Vec<Vec<f64>> = positions
        .iter()
        .map(|&x| facility_at.iter().map(|&y| 1.0 - (x - y).abs()).collect())
        .collect();
    max_weight_assignment(&weights, capacities).0
}

/// Matching-based upper bound on the optimal welfare: the designer places
/// facilities on agent positions and assigns agents outright. Dominates
/// the welfare of every equilibrium of every placement restricted to agent
/// positions.
pub fn sw_upper_bound(instance: &Instance, capacities: &CapacityVector) -> Result<f64> {
    capacities.check_feasible_for(instance.n())?;
    let mut unique: Vec<f64> = instance.positions().to_vec();
    unique.dedup();
    let orders = distinct_capacity_orders(capacities.capacities());
    let mut best = f64::NEG_INFINITY;
    for tuple in position_tuples(&unique, capacities.m()) {
        for order in &orders {
            let value = assignment_value_at(instance.positions(), &tuple, order);
            if value > best {
                best = value;
            }
        }
    }
    Ok(best)
}

/// Variant of [`sw_upper_bound`] searching facility positions over a
/// regular grid of the given step joined with the agent positions. Used to
/// sanity-check the agent-position restriction on small instances.
pub fn sw_upper_bound_fine_grid(
    instance: &Instance,
    capacities: &CapacityVector,
    step: f64,
) -> Result<f64> {
    capacities.check_feasible_for(instance.n())?;
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParams("grid step must be in (0, 1]".into()));
    }
    let mut grid: Vec<f64> = Vec::new();
    let count = (1.0 / step).round() as usize;
    for idx in 0..=count {
        grid.push((idx as f64 * step).min(1.0));
    }
    grid.extend_from_slice(instance.positions());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    let orders = distinct_capacity_orders(capacities.capacities());
    let mut best = f64::NEG_INFINITY;
    for tuple in position_tuples(&grid, capacities.m()) {
        for order in &orders {
            let value = assignment_value_at(instance.positions(), &tuple, order);
            if value > best {
                best = value;
            }
        }
    }
    Ok(best)
}

/// Mechanism welfare via the constructive equilibrium (stable mechanisms
/// make this equilibrium-independent).
pub fn mechanism_welfare(
    instance: &Instance,
    placement: &Placement,
    priority: &PriorityRule,
) -> Result<f64> {
    let profile = construct_ne(instance, placement, priority)?;
    let outcome = resolve_outcome(instance, placement, &profile, priority)?;
    Ok(social_welfare(&outcome))
}

/// Upper-bound welfare divided by the mechanism's equilibrium welfare.
/// Only defined for stable percentile mechanisms.
pub fn empirical_ratio(
    instance: &Instance,
    v: &PercentileVector,
    capacities: &CapacityVector,
    priority: &PriorityRule,
) -> Result<f64> {
    if !es_condition(v, instance.n(), capacities)? {
        return Err(Error::NotEquilibriumStable(
            "the percentile vector admits welfare-distinct equilibria; \
             averaging its welfare is ill-defined"
                .into(),
        ));
    }
    let placement = apply_percentile(v, instance, capacities)?;
    let mech = mechanism_welfare(instance, &placement, priority)?;
    let ub = sw_upper_bound(instance, capacities)?;
    Ok(ub / mech)
}

fn placement_at_indices(
    instance: &Instance,
    indices: &[usize],
    capacities: &[usize],
) -> Result<Placement> {
    let spots: Vec<(f64, usize)> = indices
        .iter()
        .zip(capacities.iter())
        .map(|(&i, &k)| (instance.position_1based(i), k))
        .collect();
    Placement::on_line(&spots)
}

struct Candidate {
    positions: Vec<f64>,
    lambda: f64,
    form_label: &'static str,
}

fn zeros_then(values: &[(f64, usize)]) -> Vec<f64> {
    let mut out = Vec::new();
    for &(value, count) in values {
        out.extend(std::iter::repeat_n(value, count));
    }
    out
}

fn wide_gap_candidates(n: usize, i1: usize, i2: usize, case: &str) -> Vec<Candidate> {
    let lambdas = [0.5, 0.0, 1.0];
    let mut out = Vec::new();
    match case {
        "case-1" => {
            for &lambda in &lambdas {
                out.push(Candidate {
                    positions: zeros_then(&[
                        (0.0, i1 - 1),
                        (lambda, 1),
                        ((2.0 * lambda).min(1.0), i2 - i1 - 1),
                        ((lambda + 0.5).min(1.0), 1),
                        (1.0, n - i2),
                    ]),
                    lambda,
                    form_label: "interior-family",
                });
            }
            out.push(Candidate {
                positions: zeros_then(&[(0.0, i2 - 1), (1.0, n - i2 + 1)]),
                lambda: 1.0,
                form_label: "right-split",
            });
        }
        "case-2" => {
            for &lambda in &lambdas {
                out.push(Candidate {
                    positions: zeros_then(&[
                        (0.0, i1),
                        (lambda, i2 - i1 - 1),
                        (1.0, n - i2 + 1),
                    ]),
                    lambda,
                    form_label: "plateau-family",
                });
            }
        }
        _ => {
            for &lambda in &lambdas {
                out.push(Candidate {
                    positions: zeros_then(&[
                        (0.0, i1),
                        (lambda, i2 - i1 - 1),
                        ((lambda + 1.0) / 2.0, 1),
                        (1.0, n - i2),
                    ]),
                    lambda,
                    form_label: "plateau-edge-family",
                });
            }
            out.push(Candidate {
                positions: zeros_then(&[(0.0, i2 - 1), (1.0, n - i2 + 1)]),
                lambda: 1.0,
                form_label: "right-split",
            });
        }
    }
    out
}

fn grid_candidate(n: usize, m: usize, indices: &[usize]) -> Candidate {
    // Facility j sits at (2j - 1) / (2m); agents strictly between two
    // facility indices sit on the midpoint grid l / m.
    let mut positions = vec![0.0; n];
    for (agent_slot, position) in positions.iter_mut().enumerate() {
        let idx = agent_slot + 1;
        if idx < indices[0] {
            *position = 0.0;
        } else if idx > indices[m - 1] {
            *position = 1.0;
        } else if let Some(j) = indices.iter().position(|&fi| fi == idx) {
            *position = (2 * j + 1) as f64 / (2 * m) as f64;
        } else {
            let level = indices.iter().filter(|&&fi| fi < idx).count();
            *position = level as f64 / m as f64;
        }
    }
    Candidate {
        positions,
        lambda: 0.5,
        form_label: "uniform-grid",
    }
}

/// Build the extremal instance for a mechanism class out of its proof
/// family: the family member maximizing upper-bound over mechanism welfare
/// is returned. Capacities are assigned to the given sorted indices in
/// order; all-in-one kinds take the median agent.
pub fn worst_case_instance(
    kind: MechanismKind,
    n: usize,
    capacities: &CapacityVector,
    indices: &[usize],
) -> Result<WorstCaseInstance> {
    if capacities.total() >= n {
        return Err(Error::Infeasible(format!(
            "total capacity {} must be below n = {n}",
            capacities.total()
        )));
    }
    let caps = capacities.capacities();
    let (candidates, facility_indices): (Vec<Candidate>, Vec<usize>) = match kind {
        MechanismKind::WideGap | MechanismKind::AllAside => {
            if capacities.m() != 2 || indices.len() != 2 {
                return Err(Error::UnsupportedCase(
                    "two merged capacities and two indices are required".into(),
                ));
            }
            let (i1, i2) = (indices[0], indices[1]);
            let formula = ar_wg(n, caps[0], caps[1], i1, i2)?;
            (
                wide_gap_candidates(n, i1, i2, formula.active_case),
                indices.to_vec(),
            )
        }
        MechanismKind::Aio => {
            let median = n.div_ceil(2);
            let family = [0.5, 0.0, 1.0]
                .iter()
                .map(|&lambda| Candidate {
                    positions: zeros_then(&[
                        (0.0, median - 1),
                        (lambda, 1),
                        (1.0, n - median),
                    ]),
                    lambda,
                    form_label: "median-family",
                })
                .collect();
            (family, vec![median; capacities.m()])
        }
        MechanismKind::Sbs => {
            if indices.len() != capacities.m() {
                return Err(Error::UnsupportedCase(
                    "one index per facility is required".into(),
                ));
            }
            let left = indices[0];
            let family = [0.5, 0.0, 1.0]
                .iter()
                .map(|&lambda| Candidate {
                    positions: zeros_then(&[
                        (0.0, left - 1),
                        (lambda, 1),
                        (1.0, n - left),
                    ]),
                    lambda,
                    form_label: "adjacent-family",
                })
                .collect();
            (family, indices.to_vec())
        }
        MechanismKind::UniformGrid => {
            let m = capacities.m();
            if indices.len() != m || m < 2 {
                return Err(Error::UnsupportedCase(
                    "a full index list for at least two facilities is required".into(),
                ));
            }
            if !capacities.is_uniform() {
                return Err(Error::UnsupportedCase(
                    "the spread construction assumes uniform capacities".into(),
                ));
            }
            let mut family = vec![grid_candidate(n, m, indices)];
            family.push(Candidate {
                positions: zeros_then(&[(0.0, indices[0]), (1.0, n - indices[0])]),
                lambda: 0.0,
                form_label: "left-split",
            });
            family.push(Candidate {
                positions: zeros_then(&[
                    (0.0, indices[m - 1] - 1),
                    (1.0, n - indices[m - 1] + 1),
                ]),
                lambda: 1.0,
                form_label: "right-split",
            });
            (family, indices.to_vec())
        }
    };

    let priority = PriorityRule::ascending(n);
    let mut best: Option<WorstCaseInstance> = None;
    for candidate in candidates {
        let instance = make_instance(&candidate.positions)?;
        let placement = placement_at_indices(&instance, &facility_indices, caps)?;
        let mech = mechanism_welfare(&instance, &placement, &priority)?;
        let ub = sw_upper_bound(&instance, capacities)?;
        let ratio = ub / mech;
        if best.as_ref().is_none_or(|b| ratio > b.achieved_ratio) {
            best = Some(WorstCaseInstance {
                instance,
                lambda: candidate.lambda,
                form_label: candidate.form_label,
                achieved_ratio: ratio,
            });
        }
    }
    best.ok_or_else(|| Error::Infeasible("no candidate instance".into()))
}

/// Witness that an agent can profit from misreporting.
#[derive(Debug, Clone)]
pub struct TruthfulnessWitness {
    pub agent: usize,
    pub misreport: f64,
    pub opponent_profile: StrategyProfile,
    pub gain: f64,
}

/// Exhaustive opponent-profile threshold for the truthfulness audit.
const EXHAUSTIVE_PROFILE_LIMIT: u128 = 1 << 15;
/// Sampled opponent profiles when exhaustion is too large.
const SAMPLED_PROFILES: usize = 500;
const AUDIT_SAMPLE_SEED: u64 = 0xA0D17;
const TRUTHFULNESS_TOL: f64 = 1e-12;

fn opponent_profiles(n: usize, m: usize, agent: usize) -> Vec<Vec<usize>> {
    let others = n - 1;
    let total = (m as u128).checked_pow(others as u32);
    match total {
        Some(t) if t <= EXHAUSTIVE_PROFILE_LIMIT => {
            let mut out = Vec::with_capacity(t as usize);
            for code in 0..t {
                let mut c = code;
                let mut profile = vec![0usize; n];
                for (slot, choice) in profile.iter_mut().enumerate() {
                    if slot == agent {
                        continue;
                    }
                    *choice = (c % m as u128) as usize;
                    c /= m as u128;
                }
                out.push(profile);
            }
            out
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SAMPLE_SEED);
            (0..SAMPLED_PROFILES)
                .map(|_| {
                    (0..n)
                        .map(|slot| if slot == agent { 0 } else { rng.gen_range(0..m) })
                        .collect()
                })
                .collect()
        }
    }
}

fn best_reply_utility(
    points: &[[f64; 2]],
    placement: &Placement,
    base: &[usize],
    agent: usize,
    priority: &PriorityRule,
) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut choices = base.to_vec();
    for choice in 0..placement.m() {
        choices[agent] = choice;
        let profile = StrategyProfile::new(choices.clone(), placement.m())?;
        let outcome = resolve_outcome_points(points, placement, &profile, priority)?;
        best = best.max(outcome.utilities[agent]);
    }
    Ok(best)
}

/// Audit one agent of a placement rule against every misreport on a grid:
/// `None` when no misreport raises the agent's best-reply utility for any
/// opponent profile, otherwise the witness at the earliest grid point.
///
/// Opponent profiles are exhausted while `m^(n-1)` stays within 2^15 and
/// sampled (500 profiles, fixed seed) beyond that. Grid points are scanned
/// in parallel; the reduction keeps the lowest grid index, so the result
/// does not depend on scheduling.
pub fn check_absolute_truthfulness<F>(
    mechanism: F,
    instance: &Instance,
    agent: usize,
    misreport_grid: &[f64],
    priority: &PriorityRule,
) -> Result<Option<TruthfulnessWitness>>
where
    F: Fn(&Instance) -> Result<Placement> + Sync,
{
    let n = instance.n();
    if agent >= n {
        return Err(Error::InvalidParams(format!(
            "agent index {agent} out of range for n = {n}"
        )));
    }
    for &x in misreport_grid {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfRange { value: x });
        }
    }
    let truthful_placement = mechanism(instance)?;
    let m = truthful_placement.m();
    let true_points = instance.points();
    let profiles = opponent_profiles(n, m, agent);

    let baseline: Vec<f64> = profiles
        .iter()
        .map(|base| best_reply_utility(&true_points, &truthful_placement, base, agent, priority))
        .collect::<Result<Vec<_>>>()?;

    let audit_one = |misreport: f64| -> Result<Option<TruthfulnessWitness>> {
        let mut lied = instance.positions().to_vec();
        lied[agent] = misreport;
        let lied_instance = make_instance(&lied)?;
        let lied_placement = mechanism(&lied_instance)?;
        if lied_placement.m() != m {
            return Err(Error::UnsupportedCase(
                "placement rule changed facility count under misreport".into(),
            ));
        }
        for (base, &before) in profiles.iter().zip(baseline.iter()) {
            let after = best_reply_utility(&true_points, &lied_placement, base, agent, priority)?;
            if after > before + TRUTHFULNESS_TOL {
                return Ok(Some(TruthfulnessWitness {
                    agent,
                    misreport,
                    opponent_profile: StrategyProfile::new(base.clone(), m)?,
                    gain: after - before,
                }));
            }
        }
        Ok(None)
    };

    use rayon::prelude::*;
    let hits: Vec<(usize, Option<TruthfulnessWitness>)> = misreport_grid
        .par_iter()
        .enumerate()
        .map(|(idx, &misreport)| audit_one(misreport).map(|w| (idx, w)))
        .collect::<Result<Vec<_>>>()?;
    Ok(hits
        .into_iter()
        .filter_map(|(idx, witness)| witness.map(|w| (idx, w)))
        .min_by_key(|(idx, _)| *idx)
        .map(|(_, w)| w))
}

/// Non-truthful control: every facility on the average report.
pub fn mean_mechanism_placement(
    instance: &Instance,
    capacities: &CapacityVector,
) -> Result<Placement> {
    let mean = instance.positions().iter().sum::<f64>() / instance.n() as f64;
    let spots: Vec<(f64, usize)> = capacities
        .capacities()
        .iter()
        .map(|&k| (mean, k))
        .collect();
    Placement::on_line(&spots)
}

/// An evenly spaced misreport grid over the unit interval.
pub fn misreport_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParams("grid step must be in (0, 1]".into()));
    }
    let count = (1.0 / step).round() as usize;
    Ok((0..=count).map(|i| (i as f64 * step).min(1.0)).collect())
}
