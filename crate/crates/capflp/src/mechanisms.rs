//! The percentile mechanism family: placement, taxonomy, equilibrium
//! stability conditions, best-vector selection, and the two-sided
//! all-aside grouping for small populations.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis;
use crate::error::{Error, Result};
use crate::fcfs::Placement;
use crate::instance::{CapacityVector, Instance};

/// A sorted percentile vector with a capacity-to-slot assignment. With the
/// identity assignment, capacity `k_1` lands on the leftmost slot; for two
/// facilities the convention is to pass capacities largest first, so the
/// biggest facility sits left. [`PercentileVector::mirrored`] flips that.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileVector {
    /// Entries `v_1 <= ... <= v_m`, each in `[0, 1]`.
    #[serde(rename = "v")]
    entries: Vec<f64>,
    /// `assignment[j]` is the index of the capacity placed on slot `j`
    /// (0-based).
    assignment: Vec<usize>,
}

impl PercentileVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let assignment = (0..entries.len()).collect();
        Self::with_assignment(entries, assignment)
    }

    pub fn with_assignment(entries: Vec<f64>, assignment: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput);
        }
        for &v in &entries {
            if !v.is_finite() {
                return Err(Error::NonFinite { value: v });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { value: v });
            }
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParams(
                "percentile entries must be sorted ascending".into(),
            ));
        }
        let m = entries.len();
        let mut seen = vec![false; m];
        if assignment.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: assignment.len(),
            });
        }
        for &a in &assignment {
            if a >= m || seen[a] {
                return Err(Error::InvalidParams(
                    "capacity assignment must be a permutation of the slots".into(),
                ));
            }
            seen[a] = true;
        }
        Ok(PercentileVector {
            entries,
            assignment,
        })
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// The symmetric variant with the capacity assignment reversed.
    pub fn mirrored(&self) -> Self {
        PercentileVector {
            entries: self.entries.clone(),
            assignment: self.assignment.iter().rev().copied().collect(),
        }
    }
}

/// Structural class of a percentile mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MechanismKind {
    /// All facilities on one agent.
    Aio,
    /// Facilities on two adjacent agents.
    Sbs,
    /// Facilities separated by more than one sorted index.
    WideGap,
    /// Facilities grouped at two positions, capacities merged.
    AllAside,
    /// Evenly spread single-capacity facilities.
    UniformGrid,
}

/// The tailored percentile vector for a given population and capacity
/// profile, together with its predicted worst-case ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BestVectorReport {
    /// 1-based sorted agent indices the facilities land on.
    pub indices: Vec<usize>,
    pub vector: PercentileVector,
    pub predicted_ratio: f64,
    pub case_label: &'static str,
}

impl BestVectorReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "indices": self.indices,
            "v": self.vector.entries(),
            "assignment": self.vector.assignment(),
            "predicted_ratio": self.predicted_ratio,
            "case_label": self.case_label,
        })
    }
}

/// 1-based sorted-agent indices selected by a percentile vector:
/// `i_j = floor((n-1) * v_j) + 1`.
pub fn percentile_indices(v: &PercentileVector, n: usize) -> Vec<usize> {
    v.entries
        .iter()
        .map(|&vj| ((n - 1) as f64 * vj).floor() as usize + 1)
        .collect()
}

fn index_for_fraction(target: usize, n: usize) -> f64 {
    // v = i/n reproduces index i under floor((n-1)v) + 1; verify against
    // floating point and nudge upward half a grid step if a floor boundary
    // disagrees.
    let v = target as f64 / n as f64;
    let reproduced = ((n - 1) as f64 * v).floor() as usize + 1;
    if reproduced == target {
        v
    } else {
        v + 1.0 / (2.0 * n as f64 * (n - 1) as f64)
    }
}

/// Place facilities on the percentile agents of a sorted instance.
pub fn apply_percentile(
    v: &PercentileVector,
    instance: &Instance,
    capacities: &CapacityVector,
) -> Result<Placement> {
    if capacities.m() != v.m() {
        return Err(Error::LengthMismatch {
            expected: v.m(),
            actual: capacities.m(),
        });
    }
    capacities.check_feasible_for(instance.n())?;
    let indices = percentile_indices(v, instance.n());
    let spots: Vec<(f64, usize)> = indices
        .iter()
        .zip(v.assignment.iter())
        .map(|(&i, &slot)| {
            (
                instance.position_1based(i),
                capacities.capacities()[slot],
            )
        })
        .collect();
    Placement::on_line(&spots)
}

/// Classify a two-facility percentile mechanism by the gap between its
/// sorted indices.
pub fn classify_percentile(v: &PercentileVector, n: usize) -> Result<MechanismKind> {
    if v.m() != 2 {
        return Err(Error::UnsupportedArity { m: v.m() });
    }
    let idx = percentile_indices(v, n);
    Ok(match idx[1] - idx[0] {
        0 => MechanismKind::Aio,
        1 => MechanismKind::Sbs,
        _ => MechanismKind::WideGap,
    })
}

/// Closed-form equilibrium-stability test for a percentile mechanism.
///
/// Facilities sharing one index always qualify, as do two groups on
/// adjacent agents. Two separated groups need at least `K_1 + K_2 - 1`
/// further agents between them (merged group capacities); with more than
/// two facilities and uniform capacity `k` this becomes the gap system
/// `i_{j+1} - i_j >= 2k - 1` for consecutive distinct positions.
pub fn es_condition(v: &PercentileVector, n: usize, capacities: &CapacityVector) -> Result<bool> {
    if capacities.m() != v.m() {
        return Err(Error::LengthMismatch {
            expected: v.m(),
            actual: capacities.m(),
        });
    }
    capacities.check_feasible_for(n)?;
    if v.m() > 2 && !capacities.is_uniform() {
        return Err(Error::UnsupportedCase(
            "stability characterization for more than two facilities requires uniform capacities"
                .into(),
        ));
    }
    let indices = percentile_indices(v, n);
    // Group consecutive equal indices, merging their capacities.
    let caps = capacities.capacities();
    let mut groups: Vec<(usize, usize)> = Vec::new(); // (index, merged capacity)
    for (pos, &idx) in indices.iter().enumerate() {
        let k = caps[v.assignment[pos]];
        match groups.last_mut() {
            Some((gidx, gk)) if *gidx == idx => *gk += k,
            _ => groups.push((idx, k)),
        }
    }
    if groups.len() == 1 {
        return Ok(true);
    }
    if groups.len() == 2 && groups[1].0 - groups[0].0 == 1 {
        return Ok(true);
    }
    Ok(groups
        .windows(2)
        .all(|w| w[1].0 - w[0].0 >= w[0].1 + w[1].1 - 1))
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// The wide-gap percentile vector with the lowest worst-case ratio for a
/// population of `n` agents and capacities `k1 >= k2`.
pub fn best_wg_vector(n: usize, k1: usize, k2: usize) -> Result<BestVectorReport> {
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
    let delta = n - (k1 + k2);
    let (i1, i2, denominator, case_label) = if delta >= ceil_div(k1 + k2, 2) {
        let i1 = ceil_div(k1, 2);
        let i2 = n - k2 / 2;
        (i1, i2, (k1 + 1) as f64 / 2.0 + k2 as f64, "thm5-i")
    } else if delta >= k1 - k2 {
        let alpha = ceil_div(delta - (k1 - k2), 2);
        let i1 = k1 - k2 + alpha;
        let i2 = n - alpha;
        (i1, i2, (i1 + k2) as f64, "thm5-ii")
    } else {
        (delta + 1, n, (delta + k2 + 1) as f64, "thm5-iii")
    };
    let entries = vec![index_for_fraction(i1, n), index_for_fraction(i2, n)];
    let vector = PercentileVector::new(entries)?;
    let reproduced = percentile_indices(&vector, n);
    debug_assert_eq!(reproduced, vec![i1, i2]);
    let capacities = CapacityVector::new(vec![k1, k2])?;
    if !es_condition(&vector, n, &capacities)? {
        return Err(Error::Infeasible(format!(
            "selected indices ({i1}, {i2}) do not satisfy the stability gap"
        )));
    }
    Ok(BestVectorReport {
        indices: vec![i1, i2],
        vector,
        predicted_ratio: (k1 + k2) as f64 / denominator,
        case_label,
    })
}

/// The evenly spread percentile vector for `m` facilities of uniform
/// capacity `k`: consecutive indices are `2k - 1` apart, centred in the
/// population. Infeasible when `n < (2k - 1) m`, signalling a fallback to
/// an all-aside or single-point mechanism.
pub fn best_uniform_vector_m(n: usize, k: usize, m: usize) -> Result<BestVectorReport> {
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
    if n < (2 * k - 1) * m {
        return Err(Error::Infeasible(format!(
            "gap system unsolvable: n = {n} below (2k-1)m = {}",
            (2 * k - 1) * m
        )));
    }
    // Centre the spread; the balanced offset can reach zero at the
    // feasibility edge, in which case it is clamped to the first agent.
    let alpha_raw = (n as i64 - 2 * (k as i64) * (m as i64 - 1) + 1).div_euclid(2);
    let alpha = alpha_raw.max(1) as usize;
    let indices: Vec<usize> = (0..m).map(|j| alpha + (2 * k - 1) * j).collect();
    if *indices.last().expect("m >= 2") > n {
        return Err(Error::Infeasible(
            "spread indices exceed the population".into(),
        ));
    }
    let entries: Vec<f64> = indices.iter().map(|&i| index_for_fraction(i, n)).collect();
    let vector = PercentileVector::new(entries)?;
    debug_assert_eq!(percentile_indices(&vector, n), indices);
    let capacities = CapacityVector::new(vec![k; m])?;
    if !es_condition(&vector, n, &capacities)? {
        return Err(Error::Infeasible(
            "spread indices do not satisfy the stability gap system".into(),
        ));
    }
    let i1 = indices[0];
    let im = *indices.last().expect("m >= 2");
    let ratio = analysis::ar_uniform_m(n, k, m, i1, im)?;
    Ok(BestVectorReport {
        indices,
        vector,
        predicted_ratio: ratio.ratio,
        case_label: "thm10",
    })
}

/// Place `ceil(m/2)` facilities of capacity `k` on agent `a` and the rest
/// on agent `b`, modeled as a two-facility placement with merged
/// capacities. Indices are 1-based and must satisfy `a + 2mk <= b <= n`.
pub fn all_aside_placement(
    a: usize,
    b: usize,
    instance: &Instance,
    m: usize,
    k: usize,
) -> Result<Placement> {
    if a == 0 || b > instance.n() || a + 2 * m * k > b {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= a, a + 2mk <= b <= n; got a = {a}, b = {b}, n = {}",
            instance.n()
        )));
    }
    all_aside_unchecked(a, b, instance, m, k)
}

/// All-aside with the stability-gap precondition only: `b - a >= mk - 1`.
pub fn all_aside_placement_relaxed(
    a: usize,
    b: usize,
    instance: &Instance,
    m: usize,
    k: usize,
) -> Result<Placement> {
    if a == 0 || b > instance.n() || a >= b || b - a < m * k - 1 {
        return Err(Error::PreconditionViolated(format!(
            "need 1 <= a < b <= n with b - a >= mk - 1; got a = {a}, b = {b}, n = {}",
            instance.n()
        )));
    }
    all_aside_unchecked(a, b, instance, m, k)
}

fn all_aside_unchecked(
    a: usize,
    b: usize,
    instance: &Instance,
    m: usize,
    k: usize,
) -> Result<Placement> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidParams("need m >= 1 and k >= 1".into()));
    }
    let left = ceil_div(m, 2) * k;
    let right = (m / 2) * k;
    if left + right >= instance.n() {
        return Err(Error::CapacityInfeasible {
            total_capacity: left + right,
            agents: instance.n(),
        });
    }
    Placement::on_line(&[
        (instance.position_1based(a), left),
        (instance.position_1based(b), right),
    ])
}

/// Every facility on the median agent `x_{ceil(n/2)}`.
pub fn median_aio_placement(
    instance: &Instance,
    capacities: &CapacityVector,
) -> Result<Placement> {
    capacities.check_feasible_for(instance.n())?;
    let median_index = ceil_div(instance.n(), 2);
    let y = instance.position_1based(median_index);
    let spots: Vec<(f64, usize)> = capacities.capacities().iter().map(|&k| (y, k)).collect();
    Placement::on_line(&spots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fcfs::Metric;
    use crate::instance::make_instance;

    fn pv(entries: &[f64]) -> PercentileVector {
        PercentileVector::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn indices_of_example_vector() {
        assert_eq!(percentile_indices(&pv(&[0.25, 0.75]), 5), vec![2, 4]);
        assert_eq!(percentile_indices(&pv(&[0.0, 1.0]), 7), vec![1, 7]);
        assert_eq!(percentile_indices(&pv(&[0.5, 0.5]), 10), vec![5, 5]);
    }

    #[test]
    fn apply_reproduces_example_one_placement() {
        let instance = make_instance(&[0.0, 0.3, 0.4, 0.5, 0.9]).unwrap();
        let caps = CapacityVector::new(vec![2, 2]).unwrap();
        let placement = apply_percentile(&pv(&[0.25, 0.75]), &instance, &caps).unwrap();
        assert_eq!(placement.facilities()[0].position[0], 0.3);
        assert_eq!(placement.facilities()[1].position[0], 0.5);
        assert_eq!(placement.metric(), Metric::Line);
    }

    #[test]
    fn apply_median_stack_and_degenerate_instance() {
        let instance = make_instance(&[0.1, 0.2, 0.6, 0.7, 0.8]).unwrap();
        let caps = CapacityVector::new(vec![1, 1]).unwrap();
        let placement = apply_percentile(&pv(&[0.5, 0.5]), &instance, &caps).unwrap();
        assert_eq!(placement.facilities()[0].position[0], 0.6);
        assert_eq!(placement.facilities()[1].position[0], 0.6);

        let zeros = make_instance(&[0.0; 6]).unwrap();
        let placement = apply_percentile(&pv(&[0.3, 0.9]), &zeros, &caps).unwrap();
        assert!(placement.facilities().iter().all(|f| f.position[0] == 0.0));
    }

    #[test]
    fn apply_rejects_infeasible_capacity() {
        let instance = make_instance(&[0.0, 0.5, 1.0]).unwrap();
        let caps = CapacityVector::new(vec![2, 2]).unwrap();
        assert!(matches!(
            apply_percentile(&pv(&[0.0, 1.0]), &instance, &caps),
            Err(Error::CapacityInfeasible { .. })
        ));
    }

    #[test]
    fn classification_by_gap() {
        assert_eq!(
            classify_percentile(&pv(&[0.5, 0.5]), 9).unwrap(),
            MechanismKind::Aio
        );
        // Indices (4, 5) are adjacent.
        assert_eq!(
            classify_percentile(&pv(&[0.4, 0.5]), 10).unwrap(),
            MechanismKind::Sbs
        );
        assert_eq!(
            classify_percentile(&pv(&[0.25, 0.75]), 5).unwrap(),
            MechanismKind::WideGap
        );
        assert!(matches!(
            classify_percentile(&pv(&[0.1, 0.5, 0.9]), 9),
            Err(Error::UnsupportedArity { .. })
        ));
    }

    #[test]
    fn stability_condition_examples() {
        let k22 = CapacityVector::new(vec![2, 2]).unwrap();
        // Example 1: indices (2, 4), gap 2 < k1 + k2 - 1 = 3.
        assert!(!es_condition(&pv(&[0.25, 0.75]), 5, &k22).unwrap());
        // Indices (2, 9): gap 7 >= 3.
        assert!(es_condition(&pv(&[0.2, 0.95]), 10, &k22).unwrap());
        // Three facilities of capacity 3 at indices (4, 9, 14): gaps 5 >= 2k-1.
        let k333 = CapacityVector::new(vec![3, 3, 3]).unwrap();
        assert!(es_condition(&pv(&[0.2, 0.45, 0.7]), 20, &k333).unwrap());
        // Tighten to gaps of 4 and the system fails.
        assert!(!es_condition(&pv(&[0.2, 0.4, 0.6]), 20, &k333).unwrap());
        // Single-point and adjacent mechanisms always qualify.
        assert!(es_condition(&pv(&[0.5, 0.5]), 10, &k22).unwrap());
        assert!(es_condition(&pv(&[0.4, 0.5]), 10, &k22).unwrap());
    }

    #[test]
    fn stability_condition_unsupported_heterogeneous() {
        let caps = CapacityVector::new(vec![3, 2, 2]).unwrap();
        assert!(matches!(
            es_condition(&pv(&[0.1, 0.5, 0.9]), 20, &caps),
            Err(Error::UnsupportedCase(_))
        ));
    }

    #[test]
    fn best_wide_gap_balanced() {
        let report = best_wg_vector(10, 2, 2).unwrap();
        assert_eq!(report.indices, vec![1, 9]);
        assert_eq!(report.case_label, "thm5-i");
        assert!((report.predicted_ratio - 8.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn best_wide_gap_intermediate() {
        let report = best_wg_vector(10, 4, 3).unwrap();
        assert_eq!(report.indices, vec![2, 9]);
        assert_eq!(report.case_label, "thm5-ii");
        assert!((report.predicted_ratio - 7.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn best_wide_gap_skewed() {
        let report = best_wg_vector(10, 6, 2).unwrap();
        assert_eq!(report.indices, vec![3, 10]);
        assert_eq!(report.case_label, "thm5-iii");
        assert!((report.predicted_ratio - 8.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn best_wide_gap_always_stable_and_increasing() {
        for n in 4..=30 {
            for k1 in 1..n {
                for k2 in 1..=k1 {
                    if k1 + k2 >= n {
                        continue;
                    }
                    let report = best_wg_vector(n, k1, k2).unwrap();
                    assert!(report.indices[0] < report.indices[1]);
                    assert!(report.predicted_ratio >= 1.0 - 1e-12);
                    let caps = CapacityVector::new(vec![k1, k2]).unwrap();
                    assert!(
                        es_condition(&report.vector, n, &caps).unwrap(),
                        "unstable best vector at n={n}, k=({k1},{k2})"
                    );
                    assert_eq!(
                        percentile_indices(&report.vector, n),
                        report.indices,
                        "index reproduction failed at n={n}, k=({k1},{k2})"
                    );
                }
            }
        }
    }

    #[test]
    fn best_uniform_spread() {
        let report = best_uniform_vector_m(20, 3, 3).unwrap();
        assert_eq!(report.indices, vec![4, 9, 14]);
        let expected = [0.2, 0.45, 0.7];
        for (v, e) in report.vector.entries().iter().zip(expected.iter()) {
            assert!((v - e).abs() < 1e-12);
        }
        assert!((report.predicted_ratio - 1.125).abs() < 1e-12);
        assert!(report.predicted_ratio <= 1.0 + 1.0 / 5.0);
        assert_eq!(report.case_label, "thm10");
    }

    #[test]
    fn best_uniform_infeasible_below_threshold() {
        assert!(matches!(
            best_uniform_vector_m(14, 3, 3),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn best_uniform_margin_bounds() {
        // The spread keeps floor((k+1)/2) agents outside the extreme
        // facilities whenever the population is large enough.
        for m in 2..=6 {
            for k in 2..=5 {
                let n = 2 * k * m;
                let report = best_uniform_vector_m(n, k, m).unwrap();
                let i1 = report.indices[0];
                let im = *report.indices.last().unwrap();
                assert!(i1 >= k.div_ceil(2), "m={m}, k={k}: i1 = {i1}");
                assert!(n - im >= k.div_ceil(2), "m={m}, k={k}: n - im = {}", n - im);
            }
        }
    }

    #[test]
    fn all_aside_examples() {
        let inst30 = make_instance(&(0..30).map(|i| i as f64 / 29.0).collect::<Vec<_>>()).unwrap();
        let p = all_aside_placement(1, 30, &inst30, 2, 2).unwrap();
        assert_eq!(p.facilities()[0].capacity, 2);
        assert_eq!(p.facilities()[1].capacity, 2);
        assert_eq!(p.facilities()[0].position[0], inst30.position_1based(1));

        let inst40 = make_instance(&(0..40).map(|i| i as f64 / 39.0).collect::<Vec<_>>()).unwrap();
        let p = all_aside_placement(5, 25, &inst40, 3, 2).unwrap();
        assert_eq!(p.facilities()[0].capacity, 4);
        assert_eq!(p.facilities()[1].capacity, 2);

        let inst20 = make_instance(&(0..20).map(|i| i as f64 / 19.0).collect::<Vec<_>>()).unwrap();
        assert!(matches!(
            all_aside_placement(5, 10, &inst20, 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
        // The relaxed gate only needs the stability gap mk - 1 = 5.
        assert!(all_aside_placement_relaxed(5, 10, &inst20, 3, 2).is_ok());
        assert!(matches!(
            all_aside_placement_relaxed(5, 9, &inst20, 3, 2),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn median_placement_examples() {
        let inst5 = make_instance(&[0.0, 0.3, 0.4, 0.5, 0.9]).unwrap();
        let caps = CapacityVector::new(vec![2, 2]).unwrap();
        let p = median_aio_placement(&inst5, &caps).unwrap();
        assert_eq!(p.facilities()[0].position[0], 0.4);
        assert_eq!(p.facilities()[1].position[0], 0.4);

        let inst10 =
            make_instance(&(0..10).map(|i| i as f64 / 9.0).collect::<Vec<_>>()).unwrap();
        let caps = CapacityVector::new(vec![3, 3]).unwrap();
        let p = median_aio_placement(&inst10, &caps).unwrap();
        assert_eq!(p.facilities()[0].position[0], inst10.position_1based(5));
    }

    #[test]
    fn misreports_only_push_facilities_away() {
        // For every percentile mechanism, each facility's distance to an
        // agent's true position weakly grows when that agent misreports.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let n = rng.gen_range(2..=7);
            let m = rng.gen_range(1..=3);
            let truth: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let mut entries: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
            entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let v = PercentileVector::new(entries).unwrap();
            let agent = rng.gen_range(0..n);
            let misreport: f64 = rng.gen();

            let sorted_truth = make_instance(&truth).unwrap();
            let mut lied = truth.clone();
            lied[agent] = misreport;
            let sorted_lied = make_instance(&lied).unwrap();

            // Percentile indices depend only on n; the sorted values shift.
            let indices = percentile_indices(&v, n);
            for &slot in &indices {
                let y = sorted_truth.position_1based(slot);
                let y_lied = sorted_lied.position_1based(slot);
                let x = truth[agent];
                assert!(
                    (x - y).abs() <= (x - y_lied).abs() + 1e-12,
                    "facility moved toward the misreporting agent"
                );
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn indices_stay_in_range_and_monotone(
            mut entries in proptest::collection::vec(0.0f64..=1.0, 1..6),
            n in 1usize..60
        ) {
            entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let v = PercentileVector::new(entries).unwrap();
            let indices = percentile_indices(&v, n);
            proptest::prop_assert!(indices.iter().all(|&i| (1..=n).contains(&i)));
            proptest::prop_assert!(indices.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn misreport_displacement_property(
            truth in proptest::collection::vec(0.0f64..=1.0, 2..7),
            mut entries in proptest::collection::vec(0.0f64..=1.0, 1..4),
            agent_raw in 0usize..7,
            misreport in 0.0f64..=1.0
        ) {
            // Every facility of a percentile placement moves weakly away
            // from the true position of a misreporting agent.
            entries.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = truth.len();
            let agent = agent_raw % n;
            let v = PercentileVector::new(entries).unwrap();
            let sorted_truth = make_instance(&truth).unwrap();
            let mut lied = truth.clone();
            lied[agent] = misreport;
            let sorted_lied = make_instance(&lied).unwrap();
            for &slot in &percentile_indices(&v, n) {
                let x = truth[agent];
                let y = sorted_truth.position_1based(slot);
                let y_lied = sorted_lied.position_1based(slot);
                proptest::prop_assert!((x - y).abs() <= (x - y_lied).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn percentile_vector_json_shape() {
        let v = pv(&[0.25, 0.75]);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"{"v":[0.25,0.75],"assignment":[0,1]}"#);
        let back: PercentileVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn mirrored_swaps_capacities() {
        let instance = make_instance(&[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).unwrap();
        let caps = CapacityVector::new(vec![3, 1]).unwrap();
        let v = pv(&[0.0, 1.0]);
        let p = apply_percentile(&v, &instance, &caps).unwrap();
        assert_eq!(p.facilities()[0].capacity, 3);
        let p = apply_percentile(&v.mirrored(), &instance, &caps).unwrap();
        assert_eq!(p.facilities()[0].capacity, 1);
    }
}
