//! Shared test oracles, independent of the library's solver paths.

/// Exhaustive welfare upper bound: facilities on every ordered tuple of
/// distinct agent positions, agents assigned by full enumeration with
/// exact facility degrees. Values accumulate in ascending agent order so
/// that equal assignments produce bit-identical floats.
pub fn oracle_upper_bound(positions: &[f64], capacities: &[usize]) -> f64 {
    let mut unique: Vec<f64> = positions.to_vec();
    unique.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    unique.dedup();
    let m = capacities.len();
    let mut tuple = vec![0usize; m];
    let mut best = f64::NEG_INFINITY;
    loop {
        let facility_at: Vec<f64> = tuple.iter().map(|&i| unique[i]).collect();
        let value = best_exact_degree_assignment(positions, &facility_at, capacities);
        if value > best {
            best = value;
        }
        // Advance the odometer over unique^m.
        let mut slot = 0;
        loop {
            if slot == m {
                return best;
            }
            tuple[slot] += 1;
            if tuple[slot] < unique.len() {
                break;
            }
            tuple[slot] = 0;
            slot += 1;
        }
    }
}

fn best_exact_degree_assignment(
    positions: &[f64],
    facility_at: &[f64],
    capacities: &[usize],
) -> f64 {
    fn recurse(
        positions: &[f64],
        facility_at: &[f64],
        remaining: &mut Vec<usize>,
        remaining_total: usize,
        agent: usize,
        acc: f64,
        best: &mut f64,
    ) {
        if positions.len() - agent < remaining_total {
            return;
        }
        if agent == positions.len() {
            if remaining_total == 0 && acc > *best {
                *best = acc;
            }
            return;
        }
        recurse(
            positions,
            facility_at,
            remaining,
            remaining_total,
            agent + 1,
            acc,
            best,
        );
        for j in 0..remaining.len() {
            if remaining[j] > 0 {
                remaining[j] -= 1;
                let weight = 1.0 - (positions[agent] - facility_at[j]).abs();
                recurse(
                    positions,
                    facility_at,
                    remaining,
                    remaining_total - 1,
                    agent + 1,
                    acc + weight,
                    best,
                );
                remaining[j] += 1;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut remaining = capacities.to_vec();
    let total: usize = capacities.iter().sum();
    recurse(
        positions,
        facility_at,
        &mut remaining,
        total,
        0,
        0.0,
        &mut best,
    );
    best
}
