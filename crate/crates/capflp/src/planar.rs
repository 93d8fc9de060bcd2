//! Two-dimensional extension: coordinate-wise percentile placement, the
//! planar stability characterization, and the planar median ratio.
//!
//! The game engine is shared with the line case; only the metric and the
//! utility ceiling change (Euclidean distance, ceiling sqrt(2)).

use serde::{Deserialize, Serialize};

use crate::analysis::RatioFormulaResult;
use crate::error::{Error, Result};
use crate::fcfs::{
    check_equilibrium_stability_points, construct_ne_points, resolve_outcome_points,
    social_welfare, Placement, PriorityRule,
};
use crate::instance::CapacityVector;

/// Agent points in the unit square, with per-axis sorted projections.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarInstance {
    points: Vec<[f64; 2]>,
    sorted_axis: [Vec<f64>; 2],
}

impl PlanarInstance {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Sorted projection of the agents on the given axis (0 or 1).
    pub fn sorted_axis(&self, axis: usize) -> &[f64] {
        &self.sorted_axis[axis]
    }
}

/// Parse a planar instance from its JSON form, an array of `[x, y]`
/// pairs.
pub fn planar_instance_from_json(text: &str) -> Result<PlanarInstance> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidParams(format!("bad planar instance JSON: {e}")))?;
    make_planar_instance(&raw)
}

/// Serialize a planar instance as an array of `[x, y]` pairs.
pub fn planar_instance_to_json(instance: &PlanarInstance) -> String {
    serde_json::to_string(instance.points()).expect("points serialize")
}

pub fn make_planar_instance(raw_points: &[[f64; 2]]) -> Result<PlanarInstance> {
    if raw_points.is_empty() {
        return Err(Error::EmptyInput);
    }
    for point in raw_points {
        for &coordinate in point {
            if !coordinate.is_finite() {
                return Err(Error::NonFinite { value: coordinate });
            }
            if !(0.0..=1.0).contains(&coordinate) {
                return Err(Error::OutOfRange { value: coordinate });
            }
        }
    }
    let mut sorted_axis = [Vec::new(), Vec::new()];
    for axis in 0..2 {
        let mut projection: Vec<f64> = raw_points.iter().map(|p| p[axis]).collect();
        projection.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        sorted_axis[axis] = projection;
    }
    Ok(PlanarInstance {
        points: raw_points.to_vec(),
        sorted_axis,
    })
}

/// One percentile vector per axis; row `l` drives the `l`-th coordinate of
/// every facility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileMatrix {
    rows: Vec<Vec<f64>>,
}

impl PercentileMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        let m = rows[0].len();
        for row in &rows {
            if row.len() != m || m == 0 {
                return Err(Error::LengthMismatch {
                    expected: m.max(1),
                    actual: row.len(),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite { value: v });
                }
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange { value: v });
                }
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidParams(
                    "each percentile row must be sorted ascending".into(),
                ));
            }
        }
        Ok(PercentileMatrix { rows })
    }

    /// Number of axes.
    pub fn d(&self) -> usize {
        self.rows.len()
    }

    /// Number of facilities.
    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

fn axis_indices(row: &[f64], n: usize) -> Vec<usize> {
    row.iter()
        .map(|&v| ((n - 1) as f64 * v).floor() as usize + 1)
        .collect()
}

/// Per-axis structural class used by the planar characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AxisKind {
    AllSame,
    AdjacentPair,
    Separated,
}

fn classify_axis(row: &[f64], n: usize) -> AxisKind {
    let indices = axis_indices(row, n);
    let mut distinct: Vec<usize> = indices.clone();
    distinct.dedup();
    match distinct.len() {
        1 => AxisKind::AllSame,
        2 if distinct[1] - distinct[0] == 1 => AxisKind::AdjacentPair,
        _ => AxisKind::Separated,
    }
}

/// Coordinate percentile placement: facility `j` sits at the per-axis
/// order statistics selected by column `j` of the matrix.
pub fn planar_percentile_placement(
    matrix: &PercentileMatrix,
    instance: &PlanarInstance,
    capacities: &CapacityVector,
) -> Result<Placement> {
    if matrix.d() != 2 {
        return Err(Error::UnsupportedArity { m: matrix.d() });
    }
    if capacities.m() != matrix.m() {
        return Err(Error::LengthMismatch {
            expected: matrix.m(),
            actual: capacities.m(),
        });
    }
    capacities.check_feasible_for(instance.n())?;
    let n = instance.n();
    let idx0 = axis_indices(&matrix.rows[0], n);
    let idx1 = axis_indices(&matrix.rows[1], n);
    let spots: Vec<([f64; 2], usize)> = (0..matrix.m())
        .map(|j| {
            (
                [
                    instance.sorted_axis[0][idx0[j] - 1],
                    instance.sorted_axis[1][idx1[j] - 1],
                ],
                capacities.capacities()[j],
            )
        })
        .collect();
    Placement::on_plane(&spots)
}

/// Closed-form planar stability test for two facilities: stable exactly
/// when both coordinate mechanisms collapse to one index, or one does and
/// the other uses an adjacent pair.
pub fn planar_is_es(
    matrix: &PercentileMatrix,
    n: usize,
    capacities: &CapacityVector,
) -> Result<bool> {
    if matrix.m() != 2 || matrix.d() != 2 {
        return Err(Error::UnsupportedArity { m: matrix.m() });
    }
    capacities.check_feasible_for(n)?;
    Ok(stability_predicate(matrix, n))
}

/// The general-arity form of the planar characterization: all axes on one
/// index, or exactly one axis deviating and only to an adjacent pair.
/// Stated characterization; the brute-force checker validates it here only
/// for two facilities in the plane.
pub fn planar_es_predicate_general(matrix: &PercentileMatrix, n: usize) -> bool {
    stability_predicate(matrix, n)
}

fn stability_predicate(matrix: &PercentileMatrix, n: usize) -> bool {
    let kinds: Vec<AxisKind> = matrix
        .rows
        .iter()
        .map(|row| classify_axis(row, n))
        .collect();
    let non_aio: Vec<&AxisKind> = kinds.iter().filter(|&&k| k != AxisKind::AllSame).collect();
    match non_aio.len() {
        0 => true,
        1 => *non_aio[0] == AxisKind::AdjacentPair,
        _ => false,
    }
}

/// Worst-case ratio of the planar mechanism placing both facilities on the
/// per-axis median agent. The closed form assumes an odd population; even
/// populations are computed with the same median index and flagged
/// approximate.
pub struct MedianPlanarRatio {
    pub result: RatioFormulaResult,
    pub approximate: bool,
}

pub fn ar_median_planar(n: usize, k1: usize, k2: usize) -> Result<MedianPlanarRatio> {
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
    let approximate = n.is_multiple_of(2);
    let sqrt2 = std::f64::consts::SQRT_2;
    let denominator = (sqrt2 - 1.0) * (k1 + k2) as f64 + 1.0;
    let half = n / 2;
    let result = if k1 <= half && k2 <= half {
        let numerator = sqrt2 * (k1 + k2) as f64;
        RatioFormulaResult {
            ratio: numerator / denominator,
            active_case: "planar-median-balanced",
            numerator_welfare: numerator,
            denominator_welfare: denominator,
        }
    } else {
        let numerator = sqrt2 * (k2 + half) as f64 + sqrt2 - 1.0;
        RatioFormulaResult {
            ratio: numerator / denominator,
            active_case: "planar-median-dominant",
            numerator_welfare: numerator,
            denominator_welfare: denominator,
        }
    };
    Ok(MedianPlanarRatio {
        result,
        approximate,
    })
}

/// Both facilities on the per-axis median agent (index `ceil(n/2)` on each
/// sorted projection).
pub fn planar_median_placement(
    instance: &PlanarInstance,
    capacities: &CapacityVector,
) -> Result<Placement> {
    capacities.check_feasible_for(instance.n())?;
    let median = instance.n().div_ceil(2);
    let position = [
        instance.sorted_axis[0][median - 1],
        instance.sorted_axis[1][median - 1],
    ];
    let spots: Vec<([f64; 2], usize)> = capacities
        .capacities()
        .iter()
        .map(|&k| (position, k))
        .collect();
    Placement::on_plane(&spots)
}

/// Extremal instance for the planar median mechanism: half the population
/// at the origin, half at the opposite corner, one agent on the off
/// corner. Requires an odd population.
pub fn planar_median_worst_instance(n: usize) -> Result<PlanarInstance> {
    if n.is_multiple_of(2) {
        return Err(Error::InvalidParams(
            "the extremal construction needs an odd population".into(),
        ));
    }
    let half = n / 2;
    let mut points = Vec::with_capacity(n);
    points.extend(std::iter::repeat_n([0.0, 0.0], half));
    points.push([0.0, 1.0]);
    points.extend(std::iter::repeat_n([1.0, 1.0], half));
    make_planar_instance(&points)
}

/// Welfare of the planar game under the constructive equilibrium.
pub fn planar_mechanism_welfare(
    instance: &PlanarInstance,
    placement: &Placement,
    priority: &PriorityRule,
) -> Result<f64> {
    let profile = construct_ne_points(instance.points(), placement, priority)?;
    let outcome = resolve_outcome_points(instance.points(), placement, &profile, priority)?;
    Ok(social_welfare(&outcome))
}

/// Brute-force stability check of a planar placement.
pub fn planar_check_stability(
    instance: &PlanarInstance,
    placement: &Placement,
    priority: &PriorityRule,
    cap: u128,
) -> Result<(bool, Vec<f64>)> {
    check_equilibrium_stability_points(instance.points(), placement, priority, cap)
}

/// The ten-agent instance with doubled diagonal clusters used by the
/// adjacent-pair counterexample.
pub fn adjacent_pair_counterexample_instance() -> PlanarInstance {
    let mut points = vec![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]];
    points.push([0.4, 0.4]);
    points.push([0.4, 0.5]);
    points.push([0.5, 0.5]);
    points.extend(std::iter::repeat_n([0.8, 0.8], 4));
    make_planar_instance(&points).expect("valid points")
}

/// The ten-agent instance demonstrating that one collapsed axis paired
/// with a separated axis is unstable.
pub fn separated_axis_counterexample_instance() -> PlanarInstance {
    let mut points = vec![[0.0, 0.0], [0.2, 0.0], [0.2, 1.0], [0.4, 0.0]];
    points.extend(std::iter::repeat_n([0.7, 0.0], 6));
    make_planar_instance(&points).expect("valid points")
}
