//! Exact max-weight capacity-constrained assignment of agents to
//! facilities, solved as min-cost flow (weights negated) with successive
//! shortest paths.
//!
//! The graph is bipartite: source -> agent arcs of capacity one,
//! agent -> facility arcs carrying the negated service weight, and
//! facility -> sink arcs bounded by the facility capacity. Pushing
//! `min(n, sum k_j)` units yields the maximum total weight because every
//! weight is non-negative.

struct FlowGraph {
    first_out: Vec<Vec<usize>>,
    to: Vec<usize>,
    residual: Vec<i64>,
    cost: Vec<f64>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph {
            first_out: vec![Vec::new(); nodes],
            to: Vec::new(),
            residual: Vec::new(),
            cost: Vec::new(),
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, capacity: i64, cost: f64) -> usize {
        let id = self.to.len();
        self.first_out[from].push(id);
        self.to.push(to);
        self.residual.push(capacity);
        self.cost.push(cost);
        self.first_out[to].push(id + 1);
        self.to.push(from);
        self.residual.push(0);
        self.cost.push(-cost);
        id
    }

    /// Shortest path from `src` under residual capacities; SPFA handles the
    /// negative arc costs (no negative cycles arise under successive
    /// shortest paths).
    fn shortest_path(&self, src: usize, sink: usize) -> Option<Vec<usize>> {
        let n = self.first_out.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut in_queue = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = 0.0;
        queue.push_back(src);
        in_queue[src] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            for &e in &self.first_out[u] {
                if self.residual[e] <= 0 {
                    continue;
                }
                let v = self.to[e];
                let candidate = dist[u] + self.cost[e];
                if candidate < dist[v] {
                    dist[v] = candidate;
                    parent_edge[v] = e;
                    if !in_queue[v] {
                        queue.push_back(v);
                        in_queue[v] = true;
                    }
                }
            }
        }
        if parent_edge[sink] == usize::MAX {
            return None;
        }
        let mut path = Vec::new();
        let mut node = sink;
        while node != src {
            let e = parent_edge[node];
            path.push(e);
            node = self.to[e ^ 1];
        }
        path.reverse();
        Some(path)
    }
}

/// Max-weight assignment of at most one facility per agent with facility
/// `j` serving at most `capacities[j]` agents. Returns the optimal value
/// (weights re-summed in agent order, so two optimal routes produce the
/// identical float) and the chosen facility per agent.
pub fn max_weight_assignment(weights: &[Vec<f64>], capacities: &[usize]) -> (f64, Vec<Option<usize>>) {
    let n = weights.len();
    let m = capacities.len();
    if n == 0 || m == 0 {
        return (0.0, vec![None; n]);
    }
    let source = 0;
    let agent = |i: usize| 1 + i;
    let facility = |j: usize| 1 + n + j;
    let sink = 1 + n + m;
    let mut graph = FlowGraph::new(sink + 1);
    let mut agent_edges: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (edge id, facility)
    for (i, row) in weights.iter().enumerate() {
        graph.add_edge(source, agent(i), 1, 0.0);
        for (j, &w) in row.iter().enumerate() {
            let e = graph.add_edge(agent(i), facility(j), 1, -w);
            agent_edges[i].push((e, j));
        }
    }
    for (j, &k) in capacities.iter().enumerate() {
        graph.add_edge(facility(j), sink, k as i64, 0.0);
    }

    let target: usize = capacities.iter().sum::<usize>().min(n);
    let mut pushed = 0;
    while pushed < target {
        let Some(path) = graph.shortest_path(source, sink) else {
            break;
        };
        for e in path {
            graph.residual[e] -= 1;
            graph.residual[e ^ 1] += 1;
        }
        pushed += 1;
    }

    let mut chosen = vec![None; n];
    let mut value = 0.0;
    for i in 0..n {
        for &(e, j) in &agent_edges[i] {
            if graph.residual[e] == 0 {
                chosen[i] = Some(j);
                value += weights[i][j];
                break;
            }
        }
    }
    (value, chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive oracle: assign exactly `k_j` distinct agents to facility
    /// `j`, maximizing total weight.
    fn oracle(weights: &[Vec<f64>], capacities: &[usize]) -> f64 {
        fn recurse(
            weights: &[Vec<f64>],
            remaining: &mut Vec<usize>,
            agent: usize,
            acc: f64,
            best: &mut f64,
        ) {
            if agent == weights.len() {
                if acc > *best {
                    *best = acc;
                }
                return;
            }
            recurse(weights, remaining, agent + 1, acc, best);
            for j in 0..remaining.len() {
                if remaining[j] > 0 {
                    remaining[j] -= 1;
                    recurse(weights, remaining, agent + 1, acc + weights[agent][j], best);
                    remaining[j] += 1;
                }
            }
        }
        let mut best = f64::NEG_INFINITY;
        let mut remaining = capacities.to_vec();
        recurse(weights, &mut remaining, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn matches_oracle_on_random_problems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let n = rng.gen_range(1..=7);
            let m = rng.gen_range(1..=3);
            let weights: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen::<f64>()).collect())
                .collect();
            let capacities: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
            let (value, chosen) = max_weight_assignment(&weights, &capacities);
            let expected = oracle(&weights, &capacities);
            assert!(
                (value - expected).abs() < 1e-9,
                "flow {value} vs oracle {expected}"
            );
            let mut used = vec![0usize; m];
            for c in chosen.into_iter().flatten() {
                used[c] += 1;
            }
            for (j, &u) in used.iter().enumerate() {
                assert!(u <= capacities[j]);
            }
        }
    }

    #[test]
    fn respects_capacities_on_ties() {
        let weights = vec![vec![1.0], vec![1.0], vec![1.0]];
        let (value, chosen) = max_weight_assignment(&weights, &[2]);
        assert_eq!(value, 2.0);
        assert_eq!(chosen.iter().filter(|c| c.is_some()).count(), 2);
    }
}
