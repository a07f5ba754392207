//! Flow-network view of the noiseless abstraction: feasible flows for a
//! rate vector (max-flow with a supersource), the min-cost rate/route LP,
//! conversion of flows into per-node bit-shuffling schedules, and
//! exhaustive tree-routing benchmarks.

use crate::admissibility::{reachback_admissible, AdmissibilityError, CutCertificate, RateVector};
use crate::channel::LinkSet;
use crate::lp::{self, Constraint, LpOutcome, Relation};
use crate::source::JointPmf;
use serde::Serialize;
use thiserror::Error;

/// Node count cap for the exhaustive in-tree enumeration.
pub const MAX_TREE_SOURCES: usize = 8;
/// Source cap for the rate-constrained LP (2^M subset rows).
pub const MAX_LP_SOURCES: usize = 12;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum FlowError {
    #[error("link set has {links} nodes but {rates} rates were supplied")]
    NodeCountMismatch { links: usize, rates: usize },
    #[error("{count} source nodes exceed the limit of {limit} for this routine")]
    TooManyNodes { count: usize, limit: usize },
    #[error("cost must be nonnegative and finite (got {0})")]
    BadCost(f64),
    #[error("margin delta must be nonnegative (got {0})")]
    NegativeDelta(f64),
    #[error("no rate allocation is routable; worst cut S={cut:?} needs {required} bits over {available}",
            cut = .certificate.cut, required = .certificate.required, available = .certificate.available)]
    Infeasible { certificate: CutCertificate },
    #[error("flow violates its invariants: {0}")]
    InconsistentFlow(String),
    #[error("block length {n} too small to carry the flow at node {node}")]
    BlockTooSmall { node: usize, n: usize },
    #[error("positive-flow graph still contains a cycle after cancellation")]
    CyclicResidual,
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),
}

/// A feasible flow: skew-symmetric net edge values plus the supplies they
/// carry. `phi(i, j) = -phi(j, i)` by construction.
#[derive(Debug, Clone)]
pub struct FlowAssignment {
    n_nodes: usize,
    phi: Vec<f64>,
    supplies: RateVector,
}

impl FlowAssignment {
    /// Builds a flow from directed edge values; opposite directions are
    /// netted against each other (a superimposed two-cycle cancels out).
    pub fn from_directed_edges(
        n_nodes: usize,
        edges: &[(usize, usize, f64)],
        supplies: RateVector,
    ) -> Result<Self, FlowError> {
        if supplies.len() + 1 != n_nodes {
            return Err(FlowError::NodeCountMismatch {
                links: n_nodes,
                rates: supplies.len(),
            });
        }
        let mut phi = vec![0.0; n_nodes * n_nodes];
        for &(from, to, value) in edges {
            if from == to || from >= n_nodes || to >= n_nodes {
                return Err(FlowError::InconsistentFlow(format!(
                    "edge ({from},{to}) out of range"
                )));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(FlowError::InconsistentFlow(format!(
                    "edge ({from},{to}) carries invalid value {value}"
                )));
            }
            phi[from * n_nodes + to] += value;
            phi[to * n_nodes + from] -= value;
        }
        Ok(Self {
            n_nodes,
            phi,
            supplies,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Net flow on the directed pair `(i, j)`.
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.n_nodes + j]
    }

    pub fn supplies(&self) -> &RateVector {
        &self.supplies
    }

    /// Edges with positive net flow, in (from, to) order.
    pub fn positive_edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n_nodes {
            for j in 0..self.n_nodes {
                let v = self.phi(i, j);
                if v > EPS {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Checks capacity and conservation against a link set.
    pub fn validate(&self, links: &LinkSet) -> Result<(), FlowError> {
        if links.n_nodes() != self.n_nodes {
            return Err(FlowError::NodeCountMismatch {
                links: links.n_nodes(),
                rates: self.supplies.len(),
            });
        }
        for (i, j, v) in self.positive_edges() {
            let cap = links.capacity(i, j);
            if v > cap + EPS {
                return Err(FlowError::InconsistentFlow(format!(
                    "edge ({i},{j}) carries {v} over capacity {cap}"
                )));
            }
        }
        for node in 1..self.n_nodes {
            let net: f64 = (0..self.n_nodes).map(|j| self.phi(node, j)).sum();
            let supply = self.supplies.rate_of_node(node);
            if (net - supply).abs() > 1e-7 {
                return Err(FlowError::InconsistentFlow(format!(
                    "node {node} nets {net} instead of its supply {supply}"
                )));
            }
        }
        Ok(())
    }
}

/// A cut proving that no feasible flow exists: the sources in `cut` inject
/// more than the capacity leaving the set.
#[derive(Debug, Clone, Serialize)]
pub struct MinCutWitness {
    pub cut: Vec<usize>,
    pub demand: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone)]
pub enum FlowOutcome {
    Feasible(FlowAssignment),
    Cut(MinCutWitness),
}

/// Routes the rate vector through the network via a supersource reduction
/// to single-source max-flow, or returns a saturated-cut witness.
pub fn feasible_flow(links: &LinkSet, rates: &RateVector) -> Result<FlowOutcome, FlowError> {
    let n = links.n_nodes();
    if rates.len() + 1 != n {
        return Err(FlowError::NodeCountMismatch {
            links: n,
            rates: rates.len(),
        });
    }
    let total = n + 1;
    let super_source = n;
    let sink = 0usize;
    let mut residual = vec![0.0; total * total];
    let mut capacity = vec![0.0; total * total];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let c = links.capacity(i, j);
                residual[i * total + j] = c;
                capacity[i * total + j] = c;
            }
        }
    }
    for node in 1..n {
        let r = rates.rate_of_node(node);
        residual[super_source * total + node] = r;
        capacity[super_source * total + node] = r;
    }

    let supply_total = rates.sum();
    let mut flow_value = 0.0;
    // Edmonds-Karp: BFS augmenting paths until none remain.
    loop {
        let mut parent = vec![usize::MAX; total];
        parent[super_source] = super_source;
        let mut queue = std::collections::VecDeque::from([super_source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..total {
                if parent[v] == usize::MAX && residual[u * total + v] > EPS {
                    parent[v] = u;
                    if v == sink {
                        queue.clear();
                        break;
                    }
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = sink;
        while v != super_source {
            let u = parent[v];
            bottleneck = bottleneck.min(residual[u * total + v]);
            v = u;
        }
        let mut v = sink;
        while v != super_source {
            let u = parent[v];
            residual[u * total + v] -= bottleneck;
            residual[v * total + u] += bottleneck;
            v = u;
        }
        flow_value += bottleneck;
    }

    if flow_value >= supply_total - 1e-9 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let used = capacity[i * total + j] - residual[i * total + j];
                    if used > EPS {
                        edges.push((i, j, used));
                    }
                }
            }
        }
        let flow = FlowAssignment::from_directed_edges(n, &edges, rates.clone())?;
        Ok(FlowOutcome::Feasible(flow))
    } else {
        // Residual-reachable source nodes form the violated cut.
        let mut reached = vec![false; total];
        reached[super_source] = true;
        let mut queue = std::collections::VecDeque::from([super_source]);
        while let Some(u) = queue.pop_front() {
            for v in 0..total {
                if !reached[v] && residual[u * total + v] > EPS {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let cut: Vec<usize> = (1..n).filter(|&i| reached[i]).collect();
        let demand: f64 = cut.iter().map(|&i| rates.rate_of_node(i)).sum();
        let cut_capacity: f64 = cut
            .iter()
            .flat_map(|&i| {
                (0..n)
                    .filter(move |&j| j != i && !reached[j])
                    .map(move |j| links.capacity(i, j))
            })
            .sum();
        Ok(FlowOutcome::Cut(MinCutWitness {
            cut,
            demand,
            capacity: cut_capacity,
        }))
    }
}

/// Per-edge transmission costs (cost per bit); absent edges cost zero.
#[derive(Debug, Clone)]
pub struct EdgeCosts {
    n_nodes: usize,
    costs: Vec<f64>,
}

impl EdgeCosts {
    pub fn zero(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            costs: vec![0.0; n_nodes * n_nodes],
        }
    }

    pub fn from_entries(n_nodes: usize, entries: &[(usize, usize, f64)]) -> Result<Self, FlowError> {
        let mut costs = Self::zero(n_nodes);
        for &(from, to, cost) in entries {
            if cost < 0.0 || !cost.is_finite() {
                return Err(FlowError::BadCost(cost));
            }
            if from == to || from >= n_nodes || to >= n_nodes {
                return Err(FlowError::InconsistentFlow(format!(
                    "cost edge ({from},{to}) out of range"
                )));
            }
            costs.costs[from * n_nodes + to] = cost;
        }
        Ok(costs)
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.costs[from * self.n_nodes + to]
    }
}

/// Optimal rates and routes for a source over a costed network.
#[derive(Debug, Clone)]
pub struct RouteSolution {
    pub rates: RateVector,
    pub flow: FlowAssignment,
    pub cost: f64,
}

/// Solves the min-cost routing LP: flow constraints plus the rate region
/// with strict inequalities realized as `sum of rates >= H + delta`.
///
/// Among optimal flows, the lexicographically smallest edge vector (edges
/// in (from, to) order) is returned.
pub fn min_cost_route(
    links: &LinkSet,
    costs: &EdgeCosts,
    source: &JointPmf,
    delta: f64,
) -> Result<RouteSolution, FlowError> {
    let n = links.n_nodes();
    let m = n - 1;
    if source.num_vars() != n {
        return Err(FlowError::NodeCountMismatch {
            links: n,
            rates: source.num_sources(),
        });
    }
    if m > MAX_LP_SOURCES {
        return Err(FlowError::TooManyNodes {
            count: m,
            limit: MAX_LP_SOURCES,
        });
    }
    if delta < 0.0 || !delta.is_finite() {
        return Err(FlowError::NegativeDelta(delta));
    }

    let edges = links.positive_edges();
    let n_edges = edges.len();
    let n_vars = n_edges + m;
    let rate_var = |node: usize| n_edges + node - 1;

    let mut constraints = Vec::new();
    for (k, &(_, _, cap)) in edges.iter().enumerate() {
        let mut coeffs = vec![0.0; n_vars];
        coeffs[k] = 1.0;
        constraints.push(Constraint::new(coeffs, Relation::Le, cap));
    }
    for node in 1..n {
        let mut coeffs = vec![0.0; n_vars];
        for (k, &(from, to, _)) in edges.iter().enumerate() {
            if from == node {
                coeffs[k] += 1.0;
            }
            if to == node {
                coeffs[k] -= 1.0;
            }
        }
        coeffs[rate_var(node)] = -1.0;
        constraints.push(Constraint::new(coeffs, Relation::Eq, 0.0));
    }
    for mask in 1..(1usize << m) {
        let subset: Vec<usize> = (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        let complement: Vec<usize> = (0..=m)
            .filter(|&v| v == 0 || mask & (1 << (v - 1)) == 0)
            .collect();
        let required = source
            .conditional_entropy(&subset, &complement)
            .map_err(AdmissibilityError::from)?;
        let mut coeffs = vec![0.0; n_vars];
        for &i in &subset {
            coeffs[rate_var(i)] = 1.0;
        }
        constraints.push(Constraint::new(coeffs, Relation::Ge, required + delta));
    }

    let mut objective = vec![0.0; n_vars];
    for (k, &(from, to, _)) in edges.iter().enumerate() {
        objective[k] = costs.get(from, to);
    }

    let optimal_cost = match lp::minimize(&objective, &constraints) {
        LpOutcome::Optimal { objective, .. } => objective,
        LpOutcome::Infeasible => {
            let report = reachback_admissible(links, source)?;
            return Err(FlowError::Infeasible {
                certificate: report.worst().clone(),
            });
        }
        LpOutcome::Unbounded => {
            return Err(FlowError::Internal(
                "routing LP reported unbounded despite box constraints".into(),
            ))
        }
    };

    // Lexicographic tie-break: pin the cost, then minimize each edge in
    // (from, to) order, fixing it before moving on.
    constraints.push(Constraint::new(
        objective.clone(),
        Relation::Le,
        optimal_cost + 1e-9,
    ));
    let mut x = vec![0.0; n_vars];
    for k in 0..n_edges {
        let mut edge_objective = vec![0.0; n_vars];
        edge_objective[k] = 1.0;
        match lp::minimize(&edge_objective, &constraints) {
            LpOutcome::Optimal { x: sol, objective } => {
                x = sol;
                let mut coeffs = vec![0.0; n_vars];
                coeffs[k] = 1.0;
                constraints.push(Constraint::new(coeffs, Relation::Le, objective + 1e-9));
            }
            other => {
                return Err(FlowError::Internal(format!(
                    "lexicographic refinement failed: {other:?}"
                )))
            }
        }
    }
    if n_edges == 0 {
        // Rates-only problem (no links): grab any feasible point.
        match lp::minimize(&objective, &constraints) {
            LpOutcome::Optimal { x: sol, .. } => x = sol,
            other => {
                return Err(FlowError::Internal(format!(
                    "rate-only solve failed: {other:?}"
                )))
            }
        }
    }

    let rates = RateVector::new(
        (1..n)
            .map(|node| x[rate_var(node)].max(0.0))
            .collect::<Vec<_>>(),
    )
    .map_err(|e| FlowError::Internal(e.to_string()))?;
    let edge_values: Vec<(usize, usize, f64)> = edges
        .iter()
        .enumerate()
        .filter(|(k, _)| x[*k] > EPS)
        .map(|(k, &(from, to, _))| (from, to, x[k]))
        .collect();
    let flow = FlowAssignment::from_directed_edges(n, &edge_values, rates.clone())?;
    let cost = edge_values
        .iter()
        .map(|&(from, to, v)| costs.get(from, to) * v)
        .sum();
    Ok(RouteSolution { rates, flow, cost })
}

/// One node's forwarding duties for a block: inbound segments (by source
/// node), locally encoded bits, and outbound segments (by destination).
/// The outbound stream is the concatenation of inbound segments in node
/// order followed by the local bits, split sequentially.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodePlan {
    pub node: usize,
    pub inbound: Vec<(usize, u64)>,
    pub local_bits: u64,
    pub outbound: Vec<(usize, u64)>,
}

/// Topological forwarding order plus per-node bit-partition tables.
#[derive(Debug, Clone, Serialize)]
pub struct RoutingSchedule {
    pub n: usize,
    pub topo_order: Vec<usize>,
    /// Indexed by node id.
    pub plans: Vec<NodePlan>,
    /// ceil(n * R_i) local bits per node (index 0 is the sink's zero).
    pub bits_per_block: Vec<u64>,
    /// Longest forwarding chain; a lower bound for the decode delay.
    pub max_hops: usize,
}

impl RoutingSchedule {
    pub fn total_source_bits(&self) -> u64 {
        self.bits_per_block.iter().sum()
    }

    /// Position of a node in the forwarding order.
    pub fn stage_of(&self, node: usize) -> usize {
        self.topo_order.iter().position(|&v| v == node).unwrap()
    }
}

/// Converts a feasible flow into an integer bit-forwarding schedule for
/// blocks of length `n`: cycles are canceled, nodes are ordered
/// topologically (lowest index first among ties, sink last), and bits are
/// assigned per edge within `floor(n * C_ij)` budgets.
pub fn flow_to_schedule(
    flow: &FlowAssignment,
    links: &LinkSet,
    n: usize,
) -> Result<RoutingSchedule, FlowError> {
    if n == 0 {
        return Err(FlowError::BlockTooSmall { node: 0, n });
    }
    flow.validate(links)?;
    let n_nodes = flow.n_nodes();
    let mut net = vec![0.0; n_nodes * n_nodes];
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            net[i * n_nodes + j] = flow.phi(i, j).max(0.0);
        }
    }

    cancel_cycles(&mut net, n_nodes)?;

    // Kahn's algorithm, preferring low node indices, sink pinned last.
    let mut indegree = vec![0usize; n_nodes];
    for i in 0..n_nodes {
        for j in 0..n_nodes {
            if net[i * n_nodes + j] > EPS {
                indegree[j] += 1;
            }
        }
    }
    let mut emitted = vec![false; n_nodes];
    let mut topo_order = Vec::with_capacity(n_nodes);
    while topo_order.len() < n_nodes.saturating_sub(1) {
        let next = (1..n_nodes).find(|&v| !emitted[v] && indegree[v] == 0);
        let Some(v) = next else {
            return Err(FlowError::CyclicResidual);
        };
        emitted[v] = true;
        topo_order.push(v);
        for j in 0..n_nodes {
            if net[v * n_nodes + j] > EPS {
                indegree[j] -= 1;
            }
        }
    }
    topo_order.push(0);

    let bits_per_block: Vec<u64> = (0..n_nodes)
        .map(|node| {
            if node == 0 {
                0
            } else {
                (n as f64 * flow.supplies().rate_of_node(node)).ceil() as u64
            }
        })
        .collect();

    let mut plans: Vec<NodePlan> = (0..n_nodes)
        .map(|node| NodePlan {
            node,
            inbound: Vec::new(),
            local_bits: bits_per_block[node],
            outbound: Vec::new(),
        })
        .collect();

    for &v in &topo_order {
        if v == 0 {
            continue;
        }
        let inbound_bits: u64 = plans[v].inbound.iter().map(|&(_, b)| b).sum();
        let available = inbound_bits + bits_per_block[v];
        let mut out_edges: Vec<(usize, u64, u64)> = (0..n_nodes)
            .filter(|&w| net[v * n_nodes + w] > EPS)
            .map(|w| {
                let budget = (n as f64 * links.capacity(v, w) + EPS).floor() as u64;
                let base = ((n as f64 * net[v * n_nodes + w] + EPS).floor() as u64).min(budget);
                (w, base, budget)
            })
            .collect();
        let mut assigned: u64 = out_edges.iter().map(|&(_, b, _)| b).sum();
        // Top up a bit at a time within edge budgets until everything fits.
        while assigned < available {
            let mut placed = false;
            for edge in out_edges.iter_mut() {
                if assigned == available {
                    break;
                }
                if edge.1 < edge.2 {
                    edge.1 += 1;
                    assigned += 1;
                    placed = true;
                }
            }
            if !placed {
                return Err(FlowError::BlockTooSmall { node: v, n });
            }
        }
        // Floor sums can exceed the integer inbound+local total; trim from
        // the highest-indexed destinations.
        while assigned > available {
            let edge = out_edges
                .iter_mut()
                .rev()
                .find(|e| e.1 > 0)
                .ok_or(FlowError::Internal("trimming empty edge set".into()))?;
            edge.1 -= 1;
            assigned -= 1;
        }
        for (w, bits, _) in out_edges {
            if bits == 0 {
                continue;
            }
            plans[v].outbound.push((w, bits));
            plans[w].inbound.push((v, bits));
        }
    }
    for plan in plans.iter_mut() {
        plan.inbound.sort_by_key(|&(src, _)| src);
        plan.outbound.sort_by_key(|&(dst, _)| dst);
    }

    // Exact conservation check at every relay.
    for plan in &plans {
        if plan.node == 0 {
            continue;
        }
        let inbound: u64 = plan.inbound.iter().map(|&(_, b)| b).sum();
        let outbound: u64 = plan.outbound.iter().map(|&(_, b)| b).sum();
        if inbound + plan.local_bits != outbound {
            return Err(FlowError::Internal(format!(
                "node {} conservation broke: {} + {} != {}",
                plan.node, inbound, plan.local_bits, outbound
            )));
        }
    }

    // Longest forwarding chain over edges that actually carry bits.
    let mut depth = vec![0usize; n_nodes];
    for &v in topo_order.iter().rev() {
        if v == 0 {
            continue;
        }
        for &(w, _) in &plans[v].outbound {
            depth[v] = depth[v].max(depth[w] + 1);
        }
    }
    let max_hops = depth.iter().copied().max().unwrap_or(0);

    Ok(RoutingSchedule {
        n,
        topo_order,
        plans,
        bits_per_block,
        max_hops,
    })
}

fn cancel_cycles(net: &mut [f64], n_nodes: usize) -> Result<(), FlowError> {
    let max_rounds = n_nodes * n_nodes + 1;
    for _ in 0..max_rounds {
        match find_cycle(net, n_nodes) {
            None => return Ok(()),
            Some(cycle) => {
                let mut min_flow = f64::INFINITY;
                for w in cycle.windows(2) {
                    min_flow = min_flow.min(net[w[0] * n_nodes + w[1]]);
                }
                for w in cycle.windows(2) {
                    let v = &mut net[w[0] * n_nodes + w[1]];
                    *v -= min_flow;
                    if *v < EPS {
                        *v = 0.0;
                    }
                }
            }
        }
    }
    Err(FlowError::CyclicResidual)
}

/// Finds one directed cycle among positive edges, returned as a node list
/// whose first and last entries coincide.
fn find_cycle(net: &[f64], n_nodes: usize) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        New,
        Active,
        Done,
    }
    let mut state = vec![State::New; n_nodes];
    let mut stack: Vec<usize> = Vec::new();

    fn dfs(
        u: usize,
        net: &[f64],
        n_nodes: usize,
        state: &mut [State],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[u] = State::Active;
        stack.push(u);
        for v in 0..n_nodes {
            if net[u * n_nodes + v] > EPS {
                match state[v] {
                    State::Active => {
                        let start = stack.iter().position(|&x| x == v).unwrap();
                        let mut cycle = stack[start..].to_vec();
                        cycle.push(v);
                        return Some(cycle);
                    }
                    State::New => {
                        if let Some(c) = dfs(v, net, n_nodes, state, stack) {
                            return Some(c);
                        }
                    }
                    State::Done => {}
                }
            }
        }
        stack.pop();
        state[u] = State::Done;
        None
    }

    (0..n_nodes).find_map(|start| {
        if state[start] == State::New {
            dfs(start, net, n_nodes, &mut state, &mut stack)
        } else {
            None
        }
    })
}

/// One spanning in-tree toward the sink: `next_hop[i-1]` is where node i
/// forwards everything it carries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeRoute {
    pub next_hop: Vec<usize>,
    pub cost: f64,
    pub edge_loads: Vec<(usize, usize, f64)>,
}

/// All feasible spanning in-trees with their costs, cheapest first.
#[derive(Debug, Clone, Serialize)]
pub struct TreeRouteReport {
    pub feasible: Vec<TreeRoute>,
}

impl TreeRouteReport {
    pub fn best(&self) -> Option<&TreeRoute> {
        self.feasible.first()
    }
}

/// Enumerates every spanning in-tree toward the sink; a tree is feasible
/// iff routing each rate along its unique path violates no capacity.
pub fn tree_route(
    links: &LinkSet,
    rates: &RateVector,
    costs: &EdgeCosts,
) -> Result<TreeRouteReport, FlowError> {
    let n = links.n_nodes();
    let m = n - 1;
    if rates.len() != m {
        return Err(FlowError::NodeCountMismatch {
            links: n,
            rates: rates.len(),
        });
    }
    if m > MAX_TREE_SOURCES {
        return Err(FlowError::TooManyNodes {
            count: m,
            limit: MAX_TREE_SOURCES,
        });
    }

    let mut feasible = Vec::new();
    // next_hop choices per node: every other node.
    let mut choice = vec![0usize; m];
    let options: Vec<Vec<usize>> = (1..=m)
        .map(|i| (0..n).filter(|&j| j != i).collect())
        .collect();
    'outer: loop {
        let next_hop: Vec<usize> = (0..m).map(|i| options[i][choice[i]]).collect();
        if let Some(tree) = evaluate_tree(&next_hop, links, rates, costs) {
            feasible.push(tree);
        }
        // Odometer increment.
        for i in (0..m).rev() {
            choice[i] += 1;
            if choice[i] < options[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    feasible.sort_by(|a, b| {
        a.cost
            .partial_cmp(&b.cost)
            .unwrap()
            .then_with(|| a.next_hop.cmp(&b.next_hop))
    });
    Ok(TreeRouteReport { feasible })
}

fn evaluate_tree(
    next_hop: &[usize],
    links: &LinkSet,
    rates: &RateVector,
    costs: &EdgeCosts,
) -> Option<TreeRoute> {
    let m = next_hop.len();
    let n = m + 1;
    // Every node must reach the sink without cycling.
    for start in 1..=m {
        let mut node = start;
        let mut steps = 0;
        while node != 0 {
            node = next_hop[node - 1];
            steps += 1;
            if steps > m {
                return None;
            }
        }
    }
    let mut loads = vec![0.0; n * n];
    for source in 1..=m {
        let rate = rates.rate_of_node(source);
        let mut node = source;
        while node != 0 {
            let next = next_hop[node - 1];
            loads[node * n + next] += rate;
            node = next;
        }
    }
    let mut cost = 0.0;
    let mut edge_loads = Vec::new();
    for i in 1..n {
        for j in 0..n {
            let load = loads[i * n + j];
            if load > 0.0 {
                if load > links.capacity(i, j) + EPS {
                    return None;
                }
                cost += load * costs.get(i, j);
                edge_loads.push((i, j, load));
            } else if i != j && next_hop[i - 1] == j {
                // Zero-rate node still needs its edge to exist conceptually,
                // but carries nothing; no capacity check required.
                edge_loads.push((i, j, 0.0));
            }
        }
    }
    Some(TreeRoute {
        next_hop: next_hop.to_vec(),
        cost,
        edge_loads,
    })
}
