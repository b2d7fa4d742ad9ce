//! Feasible circulations with lower and upper arc bounds.
//!
//! Lower bounds are removed by the usual shift `f = l + g`, which leaves a
//! node imbalance; a super source and super sink absorb the imbalance and an
//! Edmonds–Karp max flow decides whether every shifted unit can be routed.
//! All arithmetic is exact, and augmenting along integer residuals keeps an
//! integer-bounded instance integral.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub lower: Rational,
    pub upper: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CirculationNetwork {
    num_nodes: usize,
    arcs: Vec<FlowArc>,
}

impl CirculationNetwork {
    pub fn new(num_nodes: usize) -> Self {
        CirculationNetwork { num_nodes, arcs: Vec::new() }
    }

    /// Adds an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, lower: Rational, upper: Rational) -> usize {
        assert!(from < self.num_nodes && to < self.num_nodes, "arc endpoint out of range");
        self.arcs.push(FlowArc { from, to, lower, upper });
        self.arcs.len() - 1
    }

    pub fn arcs(&self) -> &[FlowArc] {
        &self.arcs
    }

    pub fn arc_mut(&mut self, idx: usize) -> &mut FlowArc {
        &mut self.arcs[idx]
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circulation {
    flow: Vec<Rational>,
}

impl Circulation {
    pub fn flow(&self, arc: usize) -> &Rational {
        &self.flow[arc]
    }

    pub fn flows(&self) -> &[Rational] {
        &self.flow
    }

    /// Checks bounds on every arc and conservation at every node.
    pub fn is_valid_for(&self, net: &CirculationNetwork) -> bool {
        if self.flow.len() != net.arcs.len() {
            return false;
        }
        let mut balance = vec![Rational::zero(); net.num_nodes];
        for (a, f) in net.arcs.iter().zip(&self.flow) {
            if *f < a.lower || *f > a.upper {
                return false;
            }
            balance[a.from] -= f;
            balance[a.to] += f;
        }
        balance.iter().all(Zero::is_zero)
    }
}

struct Edge {
    to: usize,
    cap: Rational,
}

/// Residual graph with paired forward/backward edges (`e ^ 1` is the twin).
struct Residual {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: Rational) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap });
        self.edges.push(Edge { to: from, cap: Rational::zero() });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> Rational {
        let n = self.adj.len();
        let mut total = Rational::zero();
        loop {
            let mut parent: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if !seen[v] && self.edges[e].cap.is_positive() {
                        seen[v] = true;
                        parent[v] = Some(e);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let mut bottleneck: Option<Rational> = None;
            let mut v = sink;
            while let Some(e) = parent[v] {
                let c = &self.edges[e].cap;
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
                v = self.edges[e ^ 1].to;
            }
            let b = bottleneck.expect("augmenting path has at least one edge");
            let mut v = sink;
            while let Some(e) = parent[v] {
                self.edges[e].cap -= &b;
                self.edges[e ^ 1].cap += &b;
                v = self.edges[e ^ 1].to;
            }
            total += b;
        }
    }
}

/// Returns a feasible circulation, or `None` if none exists.
pub fn solve_circulation(net: &CirculationNetwork) -> Option<Circulation> {
    if net.arcs.iter().any(|a| a.lower > a.upper) {
        return None;
    }
    let n = net.num_nodes;
    let (source, sink) = (n, n + 1);
    let mut res = Residual::new(n + 2);
    let mut excess = vec![Rational::zero(); n];
    let mut ids = Vec::with_capacity(net.arcs.len());
    for a in &net.arcs {
        ids.push(res.add(a.from, a.to, &a.upper - &a.lower));
        excess[a.to] += &a.lower;
        excess[a.from] -= &a.lower;
    }
    let mut required = Rational::zero();
    for (v, e) in excess.iter().enumerate() {
        if e.is_positive() {
            res.add(source, v, e.clone());
            required += e;
        } else if e.is_negative() {
            res.add(v, sink, -e);
        }
    }
    if res.max_flow(source, sink) != required {
        return None;
    }
    let flow = net
        .arcs
        .iter()
        .zip(&ids)
        .map(|(a, &e)| &a.lower + &res.edges[e ^ 1].cap)
        .collect();
    Some(Circulation { flow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn simple_cycle_with_lower_bound() {
        let mut net = CirculationNetwork::new(3);
        net.add_arc(0, 1, int(1), int(3));
        net.add_arc(1, 2, int(0), int(2));
        net.add_arc(2, 0, int(0), int(5));
        let c = solve_circulation(&net).unwrap();
        assert!(c.is_valid_for(&net));
        assert!(*c.flow(0) >= int(1));
    }

    #[test]
    fn infeasible_when_lower_exceeds_downstream_capacity() {
        let mut net = CirculationNetwork::new(2);
        net.add_arc(0, 1, int(2), int(2));
        net.add_arc(1, 0, int(0), int(1));
        assert!(solve_circulation(&net).is_none());
    }

    #[test]
    fn inverted_bounds_are_infeasible() {
        let mut net = CirculationNetwork::new(2);
        net.add_arc(0, 1, int(2), int(1));
        net.add_arc(1, 0, int(0), int(5));
        assert!(solve_circulation(&net).is_none());
    }

    #[test]
    fn rational_bounds() {
        let mut net = CirculationNetwork::new(3);
        net.add_arc(0, 1, ratio(1, 3), int(1));
        net.add_arc(0, 2, ratio(1, 2), int(1));
        net.add_arc(1, 0, int(0), ratio(2, 5));
        net.add_arc(2, 0, int(0), ratio(3, 5));
        let c = solve_circulation(&net).unwrap();
        assert!(c.is_valid_for(&net));
    }

    #[test]
    fn integer_bounds_give_integer_flow() {
        let mut net = CirculationNetwork::new(4);
        net.add_arc(0, 1, int(0), int(1));
        net.add_arc(0, 2, int(0), int(1));
        net.add_arc(1, 3, int(0), int(1));
        net.add_arc(2, 3, int(0), int(1));
        net.add_arc(3, 0, int(2), int(2));
        let c = solve_circulation(&net).unwrap();
        assert!(c.is_valid_for(&net));
        assert!(c.flows().iter().all(|f| f.is_integer()));
    }
}
