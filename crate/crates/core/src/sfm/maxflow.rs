//! Dinic's blocking-flow algorithm on real capacities.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::submodular::BinaryVector;

const SOURCE: usize = 0;
const SINK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: f64,
}

/// Network on `num_vars + 2` nodes: node 0 is the source, node 1 the sink,
/// and variable `d` is node `d + 2`.
///
/// For networks produced by [`super::build_flow_network`], the energy of a
/// labelling equals the capacity of its cut minus `constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowNetwork {
    num_vars: usize,
    arcs: Vec<Arc>,
    pub constant: f64,
}

impl FlowNetwork {
    pub fn new(num_vars: usize) -> Self {
        FlowNetwork {
            num_vars,
            arcs: Vec::new(),
            constant: 0.0,
        }
    }

    pub const fn source() -> usize {
        SOURCE
    }

    pub const fn sink() -> usize {
        SINK
    }

    pub const fn var_node(d: usize) -> usize {
        d + 2
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_nodes(&self) -> usize {
        self.num_vars + 2
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64) -> Result<()> {
        let n = self.num_nodes();
        for index in [from, to] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, dim: n });
            }
        }
        if !capacity.is_finite() || capacity < 0.0 {
            return Err(Error::Precondition(format!(
                "arc capacity must be finite and nonnegative, got {capacity}"
            )));
        }
        if to == SOURCE || from == SINK {
            return Err(Error::Precondition(
                "source may not have incoming arcs nor sink outgoing arcs".into(),
            ));
        }
        if from == to {
            return Err(Error::Precondition(format!("self-loop on node {from}")));
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(())
    }

    /// Capacity of the cut whose sink side holds exactly the variables set in
    /// `sink_side`.
    pub fn cut_capacity(&self, sink_side: &BinaryVector) -> f64 {
        let on_sink = |node: usize| match node {
            SOURCE => false,
            SINK => true,
            v => sink_side[v - 2],
        };
        self.arcs
            .iter()
            .filter(|a| !on_sink(a.from) && on_sink(a.to))
            .map(|a| a.capacity)
            .sum()
    }

    /// DIMACS max-flow text (1-based nodes: source 1, sink 2).
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p max {} {}\nn 1 s\nn 2 t\n", self.num_nodes(), self.arcs.len());
        for a in &self.arcs {
            let _ = writeln!(out, "a {} {} {:?}", a.from + 1, a.to + 1, a.capacity);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub flow_value: f64,
    /// `true` for variables on the sink side of the canonical minimum cut.
    pub sink_side: BinaryVector,
}

#[derive(Clone, Copy)]
struct ResidualArc {
    to: usize,
    residual: f64,
    rev: usize,
}

struct Dinic {
    graph: Vec<Vec<ResidualArc>>,
    level: Vec<i32>,
    next: Vec<usize>,
    eps: f64,
}

impl Dinic {
    fn new(net: &FlowNetwork) -> Self {
        let n = net.num_nodes();
        let mut graph: Vec<Vec<ResidualArc>> = vec![Vec::new(); n];
        let mut scale: f64 = 1.0;
        for a in &net.arcs {
            scale = scale.max(a.capacity);
            let ra = graph[a.to].len();
            let rb = graph[a.from].len();
            graph[a.from].push(ResidualArc {
                to: a.to,
                residual: a.capacity,
                rev: ra,
            });
            graph[a.to].push(ResidualArc {
                to: a.from,
                residual: 0.0,
                rev: rb,
            });
        }
        Dinic {
            graph,
            level: vec![-1; n],
            next: vec![0; n],
            eps: scale * 1e-14,
        }
    }

    fn bfs(&mut self) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = VecDeque::new();
        self.level[SOURCE] = 0;
        queue.push_back(SOURCE);
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.residual > self.eps && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[SINK] >= 0
    }

    fn dfs(&mut self, u: usize, limit: f64) -> f64 {
        if u == SINK {
            return limit;
        }
        while self.next[u] < self.graph[u].len() {
            let e = self.graph[u][self.next[u]];
            if e.residual > self.eps && self.level[e.to] == self.level[u] + 1 {
                let pushed = self.dfs(e.to, limit.min(e.residual));
                if pushed > 0.0 {
                    let idx = self.next[u];
                    self.graph[u][idx].residual -= pushed;
                    self.graph[e.to][e.rev].residual += pushed;
                    return pushed;
                }
            }
            self.next[u] += 1;
        }
        0.0
    }

    fn run(&mut self) -> f64 {
        let mut flow = 0.0;
        while self.bfs() {
            self.next.iter_mut().for_each(|n| *n = 0);
            loop {
                let pushed = self.dfs(SOURCE, f64::INFINITY);
                if pushed <= 0.0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    /// Nodes reachable from the source in the residual graph.
    fn source_side(&self) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        let mut queue = VecDeque::from([SOURCE]);
        seen[SOURCE] = true;
        while let Some(u) = queue.pop_front() {
            for e in &self.graph[u] {
                if e.residual > self.eps && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

/// Maximum flow and the minimum cut whose source side is the set of nodes
/// reachable from the source in the final residual graph.
pub fn max_flow(net: &FlowNetwork) -> FlowResult {
    let mut solver = Dinic::new(net);
    let flow_value = solver.run();
    let reachable = solver.source_side();
    FlowResult {
        flow_value,
        sink_side: BinaryVector::new(reachable[2..].iter().map(|r| !r).collect()),
    }
}
