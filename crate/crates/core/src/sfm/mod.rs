//! Exact minimization of `f(x) - extra^T x`: exhaustive search for small
//! dimensions and a graph-cut reduction for cut mixtures.

mod maxflow;

pub use maxflow::{max_flow, Arc, FlowNetwork, FlowResult};

use crate::error::{Error, Result};
use crate::submodular::{check_dim, for_each_point, BinaryVector, SetFunction, SubmodularMixture};

/// Largest dimension handled by exhaustive search.
pub const MAX_BRUTEFORCE_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    BruteForce,
    MaxFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizationResult {
    pub argmin: BinaryVector,
    /// `f(argmin) - extra^T argmin`.
    pub value: f64,
    pub solver: Solver,
}

fn objective(f: &dyn SetFunction, extra: &[f64], x: &[bool]) -> f64 {
    let linear: f64 = extra
        .iter()
        .zip(x)
        .filter(|(_, &b)| b)
        .map(|(e, _)| e)
        .sum();
    f.value(x) - linear
}

/// Exhaustive minimizer of `f(x) - extra^T x`. Among equal values the
/// smallest little-endian integer wins.
pub fn minimize_bruteforce(f: &dyn SetFunction, extra: &[f64]) -> Result<MinimizationResult> {
    let dim = f.dim();
    check_dim(dim, extra.len())?;
    if dim > MAX_BRUTEFORCE_DIM {
        return Err(Error::TooLarge {
            dim,
            max: MAX_BRUTEFORCE_DIM,
        });
    }
    let mut best = f64::INFINITY;
    let mut argmin = vec![false; dim];
    for_each_point(dim, |x| {
        let v = objective(f, extra, x);
        if v < best {
            best = v;
            argmin.copy_from_slice(x);
        }
    });
    Ok(MinimizationResult {
        argmin: BinaryVector::new(argmin),
        value: best,
        solver: Solver::BruteForce,
    })
}

/// Graph-cut network for `f(x) - extra^T x` where every base function of `f`
/// is a cut. With `gain = t + extra`, variable `d` gets an arc
/// `source -> d` of capacity `max(-gain_d, 0)` and `d -> sink` of capacity
/// `max(gain_d, 0)`; each edge contributes two opposite arcs of capacity
/// `alpha_k * w`. A variable is 1 iff it lies on the sink side.
pub fn build_flow_network(f: &SubmodularMixture, extra: &[f64]) -> Result<FlowNetwork> {
    let dim = f.dim();
    check_dim(dim, extra.len())?;
    let cuts = f
        .cuts()
        .ok_or_else(|| Error::Unsupported("graph-cut reduction needs cut base functions".into()))?;
    let mut net = FlowNetwork::new(dim);
    for (d, (t, e)) in f.t().iter().zip(extra).enumerate() {
        let gain = t + e;
        let node = FlowNetwork::var_node(d);
        if gain > 0.0 {
            net.add_arc(node, FlowNetwork::sink(), gain)?;
            net.constant += gain;
        } else if gain < 0.0 {
            net.add_arc(FlowNetwork::source(), node, -gain)?;
        }
    }
    for (cut, &a) in cuts.iter().zip(f.alpha()) {
        if a == 0.0 {
            continue;
        }
        for e in cut.edges() {
            let cap = a * e.weight;
            if cap > 0.0 {
                let (u, v) = (FlowNetwork::var_node(e.i), FlowNetwork::var_node(e.j));
                net.add_arc(u, v, cap)?;
                net.add_arc(v, u, cap)?;
            }
        }
    }
    Ok(net)
}

/// Minimizes `f(x) - extra^T x`, by max-flow when every base function is a
/// cut and by exhaustive search otherwise.
pub fn minimize(f: &SubmodularMixture, extra: &[f64]) -> Result<MinimizationResult> {
    check_dim(f.dim(), extra.len())?;
    if f.cuts().is_some() {
        let net = build_flow_network(f, extra)?;
        let cut = max_flow(&net);
        let value = objective(f, extra, cut.sink_side.bits());
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite minimum".into()));
        }
        return Ok(MinimizationResult {
            argmin: cut.sink_side,
            value,
            solver: Solver::MaxFlow,
        });
    }
    if f.dim() > MAX_BRUTEFORCE_DIM {
        return Err(Error::Unsupported(format!(
            "no exact minimizer for non-cut functions of dimension {}",
            f.dim()
        )));
    }
    minimize_bruteforce(f, extra)
}
