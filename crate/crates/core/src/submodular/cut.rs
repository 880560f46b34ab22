use std::collections::HashSet;
use std::fmt::Write as _;

use super::SetFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, weight: f64) -> Self {
        Edge { i, j, weight }
    }
}

/// Undirected graph cut `f(x) = sum_{(i,j)} w_ij |x_i - x_j|` with `w_ij >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutFunction {
    num_nodes: usize,
    edges: Vec<Edge>,
}

impl CutFunction {
    /// Endpoints are stored with `i < j`. Self-loops, repeated pairs, and
    /// negative or non-finite weights are rejected.
    pub fn new(num_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            for index in [e.i, e.j] {
                if index >= num_nodes {
                    return Err(Error::IndexOutOfRange {
                        index,
                        dim: num_nodes,
                    });
                }
            }
            if e.i == e.j {
                return Err(Error::Precondition(format!("self-loop on node {}", e.i)));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidWeight {
                    i: e.i,
                    j: e.j,
                    weight: e.weight,
                });
            }
            let (i, j) = (e.i.min(e.j), e.i.max(e.j));
            if !seen.insert((i, j)) {
                return Err(Error::Precondition(format!("duplicate edge ({i}, {j})")));
            }
            normalized.push(Edge::new(i, j, e.weight));
        }
        Ok(CutFunction {
            num_nodes,
            edges: normalized,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Parses the plain-text edge list: a `D E` header followed by `E` lines
    /// `i j w` with 0-based indices.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header line"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::parse(hline, "header must be `D E`"));
        }
        let dim: usize = head[0]
            .parse()
            .map_err(|_| Error::parse(hline, format!("bad node count `{}`", head[0])))?;
        let count: usize = head[1]
            .parse()
            .map_err(|_| Error::parse(hline, format!("bad edge count `{}`", head[1])))?;

        let mut edges = Vec::with_capacity(count);
        for (line, body) in lines {
            if edges.len() == count {
                return Err(Error::parse(line, "more edge lines than declared"));
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(line, "edge line must be `i j w`"));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad index `{}`", fields[0])))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad index `{}`", fields[1])))?;
            let w: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad weight `{}`", fields[2])))?;
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeight { i, j, weight: w });
            }
            edges.push(Edge::new(i, j, w));
        }
        if edges.len() != count {
            return Err(Error::parse(
                hline,
                format!("declared {count} edges, found {}", edges.len()),
            ));
        }
        CutFunction::new(dim, edges)
    }

    /// Inverse of [`CutFunction::from_edge_list`]; weights use shortest
    /// round-trip formatting.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.num_nodes, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {:?}", e.i, e.j, e.weight);
        }
        out
    }

    /// Fixes some variables and re-expresses the cut on the free ones:
    /// returns the cut among free nodes (reindexed in increasing order), the
    /// per-free-node linear energy coefficient induced by edges to fixed nodes,
    /// and the free indices. Constants are dropped so the result vanishes at 0.
    pub fn condition(&self, fixed: &[Option<bool>]) -> Result<(CutFunction, Vec<f64>, Vec<usize>)> {
        super::check_dim(self.num_nodes, fixed.len())?;
        let mut position = vec![usize::MAX; self.num_nodes];
        let mut free = Vec::new();
        for (d, v) in fixed.iter().enumerate() {
            if v.is_none() {
                position[d] = free.len();
                free.push(d);
            }
        }
        let mut linear = vec![0.0; free.len()];
        let mut edges = Vec::new();
        for e in &self.edges {
            match (fixed[e.i], fixed[e.j]) {
                (None, None) => edges.push(Edge::new(position[e.i], position[e.j], e.weight)),
                // w|v - y| is w*y when v = 0 and w - w*y when v = 1
                (Some(v), None) => linear[position[e.j]] += if v { -e.weight } else { e.weight },
                (None, Some(v)) => linear[position[e.i]] += if v { -e.weight } else { e.weight },
                (Some(_), Some(_)) => {}
            }
        }
        Ok((CutFunction::new(free.len(), edges)?, linear, free))
    }
}

impl SetFunction for CutFunction {
    fn dim(&self) -> usize {
        self.num_nodes
    }

    fn value(&self, x: &[bool]) -> f64 {
        self.edges
            .iter()
            .filter(|e| x[e.i] != x[e.j])
            .map(|e| e.weight)
            .sum()
    }

    fn as_cut(&self) -> Option<&CutFunction> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{eval, BinaryVector};

    #[test]
    fn single_edge_value() {
        let f = CutFunction::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        assert_eq!(eval(&f, &BinaryVector::from_u8(&[1, 0]).unwrap()).unwrap(), 1.0);
        assert_eq!(eval(&f, &BinaryVector::zeros(2)).unwrap(), 0.0);
        assert_eq!(eval(&f, &BinaryVector::ones(2)).unwrap(), 0.0);
    }

    #[test]
    fn checkerboard_on_two_by_two_grid() {
        // nodes 0 1 / 2 3; horizontal (0,1), (2,3); vertical (0,2), (1,3)
        let f = CutFunction::new(
            4,
            vec![
                Edge::new(0, 1, 1.0),
                Edge::new(2, 3, 1.0),
                Edge::new(0, 2, 1.0),
                Edge::new(1, 3, 1.0),
            ],
        )
        .unwrap();
        let x = BinaryVector::from_u8(&[1, 0, 0, 1]).unwrap();
        assert_eq!(eval(&f, &x).unwrap(), 4.0);
    }

    #[test]
    fn constructor_validation() {
        assert!(CutFunction::new(2, vec![Edge::new(1, 1, 1.0)]).is_err());
        assert!(CutFunction::new(2, vec![Edge::new(0, 2, 1.0)]).is_err());
        assert!(CutFunction::new(2, vec![Edge::new(0, 1, -1.0)]).is_err());
        assert!(CutFunction::new(2, vec![Edge::new(0, 1, f64::NAN)]).is_err());
        assert!(CutFunction::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]).is_err());
        let f = CutFunction::new(3, vec![Edge::new(2, 0, 1.5)]).unwrap();
        assert_eq!(f.edges()[0], Edge::new(0, 2, 1.5));
    }

    #[test]
    fn edge_list_parsing() {
        let f = CutFunction::from_edge_list("3 2\n0 1 1.5\n1 2 0.25\n").unwrap();
        assert_eq!(f.num_nodes(), 3);
        assert_eq!(f.edges().len(), 2);
        let back = CutFunction::from_edge_list(&f.to_edge_list()).unwrap();
        assert_eq!(back, f);

        for bad in [
            "",
            "3\n",
            "3 1\n0 1 NaN\n",
            "3 1\n0 1 -2\n",
            "3 2\n0 1 1\n",
            "3 1\n0 1 1\n1 2 1\n",
            "3 1\n0 1\n",
            "3 1\n0 x 1\n",
            "3 1\n0 3 1\n",
        ] {
            assert!(CutFunction::from_edge_list(bad).is_err(), "accepted {bad:?}");
        }
        assert!(matches!(
            CutFunction::from_edge_list("2 1\n0 1 nan\n"),
            Err(Error::InvalidWeight { .. })
        ));
    }

    #[test]
    fn conditioning_a_single_edge() {
        let f = CutFunction::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let (g, linear, free) = f.condition(&[Some(true), None]).unwrap();
        assert_eq!(g.edges().len(), 0);
        assert_eq!(linear, vec![-1.0]);
        assert_eq!(free, vec![1]);
    }
}
