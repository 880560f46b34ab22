//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's algorithms; instances are converted to library
//! types only at the boundary.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use logsupmod::submodular::{CutFunction, Edge, FunctionHandle};
use logsupmod::SubmodularMixture;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `f(x) = sum_k alpha_k sum_{(i,j,w) in E_k} w [x_i != x_j] - t^T x`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub dim: usize,
    pub bases: Vec<Vec<(usize, usize, f64)>>,
    pub alpha: Vec<f64>,
    pub t: Vec<f64>,
}

impl Instance {
    pub fn random(dim: usize, num_bases: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bases = (0..num_bases)
            .map(|_| {
                let mut edges = Vec::new();
                for i in 0..dim {
                    for j in (i + 1)..dim {
                        if rng.random::<f64>() < 0.5 {
                            edges.push((i, j, rng.random_range(0.05..2.0)));
                        }
                    }
                }
                edges
            })
            .collect();
        let alpha = (0..num_bases).map(|_| rng.random_range(0.0..2.0)).collect();
        let t = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        Instance { dim, bases, alpha, t }
    }

    pub fn base_value(&self, k: usize, mask: u64) -> f64 {
        self.bases[k]
            .iter()
            .filter(|(i, j, _)| (mask >> i & 1) != (mask >> j & 1))
            .map(|(_, _, w)| w)
            .sum()
    }

    pub fn energy(&self, mask: u64) -> f64 {
        let pairwise: f64 = (0..self.bases.len()).map(|k| self.alpha[k] * self.base_value(k, mask)).sum();
        let linear: f64 = (0..self.dim).filter(|d| mask >> d & 1 == 1).map(|d| self.t[d]).sum();
        pairwise - linear
    }

    pub fn base_handles(&self) -> Vec<FunctionHandle> {
        self.bases
            .iter()
            .map(|edges| {
                let e = edges.iter().map(|&(i, j, w)| Edge::new(i, j, w)).collect();
                Arc::new(CutFunction::new(self.dim, e).unwrap()) as FunctionHandle
            })
            .collect()
    }

    pub fn mixture(&self) -> SubmodularMixture {
        SubmodularMixture::new(self.base_handles(), self.alpha.clone(), self.t.clone()).unwrap()
    }

    pub fn with_t(&self, t: Vec<f64>) -> Self {
        Instance { t, ..self.clone() }
    }
}

pub fn bits(mask: u64, dim: usize) -> Vec<bool> {
    (0..dim).map(|d| mask >> d & 1 == 1).collect()
}

pub fn mask_of(x: &[bool]) -> u64 {
    x.iter().enumerate().filter(|(_, &b)| b).map(|(d, _)| 1u64 << d).sum()
}

/// `log sum_x exp(-f(x))` by enumeration.
pub fn log_partition(f: impl Fn(u64) -> f64, dim: usize) -> f64 {
    let values: Vec<f64> = (0..1u64 << dim).map(|m| -f(m)).collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `P(x_d = 1)` under `exp(-f)` by enumeration.
pub fn marginals(f: impl Fn(u64) -> f64, dim: usize) -> Vec<f64> {
    let a = log_partition(&f, dim);
    let mut mu = vec![0.0; dim];
    for m in 0..1u64 << dim {
        let p = (-f(m) - a).exp();
        for (d, v) in mu.iter_mut().enumerate() {
            if m >> d & 1 == 1 {
                *v += p;
            }
        }
    }
    mu
}

/// Minimum of `f(x) - extra^T x` by enumeration.
pub fn brute_min(f: impl Fn(u64) -> f64, extra: &[f64]) -> f64 {
    let dim = extra.len();
    (0..1u64 << dim)
        .map(|m| f(m) - (0..dim).filter(|d| m >> d & 1 == 1).map(|d| extra[d]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Greedy vertex of the base polytope for the order `perm`.
pub fn vertex(f: &impl Fn(u64) -> f64, perm: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; perm.len()];
    let mut mask = 0u64;
    let mut prev = f(0);
    for &d in perm {
        mask |= 1 << d;
        let cur = f(mask);
        s[d] = cur - prev;
        prev = cur;
    }
    s
}

/// Order minimizing `<w, s>`: increasing `w`.
fn increasing(w: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    perm
}

/// `s(A) <= f(A)` for every `A` and `s(V) = f(V)`.
pub fn in_base_polytope(f: impl Fn(u64) -> f64, s: &[f64], tol: f64) -> bool {
    let dim = s.len();
    let full = (1u64 << dim) - 1;
    (0..=full).all(|m| {
        let sa: f64 = (0..dim).filter(|d| m >> d & 1 == 1).map(|d| s[d]).sum();
        sa <= f(m) + tol
    }) && {
        let sv: f64 = s.iter().sum();
        (sv - f(full)).abs() <= tol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum-norm point of the base polytope by pairwise Frank-Wolfe with exact
/// line search, stopped at duality gap `gap_tol` (which bounds the squared
/// distance to the optimum).
pub fn frank_wolfe_min_norm(f: impl Fn(u64) -> f64, dim: usize, gap_tol: f64, max_iter: usize) -> Vec<f64> {
    let start: Vec<usize> = (0..dim).collect();
    let mut active: HashMap<Vec<usize>, (Vec<f64>, f64)> = HashMap::new();
    let mut s = vertex(&f, &start);
    active.insert(start, (s.clone(), 1.0));
    for _ in 0..max_iter {
        let fw_perm = increasing(&s);
        let v = vertex(&f, &fw_perm);
        let gap = dot(&s, &s) - dot(&s, &v);
        if gap <= gap_tol {
            break;
        }
        let (away_key, (a, a_weight)) = active
            .iter()
            .max_by(|x, y| dot(&s, &x.1 .0).total_cmp(&dot(&s, &y.1 .0)))
            .map(|(k, v)| (k.clone(), v.clone()))
            .unwrap();
        let d: Vec<f64> = v.iter().zip(&a).map(|(x, y)| x - y).collect();
        let dd = dot(&d, &d);
        if dd == 0.0 {
            break;
        }
        let gamma = (-dot(&s, &d) / dd).clamp(0.0, a_weight);
        for (si, di) in s.iter_mut().zip(&d) {
            *si += gamma * di;
        }
        active.entry(fw_perm).or_insert((v, 0.0)).1 += gamma;
        let w = &mut active.get_mut(&away_key).unwrap().1;
        *w -= gamma;
        if *w <= 1e-15 {
            active.remove(&away_key);
        }
    }
    s
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn entropy(mu: &[f64]) -> f64 {
    mu.iter()
        .map(|&p| {
            let h = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
            h(p) + h(1.0 - p)
        })
        .sum()
}

/// Lovász extension by sorting, evaluated directly.
pub fn lovasz(f: impl Fn(u64) -> f64, w: &[f64]) -> f64 {
    let mut perm: Vec<usize> = (0..w.len()).collect();
    perm.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    dot(&vertex(&f, &perm), w)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Integration tests have no `lib.rs` for proptest to anchor a regression file
/// to, so failures are reported but not persisted.
pub fn proptest_config(cases: u32) -> proptest::prelude::ProptestConfig {
    proptest::prelude::ProptestConfig {
        cases,
        failure_persistence: None,
        ..proptest::prelude::ProptestConfig::default()
    }
}
