use super::{check_dim, for_each_point, SetFunction};
use crate::error::{Error, Result};

/// Largest dimension for the exhaustive membership test.
const MAX_MEMBERSHIP_DIM: usize = 16;

/// A point `s` of the base polytope `B(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    pub s: Vec<f64>,
}

impl BasePoint {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.s.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    /// Exhaustive membership certificate; see [`in_base_polytope`].
    pub fn verify(&self, f: &dyn SetFunction, tol: f64) -> Result<bool> {
        in_base_polytope(f, &self.s, tol)
    }
}

/// Greedy vertex of `B(f)` maximizing `w^T s`. Indices are visited by
/// decreasing weight; equal weights keep increasing index order.
pub fn greedy_base_vertex(f: &dyn SetFunction, w: &[f64]) -> Result<BasePoint> {
    check_dim(f.dim(), w.len())?;
    let mut order: Vec<usize> = (0..w.len()).collect();
    // stable: ties keep lower index first
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    Ok(BasePoint {
        s: greedy_gains(f, &order),
    })
}

/// Marginal gains along a chain: `s[order[j]] = f(order[..=j]) - f(order[..j])`.
pub(crate) fn greedy_gains(f: &dyn SetFunction, order: &[usize]) -> Vec<f64> {
    let mut s = vec![0.0; order.len()];
    let mut x = vec![false; order.len()];
    let mut prev = f.value(&x);
    for &d in order {
        x[d] = true;
        let cur = f.value(&x);
        s[d] = cur - prev;
        prev = cur;
    }
    s
}

/// Lovász extension `f(w) = max_{s in B(f)} w^T s`.
pub fn lovasz_extension(f: &dyn SetFunction, w: &[f64]) -> Result<f64> {
    Ok(greedy_base_vertex(f, w)?.dot(w))
}

/// Checks `s(A) <= f(A) + tol` for every `A` and `|s(V) - f(V)| <= tol`.
pub fn in_base_polytope(f: &dyn SetFunction, s: &[f64], tol: f64) -> Result<bool> {
    check_dim(f.dim(), s.len())?;
    if f.dim() > MAX_MEMBERSHIP_DIM {
        return Err(Error::TooLarge {
            dim: f.dim(),
            max: MAX_MEMBERSHIP_DIM,
        });
    }
    let full = vec![true; f.dim()];
    if (s.iter().sum::<f64>() - f.value(&full)).abs() > tol {
        return Ok(false);
    }
    let mut ok = true;
    for_each_point(f.dim(), |x| {
        if ok {
            let sa: f64 = s.iter().zip(x).filter(|(_, &b)| b).map(|(v, _)| v).sum();
            ok = sa <= f.value(x) + tol;
        }
    });
    Ok(ok)
}
