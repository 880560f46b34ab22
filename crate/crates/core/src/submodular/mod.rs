//! Set functions on `{0,1}^D`, their mixtures, the greedy algorithm on the
//! base polytope and the Lovász extension.

mod cut;
mod greedy;
mod mixture;

use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

pub use cut::{CutFunction, Edge};
pub use greedy::{greedy_base_vertex, in_base_polytope, lovasz_extension, BasePoint};
pub use mixture::{
    restrict_and_contract, Conditioned, FunctionHandle, Restricted, SubmodularMixture,
    TabulatedFunction,
};

/// Absolute tolerance for identities that hold exactly up to rounding.
pub const TOL_NUM: f64 = 1e-9;
/// Slack allowed on second differences when testing submodularity.
pub const TOL_SUB: f64 = 1e-9;
/// Largest dimension accepted by [`is_submodular_bruteforce`].
pub const MAX_SUBMODULAR_CHECK_DIM: usize = 12;

/// A set function `f: {0,1}^D -> R` with `f(0) = 0`.
pub trait SetFunction: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Value at `x`. Callers guarantee `x.len() == self.dim()`.
    fn value(&self, x: &[bool]) -> f64;

    /// Downcast hook used by the max-flow dispatch.
    fn as_cut(&self) -> Option<&CutFunction> {
        None
    }
}

/// A point of the hypercube, equivalently a subset of `{0, .., D-1}`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BinaryVector(Vec<bool>);

impl BinaryVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BinaryVector(bits)
    }

    pub fn zeros(dim: usize) -> Self {
        BinaryVector(vec![false; dim])
    }

    pub fn ones(dim: usize) -> Self {
        BinaryVector(vec![true; dim])
    }

    /// Builds from 0/1 integers; any other value is rejected.
    pub fn from_u8(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Precondition(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BinaryVector)
    }

    /// Bit `d` is bit `d` of `mask` (little-endian).
    pub fn from_mask(mask: u64, dim: usize) -> Self {
        BinaryVector((0..dim).map(|d| (mask >> d) & 1 == 1).collect())
    }

    pub fn to_mask(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (d, &b)| if b { m | (1 << d) } else { m })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BinaryVector(self.0.iter().map(|b| !b).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// Indices of the ones.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(d, &b)| b.then_some(d))
            .collect()
    }
}

impl Index<usize> for BinaryVector {
    type Output = bool;

    fn index(&self, d: usize) -> &bool {
        &self.0[d]
    }
}

impl From<Vec<bool>> for BinaryVector {
    fn from(bits: Vec<bool>) -> Self {
        BinaryVector(bits)
    }
}

impl fmt::Debug for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Evaluates `f(x)`.
pub fn eval(f: &dyn SetFunction, x: &BinaryVector) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    Ok(f.value(x.bits()))
}

/// `f(x + e_d) - f(x)`; requires `x_d = 0`.
pub fn marginal_gain(f: &dyn SetFunction, x: &BinaryVector, d: usize) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    if d >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: d,
            dim: x.len(),
        });
    }
    if x[d] {
        return Err(Error::Precondition(format!(
            "marginal gain requires x[{d}] = 0"
        )));
    }
    let mut y = x.bits().to_vec();
    let before = f.value(&y);
    y[d] = true;
    Ok(f.value(&y) - before)
}

/// Visits every `x in {0,1}^dim` in increasing little-endian integer order.
pub(crate) fn for_each_point(dim: usize, mut visit: impl FnMut(&[bool])) {
    let mut x = vec![false; dim];
    loop {
        visit(&x);
        // binary increment
        let mut d = 0;
        while d < dim && x[d] {
            x[d] = false;
            d += 1;
        }
        if d == dim {
            return;
        }
        x[d] = true;
    }
}

/// Exhaustive second-difference test:
/// `f(x+e_i+e_j) - f(x+e_i) - f(x+e_j) + f(x) <= tol` for all admissible `x, i != j`.
pub fn is_submodular_bruteforce(f: &dyn SetFunction, tol: f64) -> Result<bool> {
    let dim = f.dim();
    if dim > MAX_SUBMODULAR_CHECK_DIM {
        return Err(Error::TooLarge {
            dim,
            max: MAX_SUBMODULAR_CHECK_DIM,
        });
    }
    let values: Vec<f64> = {
        let mut v = Vec::with_capacity(1 << dim);
        for_each_point(dim, |x| v.push(f.value(x)));
        v
    };
    for mask in 0usize..(1 << dim) {
        for i in 0..dim {
            if mask & (1 << i) != 0 {
                continue;
            }
            for j in (i + 1)..dim {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let second = values[mask | 1 << i | 1 << j] - values[mask | 1 << i]
                    - values[mask | 1 << j]
                    + values[mask];
                if second > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
