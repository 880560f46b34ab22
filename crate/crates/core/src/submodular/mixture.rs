use std::sync::Arc;

use super::{check_dim, for_each_point, CutFunction, SetFunction};
use crate::error::{Error, Result};

/// Shared, immutable handle to a base set function.
pub type FunctionHandle = Arc<dyn SetFunction>;

/// Largest dimension for a fully tabulated function.
const MAX_TABLE_DIM: usize = 20;

/// Set function given by its full table, indexed by little-endian mask.
#[derive(Debug, Clone)]
pub struct TabulatedFunction {
    dim: usize,
    values: Vec<f64>,
}

impl TabulatedFunction {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim > MAX_TABLE_DIM {
            return Err(Error::TooLarge {
                dim,
                max: MAX_TABLE_DIM,
            });
        }
        check_dim(1 << dim, values.len())?;
        if values[0] != 0.0 {
            return Err(Error::Precondition(format!(
                "tabulated function must vanish at 0, got {}",
                values[0]
            )));
        }
        Ok(TabulatedFunction { dim, values })
    }

    /// Tabulates any set function.
    pub fn from_function(f: &dyn SetFunction) -> Result<Self> {
        if f.dim() > MAX_TABLE_DIM {
            return Err(Error::TooLarge {
                dim: f.dim(),
                max: MAX_TABLE_DIM,
            });
        }
        let mut values = Vec::with_capacity(1 << f.dim());
        for_each_point(f.dim(), |x| values.push(f.value(x)));
        let base = values[0];
        values.iter_mut().for_each(|v| *v -= base);
        TabulatedFunction::new(f.dim(), values)
    }
}

impl SetFunction for TabulatedFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[bool]) -> f64 {
        let mask = x
            .iter()
            .enumerate()
            .fold(0usize, |m, (d, &b)| if b { m | (1 << d) } else { m });
        self.values[mask]
    }
}

/// `g(y) = f(merge(fixed, y)) - f(merge(fixed, 0))` on the free coordinates.
#[derive(Debug, Clone)]
pub struct Restricted {
    inner: FunctionHandle,
    template: Vec<bool>,
    free: Vec<usize>,
    offset: f64,
}

impl Restricted {
    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    fn merged(&self, y: &[bool]) -> Vec<bool> {
        let mut x = self.template.clone();
        for (&d, &b) in self.free.iter().zip(y) {
            x[d] = b;
        }
        x
    }
}

impl SetFunction for Restricted {
    fn dim(&self) -> usize {
        self.free.len()
    }

    fn value(&self, y: &[bool]) -> f64 {
        self.inner.value(&self.merged(y)) - self.offset
    }
}

/// Converts `(index, value)` pairs into a per-coordinate assignment.
pub(crate) fn assignment(dim: usize, fixed: &[(usize, bool)]) -> Result<Vec<Option<bool>>> {
    let mut out = vec![None; dim];
    for &(d, v) in fixed {
        if d >= dim {
            return Err(Error::IndexOutOfRange { index: d, dim });
        }
        match out[d] {
            Some(prev) if prev != v => {
                return Err(Error::Precondition(format!(
                    "variable {d} fixed to both values"
                )))
            }
            _ => out[d] = Some(v),
        }
    }
    Ok(out)
}

/// Conditions `f` on the fixed coordinates; the result is normalized and
/// remains submodular when `f` is.
pub fn restrict_and_contract(f: FunctionHandle, fixed: &[(usize, bool)]) -> Result<Restricted> {
    let fixed = assignment(f.dim(), fixed)?;
    Ok(restricted_from_assignment(f, &fixed))
}

fn restricted_from_assignment(f: FunctionHandle, fixed: &[Option<bool>]) -> Restricted {
    let template: Vec<bool> = fixed.iter().map(|v| v.unwrap_or(false)).collect();
    let free = fixed
        .iter()
        .enumerate()
        .filter_map(|(d, v)| v.is_none().then_some(d))
        .collect();
    let offset = f.value(&template);
    Restricted {
        inner: f,
        template,
        free,
        offset,
    }
}

/// `f(x) = sum_k alpha_k f_k(x) - t^T x` with `alpha >= 0`.
#[derive(Debug, Clone)]
pub struct SubmodularMixture {
    dim: usize,
    bases: Vec<FunctionHandle>,
    alpha: Vec<f64>,
    t: Vec<f64>,
}

impl SubmodularMixture {
    pub fn new(bases: Vec<FunctionHandle>, alpha: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let dim = t.len();
        check_dim(bases.len(), alpha.len())?;
        for b in &bases {
            check_dim(dim, b.dim())?;
        }
        if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::Precondition(format!(
                "mixture weights must be finite and nonnegative, got {a}"
            )));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("modular coefficients must be finite".into()));
        }
        Ok(SubmodularMixture {
            dim,
            bases,
            alpha,
            t,
        })
    }

    pub fn zero(dim: usize) -> Self {
        SubmodularMixture {
            dim,
            bases: Vec::new(),
            alpha: Vec::new(),
            t: vec![0.0; dim],
        }
    }

    /// The modular function `x -> c^T x`.
    pub fn modular(coefficients: &[f64]) -> Result<Self> {
        SubmodularMixture::new(
            Vec::new(),
            Vec::new(),
            coefficients.iter().map(|c| -c).collect(),
        )
    }

    /// `f` itself, as a one-term mixture with unit weight.
    pub fn single(f: FunctionHandle) -> Self {
        let dim = f.dim();
        SubmodularMixture {
            dim,
            bases: vec![f],
            alpha: vec![1.0],
            t: vec![0.0; dim],
        }
    }

    pub fn with_params(&self, alpha: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        SubmodularMixture::new(self.bases.clone(), alpha, t)
    }

    pub fn bases(&self) -> &[FunctionHandle] {
        &self.bases
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    /// Base functions as cuts, if every one of them is a cut.
    pub fn cuts(&self) -> Option<Vec<&CutFunction>> {
        self.bases.iter().map(|b| b.as_cut()).collect()
    }

    /// Fixes the given coordinates. Cut bases stay cuts on the free nodes,
    /// their boundary terms moving into the modular part; other bases are
    /// wrapped in [`Restricted`].
    pub fn condition(&self, fixed: &[(usize, bool)]) -> Result<Conditioned> {
        let fixed = assignment(self.dim, fixed)?;
        self.condition_assignment(&fixed)
    }

    pub(crate) fn condition_assignment(&self, fixed: &[Option<bool>]) -> Result<Conditioned> {
        check_dim(self.dim, fixed.len())?;
        let free: Vec<usize> = fixed
            .iter()
            .enumerate()
            .filter_map(|(d, v)| v.is_none().then_some(d))
            .collect();
        let mut t: Vec<f64> = free.iter().map(|&d| self.t[d]).collect();
        let mut bases: Vec<FunctionHandle> = Vec::with_capacity(self.bases.len());
        for (base, &a) in self.bases.iter().zip(&self.alpha) {
            match base.as_cut() {
                Some(cut) => {
                    let (g, linear, _) = cut.condition(fixed)?;
                    for (tv, l) in t.iter_mut().zip(linear) {
                        *tv -= a * l;
                    }
                    bases.push(Arc::new(g));
                }
                None => bases.push(Arc::new(restricted_from_assignment(base.clone(), fixed))),
            }
        }
        Ok(Conditioned {
            function: SubmodularMixture::new(bases, self.alpha.clone(), t)?,
            free,
        })
    }
}

impl SetFunction for SubmodularMixture {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[bool]) -> f64 {
        let pairwise: f64 = self
            .bases
            .iter()
            .zip(&self.alpha)
            .filter(|(_, &a)| a != 0.0)
            .map(|(b, &a)| a * b.value(x))
            .sum();
        let linear: f64 = self
            .t
            .iter()
            .zip(x)
            .filter(|(_, &b)| b)
            .map(|(t, _)| t)
            .sum();
        pairwise - linear
    }
}

/// A mixture conditioned on some coordinates; `free[i]` is the original index
/// of coordinate `i` of `function`.
#[derive(Debug, Clone)]
pub struct Conditioned {
    pub function: SubmodularMixture,
    pub free: Vec<usize>,
}
