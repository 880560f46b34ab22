//! Bounds on the log-partition function `A(f) = log sum_x exp(-f(x))` and
//! approximate marginals obtained as their gradients.
//!
//! Densities are always `p(x) ∝ exp(-f(x))` with `f = sum_k alpha_k f_k - t^T x`,
//! so every marginal below is the derivative of a bound with respect to `t`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::random::{logistic_vector, sigmoid, softplus, stream};
use crate::sfm::{minimize, MAX_BRUTEFORCE_DIM};
use crate::submodular::{
    check_dim, for_each_point, BasePoint, BinaryVector, SetFunction, SubmodularMixture,
};

/// Acceptance threshold for the uniform-block test of the divide-and-conquer
/// min-norm-point algorithm.
pub const TOL_DC: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Exact,
    LField,
    Logistic,
    SuperdiffLower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// In nats.
    pub value: f64,
    pub kind: BoundKind,
    /// Standard error of the Monte-Carlo mean (logistic only).
    pub std_error: Option<f64>,
    /// Min-norm base point (L-field only).
    pub witness: Option<BasePoint>,
}

impl BoundResult {
    fn plain(value: f64, kind: BoundKind) -> Self {
        BoundResult {
            value,
            kind,
            std_error: None,
            witness: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector {
    pub mu: Vec<f64>,
}

impl MarginalVector {
    /// Rounds to the most likely state; exact halves go to `tie`.
    pub fn threshold(&self, tie: &BinaryVector) -> BinaryVector {
        BinaryVector::new(
            self.mu
                .iter()
                .zip(tie.bits())
                .map(|(&m, &z)| if m > 0.5 { true } else if m < 0.5 { false } else { z })
                .collect(),
        )
    }
}

fn check_enumerable(dim: usize) -> Result<()> {
    if dim > MAX_BRUTEFORCE_DIM {
        Err(Error::TooLarge {
            dim,
            max: MAX_BRUTEFORCE_DIM,
        })
    } else {
        Ok(())
    }
}

/// `log sum_x exp(-f(x))` by exhaustive, max-shifted summation.
pub fn exact_log_partition(f: &dyn SetFunction) -> Result<BoundResult> {
    check_enumerable(f.dim())?;
    let mut energies = Vec::with_capacity(1 << f.dim());
    for_each_point(f.dim(), |x| energies.push(-f.value(x)));
    Ok(BoundResult::plain(log_sum_exp(&energies), BoundKind::Exact))
}

pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// True marginals `P(x_d = 1)` by enumeration.
pub fn exact_marginals(f: &dyn SetFunction) -> Result<MarginalVector> {
    check_enumerable(f.dim())?;
    let dim = f.dim();
    let mut energies = Vec::with_capacity(1 << dim);
    for_each_point(dim, |x| energies.push(-f.value(x)));
    let log_z = log_sum_exp(&energies);
    let mut mu = vec![0.0; dim];
    for (mask, e) in energies.iter().enumerate() {
        let p = (e - log_z).exp();
        for (d, m) in mu.iter_mut().enumerate() {
            if mask >> d & 1 == 1 {
                *m += p;
            }
        }
    }
    Ok(MarginalVector { mu })
}

/// Euclidean projection of the origin onto `B(f)` by divide and conquer:
/// each block either takes the uniform value `f(block)/|block|` or splits
/// along a minimizer of `f(A) - beta |A|` into a restriction and a
/// contraction.
pub fn min_norm_point(f: &SubmodularMixture) -> Result<BasePoint> {
    let mut s = vec![0.0; f.dim()];
    let index: Vec<usize> = (0..f.dim()).collect();
    decompose(f, &index, &mut s)?;
    Ok(BasePoint { s })
}

fn decompose(g: &SubmodularMixture, index: &[usize], out: &mut [f64]) -> Result<()> {
    let m = g.dim();
    if m == 0 {
        return Ok(());
    }
    let beta = g.value(&vec![true; m]) / m as f64;
    let split = minimize(g, &vec![beta; m])?;
    let size = split.argmin.count_ones();
    if split.value >= -TOL_DC || size == 0 || size == m {
        for &d in index {
            out[d] = beta;
        }
        return Ok(());
    }
    let inside = split.argmin.bits();
    let restriction: Vec<Option<bool>> =
        inside.iter().map(|&b| if b { None } else { Some(false) }).collect();
    let contraction: Vec<Option<bool>> =
        inside.iter().map(|&b| if b { Some(true) } else { None }).collect();
    for fixed in [restriction, contraction] {
        let part = g.condition_assignment(&fixed)?;
        let sub_index: Vec<usize> = part.free.iter().map(|&i| index[i]).collect();
        decompose(&part.function, &sub_index, out)?;
    }
    Ok(())
}

/// `min_{s in B(f)} sum_d log(1 + e^{-s_d})`, attained at the min-norm point.
pub fn lfield_bound(f: &SubmodularMixture) -> Result<BoundResult> {
    let witness = min_norm_point(f)?;
    let value = witness.s.iter().map(|&s| softplus(-s)).sum();
    Ok(BoundResult {
        value,
        kind: BoundKind::LField,
        std_error: None,
        witness: Some(witness),
    })
}

/// `sigma(-s*)`, the gradient of the L-field bound with respect to `t`.
pub fn lfield_marginals(f: &SubmodularMixture) -> Result<MarginalVector> {
    let s = min_norm_point(f)?;
    Ok(MarginalVector {
        mu: s.s.iter().map(|&v| sigmoid(-v)).collect(),
    })
}

/// `M` logistic perturbation vectors; vector `m` is drawn from stream `m` of
/// `seed`.
pub fn logistic_batch(dim: usize, samples: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..samples)
        .into_par_iter()
        .map(|m| logistic_vector(&mut stream(seed, m as u64), dim))
        .collect()
}

/// Perturbed maxima `max_y z^T y - f(y)` and maximizers for each `z`.
fn perturbed_maxima(
    f: &SubmodularMixture,
    batch: &[Vec<f64>],
) -> Result<Vec<(f64, BinaryVector)>> {
    batch
        .par_iter()
        .map(|z| {
            check_dim(f.dim(), z.len())?;
            let r = minimize(f, z)?;
            Ok((-r.value, r.argmin))
        })
        .collect()
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Perturb-and-MAP estimate of `E_z max_y z^T y - f(y)` with logistic `z`.
pub fn logistic_bound(f: &SubmodularMixture, samples: usize, seed: u64) -> Result<BoundResult> {
    if samples == 0 {
        return Err(Error::Precondition("at least one logistic sample is required".into()));
    }
    logistic_bound_on_batch(f, &logistic_batch(f.dim(), samples, seed))
}

/// Same estimator on a caller-supplied batch (common random numbers).
pub fn logistic_bound_on_batch(f: &SubmodularMixture, batch: &[Vec<f64>]) -> Result<BoundResult> {
    if batch.is_empty() {
        return Err(Error::Precondition("at least one logistic sample is required".into()));
    }
    let values: Vec<f64> = perturbed_maxima(f, batch)?.into_iter().map(|(v, _)| v).collect();
    let (value, se) = mean_and_se(&values);
    Ok(BoundResult {
        value,
        kind: BoundKind::Logistic,
        std_error: Some(se),
        witness: None,
    })
}

/// `(1/M) sum_m y*(z_m)`, the gradient of the logistic estimate.
pub fn logistic_marginals(f: &SubmodularMixture, samples: usize, seed: u64) -> Result<MarginalVector> {
    if samples == 0 {
        return Err(Error::Precondition("at least one logistic sample is required".into()));
    }
    logistic_marginals_on_batch(f, &logistic_batch(f.dim(), samples, seed))
}

pub fn logistic_marginals_on_batch(
    f: &SubmodularMixture,
    batch: &[Vec<f64>],
) -> Result<MarginalVector> {
    let maxima = perturbed_maxima(f, batch)?;
    let mut mu = vec![0.0; f.dim()];
    for (_, y) in &maxima {
        for (m, &b) in mu.iter_mut().zip(y.bits()) {
            if b {
                *m += 1.0;
            }
        }
    }
    let n = batch.len() as f64;
    mu.iter_mut().for_each(|m| *m /= n);
    Ok(MarginalVector { mu })
}

/// Modular majorant `m(x) = constant + slope^T x` of a submodular function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularUpperBound {
    pub constant: f64,
    pub slope: Vec<f64>,
}

impl ModularUpperBound {
    pub fn value(&self, x: &[bool]) -> f64 {
        self.constant
            + self
                .slope
                .iter()
                .zip(x)
                .filter(|(_, &b)| b)
                .map(|(s, _)| s)
                .sum::<f64>()
    }
}

/// Bar supergradient at `Y`: `m(x) = f(Y) + sum_{d in X\Y} f(d | {}) - sum_{d in Y\X} f(d | V\d)`.
pub fn bar_supergradient(f: &dyn SetFunction, anchor: &BinaryVector) -> Result<ModularUpperBound> {
    let dim = f.dim();
    check_dim(dim, anchor.len())?;
    let empty = vec![false; dim];
    let full = vec![true; dim];
    let f_empty = f.value(&empty);
    let f_full = f.value(&full);
    let mut x = empty;
    let mut y = full;
    let slope: Vec<f64> = (0..dim)
        .map(|d| {
            if anchor[d] {
                y[d] = false;
                let g = f_full - f.value(&y);
                y[d] = true;
                g
            } else {
                x[d] = true;
                let g = f.value(&x) - f_empty;
                x[d] = false;
                g
            }
        })
        .collect();
    let at_anchor = f.value(anchor.bits());
    let on_anchor: f64 = anchor.support().iter().map(|&d| slope[d]).sum();
    Ok(ModularUpperBound {
        constant: at_anchor - on_anchor,
        slope,
    })
}

/// `log sum_x exp(-m(x))` for the bar-supergradient majorant `m >= f`, a lower
/// bound on `A(f)`. The anchor defaults to a minimizer of `f`.
pub fn superdiff_lower_bound(
    f: &SubmodularMixture,
    anchor: Option<&BinaryVector>,
) -> Result<BoundResult> {
    let default_anchor;
    let anchor = match anchor {
        Some(a) => a,
        None => {
            default_anchor = minimize(f, &vec![0.0; f.dim()])?.argmin;
            &default_anchor
        }
    };
    let m = bar_supergradient(f, anchor)?;
    let value = -m.constant + m.slope.iter().map(|&g| softplus(-g)).sum::<f64>();
    Ok(BoundResult::plain(value, BoundKind::SuperdiffLower))
}

/// `H(mu) = -sum_d mu_d log mu_d + (1 - mu_d) log(1 - mu_d)`.
pub fn entropy(mu: &[f64]) -> f64 {
    let h = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.ln() };
    mu.iter().map(|&p| h(p) + h(1.0 - p)).sum()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::submodular::{CutFunction, Edge};

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn zero_function() {
        let f = SubmodularMixture::zero(4);
        assert!((exact_log_partition(&f).unwrap().value - 4.0 * LN2).abs() < 1e-12);
        assert!((lfield_bound(&f).unwrap().value - 4.0 * LN2).abs() < 1e-12);
        assert!((superdiff_lower_bound(&f, None).unwrap().value - 4.0 * LN2).abs() < 1e-12);
        assert_eq!(lfield_marginals(&f).unwrap().mu, vec![0.5; 4]);
        assert_eq!(min_norm_point(&f).unwrap().s, vec![0.0; 4]);
    }

    #[test]
    fn modular_function_is_tight() {
        let c = [0.3, -1.2, 2.0];
        let f = SubmodularMixture::modular(&c).unwrap();
        let expected: f64 = c.iter().map(|&v| softplus(-v)).sum();
        assert!((exact_log_partition(&f).unwrap().value - expected).abs() < 1e-12);
        assert!((lfield_bound(&f).unwrap().value - expected).abs() < 1e-12);
        assert!((superdiff_lower_bound(&f, None).unwrap().value - expected).abs() < 1e-12);
        let s = min_norm_point(&f).unwrap().s;
        for (a, b) in s.iter().zip(c) {
            assert!((a - b).abs() < 1e-12);
        }
        let mu = exact_marginals(&f).unwrap().mu;
        for (m, v) in mu.iter().zip(c) {
            assert!((m - sigmoid(-v)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_zero_is_trivial() {
        let f = SubmodularMixture::zero(0);
        assert_eq!(exact_log_partition(&f).unwrap().value, 0.0);
        assert_eq!(lfield_bound(&f).unwrap().value, 0.0);
        assert_eq!(logistic_bound(&f, 3, 1).unwrap().value, 0.0);
        assert_eq!(superdiff_lower_bound(&f, None).unwrap().value, 0.0);
    }

    #[test]
    fn single_edge_min_norm_point() {
        // B(f) for one unit edge is the segment {(a, -a) : |a| <= 1}
        let f = SubmodularMixture::single(Arc::new(
            CutFunction::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap(),
        ));
        assert_eq!(min_norm_point(&f).unwrap().s, vec![0.0, 0.0]);
        let g = f.with_params(vec![1.0], vec![0.0, 3.0]).unwrap();
        let s = min_norm_point(&g).unwrap().s;
        // B(g) = {(a, -a - 3)}: projection at a = -1.5 is clipped to a = -1
        assert!((s[0] + 1.0).abs() < 1e-12 && (s[1] + 2.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn logistic_zero_function_estimate() {
        let f = SubmodularMixture::zero(3);
        let b = logistic_bound(&f, 20_000, 11).unwrap();
        let se = b.std_error.unwrap();
        assert!((b.value - 3.0 * LN2).abs() <= 4.0 * se, "{} ± {}", b.value, se);
        assert!(logistic_bound(&f, 0, 1).is_err());
    }

    #[test]
    fn logistic_is_reproducible() {
        let f = SubmodularMixture::modular(&[0.5, -0.5]).unwrap();
        let a = logistic_bound(&f, 500, 3).unwrap();
        let b = logistic_bound(&f, 500, 3).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = logistic_bound(&f, 500, 4).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn threshold_ties_go_to_reference() {
        let mu = MarginalVector { mu: vec![0.2, 0.5, 0.5, 0.9] };
        let z = BinaryVector::from_u8(&[1, 1, 0, 0]).unwrap();
        assert_eq!(mu.threshold(&z).bits(), &[false, true, false, true]);
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&[0.5, 0.5]) - 2.0 * LN2).abs() < 1e-15);
        assert_eq!(entropy(&[0.0, 1.0]), 0.0);
    }
}
