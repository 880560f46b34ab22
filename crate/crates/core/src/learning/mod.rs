//! Maximum-likelihood learning of `f = sum_k alpha_k f_k - t^T x` with the
//! logistic perturb-and-MAP bound standing in for the log-partition function.
//!
//! Every update is a projected stochastic subgradient step with step size
//! `C / sqrt(h)`, where the randomness is our own logistic perturbation (one
//! graph cut per iteration; two for the latent model). The iterate for step
//! `h` draws from random stream `(seed, h)`, so a run resumed from a
//! checkpoint continues exactly as an uninterrupted one would.

mod checkpoint;

pub use checkpoint::Checkpoint;

use rand::Rng;

use crate::bounds::{lfield_marginals, logistic_bound_on_batch};
use crate::error::{Error, Result};
use crate::random::{clamped_logit, logistic_vector, sigmoid, softplus, stream};
use crate::sfm::minimize;
use crate::submodular::{
    check_dim, lovasz_extension, BinaryVector, FunctionHandle, SetFunction, SubmodularMixture,
};

/// Bound on `|u|` and on data logits.
pub const LOGIT_LIMIT: f64 = 30.0;
/// Regularization weight of the latent-variable objective.
pub const LATENT_REGULARIZATION: f64 = 1e-2;

/// Empirical means of the sufficient statistics `f_k(x)` and `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub mean_fk: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub n: usize,
}

pub fn compute_stats(data: &[BinaryVector], bases: &[FunctionHandle]) -> Result<SufficientStats> {
    let first = data
        .first()
        .ok_or_else(|| Error::Precondition("statistics need at least one sample".into()))?;
    let dim = first.len();
    for b in bases {
        check_dim(dim, b.dim())?;
    }
    let mut mean_fk = vec![0.0; bases.len()];
    let mut mean_x = vec![0.0; dim];
    for x in data {
        check_dim(dim, x.len())?;
        for (m, b) in mean_fk.iter_mut().zip(bases) {
            *m += b.value(x.bits());
        }
        for (m, &b) in mean_x.iter_mut().zip(x.bits()) {
            if b {
                *m += 1.0;
            }
        }
    }
    let n = data.len() as f64;
    mean_fk.iter_mut().for_each(|m| *m /= n);
    mean_x.iter_mut().for_each(|m| *m /= n);
    Ok(SufficientStats {
        mean_fk,
        mean_x,
        n: data.len(),
    })
}

/// A clean image (when observed) and its noisy version.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyPair {
    pub x: Option<BinaryVector>,
    pub z: BinaryVector,
}

/// Optimizer state. `alpha`, `t`, `u` are the current iterate and the `avg_*`
/// fields their running averages over the `h` completed iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub alpha: Vec<f64>,
    pub t: Vec<f64>,
    /// Noise logit `log(pi / (1 - pi))`, shared by all coordinates.
    pub u: f64,
    pub h: u64,
    pub avg_alpha: Vec<f64>,
    pub avg_t: Vec<f64>,
    pub avg_u: f64,
    pub seed: u64,
    /// Step constant `C`.
    pub step: f64,
    pub reg_alpha: f64,
    pub reg_t: f64,
}

impl TrainState {
    /// Starts at `alpha = 0`, `t = 0`, `u = 0`.
    pub fn new(num_bases: usize, dim: usize, seed: u64) -> Self {
        TrainState {
            alpha: vec![0.0; num_bases],
            t: vec![0.0; dim],
            u: 0.0,
            h: 0,
            avg_alpha: vec![0.0; num_bases],
            avg_t: vec![0.0; dim],
            avg_u: 0.0,
            seed,
            step: 1.0,
            reg_alpha: 0.0,
            reg_t: 0.0,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_regularization(mut self, reg_alpha: f64, reg_t: f64) -> Self {
        self.reg_alpha = reg_alpha;
        self.reg_t = reg_t;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u.clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
        self.avg_u = self.u;
        self
    }

    /// Random stream of the next iteration.
    fn iteration_rng(&self) -> rand_chacha::ChaCha8Rng {
        stream(self.seed, self.h)
    }

    pub fn mixture(&self, bases: &[FunctionHandle]) -> Result<SubmodularMixture> {
        SubmodularMixture::new(bases.to_vec(), self.alpha.clone(), self.t.clone())
    }

    /// One projected step along `grad` (regularization is added here).
    pub(crate) fn apply(&mut self, grad: &Gradient, reg_alpha: f64, reg_t: f64, learn_u: bool) {
        let h = self.h + 1;
        let eta = self.step / (h as f64).sqrt();
        for (t, g) in self.t.iter_mut().zip(&grad.t) {
            *t -= eta * (g + reg_t * *t);
        }
        for (a, g) in self.alpha.iter_mut().zip(&grad.alpha) {
            *a = (*a - eta * (g + reg_alpha * *a)).max(0.0);
        }
        if learn_u {
            self.u = (self.u - eta * grad.u).clamp(-LOGIT_LIMIT, LOGIT_LIMIT);
        }
        self.h = h;
        let w = 1.0 / h as f64;
        for (avg, cur) in self.avg_alpha.iter_mut().zip(&self.alpha) {
            *avg += (cur - *avg) * w;
        }
        for (avg, cur) in self.avg_t.iter_mut().zip(&self.t) {
            *avg += (cur - *avg) * w;
        }
        self.avg_u += (self.u - self.avg_u) * w;
    }
}

/// Unregularized stochastic subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub alpha: Vec<f64>,
    pub t: Vec<f64>,
    pub u: f64,
}

/// Shift `m(z) = u (2z - 1)` added to the energy by a noisy observation `z`.
pub fn noise_shift(u: f64, z: &BinaryVector) -> Vec<f64> {
    z.bits().iter().map(|&b| if b { u } else { -u }).collect()
}

fn base_values(bases: &[FunctionHandle], x: &BinaryVector) -> Vec<f64> {
    bases.iter().map(|b| b.value(x.bits())).collect()
}

/// Subgradient of the bound objective
/// `sum_k alpha_k <f_k>_emp - t^T <x>_emp + max_y (z + t)^T y - sum_k alpha_k f_k(y)`
/// at one perturbation `z`.
pub fn ml_gradient(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    stats: &SufficientStats,
    z: &[f64],
) -> Result<Gradient> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    check_dim(f.dim(), stats.mean_x.len())?;
    let y = minimize(&f, z)?.argmin;
    Ok(Gradient {
        alpha: stats
            .mean_fk
            .iter()
            .zip(base_values(bases, &y))
            .map(|(e, v)| e - v)
            .collect(),
        t: y.to_f64().iter().zip(&stats.mean_x).map(|(y, x)| y - x).collect(),
        u: 0.0,
    })
}

/// Bound objective of [`ml_gradient`] averaged over a fixed batch.
pub fn ml_objective_on_batch(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    stats: &SufficientStats,
    batch: &[Vec<f64>],
) -> Result<f64> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    let linear: f64 = alpha.iter().zip(&stats.mean_fk).map(|(a, m)| a * m).sum::<f64>()
        - t.iter().zip(&stats.mean_x).map(|(a, m)| a * m).sum::<f64>();
    Ok(linear + logistic_bound_on_batch(&f, batch)?.value)
}

/// Subgradient of `-log p(x | z)` (with the logistic bound) at perturbation
/// `perturbation`; `u` is held fixed.
pub fn conditional_gradient(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    u: f64,
    x: &BinaryVector,
    z: &BinaryVector,
    perturbation: &[f64],
) -> Result<Gradient> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    check_dim(f.dim(), x.len())?;
    check_dim(f.dim(), z.len())?;
    let shift = noise_shift(u, z);
    let extra: Vec<f64> = perturbation.iter().zip(&shift).map(|(p, m)| p - m).collect();
    let y = minimize(&f, &extra)?.argmin;
    Ok(Gradient {
        alpha: base_values(bases, x)
            .iter()
            .zip(base_values(bases, &y))
            .map(|(a, b)| a - b)
            .collect(),
        t: y.to_f64().iter().zip(x.to_f64()).map(|(y, x)| y - x).collect(),
        u: 0.0,
    })
}

/// Mean over `pairs` of `f(x) + m(z)^T x + A_logistic(f + m(z))`, with the
/// bound estimated on a common batch.
pub fn conditional_objective_on_batch(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    u: f64,
    pairs: &[(BinaryVector, BinaryVector)],
    batch: &[Vec<f64>],
) -> Result<f64> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    let mut total = 0.0;
    for (x, z) in pairs {
        let shift = noise_shift(u, z);
        let shifted = f.with_params(
            alpha.to_vec(),
            t.iter().zip(&shift).map(|(t, m)| t - m).collect(),
        )?;
        let energy = crate::submodular::eval(&shifted, x)?;
        total += energy + logistic_bound_on_batch(&shifted, batch)?.value;
    }
    Ok(total / pairs.len() as f64)
}

/// Subgradient of the latent negative log-likelihood
/// `A(f) - A(f + m(z)) - u sum_d z_d + D log(1 + e^u)` with each log-partition
/// replaced by one logistic perturbation: `conditional` for the second term,
/// `free` for the first.
pub fn latent_gradient(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    u: f64,
    z: &BinaryVector,
    conditional: &[f64],
    free: &[f64],
) -> Result<Gradient> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    check_dim(f.dim(), z.len())?;
    let shift = noise_shift(u, z);
    let extra: Vec<f64> = conditional.iter().zip(&shift).map(|(p, m)| p - m).collect();
    let y1 = minimize(&f, &extra)?.argmin;
    let y2 = minimize(&f, free)?.argmin;
    let grad_u = z
        .bits()
        .iter()
        .zip(y1.bits())
        .map(|(&zd, &yd)| {
            let sign = if zd { 1.0 } else { -1.0 };
            let y = if yd { 1.0 } else { 0.0 };
            let zv = if zd { 1.0 } else { 0.0 };
            sign * y - zv
        })
        .sum::<f64>()
        + z.len() as f64 * sigmoid(u);
    Ok(Gradient {
        alpha: base_values(bases, &y1)
            .iter()
            .zip(base_values(bases, &y2))
            .map(|(a, b)| a - b)
            .collect(),
        t: y2.to_f64().iter().zip(y1.to_f64()).map(|(a, b)| a - b).collect(),
        u: grad_u,
    })
}

/// Mean over `noisy` of the latent objective with the two log-partition terms
/// estimated on fixed batches.
pub fn latent_objective_on_batch(
    bases: &[FunctionHandle],
    alpha: &[f64],
    t: &[f64],
    u: f64,
    noisy: &[BinaryVector],
    conditional_batch: &[Vec<f64>],
    free_batch: &[Vec<f64>],
) -> Result<f64> {
    let f = SubmodularMixture::new(bases.to_vec(), alpha.to_vec(), t.to_vec())?;
    let free = logistic_bound_on_batch(&f, free_batch)?.value;
    let mut total = 0.0;
    for z in noisy {
        let shift = noise_shift(u, z);
        let shifted = f.with_params(
            alpha.to_vec(),
            t.iter().zip(&shift).map(|(t, m)| t - m).collect(),
        )?;
        let cond = logistic_bound_on_batch(&shifted, conditional_batch)?.value;
        total += free - cond - u * z.count_ones() as f64 + z.len() as f64 * softplus(u);
    }
    Ok(total / noisy.len() as f64)
}

/// One iteration of projected stochastic subgradient on the (unconditional)
/// maximum-likelihood bound objective.
pub fn sgd_ml_step(
    state: &mut TrainState,
    bases: &[FunctionHandle],
    stats: &SufficientStats,
) -> Result<()> {
    let mut rng = state.iteration_rng();
    let z = logistic_vector(&mut rng, state.t.len());
    let grad = ml_gradient(bases, &state.alpha, &state.t, stats, &z)?;
    let (ra, rt) = (state.reg_alpha, state.reg_t);
    state.apply(&grad, ra, rt, false);
    Ok(())
}

/// Maximum-likelihood estimate of the shared noise logit from clean/noisy
/// pairs: the logit of the empirical flip rate, clamped.
pub fn estimate_noise_logit(pairs: &[NoisyPair]) -> Result<f64> {
    let mut flips = 0usize;
    let mut total = 0usize;
    for p in pairs {
        let x = p
            .x
            .as_ref()
            .ok_or_else(|| Error::Precondition("noise estimate needs clean images".into()))?;
        check_dim(x.len(), p.z.len())?;
        flips += x.bits().iter().zip(p.z.bits()).filter(|(a, b)| a != b).count();
        total += x.len();
    }
    if total == 0 {
        return Err(Error::Precondition("noise estimate needs data".into()));
    }
    Ok(clamped_logit(flips as f64 / total as f64, LOGIT_LIMIT))
}

/// One iteration of conditional maximum likelihood on supervised pairs:
/// samples a pair and a perturbation; `u` stays fixed.
pub fn conditional_sgd_step(
    state: &mut TrainState,
    bases: &[FunctionHandle],
    pairs: &[NoisyPair],
) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Precondition("no training pairs".into()));
    }
    let mut rng = state.iteration_rng();
    let n = rng.random_range(0..pairs.len());
    let z = logistic_vector(&mut rng, state.t.len());
    let pair = &pairs[n];
    let x = pair
        .x
        .as_ref()
        .ok_or_else(|| Error::Precondition("conditional learning needs clean images".into()))?;
    let grad = conditional_gradient(bases, &state.alpha, &state.t, state.u, x, &pair.z, &z)?;
    let (ra, rt) = (state.reg_alpha, state.reg_t);
    state.apply(&grad, ra, rt, false);
    Ok(())
}

/// One iteration on the latent-variable objective from noisy images only,
/// with two independent perturbations and fixed regularization
/// [`LATENT_REGULARIZATION`].
pub fn latent_sgd_step(
    state: &mut TrainState,
    bases: &[FunctionHandle],
    noisy: &[BinaryVector],
    learn_u: bool,
) -> Result<()> {
    if noisy.is_empty() {
        return Err(Error::Precondition("no training images".into()));
    }
    let mut rng = state.iteration_rng();
    let n = rng.random_range(0..noisy.len());
    let dim = state.t.len();
    let z1 = logistic_vector(&mut rng, dim);
    let z2 = logistic_vector(&mut rng, dim);
    let grad = latent_gradient(bases, &state.alpha, &state.t, state.u, &noisy[n], &z1, &z2)?;
    state.apply(&grad, LATENT_REGULARIZATION, LATENT_REGULARIZATION, learn_u);
    Ok(())
}

/// Averaged parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedParams {
    pub alpha: Vec<f64>,
    pub t: Vec<f64>,
    pub u: f64,
}

/// The running averages of the iterates.
pub fn finalize(state: &TrainState) -> Result<LearnedParams> {
    if state.h == 0 {
        return Err(Error::NoTraining);
    }
    Ok(LearnedParams {
        alpha: state.avg_alpha.clone(),
        t: state.avg_t.clone(),
        u: state.avg_u,
    })
}

/// Closed-form pieces of maximum likelihood under the L-field bound.
#[derive(Debug, Clone, PartialEq)]
pub struct LFieldDiagnostic {
    /// `<f_k(x)>_emp - f_k(<x>_emp)` (Lovász extension); nonnegative, so the
    /// optimal weights are all zero.
    pub jensen_gaps: Vec<f64>,
    /// Optimal `t_d - s_d = logit(<x_d>_emp)`, clamped.
    pub t_minus_s: Vec<f64>,
}

pub fn lfield_ml_diagnostic(
    stats: &SufficientStats,
    bases: &[FunctionHandle],
) -> Result<LFieldDiagnostic> {
    check_dim(bases.len(), stats.mean_fk.len())?;
    let jensen_gaps = bases
        .iter()
        .zip(&stats.mean_fk)
        .map(|(b, m)| Ok(m - lovasz_extension(b.as_ref(), &stats.mean_x)?))
        .collect::<Result<Vec<_>>>()?;
    let t_minus_s = stats
        .mean_x
        .iter()
        .map(|&p| clamped_logit(p, LOGIT_LIMIT))
        .collect();
    Ok(LFieldDiagnostic {
        jensen_gaps,
        t_minus_s,
    })
}

/// Projected gradient descent on the L-field maximum-likelihood objective
/// `sum_k alpha_k <f_k>_emp - t^T <x>_emp + A_Lfield(alpha, t)` from
/// `alpha_init`, `t = 0`; the gradient uses the L-field marginals
/// `mu = sigma(-s*)`. Returns the final `(alpha, t)`.
pub fn lfield_ml_descent(
    stats: &SufficientStats,
    bases: &[FunctionHandle],
    alpha_init: &[f64],
    step: f64,
    iterations: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(bases.len(), alpha_init.len())?;
    let mut alpha = alpha_init.to_vec();
    let mut t = vec![0.0; stats.mean_x.len()];
    for h in 1..=iterations {
        let f = SubmodularMixture::new(bases.to_vec(), alpha.clone(), t.clone())?;
        let mu = lfield_marginals(&f)?.mu;
        let eta = step / (h as f64).sqrt();
        for ((a, b), m) in alpha.iter_mut().zip(bases).zip(&stats.mean_fk) {
            let g = m - lovasz_extension(b.as_ref(), &mu)?;
            *a = (*a - eta * g).max(0.0);
        }
        for ((tv, m), x) in t.iter_mut().zip(&mu).zip(&stats.mean_x) {
            *tv -= eta * (m - x);
        }
    }
    Ok((alpha, t))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::submodular::{CutFunction, Edge};

    fn path_cut(dim: usize) -> FunctionHandle {
        Arc::new(
            CutFunction::new(dim, (0..dim - 1).map(|i| Edge::new(i, i + 1, 1.0)).collect())
                .unwrap(),
        )
    }

    #[test]
    fn stats_of_trivial_datasets() {
        let bases = vec![path_cut(4)];
        let s = compute_stats(&[BinaryVector::zeros(4)], &bases).unwrap();
        assert_eq!(s.mean_fk, vec![0.0]);
        assert_eq!(s.mean_x, vec![0.0; 4]);
        let x = BinaryVector::from_u8(&[1, 0, 0, 1]).unwrap();
        let s = compute_stats(&[x.clone(), x.complement()], &bases).unwrap();
        assert_eq!(s.mean_x, vec![0.5; 4]);
        assert_eq!(s.mean_fk, vec![2.0]);
        assert!(compute_stats(&[], &bases).is_err());
        assert!(compute_stats(&[BinaryVector::zeros(3)], &bases).is_err());
    }

    #[test]
    fn projection_keeps_alpha_nonnegative() {
        let mut s = TrainState::new(1, 2, 0);
        let g = Gradient {
            alpha: vec![5.0],
            t: vec![0.0, 0.0],
            u: 0.0,
        };
        s.apply(&g, 0.0, 0.0, false);
        assert_eq!(s.alpha, vec![0.0]);
        assert_eq!(s.h, 1);
    }

    #[test]
    fn constant_gradient_average_has_closed_form() {
        let mut s = TrainState::new(0, 1, 0).with_step(0.5);
        let g = Gradient {
            alpha: vec![],
            t: vec![1.0],
            u: 0.0,
        };
        let steps = 50;
        for _ in 0..steps {
            s.apply(&g, 0.0, 0.0, false);
        }
        // t_h = -C sum_{i<=h} 1/sqrt(i); average of t_1..t_H
        let mut partial = 0.0;
        let mut sum = 0.0;
        for i in 1..=steps {
            partial += 1.0 / (i as f64).sqrt();
            sum += -0.5 * partial;
        }
        let expected = sum / steps as f64;
        assert!((finalize(&s).unwrap().t[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn finalize_requires_training() {
        assert!(matches!(
            finalize(&TrainState::new(1, 1, 0)),
            Err(Error::NoTraining)
        ));
        let mut s = TrainState::new(1, 3, 9);
        let stats = compute_stats(&[BinaryVector::from_u8(&[1, 1, 0]).unwrap()], &[path_cut(3)])
            .unwrap();
        sgd_ml_step(&mut s, &[path_cut(3)], &stats).unwrap();
        let p = finalize(&s).unwrap();
        assert_eq!(p.alpha, s.alpha);
        assert_eq!(p.t, s.t);
    }

    #[test]
    fn noise_logit_estimate() {
        let x = BinaryVector::zeros(4);
        let pairs = vec![
            NoisyPair {
                x: Some(x.clone()),
                z: BinaryVector::from_u8(&[1, 0, 0, 0]).unwrap(),
            },
            NoisyPair {
                x: Some(x.clone()),
                z: x.clone(),
            },
        ];
        let u = estimate_noise_logit(&pairs).unwrap();
        assert!((u - clamped_logit(1.0 / 8.0, 30.0)).abs() < 1e-15);
        let clean = vec![NoisyPair {
            x: Some(x.clone()),
            z: x.clone(),
        }];
        assert_eq!(estimate_noise_logit(&clean).unwrap(), -LOGIT_LIMIT);
        let unlabeled = vec![NoisyPair { x: None, z: x }];
        assert!(estimate_noise_logit(&unlabeled).is_err());
    }

    #[test]
    fn jensen_gap_vanishes_on_a_single_image() {
        let x = BinaryVector::from_u8(&[1, 1, 0, 1]).unwrap();
        let stats = compute_stats(&[x.clone(), x], &[path_cut(4)]).unwrap();
        let d = lfield_ml_diagnostic(&stats, &[path_cut(4)]).unwrap();
        assert!(d.jensen_gaps[0].abs() < 1e-12);
        assert_eq!(d.t_minus_s, vec![30.0, 30.0, -30.0, 30.0]);
    }

    #[test]
    fn noiseless_latent_limit_matches_supervised_gradient() {
        // with u pinned at the clamp, the conditional maximizer equals z
        let bases = vec![path_cut(5)];
        let z = BinaryVector::from_u8(&[1, 1, 0, 0, 1]).unwrap();
        let pert = [0.3, -1.2, 2.5, 0.1, -0.7];
        let free = [1.0, 0.2, -0.4, 0.9, -2.0];
        let g = latent_gradient(&bases, &[0.8], &[0.1; 5], -LOGIT_LIMIT, &z, &pert, &free).unwrap();
        let stats = compute_stats(std::slice::from_ref(&z), &bases).unwrap();
        let sup = ml_gradient(&bases, &[0.8], &[0.1; 5], &stats, &free).unwrap();
        for (a, b) in g.alpha.iter().zip(&sup.alpha) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in g.t.iter().zip(&sup.t) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
