//! Binary image denoising with a conditional log-supermodular model: grid
//! cuts plus a per-pixel modular term, and the flip-noise channel.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::data::{flip_noise, gen_shapes, grid_cut_functions, hamming_error};
use super::fmt_sig6;
use super::pbm::load_pbm_dir;
use crate::bounds::{logistic_batch, logistic_marginals_on_batch};
use crate::error::{Error, Result};
use crate::learning::{
    compute_stats, conditional_sgd_step, estimate_noise_logit, finalize, latent_sgd_step,
    noise_shift, sgd_ml_step, LearnedParams, NoisyPair, TrainState, LATENT_REGULARIZATION,
    LOGIT_LIMIT,
};
use crate::random::{clamped_logit, derive_seed};
use crate::sfm::minimize;
use crate::submodular::{check_dim, BinaryVector, FunctionHandle, SubmodularMixture};

const TAG_SHAPES: u64 = 1;
const TAG_NOISE_TRAIN: u64 = 2;
const TAG_NOISE_TEST: u64 = 3;
const TAG_TRAIN: u64 = 4;
const TAG_DECODE: u64 = 5;
const TAG_CV: u64 = 6;
const TAG_WARM: u64 = 7;

/// Candidate regularization weights for cross-validation.
pub const REG_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
/// Initial noise logit when the noise level is learned: `logit(0.2)`.
pub const UNKNOWN_PI_INIT: f64 = 0.2;

/// Horizontal and vertical grid cuts as base functions.
pub fn grid_bases(height: usize, width: usize) -> Result<Vec<FunctionHandle>> {
    let (h, v) = grid_cut_functions(height, width)?;
    Ok(vec![Arc::new(h), Arc::new(v)])
}

/// `p(x | z) ∝ exp(-f(x) - m(z)^T x)` with `f = alpha_h f_h + alpha_v f_v - t^T x`
/// and `m(z) = u (2z - 1)`.
#[derive(Debug, Clone)]
pub struct DenoiseModel {
    pub height: usize,
    pub width: usize,
    pub params: LearnedParams,
    prior: SubmodularMixture,
}

impl DenoiseModel {
    pub fn new(height: usize, width: usize, params: LearnedParams) -> Result<Self> {
        let bases = grid_bases(height, width)?;
        let prior = SubmodularMixture::new(bases, params.alpha.clone(), params.t.clone())?;
        Ok(DenoiseModel {
            height,
            width,
            params,
            prior,
        })
    }

    pub fn prior(&self) -> &SubmodularMixture {
        &self.prior
    }

    fn shift(&self, z: &BinaryVector) -> Result<Vec<f64>> {
        check_dim(self.height * self.width, z.len())?;
        Ok(noise_shift(self.params.u, z))
    }
}

/// Maximum a posteriori image: one graph cut.
pub fn denoise_map(model: &DenoiseModel, z: &BinaryVector) -> Result<BinaryVector> {
    let extra: Vec<f64> = model.shift(z)?.iter().map(|m| -m).collect();
    Ok(minimize(model.prior(), &extra)?.argmin)
}

/// Thresholded logistic mean-marginals of the posterior; exact halves keep
/// the observed pixel.
pub fn denoise_mean_marginals(
    model: &DenoiseModel,
    z: &BinaryVector,
    samples: usize,
    seed: u64,
) -> Result<BinaryVector> {
    if samples == 0 {
        return Err(Error::Precondition("at least one logistic sample is required".into()));
    }
    let batch = logistic_batch(z.len(), samples, seed);
    denoise_mean_marginals_on_batch(model, z, &batch)
}

pub fn denoise_mean_marginals_on_batch(
    model: &DenoiseModel,
    z: &BinaryVector,
    batch: &[Vec<f64>],
) -> Result<BinaryVector> {
    let shift = model.shift(z)?;
    let posterior = model.prior().with_params(
        model.params.alpha.clone(),
        model.params.t.iter().zip(&shift).map(|(t, m)| t - m).collect(),
    )?;
    Ok(logistic_marginals_on_batch(&posterior, batch)?.threshold(z))
}

/// Clean and noisy training and test images.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub height: usize,
    pub width: usize,
    pub train_clean: Vec<BinaryVector>,
    pub train_noisy: Vec<BinaryVector>,
    pub test_clean: Vec<BinaryVector>,
    pub test_noisy: Vec<BinaryVector>,
}

/// Loads images from `config.images` (first `n_train` for training, next
/// `n_test` for testing) or generates synthetic shapes, then adds noise.
pub fn prepare_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let needed = config.n_train + config.n_test;
    let (height, width, clean) = match &config.images {
        Some(dir) => {
            let images = load_pbm_dir(dir)?;
            if images.len() < needed {
                return Err(Error::Config(format!(
                    "{} images found in {}, {needed} needed",
                    images.len(),
                    dir.display()
                )));
            }
            let (h, w) = (images[0].height, images[0].width);
            (h, w, images.into_iter().take(needed).map(|im| im.pixels).collect())
        }
        None => (
            config.height,
            config.width,
            gen_shapes(
                config.height,
                config.width,
                needed,
                derive_seed(config.seed, TAG_SHAPES),
            )?,
        ),
    };
    let noisy = |imgs: &[BinaryVector], tag: u64| -> Result<Vec<BinaryVector>> {
        let seed = derive_seed(config.seed, tag);
        imgs.iter()
            .enumerate()
            .map(|(i, x)| flip_noise(x, config.noise, derive_seed(seed, i as u64)))
            .collect()
    };
    let (train_clean, test_clean) = {
        let mut c = clean;
        let test = c.split_off(config.n_train);
        (c, test)
    };
    Ok(Dataset {
        height,
        width,
        train_noisy: noisy(&train_clean, TAG_NOISE_TRAIN)?,
        test_noisy: noisy(&test_clean, TAG_NOISE_TEST)?,
        train_clean,
        test_clean,
    })
}

/// Per-image normalized Hamming errors of each decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub noise: f64,
    pub map_errors: Vec<f64>,
    pub mean_marginal_errors: Vec<f64>,
    /// Error of the noisy input itself.
    pub noisy_errors: Vec<f64>,
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl DenoiseReport {
    pub fn decoders(&self) -> [(&'static str, &[f64]); 3] {
        [
            ("map", &self.map_errors),
            ("mean_marginals", &self.mean_marginal_errors),
            ("noisy_input", &self.noisy_errors),
        ]
    }

    pub fn map_mean(&self) -> f64 {
        mean_std(&self.map_errors).0
    }

    pub fn mean_marginal_mean(&self) -> f64 {
        mean_std(&self.mean_marginal_errors).0
    }

    /// One row per decoder: `noise,decoder,mean_error,std_error,n_images`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("noise,decoder,mean_error,std_error,n_images\n");
        for (name, errors) in self.decoders() {
            let (mean, std) = mean_std(errors);
            out.push_str(&format!(
                "{},{name},{},{},{}\n",
                fmt_sig6(self.noise),
                fmt_sig6(mean),
                fmt_sig6(std),
                errors.len()
            ));
        }
        out
    }

    /// Per-image errors, one row per test image.
    pub fn errors_csv(&self) -> String {
        let mut out = String::from("image_id,map,mean_marginals,noisy_input\n");
        for (i, ((a, b), c)) in self
            .map_errors
            .iter()
            .zip(&self.mean_marginal_errors)
            .zip(&self.noisy_errors)
            .enumerate()
        {
            out.push_str(&format!("{i},{},{},{}\n", fmt_sig6(*a), fmt_sig6(*b), fmt_sig6(*c)));
        }
        out
    }
}

/// One test image through both decoders.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedImage {
    pub clean: BinaryVector,
    pub noisy: BinaryVector,
    pub map: BinaryVector,
    pub mean_marginal: BinaryVector,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub height: usize,
    pub width: usize,
    pub state: TrainState,
    pub model: DenoiseModel,
    pub report: DenoiseReport,
    pub decoded: Vec<DecodedImage>,
}

/// Decodes every noisy image with both decoders; image `i` uses logistic
/// stream family `derive_seed(seed, i)`.
pub fn decode_all(
    model: &DenoiseModel,
    clean: &[BinaryVector],
    noisy: &[BinaryVector],
    samples: usize,
    seed: u64,
    noise: f64,
) -> Result<(DenoiseReport, Vec<DecodedImage>)> {
    check_dim(clean.len(), noisy.len())?;
    let decoded = clean
        .par_iter()
        .zip(noisy.par_iter())
        .enumerate()
        .map(|(i, (x, z))| {
            Ok(DecodedImage {
                clean: x.clone(),
                noisy: z.clone(),
                map: denoise_map(model, z)?,
                mean_marginal: denoise_mean_marginals(model, z, samples, derive_seed(seed, i as u64))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let errors = |pick: fn(&DecodedImage) -> &BinaryVector| -> Result<Vec<f64>> {
        decoded.iter().map(|d| hamming_error(&d.clean, pick(d))).collect()
    };
    let report = DenoiseReport {
        noise,
        map_errors: errors(|d| &d.map)?,
        mean_marginal_errors: errors(|d| &d.mean_marginal)?,
        noisy_errors: errors(|d| &d.noisy)?,
    };
    Ok((report, decoded))
}

fn supervised_pairs(clean: &[BinaryVector], noisy: &[BinaryVector]) -> Vec<NoisyPair> {
    clean
        .iter()
        .zip(noisy)
        .map(|(x, z)| NoisyPair {
            x: Some(x.clone()),
            z: z.clone(),
        })
        .collect()
}

/// Conditional maximum likelihood on supervised pairs with the noise logit
/// fixed at its closed-form estimate.
pub fn train_conditional(
    bases: &[FunctionHandle],
    pairs: &[NoisyPair],
    iters: usize,
    step: f64,
    reg: (f64, f64),
    seed: u64,
) -> Result<TrainState> {
    let dim = pairs
        .first()
        .ok_or_else(|| Error::Precondition("no training pairs".into()))?
        .z
        .len();
    let u = estimate_noise_logit(pairs)?;
    let mut state = TrainState::new(bases.len(), dim, seed)
        .with_step(step)
        .with_regularization(reg.0, reg.1)
        .with_u(u);
    for _ in 0..iters {
        conditional_sgd_step(&mut state, bases, pairs)?;
    }
    Ok(state)
}

/// Hold-out selection of `(reg_alpha, reg_t)` over [`REG_GRID`]: trains on the
/// first two thirds of the pairs for `iters / 10` iterations and scores MAP
/// error on the rest. Ties keep the earlier candidate.
pub fn cross_validate(
    height: usize,
    width: usize,
    pairs: &[NoisyPair],
    iters: usize,
    step: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Ok((REG_GRID[2], REG_GRID[2]));
    }
    let split = (pairs.len() * 2).div_ceil(3).min(pairs.len() - 1);
    let (fit, held) = pairs.split_at(split);
    let bases = grid_bases(height, width)?;
    let budget = (iters / 10).max(1);
    let candidates: Vec<(f64, f64)> = REG_GRID
        .iter()
        .flat_map(|&a| REG_GRID.iter().map(move |&t| (a, t)))
        .collect();
    let scores = candidates
        .par_iter()
        .map(|&reg| {
            let state = train_conditional(&bases, fit, budget, step, reg, seed)?;
            let model = DenoiseModel::new(height, width, finalize(&state)?)?;
            let mut total = 0.0;
            for p in held {
                let x = p.x.as_ref().expect("supervised pair");
                total += hamming_error(x, &denoise_map(&model, &p.z)?)?;
            }
            Ok(total / held.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s < scores[best] {
            best = i;
        }
    }
    Ok(candidates[best])
}

/// Supervised pipeline: conditional maximum likelihood on (clean, noisy)
/// pairs, then MAP and mean-marginal decoding of the test set.
pub fn run_supervised(config: &ExperimentConfig) -> Result<DenoiseOutcome> {
    config.validate().map_err(|e| Error::Config(e.to_string()))?;
    let data = prepare_dataset(config)?;
    let pairs = supervised_pairs(&data.train_clean, &data.train_noisy);
    let reg = match (config.reg_alpha, config.reg_t) {
        (Some(a), Some(t)) => (a, t),
        (a, t) => {
            let (ca, ct) = cross_validate(
                data.height,
                data.width,
                &pairs,
                config.iters,
                config.step,
                derive_seed(config.seed, TAG_CV),
            )?;
            (a.unwrap_or(ca), t.unwrap_or(ct))
        }
    };
    let bases = grid_bases(data.height, data.width)?;
    let state = train_conditional(
        &bases,
        &pairs,
        config.iters,
        config.step,
        reg,
        derive_seed(config.seed, TAG_TRAIN),
    )?;
    finish(config, data, state)
}

/// Unsupervised pipeline: latent-variable maximum likelihood on noisy images
/// only, with the noise level either known or learned. Parameters are warm
/// started by `iters / 10` maximum-likelihood steps that treat the noisy
/// images as clean.
pub fn run_unsupervised(config: &ExperimentConfig, known_pi: bool) -> Result<DenoiseOutcome> {
    config.validate().map_err(|e| Error::Config(e.to_string()))?;
    let data = prepare_dataset(config)?;
    let bases = grid_bases(data.height, data.width)?;
    let dim = data.height * data.width;

    let stats = compute_stats(&data.train_noisy, &bases)?;
    let mut warm = TrainState::new(bases.len(), dim, derive_seed(config.seed, TAG_WARM))
        .with_step(config.step)
        .with_regularization(LATENT_REGULARIZATION, LATENT_REGULARIZATION);
    for _ in 0..(config.iters / 10).max(1) {
        sgd_ml_step(&mut warm, &bases, &stats)?;
    }
    let start = finalize(&warm)?;

    let u = if known_pi {
        clamped_logit(config.noise, LOGIT_LIMIT)
    } else {
        clamped_logit(UNKNOWN_PI_INIT, LOGIT_LIMIT)
    };
    let mut state = TrainState::new(bases.len(), dim, derive_seed(config.seed, TAG_TRAIN))
        .with_step(config.step)
        .with_regularization(LATENT_REGULARIZATION, LATENT_REGULARIZATION)
        .with_u(u);
    state.alpha = start.alpha.clone();
    state.avg_alpha = start.alpha;
    state.t = start.t.clone();
    state.avg_t = start.t;
    for _ in 0..config.iters {
        latent_sgd_step(&mut state, &bases, &data.train_noisy, !known_pi)?;
    }
    finish(config, data, state)
}

fn finish(config: &ExperimentConfig, data: Dataset, state: TrainState) -> Result<DenoiseOutcome> {
    let model = DenoiseModel::new(data.height, data.width, finalize(&state)?)?;
    let (report, decoded) = decode_all(
        &model,
        &data.test_clean,
        &data.test_noisy,
        config.samples,
        derive_seed(config.seed, TAG_DECODE),
        config.noise,
    )?;
    Ok(DenoiseOutcome {
        height: data.height,
        width: data.width,
        state,
        model,
        report,
        decoded,
    })
}

/// Decodes the test split of `config`'s dataset with a given model.
pub fn run_denoise(config: &ExperimentConfig, model: &DenoiseModel) -> Result<(DenoiseReport, Vec<DecodedImage>)> {
    config.validate().map_err(|e| Error::Config(e.to_string()))?;
    let data = prepare_dataset(config)?;
    if (data.height, data.width) != (model.height, model.width) {
        return Err(Error::Config(format!(
            "model grid {}x{} does not match images {}x{}",
            model.height, model.width, data.height, data.width
        )));
    }
    decode_all(
        model,
        &data.test_clean,
        &data.test_noisy,
        config.samples,
        derive_seed(config.seed, TAG_DECODE),
        config.noise,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sfm::minimize_bruteforce;

    fn model(height: usize, width: usize, alpha: [f64; 2], t: Vec<f64>, u: f64) -> DenoiseModel {
        DenoiseModel::new(height, width, LearnedParams { alpha: alpha.to_vec(), t, u }).unwrap()
    }

    #[test]
    fn separable_model_thresholds() {
        // with alpha = 0 each pixel follows the sign of t_d - m_d
        let m = model(1, 4, [0.0, 0.0], vec![3.0, -3.0, 0.5, -0.5], -1.0);
        let z = BinaryVector::from_u8(&[0, 1, 0, 1]).unwrap();
        // t - m = [3 - 1, -3 + 1, 0.5 - 1, -0.5 + 1]
        assert_eq!(denoise_map(&m, &z).unwrap().bits(), &[true, false, false, true]);
        assert_eq!(
            denoise_mean_marginals(&m, &z, 2000, 3).unwrap().bits(),
            &[true, false, false, true]
        );
    }

    #[test]
    fn noiseless_channel_returns_observation() {
        let m = model(4, 4, [1.5, 1.5], vec![0.0; 16], -LOGIT_LIMIT);
        let z = gen_shapes(4, 4, 1, 2).unwrap().remove(0);
        let z = flip_noise(&z, 0.2, 5).unwrap();
        assert_eq!(denoise_map(&m, &z).unwrap(), z);
        assert_eq!(denoise_mean_marginals(&m, &z, 50, 1).unwrap(), z);
    }

    #[test]
    fn map_matches_bruteforce_on_small_grids() {
        for seed in 0..10 {
            let t: Vec<f64> = crate::random::logistic_vector(&mut crate::random::stream(seed, 9), 16);
            let m = model(4, 4, [0.7 + seed as f64 * 0.1, 0.4], t, -1.2);
            let z = flip_noise(&gen_shapes(4, 4, 1, seed).unwrap()[0], 0.2, seed).unwrap();
            let map = denoise_map(&m, &z).unwrap();
            let extra: Vec<f64> = noise_shift(-1.2, &z).iter().map(|v| -v).collect();
            let brute = minimize_bruteforce(m.prior(), &extra).unwrap();
            let value = |x: &BinaryVector| {
                crate::submodular::eval(m.prior(), x).unwrap()
                    - extra.iter().zip(x.to_f64()).map(|(a, b)| a * b).sum::<f64>()
            };
            assert!((value(&map) - brute.value).abs() < 1e-9);
        }
    }

    #[test]
    fn complement_symmetry_under_coupled_samples() {
        let m = model(4, 5, [0.8, 1.1], vec![0.0; 20], -1.5);
        let z = flip_noise(&gen_shapes(4, 5, 1, 7).unwrap()[0], 0.15, 1).unwrap();
        let batch = logistic_batch(20, 101, 4);
        let negated: Vec<Vec<f64>> = batch.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        let a = denoise_mean_marginals_on_batch(&m, &z, &batch).unwrap();
        let b = denoise_mean_marginals_on_batch(&m, &z.complement(), &negated).unwrap();
        assert_eq!(b, a.complement());
    }

    #[test]
    fn report_csv() {
        let r = DenoiseReport {
            noise: 0.1,
            map_errors: vec![0.0, 0.5],
            mean_marginal_errors: vec![0.25, 0.25],
            noisy_errors: vec![0.1, 0.1],
        };
        let csv = r.to_csv();
        assert_eq!(csv.lines().nth(1), Some("0.1,map,0.25,0.353553,2"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(r.errors_csv().lines().nth(2), Some("1,0.5,0.25,0.1"));
    }

    #[test]
    fn report_statistics() {
        assert_eq!(mean_std(&[0.1, 0.3]).0, 0.2);
        assert!((mean_std(&[0.1, 0.3]).1 - (0.02f64).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.4]), (0.4, 0.0));
    }
}
