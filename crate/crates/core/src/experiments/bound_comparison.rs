//! Log-partition bounds on conditioned Gaussian-mixture cut models.

use std::sync::Arc;

use rayon::prelude::*;

use super::data::gen_mixture_graph;
use super::denoise::mean_std;
use super::{csv_cell, fmt_sig6};
use crate::bounds::{exact_log_partition, lfield_bound, logistic_bound, superdiff_lower_bound};
use crate::error::{Error, Result};
use crate::random::derive_seed;
use crate::submodular::{SetFunction, SubmodularMixture};

/// Largest free dimension for which the exact log-partition is enumerated.
pub const MAX_EXACT_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    /// Repetition index.
    pub instance_id: usize,
    pub k_conditioned: usize,
    pub exact: Option<f64>,
    pub lfield: f64,
    pub logistic_mean: f64,
    pub logistic_se: f64,
    pub superdiff_lower: f64,
}

pub const ROW_HEADER: &str = "instance_id,k_conditioned,exact,lfield,logistic_mean,logistic_se,superdiff_lower";

impl BoundRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.instance_id,
            self.k_conditioned,
            self.exact.map(fmt_sig6).unwrap_or_default(),
            fmt_sig6(self.lfield),
            fmt_sig6(self.logistic_mean),
            fmt_sig6(self.logistic_se),
            fmt_sig6(self.superdiff_lower),
        )
    }
}

/// The model after fixing the first `k` points of cluster 1 to 0 and the
/// first `k` points of cluster 2 to 1.
pub fn conditioned_model(cut: Arc<dyn SetFunction>, n: usize, k: usize) -> Result<SubmodularMixture> {
    if k > n || cut.dim() != 2 * n {
        return Err(Error::Precondition(format!(
            "cannot fix {k} points per cluster of a {}-node graph with {n} points per cluster",
            cut.dim()
        )));
    }
    let fixed: Vec<(usize, bool)> = (0..k).map(|i| (i, false)).chain((n..n + k).map(|i| (i, true))).collect();
    Ok(SubmodularMixture::single(cut).condition(&fixed)?.function)
}

/// Evaluates every bound on one conditioned model.
pub fn evaluate(f: &SubmodularMixture, samples: usize, seed: u64) -> Result<(Option<f64>, f64, f64, f64, f64)> {
    let exact = if f.dim() <= MAX_EXACT_DIM {
        Some(exact_log_partition(f)?.value)
    } else {
        None
    };
    let lfield = lfield_bound(f)?.value;
    let logistic = logistic_bound(f, samples, seed)?;
    let lower = superdiff_lower_bound(f, None)?.value;
    Ok((exact, lfield, logistic.value, logistic.std_error.unwrap_or(0.0), lower))
}

/// `repeats` independent graphs with `points` nodes per cluster; one row per
/// repetition and `k = 1..=points`, ordered by repetition then `k`.
pub fn bound_comparison(points: usize, scale: f64, samples: usize, repeats: usize, seed: u64) -> Result<Vec<BoundRow>> {
    if repeats == 0 || samples == 0 {
        return Err(Error::Config("repeats and samples must be at least 1".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..repeats).flat_map(|r| (1..=points).map(move |k| (r, k))).collect();
    let graphs = (0..repeats)
        .map(|r| gen_mixture_graph(points, scale, derive_seed(seed, r as u64)).map(|g| Arc::new(g.cut)))
        .collect::<Result<Vec<_>>>()?;
    jobs.par_iter()
        .map(|&(r, k)| {
            let f = conditioned_model(graphs[r].clone(), points, k)?;
            let stream_seed = derive_seed(derive_seed(seed, r as u64), 1000 + k as u64);
            let (exact, lfield, logistic_mean, logistic_se, superdiff_lower) = evaluate(&f, samples, stream_seed)?;
            Ok(BoundRow {
                instance_id: r,
                k_conditioned: k,
                exact,
                lfield,
                logistic_mean,
                logistic_se,
                superdiff_lower,
            })
        })
        .collect()
}

pub const SUMMARY_HEADER: &str = "k_conditioned,bound,mean,std,n";

/// Mean and sample standard deviation over repetitions, per `k` and bound.
pub fn summarize(rows: &[BoundRow]) -> String {
    let mut ks: Vec<usize> = rows.iter().map(|r| r.k_conditioned).collect();
    ks.sort_unstable();
    ks.dedup();
    type Column = (&'static str, fn(&BoundRow) -> Option<f64>);
    let columns: [Column; 4] = [
        ("exact", |r| r.exact),
        ("lfield", |r| Some(r.lfield)),
        ("logistic", |r| Some(r.logistic_mean)),
        ("superdiff_lower", |r| Some(r.superdiff_lower)),
    ];
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for k in ks {
        for (name, pick) in columns {
            let values: Vec<f64> = rows.iter().filter(|r| r.k_conditioned == k).filter_map(pick).collect();
            if values.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&values);
            out.push_str(&format!(
                "{k},{},{},{},{}\n",
                csv_cell(name),
                fmt_sig6(mean),
                fmt_sig6(std),
                values.len()
            ));
        }
    }
    out
}

pub fn rows_to_csv(rows: &[BoundRow]) -> String {
    let mut out = String::from(ROW_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}
