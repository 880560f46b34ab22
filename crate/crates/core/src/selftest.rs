//! Fast invariant suites on small random instances, for checking a build.

use std::fmt;

use crate::bounds::{
    entropy, exact_log_partition, lfield_bound, lfield_marginals, logistic_bound, min_norm_point,
    superdiff_lower_bound,
};
use crate::error::Result;
use crate::experiments::pbm::BinaryImage;
use crate::experiments::{gen_shapes, random_cut_mixture, ExperimentConfig};
use crate::random::{derive_seed, logistic_vector, stream};
use crate::sfm::{minimize, minimize_bruteforce};
use crate::submodular::{
    greedy_base_vertex, in_base_polytope, is_submodular_bruteforce, lovasz_extension, SetFunction,
    SubmodularMixture, TOL_SUB,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub suites: Vec<SuiteOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }

    pub fn totals(&self) -> (usize, usize) {
        self.suites
            .iter()
            .fold((0, 0), |(p, f), s| (p + s.passed, f + s.failed))
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.suites {
            let status = if s.failed == 0 { "PASS" } else { "FAIL" };
            writeln!(f, "{status} {:<20} {} passed, {} failed", s.name, s.passed, s.failed)?;
        }
        let (p, fl) = self.totals();
        write!(f, "total: {p} passed, {fl} failed")
    }
}

const INSTANCES: u64 = 20;

fn suite(
    name: &'static str,
    seed: u64,
    check: impl Fn(SubmodularMixture, u64) -> Result<bool>,
) -> SuiteOutcome {
    let mut out = SuiteOutcome {
        name,
        passed: 0,
        failed: 0,
    };
    for i in 0..INSTANCES {
        let s = derive_seed(seed, i);
        let dim = 2 + (i as usize % 7);
        let ok = random_cut_mixture(dim, 2, s).and_then(|f| check(f, s)).unwrap_or(false);
        if ok {
            out.passed += 1;
        } else {
            out.failed += 1;
        }
    }
    out
}

/// Runs every suite; instances are derived from `seed`.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let suites = vec![
        suite("submodularity", seed, |f, _| is_submodular_bruteforce(&f, TOL_SUB)),
        suite("base_polytope", seed, |f, s| {
            let w = logistic_vector(&mut stream(s, 1), f.dim());
            let v = greedy_base_vertex(&f, &w)?;
            let lovasz = lovasz_extension(&f, &w)?;
            Ok(in_base_polytope(&f, &v.s, 1e-9)? && (v.dot(&w) - lovasz).abs() < 1e-9)
        }),
        suite("solver_equivalence", seed, |f, s| {
            let extra = logistic_vector(&mut stream(s, 2), f.dim());
            let flow = minimize(&f, &extra)?;
            let brute = minimize_bruteforce(&f, &extra)?;
            Ok((flow.value - brute.value).abs() < 1e-9)
        }),
        suite("bound_ordering", seed, |f, s| {
            let exact = exact_log_partition(&f)?.value;
            let lfield = lfield_bound(&f)?.value;
            let logistic = logistic_bound(&f, 2000, s)?;
            let se = logistic.std_error.unwrap_or(0.0);
            let lower = superdiff_lower_bound(&f, None)?.value;
            Ok(lower <= exact + 1e-9 && exact <= logistic.value + 4.0 * se && logistic.value <= lfield + 4.0 * se)
        }),
        suite("lfield_duality", seed, |f, _| {
            let mu = lfield_marginals(&f)?.mu;
            let dual = entropy(&mu) - lovasz_extension(&f, &mu)?;
            Ok(in_base_polytope(&f, &min_norm_point(&f)?.s, 1e-7)? && (dual - lfield_bound(&f)?.value).abs() < 1e-6)
        }),
        suite("modular_tightness", seed, |f, _| {
            let g = SubmodularMixture::modular(f.t())?;
            Ok((lfield_bound(&g)?.value - exact_log_partition(&g)?.value).abs() < 1e-9)
        }),
        suite("determinism", seed, |f, s| {
            let zero = vec![0.0; f.dim()];
            Ok(logistic_bound(&f, 50, s)? == logistic_bound(&f, 50, s)? && minimize(&f, &zero)? == minimize(&f, &zero)?)
        }),
        suite("pbm_round_trip", seed, |_, s| {
            let x = gen_shapes(5, 7, 1, s)?.remove(0);
            let img = BinaryImage::new(5, 7, x)?;
            Ok(BinaryImage::from_pbm(&img.to_pbm())? == img)
        }),
        suite("config_round_trip", seed, |_, s| {
            let config = ExperimentConfig {
                seed: s,
                noise: (s % 50) as f64 / 100.0,
                reg_alpha: Some(1e-3),
                ..ExperimentConfig::default()
            };
            let mut back = ExperimentConfig::default();
            back.apply_text(&config.to_text()).map_err(|e| crate::error::Error::Config(e.to_string()))?;
            Ok(back == config)
        }),
    ];
    SelftestReport { suites }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let report = run_selftest(1);
        assert!(report.all_passed(), "{report}");
        assert_eq!(report.totals().0, report.suites.len() * INSTANCES as usize);
    }
}
