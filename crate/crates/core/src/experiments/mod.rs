//! Experiment pipelines: bound comparison on conditioned mixture graphs and
//! binary image denoising.

pub mod bound_comparison;
pub mod config;
pub mod data;
pub mod denoise;
pub mod pbm;

pub use bound_comparison::{bound_comparison, BoundRow};
pub use config::{ConfigError, ExperimentConfig};
pub use data::{
    flip_noise, gen_mixture_graph, gen_shapes, grid_cut_functions, hamming_error, random_cut_mixture, Shape,
};
pub use denoise::{
    denoise_map, denoise_mean_marginals, run_supervised, run_unsupervised, DenoiseModel, DenoiseReport,
};
pub use pbm::BinaryImage;

/// Formats like C's `%.6g`.
pub fn fmt_sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{v:.*}", (5 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Quotes a CSV field when needed.
pub fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.000123456789, "0.000123457"),
            (0.0000123456, "1.23456e-05"),
            (-2.5, "-2.5"),
            (999999.5, "1e+06"),
            (1.23456789, "1.23457"),
            (f64::NAN, "nan"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_sig6(v), want, "{v}");
        }
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_cell("map"), "map");
        assert_eq!(csv_cell("a,b"), "\"a,b\"");
    }
}
