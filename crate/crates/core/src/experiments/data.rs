//! Synthetic data: Gaussian-mixture graphs, binary shapes, flip noise and
//! grid cut functions.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::random::stream;
use crate::submodular::{BinaryVector, CutFunction, Edge, FunctionHandle, SubmodularMixture};

/// Points of two Gaussian clusters and the complete graph on them.
#[derive(Debug, Clone)]
pub struct MixtureGraph {
    pub cut: CutFunction,
    /// Points `0..n` come from the first cluster, `n..2n` from the second.
    pub points: Vec<[f64; 2]>,
}

/// Samples `n` points from each of `N([3,3], I)` and `N([-3,-3], I)` and
/// weights every pair by `exp(-c ||p - q||)`.
pub fn gen_mixture_graph(n: usize, c: f64, seed: u64) -> Result<MixtureGraph> {
    if n < 1 {
        return Err(Error::Config("need at least one point per cluster".into()));
    }
    if !c.is_finite() || c < 0.0 {
        return Err(Error::Config(format!("scale must be finite and nonnegative, got {c}")));
    }
    let mut rng = stream(seed, 0);
    let mut points = Vec::with_capacity(2 * n);
    for center in [3.0, -3.0] {
        for _ in 0..n {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            points.push([center + dx, center + dy]);
        }
    }
    let mut edges = Vec::with_capacity(n * (2 * n - 1));
    for i in 0..2 * n {
        for j in (i + 1)..2 * n {
            let dist = ((points[i][0] - points[j][0]).powi(2)
                + (points[i][1] - points[j][1]).powi(2))
            .sqrt();
            edges.push(Edge::new(i, j, (-c * dist).exp()));
        }
    }
    Ok(MixtureGraph {
        cut: CutFunction::new(2 * n, edges)?,
        points,
    })
}

/// Unit-weight cuts between horizontal and between vertical grid neighbours.
/// Pixel `(r, c)` is coordinate `r * width + c`.
pub fn grid_cut_functions(height: usize, width: usize) -> Result<(CutFunction, CutFunction)> {
    let dim = height * width;
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for r in 0..height {
        for c in 0..width {
            let d = r * width + c;
            if c + 1 < width {
                horizontal.push(Edge::new(d, d + 1, 1.0));
            }
            if r + 1 < height {
                vertical.push(Edge::new(d, d + width, 1.0));
            }
        }
    }
    Ok((CutFunction::new(dim, horizontal)?, CutFunction::new(dim, vertical)?))
}

/// A filled shape on the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Rectangle {
        top: usize,
        left: usize,
        height: usize,
        width: usize,
    },
    Ellipse {
        center_row: f64,
        center_col: f64,
        radius_rows: f64,
        radius_cols: f64,
    },
}

impl Shape {
    pub fn contains(&self, r: usize, c: usize) -> bool {
        match *self {
            Shape::Rectangle {
                top,
                left,
                height,
                width,
            } => r >= top && r < top + height && c >= left && c < left + width,
            Shape::Ellipse {
                center_row,
                center_col,
                radius_rows,
                radius_cols,
            } => {
                let dr = (r as f64 - center_row) / radius_rows;
                let dc = (c as f64 - center_col) / radius_cols;
                dr * dr + dc * dc <= 1.0
            }
        }
    }

    pub fn rasterize(&self, height: usize, width: usize) -> BinaryVector {
        let mut bits = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                bits.push(self.contains(r, c));
            }
        }
        BinaryVector::new(bits)
    }
}

fn random_shape<R: Rng>(rng: &mut R, height: usize, width: usize) -> Shape {
    let span = |rng: &mut R, n: usize| {
        let lo = ((n as f64 * 0.3).round() as usize).max(1);
        let hi = ((n as f64 * 0.8).round() as usize).clamp(lo, n);
        rng.random_range(lo..=hi)
    };
    if rng.random_bool(0.5) {
        let h = span(rng, height);
        let w = span(rng, width);
        Shape::Rectangle {
            top: rng.random_range(0..=height - h),
            left: rng.random_range(0..=width - w),
            height: h,
            width: w,
        }
    } else {
        let radius_rows = span(rng, height) as f64 / 2.0;
        let radius_cols = span(rng, width) as f64 / 2.0;
        let free_rows = (height as f64 - 2.0 * radius_rows).max(0.0);
        let free_cols = (width as f64 - 2.0 * radius_cols).max(0.0);
        // centre the ellipse on a pixel so the centre pixel is always inside
        let center_row = (radius_rows + rng.random::<f64>() * free_rows).floor().min(height as f64 - 1.0);
        let center_col = (radius_cols + rng.random::<f64>() * free_cols).floor().min(width as f64 - 1.0);
        Shape::Ellipse {
            center_row,
            center_col,
            radius_rows: radius_rows.max(0.5),
            radius_cols: radius_cols.max(0.5),
        }
    }
}

/// `count` random filled rectangles or ellipses; image `i` is drawn from
/// stream `i` of `seed`.
pub fn gen_shapes(height: usize, width: usize, count: usize, seed: u64) -> Result<Vec<BinaryVector>> {
    if height == 0 || width == 0 {
        return Err(Error::Config(format!("degenerate grid {height}x{width}")));
    }
    Ok((0..count)
        .map(|i| random_shape(&mut stream(seed, i as u64), height, width).rasterize(height, width))
        .collect())
}

/// Flips each bit independently with probability `pi`.
pub fn flip_noise(x: &BinaryVector, pi: f64, seed: u64) -> Result<BinaryVector> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::Config(format!("flip probability {pi} outside [0, 1]")));
    }
    let mut rng = stream(seed, 0);
    Ok(BinaryVector::new(
        x.bits()
            .iter()
            .map(|&b| b ^ (rng.random::<f64>() < pi))
            .collect(),
    ))
}

/// A random mixture of `num_bases` cut functions on `dim` nodes: each pair is
/// an edge of a base with probability 0.4 and weight in `(0, 2)`, `alpha` is
/// uniform in `[0, 2)` and `t` standard normal times 1.5.
pub fn random_cut_mixture(dim: usize, num_bases: usize, seed: u64) -> Result<SubmodularMixture> {
    let mut rng = stream(seed, 0);
    let mut bases: Vec<FunctionHandle> = Vec::with_capacity(num_bases);
    for _ in 0..num_bases {
        let mut edges = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                if rng.random::<f64>() < 0.4 {
                    edges.push(Edge::new(i, j, 2.0 * rng.random::<f64>()));
                }
            }
        }
        bases.push(Arc::new(CutFunction::new(dim, edges)?));
    }
    let alpha = (0..num_bases).map(|_| 2.0 * rng.random::<f64>()).collect();
    let t = (0..dim)
        .map(|_| 1.5 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SubmodularMixture::new(bases, alpha, t)
}

/// Fraction of disagreeing coordinates.
pub fn hamming_error(a: &BinaryVector, b: &BinaryVector) -> Result<f64> {
    crate::submodular::check_dim(a.len(), b.len())?;
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff = a.bits().iter().zip(b.bits()).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::{is_submodular_bruteforce, SetFunction, TOL_SUB};

    #[test]
    fn mixture_graph_edge_weights() {
        let g = gen_mixture_graph(1, 2.0, 5).unwrap();
        assert_eq!(g.cut.edges().len(), 1);
        let [p, q] = [g.points[0], g.points[1]];
        let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        assert!((g.cut.edges()[0].weight - (-2.0 * d).exp()).abs() < 1e-15);
        assert!(g.cut.edges()[0].weight > 0.0);
        let flat = gen_mixture_graph(3, 0.0, 5).unwrap();
        assert!(flat.cut.edges().iter().all(|e| e.weight == 1.0));
        assert!(gen_mixture_graph(0, 1.0, 5).is_err());
        let g5 = gen_mixture_graph(5, 1.0, 2).unwrap();
        assert!(is_submodular_bruteforce(&g5.cut, TOL_SUB).unwrap());
    }

    #[test]
    fn grid_edge_counts() {
        let (h, v) = grid_cut_functions(1, 2).unwrap();
        assert_eq!((h.edges().len(), v.edges().len()), (1, 0));
        let (h, v) = grid_cut_functions(2, 2).unwrap();
        assert_eq!((h.edges().len(), v.edges().len()), (2, 2));
        // 3x3 image with columns 0 1 0: two vertical stripe boundaries per row
        let (h, v) = grid_cut_functions(3, 3).unwrap();
        let stripe = BinaryVector::from_u8(&[0, 1, 0, 0, 1, 0, 0, 1, 0]).unwrap();
        assert_eq!(h.value(stripe.bits()), 3.0 * 2.0);
        assert_eq!(v.value(stripe.bits()), 0.0);
    }

    #[test]
    fn shapes() {
        let full = Shape::Rectangle {
            top: 0,
            left: 0,
            height: 4,
            width: 5,
        };
        assert_eq!(full.rasterize(4, 5), BinaryVector::ones(20));
        let imgs = gen_shapes(20, 20, 100, 1).unwrap();
        assert!(imgs.iter().all(|x| x.count_ones() >= 1));
        let frac = imgs.iter().map(|x| x.count_ones() as f64 / 400.0).sum::<f64>() / 100.0;
        assert!((0.1..=0.9).contains(&frac), "{frac}");
        assert_eq!(imgs, gen_shapes(20, 20, 100, 1).unwrap());
        assert!(gen_shapes(0, 3, 1, 1).is_err());
        for x in gen_shapes(1, 1, 10, 3).unwrap() {
            assert_eq!(x.count_ones(), 1);
        }
        for x in gen_shapes(2, 3, 50, 4).unwrap() {
            assert!(x.count_ones() >= 1);
        }
    }

    #[test]
    fn flip_noise_limits() {
        let x = gen_shapes(10, 10, 1, 3).unwrap().remove(0);
        assert_eq!(flip_noise(&x, 0.0, 1).unwrap(), x);
        assert_eq!(flip_noise(&x, 1.0, 1).unwrap(), x.complement());
        assert!(flip_noise(&x, 1.5, 1).is_err());
        let big = BinaryVector::zeros(10_000);
        let noisy = flip_noise(&big, 0.1, 8).unwrap();
        let rate = noisy.count_ones() as f64 / 1e4;
        assert!((rate - 0.1).abs() <= 4.0 * (0.1f64 * 0.9 / 1e4).sqrt());
    }

    #[test]
    fn hamming() {
        let a = BinaryVector::from_u8(&[1, 0, 1, 1, 0, 0, 1, 0, 1, 1]).unwrap();
        let b = BinaryVector::from_u8(&[1, 1, 1, 0, 0, 0, 1, 1, 1, 0]).unwrap();
        assert_eq!(hamming_error(&a, &a).unwrap(), 0.0);
        assert_eq!(hamming_error(&a, &a.complement()).unwrap(), 1.0);
        assert_eq!(hamming_error(&a, &b).unwrap(), 0.4);
        assert!(hamming_error(&a, &BinaryVector::zeros(3)).is_err());
    }
}
