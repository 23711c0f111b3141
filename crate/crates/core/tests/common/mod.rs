#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pfp_core::funkdata::{BasisSystem, FunctionalSeries, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn fourier(j: usize, dim: usize) -> Arc<BasisSystem<f64>> {
    Arc::new(BasisSystem::fourier(Grid::uniform(j).unwrap(), dim).unwrap())
}

pub fn bspline(j: usize, dim: usize) -> Arc<BasisSystem<f64>> {
    Arc::new(BasisSystem::bspline(Grid::uniform(j).unwrap(), dim).unwrap())
}

/// Curves with independent normal coefficients scaled by `scale[j]`.
pub fn random_series(basis: &Arc<BasisSystem<f64>>, n: usize, scale: &[f64], seed: u64) -> FunctionalSeries<f64> {
    let mut r = rng(seed);
    let d = basis.dim();
    let c = DMatrix::from_fn(n, d, |_, j| r.sample::<f64, _>(StandardNormal) * scale[j.min(scale.len() - 1)]);
    FunctionalSeries::new(Arc::clone(basis), c).unwrap()
}

/// FAR(1) in coefficients: `c_k = A c_{k-1} + e_k` with `e_k ~ N(0, diag(s²))`.
pub fn var1(basis: &Arc<BasisSystem<f64>>, a: &DMatrix<f64>, s: &[f64], n: usize, seed: u64) -> FunctionalSeries<f64> {
    let mut r = rng(seed);
    let d = basis.dim();
    let mut c = DVector::zeros(d);
    let mut rows = Vec::new();
    for k in 0..n + 50 {
        let e = DVector::from_fn(d, |j, _| r.sample::<f64, _>(StandardNormal) * s[j]);
        c = a * &c + e;
        if k >= 50 {
            rows.push(c.clone());
        }
    }
    FunctionalSeries::from_curves(Arc::clone(basis), &rows).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
