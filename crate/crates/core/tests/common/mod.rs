#![allow(dead_code)]

use juice_core::{CMat, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cmat(rng: &mut impl Rng, r: usize, c: usize) -> CMat {
    CMat::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn cvec(rng: &mut impl Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random Hermitian PSD matrix of size `m` and rank at most `rank`.
pub fn psd(rng: &mut impl Rng, m: usize, rank: usize) -> CMat {
    let a = cmat(rng, m, rank);
    &a * a.adjoint()
}

/// Pilot matrix with unit-norm columns.
pub fn pilots(rng: &mut impl Rng, tau: usize, n: usize) -> CMat {
    let mut p = cmat(rng, tau, n);
    for mut c in p.column_iter_mut() {
        let nrm = c.norm();
        c /= C64::from(nrm);
    }
    p
}

pub fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}
