//! Brute-force reference implementations, written without the library's
//! helpers.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Vecs = Vec<Vec<f64>>;

pub fn cos(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nu * nv)
}

pub fn score(w: &[f64], a: &Vecs, b: &Vecs) -> f64 {
    let ma = a.iter().map(|x| cos(w, x)).sum::<f64>() / a.len() as f64;
    let mb = b.iter().map(|x| cos(w, x)).sum::<f64>() / b.len() as f64;
    ma - mb
}

pub fn statistic(x: &Vecs, y: &Vecs, a: &Vecs, b: &Vecs) -> f64 {
    x.iter().map(|w| score(w, a, b)).sum::<f64>() - y.iter().map(|w| score(w, a, b)).sum::<f64>()
}

pub fn effect(x: &Vecs, y: &Vecs, a: &Vecs, b: &Vecs, sample: bool) -> f64 {
    let sx: Vec<f64> = x.iter().map(|w| score(w, a, b)).collect();
    let sy: Vec<f64> = y.iter().map(|w| score(w, a, b)).collect();
    let all: Vec<f64> = sx.iter().chain(&sy).copied().collect();
    let m = all.iter().sum::<f64>() / all.len() as f64;
    let denom = all.len() as f64 - if sample { 1.0 } else { 0.0 };
    let sd = (all.iter().map(|s| (s - m).powi(2)).sum::<f64>() / denom).sqrt();
    (sx.iter().sum::<f64>() / sx.len() as f64 - sy.iter().sum::<f64>() / sy.len() as f64) / sd
}

/// Counts equal-size splits of `X ∪ Y` whose statistic exceeds the
/// observed one, by walking every bitmask. Returns `(strictly above
/// observed + tol, above observed - tol, total)`; the two counts differ
/// only when some split lies within `tol` of the observed statistic.
pub fn exact_counts(x: &Vecs, y: &Vecs, a: &Vecs, b: &Vecs, tol: f64) -> (u64, u64, u64) {
    let scores: Vec<f64> = x.iter().chain(y).map(|w| score(w, a, b)).collect();
    let m = scores.len();
    let n = x.len();
    let split = |mask: u32| -> f64 {
        (0..m)
            .map(|i| if mask >> i & 1 == 1 { scores[i] } else { -scores[i] })
            .sum()
    };
    let observed = split((1u32 << n) - 1);
    let (mut hi, mut lo, mut total) = (0, 0, 0);
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n {
            continue;
        }
        total += 1;
        let s = split(mask);
        if s > observed + tol {
            hi += 1;
        }
        if s > observed - tol {
            lo += 1;
        }
    }
    // The observed split itself is always within tolerance.
    (hi, lo - 1, total)
}

pub struct Instance {
    pub x: Vecs,
    pub y: Vecs,
    pub a: Vecs,
    pub b: Vecs,
}

fn gaussian_vec(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|a| a * a).sum::<f64>() > 1e-3 {
            return v;
        }
    }
}

/// Random instance with `|X| = |Y| = n`, `|A|, |B|` in `1..=4`.
pub fn random_instance(rng: &mut StdRng, n: usize, dim: usize) -> Instance {
    let mut set = |k: usize| (0..k).map(|_| gaussian_vec(rng, dim)).collect::<Vecs>();
    let x = set(n);
    let y = set(n);
    let na = 1 + (x.len() * 7 + dim) % 4;
    let a = set(na);
    let b = set(1 + (na + dim) % 4);
    Instance { x, y, a, b }
}

pub fn instances(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=6);
            let dim = rng.random_range(2..=8);
            random_instance(&mut rng, n, dim)
        })
        .collect()
}
