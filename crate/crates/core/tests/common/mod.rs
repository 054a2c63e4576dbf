//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the estimator under test.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// A discrete distribution given by support points and counts.
#[derive(Debug, Clone)]
pub struct Discrete {
    pub support: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Discrete {
    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn expand(&self) -> Vec<f64> {
        self.support.iter().zip(&self.counts).flat_map(|(&s, &c)| std::iter::repeat_n(s, c)).collect()
    }

    pub fn probs(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(self.probs()).map(|(s, p)| s * p).sum()
    }

    pub fn max(&self) -> f64 {
        self.support.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Random discrete sample: 2..=6 distinct integer support points in
/// [-20, 20], counts 1..=5, and a threshold strictly between mean and max.
pub fn random_instance(rng: &mut impl Rng) -> (Discrete, f64) {
    loop {
        let k = rng.random_range(2..=6);
        let mut support: Vec<f64> = Vec::new();
        while support.len() < k {
            let v = rng.random_range(-20..=20) as f64;
            if !support.contains(&v) {
                support.push(v);
            }
        }
        let counts = (0..k).map(|_| rng.random_range(1..=5)).collect();
        let d = Discrete { support, counts };
        let (mean, max) = (d.mean(), d.max());
        if max - mean < 1e-6 {
            continue;
        }
        let u: f64 = rng.random_range(0.02..0.98);
        return (d, mean + u * (max - mean));
    }
}

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Primal solution of `min KL(q‖p)` subject to `Σ q_k s_k ≥ y`, searched
/// over the tilt family `q ∝ p·e^{λs}` by plain bisection on the tilted
/// mean. Returns `(KL, q)`.
pub fn primal_tilt_search(d: &Discrete, y: f64) -> (f64, Vec<f64>) {
    let p = d.probs();
    let max = d.max();
    let tilted = |lambda: f64| -> Vec<f64> {
        let w: Vec<f64> = p.iter().zip(&d.support).map(|(pk, s)| pk * (lambda * (s - max)).exp()).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    };
    let mean_at = |lambda: f64| tilted(lambda).iter().zip(&d.support).map(|(q, s)| q * s).sum::<f64>();
    let mut hi = 1.0;
    while mean_at(hi) < y {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = tilted(0.5 * (lo + hi));
    (kl(&q, &p), q)
}

pub fn kl(q: &[f64], p: &[f64]) -> f64 {
    q.iter().zip(p).filter(|(&qk, _)| qk > 0.0).map(|(qk, pk)| qk * (qk / pk).ln()).sum()
}

/// Checks that `q` is a local (hence global) minimizer of `KL(·‖p)` on the
/// affine slice `{Σq = 1, Σ q s = y}` by random feasible perturbations.
/// Returns the most negative improvement found.
pub fn worst_perturbation_gain(d: &Discrete, q: &[f64], rng: &mut impl Rng, trials: usize) -> f64 {
    let p = d.probs();
    let base = kl(q, &p);
    let k = q.len();
    if k < 3 {
        return 0.0;
    }
    let s = &d.support;
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        // random direction projected onto {Σv = 0, Σ v s = 0}
        let mut v: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ones = vec![1.0; k];
        let sm = s.iter().sum::<f64>() / k as f64;
        let sc: Vec<f64> = s.iter().map(|x| x - sm).collect();
        let proj = |v: &mut Vec<f64>, u: &[f64]| {
            let uu: f64 = u.iter().map(|x| x * x).sum();
            let vu: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(u) {
                *a -= vu / uu * b;
            }
        };
        proj(&mut v, &ones);
        proj(&mut v, &sc);
        let qmin = q.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if vmax == 0.0 {
            continue;
        }
        for t in [1e-3, 1e-2, 1e-1, 0.5] {
            let step = t * qmin / vmax;
            let cand: Vec<f64> = q.iter().zip(&v).map(|(a, b)| a + step * b).collect();
            worst = worst.min(kl(&cand, &p) - base);
        }
    }
    worst
}

/// `1 − ln 2`.
pub const EXP1_Y2: f64 = 0.306_852_819_440_054_7;
