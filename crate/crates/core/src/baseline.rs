//! Lloyd's k-means, the reference clustering for the Manhattan cost.
//!
//! Clustering uses squared Euclidean distance with k-means++ seeding and keeps the
//! restart with the lowest inertia. Results are compared against the hypercube
//! learner with [`cost_l1`], the same cost the learner minimizes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{self, RunRng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Stop once total centroid movement, relative to total centroid norm, is at most this.
    pub tolerance: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { k: 10, max_iters: 300, restarts: 5, seed: 0, tolerance: 1e-6 }
    }
}

impl KMeansConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.max_iters == 0 || self.restarts == 0 {
            return Err(Error::InvalidParams("k, max_iters and restarts must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParams("tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squares of the final assignment.
    pub inertia: f64,
    /// Inertia at each assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
    /// Index of the winning restart.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid of every point (lowest index on ties) and the total squared distance.
pub fn assign<V: AsRef<[f64]>>(inputs: &[V], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let assignments = inputs
        .iter()
        .map(|x| {
            let x = x.as_ref();
            let (best, d) = centroids
                .iter()
                .enumerate()
                .map(|(i, c)| (i, sq_dist(x, c)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            inertia += d;
            best
        })
        .collect();
    (assignments, inertia)
}

/// One Lloyd iteration: assign, then move each centroid to the mean of its points.
/// Clusters left empty are reseeded to the point farthest from its centroid.
pub fn lloyd_step<V: AsRef<[f64]>>(inputs: &[V], centroids: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>, f64) {
    let (assignments, inertia) = assign(inputs, centroids);
    let dim = centroids[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (x, &a) in inputs.iter().zip(&assignments) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(x.as_ref()) {
            *s += v;
        }
    }
    let mut next: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .zip(centroids)
        .map(|((s, &n), old)| {
            if n == 0 {
                old.clone()
            } else {
                s.into_iter().map(|v| v / n as f64).collect()
            }
        })
        .collect();

    if counts.contains(&0) {
        let mut far: Vec<f64> = inputs
            .iter()
            .zip(&assignments)
            .map(|(x, &a)| sq_dist(x.as_ref(), &next[a]))
            .collect();
        for (c, _) in counts.iter().enumerate().filter(|(_, &n)| n == 0) {
            let p = far
                .iter()
                .enumerate()
                .fold(0, |best, (i, &d)| if d > far[best] { i } else { best });
            next[c] = inputs[p].as_ref().to_vec();
            far[p] = 0.0;
        }
    }
    (next, assignments, inertia)
}

fn plus_plus_seed<V: AsRef<[f64]>>(inputs: &[V], k: usize, rng: &mut RunRng) -> Vec<Vec<f64>> {
    let first = rng.random_range(0..inputs.len());
    let mut centroids = vec![inputs[first].as_ref().to_vec()];
    let mut d2: Vec<f64> = inputs.iter().map(|x| sq_dist(x.as_ref(), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = d2.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            // roundoff can leave r past the last positive weight
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|&d| d > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            rng.random_range(0..inputs.len())
        };
        let c = inputs[pick].as_ref().to_vec();
        for (d, x) in d2.iter_mut().zip(inputs) {
            *d = d.min(sq_dist(x.as_ref(), &c));
        }
        centroids.push(c);
    }
    centroids
}

fn run_once<V: AsRef<[f64]>>(inputs: &[V], config: &KMeansConfig, restart: usize) -> KMeansResult {
    let mut rng = rng::substream(config.seed, 16 + Stream::KMeans as u64 * 1_000_000 + restart as u64);
    let mut centroids = plus_plus_seed(inputs, config.k, &mut rng);
    let mut inertia_trace = Vec::new();
    let mut previous: Option<Vec<usize>> = None;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let (next, assignments, inertia) = lloyd_step(inputs, &centroids);
        inertia_trace.push(inertia);
        iterations += 1;
        if previous.as_ref() == Some(&assignments) {
            break;
        }
        let moved: f64 = next.iter().zip(&centroids).map(|(a, b)| sq_dist(a, b)).sum::<f64>().sqrt();
        let norm: f64 = centroids.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        centroids = next;
        previous = Some(assignments);
        if moved <= config.tolerance * norm.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let (assignments, inertia) = assign(inputs, &centroids);
    KMeansResult { centroids, assignments, inertia, inertia_trace, iterations, restart }
}

/// Best of `config.restarts` k-means runs.
pub fn kmeans<V: AsRef<[f64]> + Sync>(inputs: &[V], config: &KMeansConfig) -> Result<KMeansResult> {
    config.validate()?;
    if inputs.len() < config.k {
        return Err(Error::TooFewInputs { needed: config.k, available: inputs.len() });
    }
    let dim = inputs[0].as_ref().len();
    if let Some(bad) = inputs.iter().find(|x| x.as_ref().len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.as_ref().len() });
    }
    let runs: Vec<KMeansResult> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_once(inputs, config, r))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
        .expect("restarts >= 1");
    Ok(best)
}

/// Sum over inputs of the Manhattan distance to the nearest centroid.
pub fn cost_l1<C: AsRef<[f64]>, V: AsRef<[f64]>>(centroids: &[C], inputs: &[V]) -> Result<f64> {
    let dim = centroids.first().ok_or(Error::EmptyInput)?.as_ref().len();
    for v in centroids.iter().map(AsRef::as_ref).chain(inputs.iter().map(AsRef::as_ref)) {
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
    }
    Ok(inputs
        .iter()
        .map(|x| {
            centroids
                .iter()
                .map(|c| c.as_ref().iter().zip(x.as_ref()).map(|(a, b)| (a - b).abs()).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        })
        .sum())
}
