//! Sentence clustering: K-Means++ with Lloyd iterations on embeddings, and
//! agglomerative average-linkage merging on a similarity matrix.
//!
//! Both clusterers return a full partition: every cluster id in [0, k) has
//! at least one member. K-Means is randomized only through its seeding rng;
//! given the same points, k and seed it reproduces bit-identical output.
//! Agglomerative clustering takes no randomness at all.

use thiserror::Error;

use crate::embed::{EmbeddingVector, SimilarityMatrix};
use crate::rng::{RandomSource, Xorshift64Star};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k must be between 1 and {n}, got {k}")]
    InvalidK { k: usize, n: usize },
}

/// A clustering result. `centroids` and `inertia` are present for K-Means
/// and absent for agglomerative output.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    /// One cluster id in [0, k) per input point.
    pub labels: Vec<usize>,
    pub centroids: Option<Vec<EmbeddingVector>>,
    /// Sum of squared Euclidean distances from each point to its centroid.
    pub inertia: Option<f64>,
}

fn check_k(k: usize, n: usize) -> Result<(), ClusterError> {
    if k < 1 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Index of the closest centroid; ties go to the lowest centroid id.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = sq_dist(point, &centroids[0]);
    for (id, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_d {
            best = id;
            best_d = d;
        }
    }
    (best, best_d)
}

/// K-Means++ D² seeding: first centroid uniform, every next one drawn with
/// probability proportional to squared distance from the nearest chosen
/// centroid. When all remaining mass is zero (every point coincides with a
/// centroid) the lowest unchosen index is taken, so the result always holds
/// k distinct indices.
pub fn kmeans_pp_seed<R: RandomSource>(
    points: &[EmbeddingVector],
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>, ClusterError> {
    let n = points.len();
    check_k(k, n)?;

    let mut chosen = Vec::with_capacity(k);
    let first = rng.below(n);
    chosen.push(first);

    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p.values(), points[first].values()))
        .collect();

    while chosen.len() < k {
        let next = match rng.weighted(&d2) {
            Some(idx) => idx,
            None => (0..n)
                .find(|i| !chosen.contains(i))
                .expect("k <= n leaves an unchosen index"),
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p.values(), points[next].values());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    Ok(chosen)
}

/// Moves one point into each empty cluster: the point farthest from its
/// current centroid, drawn only from clusters that keep at least one member.
/// Ties pick the lowest point index. Returns whether anything moved.
fn repair_empty_clusters(
    points: &[EmbeddingVector],
    centroids: &[Vec<f64>],
    labels: &mut [usize],
) -> bool {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if sizes[labels[i]] <= 1 {
                continue;
            }
            let d = sq_dist(p.values(), &centroids[labels[i]]);
            let better = match donor {
                None => true,
                Some((_, best_d)) => d > best_d,
            };
            if better {
                donor = Some((i, d));
            }
        }
        let (idx, _) = donor.expect("a cluster with more than one member exists");
        sizes[labels[idx]] -= 1;
        labels[idx] = empty;
        sizes[empty] = 1;
        repaired = true;
    }
    repaired
}

fn means(points: &[EmbeddingVector], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].dim();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (acc, v) in sums[l].iter_mut().zip(p.values()) {
            *acc += v;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(&counts) {
        assert!(count > 0);
        for v in sum.iter_mut() {
            *v /= count as f64;
        }
    }
    sums
}

fn total_inertia(points: &[EmbeddingVector], centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p.values(), &centroids[l]))
        .sum()
}

fn lloyd(
    points: &[EmbeddingVector],
    mut centroids: Vec<Vec<f64>>,
    max_iters: usize,
    tol: f64,
) -> ClusterAssignment {
    let k = centroids.len();
    let mut labels: Vec<usize> = points
        .iter()
        .map(|p| nearest(p.values(), &centroids).0)
        .collect();
    repair_empty_clusters(points, &centroids, &mut labels);
    let mut inertia = total_inertia(points, &centroids, &labels);

    for _ in 0..max_iters {
        let new_centroids = means(points, &labels, k);
        let movement = centroids
            .iter()
            .zip(&new_centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centroids = new_centroids;
        for (i, p) in points.iter().enumerate() {
            labels[i] = nearest(p.values(), &centroids).0;
        }
        let repaired = repair_empty_clusters(points, &centroids, &mut labels);
        let new_inertia = total_inertia(points, &centroids, &labels);
        // Lloyd steps never increase inertia; the repair move is the one
        // step allowed to.
        debug_assert!(repaired || new_inertia <= inertia + 1e-9);
        inertia = new_inertia;
        if movement <= tol {
            break;
        }
    }

    let centroids = centroids
        .into_iter()
        .map(|c| EmbeddingVector::new(c).expect("centroid coordinates are finite"))
        .collect();
    ClusterAssignment {
        k,
        labels,
        centroids: Some(centroids),
        inertia: Some(inertia),
    }
}

/// Lloyd iterations starting from explicit seed points. Exposed so callers
/// can sweep alternative seedings; `kmeans` composes this with D² seeding.
pub fn lloyd_from_seeds(
    points: &[EmbeddingVector],
    seed_indices: &[usize],
    max_iters: usize,
    tol: f64,
) -> Result<ClusterAssignment, ClusterError> {
    check_k(seed_indices.len(), points.len())?;
    assert!(max_iters >= 1 && tol >= 0.0);
    let mut distinct = seed_indices.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    assert!(distinct.len() == seed_indices.len(), "seed indices repeat");
    assert!(distinct.iter().all(|&i| i < points.len()));

    let centroids: Vec<Vec<f64>> = seed_indices
        .iter()
        .map(|&i| points[i].values().to_vec())
        .collect();
    Ok(lloyd(points, centroids, max_iters, tol))
}

/// One K-Means run: D² seeding with the caller's rng, then Lloyd iterations
/// until the widest centroid movement drops to `tol` or `max_iters` passes.
pub fn kmeans<R: RandomSource>(
    points: &[EmbeddingVector],
    k: usize,
    max_iters: usize,
    tol: f64,
    rng: &mut R,
) -> Result<ClusterAssignment, ClusterError> {
    check_k(k, points.len())?;
    assert!(max_iters >= 1 && tol >= 0.0);
    let seeds = kmeans_pp_seed(points, k, rng)?;
    lloyd_from_seeds(points, &seeds, max_iters, tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            tol: 1e-6,
            n_restarts: 8,
            seed: 0,
        }
    }
}

/// Restarted K-Means: each restart runs on its own rng stream derived from
/// (seed, restart index) and the lowest-inertia result wins, earliest
/// restart first on ties. Restart order, not completion order, decides.
pub fn kmeans_restarts(
    points: &[EmbeddingVector],
    k: usize,
    options: &KMeansOptions,
) -> Result<ClusterAssignment, ClusterError> {
    assert!(options.n_restarts >= 1);
    let mut best: Option<ClusterAssignment> = None;
    for restart in 0..options.n_restarts {
        let mut rng = Xorshift64Star::stream(options.seed, restart as u64);
        let run = kmeans(points, k, options.max_iters, options.tol, &mut rng)?;
        let better = match &best {
            None => true,
            Some(b) => run.inertia.unwrap() < b.inertia.unwrap(),
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart ran"))
}

/// Agglomerative clustering under average linkage on the given similarity
/// matrix. Starts from singletons and repeatedly merges the pair of
/// clusters with the highest mean inter-cluster similarity until k remain.
/// Ties merge the lexicographically smallest (min id, max id) pair. Final
/// labels are renumbered to [0, k) by each cluster's smallest member index.
pub fn agglomerative(sim: &SimilarityMatrix, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = sim.n();
    check_k(k, n)?;

    // Clusters are keyed by their smallest member index: merging into the
    // smaller id keeps that true. cross[a][b] holds the sum of pairwise
    // similarities between members of a and b, so average linkage is
    // cross[a][b] / (|a| |b|) and a merge only adds the two old sums.
    let mut active: Vec<bool> = vec![true; n];
    let mut sizes: Vec<usize> = vec![1; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut cross: Vec<f64> = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                cross[i * n + j] = sim.get(i, j);
            }
        }
    }

    for _ in 0..n - k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in a + 1..n {
                if !active[b] {
                    continue;
                }
                let avg = cross[a * n + b] / (sizes[a] * sizes[b]) as f64;
                if best.is_none_or(|(bv, _, _)| avg > bv) {
                    best = Some((avg, a, b));
                }
            }
        }
        let (_, a, b) = best.expect("more clusters than k remain");
        for c in 0..n {
            if active[c] && c != a && c != b {
                let add = cross[b * n + c];
                cross[a * n + c] += add;
                cross[c * n + a] += add;
            }
        }
        sizes[a] += sizes[b];
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        active[b] = false;
    }

    let mut labels = vec![0usize; n];
    let mut next_id = 0;
    for a in 0..n {
        if !active[a] {
            continue;
        }
        for &m in &members[a] {
            labels[m] = next_id;
        }
        next_id += 1;
    }
    assert!(next_id == k);

    Ok(ClusterAssignment {
        k,
        labels,
        centroids: None,
        inertia: None,
    })
}
