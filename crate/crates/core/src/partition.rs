//! Random partitions of finite point sets in R^h (padded and Lipschitz),
//! interiors, greedy merging, bump functions, and cover transfer between
//! metrics.
//!
//! Both partition schemes are delta-bounded with probability one, which the
//! constructors verify on every sample. The padded parameter alpha and the
//! Lipschitz constant are treated as measured/reported quantities, never as
//! asymptotic constants.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{ball, dist_to_set, DistanceMatrix};
use crate::sdp::EmbeddingSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionScheme {
    /// Randomly shifted axis-aligned grid with cell side delta/sqrt(h).
    Grid,
    /// Ball carving: one random radius in [delta/4, delta/2], random order.
    BallCarving,
}

/// A delta-bounded partition of the vertex set under the Euclidean metric of
/// the points it was built from.
#[derive(Debug, Clone, Serialize)]
pub struct Partition {
    pub scheme: PartitionScheme,
    pub seed: u64,
    pub delta: f64,
    /// Padding parameter alpha (grid) or a carving-based heuristic value.
    pub param: f64,
    /// Disjoint blocks covering every vertex, each sorted, ordered by their
    /// smallest member.
    pub blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Index of the block containing v.
    pub fn block_of(&self, v: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.binary_search(&v).is_ok())
            .expect("blocks partition the vertex set")
    }
}

fn euclid(points: &EmbeddingSolution, u: usize, v: usize) -> f64 {
    points.squared_distance(u, v).sqrt()
}

fn assert_delta_bounded(points: &EmbeddingSolution, blocks: &[Vec<usize>], delta: f64) {
    for block in blocks {
        for (i, &u) in block.iter().enumerate() {
            for &v in &block[i + 1..] {
                let d = euclid(points, u, v);
                assert!(
                    d <= delta * (1.0 + 1e-9),
                    "delta-boundedness violated: d({u},{v}) = {d} > {delta}"
                );
            }
        }
    }
}

fn canonical_blocks(mut blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.retain(|b| !b.is_empty());
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Padded random partition: delta-bounded with probability one, with padding
/// parameter alpha = 2 h^1.5 / eps (each point's (delta/alpha)-ball stays in
/// its block with probability >= 1 - eps).
pub fn padded_partition(
    points: &EmbeddingSolution,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<Partition> {
    padded_partition_with(points, delta, eps, seed, PartitionScheme::Grid)
}

pub fn padded_partition_with(
    points: &EmbeddingSolution,
    delta: f64,
    eps: f64,
    seed: u64,
    scheme: PartitionScheme,
) -> Result<Partition> {
    if delta <= 0.0 || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!(
            "padded partition needs delta > 0 and eps in (0,1), got delta={delta}, eps={eps}"
        )));
    }
    let n = points.n();
    let h = points.dim().max(1);
    let blocks = match scheme {
        PartitionScheme::Grid => {
            // Margin keeps the within-cell diameter strictly below delta
            // under floating-point rounding.
            let side = delta / (h as f64).sqrt() * (1.0 - 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shifts: Vec<f64> = (0..h).map(|_| rng.gen::<f64>() * side).collect();
            let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
            for v in 0..n {
                let key: Vec<i64> = points
                    .vector(v)
                    .iter()
                    .zip(&shifts)
                    .map(|(x, s)| ((x + s) / side).floor() as i64)
                    .collect();
                cells.entry(key).or_default().push(v);
            }
            cells.into_values().collect()
        }
        PartitionScheme::BallCarving => carve(points, delta, seed),
    };
    let blocks = canonical_blocks(blocks);
    assert_delta_bounded(points, &blocks, delta);
    let param = match scheme {
        PartitionScheme::Grid => 2.0 * (h as f64).powf(1.5) / eps,
        PartitionScheme::BallCarving => 8.0 * (n.max(2) as f64).ln() / eps,
    };
    Ok(Partition {
        scheme,
        seed,
        delta,
        param,
        blocks,
    })
}

fn carve(points: &EmbeddingSolution, delta: f64, seed: u64) -> Vec<Vec<usize>> {
    let n = points.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = delta / 4.0 + rng.gen::<f64>() * (delta / 4.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut assigned = vec![false; n];
    let mut blocks = Vec::new();
    for &c in &order {
        if assigned[c] {
            continue;
        }
        let mut block = Vec::new();
        for v in 0..n {
            if !assigned[v] && euclid(points, c, v) <= radius {
                assigned[v] = true;
                block.push(v);
            }
        }
        blocks.push(block);
    }
    blocks
}

/// Lipschitz random partition via ball carving: delta-bounded with
/// probability one; nearby pairs are separated with probability proportional
/// to their distance (measure with [`measure_lipschitz`]).
pub fn lipschitz_partition(
    points: &EmbeddingSolution,
    delta: f64,
    seed: u64,
) -> Result<Partition> {
    if delta <= 0.0 {
        return Err(Error::invalid(format!(
            "lipschitz partition needs delta > 0, got {delta}"
        )));
    }
    let blocks = canonical_blocks(carve(points, delta, seed));
    assert_delta_bounded(points, &blocks, delta);
    Ok(Partition {
        scheme: PartitionScheme::BallCarving,
        seed,
        delta,
        param: 2.0 * (points.dim().max(1) as f64).sqrt(),
        blocks,
    })
}

/// Empirical Lipschitz constant: max over distinct-point pairs of
/// (separation frequency) * delta / d(u,v), over `trials` partitions with
/// seed-derived randomness.
pub fn measure_lipschitz(
    points: &EmbeddingSolution,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let n = points.n();
    let mut separated = vec![0usize; n * n];
    for t in 0..trials {
        let p = lipschitz_partition(points, delta, crate::metric::derive_seed(seed, t as u64))?;
        let mut owner = vec![0usize; n];
        for (b, block) in p.blocks.iter().enumerate() {
            for &v in block {
                owner[v] = b;
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if owner[u] != owner[v] {
                    separated[u * n + v] += 1;
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let d = euclid(points, u, v);
            if d > 0.0 {
                let freq = separated[u * n + v] as f64 / trials as f64;
                worst = worst.max(freq * delta / d);
            }
        }
    }
    Ok(worst)
}

/// Interior of a block at radius rho: vertices whose rho-ball (under d)
/// stays inside the block.
pub fn interior(
    p: &Partition,
    block: &[usize],
    rho: f64,
    d: &DistanceMatrix,
) -> Result<Vec<usize>> {
    if !p.blocks.iter().any(|b| b == block) {
        return Err(Error::invalid("block is not part of the partition"));
    }
    Ok(interior_of_set(block, rho, d))
}

/// Interior of an arbitrary vertex set (no partition membership check).
pub fn interior_of_set(block: &[usize], rho: f64, d: &DistanceMatrix) -> Vec<usize> {
    let mut member = vec![false; d.n()];
    for &v in block {
        member[v] = true;
    }
    block
        .iter()
        .copied()
        .filter(|&v| ball(v, rho, d).into_iter().all(|w| member[w]))
        .collect()
}

/// Greedy merge into exactly `target` disjoint sets: the `target` heaviest
/// inputs seed the output; every remaining set (in descending weight order)
/// merges into the currently lightest output (ties: lowest index). Weights
/// add under merging; inputs beyond `target` missing are padded with empty
/// sets. Returns (set, weight) pairs.
pub fn merge_small(
    sets: &[Vec<usize>],
    target: usize,
    weight: impl Fn(&[usize]) -> u64,
) -> Vec<(Vec<usize>, u64)> {
    assert!(target >= 1);
    let mut order: Vec<usize> = (0..sets.len()).collect();
    let weights: Vec<u64> = sets.iter().map(|s| weight(s)).collect();
    order.sort_by(|&a, &b| weights[b].cmp(&weights[a]).then(a.cmp(&b)));

    let mut out: Vec<(Vec<usize>, u64)> = Vec::with_capacity(target);
    for i in 0..target {
        match order.get(i) {
            Some(&idx) => out.push((sets[idx].clone(), weights[idx])),
            None => out.push((Vec::new(), 0)),
        }
    }
    for &idx in order.iter().skip(target) {
        let lightest = out
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.1.cmp(&b.1).then(i.cmp(j)))
            .map(|(i, _)| i)
            .unwrap();
        out[lightest].0.extend_from_slice(&sets[idx]);
        out[lightest].1 += weights[idx];
    }
    for (set, _) in &mut out {
        set.sort_unstable();
    }
    out
}

/// Bump functions f_i(v) = max(0, 1 - alpha d(v, interior_i) / delta):
/// 1 on the interior, 0 outside T_i, (alpha/delta)-Lipschitz w.r.t. d.
/// Requires interiors consistent with (alpha, delta): the functions must
/// vanish outside their sets and have disjoint supports, which is verified.
pub fn bump_functions(
    t_sets: &[Vec<usize>],
    interiors: &[Vec<usize>],
    alpha: f64,
    delta: f64,
    d: &DistanceMatrix,
) -> Result<Vec<Vec<f64>>> {
    if t_sets.len() != interiors.len() {
        return Err(Error::SizeMismatch(format!(
            "{} sets vs {} interiors",
            t_sets.len(),
            interiors.len()
        )));
    }
    let n = d.n();
    let mut fs = Vec::with_capacity(t_sets.len());
    for (t, tilde) in t_sets.iter().zip(interiors) {
        if tilde.is_empty() {
            return Err(Error::invalid("bump function over an empty interior"));
        }
        let mut member = vec![false; n];
        for &v in t {
            member[v] = true;
        }
        if !tilde.iter().all(|&v| member[v]) {
            return Err(Error::invalid("interior not contained in its set"));
        }
        let f: Vec<f64> = (0..n)
            .map(|v| (1.0 - alpha * dist_to_set(v, tilde, d).unwrap() / delta).max(0.0))
            .collect();
        for (v, &fv) in f.iter().enumerate() {
            if fv > 0.0 && !member[v] {
                return Err(Error::invalid(format!(
                    "bump support escapes its set at vertex {v}: alpha/delta inconsistent with the interiors"
                )));
            }
        }
        fs.push(f);
    }
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, f) in fs.iter().enumerate() {
        for (v, &fv) in f.iter().enumerate() {
            if fv > 0.0 {
                if let Some(j) = owner[v] {
                    return Err(Error::invalid(format!(
                        "bump supports {j} and {i} overlap at vertex {v}"
                    )));
                }
                owner[v] = Some(i);
            }
        }
    }
    Ok(fs)
}

/// A family of <= 2k vertex sets with recorded diameters under a metric.
#[derive(Debug, Clone, Serialize)]
pub struct Cover {
    pub sets: Vec<Vec<usize>>,
    /// Exact diameter of each set (0 for empty sets).
    pub diameters: Vec<f64>,
    /// Size of the union.
    pub covered_count: usize,
}

impl Cover {
    pub fn new(sets: Vec<Vec<usize>>, d: &DistanceMatrix) -> Cover {
        let diameters = sets
            .iter()
            .map(|s| {
                if s.is_empty() {
                    0.0
                } else {
                    crate::metric::diameter(s, d).unwrap()
                }
            })
            .collect();
        let mut covered = vec![false; d.n()];
        for s in &sets {
            for &v in s {
                covered[v] = true;
            }
        }
        let covered_count = covered.iter().filter(|&&c| c).count();
        Cover {
            sets,
            diameters,
            covered_count,
        }
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().cloned().fold(0.0, f64::max)
    }
}

/// Transfers a low-diameter family from metric d to metric d': each input
/// set of d-diameter <= delta contributes the radius-2delta ball (under d')
/// around its best member u, provided |B_{d'}(u, 2 delta) ∩ S_i| >=
/// (1 - eps/2)|S_i|; bad sets contribute empty output. When the number of
/// pairs with d' > 2d is at most (eps^3 n^2)/(64 k^2), the union loses at
/// most eps*n vertices and every output has d'-diameter <= 4 delta.
pub fn cover_transfer(
    sets: &[Vec<usize>],
    d: &DistanceMatrix,
    d_prime: &DistanceMatrix,
    delta: f64,
    eps: f64,
) -> Result<Cover> {
    for set in sets {
        if !set.is_empty() {
            let diam = crate::metric::diameter(set, d)?;
            if diam > delta * (1.0 + 1e-9) {
                return Err(Error::invalid(format!(
                    "input set has d-diameter {diam} > delta = {delta}"
                )));
            }
        }
    }
    let mut out = Vec::with_capacity(sets.len());
    for set in sets {
        if set.is_empty() {
            out.push(Vec::new());
            continue;
        }
        let mut best: Option<(usize, usize)> = None; // (hits, center)
        for &u in set {
            let b = ball(u, 2.0 * delta, d_prime);
            let hits = set.iter().filter(|v| b.binary_search(v).is_ok()).count();
            let better = match best {
                None => true,
                Some((bh, bc)) => hits > bh || (hits == bh && u < bc),
            };
            if better {
                best = Some((hits, u));
            }
        }
        let (hits, center) = best.unwrap();
        if hits as f64 >= (1.0 - eps / 2.0) * set.len() as f64 - 1e-9 {
            out.push(ball(center, 2.0 * delta, d_prime));
        } else {
            out.push(Vec::new());
        }
    }
    Ok(Cover::new(out, d_prime))
}

/// Greedy verified ball cover: repeatedly adds the radius-(delta/2) ball
/// covering the most uncovered vertices, so every set has diameter <= delta
/// whenever d satisfies the triangle inequality. Utility for rounding
/// callers that need a cover independent of the structure pipelines.
pub fn greedy_ball_cover(d: &DistanceMatrix, delta: f64, max_sets: usize) -> Cover {
    let n = d.n();
    let mut covered = vec![false; n];
    let mut sets = Vec::new();
    while sets.len() < max_sets && covered.iter().any(|&c| !c) {
        let mut best: Option<(usize, usize)> = None;
        for c in 0..n {
            let gain = (0..n)
                .filter(|&v| !covered[v] && d.get(c, v) <= delta / 2.0)
                .count();
            let better = match best {
                None => gain > 0,
                Some((bg, bc)) => gain > bg || (gain == bg && c < bc),
            };
            if better {
                best = Some((gain, c));
            }
        }
        match best {
            Some((_, c)) => {
                let set = ball(c, delta / 2.0, d);
                for &v in &set {
                    covered[v] = true;
                }
                sets.push(set);
            }
            None => break,
        }
    }
    Cover::new(sets, d)
}

/// Certificate emitted when a structure pipeline cannot cover: either k
/// disjointly supported functions (bounding lambda_k via their Rayleigh
/// quotients) or k disjoint sets (bounding phi_k via their expansions).
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Certificate {
    Spectral { functions: Vec<Vec<f64>> },
    Expansion { sets: Vec<Vec<usize>> },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{euclidean_distances, MetricKind};
    use crate::sdp::SolutionKind;
    use proptest::prelude::*;

    fn points(coords: Vec<Vec<f64>>) -> EmbeddingSolution {
        EmbeddingSolution::new(coords, 0.0, SolutionKind::Reduced)
    }

    #[test]
    fn padded_single_point_and_far_pairs() {
        let single = points(vec![vec![0.0, 0.0]]);
        let p = padded_partition(&single, 1.0, 0.25, 3).unwrap();
        assert_eq!(p.blocks, vec![vec![0]]);

        let far = points(vec![vec![0.0], vec![10.0]]);
        for seed in 0..50 {
            let p = padded_partition(&far, 1.0, 0.25, seed).unwrap();
            assert_eq!(p.blocks.len(), 2, "distance > delta forces separation");
        }
    }

    #[test]
    fn padded_clusters_are_padded_with_good_rate() {
        // Two clusters of radius << delta/alpha, far apart.
        let eps = 0.25;
        let delta = 1.0;
        let h = 2.0f64;
        let alpha = 2.0 * h.powf(1.5) / eps;
        let spread = delta / alpha / 8.0;
        let pts = points(vec![
            vec![0.0, 0.0],
            vec![spread, 0.0],
            vec![0.0, spread],
            vec![50.0, 50.0],
            vec![50.0 + spread, 50.0],
        ]);
        let d = euclidean_distances(&pts);
        let trials = 400;
        let mut padded_ok = 0usize;
        for seed in 0..trials {
            let p = padded_partition(&pts, delta, eps, seed as u64).unwrap();
            let rho = delta / p.param;
            let all_interior = p
                .blocks
                .iter()
                .map(|b| interior(&p, b, rho, &d).unwrap().len())
                .sum::<usize>()
                == pts.n();
            if all_interior {
                padded_ok += 1;
            }
        }
        let rate = padded_ok as f64 / trials as f64;
        assert!(rate >= 1.0 - eps, "padding rate {rate}");
    }

    #[test]
    fn lipschitz_trivia() {
        let coincident = points(vec![vec![1.0, 1.0]; 4]);
        for seed in 0..20 {
            let p = lipschitz_partition(&coincident, 0.5, seed).unwrap();
            assert_eq!(p.blocks.len(), 1, "coincident points never separated");
        }

        let spread = points(vec![vec![0.0], vec![5.0], vec![10.0]]);
        for seed in 0..20 {
            let p = lipschitz_partition(&spread, 1.0, seed).unwrap();
            assert_eq!(p.blocks.len(), 3, "pairwise distance > delta forces singletons");
        }
    }

    #[test]
    fn lipschitz_near_pair_separation_frequency() {
        // Pair at distance within the carving radius range; far background.
        let delta = 1.0;
        let gap = 0.35;
        let pts = points(vec![vec![0.0], vec![gap], vec![100.0], vec![200.0]]);
        let trials = 2000;
        let mut sep = 0;
        for t in 0..trials {
            let p = lipschitz_partition(&pts, delta, t as u64).unwrap();
            if p.block_of(0) != p.block_of(1) {
                sep += 1;
            }
        }
        let freq = sep as f64 / trials as f64;
        let l_hat = measure_lipschitz(&pts, delta, 500, 99).unwrap();
        let sigma = (freq * (1.0 - freq) / trials as f64).sqrt();
        assert!(
            freq <= l_hat * gap / delta + 3.0 * sigma,
            "freq {freq} vs L-hat bound {}",
            l_hat * gap / delta
        );
    }

    #[test]
    fn interior_cases() {
        let pts = points(vec![vec![0.0], vec![0.3], vec![10.0]]);
        let d = euclidean_distances(&pts);
        let p = lipschitz_partition(&pts, 1.0, 4).unwrap();
        for b in &p.blocks {
            assert_eq!(&interior(&p, b, 0.0, &d).unwrap(), b, "rho = 0 keeps the block");
        }
        // Isolated block far from others stays fully interior for rho < gap.
        let far_block: Vec<usize> = vec![2];
        if p.blocks.contains(&far_block) {
            assert_eq!(interior(&p, &far_block, 5.0, &d).unwrap(), vec![2]);
        }
        assert!(interior(&p, &[0, 2], 0.1, &d).is_err());

        // Two touching blocks: boundary points drop out of the interior.
        let line = points(vec![vec![0.0], vec![0.4], vec![0.8], vec![1.2]]);
        let dl = euclidean_distances(&line);
        let manual = Partition {
            scheme: PartitionScheme::Grid,
            seed: 0,
            delta: 1.0,
            param: 4.0,
            blocks: vec![vec![0, 1], vec![2, 3]],
        };
        let inner = interior(&manual, &manual.blocks[0], 0.5, &dl).unwrap();
        assert_eq!(inner, vec![0], "vertex 1 sits within rho of block 2");
    }

    #[test]
    fn merge_small_identity_and_greedy() {
        let sets: Vec<Vec<usize>> = vec![vec![0, 1], vec![2, 3], vec![4]];
        let merged = merge_small(&sets, 3, |s| s.len() as u64);
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].0, vec![0, 1]);

        // 2k+1 sets, the last one tiny: it lands in the lightest seed.
        let sets: Vec<Vec<usize>> = vec![vec![0, 1, 2], vec![3, 4], vec![5]];
        let merged = merge_small(&sets, 2, |s| s.len() as u64);
        assert_eq!(merged[1].0, vec![3, 4, 5]);
        assert_eq!(merged[1].1, 3);

        // Fewer inputs than target pads with empties.
        let merged = merge_small(&[vec![7]], 3, |s| s.len() as u64);
        assert_eq!(merged[1].0, Vec::<usize>::new());
    }

    #[test]
    fn bump_values_at_interior_far_and_midpoint() {
        // Distances engineered so v2 sits exactly at delta/(2 alpha) from the
        // interior: f = 1/2 there.
        let alpha = 4.0;
        let delta = 1.0;
        let mut d = DistanceMatrix::zeros(4, MetricKind::Euclidean);
        d.set_sym(0, 1, 0.05);
        d.set_sym(0, 2, delta / (2.0 * alpha));
        d.set_sym(1, 2, delta / (2.0 * alpha));
        d.set_sym(0, 3, 10.0);
        d.set_sym(1, 3, 10.0);
        d.set_sym(2, 3, 10.0);
        let fs = bump_functions(&[vec![0, 1, 2], vec![3]], &[vec![0, 1], vec![3]], alpha, delta, &d)
            .unwrap();
        assert_eq!(fs[0][0], 1.0);
        assert_eq!(fs[0][1], 1.0);
        assert!((fs[0][2] - 0.5).abs() < 1e-12);
        assert_eq!(fs[0][3], 0.0, "distance >= delta/alpha zeroes the bump");
        assert_eq!(fs[1][3], 1.0);
        assert!(bump_functions(&[vec![0]], &[vec![]], alpha, delta, &d).is_err());
    }

    #[test]
    fn bump_is_lipschitz() {
        let pts = points(vec![
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![0.9],
            vec![1.5],
            vec![1.6],
        ]);
        let d = euclidean_distances(&pts);
        let alpha = 3.0;
        let delta = 0.9;
        let t_sets = vec![vec![0, 1, 2, 3], vec![4, 5]];
        let interiors = vec![
            interior_of_set(&t_sets[0], delta / alpha, &d),
            interior_of_set(&t_sets[1], delta / alpha, &d),
        ];
        let fs = bump_functions(&t_sets, &interiors, alpha, delta, &d).unwrap();
        for f in &fs {
            for u in 0..6 {
                for v in 0..6 {
                    assert!(
                        (f[u] - f[v]).abs() <= alpha / delta * d.get(u, v) + 1e-12,
                        "lipschitz bound violated"
                    );
                }
            }
        }
    }

    #[test]
    fn cover_transfer_identity_and_blowup() {
        let d = DistanceMatrix::from_fn(6, MetricKind::Squared, |u, v| {
            if (u < 3) == (v < 3) {
                0.1
            } else {
                5.0
            }
        });
        let sets = vec![vec![0, 1, 2], vec![3, 4, 5]];
        let same = cover_transfer(&sets, &d, &d, 0.1, 0.25).unwrap();
        assert_eq!(same.covered_count, 6);
        assert!(same.max_diameter() <= 0.4);

        // Second cluster blown apart under d': it contributes a reduced ball.
        let mut d_prime = d.clone();
        d_prime.set_sym(3, 4, 50.0);
        d_prime.set_sym(3, 5, 50.0);
        d_prime.set_sym(4, 5, 50.0);
        let moved = cover_transfer(&sets, &d, &d_prime, 0.1, 0.25).unwrap();
        assert_eq!(moved.sets[0], vec![0, 1, 2]);
        assert!(moved.sets[1].len() <= 1);
    }

    #[test]
    fn greedy_cover_covers_clusters() {
        let d = DistanceMatrix::from_fn(8, MetricKind::Squared, |u, v| {
            if (u < 4) == (v < 4) {
                0.01
            } else {
                4.0
            }
        });
        let cover = greedy_ball_cover(&d, 0.1, 4);
        assert_eq!(cover.covered_count, 8);
        assert!(cover.sets.len() <= 2);
        assert!(crate::oracle::verify_cover(&cover, &d, 0.1, 0.0));
    }

    proptest! {
        /// Claim-style merging guarantee: with descending weights and
        /// sum_{i > 2k} w_i >= eps n / 2, every merged weight is >= eps n / 8k.
        #[test]
        fn merged_minimum_weight(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = rng.gen_range(1usize..5);
            let n = rng.gen_range(8usize..200);
            let eps = rng.gen_range(0.05f64..0.9);
            let mut weights: Vec<u64> = Vec::new();
            // Tail mass at least eps*n/2 spread over random small sets.
            let mut tail: f64 = 0.0;
            while tail < eps * n as f64 / 2.0 {
                let w = rng.gen_range(1u64..=(n as u64 / 4).max(1));
                weights.push(w);
                tail += w as f64;
            }
            // Random heads, sorted descending overall.
            for _ in 0..(2 * k) {
                weights.push(rng.gen_range(0u64..=n as u64));
            }
            weights.sort_unstable_by(|a, b| b.cmp(a));
            prop_assume!(weights[2 * k..].iter().sum::<u64>() as f64 >= eps * n as f64 / 2.0);

            let sets: Vec<Vec<usize>> = weights.iter().enumerate().map(|(i, _)| vec![i]).collect();
            let by_weight = weights.clone();
            let merged = merge_small(&sets, 2 * k, |s| by_weight[s[0]]);
            let min_weight = merged.iter().map(|(_, w)| *w).min().unwrap();
            prop_assert!(
                min_weight as f64 >= eps * n as f64 / (8.0 * k as f64),
                "min merged weight {} below eps n/8k = {}",
                min_weight,
                eps * n as f64 / (8.0 * k as f64)
            );
        }

        /// merge_small preserves disjointness and the union exactly.
        #[test]
        fn merge_preserves_union(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let parts = rng.gen_range(1usize..10);
            let mut sets: Vec<Vec<usize>> = vec![Vec::new(); parts];
            for v in 0..30usize {
                let i = rng.gen_range(0..parts);
                sets[i].push(v);
            }
            sets.retain(|s| !s.is_empty());
            prop_assume!(!sets.is_empty());
            let target = rng.gen_range(1usize..6);
            let merged = merge_small(&sets, target, |s| s.len() as u64);
            let mut all: Vec<usize> = merged.iter().flat_map(|(s, _)| s.clone()).collect();
            all.sort_unstable();
            let mut expect: Vec<usize> = sets.iter().flatten().copied().collect();
            expect.sort_unstable();
            prop_assert_eq!(all, expect);
        }
    }
}
