//! Distance-matrix machinery: d_x vs d^2_x, energy, Gaussian dimension
//! reduction with verify-and-retry, the Bourgain-style surrogate embedding of
//! a negative-type metric into l2, and distortion accounting.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sdp::{EmbeddingSolution, SolutionKind};

/// Tolerance for accepting a squared-distance matrix as a negative-type metric.
pub const NEG_TYPE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    /// Squared Euclidean distances (negative type when feasible).
    Squared,
    /// Euclidean distances (always a metric).
    Euclidean,
    /// Drawn from a Sherali-Adams distance distribution.
    Sampled,
    /// Distances of a Frechet-style embedding.
    Embedded,
}

impl MetricKind {
    fn code(self) -> u32 {
        match self {
            MetricKind::Squared => 0,
            MetricKind::Euclidean => 1,
            MetricKind::Sampled => 2,
            MetricKind::Embedded => 3,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        Ok(match c {
            0 => MetricKind::Squared,
            1 => MetricKind::Euclidean,
            2 => MetricKind::Sampled,
            3 => MetricKind::Embedded,
            other => return Err(Error::invalid(format!("unknown metric kind code {other}"))),
        })
    }
}

/// Symmetric nonnegative n x n distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    kind: MetricKind,
    /// Row-major n*n values.
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(n: usize, kind: MetricKind, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "expected {} values for n={n}, got {}",
                n * n,
                values.len()
            )));
        }
        for u in 0..n {
            if values[u * n + u] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at {u}")));
            }
            for v in 0..n {
                let x = values[u * n + v];
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::invalid(format!("bad distance {x} at ({u}, {v})")));
                }
                if x != values[v * n + u] {
                    return Err(Error::invalid(format!("asymmetric at ({u}, {v})")));
                }
            }
        }
        Ok(DistanceMatrix { n, kind, values })
    }

    pub fn zeros(n: usize, kind: MetricKind) -> Self {
        DistanceMatrix {
            n,
            kind,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, kind: MetricKind, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                let x = f(u, v);
                values[u * n + v] = x;
                values[v * n + u] = x;
            }
        }
        DistanceMatrix { n, kind, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    pub fn set_sym(&mut self, u: usize, v: usize, x: f64) {
        self.values[u * self.n + v] = x;
        self.values[v * self.n + u] = x;
    }

    /// Sum of distances over unordered pairs {u, v}, u != v.
    pub fn pair_sum(&self) -> f64 {
        let mut s = 0.0;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                s += self.get(u, v);
            }
        }
        s
    }

    /// Largest violation max(0, d(u,v) - d(u,w) - d(w,v)) over all triples.
    pub fn max_triangle_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let duv = self.get(u, v);
                for w in 0..self.n {
                    if w == u || w == v {
                        continue;
                    }
                    worst = worst.max(duv - self.get(u, w) - self.get(w, v));
                }
            }
        }
        worst
    }

    /// Scales every entry in place.
    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.values {
            *x *= factor;
        }
    }

    /// Binary layout: 8-byte header (n as u32 LE, kind code as u32 LE)
    /// followed by the n*n row-major values as f64 LE.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.values.len());
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&self.kind.code().to_le_bytes());
        for x in &self.values {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::invalid("distance matrix blob shorter than header"));
        }
        let n = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let kind = MetricKind::from_code(u32::from_le_bytes(bytes[4..8].try_into().unwrap()))?;
        let body = &bytes[8..];
        if body.len() != 8 * n * n {
            return Err(Error::SizeMismatch(format!(
                "expected {} payload bytes for n={n}, got {}",
                8 * n * n,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        DistanceMatrix::new(n, kind, values)
    }
}

/// Squared-distance matrix d^2_x of an embedding.
pub fn squared_distances(sol: &EmbeddingSolution) -> DistanceMatrix {
    DistanceMatrix::from_fn(sol.n(), MetricKind::Squared, |u, v| {
        sol.squared_distance(u, v)
    })
}

/// Euclidean distance matrix d_x of an embedding.
pub fn euclidean_distances(sol: &EmbeddingSolution) -> DistanceMatrix {
    DistanceMatrix::from_fn(sol.n(), MetricKind::Euclidean, |u, v| {
        sol.squared_distance(u, v).sqrt()
    })
}

/// Energy of a distance function w.r.t. a graph:
/// (1 / (2 r n)) * sum over edges (each once) of d(u, v).
pub fn energy(g: &Graph, d: &DistanceMatrix) -> Result<f64> {
    if d.n() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "distance matrix has n={}, graph has n={}",
            d.n(),
            g.n()
        )));
    }
    let sum: f64 = g.edges().iter().map(|&(u, v)| d.get(u, v)).sum();
    Ok(sum / (2.0 * g.degree() as f64 * g.n() as f64))
}

/// diam(S, d) = max over pairs in S.
pub fn diameter(s: &[usize], d: &DistanceMatrix) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::invalid("diameter of empty set"));
    }
    let mut worst: f64 = 0.0;
    for (i, &u) in s.iter().enumerate() {
        for &v in &s[i + 1..] {
            worst = worst.max(d.get(u, v));
        }
    }
    Ok(worst)
}

/// B_d(u, rho) = { v : d(u, v) <= rho }.
pub fn ball(u: usize, rho: f64, d: &DistanceMatrix) -> Vec<usize> {
    (0..d.n()).filter(|&v| d.get(u, v) <= rho).collect()
}

/// d(u, U) = min over v in U of d(u, v).
pub fn dist_to_set(u: usize, set: &[usize], d: &DistanceMatrix) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::invalid("distance to empty set"));
    }
    Ok(set
        .iter()
        .map(|&v| d.get(u, v))
        .fold(f64::INFINITY, f64::min))
}

/// Count of unordered pairs whose distance grew by more than `factor`.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    /// Unordered pairs with d'(u,v) > factor * d(u,v).
    pub violating_pairs: usize,
    /// Max of d'(u,v)/d(u,v) over pairs with d(u,v) > 0; infinite if some
    /// pair has d = 0 < d'.
    pub max_ratio: f64,
    /// The pair-count budget this report was tested against, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

pub fn distorted_pairs(
    d: &DistanceMatrix,
    d_prime: &DistanceMatrix,
    factor: f64,
) -> Result<DistortionReport> {
    if d.n() != d_prime.n() {
        return Err(Error::SizeMismatch(format!(
            "matrices of size {} and {}",
            d.n(),
            d_prime.n()
        )));
    }
    let mut violating = 0usize;
    let mut max_ratio: f64 = 0.0;
    for u in 0..d.n() {
        for v in (u + 1)..d.n() {
            let base = d.get(u, v);
            let new = d_prime.get(u, v);
            if new > factor * base {
                violating += 1;
            }
            if base > 0.0 {
                max_ratio = max_ratio.max(new / base);
            } else if new > 0.0 {
                max_ratio = f64::INFINITY;
            }
        }
    }
    Ok(DistortionReport {
        violating_pairs: violating,
        max_ratio,
        threshold: None,
    })
}

/// Output of the verify-and-retry Gaussian dimension reduction.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub solution: EmbeddingSolution,
    pub distortion: DistortionReport,
    /// Attempts consumed (1 = first sample already satisfied all conditions).
    pub attempts: usize,
    pub h: usize,
    pub energy_d_in: f64,
    pub energy_d_out: f64,
    pub energy_d2_in: f64,
    pub energy_d2_out: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReduceConfig {
    /// Target dimension; `None` uses ceil(48 ln(8/eps)).
    pub h_override: Option<usize>,
    pub retry_cap: usize,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            h_override: None,
            retry_cap: 64,
        }
    }
}

/// Dimension for a given distorted-pair fraction: ceil(48 ln(8/eps)), which
/// makes the per-pair halving probability at most eps/4.
pub fn reduce_dimension_for(eps: f64) -> usize {
    (48.0 * (8.0 / eps).ln()).ceil() as usize
}

/// Projects the solution to h dimensions with i.i.d. Gaussian directions,
/// z_v = h^{-1/2} (<g_1, x_v>, ..., <g_h, x_v>), and retries with fresh
/// seed-derived randomness until all three conditions hold:
/// energy(d_z) <= 4 energy(d_x), energy(d^2_z) <= 4 energy(d^2_x), and at
/// most eps*n^2 unordered pairs with d^2_x > 2 d^2_z.
pub fn gaussian_dim_reduce(
    g: &Graph,
    sol: &EmbeddingSolution,
    eps: f64,
    seed: u64,
) -> Result<Reduction> {
    gaussian_dim_reduce_with(g, sol, eps, seed, ReduceConfig::default())
}

pub fn gaussian_dim_reduce_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    eps: f64,
    seed: u64,
    cfg: ReduceConfig,
) -> Result<Reduction> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::invalid(format!(
            "distorted-pair fraction must lie in (0, 1/2], got {eps}"
        )));
    }
    if sol.n() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "solution has n={}, graph has n={}",
            sol.n(),
            g.n()
        )));
    }
    let h = cfg.h_override.unwrap_or_else(|| reduce_dimension_for(eps));
    let d2_in = squared_distances(sol);
    let d_in = euclidean_distances(sol);
    let energy_d_in = energy(g, &d_in)?;
    let energy_d2_in = energy(g, &d2_in)?;
    let budget = eps * (g.n() * g.n()) as f64;

    for attempt in 1..=cfg.retry_cap {
        let attempt_seed = derive_seed(seed, attempt as u64);
        let reduced = project_gaussian(sol, h, attempt_seed);
        let d2_out = squared_distances(&reduced);
        let d_out = euclidean_distances(&reduced);
        let energy_d_out = energy(g, &d_out)?;
        let energy_d2_out = energy(g, &d2_out)?;
        let mut distortion = distorted_pairs(&d2_out, &d2_in, 2.0)?;
        distortion.threshold = Some(budget);
        if energy_d_out <= 4.0 * energy_d_in
            && energy_d2_out <= 4.0 * energy_d2_in
            && (distortion.violating_pairs as f64) <= budget
        {
            return Ok(Reduction {
                solution: reduced,
                distortion,
                attempts: attempt,
                h,
                energy_d_in,
                energy_d_out,
                energy_d2_in,
                energy_d2_out,
            });
        }
    }
    Err(Error::RandomnessFailure {
        attempts: cfg.retry_cap,
        message: format!("dimension reduction to h={h} never satisfied all conditions"),
    })
}

/// One Gaussian projection attempt, exposed for success-rate measurement.
pub fn project_gaussian(sol: &EmbeddingSolution, h: usize, seed: u64) -> EmbeddingSolution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = sol.dim();
    let scale = 1.0 / (h as f64).sqrt();
    let dirs: Vec<Vec<f64>> = (0..h)
        .map(|_| (0..m).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let vectors: Vec<Vec<f64>> = (0..sol.n())
        .map(|v| {
            let x = sol.vector(v);
            dirs.iter()
                .map(|gdir| scale * gdir.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                .collect()
        })
        .collect();
    EmbeddingSolution::new(vectors, 0.0, SolutionKind::Reduced)
}

pub(crate) fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 step keeps derived streams decorrelated.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Frechet embedding of the squared-distance metric into l2: random subsets
/// at scales 2^-t plus one singleton coordinate per vertex, then a global
/// rescale so d_y(u,v) >= d^2_x(u,v) holds for every pair. Returns the
/// embedded solution and the measured distortion max d_y / d^2_x.
pub fn embed_l22_to_l2(sol: &EmbeddingSolution, seed: u64) -> Result<(EmbeddingSolution, f64)> {
    let n = sol.n();
    let d2 = squared_distances(sol);
    let viol = d2.max_triangle_violation();
    if viol > NEG_TYPE_TOL {
        return Err(Error::invalid(format!(
            "not a negative-type metric: triangle violation {viol:.3e}"
        )));
    }
    if d2.pair_sum() == 0.0 {
        let zero = EmbeddingSolution::new(vec![vec![0.0]; n], 0.0, SolutionKind::Embedded);
        return Ok((zero, 1.0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x0b0e));
    let levels = ((n as f64).log2().ceil() as usize).max(1);
    let reps = 2 * levels;
    let mut coords: Vec<Vec<f64>> = Vec::new();
    let rand_weight = 1.0 / ((levels * reps) as f64).sqrt();
    for t in 1..=levels {
        let p = 0.5f64.powi(t as i32);
        for _ in 0..reps {
            let subset: Vec<usize> = (0..n).filter(|_| rng.gen::<f64>() < p).collect();
            if subset.is_empty() {
                continue;
            }
            coords.push(
                (0..n)
                    .map(|v| rand_weight * dist_to_set(v, &subset, &d2).unwrap())
                    .collect(),
            );
        }
    }
    // Singleton coordinates guarantee separation of every distinct pair.
    let singleton_weight = 1.0 / (n as f64).sqrt();
    for w in 0..n {
        coords.push((0..n).map(|v| singleton_weight * d2.get(v, w)).collect());
    }

    let mut vectors: Vec<Vec<f64>> = (0..n)
        .map(|v| coords.iter().map(|c| c[v]).collect())
        .collect();

    let dist_y = |vectors: &Vec<Vec<f64>>, u: usize, v: usize| -> f64 {
        vectors[u]
            .iter()
            .zip(&vectors[v])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max: f64 = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let base = d2.get(u, v);
            if base > 0.0 {
                let r = dist_y(&vectors, u, v) / base;
                ratio_min = ratio_min.min(r);
                ratio_max = ratio_max.max(r);
            }
        }
    }
    debug_assert!(ratio_min > 0.0);
    // Tiny overshoot keeps the lower bound strict under rounding.
    let scale = (1.0 + 1e-12) / ratio_min;
    for row in &mut vectors {
        for x in row {
            *x *= scale;
        }
    }
    let distortion = ratio_max / ratio_min * (1.0 + 1e-12);
    Ok((
        EmbeddingSolution::new(vectors, 0.0, SolutionKind::Embedded),
        distortion,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::sdp::embed_integral_cut;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn energy_of_integral_cut_on_c8() {
        let g = gen::cycle(8);
        let sol = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let d2 = squared_distances(&sol);
        assert_eq!(energy(&g, &d2).unwrap(), 0.25);
    }

    #[test]
    fn energy_trivia() {
        let g = gen::complete(4);
        assert_eq!(energy(&g, &DistanceMatrix::zeros(4, MetricKind::Squared)).unwrap(), 0.0);
        let ones = DistanceMatrix::from_fn(4, MetricKind::Squared, |_, _| 1.0);
        assert_abs_diff_eq!(energy(&g, &ones).unwrap(), 0.25, epsilon = 1e-15);
        let small = DistanceMatrix::zeros(3, MetricKind::Squared);
        assert!(energy(&g, &small).is_err());
    }

    #[test]
    fn energy_is_linear() {
        let g = gen::cycle(6);
        let d1 = DistanceMatrix::from_fn(6, MetricKind::Squared, |u, v| (u + v) as f64);
        let d2 = DistanceMatrix::from_fn(6, MetricKind::Squared, |u, v| (u * v + 1) as f64);
        let combo = DistanceMatrix::from_fn(6, MetricKind::Squared, |u, v| {
            2.0 * d1.get(u, v) + 3.0 * d2.get(u, v)
        });
        let lhs = energy(&g, &combo).unwrap();
        let rhs = 2.0 * energy(&g, &d1).unwrap() + 3.0 * energy(&g, &d2).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn diameter_ball_dist_trivia() {
        let d = DistanceMatrix::from_fn(4, MetricKind::Euclidean, |u, v| (u + v) as f64);
        assert_eq!(diameter(&[2], &d).unwrap(), 0.0);
        assert!(diameter(&[], &d).is_err());
        assert_eq!(dist_to_set(1, &[1, 3], &d).unwrap(), 0.0);
        assert_eq!(ball(0, f64::INFINITY, &d), vec![0, 1, 2, 3]);
    }

    #[test]
    fn distorted_pairs_cases() {
        let d = DistanceMatrix::from_fn(4, MetricKind::Squared, |u, v| (u + v) as f64);
        let same = distorted_pairs(&d, &d, 2.0).unwrap();
        assert_eq!(same.violating_pairs, 0);

        let mut blown = d.clone();
        blown.set_sym(0, 1, 3.0 * d.get(0, 1));
        let rep = distorted_pairs(&d, &blown, 2.0).unwrap();
        assert_eq!(rep.violating_pairs, 1);
        assert_abs_diff_eq!(rep.max_ratio, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_projection_preserves_norm_on_average() {
        let sol = EmbeddingSolution::new(
            vec![vec![0.0, 0.0, 0.0], vec![3.0, -1.0, 2.0]],
            0.0,
            SolutionKind::IntegralCut,
        );
        let want = sol.squared_distance(0, 1);
        let trials = 1000;
        let mean: f64 = (0..trials)
            .map(|t| {
                let z = project_gaussian(&sol, 16, derive_seed(99, t));
                z.squared_distance(0, 1)
            })
            .sum::<f64>()
            / trials as f64;
        assert!(
            (mean - want).abs() / want < 0.05,
            "mean {mean} vs expected {want}"
        );
    }

    #[test]
    fn dim_reduce_identical_vectors_first_attempt() {
        let g = gen::complete(4);
        let sol = EmbeddingSolution::new(vec![vec![1.0, 2.0]; 4], 0.0, SolutionKind::Reduced);
        let red = gaussian_dim_reduce(&g, &sol, 0.1, 5).unwrap();
        assert_eq!(red.attempts, 1);
        assert_eq!(red.distortion.violating_pairs, 0);
    }

    #[test]
    fn dim_reduce_conditions_hold_on_c8_integral() {
        let g = gen::cycle(8);
        let sol = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let red = gaussian_dim_reduce(&g, &sol, 0.1, 7).unwrap();
        let d2_in = squared_distances(&sol);
        let d2_out = squared_distances(&red.solution);
        assert!(energy(&g, &d2_out).unwrap() <= 4.0 * energy(&g, &d2_in).unwrap());
        let count = distorted_pairs(&d2_out, &d2_in, 2.0).unwrap().violating_pairs;
        assert!(count as f64 <= 0.1 * 64.0);
        assert_eq!(count, red.distortion.violating_pairs);
    }

    #[test]
    fn embed_cut_metric_has_distortion_one() {
        let g = gen::cycle(8);
        let sol = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let (emb, distortion) = embed_l22_to_l2(&sol, 3).unwrap();
        assert_abs_diff_eq!(distortion, 1.0, epsilon = 1e-9);
        let d2 = squared_distances(&sol);
        let dy = euclidean_distances(&emb);
        for u in 0..8 {
            for v in (u + 1)..8 {
                assert!(dy.get(u, v) >= d2.get(u, v));
            }
        }
    }

    #[test]
    fn embed_uniform_metric_small_distortion() {
        // Simplex embedding: all pairs at squared distance 2.
        let n = 6;
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|v| (0..n).map(|j| if j == v { 1.0 } else { 0.0 }).collect())
            .collect();
        let sol = EmbeddingSolution::new(vectors, 0.0, SolutionKind::IntegralCut);
        let (_, distortion) = embed_l22_to_l2(&sol, 11).unwrap();
        assert!(distortion < 3.0, "distortion {distortion}");
    }

    #[test]
    fn embed_degenerate_all_coincident() {
        let sol = EmbeddingSolution::new(vec![vec![1.0]; 5], 0.0, SolutionKind::Reduced);
        let (emb, distortion) = embed_l22_to_l2(&sol, 0).unwrap();
        assert_eq!(distortion, 1.0);
        assert_eq!(squared_distances(&emb).pair_sum(), 0.0);
    }

    proptest! {
        #[test]
        fn binary_round_trip(n in 1usize..8, seed in 0u64..50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = DistanceMatrix::from_fn(n, MetricKind::Sampled, |_, _| rng.gen::<f64>() * 10.0);
            let back = DistanceMatrix::from_bytes(&d.to_bytes()).unwrap();
            prop_assert_eq!(d, back);
        }
    }
}
