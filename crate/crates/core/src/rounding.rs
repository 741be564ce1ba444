//! Rounding paths: the Frechet threshold sweep, well-spread set extraction
//! by try-and-verify, weighted separated-set search, and the two cover-based
//! rounding schemes (separated-set Frechet for ARV covers, sampled cut
//! metrics for Sherali-Adams solutions).
//!
//! Nothing here assumes an asymptotic bound: every candidate is scored or
//! verified directly, and the returned cut always carries its exact
//! recomputed expansion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{sweep_min_expansion, Cut, Graph};
use crate::metric::{
    ball, derive_seed, diameter, dist_to_set, energy, squared_distances, DistanceMatrix,
};
use crate::partition::Cover;
use crate::sdp::{sample_cut_metric, EmbeddingSolution, SaSolution};

#[derive(Debug, Clone, Copy)]
pub struct RoundingConfig {
    /// Accept an extraction-phase cut when expansion <= kappa * sdp.
    pub kappa: f64,
    /// Well-spread targets (diameter, mass coefficient) before intersection.
    pub wellspread_diam: f64,
    pub wellspread_mass: f64,
    /// Required cover fraction 1 - eps1 and the post-intersection mass.
    pub eps1: f64,
    pub intersected_mass: f64,
    /// Cover-diameter preconditions for the two rounding schemes.
    pub c3_threshold: f64,
    pub c4_threshold: f64,
    /// Far-pair distance Delta for the separated-set search.
    pub delta_far: f64,
    /// Exhaustive separated-set search limit on |C|.
    pub exhaustive_limit: usize,
    pub projection_dirs: usize,
    pub projection_thresholds: usize,
    /// Sherali-Adams sampling retry cap and edge-sum factor.
    pub sa_retry_cap: usize,
    pub sa_edge_factor: f64,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            kappa: 16.0,
            wellspread_diam: 4.0,
            wellspread_mass: 1.0 / 16.0,
            eps1: 1.0 / 128.0,
            intersected_mass: 1.0 / 32.0,
            c3_threshold: 1.0 / 256.0,
            c4_threshold: 1.0 / 256.0,
            delta_far: 1.0 / 64.0,
            exhaustive_limit: 15,
            projection_dirs: 64,
            projection_thresholds: 16,
            sa_retry_cap: 200,
            sa_edge_factor: 4.0,
        }
    }
}

/// A set of bounded squared-distance diameter carrying a constant fraction
/// of the total pair-distance mass, optionally split along a cover.
#[derive(Debug, Clone, Serialize)]
pub struct WellSpreadSet {
    pub a: Vec<usize>,
    /// Verified diameter bound (target 4).
    pub alpha_diam: f64,
    /// Verified unordered-pair mass coefficient (target 1/16, or 1/32 after
    /// intersecting with a cover).
    pub beta_mass: f64,
    pub measured_diam: f64,
    pub measured_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sub_cover: Option<SubCover>,
}

/// Disjoint split A = A_1 ∪ ... with one center per nonempty part.
#[derive(Debug, Clone, Serialize)]
pub struct SubCover {
    pub sets: Vec<Vec<usize>>,
    pub centers: Vec<usize>,
}

fn pair_mass(a: &[usize], d2: &DistanceMatrix) -> f64 {
    let mut s = 0.0;
    for (i, &u) in a.iter().enumerate() {
        for &v in &a[i + 1..] {
            s += d2.get(u, v);
        }
    }
    s
}

fn verify_well_spread(
    a: &[usize],
    d2: &DistanceMatrix,
    diam_bound: f64,
    mass_coeff: f64,
) -> Option<(f64, f64)> {
    if a.is_empty() {
        return None;
    }
    let diam = diameter(a, d2).ok()?;
    let mass = pair_mass(a, d2);
    let n = d2.n() as f64;
    if diam <= diam_bound * (1.0 + 1e-9) && mass >= mass_coeff * n * n * (1.0 - 1e-9) {
        Some((diam, mass))
    } else {
        None
    }
}

/// Frechet rounding: f(v) = d(v, U), sweep all n-1 threshold cuts, return
/// the minimum-expansion one. The returned expansion never exceeds the ratio
/// sum_E |f(u)-f(v)| / ((r/n) sum_{u<v} |f(u)-f(v)|).
pub fn frechet_round(g: &Graph, d: &DistanceMatrix, u_set: &[usize]) -> Result<Cut> {
    if u_set.is_empty() {
        return Err(Error::invalid("frechet rounding needs a nonempty U"));
    }
    if d.n() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "metric over {} points, graph over {}",
            d.n(),
            g.n()
        )));
    }
    let f: Vec<f64> = (0..g.n())
        .map(|v| dist_to_set(v, u_set, d).unwrap())
        .collect();
    let cut = sweep_min_expansion(g, &f).ok_or_else(|| {
        Error::DegenerateInput("all Frechet values coincide; no threshold separates".into())
    })?;
    debug_assert!({
        let num: f64 = g.edges().iter().map(|&(u, v)| (f[u] - f[v]).abs()).sum();
        let mut pair_sum = 0.0;
        for u in 0..g.n() {
            for v in (u + 1)..g.n() {
                pair_sum += (f[u] - f[v]).abs();
            }
        }
        let ratio = num / (g.degree() as f64 / g.n() as f64 * pair_sum);
        cut.expansion_f64() <= ratio + 1e-9
    });
    Ok(cut)
}

/// The sweep guarantee of `frechet_round` for the same inputs, exposed for
/// direct numeric assertion.
pub fn frechet_ratio(g: &Graph, d: &DistanceMatrix, u_set: &[usize]) -> Result<f64> {
    let f: Vec<f64> = (0..g.n())
        .map(|v| dist_to_set(v, u_set, d).unwrap())
        .collect();
    let num: f64 = g.edges().iter().map(|&(u, v)| (f[u] - f[v]).abs()).sum();
    let mut pair_sum = 0.0;
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            pair_sum += (f[u] - f[v]).abs();
        }
    }
    if pair_sum == 0.0 {
        return Err(Error::DegenerateInput("all Frechet values coincide".into()));
    }
    Ok(num / (g.degree() as f64 / g.n() as f64 * pair_sum))
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ExtractOutcome {
    Cut { cut: Cut },
    WellSpread { set: WellSpreadSet },
}

/// Try-and-verify extraction: for each candidate center, attempt a Frechet
/// cut from U = B(c, 1/4) (accepted when expansion <= kappa * sdp), then
/// test balls B(c, 2) and B(c, 4) for (4, 1/16)-well-spreadness. The
/// verifier is the single source of truth for whichever branch returns.
pub fn wellspread_extract(g: &Graph, sol: &EmbeddingSolution) -> Result<ExtractOutcome> {
    wellspread_extract_with(g, sol, RoundingConfig::default())
}

pub fn wellspread_extract_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    cfg: RoundingConfig,
) -> Result<ExtractOutcome> {
    let d2 = squared_distances(sol);
    let sdp_value = energy(g, &d2)?;
    let best_cut = best_ball_sweep(g, &d2);
    if let Some(cut) = &best_cut {
        if cut.expansion_f64() <= cfg.kappa * sdp_value {
            return Ok(ExtractOutcome::Cut { cut: cut.clone() });
        }
    }
    if let Some(set) = first_well_spread(&d2, &cfg) {
        return Ok(ExtractOutcome::WellSpread { set });
    }
    Err(Error::ExtractionFailure(format!(
        "no cut within kappa*sdp = {:.6} (best {:?}) and no ({}, {})-well-spread ball",
        cfg.kappa * sdp_value,
        best_cut.map(|c| c.expansion_f64()),
        cfg.wellspread_diam,
        cfg.wellspread_mass
    )))
}

fn best_ball_sweep(g: &Graph, d2: &DistanceMatrix) -> Option<Cut> {
    let mut best: Option<Cut> = None;
    for c in 0..g.n() {
        let u_set = ball(c, 0.25, d2);
        if let Ok(cut) = frechet_round(g, d2, &u_set) {
            let better = match &best {
                None => true,
                Some(b) => {
                    cut.expansion < b.expansion
                        || (cut.expansion == b.expansion
                            && (cut.s.len() < b.s.len()
                                || (cut.s.len() == b.s.len() && cut.s < b.s)))
                }
            };
            if better {
                best = Some(cut);
            }
        }
    }
    best
}

fn first_well_spread(d2: &DistanceMatrix, cfg: &RoundingConfig) -> Option<WellSpreadSet> {
    for radius in [cfg.wellspread_diam / 2.0, cfg.wellspread_diam] {
        for c in 0..d2.n() {
            let w = ball(c, radius, d2);
            if let Some((diam, mass)) =
                verify_well_spread(&w, d2, cfg.wellspread_diam, cfg.wellspread_mass)
            {
                return Some(WellSpreadSet {
                    a: w,
                    alpha_diam: cfg.wellspread_diam,
                    beta_mass: cfg.wellspread_mass,
                    measured_diam: diam,
                    measured_mass: mass,
                    sub_cover: None,
                });
            }
        }
    }
    None
}

/// Well-spread set intersected with a cover and split along it: the rounding
/// schemes consume A = W ∩ (∪ T_i) as disjoint parts A_i with one center
/// each. Aborts if the intersection misses the (diam, 1/32) verification.
pub fn wellspread_subcover(
    g: &Graph,
    sol: &EmbeddingSolution,
    cover: &Cover,
    cfg: RoundingConfig,
) -> Result<WellSpreadSet> {
    let d2 = squared_distances(sol);
    if (cover.covered_count as f64) < (1.0 - cfg.eps1) * g.n() as f64 - 1e-9 {
        return Err(Error::invalid(format!(
            "cover reaches {} of {} vertices, below the 1 - {} requirement",
            cover.covered_count,
            g.n(),
            cfg.eps1
        )));
    }
    let w = first_well_spread(&d2, &cfg).ok_or_else(|| {
        Error::ExtractionFailure("no (4, 1/16)-well-spread ball to intersect".into())
    })?;
    let mut in_w = vec![false; g.n()];
    for &v in &w.a {
        in_w[v] = true;
    }
    let mut assigned = vec![false; g.n()];
    let mut sets = Vec::new();
    let mut centers = Vec::new();
    for t in &cover.sets {
        let part: Vec<usize> = t
            .iter()
            .copied()
            .filter(|&v| in_w[v] && !assigned[v])
            .collect();
        for &v in &part {
            assigned[v] = true;
        }
        if !part.is_empty() {
            centers.push(part[0]);
            sets.push(part);
        }
    }
    let mut a: Vec<usize> = sets.iter().flatten().copied().collect();
    a.sort_unstable();
    let (measured_diam, measured_mass) =
        verify_well_spread(&a, &d2, cfg.wellspread_diam, cfg.intersected_mass).ok_or_else(
            || {
                Error::ExtractionFailure(format!(
                    "intersected set misses the ({}, {}) verification: |A|={}, mass={:.4}",
                    cfg.wellspread_diam,
                    cfg.intersected_mass,
                    a.len(),
                    pair_mass(&a, &d2)
                ))
            },
        )?;
    Ok(WellSpreadSet {
        a,
        alpha_diam: cfg.wellspread_diam,
        beta_mass: cfg.intersected_mass,
        measured_diam,
        measured_mass,
        sub_cover: Some(SubCover { sets, centers }),
    })
}

/// Weighted separated-set search: maximize
/// sum_{u<v in C} w(u) w(v) |d2(u,U) - d2(v,U)| over U ⊆ C.
/// Exhaustive for |C| <= exhaustive_limit, otherwise random-projection
/// threshold candidates. The score is reported, never assumed.
pub fn separated_sets(
    c_set: &[usize],
    weights: &[f64],
    d2: &DistanceMatrix,
    delta_far: f64,
    seed: u64,
) -> Result<(Vec<usize>, f64)> {
    separated_sets_with(c_set, weights, d2, delta_far, seed, RoundingConfig::default())
}

pub fn separated_sets_with(
    c_set: &[usize],
    weights: &[f64],
    d2: &DistanceMatrix,
    delta_far: f64,
    seed: u64,
    cfg: RoundingConfig,
) -> Result<(Vec<usize>, f64)> {
    if c_set.len() != weights.len() {
        return Err(Error::SizeMismatch(format!(
            "{} vertices vs {} weights",
            c_set.len(),
            weights.len()
        )));
    }
    let far_mass: f64 = {
        let mut s = 0.0;
        for (i, &u) in c_set.iter().enumerate() {
            for (j, &v) in c_set.iter().enumerate().skip(i + 1) {
                if d2.get(u, v) >= delta_far {
                    s += weights[i] * weights[j];
                }
            }
        }
        s
    };
    if far_mass <= 0.0 {
        return Err(Error::invalid(format!(
            "no weighted pair at distance >= {delta_far}; nothing to separate"
        )));
    }

    let score = |u_mask: u64| -> f64 {
        let u_set: Vec<usize> = c_set
            .iter()
            .enumerate()
            .filter(|(i, _)| (u_mask >> i) & 1 == 1)
            .map(|(_, &v)| v)
            .collect();
        if u_set.is_empty() {
            return 0.0;
        }
        let fs: Vec<f64> = c_set
            .iter()
            .map(|&v| dist_to_set(v, &u_set, d2).unwrap())
            .collect();
        let mut total = 0.0;
        for i in 0..c_set.len() {
            for j in (i + 1)..c_set.len() {
                total += weights[i] * weights[j] * (fs[i] - fs[j]).abs();
            }
        }
        total
    };

    let q = c_set.len();
    let mut best_mask = 0u64;
    let mut best_score = f64::NEG_INFINITY;
    if q <= cfg.exhaustive_limit {
        for mask in 1..(1u64 << q) {
            let s = score(mask);
            if s > best_score {
                best_score = s;
                best_mask = mask;
            }
        }
    } else {
        use rand::Rng;
        use rand::SeedableRng;
        let coords = classical_mds(c_set, d2);
        let dim = coords[0].len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..cfg.projection_dirs {
            let dir: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let projs: Vec<f64> = coords
                .iter()
                .map(|x| x.iter().zip(&dir).map(|(a, b)| a * b).sum())
                .collect();
            let lo = projs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = projs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for step in 0..cfg.projection_thresholds {
                let t = lo + (hi - lo) * (step as f64 + 0.5) / cfg.projection_thresholds as f64;
                let mask = projs
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p >= t)
                    .fold(0u64, |m, (i, _)| m | (1 << i));
                if mask == 0 {
                    continue;
                }
                let s = score(mask);
                if s > best_score {
                    best_score = s;
                    best_mask = mask;
                }
            }
        }
        if best_mask == 0 {
            best_mask = 1;
            best_score = score(1);
        }
    }
    let u_set: Vec<usize> = c_set
        .iter()
        .enumerate()
        .filter(|(i, _)| (best_mask >> i) & 1 == 1)
        .map(|(_, &v)| v)
        .collect();
    Ok((u_set, best_score))
}

/// Coordinates for the restriction of d2 to `c_set` via classical MDS.
fn classical_mds(c_set: &[usize], d2: &DistanceMatrix) -> Vec<Vec<f64>> {
    use nalgebra::DMatrix;
    let q = c_set.len();
    let mut gram = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            gram[(i, j)] = -0.5 * d2.get(c_set[i], c_set[j]);
        }
    }
    let row_mean = gram.column_sum() / q as f64;
    let total = row_mean.sum() / q as f64;
    for i in 0..q {
        for j in 0..q {
            gram[(i, j)] += total - row_mean[i] - row_mean[j];
        }
    }
    let eig = gram.symmetric_eigen();
    let kept: Vec<usize> = (0..q).filter(|&i| eig.eigenvalues[i] > 1e-12).collect();
    if kept.is_empty() {
        return vec![vec![0.0]; q];
    }
    (0..q)
        .map(|i| {
            kept.iter()
                .map(|&e| eig.eigenvalues[e].sqrt() * eig.eigenvectors[(i, e)])
                .collect()
        })
        .collect()
}

/// A rounded cut with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct RoundedCut {
    #[serde(flatten)]
    pub cut: Cut,
    pub method: String,
    pub seed: u64,
    pub trace: RoundingTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingTrace {
    pub sdp_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub well_spread: Option<WellSpreadSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separated_set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separated_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa_attempts: Option<usize>,
    /// Failure counts per sampled-metric condition (edge sum, pair mass,
    /// center distance).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sa_condition_failures: Option<[usize; 3]>,
}

/// ARV rounding over a low-diameter cover: extraction shortcut when a sweep
/// cut already meets kappa * sdp, otherwise the separated-set Frechet path
/// through the cover's centers.
pub fn round_arv(
    g: &Graph,
    sol: &EmbeddingSolution,
    cover: &Cover,
    seed: u64,
) -> Result<RoundedCut> {
    round_arv_with(g, sol, cover, seed, RoundingConfig::default())
}

pub fn round_arv_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    cover: &Cover,
    seed: u64,
    cfg: RoundingConfig,
) -> Result<RoundedCut> {
    let d2 = squared_distances(sol);
    if cover.max_diameter() > cfg.c3_threshold * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "cover diameter {:.6} exceeds the configured threshold {:.6}",
            cover.max_diameter(),
            cfg.c3_threshold
        )));
    }
    let sdp_value = energy(g, &d2)?;
    let mut trace = RoundingTrace {
        sdp_value,
        well_spread: None,
        separated_set: None,
        separated_score: None,
        sa_attempts: None,
        sa_condition_failures: None,
    };
    let mut best: Option<(Cut, String)> = None;
    if let Some(cut) = best_ball_sweep(g, &d2) {
        if cut.expansion_f64() <= cfg.kappa * sdp_value {
            return Ok(RoundedCut {
                cut,
                method: "wellspread-cut".into(),
                seed,
                trace,
            });
        }
        best = Some((cut, "wellspread-cut".into()));
    }

    let ws = wellspread_subcover(g, sol, cover, cfg)?;
    let sub = ws.sub_cover.clone().expect("subcover populated");
    let weights: Vec<f64> = sub.sets.iter().map(|s| s.len() as f64).collect();
    trace.well_spread = Some(ws.clone());
    let (u_set, sep_score) = separated_sets_with(
        &sub.centers,
        &weights,
        &d2,
        cfg.delta_far / 2.0,
        derive_seed(seed, 40),
        cfg,
    )?;
    trace.separated_set = Some(u_set.clone());
    trace.separated_score = Some(sep_score);
    let cut = frechet_round(g, &d2, &u_set)?;
    let (cut, method) = match best {
        Some((b, m)) if b.expansion <= cut.expansion => (b, m),
        _ => (cut, "separated-frechet".into()),
    };
    Ok(RoundedCut {
        cut,
        method,
        seed,
        trace,
    })
}

/// Sherali-Adams rounding: sample cut metrics until one passes the three
/// proof conditions (edge sum, well-spread pair mass, center distances),
/// then sweep f(v) = D(a_1, v).
pub fn round_sa(
    g: &Graph,
    sol: &EmbeddingSolution,
    sa: &SaSolution,
    cover: &Cover,
    seed: u64,
) -> Result<RoundedCut> {
    round_sa_with(g, sol, sa, cover, seed, RoundingConfig::default())
}

pub fn round_sa_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    sa: &SaSolution,
    cover: &Cover,
    seed: u64,
    cfg: RoundingConfig,
) -> Result<RoundedCut> {
    let d2 = squared_distances(sol);
    if cover.max_diameter() > cfg.c4_threshold * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "cover diameter {:.6} exceeds the configured threshold {:.6}",
            cover.max_diameter(),
            cfg.c4_threshold
        )));
    }
    let ws = wellspread_subcover(g, sol, cover, cfg)?;
    let sub = ws.sub_cover.clone().expect("subcover populated");
    if sub.centers != sa.representatives {
        return Err(Error::invalid(format!(
            "SA solution solved for representatives {:?}, cover derives {:?}",
            sa.representatives, sub.centers
        )));
    }
    let n = g.n();
    let mut center_of = vec![usize::MAX; n];
    for (part, &c) in sub.sets.iter().zip(&sub.centers) {
        for &v in part {
            center_of[v] = c;
        }
    }
    let edge_sum_d2: f64 = g.edges().iter().map(|&(u, v)| d2.get(u, v)).sum();
    let c4_prime = 100.0 * cover.max_diameter().max(1e-9);
    let sdp_value = energy(g, &d2)?;

    let mut failures = [0usize; 3];
    for attempt in 0..cfg.sa_retry_cap {
        let metric = sample_cut_metric(sa, derive_seed(seed, 1000 + attempt as u64))?;
        let edge_sum: f64 = g.edges().iter().map(|&(u, v)| metric.get(u, v)).sum();
        if edge_sum > cfg.sa_edge_factor * edge_sum_d2 + 1e-9 {
            failures[0] += 1;
            continue;
        }
        let mass = pair_mass(&ws.a, &metric);
        if mass < (n * n) as f64 / 64.0 * (1.0 - 1e-9) {
            failures[1] += 1;
            continue;
        }
        let center_dist: f64 = ws.a.iter().map(|&v| metric.get(v, center_of[v])).sum();
        if center_dist > c4_prime * ws.a.len() as f64 + 1e-9 {
            failures[2] += 1;
            continue;
        }
        let cut = frechet_round(g, &metric, &[sub.centers[0]])?;
        return Ok(RoundedCut {
            cut,
            method: "sa-frechet".into(),
            seed,
            trace: RoundingTrace {
                sdp_value,
                well_spread: Some(ws),
                separated_set: None,
                separated_score: None,
                sa_attempts: Some(attempt + 1),
                sa_condition_failures: Some(failures),
            },
        });
    }
    Err(Error::SamplingFailure {
        attempts: cfg.sa_retry_cap,
        message: format!(
            "no sampled metric passed all conditions (edge-sum fails {}, pair-mass fails {}, center-distance fails {})",
            failures[0], failures[1], failures[2]
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::metric::MetricKind;
    use crate::oracle::brute_phi;
    use crate::partition::greedy_ball_cover;
    use crate::sdp::{embed_integral_cut, solve_arv, solve_sa_for_set};
    use num_rational::Ratio;

    #[test]
    fn frechet_recovers_planted_cut_from_cut_metric() {
        let g = gen::cycle(8);
        let s = [0usize, 1, 2, 3];
        let sol = embed_integral_cut(&g, &s).unwrap();
        let d2 = squared_distances(&sol);
        let cut = frechet_round(&g, &d2, &s).unwrap();
        assert_eq!(cut.s, s.to_vec());
        assert_eq!(cut.expansion, Ratio::new(1, 4));
        assert!(cut.expansion_f64() <= frechet_ratio(&g, &d2, &s).unwrap() + 1e-9);
    }

    #[test]
    fn frechet_degenerate_zero_metric() {
        let g = gen::cycle(6);
        let d = DistanceMatrix::zeros(6, MetricKind::Squared);
        assert!(matches!(
            frechet_round(&g, &d, &[0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn extraction_on_integral_solution_returns_cut() {
        let g = gen::cycle(8);
        let sol = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        match wellspread_extract(&g, &sol).unwrap() {
            ExtractOutcome::Cut { cut } => {
                assert_eq!(cut.expansion, Ratio::new(1, 4));
            }
            other => panic!("expected cut branch, got {other:?}"),
        }
    }

    #[test]
    fn extraction_on_arv_solution_verifies_either_branch() {
        let g = gen::cycle(8);
        let sol = solve_arv(&g, 1e-6).unwrap();
        let d2 = squared_distances(&sol);
        match wellspread_extract(&g, &sol).unwrap() {
            ExtractOutcome::Cut { cut } => {
                let sdp = energy(&g, &d2).unwrap();
                assert!(cut.expansion_f64() <= 16.0 * sdp + 1e-9);
            }
            ExtractOutcome::WellSpread { set } => {
                assert!(set.measured_diam <= 4.0 * (1.0 + 1e-9));
                assert!(set.measured_mass >= 64.0 / 16.0 * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn antipodal_clusters_have_well_spread_whole_set() {
        // Balanced antipodal clusters at squared distance 4: W = V verifies
        // (4, 1/16) with the radius-4 candidate.
        let mut vectors = vec![vec![0.0]; 8];
        for v in vectors.iter_mut().take(4) {
            *v = vec![2.0];
        }
        let sol = EmbeddingSolution::new(vectors, 0.0, crate::sdp::SolutionKind::Reduced);
        assert_eq!(sol.pair_sum(), 64.0);
        let d2 = squared_distances(&sol);
        let cfg = RoundingConfig::default();
        let ws = first_well_spread(&d2, &cfg).unwrap();
        assert_eq!(ws.a.len(), 8);
        assert_eq!(ws.measured_diam, 4.0);
        assert_eq!(ws.measured_mass, 64.0);
    }

    #[test]
    fn separated_sets_two_locations_exact() {
        // Two point-locations, distance 4, weights 3 and 5.
        let d2 = DistanceMatrix::from_fn(2, MetricKind::Squared, |_, _| 4.0);
        let (u, score) = separated_sets(&[0, 1], &[3.0, 5.0], &d2, 1.0, 0).unwrap();
        assert_eq!(score, 3.0 * 5.0 * 4.0);
        assert!(u == vec![0] || u == vec![1]);

        let single = DistanceMatrix::zeros(1, MetricKind::Squared);
        assert!(separated_sets(&[0], &[1.0], &single, 0.5, 0).is_err());
    }

    #[test]
    fn separated_sets_projection_matches_exhaustive_on_simplex() {
        let q = 8;
        let d2 = DistanceMatrix::from_fn(q, MetricKind::Squared, |_, _| 2.0);
        let c: Vec<usize> = (0..q).collect();
        let w = vec![1.0; q];
        let (_, exact) = separated_sets(&c, &w, &d2, 1.0, 3).unwrap();
        let mut cfg = RoundingConfig {
            exhaustive_limit: 0,
            ..RoundingConfig::default()
        };
        cfg.projection_dirs = 128;
        let (_, heur) = separated_sets_with(&c, &w, &d2, 1.0, 3, cfg).unwrap();
        assert!(heur <= exact + 1e-9, "heuristic cannot beat the optimum");
        assert!(heur >= 0.5 * exact, "heuristic {heur} vs exact {exact}");
    }

    #[test]
    fn round_arv_recovers_planted_cut() {
        let g = gen::clique_ring(2, 8);
        let (s, phi) = gen::clique_ring_planted_cut(2, 8);
        let sol = embed_integral_cut(&g, &s).unwrap();
        let d2 = squared_distances(&sol);
        let cover = greedy_ball_cover(&d2, 1.0 / 256.0, 4);
        let rounded = round_arv(&g, &sol, &cover, 7).unwrap();
        assert_eq!(rounded.cut.expansion, phi);
    }

    #[test]
    fn round_arv_deep_path_with_zero_kappa() {
        // kappa = 0 forbids the extraction shortcut, forcing the separated
        // set machinery; the result must still be a valid cut.
        let g = gen::clique_ring(2, 8);
        let (s, _) = gen::clique_ring_planted_cut(2, 8);
        let sol = embed_integral_cut(&g, &s).unwrap();
        let d2 = squared_distances(&sol);
        let cover = greedy_ball_cover(&d2, 1.0 / 256.0, 4);
        let cfg = RoundingConfig {
            kappa: 0.0,
            ..RoundingConfig::default()
        };
        let rounded = round_arv_with(&g, &sol, &cover, 3, cfg).unwrap();
        // The deep path ran (separated set populated); the returned cut is
        // the best seen, which may still be the sweep candidate.
        assert!(rounded.trace.separated_set.is_some());
        assert!(rounded.trace.separated_score.unwrap() > 0.0);
        let brute = brute_phi(&g).unwrap().value;
        assert!(rounded.cut.expansion >= brute);
    }

    #[test]
    fn round_sa_disjoint_cliques_reaches_zero() {
        let g = gen::disjoint_cliques(2, 4);
        let sol_cut = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let d2 = squared_distances(&sol_cut);
        let cover = greedy_ball_cover(&d2, 1.0 / 256.0, 4);
        let cfg = RoundingConfig {
            kappa: 0.0,
            ..RoundingConfig::default()
        };
        let ws = wellspread_subcover(&g, &sol_cut, &cover, cfg).unwrap();
        let centers = ws.sub_cover.unwrap().centers;
        let (sol, sa) = solve_sa_for_set(&g, &centers, 1e-6).unwrap();
        // The solved solution must stay compatible with the same cover.
        let rounded = round_sa(&g, &sol, &sa, &cover, 5);
        match rounded {
            Ok(r) => assert_eq!(r.cut.expansion, Ratio::new(0, 1)),
            Err(e) => panic!("round_sa failed: {e}"),
        }
    }

    #[test]
    fn round_sa_integral_witness_recovers_cut() {
        // Hand-built SA witness concentrated on the planted pattern.
        let g = gen::clique_ring(2, 8);
        let (s, phi) = gen::clique_ring_planted_cut(2, 8);
        let sol = embed_integral_cut(&g, &s).unwrap();
        let d2 = squared_distances(&sol);
        let cover = greedy_ball_cover(&d2, 1.0 / 256.0, 4);
        let ws = wellspread_subcover(&g, &sol, &cover, RoundingConfig::default()).unwrap();
        let centers = ws.sub_cover.unwrap().centers;
        // Pattern index: bit i set iff centers[i] is in S.
        let pattern: usize = centers
            .iter()
            .enumerate()
            .filter(|(_, &c)| s.contains(&c))
            .fold(0, |m, (i, _)| m | (1 << i));
        let b_count = 1 << centers.len();
        let mut d = vec![DistanceMatrix::zeros(g.n(), MetricKind::Squared); b_count];
        d[pattern] = d2.clone();
        let mut p = vec![0.0; b_count];
        p[pattern] = 1.0;
        let sa = SaSolution {
            representatives: centers,
            p,
            d,
            tol: 1e-9,
        };
        let rounded = round_sa(&g, &sol, &sa, &cover, 42).unwrap();
        assert_eq!(rounded.cut.expansion, phi);
        assert_eq!(rounded.trace.sa_attempts, Some(1));
    }
}
