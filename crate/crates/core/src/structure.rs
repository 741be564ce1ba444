//! The two structure pipelines: given a feasible solution and k, either
//! produce a cover by 2k sets of small squared-distance diameter covering a
//! (1 - eps) fraction of vertices, or a verifiable certificate (disjointly
//! supported functions bounding lambda_k, or disjoint sets bounding phi_k).
//!
//! Universal constants are replaced by measured quantities recorded in the
//! trace; every intermediate parameter of the proofs (h, alpha, retry
//! counts, distorted-pair counts, interior sizes) is reported for audit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metric::{
    derive_seed, distorted_pairs, embed_l22_to_l2, energy, euclidean_distances,
    gaussian_dim_reduce_with, squared_distances, DistanceMatrix, ReduceConfig,
};
use crate::oracle::{brute_phi_k, verify_certificate, verify_cover};
use crate::partition::{
    bump_functions, cover_transfer, interior_of_set, lipschitz_partition, merge_small,
    padded_partition, Certificate, Cover,
};
use crate::sdp::{check_feasibility, EmbeddingSolution};

#[derive(Debug, Clone, Copy)]
pub struct StructureConfig {
    /// Residual tolerance for accepting the input solution.
    pub feasibility_tol: f64,
    pub reduce: ReduceConfig,
    /// Cap on partition resampling while waiting for the interior-mass bound.
    pub partition_retry_cap: usize,
    /// Trials for the empirical Lipschitz estimate recorded in the trace
    /// (0 skips the measurement).
    pub lipschitz_trials: usize,
}

impl Default for StructureConfig {
    fn default() -> Self {
        StructureConfig {
            feasibility_tol: 1e-5,
            reduce: ReduceConfig::default(),
            partition_retry_cap: 64,
            lipschitz_trials: 0,
        }
    }
}

/// Everything the pipelines measured on the way to their outcome.
#[derive(Debug, Clone, Serialize)]
pub struct StructureTrace {
    pub pipeline: &'static str,
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub h: usize,
    pub dim_reduce_attempts: usize,
    pub partition_attempts: usize,
    /// Padding parameter (lambda) or carving parameter (phi).
    pub alpha: f64,
    /// Measured distortion of the l2^2 -> l2 embedding (phi pipeline only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding_distortion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_estimate: Option<f64>,
    pub distorted_pair_budget: f64,
    pub distorted_pair_count: usize,
    /// Interior sizes (lambda) or block sizes (phi), descending.
    pub block_weights: Vec<usize>,
    pub top_2k_weight: usize,
    pub cover_condition_threshold: f64,
    pub energy_d2_x: f64,
    pub energy_d_z: f64,
    pub energy_d2_z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_d_y: Option<f64>,
    /// Upper bound the certificate branch could ever report
    /// (2 max R or max phi ceiling, from measured quantities).
    pub certificate_ceiling: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_cover_diameter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merged_min_weight: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "branch", rename_all = "kebab-case")]
pub enum StructureBranch {
    Cover { cover: Cover },
    Certificate { certificate: Certificate },
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureOutcome {
    #[serde(flatten)]
    pub branch: StructureBranch,
    pub trace: StructureTrace,
}

impl StructureOutcome {
    pub fn cover(&self) -> Option<&Cover> {
        match &self.branch {
            StructureBranch::Cover { cover } => Some(cover),
            _ => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match &self.branch {
            StructureBranch::Certificate { certificate } => Some(certificate),
            _ => None,
        }
    }
}

fn validate_params(k: usize, eps: f64, delta: f64) -> Result<()> {
    if k < 1 {
        return Err(Error::invalid("need k >= 1"));
    }
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "need eps, delta in (0,1), got eps={eps}, delta={delta}"
        )));
    }
    Ok(())
}

/// Cover-or-spectral-certificate pipeline: dimension reduction, padded grid
/// partition ordered by interior size, and either a transfer of the top 2k
/// blocks back to d^2_x or bump functions over greedily merged blocks.
pub fn cover_via_lambda(
    g: &Graph,
    sol: &EmbeddingSolution,
    k: usize,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<StructureOutcome> {
    cover_via_lambda_with(g, sol, k, eps, delta, seed, StructureConfig::default())
}

#[allow(clippy::too_many_arguments)]
pub fn cover_via_lambda_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    k: usize,
    eps: f64,
    delta: f64,
    seed: u64,
    cfg: StructureConfig,
) -> Result<StructureOutcome> {
    validate_params(k, eps, delta)?;
    let feas = check_feasibility(sol, cfg.feasibility_tol);
    if !feas.pass {
        return Err(Error::invalid(format!(
            "solution infeasible: triangle {:.3e}, normalization {:.3e}",
            feas.max_triangle_violation, feas.normalization_residual
        )));
    }
    let n = g.n();
    let d2x = squared_distances(sol);
    let energy_d2_x = energy(g, &d2x)?;

    // Triangle residuals of d^2_x enlarge ball diameters during transfer;
    // shrink the working delta so the final cover meets the stated one.
    let delta_eff = delta - 2.0 * cfg.feasibility_tol;
    if delta_eff <= 0.0 {
        return Err(Error::invalid(format!(
            "delta = {delta} too small against feasibility tolerance"
        )));
    }

    let eps_pairs = (eps.powi(3) / (512.0 * (k * k) as f64)).min(0.5);
    let reduction = gaussian_dim_reduce_with(g, sol, eps_pairs, derive_seed(seed, 1), cfg.reduce)?;
    let z = &reduction.solution;
    let dz = euclidean_distances(z);
    let d2z = squared_distances(z);
    let energy_d_z = energy(g, &dz)?;
    let energy_d2_z = energy(g, &d2z)?;

    let eps_p = eps / 2.0;
    let delta_z = (delta_eff / 4.0).sqrt();
    let pad_eps = eps_p / 4.0;

    // Resample until the total interior mass obeys the Markov bound.
    let mut chosen = None;
    let mut partition_attempts = 0;
    for attempt in 0..cfg.partition_retry_cap {
        partition_attempts = attempt + 1;
        let p = padded_partition(z, delta_z, pad_eps, derive_seed(seed, 100 + attempt as u64))?;
        let rho = delta_z / p.param;
        let interiors: Vec<Vec<usize>> = p
            .blocks
            .iter()
            .map(|b| interior_of_set(b, rho, &dz))
            .collect();
        let mass: usize = interiors.iter().map(|i| i.len()).sum();
        if mass as f64 >= (1.0 - eps_p / 2.0) * n as f64 - 1e-9 {
            chosen = Some((p, interiors, rho));
            break;
        }
    }
    let (partition, interiors, rho) = chosen.ok_or(Error::RandomnessFailure {
        attempts: cfg.partition_retry_cap,
        message: "padded partition never reached the interior-mass bound".into(),
    })?;
    let alpha = partition.param;

    // Blocks ordered by interior size, descending (ties by first vertex).
    let mut order: Vec<usize> = (0..partition.blocks.len()).collect();
    order.sort_by(|&a, &b| {
        interiors[b]
            .len()
            .cmp(&interiors[a].len())
            .then(partition.blocks[a][0].cmp(&partition.blocks[b][0]))
    });
    let block_weights: Vec<usize> = order.iter().map(|&i| interiors[i].len()).collect();
    let top_2k_weight: usize = block_weights.iter().take(2 * k).sum();
    let cover_condition_threshold = (1.0 - eps_p) * n as f64;
    let certificate_ceiling =
        64.0 * alpha * alpha * energy_d2_z / (eps_p * delta_z * delta_z);

    let mut trace = StructureTrace {
        pipeline: "lambda",
        k,
        eps,
        delta,
        h: reduction.h,
        dim_reduce_attempts: reduction.attempts,
        partition_attempts,
        alpha,
        embedding_distortion: None,
        lipschitz_estimate: None,
        distorted_pair_budget: eps_pairs * (n * n) as f64,
        distorted_pair_count: reduction.distortion.violating_pairs,
        block_weights: block_weights.clone(),
        top_2k_weight,
        cover_condition_threshold,
        energy_d2_x,
        energy_d_z,
        energy_d2_z,
        energy_d_y: None,
        certificate_ceiling,
        coverage: None,
        max_cover_diameter: None,
        merged_min_weight: None,
        certificate_values: None,
    };

    if top_2k_weight as f64 >= cover_condition_threshold - 1e-9 {
        let top_blocks: Vec<Vec<usize>> = order
            .iter()
            .take(2 * k)
            .map(|&i| partition.blocks[i].clone())
            .collect();
        let mut cover = cover_transfer(&top_blocks, &d2z, &d2x, delta_eff / 4.0, eps_p)?;
        while cover.sets.len() < 2 * k {
            cover.sets.push(Vec::new());
            cover.diameters.push(0.0);
        }
        if !verify_cover(&cover, &d2x, delta, eps) {
            return Err(Error::ExtractionFailure(format!(
                "transferred cover failed verification: coverage {}, max diameter {:.6}",
                cover.covered_count,
                cover.max_diameter()
            )));
        }
        trace.coverage = Some(cover.covered_count);
        trace.max_cover_diameter = Some(cover.max_diameter());
        return Ok(StructureOutcome {
            branch: StructureBranch::Cover { cover },
            trace,
        });
    }

    // Merge all blocks into 2k sets weighted by interior size, rebuild the
    // merged interiors, and keep the k bump functions of smallest edge sum.
    let interior_weight: Vec<u64> = (0..partition.blocks.len())
        .map(|i| interiors[i].len() as u64)
        .collect();
    let indexed: Vec<Vec<usize>> = order.iter().map(|&i| partition.blocks[i].clone()).collect();
    let indexed_weights: Vec<u64> = order.iter().map(|&i| interior_weight[i]).collect();
    let merged = {
        let lookup: std::collections::HashMap<usize, u64> = indexed
            .iter()
            .zip(&indexed_weights)
            .map(|(b, &w)| (b[0], w))
            .collect();
        merge_small(&indexed, 2 * k, |s| {
            s.iter().filter_map(|v| lookup.get(v)).sum()
        })
    };
    trace.merged_min_weight = Some(merged.iter().map(|(_, w)| *w).min().unwrap_or(0));
    let merged_sets: Vec<Vec<usize>> = merged.iter().map(|(s, _)| s.clone()).collect();
    let merged_interiors: Vec<Vec<usize>> = merged_sets
        .iter()
        .map(|s| interior_of_set(s, rho, &dz))
        .collect();
    let fs = bump_functions(&merged_sets, &merged_interiors, alpha, delta_z, &dz)?;

    let edge_sum = |f: &Vec<f64>| -> f64 {
        g.edges()
            .iter()
            .map(|&(u, v)| (f[u] - f[v]) * (f[u] - f[v]))
            .sum()
    };
    let mut by_numerator: Vec<usize> = (0..fs.len()).collect();
    by_numerator.sort_by(|&a, &b| edge_sum(&fs[a]).total_cmp(&edge_sum(&fs[b])).then(a.cmp(&b)));
    let chosen_fs: Vec<Vec<f64>> = by_numerator[..k].iter().map(|&i| fs[i].clone()).collect();

    let certificate = Certificate::Spectral {
        functions: chosen_fs,
    };
    let report = verify_certificate(g, &certificate)?;
    trace.certificate_values = Some(report.values);
    Ok(StructureOutcome {
        branch: StructureBranch::Certificate { certificate },
        trace,
    })
}

/// Cover-or-expansion-certificate pipeline: embed d^2_x into l2, reduce
/// dimension, carve a Lipschitz partition ordered by block size, and either
/// transfer the top 2k blocks (diameters conclude through d^2_x <= d_y) or
/// merge and report k disjoint sets of smallest expansion.
pub fn cover_via_phi(
    g: &Graph,
    sol: &EmbeddingSolution,
    k: usize,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<StructureOutcome> {
    cover_via_phi_with(g, sol, k, eps, delta, seed, StructureConfig::default())
}

#[allow(clippy::too_many_arguments)]
pub fn cover_via_phi_with(
    g: &Graph,
    sol: &EmbeddingSolution,
    k: usize,
    eps: f64,
    delta: f64,
    seed: u64,
    cfg: StructureConfig,
) -> Result<StructureOutcome> {
    validate_params(k, eps, delta)?;
    let n = g.n();
    let d2x = squared_distances(sol);
    let neg_viol = d2x.max_triangle_violation();
    if neg_viol > cfg.feasibility_tol {
        return Err(Error::invalid(format!(
            "solution is not of negative type: triangle violation {neg_viol:.3e}"
        )));
    }
    let energy_d2_x = energy(g, &d2x)?;

    let (y_sol, embedding_distortion) = embed_l22_to_l2(sol, derive_seed(seed, 7))?;
    let dy = euclidean_distances(&y_sol);
    let energy_d_y = energy(g, &dy)?;

    let eps_pairs = (eps.powi(3) / (512.0 * (k * k) as f64)).min(0.5);
    let reduction =
        gaussian_dim_reduce_with(g, &y_sol, eps_pairs, derive_seed(seed, 2), cfg.reduce)?;
    let z = &reduction.solution;
    let dz = euclidean_distances(z);
    let d2z = squared_distances(z);
    let energy_d_z = energy(g, &dz)?;
    let energy_d2_z = energy(g, &d2z)?;

    let eps_p = eps / 2.0;
    let delta_lip = delta / 4.0;
    let partition = lipschitz_partition(z, delta_lip, derive_seed(seed, 200))?;
    let alpha = partition.param;
    let lipschitz_estimate = if cfg.lipschitz_trials > 0 {
        Some(crate::partition::measure_lipschitz(
            z,
            delta_lip,
            cfg.lipschitz_trials,
            derive_seed(seed, 300),
        )?)
    } else {
        None
    };

    let mut order: Vec<usize> = (0..partition.blocks.len()).collect();
    order.sort_by(|&a, &b| {
        partition.blocks[b]
            .len()
            .cmp(&partition.blocks[a].len())
            .then(partition.blocks[a][0].cmp(&partition.blocks[b][0]))
    });
    let block_weights: Vec<usize> = order.iter().map(|&i| partition.blocks[i].len()).collect();
    let top_2k_weight: usize = block_weights.iter().take(2 * k).sum();
    let cover_condition_threshold = (1.0 - eps_p) * n as f64;
    let certificate_ceiling = 16.0 * alpha * energy_d_z / (eps_p * delta_lip);
    let unsquared_distortion = distorted_pairs(&dz, &dy, 2.0)?;

    let mut trace = StructureTrace {
        pipeline: "phi",
        k,
        eps,
        delta,
        h: reduction.h,
        dim_reduce_attempts: reduction.attempts,
        partition_attempts: 1,
        alpha,
        embedding_distortion: Some(embedding_distortion),
        lipschitz_estimate,
        distorted_pair_budget: eps_pairs * (n * n) as f64,
        distorted_pair_count: unsquared_distortion.violating_pairs,
        block_weights: block_weights.clone(),
        top_2k_weight,
        cover_condition_threshold,
        energy_d2_x,
        energy_d_z,
        energy_d2_z,
        energy_d_y: Some(energy_d_y),
        certificate_ceiling,
        coverage: None,
        max_cover_diameter: None,
        merged_min_weight: None,
        certificate_values: None,
    };

    if top_2k_weight as f64 >= cover_condition_threshold - 1e-9 {
        let top_blocks: Vec<Vec<usize>> = order
            .iter()
            .take(2 * k)
            .map(|&i| partition.blocks[i].clone())
            .collect();
        // Transfer under d_y; the covers' d^2_x diameters are bounded by the
        // d_y ones because d^2_x <= d_y pointwise.
        let mut cover = cover_transfer(&top_blocks, &dz, &dy, delta_lip, eps_p)?;
        while cover.sets.len() < 2 * k {
            cover.sets.push(Vec::new());
            cover.diameters.push(0.0);
        }
        if !verify_cover(&cover, &d2x, delta, eps) {
            return Err(Error::ExtractionFailure(format!(
                "transferred cover failed verification: coverage {}, max d^2_x diameter {:.6}",
                cover.covered_count,
                cover
                    .sets
                    .iter()
                    .filter(|s| !s.is_empty())
                    .map(|s| crate::metric::diameter(s, &d2x).unwrap())
                    .fold(0.0f64, f64::max)
            )));
        }
        // Rerecord diameters under d^2_x for the outcome invariant.
        let cover = Cover::new(cover.sets, &d2x);
        trace.coverage = Some(cover.covered_count);
        trace.max_cover_diameter = Some(cover.max_diameter());
        return Ok(StructureOutcome {
            branch: StructureBranch::Cover { cover },
            trace,
        });
    }

    let indexed: Vec<Vec<usize>> = order.iter().map(|&i| partition.blocks[i].clone()).collect();
    let merged = merge_small(&indexed, 2 * k, |s| s.len() as u64);
    trace.merged_min_weight = Some(merged.iter().map(|(_, w)| *w).min().unwrap_or(0));
    let mut candidates: Vec<Vec<usize>> = merged.into_iter().map(|(s, _)| s).collect();
    candidates.retain(|s| !s.is_empty());
    let mut by_expansion: Vec<usize> = (0..candidates.len()).collect();
    let phi_of: Vec<f64> = candidates
        .iter()
        .map(|s| crate::rat::to_f64(&crate::graph::expansion(g, s).unwrap()))
        .collect();
    by_expansion.sort_by(|&a, &b| phi_of[a].total_cmp(&phi_of[b]).then(a.cmp(&b)));
    let chosen: Vec<Vec<usize>> = by_expansion
        .iter()
        .take(k)
        .map(|&i| candidates[i].clone())
        .collect();
    if chosen.len() < k {
        return Err(Error::ExtractionFailure(format!(
            "only {} nonempty merged sets for a k={k} certificate",
            chosen.len()
        )));
    }
    let certificate = Certificate::Expansion { sets: chosen };
    let report = verify_certificate(g, &certificate)?;
    trace.certificate_values = Some(report.values);
    Ok(StructureOutcome {
        branch: StructureBranch::Certificate { certificate },
        trace,
    })
}

/// Certificate bound check against ground truth: spectral certificates are
/// tested against the computed spectrum (lambda_k <= 2 max R + tol);
/// expansion certificates against the phi_k oracle when n is within its cap.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub variant: &'static str,
    pub implied_bound: f64,
    /// lambda_k or phi_k, when computable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<f64>,
    pub holds: bool,
}

pub fn certificate_bound_check(g: &Graph, outcome: &StructureOutcome, k: usize) -> Result<BoundCheck> {
    let certificate = outcome
        .certificate()
        .ok_or_else(|| Error::invalid("bound check applies to the certificate branch"))?;
    let report = verify_certificate(g, certificate)?;
    match certificate {
        Certificate::Spectral { .. } => {
            let lambda_k = crate::graph::laplacian_spectrum(g)?.lambda(k);
            Ok(BoundCheck {
                variant: "spectral",
                implied_bound: report.implied_bound,
                ground_truth: Some(lambda_k),
                holds: lambda_k <= report.implied_bound + 1e-9,
            })
        }
        Certificate::Expansion { .. } => {
            let oracle = brute_phi_k(g, k).ok();
            let (ground_truth, holds) = match &oracle {
                Some(res) => {
                    let phi_k = crate::rat::to_f64(&res.value);
                    (Some(phi_k), phi_k <= report.implied_bound + 1e-9)
                }
                None => (None, true),
            };
            Ok(BoundCheck {
                variant: "expansion",
                implied_bound: report.implied_bound,
                ground_truth,
                holds,
            })
        }
    }
}

/// Convenience for tests and pipelines: run the branch-appropriate verifier
/// and report whether the outcome stands.
pub fn verify_outcome(
    g: &Graph,
    sol: &EmbeddingSolution,
    outcome: &StructureOutcome,
    k: usize,
    eps: f64,
    delta: f64,
) -> Result<bool> {
    match &outcome.branch {
        StructureBranch::Cover { cover } => {
            let d2x = squared_distances(sol);
            Ok(verify_cover(cover, &d2x, delta, eps))
        }
        StructureBranch::Certificate { .. } => {
            Ok(certificate_bound_check(g, outcome, k)?.holds)
        }
    }
}

#[allow(dead_code)]
fn unused(_: &DistanceMatrix) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::sdp::SolutionKind;

    /// Clustered solution: points at `locations[i]` for each cluster,
    /// normalized so unordered pair distances sum to n^2.
    pub(crate) fn clustered_solution(cluster_sizes: &[usize], spread: f64) -> EmbeddingSolution {
        let count = cluster_sizes.len();
        let n: usize = cluster_sizes.iter().sum();
        // Simplex of cluster centers: pairwise squared distance 1, where
        // e_i * t has pairwise squared distance 2 t^2.
        let mut vectors = Vec::with_capacity(n);
        for (i, &size) in cluster_sizes.iter().enumerate() {
            for j in 0..size {
                let mut v = vec![0.0; count + 1];
                v[i] = std::f64::consts::FRAC_1_SQRT_2;
                v[count] = spread * j as f64;
                vectors.push(v);
            }
        }
        let sol = EmbeddingSolution::new(vectors, 0.0, SolutionKind::Reduced);
        let sum = sol.pair_sum();
        let scale = ((n * n) as f64 / sum).sqrt();
        let scaled: Vec<Vec<f64>> = sol
            .vectors()
            .iter()
            .map(|v| v.iter().map(|x| x * scale).collect())
            .collect();
        EmbeddingSolution::new(scaled, 0.0, SolutionKind::Reduced)
    }

    #[test]
    fn lambda_pipeline_covers_clustered_instance() {
        // 4 lightly connected cliques; constructed 4-cluster solution.
        let g = gen::clique_ring(4, 5);
        let sol = clustered_solution(&[5, 5, 5, 5], 0.0);
        let outcome = cover_via_lambda(&g, &sol, 2, 0.25, 0.5, 11).unwrap();
        let cover = outcome.cover().expect("clustered solution must cover");
        assert!(cover.covered_count == 20);
        assert!(verify_outcome(&g, &sol, &outcome, 2, 0.25, 0.5).unwrap());
    }

    #[test]
    fn lambda_pipeline_all_vectors_identical() {
        let g = gen::complete(6);
        // All identical: pair sum is 0, not n^2, so this is checked as
        // infeasible for the lambda pipeline; use the phi pipeline gate
        // instead, which only needs negative type. Here we keep feasibility
        // by a tiny hack: identical vectors fail normalization, so expect
        // the invalid-argument path.
        let sol = EmbeddingSolution::new(vec![vec![1.0]; 6], 0.0, SolutionKind::Reduced);
        assert!(cover_via_lambda(&g, &sol, 1, 0.25, 0.5, 3).is_err());
        // Coincident clusters (a valid normalized solution) cover trivially.
        let sol = clustered_solution(&[3, 3], 0.0);
        let outcome = cover_via_lambda(&g, &sol, 1, 0.25, 0.5, 3).unwrap();
        assert!(outcome.cover().is_some());
    }

    #[test]
    fn lambda_pipeline_expander_either_branch_verifies() {
        let g = gen::complete(8);
        let sol = crate::sdp::solve_arv(&g, 1e-6).unwrap();
        for seed in [1u64, 2, 3] {
            let outcome = cover_via_lambda(&g, &sol, 1, 0.25, 0.25, seed).unwrap();
            assert!(verify_outcome(&g, &sol, &outcome, 1, 0.25, 0.25).unwrap());
        }
    }

    #[test]
    fn phi_pipeline_disconnected_cliques() {
        let g = gen::disjoint_cliques(2, 4);
        let sol = crate::sdp::embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let outcome = cover_via_phi(&g, &sol, 2, 0.25, 0.5, 5).unwrap();
        assert!(verify_outcome(&g, &sol, &outcome, 2, 0.25, 0.5).unwrap());
    }

    #[test]
    fn phi_pipeline_clustered_covers() {
        let g = gen::clique_ring(3, 4);
        let sol = clustered_solution(&[4, 4, 4], 0.0);
        let outcome = cover_via_phi(&g, &sol, 2, 0.25, 0.5, 9).unwrap();
        assert!(verify_outcome(&g, &sol, &outcome, 2, 0.25, 0.5).unwrap());
        let trace = &outcome.trace;
        assert!(trace.embedding_distortion.unwrap() >= 1.0);
    }

    #[test]
    fn bound_check_requires_certificate_branch() {
        let g = gen::clique_ring(4, 5);
        let sol = clustered_solution(&[5, 5, 5, 5], 0.0);
        let outcome = cover_via_lambda(&g, &sol, 2, 0.25, 0.5, 11).unwrap();
        assert!(outcome.cover().is_some());
        assert!(certificate_bound_check(&g, &outcome, 2).is_err());
    }

    #[test]
    fn hypothesis_plumbing_forces_cover_branch() {
        // Measured-constant contrapositive: when lambda_k exceeds the
        // certificate ceiling (64 alpha^2 E(d2_z) / (eps_p delta_z^2)), the
        // pipeline cannot return a certificate.
        let g = gen::disjoint_cliques(3, 4);
        let sol = clustered_solution(&[4, 4, 4], 0.0);
        let k = 4; // lambda_4 = 4/3 > 0 on three disjoint K4s.
        let outcome = cover_via_lambda(&g, &sol, k, 0.25, 0.5, 17).unwrap();
        let lambda_k = crate::graph::laplacian_spectrum(&g).unwrap().lambda(k);
        if lambda_k > outcome.trace.certificate_ceiling {
            assert!(outcome.cover().is_some(), "hypothesis held but no cover");
        }
        // Collapsed clusters wipe out every edge length, so the ceiling is 0.
        assert_eq!(outcome.trace.energy_d2_z, 0.0);
        assert!(outcome.cover().is_some());
    }
}
