//! Brute-force ground truth at desk scale: exhaustive minimum expansion
//! (overall, order-k, and small-set variants) with witnesses, plus the
//! verifiers for covers and certificates. This module optimizes for
//! obviousness, not speed; witnesses break ties lexicographically.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{expansion, rayleigh, Graph};
use crate::metric::{diameter, DistanceMatrix};
use crate::partition::{Certificate, Cover};

/// Default vertex cap for full subset enumeration.
pub const DEFAULT_ORACLE_CAP: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    #[serde(serialize_with = "crate::rat::serialize")]
    pub value: Ratio<u64>,
    /// The optimal set(s): one entry for phi/sse, k entries for phi_k.
    pub witness: Vec<Vec<usize>>,
    pub enumerated_count: u64,
}

fn mask_to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| (mask >> v) & 1 == 1).collect()
}

/// Lexicographic order on vertex sets viewed as sorted id lists.
fn lex_less(a: u32, b: u32) -> bool {
    if a == b {
        return false;
    }
    let i = (a ^ b).trailing_zeros();
    if (a >> i) & 1 == 1 {
        (b >> i) != 0
    } else {
        (a >> i) == 0
    }
}

fn cut_of_mask(g: &Graph, mask: u32) -> u32 {
    g.edges()
        .iter()
        .filter(|&&(u, v)| ((mask >> u) ^ (mask >> v)) & 1 == 1)
        .count() as u32
}

/// (cut1/s1 < cut2/s2) for expansions sharing the degree factor.
fn phi_less(cut1: u32, s1: u32, cut2: u32, s2: u32) -> bool {
    (cut1 as u64) * (s2 as u64) < (cut2 as u64) * (s1 as u64)
}

fn phi_eq(cut1: u32, s1: u32, cut2: u32, s2: u32) -> bool {
    (cut1 as u64) * (s2 as u64) == (cut2 as u64) * (s1 as u64)
}

/// Exhaustive minimum of phi(S) over masks with popcount in [1, size_cap],
/// with lexicographically smallest witness.
fn enumerate_min(g: &Graph, size_cap: usize) -> (u32, u32, u32, u64) {
    let n = g.n();
    let total: u32 = 1u32 << n;
    let best = (1u32..total)
        .into_par_iter()
        .fold(
            || None::<(u32, u32, u32)>,
            |acc, mask| {
                let size = mask.count_ones();
                if size as usize > size_cap {
                    return acc;
                }
                let cut = cut_of_mask(g, mask);
                match acc {
                    None => Some((cut, size, mask)),
                    Some((bc, bs, bm)) => {
                        if phi_less(cut, size, bc, bs)
                            || (phi_eq(cut, size, bc, bs) && lex_less(mask, bm))
                        {
                            Some((cut, size, mask))
                        } else {
                            Some((bc, bs, bm))
                        }
                    }
                }
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some((c1, s1, m1)), Some((c2, s2, m2))) => {
                    if phi_less(c1, s1, c2, s2) || (phi_eq(c1, s1, c2, s2) && lex_less(m1, m2)) {
                        Some((c1, s1, m1))
                    } else {
                        Some((c2, s2, m2))
                    }
                }
            },
        )
        .expect("at least the singletons are enumerated");
    (best.0, best.1, best.2, (total - 1) as u64)
}

/// phi(G) = min over nonempty S with |S| <= n/2 of phi(S), exactly.
pub fn brute_phi(g: &Graph) -> Result<OracleResult> {
    brute_phi_capped(g, DEFAULT_ORACLE_CAP)
}

pub fn brute_phi_capped(g: &Graph, n_cap: usize) -> Result<OracleResult> {
    if g.n() > n_cap {
        return Err(Error::ResourceLimit(format!(
            "subset enumeration capped at n={n_cap}, graph has n={}",
            g.n()
        )));
    }
    let (cut, size, mask, count) = enumerate_min(g, g.n() / 2);
    Ok(OracleResult {
        value: Ratio::new(cut as u64, g.degree() as u64 * size as u64),
        witness: vec![mask_to_set(mask, g.n())],
        enumerated_count: count,
    })
}

/// sse_s(G) = min over nonempty S with |S| <= s of phi(S). The size bound is
/// the only restriction; S may exceed n/2 (and phi(V) = 0).
pub fn brute_sse(g: &Graph, s: usize) -> Result<OracleResult> {
    brute_sse_capped(g, s, DEFAULT_ORACLE_CAP)
}

pub fn brute_sse_capped(g: &Graph, s: usize, n_cap: usize) -> Result<OracleResult> {
    if s < 1 {
        return Err(Error::invalid("sse needs size bound s >= 1"));
    }
    if g.n() > n_cap {
        return Err(Error::ResourceLimit(format!(
            "subset enumeration capped at n={n_cap}, graph has n={}",
            g.n()
        )));
    }
    let (cut, size, mask, count) = enumerate_min(g, s.min(g.n()));
    Ok(OracleResult {
        value: Ratio::new(cut as u64, g.degree() as u64 * size as u64),
        witness: vec![mask_to_set(mask, g.n())],
        enumerated_count: count,
    })
}

/// phi_k(G) = min over k disjoint nonempty sets of the max phi, exactly.
///
/// The definition carries no size bound, so phi_1(G) = 0 via S = V; the
/// oracle follows the definition literally.
pub fn brute_phi_k(g: &Graph, k: usize) -> Result<OracleResult> {
    let n = g.n();
    if k == 0 {
        return Err(Error::invalid("phi_k needs k >= 1"));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "cannot choose {k} disjoint nonempty sets among {n} vertices"
        )));
    }
    if !(n <= 12 || (k <= 3 && n <= 16)) {
        return Err(Error::ResourceLimit(format!(
            "phi_k enumeration needs n <= 12, or k <= 3 with n <= 16 (got n={n}, k={k})"
        )));
    }
    let total = 1u32 << n;
    // Expansion of every nonempty subset, as (cut, size).
    let mut cuts = vec![0u32; total as usize];
    for mask in 1..total {
        cuts[mask as usize] = cut_of_mask(g, mask);
    }

    // Candidate thresholds, ascending.
    let mut values: Vec<(u32, u32)> = (1..total)
        .map(|m| {
            let c = cuts[m as usize];
            let s = m.count_ones();
            let g = gcd(c.max(1), s);
            if c == 0 {
                (0, 1)
            } else {
                (c / g, s / g)
            }
        })
        .collect();
    values.sort_unstable_by(|a, b| {
        ((a.0 as u64) * (b.1 as u64)).cmp(&((b.0 as u64) * (a.1 as u64)))
    });
    values.dedup();

    let feasible = |threshold: (u32, u32)| -> Option<Vec<u8>> {
        let mut ok = vec![false; total as usize];
        for mask in 1..total {
            ok[mask as usize] =
                !phi_less(threshold.0, threshold.1, cuts[mask as usize], mask.count_ones());
        }
        let mut dp = vec![0u8; total as usize];
        for mask in 1..total {
            let mut best = 0u8;
            let mut sub = mask;
            while sub > 0 {
                if ok[sub as usize] {
                    let cand = 1 + dp[(mask ^ sub) as usize];
                    if cand > best {
                        best = cand;
                    }
                }
                sub = (sub - 1) & mask;
            }
            dp[mask as usize] = best;
        }
        if dp[(total - 1) as usize] as usize >= k {
            Some(dp)
        } else {
            None
        }
    };

    let mut lo = 0usize;
    let mut hi = values.len() - 1;
    debug_assert!(feasible(values[hi]).is_some());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let threshold = values[lo];
    let dp = feasible(threshold).expect("binary search landed on a feasible threshold");

    // Lex-min witness tuple: repeatedly take the lexicographically smallest
    // admissible set whose complement still packs the remainder.
    let mut ok_masks: Vec<u32> = (1..total)
        .filter(|&m| !phi_less(threshold.0, threshold.1, cuts[m as usize], m.count_ones()))
        .collect();
    ok_masks.sort_unstable_by(|&a, &b| {
        if lex_less(a, b) {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let mut used: u32 = 0;
    let mut witness = Vec::with_capacity(k);
    for remaining in (1..=k).rev() {
        let pick = ok_masks
            .iter()
            .copied()
            .find(|&s| {
                s & used == 0 && dp[((total - 1) & !(used | s)) as usize] as usize >= remaining - 1
            })
            .expect("dp certified a packing");
        used |= pick;
        witness.push(mask_to_set(pick, n));
    }

    Ok(OracleResult {
        value: Ratio::new(threshold.0 as u64, g.degree() as u64 * threshold.1 as u64)
            * Ratio::new(1, 1),
        witness,
        enumerated_count: (total - 1) as u64,
    })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// True iff every cover set has diameter <= delta under d and the union
/// covers at least (1 - eps) n vertices. Diameters get an ulp-scale slack so
/// sets built from exact radius-delta balls are not rejected by rounding.
pub fn verify_cover(cover: &Cover, d: &DistanceMatrix, delta: f64, eps: f64) -> bool {
    let slack = delta * 1e-12 + 1e-12;
    let mut covered = vec![false; d.n()];
    for set in &cover.sets {
        if set.is_empty() {
            continue;
        }
        match diameter(set, d) {
            Ok(diam) if diam <= delta + slack => {}
            _ => return false,
        }
        for &v in set {
            covered[v] = true;
        }
    }
    let count = covered.iter().filter(|&&c| c).count();
    count as f64 >= (1.0 - eps) * d.n() as f64 - 1e-9
}

/// Recomputed content of a certificate: per-element quantities, the implied
/// bound, and which eigen/expansion order it applies to.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub variant: &'static str,
    pub k: usize,
    /// Rayleigh quotients (spectral) or expansions (expansion variant).
    pub values: Vec<f64>,
    /// 2 max R(f_i), an upper bound on lambda_k; or max phi(T_i), an upper
    /// bound on phi_k.
    pub implied_bound: f64,
}

/// Recomputes and validates a certificate: disjointness plus per-element
/// quantities. Malformed certificates (overlaps, empty parts) are rejected.
pub fn verify_certificate(g: &Graph, cert: &Certificate) -> Result<CertificateReport> {
    match cert {
        Certificate::Spectral { functions } => {
            let report = crate::graph::check_fact_lambda(g, functions)?;
            Ok(CertificateReport {
                variant: "spectral",
                k: functions.len(),
                values: report.rayleighs,
                implied_bound: report.two_max_rayleigh,
            })
        }
        Certificate::Expansion { sets } => {
            if sets.is_empty() {
                return Err(Error::invalid("expansion certificate with no sets"));
            }
            let mut seen = vec![false; g.n()];
            for set in sets {
                if set.is_empty() {
                    return Err(Error::invalid("expansion certificate with an empty set"));
                }
                for &v in set {
                    if v >= g.n() {
                        return Err(Error::invalid(format!("vertex {v} out of range")));
                    }
                    if seen[v] {
                        return Err(Error::invalid(format!(
                            "certificate sets overlap at vertex {v}"
                        )));
                    }
                    seen[v] = true;
                }
            }
            let values: Vec<f64> = sets
                .iter()
                .map(|s| expansion(g, s).map(|r| crate::rat::to_f64(&r)))
                .collect::<Result<_>>()?;
            let implied = values.iter().cloned().fold(0.0f64, f64::max);
            Ok(CertificateReport {
                variant: "expansion",
                k: sets.len(),
                values,
                implied_bound: implied,
            })
        }
    }
}

#[allow(dead_code)]
fn unused_rayleigh_reference(g: &Graph, f: &[f64]) -> Result<f64> {
    rayleigh(g, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::graph::indicator;
    use crate::metric::MetricKind;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn brute_phi_c8() {
        let g = gen::cycle(8);
        let res = brute_phi(&g).unwrap();
        assert_eq!(res.value, Ratio::new(1, 4));
        assert_eq!(res.witness, vec![vec![0, 1, 2, 3]]);
        assert_eq!(res.enumerated_count, 255);
    }

    #[test]
    fn brute_phi_k4_and_disconnected() {
        let res = brute_phi(&gen::complete(4)).unwrap();
        assert_eq!(res.value, Ratio::new(2, 3));
        assert_eq!(res.witness, vec![vec![0, 1]]);

        let res = brute_phi(&gen::disjoint_cliques(2, 4)).unwrap();
        assert_eq!(res.value, Ratio::new(0, 1));
    }

    #[test]
    fn brute_phi_cap() {
        let g = gen::cycle(24);
        assert!(matches!(
            brute_phi(&g),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn brute_phi_k_examples() {
        let g = gen::disjoint_cliques(2, 4);
        let res = brute_phi_k(&g, 2).unwrap();
        assert_eq!(res.value, Ratio::new(0, 1));

        let g = gen::cycle(8);
        let res = brute_phi_k(&g, 2).unwrap();
        assert_eq!(res.value, Ratio::new(1, 4));
        let res = brute_phi_k(&g, 4).unwrap();
        assert_eq!(res.value, Ratio::new(1, 2));
    }

    #[test]
    fn brute_phi_k_of_one_is_zero() {
        let g = gen::complete(5);
        let res = brute_phi_k(&g, 1).unwrap();
        assert_eq!(res.value, Ratio::new(0, 1));
        assert_eq!(res.witness, vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn brute_sse_examples() {
        let g = gen::cycle(16);
        let res = brute_sse(&g, 4).unwrap();
        assert_eq!(res.value, Ratio::new(1, 4));

        let res = brute_sse(&gen::complete(4), 1).unwrap();
        assert_eq!(res.value, Ratio::new(1, 1));
        assert!(brute_sse(&gen::complete(4), 0).is_err());

        // s = n admits S = V with expansion 0.
        let g = gen::cycle(6);
        let all = brute_sse(&g, 6).unwrap();
        assert!(all.value <= brute_phi(&g).unwrap().value);
    }

    #[test]
    fn phi_lower_bounds_every_set() {
        let g = gen::clique_ring(3, 4);
        let phi = brute_phi(&g).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let size = rng.gen_range(1..=g.n() / 2);
            let mut s: Vec<usize> = (0..g.n()).collect();
            for i in 0..size {
                let j = rng.gen_range(i..g.n());
                s.swap(i, j);
            }
            s.truncate(size);
            assert!(phi <= expansion(&g, &s).unwrap());
        }
    }

    #[test]
    fn phi_k_dominates_small_set_expansion_and_spectrum() {
        for (g, k) in [
            (gen::cycle(12), 3usize),
            (gen::clique_ring(3, 4), 3),
            (gen::complete(6), 2),
        ] {
            let pk = brute_phi_k(&g, k).unwrap().value;
            let sse = brute_sse(&g, g.n() / k).unwrap().value;
            assert!(pk >= sse, "phi_{k} {pk} < sse {sse}");
            let lam = crate::graph::laplacian_spectrum(&g).unwrap().lambda(k);
            assert!(
                crate::rat::to_f64(&pk) >= lam / 2.0 - 1e-9,
                "phi_{k} {pk} < lambda_{k}/2 = {}",
                lam / 2.0
            );
        }
    }

    #[test]
    fn verify_cover_cases() {
        let d = DistanceMatrix::from_fn(4, MetricKind::Squared, |u, v| {
            if u == v {
                0.0
            } else {
                1.0
            }
        });
        let singletons = Cover::new(vec![vec![0], vec![1], vec![2], vec![3]], &d);
        assert!(verify_cover(&singletons, &d, 0.0, 0.0));

        let whole = Cover::new(vec![vec![0, 1, 2, 3]], &d);
        assert!(!verify_cover(&whole, &d, 0.5, 0.0));
        assert!(verify_cover(&whole, &d, 1.0, 0.0));
    }

    #[test]
    fn verify_certificate_cases() {
        let g = gen::disjoint_cliques(2, 4);
        let spectral = Certificate::Spectral {
            functions: vec![indicator(8, &[0]), indicator(8, &[4])],
        };
        let report = verify_certificate(&g, &spectral).unwrap();
        assert_eq!(report.variant, "spectral");
        assert!(report.values.iter().all(|&r| r > 0.0));

        let comp = Certificate::Expansion {
            sets: vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]],
        };
        let report = verify_certificate(&g, &comp).unwrap();
        assert_eq!(report.implied_bound, 0.0);

        let overlap = Certificate::Expansion {
            sets: vec![vec![0, 1], vec![1, 2]],
        };
        assert!(verify_certificate(&g, &overlap).is_err());
    }
}
