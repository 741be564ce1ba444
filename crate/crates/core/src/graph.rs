//! Regular-graph representation, expansion quantities, and spectral diagnostics.
//!
//! Graphs are simple, undirected, and r-regular; every edge is stored once as
//! an ordered pair (u, v) with u < v, and every edge sum in this crate counts
//! each unordered edge exactly once. Expansion values are exact rationals.

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Residual tolerance used by spectral identity checks.
pub const SPECTRUM_TOL: f64 = 1e-9;

/// Dense eigensolver size cap.
pub const DEFAULT_EIGEN_CAP: usize = 512;

/// A simple r-regular undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    r: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list, validating simplicity and r-regularity.
    pub fn new(n: usize, r: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("graph needs n >= 2, got n={n}")));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            let dup = norm.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
            return Err(Error::invalid(format!(
                "parallel edge ({}, {})",
                dup.0, dup.1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, nb) in adj.iter().enumerate() {
            if nb.len() != r {
                return Err(Error::invalid(format!(
                    "vertex {v} has degree {} but graph must be {r}-regular",
                    nb.len()
                )));
            }
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Graph {
            n,
            r,
            edges: norm,
            adj,
        })
    }

    /// Parses the text format: first line `n r m`, then m lines `u v` with
    /// 0-based vertex ids. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (header_line, header) = loop {
            match lines.next() {
                Some((i, l)) if !l.trim().is_empty() => break (i + 1, l),
                Some(_) => continue,
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        message: "empty input, expected header `n r m`".into(),
                    })
                }
            }
        };
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: header_line,
                message: format!("expected header `n r m`, got {header:?}"),
            });
        }
        let parse_num = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: header_line,
                message: format!("cannot parse {what} from {s:?}"),
            })
        };
        let n = parse_num(parts[0], "n")?;
        let r = parse_num(parts[1], "r")?;
        let m = parse_num(parts[2], "m")?;

        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (i, l) = loop {
                match lines.next() {
                    Some((i, l)) if !l.trim().is_empty() => break (i + 1, l),
                    Some(_) => continue,
                    None => {
                        return Err(Error::Parse {
                            line: header_line,
                            message: format!("expected {m} edge lines, found {}", edges.len()),
                        })
                    }
                }
            };
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 2 {
                return Err(Error::Parse {
                    line: i,
                    message: format!("expected edge line `u v`, got {l:?}"),
                });
            }
            let mut pair = [0usize; 2];
            for (slot, tok) in pair.iter_mut().zip(&p) {
                *slot = tok.parse().map_err(|_| Error::Parse {
                    line: i,
                    message: format!("cannot parse vertex id from {tok:?}"),
                })?;
            }
            edges.push((pair[0], pair[1]));
        }
        if let Some((i, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("unexpected trailing content {l:?}"),
            });
        }
        Graph::new(n, r, edges)
    }

    /// Renders the graph in the same text format `parse` accepts.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.r, self.edges.len());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.r
    }

    /// Edges as ordered pairs (u, v), u < v, each unordered edge once.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Number of edges with exactly one endpoint in `in_s`.
    pub fn cut_edges_mask(&self, in_s: &[bool]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| in_s[u] != in_s[v])
            .count()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Normalized Laplacian I - A/r as a dense matrix.
    pub fn normalized_laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::identity(self.n, self.n);
        let inv_r = 1.0 / self.r as f64;
        for &(u, v) in &self.edges {
            l[(u, v)] = -inv_r;
            l[(v, u)] = -inv_r;
        }
        l
    }

    pub(crate) fn membership_mask(&self, s: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n];
        for &v in s {
            if v >= self.n {
                return Err(Error::invalid(format!("vertex {v} out of range")));
            }
            if mask[v] {
                return Err(Error::invalid(format!("duplicate vertex {v} in set")));
            }
            mask[v] = true;
        }
        Ok(mask)
    }
}

/// A cut: vertex set with its exact expansion phi(S) = |E(S, S-bar)| / (r |S|).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    /// Sorted vertex ids of the reported side.
    pub s: Vec<usize>,
    #[serde(serialize_with = "crate::rat::serialize")]
    pub expansion: Ratio<u64>,
    pub cut_edges: usize,
}

impl Cut {
    /// Builds a cut from a vertex set, computing the exact expansion.
    pub fn from_set(g: &Graph, s: &[usize]) -> Result<Cut> {
        let phi = expansion(g, s)?;
        let mask = g.membership_mask(s)?;
        let cut_edges = g.cut_edges_mask(&mask);
        let mut s = s.to_vec();
        s.sort_unstable();
        Ok(Cut {
            s,
            expansion: phi,
            cut_edges,
        })
    }

    pub fn expansion_f64(&self) -> f64 {
        *self.expansion.numer() as f64 / *self.expansion.denom() as f64
    }
}

/// Exact expansion phi(S) = |E(S, S-bar)| / (r |S|).
///
/// S must be a nonempty proper subset of the vertices.
pub fn expansion(g: &Graph, s: &[usize]) -> Result<Ratio<u64>> {
    if s.is_empty() {
        return Err(Error::invalid("expansion of empty set"));
    }
    let mask = g.membership_mask(s)?;
    if s.len() == g.n() {
        return Err(Error::invalid("expansion of full vertex set"));
    }
    let cut = g.cut_edges_mask(&mask);
    Ok(Ratio::new(cut as u64, (g.degree() * s.len()) as u64))
}

/// Eigenvalues (ascending) of the normalized Laplacian, optionally with
/// eigenvectors as matrix columns in the same order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    /// k-th smallest eigenvalue, 1-based (lambda_1 = 0 for any graph).
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }
}

/// All n eigenvalues of I - A/r, ascending, via a dense symmetric eigensolver.
pub fn laplacian_spectrum(g: &Graph) -> Result<Spectrum> {
    laplacian_spectrum_capped(g, DEFAULT_EIGEN_CAP)
}

pub fn laplacian_spectrum_capped(g: &Graph, n_cap: usize) -> Result<Spectrum> {
    if g.n() > n_cap {
        return Err(Error::ResourceLimit(format!(
            "dense eigensolver capped at n={n_cap}, graph has n={}",
            g.n()
        )));
    }
    let l = g.normalized_laplacian();
    let eig = l.symmetric_eigen();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(g.n(), g.n());
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    debug_assert!(eigenvalues[0].abs() < 1e-7);
    debug_assert!(*eigenvalues.last().unwrap() < 2.0 + 1e-7);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(vecs),
    })
}

/// Rayleigh quotient R(f) = sum_{(u,v) in E} (f(u)-f(v))^2 / (r sum_v f(v)^2),
/// edge sum over each unordered edge once.
pub fn rayleigh(g: &Graph, f: &[f64]) -> Result<f64> {
    if f.len() != g.n() {
        return Err(Error::SizeMismatch(format!(
            "function has {} entries for n={}",
            f.len(),
            g.n()
        )));
    }
    let denom: f64 = g.degree() as f64 * f.iter().map(|x| x * x).sum::<f64>();
    if denom == 0.0 {
        return Err(Error::invalid("rayleigh quotient of identically zero function"));
    }
    let num: f64 = g
        .edges()
        .iter()
        .map(|&(u, v)| (f[u] - f[v]) * (f[u] - f[v]))
        .sum();
    Ok(num / denom)
}

/// Outcome of checking lambda_k <= 2 max_i R(f_i) for disjointly supported f_i.
#[derive(Debug, Clone, Serialize)]
pub struct FactLambdaReport {
    pub k: usize,
    pub lambda_k: f64,
    pub rayleighs: Vec<f64>,
    pub two_max_rayleigh: f64,
    pub holds: bool,
}

/// Verifies the eigenvalue bound lambda_k <= 2 max_i R(f_i) for a family of
/// disjointly supported nonzero functions. Overlapping supports are rejected.
pub fn check_fact_lambda(g: &Graph, fs: &[Vec<f64>]) -> Result<FactLambdaReport> {
    let k = fs.len();
    if k == 0 {
        return Err(Error::invalid("empty function family"));
    }
    if k > g.n() {
        return Err(Error::invalid(format!(
            "family of {k} functions on n={} vertices",
            g.n()
        )));
    }
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (i, f) in fs.iter().enumerate() {
        if f.len() != g.n() {
            return Err(Error::SizeMismatch(format!(
                "function {i} has {} entries for n={}",
                f.len(),
                g.n()
            )));
        }
        for (v, &x) in f.iter().enumerate() {
            if x != 0.0 {
                if let Some(j) = owner[v] {
                    return Err(Error::invalid(format!(
                        "functions {j} and {i} share support vertex {v}"
                    )));
                }
                owner[v] = Some(i);
            }
        }
    }
    let rayleighs: Vec<f64> = fs
        .iter()
        .map(|f| rayleigh(g, f))
        .collect::<Result<_>>()?;
    let two_max = 2.0 * rayleighs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lambda_k = laplacian_spectrum(g)?.lambda(k);
    Ok(FactLambdaReport {
        k,
        lambda_k,
        rayleighs,
        two_max_rayleigh: two_max,
        holds: lambda_k <= two_max + SPECTRUM_TOL,
    })
}

/// Indicator function of a vertex set, as a dense vector.
pub fn indicator(n: usize, s: &[usize]) -> Vec<f64> {
    let mut f = vec![0.0; n];
    for &v in s {
        f[v] = 1.0;
    }
    f
}

/// Minimum-expansion threshold cut of a vertex ordering by `f`.
///
/// Vertices are sorted by (f value, index); every prefix cut is evaluated
/// with the smaller side reported as S. Ties break toward smaller expansion,
/// then smaller |S|, then the lexicographically smaller set. Returns `None`
/// when all f values coincide (no threshold separates anything).
pub(crate) fn sweep_min_expansion(g: &Graph, f: &[f64]) -> Option<Cut> {
    let n = g.n();
    assert_eq!(f.len(), n);
    if f.iter().all(|&x| x == f[0]) {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));

    let mut in_prefix = vec![false; n];
    let mut cut = 0i64;
    let mut best: Option<(Ratio<u64>, Vec<usize>, usize)> = None;
    for j in 0..(n - 1) {
        let v = order[j];
        let inside = g.neighbors(v).iter().filter(|&&w| in_prefix[w]).count();
        cut += g.degree() as i64 - 2 * inside as i64;
        in_prefix[v] = true;

        let prefix_len = j + 1;
        let side: Vec<usize> = if prefix_len * 2 < n {
            let mut s = order[..prefix_len].to_vec();
            s.sort_unstable();
            s
        } else if prefix_len * 2 > n {
            let mut s = order[prefix_len..].to_vec();
            s.sort_unstable();
            s
        } else {
            let mut a = order[..prefix_len].to_vec();
            let mut b = order[prefix_len..].to_vec();
            a.sort_unstable();
            b.sort_unstable();
            if a <= b {
                a
            } else {
                b
            }
        };
        let phi = Ratio::new(cut as u64, (g.degree() * side.len()) as u64);
        let better = match &best {
            None => true,
            Some((bphi, bs, _)) => {
                phi < *bphi || (phi == *bphi && (side.len() < bs.len() || (side.len() == bs.len() && side < *bs)))
            }
        };
        if better {
            best = Some((phi, side, cut as usize));
        }
    }
    best.map(|(expansion, s, cut_edges)| Cut {
        s,
        expansion,
        cut_edges,
    })
}

#[allow(dead_code)]
fn as_dvector(f: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn expansion_single_vertex_in_k4() {
        let g = gen::complete(4);
        assert_eq!(expansion(&g, &[1]).unwrap(), Ratio::new(1, 1));
    }

    #[test]
    fn expansion_arc_in_c6() {
        let g = gen::cycle(6);
        assert_eq!(expansion(&g, &[0, 1, 2]).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn expansion_component_of_disjoint_cliques() {
        let g = gen::disjoint_cliques(2, 4);
        assert_eq!(expansion(&g, &[0, 1, 2, 3]).unwrap(), Ratio::new(0, 1));
    }

    #[test]
    fn expansion_rejects_empty_and_full() {
        let g = gen::complete(4);
        assert!(expansion(&g, &[]).is_err());
        assert!(expansion(&g, &[0, 1, 2, 3]).is_err());
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let g = gen::cycle(8);
        let parsed = Graph::parse(&g.to_text()).unwrap();
        assert_eq!(parsed, g);

        let err = Graph::parse("4 3\n").unwrap_err();
        match err {
            Error::Parse { line: 1, .. } => {}
            other => panic!("unexpected {other:?}"),
        }

        // C4 with a chord: vertices 0 and 2 get degree 3.
        let err = Graph::parse("4 2 5\n0 1\n1 2\n2 3\n3 0\n0 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("vertex 0"), "{msg}");
    }

    #[test]
    fn spectrum_k4_closed_form() {
        let g = gen::complete(4);
        let spec = laplacian_spectrum(&g).unwrap();
        let expected = [0.0, 4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0];
        for (got, want) in spec.eigenvalues.iter().zip(expected) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-9);
        }
    }

    #[test]
    fn spectrum_c8_closed_form() {
        let g = gen::cycle(8);
        let spec = laplacian_spectrum(&g).unwrap();
        let mut expected: Vec<f64> = (0..8)
            .map(|j| 1.0 - (2.0 * std::f64::consts::PI * j as f64 / 8.0).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in spec.eigenvalues.iter().zip(expected) {
            assert_abs_diff_eq!(got, &want, epsilon = 1e-9);
        }
    }

    #[test]
    fn spectrum_trace_is_n() {
        for g in [gen::cycle(10), gen::complete(6), gen::clique_ring(3, 4)] {
            let spec = laplacian_spectrum(&g).unwrap();
            let trace: f64 = spec.eigenvalues.iter().sum();
            assert_abs_diff_eq!(trace, g.n() as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn rayleigh_examples() {
        let g = gen::cycle(4);
        assert_eq!(rayleigh(&g, &[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rayleigh(&g, &[1.0, 0.0, -1.0, 0.0]).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert!(rayleigh(&g, &[0.0; 4]).is_err());
    }

    #[test]
    fn rayleigh_of_indicator_is_expansion() {
        let g = gen::cycle(8);
        let s = [0usize, 1, 2];
        let f = indicator(8, &s);
        let phi = expansion(&g, &s).unwrap();
        assert_abs_diff_eq!(
            rayleigh(&g, &f).unwrap(),
            *phi.numer() as f64 / *phi.denom() as f64,
            epsilon = 1e-12
        );
    }

    #[test]
    fn fact_lambda_k4_standard_basis() {
        let g = gen::complete(4);
        let report =
            check_fact_lambda(&g, &[indicator(4, &[0]), indicator(4, &[1])]).unwrap();
        assert_abs_diff_eq!(report.lambda_k, 4.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(report.two_max_rayleigh, 2.0, epsilon = 1e-12);
        assert!(report.holds);
    }

    #[test]
    fn fact_lambda_antipodal_arcs_on_c8() {
        let g = gen::cycle(8);
        let report =
            check_fact_lambda(&g, &[indicator(8, &[0, 1]), indicator(8, &[4, 5])]).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn fact_lambda_k1_constant() {
        let g = gen::cycle(6);
        let report = check_fact_lambda(&g, &[vec![1.0; 6]]).unwrap();
        assert_abs_diff_eq!(report.lambda_k, 0.0, epsilon = 1e-9);
        assert!(report.holds);
    }

    #[test]
    fn fact_lambda_rejects_overlap() {
        let g = gen::cycle(6);
        let err = check_fact_lambda(&g, &[indicator(6, &[0, 1]), indicator(6, &[1, 2])]);
        assert!(err.is_err());
    }

    proptest! {
        // cut_edges is symmetric in S and its complement, which pins the
        // relation phi(S) r |S| = phi(S-bar) r |S-bar|.
        #[test]
        fn cut_edges_symmetric(seed in 0u64..200, nbits in 1usize..11) {
            let g = gen::random_regular(12, 3, seed).unwrap();
            let s: Vec<usize> = (0..12).filter(|v| (nbits >> (v % 11)) & 1 == 1 || *v == nbits).take(11).collect();
            prop_assume!(!s.is_empty() && s.len() < 12);
            let comp: Vec<usize> = (0..12).filter(|v| !s.contains(v)).collect();
            let cut_s = Cut::from_set(&g, &s).unwrap();
            let cut_c = Cut::from_set(&g, &comp).unwrap();
            prop_assert_eq!(cut_s.cut_edges, cut_c.cut_edges);
        }
    }
}
