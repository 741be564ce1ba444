//! The ARV relaxation and its single-set Sherali-Adams strengthening.
//!
//! Both programs are solved by an augmented-Lagrangian method over the PSD
//! Gram cone: the objective and every constraint are linear in the Gram
//! matrix (and, for the strengthened program, in the per-pattern distance
//! systems), so the inner minimizations are convex and a projected-gradient
//! loop with FISTA momentum converges. Feasibility of the ARV block is made
//! exact afterwards by mixing toward the equilateral solution (which has
//! uniform triangle slack) and rescaling to the pair-sum normalization;
//! the Sherali-Adams block has no interior point (its cut-pattern zeros
//! force tight triangles), so its residuals come from solver convergence
//! alone and are reported against the requested tolerance.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{sweep_min_expansion, Graph};
use crate::metric::{DistanceMatrix, MetricKind};

/// Default residual tolerance for solver feasibility.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    ArvOptimal,
    IntegralCut,
    Reduced,
    Embedded,
}

/// One vector per vertex plus the objective value it attains.
#[derive(Debug, Clone)]
pub struct EmbeddingSolution {
    vectors: Vec<Vec<f64>>,
    pub objective: f64,
    pub kind: SolutionKind,
    /// Residual tolerance the producer guarantees (0 for exact embeddings).
    pub residual_tol: f64,
}

impl EmbeddingSolution {
    pub fn new(vectors: Vec<Vec<f64>>, objective: f64, kind: SolutionKind) -> Self {
        assert!(!vectors.is_empty(), "embedding needs at least one vertex");
        let m = vectors[0].len();
        assert!(
            vectors.iter().all(|v| v.len() == m),
            "all vectors share one dimension"
        );
        EmbeddingSolution {
            vectors,
            objective,
            kind,
            residual_tol: 0.0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    /// Shared vector dimension m.
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vector(&self, v: usize) -> &[f64] {
        &self.vectors[v]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    #[inline]
    pub fn squared_distance(&self, u: usize, v: usize) -> f64 {
        self.vectors[u]
            .iter()
            .zip(&self.vectors[v])
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Sum of squared distances over unordered pairs.
    pub fn pair_sum(&self) -> f64 {
        let mut s = 0.0;
        for u in 0..self.n() {
            for v in (u + 1)..self.n() {
                s += self.squared_distance(u, v);
            }
        }
        s
    }
}

impl Serialize for EmbeddingSolution {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Tolerances {
            residual: f64,
        }
        let mut s = ser.serialize_struct("EmbeddingSolution", 6)?;
        s.serialize_field("n", &self.n())?;
        s.serialize_field("m", &self.dim())?;
        s.serialize_field("vectors", &self.vectors)?;
        s.serialize_field("objective", &self.objective)?;
        s.serialize_field("kind", &self.kind)?;
        s.serialize_field(
            "tolerances",
            &Tolerances {
                residual: self.residual_tol,
            },
        )?;
        s.end()
    }
}

/// Feasibility scan outcome for an embedding.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub max_triangle_violation: f64,
    pub normalization_residual: f64,
    pub objective: f64,
    pub pass: bool,
}

/// Exhaustive O(n^3) triangle scan on squared distances plus the
/// normalization residual |sum over unordered pairs - n^2|.
pub fn check_feasibility(sol: &EmbeddingSolution, tol: f64) -> FeasibilityReport {
    let d2 = crate::metric::squared_distances(sol);
    let max_triangle_violation = d2.max_triangle_violation();
    let n = sol.n() as f64;
    let normalization_residual = (d2.pair_sum() - n * n).abs();
    FeasibilityReport {
        max_triangle_violation,
        normalization_residual,
        objective: sol.objective,
        pass: max_triangle_violation <= tol && normalization_residual <= tol,
    }
}

/// The one-dimensional integral embedding of a cut: x_v = sqrt(n^2/(s(n-s)))
/// for v in S and 0 otherwise. Exactly feasible, with objective
/// phi(S) * n / (2(n-s)) <= phi(S).
pub fn embed_integral_cut(g: &Graph, s: &[usize]) -> Result<EmbeddingSolution> {
    let n = g.n();
    let mask = g.membership_mask(s)?;
    let size = s.len();
    if size == 0 || 2 * size > n {
        return Err(Error::invalid(format!(
            "integral cut needs 0 < |S| <= n/2, got |S|={size}, n={n}"
        )));
    }
    let x = ((n * n) as f64 / (size * (n - size)) as f64).sqrt();
    let xx = x * x;
    let cut = g.cut_edges_mask(&mask);
    let objective = cut as f64 * xx / (2.0 * g.degree() as f64 * n as f64);
    let vectors = (0..n)
        .map(|v| vec![if mask[v] { x } else { 0.0 }])
        .collect();
    Ok(EmbeddingSolution::new(
        vectors,
        objective,
        SolutionKind::IntegralCut,
    ))
}

// ---------------------------------------------------------------------------
// Shared constraint system
// ---------------------------------------------------------------------------

/// Pair indexing and the triangle-constraint triples over n vertices.
struct TriangleSystem {
    n: usize,
    pairs: Vec<(usize, usize)>,
    pair_of: Vec<usize>,
    /// Flat (p_uv, p_uw, p_wv) index triples: d[p0] <= d[p1] + d[p2].
    triples: Vec<u32>,
}

impl TriangleSystem {
    fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        let mut pair_of = vec![usize::MAX; n * n];
        for u in 0..n {
            for v in (u + 1)..n {
                pair_of[u * n + v] = pairs.len();
                pair_of[v * n + u] = pairs.len();
                pairs.push((u, v));
            }
        }
        let mut triples = Vec::with_capacity(3 * pairs.len() * n.saturating_sub(2));
        for (p0, &(u, v)) in pairs.iter().enumerate() {
            for w in 0..n {
                if w == u || w == v {
                    continue;
                }
                triples.push(p0 as u32);
                triples.push(pair_of[u * n + w] as u32);
                triples.push(pair_of[w * n + v] as u32);
            }
        }
        TriangleSystem {
            n,
            pairs,
            pair_of,
            triples,
        }
    }

    fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    fn triple_count(&self) -> usize {
        self.triples.len() / 3
    }

    #[inline]
    fn pair(&self, u: usize, v: usize) -> usize {
        self.pair_of[u * self.n + v]
    }

    fn distances_from_gram(&self, g: &DMatrix<f64>, out: &mut [f64]) {
        for (p, &(u, v)) in self.pairs.iter().enumerate() {
            out[p] = g[(u, u)] + g[(v, v)] - 2.0 * g[(u, v)];
        }
    }

    fn max_violation(&self, d: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for t in self.triples.chunks_exact(3) {
            worst = worst.max(d[t[0] as usize] - d[t[1] as usize] - d[t[2] as usize]);
        }
        worst
    }
}

/// Projects onto the PSD cone (and recenters, which distances ignore).
fn psd_project_centered(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    // Recenter: translate points to mean zero; distances are unchanged.
    let row_mean = x.column_sum() / n as f64;
    let total_mean = row_mean.sum() / n as f64;
    let mut c = x.clone();
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] += total_mean - row_mean[i] - row_mean[j];
        }
    }
    let eig = c.symmetric_eigen();
    let clipped = eig.eigenvalues.map(|lam| lam.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()
}

/// Rank-revealing vector recovery: eigendecompose the Gram matrix, drop
/// eigenvalues below `drop_tol`, and return coordinates U sqrt(Lambda).
fn vectors_from_gram(g: &DMatrix<f64>, drop_tol: f64) -> Vec<Vec<f64>> {
    let n = g.nrows();
    let eig = g.clone().symmetric_eigen();
    let mut kept: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > drop_tol)
        .collect();
    kept.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if kept.is_empty() {
        return vec![vec![0.0]; n];
    }
    (0..n)
        .map(|v| {
            kept.iter()
                .map(|&i| eig.eigenvalues[i].sqrt() * eig.eigenvectors[(v, i)])
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// ARV solver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct ArvConfig {
    pub n_cap: usize,
    /// Residual tolerance the returned solution must satisfy.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Feasibility level the multiplier loop drives toward before repair.
    pub feas_target: f64,
}

impl Default for ArvConfig {
    fn default() -> Self {
        ArvConfig {
            n_cap: 40,
            tol: DEFAULT_TOL,
            max_outer: 200,
            max_inner: 1500,
            feas_target: 1e-9,
        }
    }
}

/// Solves the ARV relaxation: minimize (1/2rn) sum_E d(u,v) over squared
/// Euclidean distances with sum over unordered pairs = n^2 and all triangle
/// inequalities, d drawn from a PSD Gram matrix.
pub fn solve_arv(g: &Graph, tol: f64) -> Result<EmbeddingSolution> {
    solve_arv_with(
        g,
        ArvConfig {
            tol,
            ..ArvConfig::default()
        },
    )
}

pub fn solve_arv_with(g: &Graph, cfg: ArvConfig) -> Result<EmbeddingSolution> {
    let n = g.n();
    if n > cfg.n_cap {
        return Err(Error::ResourceLimit(format!(
            "ARV solver capped at n={}, graph has n={n}",
            cfg.n_cap
        )));
    }
    let sys = TriangleSystem::new(n);
    let mut cost = vec![0.0; sys.pair_count()];
    let obj_scale = 1.0 / (2.0 * g.degree() as f64 * n as f64);
    for &(u, v) in g.edges() {
        cost[sys.pair(u, v)] = obj_scale;
    }

    let mut state = AlmState::new(&sys, warm_start_gram(g), cost);
    state.run(&sys, cfg.max_outer, cfg.max_inner, cfg.feas_target);

    let sol = finish_arv_solution(g, &sys, &state.gram, cfg.tol)?;
    let report = check_feasibility(&sol, cfg.tol);
    if !report.pass {
        return Err(Error::SolverFailure {
            message: "ARV solution failed the feasibility scan after repair".into(),
            max_triangle_violation: report.max_triangle_violation,
            normalization_residual: report.normalization_residual,
        });
    }
    Ok(sol)
}

/// Gram matrix of the equilateral (simplex) solution: all pair distances
/// equal c = n^2 / C(n,2); every triangle has slack exactly c.
fn simplex_gram(n: usize) -> DMatrix<f64> {
    let c = (n * n) as f64 / (n * (n - 1) / 2) as f64;
    let mut m = DMatrix::from_element(n, n, -c / (2.0 * n as f64));
    for i in 0..n {
        m[(i, i)] += c / 2.0;
    }
    m
}

/// Warm start: average of the best spectral sweep cut's integral embedding
/// and the simplex solution, both exactly normalized.
fn warm_start_gram(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut gram = simplex_gram(n);
    let sweep = crate::graph::laplacian_spectrum(g)
        .ok()
        .and_then(|spec| {
            let vecs = spec.eigenvectors.as_ref()?;
            let fiedler: Vec<f64> = (0..n).map(|v| vecs[(v, 1)]).collect();
            sweep_min_expansion(g, &fiedler)
        })
        .and_then(|cut| embed_integral_cut(g, &cut.s).ok());
    if let Some(sol) = sweep {
        for u in 0..n {
            for v in 0..n {
                let prod = sol.vector(u)[0] * sol.vector(v)[0];
                gram[(u, v)] = 0.5 * gram[(u, v)] + 0.5 * prod;
            }
        }
    }
    gram
}

/// Augmented-Lagrangian state shared by both programs' ARV block.
struct AlmState {
    gram: DMatrix<f64>,
    cost: Vec<f64>,
    y_norm: f64,
    mu: Vec<f64>,
    rho: f64,
    eta: f64,
}

impl AlmState {
    fn new(sys: &TriangleSystem, gram: DMatrix<f64>, cost: Vec<f64>) -> Self {
        AlmState {
            gram,
            cost,
            y_norm: 0.0,
            mu: vec![0.0; sys.triple_count()],
            rho: 1.0,
            eta: 0.05,
        }
    }

    /// Value and pair-space gradient of the augmented Lagrangian at `d`.
    fn eval(&self, sys: &TriangleSystem, d: &[f64], q: &mut [f64]) -> f64 {
        let n = sys.n as f64;
        let nn = n * n;
        let mut f = 0.0;
        let mut sum = 0.0;
        for (p, &dv) in d.iter().enumerate() {
            f += self.cost[p] * dv;
            sum += dv;
            q[p] = self.cost[p];
        }
        let g0 = (sum - nn) / nn;
        f += self.y_norm * g0 + 0.5 * self.rho * g0 * g0;
        let gnorm_coeff = (self.y_norm + self.rho * g0) / nn;
        for qp in q.iter_mut() {
            *qp += gnorm_coeff;
        }
        for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
            let (p0, p1, p2) = (tri[0] as usize, tri[1] as usize, tri[2] as usize);
            let a = d[p0] - d[p1] - d[p2];
            let m = self.mu[t] + self.rho * a;
            if m > 0.0 {
                f += (m * m - self.mu[t] * self.mu[t]) / (2.0 * self.rho);
                q[p0] += m;
                q[p1] -= m;
                q[p2] -= m;
            } else {
                f -= self.mu[t] * self.mu[t] / (2.0 * self.rho);
            }
        }
        f
    }

    fn gram_gradient(&self, sys: &TriangleSystem, q: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(sys.n, sys.n);
        for (p, &(u, v)) in sys.pairs.iter().enumerate() {
            m[(u, u)] += q[p];
            m[(v, v)] += q[p];
            m[(u, v)] -= q[p];
            m[(v, u)] -= q[p];
        }
        m
    }

    /// Inner loop: FISTA (accelerated projected gradient with backtracking
    /// and adaptive restart) on the augmented Lagrangian over the PSD cone.
    fn minimize_inner(&mut self, sys: &TriangleSystem, max_inner: usize) {
        let p = sys.pair_count();
        self.eta = self.eta.max(1e-3 / self.rho);
        let mut d = vec![0.0; p];
        let mut q = vec![0.0; p];
        let eval_at = |state: &Self, g: &DMatrix<f64>, d: &mut [f64], q: &mut [f64]| -> f64 {
            sys.distances_from_gram(g, d);
            state.eval(sys, d, q)
        };
        let mut x_cur = self.gram.clone();
        let mut x_prev = x_cur.clone();
        let mut f_cur = eval_at(self, &x_cur, &mut d, &mut q);
        let mut t_k = 1.0f64;
        let mut it = 0usize;
        while it < max_inner {
            it += 1;
            let t_next = (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0;
            let omega = (t_k - 1.0) / t_next;
            let y = &x_cur + (&x_cur - &x_prev) * omega;
            let mut qy = vec![0.0; p];
            let f_y = eval_at(self, &y, &mut d, &mut qy);
            let grad = self.gram_gradient(sys, &qy);
            let mut accepted = None;
            for _ in 0..60 {
                let candidate = psd_project_centered(&(&y - &grad * self.eta));
                let mut q_new = vec![0.0; p];
                let f_new = eval_at(self, &candidate, &mut d, &mut q_new);
                let diff = &candidate - &y;
                let lin: f64 = grad.iter().zip(diff.iter()).map(|(a, b)| a * b).sum();
                let sq: f64 = diff.iter().map(|x| x * x).sum();
                if f_new <= f_y + lin + sq / (2.0 * self.eta) + 1e-12 * f_y.abs().max(1.0) {
                    accepted = Some((candidate, f_new, q_new, sq.sqrt()));
                    break;
                }
                self.eta *= 0.5;
                if self.eta < 1e-15 {
                    break;
                }
            }
            let Some((candidate, f_new, q_new, step)) = accepted else {
                break;
            };
            if f_new > f_cur + 1e-12 * f_cur.abs().max(1.0) {
                // Momentum overshoot: restart from the last good iterate.
                t_k = 1.0;
                x_prev = x_cur.clone();
                continue;
            }
            let grad_scale = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
            let stalled = step / self.eta <= 1e-10 * (1.0 + grad_scale);
            x_prev = x_cur;
            x_cur = candidate;
            q = q_new;
            t_k = t_next;
            let improved = f_cur - f_new;
            f_cur = f_new;
            self.eta = (self.eta * 1.2).min(100.0);
            if stalled || (improved.abs() <= 1e-14 * f_cur.abs().max(1.0) && it > 4) {
                break;
            }
        }
        self.gram = x_cur;
        let _ = q;
    }

    fn residuals(&self, sys: &TriangleSystem) -> (f64, f64) {
        let mut d = vec![0.0; sys.pair_count()];
        sys.distances_from_gram(&self.gram, &mut d);
        let nn = (sys.n * sys.n) as f64;
        let g0 = (d.iter().sum::<f64>() - nn) / nn;
        (g0.abs(), sys.max_violation(&d))
    }

    fn update_multipliers(&mut self, sys: &TriangleSystem) {
        let mut d = vec![0.0; sys.pair_count()];
        sys.distances_from_gram(&self.gram, &mut d);
        let nn = (sys.n * sys.n) as f64;
        let g0 = (d.iter().sum::<f64>() - nn) / nn;
        self.y_norm += self.rho * g0;
        for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
            let a = d[tri[0] as usize] - d[tri[1] as usize] - d[tri[2] as usize];
            self.mu[t] = (self.mu[t] + self.rho * a).max(0.0);
        }
    }

    fn run(&mut self, sys: &TriangleSystem, max_outer: usize, max_inner: usize, feas: f64) {
        let debug = std::env::var("SDPCUT_DEBUG").is_ok();
        let mut prev_viol = f64::INFINITY;
        for round in 0..max_outer {
            self.minimize_inner(sys, max_inner);
            let (g0, viol) = self.residuals(sys);
            if debug {
                let mut d = vec![0.0; sys.pair_count()];
                sys.distances_from_gram(&self.gram, &mut d);
                let obj: f64 = d.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
                eprintln!(
                    "outer {round}: obj={obj:.6} g0={g0:.3e} viol={viol:.3e} rho={} y0={:.3} eta={:.3e}",
                    self.rho, self.y_norm, self.eta
                );
            }
            if g0 <= feas && viol <= feas {
                break;
            }
            self.update_multipliers(sys);
            let worst = g0.max(viol);
            if worst > 0.25 * prev_viol && worst > 10.0 * feas {
                self.rho = (self.rho * 2.0).min(1e8);
            }
            prev_viol = worst;
        }
    }
}

/// Exact repair + vector recovery: mix toward the simplex Gram until every
/// triangle holds, rescale to the pair-sum normalization, then recover
/// coordinates dropping Gram eigenvalues below 1e-9.
fn finish_arv_solution(
    g: &Graph,
    sys: &TriangleSystem,
    gram: &DMatrix<f64>,
    tol: f64,
) -> Result<EmbeddingSolution> {
    let n = g.n();
    let mut d = vec![0.0; sys.pair_count()];
    sys.distances_from_gram(gram, &mut d);
    let viol = sys.max_violation(&d);
    let c = (n * n) as f64 / (n * (n - 1) / 2) as f64;
    let mut repaired = gram.clone();
    if viol > 0.0 {
        // (1-t) * viol - t * c = -margin  =>  triangles strictly feasible.
        let margin = 1e-7 * c;
        let t = ((viol + margin) / (viol + c)).min(1.0);
        repaired = &repaired * (1.0 - t) + simplex_gram(n) * t;
    }
    let mut vectors = vectors_from_gram(&repaired, 1e-9);
    // Rescale so the pair sum is n^2 to the last ulp.
    let probe = EmbeddingSolution::new(vectors.clone(), 0.0, SolutionKind::ArvOptimal);
    let sum = probe.pair_sum();
    if sum <= 0.0 {
        return Err(Error::SolverFailure {
            message: "degenerate Gram matrix (all points coincide)".into(),
            max_triangle_violation: viol,
            normalization_residual: (n * n) as f64,
        });
    }
    let scale = ((n * n) as f64 / sum).sqrt();
    for row in &mut vectors {
        for x in row.iter_mut() {
            *x *= scale;
        }
    }
    let sol = EmbeddingSolution::new(vectors, 0.0, SolutionKind::ArvOptimal).with_tol(tol);
    let d2 = crate::metric::squared_distances(&sol);
    let objective = crate::metric::energy(g, &d2)?;
    Ok(EmbeddingSolution {
        objective,
        ..sol
    })
}

// ---------------------------------------------------------------------------
// Sherali-Adams strengthening for one representative set
// ---------------------------------------------------------------------------

/// Distance systems {d^b} and cut-pattern probabilities {p^b} for one
/// representative set R. Pattern index `b` encodes the map R -> {0,1} with
/// bit i giving the side of `representatives[i]`.
#[derive(Debug, Clone)]
pub struct SaSolution {
    pub representatives: Vec<usize>,
    /// Probability per pattern, summing to 1.
    pub p: Vec<f64>,
    /// One n x n distance matrix per pattern.
    pub d: Vec<DistanceMatrix>,
    /// Residual tolerance from the solve, used to scale sampled-metric checks.
    pub tol: f64,
}

impl SaSolution {
    pub fn pattern_count(&self) -> usize {
        self.p.len()
    }

    /// Side of representative i under pattern b.
    pub fn side(&self, b: usize, i: usize) -> bool {
        (b >> i) & 1 == 1
    }

    pub fn pattern_bits(&self, b: usize) -> String {
        (0..self.representatives.len())
            .map(|i| if self.side(b, i) { '1' } else { '0' })
            .collect()
    }
}

impl Serialize for SaSolution {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Pattern<'a> {
            b: String,
            p: f64,
            d: &'a DistanceMatrix,
        }
        let patterns: Vec<Pattern> = (0..self.pattern_count())
            .map(|b| Pattern {
                b: self.pattern_bits(b),
                p: self.p[b],
                d: &self.d[b],
            })
            .collect();
        let mut s = ser.serialize_struct("SaSolution", 3)?;
        s.serialize_field("representatives", &self.representatives)?;
        s.serialize_field("patterns", &patterns)?;
        s.serialize_field("tol", &self.tol)?;
        s.end()
    }
}

/// Residuals of every Sherali-Adams constraint family.
#[derive(Debug, Clone, Serialize)]
pub struct SaFeasibilityReport {
    pub arv: FeasibilityReport,
    /// max_b |sum_{u<v} d^b(u,v) - n^2 p^b|
    pub pattern_sum_residual: f64,
    /// max_b max triangle violation of d^b
    pub pattern_triangle_violation: f64,
    /// max over pairs of |sum_b d^b(u,v) - ||x_u - x_v||^2|
    pub coupling_residual: f64,
    /// |sum_b p^b - 1|
    pub probability_residual: f64,
    pub pass: bool,
}

/// Verifies every invariant of a (solution, SA system) pair at `tol`.
pub fn validate_sa(sol: &EmbeddingSolution, sa: &SaSolution, tol: f64) -> SaFeasibilityReport {
    let n = sol.n();
    let nn = (n * n) as f64;
    let arv = check_feasibility(sol, tol);
    let mut pattern_sum_residual: f64 = 0.0;
    let mut pattern_triangle_violation: f64 = 0.0;
    for b in 0..sa.pattern_count() {
        pattern_sum_residual =
            pattern_sum_residual.max((sa.d[b].pair_sum() - nn * sa.p[b]).abs());
        pattern_triangle_violation =
            pattern_triangle_violation.max(sa.d[b].max_triangle_violation());
    }
    let mut coupling_residual: f64 = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            let total: f64 = (0..sa.pattern_count()).map(|b| sa.d[b].get(u, v)).sum();
            coupling_residual =
                coupling_residual.max((total - sol.squared_distance(u, v)).abs());
        }
    }
    let probability_residual = (sa.p.iter().sum::<f64>() - 1.0).abs();
    let pass = arv.pass
        && pattern_sum_residual <= tol * nn.max(1.0)
        && pattern_triangle_violation <= tol
        && coupling_residual <= tol
        && probability_residual <= tol;
    SaFeasibilityReport {
        arv,
        pattern_sum_residual,
        pattern_triangle_violation,
        coupling_residual,
        probability_residual,
        pass,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SaConfig {
    pub n_cap: usize,
    pub set_cap: usize,
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub feas_target: f64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            n_cap: 40,
            set_cap: 10,
            tol: DEFAULT_TOL,
            max_outer: 400,
            max_inner: 2500,
            feas_target: 5e-10,
        }
    }
}

/// Solves the Sherali-Adams strengthening restricted to the single
/// representative set R = C, jointly over the Gram matrix, the per-pattern
/// distance systems d^b, and the pattern probabilities p^b.
pub fn solve_sa_for_set(
    g: &Graph,
    c: &[usize],
    tol: f64,
) -> Result<(EmbeddingSolution, SaSolution)> {
    solve_sa_for_set_with(
        g,
        c,
        SaConfig {
            tol,
            ..SaConfig::default()
        },
    )
}

pub fn solve_sa_for_set_with(
    g: &Graph,
    c: &[usize],
    cfg: SaConfig,
) -> Result<(EmbeddingSolution, SaSolution)> {
    let n = g.n();
    if n > cfg.n_cap {
        return Err(Error::ResourceLimit(format!(
            "SA solver capped at n={}, graph has n={n}",
            cfg.n_cap
        )));
    }
    g.membership_mask(c)?;
    if c.is_empty() || c.len() > cfg.set_cap {
        return Err(Error::invalid(format!(
            "representative set must have 1..={} vertices, got {}",
            cfg.set_cap,
            c.len()
        )));
    }
    let reps = c.to_vec();
    let q = reps.len();
    let b_count = 1usize << q;
    let sys = TriangleSystem::new(n);
    let pcount = sys.pair_count();

    // Frozen zero entries per pattern: pairs of representatives on one side.
    let mut frozen: Vec<Vec<bool>> = vec![vec![false; pcount]; b_count];
    for (b, frozen_b) in frozen.iter_mut().enumerate() {
        for i in 0..q {
            for j in (i + 1)..q {
                if (b >> i) & 1 == (b >> j) & 1 {
                    frozen_b[sys.pair(reps[i], reps[j])] = true;
                }
            }
        }
    }

    let mut cost = vec![0.0; pcount];
    let obj_scale = 1.0 / (2.0 * g.degree() as f64 * n as f64);
    for &(u, v) in g.edges() {
        cost[sys.pair(u, v)] = obj_scale;
    }

    // Warm start from a converged ARV solve.
    let arv_cfg = ArvConfig {
        tol: cfg.tol,
        ..ArvConfig::default()
    };
    let mut arv_state = AlmState::new(&sys, warm_start_gram(g), cost.clone());
    arv_state.run(&sys, arv_cfg.max_outer, arv_cfg.max_inner, arv_cfg.feas_target);

    let mut state = SaAlmState::new(&sys, arv_state.gram.clone(), cost, frozen, b_count);
    state.run(&sys, cfg.max_outer, cfg.max_inner, cfg.feas_target);

    // ARV block repaired exactly; the SA block keeps its converged residuals.
    let sol = finish_arv_solution(g, &sys, &state.gram, cfg.tol)?;
    let mut d_mats = Vec::with_capacity(b_count);
    for b in 0..b_count {
        let mut m = DistanceMatrix::zeros(n, MetricKind::Squared);
        for (p, &(u, v)) in sys.pairs.iter().enumerate() {
            m.set_sym(u, v, state.dvecs[b][p].max(0.0));
        }
        d_mats.push(m);
    }
    let sa = SaSolution {
        representatives: reps,
        p: state.p.clone(),
        d: d_mats,
        tol: cfg.tol,
    };
    let report = validate_sa(&sol, &sa, cfg.tol);
    if !report.pass {
        return Err(Error::SolverFailure {
            message: format!(
                "SA residuals exceed tol: pattern-sum {:.3e}, pattern-triangle {:.3e}, coupling {:.3e}",
                report.pattern_sum_residual,
                report.pattern_triangle_violation,
                report.coupling_residual
            ),
            max_triangle_violation: report.arv.max_triangle_violation,
            normalization_residual: report.arv.normalization_residual,
        });
    }
    Ok((sol, sa))
}

/// ALM state for the joint (Gram, {d^b}, {p^b}) program.
struct SaAlmState {
    gram: DMatrix<f64>,
    dvecs: Vec<Vec<f64>>,
    p: Vec<f64>,
    frozen: Vec<Vec<bool>>,
    cost: Vec<f64>,
    y_norm: f64,
    mu: Vec<f64>,
    y_pattern: Vec<f64>,
    mu_pattern: Vec<Vec<f64>>,
    w_couple: Vec<f64>,
    rho: f64,
    eta: f64,
}

impl SaAlmState {
    fn new(
        sys: &TriangleSystem,
        gram: DMatrix<f64>,
        cost: Vec<f64>,
        frozen: Vec<Vec<bool>>,
        b_count: usize,
    ) -> Self {
        let pcount = sys.pair_count();
        let mut d0 = vec![0.0; pcount];
        sys.distances_from_gram(&gram, &mut d0);
        let p = vec![1.0 / b_count as f64; b_count];
        let dvecs: Vec<Vec<f64>> = (0..b_count)
            .map(|b| {
                (0..pcount)
                    .map(|i| if frozen[b][i] { 0.0 } else { d0[i] * p[b] })
                    .collect()
            })
            .collect();
        SaAlmState {
            gram,
            dvecs,
            p,
            frozen,
            cost,
            y_norm: 0.0,
            mu: vec![0.0; sys.triple_count()],
            y_pattern: vec![0.0; b_count],
            mu_pattern: vec![vec![0.0; sys.triple_count()]; b_count],
            w_couple: vec![0.0; pcount],
            rho: 1.0,
            eta: 0.02,
        }
    }

    fn b_count(&self) -> usize {
        self.p.len()
    }

    /// Value plus gradients in (pair space of d(G), each d^b, p).
    #[allow(clippy::too_many_arguments)]
    fn eval(
        &self,
        sys: &TriangleSystem,
        d: &[f64],
        dvecs: &[Vec<f64>],
        p: &[f64],
        q: &mut [f64],
        qb: &mut [Vec<f64>],
        qp: &mut [f64],
    ) -> f64 {
        let n = sys.n as f64;
        let nn = n * n;
        let mut f = 0.0;
        let mut sum = 0.0;
        for (i, &dv) in d.iter().enumerate() {
            f += self.cost[i] * dv;
            sum += dv;
            q[i] = self.cost[i];
        }
        let g0 = (sum - nn) / nn;
        f += self.y_norm * g0 + 0.5 * self.rho * g0 * g0;
        let coeff = (self.y_norm + self.rho * g0) / nn;
        for qi in q.iter_mut() {
            *qi += coeff;
        }
        for tb in qb.iter_mut() {
            for x in tb.iter_mut() {
                *x = 0.0;
            }
        }
        for x in qp.iter_mut() {
            *x = 0.0;
        }
        // ARV triangle penalties.
        for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
            let (p0, p1, p2) = (tri[0] as usize, tri[1] as usize, tri[2] as usize);
            let a = d[p0] - d[p1] - d[p2];
            let m = self.mu[t] + self.rho * a;
            if m > 0.0 {
                f += (m * m - self.mu[t] * self.mu[t]) / (2.0 * self.rho);
                q[p0] += m;
                q[p1] -= m;
                q[p2] -= m;
            } else {
                f -= self.mu[t] * self.mu[t] / (2.0 * self.rho);
            }
        }
        // Per-pattern sum and triangle constraints.
        for b in 0..self.b_count() {
            let sb: f64 = dvecs[b].iter().sum();
            let gb = (sb - nn * p[b]) / nn;
            f += self.y_pattern[b] * gb + 0.5 * self.rho * gb * gb;
            let cb = (self.y_pattern[b] + self.rho * gb) / nn;
            for x in qb[b].iter_mut() {
                *x += cb;
            }
            qp[b] -= self.y_pattern[b] + self.rho * gb;
            for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
                let (p0, p1, p2) = (tri[0] as usize, tri[1] as usize, tri[2] as usize);
                let a = dvecs[b][p0] - dvecs[b][p1] - dvecs[b][p2];
                let m = self.mu_pattern[b][t] + self.rho * a;
                if m > 0.0 {
                    f += (m * m - self.mu_pattern[b][t] * self.mu_pattern[b][t])
                        / (2.0 * self.rho);
                    qb[b][p0] += m;
                    qb[b][p1] -= m;
                    qb[b][p2] -= m;
                } else {
                    f -= self.mu_pattern[b][t] * self.mu_pattern[b][t] / (2.0 * self.rho);
                }
            }
        }
        // Coupling: sum_b d^b(u,v) = d(u,v).
        for i in 0..d.len() {
            let e: f64 = (0..self.b_count()).map(|b| dvecs[b][i]).sum::<f64>() - d[i];
            f += self.w_couple[i] * e + 0.5 * self.rho * e * e;
            let ce = self.w_couple[i] + self.rho * e;
            q[i] -= ce;
            for tb in qb.iter_mut() {
                tb[i] += ce;
            }
        }
        f
    }

    fn minimize_inner(&mut self, sys: &TriangleSystem, max_inner: usize) {
        let pcount = sys.pair_count();
        let bc = self.b_count();
        self.eta = self.eta.max(1e-3 / self.rho);
        let mut d = vec![0.0; pcount];

        #[derive(Clone)]
        struct Point {
            gram: DMatrix<f64>,
            dvecs: Vec<Vec<f64>>,
            p: Vec<f64>,
        }
        struct Grads {
            q: Vec<f64>,
            qb: Vec<Vec<f64>>,
            qp: Vec<f64>,
        }
        let combine = |a: &Point, b: &Point, omega: f64| -> Point {
            // a + omega * (a - b)
            Point {
                gram: &a.gram + (&a.gram - &b.gram) * omega,
                dvecs: a
                    .dvecs
                    .iter()
                    .zip(&b.dvecs)
                    .map(|(x, y)| {
                        x.iter()
                            .zip(y)
                            .map(|(xa, xb)| xa + omega * (xa - xb))
                            .collect()
                    })
                    .collect(),
                p: a
                    .p
                    .iter()
                    .zip(&b.p)
                    .map(|(xa, xb)| xa + omega * (xa - xb))
                    .collect(),
            }
        };
        let eval_point = |state: &Self, pt: &Point, d: &mut [f64]| -> (f64, Grads) {
            let mut g = Grads {
                q: vec![0.0; pcount],
                qb: vec![vec![0.0; pcount]; bc],
                qp: vec![0.0; bc],
            };
            sys.distances_from_gram(&pt.gram, d);
            let f = state.eval(sys, d, &pt.dvecs, &pt.p, &mut g.q, &mut g.qb, &mut g.qp);
            (f, g)
        };
        let step_from = |state: &Self, pt: &Point, grads: &Grads, eta: f64| -> Point {
            let mut m = DMatrix::zeros(sys.n, sys.n);
            for (i, &(u, v)) in sys.pairs.iter().enumerate() {
                m[(u, u)] += grads.q[i];
                m[(v, v)] += grads.q[i];
                m[(u, v)] -= grads.q[i];
                m[(v, u)] -= grads.q[i];
            }
            Point {
                gram: psd_project_centered(&(&pt.gram - m * eta)),
                dvecs: (0..bc)
                    .map(|b| {
                        (0..pcount)
                            .map(|i| {
                                if state.frozen[b][i] {
                                    0.0
                                } else {
                                    (pt.dvecs[b][i] - eta * grads.qb[b][i]).max(0.0)
                                }
                            })
                            .collect()
                    })
                    .collect(),
                p: project_simplex(
                    &pt.p
                        .iter()
                        .zip(&grads.qp)
                        .map(|(pv, g)| pv - eta * g)
                        .collect::<Vec<f64>>(),
                ),
            }
        };
        let dot_diff = |grads: &Grads, a: &Point, b: &Point| -> (f64, f64) {
            let mut lin = 0.0;
            let mut sq = 0.0;
            let mut gm: DMatrix<f64> = DMatrix::zeros(sys.n, sys.n);
            for (i, &(u, v)) in sys.pairs.iter().enumerate() {
                gm[(u, u)] += grads.q[i];
                gm[(v, v)] += grads.q[i];
                gm[(u, v)] -= grads.q[i];
                gm[(v, u)] -= grads.q[i];
            }
            for ((ga, xa), xb) in gm.iter().zip(a.gram.iter()).zip(b.gram.iter()) {
                lin += ga * (xa - xb);
                sq += (xa - xb) * (xa - xb);
            }
            for b_idx in 0..a.dvecs.len() {
                for i in 0..a.dvecs[b_idx].len() {
                    let diff = a.dvecs[b_idx][i] - b.dvecs[b_idx][i];
                    lin += grads.qb[b_idx][i] * diff;
                    sq += diff * diff;
                }
            }
            for i in 0..a.p.len() {
                let diff = a.p[i] - b.p[i];
                lin += grads.qp[i] * diff;
                sq += diff * diff;
            }
            (lin, sq)
        };

        let mut x_cur = Point {
            gram: self.gram.clone(),
            dvecs: self.dvecs.clone(),
            p: self.p.clone(),
        };
        let mut x_prev = x_cur.clone();
        let (mut f_cur, _) = eval_point(self, &x_cur, &mut d);
        let mut t_k = 1.0f64;
        let mut it = 0usize;
        while it < max_inner {
            it += 1;
            let t_next = (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0;
            let omega = (t_k - 1.0) / t_next;
            let y = combine(&x_cur, &x_prev, omega);
            let (f_y, grads) = eval_point(self, &y, &mut d);
            let mut accepted = None;
            for _ in 0..60 {
                let candidate = step_from(self, &y, &grads, self.eta);
                let (f_new, _) = eval_point(self, &candidate, &mut d);
                let (lin, sq) = dot_diff(&grads, &candidate, &y);
                if f_new <= f_y + lin + sq / (2.0 * self.eta) + 1e-12 * f_y.abs().max(1.0) {
                    accepted = Some((candidate, f_new, sq.sqrt()));
                    break;
                }
                self.eta *= 0.5;
                if self.eta < 1e-15 {
                    break;
                }
            }
            let Some((candidate, f_new, step)) = accepted else {
                break;
            };
            if f_new > f_cur + 1e-12 * f_cur.abs().max(1.0) {
                t_k = 1.0;
                x_prev = x_cur.clone();
                continue;
            }
            let stalled = step / self.eta <= 1e-10;
            x_prev = x_cur;
            x_cur = candidate;
            t_k = t_next;
            let improved = f_cur - f_new;
            f_cur = f_new;
            self.eta = (self.eta * 1.2).min(100.0);
            if stalled || (improved.abs() <= 1e-14 * f_cur.abs().max(1.0) && it > 4) {
                break;
            }
        }
        self.gram = x_cur.gram;
        self.dvecs = x_cur.dvecs;
        self.p = x_cur.p;
    }

    fn residuals(&self, sys: &TriangleSystem) -> f64 {
        let pcount = sys.pair_count();
        let nn = (sys.n * sys.n) as f64;
        let mut d = vec![0.0; pcount];
        sys.distances_from_gram(&self.gram, &mut d);
        let mut worst = ((d.iter().sum::<f64>() - nn) / nn).abs();
        worst = worst.max(sys.max_violation(&d));
        for b in 0..self.b_count() {
            let sb: f64 = self.dvecs[b].iter().sum();
            worst = worst.max(((sb - nn * self.p[b]) / nn).abs());
            worst = worst.max(sys.max_violation(&self.dvecs[b]));
        }
        for i in 0..pcount {
            let e: f64 = (0..self.b_count()).map(|b| self.dvecs[b][i]).sum::<f64>() - d[i];
            worst = worst.max(e.abs());
        }
        worst
    }

    fn update_multipliers(&mut self, sys: &TriangleSystem) {
        let pcount = sys.pair_count();
        let nn = (sys.n * sys.n) as f64;
        let mut d = vec![0.0; pcount];
        sys.distances_from_gram(&self.gram, &mut d);
        let g0 = (d.iter().sum::<f64>() - nn) / nn;
        self.y_norm += self.rho * g0;
        for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
            let a = d[tri[0] as usize] - d[tri[1] as usize] - d[tri[2] as usize];
            self.mu[t] = (self.mu[t] + self.rho * a).max(0.0);
        }
        for b in 0..self.b_count() {
            let sb: f64 = self.dvecs[b].iter().sum();
            let gb = (sb - nn * self.p[b]) / nn;
            self.y_pattern[b] += self.rho * gb;
            for (t, tri) in sys.triples.chunks_exact(3).enumerate() {
                let a = self.dvecs[b][tri[0] as usize]
                    - self.dvecs[b][tri[1] as usize]
                    - self.dvecs[b][tri[2] as usize];
                self.mu_pattern[b][t] = (self.mu_pattern[b][t] + self.rho * a).max(0.0);
            }
        }
        for i in 0..pcount {
            let e: f64 = (0..self.b_count()).map(|b| self.dvecs[b][i]).sum::<f64>() - d[i];
            self.w_couple[i] += self.rho * e;
        }
    }

    fn run(&mut self, sys: &TriangleSystem, max_outer: usize, max_inner: usize, feas: f64) {
        let debug = std::env::var("SDPCUT_DEBUG").is_ok();
        let mut prev = f64::INFINITY;
        for round in 0..max_outer {
            self.minimize_inner(sys, max_inner);
            let worst = self.residuals(sys);
            if debug {
                let mut d = vec![0.0; sys.pair_count()];
                sys.distances_from_gram(&self.gram, &mut d);
                let obj: f64 = d.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
                eprintln!(
                    "sa outer {round}: obj={obj:.6} worst={worst:.3e} rho={} eta={:.3e}",
                    self.rho, self.eta
                );
            }
            if worst <= feas {
                break;
            }
            self.update_multipliers(sys);
            if worst > 0.25 * prev && worst > 10.0 * feas {
                self.rho = (self.rho * 2.0).min(1e8);
            }
            prev = worst;
        }
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Draws a pattern b with probability p^b and returns D = d^b / p^b.
///
/// The returned matrix satisfies the triangle inequality, sums to n^2 over
/// unordered pairs, and restricts to a cut semimetric on R, all within
/// tolerances scaled by 1/p^b (the division amplifies solver residuals).
pub fn sample_cut_metric(sa: &SaSolution, seed: u64) -> Result<DistanceMatrix> {
    let total: f64 = sa.p.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("all pattern probabilities are zero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = sa.pattern_count() - 1;
    for (b, &pb) in sa.p.iter().enumerate() {
        acc += pb;
        if draw < acc {
            chosen = b;
            break;
        }
    }
    let pb = sa.p[chosen];
    if pb <= 0.0 {
        return Err(Error::invalid(format!(
            "drew pattern {chosen} with zero probability"
        )));
    }
    let n = sa.d[chosen].n();
    let mut scaled = DistanceMatrix::zeros(n, MetricKind::Sampled);
    for u in 0..n {
        for v in (u + 1)..n {
            scaled.set_sym(u, v, sa.d[chosen].get(u, v) / pb);
        }
    }
    Ok(scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::metric::{energy, squared_distances};
    use crate::oracle::brute_phi;
    use approx::assert_abs_diff_eq;

    #[test]
    fn integral_cut_c8_is_exact() {
        let g = gen::cycle(8);
        let sol = embed_integral_cut(&g, &[0, 1, 2, 3]).unwrap();
        let report = check_feasibility(&sol, 0.0);
        assert_eq!(report.max_triangle_violation, 0.0);
        assert_eq!(report.normalization_residual, 0.0);
        assert_eq!(sol.objective, 0.25);
        // Every cross pair sits at squared distance 4.
        assert_eq!(sol.squared_distance(0, 4), 4.0);
        assert_eq!(squared_distances(&sol).pair_sum(), 64.0);
    }

    #[test]
    fn integral_cut_half_set_matches_expansion() {
        let g = gen::clique_ring(2, 4);
        let s: Vec<usize> = (0..4).collect();
        let sol = embed_integral_cut(&g, &s).unwrap();
        let phi = crate::graph::expansion(&g, &s).unwrap();
        assert_abs_diff_eq!(
            sol.objective,
            crate::rat::to_f64(&phi),
            epsilon = 1e-15
        );
    }

    #[test]
    fn integral_cut_k4_singleton() {
        let g = gen::complete(4);
        let sol = embed_integral_cut(&g, &[2]).unwrap();
        assert_abs_diff_eq!(sol.objective, 2.0 / 3.0, epsilon = 1e-12);
        let report = check_feasibility(&sol, 1e-12);
        assert!(report.pass);
        assert!(embed_integral_cut(&g, &[0, 1, 2]).is_err());
    }

    #[test]
    fn feasibility_flags_violating_triple() {
        // Collinear points 0, 1, 2: squared distances violate the triangle
        // inequality (4 > 1 + 1).
        let sol = EmbeddingSolution::new(
            vec![vec![0.0], vec![1.0], vec![2.0]],
            0.0,
            SolutionKind::Reduced,
        );
        let report = check_feasibility(&sol, 1e-9);
        assert!(!report.pass);
        assert_abs_diff_eq!(report.max_triangle_violation, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn arv_on_single_edge_is_forced() {
        let g = gen::complete(2);
        let sol = solve_arv(&g, 1e-6).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-6);
        assert!(check_feasibility(&sol, 1e-6).pass);
    }

    #[test]
    fn arv_on_k4_matches_closed_form() {
        // Every unordered pair of K_n is an edge, so any normalized solution
        // has objective exactly n/(2(n-1)).
        let g = gen::complete(4);
        let sol = solve_arv(&g, 1e-6).unwrap();
        assert!(check_feasibility(&sol, 1e-6).pass);
        assert_abs_diff_eq!(sol.objective, 2.0 / 3.0, epsilon = 1e-5);
    }

    #[test]
    fn arv_respects_oracle_bound_on_c6() {
        let g = gen::cycle(6);
        let sol = solve_arv(&g, 1e-6).unwrap();
        assert!(check_feasibility(&sol, 1e-6).pass);
        let phi = crate::rat::to_f64(&brute_phi(&g).unwrap().value);
        assert!(
            sol.objective <= phi + 1e-4,
            "objective {} vs phi {}",
            sol.objective,
            phi
        );
        let d2 = squared_distances(&sol);
        assert_abs_diff_eq!(sol.objective, energy(&g, &d2).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn arv_disconnected_reaches_zero() {
        let g = gen::disjoint_cliques(2, 4);
        let sol = solve_arv(&g, 1e-6).unwrap();
        assert!(sol.objective <= 1e-4, "objective {}", sol.objective);
    }

    #[test]
    fn sa_degenerate_single_representative() {
        let g = gen::cycle(4);
        let (sol, sa) = solve_sa_for_set(&g, &[0], 1e-6).unwrap();
        assert_eq!(sa.pattern_count(), 2);
        assert_abs_diff_eq!(sa.p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let report = validate_sa(&sol, &sa, 1e-6);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn sa_disconnected_components_reach_zero() {
        let g = gen::disjoint_cliques(2, 4);
        let (sol, sa) = solve_sa_for_set(&g, &[0, 4], 1e-6).unwrap();
        assert!(sol.objective <= 1e-4, "objective {}", sol.objective);
        let report = validate_sa(&sol, &sa, 1e-6);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn sa_c8_antipodal_representatives() {
        let g = gen::cycle(8);
        let (sol, sa) = solve_sa_for_set(&g, &[0, 4], 1e-6).unwrap();
        assert!(sol.objective <= 0.25 + 1e-4, "objective {}", sol.objective);
        let arv = solve_arv(&g, 1e-6).unwrap();
        assert!(
            sol.objective >= arv.objective - 1e-4,
            "sa {} vs arv {}",
            sol.objective,
            arv.objective
        );
        assert!(validate_sa(&sol, &sa, 1e-6).pass);
    }

    #[test]
    fn sampled_metric_from_concentrated_distribution() {
        // Hand-built integral witness: p concentrated on the planted pattern.
        let g = gen::disjoint_cliques(2, 4);
        let s: Vec<usize> = (0..4).collect();
        let sol = embed_integral_cut(&g, &s).unwrap();
        let d2 = squared_distances(&sol);
        let reps = vec![0usize, 4];
        // Pattern 1 = b(0)=1, b(4)=0 matches the planted side assignment.
        let mut d = vec![DistanceMatrix::zeros(8, MetricKind::Squared); 4];
        d[1] = d2.clone();
        let sa = SaSolution {
            representatives: reps,
            p: vec![0.0, 1.0, 0.0, 0.0],
            d,
            tol: 1e-9,
        };
        for seed in 0..5 {
            let m = sample_cut_metric(&sa, seed).unwrap();
            assert_eq!(m, {
                let mut c = d2.clone();
                c.scale(1.0);
                DistanceMatrix::new(8, MetricKind::Sampled, (0..64).map(|i| c.get(i / 8, i % 8)).collect()).unwrap()
            });
        }
        let zero = SaSolution {
            representatives: vec![0, 4],
            p: vec![0.0; 4],
            d: vec![DistanceMatrix::zeros(8, MetricKind::Squared); 4],
            tol: 1e-9,
        };
        assert!(sample_cut_metric(&zero, 1).is_err());
    }

    #[test]
    fn sampled_metric_mean_matches_squared_distances() {
        let g = gen::cycle(6);
        let (sol, sa) = solve_sa_for_set(&g, &[0, 3], 1e-6).unwrap();
        let trials = 4000;
        let n = sol.n();
        let mut mean = vec![0.0; n * n];
        for seed in 0..trials {
            let m = sample_cut_metric(&sa, seed).unwrap();
            for u in 0..n {
                for v in 0..n {
                    mean[u * n + v] += m.get(u, v) / trials as f64;
                }
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                let want = sol.squared_distance(u, v);
                let got = mean[u * n + v];
                assert!(
                    (got - want).abs() <= 0.08 * want.max(1.0),
                    "pair ({u},{v}): mean {got} vs {want}"
                );
            }
        }
    }
}
