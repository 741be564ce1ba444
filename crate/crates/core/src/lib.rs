//! Sparsest-cut machinery at desk scale: the ARV semidefinite relaxation and
//! a single-set Sherali-Adams strengthening, structure pipelines that either
//! cover an SDP solution by few low-diameter sets or emit a verifiable
//! spectral/expansion certificate, and the rounding schemes that consume such
//! covers. Everything is checkable against brute-force oracles on small
//! regular graphs.
//!
//! Modules follow the pipeline order:
//!
//! | module | contents |
//! |--------|----------|
//! | [`graph`] | regular graphs, expansion, normalized-Laplacian spectra |
//! | [`oracle`] | exhaustive ground truth (phi, phi_k, sse) and verifiers |
//! | [`sdp`] | ARV relaxation, integral embeddings, Sherali-Adams for one set |
//! | [`metric`] | distance matrices, Gaussian dimension reduction, l2^2 -> l2 embedding |
//! | [`partition`] | padded/Lipschitz random partitions, merging, bump functions, cover transfer |
//! | [`structure`] | the two cover-or-certificate pipelines |
//! | [`rounding`] | Frechet sweeps, well-spread extraction, ARV and SA rounding |
//! | [`gen`] | test-instance generators |
//!
//! All operations are deterministic given their seed; types are immutable
//! after construction and safe to share across threads.

pub mod error;
pub mod gen;
pub mod graph;
pub mod metric;
pub mod oracle;
pub mod partition;
pub mod rat;
pub mod rounding;
pub mod sdp;
pub mod structure;

pub use error::{Error, Result};
pub use graph::{Cut, Graph, Spectrum};
pub use metric::{DistanceMatrix, DistortionReport, MetricKind};
pub use oracle::OracleResult;
pub use partition::{Certificate, Cover, Partition};
pub use sdp::{EmbeddingSolution, FeasibilityReport, SaSolution, SolutionKind};
pub use structure::StructureOutcome;
pub use rounding::WellSpreadSet;
