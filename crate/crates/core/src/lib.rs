//! Discrete calculus and Schrödinger-operator verification on weighted
//! graphs.
//!
//! The crate represents locally finite weighted graphs (G, ω, μ) — including
//! lazily generated infinite families — together with pseudometrics, the
//! weighted Laplacian Δf(x) = (1/μ(x)) Σ_y ω(x,y)(f(y) − f(x)), weighted
//! ℓ^p norms with exponential weights, and a Dirichlet solver for
//! Δu − Vu = 0 on finite balls. On top of those it numerically certifies
//! the pointwise estimates and sum inequalities that underpin uniqueness of
//! solutions in weighted ℓ^p classes, reporting per-vertex margins.
//!
//! ```
//! use schrograph::*;
//!
//! // the line with its intrinsic metric, V = 1
//! let g = Graph::lattice(1)?;
//! let m = PseudoMetric::default_for(&g);
//! let region = ball_region(&g, &m, &g.origin(), 10.0)?;
//! let u = solve_constant_boundary(region.clone(), 1.0, Potential::constant(1.0))?;
//!
//! // the supersolution estimate holds at every vertex of the ball
//! let s = jump_size(&g, &m, &region)?;
//! let c1 = intrinsic_bound(&g, &m, 1.0, &region)?;
//! let tp = propose_params(g.origin(), 1.0, 2.0, s.value, c1.value, 0.5)?
//!     .with_cutoff_radius(10.0);
//! let report = check_lemma_61(&g, &m, &Potential::constant(1.0), &tp, &region)?;
//! assert!(report.passed() && u.eval(&VertexId::from(0))? > 0.0);
//! # Ok::<(), Error>(())
//! ```

// `!(x > 0.0)` is the NaN-rejecting form of the domain checks; `x <= 0.0`
// would silently accept NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod function;
pub mod graph;
pub mod metric;
pub mod numeric;
pub mod report;
pub mod schrodinger;
pub mod spaces;
pub mod verifier;

pub use error::{Error, Result};
pub use function::{GraphFunction, Provenance};
pub use graph::{
    make_family, materialize, validate_region, FamilyDescriptor, Graph, GraphRegion, VertexId,
};
pub use metric::{
    ball, ball_region, distance_laplacian_bound, intrinsic_bound, jump_size, MetricBound,
    MetricKind, PseudoMetric,
};
pub use report::{Verdict, VerificationReport};
pub use schrodinger::{
    apply_operator, lattice_characteristic_roots, make_symmetric_growing_solution, residual_report,
    solve_constant_boundary, DirichletProblem, Potential, PotentialCertificate,
};
pub use spaces::{
    growth_estimate, summable_weight_check, truncated_lp_norm, GrowthEstimate, GrowthVerdict,
    SummabilityReport, SummabilityVerdict, WeightFamily,
};
pub use verifier::{
    alpha_threshold, beta_threshold, check_compatibility_46, check_lemma_51, check_lemma_52,
    check_lemma_61, check_prop_43, check_prop_44, cutoff_eta, exponent_xi, h_constant, k_constant,
    propose_params, supersolution_zeta, TestFunctionParams,
};
