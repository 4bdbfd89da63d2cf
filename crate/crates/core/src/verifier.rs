//! Construction of the radial test functions (cutoff η, exponential tilt ξ,
//! supersolution ζ), the dissipation constants behind the uniqueness
//! thresholds, threshold root-finding, and the numerical checks of the
//! cutoff/supersolution estimates and the two a-priori sum inequalities.
//!
//! All checks evaluate full neighborhoods (halo edges included); η, ξ and ζ
//! are globally defined closed forms in the distance, so nothing is ever
//! truncated at the region boundary.

use std::collections::BTreeSet;

use serde_json::json;

use crate::calculus::laplacian;
use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{Graph, GraphRegion, VertexId};
use crate::metric::{ball, PseudoMetric};
use crate::numeric::{bisect_increasing, stable_sum};
use crate::report::{param_map, VerificationReport};
use crate::schrodinger::Potential;

/// Absolute and relative inequality tolerance: checks pass at margin
/// >= -(ATOL + RTOL * scale) where scale is the larger side's magnitude.
const INEQ_ATOL: f64 = 1e-9;
const INEQ_RTOL: f64 = 1e-9;
/// Relative residual allowed when a check requires u to solve the equation.
const EQUATION_RTOL: f64 = 1e-10;

fn ineq_tol(scale: f64) -> f64 {
    INEQ_ATOL + INEQ_RTOL * scale
}

/// Parameters of the radial test functions and of the threshold conditions.
#[derive(Clone, Debug)]
pub struct TestFunctionParams {
    /// Base point x0.
    pub base: VertexId,
    /// Exponential tilt rate α > 0.
    pub alpha: f64,
    /// Cutoff radius R > 0.
    pub cutoff_radius: f64,
    /// Fraction δ ∈ (0, 1) of R carrying the linear ramp of the cutoff.
    pub ramp_fraction: f64,
    /// Jump size s >= 0 of the metric.
    pub jump_size: f64,
    /// 1-intrinsic bound C0 of the metric.
    pub one_intrinsic_bound: f64,
    /// Exponent p >= 1.
    pub exponent: f64,
    /// Certified infimum c0 > 0 of the potential.
    pub potential_infimum: f64,
    /// Weight rate β > 0 of the membership class under test.
    pub weight_rate: f64,
}

impl TestFunctionParams {
    pub fn with_cutoff_radius(mut self, r: f64) -> Self {
        self.cutoff_radius = r;
        self
    }

    fn validate_basics(&self) -> Result<()> {
        let checks: [(&str, bool); 4] = [
            ("alpha > 0", self.alpha > 0.0),
            ("s >= 0", self.jump_size >= 0.0),
            ("p >= 1", self.exponent >= 1.0),
            ("c0 > 0", self.potential_infimum > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::ConstraintViolated(name.to_string()));
            }
        }
        Ok(())
    }

    /// The constraint chain of the square-exponent uniqueness route:
    /// β² e^{2sβ} < 2 c0 p, α² e^{2sα} < 2 c0 p, α > β,
    /// δ < 1/2 − β/(2α), and R > max{2s/(1−2δ), 1}.
    pub fn validate_square_threshold_context(&self) -> Result<()> {
        self.validate_basics()?;
        let TestFunctionParams {
            alpha,
            cutoff_radius: r,
            ramp_fraction: delta,
            jump_size: s,
            exponent: p,
            potential_infimum: c0,
            weight_rate: beta,
            ..
        } = *self;
        if !(beta > 0.0) {
            return Err(Error::ConstraintViolated("beta > 0".into()));
        }
        let rhs = 2.0 * c0 * p;
        let lhs_beta = beta * beta * (2.0 * s * beta).exp();
        if !(lhs_beta < rhs) {
            return Err(Error::ConstraintViolated(format!(
                "beta^2 exp(2 s beta) < 2 c0 p (got {lhs_beta} >= {rhs})"
            )));
        }
        let lhs_alpha = alpha * alpha * (2.0 * s * alpha).exp();
        if !(lhs_alpha < rhs) {
            return Err(Error::ConstraintViolated(format!(
                "alpha^2 exp(2 s alpha) < 2 c0 p (got {lhs_alpha} >= {rhs})"
            )));
        }
        if !(alpha > beta) {
            return Err(Error::ConstraintViolated(format!(
                "alpha > beta (got {alpha} <= {beta})"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::ConstraintViolated(format!(
                "0 < delta < 1 (got {delta})"
            )));
        }
        let delta_cap = 0.5 - beta / (2.0 * alpha);
        if !(delta < delta_cap) {
            return Err(Error::ConstraintViolated(format!(
                "delta < 1/2 - beta/(2 alpha) (got {delta} >= {delta_cap})"
            )));
        }
        let r_floor = (2.0 * s / (1.0 - 2.0 * delta)).max(1.0);
        if !(r > r_floor) {
            return Err(Error::ConstraintViolated(format!(
                "R > max(2s/(1-2 delta), 1) (got {r} <= {r_floor})"
            )));
        }
        Ok(())
    }

    /// The constraint of the linear uniqueness route: C0 α e^{sα} < c0 p.
    pub fn validate_linear_threshold_context(&self) -> Result<()> {
        self.validate_basics()?;
        if !(self.one_intrinsic_bound > 0.0) {
            return Err(Error::ConstraintViolated("C0 > 0".into()));
        }
        let lhs = self.one_intrinsic_bound * self.alpha * (self.jump_size * self.alpha).exp();
        let rhs = self.potential_infimum * self.exponent;
        if !(lhs < rhs) {
            return Err(Error::ConstraintViolated(format!(
                "C0 alpha exp(s alpha) < c0 p (got {lhs} >= {rhs})"
            )));
        }
        Ok(())
    }

    fn params_json(&self) -> std::collections::BTreeMap<String, serde_json::Value> {
        param_map([
            ("x0", json!(self.base.to_string())),
            ("alpha", json!(self.alpha)),
            ("R", json!(self.cutoff_radius)),
            ("delta", json!(self.ramp_fraction)),
            ("s", json!(self.jump_size)),
            ("C0", json!(self.one_intrinsic_bound)),
            ("p", json!(self.exponent)),
            ("c0", json!(self.potential_infimum)),
            ("beta", json!(self.weight_rate)),
        ])
    }
}

/// Deterministic parameter selection for a target weight rate β < β*:
/// α = (β + β*)/2 (which automatically satisfies the α-threshold),
/// δ = (1/2 − β/(2α))/2, and the smallest workable cutoff radius
/// R = max{2s/(1−2δ), 1} + 1. Callers typically widen R afterwards.
pub fn propose_params(
    base: VertexId,
    c0: f64,
    p: f64,
    s: f64,
    one_intrinsic_bound: f64,
    beta: f64,
) -> Result<TestFunctionParams> {
    let beta_star = beta_threshold(c0, p, s)?;
    if !(beta > 0.0 && beta < beta_star) {
        return Err(Error::ConstraintViolated(format!(
            "beta^2 exp(2 s beta) < 2 c0 p requires 0 < beta < {beta_star}, got {beta}"
        )));
    }
    let alpha = 0.5 * (beta + beta_star);
    let delta = 0.5 * (0.5 - beta / (2.0 * alpha));
    let cutoff_radius = (2.0 * s / (1.0 - 2.0 * delta)).max(1.0) + 1.0;
    let tp = TestFunctionParams {
        base,
        alpha,
        cutoff_radius,
        ramp_fraction: delta,
        jump_size: s,
        one_intrinsic_bound,
        exponent: p,
        potential_infimum: c0,
        weight_rate: beta,
    };
    tp.validate_square_threshold_context()?;
    Ok(tp)
}

/// The cutoff η(x) = min{ [R − s − d(x, x0)]₊ / (δR), 1 }: equal to 1 for
/// d <= (1−δ)R − s, linearly ramping to 0 at d = R − s, and supported in
/// the open ball of radius R − s. Materialized with its exact finite
/// support.
pub fn cutoff_eta(g: &Graph, m: &PseudoMetric, tp: &TestFunctionParams) -> Result<GraphFunction> {
    if !(tp.ramp_fraction > 0.0 && tp.ramp_fraction < 1.0) {
        return Err(Error::ConstraintViolated("0 < delta < 1".into()));
    }
    if !(tp.cutoff_radius > tp.jump_size) {
        return Err(Error::ConstraintViolated(format!(
            "R > s (got R = {} <= s = {})",
            tp.cutoff_radius, tp.jump_size
        )));
    }
    let denom = tp.ramp_fraction * tp.cutoff_radius;
    let support = ball(g, m, &tp.base, tp.cutoff_radius - tp.jump_size)?;
    let mut values = std::collections::BTreeMap::new();
    for x in support {
        let d = m.distance(g, &x, &tp.base)?;
        let v = ((tp.cutoff_radius - tp.jump_size - d) / denom).clamp(0.0, 1.0);
        values.insert(x, v);
    }
    Ok(GraphFunction::sparse_with_provenance(
        values,
        crate::function::Provenance::ClosedForm,
    ))
}

/// The exponent ξ(x) = −α [d(x, x0) − δR]₊: zero on the δR-ball, and
/// α-Lipschitz with respect to d everywhere.
pub fn exponent_xi(g: &Graph, m: &PseudoMetric, tp: &TestFunctionParams) -> Result<GraphFunction> {
    if !(tp.alpha > 0.0) {
        return Err(Error::ConstraintViolated("alpha > 0".into()));
    }
    if !(tp.ramp_fraction > 0.0 && tp.ramp_fraction < 1.0) {
        return Err(Error::ConstraintViolated("0 < delta < 1".into()));
    }
    if !(tp.cutoff_radius > 0.0) {
        return Err(Error::ConstraintViolated("R > 0".into()));
    }
    let g = g.clone();
    let m = m.clone();
    let base = tp.base.clone();
    let alpha = tp.alpha;
    let inner = tp.ramp_fraction * tp.cutoff_radius;
    Ok(GraphFunction::closed(move |x| {
        let d = m.distance(&g, x, &base)?;
        Ok(-alpha * (d - inner).max(0.0))
    }))
}

/// The supersolution ζ(x) = e^{−α d(x, x0)} ∈ (0, 1], which coincides with
/// the exponential weight of rate α.
pub fn supersolution_zeta(
    g: &Graph,
    m: &PseudoMetric,
    tp: &TestFunctionParams,
) -> Result<GraphFunction> {
    if !(tp.alpha > 0.0) {
        return Err(Error::ConstraintViolated("alpha > 0".into()));
    }
    let g = g.clone();
    let m = m.clone();
    let base = tp.base.clone();
    let alpha = tp.alpha;
    Ok(GraphFunction::closed(move |x| {
        let d = m.distance(&g, x, &base)?;
        Ok((-alpha * d).exp())
    }))
}

/// α²/2 · e^{2sα} − c0 p: the dissipation constant of the tilt estimate,
/// negative exactly when the square-route threshold condition holds.
pub fn h_constant(alpha: f64, s: f64, c0: f64, p: f64) -> f64 {
    0.5 * alpha * alpha * (2.0 * s * alpha).exp() - c0 * p
}

/// C0 α e^{αs} − p c0: the dissipation constant of the supersolution
/// estimate, negative exactly when the linear-route threshold holds.
pub fn k_constant(alpha: f64, s: f64, c_one: f64, c0: f64, p: f64) -> f64 {
    c_one * alpha * (alpha * s).exp() - p * c0
}

fn validate_threshold_args(c0: f64, p: f64, s: f64) -> Result<()> {
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(Error::InvalidParameter(format!("c0 must be > 0, got {c0}")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be >= 0, got {s}")));
    }
    Ok(())
}

/// The unique β* > 0 with (β*)² e^{2sβ*} = 2 c0 p; every β < β* satisfies
/// the square-route membership condition. Bisection runs to floating-point
/// resolution, so the defining equation is satisfied to ~1e-13 absolute.
pub fn beta_threshold(c0: f64, p: f64, s: f64) -> Result<f64> {
    validate_threshold_args(c0, p, s)?;
    let target = 2.0 * c0 * p;
    let f = |b: f64| b * b * (2.0 * s * b).exp() - target;
    let mut hi = 1.0;
    while f(hi) < 0.0 && hi < 1e9 {
        hi *= 2.0;
    }
    Ok(bisect_increasing(f, 0.0, hi))
}

/// The unique α* > 0 with C0 α* e^{sα*} = c0 p; every α < α* satisfies the
/// linear-route membership condition.
pub fn alpha_threshold(c0: f64, p: f64, s: f64, c_one: f64) -> Result<f64> {
    validate_threshold_args(c0, p, s)?;
    if !(c_one > 0.0 && c_one.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "C0 must be > 0, got {c_one}"
        )));
    }
    let target = c0 * p;
    let f = |a: f64| c_one * a * (s * a).exp() - target;
    let mut hi = 1.0;
    while f(hi) < 0.0 && hi < 1e9 {
        hi *= 2.0;
    }
    Ok(bisect_increasing(f, 0.0, hi))
}

/// Checks, at every region vertex x, the pointwise tilt estimate
///
///   (1/2) Σ_y ω(x,y) (1 − e^{ξ(y)−ξ(x)})² − p V(x) μ(x)  <=  ℋ μ(x),
///
/// with ℋ = α²/2 e^{2sα} − c0 p and full neighbor sums. Requires the
/// square-route parameter context.
pub fn check_lemma_51(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    tp: &TestFunctionParams,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    tp.validate_square_threshold_context()?;
    let xi = exponent_xi(g, m, tp)?;
    let h = h_constant(tp.alpha, tp.jump_size, tp.potential_infimum, tp.exponent);
    let mut margins = Vec::with_capacity(region.len());
    let mut scale = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let mu = region.measure(i);
        let xi_x = xi.eval(x)?;
        let mut acc = 0.0;
        for (y, w) in region.all_neighbors(i) {
            let t = 1.0 - (xi.eval(y)? - xi_x).exp();
            acc += w * t * t;
        }
        let lhs = 0.5 * acc - tp.exponent * potential.value(x)? * mu;
        let rhs = h * mu;
        scale = scale.max(lhs.abs()).max(rhs.abs());
        margins.push((x.to_string(), rhs - lhs));
    }
    let mut params = tp.params_json();
    params.insert("H".into(), json!(h));
    Ok(VerificationReport::from_margins(
        "lemma51",
        params,
        ineq_tol(scale),
        margins,
        region.len(),
    ))
}

/// Checks the three cutoff estimates at every region vertex: the gradient
/// bound |∇η| <= d(x,y)/(δR), the summed-square bound
/// Σ_y (∇η)² ω <= μ/(δR)², and the Laplacian bound |Δη| <= C0/(δR), each
/// supported on the annulus (1−δ)R − 2s <= d(x, x0) <= R and vanishing off
/// it. The margin stored per vertex is the worst of the three.
pub fn check_lemma_52(
    g: &Graph,
    m: &PseudoMetric,
    tp: &TestFunctionParams,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    let eta = cutoff_eta(g, m, tp)?;
    let r = tp.cutoff_radius;
    let delta = tp.ramp_fraction;
    let s = tp.jump_size;
    let c_one = tp.one_intrinsic_bound;
    let denom = delta * r;
    let lo = (1.0 - delta) * r - 2.0 * s;
    let mut margins = Vec::with_capacity(region.len());
    let mut scale = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let mu = region.measure(i);
        let dx = m.distance(g, x, &tp.base)?;
        let on_annulus = lo <= dx && dx <= r;
        let eta_x = eta.eval(x)?;
        let mut worst = f64::INFINITY;
        let mut grad_sq = 0.0;
        let mut flux = 0.0;
        for (y, w) in region.all_neighbors(i) {
            let de = eta.eval(y)? - eta_x;
            grad_sq += w * de * de;
            flux += w * de;
            let cap = if on_annulus {
                m.distance(g, x, y)? / denom
            } else {
                0.0
            };
            scale = scale.max(cap).max(de.abs());
            worst = worst.min(cap - de.abs());
        }
        let cap_sum = if on_annulus {
            mu / (denom * denom)
        } else {
            0.0
        };
        scale = scale.max(cap_sum).max(grad_sq);
        worst = worst.min(cap_sum - grad_sq);
        let lap = (flux / mu).abs();
        let cap_lap = if on_annulus { c_one / denom } else { 0.0 };
        scale = scale.max(cap_lap).max(lap);
        worst = worst.min(cap_lap - lap);
        margins.push((x.to_string(), worst));
    }
    Ok(VerificationReport::from_margins(
        "lemma52",
        tp.params_json(),
        ineq_tol(scale),
        margins,
        region.len(),
    ))
}

/// Checks, at every region vertex, the supersolution estimate
/// Δζ(x) − p V(x) ζ(x) <= 𝒦 ζ(x) with 𝒦 = C0 α e^{αs} − p c0. The estimate
/// holds for every α > 0 (𝒦 need not be negative).
pub fn check_lemma_61(
    g: &Graph,
    m: &PseudoMetric,
    potential: &Potential,
    tp: &TestFunctionParams,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    tp.validate_basics()?;
    let zeta = supersolution_zeta(g, m, tp)?;
    let k = k_constant(
        tp.alpha,
        tp.jump_size,
        tp.one_intrinsic_bound,
        tp.potential_infimum,
        tp.exponent,
    );
    let mut margins = Vec::with_capacity(region.len());
    let mut scale = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let zx = zeta.eval(x)?;
        let lhs = laplacian(g, &zeta, x)? - tp.exponent * potential.value(x)? * zx;
        let rhs = k * zx;
        scale = scale.max(lhs.abs()).max(rhs.abs());
        margins.push((x.to_string(), rhs - lhs));
    }
    let mut params = tp.params_json();
    params.insert("K".into(), json!(k));
    Ok(VerificationReport::from_margins(
        "lemma61",
        params,
        ineq_tol(scale),
        margins,
        region.len(),
    ))
}

/// Per-edge sign check of the compatibility hypothesis
/// [η²(y) − η²(x)][e^{ξ(y)} − e^{ξ(x)}] >= 0 on all adjacent pairs of the
/// region (halo edges included). Violating edges are report content.
pub fn check_compatibility_46(
    eta: &GraphFunction,
    xi: &GraphFunction,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    let mut margins = Vec::new();
    let mut scale = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let ex = eta.eval(x)?;
        let tx = xi.eval(x)?.exp();
        let mut handle = |y: &VertexId| -> Result<()> {
            let ey = eta.eval(y)?;
            let ty = xi.eval(y)?.exp();
            let product = (ey * ey - ex * ex) * (ty - tx);
            scale = scale.max(product.abs());
            margins.push((format!("{x}~{y}"), product));
            Ok(())
        };
        for &(j, _) in region.internal_neighbors(i) {
            if j > i {
                handle(region.vertex(j))?;
            }
        }
        for (y, _) in region.halo_neighbors(i) {
            handle(y)?;
        }
    }
    Ok(VerificationReport::from_margins(
        "compat46",
        param_map([("n_edges", json!(margins.len()))]),
        ineq_tol(scale),
        margins,
        region.len(),
    ))
}

fn compatibility_precondition(
    eta: &GraphFunction,
    xi: &GraphFunction,
    region: &GraphRegion,
) -> Result<()> {
    let report = check_compatibility_46(eta, xi, region)?;
    if !report.passed() {
        let (label, value) = report
            .margins
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("failing report has margins")
            .clone();
        let (x, y) = label.split_once('~').unwrap_or((label.as_str(), ""));
        return Err(Error::CompatibilityViolated {
            x: x.to_string(),
            y: y.to_string(),
            value,
        });
    }
    Ok(())
}

/// Support of a finitely supported test function, with its one-step
/// neighborhood, all verified to lie in the region.
fn support_with_neighborhood(
    label: &str,
    f: &GraphFunction,
    region: &GraphRegion,
) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    let support = f.finite_support().ok_or(Error::InfiniteSupport)?;
    let mut closure: BTreeSet<VertexId> = support.iter().cloned().collect();
    for v in &support {
        let i = region.index_of(v).ok_or_else(|| {
            Error::RegionTooSmall(format!("supp {label} vertex {v} not in region"))
        })?;
        if !region.is_interior(i) {
            return Err(Error::RegionTooSmall(format!(
                "neighborhood of supp {label} vertex {v} leaves the region"
            )));
        }
        for (y, _) in region.all_neighbors(i) {
            closure.insert(y.clone());
        }
    }
    Ok((support, closure.into_iter().collect()))
}

/// Verify that u satisfies Δu = Vu at the given vertices, to relative
/// residual 1e-10 against the solution's own scale.
fn equation_precondition(
    g: &Graph,
    u: &GraphFunction,
    potential: &Potential,
    vertices: &[VertexId],
) -> Result<()> {
    let scale_set: Vec<VertexId> = match u.domain() {
        Some(dom) => dom,
        None => vertices.to_vec(),
    };
    let mut scale = 0.0f64;
    for x in &scale_set {
        scale = scale.max(u.eval(x)?.abs());
    }
    let tol = EQUATION_RTOL * scale;
    for x in vertices {
        let res = crate::schrodinger::apply_operator(g, potential, u, x)?.abs();
        if res > tol {
            return Err(Error::ResidualTooLarge {
                vertex: x.to_string(),
                residual: res,
                tol,
            });
        }
    }
    Ok(())
}

/// Checks the first a-priori sum inequality for p >= 2: with η >= 0 finitely
/// supported, ξ compatible with η, and u solving the equation on supp η and
/// its neighborhood,
///
///   (1/2) Σ_x |u|^p η² e^ξ { V p μ − (1/2) Σ_y ω (1 − e^{ξ(y)−ξ(x)})² }
///     <=  Σ_{x,y} |u(x)|^p e^{ξ(y)} (η(y) − η(x))² ω(x,y).
///
/// The report carries the statement margin and the weaker factor-2 margin
/// (right-hand side doubled); the verdict gates on the statement form.
pub fn check_prop_43(
    g: &Graph,
    u: &GraphFunction,
    potential: &Potential,
    eta: &GraphFunction,
    xi: &GraphFunction,
    p: f64,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    if !(p >= 2.0) {
        return Err(Error::ConstraintViolated(format!("p >= 2 (got {p})")));
    }
    let (support, closure) = support_with_neighborhood("eta", eta, region)?;
    for v in &support {
        let val = eta.eval(v)?;
        if val < 0.0 {
            return Err(Error::NegativeTestFunction {
                vertex: v.to_string(),
                value: val,
            });
        }
    }
    compatibility_precondition(eta, xi, region)?;
    equation_precondition(g, u, potential, &closure)?;

    let mut lhs_terms = Vec::with_capacity(support.len());
    for x in &support {
        let eta_x = eta.eval(x)?;
        if eta_x == 0.0 {
            continue;
        }
        let mu = g.measure(x)?;
        let xi_x = xi.eval(x)?;
        let mut quad = 0.0;
        for (y, w) in g.neighbors(x)? {
            let t = 1.0 - (xi.eval(&y)? - xi_x).exp();
            quad += w * t * t;
        }
        let bracket = potential.value(x)? * p * mu - 0.5 * quad;
        lhs_terms.push(0.5 * u.eval(x)?.abs().powf(p) * eta_x * eta_x * xi_x.exp() * bracket);
    }
    let lhs = stable_sum(&lhs_terms);

    let mut rhs_terms = Vec::new();
    for i in 0..region.len() {
        let x = region.vertex(i);
        let eta_x = eta.eval(x)?;
        for (y, w) in region.all_neighbors(i) {
            let de = eta.eval(y)? - eta_x;
            if de == 0.0 {
                continue;
            }
            rhs_terms.push(u.eval(x)?.abs().powf(p) * xi.eval(y)?.exp() * de * de * w);
        }
    }
    let rhs = stable_sum(&rhs_terms);

    let scale = lhs.abs().max(rhs.abs());
    let margins = vec![
        ("statement".to_string(), rhs - lhs),
        ("relaxed_factor2".to_string(), 2.0 * rhs - lhs),
    ];
    Ok(VerificationReport::from_margins(
        "prop43",
        param_map([
            ("p", json!(p)),
            ("n_support", json!(support.len())),
            ("lhs", json!(lhs)),
            ("rhs", json!(rhs)),
        ]),
        ineq_tol(scale),
        margins,
        support.len(),
    ))
}

/// Checks the second a-priori sum inequality for p >= 1: with v >= 0
/// finitely supported and u solving the equation on supp v,
///
///   S = Σ_x |u(x)|^p { −Δv(x) + p V(x) v(x) } μ(x)  <=  0,
///
/// the sum running over supp v and its one-step neighborhood.
pub fn check_prop_44(
    g: &Graph,
    u: &GraphFunction,
    potential: &Potential,
    v: &GraphFunction,
    p: f64,
    region: &GraphRegion,
) -> Result<VerificationReport> {
    if !(p >= 1.0) {
        return Err(Error::ConstraintViolated(format!("p >= 1 (got {p})")));
    }
    let (support, closure) = support_with_neighborhood("v", v, region)?;
    for x in &support {
        let val = v.eval(x)?;
        if val < 0.0 {
            return Err(Error::NegativeTestFunction {
                vertex: x.to_string(),
                value: val,
            });
        }
    }
    // two-step containment: Δv is evaluated on the closure, so every closure
    // vertex needs its full neighborhood inside the region
    for x in &closure {
        let i = region
            .index_of(x)
            .ok_or_else(|| Error::RegionTooSmall(format!("closure vertex {x} not in region")))?;
        if !region.is_interior(i) {
            return Err(Error::RegionTooSmall(format!(
                "two-step neighborhood of supp v leaves the region at {x}"
            )));
        }
    }
    equation_precondition(g, u, potential, &support)?;

    let mut terms = Vec::with_capacity(closure.len());
    let mut magnitude_terms = Vec::with_capacity(closure.len());
    for x in &closure {
        let lap_v = laplacian(g, v, x)?;
        let vx = v.eval(x)?;
        let mu = g.measure(x)?;
        let up = u.eval(x)?.abs().powf(p);
        let pot = potential.value(x)?;
        terms.push(up * (-lap_v + p * pot * vx) * mu);
        magnitude_terms.push(up * (lap_v.abs() + p * pot * vx) * mu);
    }
    let total = stable_sum(&terms);
    let scale = stable_sum(&magnitude_terms);
    Ok(VerificationReport::from_margins(
        "prop44",
        param_map([
            ("p", json!(p)),
            ("n_support", json!(support.len())),
            ("sum", json!(total)),
        ]),
        ineq_tol(scale),
        vec![("sum".to_string(), -total)],
        support.len(),
    ))
}
