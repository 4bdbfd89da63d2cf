//! The difference operator, gradient squared, weighted Laplacian, product
//! identities, integration by parts and the convexity inequality.
//!
//! With ∇_xy f = f(y) − f(x), the operators are
//!
//!   |∇f(x)|² = (1/μ(x)) Σ_y ω(x,y) (∇_xy f)²
//!   Δf(x)    = (1/μ(x)) Σ_y ω(x,y) (∇_xy f)
//!
//! and, whenever one of f, h has finite support,
//!
//!   Σ_x Δf(x) h(x) μ(x) = −(1/2) Σ_{x,y} (∇_xy f)(∇_xy h) ω(x,y).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::GraphFunction;
use crate::graph::{Graph, GraphRegion, VertexId};
use crate::numeric::stable_sum;

/// ∇_xy f = f(y) − f(x).
pub fn difference(f: &GraphFunction, x: &VertexId, y: &VertexId) -> Result<f64> {
    Ok(f.eval(y)? - f.eval(x)?)
}

/// |∇f(x)|² = (1/μ(x)) Σ_y ω(x,y) (f(y) − f(x))².
pub fn gradient_squared(g: &Graph, f: &GraphFunction, x: &VertexId) -> Result<f64> {
    let fx = f.eval(x)?;
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x)? {
        let d = f.eval(&y)? - fx;
        acc += w * d * d;
    }
    Ok(acc / g.measure(x)?)
}

/// Δf(x) = (1/μ(x)) Σ_y ω(x,y) (f(y) − f(x)).
pub fn laplacian(g: &Graph, f: &GraphFunction, x: &VertexId) -> Result<f64> {
    let fx = f.eval(x)?;
    let mut acc = 0.0;
    for (y, w) in g.neighbors(x)? {
        acc += w * (f.eval(&y)? - fx);
    }
    Ok(acc / g.measure(x)?)
}

/// Both sides of the product identity
/// Δ(fh)(x) = f(x)Δh(x) + h(x)Δf(x) + (1/μ(x)) Σ_y (∇_xy f)(∇_xy h) ω(x,y).
/// Returned as (lhs, rhs) for the caller to compare at its tolerance.
pub fn laplacian_of_product(
    g: &Graph,
    f: &GraphFunction,
    h: &GraphFunction,
    x: &VertexId,
) -> Result<(f64, f64)> {
    let fx = f.eval(x)?;
    let hx = h.eval(x)?;
    let mu = g.measure(x)?;
    let mut lap_f = 0.0;
    let mut lap_h = 0.0;
    let mut lap_fh = 0.0;
    let mut cross = 0.0;
    for (y, w) in g.neighbors(x)? {
        let fy = f.eval(&y)?;
        let hy = h.eval(&y)?;
        lap_f += w * (fy - fx);
        lap_h += w * (hy - hx);
        lap_fh += w * (fy * hy - fx * hx);
        cross += w * (fy - fx) * (hy - hx);
    }
    let lhs = lap_fh / mu;
    let rhs = fx * (lap_h / mu) + hx * (lap_f / mu) + cross / mu;
    Ok((lhs, rhs))
}

/// Both sides of the integration-by-parts identity over a region that
/// contains the finite support of f or h together with its one-step
/// neighborhood:
///
///   lhs = Σ_x Δf(x) h(x) μ(x)
///   rhs = −(1/2) Σ over ordered pairs of (∇_xy f)(∇_xy h) ω(x,y),
///
/// where the pair sum runs over region edges plus halo edges (each halo edge
/// contributing both orientations).
pub fn integration_by_parts(
    g: &Graph,
    f: &GraphFunction,
    h: &GraphFunction,
    region: &GraphRegion,
) -> Result<(f64, f64)> {
    // one of the factors must be finitely supported with its closed
    // neighborhood inside the region; either factor may play that role
    let contained = |support: &[VertexId]| -> Result<()> {
        for s in support {
            let i = region.index_of(s).ok_or_else(|| {
                Error::RegionTooSmall(format!("support vertex {s} not in region"))
            })?;
            if !region.is_interior(i) {
                return Err(Error::RegionTooSmall(format!(
                    "neighborhood of support vertex {s} leaves the region"
                )));
            }
        }
        Ok(())
    };
    match (f.finite_support(), h.finite_support()) {
        (None, None) => return Err(Error::InfiniteSupport),
        (Some(sf), None) => contained(&sf)?,
        (None, Some(sh)) => contained(&sh)?,
        (Some(sf), Some(sh)) => {
            if contained(&sf).is_err() {
                contained(&sh)?;
            }
        }
    }

    let mut lhs_terms = Vec::with_capacity(region.len());
    let mut pair_terms = Vec::new();
    for i in 0..region.len() {
        let x = region.vertex(i);
        let hx = h.eval(x)?;
        let fx = f.eval(x)?;
        for (y, w) in region.all_neighbors(i) {
            let df = f.eval(y)? - fx;
            let dh = h.eval(y)? - hx;
            pair_terms.push(w * df * dh);
        }
        // halo pairs appear once more with the outside endpoint first; the
        // product of differences is orientation-invariant
        for (y, w) in region.halo_neighbors(i) {
            let df = f.eval(y)? - fx;
            let dh = h.eval(y)? - hx;
            pair_terms.push(w * df * dh);
        }
        lhs_terms.push(laplacian(g, f, x)? * hx * region.measure(i));
    }
    let lhs = stable_sum(&lhs_terms);
    let rhs = -0.5 * stable_sum(&pair_terms);
    Ok((lhs, rhs))
}

/// A convex scalar map ψ with its derivative, used in the pointwise
/// convexity inequality Δψ(u)(x) >= ψ'(u(x)) Δu(x).
#[derive(Clone)]
pub enum ConvexMap {
    /// (t² + α)^{p/4}, the smoothed |t|^{p/2}; convex for p >= 2, α > 0.
    PowerQuarter { p: f64, alpha: f64 },
    /// (t² + α)^{p/2}, the smoothed |t|^p; convex for p >= 1, α > 0.
    PowerHalf { p: f64, alpha: f64 },
    /// User-supplied map with derivative; convexity is certified numerically
    /// on the sampled value range before use.
    Custom {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for ConvexMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConvexMap::PowerQuarter { p, alpha } => write!(f, "(t^2 + {alpha})^({p}/4)"),
            ConvexMap::PowerHalf { p, alpha } => write!(f, "(t^2 + {alpha})^({p}/2)"),
            ConvexMap::Custom { .. } => write!(f, "custom convex map"),
        }
    }
}

impl ConvexMap {
    pub fn power_quarter(p: f64, alpha: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::ConstraintViolated(format!(
                "(t^2+a)^(p/4) is convex only for p >= 2, got p = {p}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        Ok(ConvexMap::PowerQuarter { p, alpha })
    }

    pub fn power_half(p: f64, alpha: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::ConstraintViolated(format!(
                "(t^2+a)^(p/2) is convex only for p >= 1, got p = {p}"
            )));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        Ok(ConvexMap::PowerHalf { p, alpha })
    }

    pub fn custom(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ConvexMap::Custom {
            f: Arc::new(f),
            df: Arc::new(df),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ConvexMap::PowerQuarter { p, alpha } => (t * t + alpha).powf(p / 4.0),
            ConvexMap::PowerHalf { p, alpha } => (t * t + alpha).powf(p / 2.0),
            ConvexMap::Custom { f, .. } => f(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            ConvexMap::PowerQuarter { p, alpha } => {
                (p / 2.0) * t * (t * t + alpha).powf(p / 4.0 - 1.0)
            }
            ConvexMap::PowerHalf { p, alpha } => p * t * (t * t + alpha).powf(p / 2.0 - 1.0),
            ConvexMap::Custom { df, .. } => df(t),
        }
    }

    /// Second-difference convexity certificate on a 1000-point grid spanning
    /// [lo, hi], with margin >= -1e-12. Built-in families are convex by
    /// construction and skip the scan.
    fn certify_convex_on(&self, lo: f64, hi: f64) -> Result<()> {
        if !matches!(self, ConvexMap::Custom { .. }) {
            return Ok(());
        }
        let span = (hi - lo).max(1e-6);
        let (lo, hi) = (lo - 0.05 * span, hi + 0.05 * span);
        let n = 1000usize;
        let step = (hi - lo) / (n as f64 - 1.0);
        for k in 1..n - 1 {
            let t = lo + step * k as f64;
            let second = self.value(t - step) - 2.0 * self.value(t) + self.value(t + step);
            if second < -1e-12 {
                return Err(Error::NonConvex {
                    lo,
                    hi,
                    at: t,
                    margin: second,
                });
            }
        }
        Ok(())
    }
}

/// Both sides of the convexity inequality at x:
/// lhs = Δψ(u)(x), rhs = ψ'(u(x)) Δu(x); convexity of ψ gives lhs >= rhs.
pub fn convexity_inequality(
    g: &Graph,
    u: &GraphFunction,
    psi: &ConvexMap,
    x: &VertexId,
) -> Result<(f64, f64)> {
    let ux = u.eval(x)?;
    let mu = g.measure(x)?;
    let neighbors = g.neighbors(x)?;
    let mut lo = ux;
    let mut hi = ux;
    let mut values = Vec::with_capacity(neighbors.len());
    for (y, w) in &neighbors {
        let uy = u.eval(y)?;
        lo = lo.min(uy);
        hi = hi.max(uy);
        values.push((uy, *w));
    }
    psi.certify_convex_on(lo, hi)?;
    let mut lap_psi = 0.0;
    let mut lap_u = 0.0;
    let psi_x = psi.value(ux);
    for (uy, w) in values {
        lap_psi += w * (psi.value(uy) - psi_x);
        lap_u += w * (uy - ux);
    }
    let lhs = lap_psi / mu;
    let rhs = psi.derivative(ux) * (lap_u / mu);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::materialize;
    use std::collections::BTreeMap;

    fn lat1() -> Graph {
        Graph::lattice(1).unwrap()
    }

    fn identity_fn() -> GraphFunction {
        GraphFunction::closed(|v| match v {
            VertexId::Lattice(c) if c.len() == 1 => Ok(c[0] as f64),
            _ => Err(Error::DomainViolation(v.to_string())),
        })
    }

    fn square_fn() -> GraphFunction {
        GraphFunction::closed(|v| match v {
            VertexId::Lattice(c) if c.len() == 1 => Ok((c[0] * c[0]) as f64),
            _ => Err(Error::DomainViolation(v.to_string())),
        })
    }

    #[test]
    fn difference_basics() {
        let f = GraphFunction::constant(3.5);
        assert_eq!(
            difference(&f, &VertexId::from(0), &VertexId::from(5)).unwrap(),
            0.0
        );
        let id = identity_fn();
        assert_eq!(
            difference(&id, &VertexId::from(0), &VertexId::from(1)).unwrap(),
            1.0
        );
        let sq = square_fn();
        assert_eq!(
            difference(&sq, &VertexId::from(2), &VertexId::from(3)).unwrap(),
            5.0
        );
    }

    #[test]
    fn gradient_squared_values() {
        let g = lat1();
        assert_eq!(
            gradient_squared(&g, &GraphFunction::constant(7.0), &VertexId::from(3)).unwrap(),
            0.0
        );
        assert_eq!(
            gradient_squared(&g, &identity_fn(), &VertexId::from(5)).unwrap(),
            2.0
        );
        // on Z^2 with f(a, b) = a only two of the four neighbors change f
        let g2 = Graph::lattice(2).unwrap();
        let proj = GraphFunction::closed(|v| match v {
            VertexId::Lattice(c) if c.len() == 2 => Ok(c[0] as f64),
            _ => Err(Error::DomainViolation(v.to_string())),
        });
        assert_eq!(
            gradient_squared(&g2, &proj, &VertexId::from((4, -1))).unwrap(),
            2.0
        );
    }

    #[test]
    fn laplacian_of_square_is_two() {
        let g = lat1();
        for n in [-4i64, 0, 9] {
            assert_eq!(
                laplacian(&g, &square_fn(), &VertexId::from(n)).unwrap(),
                2.0
            );
        }
        assert_eq!(
            laplacian(&g, &GraphFunction::constant(1.0), &VertexId::from(0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn laplacian_eigenfunction_of_characteristic_root() {
        // λ = (3 + sqrt 5)/2 is the root of λ² − 3λ + 1 = 0, so λ + 1/λ = 3
        // and f(n) = λⁿ satisfies Δf = f on the line.
        let g = lat1();
        let lambda = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((lambda * lambda - 3.0 * lambda + 1.0).abs() <= 1e-12);
        let f = GraphFunction::closed(move |v| match v {
            VertexId::Lattice(c) if c.len() == 1 => Ok(lambda.powi(c[0] as i32)),
            _ => Err(Error::DomainViolation(v.to_string())),
        });
        for n in -5i64..=5 {
            let x = VertexId::from(n);
            let lap = laplacian(&g, &f, &x).unwrap();
            let val = f.eval(&x).unwrap();
            assert!((lap - val).abs() <= 1e-12 * val.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn product_identity_hand_case() {
        let g = lat1();
        let (lhs, rhs) =
            laplacian_of_product(&g, &identity_fn(), &identity_fn(), &VertexId::from(0)).unwrap();
        assert_eq!(lhs, 2.0);
        assert_eq!(rhs, 2.0);
        // unit factor reduces to the plain Laplacian
        let one = GraphFunction::constant(1.0);
        let (lhs, rhs) = laplacian_of_product(&g, &one, &square_fn(), &VertexId::from(3)).unwrap();
        assert_eq!(lhs, 2.0);
        assert!((rhs - 2.0).abs() <= 1e-15);
    }

    #[test]
    fn product_identity_for_indicator() {
        let g = lat1();
        let mut m = BTreeMap::new();
        m.insert(VertexId::from(0), 1.0);
        let ind = GraphFunction::sparse(m);
        for n in -2i64..=2 {
            let (lhs, rhs) = laplacian_of_product(&g, &ind, &ind, &VertexId::from(n)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn integration_by_parts_indicator_case() {
        // f = h = 1_{0}: lhs = Δf(0) = −2; the four ordered pairs
        // (0,±1), (±1,0) each contribute product 1, so rhs = −2.
        let g = lat1();
        let mut m = BTreeMap::new();
        m.insert(VertexId::from(0), 1.0);
        let f = GraphFunction::sparse(m);
        let verts: Vec<VertexId> = (-1..=1).map(VertexId::from).collect();
        let region = materialize(&g, &verts).unwrap();
        let (lhs, rhs) = integration_by_parts(&g, &f, &f, &region).unwrap();
        assert_eq!(lhs, -2.0);
        assert_eq!(rhs, -2.0);
    }

    #[test]
    fn integration_by_parts_zero_factor() {
        let g = lat1();
        let mut m = BTreeMap::new();
        m.insert(VertexId::from(1), 2.0);
        let f = GraphFunction::sparse(m);
        let region = materialize(&g, &(-2..=4).map(VertexId::from).collect::<Vec<_>>()).unwrap();
        let (lhs, rhs) = integration_by_parts(&g, &f, &GraphFunction::zero(), &region).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn integration_by_parts_needs_neighborhood() {
        let g = lat1();
        let mut m = BTreeMap::new();
        m.insert(VertexId::from(0), 1.0);
        let f = GraphFunction::sparse(m);
        let region = materialize(&g, &[VertexId::from(0)]).unwrap();
        assert!(matches!(
            integration_by_parts(&g, &f, &f, &region),
            Err(Error::RegionTooSmall(_))
        ));
        let both_closed = GraphFunction::constant(1.0);
        let region = materialize(&g, &[VertexId::from(0)]).unwrap();
        assert!(matches!(
            integration_by_parts(&g, &both_closed, &both_closed, &region),
            Err(Error::InfiniteSupport)
        ));
    }

    #[test]
    fn integration_by_parts_falls_back_to_the_contained_factor() {
        // f's support pokes out of the region but h's fits: the identity is
        // still computable through h
        let g = lat1();
        let mut wide = BTreeMap::new();
        wide.insert(VertexId::from(0), 1.0);
        wide.insert(VertexId::from(9), 4.0);
        let f = GraphFunction::sparse(wide);
        let mut narrow = BTreeMap::new();
        narrow.insert(VertexId::from(0), 2.0);
        let h = GraphFunction::sparse(narrow);
        let region = materialize(&g, &(-2..=2).map(VertexId::from).collect::<Vec<_>>()).unwrap();
        let (lhs, rhs) = integration_by_parts(&g, &f, &h, &region).unwrap();
        assert_eq!(lhs, -4.0); // Δf(0)·h(0)·μ = (−2)·2
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn convexity_square_case() {
        let g = lat1();
        let sq = ConvexMap::custom(|t| t * t, |t| 2.0 * t);
        let (lhs, rhs) = convexity_inequality(&g, &identity_fn(), &sq, &VertexId::from(0)).unwrap();
        assert_eq!(lhs, 2.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn convexity_linear_is_equality() {
        let g = lat1();
        let lin = ConvexMap::custom(|t| t, |_| 1.0);
        let (lhs, rhs) = convexity_inequality(&g, &square_fn(), &lin, &VertexId::from(2)).unwrap();
        assert_eq!(lhs, rhs);
        let (lhs, rhs) =
            convexity_inequality(&g, &GraphFunction::constant(4.0), &lin, &VertexId::from(2))
                .unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn non_convex_custom_rejected() {
        let g = lat1();
        let cave = ConvexMap::custom(|t| -t * t, |t| -2.0 * t);
        assert!(matches!(
            convexity_inequality(&g, &identity_fn(), &cave, &VertexId::from(0)),
            Err(Error::NonConvex { .. })
        ));
    }

    #[test]
    fn builtin_map_parameter_validation() {
        assert!(ConvexMap::power_quarter(1.5, 1.0).is_err());
        assert!(ConvexMap::power_half(0.5, 1.0).is_err());
        assert!(ConvexMap::power_half(1.0, 0.0).is_err());
        assert!(ConvexMap::power_quarter(2.0, 1e-6).is_ok());
    }
}
