//! The operator Δ − V with a certified-positive potential, a Dirichlet
//! solver on finite regions, and closed-form solution families on the line.
//!
//! Interior vertices of a Dirichlet problem are those whose whole
//! neighborhood lies inside the region, so the equation
//! Σ_y ω(x,y)(u(y) − u(x)) − V(x)μ(x)u(x) = 0 is exactly expressible from
//! region data. After sign normalization the interior system
//! (deg(x) + V(x)μ(x)) u(x) − Σ_y ω(x,y) u(y) = boundary flux is symmetric
//! positive definite, which is what the conjugate-gradient solve relies on.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::{GraphFunction, Provenance};
use crate::graph::{Graph, GraphRegion, VertexId};
use crate::report::{param_map, VerificationReport};

/// A positive potential with a certified infimum.
#[derive(Clone)]
pub struct Potential {
    repr: PotRepr,
    declared_infimum: Option<f64>,
}

#[derive(Clone)]
enum PotRepr {
    Constant(f64),
    Table(Arc<BTreeMap<VertexId, f64>>),
    Closed(crate::function::VertexOracle),
}

/// Infimum certificate: `region_local` is set when the value is only the
/// minimum over the checked vertex set rather than a declared global bound.
#[derive(Clone, Copy, Debug)]
pub struct PotentialCertificate {
    pub infimum: f64,
    pub region_local: bool,
}

impl Potential {
    pub fn constant(c: f64) -> Self {
        Potential {
            repr: PotRepr::Constant(c),
            declared_infimum: Some(c),
        }
    }

    /// Tabulated potential; evaluation outside the table is a domain
    /// violation. An optional declared infimum certifies the global bound.
    pub fn from_table(values: BTreeMap<VertexId, f64>, declared_infimum: Option<f64>) -> Self {
        Potential {
            repr: PotRepr::Table(Arc::new(values)),
            declared_infimum,
        }
    }

    pub fn closed(
        f: impl Fn(&VertexId) -> Result<f64> + Send + Sync + 'static,
        declared_infimum: Option<f64>,
    ) -> Self {
        Potential {
            repr: PotRepr::Closed(Arc::new(f)),
            declared_infimum,
        }
    }

    pub fn value(&self, x: &VertexId) -> Result<f64> {
        match &self.repr {
            PotRepr::Constant(c) => Ok(*c),
            PotRepr::Table(t) => t
                .get(x)
                .copied()
                .ok_or_else(|| Error::DomainViolation(x.to_string())),
            PotRepr::Closed(f) => f(x),
        }
    }

    pub fn declared_infimum(&self) -> Option<f64> {
        self.declared_infimum
    }

    /// Certify inf V > 0 over the given vertices. Uses the declared infimum
    /// when available (checking consistency against the observed minimum);
    /// otherwise the region minimum is returned flagged region-local.
    pub fn certify(&self, vertices: &[VertexId]) -> Result<PotentialCertificate> {
        let mut observed = f64::INFINITY;
        for x in vertices {
            observed = observed.min(self.value(x)?);
        }
        let cert = match self.declared_infimum {
            Some(declared) => {
                if observed < declared - 1e-12 * declared.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "declared infimum {declared} exceeds observed minimum {observed}"
                    )));
                }
                PotentialCertificate {
                    infimum: declared,
                    region_local: false,
                }
            }
            None => {
                if vertices.is_empty() {
                    return Err(Error::InvalidParameter(
                        "cannot certify a potential without a declared infimum on an empty set"
                            .into(),
                    ));
                }
                PotentialCertificate {
                    infimum: observed,
                    region_local: true,
                }
            }
        };
        if !(cert.infimum > 0.0) {
            return Err(Error::PotentialNotPositive {
                infimum: cert.infimum,
            });
        }
        Ok(cert)
    }
}

/// (Δ − V) u at x.
pub fn apply_operator(
    g: &Graph,
    potential: &Potential,
    u: &GraphFunction,
    x: &VertexId,
) -> Result<f64> {
    Ok(crate::calculus::laplacian(g, u, x)? - potential.value(x)? * u.eval(x)?)
}

/// Roots of λ² − (2 + c0)λ + 1 = 0, the characteristic equation of
/// u(n+1) + u(n−1) = (2 + c0) u(n) on the line. Returns (λ₊ > 1, λ₋ = 1/λ₊).
pub fn lattice_characteristic_roots(c0: f64) -> Result<(f64, f64)> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::InvalidParameter(format!("c0 must be > 0, got {c0}")));
    }
    let t = 2.0 + c0;
    // discriminant t² − 4 written as c0(c0 + 4) to avoid cancellation
    let root = (t + (c0 * (c0 + 4.0)).sqrt()) / 2.0;
    Ok((root, 1.0 / root))
}

/// U(n) = λ₊^{|n|} + λ₊^{−|n|} on lattice(1): a symmetric solution of
/// ΔU = c0·U growing exponentially in both directions. At n = 0 the
/// eigen-relation reads ΔU(0) = 2(λ₊ + λ₋) − 4 = 2c0 = c0·U(0).
pub fn make_symmetric_growing_solution(c0: f64) -> Result<GraphFunction> {
    let (lambda, _) = lattice_characteristic_roots(c0)?;
    Ok(GraphFunction::closed(move |v| match v {
        VertexId::Lattice(c) if c.len() == 1 => {
            let a = i32::try_from(c[0].unsigned_abs())
                .map_err(|_| Error::DomainViolation(v.to_string()))?;
            Ok(lambda.powi(a) + lambda.powi(-a))
        }
        _ => Err(Error::DomainViolation(v.to_string())),
    }))
}

/// A Dirichlet problem on a finite region: interior vertices carry the
/// equation, boundary vertices carry prescribed data.
#[derive(Clone)]
pub struct DirichletProblem {
    region: GraphRegion,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    boundary_values: Vec<f64>,
    potential: Potential,
}

impl DirichletProblem {
    /// Split the region into interior (full neighborhood inside) and
    /// boundary (everything else), and sample the boundary data.
    pub fn new(
        region: GraphRegion,
        boundary_data: &GraphFunction,
        potential: Potential,
    ) -> Result<Self> {
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for i in 0..region.len() {
            if region.is_interior(i) {
                interior.push(i);
            } else {
                boundary.push(i);
            }
        }
        if interior.is_empty() {
            return Err(Error::EmptyInterior);
        }
        let mut boundary_values = Vec::with_capacity(boundary.len());
        for &i in &boundary {
            boundary_values.push(boundary_data.eval(region.vertex(i))?);
        }
        Ok(DirichletProblem {
            region,
            interior,
            boundary,
            boundary_values,
            potential,
        })
    }

    pub fn region(&self) -> &GraphRegion {
        &self.region
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.interior.iter().map(|&i| self.region.vertex(i))
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.boundary.iter().map(|&i| self.region.vertex(i))
    }

    /// Solve the interior system by conjugate gradients to relative residual
    /// 1e-12. The returned function is defined exactly on the region
    /// (boundary data at boundary vertices, solved values inside) and
    /// satisfies the equation at every interior vertex to
    /// max residual <= 1e-10 · (1 + max |u|).
    pub fn solve(&self) -> Result<GraphFunction> {
        let n = self.interior.len();
        let col_of: BTreeMap<usize, usize> = self
            .interior
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, k))
            .collect();

        // per-row diagonal, interior couplings, and boundary flux
        let mut diag = vec![0.0f64; n];
        let mut coupling: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut rhs = vec![0.0f64; n];
        for (k, &i) in self.interior.iter().enumerate() {
            let x = self.region.vertex(i);
            let mu = self.region.measure(i);
            let v = self.potential.value(x)?;
            let mut deg = 0.0;
            for &(j, w) in self.region.internal_neighbors(i) {
                deg += w;
                match col_of.get(&j) {
                    Some(&kk) => coupling[k].push((kk, w)),
                    None => {
                        let b = self
                            .boundary
                            .iter()
                            .position(|&bb| bb == j)
                            .expect("boundary index");
                        rhs[k] += w * self.boundary_values[b];
                    }
                }
            }
            diag[k] = deg + v * mu;
        }

        let matvec = |x: &[f64], out: &mut [f64]| {
            for k in 0..n {
                let mut acc = diag[k] * x[k];
                for &(j, w) in &coupling[k] {
                    acc -= w * x[j];
                }
                out[k] = acc;
            }
        };

        let norm_b = rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
        let mut u = vec![0.0f64; n];
        if norm_b > 0.0 {
            let max_iter = 20 * n + 200;
            let mut r = rhs.clone();
            let mut p = r.clone();
            let mut ap = vec![0.0f64; n];
            let mut rr: f64 = r.iter().map(|v| v * v).sum();
            let target = 1e-12 * norm_b;
            let mut converged = rr.sqrt() <= target;
            let mut iterations = 0usize;
            while !converged && iterations < max_iter {
                matvec(&p, &mut ap);
                let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
                let alpha = rr / pap;
                for k in 0..n {
                    u[k] += alpha * p[k];
                    r[k] -= alpha * ap[k];
                }
                let rr_new: f64 = r.iter().map(|v| v * v).sum();
                if rr_new.sqrt() <= target {
                    converged = true;
                } else {
                    let beta = rr_new / rr;
                    for k in 0..n {
                        p[k] = r[k] + beta * p[k];
                    }
                }
                rr = rr_new;
                iterations += 1;
            }
            if !converged {
                return Err(Error::SolverDiverged {
                    iterations,
                    residual: rr.sqrt() / norm_b,
                });
            }
        }

        let mut values = BTreeMap::new();
        for (k, &i) in self.interior.iter().enumerate() {
            values.insert(self.region.vertex(i).clone(), u[k]);
        }
        for (b, &i) in self.boundary.iter().enumerate() {
            values.insert(self.region.vertex(i).clone(), self.boundary_values[b]);
        }
        let solution = GraphFunction::on_region(values, Provenance::Solver);

        // postcondition: the equation holds at every interior vertex
        let max_u = solution
            .domain()
            .unwrap()
            .iter()
            .map(|v| solution.eval(v).unwrap().abs())
            .fold(0.0f64, f64::max);
        let tol = 1e-10 * (1.0 + max_u);
        for &i in &self.interior {
            let x = self.region.vertex(i);
            let ux = solution.eval(x)?;
            let mut flux = 0.0;
            for &(j, w) in self.region.internal_neighbors(i) {
                flux += w * (solution.eval(self.region.vertex(j))? - ux);
            }
            let res = flux - self.potential.value(x)? * self.region.measure(i) * ux;
            if res.abs() > tol {
                return Err(Error::SolverDiverged {
                    iterations: 0,
                    residual: res.abs(),
                });
            }
        }
        Ok(solution)
    }
}

/// Per-vertex |Δu − Vu| report over the vertex set; passes iff every
/// residual is <= tol · max|u| (the homogeneous scale keeps the failing set
/// invariant under rescaling u).
pub fn residual_report(
    g: &Graph,
    potential: &Potential,
    u: &GraphFunction,
    vertices: &[VertexId],
    tol: f64,
) -> Result<VerificationReport> {
    let mut scale = 0.0f64;
    for x in vertices {
        scale = scale.max(u.eval(x)?.abs());
    }
    let allowed = tol * scale;
    let mut margins = Vec::with_capacity(vertices.len());
    for x in vertices {
        let res = apply_operator(g, potential, u, x)?.abs();
        margins.push((x.to_string(), allowed - res));
    }
    Ok(VerificationReport::from_margins(
        "equation_residual",
        param_map([
            ("tol", serde_json::json!(tol)),
            ("scale", serde_json::json!(scale)),
        ]),
        0.0,
        margins,
        vertices.len(),
    ))
}

/// Convenience constant-boundary Dirichlet solve on a region.
pub fn solve_constant_boundary(
    region: GraphRegion,
    boundary_value: f64,
    potential: Potential,
) -> Result<GraphFunction> {
    DirichletProblem::new(region, &GraphFunction::constant(boundary_value), potential)?.solve()
}
