//! Real-valued vertex functions with a declared support or evaluation domain.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Where the function values came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Solver,
    File,
}

/// Shared pointer to a pure vertex-evaluation closure.
pub type VertexOracle = Arc<dyn Fn(&VertexId) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// Finite support: exactly 0 outside the stored keys.
    Sparse(Arc<BTreeMap<VertexId, f64>>),
    /// Defined only on the stored vertices; evaluation elsewhere is an error.
    OnRegion(Arc<BTreeMap<VertexId, f64>>),
    /// Total closed form.
    Closed(VertexOracle),
}

/// A function G -> R. Evaluation is pure; cloning is cheap.
#[derive(Clone)]
pub struct GraphFunction {
    repr: Repr,
    provenance: Provenance,
}

impl fmt::Debug for GraphFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Sparse(m) => write!(f, "GraphFunction::sparse({} entries)", m.len()),
            Repr::OnRegion(m) => write!(f, "GraphFunction::on_region({} entries)", m.len()),
            Repr::Closed(_) => write!(f, "GraphFunction::closed"),
        }
    }
}

impl GraphFunction {
    /// The zero function (empty finite support).
    pub fn zero() -> Self {
        GraphFunction {
            repr: Repr::Sparse(Arc::new(BTreeMap::new())),
            provenance: Provenance::ClosedForm,
        }
    }

    pub fn constant(c: f64) -> Self {
        GraphFunction::closed(move |_| Ok(c))
    }

    /// Finitely supported function: exactly 0 outside the given entries.
    pub fn sparse(values: BTreeMap<VertexId, f64>) -> Self {
        GraphFunction {
            repr: Repr::Sparse(Arc::new(values)),
            provenance: Provenance::File,
        }
    }

    pub fn sparse_with_provenance(values: BTreeMap<VertexId, f64>, provenance: Provenance) -> Self {
        GraphFunction {
            repr: Repr::Sparse(Arc::new(values)),
            provenance,
        }
    }

    /// Function defined only on an explicit vertex set (e.g. solver output);
    /// evaluating outside that set is a domain violation.
    pub fn on_region(values: BTreeMap<VertexId, f64>, provenance: Provenance) -> Self {
        GraphFunction {
            repr: Repr::OnRegion(Arc::new(values)),
            provenance,
        }
    }

    /// Total closed-form function.
    pub fn closed(f: impl Fn(&VertexId) -> Result<f64> + Send + Sync + 'static) -> Self {
        GraphFunction {
            repr: Repr::Closed(Arc::new(f)),
            provenance: Provenance::ClosedForm,
        }
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn eval(&self, x: &VertexId) -> Result<f64> {
        match &self.repr {
            Repr::Sparse(m) => Ok(m.get(x).copied().unwrap_or(0.0)),
            Repr::OnRegion(m) => m
                .get(x)
                .copied()
                .ok_or_else(|| Error::DomainViolation(x.to_string())),
            Repr::Closed(f) => f(x),
        }
    }

    /// Sorted support when it is known to be finite (sparse representation,
    /// nonzero entries only). `None` for closed forms and region-restricted
    /// functions.
    pub fn finite_support(&self) -> Option<Vec<VertexId>> {
        match &self.repr {
            Repr::Sparse(m) => Some(
                m.iter()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(k, _)| k.clone())
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Vertices on which the function is defined, when that set is explicit.
    pub fn domain(&self) -> Option<Vec<VertexId>> {
        match &self.repr {
            Repr::Sparse(m) | Repr::OnRegion(m) => Some(m.keys().cloned().collect()),
            Repr::Closed(_) => None,
        }
    }

    /// Pointwise product. Finite-support factors make the product finitely
    /// supported, which is what the verifier's test functions need.
    pub fn product(&self, other: &GraphFunction) -> Result<GraphFunction> {
        if let Some(support) = self.finite_support() {
            let mut values = BTreeMap::new();
            for v in support {
                let p = self.eval(&v)? * other.eval(&v)?;
                values.insert(v, p);
            }
            return Ok(GraphFunction::sparse_with_provenance(
                values,
                Provenance::ClosedForm,
            ));
        }
        if other.finite_support().is_some() {
            return other.product(self);
        }
        Err(Error::InfiniteSupport)
    }

    /// Load from a text file of "X value" lines; unlisted vertices are 0
    /// (finite support implied). Vertex tokens are parsed for the family of
    /// `g`. Comment lines start with '#'.
    pub fn from_file(path: &Path, g: &Graph) -> Result<Self> {
        let path_str = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path_str.clone(),
            source,
        })?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: idx + 1,
                    msg: format!("expected 'X value', found {} tokens", tokens.len()),
                });
            }
            let v = VertexId::parse_for(g, tokens[0])?;
            let val: f64 = tokens[1].parse().map_err(|e| Error::Parse {
                path: path_str.clone(),
                line: idx + 1,
                msg: format!("bad value '{}': {e}", tokens[1]),
            })?;
            values.insert(v, val);
        }
        Ok(GraphFunction {
            repr: Repr::Sparse(Arc::new(values)),
            provenance: Provenance::File,
        })
    }

    /// Write the function in the "X value" format. Requires an enumerable
    /// domain (sparse or region-restricted representation).
    pub fn save(&self, path: &Path) -> Result<()> {
        let entries = match &self.repr {
            Repr::Sparse(m) | Repr::OnRegion(m) => m,
            Repr::Closed(_) => return Err(Error::InfiniteSupport),
        };
        let mut out = String::new();
        for (v, val) in entries.iter() {
            out.push_str(&format!("{v} {}\n", crate::numeric::fmt_f64(*val)));
        }
        std::fs::write(path, out).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
