//! JSON experiment configuration: graph family, metric, potential, exponents,
//! radii schedule, check selection, tolerances, output directory and seed.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use schrograph::{Graph, GraphFunction, Potential, PseudoMetric, VertexId};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    /// Filled from the raw "metric" object in [`ExperimentConfig::load`].
    #[serde(skip)]
    pub metric: MetricConfig,
    pub potential: PotentialConfig,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub tol: TolConfig,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Base vertex token; defaults to the family origin.
    #[serde(default)]
    pub x0: Option<String>,
    /// Solve radius for the `solve` subcommand; defaults to the last radius.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub boundary: Option<BoundaryConfig>,
}

fn default_p() -> f64 {
    2.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Lattice {
        dim: usize,
    },
    RegularTree {
        branching: u32,
    },
    EdgeList {
        edges: PathBuf,
        measures: Option<PathBuf>,
    },
}

#[derive(Debug, Default)]
pub enum MetricConfig {
    Combinatorial,
    /// Scaled hop metric with the family default scale
    /// (1/sqrt(2d) on lattices, 1/sqrt(b) on trees).
    #[default]
    Scaled,
    ScaledWith {
        scale: f64,
    },
    EdgeLength,
}

impl MetricConfig {
    /// Accept {"kind":"scaled"} with or without an explicit scale.
    pub fn from_raw(raw: RawMetricConfig) -> Result<Self> {
        match (raw.kind.as_str(), raw.scale) {
            ("combinatorial", None) => Ok(MetricConfig::Combinatorial),
            ("scaled", None) => Ok(MetricConfig::Scaled),
            ("scaled", Some(s)) => Ok(MetricConfig::ScaledWith { scale: s }),
            ("edge_length", None) => Ok(MetricConfig::EdgeLength),
            (k, Some(_)) => bail!("metric kind '{k}' does not take a scale"),
            (k, None) => bail!("unknown metric kind '{k}'"),
        }
    }
}

/// Raw form used during deserialization so that "scaled" works both with and
/// without an explicit scale field.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMetricConfig {
    pub kind: String,
    #[serde(default)]
    pub scale: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant { c0: f64 },
    File { file: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Constant { value: f64 },
    File { file: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    #[serde(default = "default_identity_tol")]
    pub identity: f64,
    #[serde(default = "default_inequality_tol")]
    pub inequality: f64,
}

impl Default for TolConfig {
    fn default() -> Self {
        TolConfig {
            identity: default_identity_tol(),
            inequality: default_inequality_tol(),
        }
    }
}

fn default_identity_tol() -> f64 {
    1e-12
}

fn default_inequality_tol() -> f64 {
    1e-9
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        // pre-pass: normalize the metric object, then deserialize the rest
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let metric = match value.get("metric") {
            Some(raw) => {
                let raw: RawMetricConfig =
                    serde_json::from_value(raw.clone()).context("parsing config key 'metric'")?;
                Some(MetricConfig::from_raw(raw)?)
            }
            None => None,
        };
        if let Some(obj) = value.as_object_mut() {
            obj.remove("metric");
        }
        let mut cfg: ExperimentConfig = serde_json::from_value(value)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(m) = metric {
            cfg.metric = m;
        }
        cfg.validate_shape()?;
        Ok(cfg)
    }

    fn validate_shape(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            bail!("parameter constraint violated: p >= 1 (got {})", self.p);
        }
        if self.radii.windows(2).any(|w| !(w[0] < w[1])) {
            bail!("radii must be strictly increasing");
        }
        if self.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            bail!("radii must be positive and finite");
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<Graph> {
        let g = match &self.family {
            FamilyConfig::Lattice { dim } => Graph::lattice(*dim)?,
            FamilyConfig::RegularTree { branching } => Graph::regular_tree(*branching)?,
            FamilyConfig::EdgeList { edges, measures } => {
                Graph::from_edge_list(edges, measures.as_deref())?
            }
        };
        Ok(g)
    }

    pub fn build_metric(&self, g: &Graph) -> Result<PseudoMetric> {
        let m = match &self.metric {
            MetricConfig::Combinatorial => PseudoMetric::combinatorial(),
            MetricConfig::Scaled => PseudoMetric::default_for(g),
            MetricConfig::ScaledWith { scale } => PseudoMetric::scaled(*scale)?,
            MetricConfig::EdgeLength => PseudoMetric::edge_length(),
        };
        Ok(m)
    }

    pub fn build_potential(&self, g: &Graph) -> Result<Potential> {
        match &self.potential {
            PotentialConfig::Constant { c0 } => Ok(Potential::constant(*c0)),
            PotentialConfig::File { file } => {
                let f = GraphFunction::from_file(file, g)?;
                let table = f
                    .domain()
                    .expect("file functions have explicit domains")
                    .into_iter()
                    .map(|v| {
                        let val = f.eval(&v).expect("domain vertex");
                        (v, val)
                    })
                    .collect();
                Ok(Potential::from_table(table, None))
            }
        }
    }

    pub fn base_vertex(&self, g: &Graph) -> Result<VertexId> {
        match &self.x0 {
            Some(tok) => Ok(VertexId::parse_for(g, tok)?),
            None => Ok(g.origin()),
        }
    }

    pub fn boundary_function(&self, g: &Graph) -> Result<GraphFunction> {
        match &self.boundary {
            None => Ok(GraphFunction::constant(1.0)),
            Some(BoundaryConfig::Constant { value }) => Ok(GraphFunction::constant(*value)),
            Some(BoundaryConfig::File { file }) => Ok(GraphFunction::from_file(file, g)?),
        }
    }

    pub fn resolve_out_dir(&self, cli_override: Option<&Path>) -> PathBuf {
        cli_override
            .map(Path::to_path_buf)
            .or_else(|| self.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn max_radius(&self) -> Result<f64> {
        self.radii
            .last()
            .copied()
            .ok_or_else(|| anyhow::anyhow!("this command needs a nonempty 'radii' schedule"))
    }
}
