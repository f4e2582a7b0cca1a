//! TOML case files.
//!
//! ```toml
//! name = "uniform_tension"
//!
//! [mesh.generator]
//! kind = "rectangle"
//! lower = [0.0, 0.0]
//! upper = [1.0, 1.0]
//! divisions = [8, 8]
//!
//! [material]
//! young_modulus = 1.0
//! poisson_ratio = 0.3
//!
//! [[bc.dirichlet]]
//! label = "left"
//! ux = 0.0
//!
//! [[bc.dirichlet]]
//! point = [0.0, 0.0]
//! uy = 0.0
//!
//! [[bc.neumann]]
//! label = "right"
//! traction = [1.0, 0.0]
//!
//! [estimator]
//! method = "standard"
//! criteria = ["estimate", "radius"]
//! fractions = [0.0, 0.1, 0.5, 1.0]
//! ref_levels = 2
//! ```
//!
//! A mesh file path is resolved relative to the directory of the case file.

use equistress_core::elasticity::{Material, ProblemDef};
use equistress_core::enhanced_tractions::Criterion;
use equistress_core::mesh::{self, Dim, Grid, Mesh, PlateHole2d, PlateHole3d};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Syntax { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Standard,
    Enhanced,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub mesh: MeshSource,
    pub material: MaterialConfig,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory of the case file, used to resolve relative mesh paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "case".to_string()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    pub file: Option<PathBuf>,
    pub generator: Option<Generator>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Rectangle { lower: [f64; 2], upper: [f64; 2], divisions: [usize; 2] },
    Box { lower: [f64; 3], upper: [f64; 3], divisions: [usize; 3] },
    #[serde(rename = "plate_hole_2d")]
    PlateHole2d {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        half_width: Option<f64>,
        #[serde(default)]
        n_theta: Option<usize>,
        #[serde(default)]
        n_radial: Option<usize>,
    },
    #[serde(rename = "plate_hole_3d")]
    PlateHole3d {
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        half_width: Option<f64>,
        #[serde(default)]
        n_theta: Option<usize>,
        #[serde(default)]
        n_radial: Option<usize>,
        #[serde(default)]
        thickness: Option<f64>,
        #[serde(default)]
        n_layers: Option<usize>,
    },
    LShape { n: usize },
}

fn plate(defaults: PlateHole2d, radius: Option<f64>, half_width: Option<f64>, n_theta: Option<usize>, n_radial: Option<usize>) -> PlateHole2d {
    PlateHole2d {
        radius: radius.unwrap_or(defaults.radius),
        half_width: half_width.unwrap_or(defaults.half_width),
        n_theta: n_theta.unwrap_or(defaults.n_theta),
        n_radial: n_radial.unwrap_or(defaults.n_radial),
    }
}

impl Generator {
    pub fn generate(&self) -> Result<Mesh, mesh::MeshError> {
        match *self {
            Generator::Rectangle { lower, upper, divisions } => {
                mesh::generate_structured(&Grid::rectangle(lower, upper, divisions[0], divisions[1]))
            }
            Generator::Box { lower, upper, divisions } => mesh::generate_structured(&Grid::cuboid(lower, upper, divisions)),
            Generator::PlateHole2d { radius, half_width, n_theta, n_radial } => {
                mesh::plate_with_hole_2d(&plate(PlateHole2d::default(), radius, half_width, n_theta, n_radial))
            }
            Generator::PlateHole3d { radius, half_width, n_theta, n_radial, thickness, n_layers } => {
                let d = PlateHole3d::default();
                mesh::plate_with_hole_3d(&PlateHole3d {
                    plate: plate(d.plate, radius, half_width, n_theta, n_radial),
                    thickness: thickness.unwrap_or(d.thickness),
                    n_layers: n_layers.unwrap_or(d.n_layers),
                })
            }
            Generator::LShape { n } => mesh::l_shape(n),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default)]
    pub dirichlet: Vec<DirichletConfig>,
    #[serde(default)]
    pub neumann: Vec<NeumannConfig>,
    #[serde(default)]
    pub body_force: Vec<f64>,
}

/// Displacement condition on a labelled boundary or at a single node.
/// Omitted components stay free.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub label: Option<String>,
    pub point: Option<Vec<f64>>,
    pub ux: Option<f64>,
    pub uy: Option<f64>,
    pub uz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannConfig {
    pub label: String,
    pub traction: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<String>,
    #[serde(default)]
    pub fractions: Vec<f64>,
    #[serde(default)]
    pub thresholds: Vec<f64>,
    #[serde(default = "default_ref_levels")]
    pub ref_levels: usize,
    #[serde(default = "default_extra_degree")]
    pub extra_degree: usize,
}

fn default_method() -> Method {
    Method::Standard
}

fn default_criteria() -> Vec<String> {
    vec!["estimate".to_string()]
}

fn default_ref_levels() -> usize {
    2
}

fn default_extra_degree() -> usize {
    3
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            method: default_method(),
            criteria: default_criteria(),
            fractions: Vec::new(),
            thresholds: Vec::new(),
            ref_levels: default_ref_levels(),
            extra_degree: default_extra_degree(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out() }
    }
}

/// Where the mesh comes from once the case file has been validated.
#[derive(Debug, Clone)]
pub enum ResolvedMesh {
    File(PathBuf),
    Generator(Generator),
}

fn pad3(v: &[f64], what: &str) -> Result<[f64; 3], ConfigError> {
    if v.len() > 3 {
        return Err(invalid(format!("{what} has {} components, at most 3 are allowed", v.len())));
    }
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    Ok(out)
}

impl CaseConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            ConfigError::Syntax { message, .. } => ConfigError::Syntax { path: path.display().to_string(), message },
            e => e,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: CaseConfig =
            toml::from_str(text).map_err(|e| ConfigError::Syntax { path: "<config>".to_string(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that does not need the mesh.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.mesh_source()?;
        let est = &self.estimator;
        if let Some(f) = est.fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(invalid(format!("fraction {f} is outside [0, 1]")));
        }
        if let Some(t) = est.thresholds.iter().find(|t| !t.is_finite()) {
            return Err(invalid(format!("threshold {t} is not finite")));
        }
        if !est.fractions.is_empty() && !est.thresholds.is_empty() {
            return Err(invalid("give either fractions or thresholds, not both"));
        }
        if !(1..=3).contains(&est.extra_degree) {
            return Err(invalid(format!("extra_degree must be 1, 2 or 3, got {}", est.extra_degree)));
        }
        self.criteria()?;
        for (i, bc) in self.bc.dirichlet.iter().enumerate() {
            if bc.label.is_some() == bc.point.is_some() {
                return Err(invalid(format!("dirichlet condition {} needs exactly one of `label` and `point`", i + 1)));
            }
            if let Some(p) = &bc.point {
                pad3(p, "dirichlet point")?;
            }
        }
        for bc in &self.bc.neumann {
            pad3(&bc.traction, "traction")?;
        }
        pad3(&self.bc.body_force, "body_force")?;
        Ok(())
    }

    pub fn mesh_source(&self) -> Result<ResolvedMesh, ConfigError> {
        match (&self.mesh.file, &self.mesh.generator) {
            (Some(f), None) => Ok(ResolvedMesh::File(self.base_dir.join(f))),
            (None, Some(g)) => Ok(ResolvedMesh::Generator(g.clone())),
            _ => Err(invalid("[mesh] needs exactly one of `file` and `generator`")),
        }
    }

    pub fn criteria(&self) -> Result<Vec<Criterion>, ConfigError> {
        if self.estimator.criteria.is_empty() {
            return Err(invalid("estimator.criteria is empty"));
        }
        self.estimator
            .criteria
            .iter()
            .map(|c| Criterion::parse(c).ok_or_else(|| invalid(format!("unknown criterion `{c}`"))))
            .collect()
    }

    /// Problem definition for a mesh of dimension `dim`.
    pub fn problem(&self, dim: Dim) -> Result<ProblemDef, ConfigError> {
        let m = &self.material;
        let material = Material::for_dim(dim, m.young_modulus, m.poisson_ratio).map_err(|e| invalid(e.to_string()))?;
        let mut prob = ProblemDef::new(material).with_body_force(pad3(&self.bc.body_force, "body_force")?);
        for bc in &self.bc.dirichlet {
            let values = [bc.ux, bc.uy, bc.uz];
            if dim == Dim::Two && bc.uz.is_some() {
                return Err(invalid("uz is not allowed on a 2D mesh"));
            }
            prob = match (&bc.label, &bc.point) {
                (Some(label), _) => prob.with_dirichlet(label, values),
                (None, Some(p)) => prob.with_point_dirichlet(pad3(p, "dirichlet point")?, values),
                (None, None) => return Err(invalid("dirichlet condition without `label` or `point`")),
            };
        }
        for bc in &self.bc.neumann {
            prob = prob.with_neumann(&bc.label, pad3(&bc.traction, "traction")?);
        }
        Ok(prob)
    }
}
