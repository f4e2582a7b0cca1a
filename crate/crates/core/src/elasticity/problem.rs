use super::{FemError, Material};
use crate::math::{self, Vec3};
use crate::mesh::{Mesh, Topology};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Where a displacement constraint applies.
#[derive(Debug, Clone, PartialEq)]
pub enum DirichletTarget {
    /// Every node of the facets carrying this boundary label.
    Label(String),
    /// The mesh node at this position.
    Point(Vec3),
}

/// Prescribed displacement components; `None` leaves a component free.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBc {
    pub target: DirichletTarget,
    pub values: [Option<f64>; 3],
}

/// Prescribed traction on a labeled part of the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannBc {
    pub label: String,
    pub traction: Vec3,
}

/// Boundary value problem of linear elasticity.
///
/// Boundary facets that carry no Dirichlet or Neumann condition are traction
/// free. Components left free by a partial Dirichlet condition are traction
/// free as well.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDef {
    pub material: Material,
    pub dirichlet: Vec<DirichletBc>,
    pub neumann: Vec<NeumannBc>,
    /// Constant body force density.
    pub body_force: Vec3,
    /// Polynomial degree of the displacement approximation (only 1 is supported).
    pub degree: usize,
}

impl ProblemDef {
    pub fn new(material: Material) -> Self {
        ProblemDef { material, dirichlet: Vec::new(), neumann: Vec::new(), body_force: [0.0; 3], degree: 1 }
    }

    pub fn with_dirichlet(mut self, label: &str, values: [Option<f64>; 3]) -> Self {
        self.dirichlet.push(DirichletBc { target: DirichletTarget::Label(String::from(label)), values });
        self
    }

    pub fn with_point_dirichlet(mut self, point: Vec3, values: [Option<f64>; 3]) -> Self {
        self.dirichlet.push(DirichletBc { target: DirichletTarget::Point(point), values });
        self
    }

    pub fn with_neumann(mut self, label: &str, traction: Vec3) -> Self {
        self.neumann.push(NeumannBc { label: String::from(label), traction });
        self
    }

    pub fn with_body_force(mut self, f: Vec3) -> Self {
        self.body_force = f;
        self
    }

    /// Checks the problem against a mesh and resolves facet and node conditions.
    pub fn resolve(&self, mesh: &Mesh, topo: &Topology) -> Result<BoundaryData, FemError> {
        let dim = mesh.dim();
        let d = dim.n();
        if self.material.dim() != dim {
            return Err(FemError::DimensionMismatch);
        }
        if self.degree != 1 {
            return Err(FemError::UnsupportedDegree(self.degree));
        }
        if self.dirichlet.is_empty() {
            return Err(FemError::NoDirichlet);
        }
        for n in &self.neumann {
            if topo.label_id(&n.label).is_none() {
                return Err(FemError::UnknownLabel(n.label.clone()));
            }
            let clash = self.dirichlet.iter().any(|bc| matches!(&bc.target, DirichletTarget::Label(l) if *l == n.label));
            if clash {
                return Err(FemError::OverlappingConditions(n.label.clone()));
            }
        }
        let mut facet_bc = vec![FacetBc::free(); topo.n_facets()];
        let mut node_values: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut fix = |node: usize, c: usize, v: f64| -> Result<(), FemError> {
            if let Some(old) = node_values.insert((node, c), v) {
                if math::abs(old - v) > 1e-12 * (1.0 + math::abs(v)) {
                    return Err(FemError::ConflictingDirichlet { node, component: c });
                }
            }
            Ok(())
        };
        let diam = mesh.diameter();
        for bc in &self.dirichlet {
            match &bc.target {
                DirichletTarget::Label(label) => {
                    let lid = topo.label_id(label).ok_or_else(|| FemError::UnknownLabel(label.clone()))?;
                    for (fid, f) in topo.facets.iter().enumerate() {
                        if f.label != Some(lid) {
                            continue;
                        }
                        for c in 0..d {
                            if let Some(v) = bc.values[c] {
                                facet_bc[fid].comp[c] = CompBc::Dirichlet;
                                for &n in f.node_ids(d) {
                                    fix(n, c, v)?;
                                }
                            }
                        }
                    }
                }
                DirichletTarget::Point(p) => {
                    let (node, dist) = mesh
                        .nodes()
                        .iter()
                        .enumerate()
                        .map(|(i, x)| (i, math::dist(*x, *p)))
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .ok_or(FemError::NoDirichlet)?;
                    if dist > 1e-9 * diam.max(1e-300) {
                        return Err(FemError::PointNotOnMesh(*p));
                    }
                    for c in 0..d {
                        if let Some(v) = bc.values[c] {
                            fix(node, c, v)?;
                        }
                    }
                }
            }
        }
        for n in &self.neumann {
            let lid = topo.label_id(&n.label).expect("checked above");
            for (fid, f) in topo.facets.iter().enumerate() {
                if f.label == Some(lid) {
                    for c in 0..d {
                        if facet_bc[fid].comp[c] != CompBc::Dirichlet {
                            facet_bc[fid].comp[c] = CompBc::Neumann(n.traction[c]);
                        }
                    }
                }
            }
        }
        for (fid, f) in topo.facets.iter().enumerate() {
            if !f.is_boundary() {
                facet_bc[fid] = FacetBc::interior();
            }
        }
        Ok(BoundaryData { facet_bc, node_values })
    }
}

/// Condition on one displacement/traction component of a facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompBc {
    /// Interior facet: no boundary condition.
    Interior,
    /// Prescribed displacement; the traction is a reaction and stays free.
    Dirichlet,
    /// Prescribed traction component.
    Neumann(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetBc {
    pub comp: [CompBc; 3],
}

impl FacetBc {
    fn free() -> Self {
        FacetBc { comp: [CompBc::Neumann(0.0); 3] }
    }

    fn interior() -> Self {
        FacetBc { comp: [CompBc::Interior; 3] }
    }

    pub fn is_interior(&self) -> bool {
        self.comp[0] == CompBc::Interior
    }

    /// Prescribed traction component, if any.
    pub fn neumann(&self, c: usize) -> Option<f64> {
        match self.comp[c] {
            CompBc::Neumann(v) => Some(v),
            _ => None,
        }
    }

    pub fn has_dirichlet(&self) -> bool {
        self.comp.contains(&CompBc::Dirichlet)
    }
}

/// Boundary conditions resolved on a concrete mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub facet_bc: Vec<FacetBc>,
    /// Prescribed displacement per `(node, component)`.
    pub node_values: BTreeMap<(usize, usize), f64>,
}
