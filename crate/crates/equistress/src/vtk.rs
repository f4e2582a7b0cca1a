//! Legacy ASCII VTK output for unstructured simplicial meshes.

use equistress_core::mesh::{Dim, Mesh};
use equistress_core::SymTensor;
use std::fmt::Write as _;

/// Data attached to points or cells.
#[derive(Debug, Clone)]
pub enum Field {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 3]>),
    Tensor(Vec<SymTensor>),
}

impl Field {
    fn len(&self) -> usize {
        match self {
            Field::Scalar(v) => v.len(),
            Field::Vector(v) => v.len(),
            Field::Tensor(v) => v.len(),
        }
    }
}

/// Mesh plus named point and cell fields.
#[derive(Debug, Clone)]
pub struct VtkFile<'a> {
    pub title: String,
    pub mesh: &'a Mesh,
    pub point_data: Vec<(String, Field)>,
    pub cell_data: Vec<(String, Field)>,
}

impl<'a> VtkFile<'a> {
    pub fn new(title: &str, mesh: &'a Mesh) -> Self {
        VtkFile { title: title.to_string(), mesh, point_data: Vec::new(), cell_data: Vec::new() }
    }

    /// Adds a point field; panics if its length differs from the node count.
    pub fn point(mut self, name: &str, field: Field) -> Self {
        assert_eq!(field.len(), self.mesh.n_nodes(), "point field `{name}` has the wrong length");
        self.point_data.push((name.to_string(), field));
        self
    }

    /// Adds a cell field; panics if its length differs from the element count.
    pub fn cell(mut self, name: &str, field: Field) -> Self {
        assert_eq!(field.len(), self.mesh.n_elements(), "cell field `{name}` has the wrong length");
        self.cell_data.push((name.to_string(), field));
        self
    }

    pub fn render(&self) -> String {
        let mesh = self.mesh;
        let mut out = String::new();
        let title = self.title.replace('\n', " ");
        let _ = writeln!(out, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(out, "POINTS {} double", mesh.n_nodes());
        for x in mesh.nodes() {
            let _ = writeln!(out, "{:?} {:?} {:?}", x[0], x[1], x[2]);
        }
        let nv = mesh.dim().nv();
        let _ = writeln!(out, "CELLS {} {}", mesh.n_elements(), mesh.n_elements() * (nv + 1));
        for el in mesh.elements() {
            let _ = write!(out, "{nv}");
            for n in el {
                let _ = write!(out, " {n}");
            }
            out.push('\n');
        }
        let cell_type = if mesh.dim() == Dim::Two { 5 } else { 10 };
        let _ = writeln!(out, "CELL_TYPES {}", mesh.n_elements());
        for _ in 0..mesh.n_elements() {
            let _ = writeln!(out, "{cell_type}");
        }
        write_block(&mut out, "POINT_DATA", mesh.n_nodes(), &self.point_data);
        write_block(&mut out, "CELL_DATA", mesh.n_elements(), &self.cell_data);
        out
    }
}

fn write_block(out: &mut String, header: &str, n: usize, fields: &[(String, Field)]) {
    if fields.is_empty() {
        return;
    }
    let _ = writeln!(out, "{header} {n}");
    for (name, field) in fields {
        let name = name.replace(char::is_whitespace, "_");
        match field {
            Field::Scalar(v) => {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(out, "{x:?}");
                }
            }
            Field::Vector(v) => {
                let _ = writeln!(out, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(out, "{:?} {:?} {:?}", x[0], x[1], x[2]);
                }
            }
            Field::Tensor(v) => {
                let _ = writeln!(out, "TENSORS {name} double");
                for t in v {
                    for row in t.to_matrix() {
                        let _ = writeln!(out, "{:?} {:?} {:?}", row[0], row[1], row[2]);
                    }
                }
            }
        }
    }
}
