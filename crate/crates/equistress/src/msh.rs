//! Gmsh MSH 2.2 ASCII reader and writer.
//!
//! Triangles (type 2) and tetrahedra (type 4) form the domain. Lower-dimensional
//! elements carrying a physical tag (lines in 2D, triangles in 3D) label
//! boundary facets, named after `$PhysicalNames` when present and after the
//! tag number otherwise. Points are ignored.

use equistress_core::mesh::{Dim, FacetKey, Mesh, MeshError};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum MshError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported element type {kind}")]
    UnsupportedElement { line: usize, kind: u32 },
    #[error("line {line}: element references undefined node {node}")]
    DanglingNode { line: usize, node: u64 },
    #[error("file contains no triangles or tetrahedra")]
    NoElements,
    #[error("file mixes 2D and 3D cells: {0}")]
    MixedDimension(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn parse_err(line: usize, message: impl Into<String>) -> MshError {
    MshError::Parse { line, message: message.into() }
}

/// Reads a mesh file from disk.
pub fn load_msh(path: &Path) -> Result<Mesh, MshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MshError::Io { path: path.display().to_string(), source })?;
    parse_msh(&text)
}

struct RawElement {
    line: usize,
    kind: u32,
    physical: Option<i64>,
    nodes: Vec<u64>,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.inner.by_ref().map(|(i, l)| (i + 1, l.trim())).find(|(_, l)| !l.is_empty())
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str), MshError> {
        self.next_line().ok_or_else(|| parse_err(0, format!("unexpected end of file while reading {what}")))
    }

    fn expect_end(&mut self, section: &str) -> Result<(), MshError> {
        let (n, l) = self.expect_line(section)?;
        if l != format!("$End{section}") {
            return Err(parse_err(n, format!("expected $End{section}, found `{l}`")));
        }
        Ok(())
    }

    fn count(&mut self, section: &str) -> Result<usize, MshError> {
        let (n, l) = self.expect_line(section)?;
        l.parse().map_err(|_| parse_err(n, format!("invalid {section} count `{l}`")))
    }
}

fn field<T: std::str::FromStr>(tokens: &[&str], i: usize, line: usize, what: &str) -> Result<T, MshError> {
    let tok = tokens.get(i).ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

/// Parses the text of an MSH 2.2 ASCII file.
pub fn parse_msh(text: &str) -> Result<Mesh, MshError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let mut names: HashMap<(usize, i64), String> = HashMap::new();
    let mut nodes: Vec<(u64, [f64; 3])> = Vec::new();
    let mut raw: Vec<RawElement> = Vec::new();
    let mut seen_format = false;

    while let Some((n, header)) = lines.next_line() {
        match header {
            "$MeshFormat" => {
                let (ln, l) = lines.expect_line("MeshFormat")?;
                let tokens: Vec<&str> = l.split_whitespace().collect();
                let version: f64 = field(&tokens, 0, ln, "format version")?;
                let file_type: u32 = field(&tokens, 1, ln, "file type")?;
                if !(2.0..3.0).contains(&version) || file_type != 0 {
                    return Err(parse_err(ln, format!("only ASCII MSH 2.x is supported, found `{l}`")));
                }
                lines.expect_end("MeshFormat")?;
                seen_format = true;
            }
            "$PhysicalNames" => {
                let count = lines.count("PhysicalNames")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect_line("PhysicalNames")?;
                    let tokens: Vec<&str> = l.splitn(3, char::is_whitespace).collect();
                    let dim: usize = field(&tokens, 0, ln, "physical dimension")?;
                    let tag: i64 = field(&tokens, 1, ln, "physical tag")?;
                    let name = tokens.get(2).map(|s| s.trim().trim_matches('"').to_string());
                    let name = name.filter(|s| !s.is_empty()).ok_or_else(|| parse_err(ln, "missing physical name"))?;
                    names.insert((dim, tag), name);
                }
                lines.expect_end("PhysicalNames")?;
            }
            "$Nodes" => {
                let count = lines.count("Nodes")?;
                nodes.reserve(count);
                for _ in 0..count {
                    let (ln, l) = lines.expect_line("Nodes")?;
                    let tokens: Vec<&str> = l.split_whitespace().collect();
                    let id: u64 = field(&tokens, 0, ln, "node id")?;
                    let mut x = [0.0; 3];
                    for (c, v) in x.iter_mut().enumerate() {
                        *v = field(&tokens, c + 1, ln, "coordinate")?;
                    }
                    nodes.push((id, x));
                }
                lines.expect_end("Nodes")?;
            }
            "$Elements" => {
                let count = lines.count("Elements")?;
                raw.reserve(count);
                for _ in 0..count {
                    let (ln, l) = lines.expect_line("Elements")?;
                    raw.push(parse_element(ln, l)?);
                }
                lines.expect_end("Elements")?;
            }
            h if h.starts_with('$') && !h.starts_with("$End") => {
                let section = &h[1..];
                let end = format!("$End{section}");
                while lines.next_line().map(|(_, l)| l != end).ok_or_else(|| parse_err(n, format!("unterminated section {h}")))? {}
            }
            other => return Err(parse_err(n, format!("unexpected line `{other}`"))),
        }
    }
    if !seen_format {
        return Err(parse_err(1, "missing $MeshFormat section"));
    }
    assemble(names, nodes, raw)
}

fn parse_element(line: usize, l: &str) -> Result<RawElement, MshError> {
    let tokens: Vec<&str> = l.split_whitespace().collect();
    let kind: u32 = field(&tokens, 1, line, "element type")?;
    let n_tags: usize = field(&tokens, 2, line, "tag count")?;
    let n_nodes = match kind {
        1 => 2,
        2 => 3,
        4 => 4,
        15 => 1,
        _ => return Err(MshError::UnsupportedElement { line, kind }),
    };
    let physical = if n_tags > 0 { Some(field(&tokens, 3, line, "physical tag")?) } else { None };
    let start = 3 + n_tags;
    if tokens.len() != start + n_nodes {
        return Err(parse_err(line, format!("element of type {kind} needs {n_nodes} nodes after {n_tags} tags")));
    }
    let nodes = (start..start + n_nodes).map(|i| field(&tokens, i, line, "node id")).collect::<Result<_, _>>()?;
    Ok(RawElement { line, kind, physical, nodes })
}

fn assemble(names: HashMap<(usize, i64), String>, nodes: Vec<(u64, [f64; 3])>, raw: Vec<RawElement>) -> Result<Mesh, MshError> {
    let has_tets = raw.iter().any(|r| r.kind == 4);
    let has_tris = raw.iter().any(|r| r.kind == 2);
    let dim = match (has_tets, has_tris) {
        (true, _) => Dim::Three,
        (false, true) => Dim::Two,
        (false, false) => return Err(MshError::NoElements),
    };
    let (cell_kind, facet_kind) = match dim {
        Dim::Two => (2, 1),
        Dim::Three => (4, 2),
    };
    let index: HashMap<u64, usize> = nodes.iter().enumerate().map(|(i, (id, _))| (*id, i)).collect();
    let lookup = |r: &RawElement| -> Result<Vec<usize>, MshError> {
        r.nodes
            .iter()
            .map(|id| index.get(id).copied().ok_or(MshError::DanglingNode { line: r.line, node: *id }))
            .collect()
    };
    let mut elements = Vec::new();
    let mut labels: BTreeMap<FacetKey, String> = BTreeMap::new();
    for r in &raw {
        let ids = lookup(r)?;
        if r.kind == cell_kind {
            let mut el = [usize::MAX; 4];
            el[..ids.len()].copy_from_slice(&ids);
            elements.push(el);
        } else if r.kind == facet_kind {
            let Some(tag) = r.physical else {
                if dim == Dim::Three {
                    return Err(MshError::MixedDimension(format!("untagged triangle on line {}", r.line)));
                }
                continue;
            };
            let name = names.get(&(dim.n() - 1, tag)).cloned().unwrap_or_else(|| tag.to_string());
            let mut key = [usize::MAX; 3];
            key[..ids.len()].copy_from_slice(&ids);
            key[..ids.len()].sort_unstable();
            labels.insert(key, name);
        }
    }
    let coords = nodes
        .into_iter()
        .map(|(_, x)| if dim == Dim::Two { [x[0], x[1], 0.0] } else { x })
        .collect();
    Mesh::new(dim, coords, elements, labels).map_err(|e| match e {
        MeshError::LabelNotOnBoundary { label } if dim == Dim::Three => {
            MshError::MixedDimension(format!("triangle labelled `{label}` is not a boundary face of the tetrahedra"))
        }
        e => MshError::Mesh(e),
    })
}

/// Serializes a mesh as MSH 2.2 ASCII.
///
/// Boundary labels become physical groups numbered in alphabetical order
/// starting at 1; the cells belong to the physical group `domain`.
pub fn write_msh(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let d = dim.n();
    let labels = mesh.label_names();
    let domain_tag = labels.len() + 1;
    let mut out = String::new();
    out.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n");
    let _ = writeln!(out, "{}", labels.len() + 1);
    for (i, name) in labels.iter().enumerate() {
        let _ = writeln!(out, "{} {} \"{}\"", d - 1, i + 1, name);
    }
    let _ = writeln!(out, "{d} {domain_tag} \"domain\"\n$EndPhysicalNames\n$Nodes\n{}", mesh.n_nodes());
    for (i, x) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(out, "{} {:?} {:?} {:?}", i + 1, x[0], x[1], x[2]);
    }
    let boundary = mesh.boundary_labels();
    let _ = writeln!(out, "$EndNodes\n$Elements\n{}", boundary.len() + mesh.n_elements());
    let (facet_kind, cell_kind) = if dim == Dim::Two { (1, 2) } else { (2, 4) };
    let mut id = 1;
    for (key, name) in boundary {
        let tag = labels.iter().position(|l| l == name).map_or(0, |p| p + 1);
        let _ = write!(out, "{id} {facet_kind} 2 {tag} {tag}");
        for n in &key[..d] {
            let _ = write!(out, " {}", n + 1);
        }
        out.push('\n');
        id += 1;
    }
    for el in mesh.elements() {
        let _ = write!(out, "{id} {cell_kind} 2 {domain_tag} {domain_tag}");
        for n in el {
            let _ = write!(out, " {}", n + 1);
        }
        out.push('\n');
        id += 1;
    }
    out.push_str("$EndElements\n");
    out
}
