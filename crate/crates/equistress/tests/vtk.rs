use equistress::vtk::{Field, VtkFile};
use equistress_core::mesh::{generate_structured, Grid};
use equistress_core::SymTensor;

fn section<'a>(text: &'a str, header: &str) -> Vec<&'a str> {
    text.lines().skip_while(|l| !l.starts_with(header)).skip(1).collect()
}

#[test]
fn triangle_mesh_with_point_and_cell_fields() {
    let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1)).unwrap();
    let text = VtkFile::new("unit\nsquare", &m)
        .point("u", Field::Vector(vec![[1.0, 2.0, 0.0]; 4]))
        .cell("theta", Field::Scalar(vec![0.5, 0.25]))
        .cell("sigma", Field::Tensor(vec![SymTensor::plane(1.0, 2.0, 3.0); 2]))
        .render();
    assert!(text.starts_with("# vtk DataFile Version 3.0\nunit square\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS 4 double\n"));
    assert!(text.contains("CELLS 2 8\n"));
    assert_eq!(section(&text, "CELL_TYPES 2")[..2], ["5", "5"]);
    assert!(text.contains("POINT_DATA 4\nVECTORS u double\n1.0 2.0 0.0\n"));
    assert_eq!(section(&text, "SCALARS theta")[..3], ["LOOKUP_TABLE default", "0.5", "0.25"]);
    assert_eq!(section(&text, "TENSORS sigma")[..3], ["1.0 3.0 0.0", "3.0 2.0 0.0", "0.0 0.0 0.0"]);
}

#[test]
fn tetrahedra_use_cell_type_ten() {
    let m = generate_structured(&Grid::cuboid([0.0; 3], [1.0; 3], [1, 1, 1])).unwrap();
    let text = VtkFile::new("cube", &m).render();
    assert!(text.contains("CELLS 6 30\n"));
    assert!(section(&text, "CELL_TYPES 6").iter().take(6).all(|l| *l == "10"));
    assert!(!text.contains("CELL_DATA"));
}

#[test]
#[should_panic(expected = "wrong length")]
fn mismatched_field_length_panics() {
    let m = generate_structured(&Grid::rectangle([0.0, 0.0], [1.0, 1.0], 1, 1)).unwrap();
    let _ = VtkFile::new("x", &m).cell("bad", Field::Scalar(vec![1.0]));
}
