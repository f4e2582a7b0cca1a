use equistress::config::{CaseConfig, ConfigError, Method};
use equistress::error::exit;
use equistress::run::{load, Overrides};
use equistress_core::cases;
use std::path::{Path, PathBuf};

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("cases").join(name)
}

const MINIMAL: &str = r#"
[mesh.generator]
kind = "rectangle"
lower = [0.0, 0.0]
upper = [1.0, 1.0]
divisions = [2, 2]

[material]
young_modulus = 1.0
poisson_ratio = 0.3

[[bc.dirichlet]]
label = "left"
ux = 0.0
uy = 0.0
"#;

#[test]
fn bundled_cases_load_and_match_the_builtin_problems() {
    let pairs = [
        ("uniform_tension.toml", cases::uniform_tension(8).unwrap()),
        ("plate_hole_2d.toml", cases::plate_hole_2d().unwrap()),
        ("l_shape.toml", cases::l_shape(13).unwrap()),
        ("plate_hole_3d.toml", cases::plate_hole_3d().unwrap()),
    ];
    for (file, case) in pairs {
        let cfg = CaseConfig::load(&bundled(file)).unwrap();
        let loaded = load(&cfg).unwrap();
        assert_eq!(loaded.name, case.name);
        assert_eq!(loaded.mesh, case.mesh, "{file}");
        assert_eq!(loaded.problem, case.problem, "{file}");
    }
}

#[test]
fn defaults() {
    let cfg = CaseConfig::parse(MINIMAL).unwrap();
    assert_eq!(cfg.name, "case");
    assert_eq!(cfg.estimator.method, Method::Standard);
    assert_eq!(cfg.estimator.ref_levels, 2);
    assert_eq!(cfg.estimator.extra_degree, 3);
    assert_eq!(cfg.output.dir, PathBuf::from("out"));
}

fn invalid(text: &str) -> String {
    match CaseConfig::parse(text) {
        Err(e @ (ConfigError::Invalid(_) | ConfigError::Syntax { .. })) => e.to_string(),
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

#[test]
fn rejected_inputs() {
    let both = MINIMAL.replace("[mesh.generator]", "[mesh]\nfile = \"a.msh\"\n[mesh.generator]");
    assert!(invalid(&both).contains("exactly one"));
    let none = format!("[mesh]\n\n[material]{}", MINIMAL.split("[material]").nth(1).unwrap());
    assert!(invalid(&none).contains("exactly one"));
    assert!(invalid(&format!("{MINIMAL}\n[estimator]\nfractions = [0.5, 1.5]\n")).contains("1.5"));
    assert!(invalid(&format!("{MINIMAL}\n[estimator]\nfractions = [0.5]\nthresholds = [0.3]\n")).contains("not both"));
    assert!(invalid(&format!("{MINIMAL}\n[estimator]\ncriteria = [\"volume\"]\n")).contains("volume"));
    assert!(invalid(&format!("{MINIMAL}\n[estimator]\nextra_degree = 4\n")).contains("extra_degree"));
    assert!(invalid(&format!("{MINIMAL}\n[[bc.neumann]]\nlabel = \"top\"\ntraction = [1, 2, 3, 4]\n")).contains("at most 3"));
    let typo = invalid(&MINIMAL.replace("poisson_ratio", "poisson"));
    assert!(typo.contains("line"), "{typo}");
}

#[test]
fn unknown_labels_and_bad_materials_are_config_errors() {
    let cfg = CaseConfig::parse(&format!("{MINIMAL}\n[[bc.neumann]]\nlabel = \"hole\"\ntraction = [1.0, 0.0]\n")).unwrap();
    let err = load(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), exit::CONFIG);
    assert!(err.to_string().contains("hole"));
    let cfg = CaseConfig::parse(&MINIMAL.replace("poisson_ratio = 0.3", "poisson_ratio = 0.5")).unwrap();
    assert_eq!(load(&cfg).unwrap_err().exit_code(), exit::CONFIG);
}

#[test]
fn overrides_replace_case_values() {
    let mut cfg = CaseConfig::load(&bundled("plate_hole_2d.toml")).unwrap();
    let o = Overrides {
        method: Some(Method::Standard),
        criterion: Some("radius".into()),
        thresholds: Some(vec![0.3]),
        ref_levels: Some(1),
        out: Some(PathBuf::from("elsewhere")),
        ..Overrides::default()
    };
    o.apply(&mut cfg).unwrap();
    assert_eq!(cfg.estimator.criteria, vec!["radius".to_string()]);
    assert!(cfg.estimator.fractions.is_empty());
    assert_eq!(cfg.estimator.thresholds, vec![0.3]);
    assert_eq!(cfg.estimator.ref_levels, 1);
    assert_eq!(cfg.output.dir, PathBuf::from("elsewhere"));
    let bad = Overrides { fractions: Some(vec![2.0]), ..Overrides::default() };
    assert!(bad.apply(&mut cfg).is_err());
}
