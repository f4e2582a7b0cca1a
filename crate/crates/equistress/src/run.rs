//! Pipeline orchestration behind the `solve`, `estimate` and `sweep` commands.

use crate::config::{CaseConfig, ConfigError, Method, MeshSource, ResolvedMesh};
use crate::error::AppError;
use crate::msh;
use crate::parallel::{Rayon, WallClock};
use crate::report::{
    write_csv, Baseline, EfficiencyReport, EstimateReport, MeshSummary, SelectionReport, SolveReport, SweepReport, SweepRow,
    Timing,
};
use crate::vtk::{Field, VtkFile};
use equistress_core::elasticity::energy_norm_u;
use equistress_core::enhanced_tractions::{criterion_values, select_elements, Criterion, Selection, SelectionMode};
use equistress_core::estimator::efficiency_factor;
use equistress_core::mesh::{quality_metrics, Mesh, QualityMetrics};
use equistress_core::pipeline::{self, compare_to_standard, Clock, Estimate, Solved};
use equistress_core::{Error, ProblemDef};
use std::path::{Path, PathBuf};

/// Command-line values that replace those of the case file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mesh: Option<PathBuf>,
    pub method: Option<Method>,
    pub criterion: Option<String>,
    pub fractions: Option<Vec<f64>>,
    pub thresholds: Option<Vec<f64>>,
    pub ref_levels: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut CaseConfig) -> Result<(), ConfigError> {
        if let Some(m) = &self.mesh {
            let path = if m.is_absolute() { m.clone() } else { std::env::current_dir().unwrap_or_default().join(m) };
            cfg.mesh = MeshSource { file: Some(path), generator: None };
        }
        if let Some(m) = self.method {
            cfg.estimator.method = m;
        }
        if let Some(c) = &self.criterion {
            cfg.estimator.criteria = vec![c.clone()];
        }
        if let Some(f) = &self.fractions {
            cfg.estimator.fractions = f.clone();
            cfg.estimator.thresholds.clear();
        }
        if let Some(t) = &self.thresholds {
            cfg.estimator.thresholds = t.clone();
            cfg.estimator.fractions.clear();
        }
        if let Some(l) = self.ref_levels {
            cfg.estimator.ref_levels = l;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()
    }
}

/// Mesh and boundary value problem of a case.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub name: String,
    pub mesh: Mesh,
    pub problem: ProblemDef,
}

pub fn load(cfg: &CaseConfig) -> Result<Loaded, AppError> {
    let mesh = match cfg.mesh_source()? {
        ResolvedMesh::File(path) => msh::load_msh(&path)?,
        ResolvedMesh::Generator(g) => g.generate().map_err(|e| AppError::Config(ConfigError::Invalid(format!("mesh generator: {e}"))))?,
    };
    let names = mesh.label_names();
    let used = cfg.bc.dirichlet.iter().filter_map(|d| d.label.as_ref()).chain(cfg.bc.neumann.iter().map(|n| &n.label));
    for label in used {
        if !names.contains(label) {
            return Err(ConfigError::Invalid(format!("boundary label `{label}` does not exist in the mesh (available: {})", names.join(", "))).into());
        }
    }
    let problem = cfg.problem(mesh.dim())?;
    Ok(Loaded { name: cfg.name.clone(), mesh, problem })
}

fn summary(mesh: &Mesh, solved: &Solved) -> MeshSummary {
    MeshSummary {
        dimension: mesh.dim().n(),
        n_nodes: mesh.n_nodes(),
        n_elements: mesh.n_elements(),
        n_facets: solved.topology.n_facets(),
        labels: mesh.label_names(),
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<(), AppError> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir)
        .and_then(|_| std::fs::write(&path, contents))
        .map_err(|source| AppError::Output { path: path.display().to_string(), source })
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    text.push('\n');
    write_file(dir, name, text.as_bytes())
}

fn timed<T>(clock: &WallClock, f: impl FnOnce() -> T) -> (T, f64) {
    let start = clock.now();
    let out = f();
    (out, clock.now() - start)
}

/// Solves the FE problem and writes `report.json` and `fields.vtk`.
pub fn run_solve(cfg: &CaseConfig) -> Result<SolveReport, AppError> {
    let case = load(cfg)?;
    let clock = WallClock::start();
    let (solved, t) = timed(&clock, || pipeline::solve(&case.mesh, &case.problem));
    let solved = solved?;
    let sol = &solved.solution;
    let report = SolveReport {
        command: "solve",
        case: case.name.clone(),
        mesh: summary(&case.mesh, &solved),
        energy_norm: energy_norm_u(&case.mesh, &case.problem.material, &sol.displacement),
        max_displacement: sol.displacement.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())),
        timing: Timing::from_phases(&[("solve".to_string(), t)]),
    };
    let vtk = VtkFile::new(&format!("{} FE solution", case.name), &case.mesh)
        .point("displacement", Field::Vector(sol.displacement.clone()))
        .cell("stress", Field::Tensor(sol.stress.clone()))
        .cell("sigma_xx", Field::Scalar(sol.stress.iter().map(|s| s.0[0]).collect()));
    let dir = &cfg.output.dir;
    write_file(dir, "fields.vtk", vtk.render().as_bytes())?;
    write_json(dir, "report.json", &report)?;
    Ok(report)
}

/// FE solution, standard estimate and optional reference error shared by the estimate and sweep commands.
struct Baselined {
    case: Loaded,
    solved: Solved,
    standard: Estimate,
    metrics: QualityMetrics,
    reference_time: f64,
}

fn baseline(cfg: &CaseConfig, clock: &WallClock) -> Result<Baselined, AppError> {
    let case = load(cfg)?;
    let solved = pipeline::solve(&case.mesh, &case.problem)?;
    let mut standard = pipeline::standard_estimate(
        &case.mesh,
        &solved.topology,
        &case.problem,
        &solved.solution,
        cfg.estimator.extra_degree,
        &Rayon,
        clock,
    )?;
    let mut reference_time = 0.0;
    if cfg.estimator.ref_levels > 0 {
        let (r, t) = timed(clock, || pipeline::reference(&case.mesh, &case.problem, &solved.solution, cfg.estimator.ref_levels));
        standard.attach_reference(r?.shortcut);
        reference_time = t;
    }
    let metrics = quality_metrics(&case.mesh).map_err(Error::from)?;
    Ok(Baselined { case, solved, standard, metrics, reference_time })
}

impl Baselined {
    fn enhance(&self, cfg: &CaseConfig, selection: &Selection, clock: &WallClock) -> Result<Estimate, AppError> {
        let c = &self.case;
        let mut est = pipeline::enhanced_estimate(
            &c.mesh,
            &self.solved.topology,
            &c.problem,
            &self.solved.solution,
            &self.standard,
            selection,
            cfg.estimator.extra_degree,
            &Rayon,
            clock,
        )?;
        if let Some(r) = self.standard.report.reference_error {
            est.attach_reference(r);
        }
        compare_to_standard(&mut est.report, &self.standard.report);
        Ok(est)
    }

    fn select(&self, criterion: Criterion, mode: SelectionMode) -> Result<Selection, AppError> {
        let c = &self.case;
        select_elements(&c.mesh, &self.solved.topology, criterion, mode, &self.metrics, Some(&self.standard.report.contributions))
            .map_err(|e| AppError::Core(Error::from(e).in_phase("selection")))
    }

    fn values(&self, criterion: Criterion) -> Result<Vec<f64>, AppError> {
        criterion_values(criterion, &self.metrics, Some(&self.standard.report.contributions))
            .map_err(|e| AppError::Core(Error::from(e).in_phase("selection")))
    }
}

fn selection_mode(cfg: &CaseConfig) -> Result<Vec<SelectionMode>, ConfigError> {
    let est = &cfg.estimator;
    if !est.fractions.is_empty() {
        Ok(est.fractions.iter().map(|f| SelectionMode::Fraction(*f)).collect())
    } else if !est.thresholds.is_empty() {
        Ok(est.thresholds.iter().map(|t| SelectionMode::Threshold(*t)).collect())
    } else {
        Err(ConfigError::Invalid("the enhanced method needs a fraction or a threshold".to_string()))
    }
}

fn mode_parts(mode: SelectionMode) -> (&'static str, f64) {
    match mode {
        SelectionMode::Fraction(f) => ("fraction", f),
        SelectionMode::Threshold(t) => ("threshold", t),
    }
}

/// Runs the standard or enhanced estimator and writes `report.json` and `fields.vtk`.
pub fn run_estimate(cfg: &CaseConfig) -> Result<EstimateReport, AppError> {
    let clock = WallClock::start();
    let base = baseline(cfg, &clock)?;
    let case = &base.case;
    let (est, selection_report, standard) = match cfg.estimator.method {
        Method::Standard => (base.standard.clone(), None, None),
        Method::Enhanced => {
            let criteria = cfg.criteria()?;
            let modes = selection_mode(cfg)?;
            let ([criterion], [mode]) = (criteria.as_slice(), modes.as_slice()) else {
                return Err(ConfigError::Invalid("the enhanced method takes one criterion and one fraction or threshold".to_string()).into());
            };
            let sel = base.select(*criterion, *mode)?;
            let est = base.enhance(cfg, &sel, &clock)?;
            let (kind, value) = mode_parts(*mode);
            let report = SelectionReport {
                criterion: criterion.name().to_string(),
                mode: kind,
                value,
                n_requested: sel.n_requested,
                n_selected: sel.elements.len(),
                n_facets: sel.facets.len(),
                n_seam: sel.seam.len(),
            };
            let std = Baseline { theta: base.standard.report.theta, effectivity: base.standard.report.effectivity };
            (est, Some(report), Some(std))
        }
    };
    let r = &est.report;
    let mut timing = Timing::from_phases(&r.timings);
    if base.reference_time > 0.0 {
        timing.phases.insert("reference".to_string(), base.reference_time);
    }
    timing.normalized_cpu = r.normalized_cpu;
    timing.efficiency = r.efficiency.map(|e| EfficiencyReport { g_eta: e.g_eta, l_t: e.l_t, factor: e.factor });
    let report = EstimateReport {
        command: "estimate",
        case: case.name.clone(),
        method: match cfg.estimator.method {
            Method::Standard => "standard",
            Method::Enhanced => "enhanced",
        },
        mesh: summary(&case.mesh, &base.solved),
        theta: r.theta,
        reference_error: r.reference_error,
        effectivity: r.effectivity,
        standard,
        selection: selection_report,
        objective: est.objective,
        max_constraint_residual: est.max_constraint_residual(),
        max_local_residual: est.admissible.max_residual(),
        contributions: r.contributions.clone(),
        densities: r.densities.clone(),
        timing,
    };
    let mut mask = vec![0.0; case.mesh.n_elements()];
    if let Some(sel) = &est.selection {
        for &e in &sel.elements {
            mask[e] = 1.0;
        }
    }
    let vtk = VtkFile::new(&format!("{} error estimate", case.name), &case.mesh)
        .point("displacement", Field::Vector(base.solved.solution.displacement.clone()))
        .cell("contribution", Field::Scalar(r.contributions.clone()))
        .cell("density", Field::Scalar(r.densities.clone()))
        .cell("selected", Field::Scalar(mask))
        .cell("radius_ratio", Field::Scalar(base.metrics.radius_ratio.clone()))
        .cell("edge_or_area_ratio", Field::Scalar(base.metrics.edge_or_area_ratio.clone()))
        .cell("fe_stress", Field::Tensor(base.solved.solution.stress.clone()));
    let dir = &cfg.output.dir;
    write_file(dir, "fields.vtk", vtk.render().as_bytes())?;
    write_json(dir, "report.json", &report)?;
    Ok(report)
}

/// Criterion value at the boundary of a fraction selection.
fn fraction_cutoff(criterion: Criterion, values: &[f64], n_requested: usize) -> f64 {
    if n_requested == 0 {
        return criterion.sentinel(values);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    if criterion.is_geometric() {
        sorted[n_requested - 1]
    } else {
        sorted[sorted.len() - n_requested]
    }
}

/// Sweeps every criterion over the fractions or thresholds of the case and
/// writes `sweep.csv` and `report.json`.
///
/// Each criterion contributes a baseline row (the standard run at a sentinel
/// threshold) followed by one row per sweep point, in the order given.
pub fn run_sweep(cfg: &CaseConfig) -> Result<(SweepReport, Vec<SweepRow>), AppError> {
    if cfg.estimator.ref_levels == 0 {
        return Err(ConfigError::Invalid("a sweep needs ref_levels >= 1 to report effectivities".to_string()).into());
    }
    let criteria = cfg.criteria()?;
    let modes = selection_mode(cfg)?;
    let clock = WallClock::start();
    let base = baseline(cfg, &clock)?;
    let std_report = &base.standard.report;
    let eta_std = std_report.effectivity.ok_or_else(|| AppError::Usage("standard effectivity is undefined".to_string()))?;
    let t_std = std_report.total_time();
    let mut rows = Vec::new();
    for &criterion in &criteria {
        let values = base.values(criterion)?;
        rows.push(SweepRow {
            criterion: criterion.name().to_string(),
            threshold: criterion.sentinel(&values),
            n_selected: 0,
            theta: std_report.theta,
            eta: eta_std,
            cpu_seconds: t_std,
            normalized_cpu: 1.0,
            g_eta: 0.0,
            l_t: 0.0,
            efficiency: 0.0,
        });
        for &mode in &modes {
            let sel = base.select(criterion, mode)?;
            let est = base.enhance(cfg, &sel, &clock)?;
            let r = &est.report;
            let eta = r.effectivity.unwrap_or(f64::NAN);
            let t = r.total_time();
            let threshold = match mode {
                SelectionMode::Threshold(t) => t,
                SelectionMode::Fraction(_) => fraction_cutoff(criterion, &values, sel.n_requested),
            };
            let eff = efficiency_factor(eta, eta_std, t, t_std).ok();
            log::info!("{} {:?}: {} elements, eta {eta:.6}", criterion.name(), mode, sel.elements.len());
            rows.push(SweepRow {
                criterion: criterion.name().to_string(),
                threshold,
                n_selected: sel.elements.len(),
                theta: r.theta,
                eta,
                cpu_seconds: t,
                normalized_cpu: if t_std > 0.0 { t / t_std } else { 0.0 },
                g_eta: ((eta - eta_std) / eta_std).abs(),
                l_t: eff.map_or(0.0, |e| e.l_t),
                efficiency: eff.map_or(0.0, |e| e.factor),
            });
        }
    }
    let mut csv = Vec::new();
    write_csv(&rows, &mut csv).map_err(|e| AppError::Output { path: "sweep.csv".to_string(), source: e.into() })?;
    let mut timing = Timing::from_phases(&std_report.timings);
    timing.phases.insert("reference".to_string(), base.reference_time);
    timing.total_seconds = clock.now();
    let report = SweepReport {
        command: "sweep",
        case: base.case.name.clone(),
        mesh: summary(&base.case.mesh, &base.solved),
        reference_error: std_report.reference_error.unwrap_or(f64::NAN),
        standard: Baseline { theta: std_report.theta, effectivity: Some(eta_std) },
        n_rows: rows.len(),
        timing,
    };
    let dir = &cfg.output.dir;
    write_file(dir, "sweep.csv", &csv)?;
    write_json(dir, "report.json", &report)?;
    Ok((report, rows))
}
