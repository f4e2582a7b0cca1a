//! JSON reports and sweep tables.

use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

/// Timing-dependent values, kept apart so that the rest of a report is reproducible.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub phases: BTreeMap<String, f64>,
    pub total_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalized_cpu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efficiency: Option<EfficiencyReport>,
}

impl Timing {
    pub fn from_phases(phases: &[(String, f64)]) -> Self {
        let mut map = BTreeMap::new();
        for (name, t) in phases {
            *map.entry(name.clone()).or_insert(0.0) += t;
        }
        Timing { total_seconds: phases.iter().map(|(_, t)| t).sum(), phases: map, ..Timing::default() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EfficiencyReport {
    pub g_eta: f64,
    pub l_t: f64,
    pub factor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub dimension: usize,
    pub n_nodes: usize,
    pub n_elements: usize,
    pub n_facets: usize,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub case: String,
    pub mesh: MeshSummary,
    /// `‖u_h‖` in the energy norm.
    pub energy_norm: f64,
    pub max_displacement: f64,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    pub criterion: String,
    pub mode: &'static str,
    pub value: f64,
    pub n_requested: usize,
    pub n_selected: usize,
    pub n_facets: usize,
    pub n_seam: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Baseline {
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effectivity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub command: &'static str,
    pub case: String,
    pub method: &'static str,
    pub mesh: MeshSummary,
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effectivity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard: Option<Baseline>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub max_constraint_residual: f64,
    pub max_local_residual: f64,
    pub contributions: Vec<f64>,
    pub densities: Vec<f64>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub command: &'static str,
    pub case: String,
    pub mesh: MeshSummary,
    pub reference_error: f64,
    pub standard: Baseline,
    pub n_rows: usize,
    pub timing: Timing,
}

/// One point of a criterion sweep.
///
/// `threshold` is the criterion value separating selected from unselected
/// elements: the given threshold in threshold mode, the value of the last
/// element taken in fraction mode, and a sentinel outside the criterion
/// range for the baseline row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub criterion: String,
    pub threshold: f64,
    pub n_selected: usize,
    pub theta: f64,
    pub eta: f64,
    pub cpu_seconds: f64,
    pub normalized_cpu: f64,
    pub g_eta: f64,
    pub l_t: f64,
    pub efficiency: f64,
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
