//! Reports and file formats. Every float is written with 17 significant
//! digits, so outputs are bit-stable and parse back to the same values.

use std::io::{self, Write};
use std::path::Path;

use popdyn::abel::{FixedPoint, Verdict};
use popdyn::competing::{InteractionClass, Outcome, RestPoint};
use popdyn::floquet::FloquetReport;
use popdyn::predator_prey::OrbitClass;
use popdyn::Species;
use serde::{Deserialize, Serialize};

use crate::config::{Coords, RunConfig};
use crate::CliError;

pub const TOOLKIT: &str = "popdyn";

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    let mut s = String::from_utf8(buf).expect("serde_json emits UTF-8");
    s.push('\n');
    s
}

pub fn csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub toolkit: String,
    pub version: String,
    #[serde(flatten)]
    pub body: ReportBody,
    pub config: RunConfig,
}

impl AnalysisReport {
    pub fn new(body: ReportBody, config: RunConfig) -> Self {
        Self {
            toolkit: TOOLKIT.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            body,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "result", rename_all = "snake_case")]
pub enum ReportBody {
    Simulate(SimulateResult),
    Classify(Classification),
    Floquet(FloquetReport),
    Abel(AbelResult),
    Portrait(PortraitResult),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationKind {
    ReachedEnd,
    BlowUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpRecord {
    pub species: Species,
    #[serde(rename = "T")]
    pub time: f64,
    /// Limit of the surviving population; absent for scalar equations.
    pub other_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub csv: Option<String>,
    pub coords: Coords,
    pub rows: usize,
    pub termination: TerminationKind,
    pub t_final: f64,
    pub blow_up: Option<BlowUpRecord>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Classification {
    PredatorPrey {
        initial: [f64; 2],
        /// Rest point `(d, b)`.
        center: [f64; 2],
        frequency: f64,
        #[serde(flatten)]
        orbit: OrbitClass,
    },
    Competing {
        class: InteractionClass,
        rest_point: RestPoint,
        coexistence: Option<[f64; 2]>,
        eigenvalues: [f64; 2],
        eigenvectors: [[f64; 2]; 2],
        discriminant: f64,
        initial: Option<[f64; 2]>,
        outcome: Option<Outcome>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelResult {
    pub count: usize,
    pub positive_count: usize,
    pub fixed_points: Vec<FixedPoint>,
    pub hypothesis: Verdict,
    pub blow_up_intervals: Vec<[f64; 2]>,
    pub bracket: [f64; 2],
    pub grid_n: usize,
    pub sweep: Option<SweepSummary>,
}

/// Randomized multiplicity check over sign-definite `a0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub instances: usize,
    pub max_count: usize,
    /// Largest positive count among instances with `a3 = 0`.
    pub max_positive_count_without_a3: usize,
    /// `histogram[k]` instances had `k` fixed points.
    pub histogram: Vec<usize>,
    pub no_data: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitResult {
    pub svg: String,
    pub coords: Coords,
    pub trajectories: usize,
    pub view: [[f64; 2]; 2],
}
