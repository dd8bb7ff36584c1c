use std::path::{Path, PathBuf};

use popdyn::abel::{count_periodic, CountConfig};
use popdyn::competing;
use popdyn::floquet::periodic_solution;
use popdyn::model::blown_up_species;
use popdyn::ode::{integrate, Termination};
use popdyn::predator_prey;
use popdyn::{Execution, GeneralModel, LinearSystem2D, Species, Trajectory};

use crate::config::{Coords, ModelConfig, Overrides, RunConfig};
use crate::report::{
    self, AbelResult, AnalysisReport, BlowUpRecord, Classification, PortraitResult, ReportBody,
    SimulateResult, TerminationKind,
};
use crate::svg::{self, Portrait};
use crate::sweep::run_sweep;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Classify,
    Floquet,
    Abel,
    Portrait,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Classify => "classify",
            CommandKind::Floquet => "floquet",
            CommandKind::Abel => "abel",
            CommandKind::Portrait => "portrait",
        }
    }
}

/// Everything a command produces, computed before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    pub fn commit(&self) -> Result<(), CliError> {
        for (path, contents) in &self.files {
            report::write_file(path, contents)?;
        }
        Ok(())
    }
}

pub fn execute(
    kind: CommandKind,
    config: &Path,
    out: Option<&Path>,
    over: Overrides,
) -> Result<Output, CliError> {
    let cfg = RunConfig::load(config)?.resolve(over)?;
    run(kind, cfg, out)
}

pub fn run(kind: CommandKind, cfg: RunConfig, out: Option<&Path>) -> Result<Output, CliError> {
    match kind {
        CommandKind::Simulate => simulate(cfg, out),
        CommandKind::Classify => json_command(classify(&cfg)?, cfg, out),
        CommandKind::Floquet => {
            let m = cfg.model.periodic_model()?;
            let r = periodic_solution(
                &m,
                cfg.samples(),
                &cfg.integrator.build(),
                Execution::default(),
            )?;
            json_command(ReportBody::Floquet(r), cfg, out)
        }
        CommandKind::Abel => json_command(abel(&cfg)?, cfg, out),
        CommandKind::Portrait => portrait(cfg, out),
    }
}

fn report_path(cfg: &RunConfig, out: Option<&Path>) -> Option<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.report.as_ref().map(PathBuf::from))
}

fn json_command(body: ReportBody, cfg: RunConfig, out: Option<&Path>) -> Result<Output, CliError> {
    let path = report_path(&cfg, out);
    let json = report::to_json(&AnalysisReport::new(body, cfg));
    Ok(Output {
        files: path.into_iter().map(|p| (p, json.clone())).collect(),
        stdout: json,
    })
}

pub fn planar_system(model: &ModelConfig) -> Result<LinearSystem2D, CliError> {
    Ok(match model {
        ModelConfig::PredatorPrey { b, d } => GeneralModel::predator_prey(*b, *d)?.linearize(),
        ModelConfig::Competing { a, b, c, d } => competing::reciprocal_system(*a, *b, *c, *d)?,
        ModelConfig::PeriodicPredatorPrey { .. } => model.periodic_model()?.reciprocal_system(),
        ModelConfig::Abel { .. } => {
            return Err(CliError::Config(
                "abel models are scalar; expected a planar model".into(),
            ))
        }
    })
}

/// Rest point in population coordinates, when it lies in the open quadrant.
fn rest_point(model: &ModelConfig) -> Option<[f64; 2]> {
    match model {
        ModelConfig::PredatorPrey { b, d } | ModelConfig::PeriodicPredatorPrey { b, d, .. } => {
            Some([*d, *b])
        }
        ModelConfig::Competing { a, b, c, d } => competing::rest_point(*a, *b, *c, *d)
            .ok()
            .and_then(|r| r.populations())
            .map(|p| [p.x, p.y]),
        ModelConfig::Abel { .. } => None,
    }
}

pub struct PlanarRun {
    pub trajectory: Trajectory<2>,
    pub blow_up: Option<BlowUpRecord>,
}

/// Integrate in reciprocal coordinates until `t_end` or the first axis.
pub fn run_planar(cfg: &RunConfig, x0: f64, y0: f64) -> Result<PlanarRun, CliError> {
    let sys = planar_system(&cfg.model)?;
    let tr = sys.integrate_to_axes([1.0 / x0, 1.0 / y0], cfg.t_span(), &cfg.integrator.build())?;
    let blow_up = match tr.termination() {
        Termination::ReachedEnd => None,
        Termination::Event { .. } => {
            let species = blown_up_species(&tr).expect("axis events are indexed 0 and 1");
            let z = tr.final_state();
            let other = match species {
                Species::X => z[1],
                Species::Y => z[0],
            };
            Some(BlowUpRecord {
                species,
                time: tr.t_end(),
                other_limit: Some(1.0 / other),
            })
        }
        Termination::BlowUp | Termination::StepFailure => {
            return Err(CliError::Numerical(format!(
                "reciprocal coordinates diverged at t = {} without reaching an axis",
                tr.t_end()
            )))
        }
    };
    Ok(PlanarRun {
        trajectory: tr,
        blow_up,
    })
}

/// Samples in the requested coordinates. In population coordinates the
/// terminal sample of a blow-up (a vanishing reciprocal) is dropped.
pub fn planar_rows(run: &PlanarRun, n: usize, coords: Coords) -> Vec<(f64, [f64; 2])> {
    run.trajectory
        .sample_uniform(n)
        .into_iter()
        .filter_map(|(t, z)| match coords {
            Coords::Reciprocal => Some((t, z)),
            Coords::Population => (z[0] > 0.0 && z[1] > 0.0).then(|| (t, [1.0 / z[0], 1.0 / z[1]])),
        })
        .collect()
}

fn simulate(cfg: RunConfig, out: Option<&Path>) -> Result<Output, CliError> {
    let ic = cfg.single_initial("simulate")?;
    let csv_path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.csv.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Config("simulate needs --out or output.csv".into()))?;
    let report_path = cfg
        .output
        .report
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| csv_path.with_extension("json"));
    if report_path == csv_path {
        return Err(CliError::Config(
            "report path coincides with the CSV path".into(),
        ));
    }
    let coords = cfg.coords();

    let (csv, rows, t_final, steps, blow_up) = if cfg.model.is_planar() {
        let y0 = ic.y.expect("validated planar initial condition");
        let run = run_planar(&cfg, ic.x, y0)?;
        let rows = planar_rows(&run, cfg.samples(), coords);
        let header = match coords {
            Coords::Population => ["t", "x", "y"],
            Coords::Reciprocal => ["t", "X", "Y"],
        };
        let table: Vec<Vec<f64>> = rows.iter().map(|(t, z)| vec![*t, z[0], z[1]]).collect();
        (
            report::csv(&header, &table),
            table.len(),
            run.trajectory.t_end(),
            run.trajectory.steps(),
            run.blow_up,
        )
    } else {
        if coords == Coords::Reciprocal {
            return Err(CliError::Config(
                "reciprocal coordinates apply to planar models only".into(),
            ));
        }
        let rhs = cfg.model.abel_rhs()?;
        let tr = integrate(
            |t, x: &[f64; 1]| [rhs.flow(t, x[0])],
            [ic.x],
            cfg.t_span(),
            &cfg.integrator.build(),
            &[],
        )
        .map_err(popdyn::Error::from)?;
        let blow_up = (tr.termination() == Termination::BlowUp).then(|| BlowUpRecord {
            species: Species::X,
            time: tr.t_end(),
            other_limit: None,
        });
        let table: Vec<Vec<f64>> = tr
            .sample_uniform(cfg.samples())
            .into_iter()
            .map(|(t, x)| vec![t, x[0]])
            .collect();
        (
            report::csv(&["t", "x"], &table),
            table.len(),
            tr.t_end(),
            tr.steps(),
            blow_up,
        )
    };

    let result = SimulateResult {
        csv: Some(csv_path.display().to_string()),
        coords,
        rows,
        termination: if blow_up.is_some() {
            TerminationKind::BlowUp
        } else {
            TerminationKind::ReachedEnd
        },
        t_final,
        blow_up,
        steps,
    };
    let json = report::to_json(&AnalysisReport::new(ReportBody::Simulate(result), cfg));
    Ok(Output {
        stdout: String::new(),
        files: vec![(csv_path, csv), (report_path, json)],
    })
}

pub fn classify(cfg: &RunConfig) -> Result<ReportBody, CliError> {
    let body = match &cfg.model {
        ModelConfig::PredatorPrey { b, d } => {
            let ic = cfg.single_initial("classify")?;
            let y0 = ic.y.expect("validated planar initial condition");
            Classification::PredatorPrey {
                initial: [ic.x, y0],
                center: [*d, *b],
                frequency: (b * d).sqrt(),
                orbit: predator_prey::classify_orbit(*b, *d, ic.x, y0)?,
            }
        }
        ModelConfig::Competing { a, b, c, d } => {
            let (a, b, c, d) = (*a, *b, *c, *d);
            let class = competing::classify_interaction(a, b, c, d)?;
            let rest = competing::rest_point(a, b, c, d)?;
            let eigen = competing::eigen_structure(a, b, c, d)?;
            let (initial, outcome) = match cfg.initial.as_slice() {
                [] => (None, None),
                [ic] => {
                    let y0 = ic.y.expect("validated planar initial condition");
                    (
                        Some([ic.x, y0]),
                        Some(competing::predict_outcome(a, b, c, d, ic.x, y0)?),
                    )
                }
                more => {
                    return Err(CliError::Config(format!(
                        "classify takes at most one initial condition, got {}",
                        more.len()
                    )))
                }
            };
            Classification::Competing {
                class,
                rest_point: rest,
                coexistence: rest.populations().map(|p| [p.x, p.y]),
                eigenvalues: eigen.eigenvalues,
                eigenvectors: eigen.eigenvectors,
                discriminant: eigen.discriminant,
                initial,
                outcome,
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "classify needs a predator_prey or competing model, got {}",
                other.name()
            )))
        }
    };
    Ok(ReportBody::Classify(body))
}

fn abel(cfg: &RunConfig) -> Result<ReportBody, CliError> {
    let ModelConfig::Abel {
        bracket,
        grid,
        hypothesis_samples,
        ..
    } = &cfg.model
    else {
        return Err(CliError::Config(format!(
            "abel needs an abel model, got {}",
            cfg.model.name()
        )));
    };
    let rhs = cfg.model.abel_rhs()?;
    let count_cfg = CountConfig {
        integrator: cfg.integrator.build(),
        execution: Execution::default(),
        hypothesis_samples: hypothesis_samples.unwrap_or(16),
        refine: true,
    };
    let analysis = count_periodic(
        &rhs,
        bracket.unwrap_or([-3.0, 3.0]),
        grid.unwrap_or(popdyn::abel::DEFAULT_GRID),
        &count_cfg,
    )?;
    let sweep = match cfg.seed {
        Some(seed) => Some(run_sweep(seed, cfg.samples(), &count_cfg)?),
        None => None,
    };
    Ok(ReportBody::Abel(AbelResult {
        count: analysis.count(),
        positive_count: analysis.positive_count(),
        hypothesis: analysis.hypothesis,
        blow_up_intervals: analysis.blow_up_intervals.clone(),
        bracket: analysis.bracket,
        grid_n: analysis.grid_n,
        fixed_points: analysis.fixed_points,
        sweep,
    }))
}

fn portrait(cfg: RunConfig, out: Option<&Path>) -> Result<Output, CliError> {
    planar_system(&cfg.model)?;
    if cfg.initial.is_empty() {
        return Err(CliError::Config(
            "portrait needs at least one initial condition".into(),
        ));
    }
    let svg_path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.svg.as_ref().map(PathBuf::from))
        .ok_or_else(|| CliError::Config("portrait needs --out or output.svg".into()))?;
    let coords = cfg.coords();

    let mut curves = Vec::with_capacity(cfg.initial.len());
    for ic in &cfg.initial {
        let run = run_planar(
            &cfg,
            ic.x,
            ic.y.expect("validated planar initial condition"),
        )?;
        curves.push(
            planar_rows(&run, cfg.samples(), coords)
                .into_iter()
                .map(|(_, z)| z)
                .collect::<Vec<_>>(),
        );
    }
    let rest = rest_point(&cfg.model).map(|r| match coords {
        Coords::Population => r,
        Coords::Reciprocal => [1.0 / r[0], 1.0 / r[1]],
    });
    let view = match cfg.view {
        Some(v) => [v.x, v.y],
        None => {
            // one runaway trajectory should not flatten the rest of the picture
            let cap = (coords == Coords::Population).then(|| {
                let mut scale = rest.unwrap_or([0.0, 0.0]);
                for ic in &cfg.initial {
                    scale[0] = scale[0].max(ic.x);
                    scale[1] = scale[1].max(ic.y.unwrap_or(0.0));
                }
                [50.0 * scale[0], 50.0 * scale[1]]
            });
            svg::auto_view(&curves, rest.as_slice(), cap)
        }
    };
    let axis_labels = match coords {
        Coords::Population => ["x".to_string(), "y".to_string()],
        Coords::Reciprocal => ["X = 1/x".to_string(), "Y = 1/y".to_string()],
    };
    let picture = Portrait {
        title: format!(
            "{} ({} coordinates)",
            cfg.model.name().replace('_', " "),
            coords_name(coords)
        ),
        axis_labels,
        view,
        rest,
        curves,
    };
    let svg = svg::render(&picture);
    let result = PortraitResult {
        svg: svg_path.display().to_string(),
        coords,
        trajectories: cfg.initial.len(),
        view,
    };
    let json = report::to_json(&AnalysisReport::new(ReportBody::Portrait(result), cfg));
    Ok(Output {
        stdout: json,
        files: vec![(svg_path, svg)],
    })
}

fn coords_name(c: Coords) -> &'static str {
    match c {
        Coords::Population => "population",
        Coords::Reciprocal => "reciprocal",
    }
}
