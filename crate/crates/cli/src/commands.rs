use std::f64::consts::PI;

use abflow::contour::{self, circulation, circulation_from_flux, LevelSelection, PortraitSpec};
use abflow::critical;
use abflow::dynamics::{integrate, trace_separatrix, IntegratorConfig, TrajectoryStatus};
use abflow::field;
use abflow::verify::{self, Verdict};
use abflow::{ComplexValue, FlowParams, Polyline, Vec2};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::Command;
use crate::error::CliError;
use crate::settings::Settings;
use crate::svg::{self, Scene, Stroke};

/// A file to be written into the output directory.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct Outcome {
    pub result: Value,
    pub files: Vec<Artifact>,
    /// Some verification check failed.
    pub failed: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            result,
            files: Vec::new(),
            failed: false,
        }
    }
}

pub fn run(command: &Command, settings: &Settings) -> Result<Outcome, CliError> {
    match command {
        Command::Eval(_) => eval(settings),
        Command::Portrait(_) => portrait(settings),
        Command::Stagnation(_) => stagnation(settings),
        Command::Separatrix(_) => separatrix(settings),
        Command::Circulation(_) => circulation_cmd(settings),
        Command::Trajectory(_) => trajectory(settings),
        Command::Verify(_) => verify_cmd(settings),
        Command::Sweep(_) => sweep(settings),
    }
}

pub fn units(settings: &Settings) -> Value {
    let p = &settings.params;
    json!({
        "hbar": p.hbar(),
        "mass": p.mass(),
        "charge": settings.consts.charge(),
        "light_speed": settings.consts.light_speed(),
        "convention": "all quantities in units where hbar, mass, charge and light_speed take the listed values; lengths in the units of 1/k",
    })
}

pub fn params_record(settings: &Settings) -> Value {
    let p = &settings.params;
    json!({
        "hbar": p.hbar(),
        "mass": p.mass(),
        "k": p.k(),
        "delta": p.delta(),
        "flux": settings.flux,
        "a": p.a(),
        "b": p.b(),
        "relaxed": p.is_relaxed(),
    })
}

fn cx(z: ComplexValue) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn json_file(name: &str, value: &impl serde::Serialize) -> Artifact {
    let mut bytes = serde_json::to_vec_pretty(value).expect("plain data serializes");
    bytes.push(b'\n');
    Artifact {
        name: name.to_string(),
        bytes,
    }
}

fn csv_file(
    name: String,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e.to_string()));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(Artifact {
        name: name.to_string(),
        bytes,
    })
}

fn polyline_csv(name: String, points: &[Vec2]) -> Result<Artifact, CliError> {
    csv_file(
        name,
        &["x", "y"],
        points
            .iter()
            .map(|p| vec![p.x.to_string(), p.y.to_string()]),
    )
}

fn svg_file(name: &str, settings: &Settings, scene: &Scene<'_>) -> Artifact {
    Artifact {
        name: name.to_string(),
        bytes: svg::render(settings.bbox, scene).into_bytes(),
    }
}

/// Saddle and vortex markers for the current parameters.
fn markers(params: &FlowParams) -> (Vec<Vec2>, Vec<Vec2>) {
    let saddles = critical::stagnation_point(params)
        .map(|c| c.location)
        .into_iter()
        .collect();
    let vortices = critical::vortex(params)
        .map(|c| c.location)
        .into_iter()
        .collect();
    (saddles, vortices)
}

fn integrator_config(settings: &Settings) -> Result<IntegratorConfig, CliError> {
    let mut cfg = IntegratorConfig::for_params(&settings.params);
    if let Some(r) = settings.rtol {
        cfg.rel_tol = r;
    }
    if let Some(a) = settings.atol {
        cfg.abs_tol = a;
    }
    if let Some(t) = settings.tmax {
        cfg.max_time = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn eval(settings: &Settings) -> Result<Outcome, CliError> {
    let p = settings
        .at
        .ok_or_else(|| CliError::Usage("eval needs --at x,y".to_string()))?;
    let params = &settings.params;
    let z = p.to_complex();
    let j = field::current(params, p)?;
    let f = field::complex_potential(params, z)?;
    let (f1, f2) = field::decompose_potential(params, z)?;
    let phi = field::velocity_potential(params, p)?;
    let jac = critical::jacobian(params, p)?;
    Ok(Outcome::ok(json!({
        "point": to_value(&p),
        "current": { "u": j.x, "v": j.y },
        "speed": j.norm(),
        "complex_potential": cx(f.value),
        "classical_potential": cx(f1),
        "quantum_potential": cx(f2),
        "complex_derivative": cx(field::complex_derivative(params, z)?),
        "stream_function": field::stream_function(params, p)?,
        "hamiltonian": field::hamiltonian(params, p)?,
        "velocity_potential": phi.value,
        "on_branch_cut": f.on_branch_cut || phi.on_branch_cut,
        "vector_potential": to_value(&field::vector_potential(&settings.consts, settings.flux, p)?),
        "jacobian": [[jac.du_dx, jac.du_dy], [jac.dv_dx, jac.dv_dy]],
    })))
}

fn stagnation(settings: &Settings) -> Result<Outcome, CliError> {
    let params = &settings.params;
    let level = critical::stagnation_point(params)
        .map(|_| critical::separatrix_level(params))
        .transpose()?;
    Ok(Outcome::ok(json!({
        "stagnation_point": to_value(&critical::stagnation_point(params)),
        "vortex": to_value(&critical::vortex(params)),
        "saddle_rate": critical::saddle_rate(params),
        "separatrix_level": level,
    })))
}

fn portrait(settings: &Settings) -> Result<Outcome, CliError> {
    let params = &settings.params;
    let (nx, ny) = settings.grid;
    let levels = match &settings.levels {
        Some(v) => LevelSelection::Explicit(v.clone()),
        None => LevelSelection::Auto(contour::DEFAULT_AUTO_LEVELS),
    };
    let spec = PortraitSpec::new(settings.bbox, nx, ny)
        .with_levels(levels)
        .with_separatrix(settings.separatrix);
    let portrait = contour::portrait(params, &spec)?;

    let mut files = Vec::new();
    let mut curves = Vec::new();
    let mut index_in_level = 0;
    let mut previous_level = None;
    for curve in &portrait.curves {
        let level = curve.level.unwrap_or(f64::NAN);
        if previous_level != Some(level) {
            index_in_level = 0;
            previous_level = Some(level);
        }
        let name = format!("level_{level}_{index_in_level}.csv");
        index_in_level += 1;
        curves.push(json!({
            "level": level,
            "closed": curve.closed,
            "points": curve.len(),
            "encloses_vortex": params.has_vortex() && curve.closed && curve.winding_number(Vec2::ZERO) != 0,
            "separatrix": portrait.is_separatrix(curve),
            "file": name,
        }));
        if settings.format.csv() {
            files.push(polyline_csv(name, &curve.points)?);
        }
    }
    if settings.format.json() {
        files.push(json_file("portrait.json", &portrait));
    }
    if settings.format.svg() {
        let (saddles, vortices) = markers(params);
        let scene = Scene {
            curves: portrait
                .curves
                .iter()
                .map(|c| {
                    let stroke = if portrait.is_separatrix(c) {
                        Stroke::Dashed
                    } else {
                        Stroke::Solid
                    };
                    (c, stroke)
                })
                .collect(),
            saddles,
            vortices,
        };
        files.push(svg_file("portrait.svg", settings, &scene));
    }

    Ok(Outcome {
        result: json!({
            "bbox": to_value(&settings.bbox),
            "grid": { "nx": nx, "ny": ny },
            "cell_diagonal": spec.cell_diagonal(),
            "levels": portrait.levels,
            "separatrix_level": portrait.separatrix_level,
            "curve_count": portrait.curves.len(),
            "closed_count": portrait.curves.iter().filter(|c| c.closed).count(),
            "curves": curves,
        }),
        files,
        failed: false,
    })
}

fn separatrix(settings: &Settings) -> Result<Outcome, CliError> {
    let params = &settings.params;
    let cfg = integrator_config(settings)?;
    let sep = trace_separatrix(params, &cfg)?;
    let mut files = Vec::new();
    if settings.format.csv() {
        files.push(polyline_csv(
            "separatrix_loop.csv".to_string(),
            &sep.homoclinic_loop.points,
        )?);
        for (i, branch) in sep.unbounded_branches.iter().enumerate() {
            files.push(polyline_csv(
                format!("separatrix_branch_{i}.csv"),
                &branch.points,
            )?);
        }
    }
    if settings.format.json() {
        files.push(json_file("separatrix.json", &sep));
    }
    if settings.format.svg() {
        let (saddles, vortices) = markers(params);
        let mut curves: Vec<(&Polyline, Stroke)> = vec![(&sep.homoclinic_loop, Stroke::Dashed)];
        curves.extend(sep.unbounded_branches.iter().map(|b| (b, Stroke::Dashed)));
        let scene = Scene {
            curves,
            saddles,
            vortices,
        };
        files.push(svg_file("separatrix.svg", settings, &scene));
    }
    Ok(Outcome {
        result: json!({
            "saddle": to_value(&sep.saddle),
            "level": sep.level,
            "loop_area": sep.loop_area,
            "loop_max_radius": sep.loop_max_radius,
            "lower_axis_crossing": sep.lower_axis_crossing,
            "closure_distance": sep.closure_distance,
            "winding_number": sep.winding_number,
            "max_level_deviation": sep.max_level_deviation,
            "seed_offset": sep.seed_offset,
            "loop_points": sep.homoclinic_loop.len(),
            "unbounded_branches": sep.unbounded_branches.len(),
        }),
        files,
        failed: false,
    })
}

fn circulation_cmd(settings: &Settings) -> Result<Outcome, CliError> {
    let params = &settings.params;
    let center = settings.at.unwrap_or(Vec2::ZERO);
    let result = circulation(params, center, settings.radius, settings.samples)?;
    let encloses = center.norm() < settings.radius && params.has_vortex();
    let expected = if encloses {
        -2.0 * PI * params.b()
    } else {
        0.0
    };
    let flux_form = circulation_from_flux(&settings.consts, params.mass(), settings.flux)?;
    Ok(Outcome::ok(json!({
        "circulation": to_value(&result),
        "encloses_vortex": encloses,
        "expected": expected,
        "flux_form": flux_form,
    })))
}

fn trajectory(settings: &Settings) -> Result<Outcome, CliError> {
    let params = &settings.params;
    let start = settings
        .start
        .ok_or_else(|| CliError::Usage("trajectory needs --start x,y".to_string()))?;
    let cfg = integrator_config(settings)?;
    let traj = integrate(params, start, &cfg)?;
    if traj.status == TrajectoryStatus::StepFailure {
        return Err(CliError::Numerical(format!(
            "step size underflow at t = {} near ({}, {})",
            traj.final_time(),
            traj.last_point().x,
            traj.last_point().y
        )));
    }
    let closed = traj.status == TrajectoryStatus::ClosedOrbitDetected;
    let points = traj.points();
    let mut files = Vec::new();
    if settings.format.csv() {
        files.push(polyline_csv("trajectory.csv".to_string(), &points)?);
    }
    if settings.format.json() {
        files.push(json_file("trajectory.json", &traj));
    }
    if settings.format.svg() {
        let line = Polyline::new(points, traj.h_values.first().copied(), closed);
        let (saddles, vortices) = markers(params);
        let scene = Scene {
            curves: vec![(&line, Stroke::Solid)],
            saddles,
            vortices,
        };
        files.push(svg_file("trajectory.svg", settings, &scene));
    }
    Ok(Outcome {
        result: json!({
            "start": to_value(&start),
            "status": to_value(&traj.status),
            "samples": traj.samples.len(),
            "final_time": traj.final_time(),
            "end": to_value(&traj.last_point()),
            "hamiltonian": traj.h_values.first(),
            "max_h_drift": traj.max_h_drift,
            "h_drift_budget": cfg.h_drift_budget,
            "closed": closed,
            "period": closed.then(|| traj.final_time()),
        }),
        files,
        failed: false,
    })
}

fn verify_cmd(settings: &Settings) -> Result<Outcome, CliError> {
    let reports = verify::run_suite(&settings.params, settings.seed);
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let mut files = Vec::new();
    if settings.format.json() {
        files.push(json_file("verify.json", &reports));
    }
    Ok(Outcome {
        result: json!({
            "seed": settings.seed,
            "passed": count(Verdict::Pass),
            "failed": count(Verdict::Fail),
            "not_applicable": count(Verdict::NotApplicable),
            "checks": to_value(&reports),
        }),
        files,
        failed: !verify::all_passed(&reports),
    })
}

struct SweepRow {
    delta: f64,
    loop_area: Option<f64>,
    loop_max_radius: Option<f64>,
    lower_axis_crossing: Option<f64>,
    circulation: f64,
}

fn sweep(settings: &Settings) -> Result<Outcome, CliError> {
    let base = &settings.params;
    let rows: Vec<Result<SweepRow, CliError>> = settings
        .deltas
        .par_iter()
        .map(|&delta| {
            let params = if settings.allow_any_delta {
                FlowParams::relaxed(base.hbar(), base.mass(), base.k(), delta)?
            } else {
                FlowParams::new(base.hbar(), base.mass(), base.k(), delta)?
            };
            let circ = circulation(&params, Vec2::ZERO, settings.radius, settings.samples)?.value;
            let mut row = SweepRow {
                delta,
                loop_area: None,
                loop_max_radius: None,
                lower_axis_crossing: None,
                circulation: circ,
            };
            if critical::stagnation_point(&params).is_some() {
                let mut cfg = IntegratorConfig::for_params(&params);
                if let Some(r) = settings.rtol {
                    cfg.rel_tol = r;
                }
                if let Some(a) = settings.atol {
                    cfg.abs_tol = a;
                }
                let sep = trace_separatrix(&params, &cfg)?;
                row.loop_area = Some(sep.loop_area);
                row.loop_max_radius = Some(sep.loop_max_radius);
                row.lower_axis_crossing = Some(sep.lower_axis_crossing);
            }
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;

    let entries: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "delta": r.delta,
                "loop_area": r.loop_area,
                "loop_max_radius": r.loop_max_radius,
                "lower_axis_crossing": r.lower_axis_crossing,
                "circulation": r.circulation,
            })
        })
        .collect();
    let mut files = Vec::new();
    if settings.format.csv() {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        files.push(csv_file(
            "sweep.csv".to_string(),
            &[
                "delta",
                "loop_area",
                "loop_max_radius",
                "lower_axis_crossing",
                "circulation",
            ],
            rows.iter().map(|r| {
                vec![
                    r.delta.to_string(),
                    opt(r.loop_area),
                    opt(r.loop_max_radius),
                    opt(r.lower_axis_crossing),
                    r.circulation.to_string(),
                ]
            }),
        )?);
    }
    if settings.format.json() {
        files.push(json_file("sweep.json", &entries));
    }
    Ok(Outcome {
        result: json!({ "circulation_radius": settings.radius, "rows": entries }),
        files,
        failed: false,
    })
}
