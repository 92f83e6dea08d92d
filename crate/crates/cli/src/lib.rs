//! Command-line front end for the `derham` crate.
//!
//! Jobs read one JSON document describing a curve, divisors and extra data,
//! and write JSON or CSV reports. Exit codes: 0 success, 1 property-suite
//! failure, 2 invalid input, 3 numerical failure.

pub mod checks;
pub mod instances;
pub mod io;
pub mod suite;

use std::fs;
use std::path::{Path, PathBuf};

use derham::derham::gram_matrix;
use derham::{integrate_flow, reduce_modulo_exact, symplectic_basis, PrincipalPartSpec64, Trajectory64};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] derham::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} properties failed")]
    Properties(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Properties(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Basis,
    Pairing,
    Reduce,
    Flow,
    Ba,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct JobSpec {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub steps: usize,
    pub t_end: f64,
    pub seed: u64,
    pub format: Option<Format>,
}

/// Default pairing and property tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

impl JobSpec {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(CliError::Input(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if self.steps < 1 {
            return Err(CliError::Input("steps must be >= 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1e-2) {
                return Err(CliError::Input(format!("tol must lie in (0, 1e-2), got {t}")));
            }
        }
        Ok(())
    }

    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }
}

fn read_input(spec: &JobSpec) -> Result<Option<io::JobInput>, CliError> {
    let Some(path) = &spec.input else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    io::parse(&text).map(Some)
}

fn require_input(spec: &JobSpec) -> Result<io::JobInput, CliError> {
    read_input(spec)?.ok_or_else(|| CliError::Input("--input is required for this command".into()))
}

fn write_to(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the report to `--output`, or returns it for stdout.
fn emit(spec: &JobSpec, text: String) -> Result<Option<String>, CliError> {
    match &spec.output {
        Some(p) => {
            write_to(p, &text)?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

fn basis(input: &io::JobInput) -> Result<String, CliError> {
    let cv = io::curve(input)?;
    let d = io::divisor(&cv, &input.d, "D")?;
    let sb = symplectic_basis(&cv, &d)?;
    let gram = sb.gram()?;
    let report = json!({
        "genus": cv.genus(),
        "D": io::divisor_json(&d),
        "coord_note": sb.coord_note,
        "theta": sb.theta.iter().map(|w| io::differential_json(&cv, w)).collect::<Vec<_>>(),
        "tau": sb.tau.iter().map(|w| io::differential_json(&cv, w)).collect::<Vec<_>>(),
        "gram": io::matrix_json(&gram),
    });
    Ok(io::render(&report))
}

fn pairing(input: &io::JobInput) -> Result<String, CliError> {
    let cv = io::curve(input)?;
    if input.differentials.is_empty() {
        return Err(CliError::Input("pairing needs a non-empty \"differentials\" list".into()));
    }
    let ws = input
        .differentials
        .iter()
        .map(io::differential)
        .collect::<Result<Vec<_>, _>>()?;
    let m = gram_matrix(&cv, &ws)?;
    Ok(io::render(&json!({ "omega": io::matrix_json(&m) })))
}

fn reduce(input: &io::JobInput) -> Result<String, CliError> {
    let cv = io::curve(input)?;
    let d = io::divisor(&cv, &input.d, "D")?;
    let theta = input
        .theta
        .as_ref()
        .ok_or_else(|| CliError::Input("reduce needs \"theta\"".into()))?;
    let (reduced, f) = reduce_modulo_exact(&cv, &io::differential(theta)?, &d)?;
    Ok(io::render(&json!({
        "reduced": io::differential_json(&cv, &reduced),
        "f": io::function_json(&f),
    })))
}

#[derive(Serialize)]
struct Manifest<'a> {
    #[serde(rename = "P")]
    p: Vec<io::Cx>,
    #[serde(rename = "D")]
    d: &'a [io::Pt],
    #[serde(rename = "D0")]
    d0: &'a [io::Pt],
    pp: &'a [io::Cx],
    samples: &'a [io::Pt],
    scheme: &'a str,
    steps: usize,
    t_end: f64,
    step: f64,
    thresholds: serde_json::Value,
    completed: bool,
    error: Option<String>,
}

/// Runs the flow, returning the trajectory and, for aborted runs, the error.
fn run_flow(spec: &JobSpec, input: &io::JobInput) -> Result<(Trajectory64, Option<derham::Error>), CliError> {
    let cv = io::curve(input)?;
    let d = io::divisor(&cv, &input.d, "D")?;
    let d0 = io::divisor(&cv, &input.d0, "D0")?;
    if input.pp.is_empty() {
        return Err(CliError::Input("flow needs principal parts \"pp\"".into()));
    }
    let pp = PrincipalPartSpec64::new(input.pp.iter().map(|&z| io::cx(z)).collect());
    let samples = input
        .samples
        .iter()
        .map(|&p| io::point(&cv, p))
        .collect::<Result<Vec<_>, _>>()?;
    match integrate_flow(&cv, &d, &d0, &pp, spec.t_end, spec.steps, &samples) {
        Ok(t) => Ok((t, None)),
        Err(abort) if abort.partial.states.is_empty() => Err(abort.error.into()),
        Err(abort) => Ok((abort.partial, Some(abort.error))),
    }
}

fn manifest(spec: &JobSpec, input: &io::JobInput, traj: &Trajectory64, err: &Option<derham::Error>) -> String {
    let tol = derham::Tolerances::<f64>::default();
    let m = Manifest {
        p: input.p.clone(),
        d: &input.d,
        d0: &input.d0,
        pp: &input.pp,
        samples: &input.samples,
        scheme: &traj.scheme,
        steps: spec.steps,
        t_end: spec.t_end,
        step: traj.step,
        thresholds: json!({
            "collision": tol.flow_guard,
            "branch_approach": tol.flow_guard,
            "residue": tol.residue,
            "rank": tol.rank,
            "max_condition": tol.max_condition,
        }),
        completed: err.is_none(),
        error: err.as_ref().map(|e| e.to_string()),
    };
    io::render(&m)
}

fn trajectory_json(traj: &Trajectory64) -> String {
    let states: Vec<serde_json::Value> = traj
        .states
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "points": s.d_points.iter().map(io::point_json).collect::<Vec<_>>(),
                "abel": s.abel.iter().map(|&z| io::to_cx(z)).collect::<Vec<_>>(),
                "logpsi": s.logpsi.iter().map(|&z| io::to_cx(z)).collect::<Vec<_>>(),
            })
        })
        .collect();
    io::render(&json!({ "scheme": traj.scheme, "step": traj.step, "states": states }))
}

fn flow(spec: &JobSpec, input: &io::JobInput) -> Result<Option<String>, CliError> {
    let (traj, err) = run_flow(spec, input)?;
    let body = match spec.format.unwrap_or(Format::Csv) {
        Format::Csv => traj.to_csv(),
        Format::Json => trajectory_json(&traj),
    };
    let printed = match &spec.output {
        Some(path) => {
            write_to(path, &body)?;
            let mut m = path.clone().into_os_string();
            m.push(".manifest.json");
            write_to(Path::new(&m), &manifest(spec, input, &traj, &err))?;
            None
        }
        None => Some(body),
    };
    match err {
        Some(e) => {
            if let Some(text) = &printed {
                print!("{text}");
            }
            Err(e.into())
        }
        None => Ok(printed),
    }
}

fn ba(spec: &JobSpec, input: &io::JobInput) -> Result<String, CliError> {
    if input.samples.is_empty() {
        return Err(CliError::Input("ba needs \"samples\"".into()));
    }
    let (traj, err) = run_flow(spec, input)?;
    if let Some(e) = err {
        return Err(e.into());
    }
    let rows = (0..input.samples.len())
        .map(|id| {
            let psi = derham::baker_akhiezer(&traj, id)?;
            let logpsi = traj.states.last().map(|s| s.logpsi[id]).unwrap_or_default();
            Ok((id, psi, logpsi))
        })
        .collect::<Result<Vec<_>, derham::Error>>()?;
    Ok(match spec.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut s = String::from("sample,x_re,x_im,y_re,y_im,logpsi_re,logpsi_im,psi_re,psi_im\n");
            for (id, psi, l) in rows {
                let p = input.samples[id];
                s.push_str(&format!(
                    "{id},{},{},{},{},{},{},{},{}\n",
                    p[0], p[1], p[2], p[3], l.re, l.im, psi.re, psi.im
                ));
            }
            s
        }
        Format::Json => io::render(&json!({
            "t_end": spec.t_end,
            "steps": spec.steps,
            "psi": rows.iter().map(|(id, psi, l)| json!({
                "sample": id,
                "point": input.samples[*id],
                "logpsi": io::to_cx(*l),
                "psi": io::to_cx(*psi),
            })).collect::<Vec<_>>(),
        })),
    })
}

fn verify(spec: &JobSpec, input: Option<io::JobInput>) -> Result<Option<String>, CliError> {
    let fixture = match &input {
        Some(inp) => {
            let cv = io::curve(inp)?;
            let d = io::divisor(&cv, &inp.d, "D")?;
            Some((cv, d))
        }
        None => None,
    };
    let results = suite::run(spec.seed, spec.tol(), fixture.as_ref().map(|(c, d)| (c, d)));
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if let Some(path) = &spec.output {
        write_to(path, &io::render(&json!({ "seed": spec.seed, "tol": spec.tol(), "results": results })))?;
    }
    if failed > 0 {
        Err(CliError::Properties(failed))
    } else {
        Ok(None)
    }
}

/// Runs one job, returning text destined for stdout.
pub fn run(spec: &JobSpec) -> Result<Option<String>, CliError> {
    spec.validate()?;
    match spec.command {
        Command::Basis => emit(spec, basis(&require_input(spec)?)?),
        Command::Pairing => emit(spec, pairing(&require_input(spec)?)?),
        Command::Reduce => emit(spec, reduce(&require_input(spec)?)?),
        Command::Flow => flow(spec, &require_input(spec)?),
        Command::Ba => emit(spec, ba(spec, &require_input(spec)?)?),
        Command::Verify => verify(spec, read_input(spec)?),
    }
}
