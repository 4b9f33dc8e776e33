//! One function per subcommand. Each returns the rendered report and the exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use makeev_core::bounds::bound_report;
use makeev_core::certify::{
    CertificateResult, CertificateStatus, Engine, SearchPolicy, SearchStep, TheoremPreset,
};
use makeev_core::equipart::{
    check_equipartition, check_orthogonality, solve_arrangement, AnnealSchedule, SolverOptions,
};
use makeev_core::files::{ArrangementFile, MassesFile, SpecFile};
use makeev_core::gf2poly::DEFAULT_CELL_LIMIT;

use crate::table;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DIMENSION_MISMATCH: u8 = 3;
pub const EXIT_RESOURCE: u8 = 4;

pub const CELL_LIMIT_VAR: &str = "MAKEEV_CELL_LIMIT";

#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: u8,
}

fn json<T: Serialize>(value: &T, code: u8) -> Output {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    Output { text, code }
}

/// Engine with the cell guard taken from the environment, if set.
pub fn engine_from_env() -> Result<Engine> {
    match std::env::var(CELL_LIMIT_VAR) {
        Ok(v) => {
            let limit = v
                .trim()
                .parse()
                .with_context(|| format!("{CELL_LIMIT_VAR}={v:?} is not a cell count"))?;
            Ok(Engine::new(limit))
        }
        Err(_) => Ok(Engine::new(DEFAULT_CELL_LIMIT)),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn degrees(ds: &[Option<usize>]) -> String {
    let parts: Vec<String> = ds
        .iter()
        .map(|d| d.map_or("-".to_string(), |d| d.to_string()))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn target(k: usize, d: usize) -> String {
    (1..=k).map(|i| format!("t{i}^{d}")).collect::<Vec<_>>().join("*")
}

pub enum CertifySource {
    Spec(PathBuf),
    Theorem {
        id: String,
        k: Option<usize>,
        q: Option<u32>,
        t: Option<u64>,
        d: Option<usize>,
    },
}

#[derive(Serialize)]
struct CertifyReport {
    preset: Option<TheoremPreset>,
    k: usize,
    d: usize,
    dim_u: u64,
    kd: u64,
    status: CertificateStatus,
    residual_support: Option<usize>,
    max_degrees: Vec<Option<usize>>,
    spec: SpecFile,
}

fn certificate_lines(out: &mut String, r: &CertificateResult) {
    let kd = (r.k * r.d) as u64;
    writeln!(out, "representation: {}", r.spec).unwrap();
    writeln!(out, "dim U = {}, k*d = {kd}", r.dim_u).unwrap();
    match r.status {
        CertificateStatus::DimensionMismatch => {
            writeln!(out, "DimensionMismatch: dim U = {} but k*d = {kd}; test not run", r.dim_u).unwrap();
        }
        status => {
            writeln!(
                out,
                "test: p_U == {} mod (t_i^{})",
                target(r.k, r.d),
                r.d + 1
            )
            .unwrap();
            writeln!(
                out,
                "p_U: {} terms, max degrees {}",
                r.residual_support.unwrap_or(0),
                degrees(&r.max_degrees)
            )
            .unwrap();
            writeln!(out, "{status} at d={}", r.d).unwrap();
        }
    }
}

pub fn certify(engine: &Engine, source: CertifySource, as_json: bool) -> Result<Output> {
    let (preset, result) = match source {
        CertifySource::Spec(path) => {
            let file = SpecFile::parse(&read(&path)?)
                .with_context(|| format!("in spec file {}", path.display()))?;
            let (spec, d) = file
                .to_spec()
                .with_context(|| format!("in spec file {}", path.display()))?;
            (None, engine.certify_full_monomial(&spec, d)?)
        }
        CertifySource::Theorem { id, k, q, t, d } => {
            let preset = TheoremPreset::from_id(&id, k, q, t, d)?;
            (Some(preset), engine.certify_preset(&preset)?)
        }
    };
    let code = match result.status {
        CertificateStatus::Certified => EXIT_OK,
        CertificateStatus::NotCertified => EXIT_FAIL,
        CertificateStatus::DimensionMismatch => EXIT_DIMENSION_MISMATCH,
    };
    if as_json {
        return Ok(json(
            &CertifyReport {
                preset,
                k: result.k,
                d: result.d,
                dim_u: result.dim_u,
                kd: (result.k * result.d) as u64,
                status: result.status,
                residual_support: result.residual_support,
                max_degrees: result.max_degrees.clone(),
                spec: SpecFile::from_spec(&result.spec, result.d),
            },
            code,
        ));
    }
    let mut text = String::new();
    if let Some(p) = preset {
        writeln!(text, "preset: {p}").unwrap();
    }
    certificate_lines(&mut text, &result);
    Ok(Output { text, code })
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
enum StepReport {
    Skipped { d: usize, reason: String },
    Tried { d: usize, status: CertificateStatus, dim_u: u64 },
}

#[derive(Serialize)]
struct SearchReport {
    m: u64,
    l: usize,
    k: usize,
    policy: SearchPolicy,
    d_min: usize,
    d_max: usize,
    found: Option<usize>,
    spec: Option<SpecFile>,
    steps: Vec<StepReport>,
}

pub fn search(
    engine: &Engine,
    m: u64,
    l: usize,
    k: usize,
    policy: SearchPolicy,
    d_max: usize,
    as_json: bool,
) -> Result<Output> {
    let outcome = engine.minimal_certified_d(m, l, k, policy, d_max)?;
    let code = if outcome.found.is_some() { EXIT_OK } else { EXIT_FAIL };
    let spec = outcome
        .found
        .as_ref()
        .map(|r| SpecFile::from_spec(&r.spec, r.d));
    if as_json {
        let steps = outcome
            .steps
            .iter()
            .map(|s| match s {
                SearchStep::Skipped { d, reason } => StepReport::Skipped {
                    d: *d,
                    reason: reason.clone(),
                },
                SearchStep::Tried(r) => StepReport::Tried {
                    d: r.d,
                    status: r.status,
                    dim_u: r.dim_u,
                },
            })
            .collect();
        return Ok(json(
            &SearchReport {
                m,
                l,
                k,
                policy,
                d_min: outcome.d_min,
                d_max: outcome.d_max,
                found: outcome.found.as_ref().map(|r| r.d),
                spec,
                steps,
            },
            code,
        ));
    }
    let mut text = String::new();
    writeln!(
        text,
        "search m={m} l={l} k={k} policy={policy}, d from {} to {}",
        outcome.d_min, outcome.d_max
    )
    .unwrap();
    for step in &outcome.steps {
        match step {
            SearchStep::Skipped { d, reason } => writeln!(text, "  d={d}: skipped: {reason}").unwrap(),
            SearchStep::Tried(r) => writeln!(text, "  d={}: {}", r.d, r.status).unwrap(),
        }
    }
    match (&outcome.found, spec) {
        (Some(r), Some(spec)) => {
            writeln!(text, "found d={}", r.d).unwrap();
            text.push_str(&spec.to_json());
            text.push('\n');
        }
        _ => writeln!(text, "not found up to d={}", outcome.d_max).unwrap(),
    }
    Ok(Output { text, code })
}

pub fn bounds(m: u64, l: u32, k: u32, orthogonal: bool, as_json: bool) -> Result<Output> {
    let report = bound_report(m, l, k, orthogonal)?;
    if as_json {
        return Ok(json(&report, EXIT_OK));
    }
    Ok(Output {
        text: format!("{report}\n"),
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct TableReport {
    rows: Vec<table::RowResult>,
    all_pass: bool,
}

pub fn table(engine: &Engine, as_json: bool) -> Result<Output> {
    let rows = table::run(engine)?;
    let all_pass = rows.iter().all(|r| r.pass);
    let code = if all_pass { EXIT_OK } else { EXIT_FAIL };
    if as_json {
        return Ok(json(&TableReport { rows, all_pass }, code));
    }
    let mut text = String::new();
    for row in &rows {
        writeln!(text, "{row}").unwrap();
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    writeln!(text, "{passed}/{} rows pass", rows.len()).unwrap();
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct VerifyReport {
    fourier: makeev_core::equipart::FourierReport,
    orthogonality: Option<Vec<makeev_core::equipart::PairCheck>>,
    all_pass: bool,
}

pub fn verify(
    arrangement: &Path,
    masses: &Path,
    l: usize,
    orthogonal: bool,
    tol: f64,
    as_json: bool,
) -> Result<Output> {
    let (arr, warnings) = ArrangementFile::parse(&read(arrangement)?)
        .and_then(|f| f.to_arrangement())
        .with_context(|| format!("in arrangement file {}", arrangement.display()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let clouds = MassesFile::parse(&read(masses)?)
        .and_then(|f| f.to_masses())
        .with_context(|| format!("in masses file {}", masses.display()))?;
    let fourier = check_equipartition(&arr, &clouds, l, tol)?;
    let orthogonality = if orthogonal {
        Some(check_orthogonality(&arr, tol)?)
    } else {
        None
    };
    let all_pass = fourier.all_pass()
        && orthogonality
            .as_ref()
            .is_none_or(|ps| ps.iter().all(|p| p.orthogonal));
    let code = if all_pass { EXIT_OK } else { EXIT_FAIL };
    if as_json {
        return Ok(json(
            &VerifyReport {
                fourier,
                orthogonality,
                all_pass,
            },
            code,
        ));
    }
    let mut text = String::new();
    writeln!(
        text,
        "k={} hyperplanes in d={}, l={l}, {} constraint characters, rel_tol {tol:e}",
        arr.k(),
        arr.d(),
        fourier.characters.len()
    )
    .unwrap();
    for (i, m) in fourier.masses.iter().enumerate() {
        writeln!(
            text,
            "mass {}: total {}, max |c_h| {:e}, relative residual {:e}: {}",
            i + 1,
            m.total_weight,
            m.max_coefficient,
            m.relative_residual,
            if m.equipartitioned { "pass" } else { "fail" }
        )
        .unwrap();
    }
    for p in orthogonality.iter().flatten() {
        writeln!(
            text,
            "pair ({},{}): <a_r,a_s> = {:e}: {}",
            p.r + 1,
            p.s + 1,
            p.dot,
            if p.orthogonal { "orthogonal" } else { "not orthogonal" }
        )
        .unwrap();
    }
    writeln!(text, "{}", if all_pass { "all verdicts pass" } else { "some verdicts fail" }).unwrap();
    Ok(Output { text, code })
}

pub struct SolveArgs {
    pub masses: PathBuf,
    pub k: usize,
    pub l: usize,
    pub orthogonal: bool,
    pub restarts: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub stages: usize,
    pub factor: f64,
}

#[derive(Serialize)]
struct SolveReport {
    restart: usize,
    restarts: usize,
    seed: u64,
    residual: f64,
    orthogonality_residual: Option<f64>,
    tol: f64,
    pass: bool,
    arrangement: ArrangementFile,
}

pub fn solve(args: SolveArgs, as_json: bool) -> Result<Output> {
    let clouds = MassesFile::parse(&read(&args.masses)?)
        .and_then(|f| f.to_masses())
        .with_context(|| format!("in masses file {}", args.masses.display()))?;
    let options = SolverOptions {
        restarts: args.restarts,
        seed: args.seed,
        schedule: AnnealSchedule {
            stages: args.stages,
            factor: args.factor,
            ..AnnealSchedule::default()
        },
        ..SolverOptions::default()
    };
    let solution = solve_arrangement(&clouds, args.k, args.l, args.orthogonal, &options)?;
    let pass = solution.residual <= args.tol
        && solution.orthogonality_residual.is_none_or(|o| o <= args.tol);
    let file = ArrangementFile::from_arrangement(&solution.arrangement);
    if let Some(path) = &args.out {
        fs::write(path, file.to_json() + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let code = if pass { EXIT_OK } else { EXIT_FAIL };
    if as_json {
        return Ok(json(
            &SolveReport {
                restart: solution.restart,
                restarts: args.restarts,
                seed: args.seed,
                residual: solution.residual,
                orthogonality_residual: solution.orthogonality_residual,
                tol: args.tol,
                pass,
                arrangement: file,
            },
            code,
        ));
    }
    let mut text = String::new();
    writeln!(
        text,
        "best of {} restarts (seed {}): restart {}",
        args.restarts, args.seed, solution.restart
    )
    .unwrap();
    writeln!(text, "relative residual {:e} (tol {:e})", solution.residual, args.tol).unwrap();
    if let Some(o) = solution.orthogonality_residual {
        writeln!(text, "orthogonality residual {o:e}").unwrap();
    }
    match &args.out {
        Some(path) => writeln!(text, "arrangement written to {}", path.display()).unwrap(),
        None => {
            text.push_str(&file.to_json());
            text.push('\n');
        }
    }
    writeln!(text, "{}", if pass { "pass" } else { "fail" }).unwrap();
    Ok(Output { text, code })
}
