//! Batch front end: JSON problem files in, structured results out, plus
//! embedded reproductions of the three case studies.
//!
//! Exit codes: `0` success, `1` malformed input, `2` infeasible problem,
//! `3` failed verification or reproduction check.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::decomposition::{
    constraint_matrices, decompose, uk_constraint_wrenches, uk_covered_indices,
    unconstrained_accelerations,
};
use crate::equivalence::{
    assign_torque_share, build_system, check_equivalence, solve_masses, EquivalenceMode,
    EquivalenceSystem, Inertia, TorqueShare, VirtualEquivalence,
};
use crate::error::{Error, Result};
use crate::model::{Contact, ContactModel, ContactSet, Wrench, WrenchSpace};
use crate::nullspaces::{build_model, dimension_audit, internal_state};
use crate::numerics::{Matrix, Tolerance, Vector};
use crate::synthesis::{
    body_acceleration, corollary_applicable, field_split, legacy_parametrized_pinv,
    parametrized_pinv, synthesize, unweighted_pinv,
};

#[derive(Parser)]
#[command(
    name = "wrenchdist",
    about = "Wrench synthesis and decomposition for multi-contact load distribution",
    version
)]
pub struct Cli {
    /// Residual tolerance override (default 1e-9)
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a manipulating wrench distribution for a resultant wrench
    Synth { file: PathBuf },
    /// Split applied wrenches into manipulating and constraint parts
    Decompose {
        file: PathBuf,
        /// Cross-check against the constrained-dynamics formula
        #[arg(long)]
        oracle: bool,
    },
    /// Run consistency checks on a problem file
    Verify {
        file: PathBuf,
        /// Check the historical parametrized inverse instead of the corrected one
        #[arg(long = "legacy-pinv")]
        legacy_pinv: bool,
    },
    /// Reproduce an embedded case study: pointmass | triangle | sphere
    Repro { case: String },
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Testable entry point.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let use_stderr = e.use_stderr();
            let _ = e.print();
            return if use_stderr { 1 } else { 0 };
        }
    };
    let tol = Tolerance::new(1e-10, cli.tol.unwrap_or(1e-9));
    match &cli.command {
        Command::Synth { file } => cmd_synth(file, tol, cli.pretty),
        Command::Decompose { file, oracle } => cmd_decompose(file, *oracle, tol, cli.pretty),
        Command::Verify { file, legacy_pinv } => cmd_verify(file, *legacy_pinv, tol, cli.pretty),
        Command::Repro { case } => cmd_repro(case),
    }
}

// ---------------------------------------------------------------------------
// problem files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    space: String,
    points: Vec<Vec<f64>>,
    contact_models: Option<Vec<String>>,
    mode: String,
    resultant: Option<Vec<f64>>,
    applied: Option<Vec<Vec<f64>>>,
    virtual_mass_total: Option<f64>,
    equivalence: Option<String>,
    inertia_scale_k: Option<f64>,
    body_inertia: Option<Vec<f64>>,
    torque_share_beta: Option<f64>,
    torque_weights: Option<Vec<f64>>,
    lambda_m: Option<Vec<f64>>,
    lambda_c: Option<Vec<f64>>,
    /// Per-contact inertia override (flat entries; null to keep the
    /// assigned value); used by `verify` to diagnose corrupted inertias.
    j_star: Option<Vec<Option<Vec<f64>>>>,
    tolerance: Option<ToleranceOverride>,
}

#[derive(Deserialize)]
struct ToleranceOverride {
    rank_eps: Option<f64>,
    residual_eps: Option<f64>,
}

enum ProblemMode {
    Synthesis(Wrench),
    Decomposition(Vector),
}

struct Setup {
    cs: ContactSet,
    sys: EquivalenceSystem,
    share: TorqueShare,
    mode: ProblemMode,
    lambda_m: Option<Vector>,
    lambda_c: Option<Vector>,
    j_star_override: Option<Vec<Option<Inertia>>>,
    tol: Tolerance,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidProblem(msg.into())
}

fn parse_space(s: &str) -> Result<WrenchSpace> {
    match s {
        "spatial" => Ok(WrenchSpace::Spatial),
        "planar" => Ok(WrenchSpace::Planar),
        "translational2" => Ok(WrenchSpace::Translational2),
        "translational3" => Ok(WrenchSpace::Translational3),
        other => Err(invalid(format!("unknown space '{other}'"))),
    }
}

fn parse_model(s: &str) -> Result<ContactModel> {
    match s {
        "force" => Ok(ContactModel::ForceOnly),
        "wrench" => Ok(ContactModel::ForceAndTorque),
        "torque" => Ok(ContactModel::TorqueOnly),
        other => Err(invalid(format!("unknown contact model '{other}'"))),
    }
}

fn parse_inertia(space: WrenchSpace, flat: &[f64]) -> Result<Inertia> {
    match (space, flat.len()) {
        (WrenchSpace::Spatial, 9) => Ok(Inertia::Spatial(nalgebra::Matrix3::from_row_slice(flat))),
        (WrenchSpace::Planar, 1) => Ok(Inertia::Planar(flat[0])),
        _ => Err(invalid("inertia entries do not match the space (9 spatial, 1 planar)")),
    }
}

fn build_setup(p: &ProblemFile, tol: Tolerance) -> Result<Setup> {
    let space = parse_space(&p.space)?;
    let default_model = if space.torque_dim() > 0 { "wrench" } else { "force" };
    let models = match &p.contact_models {
        Some(list) => {
            if list.len() != p.points.len() {
                return Err(invalid("contact_models length does not match points"));
            }
            list.iter().map(|s| parse_model(s)).collect::<Result<Vec<_>>>()?
        }
        None => vec![parse_model(default_model)?; p.points.len()],
    };
    let contacts = p
        .points
        .iter()
        .zip(models)
        .map(|(pt, model)| Contact {
            r: Vector::from_column_slice(pt),
            model,
        })
        .collect();
    let cs = ContactSet::new(space, contacts)?;

    let tol = match &p.tolerance {
        Some(t) => Tolerance::new(
            t.rank_eps.unwrap_or(tol.rank_eps),
            t.residual_eps.unwrap_or(tol.residual_eps),
        ),
        None => tol,
    };

    let m_star_o = p.virtual_mass_total.unwrap_or(1.0);
    let mode = match p.equivalence.as_deref().unwrap_or("reduced") {
        "reduced" => EquivalenceMode::Reduced,
        "full" => EquivalenceMode::Full,
        other => return Err(invalid(format!("unknown equivalence mode '{other}'"))),
    };
    let j_target = match (mode, &p.body_inertia) {
        (EquivalenceMode::Full, Some(flat)) => {
            let k = p.inertia_scale_k.unwrap_or(1.0);
            if k <= 0.0 {
                return Err(invalid("inertia_scale_k must be positive"));
            }
            Some(parse_inertia(space, flat)?.scaled(k))
        }
        (EquivalenceMode::Full, None) if space.torque_dim() > 0 => {
            return Err(Error::MissingInertiaTarget)
        }
        _ => None,
    };
    let sys = build_system(&cs, m_star_o, j_target.as_ref(), mode)?;

    let beta = p.torque_share_beta.unwrap_or(0.0);
    let share = match &p.torque_weights {
        Some(w) => TorqueShare {
            beta,
            weights: w.clone(),
        },
        None => TorqueShare {
            beta,
            weights: Vec::new(),
        },
    };

    let mode = match p.mode.as_str() {
        "synthesis" => {
            let r = p
                .resultant
                .as_ref()
                .ok_or_else(|| invalid("synthesis mode requires 'resultant'"))?;
            ProblemMode::Synthesis(Wrench::from_vector(
                space,
                &Vector::from_column_slice(r),
            )?)
        }
        "decomposition" => {
            let list = p
                .applied
                .as_ref()
                .ok_or_else(|| invalid("decomposition mode requires 'applied'"))?;
            if list.len() != cs.len() {
                return Err(invalid("applied list length does not match points"));
            }
            let mut h = Vector::zeros(cs.stack_dim());
            for (i, w) in list.iter().enumerate() {
                if w.len() != cs.contact_dim(i) {
                    return Err(invalid(format!(
                        "applied wrench {i} has {} entries, contact carries {}",
                        w.len(),
                        cs.contact_dim(i)
                    )));
                }
                h.rows_mut(cs.contact_offset(i), w.len())
                    .copy_from(&Vector::from_column_slice(w));
            }
            ProblemMode::Decomposition(h)
        }
        other => return Err(invalid(format!("unknown mode '{other}'"))),
    };

    let j_star_override = match &p.j_star {
        Some(list) => {
            if list.len() != cs.len() {
                return Err(invalid("j_star length does not match points"));
            }
            Some(
                list.iter()
                    .map(|e| e.as_ref().map(|flat| parse_inertia(space, flat)).transpose())
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };

    Ok(Setup {
        cs,
        sys,
        share,
        mode,
        lambda_m: p.lambda_m.as_ref().map(|v| Vector::from_column_slice(v)),
        lambda_c: p.lambda_c.as_ref().map(|v| Vector::from_column_slice(v)),
        j_star_override,
        tol,
    })
}

fn load_setup(path: &Path, tol: Tolerance) -> std::result::Result<(ProblemFile, Setup), i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        1
    })?;
    let p: ProblemFile = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        1
    })?;
    let setup = build_setup(&p, tol).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        error_exit(&e)
    })?;
    Ok((p, setup))
}

fn error_exit(e: &Error) -> i32 {
    match e {
        Error::InvalidProblem(_)
        | Error::DimensionMismatch { .. }
        | Error::UnsupportedContactModel
        | Error::MissingInertiaTarget => 1,
        _ => 2,
    }
}

// ---------------------------------------------------------------------------
// output formatting

/// Round to 9 significant digits and normalize negative zero, so that
/// identical inputs always produce byte-identical output.
fn round9(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(f) = n.as_f64() {
                if let Some(num) = serde_json::Number::from_f64(round9(f)) {
                    *v = Value::Number(num);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

fn emit(mut v: Value, pretty: bool) {
    canonicalize(&mut v);
    let text = if pretty {
        serde_json::to_string_pretty(&v).expect("serializable value")
    } else {
        serde_json::to_string(&v).expect("serializable value")
    };
    println!("{text}");
}

fn vec_json(v: &Vector) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn inertia_json(j: &Option<Inertia>) -> Value {
    match j {
        Some(Inertia::Spatial(m)) => {
            json!((0..3)
                .map(|r| (0..3).map(|c| m[(r, c)]).collect::<Vec<f64>>())
                .collect::<Vec<_>>())
        }
        Some(Inertia::Planar(j)) => json!(j),
        None => Value::Null,
    }
}

fn report_error(e: &Error, pretty: bool) -> i32 {
    let code = error_exit(e);
    emit(
        json!({
            "error": e.to_string(),
            "feasible": code != 2,
        }),
        pretty,
    );
    eprintln!("error: {e}");
    code
}

// ---------------------------------------------------------------------------
// synth

fn apply_override(ve: &mut VirtualEquivalence, setup: &Setup) {
    if let Some(over) = &setup.j_star_override {
        for (slot, entry) in over.iter().enumerate() {
            if let Some(j) = entry {
                ve.j_star[slot] = j.clone();
            }
        }
    }
}

fn cmd_synth(file: &Path, tol: Tolerance, pretty: bool) -> i32 {
    let (_, setup) = match load_setup(file, tol) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let h_o = match &setup.mode {
        ProblemMode::Synthesis(w) => w.clone(),
        _ => {
            eprintln!("error: synth requires a synthesis-mode problem file");
            return 1;
        }
    };
    match synth_pipeline(&setup, &h_o) {
        Ok(v) => {
            emit(v, pretty);
            0
        }
        Err(e) => report_error(&e, pretty),
    }
}

fn synth_pipeline(setup: &Setup, h_o: &Wrench) -> Result<Value> {
    let sol = solve_masses(&setup.sys, setup.tol)?;
    if !sol.feasible {
        return Err(Error::Infeasible(format!(
            "negative virtual masses at system columns {:?} (min {:.3e})",
            sol.negative, sol.min_mass
        )));
    }
    let mut ve = assign_torque_share(&setup.cs, &sol.m_star, &setup.share)?;
    apply_override(&mut ve, setup);
    let h_base = synthesize(h_o, &setup.cs, &ve)?;
    let model = build_model(h_o, &setup.cs, &setup.sys, true)?;
    let lm = setup
        .lambda_m
        .clone()
        .unwrap_or_else(|| Vector::zeros(model.k.ncols()));
    let lc = setup
        .lambda_c
        .clone()
        .unwrap_or_else(|| Vector::zeros(model.z.ncols()));
    if lm.len() != model.k.ncols() {
        return Err(invalid(format!(
            "lambda_m has {} entries, the manipulating basis has {} columns",
            lm.len(),
            model.k.ncols()
        )));
    }
    if lc.len() != model.z.ncols() {
        return Err(invalid(format!(
            "lambda_c has {} entries, the constraining basis has {} columns",
            lc.len(),
            model.z.ncols()
        )));
    }
    let h = &h_base + &model.k * &lm - &model.z * &lc;
    let closure = (setup.cs.grasp_matrix() * &h - h_o.as_vector()).norm();
    let diag = check_equivalence(&ve, &setup.cs, setup.tol)?;
    Ok(json!({
        "h_o": vec_json(&h_o.as_vector()),
        "h_m": vec_json(&h),
        "h_c": Value::Null,
        "m_star": vec_json(&ve.m_star),
        "J_star_o": inertia_json(&ve.j_star_o),
        "d": model.d,
        "lambda_c": vec_json(&lc),
        "diagnostics": {
            "feasible": true,
            "pure_torque_limit": ve.pure_torque_limit,
            "corollary_a_applicable": corollary_applicable(&setup.cs, setup.tol),
            "residuals": {
                "closure": closure,
                "mass_sum": diag.mass_sum,
                "com": diag.com,
                "inertia_sum": diag.inertia_sum,
                "proportionality": diag.proportionality,
            },
            "notes": model.diagnostics,
        }
    }))
}

// ---------------------------------------------------------------------------
// decompose

fn cmd_decompose(file: &Path, oracle: bool, tol: Tolerance, pretty: bool) -> i32 {
    let (_, setup) = match load_setup(file, tol) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let h = match &setup.mode {
        ProblemMode::Decomposition(h) => h.clone(),
        _ => {
            eprintln!("error: decompose requires a decomposition-mode problem file");
            return 1;
        }
    };
    match decompose_pipeline(&setup, &h, oracle) {
        Ok(v) => {
            emit(v, pretty);
            0
        }
        Err(e) => report_error(&e, pretty),
    }
}

fn decompose_pipeline(setup: &Setup, h: &Vector, oracle: bool) -> Result<Value> {
    let d = decompose(h, &setup.cs, &setup.sys, &setup.share)?;
    let g = setup.cs.grasp_matrix();
    let closure = (&g * &d.h_m - d.h_o.as_vector()).norm();
    let constraint_resultant = (&g * &d.h_c).norm();
    let reconstruction = (&d.h_m - &d.h_c - h).norm();

    let mut diagnostics = json!({
        "feasible": true,
        "corollary_a_applicable": corollary_applicable(&setup.cs, setup.tol),
        "residuals": {
            "closure": closure,
            "constraint_resultant": constraint_resultant,
            "reconstruction": reconstruction,
        },
        "notes": d.model.diagnostics,
    });
    if oracle {
        let sol = solve_masses(&setup.sys, setup.tol)?;
        let ve = assign_torque_share(&setup.cs, &sol.m_star, &setup.share)?;
        if ve.pure_torque_limit {
            diagnostics["oracle"] = json!({
                "skipped": "constrained-dynamics oracle undefined in the pure-torque limit",
            });
        } else {
            let omega = vec![Vector::zeros(setup.cs.space.torque_dim()); setup.cs.len()];
            let sysc = constraint_matrices(&setup.cs, &omega)?;
            let xdd = unconstrained_accelerations(&setup.cs, &ve, h)?;
            let h_c_uk = uk_constraint_wrenches(&sysc, &setup.cs, &ve, &xdd)?;
            let covered = uk_covered_indices(&setup.cs, &ve)?;
            let discrepancy = covered
                .iter()
                .map(|&i| (h_c_uk[i] - d.h_c[i]).abs())
                .fold(0.0, f64::max);
            diagnostics["oracle"] = json!({
                "discrepancy": discrepancy,
                "covered_entries": covered.len(),
            });
        }
    }
    Ok(json!({
        "h_o": vec_json(&d.h_o.as_vector()),
        "h_m": vec_json(&d.h_m),
        "h_c": vec_json(&d.h_c),
        "m_star": vec_json(&solve_masses(&setup.sys, setup.tol)?.m_star),
        "J_star_o": Value::Null,
        "d": d.model.d,
        "lambda_c": vec_json(&d.lambda_c.lambda_c),
        "diagnostics": diagnostics,
    }))
}

// ---------------------------------------------------------------------------
// verify

struct Check {
    name: &'static str,
    pass: bool,
    residual: f64,
    detail: Option<String>,
}

fn cmd_verify(file: &Path, legacy: bool, tol: Tolerance, pretty: bool) -> i32 {
    let (_, setup) = match load_setup(file, tol) {
        Ok(v) => v,
        Err(code) => return code,
    };
    match verify_pipeline(&setup, legacy) {
        Ok((checks, extra)) => {
            let pass = checks.iter().all(|c| c.pass);
            let mut v = json!({
                "pass": pass,
                "checks": checks.iter().map(|c| json!({
                    "name": c.name,
                    "pass": c.pass,
                    "residual": c.residual,
                    "detail": c.detail,
                })).collect::<Vec<_>>(),
            });
            if let Some((key, val)) = extra {
                v[key] = val;
            }
            emit(v, pretty);
            if pass {
                0
            } else {
                3
            }
        }
        Err(e) => report_error(&e, pretty),
    }
}

fn verify_pipeline(
    setup: &Setup,
    legacy: bool,
) -> Result<(Vec<Check>, Option<(&'static str, Value)>)> {
    let mut checks = Vec::new();
    let mut extra = None;
    let eps = setup.tol.residual_eps;

    let h_o = match &setup.mode {
        ProblemMode::Synthesis(w) => w.clone(),
        ProblemMode::Decomposition(h) => setup.cs.resultant(h)?,
    };

    let sol = solve_masses(&setup.sys, setup.tol)?;
    checks.push(Check {
        name: "mass_feasibility",
        pass: sol.feasible,
        residual: (-sol.min_mass).max(0.0),
        detail: (!sol.feasible).then(|| format!("negative masses at columns {:?}", sol.negative)),
    });

    let mut ve = assign_torque_share(&setup.cs, &sol.m_star, &setup.share)?;
    apply_override(&mut ve, setup);

    let diag = check_equivalence(&ve, &setup.cs, setup.tol)?;
    let worst = diag
        .mass_sum
        .max(diag.com)
        .max(diag.inertia_sum)
        .max(diag.proportionality);
    checks.push(Check {
        name: "equivalence_residuals",
        pass: diag.pass,
        residual: worst,
        detail: None,
    });

    if ve.pure_torque_limit {
        // the explicit inverse is undefined here; check the limit formula by
        // closure instead
        let (pass, residual, detail) = match synthesize(&h_o, &setup.cs, &ve) {
            Ok(h_m) => {
                let r = (setup.cs.grasp_matrix() * &h_m - h_o.as_vector()).norm();
                (r <= eps && !legacy, r, legacy.then(|| {
                    "legacy inverse undefined in the pure-torque limit".to_string()
                }))
            }
            Err(e) => (false, f64::INFINITY, Some(e.to_string())),
        };
        checks.push(Check {
            name: "right_inverse",
            pass,
            residual,
            detail,
        });
    } else {
        let p = if legacy {
            legacy_parametrized_pinv(&setup.cs, &ve)?
        } else {
            parametrized_pinv(&setup.cs, &ve)?
        };
        let gp = setup.cs.grasp_matrix() * &p;
        let wd = setup.cs.space.wrench_dim();
        let residual = (&gp - Matrix::identity(wd, wd)).norm();
        let pass = residual <= eps;
        if legacy && !pass {
            // report what the flawed inverse actually produces
            let h_m = &p * h_o.as_vector();
            let res = setup.cs.grasp_matrix() * &h_m;
            extra = Some(("legacy_resultant", vec_json(&res)));
        }
        checks.push(Check {
            name: "right_inverse",
            pass,
            residual,
            detail: None,
        });
    }

    checks.push(match synthesize(&h_o, &setup.cs, &ve) {
        Ok(_) => Check {
            name: "torque_parallelism",
            pass: true,
            residual: 0.0,
            detail: None,
        },
        Err(e) => Check {
            name: "torque_parallelism",
            pass: false,
            residual: f64::INFINITY,
            detail: Some(e.to_string()),
        },
    });

    let model = build_model(&h_o, &setup.cs, &setup.sys, true)?;
    checks.push(Check {
        name: "dimension_audit",
        pass: dimension_audit(&model, &setup.cs),
        residual: 0.0,
        detail: None,
    });

    Ok((checks, extra))
}

// ---------------------------------------------------------------------------
// repro

struct ReproCheck {
    name: String,
    diff: f64,
    tol: f64,
}

impl ReproCheck {
    fn pass(&self) -> bool {
        self.diff <= self.tol
    }
}

fn cmp(name: impl Into<String>, got: &Vector, want: &[f64], tol: f64) -> ReproCheck {
    let diff = got
        .iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs())
        .fold((got.len() as isize - want.len() as isize).abs() as f64, f64::max);
    ReproCheck {
        name: name.into(),
        diff,
        tol,
    }
}

fn cmp_scalar(name: impl Into<String>, got: f64, want: f64, tol: f64) -> ReproCheck {
    ReproCheck {
        name: name.into(),
        diff: (got - want).abs(),
        tol,
    }
}

fn table_vec(v: &Value) -> Vector {
    Vector::from_vec(
        v.as_array()
            .expect("array")
            .iter()
            .map(|x| x.as_f64().expect("number"))
            .collect(),
    )
}

fn table_flat(v: &Value) -> Vec<f64> {
    v.as_array()
        .expect("array")
        .iter()
        .flat_map(|row| {
            row.as_array()
                .expect("nested array")
                .iter()
                .map(|x| x.as_f64().expect("number"))
        })
        .collect()
}

fn cmd_repro(case: &str) -> i32 {
    let tables: Value = serde_json::from_str(include_str!("../fixtures/reference_tables.json"))
        .expect("embedded tables parse");
    let checks = match case {
        "sphere" => repro_sphere(&tables["sphere"]),
        "triangle" => repro_triangle(&tables["triangle"]),
        "pointmass" => repro_pointmass(&tables["pointmass"]),
        other => {
            eprintln!("error: unknown case '{other}' (expected pointmass | triangle | sphere)");
            return 1;
        }
    };
    let checks = match checks {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let mut all_pass = true;
    for c in &checks {
        let status = if c.pass() { "PASS" } else { "FAIL" };
        all_pass &= c.pass();
        println!(
            "{:<44} |delta| = {:>12.6e}  tol {:>8.1e}  {status}",
            c.name, c.diff, c.tol
        );
    }
    println!(
        "{case}: {}/{} checks passed",
        checks.iter().filter(|c| c.pass()).count(),
        checks.len()
    );
    if all_pass {
        0
    } else {
        3
    }
}

/// Reference values are rounded to three decimals.
const REFERENCE_TOL: f64 = 2e-3;

fn repro_sphere(t: &Value) -> Result<Vec<ReproCheck>> {
    let tol = Tolerance::default();
    let points: Vec<Vector> = t["points"]
        .as_array()
        .expect("points")
        .iter()
        .map(table_vec)
        .collect();
    let cs_rigid = ContactSet::new(
        WrenchSpace::Spatial,
        points.iter().map(|p| Contact::rigid(p.clone())).collect(),
    )?;
    let cs_force = ContactSet::new(
        WrenchSpace::Spatial,
        points.iter().map(|p| Contact::force_only(p.clone())).collect(),
    )?;
    let mut h = Vector::zeros(24);
    for (i, row) in t["applied"].as_array().expect("applied").iter().enumerate() {
        h.rows_mut(6 * i, 6).copy_from(&table_vec(row));
    }
    let mut checks = Vec::new();

    let h_o = cs_rigid.resultant(&h)?;
    checks.push(cmp(
        "resultant wrench",
        &h_o.as_vector(),
        table_vec(&t["resultant"]).as_slice(),
        REFERENCE_TOL,
    ));

    let sys = build_system(&cs_rigid, t["m_star_o"].as_f64().unwrap(), None, EquivalenceMode::Reduced)?;
    let sol = solve_masses(&sys, tol)?;
    checks.push(cmp(
        "virtual masses",
        &sol.m_star,
        table_vec(&t["m_star"]).as_slice(),
        REFERENCE_TOL,
    ));

    let ve0 = assign_torque_share(&cs_rigid, &sol.m_star, &TorqueShare::forces_only())?;
    if let Some(Inertia::Spatial(j)) = &ve0.j_star_o {
        let flat = Vector::from_vec(
            (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).map(|(r, c)| j[(r, c)]).collect(),
        );
        checks.push(cmp(
            "virtual body inertia",
            &flat,
            &table_flat(&t["j_star_o"]),
            REFERENCE_TOL,
        ));
    }

    let a = body_acceleration(&h_o, &ve0)?;
    checks.push(cmp(
        "virtual acceleration",
        &a.as_vector(),
        table_vec(&t["acceleration"]).as_slice(),
        REFERENCE_TOL,
    ));

    let d0 = decompose(&h, &cs_rigid, &sys, &TorqueShare::forces_only())?;
    let forces: Vec<f64> = (0..4).flat_map(|i| (0..3).map(move |k| (i, k))).map(|(i, k)| d0.h_m[6 * i + k]).collect();
    checks.push(cmp(
        "forces-only manipulating forces",
        &Vector::from_vec(forces),
        &table_flat(&t["forces_only_h_m"]),
        REFERENCE_TOL,
    ));
    let torques: f64 = (0..4).map(|i| d0.h_m.rows(6 * i + 3, 3).norm()).fold(0.0, f64::max);
    checks.push(cmp_scalar("forces-only manipulating torques vanish", torques, 0.0, 1e-9));
    checks.push(cmp(
        "forces-only constraint wrenches",
        &d0.h_c,
        &table_flat(&t["forces_only_h_c"]),
        REFERENCE_TOL,
    ));

    let legacy = legacy_parametrized_pinv(&cs_rigid, &ve0)?;
    let h_legacy = &legacy * h_o.as_vector();
    let legacy_forces: Vec<f64> = (0..4).flat_map(|i| (0..3).map(move |k| (i, k))).map(|(i, k)| h_legacy[6 * i + k]).collect();
    checks.push(cmp(
        "historical inverse forces",
        &Vector::from_vec(legacy_forces),
        &table_flat(&t["legacy_h_m"]),
        REFERENCE_TOL,
    ));
    checks.push(cmp(
        "historical inverse (wrong) resultant",
        &(cs_rigid.grasp_matrix() * &h_legacy),
        table_vec(&t["legacy_resultant"]).as_slice(),
        REFERENCE_TOL,
    ));

    let f_e = unweighted_pinv(&cs_force)? * h_o.as_vector();
    checks.push(cmp(
        "equilibrating force distribution",
        &f_e,
        &table_flat(&t["equilibrating_forces"]),
        REFERENCE_TOL,
    ));

    let d1 = decompose(&h, &cs_rigid, &sys, &TorqueShare::uniform(1.0, 4))?;
    checks.push(cmp(
        "equal-torque manipulating wrenches",
        &d1.h_m,
        &table_flat(&t["equal_torque_h_m"]),
        REFERENCE_TOL,
    ));
    checks.push(cmp(
        "equal-torque constraint wrenches",
        &d1.h_c,
        &table_flat(&t["equal_torque_h_c"]),
        REFERENCE_TOL,
    ));

    checks.push(cmp_scalar(
        "internal state agrees across torque shares",
        (&d1.lambda_c.lambda_c - &d0.lambda_c.lambda_c).norm(),
        0.0,
        1e-9,
    ));

    checks.push(cmp_scalar(
        "symmetric closed form inapplicable (points sum nonzero)",
        corollary_applicable(&cs_rigid, tol) as u8 as f64,
        0.0,
        0.5,
    ));

    Ok(checks)
}

fn repro_triangle(t: &Value) -> Result<Vec<ReproCheck>> {
    let tol = Tolerance::default();
    let mut contacts: Vec<Contact> = t["points"]
        .as_array()
        .expect("points")
        .iter()
        .map(|p| Contact::force_only(table_vec(p)))
        .collect();
    contacts.push(Contact::torque_only(Vector::zeros(2)));
    let cs = ContactSet::new(WrenchSpace::Planar, contacts)?;
    let h_o = Wrench::from_vector(WrenchSpace::Planar, &table_vec(&t["resultant"]))?;
    let sys = build_system(&cs, t["m_star_o"].as_f64().unwrap(), None, EquivalenceMode::Reduced)?;
    let sol = solve_masses(&sys, tol)?;
    let mut checks = vec![cmp(
        "virtual masses (unique)",
        &sol.m_star,
        table_vec(&t["m_star"]).as_slice(),
        1e-9,
    )];

    for case in t["cases"].as_array().expect("cases") {
        let beta = case["beta"].as_f64().unwrap();
        let share = if beta == 0.0 {
            TorqueShare::forces_only()
        } else {
            TorqueShare::uniform(beta, 1)
        };
        let ve = assign_torque_share(&cs, &sol.m_star, &share)?;
        if let Some(j_want) = case["j_star_o"].as_f64() {
            let j_got = match &ve.j_star_o {
                Some(Inertia::Planar(j)) => *j,
                _ => f64::NAN,
            };
            checks.push(cmp_scalar(
                format!("beta {beta}: body inertia"),
                j_got,
                j_want,
                1e-9,
            ));
        }
        let h_m = synthesize(&h_o, &cs, &ve)?;
        checks.push(cmp_scalar(
            format!("beta {beta}: centroid torque"),
            h_m[6],
            case["tau_m"].as_f64().unwrap(),
            1e-9,
        ));
        let split = field_split(&h_m, &cs, &ve)?;
        checks.push(cmp_scalar(
            format!("beta {beta}: force-field angular part"),
            split.x_f.angular[0],
            case["x_f_angular"].as_f64().unwrap(),
            1e-9,
        ));
        checks.push(cmp_scalar(
            format!("beta {beta}: closure"),
            (cs.grasp_matrix() * &h_m - h_o.as_vector()).norm(),
            0.0,
            1e-9,
        ));
    }
    Ok(checks)
}

fn repro_pointmass(t: &Value) -> Result<Vec<ReproCheck>> {
    let cs = ContactSet::new(
        WrenchSpace::Translational2,
        vec![
            Contact::force_only(Vector::zeros(2)),
            Contact::force_only(Vector::zeros(2)),
            Contact::force_only(Vector::zeros(2)),
        ],
    )?;
    let sys = build_system(&cs, t["m_star_o"].as_f64().unwrap(), None, EquivalenceMode::Reduced)?;
    let sol = solve_masses(&sys, Tolerance::default())?;
    let f_o = table_vec(&t["resultant_force"]);
    let h_o = Wrench {
        force: f_o.clone(),
        torque: Vector::zeros(0),
    };
    let mut checks = vec![cmp(
        "virtual masses (minimum norm)",
        &sol.m_star,
        table_vec(&t["m_star"]).as_slice(),
        1e-9,
    )];

    let model = build_model(&h_o, &cs, &sys, false)?;
    checks.push(cmp_scalar(
        "manipulating dimension",
        model.d as f64,
        t["d"].as_f64().unwrap(),
        0.5,
    ));
    for i in 0..3 {
        checks.push(cmp(
            format!("particular force {i} = f_o/3"),
            &model.h_mp.rows(2 * i, 2).into_owned(),
            (&f_o / 3.0).as_slice(),
            1e-9,
        ));
    }

    // published redistribution directions: move the shared force between
    // a chosen contact and the last one
    let u = &f_o / f_o.norm();
    for (name, a, b) in [("first", 0usize, 2usize), ("second", 1, 2)] {
        let mut dir = Vector::zeros(6);
        dir.rows_mut(2 * a, 2).copy_from(&u);
        dir.rows_mut(2 * b, 2).copy_from(&(-&u));
        let proj = &model.k * (model.k.transpose() * &dir);
        checks.push(cmp_scalar(
            format!("redistribution direction ({name}) in span"),
            (proj - &dir).norm(),
            0.0,
            1e-9,
        ));
    }

    for (i, z_row) in t["z"].as_array().expect("z").iter().enumerate() {
        let zr = table_vec(z_row);
        let proj = &model.z * (model.z.transpose() * &zr);
        checks.push(cmp_scalar(
            format!("published internal-load direction {} in span", i + 1),
            (proj - &zr).norm(),
            0.0,
            REFERENCE_TOL,
        ));
    }

    // internal state is independent of the virtual-mass choice
    let h = Vector::from_column_slice(&[3.0, 0.0, 0.0, 2.0, -1.0, -1.0]);
    let mut states = Vec::new();
    for m in [
        [1.0, 1.0, 1.0],
        [2.25, 0.75, 0.0],
        [0.5, 1.0, 1.5],
    ] {
        let ve = assign_torque_share(
            &cs,
            &Vector::from_column_slice(&m),
            &TorqueShare::forces_only(),
        )?;
        let h_m = synthesize(&h_o, &cs, &ve)?;
        states.push(internal_state(&(&h_m - &h), &model.z)?.lambda_c);
    }
    let spread = states[1..]
        .iter()
        .map(|s| (s - &states[0]).norm())
        .fold(0.0, f64::max);
    checks.push(cmp_scalar(
        "internal state invariant across mass choices",
        spread,
        0.0,
        1e-9,
    ));
    Ok(checks)
}
