use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::str::FromStr;

use mbk_core::exact::{format_rational, Exponent};
use mbk_core::indexsets::{
    conditions_for, effective_conditions, enumerate_sp, threshold_scan, thresholds, witness_radius,
};
use mbk_core::kernel::{
    continuity_experiment, evaluate_kernel, ramadanov_experiment, shell_indices, KernelQuery,
};
use mbk_core::norms::{closed_form_norm_p, quadrature_norm_p, singular_axis};
use mbk_core::verify::{kernel_grid, run_suite, Suite};
use mbk_core::{DomainSpec, IndexBox, MultiIndex, NormValue, ThresholdSet};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::{reparse, Command, Format, Output};

/// Relative gap above which the norm oracle counts as a disagreement.
const ORACLE_GAP: f64 = 1e-6;

pub(crate) fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sp {
            domain,
            p,
            index_box,
            output,
        } => cmd_sp(&domain, &p, &index_box, &output),
        Command::Thresholds {
            domain,
            no_verify,
            output,
        } => cmd_thresholds(&domain, no_verify, &output),
        Command::Norm {
            domain,
            alpha,
            p,
            oracle,
            rel_tol,
            output,
        } => cmd_norm(&domain, &alpha, &p, oracle, rel_tol, &output),
        Command::Kernel {
            domain,
            p,
            z,
            w,
            truncation,
            rel_tol,
            output,
        } => cmd_kernel(&domain, &p, &z, &w, truncation, rel_tol, &output),
        Command::Verify {
            suite,
            seed,
            output,
        } => cmd_verify(&suite, seed, &output),
        Command::Continuity {
            domain,
            p,
            k_max,
            margin,
            points,
            seed,
            truncation,
            rel_tol,
            output,
        } => {
            let grid = GridSpec {
                margin,
                points,
                seed,
                truncation,
                rel_tol,
            };
            cmd_continuity(&domain, &p, k_max, &grid, &output)
        }
        Command::Ramadanov {
            domain,
            p,
            count,
            margin,
            points,
            seed,
            track,
            truncation,
            rel_tol,
            output,
        } => {
            let grid = GridSpec {
                margin,
                points,
                seed,
                truncation,
                rel_tol,
            };
            cmd_ramadanov(&domain, &p, count, track, &grid, &output)
        }
        Command::Run { config } => cmd_run(&config),
    }
}

fn emit(output: &Output, value: &Value, csv: &str) -> Result<(), CliError> {
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Csv => csv.to_string(),
    };
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn domain(s: &str) -> Result<DomainSpec, CliError> {
    Ok(DomainSpec::parse(s)?)
}

fn multi_index(s: &str) -> Result<MultiIndex, CliError> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| CliError::Invalid(format!("bad index component '{x}': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(MultiIndex::new)
}

fn complex_vector(s: &str) -> Result<Vec<Complex64>, CliError> {
    s.split(',')
        .map(|x| {
            Complex64::from_str(x.trim())
                .map_err(|_| CliError::Invalid(format!("bad complex number '{x}'")))
        })
        .collect()
}

fn cmd_sp(d: &str, p: &str, index_box: &str, output: &Output) -> Result<(), CliError> {
    let d = domain(d)?;
    let p = Exponent::parse_exact(p)?;
    let index_box = IndexBox::parse(index_box)?;
    let indices = enumerate_sp(&d, &p, &index_box)?;
    let value = json!({
        "domain": d.to_json(),
        "p": p.to_string(),
        "box": index_box.ranges(),
        "conditions": effective_conditions(&d).to_json(),
        "indices": indices,
    });
    let mut csv = String::new();
    for alpha in &indices {
        let parts: Vec<String> = alpha.as_slice().iter().map(|a| a.to_string()).collect();
        writeln!(csv, "{}", parts.join(",")).expect("string write");
    }
    emit(output, &value, &csv)
}

fn cmd_thresholds(d: &str, no_verify: bool, output: &Output) -> Result<(), CliError> {
    let d = domain(d)?;
    let set = thresholds(&d)?;
    let mut value = set.to_json();
    let mut missing = Vec::new();
    if let (ThresholdSet::Finite(values), false) = (&set, no_verify) {
        let radius = witness_radius(&d);
        let candidates: Vec<_> = values.iter().rev().cloned().collect();
        let scans = threshold_scan(&d, &candidates, &IndexBox::cube(d.dim(), radius))?;
        missing = scans
            .iter()
            .filter(|s| !s.confirmed())
            .map(|s| format_rational(&s.p))
            .collect();
        value["witnesses"] = Value::Array(scans.iter().map(|s| s.to_json()).collect());
        value["witness_radius"] = json!(radius);
    }
    let csv: String = set
        .values_desc()
        .iter()
        .map(|v| format!("{}\n", format_rational(v)))
        .collect();
    emit(output, &value, &csv)?;
    if !missing.is_empty() {
        return Err(CliError::Verification(format!(
            "no witness found for {}",
            missing.join(", ")
        )));
    }
    Ok(())
}

fn cmd_norm(
    d: &str,
    alpha: &str,
    p: &str,
    oracle: bool,
    rel_tol: f64,
    output: &Output,
) -> Result<(), CliError> {
    let d = domain(d)?;
    let alpha = multi_index(alpha)?;
    let p = Exponent::parse_lenient(p)?;
    let closed = closed_form_norm_p(&d, &alpha, &p)?;
    let mut value = json!({
        "domain": d.to_json(),
        "alpha": alpha,
        "p": p.to_string(),
        "closed_form": closed.to_json(),
    });
    let mut csv = format!("closed_form,{}\n", closed.value().unwrap_or(f64::INFINITY));
    let mut disagreement = None;
    if oracle {
        let axis = singular_axis(&d, &alpha)?;
        let report = quadrature_norm_p(&d, &alpha, p.to_f64(), rel_tol)?;
        let oracle_finite = axis.is_none() && !report.diverged;
        value["oracle"] = report.to_json();
        value["singular_axis"] = json!(axis);
        match (&closed, oracle_finite) {
            (NormValue::Finite { value: exact, .. }, true) => {
                let gap = (exact - report.estimate).abs() / exact.abs();
                value["relative_gap"] = json!(gap);
                writeln!(csv, "oracle,{}\nrelative_gap,{gap:e}", report.estimate)
                    .expect("string write");
                if gap > ORACLE_GAP {
                    disagreement = Some(format!("relative gap {gap:e} above {ORACLE_GAP:e}"));
                }
            }
            (NormValue::Infinite, false) => {
                writeln!(csv, "oracle,inf").expect("string write");
            }
            _ => {
                disagreement = Some("closed form and oracle disagree on finiteness".to_string());
            }
        }
    }
    emit(output, &value, &csv)?;
    match disagreement {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn cmd_kernel(
    d: &str,
    p: &str,
    z: &str,
    w: &str,
    truncation: u32,
    rel_tol: f64,
    output: &Output,
) -> Result<(), CliError> {
    let query = KernelQuery {
        domain: domain(d)?,
        p: Exponent::parse_lenient(p)?,
        z: complex_vector(z)?,
        w: complex_vector(w)?,
        truncation,
        rel_tol,
    };
    let result = evaluate_kernel(&query)?;
    let mut csv = String::from("shell,re,im\n");
    for (m, s) in result.shells.iter().enumerate() {
        writeln!(csv, "{m},{},{}", s.re, s.im).expect("string write");
    }
    emit(output, &result.to_json(), &csv)
}

fn cmd_verify(suite: &str, seed: u64, output: &Output) -> Result<(), CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse()?]
    };
    let mut reports = Vec::new();
    for s in suites {
        let report = run_suite(s, seed)?;
        eprintln!("{report}");
        reports.push(report);
    }
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.suite.as_str())
        .collect();
    let value =
        json!({ "seed": seed, "suites": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>() });
    let mut csv = String::from("suite,passed,checks,failures\n");
    for r in &reports {
        writeln!(
            csv,
            "{},{},{},{}",
            r.suite,
            r.passed,
            r.checks,
            r.failures.len()
        )
        .expect("string write");
    }
    emit(output, &value, &csv)?;
    if !failed.is_empty() {
        return Err(CliError::Verification(format!(
            "failing suites: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

struct GridSpec {
    margin: f64,
    points: usize,
    seed: u64,
    truncation: u32,
    rel_tol: f64,
}

fn cmd_continuity(
    d: &str,
    p: &str,
    k_max: u32,
    grid: &GridSpec,
    output: &Output,
) -> Result<(), CliError> {
    let d = domain(d)?;
    let p = Exponent::parse_lenient(p)?;
    let pairs = kernel_grid(&d, grid.margin, grid.points, grid.seed)?;
    let qs: Vec<f64> = (1..=k_max as i32)
        .map(|k| p.to_f64() + 0.5f64.powi(k))
        .collect();
    let rows = continuity_experiment(&d, &p, &pairs, &qs, grid.truncation, grid.rel_tol)?;
    let mut csv = String::from("q,sup_diff\n");
    for r in &rows {
        writeln!(csv, "{},{}", r.q, r.sup_diff).expect("string write");
    }
    let value = json!({
        "domain": d.to_json(),
        "p": p.to_string(),
        "margin": grid.margin,
        "rows": rows.iter().map(|r| json!({ "q": r.q, "sup_diff": r.sup_diff })).collect::<Vec<_>>(),
    });
    emit(output, &value, &csv)
}

fn cmd_ramadanov(
    d: &str,
    p: &str,
    count: usize,
    track: u32,
    grid: &GridSpec,
    output: &Output,
) -> Result<(), CliError> {
    let limit = domain(d)?;
    let p = Exponent::parse_lenient(p)?;
    if count == 0 {
        return Err(CliError::Invalid("count must be at least 1".into()));
    }
    let sequence: Vec<DomainSpec> = (1..=count)
        .map(|j| DomainSpec::dilated(limit.clone(), 1.0 - 1.0 / (j as f64 + 1.0)))
        .collect::<Result<_, _>>()?;
    let conds = conditions_for(&limit);
    let tracked: Vec<MultiIndex> = (0..=track)
        .flat_map(|m| shell_indices(limit.dim(), m))
        .filter(|a| conds.decide(a, &p) == Some(true))
        .collect();
    let pairs = kernel_grid(&sequence[0], grid.margin, grid.points, grid.seed)?;
    let report = ramadanov_experiment(
        &sequence,
        &limit,
        &p,
        &pairs,
        &tracked,
        grid.truncation,
        grid.rel_tol,
    )?;
    let mut csv = String::from("j,sup_diff");
    for a in &tracked {
        write!(csv, ",norm{}", a.to_string().replace(',', ";")).expect("string write");
    }
    csv.push('\n');
    for r in &report.rows {
        write!(csv, "{},{}", r.j, r.sup_diff).expect("string write");
        for v in &r.norms {
            write!(csv, ",{v}").expect("string write");
        }
        csv.push('\n');
    }
    let value = json!({
        "domain": limit.to_json(),
        "p": p.to_string(),
        "tracked": tracked,
        "norm_violations": report.norm_violations,
        "rows": report.rows.iter().map(|r| json!({ "j": r.j, "sup_diff": r.sup_diff, "norms": r.norms })).collect::<Vec<_>>(),
    });
    emit(output, &value, &csv)?;
    if report.norm_violations > 0 {
        return Err(CliError::Verification(format!(
            "{} tracked norms decreased",
            report.norm_violations
        )));
    }
    Ok(())
}

/// Translate `{"command": "sp", "p": "2", "box": "-3:0,-3:0", ...}` into
/// flags and run it.
fn cmd_run(path: &std::path::Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path)?;
    let config: Map<String, Value> = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("config is not a JSON object: {e}")))?;
    let command = config
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Invalid("config needs a \"command\" string".into()))?;
    if command == "run" {
        return Err(CliError::Invalid("configs cannot nest run".into()));
    }
    let mut argv = vec!["mbk".to_string(), command.to_string()];
    for (key, v) in &config {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => argv.extend([flag, s.clone()]),
            Value::Number(n) => argv.extend([flag, n.to_string()]),
            other => argv.extend([flag, other.to_string()]),
        }
    }
    dispatch(reparse(argv)?)
}
