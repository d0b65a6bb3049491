use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};
use timesym::choibridge::prediction_isomorphism_check;
use timesym::lhv::{chsh_violation_report, cr_family_report, cr_rows_to_csv, lhv_feasibility, Verdict};
use timesym::matcore::ToleranceConfig;
use timesym::onticlab::document::{extension_from_json, extension_to_document};
use timesym::onticlab::{
    build_toy_model_extension, check_independences, check_lambda_mediation, check_local_causality,
    check_no_retrocausality, check_psi_ontic, distinct_state_labels, find_ontological_time_reverse,
    price_contradiction_demo, OnticExtension, PsiClassification,
};
use timesym::opmodel::document::{experiment_from_json, experiment_to_document, MatrixDocument};
use timesym::opmodel::{born_predict_with, BehaviorCsv};
use timesym::suite::{run_suite, SuiteConfig};
use timesym::timerev::{find_self_reversal_gauge, operational_time_reverse, reverse_deviation};
use timesym::{BigRational, Error, Experiment};

use crate::bundled;
use crate::{Expect, Failure};

fn read_text(source: &str) -> Result<String, Failure> {
    if let Some(name) = source.strip_prefix(bundled::PREFIX) {
        return bundled::lookup(name)
            .map(str::to_string)
            .ok_or_else(|| Failure::input(format!("no bundled document named {name:?}")));
    }
    fs::read_to_string(source).map_err(|e| Failure::input(format!("{source}: {e}")))
}

fn load_experiment(source: &str, tol: &ToleranceConfig) -> Result<Experiment, Failure> {
    let text = read_text(source)?;
    experiment_from_json(&text, tol).map_err(|e| Failure::input(format!("{source}: {e}")))
}

type Labels = Option<timesym::onticlab::document::StateLabels>;

fn load_extension(source: &str) -> Result<(OnticExtension<BigRational>, Labels), Failure> {
    let text = read_text(source)?;
    extension_from_json(&text, 0.0).map_err(|e| Failure::input(format!("{source}: {e}")))
}

// Write errors (a closed pipe, say) are ignored; the exit status still reports the checks.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&(serde_json::to_string_pretty(v).expect("values serialize") + "\n"));
}

fn to_value<S: serde::Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("reports serialize")
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn predict(source: &str, tol: &ToleranceConfig) -> Result<(), Failure> {
    let e = load_experiment(source, tol)?;
    emit(&born_predict_with(&e, tol)?.to_csv_string());
    Ok(())
}

pub fn reverse(source: &str, out: Option<&Path>, gauge: bool, tol: &ToleranceConfig) -> Result<(), Failure> {
    let e = load_experiment(source, tol)?;
    let r = operational_time_reverse(&e, tol)?;
    let deviation = reverse_deviation(&e, &r, tol)?;
    let passed = deviation <= tol.prob;
    let mut verification = json!({
        "max_deviation": deviation,
        "tolerance": tol.prob,
        "result": pass_fail(passed),
    });
    if gauge {
        verification["gauge"] = match find_self_reversal_gauge(&e, tol)? {
            Some(g) => json!({
                "angle": g.angle,
                "reflect": g.reflect,
                "operator_deviation": g.operator_deviation,
                "behavior_deviation": g.behavior_deviation,
                "reverse_deviation": g.reverse_deviation,
            }),
            None => Value::Null,
        };
    }
    let doc = to_value(&experiment_to_document(&r));
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
            fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            print_json(&verification);
        }
        None => print_json(&json!({ "reversed": doc, "verification": verification })),
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "reverse deviation {deviation:e} exceeds {:e}",
            tol.prob
        )))
    }
}

pub fn verify_reverse(source: &str, reversed: &str, tol: &ToleranceConfig) -> Result<(), Failure> {
    let e = load_experiment(source, tol)?;
    let r = load_experiment(reversed, tol)?;
    let (deviation, reason) = match reverse_deviation(&e, &r, tol) {
        Ok(d) => (Some(d), None),
        Err(Error::AlphabetMismatch(m)) => (None, Some(format!("alphabet mismatch: {m}"))),
        Err(e) => return Err(e.into()),
    };
    let passed = deviation.is_some_and(|d| d <= tol.prob);
    print_json(&json!({
        "max_deviation": deviation,
        "tolerance": tol.prob,
        "reason": reason,
        "result": pass_fail(passed),
    }));
    if passed {
        Ok(())
    } else {
        Err(Failure::check(reason.unwrap_or_else(|| {
            format!(
                "behavior deviation {:e} exceeds {:e}",
                deviation.unwrap_or(f64::NAN),
                tol.prob
            )
        })))
    }
}

pub fn bipartite(source: &str, tol: &ToleranceConfig) -> Result<(), Failure> {
    let e = load_experiment(source, tol)?;
    let rep = prediction_isomorphism_check(&e, tol)?;
    let (da, db) = rep.bipartite.dims();
    let passed = rep.max_deviation <= tol.prob;
    print_json(&json!({
        "bipartite": to_value(&MatrixDocument::new(vec![da, db], rep.bipartite.matrix().matrix())),
        "max_deviation": rep.max_deviation,
        "untransposed_deviation": rep.untransposed_deviation,
        "tolerance": tol.prob,
        "result": pass_fail(passed),
    }));
    if passed {
        Ok(())
    } else {
        Err(Failure::check(format!("isomorphism deviation {:e}", rep.max_deviation)))
    }
}

fn verdict_name(feasible: bool) -> &'static str {
    if feasible {
        "FEASIBLE"
    } else {
        "INFEASIBLE"
    }
}

pub fn chsh(source: &str, tol: &ToleranceConfig) -> Result<(), Failure> {
    let e = load_experiment(source, tol)?;
    let r = chsh_violation_report(&e, tol)?;
    print_json(&json!({
        "value": r.value,
        "verdict": verdict_name(r.lp.is_feasible()),
        "facet_max": r.facet_max,
        "facets": to_value(&r.facets),
        "certificate": r.lp.to_json(),
        "isomorphism_deviation": r.isomorphism_deviation,
        "spacelike_verdict": verdict_name(r.spacelike_lp.is_feasible()),
        "consistent": r.consistent,
    }));
    if r.consistent {
        Ok(())
    } else {
        Err(Failure::check("CHSH value, facets and LP verdicts disagree"))
    }
}

pub fn lhv_check(path: &Path, expect: Option<Expect>, tol: &ToleranceConfig) -> Result<(), Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let csv = BehaviorCsv::read(file).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let (feasible, arithmetic, report) = if csv.is_exact() {
        let t = csv.into_rational()?;
        let r = lhv_feasibility(&t)?;
        (r.is_feasible(), "exact", r.to_json())
    } else {
        let t = csv.into_f64(tol.prob)?;
        let r = lhv_feasibility(&t)?;
        (r.is_feasible(), "float", r.to_json())
    };
    let mut out = json!({ "arithmetic": arithmetic, "verdict": verdict_name(feasible) });
    out["report"] = report;
    print_json(&out);
    match expect {
        Some(Expect::Feasible) if !feasible => Err(Failure::check("expected FEASIBLE, got INFEASIBLE")),
        Some(Expect::Infeasible) if feasible => Err(Failure::check("expected INFEASIBLE, got FEASIBLE")),
        _ => Ok(()),
    }
}

/// Every check on one extension; the flag is whether all conditions hold.
fn ontic_checks(ext: &OnticExtension<BigRational>, labels: Option<&[Vec<String>]>) -> (Value, bool) {
    let nr = check_no_retrocausality(ext, 0.0);
    let med = check_lambda_mediation(ext, 0.0);
    let lc = check_local_causality(ext, 0.0);
    let ind = check_independences(ext, 0.0);
    let all = nr.holds && med.strong.holds && med.weak.holds && lc.holds && ind.all_hold();
    let psi = labels.map(|l| to_value(&check_psi_ontic(ext, l, 0.0)));
    let v = json!({
        "no_retrocausality": to_value(&nr),
        "lambda_mediation": to_value(&med),
        "local_causality": to_value(&lc),
        "independences": to_value(&ind),
        "psi": psi,
        "result": pass_fail(all),
    });
    (v, all)
}

pub fn ontic_check(source: &str, _tol: &ToleranceConfig) -> Result<(), Failure> {
    let (ext, labels) = load_extension(source)?;
    let (v, all) = ontic_checks(&ext, labels.as_deref());
    print_json(&v);
    if all {
        Ok(())
    } else {
        Err(Failure::check("at least one condition fails"))
    }
}

pub fn toy_model() -> Result<(), Failure> {
    let ext = build_toy_model_extension::<BigRational>();
    let labels = distinct_state_labels(ext.scenario());
    let marginal = ext.marginalize(0.0)?;
    let half = BigRational::new(1.into(), 2.into());
    let reproduces = marginal.scenario().tuples().all(|(x, a, y, b)| {
        let want = match (x == y, a == b) {
            (true, true) => half.clone(),
            (true, false) => BigRational::from_integer(0.into()),
            (false, _) => half.clone() * half.clone(),
        };
        *marginal.get(x, a, y, b) == want
    });
    let (checks, all) = ontic_checks(&ext, Some(&labels));
    let reverse = find_ontological_time_reverse(&ext, &ext, 0.0)?;
    let identity = reverse.as_ref().is_some_and(|b| b.is_identity());
    let psi = check_psi_ontic(&ext, &labels, 0.0);
    let epistemic = matches!(psi, PsiClassification::Epistemic { .. });
    let story = json!([
        { "step": "the extension reproduces the Price behavior", "holds": reproduces },
        { "step": "it is an ontological model with local causality", "holds": all },
        { "step": "its own time reverse is reached by the identity relabeling", "holds": identity },
        { "step": "distinct preparations share an ontic state", "holds": epistemic },
    ]);
    print_json(&json!({
        "extension": to_value(&extension_to_document(&ext, Some(labels.clone()))),
        "marginal": marginal.to_csv_string(),
        "checks": checks,
        "reverse": to_value(&reverse),
        "story": story,
        "result": pass_fail(reproduces && all && identity && epistemic),
    }));
    if reproduces && all && identity && epistemic {
        Ok(())
    } else {
        Err(Failure::check("toy model does not tell the expected story"))
    }
}

pub fn price_demo(source: Option<&str>, _tol: &ToleranceConfig) -> Result<(), Failure> {
    let report = match source {
        None => price_contradiction_demo::<BigRational>(None, 0.0)?,
        Some(s) => {
            let (ext, labels) = load_extension(s)?;
            let labels = labels.unwrap_or_else(|| distinct_state_labels(ext.scenario()));
            price_contradiction_demo(Some((&ext, labels.as_slice())), 0.0)?
        }
    };
    print_json(&to_value(&report));
    if report.applicable && !report.contradiction {
        Err(Failure::check("psi-ontic extension but no contradiction derived"))
    } else {
        Ok(())
    }
}

pub fn cr_family(n_max: usize, tol: &ToleranceConfig) -> Result<(), Failure> {
    let rows = cr_family_report(n_max, tol)?;
    emit(&cr_rows_to_csv(&rows));
    let bad: Vec<usize> = rows
        .iter()
        .filter(|r| {
            let want = if r.n == 1 {
                Verdict::Feasible
            } else {
                Verdict::Infeasible
            };
            r.verdict != want || r.marginal_deviation > tol.prob || r.overlap_deviation > tol.prob
        })
        .map(|r| r.n)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(format!("unexpected rows for N = {bad:?}")))
    }
}

pub fn paper_suite(tol: &ToleranceConfig) -> Result<(), Failure> {
    let mut failed = 0;
    for (name, file, text) in bundled::DOCUMENTS {
        let fresh = bundled::regenerate(name).expect("every bundled document has a constructor");
        let loads = if file.ends_with(".ontic.json") {
            extension_from_json(text, 0.0).is_ok()
        } else {
            experiment_from_json::<f64>(text, tol).is_ok()
        };
        let ok = loads && fresh == *text;
        failed += usize::from(!ok);
        emit(&format!("document {file} {}\n", pass_fail(ok)));
    }
    for c in run_suite(&SuiteConfig::default()) {
        failed += usize::from(!c.passed);
        emit(&format!(
            "criterion {} {} {}: {}\n",
            c.id,
            pass_fail(c.passed),
            c.name,
            c.detail
        ));
    }
    if failed == 0 {
        emit("all checks passed\n");
        Ok(())
    } else {
        emit(&format!("{failed} check(s) failed\n"));
        Err(Failure::check(format!("{failed} check(s) failed")))
    }
}
