//! JSON reports with stable key order and fixed-precision numbers.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::calculus::Env;
use crate::dsl::ParseDiagnostic;
use crate::netmodel::Network;
use crate::qnum::{QRegisterState, QubitId, C64};
use crate::semantics::{
    ComposeCheck, ComposeMode, ContextCheck, CorrespondenceCheck, Denotation, FinalClass, Pts, RuleInstance,
    ScheduleCheck, Verdict, Witness,
};

/// Digits after the decimal point in every reported real.
pub const DECIMALS: usize = 12;

/// `x` as a JSON number written with [`DECIMALS`] decimals.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let mut s = format!("{x:.DECIMALS$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s.remove(0);
    }
    serde_json::from_str(&s).expect("formatted float is valid JSON")
}

fn complex(z: &C64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn matrix(m: &DMatrix<C64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| complex(&m[(r, c)])).collect()))
            .collect(),
    )
}

fn ids(q: impl IntoIterator<Item = QubitId>) -> Value {
    Value::Array(q.into_iter().map(|q| json!(q.0)).collect())
}

fn env(e: &Env) -> Value {
    Value::Object(e.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
}

fn state(s: &QRegisterState) -> Value {
    json!({
        "qubits": ids(s.ids().iter().copied()),
        "density": matrix(&s.density()),
    })
}

/// `local A`, `classical A->B`, `quantum A->B`.
pub fn describe_rule(n: &Network, r: &RuleInstance) -> String {
    let name = |i: usize| n.agents.get(i).map_or_else(|| i.to_string(), |a| a.name.clone());
    match *r {
        RuleInstance::Local { agent } => format!("local {}", name(agent)),
        RuleInstance::Classical { sender, receiver } => format!("classical {}->{}", name(sender), name(receiver)),
        RuleInstance::Quantum { sender, receiver } => format!("quantum {}->{}", name(sender), name(receiver)),
    }
}

fn per_agent<T>(n: &Network, items: &[T], f: impl Fn(&T) -> Value) -> Value {
    Value::Object(
        n.agents
            .iter()
            .zip(items)
            .map(|(a, x)| (a.name.clone(), f(x)))
            .collect(),
    )
}

fn class(n: &Network, c: &FinalClass) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("sorts".into(), per_agent(n, &c.sorts, |s| ids(s.iter().copied())));
    m.insert("outputs".into(), per_agent(n, &c.couts, env));
    m.insert("state".into(), state(&c.qfinal));
    m
}

/// The transition system; with `paths`, every path is listed instead of
/// the merged classes.
pub fn pts_report(n: &Network, pts: &Pts, paths: bool) -> Value {
    let mut out = json!({
        "kind": "operational",
        "network": n.name,
        "classical_inputs": env(&pts.cin),
        "schedule": pts.schedule.iter().map(|r| describe_rule(n, r)).collect::<Vec<_>>(),
        "total_probability": num(pts.total_prob()),
    });
    if paths {
        let list: Vec<Value> = pts
            .paths
            .iter()
            .map(|p| {
                let mut m = class(n, &FinalClass::of(n, &p.final_config));
                m.insert("probability".into(), num(p.prob));
                let steps = p
                    .steps
                    .iter()
                    .map(|s| json!({"rule": describe_rule(n, &s.rule), "bindings": env(&s.bindings), "lambda": num(s.lambda)}));
                m.insert("steps".into(), Value::Array(steps.collect()));
                Value::Object(m)
            })
            .collect();
        out["paths"] = Value::Array(list);
    } else {
        let list: Vec<Value> = pts
            .transitions
            .iter()
            .map(|t| {
                let mut m = class(n, &t.class);
                m.insert("probability".into(), num(t.prob));
                Value::Object(m)
            })
            .collect();
        out["transitions"] = Value::Array(list);
    }
    out
}

pub fn denotation_report(n: &Network, d: &Denotation) -> Value {
    let agents: Vec<Value> = d
        .agents
        .iter()
        .map(|a| {
            json!({
                "name": a.name,
                "initial_sort": ids(a.initial_sort.iter().copied()),
                "final_sort": ids(a.final_sort.iter().copied()),
                "qubit_inputs": ids(a.inputs.iter().copied()),
                "classical_inputs": a.cin,
                "classical_outputs": a.cout,
                "signal_outputs": a.cout.iter().zip(&a.signal_outputs).filter(|(_, s)| **s).map(|(y, _)| y.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let table: Vec<Value> = d
        .table
        .iter()
        .map(|e| {
            let classes: Vec<Value> = e
                .classes
                .iter()
                .map(|c| {
                    let kraus: Vec<Value> = c
                        .elements
                        .iter()
                        .map(|k| json!({"signals": env(&k.signals), "component": k.component, "matrix": matrix(k.op.matrix())}))
                        .collect();
                    json!({
                        "signal_outputs": env(&c.outputs),
                        "trace_on_maximally_mixed": num(c.prob_maximally_mixed()),
                        "kraus": kraus,
                    })
                })
                .collect();
            let total = e.total();
            json!({
                "classical_inputs": env(&e.cin),
                "external_outputs": env(&e.external),
                "classes": classes,
                "completeness_error": num((total.completeness() - DMatrix::<C64>::identity(1 << total.in_ids().len(), 1 << total.in_ids().len())).norm()),
            })
        })
        .collect();
    json!({
        "kind": "denotational",
        "network": n.name,
        "agents": agents,
        "input_qubits": ids(d.input_ids.iter().copied()),
        "output_qubits": ids(d.output_ids.iter().copied()),
        "table": table,
    })
}

fn witness(w: &Witness) -> Value {
    match w {
        Witness::TypeMismatch { agent, detail } => json!({"kind": "type", "agent": agent, "detail": detail}),
        Witness::ExternalOutputs { cin, first, second } => json!({
            "kind": "external_outputs", "classical_inputs": env(cin), "first": env(first), "second": env(second),
        }),
        Witness::Classes { cin, outputs, distance } => json!({
            "kind": "classes", "classical_inputs": env(cin), "signal_outputs": env(outputs), "choi_distance": num(*distance),
        }),
        Witness::Distance { cin, outputs, distance } => json!({
            "kind": "distance", "classical_inputs": env(cin), "signal_outputs": env(outputs), "choi_distance": num(*distance),
        }),
    }
}

pub fn verdict_report(n1: &Network, n2: &Network, v: &Verdict, tol: f64) -> Value {
    json!({
        "kind": "equivalence",
        "first": n1.name,
        "second": n2.name,
        "equivalent": v.equivalent,
        "max_choi_distance": num(v.max_distance),
        "tolerance": tol,
        "witness": v.witness.as_ref().map(witness),
    })
}

pub fn schedules_report(n: &Network, cin: &Env, c: &ScheduleCheck) -> Value {
    json!({
        "kind": "schedules",
        "network": n.name,
        "classical_inputs": env(cin),
        "passed": c.passed,
        "schedules": c.schedules,
        "truncated": c.truncated,
        "max_distance": num(c.max_distance),
        "max_probability_error": num(c.max_prob_error),
        "counterexample": c.counterexample.as_ref().map(|(a, b)| json!([
            a.iter().map(|r| describe_rule(n, r)).collect::<Vec<_>>(),
            b.iter().map(|r| describe_rule(n, r)).collect::<Vec<_>>(),
        ])),
    })
}

pub fn context_report(n: &Network, c: &ContextCheck, seed: u64) -> Value {
    json!({
        "kind": "context",
        "network": n.name,
        "passed": c.passed,
        "extra_qubits": c.extra,
        "trials": c.trials,
        "seed": seed,
        "max_deviation": num(c.max_deviation),
    })
}

pub fn compose_report(n1: &Network, n2: &Network, c: &ComposeCheck) -> Value {
    json!({
        "kind": "compose",
        "mode": match c.mode { ComposeMode::Seq => "seq", ComposeMode::Par => "par" },
        "first": n1.name,
        "second": n2.name,
        "composite": c.composite.name,
        "passed": c.passed,
        "max_choi_distance": num(c.max_distance),
        "witness": c.witness.as_ref().map(|(cin, out)| json!({"classical_inputs": env(cin), "outputs": env(out)})),
    })
}

pub fn correspondence_report(n: &Network, cin: &Env, c: &CorrespondenceCheck) -> Value {
    json!({
        "kind": "correspondence",
        "network": n.name,
        "classical_inputs": env(cin),
        "passed": c.passed,
        "classes": c.classes,
        "max_probability_error": num(c.max_prob_error),
        "max_state_error": num(c.max_state_error),
    })
}

pub fn diagnostics_report(file: &str, diags: &[ParseDiagnostic]) -> Value {
    let list: Vec<Value> = diags
        .iter()
        .map(|d| {
            json!({
                "severity": if d.is_error() { "error" } else { "warning" },
                "code": d.code,
                "message": d.message,
                "line": d.span.line,
                "column_start": d.span.col_start,
                "column_end": d.span.col_end,
            })
        })
        .collect();
    json!({
        "kind": "validation",
        "file": file,
        "valid": !diags.iter().any(ParseDiagnostic::is_error),
        "diagnostics": list,
    })
}

/// Pretty text with sorted keys.
pub fn render_report(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report values serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::qnum::{qids, QRegisterState};
    use crate::semantics::{denotational, operational};

    #[test]
    fn twelve_decimals() {
        assert_eq!(num(1.0).to_string(), "1.000000000000");
        assert_eq!(num(-1e-15).to_string(), "0.000000000000");
        assert_eq!(num(0.25).to_string(), "0.250000000000");
    }

    #[test]
    fn teleport_report() {
        let n = library::teleport();
        let pts = operational(&n, &Env::new(), &QRegisterState::basis(qids(&[1]), 1).unwrap()).unwrap();
        let text = render_report(&pts_report(&n, &pts, false));
        assert!(text.contains("\"probability\": 1.000000000000"), "{text}");
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["transitions"].as_array().unwrap().len(), 1);
        let paths = pts_report(&n, &pts, true);
        assert_eq!(paths["paths"].as_array().unwrap().len(), 4);
        assert_eq!(text, render_report(&pts_report(&n, &pts, false)));
    }

    #[test]
    fn bitflip_half_half() {
        let n = library::bitflip(std::f64::consts::FRAC_PI_2);
        let d = denotation_report(&n, &denotational(&n).unwrap());
        let classes = d["table"][0]["classes"].as_array().unwrap();
        assert_eq!(classes.len(), 2);
        for c in classes {
            assert_eq!(c["trace_on_maximally_mixed"].to_string(), "0.500000000000");
        }
    }

    #[test]
    fn empty_transitions_are_valid() {
        let n = Network::empty("E");
        let pts = operational(&n, &Env::new(), &QRegisterState::scalar()).unwrap();
        let mut empty = pts.clone();
        empty.transitions.clear();
        let v: Value = serde_json::from_str(&render_report(&pts_report(&n, &empty, false))).unwrap();
        assert_eq!(v["transitions"], json!([]));
    }
}
