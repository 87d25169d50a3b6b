use std::collections::BTreeMap;

use super::denotational::{extract, Extraction};
use super::{assignments, ensure_valid, Result};
use crate::calculus::Env;
use crate::netmodel::Network;
use crate::qnum::{choi, frob_dist, C64};
use nalgebra::DMatrix;

/// Why two networks are not equivalent.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// The networks' interfaces differ; `agent` is the first position that disagrees.
    TypeMismatch {
        agent: Option<usize>,
        detail: String,
    },
    ExternalOutputs {
        cin: Env,
        first: Env,
        second: Env,
    },
    /// Some signal output occurs with nonzero weight in only one network.
    Classes {
        cin: Env,
        outputs: Env,
        distance: f64,
    },
    Distance {
        cin: Env,
        outputs: Env,
        distance: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub equivalent: bool,
    /// Largest Choi distance seen over all inputs and classes.
    pub max_distance: f64,
    pub witness: Option<Witness>,
}

/// Per agent: (classical inputs, outputs, local qubit inputs, final qubit count).
fn interface(n: &Network, x: &Extraction) -> Vec<(usize, usize, usize, usize, Vec<bool>)> {
    n.agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.cin.len(),
                a.cout.len(),
                n.local_inputs(i).len(),
                x.final_sorts[i].len(),
                a.cout.iter().map(|y| x.tainted.contains(y)).collect(),
            )
        })
        .collect()
}

fn type_witness(n1: &Network, x1: &Extraction, n2: &Network, x2: &Extraction) -> Option<Witness> {
    if n1.agents.len() != n2.agents.len() {
        return Some(Witness::TypeMismatch {
            agent: None,
            detail: format!("{} agents against {}", n1.agents.len(), n2.agents.len()),
        });
    }
    let (t1, t2) = (interface(n1, x1), interface(n2, x2));
    let labels = ["classical inputs", "classical outputs", "qubit inputs", "final qubits"];
    for (i, (a, b)) in t1.iter().zip(&t2).enumerate() {
        let pairs = [(a.0, b.0), (a.1, b.1), (a.2, b.2), (a.3, b.3)];
        if let Some(k) = pairs.iter().position(|(u, v)| u != v) {
            return Some(Witness::TypeMismatch {
                agent: Some(i),
                detail: format!(
                    "{} of {} and {}: {} against {}",
                    labels[k], n1.agents[i].name, n2.agents[i].name, pairs[k].0, pairs[k].1
                ),
            });
        }
        if a.4 != b.4 {
            return Some(Witness::TypeMismatch {
                agent: Some(i),
                detail: format!(
                    "outputs of {} and {} differ in which carry measurement outcomes",
                    n1.agents[i].name, n2.agents[i].name
                ),
            });
        }
    }
    None
}

/// Output names of `n` in agent then declaration order.
fn cout_names(n: &Network) -> Vec<String> {
    n.agents.iter().flat_map(|a| a.cout.iter().cloned()).collect()
}

/// Rename the keys of `env` from `from` to the same positions in `to`.
fn rename(env: &Env, from: &[String], to: &[String]) -> Env {
    env.iter()
        .filter_map(|(k, v)| {
            let i = from.iter().position(|x| x == k)?;
            Some((to.get(i)?.clone(), *v))
        })
        .collect()
}

fn class_choi(x: &Extraction) -> Result<BTreeMap<Env, DMatrix<C64>>> {
    x.entry
        .classes
        .iter()
        .map(|c| Ok((c.outputs.clone(), choi(&c.kraus())?)))
        .collect()
}

/// Positional equivalence: agents, qubits (ascending within each agent) and
/// classical names correspond by position.
pub fn equivalent(n1: &Network, n2: &Network, tol: f64) -> Result<Verdict> {
    ensure_valid(n1)?;
    ensure_valid(n2)?;
    let (in1, in2) = (n1.cin_names(), n2.cin_names());
    let (out1, out2) = (cout_names(n1), cout_names(n2));
    let mut max_distance: f64 = 0.0;
    let fail = |max_distance, w| {
        Ok(Verdict {
            equivalent: false,
            max_distance,
            witness: Some(w),
        })
    };
    let zeros = |names: &[String]| -> Env { names.iter().map(|x| (x.clone(), 0)).collect() };
    if let Some(w) = type_witness(n1, &extract(n1, &zeros(&in1))?, n2, &extract(n2, &zeros(&in2))?) {
        return fail(max_distance, w);
    }
    if in1.len() != in2.len() || out1.len() != out2.len() {
        let detail = format!(
            "{}/{} classical inputs/outputs against {}/{}",
            in1.len(),
            out1.len(),
            in2.len(),
            out2.len()
        );
        return fail(max_distance, Witness::TypeMismatch { agent: None, detail });
    }
    for cin in assignments(&in1) {
        let x1 = extract(n1, &cin)?;
        let cin2 = rename(&cin, &in1, &in2);
        let x2 = extract(n2, &cin2)?;
        let external2 = rename(&x2.entry.external, &out2, &out1);
        if x1.entry.external != external2 {
            return fail(
                max_distance,
                Witness::ExternalOutputs {
                    cin,
                    first: x1.entry.external.clone(),
                    second: x2.entry.external.clone(),
                },
            );
        }
        let c1 = class_choi(&x1)?;
        let c2: BTreeMap<Env, DMatrix<C64>> = class_choi(&x2)?
            .into_iter()
            .map(|(o, m)| (rename(&o, &out2, &out1), m))
            .collect();
        let mut keys: Vec<&Env> = c1.keys().chain(c2.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let (a, b) = (c1.get(key), c2.get(key));
            let shape = a.or(b).map(|m| m.shape()).expect("key from one side");
            let zero = DMatrix::zeros(shape.0, shape.1);
            let d = frob_dist(a.unwrap_or(&zero), b.unwrap_or(&zero))?;
            max_distance = max_distance.max(d);
            if d > tol {
                let (cin, outputs) = (cin.clone(), key.clone());
                let w = if a.is_some() && b.is_some() {
                    Witness::Distance {
                        cin,
                        outputs,
                        distance: d,
                    }
                } else {
                    Witness::Classes {
                        cin,
                        outputs,
                        distance: d,
                    }
                };
                return fail(max_distance, w);
            }
        }
    }
    Ok(Verdict {
        equivalent: true,
        max_distance,
        witness: None,
    })
}
