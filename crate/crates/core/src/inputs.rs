//! Inputs documents:
//!
//! ```toml
//! [classical]
//! x1 = 1
//!
//! [quantum]
//! A = [0.6, [0.0, 0.8]]   # amplitudes over A's input qubits, ascending id
//! # joint = [...]         # or one vector over every input qubit
//! ```
//!
//! Amplitudes are reals or `[re, im]` pairs and are normalized on load.
//! Missing classical inputs default to 0 and missing agents to `|0...0>`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Deserialize;
use thiserror::Error;

use crate::calculus::Env;
use crate::netmodel::Network;
use crate::qnum::{tensor, QRegisterState, QnumError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputsError {
    #[error("inputs document: {0}")]
    Syntax(String),
    #[error("unknown classical input {0}")]
    UnknownName(String),
    #[error("classical input {name} must be 0 or 1, found {value}")]
    NotABit { name: String, value: i64 },
    #[error("no agent named {0}")]
    UnknownAgent(String),
    #[error("{who} needs {expected} amplitudes, found {found}")]
    WrongLength { who: String, expected: usize, found: usize },
    #[error("amplitudes for {0} are all zero")]
    ZeroVector(String),
    #[error("give either a joint state or per-agent states, not both")]
    JointAndLocal,
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Amp {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    #[serde(default)]
    classical: BTreeMap<String, i64>,
    #[serde(default)]
    quantum: BTreeMap<String, Vec<Amp>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub classical: Env,
    pub quantum: QRegisterState,
}

fn vector(who: &str, amps: &[Amp], qubits: usize) -> Result<DVector<C64>, InputsError> {
    let expected = 1usize << qubits;
    if amps.len() != expected {
        return Err(InputsError::WrongLength {
            who: who.to_string(),
            expected,
            found: amps.len(),
        });
    }
    let v = DVector::from_iterator(
        expected,
        amps.iter().map(|a| match *a {
            Amp::Real(x) => C64::new(x, 0.0),
            Amp::Complex([re, im]) => C64::new(re, im),
        }),
    );
    let norm = v.norm();
    if norm == 0.0 {
        return Err(InputsError::ZeroVector(who.to_string()));
    }
    Ok(v / C64::new(norm, 0.0))
}

/// Classical and quantum inputs of `n` from an optional document.
pub fn load_inputs(n: &Network, text: Option<&str>) -> Result<Inputs, InputsError> {
    let doc: Doc = match text {
        Some(t) => toml::from_str(t).map_err(|e| InputsError::Syntax(e.to_string()))?,
        None => Doc::default(),
    };
    let names = n.cin_names();
    let mut classical: Env = names.iter().map(|x| (x.clone(), 0)).collect();
    for (name, &value) in &doc.classical {
        if !names.contains(name) {
            return Err(InputsError::UnknownName(name.clone()));
        }
        if value != 0 && value != 1 {
            return Err(InputsError::NotABit {
                name: name.clone(),
                value,
            });
        }
        classical.insert(name.clone(), value as u8);
    }

    let mut quantum = doc.quantum;
    let inputs = n.input_ids();
    let state = if let Some(joint) = quantum.remove("joint") {
        if !quantum.is_empty() {
            return Err(InputsError::JointAndLocal);
        }
        QRegisterState::pure(inputs.clone(), vector("joint", &joint, inputs.len())?)?
    } else {
        if let Some(name) = quantum.keys().find(|k| n.agent_index(k).is_none()) {
            return Err(InputsError::UnknownAgent(name.clone()));
        }
        let mut acc = QRegisterState::scalar();
        for (i, a) in n.agents.iter().enumerate() {
            let local = n.local_inputs(i);
            let part = match quantum.get(&a.name) {
                Some(amps) => QRegisterState::pure(local.clone(), vector(&a.name, amps, local.len())?)?,
                None => QRegisterState::basis(local, 0)?,
            };
            acc = tensor(&acc, &part)?;
        }
        acc
    };
    Ok(Inputs {
        classical,
        quantum: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::qnum::qids;

    #[test]
    fn defaults() {
        let n = library::superdense();
        let i = load_inputs(&n, None).unwrap();
        assert_eq!(i.classical["x1"], 0);
        assert_eq!(i.quantum.num_qubits(), 0);
    }

    #[test]
    fn per_agent_and_joint() {
        let n = library::teleport();
        let i = load_inputs(&n, Some("[quantum]\nA = [0.6, [0.0, 0.8]]\n")).unwrap();
        let amps = i.quantum.amplitudes().unwrap();
        assert!((amps[1] - C64::new(0.0, 0.8)).norm() < 1e-12);
        assert_eq!(i.quantum.ids(), qids(&[1]).as_slice());
        let j = load_inputs(&n, Some("[quantum]\njoint = [1, 1]\n")).unwrap();
        assert!((j.quantum.amplitudes().unwrap()[0].re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let n = library::superdense();
        assert!(matches!(
            load_inputs(&n, Some("[classical]\nx9 = 1")),
            Err(InputsError::UnknownName(_))
        ));
        assert!(matches!(
            load_inputs(&n, Some("[classical]\nx1 = 2")),
            Err(InputsError::NotABit { .. })
        ));
        assert!(matches!(
            load_inputs(&n, Some("[quantum]\nQ = []")),
            Err(InputsError::UnknownAgent(_))
        ));
        assert!(matches!(
            load_inputs(&n, Some("nonsense =")),
            Err(InputsError::Syntax(_))
        ));
        let tp = library::teleport();
        assert!(matches!(
            load_inputs(&tp, Some("[quantum]\nA = [1, 0, 0]")),
            Err(InputsError::WrongLength {
                expected: 2,
                found: 3,
                ..
            })
        ));
    }
}
