use super::{eval_signal, resolved_angle, signal_name, validate_pattern, CalculusError, Command, Env, Pattern, Result};
use crate::qnum::{embed_apply, gates, tensor, LinOp, QRegisterState, QnumError, PRUNE_TOL};

/// One outcome branch of a pattern run on a concrete state.
#[derive(Debug, Clone)]
pub struct ExecBranch {
    pub state: QRegisterState,
    pub prob: f64,
    /// Exactly the signals of the qubits measured by the pattern.
    pub bindings: Env,
}

/// Run `p` on `state`, returning every surviving branch with its
/// unnormalized state and the signals it produced.
pub fn exec_pattern_raw(state: &QRegisterState, p: &Pattern, env: &Env) -> Result<Vec<(QRegisterState, Env)>> {
    let violations = validate_pattern(p);
    if !violations.is_empty() {
        return Err(CalculusError::InvalidPattern(violations));
    }
    for q in &p.inputs {
        if !state.ids().contains(q) {
            return Err(QnumError::UnknownQubit(*q).into());
        }
    }
    let aux = p.auxiliary();
    let start = if aux.is_empty() {
        state.clone()
    } else {
        tensor(state, &QRegisterState::plus(aux)?)?
    };
    let floor = PRUNE_TOL * state.weight();

    let mut branches: Vec<(QRegisterState, Env)> = vec![(start, Env::new())];
    for cmd in &p.commands {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (s, signals) in branches {
            let lookup = |e| {
                let mut scope = env.clone();
                scope.extend(signals.iter().map(|(k, v)| (k.clone(), *v)));
                eval_signal(e, &scope)
            };
            match cmd {
                Command::Nil => next.push((s, signals)),
                Command::Entangle(a, b) => {
                    let op = LinOp::new(vec![*a, *b], vec![*a, *b], gates::cz())?;
                    next.push((embed_apply(&op, &s)?, signals));
                }
                Command::CorrectX { qubit, dep } | Command::CorrectZ { qubit, dep } => {
                    if lookup(dep)? == 1 {
                        let m = if matches!(cmd, Command::CorrectX { .. }) {
                            gates::pauli_x()
                        } else {
                            gates::pauli_z()
                        };
                        let op = LinOp::new(vec![*qubit], vec![*qubit], m)?;
                        next.push((embed_apply(&op, &s)?, signals));
                    } else {
                        next.push((s, signals));
                    }
                }
                Command::Measure {
                    qubit,
                    angle,
                    s_dep,
                    t_dep,
                } => {
                    let alpha = resolved_angle(*angle, lookup(s_dep)?, lookup(t_dep)?);
                    for outcome in 0..2u8 {
                        let bra = LinOp::new(vec![*qubit], vec![], gates::equatorial_bra(alpha, outcome))?;
                        let projected = embed_apply(&bra, &s)?;
                        if projected.weight() < floor {
                            continue;
                        }
                        let mut sig = signals.clone();
                        sig.insert(signal_name(*qubit), outcome);
                        next.push((projected, sig));
                    }
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

/// Big-step pattern execution: one entry per signal assignment with its
/// probability and renormalized state.
pub fn exec_pattern(state: &QRegisterState, p: &Pattern, env: &Env) -> Result<Vec<ExecBranch>> {
    let total = state.weight();
    let raw = exec_pattern_raw(state, p, env)?;
    Ok(raw
        .into_iter()
        .filter_map(|(s, bindings)| {
            let w = s.weight();
            let prob = if total > 0.0 { w / total } else { 0.0 };
            s.normalized().map(|state| ExecBranch { state, prob, bindings })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::SignalExpr;
    use crate::qnum::{c, qids, QubitId, C64};
    use nalgebra::DVector;

    fn hadamard_pattern() -> Pattern {
        Pattern::new(
            qids(&[1, 4]),
            qids(&[1]),
            qids(&[4]),
            vec![
                Command::entangle(1, 4),
                Command::measure(1, 0.0),
                Command::x(4, SignalExpr::name("s1")),
            ],
        )
    }

    #[test]
    fn hadamard_pattern_on_zero() {
        // |0>|+> -CZ-> |0>|+>; <±|_1 gives (1/√2)|+> either way, X|+> = |+>
        let zero = QRegisterState::basis(qids(&[1]), 0).unwrap();
        let branches = exec_pattern(&zero, &hadamard_pattern(), &Env::new()).unwrap();
        assert_eq!(branches.len(), 2);
        let plus = QRegisterState::plus(qids(&[4])).unwrap();
        for b in &branches {
            assert!((b.prob - 0.5).abs() < 1e-12);
            assert_eq!(b.state.ids(), qids(&[4]).as_slice());
            assert!(b.state.density_distance(&plus).unwrap() < 1e-12);
            assert_eq!(b.bindings.len(), 1);
        }
    }

    #[test]
    fn identity_pattern_single_branch() {
        let psi = QRegisterState::pure(qids(&[7]), DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let branches = exec_pattern(&psi, &Pattern::identity(qids(&[7])), &Env::new()).unwrap();
        assert_eq!(branches.len(), 1);
        assert!((branches[0].prob - 1.0).abs() < 1e-15);
        assert_eq!(branches[0].state, psi);
        assert!(branches[0].bindings.is_empty());
    }

    #[test]
    fn bell_measurement_on_teleport_resource() {
        let a = c(0.6, 0.0);
        let b = c(0.0, 0.8);
        let psi = QRegisterState::pure(qids(&[1]), DVector::from_vec(vec![a, b])).unwrap();
        let resource = QRegisterState::pure(
            qids(&[2, 3]),
            DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]),
        )
        .unwrap();
        let start = tensor(&psi, &resource).unwrap();
        // M2 M1 E12 in application order: E12, M1, M2
        let p = Pattern::new(
            qids(&[1, 2]),
            qids(&[1, 2]),
            vec![],
            vec![
                Command::entangle(1, 2),
                Command::measure(1, 0.0),
                Command::measure(2, 0.0),
            ],
        );
        let branches = exec_pattern(&start, &p, &Env::new()).unwrap();
        assert_eq!(branches.len(), 4);
        for br in &branches {
            assert!((br.prob - 0.25).abs() < 1e-12);
            let j1 = br.bindings["s1"];
            let j2 = br.bindings["s2"];
            // X^{j2} Z^{j1} |ψ>
            let mut v: Vec<C64> = vec![a, b];
            if j1 == 1 {
                v[1] = -v[1];
            }
            if j2 == 1 {
                v.swap(0, 1);
            }
            let expected = QRegisterState::pure(qids(&[3]), DVector::from_vec(v)).unwrap();
            assert!(br.state.density_distance(&expected).unwrap() < 1e-12, "branch {j1}{j2}");
        }
    }

    #[test]
    fn invalid_pattern_rejected() {
        let p = Pattern::new(qids(&[1]), qids(&[1]), vec![], vec![Command::entangle(1, 1)]);
        let s = QRegisterState::plus(qids(&[1])).unwrap();
        assert!(matches!(
            exec_pattern(&s, &p, &Env::new()),
            Err(CalculusError::InvalidPattern(_))
        ));
    }

    #[test]
    fn missing_input_is_unknown_qubit() {
        let s = QRegisterState::plus(qids(&[2])).unwrap();
        assert_eq!(
            exec_pattern(&s, &hadamard_pattern(), &Env::new()).unwrap_err(),
            CalculusError::Qnum(QnumError::UnknownQubit(QubitId(1)))
        );
    }

    #[test]
    fn unbound_dependency_reported() {
        let p = Pattern::new(
            qids(&[1]),
            qids(&[1]),
            qids(&[1]),
            vec![Command::x(1, SignalExpr::name("x3"))],
        );
        let s = QRegisterState::plus(qids(&[1])).unwrap();
        assert_eq!(
            exec_pattern(&s, &p, &Env::new()).unwrap_err(),
            CalculusError::UnboundName("x3".into())
        );
    }
}
