use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::denotational::{extract, Extraction};
use super::operational::run_sequence;
use super::{assignments, ensure_valid, Result, RuleInstance, Schedule};
use crate::calculus::Env;
use crate::netmodel::{enabled_at, finished, net_par_compose, net_seq_compose, Event, Network};
use crate::qnum::{choi, frob_dist, random_density, KrausSet, LinOp, QRegisterState, QubitId, EQ_TOL};

/// Enumeration stops after this many interleavings.
pub const MAX_SCHEDULES: usize = 10_000;

/// Every maximal interleaving of `n`, and whether the cap cut the list short.
pub fn enumerate_schedules(n: &Network) -> (Vec<Vec<RuleInstance>>, bool) {
    fn walk(
        n: &Network,
        pcs: &mut Vec<usize>,
        prefix: &mut Vec<RuleInstance>,
        out: &mut Vec<Vec<RuleInstance>>,
    ) -> bool {
        if out.len() >= MAX_SCHEDULES {
            return true;
        }
        let enabled = enabled_at(n, pcs);
        if enabled.is_empty() {
            if finished(n, pcs) {
                out.push(prefix.clone());
            }
            return false;
        }
        for r in enabled {
            let saved = pcs.clone();
            r.advance(pcs);
            prefix.push(r);
            let cut = walk(n, pcs, prefix, out);
            prefix.pop();
            *pcs = saved;
            if cut {
                return true;
            }
        }
        false
    }
    let mut out = Vec::new();
    let truncated = walk(n, &mut vec![0; n.agents.len()], &mut Vec::new(), &mut out);
    (out, truncated)
}

#[derive(Debug, Clone)]
pub struct ScheduleCheck {
    pub passed: bool,
    pub schedules: usize,
    /// The interleaving cap was hit; only the first schedules were compared.
    pub truncated: bool,
    pub max_distance: f64,
    /// Largest `|Σ prob − 1|` over schedules.
    pub max_prob_error: f64,
    pub counterexample: Option<(Vec<RuleInstance>, Vec<RuleInstance>)>,
}

/// Run every interleaving and compare each PTS with the first.
pub fn check_schedules(n: &Network, cin: &Env, qin: &QRegisterState) -> Result<ScheduleCheck> {
    ensure_valid(n)?;
    let (all, truncated) = enumerate_schedules(n);
    let mut reference = None;
    let mut check = ScheduleCheck {
        passed: true,
        schedules: all.len(),
        truncated,
        max_distance: 0.0,
        max_prob_error: 0.0,
        counterexample: None,
    };
    for seq in &all {
        let pts = run_sequence(n, cin, qin, seq, false)?;
        check.max_prob_error = check.max_prob_error.max((pts.total_prob() - 1.0).abs());
        match &reference {
            None => reference = Some(pts),
            Some(first) => {
                let d = first.distance(&pts);
                check.max_distance = check.max_distance.max(d);
                if d > EQ_TOL && check.counterexample.is_none() {
                    check.counterexample = Some((first.schedule.clone(), seq.clone()));
                }
            }
        }
    }
    check.passed = check.counterexample.is_none() && check.max_prob_error <= EQ_TOL;
    Ok(check)
}

#[derive(Debug, Clone)]
pub struct ContextCheck {
    pub passed: bool,
    pub trials: usize,
    /// Qubits in the context register.
    pub extra: usize,
    pub max_deviation: f64,
}

fn max_qubit(n: &Network) -> u32 {
    let events = n.agents.iter().flat_map(|a| a.events.iter());
    let from_events = events.flat_map(|e| match e {
        Event::Pattern(cmds) => cmds.iter().flat_map(|c| c.qubits()).collect(),
        Event::QSend { qubit, .. } => vec![*qubit],
        Event::QRecv { placeholder, .. } => vec![*placeholder],
        _ => vec![],
    });
    n.agents
        .iter()
        .flat_map(|a| a.sort.iter().copied())
        .chain(n.prep.ids())
        .chain(from_events)
        .map(|q| q.0)
        .max()
        .unwrap_or(0)
}

/// Feed random states entangled with an untouched register through `n` and
/// compare with the extracted operation tensored with the identity.
pub fn check_context(n: &Network, extra: usize, trials: usize, seed: u64) -> Result<ContextCheck> {
    ensure_valid(n)?;
    let seq = Schedule::RoundRobin.resolve(n)?;
    let base = max_qubit(n);
    let context: Vec<QubitId> = (1..=extra as u32).map(|k| QubitId(base + k)).collect();
    let ids: Vec<QubitId> = n.input_ids().into_iter().chain(context).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_deviation: f64 = 0.0;
    for cin in assignments(&n.cin_names()) {
        let total = extract(n, &cin)?.entry.total();
        for _ in 0..trials {
            let rho = random_density(ids.clone(), 2, &mut rng)?;
            let simulated = run_sequence(n, &cin, &rho, &seq, true)?.mixture()?;
            let formula = total.apply(&rho)?;
            max_deviation = max_deviation.max(simulated.density_distance(&formula)?);
        }
    }
    Ok(ContextCheck {
        passed: max_deviation <= EQ_TOL,
        trials,
        extra,
        max_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComposeMode {
    Seq,
    Par,
}

#[derive(Debug, Clone)]
pub struct ComposeCheck {
    pub passed: bool,
    pub mode: ComposeMode,
    pub composite: Network,
    pub max_distance: f64,
    /// First input and output values where the two sides disagree.
    pub witness: Option<(Env, Env)>,
}

/// Every classical output of an extraction class, signal or not.
fn all_outputs(x: &Extraction, class: &Env) -> Env {
    x.entry
        .external
        .iter()
        .chain(class)
        .map(|(k, v)| (k.clone(), *v))
        .collect()
}

fn restrict(env: &Env, names: &[String]) -> Env {
    names
        .iter()
        .filter_map(|x| env.get(x).map(|v| (x.clone(), *v)))
        .collect()
}

type Grouped = BTreeMap<Env, Vec<LinOp>>;

fn expected_par(n1: &Network, n2: &Network, cin: &Env) -> Result<Grouped> {
    let x1 = extract(n1, &restrict(cin, &n1.cin_names()))?;
    let x2 = extract(n2, &restrict(cin, &n2.cin_names()))?;
    let mut out = Grouped::new();
    for c1 in &x1.entry.classes {
        for c2 in &x2.entry.classes {
            let mut key = all_outputs(&x1, &c1.outputs);
            key.extend(all_outputs(&x2, &c2.outputs));
            let ops = out.entry(key).or_default();
            for a in &c1.elements {
                for b in &c2.elements {
                    ops.push(a.op.tensor(&b.op)?);
                }
            }
        }
    }
    Ok(out)
}

fn expected_seq(n1: &Network, n2: &Network, cin: &Env) -> Result<Grouped> {
    let x1 = extract(n1, &restrict(cin, &n1.cin_names()))?;
    let mut out = Grouped::new();
    for c1 in &x1.entry.classes {
        let first = all_outputs(&x1, &c1.outputs);
        let mut env2 = cin.clone();
        env2.extend(first.iter().map(|(k, v)| (k.clone(), *v)));
        let x2 = extract(n2, &restrict(&env2, &n2.cin_names()))?;
        for c2 in &x2.entry.classes {
            let mut key = first.clone();
            key.extend(all_outputs(&x2, &c2.outputs));
            let ops = out.entry(key).or_default();
            for a in &c1.elements {
                for b in &c2.elements {
                    ops.push(a.op.then(&b.op)?);
                }
            }
        }
    }
    Ok(out)
}

fn grouped_choi(ops: &[LinOp], inputs: &[QubitId], outputs: &[QubitId]) -> Result<nalgebra::DMatrix<crate::qnum::C64>> {
    let ops = ops
        .iter()
        .map(|op| op.reorder(inputs, outputs))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(choi(&KrausSet::new(ops)?)?)
}

/// Compare the composite network's operation with the composition of the
/// parts' operations, class by class.
pub fn check_compose(n1: &Network, n2: &Network, mode: ComposeMode, tol: f64) -> Result<ComposeCheck> {
    ensure_valid(n1)?;
    ensure_valid(n2)?;
    let composite = match mode {
        ComposeMode::Seq => net_seq_compose(n1, n2)?,
        ComposeMode::Par => net_par_compose(n1, n2)?,
    };
    ensure_valid(&composite)?;
    let mut max_distance: f64 = 0.0;
    let mut witness = None;
    for cin in assignments(&composite.cin_names()) {
        let x = extract(&composite, &cin)?;
        let mut actual = Grouped::new();
        for c in &x.entry.classes {
            let ops = actual.entry(all_outputs(&x, &c.outputs)).or_default();
            ops.extend(c.elements.iter().map(|e| e.op.clone()));
        }
        let expected = match mode {
            ComposeMode::Seq => expected_seq(n1, n2, &cin)?,
            ComposeMode::Par => expected_par(n1, n2, &cin)?,
        };
        let inputs = composite.input_ids();
        let mut keys: Vec<&Env> = actual.keys().chain(expected.keys()).collect();
        keys.sort();
        keys.dedup();
        for key in keys {
            let a = actual
                .get(key)
                .map(|ops| grouped_choi(ops, &inputs, &x.output_ids))
                .transpose()?;
            let b = expected
                .get(key)
                .map(|ops| grouped_choi(ops, &inputs, &x.output_ids))
                .transpose()?;
            let d = match (&a, &b) {
                (Some(a), Some(b)) => frob_dist(a, b)?,
                (Some(m), None) | (None, Some(m)) => m.norm(),
                (None, None) => 0.0,
            };
            max_distance = max_distance.max(d);
            if d > tol && witness.is_none() {
                witness = Some((cin.clone(), key.clone()));
            }
        }
    }
    Ok(ComposeCheck {
        passed: witness.is_none(),
        mode,
        composite,
        max_distance,
        witness,
    })
}

#[derive(Debug, Clone)]
pub struct CorrespondenceCheck {
    pub passed: bool,
    pub classes: usize,
    pub max_prob_error: f64,
    pub max_state_error: f64,
}

/// Compare the canonical PTS with the restricted operations applied to `qin`.
pub fn check_correspondence(n: &Network, cin: &Env, qin: &QRegisterState) -> Result<CorrespondenceCheck> {
    ensure_valid(n)?;
    let seq = Schedule::RoundRobin.resolve(n)?;
    let pts = run_sequence(n, cin, qin, &seq, false)?;
    let x = extract(n, cin)?;

    let mut observed: BTreeMap<Env, (f64, QRegisterState)> = BTreeMap::new();
    for t in &pts.transitions {
        let term = t.class.qfinal.scale_weight(t.prob);
        match observed.remove(&t.class.outputs()) {
            Some((p, s)) => observed.insert(t.class.outputs(), (p + t.prob, s.mix_with(&term)?)),
            None => observed.insert(t.class.outputs(), (t.prob, term)),
        };
    }

    let mut max_prob_error: f64 = 0.0;
    let mut max_state_error: f64 = 0.0;
    for class in &x.entry.classes {
        let key = all_outputs(&x, &class.outputs);
        let predicted = class.kraus().apply(qin)?;
        let p = predicted.weight();
        match observed.remove(&key) {
            Some((q, s)) => {
                max_prob_error = max_prob_error.max((p - q).abs());
                if let (Some(a), Some(b)) = (predicted.normalized(), s.normalized()) {
                    max_state_error = max_state_error.max(a.density_distance(&b)?);
                }
            }
            None => max_prob_error = max_prob_error.max(p),
        }
    }
    for (q, _) in observed.values() {
        max_prob_error = max_prob_error.max(*q);
    }
    Ok(CorrespondenceCheck {
        passed: max_prob_error <= EQ_TOL && max_state_error <= EQ_TOL,
        classes: x.entry.classes.len(),
        max_prob_error,
        max_state_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::qnum::qids;

    #[test]
    fn hadamard_pair_has_two_interleavings() {
        let n = library::hadamard_pair();
        let (all, truncated) = enumerate_schedules(&n);
        assert_eq!(all.len(), 2);
        assert!(!truncated);
        let qin = QRegisterState::basis(qids(&[1, 3]), 0).unwrap();
        let c = check_schedules(&n, &Env::new(), &qin).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn teleport_schedule_is_forced() {
        let (all, _) = enumerate_schedules(&library::teleport());
        assert_eq!(all.len(), 1);
    }

    #[test]
    fn teleport_keeps_context_entanglement() {
        let c = check_context(&library::teleport(), 1, 5, 7).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn teleport_then_back_composes() {
        let n2 = library::teleport_back();
        let c = check_compose(&library::teleport(), &n2, ComposeMode::Seq, EQ_TOL).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn hadamard_halves_compose_in_parallel() {
        let (a, b) = library::hadamard_halves();
        let c = check_compose(&a, &b, ComposeMode::Par, EQ_TOL).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn bitflip_correspondence() {
        let qin = QRegisterState::plus(qids(&[1])).unwrap();
        for n in [library::bitflip(1.1), library::bitflip_hidden(0.4)] {
            let c = check_correspondence(&n, &Env::new(), &qin).unwrap();
            assert!(c.passed, "{c:?}");
        }
    }
}
