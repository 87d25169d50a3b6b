//! One pass/fail line per acceptance criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use mbqnet::calculus::{Command, Env};
use mbqnet::gen::{random_network, random_par_pair, random_seq_pair, GenConfig};
use mbqnet::library;
use mbqnet::netmodel::{validate_network, Event, Network};
use mbqnet::qnum::{gates, partial_trace, qids, random_density, random_pure, QRegisterState, C64};
use mbqnet::semantics::{
    assignments, check_compose, check_context, check_correspondence, check_schedules, denotational, equivalent,
    operational, ComposeMode,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probabilities, fidelities, Choi and state distances.
const TOL: f64 = 1e-9;
const RANDOM_NETWORKS: u64 = 50;
const RANDOM_PAIRS: u64 = 25;
const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn teleportation() -> Outcome {
    let start = Instant::now();
    let n = library::teleport();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_fid: f64 = 1.0;
    let mut worst_prob: f64 = 0.0;
    for k in 0..20 {
        let psi = random_pure(qids(&[1]), &mut rng).map_err(|e| e.to_string())?;
        let pts = operational(&n, &Env::new(), &psi).map_err(|e| e.to_string())?;
        ensure(pts.transitions.len() == 1, || {
            format!("input {k}: {} classes", pts.transitions.len())
        })?;
        let t = &pts.transitions[0];
        ensure(t.class.sorts[1] == qids(&[3]).into_iter().collect(), || {
            format!("input {k}: B holds {:?}", t.class.sorts[1])
        })?;
        let expected = QRegisterState::pure(qids(&[3]), psi.amplitudes().unwrap()).unwrap();
        let fid = t
            .class
            .qfinal
            .fidelity_with_pure(&expected)
            .map_err(|e| e.to_string())?;
        worst_fid = worst_fid.min(fid);
        worst_prob = worst_prob.max((t.prob - 1.0).abs());
    }
    ensure(worst_prob <= TOL, || format!("probability off by {worst_prob:e}"))?;
    ensure(worst_fid >= 1.0 - TOL, || format!("fidelity {worst_fid}"))?;
    within(start.elapsed(), Duration::from_secs(1), "20 runs")?;
    Ok(format!(
        "20 inputs, min fidelity {worst_fid:.12}, {:?}",
        start.elapsed()
    ))
}

fn bisimilarity() -> Outcome {
    let start = Instant::now();
    let v = equivalent(&library::teleport(), &library::direct_channel(), TOL).map_err(|e| e.to_string())?;
    ensure(v.equivalent && v.max_distance < TOL, || format!("verdict {v:?}"))?;
    let mut broken = library::teleport();
    let Event::Pattern(cmds) = &mut broken.agents[1].events[1] else {
        return Err("teleport receiver lost its correction pattern".into());
    };
    cmds.retain(|c| !matches!(c, Command::CorrectZ { .. }));
    let w = equivalent(&broken, &library::direct_channel(), TOL).map_err(|e| e.to_string())?;
    ensure(!w.equivalent && w.witness.is_some(), || format!("mutant verdict {w:?}"))?;
    within(start.elapsed(), Duration::from_secs(1), "both checks")?;
    Ok(format!(
        "distance {:.1e}; without Z correction distance {:.3}, witness {:?}",
        v.max_distance,
        w.max_distance,
        w.witness.unwrap()
    ))
}

fn four_branches() -> Outcome {
    let n = library::teleport();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let psi = random_pure(qids(&[1]), &mut rng).map_err(|e| e.to_string())?;
    let pts = operational(&n, &Env::new(), &psi).map_err(|e| e.to_string())?;
    ensure(pts.paths.len() == 4, || format!("{} paths", pts.paths.len()))?;
    for p in &pts.paths {
        let lambda: f64 = p.steps.iter().map(|s| s.lambda).product();
        ensure((p.prob - 0.25).abs() <= TOL && (lambda - 0.25).abs() <= TOL, || {
            format!("path probability {} (step product {lambda})", p.prob)
        })?;
    }
    Ok("4 paths, each 0.25".into())
}

/// `<+_{-a}|+>` squared, from the amplitudes directly.
fn bitflip_oracle(alpha: f64) -> f64 {
    let amp = (C64::new(1.0, 0.0) + C64::from_polar(1.0, alpha)) / 2.0;
    amp.norm_sqr()
}

fn bitflip_channel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let x = gates::pauli_x();
    let mut notes = Vec::new();
    for alpha in [0.0, PI / 4.0, PI / 2.0, PI] {
        let p = bitflip_oracle(alpha);
        let d = denotational(&library::bitflip(alpha)).map_err(|e| e.to_string())?;
        let entry = &d.table[0];
        let rho = random_density(qids(&[1]), 2, &mut rng).unwrap();
        let flipped = QRegisterState::mixed(qids(&[1]), &x * rho.density() * &x).unwrap();
        let mut classes = 0;
        for (bit, weight, target) in [(0u8, p, &rho), (1, 1.0 - p, &flipped)] {
            let outputs: Env = [("s2".to_string(), bit)].into_iter().collect();
            match entry.class(&outputs) {
                Some(c) => {
                    classes += 1;
                    let got = c.kraus().apply(&rho).map_err(|e| e.to_string())?;
                    let want = target.scale_weight(weight);
                    let dist = got.density_distance(&want).unwrap();
                    ensure(dist <= TOL, || format!("alpha {alpha}: class {bit} off by {dist:e}"))?;
                    ensure((c.prob_maximally_mixed() - weight).abs() <= TOL, || {
                        format!("alpha {alpha}: class {bit} weight {}", c.prob_maximally_mixed())
                    })?;
                }
                None => ensure(weight <= TOL, || {
                    format!("alpha {alpha}: class {bit} missing, oracle {weight}")
                })?,
            }
        }
        if alpha == 0.0 {
            ensure(classes == 1, || format!("alpha 0 has {classes} classes"))?;
        }
        notes.push(format!("{alpha:.4}:{p:.3}/{classes}"));
    }
    Ok(format!("alpha:p/classes {}", notes.join(" ")))
}

fn random_networks() -> Vec<(Network, ChaCha8Rng)> {
    (0..RANDOM_NETWORKS)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + 100 + k);
            (random_network(&mut rng, GenConfig::default()), rng)
        })
        .collect()
}

fn schedule_independence() -> Outcome {
    let start = Instant::now();
    let mut cases: Vec<(Network, ChaCha8Rng)> = [library::hadamard_pair(), library::teleport(), library::superdense()]
        .into_iter()
        .map(|n| (n, ChaCha8Rng::seed_from_u64(SEED + 6)))
        .collect();
    cases.extend(random_networks());
    let mut runs = 0;
    let mut hh = 0;
    for (n, mut local) in cases {
        let qin = random_pure(n.input_ids(), &mut local).unwrap();
        for cin in assignments(&n.cin_names()) {
            let c = check_schedules(&n, &cin, &qin).map_err(|e| format!("{}: {e}", n.name))?;
            ensure(c.passed && !c.truncated, || format!("{} with {cin:?}: {c:?}", n.name))?;
            runs += c.schedules;
            if n.name == "HH" {
                hh = c.schedules;
            }
        }
    }
    ensure(hh == 2, || format!("hadamard_pair has {hh} interleavings"))?;
    within(start.elapsed(), Duration::from_secs(30), "schedule checks")?;
    Ok(format!(
        "3 library + {RANDOM_NETWORKS} random networks, {runs} schedules, {:?}",
        start.elapsed()
    ))
}

fn correspondence() -> Outcome {
    let mut classes = 0;
    let mut worst: f64 = 0.0;
    for (n, mut rng) in random_networks() {
        let qin = random_pure(n.input_ids(), &mut rng).unwrap();
        for cin in assignments(&n.cin_names()) {
            let c = check_correspondence(&n, &cin, &qin).map_err(|e| format!("{}: {e}", n.name))?;
            ensure(c.passed, || format!("{} with {cin:?}: {c:?}", n.name))?;
            classes += c.classes;
            worst = worst.max(c.max_prob_error).max(c.max_state_error);
        }
    }
    Ok(format!(
        "{RANDOM_NETWORKS} networks, {classes} classes, max error {worst:.1e}"
    ))
}

fn compositionality() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut check = |a: &Network, b: &Network, mode: ComposeMode| -> Result<(), String> {
        let c = check_compose(a, b, mode, TOL).map_err(|e| format!("{} {mode:?} {}: {e}", a.name, b.name))?;
        worst = worst.max(c.max_distance);
        ensure(c.passed && c.max_distance < TOL, || {
            format!("{} {mode:?} {}: {c:?}", a.name, b.name)
        })
    };
    check(&library::teleport(), &library::teleport_back(), ComposeMode::Seq)?;
    let (ha, hb) = library::hadamard_halves();
    check(&ha, &hb, ComposeMode::Par)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    for k in 0..RANDOM_PAIRS {
        let (a, b) = if k % 2 == 0 {
            random_seq_pair(&mut rng)
        } else {
            random_par_pair(&mut rng)
        };
        let mode = if k % 2 == 0 { ComposeMode::Seq } else { ComposeMode::Par };
        check(&a, &b, mode)?;
    }
    within(start.elapsed(), Duration::from_secs(60), "composition checks")?;
    Ok(format!(
        "2 library + {RANDOM_PAIRS} random pairs, max distance {worst:.1e}, {:?}",
        start.elapsed()
    ))
}

fn entanglement_context() -> Outcome {
    let c = check_context(&library::teleport(), 1, 20, SEED).map_err(|e| e.to_string())?;
    ensure(c.passed && c.max_deviation < TOL, || format!("{c:?}"))?;

    let n = library::double_teleport();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let psi = loop {
        let psi = random_pure(qids(&[1, 4]), &mut rng).unwrap();
        let reduced = partial_trace(&psi, &qids(&[1])).unwrap().density();
        let purity = (&reduced * &reduced).trace().re;
        if purity < 0.99 {
            break psi;
        }
    };
    let pts = operational(&n, &Env::new(), &psi).map_err(|e| e.to_string())?;
    let expected = QRegisterState::pure(qids(&[3, 6]), psi.amplitudes().unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for t in &pts.transitions {
        worst = worst.max(t.class.qfinal.density_distance(&expected).map_err(|e| e.to_string())?);
    }
    ensure(worst <= TOL && (pts.total_prob() - 1.0).abs() <= TOL, || {
        format!("double teleport off by {worst:e}")
    })?;
    Ok(format!(
        "context deviation {:.1e}; double teleport distance {worst:.1e}",
        c.max_deviation
    ))
}

fn kraus_completeness() -> Outcome {
    let mut entries = 0;
    for n in library::all() {
        let d = denotational(&n).map_err(|e| format!("{}: {e}", n.name))?;
        for e in &d.table {
            let total = e.total();
            let dim = 1usize << total.in_ids().len();
            let err = (total.completeness() - DMatrix::<C64>::identity(dim, dim)).norm();
            ensure(err <= TOL, || {
                format!("{} {:?}: completeness off by {err:e}", n.name, e.cin)
            })?;
            let mut seen: Vec<&Env> = Vec::new();
            let mut sum = DMatrix::<C64>::zeros(dim, dim);
            let mut count = 0;
            for c in &e.classes {
                ensure(!c.elements.is_empty() && !seen.contains(&&c.outputs), || {
                    format!("{}: class {:?} empty or repeated", n.name, c.outputs)
                })?;
                seen.push(&c.outputs);
                sum += c.kraus().completeness();
                count += c.elements.len();
            }
            ensure(
                count == total.len() && (sum - total.completeness()).norm() <= TOL,
                || format!("{}: classes do not partition the elements", n.name),
            )?;
            entries += 1;
        }
    }
    Ok(format!(
        "{} protocols, {entries} input assignments",
        library::all().len()
    ))
}

/// `# expect: CODE [LINE]` on the first line of a fixture.
fn expectation(text: &str) -> Option<(String, Option<usize>)> {
    let rest = text.lines().next()?.strip_prefix("# expect:")?;
    let mut parts = rest.split_whitespace();
    let code = parts.next()?.to_string();
    Some((code, parts.next().and_then(|l| l.parse().ok())))
}

fn validation() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bad");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "mbq"))
        .collect();
    files.sort();
    let mut rules = std::collections::BTreeSet::new();
    for path in &files {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let (code, line) = expectation(&text).ok_or_else(|| format!("{name}: no expect header"))?;
        let out = Process::new(env!("CARGO_BIN_EXE_mbqnet"))
            .arg("validate")
            .arg(path)
            .output()
            .map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&out.stderr);
        ensure(out.status.code() == Some(2), || {
            format!("{name}: exit {:?}", out.status.code())
        })?;
        let tag = format!("error[{code}]");
        let hit = stderr.lines().any(|l| {
            l.contains(&tag)
                && line.is_none_or(|ln| l.contains(&format!("{name}:{ln}:")) || l.contains(&format!("/{name}:{ln}:")))
        });
        ensure(hit, || {
            format!("{name}: expected {tag} at line {line:?}, got\n{stderr}")
        })?;
        rules.insert(code);
    }
    ensure(files.len() >= 8, || format!("only {} fixtures", files.len()))?;
    for r in ["H0", "H1", "H2", "H3"] {
        ensure(rules.contains(r), || format!("no fixture for {r}"))?;
    }
    for n in library::all() {
        let v = validate_network(&n);
        ensure(v.is_empty(), || format!("{} does not validate: {v:?}", n.name))?;
    }
    Ok(format!(
        "{} bad fixtures rejected, {} library protocols clean",
        files.len(),
        library::all().len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("teleportation correctness", teleportation),
        ("teleport equivalent to direct channel", bisimilarity),
        ("four unmerged branches", four_branches),
        ("bit-flip channel", bitflip_channel),
        ("schedule independence", schedule_independence),
        ("operational/denotational correspondence", correspondence),
        ("compositionality", compositionality),
        ("entanglement context", entanglement_context),
        ("Kraus completeness", kraus_completeness),
        ("validation diagnostics", validation),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} {title}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {title}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
