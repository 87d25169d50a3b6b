use std::f64::consts::PI;
use std::fmt::Write;

use crate::calculus::Command;
use crate::netmodel::{Agent, Event, Network, Preparation};
use crate::qnum::{QubitId, C64};

/// Shortest text that parses back to exactly `x`, using `pi` when possible.
pub fn render_angle(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    for m in [1u32, 2, 3, 4, 6, 8, 12, 16] {
        for k in 1..=32u32 {
            let v = (k as f64 * PI) / m as f64;
            if v == x.abs() {
                let sign = if x < 0.0 { "-" } else { "" };
                let num = if k == 1 { "pi".to_string() } else { format!("{k}*pi") };
                return if m == 1 {
                    format!("{sign}{num}")
                } else {
                    format!("{sign}{num}/{m}")
                };
            }
        }
    }
    format!("{x:?}")
}

fn render_command(c: &Command) -> String {
    match c {
        Command::Entangle(a, b) => format!("E({}, {})", a.0, b.0),
        Command::Measure {
            qubit,
            angle,
            s_dep,
            t_dep,
        } => {
            let mut s = format!("M({}, {}", qubit.0, render_angle(*angle));
            if !s_dep.is_zero() {
                s.push_str(&format!(", s: {s_dep}"));
            }
            if !t_dep.is_zero() {
                s.push_str(&format!(", t: {t_dep}"));
            }
            s + ")"
        }
        Command::CorrectX { qubit, dep } => format!("X({}, {dep})", qubit.0),
        Command::CorrectZ { qubit, dep } => format!("Z({}, {dep})", qubit.0),
        Command::Nil => "nil".into(),
    }
}

fn render_event(e: &Event) -> String {
    match e {
        Event::Pattern(cmds) => {
            let written: Vec<String> = cmds.iter().rev().map(render_command).collect();
            format!("pattern [{}]", written.join("; "))
        }
        Event::Send { channel, values } => {
            let v: Vec<String> = values.iter().map(|x| x.to_string()).collect();
            format!("send {channel} ({})", v.join(", "))
        }
        Event::Recv { channel, names } => format!("recv {channel} ({})", names.join(", ")),
        Event::QSend { channel, qubit } => format!("qsend {channel} {}", qubit.0),
        Event::QRecv { channel, placeholder } => format!("qrecv {channel} {}", placeholder.0),
    }
}

fn names(v: &[String]) -> String {
    if v.is_empty() {
        "-".into()
    } else {
        v.join(", ")
    }
}

fn complex(z: &C64) -> String {
    format!("({:?}, {:?})", z.re, z.im)
}

fn render_prep(p: &Preparation) -> Option<String> {
    let ids_list = |ids: &[QubitId]| ids.iter().map(|q| q.0.to_string()).collect::<Vec<_>>().join(", ");
    match p {
        Preparation::Graph { ids, edges } => {
            if ids.is_empty() {
                return None;
            }
            let mut from_edges: Vec<QubitId> = Vec::new();
            for &(a, b) in edges {
                for q in [a, b] {
                    if !from_edges.contains(&q) {
                        from_edges.push(q);
                    }
                }
            }
            let mut items = Vec::new();
            if from_edges != *ids {
                items.push(format!("plus({})", ids_list(ids)));
            }
            items.extend(edges.iter().map(|(a, b)| format!("E({}, {})", a.0, b.0)));
            Some(items.join(", "))
        }
        Preparation::State(s) => {
            if let Some(amps) = s.amplitudes() {
                let v: Vec<String> = amps.iter().map(complex).collect();
                Some(format!("state({}) [{}]", ids_list(s.ids()), v.join(", ")))
            } else {
                let d = s.density();
                let v: Vec<String> = (0..d.nrows())
                    .flat_map(|r| (0..d.ncols()).map(move |c| (r, c)))
                    .map(|(r, c)| complex(&d[(r, c)]))
                    .collect();
                Some(format!("density({}) [{}]", ids_list(s.ids()), v.join(", ")))
            }
        }
    }
}

fn render_agent(a: &Agent, out: &mut String) {
    let sort: Vec<String> = a.sort.iter().map(|q| q.0.to_string()).collect();
    let _ = write!(
        out,
        "  agent {}(in: {}, out: {}) qubits {{{}}} {{",
        a.name,
        names(&a.cin),
        names(&a.cout),
        sort.join(", ")
    );
    if a.events.is_empty() {
        out.push_str("}\n");
        return;
    }
    out.push('\n');
    let events: Vec<String> = a.events.iter().map(|e| format!("    {}", render_event(e))).collect();
    out.push_str(&events.join(";\n"));
    out.push_str("\n  }\n");
}

/// Source text that parses back to `n`.
pub fn render_network(n: &Network) -> String {
    let mut out = format!("network {} {{\n", n.name);
    if let Some(p) = render_prep(&n.prep) {
        let _ = writeln!(out, "  prepare {p};");
    }
    for a in &n.agents {
        render_agent(a, &mut out);
    }
    out.push_str("}\n");
    out
}
