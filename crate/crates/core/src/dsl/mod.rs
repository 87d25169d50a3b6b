//! Text format for networks.
//!
//! ```text
//! network TP {
//!   prepare E(2, 3);
//!   agent A(in: -, out: -) qubits {1, 2} {
//!     pattern [M(2, 0); M(1, 0); E(1, 2)];
//!     send c (s2, s1)
//!   }
//!   agent B(in: -, out: -) qubits {3} {
//!     recv c (x2, x1);
//!     pattern [X(3, x2); Z(3, x1)]
//!   }
//! }
//! network Both = par(TP, Other);
//! ```
//!
//! Command lists are written right to left: the last command listed runs
//! first. `p | q` places two command lists side by side, `then` continues an
//! agent with a further program, and `seq`/`par`/`library` build networks
//! from earlier ones. The last network in a file is the one returned.

mod diag;
mod lexer;
mod parser;
mod render;

pub use diag::{ParseDiagnostic, Severity, SourceSpan};
pub use parser::{parse_network, parse_network_in, NetSpans, Parsed};
pub use render::{render_angle, render_network};

/// A real angle in radians; `pi` is accepted as a factor, as in `-pi/4`,
/// `3*pi/2` or `0.5pi`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest.to_string()),
        None => (1.0, t.strip_prefix('+').unwrap_or(&t).to_string()),
    };
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), Some(d.parse::<f64>().ok()?)),
        None => (t, None),
    };
    let value = if let Some(k) = num.strip_suffix("pi") {
        let k = k.strip_suffix('*').unwrap_or(k);
        let k = if k.is_empty() { 1.0 } else { k.parse::<f64>().ok()? };
        k * std::f64::consts::PI
    } else {
        num.parse::<f64>().ok()?
    };
    let value = match den {
        Some(d) if d != 0.0 => value / d,
        Some(_) => return None,
        None => value,
    };
    value.is_finite().then_some(sign * value)
}
