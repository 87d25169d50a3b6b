//! Built-in protocols.

use thiserror::Error;

use crate::calculus::{Command, SignalExpr};
use crate::netmodel::{Agent, Event, Network, Preparation};
use crate::qnum::QubitId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LibraryError {
    #[error("unknown protocol {0}")]
    UnknownProtocol(String),
}

fn send(channel: &str, names: &[&str]) -> Event {
    Event::Send {
        channel: channel.into(),
        values: names.iter().map(|x| SignalExpr::name(*x)).collect(),
    }
}

fn recv(channel: &str, names: &[&str]) -> Event {
    Event::Recv {
        channel: channel.into(),
        names: names.iter().map(|x| x.to_string()).collect(),
    }
}

/// Teleport `input` from `sender` to `receiver`, using the pair `(mid, out)`.
/// The receiver binds the two outcomes to `{prefix}{mid}` and `{prefix}{input}`.
pub fn teleport_with(
    name: &str,
    (sender, receiver): (&str, &str),
    (input, mid, out): (u32, u32, u32),
    channel: &str,
    prefix: &str,
) -> Network {
    let (s_in, s_mid) = (format!("s{input}"), format!("s{mid}"));
    let (x_in, x_mid) = (format!("{prefix}{input}"), format!("{prefix}{mid}"));
    let a = Agent::new(
        sender,
        &[input, mid],
        vec![
            Event::Pattern(vec![
                Command::entangle(input, mid),
                Command::measure(input, 0.0),
                Command::measure(mid, 0.0),
            ]),
            send(channel, &[&s_mid, &s_in]),
        ],
    );
    let b = Agent::new(
        receiver,
        &[out],
        vec![
            recv(channel, &[&x_mid, &x_in]),
            Event::Pattern(vec![
                Command::z(out, SignalExpr::name(x_in.as_str())),
                Command::x(out, SignalExpr::name(x_mid.as_str())),
            ]),
        ],
    );
    Network::new(name, vec![a, b], Preparation::entangled(&[(mid, out)]))
}

/// A sends qubit 1 to B through a Bell-type pair on qubits 2 and 3.
pub fn teleport() -> Network {
    teleport_with("TP", ("A", "B"), (1, 2, 3), "c", "x")
}

/// B teleports qubit 3 back to A on fresh qubits 4 and 5.
pub fn teleport_back() -> Network {
    let n = teleport_with("TPb", ("B", "A"), (3, 4, 5), "d", "y");
    Network::new(n.name, vec![n.agents[1].clone(), n.agents[0].clone()], n.prep)
}

/// Two independent teleports: 1 from A to B, 4 from C to D.
pub fn double_teleport() -> Network {
    let second = teleport_with("TP2", ("C", "D"), (4, 5, 6), "e", "z");
    crate::netmodel::net_par_compose(&teleport(), &second).expect("disjoint teleports")
}

/// A hands qubit 1 straight to B.
pub fn direct_channel() -> Network {
    Network::new(
        "DC",
        vec![
            Agent::new(
                "A",
                &[1],
                vec![Event::QSend {
                    channel: "qc".into(),
                    qubit: QubitId(1),
                }],
            ),
            Agent::new(
                "B",
                &[],
                vec![Event::QRecv {
                    channel: "qc".into(),
                    placeholder: QubitId(1),
                }],
            ),
        ],
        Preparation::null(),
    )
}

fn bitflip_agent(alpha: f64) -> Agent {
    Agent::new(
        "A",
        &[1],
        vec![Event::Pattern(vec![
            Command::measure(2, -alpha),
            Command::x(1, SignalExpr::name("s2")),
        ])],
    )
}

/// Bit flip with probability `sin²(α/2)`; the outcome is published as `s2`.
pub fn bitflip(alpha: f64) -> Network {
    Network::new(
        "BF",
        vec![bitflip_agent(alpha).with_io(&[], &["s2"])],
        Preparation::null(),
    )
}

/// The same pattern with the outcome kept internal.
pub fn bitflip_hidden(alpha: f64) -> Network {
    Network::new("BFh", vec![bitflip_agent(alpha)], Preparation::null())
}

fn hadamard_agent(name: &str, input: u32, out: u32) -> Agent {
    Agent::new(
        name,
        &[input],
        vec![Event::Pattern(vec![
            Command::entangle(input, out),
            Command::measure(input, 0.0),
            Command::x(out, SignalExpr::name(format!("s{input}"))),
        ])],
    )
}

/// The two single-agent halves of [`hadamard_pair`].
pub fn hadamard_halves() -> (Network, Network) {
    (
        Network::new("HA", vec![hadamard_agent("A", 1, 2)], Preparation::null()),
        Network::new("HB", vec![hadamard_agent("B", 3, 4)], Preparation::null()),
    )
}

/// Two agents each applying a Hadamard to their own qubit.
pub fn hadamard_pair() -> Network {
    let (a, b) = hadamard_halves();
    Network::new(
        "HH",
        vec![a.agents[0].clone(), b.agents[0].clone()],
        Preparation::null(),
    )
}

/// A encodes two bits into its half of a shared pair and sends it to B,
/// who decodes them.
pub fn superdense() -> Network {
    let a = Agent::new(
        "A",
        &[1],
        vec![
            Event::Pattern(vec![
                Command::z(1, SignalExpr::name("x1")),
                Command::x(1, SignalExpr::name("x2")),
            ]),
            Event::QSend {
                channel: "qc".into(),
                qubit: QubitId(1),
            },
        ],
    )
    .with_io(&["x1", "x2"], &[]);
    let b = Agent::new(
        "B",
        &[2],
        vec![
            Event::QRecv {
                channel: "qc".into(),
                placeholder: QubitId(1),
            },
            Event::Pattern(vec![
                Command::entangle(1, 2),
                Command::measure(1, 0.0),
                Command::measure(2, 0.0),
            ]),
        ],
    )
    .with_io(&[], &["s1", "s2"]);
    Network::new("SD", vec![a, b], Preparation::entangled(&[(1, 2)]))
}

pub const NAMES: [&str; 5] = ["teleport", "direct_channel", "bitflip", "hadamard_pair", "superdense"];

/// Look a protocol up by name; `bitflip` takes an optional angle, as in
/// `bitflip(0.5)` or `bitflip(pi/2)`, defaulting to π/2.
pub fn by_name(name: &str) -> Result<Network, LibraryError> {
    let unknown = || LibraryError::UnknownProtocol(name.to_string());
    let name = name.trim();
    match name {
        "teleport" => Ok(teleport()),
        "teleport_back" => Ok(teleport_back()),
        "double_teleport" => Ok(double_teleport()),
        "direct_channel" => Ok(direct_channel()),
        "hadamard_pair" => Ok(hadamard_pair()),
        "superdense" => Ok(superdense()),
        "bitflip" => Ok(bitflip(std::f64::consts::FRAC_PI_2)),
        "bitflip_hidden" => Ok(bitflip_hidden(std::f64::consts::FRAC_PI_2)),
        _ => {
            let (head, rest) = name.split_once('(').ok_or_else(unknown)?;
            let arg = rest.strip_suffix(')').ok_or_else(unknown)?;
            let alpha = crate::dsl::parse_angle(arg).ok_or_else(unknown)?;
            match head.trim() {
                "bitflip" => Ok(bitflip(alpha)),
                "bitflip_hidden" => Ok(bitflip_hidden(alpha)),
                _ => Err(unknown()),
            }
        }
    }
}

/// Every library protocol, with bit flips at a generic angle.
pub fn all() -> Vec<Network> {
    vec![
        teleport(),
        teleport_back(),
        double_teleport(),
        direct_channel(),
        bitflip(1.0),
        bitflip_hidden(1.0),
        hadamard_pair(),
        superdense(),
    ]
}
