use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use mbqnet::dsl::{parse_network_in, render_network};
use mbqnet::inputs::{load_inputs, Inputs};
use mbqnet::library;
use mbqnet::netmodel::{net_par_compose, net_seq_compose, Network};
use mbqnet::report::{self, render_report};
use mbqnet::semantics::{
    check_compose, check_context, check_schedules, denotational, equivalent, run_schedule, ComposeMode, Schedule,
};

/// Simulate and compare networks of agents running measurement-based
/// quantum programs.
///
/// A network argument is a DSL file or, when no such file exists, a library
/// protocol name such as `teleport` or `bitflip(pi/4)`.
#[derive(Parser)]
#[command(name = "mbqnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct InputArgs {
    /// TOML document with classical bits and agent input amplitudes.
    #[arg(long)]
    inputs: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the network and print its transition system.
    Run {
        network: String,
        #[command(flatten)]
        inputs: InputArgs,
        /// `round-robin`, or a comma-separated agent priority order.
        #[arg(long, default_value = "round-robin")]
        schedule: String,
        /// List every path instead of merging them into classes.
        #[arg(long)]
        no_merge: bool,
    },
    /// Print the Kraus table of every classical input.
    Denote { network: String },
    /// Decide whether two networks denote the same operation.
    Equiv {
        first: String,
        second: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check that every interleaving gives the same transition system.
    Schedules {
        network: String,
        #[command(flatten)]
        inputs: InputArgs,
    },
    /// Check that the network acts locally on entangled inputs.
    Context {
        network: String,
        #[arg(long, default_value_t = 1)]
        extra: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compose two networks and write the result as DSL source.
    Compose {
        #[arg(long, conflicts_with = "par", required_unless_present = "par")]
        seq: bool,
        #[arg(long)]
        par: bool,
        first: String,
        second: String,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        /// Also check that the composite denotes the composed operations.
        #[arg(long)]
        check: bool,
    },
    /// Parse and validate a source file.
    Validate { file: PathBuf },
    /// Print a library protocol as DSL source, or list the names.
    Library { name: Option<String> },
}

enum Failure {
    /// Usage, parse or validation problem: exit 2.
    Usage(String),
}

type Outcome = Result<(Value, bool), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn load(arg: &str) -> Result<Network, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{arg}: {e}")))?;
        match parse_network_in(&text, arg) {
            Ok(p) => {
                for w in &p.warnings {
                    eprintln!("{}", w.render(Some(&text)));
                }
                Ok(p.network)
            }
            Err(diags) => {
                let lines: Vec<String> = diags.iter().map(|d| d.render(Some(&text))).collect();
                Err(Failure::Usage(lines.join("\n")))
            }
        }
    } else {
        library::by_name(arg).map_err(|_| usage(format!("{arg}: no such file or library protocol")))
    }
}

fn inputs_for(n: &Network, args: &InputArgs) -> Result<Inputs, Failure> {
    let text = match &args.inputs {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?),
        None => None,
    };
    load_inputs(n, text.as_deref()).map_err(usage)
}

fn schedule(n: &Network, text: &str) -> Result<Schedule, Failure> {
    if text == "round-robin" {
        return Ok(Schedule::RoundRobin);
    }
    let order = text
        .split(',')
        .map(|name| {
            n.agent_index(name.trim())
                .ok_or_else(|| usage(format!("no agent named {}", name.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Schedule::Priority(order))
}

fn execute(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Run {
            network,
            inputs,
            schedule: sched,
            no_merge,
        } => {
            let n = load(&network)?;
            let i = inputs_for(&n, &inputs)?;
            let s = schedule(&n, &sched)?;
            let pts = run_schedule(&n, &i.classical, &i.quantum, &s).map_err(usage)?;
            Ok((report::pts_report(&n, &pts, no_merge), true))
        }
        Cmd::Denote { network } => {
            let n = load(&network)?;
            let d = denotational(&n).map_err(usage)?;
            Ok((report::denotation_report(&n, &d), true))
        }
        Cmd::Equiv { first, second, tol } => {
            let (a, b) = (load(&first)?, load(&second)?);
            let v = equivalent(&a, &b, tol).map_err(usage)?;
            Ok((report::verdict_report(&a, &b, &v, tol), v.equivalent))
        }
        Cmd::Schedules { network, inputs } => {
            let n = load(&network)?;
            let i = inputs_for(&n, &inputs)?;
            let c = check_schedules(&n, &i.classical, &i.quantum).map_err(usage)?;
            Ok((report::schedules_report(&n, &i.classical, &c), c.passed))
        }
        Cmd::Context {
            network,
            extra,
            trials,
            seed,
        } => {
            let n = load(&network)?;
            let c = check_context(&n, extra, trials, seed).map_err(usage)?;
            Ok((report::context_report(&n, &c, seed), c.passed))
        }
        Cmd::Compose {
            seq,
            first,
            second,
            output,
            check,
            ..
        } => {
            let (a, b) = (load(&first)?, load(&second)?);
            let (mode, composite) = if seq {
                (ComposeMode::Seq, net_seq_compose(&a, &b))
            } else {
                (ComposeMode::Par, net_par_compose(&a, &b))
            };
            let composite = composite.map_err(usage)?;
            std::fs::write(&output, render_network(&composite))
                .map_err(|e| usage(format!("{}: {e}", output.display())))?;
            if check {
                let c = check_compose(&a, &b, mode, 1e-9).map_err(usage)?;
                Ok((report::compose_report(&a, &b, &c), c.passed))
            } else {
                let v = serde_json::json!({
                    "kind": "compose",
                    "mode": if seq { "seq" } else { "par" },
                    "first": a.name,
                    "second": b.name,
                    "composite": composite.name,
                    "output": output.display().to_string(),
                });
                Ok((v, true))
            }
        }
        Cmd::Validate { file } => {
            let name = file.display().to_string();
            let text = std::fs::read_to_string(&file).map_err(|e| usage(format!("{name}: {e}")))?;
            let diags = match parse_network_in(&text, &name) {
                Ok(p) => p.warnings,
                Err(d) => d,
            };
            for d in &diags {
                eprintln!("{}", d.render(Some(&text)));
            }
            let v = report::diagnostics_report(&name, &diags);
            if diags.iter().any(|d| d.is_error()) {
                print!("{}", render_report(&v));
                return Err(Failure::Usage(format!("{name}: invalid")));
            }
            Ok((v, true))
        }
        Cmd::Library { name } => match name {
            Some(name) => {
                let n = library::by_name(&name).map_err(usage)?;
                print!("{}", render_network(&n));
                Ok((Value::Null, true))
            }
            None => {
                for name in library::NAMES {
                    println!("{name}");
                }
                Ok((Value::Null, true))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok((v, ok)) => {
            if !v.is_null() {
                print!("{}", render_report(&v));
            }
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
