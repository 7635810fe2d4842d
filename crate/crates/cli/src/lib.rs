//! Command-line front end for the `qnet` simulator.
//!
//! [`run`] parses arguments and executes one command in-process, returning
//! everything that would go to the terminal; `main` only forwards it.

mod commands;
mod report;

use std::ffi::OsString;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

pub use report::{RunReport, Status, SCHEMA};

/// Output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Parser)]
#[command(
    name = "qnet",
    version,
    about = "Quantum addressing and entanglement routing simulator"
)]
struct Cli {
    /// Emit the report as JSON instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StateMode {
    Local,
    Simplified,
    Distributed,
    Unified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Selection {
    Flag,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Routing {
    Local,
    Distributed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Classical,
    Quantum,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Addresses {
    /// Device with the k-th smallest id holds address k.
    Identity,
    /// Superposition of all cyclic shifts of the identity assignment.
    Cyclic,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Breadth-first spanning tree of a topology.
    Mst {
        /// Topology file, or `builtin:fig2` / `builtin:fig3`.
        topology: String,
        /// Tree root; defaults to the smallest device id.
        #[arg(long)]
        root: Option<u32>,
        /// Print the topology with the tree highlighted in DOT format.
        #[arg(long)]
        dot: bool,
    },
    /// Dump a routing state branch by branch.
    RoutingState {
        topology: String,
        /// Device whose tree the state is built from (ignored for `unified`).
        #[arg(long)]
        device: Option<u32>,
        #[arg(long, value_enum, default_value = "local")]
        mode: StateMode,
    },
    /// Teleport a qubit from source to target along the routing state.
    Route {
        topology: String,
        #[arg(long)]
        source: u32,
        #[arg(long)]
        target: u32,
        /// Payload amplitudes as `re,im;re,im`.
        #[arg(long, value_parser = parse_payload, default_value = "1,0;0,0")]
        payload: [Complex64; 2],
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// How the selection ancilla is resolved.
        #[arg(long, value_enum, default_value = "flag")]
        mode: Selection,
        #[arg(long, value_enum, default_value = "distributed")]
        routing: Routing,
        #[arg(long, default_value_t = 64)]
        max_attempts: usize,
    },
    /// Process a request file on the devices of a topology.
    Request {
        topology: String,
        request: String,
        #[arg(long, value_enum, default_value = "quantum")]
        encoding: EncodingArg,
        /// Processing order as comma-separated device ids.
        #[arg(long)]
        order: Option<String>,
        #[arg(long, value_enum, default_value = "identity")]
        addresses: Addresses,
    },
    /// Compare address-driven and task-state-driven execution on random instances.
    Equivalence {
        #[arg(long, default_value_t = 3)]
        devices: usize,
        #[arg(long, default_value_t = 2)]
        terms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Run the overlay fixture: three address configurations, three network states.
    Overlay {
        /// Drop the last step of one branch (1-based, default 2).
        #[arg(long, num_args = 0..=1, default_missing_value = "2")]
        perturb: Option<usize>,
        /// Branch weights as three comma-separated reals.
        #[arg(long)]
        alphas: Option<String>,
    },
}

fn parse_payload(s: &str) -> Result<[Complex64; 2], String> {
    let parts: Vec<&str> = s.split(';').collect();
    if parts.len() != 2 {
        return Err(format!("expected `re,im;re,im`, got `{s}`"));
    }
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (slot, part) in out.iter_mut().zip(parts) {
        let nums: Vec<&str> = part.split(',').map(str::trim).collect();
        let [re, im] = nums.as_slice() else {
            return Err(format!("expected `re,im`, got `{part}`"));
        };
        let re: f64 = re.parse().map_err(|_| format!("bad number `{re}`"))?;
        let im: f64 = im.parse().map_err(|_| format!("bad number `{im}`"))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(format!("non-finite amplitude `{part}`"));
        }
        *slot = Complex64::new(re, im);
    }
    if out.iter().all(|a| a.norm() == 0.0) {
        return Err("payload is the zero vector".into());
    }
    Ok(out)
}

/// Runs one command line (program name first).
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    match commands::execute(cli.cmd, echo) {
        Ok(report) => {
            let code = match report.status {
                Status::Ok => 0,
                Status::Failed => 1,
            };
            let stdout = if cli.json {
                report.to_json()
            } else {
                report.to_text()
            };
            Outcome {
                code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_parsing() {
        let p = parse_payload("0.6,0;0,0.8").unwrap();
        assert_eq!(p[1], Complex64::new(0.0, 0.8));
        assert!(parse_payload("1,0").is_err());
        assert!(parse_payload("1,0;x,0").is_err());
        assert!(parse_payload("0,0;0,0").is_err());
    }
}
