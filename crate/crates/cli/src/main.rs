//! `crn`: parse, analyse, simulate and certify mass-action reaction networks.
//!
//! Exit status is 0 on success, 1 on a domain error (or a failed
//! complex-balance check in `ack`), and 2 on a usage error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crn_core::fock::{
    ack_residual, apply_symmetry, coherent_state, commutator, evolve_master, hamiltonian, linear_observable,
    max_master_step, residual_norms, BoundaryPolicy, MixedState, TruncationBox,
};
use crn_core::parser::{format_network, parse_network, ParseError};
use crn_core::rate::{find_equilibrium, integrate, rate_vector_field, IntegrateOptions};
use crn_core::ssa::{compare_to_poisson, simulate, stationary_histogram};
use crn_core::structure::{analyze, complex_balance, conserved_quantities};
use crn_core::{CountVector, CrnError, Network};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "crn", version, about = "Mass-action reaction network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Network file in `.crn` format
    input: PathBuf,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a network and print it in canonical form
    Parse {
        #[command(flatten)]
        io: Common,
    },
    /// Structural report: complexes, linkage classes, deficiency, conservation laws
    Analyze {
        #[command(flatten)]
        io: Common,
    },
    /// Integrate the rate equation and write a CSV trajectory
    Rate {
        #[command(flatten)]
        io: Common,
        /// Initial concentrations
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list)]
        x0: List<f64>,
        #[arg(long, value_parser = positive)]
        t_end: f64,
        /// Fixed RK4 step (default: chosen from the Jacobian at x0)
        #[arg(long, value_parser = positive, conflicts_with = "adaptive")]
        dt: Option<f64>,
        /// Use adaptive Dormand-Prince with this relative and absolute tolerance
        #[arg(long, value_parser = positive)]
        adaptive: Option<f64>,
        /// Keep every n-th step
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
    },
    /// Find a rate-equation equilibrium and test it for complex balance
    Equilibrium {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list)]
        x0: List<f64>,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
    },
    /// Evolve the truncated master equation and write the final distribution as CSV
    Master {
        #[command(flatten)]
        io: Common,
        /// Start from the normalised coherent state with these means
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list, conflicts_with = "n0", required_unless_present = "n0")]
        c: Option<List<f64>>,
        /// Start from this pure state
        #[arg(long, value_parser = count_list)]
        n0: Option<List<u64>>,
        #[arg(long, value_parser = cap_list)]
        caps: Option<List<u64>>,
        #[arg(long, value_parser = nonneg)]
        t_end: f64,
        /// Step size (default: the stability bound)
        #[arg(long, value_parser = positive)]
        dt: Option<f64>,
    },
    /// Check complex balance of c and certify the coherent state as stationary
    Ack {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list)]
        c: List<f64>,
        #[arg(long, value_parser = cap_list)]
        caps: Option<List<u64>>,
        #[arg(long, default_value_t = 1e-9, value_parser = positive)]
        tol: f64,
    },
    /// Gillespie simulation: a trajectory, or a stationary histogram with --samples
    Ssa {
        #[command(flatten)]
        io: Common,
        #[arg(long, value_parser = count_list)]
        n0: List<u64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Trajectory length
        #[arg(long, value_parser = positive, required_unless_present = "samples")]
        t_end: Option<f64>,
        /// Record this many fixed-interval snapshots instead of a trajectory
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: Option<u64>,
        #[arg(long, default_value_t = 50.0, value_parser = nonneg, requires = "samples")]
        burn_in: f64,
        #[arg(long, default_value_t = 1.0, value_parser = positive, requires = "samples")]
        interval: f64,
        /// Compare the histogram with the product-Poisson law of these means (printed to stderr)
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list, requires = "samples")]
        poisson: Option<List<f64>>,
    },
    /// Commutators of H with each conservation law, plus symmetry and projection checks at c
    Noether {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true, value_parser = nonneg_list)]
        c: List<f64>,
        #[arg(long, value_parser = cap_list)]
        caps: Option<List<u64>>,
        /// Group parameters for exp(sO)
        #[arg(long, allow_hyphen_values = true, value_parser = real_list, default_value = "-1,0.3,0.6931471805599453")]
        s: List<f64>,
        /// Sector values for the projection check
        #[arg(long, allow_hyphen_values = true, value_parser = int_list, default_value = "2,4,6")]
        lambda: List<i64>,
    },
}

fn split(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim)
}

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be positive"))
    }
}

fn nonneg(s: &str) -> Result<f64, String> {
    let v = real(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be nonnegative"))
    }
}

/// Comma-separated flag value; a newtype so clap takes it as one argument.
#[derive(Debug, Clone)]
struct List<T>(Vec<T>);

fn real_list(s: &str) -> Result<List<f64>, String> {
    split(s).map(real).collect::<Result<_, _>>().map(List)
}

fn nonneg_list(s: &str) -> Result<List<f64>, String> {
    split(s).map(nonneg).collect::<Result<_, _>>().map(List)
}

fn count_list(s: &str) -> Result<List<u64>, String> {
    split(s).map(|x| x.parse().map_err(|_| format!("`{x}` is not a count"))).collect::<Result<_, _>>().map(List)
}

fn cap_list(s: &str) -> Result<List<u64>, String> {
    let caps = count_list(s)?;
    if caps.0.contains(&0) {
        return Err("caps must be at least 1".into());
    }
    Ok(caps)
}

fn int_list(s: &str) -> Result<List<i64>, String> {
    split(s).map(|x| x.parse().map_err(|_| format!("`{x}` is not an integer"))).collect::<Result<_, _>>().map(List)
}

/// Anything that should exit with status 1.
#[derive(Debug)]
struct DomainFailure(String);

impl std::fmt::Display for DomainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DomainFailure {}

fn load(path: &Path) -> anyhow::Result<Network> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = parse_network::<f64>(&text).map_err(|e| domain_parse(path, e))?;
    for w in &parsed.warnings {
        eprintln!("{}:{w}", path.display());
    }
    for w in parsed.network.warnings() {
        eprintln!("{}: warning: {w}", path.display());
    }
    Ok(parsed.network)
}

fn domain_parse(path: &Path, e: ParseError) -> anyhow::Error {
    let lines: Vec<String> = e.errors().map(|d| format!("{}:{d}", path.display())).collect();
    anyhow!(DomainFailure(lines.join("\n")))
}

fn domain(e: CrnError) -> anyhow::Error {
    anyhow!(DomainFailure(format!("{}: {e}", e.code())))
}

fn emit(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json(out: &Option<PathBuf>, mut body: Value) -> anyhow::Result<()> {
    body["schema_version"] = json!(SCHEMA_VERSION);
    let mut text = serde_json::to_string_pretty(&body)?;
    text.push('\n');
    emit(out, &text)
}

fn check_len(what: &str, got: usize, net: &Network) -> anyhow::Result<()> {
    if got != net.num_species() {
        return Err(domain(CrnError::Dim { expected: net.num_species(), got }))
            .with_context(|| format!("--{what} has {got} entries for {} species", net.num_species()));
    }
    Ok(())
}

fn space_for(net: &Network, c: &[f64], caps: &Option<Vec<u64>>) -> anyhow::Result<TruncationBox> {
    match caps {
        Some(caps) => {
            check_len("caps", caps.len(), net)?;
            TruncationBox::new(caps.clone()).map_err(domain)
        }
        None => TruncationBox::auto(c, net.margin()).map_err(domain),
    }
}

/// Returns whether the command succeeded in the domain sense.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Parse { io } => {
            let net = load(&io.input)?;
            let mut text = format_network(&net);
            text.push('\n');
            emit(&io.out, &text)?;
        }
        Command::Analyze { io } => {
            let net = load(&io.input)?;
            let report = analyze(&net);
            let mut body = serde_json::to_value(&report)?;
            body["species"] = json!(net.species());
            body["complexes"] = json!(net.complexes().iter().map(|c| net.complex_name(c)).collect::<Vec<_>>());
            emit_json(&io.out, body)?;
        }
        Command::Rate { io, x0, t_end, dt, adaptive, stride } => {
            let x0 = x0.0;
            let net = load(&io.input)?;
            check_len("x0", x0.len(), &net)?;
            let mut opts = match (dt, adaptive) {
                (_, Some(tol)) => IntegrateOptions::rk45(tol, tol),
                (Some(h), None) => IntegrateOptions::rk4(h),
                (None, None) => IntegrateOptions::default(),
            };
            opts.record_stride = stride as usize;
            let traj = integrate(&net, &x0, t_end, &opts).map_err(domain)?;
            emit(&io.out, &traj.to_csv(net.species()))?;
        }
        Command::Equilibrium { io, x0, tol } => {
            let x0 = x0.0;
            let net = load(&io.input)?;
            check_len("x0", x0.len(), &net)?;
            let x = find_equilibrium(&net, &x0, tol).map_err(domain)?;
            let f = rate_vector_field(&net, &x).map_err(domain)?;
            let cb = complex_balance(&net, &x, tol).map_err(domain)?;
            emit_json(
                &io.out,
                json!({
                    "species": net.species(),
                    "equilibrium": x,
                    "residual_inf": f.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                    "complex_balanced": cb.balanced,
                    "max_complex_residual": cb.max_abs_residual,
                    "tol": tol,
                }),
            )?;
        }
        Command::Master { io, c, n0, caps, t_end, dt } => {
            let net = load(&io.input)?;
            let caps = caps.map(|l| l.0);
            let (space, psi0) = match (c.map(|l| l.0), n0.map(|l| l.0)) {
                (Some(c), _) => {
                    check_len("c", c.len(), &net)?;
                    let space = space_for(&net, &c, &caps)?;
                    let (psi, _) = coherent_state(&c, &space).map_err(domain)?;
                    (space, psi.normalized().map_err(domain)?)
                }
                (None, Some(n0)) => {
                    check_len("n0", n0.len(), &net)?;
                    let means: Vec<f64> = n0.iter().map(|&n| n as f64).collect();
                    let space = space_for(&net, &means, &caps)?;
                    let psi = MixedState::pure(space.clone(), &n0).map_err(domain)?;
                    (space, psi)
                }
                (None, None) => unreachable!("clap requires --c or --n0"),
            };
            let h = hamiltonian(&net, &space, BoundaryPolicy::TruncatePair).map_err(domain)?;
            let dt = dt.unwrap_or_else(|| max_master_step(&h).min(t_end.max(f64::MIN_POSITIVE)));
            let psi = evolve_master(&h, &psi0, t_end, dt).map_err(domain)?;
            emit(&io.out, &psi.to_csv(net.species()))?;
        }
        Command::Ack { io, c, caps, tol } => {
            let (c, caps) = (c.0, caps.map(|l| l.0));
            let net = load(&io.input)?;
            check_len("c", c.len(), &net)?;
            let space = space_for(&net, &c, &caps)?;
            let cb = complex_balance(&net, &c, tol).map_err(domain)?;
            let ack = ack_residual(&net, &c, &space).map_err(domain)?;
            let mut body = serde_json::to_value(ack)?;
            body["c"] = json!(c);
            body["caps"] = json!(space.caps());
            body["complex_balanced"] = json!(cb.balanced);
            body["max_complex_residual"] = json!(cb.max_abs_residual);
            body["threshold"] = json!(cb.threshold);
            body["complex_residuals"] = json!(cb
                .complexes
                .iter()
                .map(|f| json!({ "complex": net.complex_name(&f.complex), "residual": f.residual }))
                .collect::<Vec<_>>());
            emit_json(&io.out, body)?;
            return Ok(cb.balanced);
        }
        Command::Ssa { io, n0, seed, t_end, samples, burn_in, interval, poisson } => {
            let (n0, poisson) = (n0.0, poisson.map(|l| l.0));
            let net = load(&io.input)?;
            check_len("n0", n0.len(), &net)?;
            let n0 = CountVector(n0);
            match samples {
                Some(count) => {
                    let h = stationary_histogram(&net, &n0, burn_in, count, interval, seed).map_err(domain)?;
                    if let Some(c) = poisson {
                        check_len("poisson", c.len(), &net)?;
                        let cmp = compare_to_poisson(&h, &c).map_err(domain)?;
                        eprintln!("tv_distance {} means {:?}", cmp.tv_distance, cmp.per_species_means);
                    }
                    emit(&io.out, &h.to_csv(net.species()))?;
                }
                None => {
                    let t_end = t_end.expect("clap requires --t-end without --samples");
                    let traj = simulate(&net, &n0, t_end, seed).map_err(domain)?;
                    emit(&io.out, &traj.to_csv(net.species()))?;
                }
            }
        }
        Command::Noether { io, c, caps, s, lambda } => {
            let (c, caps, s, lambda) = (c.0, caps.map(|l| l.0), s.0, lambda.0);
            let net = load(&io.input)?;
            check_len("c", c.len(), &net)?;
            let space = space_for(&net, &c, &caps)?;
            let h = hamiltonian(&net, &space, BoundaryPolicy::TruncatePair).map_err(domain)?;
            let margin = net.margin();
            let (psi, _) = coherent_state(&c, &space).map_err(domain)?;
            let mut laws = Vec::new();
            for w in conserved_quantities(&net) {
                let o = linear_observable(&w, &space).map_err(domain)?;
                let comm = commutator(&h, &o).map_err(domain)?.max_abs();
                let mut symmetry = Vec::new();
                for &si in &s {
                    let (moved, predicted) = apply_symmetry(&c, &w, si, &space).map_err(domain)?;
                    let (expected, _) = coherent_state(&predicted, &space).map_err(domain)?;
                    let expected = expected.normalized().map_err(domain)?;
                    let err = space
                        .states()
                        .zip(moved.weights().iter().zip(expected.weights()))
                        .filter(|(n, (_, &e))| space.is_interior(n, margin) && e > 0.0)
                        .fold(0.0f64, |m, (_, (&g, &e))| m.max((g - e).abs() / e));
                    symmetry.push(json!({ "s": si, "predicted_c": predicted, "max_relative_error": err }));
                }
                let mut projections = Vec::new();
                for &l in &lambda {
                    match psi.project_onto(&w, l) {
                        Ok(p) => {
                            let (interior, _, _) = residual_norms(&h, &p, margin).map_err(domain)?;
                            projections.push(json!({ "lambda": l, "interior_residual_l1": interior }));
                        }
                        Err(e @ CrnError::EmptySector { .. }) => {
                            projections.push(json!({ "lambda": l, "error": e.code() }));
                        }
                        Err(e) => return Err(domain(e)),
                    }
                }
                laws.push(json!({
                    "w": w,
                    "commutator_max_abs": comm,
                    "symmetry": symmetry,
                    "projections": projections,
                }));
            }
            emit_json(&io.out, json!({ "c": c, "caps": space.caps(), "conserved": laws }))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.chain().any(|c| c.is::<DomainFailure>()) { 1 } else { 2 })
        }
    }
}
