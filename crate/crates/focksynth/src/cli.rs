//! Command-line front end: single simulations, figure reproduction, design
//! helpers, sweeps, and oracle verification, with stable JSON/CSV output.
//!
//! Exit codes: 0 success, 1 malformed configuration, 2 conditioning on a
//! vanishing click probability, 3 oracle verification failure.

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::analysis::{self, NuInSource, SweepSpec, SweptParameter};
use crate::cavity::CavityParams;
use crate::fockspace::{
    coherent_density_matrix, fidelity_to_pure, DensityMatrix, FockTruncation, PureStateVector,
};
use crate::oracle;
use crate::synthesizer::{
    conditional_state, default_truncation, design_phase, equal_weight_amplitude,
    tau_calibration, SynthesizerParams,
};
use crate::Error;

#[derive(Parser)]
#[command(name = "focksynth", about = "Fock-state synthesizer simulator", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and report the conditional state and metrics
    Simulate(SimulateArgs),
    /// Reproduce a published figure (2, 3, or 4), calibrating tau first
    Figure {
        /// Figure number
        which: u8,
        #[arg(long, value_parser = ["json"], default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tune psi and beta for a target Fock state or superposition
    Design(DesignArgs),
    /// Run a parameter sweep from a JSON spec file, emitting CSV
    Sweep {
        /// Path to the sweep specification
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the closed forms against the brute-force multimode oracle
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Coherent amplitude of the signal input (real)
    #[arg(long)]
    beta: Option<f64>,
    /// Path to a density-matrix JSON file for the signal input
    #[arg(long)]
    nu_in: Option<PathBuf>,
    /// Coherent amplitude feeding the cavity (real)
    #[arg(long)]
    alpha: f64,
    /// Cavity phase shift, radians; fractions of pi like "pi/5" accepted
    #[arg(long)]
    psi: String,
    /// Cross-Kerr phase per photon, radians; "pi/5" style accepted
    #[arg(long)]
    chi_t: String,
    /// Beam-splitter transmissivity
    #[arg(long)]
    tau: f64,
    /// Detector quantum efficiency
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    /// Fock-space truncation override
    #[arg(long)]
    n_max: Option<usize>,
    /// Target state, `fock:n` or `super:n1,n2`
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// Target, `fock:n` or `super:n1,n2`
    target: String,
    #[arg(long)]
    chi_t: String,
    #[arg(long, default_value_t = 1e-4)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of randomized comparisons
    #[arg(long, default_value_t = 20)]
    instances: u32,
    /// Largest cavity amplitude drawn
    #[arg(long, default_value_t = 3.0)]
    max_alpha: f64,
    /// Signal truncation
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// Fix tau instead of sampling it from [1e-3, 0.3]
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Figure { which, out, .. } => cmd_figure(which, out),
        Command::Design(args) => cmd_design(args),
        Command::Sweep { spec, out } => cmd_sweep(spec, out),
        Command::Verify(args) => cmd_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoClickProbability(_) => 2,
                _ => 1,
            }
        }
    }
}

/// Parses an angle in radians, accepting plain floats and exact fractions
/// of pi: "pi", "-pi", "2pi/3", "pi/5", "0.6283185307".
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Some(idx) = t.find("pi") {
        let (pre, rest) = (&t[..idx], &t[idx + 2..]);
        let factor = match pre {
            "" => 1.0,
            "-" => -1.0,
            other => other.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?,
        };
        let divisor = match rest.strip_prefix('/') {
            None if rest.is_empty() => 1.0,
            Some(d) => d.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))?,
            _ => return Err(format!("bad angle '{s}'")),
        };
        if divisor == 0.0 {
            return Err(format!("bad angle '{s}': division by zero"));
        }
        Ok(factor * PI / divisor)
    } else {
        t.parse::<f64>().map_err(|_| format!("bad angle '{s}'"))
    }
}

/// Parses `fock:n` or `super:n1,n2` into a normalized target state.
pub fn parse_target(s: &str, trunc: FockTruncation) -> crate::Result<PureStateVector> {
    let make_err = || Error::InvalidSweep(format!("bad target '{s}' (want fock:n or super:n1,n2)"));
    if let Some(n) = s.strip_prefix("fock:") {
        let n: usize = n.parse().map_err(|_| make_err())?;
        PureStateVector::fock(n, trunc)
    } else if let Some(pair) = s.strip_prefix("super:") {
        let parts: Vec<&str> = pair.split(',').collect();
        if parts.len() != 2 {
            return Err(make_err());
        }
        let n1: usize = parts[0].parse().map_err(|_| make_err())?;
        let n2: usize = parts[1].parse().map_err(|_| make_err())?;
        PureStateVector::equal_superposition(&[n1, n2], trunc)
    } else {
        Err(make_err())
    }
}

fn emit(text: &str, out: Option<PathBuf>) -> crate::Result<()> {
    match out {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Error::InvalidSweep(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn metrics_json(m: &analysis::StateMetrics) -> Value {
    json!({
        "fidelity": m.fidelity,
        "purity": m.purity,
        "trace_defect": m.trace_defect,
        "hermiticity_defect": m.hermiticity_defect,
        "min_eigenvalue": m.min_eigenvalue,
        "number_distribution": m.number_distribution,
    })
}

fn params_json(p: &SynthesizerParams) -> Value {
    json!({
        "tau": p.cavity.tau,
        "psi": p.cavity.psi,
        "chi_t": p.cavity.chi_t,
        "alpha": [p.alpha.re, p.alpha.im],
        "eta": p.eta,
        "n_max": p.trunc.n_max,
    })
}

fn cmd_simulate(args: SimulateArgs) -> crate::Result<i32> {
    let psi = parse_angle(&args.psi).map_err(Error::InvalidSweep)?;
    let chi_t = parse_angle(&args.chi_t).map_err(Error::InvalidSweep)?;
    let cavity = CavityParams::new(args.tau, psi, chi_t)?;

    let nu_in = match (args.beta, &args.nu_in) {
        (Some(beta), None) => {
            let trunc = match args.n_max {
                Some(n) => FockTruncation::new(n),
                None => default_truncation(&cavity, beta * beta),
            };
            coherent_density_matrix(Complex64::new(beta, 0.0), trunc)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidDensityMatrix(format!("cannot read {}: {e}", path.display()))
            })?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
            let rho = DensityMatrix::from_json(&value)?;
            if let Some(n) = args.n_max {
                if n != rho.truncation().n_max {
                    return Err(Error::DimensionMismatch(n, rho.truncation().n_max));
                }
            }
            rho
        }
        _ => {
            return Err(Error::InvalidSweep(
                "exactly one of --beta and --nu-in is required".into(),
            ))
        }
    };

    let params = SynthesizerParams::new(
        cavity,
        Complex64::new(args.alpha, 0.0),
        args.eta,
        nu_in.truncation(),
    )?;
    let target = args
        .target
        .as_deref()
        .map(|t| parse_target(t, params.trunc))
        .transpose()?;

    let (rho, report) = conditional_state(&nu_in, &params)?;
    let metrics = analysis::metrics(&rho, target.as_ref())?;

    let text = match args.format.as_str() {
        "json" => {
            let doc = json!({
                "click": {"p_click": report.p_click, "p_no_click": report.p_no_click},
                "params": params_json(&params),
                "state": rho.to_json(),
                "metrics": metrics_json(&metrics),
            });
            serde_json::to_string_pretty(&doc).expect("json output")
        }
        _ => {
            let mut s = String::from("field,value\n");
            s.push_str(&format!("p_click,{:.11e}\n", report.p_click));
            if let Some(f) = metrics.fidelity {
                s.push_str(&format!("fidelity,{f:.11e}\n"));
            }
            s.push_str(&format!("purity,{:.11e}\n", metrics.purity));
            s.push_str(&format!("trace_defect,{:.11e}\n", metrics.trace_defect));
            s.push_str(&format!("min_eig,{:.11e}\n", metrics.min_eigenvalue));
            s.push_str("n,p_n\n");
            for (n, p) in metrics.number_distribution.iter().enumerate() {
                s.push_str(&format!("{n},{p:.11e}\n"));
            }
            s
        }
    };
    emit(&text, args.out)?;
    Ok(0)
}

struct FigureBase {
    beta: f64,
    alpha: f64,
    eta: f64,
    cavity: CavityParams,
    target: &'static str,
}

fn figure2_base() -> FigureBase {
    FigureBase {
        beta: 2.0,
        alpha: 20.0,
        eta: 1.0,
        cavity: CavityParams::new(1e-4, 0.04, 0.01).expect("valid figure parameters"),
        target: "fock:4",
    }
}

fn figure3_base() -> FigureBase {
    FigureBase {
        beta: equal_weight_amplitude(10, 20).expect("distinct photon numbers"),
        alpha: 8.0,
        eta: 1.0,
        cavity: CavityParams::new(1e-4, 0.0, PI / 5.0).expect("valid figure parameters"),
        target: "super:10,20",
    }
}

fn figure_panel(
    base: &FigureBase,
    tau: f64,
    target_p: Option<f64>,
    with_matrix: bool,
) -> crate::Result<Value> {
    let mut cavity = base.cavity;
    cavity.tau = tau;
    let trunc = default_truncation(&cavity, base.beta * base.beta);
    let params =
        SynthesizerParams::new(cavity, Complex64::new(base.alpha, 0.0), base.eta, trunc)?;
    let nu_in = coherent_density_matrix(Complex64::new(base.beta, 0.0), trunc);
    let target = parse_target(base.target, trunc)?;
    let (rho, report) = conditional_state(&nu_in, &params)?;
    let metrics = analysis::metrics(&rho, Some(&target))?;
    let mut panel = json!({
        "tau": tau,
        "p_click": report.p_click,
        "target_p_click": target_p,
        "params": params_json(&params),
        "fidelity": metrics.fidelity,
        "purity": metrics.purity,
        "number_distribution": metrics.number_distribution,
    });
    if with_matrix {
        let d = rho.dim();
        let mags: Vec<Vec<f64>> =
            (0..d).map(|n| (0..d).map(|m| rho.get(n, m).norm()).collect()).collect();
        panel["matrix_magnitudes"] = json!(mags);
    }
    Ok(panel)
}

fn calibrate(base: &FigureBase, target_p: f64, bracket: (f64, f64)) -> crate::Result<f64> {
    let trunc = default_truncation(&base.cavity, base.beta * base.beta);
    let params = SynthesizerParams::new(
        base.cavity,
        Complex64::new(base.alpha, 0.0),
        base.eta,
        trunc,
    )?;
    let nu_in = coherent_density_matrix(Complex64::new(base.beta, 0.0), trunc);
    tau_calibration(&nu_in, &params, target_p, bracket)
}

fn cmd_figure(which: u8, out: Option<PathBuf>) -> crate::Result<i32> {
    let doc = match which {
        2 => {
            let base = figure2_base();
            let mut panels = Vec::new();
            for target_p in [0.99885, 0.4905, 0.1997] {
                let tau = calibrate(&base, target_p, (1e-7, 1e-1))?;
                panels.push(figure_panel(&base, tau, Some(target_p), false)?);
            }
            json!({"figure": 2, "panels": panels})
        }
        3 => {
            let base = figure3_base();
            let mut panels = Vec::new();
            for target_p in [0.205, 0.092] {
                let tau = calibrate(&base, target_p, (1e-5, 2e-1))?;
                panels.push(figure_panel(&base, tau, Some(target_p), true)?);
            }
            json!({"figure": 3, "panels": panels})
        }
        4 => {
            let base = figure3_base();
            let tau = calibrate(&base, 0.205, (1e-5, 2e-1))?;
            let mut low_eta = base;
            low_eta.eta = 0.2;
            let panel_a = figure_panel(&low_eta, tau, None, true)?;
            let mut low_alpha = figure3_base();
            low_alpha.alpha = 3.58;
            let panel_b = figure_panel(&low_alpha, tau, None, true)?;
            json!({"figure": 4, "panels": [panel_a, panel_b]})
        }
        other => {
            return Err(Error::InvalidSweep(format!(
                "unknown figure {other}; expected 2, 3 or 4"
            )))
        }
    };
    emit(&serde_json::to_string_pretty(&doc).expect("json output"), out)?;
    Ok(0)
}

fn cmd_design(args: DesignArgs) -> crate::Result<i32> {
    let chi_t = parse_angle(&args.chi_t).map_err(Error::InvalidSweep)?;
    let (psi, beta, target_spec) = if let Some(n) = args.target.strip_prefix("fock:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::InvalidSweep(format!("bad target '{}'", args.target)))?;
        (design_phase(n, chi_t), (n as f64).sqrt(), args.target.clone())
    } else if let Some(pair) = args.target.strip_prefix("super:") {
        let parts: Vec<usize> = pair
            .split(',')
            .map(|p| p.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidSweep(format!("bad target '{}'", args.target)))?;
        if parts.len() != 2 || parts[0] == parts[1] {
            return Err(Error::InvalidSweep(format!("bad target '{}'", args.target)));
        }
        let (n1, n2) = (parts[0].min(parts[1]), parts[0].max(parts[1]));
        // the resonance comb spacing 2 pi / chi_t must divide n2 - n1
        let spacing_count = (n2 - n1) as f64 * chi_t / (2.0 * PI);
        if (spacing_count - spacing_count.round()).abs() > 1e-9 || spacing_count.round() < 1.0 {
            return Err(Error::IncompatibleDesign(format!(
                "chi_t {chi_t} cannot make both {n1} and {n2} resonant; nearest valid chi_t = 2*pi/{} = {}",
                n2 - n1,
                2.0 * PI / (n2 - n1) as f64
            )));
        }
        (design_phase(n1, chi_t), equal_weight_amplitude(n1, n2)?, args.target.clone())
    } else {
        return Err(Error::InvalidSweep(format!("bad target '{}'", args.target)));
    };

    let cavity = CavityParams::new(args.tau, psi, chi_t)?;
    let trunc = default_truncation(&cavity, beta * beta);
    // a bright probe: exact amplitude does not matter for the design report
    let params = SynthesizerParams::new(cavity, Complex64::new(8.0, 0.0), args.eta, trunc)?;
    let nu_in = coherent_density_matrix(Complex64::new(beta, 0.0), trunc);
    let target = parse_target(&target_spec, trunc)?;
    let (rho, report) = conditional_state(&nu_in, &params)?;
    let fidelity = fidelity_to_pure(&rho, &target)?;
    let doc = json!({
        "target": target_spec,
        "psi": psi,
        "chi_t": chi_t,
        "beta": beta,
        "tau": args.tau,
        "eta": args.eta,
        "p_click": report.p_click,
        "fidelity": fidelity,
    });
    emit(&serde_json::to_string_pretty(&doc).expect("json output"), args.out)?;
    Ok(0)
}

fn angle_field(v: &Value, name: &str) -> crate::Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::InvalidSweep(format!("bad {name}"))),
        Value::String(s) => parse_angle(s).map_err(Error::InvalidSweep),
        Value::Null => Err(Error::InvalidSweep(format!("missing {name}"))),
        _ => Err(Error::InvalidSweep(format!("bad {name}"))),
    }
}

fn cmd_sweep(path: PathBuf, out: Option<PathBuf>) -> crate::Result<i32> {
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::InvalidSweep(format!("cannot read {}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidSweep(e.to_string()))?;

    let parameter: SweptParameter = serde_json::from_value(doc["parameter"].clone())
        .map_err(|e| Error::InvalidSweep(format!("parameter: {e}")))?;
    let grid: Vec<f64> = serde_json::from_value(doc["grid"].clone())
        .map_err(|e| Error::InvalidSweep(format!("grid: {e}")))?;
    let fixed = &doc["fixed"];
    let tau = fixed["tau"].as_f64().ok_or_else(|| Error::InvalidSweep("missing fixed.tau".into()))?;
    let psi = angle_field(&fixed["psi"], "fixed.psi")?;
    let chi_t = angle_field(&fixed["chi_t"], "fixed.chi_t")?;
    let alpha = fixed["alpha"]
        .as_f64()
        .ok_or_else(|| Error::InvalidSweep("missing fixed.alpha".into()))?;
    let eta = fixed["eta"].as_f64().unwrap_or(1.0);
    let cavity = CavityParams::new(tau, psi, chi_t)?;

    let (nu_in, trunc) = match (&fixed["beta"], &fixed["nu_in"]) {
        (Value::Number(b), Value::Null) => {
            let beta = b.as_f64().ok_or_else(|| Error::InvalidSweep("bad fixed.beta".into()))?;
            let trunc = match doc["n_max"].as_u64() {
                Some(n) => FockTruncation::new(n as usize),
                None => default_truncation(&cavity, beta * beta),
            };
            (NuInSource::CoherentAmplitude(Complex64::new(beta, 0.0)), trunc)
        }
        (Value::Null, Value::String(p)) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::InvalidDensityMatrix(format!("cannot read {p}: {e}")))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidDensityMatrix(e.to_string()))?;
            let rho = DensityMatrix::from_json(&value)?;
            let trunc = rho.truncation();
            (NuInSource::Explicit(rho), trunc)
        }
        _ => {
            return Err(Error::InvalidSweep(
                "fixed must contain exactly one of beta (number) or nu_in (path)".into(),
            ))
        }
    };

    let target = match doc["target"].as_str() {
        Some(t) => Some(parse_target(t, trunc)?),
        None => None,
    };
    let base = SynthesizerParams::new(cavity, Complex64::new(alpha, 0.0), eta, trunc)?;
    let spec = SweepSpec { parameter, grid, base, nu_in, target };
    let rows = analysis::run_sweep(&spec)?;
    emit(&analysis::sweep_csv(parameter, &rows), out)?;
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> crate::Result<i32> {
    if let Some(tau) = args.tau {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidTau(tau));
        }
    }
    if args.instances == 0 || args.max_alpha <= 0.0 {
        return Err(Error::InvalidSweep("instances and max-alpha must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let trunc = FockTruncation::new(args.n_max);
    let mut worst_state_dev = 0.0f64;
    let mut worst_p_dev = 0.0f64;
    let mut worst_case = String::new();
    let mut failures = 0u32;

    println!("instance  eta   tau        alpha  |dP1|      max|dstate|  status");
    for i in 0..args.instances {
        let alpha = rng.gen_range(0.5..args.max_alpha.max(0.6));
        let beta_mag = rng.gen_range(0.3..2.0);
        let beta_phase = rng.gen_range(0.0..2.0 * PI);
        let tau = args.tau.unwrap_or_else(|| rng.gen_range(1e-3..0.3));
        let psi = rng.gen_range(0.0..2.0 * PI);
        let chi_t = rng.gen_range(0.0..1.0);
        let eta = if i % 2 == 0 { 1.0 } else { 0.2 };

        let cavity = CavityParams::new(tau, psi, chi_t)?;
        let params = SynthesizerParams::new(cavity, Complex64::new(alpha, 0.0), eta, trunc)?;
        let nu_in = coherent_density_matrix(Complex64::from_polar(beta_mag, beta_phase), trunc);

        let cav_dim = (args.max_alpha * args.max_alpha + 8.0 * args.max_alpha + 10.0).ceil() as usize;
        let cav_trunc = FockTruncation::new(cav_dim);
        let state = oracle::build_output_state(&nu_in, &params, (cav_trunc, cav_trunc))?;
        let (rho_oracle, p_oracle) = oracle::oracle_condition(&state, eta)?;
        let (rho_closed, report) = conditional_state(&nu_in, &params)?;

        let p_dev = (p_oracle - report.p_click).abs();
        let mut state_dev = 0.0f64;
        for n in 0..trunc.dim() {
            for m in 0..trunc.dim() {
                state_dev = state_dev.max((rho_oracle.get(n, m) - rho_closed.get(n, m)).norm());
            }
        }
        let ok = p_dev <= 1e-10 && state_dev <= 1e-9;
        if !ok {
            failures += 1;
        }
        if state_dev > worst_state_dev || p_dev > worst_p_dev {
            worst_case = format!(
                "tau={tau:.3e} psi={psi:.3} chi_t={chi_t:.3} alpha={alpha:.3} eta={eta}"
            );
        }
        worst_state_dev = worst_state_dev.max(state_dev);
        worst_p_dev = worst_p_dev.max(p_dev);
        println!(
            "{i:8}  {eta:<4}  {tau:<9.3e}  {alpha:<5.2}  {p_dev:<9.2e}  {state_dev:<11.2e}  {}",
            if ok { "ok" } else { "FAIL" }
        );
    }
    println!(
        "worst |dP1| = {worst_p_dev:.2e}, worst max|dstate| = {worst_state_dev:.2e}"
    );
    if failures > 0 {
        eprintln!("{failures} comparison(s) out of tolerance; worst offender: {worst_case}");
        return Ok(3);
    }
    Ok(0)
}
