//! Command-line front end.
//!
//! Exit codes follow a fixed contract: 0 success, 1 input/usage error,
//! 2 analysis-negative (no certificate found, invalid certificate,
//! path-incomplete, empty rate gap).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::automata::{PathCompleteness, SwitchingSignal, Transition};
use crate::certificate::{self, Certificate, ValidationReport};
use crate::error::{Error, Result};
use crate::feasibility::{self, FeasibilityOutcome};
use crate::rates::{propose_rates, validate_rates, RateAssignment, RateProposal};
use crate::simulate::{decay_estimate, periodic_splitting, simulate, trajectory_csv};
use crate::system::{self, automaton_from_path, parse_scalar, parse_scalar_str, SwitchingSystem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "domcert",
    about = "Path-complete p-dominance analysis for constrained switching linear systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propose rates, solve the transition inequalities and write a
    /// validated dominance certificate.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        /// Dominance degree (number of dominant modes).
        #[arg(long)]
        p: usize,
        /// `auto` or a path to a rate file (array of {from,label,to,gamma}).
        #[arg(long, default_value = "auto")]
        rates: String,
        /// Required contraction margin.
        #[arg(long, default_value_t = feasibility::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Certificate output path.
        #[arg(long, default_value = "certificate.json")]
        out: PathBuf,
        /// Seed (defaults to DOMCERT_SEED, then 0).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = feasibility::DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Re-validate a certificate against a system file.
    Check {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Report elementary cycles, their spectra, the admissible rate
    /// intervals and a proposed assignment.
    Rates {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        p: usize,
    },
    /// Simulate a trajectory and optionally estimate the dominated-
    /// splitting decay rate.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        /// `periodic:<labels>` or `file:<path>` (comma/whitespace labels).
        #[arg(long)]
        signal: String,
        /// Initial state, comma-separated (fractions allowed).
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// With a periodic signal: compute fibers at the certificate's
        /// degree and report the ratio decay fit.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Decide whether the candidate automaton realizes every label word of
    /// the language automaton.
    Pathcomplete {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        automaton: PathBuf,
    },
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successes, everything else is a usage error
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn default_seed(seed: Option<u64>) -> u64 {
    seed.or_else(|| std::env::var("DOMCERT_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Analyze { system, p, rates, epsilon, out, seed, max_iters } => {
            cmd_analyze(&system, p, &rates, epsilon, &out, default_seed(seed), max_iters)
        }
        Command::Check { system, certificate } => cmd_check(&system, &certificate),
        Command::Rates { system, p } => cmd_rates(&system, p),
        Command::Simulate { system, signal, x0, steps, certificate, out_dir } => {
            cmd_simulate(&system, &signal, &x0, steps, certificate.as_deref(), &out_dir)
        }
        Command::Pathcomplete { language, automaton } => cmd_pathcomplete(&language, &automaton),
    }
}

fn cmd_analyze(
    system_path: &Path,
    p: usize,
    rates_flag: &str,
    epsilon: f64,
    out: &Path,
    seed: u64,
    max_iters: usize,
) -> Result<i32> {
    let system = SwitchingSystem::from_path(system_path)?.trimmed()?;
    println!(
        "system: n = {}, {} modes, {} automaton states (trimmed)",
        system.dim(),
        system.mode_count(),
        system.automaton().states().len()
    );

    let rates = if rates_flag == "auto" {
        match propose_rates(&system, p)? {
            RateProposal::Feasible(r) => r,
            RateProposal::Infeasible { binding, reason } => {
                println!("no admissible rates: {reason}");
                for c in &binding {
                    println!("  binding cycle: {c}");
                }
                return Ok(EXIT_NEGATIVE);
            }
        }
    } else {
        rates_from_path(Path::new(rates_flag))?
    };
    for (t, gamma) in rates.iter() {
        println!("rate {t}: {gamma}");
    }

    let checks = validate_rates(&system, p, &rates)?;
    let mut rates_ok = true;
    for c in &checks {
        if !c.ok() {
            rates_ok = false;
            println!(
                "cycle {} violates the rate condition: product {:.6} not strictly inside ({:.6}, {:.6})",
                c.cycle, c.rate_product, c.interval.0, c.interval.1
            );
        }
    }
    if !rates_ok {
        return Ok(EXIT_NEGATIVE);
    }

    let problem = feasibility::assemble(&system, p, &rates, epsilon, feasibility::DEFAULT_RADIUS)?;
    match feasibility::solve(&problem, max_iters, seed)? {
        FeasibilityOutcome::NotFound { iterations, ln_volume_ratio, most_violated } => {
            println!(
                "no certificate found after {iterations} iterations (ln volume ratio {ln_volume_ratio:.1}); most violated: {most_violated}"
            );
            Ok(EXIT_NEGATIVE)
        }
        outcome @ FeasibilityOutcome::Feasible { .. } => {
            let cert = Certificate::from_outcome(&system, p, epsilon, &rates, &outcome)?;
            let report = certificate::validate(&system, &cert)?;
            print_report(&report);
            if !report.valid {
                return Ok(EXIT_NEGATIVE);
            }
            std::fs::write(out, cert.serialize()?)?;
            println!("certificate written to {}", out.display());
            Ok(EXIT_OK)
        }
    }
}

fn print_report(report: &ValidationReport) {
    for t in &report.transitions {
        println!(
            "transition {}: gamma = {}, residual max eigenvalue = {:.6e} [{}]",
            t.transition,
            t.gamma,
            t.max_eigenvalue,
            if t.margin_ok && t.rate_ok && t.ordering_ok { "ok" } else { "FAIL" }
        );
    }
    for s in &report.states {
        println!(
            "state {}: inertia ({}, {}, {}) [{}]",
            s.state,
            s.inertia.neg,
            s.inertia.zero,
            s.inertia.pos,
            if s.inertia_ok { "ok" } else { "FAIL" }
        );
    }
    println!("verdict: {}", if report.valid { "valid" } else { "INVALID" });
    for f in &report.failures {
        println!("  failure: {f}");
    }
}

fn cmd_check(system_path: &Path, cert_path: &Path) -> Result<i32> {
    let system = SwitchingSystem::from_path(system_path)?.trimmed()?;
    let cert = Certificate::from_path(cert_path)?;
    let report = certificate::validate(&system, &cert)?;
    print_report(&report);
    // an invalid certificate is a bad input, not a negative analysis
    Ok(if report.valid { EXIT_OK } else { EXIT_INPUT })
}

fn cmd_rates(system_path: &Path, p: usize) -> Result<i32> {
    let system = SwitchingSystem::from_path(system_path)?.trimmed()?;
    let spectra = crate::rates::cycle_spectra(&system)?;
    for s in &spectra {
        let (lo, hi) = s.gap_interval(p)?;
        let mags: Vec<String> = s.magnitudes.iter().map(|m| format!("{m:.6}")).collect();
        println!(
            "cycle {}: spectrum magnitudes [{}], admissible interval ({lo:.6}, {hi:.6})",
            s.cycle,
            mags.join(", ")
        );
    }
    match propose_rates(&system, p)? {
        RateProposal::Feasible(rates) => {
            for (t, gamma) in rates.iter() {
                println!("proposed rate {t}: {gamma:.6}");
            }
            Ok(EXIT_OK)
        }
        RateProposal::Infeasible { binding, reason } => {
            println!("no admissible rates: {reason}");
            for c in &binding {
                println!("  binding cycle: {c}");
            }
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn cmd_simulate(
    system_path: &Path,
    signal_spec: &str,
    x0_spec: &str,
    steps: usize,
    cert_path: Option<&Path>,
    out_dir: &Path,
) -> Result<i32> {
    let system = SwitchingSystem::from_path(system_path)?.trimmed()?;
    let signal = parse_signal(signal_spec)?;
    let x0 = parse_x0(x0_spec)?;
    let trajectory = simulate(&system, &signal, &x0, steps)?;

    let mut ratios = None;
    if let Some(cert_path) = cert_path {
        let cert = Certificate::from_path(cert_path)?;
        let report = certificate::validate(&system, &cert)?;
        if !report.valid {
            println!("certificate is invalid; refusing the decay estimate");
            return Ok(EXIT_NEGATIVE);
        }
        if signal.period().is_some() {
            let splitting = periodic_splitting(&system, &signal, cert.p)?;
            let est = decay_estimate(&system, &signal, &splitting, &x0, steps)?;
            println!(
                "decay fit: rho = {:.6}, C = {:.6}, log-space residual = {:.3e}, pointwise bound {}",
                est.rho,
                est.c,
                est.fit_residual,
                if est.pointwise_ok { "holds" } else { "VIOLATED" }
            );
            ratios = Some(est.ratios);
        } else {
            println!("signal is not periodic; skipping the decay estimate");
        }
    }

    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join("trajectory.csv");
    std::fs::write(&path, trajectory_csv(&trajectory, ratios.as_deref()))?;
    println!("trajectory written to {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_pathcomplete(language_path: &Path, candidate_path: &Path) -> Result<i32> {
    let language = automaton_from_path(language_path)?;
    let candidate = automaton_from_path(candidate_path)?;
    match crate::automata::path_complete_check(&language, &candidate)? {
        PathCompleteness::Complete => {
            println!("complete");
            Ok(EXIT_OK)
        }
        PathCompleteness::Counterexample(word) => {
            let word: Vec<String> = word.iter().map(|l| l.to_string()).collect();
            println!("counterexample word: {}", word.join(" "));
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn parse_signal(spec: &str) -> Result<SwitchingSignal> {
    if let Some(labels) = spec.strip_prefix("periodic:") {
        SwitchingSignal::periodic(parse_labels(labels)?)
    } else if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path)?;
        SwitchingSignal::finite(parse_labels(&text)?)
    } else {
        Err(Error::InvalidInput(format!(
            "signal spec must be `periodic:<labels>` or `file:<path>`, got `{spec}`"
        )))
    }
}

fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad mode label `{s}`")))
        })
        .collect()
}

fn parse_x0(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| parse_scalar_str(s.trim()))
        .collect()
}

/// Rate file: array of objects {from, label, to, gamma}; gamma accepts
/// decimals and simple fractions ("3/4").
pub fn rates_from_path(path: &Path) -> Result<RateAssignment> {
    let text = std::fs::read_to_string(path)?;
    rates_from_json_str(&text)
}

pub fn rates_from_json_str(text: &str) -> Result<RateAssignment> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let entries = value
        .as_array()
        .ok_or_else(|| Error::Parse("rate file must be a JSON array".into()))?;
    let mut rates = BTreeMap::new();
    for entry in entries {
        let obj = entry
            .as_object()
            .ok_or_else(|| Error::Parse("rate entry must be an object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "from" | "label" | "to" | "gamma") {
                return Err(Error::Parse(format!("unknown rate field `{key}`")));
            }
        }
        let get = |k: &str| {
            obj.get(k)
                .ok_or_else(|| Error::Parse(format!("rate entry missing `{k}`")))
        };
        let from = get("from")?
            .as_str()
            .ok_or_else(|| Error::Parse("rate `from` must be a string".into()))?;
        let to = get("to")?
            .as_str()
            .ok_or_else(|| Error::Parse("rate `to` must be a string".into()))?;
        let label = get("label")?
            .as_u64()
            .ok_or_else(|| Error::Parse("rate `label` must be a positive integer".into()))?
            as usize;
        let gamma = parse_scalar(get("gamma")?)?;
        let t = Transition::new(from, label, to);
        if rates.insert(t.clone(), gamma).is_some() {
            return Err(Error::Parse(format!("duplicate rate for transition {t}")));
        }
    }
    RateAssignment::new(rates)
}

/// Render a fixture system to its JSON file form (used by examples and
/// tests to produce self-contained inputs).
pub fn write_system_json(system: &SwitchingSystem, path: &Path) -> Result<()> {
    std::fs::write(path, system::to_json_string(system)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_specs() {
        let s = parse_signal("periodic:2,1,3").unwrap();
        assert_eq!(s.period(), Some(3));
        assert!(parse_signal("loop:1").is_err());
    }

    #[test]
    fn x0_accepts_fractions() {
        assert_eq!(parse_x0("1/2, -0.25").unwrap(), vec![0.5, -0.25]);
        assert!(parse_x0("one").is_err());
    }

    #[test]
    fn rate_file_parsing() {
        let text = r#"[
            {"from": "a", "label": 2, "to": "a", "gamma": "3/4"},
            {"from": "a", "label": 1, "to": "b", "gamma": 0.25}
        ]"#;
        let rates = rates_from_json_str(text).unwrap();
        assert_eq!(rates.get(&Transition::new("a", 2, "a")).unwrap(), 0.75);
        assert_eq!(rates.get(&Transition::new("a", 1, "b")).unwrap(), 0.25);
        assert!(rates_from_json_str(r#"[{"from":"a","label":1,"to":"a","rate":1}]"#).is_err());
    }

    #[test]
    fn usage_error_exits_one() {
        assert_eq!(run(["domcert", "analyze"]), EXIT_INPUT);
        assert_eq!(run(["domcert", "--help"]), EXIT_OK);
    }
}
