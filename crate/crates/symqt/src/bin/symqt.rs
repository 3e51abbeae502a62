//! Command-line surface: model analysis, spectra, operators, transition
//! tables, the interactive triangle experiment and EPR sweeps.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical-residual failure,
//! 4 hypothesis-violation report.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use symqt::error::{Error, Result};
use symqt::measurement::rng_from_seed;
use symqt::model::{analyze, cmat_to_json, ModelDocument};
use symqt::operators::solve_parameter_operator;
use symqt::spectrum::{a_spectrum, verify_spectrum_equivalence};
use symqt::spin::{epr_sweep_csv, Observer};
use symqt::triangle::{TriangleModel, Window};

#[derive(Parser)]
#[command(
    name = "symqt",
    version,
    about = "Symmetry-based quantum reconstruction for finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permissibility analysis of every parameter in a model document.
    Analyze {
        /// Path to the model JSON document.
        model: PathBuf,
    },
    /// Spectrum report for one parameter (both routes, with the
    /// operator-vs-variance verdict).
    Spectrum {
        model: PathBuf,
        parameter: String,
        /// Number of random probe functions for the variance route.
        #[arg(long, default_value_t = 5)]
        probes: usize,
        #[arg(long, default_value_t = 0xA5A5)]
        seed: u64,
    },
    /// Operator associated with a parameter, in the state-space basis.
    Operator {
        model: PathBuf,
        parameter: String,
        /// Value encoding `label=value,...`, or `identity` for the model's
        /// default numeric encoding.
        #[arg(long, default_value = "identity")]
        q_spec: String,
    },
    /// Outcome table of `param_b` measured right after `param_a = value_a`.
    Transition {
        model: PathBuf,
        param_a: String,
        value_a: String,
        param_b: String,
    },
    /// Interactive triangle-in-a-sphere experiment.
    Triangle {
        /// Refuse to open the top window.
        #[arg(long)]
        sealed_top: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// EPR correlation sweep (CSV on stdout).
    Epr {
        /// Comma-separated list of angles in radians.
        #[arg(long, value_delimiter = ',')]
        angles: Option<Vec<f64>>,
        /// Sweep specification `start:stop:step` (radians).
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample from observer B's conditional prior instead of A's.
        #[arg(long)]
        observer_b: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { model } => {
            let doc = ModelDocument::load(&model)?;
            let report = analyze(&doc)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Spectrum {
            model,
            parameter,
            probes,
            seed,
        } => {
            let doc = ModelDocument::load(&model)?;
            let space = doc.build_state_space()?;
            let params = doc.build_parameters()?;
            let theta = params.get(&parameter).ok_or_else(|| Error::UnknownLabel {
                name: parameter.clone(),
                label: "parameter".into(),
            })?;
            let encoding = doc.encoding_for(theta);
            let (report, _) = a_spectrum(theta, &space, &encoding)?;
            let mut rng = rng_from_seed(seed);
            let m = space.action.set_size();
            let probe_fns: Vec<Vec<f64>> = (0..probes)
                .map(|_| {
                    (0..m)
                        .map(|_| rand::Rng::random::<f64>(&mut rng) - 0.5)
                        .collect()
                })
                .collect();
            let verdict = verify_spectrum_equivalence(theta, &space, &encoding, &probe_fns)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "report": report,
                    "spectrum_equivalence": verdict,
                }))?
            );
            if !verdict.ok {
                std::process::exit(3);
            }
        }
        Command::Operator {
            model,
            parameter,
            q_spec,
        } => {
            let doc = ModelDocument::load(&model)?;
            let space = doc.build_state_space()?;
            let params = doc.build_parameters()?;
            let theta = params.get(&parameter).ok_or_else(|| Error::UnknownLabel {
                name: parameter.clone(),
                label: "parameter".into(),
            })?;
            let encoding = parse_q_spec(&q_spec, &doc, theta)?;
            let (report, spectral) = a_spectrum(theta, &space, &encoding)?;
            // containment diagnostics: residual of the full-family solve
            let points: Vec<usize> = (0..space.action.set_size()).collect();
            let targets: Vec<f64> = points
                .iter()
                .map(|&p| {
                    encoding
                        .iter()
                        .find(|(l, _)| l == theta.value(p))
                        .map(|(_, v)| *v)
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let full = solve_parameter_operator(&space.family, &points, &targets)?;
            let op = spectral.operator();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "parameter": parameter,
                    "spectrum": report.spectrum,
                    "prespectrum": report.prespectrum_names,
                    "matrix": cmat_to_json(&op.matrix),
                    "hermitian": op.hermitian,
                    "basis": op.tag.0,
                    "restricted_residual": report.candidates.iter()
                        .find(|c| c.subset == report.prespectrum)
                        .map(|c| c.residual),
                    "containment_residual": full.residual,
                }))?
            );
        }
        Command::Transition {
            model,
            param_a,
            value_a,
            param_b,
        } => {
            let doc = ModelDocument::load(&model)?;
            let params = doc.build_parameters()?;
            let theta_a = params.get(&param_a).ok_or_else(|| Error::UnknownLabel {
                name: param_a.clone(),
                label: "parameter".into(),
            })?;
            let theta_b = params.get(&param_b).ok_or_else(|| Error::UnknownLabel {
                name: param_b.clone(),
                label: "parameter".into(),
            })?;
            let state = symqt::measurement::State::pure(theta_a, &value_a)?;
            let table = state.outcome_distribution(theta_b);
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "from": {"parameter": param_a, "value": value_a},
                    "measure": param_b,
                    "table": table.into_iter().collect::<std::collections::BTreeMap<_, _>>(),
                }))?
            );
        }
        Command::Triangle { sealed_top, seed } => {
            triangle_repl(sealed_top, seed)?;
        }
        Command::Epr {
            angles,
            sweep,
            samples,
            seed,
            observer_b,
        } => {
            let angle_list = match (angles, sweep) {
                (Some(a), None) => a,
                (None, Some(spec)) => parse_sweep(&spec)?,
                _ => {
                    return Err(Error::OutOfRange(
                        "provide exactly one of --angles or --sweep".into(),
                    ))
                }
            };
            if observer_b {
                // same CSV columns, sampled from B's prior
                let mut out = String::from("u,exact,mc_estimate,std_error,n\n");
                for (k, &u) in angle_list.iter().enumerate() {
                    let exact = symqt::spin::epr_correlation_exact(u);
                    let (mc, se, _, _) = symqt::spin::epr_correlation_mc(
                        u,
                        samples,
                        seed.wrapping_add(k as u64),
                        Observer::B,
                    )?;
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        symqt::format_g(u),
                        symqt::format_g(exact),
                        symqt::format_g(mc),
                        symqt::format_g(se),
                        samples
                    ));
                }
                print!("{out}");
            } else {
                let (_, csv) = epr_sweep_csv(&angle_list, samples, seed)?;
                print!("{csv}");
            }
        }
    }
    Ok(())
}

fn parse_q_spec(
    spec: &str,
    doc: &ModelDocument,
    theta: &symqt::parametric::ParametricFunction,
) -> Result<Vec<(String, f64)>> {
    if spec == "identity" {
        return Ok(doc.encoding_for(theta));
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let (label, value) = part.split_once('=').ok_or_else(|| Error::Schema {
            field: "q-spec".into(),
            reason: format!("expected label=value, got `{part}`"),
        })?;
        let value: f64 = value.parse().map_err(|_| Error::Schema {
            field: "q-spec".into(),
            reason: format!("bad number in `{part}`"),
        })?;
        out.push((label.to_string(), value));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Schema {
            field: "sweep".into(),
            reason: "expected start:stop:step".into(),
        });
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Schema {
            field: "sweep".into(),
            reason: "bad number".into(),
        })?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 {
        return Err(Error::Schema {
            field: "sweep".into(),
            reason: "step must be positive".into(),
        });
    }
    let mut out = Vec::new();
    let mut u = start;
    while u <= stop + 1e-12 {
        out.push(u);
        u += step;
    }
    Ok(out)
}

fn triangle_repl(sealed_top: bool, seed: u64) -> Result<()> {
    let mut model = TriangleModel::new(seed, sealed_top)?;
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout();
    println!(
        "triangle experiment (seed {seed}{})",
        if sealed_top { ", sealed top" } else { "" }
    );
    println!("commands: open a|b|c|top, state, history, reset, quit");
    loop {
        print!("> ");
        stdout.flush()?;
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["open", w] => match Window::parse(w) {
                Some(window) => match model.open_window(window) {
                    Ok(record) => {
                        println!("observed {} = {}", record.parameter, record.outcome);
                        print_state(&model);
                    }
                    Err(Error::WindowSealed(msg)) => println!("refused: {msg}"),
                    Err(e) => return Err(e),
                },
                None => println!("unknown window `{w}`; use a, b, c or top"),
            },
            ["state"] => print_state(&model),
            ["history"] => {
                for entry in &model.history {
                    println!("{}", serde_json::to_string(entry)?);
                }
            }
            ["reset"] => {
                model.reset();
                println!("reset to total ignorance");
            }
            ["quit"] | ["exit"] => break,
            [] => {}
            _ => println!("commands: open a|b|c|top, state, history, reset, quit"),
        }
    }
    Ok(())
}

fn print_state(model: &TriangleModel) {
    let dist: Vec<String> = model
        .state
        .distribution
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-12)
        .map(|(i, &p)| format!("{}:{}", i + 1, symqt::format_g_prec(p, 6)))
        .collect();
    println!(
        "state: focus {} = {:?}, positions {{{}}}",
        model.state.focus.name,
        match &model.state.assignment {
            symqt::measurement::Assignment::Pure(v) => v.clone(),
            symqt::measurement::Assignment::Mixed(_) => "mixed".into(),
        },
        dist.join(", ")
    );
}
