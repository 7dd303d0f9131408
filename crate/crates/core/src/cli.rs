//! `photonloss` command-line front end.
//!
//! Commands: `verify`, `gate`, `orbit`, `nogo`, `fidelity` and `export`. Codes and
//! networks are given as `builtin:NAME` or as a path to a JSON file. Exit status is
//! 0 on success, 1 when a code or network fails the property being checked and 2
//! for usage, file and parse errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::codes::{builtin_code, transform_code, verify_code_with_tolerance, CodeJson, CodePair};
use crate::linalg::{real, ComplexMatrixJson};
use crate::linopt::{ModeUnitary, UnitaryJson};
use crate::logic::{
    bloch, classify_generator, extract_gate, group_closure, GeneratorClass, NamedUnitary,
    DEFAULT_DEDUP_TOL, DEFAULT_MAX_ELEMS,
};
use crate::loss::{build_recovery, fidelity_curve_with, kraus_json, logical_channel, FidelityCurve};
use crate::random::{random_hermitian, seeded_rng, RNG_NAME};
use crate::{Error, Result, DEFAULT_TOL};

/// Time grid used by `nogo` for the phase check.
pub const NOGO_S_GRID: [f64; 3] = [0.1, 0.7, 2.0];

#[derive(Debug, Clone, Parser)]
#[command(name = "photonloss", version, about = "Photon-loss codes under passive linear optics")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Code source: `builtin:fourphoton`, `builtin:threephoton` or a code JSON file.
    #[arg(long)]
    pub code: String,
    /// Comparison tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the one-photon-loss correctability conditions.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Logical action and leakage of one network.
    Gate {
        #[command(flatten)]
        common: CommonArgs,
        /// Network: `builtin:bs50`, `builtin:phase2:pi/2`, `builtin:tritter3`,
        /// `builtin:phase3:2pi/3`, `builtin:identity:N` or a unitary JSON file.
        #[arg(long)]
        unitary: String,
    },
    /// Close the logical gate group of code-preserving generators and emit the Bloch orbit of |H>.
    Orbit {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated generator networks.
        #[arg(long, value_delimiter = ',', required = true)]
        generators: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_MAX_ELEMS)]
        max_elems: usize,
        /// Gate dedup threshold on 1 - |tr(U^dagger V)|/2.
        #[arg(long, default_value_t = DEFAULT_DEDUP_TOL)]
        dedup_tol: f64,
    },
    /// Sample random Hermitian generators and check the leak-or-phase dichotomy.
    Nogo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Entanglement infidelity of the encoded qubit under uniform photon loss.
    Fidelity {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated damping parameters in [0, 1].
        #[arg(long, default_value = "")]
        gammas: String,
        #[arg(long)]
        corrected: bool,
        #[arg(long)]
        uncorrected: bool,
        /// Also report the worst pure-state infidelity over a Bloch-sphere mesh.
        #[arg(long)]
        worst_case: bool,
        /// Include logical Kraus operators (JSON format only).
        #[arg(long)]
        kraus: bool,
    },
    /// Write a code (optionally after a network) as a code JSON file.
    Export {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        unitary: Option<String>,
    },
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Verify { common }
            | Command::Gate { common, .. }
            | Command::Orbit { common, .. }
            | Command::Nogo { common, .. }
            | Command::Fidelity { common, .. }
            | Command::Export { common, .. } => common,
        }
    }
}

/// Result of one command: exit status plus text for stdout and stderr.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(config) => execute(&config),
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                Outcome {
                    exit_code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    exit_code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            }
        }
    }
}

pub fn execute(config: &RunConfig) -> Outcome {
    let common = config.command.common();
    let result = if !(common.tol > 0.0) {
        Err(Error::InvalidArgument(format!("--tol must be positive, got {}", common.tol)))
    } else {
        dispatch(&config.command)
    };
    match result {
        Ok(report) => {
            let mut outcome = Outcome {
                exit_code: report.exit_code,
                stdout: String::new(),
                stderr: report.note,
            };
            match &common.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, &report.body) {
                        return failure(&Error::Io(e));
                    }
                }
                None => outcome.stdout = report.body,
            }
            outcome
        }
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> Outcome {
    let exit_code = match e {
        Error::NotCorrectable | Error::LeakyGenerator { .. } | Error::SingularG { .. } => 1,
        _ => 2,
    };
    Outcome {
        exit_code,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

struct Report {
    exit_code: i32,
    body: String,
    note: String,
}

impl Report {
    fn json(exit_code: i32, value: &impl Serialize) -> Result<Self> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        Ok(Self {
            exit_code,
            body,
            note: String::new(),
        })
    }
}

fn dispatch(command: &Command) -> Result<Report> {
    let common = command.common();
    let code = load_code(&common.code, common.tol)?;
    match command {
        Command::Verify { .. } => cmd_verify(&code, common),
        Command::Gate { unitary, .. } => cmd_gate(&code, common, unitary),
        Command::Orbit {
            generators,
            max_elems,
            dedup_tol,
            ..
        } => cmd_orbit(&code, common, generators, *max_elems, *dedup_tol),
        Command::Nogo { samples, seed, .. } => cmd_nogo(&code, common, *samples, *seed),
        Command::Fidelity {
            gammas,
            corrected,
            uncorrected,
            worst_case,
            kraus,
            ..
        } => {
            let gammas = parse_gammas(gammas)?;
            let mut modes = Vec::new();
            if *corrected || !*uncorrected {
                modes.push(true);
            }
            if *uncorrected {
                modes.push(false);
            }
            cmd_fidelity(&code, common, &gammas, &modes, *worst_case, *kraus)
        }
        Command::Export { unitary, .. } => {
            let code = match unitary {
                Some(src) => transform_code(&code, &load_unitary(src, common.tol)?.unitary)?,
                None => code,
            };
            Report::json(0, &code.to_json())
        }
    }
}

/// `builtin:NAME` or a code JSON path.
pub fn load_code(source: &str, tol: f64) -> Result<CodePair> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin_code(name);
    }
    let text = read_source(source)?;
    let json: CodeJson = serde_json::from_str(&text)?;
    CodePair::from_json(&json, tol)
}

/// `builtin:NAME` or a unitary JSON path; the name is the builtin or the file stem.
pub fn load_unitary(source: &str, tol: f64) -> Result<NamedUnitary> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return Ok(NamedUnitary::new(name, ModeUnitary::builtin(name)?));
    }
    let text = read_source(source)?;
    let json: UnitaryJson = serde_json::from_str(&text)?;
    let name = Path::new(source)
        .file_stem()
        .map_or_else(|| source.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(NamedUnitary::new(name, ModeUnitary::from_json(&json, tol)?))
}

fn read_source(path: &str) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read `{path}`: {e}")))
}

pub fn parse_gammas(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let g: f64 = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad gamma `{s}`")))?;
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::GammaOutOfRange(g));
            }
            Ok(g)
        })
        .collect()
}

/// `x` rounded to 12 significant digits, printed in shortest form (exponent
/// notation outside `[1e-4, 1e15)`).
pub fn csv_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn cmd_verify(code: &CodePair, common: &CommonArgs) -> Result<Report> {
    let report = verify_code_with_tolerance(code, common.tol)?;
    let value = json!({
        "code": common.code,
        "modes": code.modes(),
        "photons": code.photons(),
        "report": report,
    });
    Report::json(if report.correctable { 0 } else { 1 }, &value)
}

fn cmd_gate(code: &CodePair, common: &CommonArgs, source: &str) -> Result<Report> {
    let net = load_unitary(source, common.tol)?;
    let gate = extract_gate(code, &net.unitary)?;
    let (alpha, beta) = gate.apply(real(0.0), real(1.0));
    let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
    let h_bloch = if norm > common.tol {
        Some(bloch(alpha / norm, beta / norm)?)
    } else {
        None
    };
    let value = json!({
        "code": common.code,
        "unitary": net.name,
        "leakage": gate.leakage,
        "preserves_code": gate.leakage < common.tol,
        "u": ComplexMatrixJson::from_rows(&gate.u),
        "h_image_norm": norm,
        "h_bloch": h_bloch,
    });
    Report::json(0, &value)
}

fn cmd_orbit(
    code: &CodePair,
    common: &CommonArgs,
    sources: &[String],
    max_elems: usize,
    dedup_tol: f64,
) -> Result<Report> {
    let generators = sources
        .iter()
        .map(|s| load_unitary(s, common.tol))
        .collect::<Result<Vec<_>>>()?;
    for (index, g) in generators.iter().enumerate() {
        let leakage = extract_gate(code, &g.unitary)?.leakage;
        if !(leakage < common.tol) {
            return Err(Error::LeakyGenerator {
                index,
                name: g.name.clone(),
                leakage,
            });
        }
    }
    let closure = group_closure(code, &generators, max_elems, dedup_tol.max(common.tol))?;
    let note = format!(
        "group order {} ({}), orbit size {}, generators {}\n",
        closure.order(),
        if closure.saturated { "saturated" } else { "not saturated" },
        closure.orbit.len(),
        closure.generator_names.join(",")
    );
    let mut report = match common.format.unwrap_or(Format::Csv) {
        Format::Json => Report::json(0, &closure.to_json())?,
        Format::Csv => {
            let mut body = String::from("x,y,z,word\n");
            for p in &closure.orbit {
                writeln!(
                    body,
                    "{},{},{},{}",
                    csv_number(p.point.x),
                    csv_number(p.point.y),
                    csv_number(p.point.z),
                    closure.word_label(&closure.words[p.gate])
                )
                .unwrap();
            }
            Report {
                exit_code: 0,
                body,
                note: String::new(),
            }
        }
    };
    report.note = note;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct NogoReport<'a> {
    code: &'a str,
    rng: &'static str,
    seed: u64,
    samples: usize,
    s_grid: [f64; 3],
    tolerance: f64,
    max_projection_residual: Option<f64>,
    max_lambda_imag: Option<f64>,
    leaky: usize,
    phase_only: usize,
    violations: usize,
    contract_holds: bool,
}

fn cmd_nogo(code: &CodePair, common: &CommonArgs, samples: usize, seed: u64) -> Result<Report> {
    let mut rng = seeded_rng(seed);
    let mut max_residual: Option<f64> = None;
    let mut max_imag: Option<f64> = None;
    let (mut leaky, mut phase_only, mut violations) = (0, 0, 0);
    for _ in 0..samples {
        let lambda = random_hermitian(code.modes(), &mut rng);
        let (record, class) = classify_generator(code, &lambda, &NOGO_S_GRID)?;
        max_residual = Some(max_residual.unwrap_or(0.0).max(record.projection_residual));
        max_imag = Some(max_imag.unwrap_or(0.0).max(record.lambda_imag.abs()));
        match class {
            GeneratorClass::Leaky { .. } => leaky += 1,
            GeneratorClass::PhaseOnly { .. } => phase_only += 1,
            GeneratorClass::Violation { .. } => violations += 1,
        }
    }
    let contract_holds = violations == 0 && max_residual.is_none_or(|r| r < common.tol);
    let report = NogoReport {
        code: &common.code,
        rng: RNG_NAME,
        seed,
        samples,
        s_grid: NOGO_S_GRID,
        tolerance: common.tol,
        max_projection_residual: max_residual,
        max_lambda_imag: max_imag,
        leaky,
        phase_only,
        violations,
        contract_holds,
    };
    Report::json(if contract_holds { 0 } else { 1 }, &report)
}

fn cmd_fidelity(
    code: &CodePair,
    common: &CommonArgs,
    gammas: &[f64],
    modes: &[bool],
    worst_case: bool,
    with_kraus: bool,
) -> Result<Report> {
    if modes.contains(&true) {
        // fail early on codes without a recovery
        build_recovery(code)?;
    }
    let curves = modes
        .iter()
        .map(|&corrected| fidelity_curve_with(code, gammas, corrected, worst_case))
        .collect::<Result<Vec<FidelityCurve>>>()?;
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let labelled = curves.len() > 1;
            let mut body = String::new();
            if labelled {
                body.push_str("curve,");
            }
            body.push_str("gamma,one_minus_F,leakage_weight");
            if worst_case {
                body.push_str(",worst_one_minus_F");
            }
            body.push('\n');
            for curve in &curves {
                for p in &curve.points {
                    if labelled {
                        body.push_str(if curve.corrected { "corrected," } else { "uncorrected," });
                    }
                    write!(
                        body,
                        "{},{},{}",
                        csv_number(p.gamma),
                        csv_number(p.one_minus_f),
                        csv_number(p.leakage_weight)
                    )
                    .unwrap();
                    if let Some(w) = p.worst_one_minus_f {
                        write!(body, ",{}", csv_number(w)).unwrap();
                    }
                    body.push('\n');
                }
            }
            Ok(Report {
                exit_code: 0,
                body,
                note: String::new(),
            })
        }
        Format::Json => {
            let mut out = Vec::new();
            for curve in &curves {
                let mut entry = serde_json::to_value(curve)?;
                if with_kraus {
                    let sets = gammas
                        .iter()
                        .map(|&g| {
                            let ch = logical_channel(code, g, curve.corrected)?;
                            Ok(json!({ "gamma": g, "kraus": kraus_json(&ch) }))
                        })
                        .collect::<Result<Vec<Value>>>()?;
                    entry["logical_kraus"] = Value::Array(sets);
                }
                out.push(entry);
            }
            Report::json(0, &json!({ "code": common.code, "curves": out }))
        }
    }
}
