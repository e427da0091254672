//! Batch command-line interface: classification of projective
//! automorphisms, Riccati normal-form checks, holonomy extraction and
//! synthesis verification, all over versioned JSON reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde_json::Value;

use riccati::classify::{classify, ProjMap};
use riccati::holonomy::{
    holonomy_generators, numeric_holonomy, verify_synthesis, HolonomyError, LiftOptions,
    SynthesisOptions,
};
use riccati::matrix::{Mat3, MatrixError, C64};
use riccati::normal_form::{check_riccati_cn, check_riccati_cp2, invariant_fibers};
use riccati::report::{
    self, matrix_back, ClassificationReport, FieldDto, GeneratorsReport, HolonomyReport, LoopDto,
    MatrixDto, NormalFormReport, SynthesisReportDto,
};

const EXIT_OK: u8 = 0;
const EXIT_PARSE: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_REJECTED: u8 = 3;
const EXIT_INTEGRATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "riccati",
    about = "Riccati foliations on the projective-plane bundle: classify fiber automorphisms, check polynomial normal forms, extract holonomy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a projective automorphism given as a 3x3 complex matrix.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol_eigen: f64,
    },
    /// Check a polynomial vector field against the Riccati normal form.
    Check {
        #[arg(long)]
        input: PathBuf,
        /// Target geometry: "cp2" or "cn".
        #[arg(long, default_value = "cp2")]
        target: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lift a loop (or automatic generator loops) through the field.
    Holonomy {
        #[arg(long)]
        input: PathBuf,
        /// Loop JSON file; omit with --auto-generators.
        #[arg(long, value_name = "FILE", conflicts_with = "auto_generators")]
        r#loop: Option<PathBuf>,
        /// Build one loop per invariant fiber automatically.
        #[arg(long)]
        auto_generators: bool,
        /// Base point "re,im" for automatic generators.
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol_int: f64,
        #[arg(long, default_value_t = 1e-7)]
        tol_fit: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Verify the synthesis data for a list of generator matrices.
    Synthesize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol_int: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol_eigen: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Validate a report file against its shipped schema.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("RICCATI_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            classify_error(&err)
        }
    };
    ExitCode::from(code)
}

fn classify_error(err: &anyhow::Error) -> u8 {
    if let Some(m) = err.downcast_ref::<MatrixError>() {
        return match m {
            MatrixError::DegenerateMatrix { .. } => EXIT_DEGENERATE,
            _ => EXIT_PARSE,
        };
    }
    if let Some(h) = err.downcast_ref::<HolonomyError>() {
        return match h {
            HolonomyError::PoleOnPath
            | HolonomyError::IntegrationFailure { .. }
            | HolonomyError::RoutingFailure { .. } => EXIT_INTEGRATION,
            HolonomyError::UnclassifiableGenerator { .. } => EXIT_DEGENERATE,
            HolonomyError::NotRiccati { .. } => EXIT_REJECTED,
            _ => EXIT_PARSE,
        };
    }
    EXIT_PARSE
}

fn read_json(path: &PathBuf) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn emit<T: serde::Serialize>(value: &T, output: Option<&PathBuf>) -> anyhow::Result<()> {
    let text = report::to_json_string(value)?;
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_complex_pair(text: &str) -> anyhow::Result<C64> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        anyhow::bail!("expected \"re,im\", got {text}");
    }
    Ok(Complex64::new(
        parts[0].trim().parse()?,
        parts[1].trim().parse()?,
    ))
}

fn parse_matrix(value: &Value) -> anyhow::Result<Mat3> {
    // Accept either the bare nested array or {"matrix": ...}.
    let raw = value.get("matrix").unwrap_or(value);
    let dto: MatrixDto = serde_json::from_value(raw.clone())?;
    Ok(matrix_back(&dto))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Classify {
            input,
            output,
            tol_eigen,
        } => {
            let value = read_json(&input)?;
            let matrix = parse_matrix(&value)?;
            let map = ProjMap::new(matrix)?;
            let classification = classify(&map, tol_eigen)?;
            let report = ClassificationReport::from_classification(&classification);
            emit(&report, output.as_ref())?;
            Ok(EXIT_OK)
        }
        Command::Check {
            input,
            target,
            output,
        } => {
            let value = read_json(&input)?;
            let dto: FieldDto = serde_json::from_value(value)?;
            let field = dto.into_field()?;
            let (report, accepted) = match target.as_str() {
                "cp2" => match check_riccati_cp2(&field)? {
                    Ok(form) => {
                        let fibers = invariant_fibers(&form.p, &field)?;
                        (NormalFormReport::accepted_cp2(&form, &fibers), true)
                    }
                    Err(rej) => (NormalFormReport::rejected("cp2", &rej), false),
                },
                "cn" => {
                    let n = field.arity().saturating_sub(1);
                    match check_riccati_cn(&field, n)? {
                        Ok(form) => {
                            let fibers = invariant_fibers(&form.p, &field)?;
                            (NormalFormReport::accepted_cn(&form, &fibers), true)
                        }
                        Err(rej) => {
                            (NormalFormReport::rejected(&format!("cn{n}"), &rej), false)
                        }
                    }
                }
                other => anyhow::bail!("unknown target {other}; use cp2 or cn"),
            };
            emit(&report, output.as_ref())?;
            Ok(if accepted { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Holonomy {
            input,
            r#loop,
            auto_generators,
            base,
            output,
            tol_int,
            tol_fit,
            seed,
            samples,
        } => {
            let value = read_json(&input)?;
            let dto: FieldDto = serde_json::from_value(value)?;
            let field = dto.into_field()?;
            let opts = LiftOptions {
                n_samples: samples,
                tol: tol_int,
                seed,
                ..LiftOptions::default()
            };
            if auto_generators {
                let base = parse_complex_pair(
                    base.as_deref()
                        .ok_or_else(|| anyhow::anyhow!("--auto-generators requires --base"))?,
                )?;
                let gens = holonomy_generators(&field, base, &opts)?;
                let report = GeneratorsReport::from_generators(base, &gens);
                for g in &report.generators {
                    if g.residual > tol_fit {
                        log::warn!(
                            "generator residual {} above the fit tolerance {tol_fit}",
                            g.residual
                        );
                    }
                }
                emit(&report, output.as_ref())?;
                Ok(EXIT_OK)
            } else {
                let loop_path = r#loop
                    .ok_or_else(|| anyhow::anyhow!("provide --loop or --auto-generators"))?;
                let loop_value = read_json(&loop_path)?;
                let loop_dto: LoopDto = serde_json::from_value(loop_value)?;
                let lp = loop_dto.into_loop()?;
                let result = numeric_holonomy(&field, &lp, &opts)?;
                if result.residual > tol_fit {
                    log::warn!(
                        "holonomy residual {} above the fit tolerance {tol_fit}",
                        result.residual
                    );
                }
                let report = HolonomyReport::from_result(&result, None);
                emit(&report, output.as_ref())?;
                Ok(EXIT_OK)
            }
        }
        Command::Synthesize {
            input,
            output,
            tol_int,
            tol_eigen,
            seed,
        } => {
            let value = read_json(&input)?;
            let list = value
                .as_array()
                .ok_or_else(|| anyhow::anyhow!("expected a JSON array of 3x3 matrices"))?;
            let mut gens = Vec::with_capacity(list.len());
            for entry in list {
                gens.push(ProjMap::new(parse_matrix(entry)?)?);
            }
            let opts = SynthesisOptions {
                lift: LiftOptions {
                    tol: tol_int,
                    seed,
                    ..LiftOptions::default()
                },
                eigen_tol: tol_eigen,
                ..SynthesisOptions::default()
            };
            let report = verify_synthesis(&gens, &opts)?;
            let dto = SynthesisReportDto::from_report(&report);
            emit(&dto, output.as_ref())?;
            Ok(if report.passed { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Report { input } => {
            let value = read_json(&input)?;
            match report::validate_report(&value) {
                Ok(kind) => {
                    println!("valid {kind} report (schema {})", report::SCHEMA_VERSION);
                    Ok(EXIT_OK)
                }
                Err(msg) => {
                    eprintln!("invalid report: {msg}");
                    Ok(EXIT_PARSE)
                }
            }
        }
    }
}
