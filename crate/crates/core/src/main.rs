use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flagacs::isotropy::Model;
use flagacs::report::{self, ModelPref, ReportError, RunConfig};
use flagacs::rootsys::{Family, LieType};

#[derive(Parser)]
#[command(name = "flagacs", version, about = "Invariant almost complex structures on real flag manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum OneModel {
    NMinus,
    NPlus,
    MTheta,
}

impl From<OneModel> for Model {
    fn from(m: OneModel) -> Model {
        match m {
            OneModel::NMinus => Model::NMinus,
            OneModel::NPlus => Model::NPlus,
            OneModel::MTheta => Model::MTheta,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep families and ranks over all Θ and report the classification.
    Classify {
        #[arg(long, default_value = "A:1-5,B:2-4,C:2-6,D:4-6,G:2")]
        families: String,
        #[arg(long, value_enum, default_value = "default")]
        model: ModelPref,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// skip the Nijenhuis stage
        #[arg(long)]
        no_integrability: bool,
        /// flip one extraspecial sign in the structure constants
        #[arg(long)]
        flip_sign: bool,
    },
    /// Full evidence for one flag.
    Inspect {
        #[arg(long = "type")]
        family: Family,
        #[arg(long)]
        rank: usize,
        /// comma separated simple roots, e.g. "l3-l4,2l4"
        #[arg(long, default_value = "")]
        theta: String,
        #[arg(long, value_enum)]
        model: Option<OneModel>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// enumerate every integrable branch
        #[arg(long)]
        all_solutions: bool,
        /// C_l in m_theta: use the u(l) basis A[k,j], S[k,j]
        #[arg(long)]
        u_basis: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Re-check every certificate in a report.
    Verify { report: PathBuf },
}

fn usage_error(e: &ReportError) -> bool {
    matches!(
        e,
        ReportError::Root(_)
            | ReportError::BadRange(_)
            | ReportError::RankGuard(_)
            | ReportError::Schema(_)
            | ReportError::Json(_)
            | ReportError::Io(_)
    )
}

fn fail(e: ReportError) -> ExitCode {
    eprintln!("error: {}", e);
    ExitCode::from(if usage_error(&e) { 2 } else { 1 })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), ReportError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Classify {
            families,
            model,
            samples,
            seed,
            format,
            out,
            no_integrability,
            flip_sign,
        } => {
            let run = || -> Result<(), ReportError> {
                let cfg = RunConfig {
                    families: report::parse_families(&families)?,
                    model,
                    samples,
                    seed,
                    integrability: !no_integrability,
                    flip_sign,
                };
                let r = report::classify(&cfg)?;
                let text = match format {
                    Format::Json => report::to_json(&r)?,
                    Format::Text => report::to_text(&r),
                };
                emit(&text, out.as_ref())
            };
            match run() {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Cmd::Inspect {
            family,
            rank,
            theta,
            model,
            samples,
            seed,
            all_solutions,
            u_basis,
            format,
        } => {
            let run = || -> Result<(), ReportError> {
                let t = LieType::new(family, rank)?;
                let opts = report::InspectOptions {
                    model: model.map(Model::from),
                    seed,
                    samples,
                    all_solutions,
                    u_basis,
                };
                let r = report::inspect(t, &theta, &opts)?;
                let text = match format {
                    Format::Json => format!("{}\n", serde_json::to_string_pretty(&r)?),
                    Format::Text => report::inspect_text(&r),
                };
                emit(&text, None)
            };
            match run() {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Cmd::Verify { report: path } => {
            let run = || -> Result<report::VerifyOutcome, ReportError> {
                let text = std::fs::read_to_string(&path)?;
                let r = report::from_json(&text)?;
                report::verify_report(&r)
            };
            match run() {
                Ok(v) if v.ok() => {
                    println!("verified {} certificates", v.checked);
                    ExitCode::SUCCESS
                }
                Ok(v) => {
                    for f in &v.failures {
                        println!("FAIL {}", f);
                    }
                    println!("{} of {} checks failed", v.failures.len(), v.checked);
                    ExitCode::from(1)
                }
                Err(e) => fail(e),
            }
        }
    }
}
