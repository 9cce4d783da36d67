//! The `genai-linddun` command line.
//!
//! Exit codes: 0 on success, 1 for validation or analysis errors, 2 for
//! usage errors. Payloads go to stdout or `--out`; diagnostics go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{analyze, AnalysisOptions};
use crate::cam::{self, CamRules};
use crate::domain::DomainHierarchy;
use crate::elicit::ApplicabilityMapping;
use crate::fixtures;
use crate::kb::{KnowledgeBase, ThreatCode};
use crate::model::SystemModel;
use crate::report::{render_tree, ReportFormat, ThreatReport, TreeFormat};
use crate::Error;

pub const KB_ENV: &str = "GENAI_LINDDUN_KB";

#[derive(Debug, Parser)]
#[command(
    name = "genai-linddun",
    version,
    about = "Privacy threat elicitation for GenAI-based architectures"
)]
struct Cli {
    /// Diagnostic output format on stderr.
    #[arg(long, global = true, value_enum, default_value_t = DiagFormat::Text)]
    diag: DiagFormat,
    /// Domain hierarchy file; the bundled hierarchy is used otherwise.
    #[arg(long, global = true, value_name = "H")]
    hierarchy: Option<PathBuf>,
    /// Accept unknown top-level keys in input files.
    #[arg(long, global = true)]
    lenient: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a knowledge base file.
    ValidateKb {
        #[arg(long, env = KB_ENV, value_name = "F")]
        kb: PathBuf,
    },
    /// Check a system model file.
    ValidateModel {
        #[arg(long, value_name = "M")]
        model: PathBuf,
    },
    /// Write the knowledge base filtered to one domain.
    Filter {
        #[arg(long, env = KB_ENV, value_name = "F")]
        kb: PathBuf,
        #[arg(long, value_name = "D")]
        domain: String,
        #[arg(long, value_name = "G")]
        out: Option<PathBuf>,
    },
    /// Render one threat tree per type for a domain.
    Trees {
        #[arg(long, env = KB_ENV, value_name = "F")]
        kb: PathBuf,
        #[arg(long, value_name = "D")]
        domain: String,
        #[arg(long, value_enum)]
        format: TreeFmt,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Elicit threats for a system model and write a report.
    Analyze {
        #[arg(long, env = KB_ENV, value_name = "F")]
        kb: PathBuf,
        #[arg(long, value_name = "M")]
        model: PathBuf,
        #[arg(long, value_name = "D", default_value = "GenAI")]
        domain: String,
        /// Applicability mapping file; the default table is used otherwise.
        #[arg(long, value_name = "P")]
        mapping: Option<PathBuf>,
        /// Append threats for the attacker models detected in the system.
        #[arg(long)]
        with_cams: bool,
        /// CAM detection rules file; the default rules are used otherwise.
        #[arg(long, value_name = "FILE")]
        cam_rules: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: ReportFmt,
        #[arg(long, value_name = "R")]
        out: Option<PathBuf>,
    },
    /// Print the paradigm level, detected CAMs and their matrix rows.
    Cams {
        #[arg(long, value_name = "M")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        cam_rules: Option<PathBuf>,
    },
    /// Re-render an existing JSON report.
    Report {
        #[arg(long = "in", value_name = "R")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ReportFmt,
        #[arg(long, value_name = "OUT")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DiagFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TreeFmt {
    Dot,
    Md,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFmt {
    Json,
    Md,
}

impl From<TreeFmt> for TreeFormat {
    fn from(f: TreeFmt) -> Self {
        match f {
            TreeFmt::Dot => TreeFormat::Dot,
            TreeFmt::Md => TreeFormat::Markdown,
        }
    }
}

impl From<ReportFmt> for ReportFormat {
    fn from(f: ReportFmt) -> Self {
        match f {
            ReportFmt::Json => ReportFormat::Json,
            ReportFmt::Md => ReportFormat::Markdown,
        }
    }
}

#[derive(Debug, Serialize)]
struct Diagnostic {
    code: &'static str,
    message: String,
    path: Option<String>,
}

/// A failure tied to the input file it came from, if any.
struct Failure {
    error: Error,
    path: Option<PathBuf>,
}

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            error: e.into(),
            path: None,
        }
    }
}

trait AtPath<T> {
    fn at(self, path: &Path) -> Result<T, Failure>;
}

impl<T, E: Into<Error>> AtPath<T> for Result<T, E> {
    fn at(self, path: &Path) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            error: e.into(),
            path: Some(path.to_path_buf()),
        })
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let diag = Diagnostic {
                code: f.error.code(),
                message: f.error.to_string(),
                path: f.path.map(|p| p.display().to_string()),
            };
            let line = match cli.diag {
                DiagFormat::Json => serde_json::to_string(&diag).expect("diagnostic serializes"),
                DiagFormat::Text => match &diag.path {
                    Some(p) => format!("error[{}]: {p}: {}", diag.code, diag.message),
                    None => format!("error[{}]: {}", diag.code, diag.message),
                },
            };
            let _ = writeln!(stderr, "{line}");
            1
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut impl Write) -> Result<(), Failure> {
    let strict = !cli.lenient;
    match &cli.command {
        Command::ValidateKb { kb } => {
            let kb = load_kb(cli, kb)?;
            emit(
                stdout,
                None,
                &format!(
                    "ok: {} characteristics, {} examples\n",
                    kb.len(),
                    kb.examples().count()
                ),
            )
        }
        Command::ValidateModel { model } => {
            let m = load_model(model, strict)?;
            emit(
                stdout,
                None,
                &format!(
                    "ok: {} elements, {} flows, {} boundaries\n",
                    m.elements.len(),
                    m.flows.len(),
                    m.boundaries.len()
                ),
            )
        }
        Command::Filter { kb, domain, out } => {
            let kb = load_kb(cli, kb)?;
            let query = kb.hierarchy().get(domain)?;
            emit(stdout, out.as_deref(), &kb.filter(&query)?.to_json())
        }
        Command::Trees {
            kb,
            domain,
            format,
            out_dir,
        } => {
            let kb = load_kb(cli, kb)?;
            let query = kb.hierarchy().get(domain)?;
            let filtered = kb.filter(&query)?;
            let format = TreeFormat::from(*format);
            fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
            for code in ThreatCode::ALL {
                let path = out_dir.join(format!("{code}.{}", format.extension()));
                write_file(&path, &render_tree(&filtered, code, format))?;
            }
            Ok(())
        }
        Command::Analyze {
            kb,
            model,
            domain,
            mapping,
            with_cams,
            cam_rules,
            format,
            out,
        } => {
            let kb = load_kb(cli, kb)?;
            let m = load_model(model, strict)?;
            let query = kb.hierarchy().get(domain)?;
            let mapping = match mapping {
                Some(p) => ApplicabilityMapping::from_json(&read(p)?, strict).at(p)?,
                None => ApplicabilityMapping::default(),
            };
            let cams = match (with_cams, cam_rules) {
                (false, _) => None,
                (true, Some(p)) => Some(load_rules(p)?),
                (true, None) => Some(CamRules::default()),
            };
            let report = analyze(&m, &kb, &query, &AnalysisOptions { mapping, cams })?;
            emit(stdout, out.as_deref(), &report.serialize((*format).into()))
        }
        Command::Cams { model, cam_rules } => {
            let m = load_model(model, strict)?;
            let rules = match cam_rules {
                Some(p) => load_rules(p)?,
                None => CamRules::default(),
            };
            let level = cam::classify_paradigm(&m)?;
            let detected = cam::detect_cams_with(&m, &rules)?;
            let mut text = format!("paradigm: {level} ({})\n", level.description());
            let ids: Vec<String> = detected.iter().map(|c| c.to_string()).collect();
            text.push_str(&format!("cams: {}\n", ids.join(" ")));
            for id in &detected {
                let p = cam::cam_profile(*id);
                text.push_str(&format!(
                    "\n{id} {} (actor: {}; {})\n",
                    p.name,
                    p.actor.label(),
                    p.condition
                ));
                for code in ThreatCode::ALL {
                    text.push_str(&format!(
                        "  {code:<2} {}\n",
                        cam::cam_cell(*id, code).description
                    ));
                }
            }
            emit(stdout, None, &text)
        }
        Command::Report { input, format, out } => {
            let report = ThreatReport::from_json(&read(input)?).at(input)?;
            emit(stdout, out.as_deref(), &report.serialize((*format).into()))
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Failure {
    Failure {
        error: Error::Io {
            path: path.display().to_string(),
            source,
        },
        path: Some(path.to_path_buf()),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn emit(stdout: &mut impl Write, out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn load_hierarchy(cli: &Cli) -> Result<DomainHierarchy, Failure> {
    match &cli.hierarchy {
        Some(p) => DomainHierarchy::from_json(&read(p)?, !cli.lenient).at(p),
        None => Ok(fixtures::hierarchy()),
    }
}

fn load_kb(cli: &Cli, path: &Path) -> Result<KnowledgeBase, Failure> {
    let hierarchy = load_hierarchy(cli)?;
    KnowledgeBase::from_json(&read(path)?, hierarchy, !cli.lenient).at(path)
}

fn load_model(path: &Path, strict: bool) -> Result<SystemModel, Failure> {
    SystemModel::from_json(&read(path)?, strict).at(path)
}

fn load_rules(path: &Path) -> Result<CamRules, Failure> {
    CamRules::from_json(&read(path)?).at(path)
}
