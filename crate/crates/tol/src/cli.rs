//! The `tol` command line: `check`, `test`, and `model` subcommands.
//!
//! Exit codes: 0 when everything succeeds and all tests pass, 1 when at
//! least one test fails or errors, 2 for lex/parse/bind/type/conflict
//! errors (and usage errors). Reports go to stdout, diagnostics to stderr.

use crate::binder::{self, BindDiagnostic, Severity};
use crate::conflicts::{self, ConflictDiagnostic};
use crate::dump::render_model_dump;
use crate::frontend::{self, ast};
use crate::metamodel::SealedModel;
use crate::report::{self, ReportFormat};
use crate::resolver::{self, ExecutionPlan, ResolvedTestSets};
use crate::runtime;
use crate::span::SourceMap;
use clap::{Parser, Subcommand, ValueEnum};
use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "tol",
    version,
    about = "Compiler and test runner for the Testable Object Language"
)]
struct TolCli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Parse, bind, type-check, and report conflicts.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Check, then execute every test and print a report.
    Test {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Report format.
        #[arg(long, value_enum, default_value_t)]
        format: FormatArg,
        /// Stop after the first failing or erroring test.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Emit the metamodel as JSON.
    Model {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Emit the full JSON dump instead of a summary.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Plain,
    Tap,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Plain => ReportFormat::Plain,
            FormatArg::Tap => ReportFormat::Tap,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CommandKind {
    Check,
    Test,
    Model,
}

/// Normalized invocation settings.
#[derive(Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub inputs: Vec<PathBuf>,
    pub format: ReportFormat,
    pub fail_fast: bool,
    pub color_output: bool,
}

pub fn run<I>(args: I) -> ExitCode
where
    I: IntoIterator<Item = String>,
{
    let parsed = TolCli::try_parse_from(std::iter::once("tol".to_string()).chain(args));
    let cli = match parsed {
        Ok(cli) => cli,
        Err(err) => {
            // clap renders its own usage text; route errors to stderr and
            // keep exit code 2 for every usage problem.
            let _ = err.print();
            return ExitCode::from(2);
        }
    };
    let color_output =
        std::io::stdout().is_terminal() && std::env::var_os("TOL_NO_COLOR").is_none();
    match cli.command {
        CliCommand::Check { files } => check_command(&RunConfig {
            command: CommandKind::Check,
            inputs: files,
            format: ReportFormat::Plain,
            fail_fast: false,
            color_output,
        }),
        CliCommand::Test {
            files,
            format,
            fail_fast,
        } => test_command(&RunConfig {
            command: CommandKind::Test,
            inputs: files,
            format: format.into(),
            fail_fast,
            color_output,
        }),
        CliCommand::Model { files, json } => model_command(
            &RunConfig {
                command: CommandKind::Model,
                inputs: files,
                format: ReportFormat::Json,
                fail_fast: false,
                color_output,
            },
            json,
        ),
    }
}

/// Everything the subcommands need after the front half of the pipeline.
#[derive(Debug)]
pub struct Compiled {
    pub model: SealedModel,
    pub sets: ResolvedTestSets,
    pub plan: ExecutionPlan,
    pub conflicts: Vec<ConflictDiagnostic>,
    pub type_errors: Vec<BindDiagnostic>,
    pub warnings: Vec<BindDiagnostic>,
    pub sources: SourceMap,
}

enum CompileFailure {
    /// Diagnostics already rendered for stderr.
    Diagnostics(Vec<String>),
}

/// Reads, lexes, parses, binds, applies declared resolutions, resolves
/// test sets, and detects conflicts. All inputs form one compilation unit.
fn compile(inputs: &[PathBuf]) -> Result<Compiled, CompileFailure> {
    let mut texts = Vec::new();
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CompileFailure::Diagnostics(vec![format!("cannot read {}: {e}", path.display())])
        })?;
        texts.push((path.display().to_string(), text));
    }
    compile_texts(&texts)
}

fn compile_texts(texts: &[(String, String)]) -> Result<Compiled, CompileFailure> {
    let mut sources = SourceMap::new();
    let mut packages = Vec::new();
    for (name, text) in texts {
        let file = sources.add(name.clone());
        let tokens = frontend::lex(file, text).map_err(|e| {
            CompileFailure::Diagnostics(vec![format!(
                "{}: error[LexError]: {}",
                sources.display(e.span),
                e.message
            )])
        })?;
        let unit = frontend::parse(&tokens).map_err(|e| {
            CompileFailure::Diagnostics(vec![format!(
                "{}: error[ParseError]: {}",
                sources.display(e.span),
                e.render()
            )])
        })?;
        packages.extend(unit.packages);
    }
    let unit = ast::Unit { packages };

    let (model, warnings) = binder::bind(&unit).map_err(|diags| {
        CompileFailure::Diagnostics(diags.iter().map(|d| d.render(&sources)).collect())
    })?;

    let type_errors = binder::check_type_safety(&model);

    let model = if model.declared_resolutions().is_empty() {
        model
    } else {
        let declared = model.declared_resolutions().to_vec();
        conflicts::apply_resolutions(&model, &declared).map_err(|e| {
            CompileFailure::Diagnostics(vec![format!("error[{}]: {e}", error_code(&e))])
        })?
    };

    let sets = resolver::resolve_sets(&model);
    let plan = resolver::build_plan(&model, &sets);
    let conflicts = conflicts::detect_conflicts(&model, &sets);
    Ok(Compiled {
        model,
        sets,
        plan,
        conflicts,
        type_errors,
        warnings,
        sources,
    })
}

fn error_code(err: &conflicts::ResolutionError) -> &'static str {
    match err {
        conflicts::ResolutionError::UnmatchedResolution { .. } => "UnmatchedResolution",
        conflicts::ResolutionError::InvalidSelection { .. } => "InvalidSelection",
    }
}

fn print_failure(failure: CompileFailure) -> ExitCode {
    let CompileFailure::Diagnostics(messages) = failure;
    for m in messages {
        eprintln!("{m}");
    }
    ExitCode::from(2)
}

/// Prints bind warnings, type errors, and conflicts; true when anything
/// blocks compilation.
fn report_diagnostics(compiled: &Compiled) -> bool {
    for w in &compiled.warnings {
        if w.severity == Severity::Warning {
            eprintln!("{}", w.render(&compiled.sources));
        }
    }
    for d in &compiled.type_errors {
        eprintln!("{}", d.render(&compiled.sources));
    }
    for c in &compiled.conflicts {
        eprintln!("{}", c.render(&compiled.model));
    }
    !compiled.type_errors.is_empty() || !compiled.conflicts.is_empty()
}

fn check_command(config: &RunConfig) -> ExitCode {
    let compiled = match compile(&config.inputs) {
        Ok(c) => c,
        Err(failure) => return print_failure(failure),
    };
    if report_diagnostics(&compiled) {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn test_command(config: &RunConfig) -> ExitCode {
    let compiled = match compile(&config.inputs) {
        Ok(c) => c,
        Err(failure) => return print_failure(failure),
    };
    if report_diagnostics(&compiled) {
        return ExitCode::from(2);
    }
    let outcomes = runtime::run_plan(&compiled.model, &compiled.plan, config.fail_fast);
    let text = report::render(
        &compiled.model,
        &outcomes,
        config.format,
        &compiled.sources,
        config.color_output,
    );
    print!("{text}");
    let (_, failed, errored) = report::tally(&outcomes);
    if failed + errored > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn model_command(config: &RunConfig, json: bool) -> ExitCode {
    let compiled = match compile(&config.inputs) {
        Ok(c) => c,
        Err(failure) => return print_failure(failure),
    };
    let blocked = report_diagnostics(&compiled);
    if json {
        let text = render_model_dump(
            &compiled.model,
            &compiled.sets,
            &compiled.plan,
            &compiled.conflicts,
        );
        print!("{text}");
    } else {
        let classes = compiled.model.classes().len();
        let tests = compiled.plan.steps.len();
        println!(
            "{} packages, {} classes, {} planned test executions, {} conflicts",
            compiled.model.packages().len(),
            classes,
            tests,
            compiled.conflicts.len()
        );
    }
    if blocked {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

/// Library entry for embedding and tests: the full pipeline over
/// in-memory source.
pub fn compile_source(source: &str) -> Result<Compiled, Vec<String>> {
    compile_texts(&[("<memory>".to_string(), source.to_string())])
        .map_err(|CompileFailure::Diagnostics(m)| m)
}
