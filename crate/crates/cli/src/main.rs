use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlab_cli::{budget_from_env, cmd_stages, run, CliError, Command, RunSpec, Suite};
use qlab_core::constructible::DefConfig;
use qlab_core::formula::Connectives;
use qlab_core::model::HierarchyTag;

#[derive(Parser)]
#[command(name = "qlab", version, about = "Quantale-valued models of set theory at desk scale")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the quantale axioms and the algebra suite.
    Validate {
        /// Built-in name or JSON table file.
        source: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a hierarchy and dump its stages.
    Stages(Common),
    /// Evaluate a formula over a stage.
    Eval {
        formula: String,
        /// Variable binding such as `a=#3`; repeatable.
        #[arg(long = "bind", value_parser = parse_binding)]
        bindings: Vec<(String, u32)>,
        /// Stage label used as the carrier (default: the last stage).
        #[arg(long)]
        stage: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Paper)]
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum SuiteArg {
    Algebra,
    Paper,
}

#[derive(Copy, Clone, ValueEnum)]
enum HierarchyArg {
    #[value(name = "V")]
    V,
    #[value(name = "frakL")]
    FrakL,
    #[value(name = "bbL")]
    BbL,
    #[value(name = "L")]
    L,
}

#[derive(Args)]
struct Common {
    #[arg(long, short = 'q', default_value = "lukasiewicz:3")]
    quantale: String,
    #[arg(long, default_value_t = 3)]
    alpha: usize,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 1)]
    params: usize,
    #[arg(long)]
    saturate: bool,
    /// Drop strong conjunction from the template language.
    #[arg(long)]
    classical: bool,
    #[arg(long, value_enum, default_value_t = HierarchyArg::FrakL)]
    hierarchy: HierarchyArg,
    /// Comma-separated truth-value labels allowed in `V` stages.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Stage dump: written by `stages`, read by `eval`.
    #[arg(long)]
    dump: Option<PathBuf>,
}

fn parse_binding(s: &str) -> Result<(String, u32), String> {
    let (name, id) = s.split_once('=').ok_or("expected NAME=#ID")?;
    let id = id.trim().trim_start_matches('#').parse().map_err(|_| format!("bad element id in `{s}`"))?;
    Ok((name.trim().to_string(), id))
}

fn spec(command: Command, common: Common) -> Result<RunSpec, CliError> {
    let mut s = RunSpec::new(command, common.quantale);
    s.alpha = common.alpha;
    s.cfg = DefConfig::new(common.depth, common.params);
    s.cfg.saturate = common.saturate;
    if common.classical {
        s.cfg.connectives = Connectives::Classical;
    }
    s.hierarchy = match common.hierarchy {
        HierarchyArg::V => HierarchyTag::V,
        HierarchyArg::FrakL => HierarchyTag::FrakL,
        HierarchyArg::BbL => HierarchyTag::BbL,
        HierarchyArg::L => HierarchyTag::ClassicalL,
    };
    s.values = common.values;
    s.report = common.report;
    s.dump = common.dump;
    s.budget = budget_from_env()?;
    Ok(s)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let s = match cli.command {
            Cmd::Validate { source, mut common } => {
                if let Some(src) = source {
                    common.quantale = src;
                }
                spec(Command::Validate, common)?
            }
            Cmd::Stages(common) => {
                let s = spec(Command::Stages, common)?;
                if s.dump.is_none() {
                    let (report, dump) = cmd_stages(&s)?;
                    print!("{dump}");
                    if let Some(path) = &s.report {
                        qlab_cli::write_atomic(path, &report.to_json())?;
                    }
                    eprint!("{}", report.summary());
                    return Ok(report.exit_code());
                }
                s
            }
            Cmd::Eval { formula, bindings, stage, common } => {
                let mut s = spec(Command::Eval, common)?;
                s.formula = Some(formula);
                s.bindings = bindings;
                s.stage = stage;
                let report = run(&s)?;
                let value = report.result.as_ref().and_then(|r| r.get("value")).cloned().unwrap_or_default();
                println!("{value}");
                return Ok(report.exit_code());
            }
            Cmd::Verify { suite, common } => {
                let mut s = spec(Command::Verify, common)?;
                s.suite = match suite {
                    SuiteArg::Algebra => Suite::Algebra,
                    SuiteArg::Paper => Suite::Paper,
                };
                s
            }
        };
        let report = run(&s)?;
        print!("{}", report.summary());
        Ok::<i32, CliError>(report.exit_code())
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
