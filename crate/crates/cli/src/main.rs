use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fusion_lab::ruledsl::catalog::{catalog_names, source_text, CatalogError};
use fusion_lab::{FusionError, FusionRule, Limits, ParseError, RuleSource};
use thiserror::Error;

mod commands;
mod json;
mod render;

#[derive(Parser)]
#[command(
    name = "fusion-lab",
    version,
    about = "Exact analysis of fusion tilings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a rule and run structural and ergodicity passes.
    Analyze {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 4)]
        horizon: usize,
        #[command(flatten)]
        passes: Passes,
    },
    /// Expand a supertile into smaller pieces (JSON by default).
    Expand(ExpandArgs),
    /// Draw an expanded supertile (SVG by default).
    Render(ExpandArgs),
    /// Eigenvalue test for a candidate α.
    Spectrum {
        #[command(flatten)]
        rule: RuleArgs,
        /// A number or a tuple such as "(1/3,0)"; entries accept phi terms.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
    /// Complexity, entropy estimate and the zero-entropy bound.
    Entropy {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 8)]
        maxn: usize,
        /// Level whose supertiles are scanned; chosen from `maxn` if absent.
        #[arg(long)]
        harvest: Option<usize>,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
    },
    /// Border forcing, Anderson-Putnam complexes and the Ȟ¹ direct limit (1-D).
    Cohomology {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 4)]
        horizon: usize,
    },
    /// List the built-in rules, or print one as `.fuse` text.
    Catalog {
        name: Option<String>,
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
}

#[derive(Args, Clone, Debug)]
pub struct RuleArgs {
    /// Path to a `.fuse` rule file.
    #[arg(required_unless_present = "catalog", conflicts_with = "catalog")]
    pub file: Option<PathBuf>,
    /// Name of a built-in rule.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Catalog parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, String)>,
}

#[derive(Args, Clone, Copy, Debug)]
pub struct Passes {
    #[arg(long)]
    pub validate: bool,
    #[arg(long)]
    pub matrices: bool,
    #[arg(long)]
    pub primitivity: bool,
    #[arg(long)]
    pub ergodicity: bool,
    #[arg(long)]
    pub constant_length: bool,
}

impl Passes {
    /// No flag selects every pass.
    pub fn or_all(self) -> Passes {
        if self.validate
            || self.matrices
            || self.primitivity
            || self.ergodicity
            || self.constant_length
        {
            self
        } else {
            Passes {
                validate: true,
                matrices: true,
                primitivity: true,
                ergodicity: true,
                constant_length: true,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Svg,
}

#[derive(Args, Clone, Debug)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Level of the supertile.
    #[arg(short = 'n', long)]
    pub level: usize,
    /// Supertile type, by name or index.
    #[arg(short = 'j', long = "type")]
    pub supertile: String,
    /// Level of the pieces to expand into.
    #[arg(long, default_value_t = 0)]
    pub to: usize,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Units per tile length 1 in SVG output.
    #[arg(long, default_value = "20")]
    pub scale: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{origin}:{source}")]
    Parse { origin: String, source: ParseError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Parse { .. } | CliError::Catalog(_) => 1,
            CliError::Fusion(FusionError::ExpansionTooLarge { .. }) => 3,
            CliError::Validation(_) | CliError::Fusion(_) => 2,
        }
    }
}

/// Loads the rule named on the command line and applies `FUSIONLAB_CAP`.
pub fn load_rule(args: &RuleArgs) -> Result<(FusionRule, String), CliError> {
    let params: BTreeMap<String, String> = args.params.iter().cloned().collect();
    let (rule, origin) = match (&args.file, &args.catalog) {
        (_, Some(name)) => (
            fusion_lab::catalog(name, &params)?,
            format!("catalog:{name}"),
        ),
        (Some(path), None) => {
            if !params.is_empty() {
                return Err(CliError::Input(
                    "--param only applies to catalog rules".into(),
                ));
            }
            let origin = path.display().to_string();
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("{origin}: {e}")))?;
            let rule = fusion_lab::parse_rule(&RuleSource::new(text, origin.clone())).map_err(
                |source| CliError::Parse {
                    origin: origin.clone(),
                    source,
                },
            )?;
            (rule, origin)
        }
        (None, None) => return Err(CliError::Input("give a rule file or --catalog NAME".into())),
    };
    let rule = match std::env::var("FUSIONLAB_CAP") {
        Ok(v) => {
            let cap = v.trim().parse::<u64>().map_err(|_| {
                CliError::Input(format!(
                    "FUSIONLAB_CAP must be a positive integer, got `{v}`"
                ))
            })?;
            let limits = Limits {
                expansion_cap: cap,
                ..rule.limits()
            };
            rule.with_limits(limits)
        }
        Err(_) => rule,
    };
    Ok((rule, origin))
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Analyze {
            rule,
            horizon,
            passes,
        } => commands::analyze(&rule, horizon, passes.or_all()),
        Command::Expand(args) => commands::expand(&args, Format::Json),
        Command::Render(args) => commands::expand(&args, Format::Svg),
        Command::Spectrum {
            rule,
            alpha,
            horizon,
        } => commands::spectrum(&rule, &alpha, horizon),
        Command::Entropy {
            rule,
            maxn,
            harvest,
            horizon,
        } => commands::entropy(&rule, maxn, harvest, horizon),
        Command::Cohomology { rule, horizon } => commands::cohomology(&rule, horizon),
        Command::Catalog { name: None, .. } => {
            let names = catalog_names();
            let width = names.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            Ok(names
                .iter()
                .map(|(n, s)| format!("{n:width$}  {s}\n"))
                .collect())
        }
        Command::Catalog {
            name: Some(name),
            params,
        } => Ok(source_text(&name, &params.into_iter().collect())?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("fusion-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
