use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use legnet::pipeline::{rerender_report, run, PipelineError, RunConfig, Stage};

/// Statistical analysis of directed weighted interaction networks.
///
/// Exit status: 0 success, 2 configuration error, 3 data error,
/// 4 estimation failure, 1 output failure.
#[derive(Parser)]
#[command(name = "legnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Edge list (`source,target,weight` CSV or upstream JSON).
    #[arg(long, global = true, value_name = "PATH")]
    edges: Option<PathBuf>,
    /// Node attribute CSV.
    #[arg(long, global = true, value_name = "PATH")]
    attrs: Option<PathBuf>,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for the report bundle.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// ERGM models to fit.
    #[arg(long, global = true, value_name = "NAME[,NAME...]", value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Range of community counts searched by the block model.
    #[arg(long, global = true, value_name = "A:B", value_parser = parse_range)]
    q_range: Option<(usize, usize)>,
    /// Restarts per community count.
    #[arg(long, global = true, value_name = "N")]
    restarts: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load and validate inputs; census and exports.
    Ingest,
    /// Centralities, density family, triads and cliques.
    Topology,
    /// Assortativity of attributes and structural metrics.
    Assort,
    /// Fit the ERGM roster.
    Ergm,
    /// Fit block models and select the number of communities.
    Sbm,
    /// Agreement between the block partition and attribute partitions.
    Score,
    /// Re-render the summary and manifest of an existing bundle.
    Report,
    /// Every stage.
    Run,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected A:B")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if a == 0 || a > b {
        return Err(format!("invalid range {a}:{b}"));
    }
    Ok((a, b))
}

fn build_config(command: Command, c: &Common) -> Result<RunConfig, PipelineError> {
    let mut config = match &c.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &c.edges {
        config.edges = Some(p.clone());
    }
    if let Some(p) = &c.attrs {
        config.attributes = Some(p.clone());
    }
    if let Some(p) = &c.out {
        config.out = Some(p.clone());
    }
    if let Some(s) = c.seed {
        config.seed = s;
    }
    if c.threads.is_some() {
        config.threads = c.threads;
    }
    if let Some(m) = &c.models {
        config.ergm.models = m.clone();
    }
    if let Some((a, b)) = c.q_range {
        config.sbm.q_min = a;
        config.sbm.q_max = b;
    }
    if let Some(r) = c.restarts {
        config.sbm.restarts = r;
    }
    let only = |s: Stage| vec![Stage::Ingest, s];
    match command {
        Command::Ingest => config.stages = vec![Stage::Ingest],
        Command::Topology => config.stages = only(Stage::Topology),
        Command::Assort => config.stages = only(Stage::Assortativity),
        Command::Ergm => config.stages = only(Stage::Ergm),
        Command::Sbm => config.stages = only(Stage::Sbm),
        Command::Score => config.stages = only(Stage::Score),
        Command::Run | Command::Report => {}
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    if let Command::Report = cli.command {
        let out = match (&cli.common.out, &cli.common.config) {
            (Some(o), _) => o.clone(),
            (None, Some(path)) => RunConfig::from_file(path)?
                .out
                .ok_or_else(|| PipelineError::Config("no output directory given".into()))?,
            (None, None) => return Err(PipelineError::Config("report needs --out".into())),
        };
        let manifest = rerender_report(&out)?;
        println!("{}: {} files", out.display(), manifest.outputs.len());
        return Ok(());
    }
    let config = build_config(cli.command, &cli.common)?;
    let bundle = run(&config)?;
    println!("{}: stages {}", bundle.root.display(), bundle.manifest.stages.join(","));
    for n in &bundle.manifest.notices {
        println!("notice: {n}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
