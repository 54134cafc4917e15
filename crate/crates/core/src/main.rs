use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use casimir_chain::commands::{run, RunOutput};
use casimir_chain::config::{Command, Grid, KappaSpec, OutputFormat, RunConfig};
use casimir_chain::output::{error_json, write_table, Provenance};
use casimir_chain::{Error, Result, SusceptibilityProfile};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProfileKind {
    /// `chi0` on `[0, a]`, vacuum elsewhere.
    Block,
    /// `chi0 sech^2(x/a)`.
    Sech2,
    /// Indices `--n n1,n2,n3` with the middle layer on `[0, a]`.
    ThreeLayer,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Van der Waals forces on scatterer chains, macroscopic force densities
/// and renormalized Casimir stresses.
#[derive(Debug, Parser)]
#[command(name = "casimir-chain", version)]
struct Cli {
    #[arg(value_enum)]
    command: CommandArg,
    /// Read the whole run configuration from a JSON file; other flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
    #[arg(long, value_enum)]
    profile: Option<ProfileKind>,
    #[arg(long)]
    chi0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    /// Layer indices n1,n2,n3.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<f64>>,
    /// Number of particles.
    #[arg(long = "N")]
    particles: Option<usize>,
    /// Polarizabilities; a single value is repeated `N` times.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Chain interval as `start,stop`.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    span: Option<Vec<f64>>,
    #[arg(long, conflicts_with_all = ["kappa_range", "integrated"])]
    kappa: Option<f64>,
    /// `start,stop,count`.
    #[arg(long, value_delimiter = ',', conflicts_with = "integrated")]
    kappa_range: Option<Vec<f64>>,
    /// Space `--kappa-range` geometrically.
    #[arg(long)]
    kappa_log: bool,
    /// Integrate over kappa (macro-density).
    #[arg(long)]
    integrated: bool,
    /// Upper kappa reported for divergent integrals.
    #[arg(long, default_value_t = 200.0)]
    kappa_max: f64,
    /// Positions as `x` or `start,stop,count`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Interface forces instead of densities (three-layer).
    #[arg(long)]
    lifshitz: bool,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    kappa_min_cutoff: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output file, or directory for `figures`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    ChainForce,
    MacroDensity,
    ThreeLayer,
    Sech2,
    RenormStress,
    Figures,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::ChainForce => Command::ChainForce,
            CommandArg::MacroDensity => Command::MacroDensity,
            CommandArg::ThreeLayer => Command::ThreeLayer,
            CommandArg::Sech2 => Command::Sech2,
            CommandArg::RenormStress => Command::RenormStress,
            CommandArg::Figures => Command::Figures,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn build_profile(cli: &Cli, command: Command) -> Result<Option<SusceptibilityProfile>> {
    let kind = match (cli.profile, command) {
        (Some(k), _) => k,
        (None, Command::ThreeLayer) => ProfileKind::ThreeLayer,
        (None, Command::Sech2) => ProfileKind::Sech2,
        (None, _) => return Ok(None),
    };
    let a = cli.a.unwrap_or(1.0);
    let p = match kind {
        ProfileKind::Block => {
            SusceptibilityProfile::block(0.0, a, cli.chi0.ok_or_else(|| config_err("block needs --chi0"))?)
        }
        ProfileKind::Sech2 => SusceptibilityProfile::Sech2 {
            chi0: cli.chi0.ok_or_else(|| config_err("sech2 needs --chi0"))?,
            a: cli.a.ok_or_else(|| config_err("sech2 needs --a"))?,
        },
        ProfileKind::ThreeLayer => match cli.n.as_deref() {
            Some(&[n1, n2, n3]) => SusceptibilityProfile::three_layer(n1, n2, n3, a),
            _ => return Err(config_err("three layers need --n n1,n2,n3")),
        },
    };
    Ok(Some(p))
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        let mut cfg = RunConfig::from_json(&text)?;
        cfg.command = cli.command.into();
        cfg.validate()?;
        return Ok(cfg);
    }
    let command: Command = cli.command.into();
    let mut cfg = RunConfig::new(command);
    cfg.profile = build_profile(cli, command)?;
    cfg.particles = cli.particles;
    cfg.span = match cli.span.as_deref() {
        None => None,
        Some(&[a, b]) => Some([a, b]),
        Some(_) => return Err(config_err("--span takes start,stop")),
    };
    cfg.alphas = match (&cli.alpha, cli.particles) {
        (Some(v), Some(n)) if v.len() == 1 => Some(vec![v[0]; n]),
        (Some(v), Some(n)) if v.len() != n => {
            return Err(config_err(format!("--alpha has {} values but --N is {n}", v.len())))
        }
        (v, _) => v.clone(),
    };
    if cfg.alphas.is_some() {
        cfg.profile = None;
    }
    cfg.kappa = if cli.integrated {
        Some(KappaSpec::Integrated {
            kappa_max: cli.kappa_max,
        })
    } else if let Some(v) = cli.kappa {
        Some(KappaSpec::Single { value: v })
    } else {
        match cli.kappa_range.as_deref() {
            None => None,
            Some(&[start, stop, count]) if count >= 1.0 && count.fract() == 0.0 => Some(KappaSpec::Range {
                start,
                stop,
                count: count as usize,
                log: cli.kappa_log,
            }),
            Some(_) => return Err(config_err("--kappa-range takes start,stop,count")),
        }
    };
    cfg.x = match cli.x.as_deref() {
        None => None,
        Some(&[x]) => Some(Grid::single(x)),
        Some(&[start, stop, count]) if count >= 1.0 && count.fract() == 0.0 => Some(Grid {
            start,
            stop,
            count: count as usize,
        }),
        Some(_) => return Err(config_err("--x takes x or start,stop,count")),
    };
    cfg.lifshitz = cli.lifshitz;
    if let Some(tol) = cli.tol {
        cfg.quad.tol = tol;
    }
    cfg.kappa_min_cutoff = cli.kappa_min_cutoff;
    cfg.threads = cli.threads;
    cfg.out = cli.out.as_ref().map(|p| p.display().to_string());
    cfg.format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    let prov = Provenance::of(cfg);
    let ext = match cfg.format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    match (cfg.command, &cfg.out) {
        (Command::Figures, dir) => {
            let dir = PathBuf::from(dir.as_deref().unwrap_or("figures"));
            fs::create_dir_all(&dir)?;
            for t in &out.tables {
                let mut f = fs::File::create(dir.join(format!("{}.{ext}", t.name)))?;
                write_table(&mut f, t, &prov, cfg.format)?;
            }
        }
        (_, Some(path)) => {
            let mut f = fs::File::create(path)?;
            for t in &out.tables {
                write_table(&mut f, t, &prov, cfg.format)?;
            }
        }
        (_, None) => {
            let mut buf = Vec::new();
            for t in &out.tables {
                write_table(&mut buf, t, &prov, cfg.format)?;
            }
            let mut w = std::io::stdout().lock();
            match w.write_all(&buf).and_then(|_| w.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    match e {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let msg = msg.trim().trim_start_matches("error: ");
            return fail(&Error::Config(msg.lines().next().unwrap_or_default().to_string()));
        }
    };
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if cli.dump_config {
        println!("{}", cfg.to_json());
        return ExitCode::SUCCESS;
    }
    let out = match run(&cfg).and_then(|o| emit(&cfg, &o).map(|_| o)) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if out.incomplete {
        let msg = "some particle forces failed; see the failed column";
        eprintln!(
            "{}",
            serde_json::json!({ "error": { "kind": "incomplete", "message": msg } })
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
