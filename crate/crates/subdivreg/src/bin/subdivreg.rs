//! Command-line front end: run analyses from JSON configs, bound matrix
//! families from dump files, sample limit functions, and print defect
//! tables. Exit codes: 0 completed, 1 usage error, 2 runtime error.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use subdivreg::cascade::{basic_limit_samples, write_csv};
use subdivreg::config::{parse_config, resolve, AnalysisConfig, ResolvedConfig, RunKind};
use subdivreg::jsr::{jsr_with_options, JsrOptions, MatrixSet};
use subdivreg::regularity::AnalysisOptions;
use subdivreg::report::{self, DefectsDoc};
use subdivreg::symbol::{approximate_sum_rule_verdict, defect_sequence};
use subdivreg::transition::read_matrices;
use subdivreg::{Error, Result};

#[derive(Parser)]
#[command(
    name = "subdivreg",
    version,
    about = "Convergence and Hölder regularity of subdivision schemes"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full convergence and regularity analysis from a config.
    Analyze {
        cfg: PathBuf,
        /// Print the machine-readable report instead of the text one.
        #[arg(long)]
        json: bool,
    },
    /// Bound the joint spectral radius of a matrix family from a dump file.
    Jsr {
        file: PathBuf,
        /// Target relative gap between the bounds.
        #[arg(long)]
        gap: Option<f64>,
        /// Node budget for the enumeration and branch-and-bound stages.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Refine from the delta sequence and write the samples as CSV.
    Sample {
        cfg: PathBuf,
        /// Number of refinement steps.
        #[arg(long)]
        levels: usize,
        /// Output path; falls back to the config's output.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the defect table mu/delta/sigma with its fitted rates.
    Defects {
        cfg: PathBuf,
        /// Smoothness order; overrides the config.
        #[arg(long)]
        ell: Option<usize>,
        /// Number of levels; overrides the config.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("subdivreg: {msg}");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subdivreg: {e}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("SUBDIVREG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SUBDIVREG_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Analyze { cfg, json } => cmd_analyze(&cfg, json),
        Cmd::Jsr {
            file,
            gap,
            budget,
            json,
        } => cmd_jsr(&file, gap, budget, json),
        Cmd::Sample { cfg, levels, out } => cmd_sample(&cfg, levels, out),
        Cmd::Defects {
            cfg,
            ell,
            horizon,
            json,
        } => cmd_defects(&cfg, ell, horizon, json),
    }
}

fn load_config(path: &Path) -> Result<(AnalysisConfig, ResolvedConfig)> {
    let text = fs::read_to_string(path)?;
    let cfg = parse_config(&text)?;
    let resolved = resolve(&cfg)?;
    Ok((cfg, resolved))
}

fn analysis_options(cfg: &AnalysisConfig) -> AnalysisOptions {
    AnalysisOptions {
        horizon: cfg.horizon,
        jsr: cfg.jsr.options(),
        ..AnalysisOptions::default()
    }
}

fn cmd_analyze(path: &Path, json: bool) -> Result<()> {
    let (cfg, resolved) = load_config(path)?;
    match resolved.kind {
        RunKind::Scheme { sequence, dilation } => {
            let doc = report::full_report(
                &resolved.name,
                &sequence,
                &dilation,
                cfg.ell,
                &analysis_options(&cfg),
            )?;
            let rendered = report::to_json(&doc)?;
            if let Some(p) = &cfg.output.json {
                fs::write(p, &rendered)?;
            }
            if json {
                println!("{rendered}");
            } else {
                print!("{}", report::render_text(&doc));
            }
        }
        RunKind::Fixture { set } => {
            let result = jsr_with_options(&set, &cfg.jsr.options())?;
            let doc = report::jsr_doc(&result, set.labels());
            let rendered = serde_json::to_string_pretty(&doc)?;
            if let Some(p) = &cfg.output.json {
                fs::write(p, &rendered)?;
            }
            if json {
                println!("{rendered}");
            } else {
                print!("{}", report::render_jsr_text(&resolved.name, &doc));
            }
        }
    }
    Ok(())
}

fn cmd_jsr(path: &Path, gap: Option<f64>, budget: Option<usize>, json: bool) -> Result<()> {
    let named = read_matrices(BufReader::new(File::open(path)?))?;
    let (labels, matrices): (Vec<_>, Vec<_>) = named.into_iter().unzip();
    let set = MatrixSet::with_labels(matrices, labels)?;
    let mut opts = JsrOptions::default();
    if let Some(g) = gap {
        opts.gap = g;
    }
    if let Some(b) = budget {
        opts.enumeration_budget = b;
        opts.tree_node_budget = b;
    }
    let result = jsr_with_options(&set, &opts)?;
    let doc = report::jsr_doc(&result, set.labels());
    if json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        print!("{}", report::render_jsr_text(&name, &doc));
    }
    Ok(())
}

fn scheme_source(resolved: ResolvedConfig, cmd: &str) -> Result<(String, RunKind)> {
    match &resolved.kind {
        RunKind::Scheme { .. } => Ok((resolved.name, resolved.kind)),
        RunKind::Fixture { .. } => Err(Error::Config(format!(
            "{cmd} needs a mask source (builtin or inline masks), not a matrix fixture"
        ))),
    }
}

fn cmd_sample(path: &Path, levels: usize, out: Option<PathBuf>) -> Result<()> {
    let (cfg, resolved) = load_config(path)?;
    let (_, kind) = scheme_source(resolved, "sample")?;
    let RunKind::Scheme { sequence, dilation } = kind else {
        unreachable!("scheme_source filtered fixtures");
    };
    let out_path = out
        .or_else(|| cfg.output.csv.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Config("no output path: pass --out or set output.csv".into()))?;
    let data = basic_limit_samples(&sequence, &dilation, levels, 1)?;
    let mut buf = Vec::new();
    write_csv(&data, &dilation, &mut buf)?;
    fs::write(&out_path, &buf)?;
    println!("wrote {} rows to {}", data.values.len(), out_path.display());
    Ok(())
}

fn cmd_defects(path: &Path, ell: Option<usize>, horizon: Option<usize>, json: bool) -> Result<()> {
    let (cfg, resolved) = load_config(path)?;
    let (name, kind) = scheme_source(resolved, "defects")?;
    let RunKind::Scheme { sequence, dilation } = kind else {
        unreachable!("scheme_source filtered fixtures");
    };
    let ell = ell.unwrap_or(cfg.ell);
    let horizon = horizon.unwrap_or(cfg.horizon);
    let ds = defect_sequence(&sequence, &dilation, ell, horizon)?;
    let doc = DefectsDoc {
        scheme: name,
        ell,
        horizon,
        rows: report::defect_rows(&ds),
        summability: report::summability_doc(&approximate_sum_rule_verdict(&ds)),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(());
    }
    println!("scheme: {}", doc.scheme);
    println!("order: ell = {ell}, horizon = {horizon}");
    print!("{}", report::defect_table(&doc.rows, doc.rows.len()));
    println!(
        "verdict: {} (mu fit {}, sigma fit {}, limsup delta_k^(1/k) = {:.6} [empirical])",
        doc.summability.verdict,
        doc.summability.mu_model,
        doc.summability.sigma_model,
        doc.summability.limsup_delta_root
    );
    Ok(())
}
