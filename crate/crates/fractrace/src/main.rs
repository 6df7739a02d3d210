use clap::{Parser, Subcommand};
use fractrace::cli::{
    self, cmd_constants, cmd_hls_check, cmd_optimize, cmd_riesz_check, cmd_verify, parse_alpha_grid,
    parse_axis_list, parse_range, ConstantsArgs, FileConfig, HlsArgs, OptimizeArgs, OutputFormat,
    RieszArgs, VerifyArgs, VerifyFamily,
};
use fractrace::constants::FracIndex;
use fractrace::optimize::AscentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fractrace",
    version,
    about = "Sharp fractional trace-Sobolev inequalities: constants, verification, optimization"
)]
struct Cli {
    /// Flat key=value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format: json, csv, text-table.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here (atomically) instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Evaluate all sharp constants and their identity residuals.
    Constants {
        /// Dimension or range, e.g. 3 or 3..8.
        #[arg(long)]
        n: Option<String>,
        /// Codimension or range.
        #[arg(long)]
        m: Option<String>,
        /// Alpha value or grid start:end:count.
        #[arg(long)]
        alpha: Option<String>,
        /// Identity residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run one Rayleigh-quotient verification.
    Verify {
        /// sobolev | trace-norm | trace-sobolev | hls
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Box length per axis (comma separated or broadcast).
        #[arg(long = "L")]
        lengths: Option<String>,
        /// Samples per axis (comma separated or broadcast).
        #[arg(long = "N")]
        sizes: Option<String>,
        /// extremizer | gaussian | random
        #[arg(long)]
        family: Option<String>,
        /// Extremizer scale parameter.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Allowed ratio overshoot above 1.
        #[arg(long)]
        budget: Option<f64>,
        /// Attainment window below 1 for extremizer runs.
        #[arg(long)]
        attainment_tol: Option<f64>,
    },
    /// Re-discover the Sobolev extremizer by projected gradient ascent.
    Optimize {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "L")]
        lengths: Option<String>,
        #[arg(long = "N")]
        sizes: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        grad_tol: Option<f64>,
        /// Pass threshold on final_quotient / sharp_constant.
        #[arg(long)]
        threshold: Option<f64>,
        /// Write the per-iteration ascent trace CSV here.
        #[arg(long)]
        trace_output: Option<PathBuf>,
    },
    /// Cross-check the Riesz/Fourier equivalence on the mean-zero family.
    RieszCheck {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "L")]
        lengths: Option<String>,
        #[arg(long = "N")]
        sizes: Option<String>,
        /// Width of the Gaussian-difference family.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// HLS attainment plus the Euler-Lagrange proportionality check.
    HlsCheck {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "L")]
        lengths: Option<String>,
        #[arg(long = "N")]
        sizes: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        attainment_tol: Option<f64>,
        #[arg(long)]
        el_tol: Option<f64>,
    },
}

fn run(cli: Cli) -> fractrace::Result<i32> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let format = match cli.format.as_deref().or(file.get_raw("format")) {
        Some(s) => OutputFormat::parse(s)?,
        None => OutputFormat::TextTable,
    };
    let output = cli.output.clone().or_else(|| file.get::<PathBuf>("output"));

    // flags override the config file, which overrides defaults
    macro_rules! pick {
        ($flag:expr, $key:literal, $default:expr) => {
            $flag.or_else(|| file.get($key)).unwrap_or($default)
        };
    }

    match cli.command {
        Commands::Constants { n, m, alpha, tol } => {
            let n = parse_range(&pick!(n, "n", "3..8".into()))?;
            let m = parse_range(&pick!(m, "m", "1".into()))?;
            let alphas = parse_alpha_grid(&pick!(alpha, "alpha", "1".into()))?;
            cmd_constants(&ConstantsArgs {
                n,
                m,
                alphas,
                tol: pick!(tol, "tol", 1e-12),
                format,
                output,
            })
        }
        Commands::Verify {
            kind,
            n,
            m,
            alpha,
            lengths,
            sizes,
            family,
            gamma,
            seed,
            budget,
            attainment_tol,
        } => {
            let kind = pick!(kind, "kind", "sobolev".into());
            let n = pick!(n, "n", 1);
            let m = pick!(m, "m", if kind.starts_with("trace") { 1 } else { 0 });
            let alpha = pick!(alpha, "alpha", 0.25);
            let idx = FracIndex::new(n, m, alpha)?;
            let dim = n as usize;
            let (def_l, def_n) = match dim {
                1 => ("400", "8192"),
                2 => ("50", "512"),
                _ => ("20", "64"),
            };
            let lengths = parse_axis_list(&pick!(lengths, "L", def_l.into()), dim)?;
            let sizes = parse_axis_list(&pick!(sizes, "N", def_n.into()), dim)?;
            let family = VerifyFamily::parse(&pick!(family, "family", "extremizer".into()))?;
            cmd_verify(&VerifyArgs {
                kind,
                idx,
                lengths,
                sizes,
                family,
                gamma: pick!(gamma, "gamma", 1.0),
                seed: pick!(seed, "seed", 7),
                budget: pick!(budget, "budget", 0.0),
                attainment_tol: attainment_tol.or_else(|| file.get("attainment_tol")),
                format,
                output,
            })
        }
        Commands::Optimize {
            n,
            alpha,
            lengths,
            sizes,
            seed,
            max_iters,
            grad_tol,
            threshold,
            trace_output,
        } => {
            let n = pick!(n, "n", 1);
            let alpha = pick!(alpha, "alpha", 0.25);
            let idx = FracIndex::new(n, 0, alpha)?;
            let dim = n as usize;
            let (def_l, def_n) = match dim {
                1 => ("200", "2048"),
                2 => ("50", "512"),
                _ => ("15", "32"),
            };
            let lengths = parse_axis_list(&pick!(lengths, "L", def_l.into()), dim)?;
            let sizes = parse_axis_list(&pick!(sizes, "N", def_n.into()), dim)?;
            let cfg = AscentConfig {
                max_iters: pick!(max_iters, "max_iters", 2000),
                grad_tol: pick!(grad_tol, "grad_tol", 1e-7),
                seed: pick!(seed, "seed", 42),
                ..AscentConfig::default()
            };
            cmd_optimize(&OptimizeArgs {
                idx,
                lengths,
                sizes,
                cfg,
                threshold: pick!(threshold, "threshold", 0.99),
                format,
                output,
                trace_output,
            })
        }
        Commands::RieszCheck {
            n,
            alpha,
            lengths,
            sizes,
            sigma,
            tol,
        } => {
            let n = pick!(n, "n", 1);
            let alpha = pick!(alpha, "alpha", 0.25);
            let idx = FracIndex::new(n, 0, alpha)?;
            let dim = n as usize;
            let lengths = parse_axis_list(&pick!(lengths, "L", "40".into()), dim)?;
            let default_n = if dim == 1 { "2048" } else { "256" };
            let sizes = parse_axis_list(&pick!(sizes, "N", default_n.into()), dim)?;
            let default_sigma = if dim == 1 { 1.0 } else { 2.0 };
            let default_tol = if dim == 1 { 1e-2 } else { 2e-2 };
            cmd_riesz_check(&RieszArgs {
                idx,
                lengths,
                sizes,
                sigma: pick!(sigma, "sigma", default_sigma),
                tol: pick!(tol, "tol", default_tol),
                format,
                output,
            })
        }
        Commands::HlsCheck {
            n,
            alpha,
            lengths,
            sizes,
            gamma,
            attainment_tol,
            el_tol,
        } => {
            let n = pick!(n, "n", 1);
            let alpha = pick!(alpha, "alpha", 0.25);
            let idx = FracIndex::new(n, 0, alpha)?;
            let dim = n as usize;
            let lengths = parse_axis_list(&pick!(lengths, "L", "400".into()), dim)?;
            let sizes = parse_axis_list(&pick!(sizes, "N", "4096".into()), dim)?;
            cmd_hls_check(&HlsArgs {
                idx,
                lengths,
                sizes,
                gamma: pick!(gamma, "gamma", 1.0),
                attainment_tol: pick!(attainment_tol, "attainment_tol", 0.03),
                el_tol: pick!(el_tol, "el_tol", 0.05),
                format,
                output,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            let code = cli::exit_code_for(&err);
            let diag = serde_json::json!({
                "error": err.to_string(),
                "exit_code": code,
                "version": cli::VERSION,
            });
            eprintln!("{diag}");
            ExitCode::from(code as u8)
        }
    }
}
