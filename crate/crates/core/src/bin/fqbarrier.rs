use clap::{Args, Parser, Subcommand};
use fqbarrier::brownian::{optimal_decomposition, BrownianProductQuantizer, DEFAULT_TRUNCATION};
use fqbarrier::cli::{
    reproduce_table, run, table_spec, write_records, write_table, Format, Method, RunConfig, TableOptions,
};
use fqbarrier::contract::{BarrierType, PayoffType};
use fqbarrier::mc::Estimator;
use fqbarrier::model::Model;
use fqbarrier::quantizer::optimal_normal_quantizer;
use fqbarrier::transition::CdfMode;
use fqbarrier::{Error, Result};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fqbarrier", version, about = "Knock-out option pricing by functional quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal quantizer of N(0,1) in the cache format
    GenQuantizer {
        #[arg(long)]
        levels: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Product quantizer of Brownian motion on [0, T]
    GenBrownian {
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Price by quantization and forward induction
    PriceQuant {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        substeps: Option<usize>,
        /// exact or euler transition law
        #[arg(long)]
        cdf: Option<String>,
        /// CSV of the price grids (k, t_k, rank, price, weight)
        #[arg(long)]
        dump_grids: Option<PathBuf>,
        /// CSV of the nonzero transition probabilities (k, i, j, p)
        #[arg(long)]
        dump_transitions: Option<PathBuf>,
    },
    /// Price by regular Brownian bridge Monte Carlo
    PriceMc {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// indicator or conditional
        #[arg(long)]
        estimator: Option<String>,
    },
    /// Closed-form Black-Scholes price
    PriceClosed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        contract: ContractArgs,
    },
    /// Reproduce one of the published up-and-out call tables (1..=5)
    Table {
        #[arg(long)]
        id: u8,
        #[command(flatten)]
        common: Common,
        /// paths of the RBB column
        #[arg(long, default_value_t = 1_000_000)]
        paths: usize,
        /// paths of the Monte Carlo reference (tables 4 and 5)
        #[arg(long)]
        ref_paths: Option<usize>,
        /// steps of the Monte Carlo reference (tables 4 and 5)
        #[arg(long)]
        ref_steps: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// short (6 significant digits) or full
    #[arg(long)]
    precision: Option<String>,
}

#[derive(Args)]
struct ModelArgs {
    /// bs or pcev
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    vartheta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    x0: Option<f64>,
}

#[derive(Args)]
struct ContractArgs {
    /// up-and-out or down-and-out
    #[arg(long)]
    barrier_type: Option<String>,
    /// call or put
    #[arg(long)]
    payoff: Option<String>,
    #[arg(long)]
    strike: Option<f64>,
    #[arg(long)]
    barrier: Option<f64>,
    #[arg(long)]
    maturity: Option<f64>,
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(f) = &common.format {
        cfg.output.format = f.parse()?;
    }
    if let Some(p) = &common.precision {
        cfg.output.precision = p.parse()?;
    }
    if let Some(p) = &common.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(s) = common.seed {
        cfg.mc.seed = s;
    }
    Ok(cfg)
}

fn apply_model(current: Model, a: &ModelArgs) -> Result<Model> {
    let kind = match a.model.as_deref() {
        Some(k) => k.to_ascii_lowercase(),
        None => match current {
            Model::BlackScholes { .. } => "bs".into(),
            Model::PseudoCev { .. } => "pcev".into(),
        },
    };
    let r = a.rate.unwrap_or(current.rate());
    let x0 = a.x0.unwrap_or(current.x0());
    let m = match kind.as_str() {
        "bs" | "black-scholes" => {
            let sigma = match current {
                Model::BlackScholes { sigma, .. } => a.sigma.unwrap_or(sigma),
                _ => a.sigma.ok_or_else(|| Error::InvalidArgument("--sigma is required".into()))?,
            };
            Model::black_scholes(r, sigma, x0)?
        }
        "pcev" | "pseudo-cev" => {
            let (v0, d0) = match current {
                Model::PseudoCev { vartheta, delta, .. } => (vartheta, delta),
                _ => (0.7, 0.5),
            };
            Model::pseudo_cev(r, a.vartheta.unwrap_or(v0), a.delta.unwrap_or(d0), x0)?
        }
        other => return Err(Error::InvalidArgument(format!("unknown model '{other}' (expected bs or pcev)"))),
    };
    Ok(m)
}

fn apply(cfg: &mut RunConfig, model: &ModelArgs, contract: &ContractArgs) -> Result<()> {
    cfg.model = apply_model(cfg.model, model)?;
    let c = &mut cfg.contract;
    if let Some(b) = &contract.barrier_type {
        c.barrier_type = b.parse::<BarrierType>()?;
    }
    if let Some(p) = &contract.payoff {
        c.payoff_type = p.parse::<PayoffType>()?;
    }
    c.strike = contract.strike.unwrap_or(c.strike);
    c.barrier = contract.barrier.unwrap_or(c.barrier);
    c.maturity = contract.maturity.unwrap_or(c.maturity);
    Ok(())
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn price(cfg: RunConfig) -> Result<()> {
    let rec = run(&cfg)?;
    let mut out = output(&cfg.output.path)?;
    write_records(&[rec], &mut out, cfg.output.format, cfg.output.precision)?;
    out.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenQuantizer { levels, common } => {
            let cfg = load(&common)?;
            let q = optimal_normal_quantizer(levels)?;
            let mut out = output(&cfg.output.path)?;
            match cfg.output.format {
                Format::Csv => out.write_all(q.to_cache_string().as_bytes())?,
                Format::Json => {
                    let v = serde_json::json!({
                        "levels": q.n_levels(),
                        "points": q.points,
                        "weights": q.weights,
                        "distortion": q.distortion,
                    });
                    serde_json::to_writer_pretty(&mut out, &v)?;
                    writeln!(out)?;
                }
            }
            out.flush()?;
        }
        Command::GenBrownian { budget, horizon, common } => {
            let cfg = load(&common)?;
            let d = optimal_decomposition(budget, DEFAULT_TRUNCATION)?;
            let q = BrownianProductQuantizer::with_factors(&d.factors, horizon)?;
            let mut out = output(&cfg.output.path)?;
            match cfg.output.format {
                Format::Csv => out.write_all(q.to_text().as_bytes())?,
                Format::Json => {
                    let v = serde_json::json!({
                        "budget": budget,
                        "factors": d.factors,
                        "size": q.len(),
                        "horizon": horizon,
                        "distortion": fqbarrier::brownian::product_distortion(&d.factors, horizon)?,
                    });
                    serde_json::to_writer_pretty(&mut out, &v)?;
                    writeln!(out)?;
                }
            }
            out.flush()?;
        }
        Command::PriceQuant {
            common,
            model,
            contract,
            steps,
            budget,
            substeps,
            cdf,
            dump_grids,
            dump_transitions,
        } => {
            let mut cfg = load(&common)?;
            apply(&mut cfg, &model, &contract)?;
            cfg.method = Method::Quant;
            let q = &mut cfg.quant;
            q.n_steps = steps.unwrap_or(q.n_steps);
            q.budget = budget.unwrap_or(q.budget);
            q.substeps = substeps.unwrap_or(q.substeps);
            if let Some(c) = cdf {
                q.cdf = Some(match c.to_ascii_lowercase().as_str() {
                    "exact" => CdfMode::Exact,
                    "euler" => CdfMode::Euler,
                    _ => return Err(Error::InvalidArgument(format!("unknown cdf '{c}' (expected exact or euler)"))),
                });
            }
            cfg.output.dump_grids = dump_grids.or(cfg.output.dump_grids);
            cfg.output.dump_transitions = dump_transitions.or(cfg.output.dump_transitions);
            price(cfg)?;
        }
        Command::PriceMc {
            common,
            model,
            contract,
            paths,
            steps,
            estimator,
        } => {
            let mut cfg = load(&common)?;
            apply(&mut cfg, &model, &contract)?;
            cfg.method = Method::Rbb;
            cfg.mc.n_paths = paths.unwrap_or(cfg.mc.n_paths);
            cfg.mc.n_steps = steps.unwrap_or(cfg.mc.n_steps);
            if let Some(e) = estimator {
                cfg.mc.estimator = e.parse::<Estimator>()?;
            }
            price(cfg)?;
        }
        Command::PriceClosed { common, model, contract } => {
            let mut cfg = load(&common)?;
            apply(&mut cfg, &model, &contract)?;
            cfg.method = Method::Closed;
            price(cfg)?;
        }
        Command::Table {
            id,
            common,
            paths,
            ref_paths,
            ref_steps,
            budget,
        } => {
            let cfg = load(&common)?;
            let spec = table_spec(id)?;
            let opts = TableOptions {
                rbb_paths: paths,
                seed: cfg.mc.seed,
                budget,
                reference_paths: ref_paths,
                reference_steps: ref_steps,
                ..TableOptions::default()
            };
            let rows = reproduce_table(&spec, &opts)?;
            let mut out = output(&cfg.output.path)?;
            write_table(&rows, &mut out, cfg.output.format, cfg.output.precision)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fqbarrier: {e}");
            ExitCode::FAILURE
        }
    }
}
