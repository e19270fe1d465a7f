//! Run configuration, pricing records and table reproduction used by the
//! `fqbarrier` binary.

use crate::brownian::BrownianProductQuantizer;
use crate::closed_form::bs_barrier_closed_form;
use crate::contract::{BarrierContract, BarrierType, PayoffType};
use crate::error::{invalid, Error, Result};
use crate::mc::{rbb_price, rbb_simulate, Estimator, McConfig};
use crate::model::Model;
use crate::path_quantization::DEFAULT_SUBSTEPS;
use crate::quant_pricer::price_barrier;
use crate::transition::{CdfMode, QuantizedChain};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 20_100_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Quant,
    Rbb,
    Closed,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quant" => Ok(Method::Quant),
            "rbb" | "mc" => Ok(Method::Rbb),
            "closed" => Ok(Method::Closed),
            _ => Err(invalid(format!("unknown method '{s}' (expected quant, rbb or closed)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(invalid(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Number formatting of prices in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// Six significant digits.
    #[default]
    Short,
    /// Shortest representation that parses back to the same `f64`.
    Full,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "short" | "6" => Ok(Precision::Short),
            "full" => Ok(Precision::Full),
            _ => Err(invalid(format!("unknown precision '{s}' (expected short or full)"))),
        }
    }
}

impl Precision {
    pub fn format(self, x: f64) -> String {
        match self {
            Precision::Full => x.to_string(),
            Precision::Short => round_sig(x, 6).to_string(),
        }
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantParams {
    pub n_steps: usize,
    pub budget: usize,
    pub substeps: usize,
    /// Transition law; exact for Black-Scholes and Euler otherwise when unset.
    pub cdf: Option<CdfMode>,
}

impl Default for QuantParams {
    fn default() -> Self {
        Self {
            n_steps: 10,
            budget: 1000,
            substeps: DEFAULT_SUBSTEPS,
            cdf: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McParams {
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            n_steps: 20,
            n_paths: 1_000_000,
            seed: DEFAULT_SEED,
            estimator: Estimator::Indicator,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputParams {
    pub format: Format,
    pub path: Option<PathBuf>,
    pub precision: Precision,
    pub dump_grids: Option<PathBuf>,
    pub dump_transitions: Option<PathBuf>,
}

/// One pricing job, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: Model,
    pub contract: BarrierContract,
    pub method: Method,
    pub quant: QuantParams,
    pub mc: McParams,
    pub output: OutputParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::BlackScholes {
                r: 0.15,
                sigma: 0.07,
                x0: 100.0,
            },
            contract: BarrierContract {
                barrier_type: BarrierType::UpAndOut,
                payoff_type: PayoffType::Call,
                strike: 100.0,
                barrier: 115.0,
                maturity: 1.0,
            },
            method: Method::Quant,
            quant: QuantParams::default(),
            mc: McParams::default(),
            output: OutputParams::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut text = String::new();
        File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .read_to_string(&mut text)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.contract.validate()?;
        match self.method {
            Method::Closed => {
                if let Model::PseudoCev { .. } = self.model {
                    return Err(Error::Unsupported("closed form unavailable for pseudo-CEV".into()));
                }
            }
            Method::Quant => {
                let q = &self.quant;
                if q.n_steps == 0 || q.budget == 0 || q.substeps == 0 {
                    return Err(invalid("quant.n_steps, quant.budget and quant.substeps must be at least 1"));
                }
                if q.cdf == Some(CdfMode::Exact) && matches!(self.model, Model::PseudoCev { .. }) {
                    return Err(Error::Unsupported(
                        "exact transition law unavailable for pseudo-CEV; use cdf \"euler\"".into(),
                    ));
                }
            }
            Method::Rbb => {
                McConfig::new(self.mc.n_steps, self.mc.n_paths, self.mc.seed, self.mc.estimator)?;
            }
        }
        Ok(())
    }
}

/// Result of one pricing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingRecord {
    pub method: Method,
    pub model: String,
    pub barrier_type: BarrierType,
    pub payoff: PayoffType,
    pub strike: f64,
    pub barrier: f64,
    pub maturity: f64,
    pub price: f64,
    /// Per-sample variance (Monte Carlo only).
    pub variance: Option<f64>,
    pub std_error: Option<f64>,
    /// Quantized no-knockout probability (quantization only).
    pub survival: Option<f64>,
    pub seconds: f64,
}

/// Executes the configured pricing pipeline.
pub fn run(cfg: &RunConfig) -> Result<PricingRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let c = &cfg.contract;
    let mut rec = PricingRecord {
        method: cfg.method,
        model: cfg.model.name().to_string(),
        barrier_type: c.barrier_type,
        payoff: c.payoff_type,
        strike: c.strike,
        barrier: c.barrier,
        maturity: c.maturity,
        price: 0.0,
        variance: None,
        std_error: None,
        survival: None,
        seconds: 0.0,
    };
    match cfg.method {
        Method::Closed => {
            let Model::BlackScholes { r, sigma, x0 } = cfg.model else {
                unreachable!("validated")
            };
            rec.price = bs_barrier_closed_form(c, x0, r, sigma)?;
        }
        Method::Rbb => {
            let m = &cfg.mc;
            let res = rbb_price(&cfg.model, c, &McConfig::new(m.n_steps, m.n_paths, m.seed, m.estimator)?)?;
            rec.price = res.price;
            rec.variance = Some(res.sample_variance);
            rec.std_error = Some(res.std_error);
        }
        Method::Quant => {
            let chain = build_chain(&cfg.model, c.maturity, &cfg.quant)?;
            if let Some(p) = &cfg.output.dump_grids {
                chain.grid.write_csv(BufWriter::new(create(p)?))?;
            }
            if let Some(p) = &cfg.output.dump_transitions {
                chain.write_transitions_csv(BufWriter::new(create(p)?))?;
            }
            let q = price_barrier(&chain, c)?;
            rec.price = q.price();
            rec.survival = Some(q.survival);
        }
    }
    rec.seconds = start.elapsed().as_secs_f64();
    Ok(rec)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Quantizer, price grids and transition matrices for the parameters.
pub fn build_chain(model: &Model, horizon: f64, q: &QuantParams) -> Result<QuantizedChain> {
    let quantizer = BrownianProductQuantizer::optimal(q.budget, horizon)?;
    let mode = q.cdf.unwrap_or_else(|| CdfMode::preferred(model));
    QuantizedChain::build(model, &quantizer, q.n_steps, q.substeps, mode)
}

const RECORD_HEADER: [&str; 12] = [
    "method",
    "model",
    "barrier_type",
    "payoff",
    "strike",
    "barrier",
    "maturity",
    "price",
    "variance",
    "std_error",
    "survival",
    "seconds",
];

fn opt(x: Option<f64>, p: Precision) -> String {
    x.map(|v| p.format(v)).unwrap_or_default()
}

pub fn write_records<W: Write>(records: &[PricingRecord], out: W, format: Format, precision: Precision) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(RECORD_HEADER)?;
            for r in records {
                w.write_record([
                    serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_string(),
                    r.model.clone(),
                    r.barrier_type.to_string(),
                    r.payoff.to_string(),
                    r.strike.to_string(),
                    r.barrier.to_string(),
                    r.maturity.to_string(),
                    precision.format(r.price),
                    opt(r.variance, precision),
                    opt(r.std_error, precision),
                    opt(r.survival, precision),
                    format!("{:.3}", r.seconds),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a number: '{s}'")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<PricingRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() != RECORD_HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, found {}", RECORD_HEADER.len(), row.len())));
        }
        out.push(PricingRecord {
            method: row[0].parse()?,
            model: row[1].to_string(),
            barrier_type: row[2].parse()?,
            payoff: row[3].parse()?,
            strike: parse_f64(&row[4])?,
            barrier: parse_f64(&row[5])?,
            maturity: parse_f64(&row[6])?,
            price: parse_f64(&row[7])?,
            variance: parse_opt(&row[8])?,
            std_error: parse_opt(&row[9])?,
            survival: parse_opt(&row[10])?,
            seconds: parse_f64(&row[11])?,
        });
    }
    Ok(out)
}

/// How the reference column of a table is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    ClosedForm,
    /// High-resolution regular Brownian bridge Monte Carlo.
    Rbb { n_steps: usize, n_paths: usize },
}

/// Parameter set of one of the five published tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSpec {
    pub id: u8,
    pub model: Model,
    pub n_steps: usize,
    pub barriers: Vec<f64>,
    pub reference: Reference,
}

pub const BS_BARRIERS: [f64; 6] = [105.0, 110.0, 115.0, 120.0, 125.0, 130.0];
pub const PCEV_BARRIERS: [f64; 10] = [105.0, 106.0, 107.0, 110.0, 111.0, 112.0, 115.0, 120.0, 125.0, 130.0];

pub fn table_spec(id: u8) -> Result<TableSpec> {
    let (r, x0) = (0.15, 100.0);
    let reference = Reference::Rbb {
        n_steps: 100,
        n_paths: 10_000_000,
    };
    let spec = match id {
        1 => (Model::BlackScholes { r, sigma: 0.07, x0 }, 10, BS_BARRIERS.to_vec(), Reference::ClosedForm),
        2 => (Model::BlackScholes { r, sigma: 0.07, x0 }, 20, BS_BARRIERS.to_vec(), Reference::ClosedForm),
        3 => (Model::BlackScholes { r, sigma: 0.1, x0 }, 20, BS_BARRIERS.to_vec(), Reference::ClosedForm),
        4 => (
            Model::PseudoCev {
                r,
                vartheta: 0.7,
                delta: 0.5,
                x0,
            },
            20,
            PCEV_BARRIERS.to_vec(),
            reference,
        ),
        5 => (
            Model::PseudoCev {
                r,
                vartheta: 1.0,
                delta: 0.5,
                x0,
            },
            20,
            PCEV_BARRIERS.to_vec(),
            reference,
        ),
        _ => return Err(invalid(format!("table id {id} outside 1..=5"))),
    };
    Ok(TableSpec {
        id,
        model: spec.0,
        n_steps: spec.1,
        barriers: spec.2,
        reference: spec.3,
    })
}

/// Simulation sizes of a table run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub rbb_paths: usize,
    pub seed: u64,
    pub budget: usize,
    pub substeps: usize,
    /// Replaces the Monte Carlo reference size when set.
    pub reference_paths: Option<usize>,
    pub reference_steps: Option<usize>,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            rbb_paths: 1_000_000,
            seed: DEFAULT_SEED,
            budget: 1000,
            substeps: DEFAULT_SUBSTEPS,
            reference_paths: None,
            reference_steps: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub barrier: f64,
    pub reference: f64,
    pub rbb_price: f64,
    pub rbb_variance: f64,
    pub qep_price: f64,
    pub qep_seconds: f64,
}

/// Up-and-out call prices of one table: reference, RBB and quantization.
pub fn reproduce_table(spec: &TableSpec, opts: &TableOptions) -> Result<Vec<TableRow>> {
    let template = BarrierContract::up_and_out_call(100.0, spec.barriers[0], 1.0)?;
    let reference: Vec<f64> = match spec.reference {
        Reference::ClosedForm => {
            let Model::BlackScholes { r, sigma, x0 } = spec.model else {
                return Err(Error::Unsupported("closed form unavailable for pseudo-CEV".into()));
            };
            spec.barriers
                .iter()
                .map(|&l| bs_barrier_closed_form(&template.with_barrier(l), x0, r, sigma))
                .collect::<Result<_>>()?
        }
        Reference::Rbb { n_steps, n_paths } => {
            let steps = opts.reference_steps.unwrap_or(n_steps);
            let paths = opts.reference_paths.unwrap_or(n_paths);
            // a stream family disjoint from the table's own RBB column
            let seed = opts.seed ^ 0x5eed_0f_7ab1e;
            let (ind, _) = rbb_simulate(&spec.model, &template, &spec.barriers, steps, paths, seed, false)?;
            ind.iter().map(|r| r.price).collect()
        }
    };
    let (rbb, _) = rbb_simulate(&spec.model, &template, &spec.barriers, spec.n_steps, opts.rbb_paths, opts.seed, false)?;

    let start = Instant::now();
    let params = QuantParams {
        n_steps: spec.n_steps,
        budget: opts.budget,
        substeps: opts.substeps,
        cdf: None,
    };
    let chain = build_chain(&spec.model, 1.0, &params)?;
    let setup = start.elapsed().as_secs_f64();

    spec.barriers
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let q = price_barrier(&chain, &template.with_barrier(l))?;
            Ok(TableRow {
                barrier: l,
                reference: reference[i],
                rbb_price: rbb[i].price,
                rbb_variance: rbb[i].sample_variance,
                qep_price: q.call,
                qep_seconds: setup + q.elapsed,
            })
        })
        .collect()
}

const TABLE_HEADER: [&str; 6] = ["L", "reference", "rbb_price", "rbb_variance", "qep_price", "qep_seconds"];

pub fn write_table<W: Write>(rows: &[TableRow], out: W, format: Format, precision: Precision) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(TABLE_HEADER)?;
            for r in rows {
                w.write_record([
                    r.barrier.to_string(),
                    precision.format(r.reference),
                    precision.format(r.rbb_price),
                    precision.format(r.rbb_variance),
                    precision.format(r.qep_price),
                    precision.format(r.qep_seconds),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn read_table<R: Read>(input: R) -> Result<Vec<TableRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        if row.len() != TABLE_HEADER.len() {
            return Err(Error::Parse(format!("expected {} columns, found {}", TABLE_HEADER.len(), row.len())));
        }
        out.push(TableRow {
            barrier: parse_f64(&row[0])?,
            reference: parse_f64(&row[1])?,
            rbb_price: parse_f64(&row[2])?,
            rbb_variance: parse_f64(&row[3])?,
            qep_price: parse_f64(&row[4])?,
            qep_seconds: parse_f64(&row[5])?,
        });
    }
    Ok(out)
}
