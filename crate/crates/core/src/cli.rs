//! Command-line interface: bundled fixtures plus construction, cycle
//! counting, relocation optimization, matrix export, decoding, BER
//! simulation, and the latency model as subcommands.
//!
//! The CLI is a thin orchestrator — all heavy lifting lives in the library
//! modules, and frame-level parallelism follows `RAYON_NUM_THREADS`. Every
//! subcommand is deterministic given its explicit seed, prints a
//! human-readable report by default, and emits the same data as JSON under
//! `--json`. Exit codes: 0 success, 2 invalid input, 3 resource cap
//! exceeded, 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::code::{MdMappingSet, ScCodeSpec};
use crate::cycles::{
    classify_active, count_active, count_cycles, count_cycles_md, enumerate_signatures, CatalogScope,
};
use crate::decode::{latency_estimate, DecodeConfig, MinSumDecoder, WindowPlan};
use crate::error::{Error, Result};
use crate::formats::{from_alist, to_alist, to_dense_text, to_matrix_market};
use crate::matrix::SparseBinaryMatrix;
use crate::optimize::{construct_md, random_md, Construction};
use crate::registry::CodeRegistry;
use crate::sim::{emit_curve, flag_inversions, simulate_to, BerRecord, CurveFormat, DecoderMode, SimPlan};

/// Runs the CLI against the process arguments.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    // Fail fast on a corrupt fixture transcription, before any subcommand
    // trusts the registry.
    let reg = CodeRegistry::builtin();
    match cli.cmd {
        Cmd::Codes { name, length } => cmd_codes(reg, name.as_deref(), length, cli.json),
        Cmd::Count { sel, k, middle } => cmd_count(reg, &sel, &k, middle, cli.json),
        Cmd::Optimize(args) => cmd_optimize(reg, &args, cli.json),
        Cmd::Assemble { sel, format, out } => cmd_assemble(reg, &sel, format, &out, cli.json),
        Cmd::Decode(args) => cmd_decode(reg, &args, cli.json),
        Cmd::Simulate(args) => cmd_simulate(reg, &args, cli.json),
        Cmd::Latency { window, m, chain, t_rec, t_dec } => {
            let est = latency_estimate(window, m, chain, t_rec, t_dec)?;
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&est)?);
            } else {
                println!("window latency bound: {:.6}", est.window_bound);
                println!("combined bound:       {:.6}", est.combined_bound);
                println!("reduction factor:     {:.6}", est.reduction);
            }
            Ok(())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "mdsc",
    version,
    about = "Multi-dimensional spatially-coupled LDPC codes: construction, cycle analysis, \
             relocation optimization, windowed decoding, and BER simulation",
    after_help = "Worker-thread count follows the RAYON_NUM_THREADS environment variable."
)]
struct Cli {
    /// Emit machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the bundled code families and relocation maps, or show one.
    Codes {
        /// Fixture to show in detail (a code or map name).
        name: Option<String>,
        /// Coupling length override for the shown code.
        #[arg(short = 'L', long)]
        length: Option<usize>,
    },
    /// Count short cycles of a bundled code, optionally MD-coupled.
    Count {
        #[command(flatten)]
        sel: CodeSel,
        /// Cycle lengths to count.
        #[arg(short, long, num_args = 1.., default_values_t = [6usize])]
        k: Vec<usize>,
        /// Also report signature classes through the middle replica (the
        /// relocation search's objective).
        #[arg(long)]
        middle: bool,
    },
    /// Search for a relocation map minimizing active cycles, or draw a
    /// random one.
    Optimize(OptimizeArgs),
    /// Export an assembled parity-check matrix.
    Assemble {
        #[command(flatten)]
        sel: CodeSel,
        /// Output file format.
        #[arg(long, value_enum, default_value_t = ExportFormat::Alist)]
        format: ExportFormat,
        /// Output path.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decode one frame of channel values.
    Decode(DecodeArgs),
    /// Run a Monte Carlo BER plan.
    Simulate(SimArgs),
    /// Evaluate the windowed-decoding latency bound.
    Latency {
        /// Window size in replicas.
        #[arg(short, long)]
        window: usize,
        /// Coupling memory of the code.
        #[arg(short, long)]
        m: usize,
        /// Coupling length of the code.
        #[arg(short = 'L', long = "length")]
        chain: usize,
        /// Time to receive one full frame.
        #[arg(long, default_value_t = 1.0)]
        t_rec: f64,
        /// Time to block-decode one full frame.
        #[arg(long, default_value_t = 1.0)]
        t_dec: f64,
    },
}

/// Selection of a bundled code and an optional relocation-map source.
#[derive(Args)]
struct CodeSel {
    /// Registry code name; defaults to the constituent of `--map`.
    #[arg(long)]
    code: Option<String>,
    /// Coupling length override.
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Registry relocation-map name.
    #[arg(long)]
    map: Option<String>,
    /// JSON mapping-set file (as written by `optimize --out`).
    #[arg(long, conflicts_with = "map")]
    map_file: Option<PathBuf>,
}

impl CodeSel {
    fn resolve(&self, reg: &CodeRegistry) -> Result<(ScCodeSpec, Option<MdMappingSet>)> {
        let md = match (&self.map, &self.map_file) {
            (Some(name), _) => Some(reg.map(name)?.mapping_set()),
            (_, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
                Some(serde_json::from_str(&text)?)
            }
            _ => None,
        };
        let spec = match (&self.code, &self.map) {
            (Some(code), _) => reg.code_spec(code, self.length)?,
            (None, Some(map)) => {
                let mut spec = reg.map_constituent(reg.map(map)?)?;
                if let Some(l) = self.length {
                    spec.l = l;
                    spec.validate()?;
                }
                spec
            }
            (None, None) => Err(Error::invalid("select a code with --code or --map"))?,
        };
        if let Some(md) = &md {
            md.validate(spec.block.gamma, spec.block.kappa)?;
        }
        Ok((spec, md))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    /// Adjacency-list text format common in LDPC tooling.
    Alist,
    /// Dense 0/1 text rows.
    Dense,
    /// Matrix Market coordinate format.
    Mm,
}

// ----------------------------------------------------------------- codes --

#[derive(Serialize)]
struct CodeReport {
    name: String,
    gamma: usize,
    kappa: usize,
    z: u32,
    memory: usize,
    coupling_length: usize,
    length: usize,
    rows: usize,
    design_rate: f64,
    alt_lengths: Vec<usize>,
    description: String,
}

fn code_report(reg: &CodeRegistry, name: &str, length: Option<usize>) -> Result<CodeReport> {
    let fixture = reg.code(name)?;
    let spec = reg.code_spec(name, length)?;
    Ok(CodeReport {
        name: fixture.name.clone(),
        gamma: spec.block.gamma,
        kappa: spec.block.kappa,
        z: spec.block.z,
        memory: spec.m,
        coupling_length: spec.l,
        length: spec.n(),
        rows: spec.n_rows(),
        design_rate: spec.design_rate(),
        alt_lengths: fixture.alt_l.clone(),
        description: fixture.description.clone(),
    })
}

fn cmd_codes(reg: &CodeRegistry, name: Option<&str>, length: Option<usize>, json: bool) -> Result<()> {
    if let Some(name) = name {
        if let Ok(map) = reg.map(name) {
            if json {
                println!("{}", serde_json::to_string_pretty(map)?);
            } else {
                let t: usize = map.map.iter().flatten().filter(|&&v| v != 0).count();
                println!("map {}: constituent {}, L2={}, d={}, T={}", map.name, map.constituent, map.l2, map.d, t);
                println!("  {}", map.description);
                for row in &map.map {
                    println!("  {row:?}");
                }
            }
            return Ok(());
        }
        let report = code_report(reg, name, length)?;
        if json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            println!(
                "code {}: γ={}, κ={}, z={}, m={}, L={}",
                report.name, report.gamma, report.kappa, report.z, report.memory, report.coupling_length
            );
            println!("  length {}, rows {}, design rate {:.4}", report.length, report.rows, report.design_rate);
            if !report.alt_lengths.is_empty() {
                println!("  also used at L ∈ {:?}", report.alt_lengths);
            }
            println!("  {}", report.description);
        }
        return Ok(());
    }
    if json {
        let codes: Vec<CodeReport> =
            reg.codes.iter().map(|c| code_report(reg, &c.name, None)).collect::<Result<_>>()?;
        let out = serde_json::json!({ "codes": codes, "maps": reg.maps });
        println!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    println!("codes:");
    for c in &reg.codes {
        let spec = &c.spec;
        println!(
            "  {:<6} γ={} κ={:<2} z={:<2} m={} L={:<2} length {:>6} rate {:.2}  (alt L: {:?})",
            c.name,
            spec.block.gamma,
            spec.block.kappa,
            spec.block.z,
            spec.m,
            spec.l,
            spec.n(),
            spec.design_rate(),
            c.alt_l,
        );
    }
    println!("maps:");
    for m in &reg.maps {
        let t: usize = m.map.iter().flatten().filter(|&&v| v != 0).count();
        println!("  {:<6} constituent {:<5} L2={} d={} T={:<2}  {}", m.name, m.constituent, m.l2, m.d, t, m.description);
    }
    Ok(())
}

// ----------------------------------------------------------------- count --

#[derive(Serialize)]
struct CountLine {
    k: usize,
    cycles: u64,
    /// Constituent cycles a uniform map keeps at length k (coupled sets only).
    active: Option<u64>,
    /// Middle-replica signature classes realized in one chain.
    middle_classes: Option<u64>,
    /// Middle-replica classes whose cycles stay at length k under the map.
    middle_active: Option<u64>,
}

#[derive(Serialize)]
struct CountReport {
    code: String,
    coupling_length: usize,
    l2: usize,
    counts: Vec<CountLine>,
}

fn cmd_count(reg: &CodeRegistry, sel: &CodeSel, ks: &[usize], middle: bool, json: bool) -> Result<()> {
    let (spec, md) = sel.resolve(reg)?;
    let mut counts = Vec::new();
    for &k in ks {
        let cycles = match &md {
            Some(md) => count_cycles_md(&spec, md, k)?,
            None => count_cycles(&spec, k)?,
        };
        let active = match &md {
            Some(md) if md.is_uniform() => Some(count_active(&spec, md, k)?),
            _ => None,
        };
        let (middle_classes, middle_active) = if middle {
            let catalog = enumerate_signatures(&spec, k, CatalogScope::MiddleReplica)?;
            let realized = catalog.realized().count() as u64;
            let active_classes = match &md {
                Some(md) if md.is_uniform() => {
                    Some(classify_active(&catalog, md)?.active.len() as u64)
                }
                _ => None,
            };
            (Some(realized), active_classes)
        } else {
            (None, None)
        };
        counts.push(CountLine { k, cycles, active, middle_classes, middle_active });
    }
    let report = CountReport {
        code: sel.code.clone().or(sel.map.clone()).unwrap_or_default(),
        coupling_length: spec.l,
        l2: md.as_ref().map_or(1, |m| m.l2),
        counts,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    for line in &report.counts {
        println!("cycles-{}: {}", line.k, line.cycles);
        if let Some(active) = line.active {
            println!("active cycles-{}: {}", line.k, active);
        }
        if let Some(classes) = line.middle_classes {
            match line.middle_active {
                Some(a) => println!("middle-replica classes-{}: {} realized, {} active", line.k, classes, a),
                None => println!("middle-replica classes-{}: {} realized", line.k, classes),
            }
        }
    }
    Ok(())
}

// -------------------------------------------------------------- optimize --

#[derive(Args)]
struct OptimizeArgs {
    /// Registry code name of the constituent chain.
    #[arg(long)]
    code: String,
    /// Coupling length override.
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Cycle length to suppress.
    #[arg(short, long, default_value_t = 6)]
    k: usize,
    /// Number of chains to couple.
    #[arg(long)]
    l2: usize,
    /// Coupling depth (targets drawn from 1..d).
    #[arg(short, long)]
    depth: usize,
    /// Relocation budget.
    #[arg(short = 'T', long)]
    relocations: usize,
    /// Seed of the final leaf draw (or of the random map).
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Draw relocations uniformly at random instead of searching.
    #[arg(long)]
    random: bool,
    /// With --random: draw an independent map per chain.
    #[arg(long, requires = "random")]
    per_chain: bool,
    /// Write the resulting mapping set as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the full solution tree as JSON (search mode only).
    #[arg(long)]
    tree: Option<PathBuf>,
}

fn cmd_optimize(reg: &CodeRegistry, args: &OptimizeArgs, json: bool) -> Result<()> {
    let spec = reg.code_spec(&args.code, args.length)?;
    if args.random {
        let md = random_md(&spec, args.relocations, args.depth, args.l2, !args.per_chain, args.seed)?;
        if let Some(path) = &args.out {
            write_text(path, &serde_json::to_string_pretty(&md)?)?;
        }
        if json {
            println!("{}", serde_json::to_string_pretty(&md)?);
        } else {
            let per: Vec<usize> = md.relocations_per_chain();
            println!("random mapping set: L2={}, d={}, relocations per chain {:?}", md.l2, md.d, per);
        }
        return Ok(());
    }
    let built = construct_md(&spec, args.k, args.l2, args.depth, args.relocations, args.seed)?;
    if args.depth == 1 && args.relocations > 0 {
        eprintln!("warning: depth 1 admits no relocation targets; the map stays all-zero");
    }
    if let Some(path) = &args.out {
        write_text(path, &serde_json::to_string_pretty(&built.mapping)?)?;
    }
    if let Some(path) = &args.tree {
        write_text(path, &serde_json::to_string_pretty(&built.tree)?)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&built)?);
        return Ok(());
    }
    print_construction(&built, args.k);
    Ok(())
}

fn print_construction(built: &Construction, k: usize) {
    let root = built.tree.nodes.first().map_or(0, |n| n.active);
    println!("root active cycle-{k} classes: {root}");
    if !built.tree.levels.is_empty() {
        println!("{:>6} {:>9} {:>10} {:>11}", "level", "expanded", "surviving", "min active");
        for lvl in &built.tree.levels {
            println!("{:>6} {:>9} {:>10} {:>11}", lvl.level, lvl.expanded, lvl.surviving, lvl.min_active);
        }
    }
    if built.tree.early_terminated {
        println!("search stopped early: no relocation improves any frontier leaf");
    }
    println!("chosen leaf active count: {}", built.active);
    if let Some(map) = built.mapping.shared_map() {
        let mut moves = Vec::new();
        for (i, row) in map.iter().enumerate() {
            for (j, &t) in row.iter().enumerate() {
                if t != 0 {
                    moves.push(format!("({i},{j})→{t}"));
                }
            }
        }
        println!("relocations ({}): {}", moves.len(), moves.join(" "));
    }
}

// -------------------------------------------------------------- assemble --

#[derive(Serialize)]
struct AssembleReport {
    rows: usize,
    cols: usize,
    nnz: usize,
    path: String,
}

fn cmd_assemble(
    reg: &CodeRegistry,
    sel: &CodeSel,
    format: ExportFormat,
    out: &Path,
    json: bool,
) -> Result<()> {
    let (spec, md) = sel.resolve(reg)?;
    let h = match &md {
        Some(md) => spec.assemble_md(md)?,
        None => spec.assemble(),
    };
    let body = match format {
        ExportFormat::Alist => to_alist(&h),
        ExportFormat::Dense => to_dense_text(&h)?,
        ExportFormat::Mm => to_matrix_market(&h),
    };
    write_text(out, &body)?;
    let report =
        AssembleReport { rows: h.rows(), cols: h.cols(), nnz: h.nnz(), path: out.display().to_string() };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("wrote {}×{} matrix ({} ones) to {}", report.rows, report.cols, report.nnz, report.path);
    }
    Ok(())
}

// ---------------------------------------------------------------- decode --

#[derive(Args)]
struct DecodeArgs {
    /// Parity-check matrix file (alist) to decode against.
    #[arg(long, conflicts_with_all = ["code", "map", "map_file", "window", "md_window"])]
    matrix: Option<PathBuf>,
    #[command(flatten)]
    sel: CodeSelOpt,
    /// File of whitespace-separated channel values, one per column.
    #[arg(long)]
    llr: PathBuf,
    /// 1D windowed decoding with this window size.
    #[arg(long)]
    window: Option<usize>,
    /// MD windowed decoding with this local window size.
    #[arg(long, conflicts_with = "window")]
    md_window: Option<usize>,
    #[command(flatten)]
    dec: DecoderKnobs,
    /// Write hard decisions (one bit per line) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Like [`CodeSel`] but fully optional (a matrix file may replace it).
#[derive(Args)]
struct CodeSelOpt {
    /// Registry code name; defaults to the constituent of `--map`.
    #[arg(long)]
    code: Option<String>,
    /// Coupling length override.
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Registry relocation-map name.
    #[arg(long)]
    map: Option<String>,
    /// JSON mapping-set file (as written by `optimize --out`).
    #[arg(long, conflicts_with = "map")]
    map_file: Option<PathBuf>,
}

#[derive(Args)]
struct DecoderKnobs {
    /// Message-passing iterations.
    #[arg(long, default_value_t = 15)]
    iterations: usize,
    /// Quantizer width in bits.
    #[arg(long, default_value_t = 4)]
    bits: u32,
    /// Quantizer step.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Run the full iteration budget even after the syndrome clears.
    #[arg(long)]
    no_early_stop: bool,
}

impl DecoderKnobs {
    fn config(&self) -> DecodeConfig {
        DecodeConfig {
            max_iterations: self.iterations,
            bits: self.bits,
            step: self.step,
            early_stop: !self.no_early_stop,
        }
    }
}

#[derive(Serialize)]
struct DecodeReport {
    symbols: usize,
    ones: usize,
    syndrome_zero: bool,
    converged: Option<bool>,
    iterations: Option<usize>,
    out: Option<String>,
}

fn cmd_decode(reg: &CodeRegistry, args: &DecodeArgs, json: bool) -> Result<()> {
    let cfg = args.dec.config();
    let (h, md_spec): (SparseBinaryMatrix, Option<(ScCodeSpec, Option<MdMappingSet>)>) =
        match &args.matrix {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
                (from_alist(&text)?, None)
            }
            None => {
                let sel = CodeSel {
                    code: args.sel.code.clone(),
                    length: args.sel.length,
                    map: args.sel.map.clone(),
                    map_file: args.sel.map_file.clone(),
                };
                let (spec, md) = sel.resolve(reg)?;
                let h = match &md {
                    Some(md) => spec.assemble_md(md)?,
                    None => spec.assemble(),
                };
                (h, Some((spec, md)))
            }
        };
    let text = fs::read_to_string(&args.llr).map_err(|e| Error::io(args.llr.display().to_string(), e))?;
    let llr: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::invalid(format!("bad channel value `{t}`"))))
        .collect::<Result<_>>()?;
    let (decisions, converged, iterations) = match (args.window, args.md_window, &md_spec) {
        (Some(w), _, Some((spec, md))) => {
            if md.is_some() {
                return Err(Error::invalid("1D windowed decoding drives a single chain; use --md-window"));
            }
            (WindowPlan::one_dim(spec, w, cfg)?.decode(&llr)?, None, None)
        }
        (_, Some(w), Some((spec, md))) => {
            let md = md
                .as_ref()
                .ok_or_else(|| Error::invalid("MD windowed decoding needs --map or --map-file"))?;
            (WindowPlan::md(spec, md, w, cfg)?.decode(&llr)?, None, None)
        }
        _ => {
            let outcome = MinSumDecoder::new(&h, cfg)?.decode(&llr)?;
            (outcome.decisions, Some(outcome.converged), Some(outcome.iterations))
        }
    };
    let syndrome_zero = (0..h.rows())
        .all(|r| h.row(r).iter().fold(0u8, |p, &c| p ^ decisions[c as usize]) == 0);
    if let Some(path) = &args.out {
        let mut body = String::with_capacity(decisions.len() * 2);
        for &b in &decisions {
            body.push(if b == 1 { '1' } else { '0' });
            body.push('\n');
        }
        write_text(path, &body)?;
    }
    let report = DecodeReport {
        symbols: decisions.len(),
        ones: decisions.iter().filter(|&&b| b == 1).count(),
        syndrome_zero,
        converged,
        iterations,
        out: args.out.as_ref().map(|p| p.display().to_string()),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("decoded {} symbols: {} ones, syndrome zero: {}", report.symbols, report.ones, report.syndrome_zero);
        if let (Some(c), Some(i)) = (report.converged, report.iterations) {
            println!("converged: {c} after {i} iterations");
        }
        if let Some(out) = &report.out {
            println!("decisions written to {out}");
        }
    }
    Ok(())
}

// -------------------------------------------------------------- simulate --

#[derive(Args)]
struct SimArgs {
    /// Plan file (JSON). Its `code` field uses the label syntax
    /// `name[@L][+map]`, e.g. `sc1@30` or `sc1+m2`.
    #[arg(long, conflicts_with_all = ["code", "map", "map_file", "snr"])]
    plan: Option<PathBuf>,
    /// Registry code name; defaults to the constituent of `--map`.
    #[arg(long)]
    code: Option<String>,
    /// Coupling length override.
    #[arg(short = 'L', long)]
    length: Option<usize>,
    /// Registry relocation-map name.
    #[arg(long)]
    map: Option<String>,
    /// JSON mapping-set file.
    #[arg(long, conflicts_with = "map")]
    map_file: Option<PathBuf>,
    /// Eb/N0 points in dB, comma-separated.
    #[arg(long, value_delimiter = ',')]
    snr: Vec<f64>,
    /// Frame budget per point.
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    /// Early-stop bit-error target per point (0 disables).
    #[arg(long, default_value_t = 100)]
    min_bit_errors: u64,
    /// Additional frame-error requirement before early stop (0 disables).
    #[arg(long, default_value_t = 0)]
    min_frame_errors: u64,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// 1D windowed decoding with this window size.
    #[arg(long)]
    window: Option<usize>,
    /// MD windowed decoding with this local window size.
    #[arg(long, conflicts_with = "window")]
    md_window: Option<usize>,
    #[command(flatten)]
    dec: DecoderKnobs,
    /// Write the BER curve to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Curve file format.
    #[arg(long, value_enum, default_value_t = CurveArg::Csv)]
    format: CurveArg,
    /// Checkpoint file: finished points persist there and reruns resume.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveArg {
    Csv,
    Json,
}

/// Parses the plan label syntax `name[@L][+map]`.
fn parse_code_label(reg: &CodeRegistry, label: &str) -> Result<(ScCodeSpec, Option<MdMappingSet>)> {
    let (code_part, map_part) = match label.split_once('+') {
        Some((c, m)) => (c, Some(m)),
        None => (label, None),
    };
    let (name, length) = match code_part.split_once('@') {
        Some((n, l)) => {
            let l: usize =
                l.parse().map_err(|_| Error::invalid(format!("bad coupling length in label `{label}`")))?;
            (n, Some(l))
        }
        None => (code_part, None),
    };
    let sel = CodeSel {
        code: (!name.is_empty()).then(|| name.to_string()),
        length,
        map: map_part.map(str::to_string),
        map_file: None,
    };
    sel.resolve(reg)
}

fn cmd_simulate(reg: &CodeRegistry, args: &SimArgs, json: bool) -> Result<()> {
    let (spec, md, plan) = match &args.plan {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
            let plan: SimPlan = serde_json::from_str(&text)?;
            let (spec, md) = parse_code_label(reg, &plan.code)?;
            (spec, md, plan)
        }
        None => {
            let sel = CodeSel {
                code: args.code.clone(),
                length: args.length,
                map: args.map.clone(),
                map_file: args.map_file.clone(),
            };
            let (spec, md) = sel.resolve(reg)?;
            let label = match (&args.code, &args.map) {
                (Some(c), Some(m)) => format!("{c}+{m}"),
                (Some(c), None) => c.clone(),
                (None, Some(m)) => m.clone(),
                (None, None) => String::new(),
            };
            let mode = match (args.window, args.md_window) {
                (Some(w), _) => DecoderMode::Windowed { w },
                (_, Some(w)) => DecoderMode::MdWindowed { w },
                _ => DecoderMode::Block,
            };
            let plan = SimPlan {
                code: label,
                snr_db: args.snr.clone(),
                max_frames: args.max_frames,
                min_bit_errors: args.min_bit_errors,
                min_frame_errors: args.min_frame_errors,
                seed: args.seed,
                decoder: args.dec.config(),
                mode,
            };
            (spec, md, plan)
        }
    };
    let records = simulate_to(&spec, md.as_ref(), &plan, args.checkpoint.as_deref())?;
    if let Some(path) = &args.out {
        let format = match args.format {
            CurveArg::Csv => CurveFormat::Csv,
            CurveArg::Json => CurveFormat::Json,
        };
        emit_curve(&records, format, path)?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&records)?);
        return Ok(());
    }
    print_records(&records);
    Ok(())
}

fn print_records(records: &[BerRecord]) {
    println!(
        "{:>8} {:>9} {:>11} {:>12} {:>12} {:>10} {:>8}",
        "snr_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "seconds"
    );
    for r in records {
        println!(
            "{:>8} {:>9} {:>11} {:>12} {:>12.4e} {:>10.4e} {:>8.1}",
            r.snr_db, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer, r.seconds
        );
    }
    let flagged = flag_inversions(records);
    if !flagged.is_empty() {
        println!("warning: BER inversions beyond 3σ at point indices {flagged:?}");
    }
}

// ----------------------------------------------------------------- shared --

fn write_text(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path.display().to_string(), e))
}
