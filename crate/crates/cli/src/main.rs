use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use tfop::frame::frame_bounds;
use tfop::gm::{gm_matrix, u_function, RIESZ_TOLERANCE};
use tfop::io::{canonical, matrix_csv, parse_json, to_json, ComplexArray, MaskJson, TstSpecJson};
use tfop::mgm::{gamma_field, WindowSet, GAMMA_CONDITION_LIMIT};
use tfop::spread::{kernel_from_spreading, spreading_from_kernel};
use tfop::tst::{tst_operator, tst_to_gm_sum, tst_to_single_gm, TstMode, TstSpec};
use tfop::{dual_window, gauss_window, LinOp, TfError, TfLattice, Window};
use tfop_cli::experiment::{run_config, ExperimentConfig, Failure, Outcome, Row, Scheme, Synthesis};
use tfop_cli::ops::{generate, load_kernel, resolve, tst_example, OperatorSource, RNG_NAME};

/// Exit status for Riesz or frame failures.
const EXIT_DEGENERATE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "tfop",
    version,
    about = "Time-frequency representation and multiplier approximation of operators on C^N"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for the ChaCha8 generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; approximation sweeps default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Zero-fill masks at quotient points where the Riesz test fails.
    #[arg(long, global = true)]
    pinv: bool,
    /// Refuse TST prototypes that are not exactly of multiplier form.
    #[arg(long, global = true)]
    strict_tst: bool,
    /// Record wall-clock runtimes in result rows.
    #[arg(long, global = true)]
    timing: bool,
    /// Round numbers to 12 significant digits and flush round-off to zero.
    #[arg(long, global = true)]
    canonical: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    Rect,
    PerturbedLti,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthesisArg {
    Same,
    Dual,
}

impl From<SynthesisArg> for Synthesis {
    fn from(s: SynthesisArg) -> Self {
        match s {
            SynthesisArg::Same => Synthesis::Same,
            SynthesisArg::Dual => Synthesis::Dual,
        }
    }
}

/// `AxB`: time step `a`, frequency step `b`.
#[derive(Clone, Copy, Debug)]
struct LatticeArg(usize, usize);

impl FromStr for LatticeArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once('x').ok_or_else(|| format!("expected AxB, got '{s}'"))?;
        let p = |x: &str| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad lattice step '{x}': {e}"))
        };
        Ok(LatticeArg(p(a)?, p(b)?))
    }
}

/// `c,d`: a time-frequency shift.
#[derive(Clone, Copy, Debug)]
struct ShiftArg(i64, i64);

impl FromStr for ShiftArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (c, d) = s.split_once(',').ok_or_else(|| format!("expected c,d, got '{s}'"))?;
        let p = |x: &str| {
            x.trim()
                .parse::<i64>()
                .map_err(|e| format!("bad shift component '{x}': {e}"))
        };
        Ok(ShiftArg(p(c)?, p(d)?))
    }
}

#[derive(Args, Clone)]
struct OpArgs {
    /// Kernel JSON of the operator to approximate.
    #[arg(long, conflicts_with = "kind")]
    op: Option<PathBuf>,
    /// Random operator family.
    #[arg(long, value_enum)]
    kind: Option<OpKind>,
    /// Lag extent of the rect support box.
    #[arg(long)]
    lag: Option<usize>,
    /// Doppler extent of the rect support box.
    #[arg(long)]
    doppler: Option<usize>,
    /// Perturbed LTI: lags `-L..=L` of the convolution part.
    #[arg(long)]
    lag_half_width: Option<usize>,
    /// Perturbed LTI: scale of the uniform perturbation.
    #[arg(long)]
    noise: Option<f64>,
    /// Perturbed LTI: perturbation box `[-B, B]^2`.
    #[arg(long)]
    box_half_width: Option<usize>,
}

impl OpArgs {
    fn source(&self, default: OpKind) -> OperatorSource {
        if let Some(p) = &self.op {
            return OperatorSource::File {
                path: p.display().to_string(),
            };
        }
        match self.kind.unwrap_or(default) {
            OpKind::Rect => OperatorSource::Rect {
                lag: self.lag.unwrap_or(2),
                doppler: self.doppler.unwrap_or(8),
            },
            OpKind::PerturbedLti => OperatorSource::PerturbedLti {
                lag_half_width: self.lag_half_width.unwrap_or(12),
                noise: self.noise.unwrap_or(0.2),
                box_half_width: self.box_half_width.unwrap_or(3),
            },
        }
    }
}

#[derive(Args)]
struct TstSource {
    /// TST specification JSON.
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    spec: Option<PathBuf>,
    /// Use the built-in nine-atom example (N = 16, b1 = nu1 = 4), seeded by --seed.
    #[arg(long)]
    example: bool,
}

impl TstSource {
    fn load(&self, seed: u64) -> Result<TstSpec> {
        match &self.spec {
            Some(path) => {
                let text = read(path)?;
                let json: TstSpecJson = parse_json(&text).with_context(|| path.display().to_string())?;
                Ok(json.to_spec(path.parent())?)
            }
            None => Ok(tst_example(&mut ChaCha8Rng::seed_from_u64(seed))?),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Spreading function of a kernel file.
    Spreading { input: PathBuf },
    /// Kernel of a spreading-function file.
    Kernel { input: PathBuf },
    /// Seeded random operator, written as a kernel.
    RandomOp {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[command(flatten)]
        op: OpArgs,
    },
    /// Best Gabor multiplier over a sweep of lattices and window widths.
    ApproxGm {
        /// Experiment configuration JSON; replaces all sweep flags and --seed.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values = ["2x8", "8x2"])]
        lattice: Vec<LatticeArg>,
        /// Gaussian widths (reciprocal standard deviations).
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 2.0, 4.0])]
        widths: Vec<f64>,
        #[arg(long, value_enum, default_value = "same")]
        synthesis: SynthesisArg,
        #[command(flatten)]
        op: OpArgs,
        /// Print the effective configuration and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Best multiple Gabor multiplier with shifted synthesis windows.
    ApproxMgm {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value = "4x4")]
        lattice: LatticeArg,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
        widths: Vec<f64>,
        /// Synthesis shifts `c,d` separated by ';'; one row per prefix.
        #[arg(long, value_delimiter = ';', default_values = ["0,0", "0,4", "4,0", "4,4"])]
        shifts: Vec<ShiftArg>,
        /// Also fit a plain Gabor multiplier on this lattice.
        #[arg(long)]
        compare_gm: Option<LatticeArg>,
        #[arg(long, value_enum, default_value = "same")]
        synthesis: SynthesisArg,
        #[command(flatten)]
        op: OpArgs,
        #[arg(long)]
        dump_config: bool,
    },
    /// Build a TST operator (or its specification).
    TstBuild {
        #[command(flatten)]
        source: TstSource,
        /// Write the specification instead of the kernel.
        #[arg(long)]
        emit_spec: bool,
    },
    /// Reduce a TST operator to one Gabor multiplier or a sum of p*q of them.
    TstReduce {
        #[command(flatten)]
        source: TstSource,
        #[arg(long, default_value = "2x2")]
        lattice: LatticeArg,
        /// Width of the analysis Gaussian.
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        /// Width of the synthesis Gaussian (defaults to --width).
        #[arg(long)]
        h_width: Option<f64>,
        #[arg(long, requires = "q")]
        p: Option<usize>,
        #[arg(long, requires = "p")]
        q: Option<usize>,
    },
    /// Frame bounds of a Gaussian Gabor system.
    FrameCheck {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value = "4x4")]
        lattice: LatticeArg,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
    },
    /// Riesz test for the projection family of one or several synthesis windows.
    RieszCheck {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value = "4x4")]
        lattice: LatticeArg,
        #[arg(long, default_value_t = 1.0)]
        width: f64,
        #[arg(long, value_enum, default_value = "same")]
        synthesis: SynthesisArg,
        /// Synthesis shifts `c,d` separated by ';'; without them the single-window test is run.
        #[arg(long, value_delimiter = ';')]
        shifts: Vec<ShiftArg>,
    },
}

/// A run that finished but hit degenerate points.
struct Degenerate(Value);

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn num(x: f64, canon: bool) -> f64 {
    if canon {
        canonical(x)
    } else {
        x
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn lattice(n: usize, l: LatticeArg) -> Result<TfLattice> {
    Ok(TfLattice::new(n, l.0, l.1)?)
}

fn meta(seed: u64) -> Value {
    json!({ "rng": RNG_NAME, "seed": seed })
}

fn cmd_spreading(g: &Global, input: &Path) -> Result<()> {
    let op = load_kernel(input)?;
    let eta = spreading_from_kernel(&op);
    let (lag, dop) = eta.support_box(1e-12);
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(&g.out, &matrix_csv(eta.data(), g.canonical)),
        Format::Json => {
            let arr = ComplexArray::from_phasemap(&eta, g.canonical).with_meta(json!({
                "norm": num(eta.norm(), g.canonical),
                "support_box": { "lag": lag, "doppler": dop },
            }));
            emit(&g.out, &to_json(&arr))
        }
    }
}

fn cmd_kernel(g: &Global, input: &Path) -> Result<()> {
    let text = read(input)?;
    let arr: ComplexArray = parse_json(&text).with_context(|| input.display().to_string())?;
    let op = kernel_from_spreading(&arr.to_phasemap()?);
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(&g.out, &matrix_csv(op.kernel(), g.canonical)),
        Format::Json => emit(&g.out, &to_json(&ComplexArray::from_linop(&op, g.canonical))),
    }
}

fn cmd_random_op(g: &Global, n: usize, op: &OpArgs) -> Result<()> {
    if op.op.is_some() {
        bail!("random-op generates operators; --op is not accepted");
    }
    let source = op.source(OpKind::Rect);
    let kernel = generate(&source, n, &mut ChaCha8Rng::seed_from_u64(g.seed))?;
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(&g.out, &matrix_csv(kernel.kernel(), g.canonical)),
        Format::Json => {
            let mut m = meta(g.seed);
            m["operator"] = serde_json::to_value(&source)?;
            emit(
                &g.out,
                &to_json(&ComplexArray::from_linop(&kernel, g.canonical).with_meta(m)),
            )
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = read(path)?;
    parse_json(&text).with_context(|| path.display().to_string())
}

fn run_approx(g: &Global, cfg: ExperimentConfig, base: Option<&Path>, dump: bool) -> Result<Option<Degenerate>> {
    cfg.validate().context("invalid experiment configuration")?;
    if dump {
        emit(&g.out, &to_json(&cfg))?;
        return Ok(None);
    }
    let op = resolve(&cfg.operator, cfg.n, &mut ChaCha8Rng::seed_from_u64(cfg.seed), base)?;
    let Outcome { rows, failures } = run_config(&cfg, &op, g.pinv, g.timing)?;
    let text = match g.format.unwrap_or(Format::Csv) {
        Format::Csv => csv_rows::<Row>(&rows)?,
        Format::Json => to_json(&json!({
            "meta": meta(cfg.seed),
            "config": cfg,
            "rows": rows,
            "failures": failures,
        })),
    };
    emit(&g.out, &text)?;
    Ok(
        (!failures.is_empty())
            .then(|| Degenerate(serde_json::to_value::<&[Failure]>(&failures).expect("serializable"))),
    )
}

fn build_tst_output(g: &Global, spec: &TstSpec, emit_spec: bool) -> Result<()> {
    if emit_spec {
        return emit(&g.out, &to_json(&TstSpecJson::from_spec(spec, g.canonical)));
    }
    let op = tst_operator(spec);
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(&g.out, &matrix_csv(op.kernel(), g.canonical)),
        Format::Json => {
            let m = json!({ "b1": spec.b1(), "nu1": spec.nu1(), "atoms": spec.alpha().len() });
            emit(
                &g.out,
                &to_json(&ComplexArray::from_linop(&op, g.canonical).with_meta(m)),
            )
        }
    }
}

#[derive(Serialize)]
struct ReducedTerm {
    i: usize,
    j: usize,
    time_step: usize,
    time_offset: usize,
    freq_step: usize,
    freq_offset: usize,
    window: ComplexArray,
    mask: MaskJson,
}

#[derive(Serialize)]
struct TermRow {
    case: &'static str,
    i: usize,
    j: usize,
    time_step: usize,
    time_offset: usize,
    freq_step: usize,
    freq_offset: usize,
    window_norm: f64,
    residual: f64,
    reconstruction_err: f64,
}

fn rel_hs(op: &LinOp, approx: &LinOp) -> Result<f64> {
    let norm = op.hs_norm();
    let diff = op.sub(approx)?.hs_norm();
    Ok(if norm == 0.0 { diff } else { diff / norm })
}

#[allow(clippy::too_many_arguments)]
fn cmd_tst_reduce(
    g: &Global,
    spec: &TstSpec,
    lat: LatticeArg,
    width: f64,
    h_width: Option<f64>,
    pq: Option<(usize, usize)>,
) -> Result<()> {
    let n = spec.n();
    let lat = lattice(n, lat)?;
    let gw = gauss_window(n, width)?;
    let hw = gauss_window(n, h_width.unwrap_or(width))?;
    let mode = if g.strict_tst {
        TstMode::Strict
    } else {
        TstMode::Lenient
    };
    let op = tst_operator(spec);
    let single = pq.is_none() && lat.is_adjoint_point(spec.b1() as i64, spec.nu1() as i64);
    let (case, terms, residual, approx) = if single {
        let red = tst_to_single_gm(spec, gw.signal(), hw.signal(), &lat, mode)?;
        let approx = gm_matrix(&red.mask, gw.signal(), red.gamma.signal())?;
        let t = (0, 0, lat.a(), 0, lat.b(), 0, red.gamma, red.mask);
        ("single", vec![t], red.residual, approx)
    } else {
        let (p, q) = match pq {
            Some(pq) => pq,
            None => {
                let (pb, qa) = (lat.b() * spec.b1(), lat.a() * spec.nu1());
                if pb == 0 || qa == 0 || !n.is_multiple_of(pb) || !n.is_multiple_of(qa) {
                    bail!("cannot infer p, q: N = {n} is not a multiple of b*b1 = {pb} and a*nu1 = {qa}");
                }
                (n / pb, n / qa)
            }
        };
        let sum = tst_to_gm_sum(spec, gw.signal(), hw.signal(), &lat, p, q, mode)?;
        let approx = sum.operator(gw.signal())?;
        let terms = sum
            .terms
            .into_iter()
            .map(|t| {
                (
                    t.i,
                    t.j,
                    t.time_step,
                    t.time_offset,
                    t.freq_step,
                    t.freq_offset,
                    t.gamma,
                    t.mask,
                )
            })
            .collect();
        ("sum", terms, sum.residual, approx)
    };
    let err = rel_hs(&op, &approx)?;
    let c = g.canonical;
    let text = match g.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let rows: Vec<TermRow> = terms
                .iter()
                .map(|t| TermRow {
                    case,
                    i: t.0,
                    j: t.1,
                    time_step: t.2,
                    time_offset: t.3,
                    freq_step: t.4,
                    freq_offset: t.5,
                    window_norm: num(t.6.signal().norm(), c),
                    residual: num(residual, c),
                    reconstruction_err: num(err, c),
                })
                .collect();
            csv_rows(&rows)?
        }
        Format::Json => {
            let terms: Vec<ReducedTerm> = terms
                .iter()
                .map(|t| ReducedTerm {
                    i: t.0,
                    j: t.1,
                    time_step: t.2,
                    time_offset: t.3,
                    freq_step: t.4,
                    freq_offset: t.5,
                    window: ComplexArray::from_signal(t.6.signal(), c),
                    mask: MaskJson::from_mask(&t.7, Some(t.6.tag()), c),
                })
                .collect();
            to_json(&json!({
                "case": case,
                "residual": num(residual, c),
                "reconstruction_err": num(err, c),
                "terms": terms,
            }))
        }
    };
    emit(&g.out, &text)
}

fn emit_record<T: Serialize>(g: &Global, rec: &T) -> Result<()> {
    match g.format.unwrap_or(Format::Json) {
        Format::Csv => emit(&g.out, &csv_rows(std::slice::from_ref(rec))?),
        Format::Json => emit(&g.out, &to_json(rec)),
    }
}

#[derive(Serialize)]
struct FrameRecord {
    n: usize,
    a: usize,
    b: usize,
    width: f64,
    lower: f64,
    upper: f64,
    condition: f64,
    is_frame: bool,
}

fn cmd_frame_check(g: &Global, n: usize, lat: LatticeArg, width: f64) -> Result<Option<Degenerate>> {
    let lat = lattice(n, lat)?;
    let w = gauss_window(n, width)?;
    let fb = frame_bounds(w.signal(), &lat)?;
    let c = g.canonical;
    let rec = FrameRecord {
        n,
        a: lat.a(),
        b: lat.b(),
        width: num(width, c),
        lower: num(fb.lower, c),
        upper: num(fb.upper, c),
        condition: num(fb.condition(), c),
        is_frame: fb.is_frame(),
    };
    emit_record(g, &rec)?;
    Ok((!rec.is_frame).then(|| {
        Degenerate(json!([{
            "kind": "frame",
            "lattice": format!("{}x{}", rec.a, rec.b),
            "width": rec.width,
            "value": rec.lower,
            "condition": rec.condition,
        }]))
    }))
}

#[derive(Serialize)]
struct RieszRecord {
    n: usize,
    a: usize,
    b: usize,
    width: f64,
    windows: usize,
    min: f64,
    max: f64,
    argmin_lag: usize,
    argmin_doppler: usize,
    condition: f64,
    riesz: bool,
}

fn cmd_riesz_check(
    g: &Global,
    n: usize,
    lat: LatticeArg,
    width: f64,
    synthesis: SynthesisArg,
    shifts: &[ShiftArg],
) -> Result<Option<Degenerate>> {
    let lat = lattice(n, lat)?;
    let gw = gauss_window(n, width)?;
    let hw: Window = match synthesis {
        SynthesisArg::Same => gw.clone(),
        SynthesisArg::Dual => dual_window(&gw, &lat)?,
    };
    let (windows, min, max, argmin, condition, riesz) = if shifts.is_empty() {
        let u = u_function(gw.signal(), hw.signal(), &lat)?;
        let (min, max) = (u.min(), u.max());
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        (1, min, max, u.argmin(), cond, min >= RIESZ_TOLERANCE * max && max > 0.0)
    } else {
        let shifts: Vec<(i64, i64)> = shifts.iter().map(|s| (s.0, s.1)).collect();
        let ws = WindowSet::shifted(gw, &hw, &shifts, lat)?;
        let s = gamma_field(&ws)?.spectrum();
        let ok = s.min > 0.0 && s.condition <= GAMMA_CONDITION_LIMIT;
        (shifts.len(), s.min, s.max, s.argmin, s.condition, ok)
    };
    let c = g.canonical;
    let rec = RieszRecord {
        n,
        a: lat.a(),
        b: lat.b(),
        width: num(width, c),
        windows,
        min: num(min, c),
        max: num(max, c),
        argmin_lag: argmin.0,
        argmin_doppler: argmin.1,
        condition: num(condition, c),
        riesz,
    };
    emit_record(g, &rec)?;
    Ok((!riesz).then(|| {
        Degenerate(json!([{
            "kind": "riesz",
            "lattice": format!("{}x{}", rec.a, rec.b),
            "width": rec.width,
            "point": [argmin.0, argmin.1],
            "value": rec.min,
        }]))
    }))
}

#[allow(clippy::too_many_arguments)]
fn mgm_config(
    g: &Global,
    n: usize,
    lat: LatticeArg,
    widths: Vec<f64>,
    shifts: &[ShiftArg],
    compare: Option<LatticeArg>,
    synthesis: SynthesisArg,
    op: &OpArgs,
) -> ExperimentConfig {
    ExperimentConfig {
        n,
        lattices: vec![[lat.0, lat.1]],
        widths,
        synthesis: synthesis.into(),
        operator: op.source(OpKind::PerturbedLti),
        scheme: Scheme::Mgm {
            shifts: shifts.iter().map(|s| [s.0, s.1]).collect(),
            compare_gm: compare.map(|c| [c.0, c.1]),
        },
        seed: g.seed,
    }
}

fn config_or<F: FnOnce() -> ExperimentConfig>(
    path: &Option<PathBuf>,
    flags: F,
) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    match path {
        Some(p) => Ok((load_config(p)?, p.parent().map(Path::to_path_buf))),
        None => Ok((flags(), None)),
    }
}

fn run(cli: Cli) -> Result<Option<Degenerate>> {
    let g = &cli.global;
    match cli.command {
        Command::Spreading { input } => cmd_spreading(g, &input).map(|_| None),
        Command::Kernel { input } => cmd_kernel(g, &input).map(|_| None),
        Command::RandomOp { n, op } => cmd_random_op(g, n, &op).map(|_| None),
        Command::ApproxGm {
            config,
            n,
            lattice,
            widths,
            synthesis,
            op,
            dump_config,
        } => {
            let (cfg, base) = config_or(&config, || ExperimentConfig {
                n,
                lattices: lattice.iter().map(|l| [l.0, l.1]).collect(),
                widths,
                synthesis: synthesis.into(),
                operator: op.source(OpKind::Rect),
                scheme: Scheme::Gm,
                seed: g.seed,
            })?;
            if cfg.scheme != Scheme::Gm {
                bail!("approx-gm needs a configuration with scheme kind \"gm\"");
            }
            run_approx(g, cfg, base.as_deref(), dump_config)
        }
        Command::ApproxMgm {
            config,
            n,
            lattice,
            widths,
            shifts,
            compare_gm,
            synthesis,
            op,
            dump_config,
        } => {
            let (cfg, base) = config_or(&config, || {
                mgm_config(g, n, lattice, widths, &shifts, compare_gm, synthesis, &op)
            })?;
            if !matches!(cfg.scheme, Scheme::Mgm { .. }) {
                bail!("approx-mgm needs a configuration with scheme kind \"mgm\"");
            }
            run_approx(g, cfg, base.as_deref(), dump_config)
        }
        Command::TstBuild { source, emit_spec } => {
            let spec = source.load(g.seed)?;
            build_tst_output(g, &spec, emit_spec).map(|_| None)
        }
        Command::TstReduce {
            source,
            lattice,
            width,
            h_width,
            p,
            q,
        } => {
            let spec = source.load(g.seed)?;
            cmd_tst_reduce(g, &spec, lattice, width, h_width, p.zip(q)).map(|_| None)
        }
        Command::FrameCheck { n, lattice, width } => cmd_frame_check(g, n, lattice, width),
        Command::RieszCheck {
            n,
            lattice,
            width,
            synthesis,
            shifts,
        } => cmd_riesz_check(g, n, lattice, width, synthesis, &shifts),
    }
}

fn degenerate_report(err: &TfError) -> Option<Value> {
    match *err {
        TfError::RieszFailure { point, value } => Some(json!([{
            "kind": "riesz",
            "point": [point.0, point.1],
            "value": value,
        }])),
        TfError::FrameFailure {
            smallest_eigenvalue,
            condition,
        } => Some(json!([{
            "kind": "frame",
            "value": smallest_eigenvalue,
            "condition": condition,
        }])),
        _ => None,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TFOP_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .with_context(|| format!("TFOP_THREADS must be a positive integer, got '{v}'"))?;
        if threads == 0 {
            bail!("TFOP_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn report<E: Display>(e: E) -> ExitCode {
    eprintln!("error: {e:#}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report(e);
    }
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Degenerate(list))) => {
            eprintln!("{}", to_json(&list).trim_end());
            ExitCode::from(EXIT_DEGENERATE)
        }
        Err(e) => match e.downcast_ref::<TfError>().and_then(degenerate_report) {
            Some(list) => {
                eprintln!("error: {e:#}");
                eprintln!("{}", to_json(&list).trim_end());
                ExitCode::from(EXIT_DEGENERATE)
            }
            None => report(e),
        },
    }
}
