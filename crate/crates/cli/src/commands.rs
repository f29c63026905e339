use std::error::Error;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use slcpop_conic::{export_cbf, export_sdpa, ConicError, SolverOptions};
use slcpop_core::bestslc::{
    build_best_slc_program_with, build_fixed_program, build_gershgorin_variant, solve_fixed, solve_relaxation, Family,
    RootOptions, Variant,
};
use slcpop_core::bnb::{solve_global, BnbOptions};
use slcpop_core::local::local_search_upper_bound;
use slcpop_core::oracle::{brute_force_min, default_grid, DEFAULT_STARTS};
use slcpop_core::problem::Problem;
use slcpop_core::random::{random_box_instance, random_constrained_instance};
use slcpop_core::rpt::generate_lifted_region;
use slcpop_core::slc::{
    construct_slc_degree3, construct_slc_degree4, construct_slc_first_type, construct_slc_general, reconstruct,
    DecompositionKind, SlcDecomposition,
};
use slcpop_core::SlcError;

use crate::input::parse_problem;
use crate::report::*;

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Debug, Parser)]
#[command(name = "slcpop", version, about = "Polynomial optimization over boxes with best SLC relaxations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global solve by branch and bound.
    Solve(SolveArgs),
    /// Print the product-form decomposition of the objective.
    Decompose(DecomposeArgs),
    /// Root lower bound only.
    Relax(RelaxArgs),
    /// Write the root conic program.
    Export(ExportArgs),
    /// Compare the global solve with the brute-force oracle.
    Verify(VerifyArgs),
    /// Seeded random-instance sweep as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Embedded,
    ExportCbf,
    ExportSdpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Cbf,
    Sdpa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Best,
    Gershgorin,
}

impl VariantArg {
    fn variant(self) -> Variant {
        match self {
            VariantArg::Best => Variant::BestSlc,
            VariantArg::Gershgorin => Variant::Gershgorin,
        }
    }

    fn name(self) -> &'static str {
        match self {
            VariantArg::Best => "best-slc",
            VariantArg::Gershgorin => "gershgorin",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Auto,
    Degree3,
    Degree4,
    General,
    FirstType,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON).
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Backend::Embedded)]
    pub backend: Backend,
    /// Output path for exported programs; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub gap: f64,
    /// Seconds.
    #[arg(long)]
    pub max_time: Option<f64>,
    #[arg(long)]
    pub max_nodes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra random starts of the root local search.
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Auto)]
    pub kind: KindArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RelaxArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = VariantArg::Best)]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Cbf)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = VariantArg::Best)]
    pub variant: VariantArg,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Oracle grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    /// Number of instances.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add one polynomial constraint of the same degree.
    #[arg(long)]
    pub constrained: bool,
    /// Extra random starts of the local search.
    #[arg(long, default_value_t = 20)]
    pub starts: usize,
}

fn load(path: &PathBuf) -> Res<Problem> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let pf = parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(pf.to_problem()?)
}

fn refuse_exp_cones(problem: &Problem) -> Res<()> {
    if problem.has_log_sum_exp() {
        return Err("log-sum-exp constraints need an external solver: the embedded backend handles \
                    zero, nonnegative and PSD cones only; use `export --format cbf`"
            .into());
    }
    Ok(())
}

fn bnb_options(s: &SearchArgs) -> Res<BnbOptions> {
    if !(s.gap > 0.0 && s.gap < 1.0) {
        return Err(format!("--gap must lie in (0, 1), got {}", s.gap).into());
    }
    if s.max_time.is_some_and(|t| !(t > 0.0)) {
        return Err("--max-time must be positive".into());
    }
    if s.max_nodes == Some(0) {
        return Err("--max-nodes must be positive".into());
    }
    Ok(BnbOptions {
        gap: s.gap,
        max_time: s.max_time.map(Duration::from_secs_f64),
        max_nodes: s.max_nodes,
        starts: s.starts,
        seed: s.seed,
        ..BnbOptions::default()
    })
}

fn root_program(problem: &Problem, variant: Variant) -> Res<slcpop_conic::ConicProgram> {
    let unit = problem.normalized()?;
    let family = Family::for_degree(unit.degree().max(3));
    let opts = RootOptions::default();
    let region = generate_lifted_region(&unit, family.degree(), opts.region)?;
    let model = match variant {
        Variant::BestSlc => build_best_slc_program_with(&unit, &region, family, &opts.model)?,
        Variant::Gershgorin => build_gershgorin_variant(&unit, &region)?,
    };
    Ok(model.program)
}

fn write_program(problem: &Problem, variant: Variant, format: Format, output: &Option<PathBuf>, out: &mut dyn Write) -> Res<()> {
    let prog = root_program(problem, variant)?;
    let bytes = match format {
        Format::Cbf => export_cbf(&prog)?,
        Format::Sdpa => export_sdpa(&prog).map_err(|e| -> Box<dyn Error> {
            match e {
                ConicError::UnsupportedCone { .. } => {
                    "the model has exponential cones (log-sum-exp constraints), which SDPA cannot hold; use --format cbf"
                        .into()
                }
                other => other.into(),
            }
        })?,
        Format::Table | Format::Json => return Err("export needs --format cbf or --format sdpa".into()),
    };
    match output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?,
        None => out.write_all(&bytes)?,
    }
    Ok(())
}

fn export_backend(common: &Common, variant: Variant, problem: &Problem, out: &mut dyn Write) -> Res<bool> {
    let format = match common.backend {
        Backend::Embedded => return Ok(false),
        Backend::ExportCbf => Format::Cbf,
        Backend::ExportSdpa => Format::Sdpa,
    };
    write_program(problem, variant, format, &common.output, out)?;
    Ok(true)
}

fn emit<T: serde::Serialize>(format: Format, report: &T, rows: Vec<(&str, String)>, out: &mut dyn Write) -> Res<()> {
    match format {
        Format::Json => out.write_all(to_json(report).as_bytes())?,
        Format::Table => out.write_all(table(&rows).as_bytes())?,
        Format::Cbf | Format::Sdpa => return Err("--format cbf/sdpa applies to export only".into()),
    }
    Ok(())
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> Res<i32> {
    let problem = load(&args.common.problem)?;
    if export_backend(&args.common, Variant::BestSlc, &problem, out)? {
        return Ok(0);
    }
    refuse_exp_cones(&problem)?;
    let r = solve_global(&problem, &bnb_options(&args.search)?)?;
    let report = SolveReport {
        command: "solve",
        status: r.status.as_str(),
        value: Num(r.value),
        lower_bound: Num(r.lower_bound),
        gap: Num(r.gap),
        hyp: r.hyperplanes,
        nodes: r.nodes,
        root_lower_bound: Num(r.root_lower_bound),
        point: r.point.as_ref().map(|x| sig_vec(x)),
        time_s: (r.wall_time.as_secs_f64() * 1e3).round() / 1e3,
    };
    let rows = vec![
        ("Status", r.status.as_str().to_string()),
        ("Opt", fmt_num(r.value)),
        ("LB", fmt_num(r.lower_bound)),
        ("Gap", format!("{:.3e}", r.gap)),
        ("Hyp", r.hyperplanes.to_string()),
        ("Nodes", r.nodes.to_string()),
        ("Root LB", fmt_num(r.root_lower_bound)),
        ("x", fmt_point(&r.point)),
        ("Time", format!("{:.3} s", r.wall_time.as_secs_f64())),
    ];
    emit(args.format, &report, rows, out)?;
    Ok(0)
}

fn relax(args: &RelaxArgs, out: &mut dyn Write) -> Res<i32> {
    let problem = load(&args.common.problem)?;
    if export_backend(&args.common, args.variant.variant(), &problem, out)? {
        return Ok(0);
    }
    refuse_exp_cones(&problem)?;
    let start = Instant::now();
    let opts = RootOptions {
        variant: args.variant.variant(),
        ..RootOptions::default()
    };
    let rb = solve_relaxation(&problem, &opts)?;
    let t = start.elapsed().as_secs_f64();
    let report = RelaxReport {
        command: "relax",
        variant: args.variant.name(),
        status: rb.status.as_str(),
        lower_bound: Num(rb.lower_bound),
        objective: Num(rb.objective),
        x: sig_vec(&rb.x),
        clip: Num(rb.clip),
        time_s: (t * 1e3).round() / 1e3,
    };
    let rows = vec![
        ("Variant", args.variant.name().to_string()),
        ("Status", rb.status.as_str().to_string()),
        ("LB", fmt_num(rb.lower_bound)),
        ("Objective", fmt_num(rb.objective)),
        ("x", fmt_point(&Some(rb.x.clone()))),
        ("Time", format!("{t:.3} s")),
    ];
    emit(args.format, &report, rows, out)?;
    Ok(0)
}

fn kind_name(k: DecompositionKind) -> &'static str {
    match k {
        DecompositionKind::Degree3 => "degree3",
        DecompositionKind::Degree4 => "degree4",
        DecompositionKind::General => "general",
        DecompositionKind::FirstType => "first-type",
    }
}

fn decompose_with(kind: KindArg, problem: &Problem) -> Result<SlcDecomposition, SlcError> {
    let p = &problem.objective;
    let d = p.degree().max(3);
    match kind {
        KindArg::Auto | KindArg::General => construct_slc_general(p, d),
        KindArg::Degree3 => construct_slc_degree3(p),
        KindArg::Degree4 => construct_slc_degree4(p),
        KindArg::FirstType => construct_slc_first_type(p),
    }
}

fn decompose(args: &DecomposeArgs, out: &mut dyn Write) -> Res<i32> {
    let problem = load(&args.problem)?;
    let dec = decompose_with(args.kind, &problem)?;
    let p = &problem.objective;
    let scale = p.max_abs_coef().max(1.0);
    let err = (&reconstruct(&dec) - p).max_abs_coef();
    let dominant = dec.blocks.iter().all(|(_, b)| b.is_dominant(1e-9 * scale));
    let min_eig = dec
        .blocks
        .iter()
        .map(|(_, b)| slcpop_conic::min_eigenvalue(&b.q))
        .fold(f64::INFINITY, f64::min);
    let n = dec.n;
    let blocks: Vec<BlockReport> = dec
        .blocks
        .iter()
        .map(|(desc, b)| BlockReport {
            factor: desc.to_string(),
            q: (0..n).map(|k| (0..n).map(|l| sig(b.q[(k, l)])).collect()).collect(),
            r: sig_vec(b.r.as_slice()),
            w: sig(b.w),
            higher: (!b.higher.is_zero()).then(|| b.higher.to_string()),
        })
        .collect();
    let report = DecomposeReport {
        command: "decompose",
        kind: kind_name(dec.kind),
        n,
        degree: dec.d,
        alpha: Num(dec.alpha),
        blocks,
        verification: Verification {
            max_coefficient_error: Num(err),
            all_dominant: dominant,
            min_eigenvalue: Num(min_eig),
        },
    };
    let mut rows = vec![
        ("Kind", kind_name(dec.kind).to_string()),
        ("Degree", dec.d.to_string()),
        ("alpha", fmt_num(dec.alpha)),
    ];
    let labels: Vec<String> = dec.blocks.iter().map(|(d, _)| format!("[{d}]")).collect();
    for ((_, b), label) in dec.blocks.iter().zip(&labels) {
        let mut s = b.to_polynomial().pruned(0.0).to_string();
        if s.is_empty() {
            s = "0".into();
        }
        rows.push((label.as_str(), s));
    }
    rows.push(("Max coef error", format!("{err:.3e}")));
    rows.push(("Dominant", dominant.to_string()));
    rows.push(("Min eigenvalue", fmt_num(min_eig)));
    emit(args.format, &report, rows, out)?;
    Ok(0)
}

fn export(args: &ExportArgs, out: &mut dyn Write) -> Res<i32> {
    let problem = load(&args.problem)?;
    write_program(&problem, args.variant.variant(), args.format, &args.output, out)?;
    Ok(0)
}

/// Relative tolerance of `verify`.
pub const VERIFY_TOL: f64 = 1e-3;

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Res<i32> {
    let problem = load(&args.common.problem)?;
    refuse_exp_cones(&problem)?;
    let r = solve_global(&problem, &bnb_options(&args.search)?)?;
    let grid = args.grid.unwrap_or_else(|| default_grid(problem.n()));
    let oracle = brute_force_min(&problem, grid, DEFAULT_STARTS)?;
    let rel = if r.value == oracle.value {
        0.0
    } else {
        (r.value - oracle.value).abs() / oracle.value.abs().max(1.0)
    };
    let pass = rel <= VERIFY_TOL;
    let report = VerifyReport {
        command: "verify",
        status: r.status.as_str(),
        value: Num(r.value),
        lower_bound: Num(r.lower_bound),
        oracle: Num(oracle.value),
        oracle_grid: grid,
        relative_error: Num(rel),
        pass,
    };
    let rows = vec![
        ("Status", r.status.as_str().to_string()),
        ("Opt", fmt_num(r.value)),
        ("LB", fmt_num(r.lower_bound)),
        ("Oracle", fmt_num(oracle.value)),
        ("Rel. error", format!("{rel:.3e}")),
        ("Result", if pass { "pass" } else { "FAIL" }.to_string()),
    ];
    emit(args.format, &report, rows, out)?;
    Ok(if pass { 0 } else { 1 })
}

fn bench(args: &BenchArgs, out: &mut dyn Write) -> Res<i32> {
    if args.n == 0 || args.degree == 0 {
        return Err("--n and --degree must be positive".into());
    }
    let d = args.degree.max(3);
    writeln!(out, "seed,n,degree,lb,construction_lb,ub,time_s")?;
    for seed in args.seed..args.seed + args.seeds {
        let problem = if args.constrained {
            random_constrained_instance(args.n, args.degree, seed)
        } else {
            random_box_instance(args.n, args.degree, seed)
        };
        let start = Instant::now();
        let rb = solve_relaxation(&problem, &RootOptions::default())?;
        let region = generate_lifted_region(&problem, d, RootOptions::default().region)?;
        let obj = construct_slc_general(&problem.objective, d)?;
        let cons: Vec<SlcDecomposition> = problem
            .polynomial_constraints()
            .map(|q| construct_slc_general(q, d))
            .collect::<Result<_, _>>()?;
        let fixed = build_fixed_program(&region, &obj, &cons)?;
        let construction = solve_fixed(&fixed, &SolverOptions::with_tol(1e-8))?;
        let ub = local_search_upper_bound(&problem, &rb.x, args.starts, seed).value;
        let t = start.elapsed().as_secs_f64();
        writeln!(
            out,
            "{seed},{},{},{},{},{},{:.3}",
            args.n,
            args.degree,
            sig(rb.lower_bound),
            sig(construction),
            sig(ub),
            t
        )?;
    }
    Ok(0)
}

/// Runs a command line; the return value is the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Res<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match &cli.command {
        Command::Solve(a) => solve(a, out),
        Command::Decompose(a) => decompose(a, out),
        Command::Relax(a) => relax(a, out),
        Command::Export(a) => export(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Bench(a) => bench(a, out),
    }
}
