use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use symmetra::bundle::{check_covariance, Assemblage, SymmetryData, DEFAULT_SECTION_CAP};
use symmetra::construct::{construct_assemblages, platonic_assemblage, ConstructionOptions, GroupingMode, Solid};
use symmetra::data::load_group;
use symmetra::incompat::{
    compatibility_oracle, dual_certificate_with, is_uniform, robustness_report, AnalysisOptions, NoiseKind,
    OracleOptions, RobustnessReport, ScanMethod,
};
use symmetra::io::{export_assemblage, import_assemblage, import_symmetry_doc};
use symmetra::mub::{clifford_stabilizer_rigidity, field_for_dimension, mub_assemblage, mub_symmetry_group};
use symmetra::par::Execution;
use symmetra::steering::flag_beats_dichotomic;
use symmetra::tables::{run_table, Agreement, TableId, TableOptions, TableRow, TABLE_SECTION_CAP};

/// Largest affine group attached to an exported odd-dimensional MUB set.
const MUB_GROUP_BUDGET: usize = 5_000;

#[derive(Parser)]
#[command(name = "symmetra", version, about = "Symmetric measurement assemblages and their incompatibility robustness")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Tolerance for symmetry checks and the compatibility oracle.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tolerance: f64,
    /// Largest number of sections scanned exhaustively.
    #[arg(long, global = true)]
    section_cap: Option<u128>,
    /// Worker threads for the parallel scans.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved: every algorithm here is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build assemblages from a shipped or user-supplied group.
    Construct(ConstructArgs),
    /// Print the complete set of mutually unbiased bases as an assemblage document.
    Mub(MubArgs),
    /// Section statistics and closed-form robustnesses of an assemblage.
    Analyze(AnalyzeArgs),
    /// Steering thresholds compared with the two-outcome bounds.
    Steer(SteerArgs),
    /// Recompute a published table.
    Table(TableArgs),
    /// Write an assemblage document.
    Export(ExportArgs),
    /// Check covariance, symmetry, uniformity and rigidity.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Projective,
    Povm,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    White,
    Complement,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::White => NoiseKind::White,
            NoiseArg::Complement => NoiseKind::Complement,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Table1,
    Table2,
    Table3,
}

#[derive(Args)]
struct ConstructArgs {
    /// Group name (st8, st16, st24, st25, st27, st28, binary_octahedral,
    /// binary_icosahedral) or path to a group file.
    #[arg(long)]
    group: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Projective)]
    mode: ModeArg,
    /// Outcomes per measurement in povm mode.
    #[arg(long)]
    n: Option<usize>,
    /// Also compute α* and β* of every assemblage.
    #[arg(long)]
    analyze: bool,
    /// Write one document per assemblage into this directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct MubArgs {
    #[arg(long)]
    dimension: usize,
    /// Omit the affine symmetry group.
    #[arg(long)]
    no_symmetry: bool,
}

#[derive(Args)]
struct Source {
    /// Assemblage document, `-` for stdin.
    #[arg(long, default_value = "-")]
    assemblage: String,
    /// Symmetry document; overrides one embedded in the assemblage.
    #[arg(long)]
    symmetry: Option<PathBuf>,
    #[arg(long, conflicts_with = "greedy")]
    exhaustive: bool,
    /// Greedy bounds instead of the exhaustive scan.
    #[arg(long)]
    greedy: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    /// Run the compatibility oracle at this noise level.
    #[arg(long)]
    oracle: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::White)]
    noise: NoiseArg,
    /// Evaluate the dual certificate built from λ.
    #[arg(long)]
    certificate: bool,
}

#[derive(Args)]
struct SteerArgs {
    #[command(flatten)]
    source: Source,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    name: TableArg,
    /// Only rows of this dimension.
    #[arg(long)]
    dimension: Option<usize>,
    /// Skip rows above this dimension.
    #[arg(long, default_value_t = 9)]
    max_d: usize,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["solid", "mub", "assemblage"])))]
struct ExportArgs {
    /// octahedron, cube, cuboctahedron, icosahedron, dodecahedron or icosidodecahedron.
    #[arg(long)]
    solid: Option<String>,
    /// Dimension of a complete MUB set.
    #[arg(long)]
    mub: Option<usize>,
    /// Re-export a validated document, `-` for stdin.
    #[arg(long)]
    assemblage: Option<String>,
    #[arg(long)]
    with_symmetry: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Assemblage document, `-` for stdin.
    #[arg(long, conflicts_with = "clifford_qubits")]
    assemblage: Option<String>,
    #[arg(long, conflicts_with = "clifford_qubits")]
    symmetry: Option<PathBuf>,
    /// Also evaluate the dual certificate built from λ.
    #[arg(long)]
    certificate: bool,
    /// Check rigidity of the n-qubit Clifford stabiliser instead.
    #[arg(long)]
    clifford_qubits: Option<usize>,
}

enum Failure {
    /// Exit 1.
    Check(String),
    /// Exit 2.
    Usage(String),
}

impl From<symmetra::Error> for Failure {
    fn from(e: symmetra::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    json: bool,
    tolerance: f64,
    section_cap: Option<u128>,
}

impl Ctx {
    fn cap(&self, default: u128) -> u128 {
        self.section_cap.unwrap_or(default)
    }

    fn emit(&self, value: &Value, human: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("value serialises"));
        } else {
            print!("{}", human());
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut s = String::new();
    if path == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?;
    }
    Ok(s)
}

fn load_source(path: &str, symmetry: Option<&Path>) -> Result<(Assemblage, Option<SymmetryData>), Failure> {
    let (a, embedded) = import_assemblage(&read_input(path)?)?;
    let sym = match symmetry {
        Some(p) => Some(import_symmetry_doc(&a, &read_input(&p.to_string_lossy())?)?),
        None => embedded,
    };
    Ok((a, sym))
}

fn analysis(ctx: &Ctx, src: &Source) -> AnalysisOptions {
    let method = if src.greedy { ScanMethod::Greedy } else { ScanMethod::Exhaustive };
    AnalysisOptions { method, section_cap: ctx.cap(DEFAULT_SECTION_CAP), exec: Execution::Parallel }
}

fn solid_symmetry(solid: Solid, a: &Assemblage) -> symmetra::Result<SymmetryData> {
    let group = match solid {
        Solid::Octahedron | Solid::Cube | Solid::Cuboctahedron => "st8",
        _ => "st16",
    };
    SymmetryData::from_conjugation(Arc::new(load_group(group)?), a)
}

fn mub_with_symmetry(d: usize, want: bool) -> symmetra::Result<(Assemblage, Option<SymmetryData>)> {
    let f = field_for_dimension(d)?;
    let a = mub_assemblage(&f)?;
    let q = f.order();
    let sym = if want && f.p() != 2 && q * q * q * (q * q - 1) <= MUB_GROUP_BUDGET {
        Some(mub_symmetry_group(&f, &a)?)
    } else {
        None
    };
    Ok((a, sym))
}

fn report_line(r: &RobustnessReport) -> String {
    format!(
        "{:<28} d={:<2} |M|={:<4} |Ω|={:<5} λ={:.12} μ={:.12} α*={:.12} ({:?}) β*={:.12} ({:?}) certified={}\n",
        r.name,
        r.dim,
        r.n_measurements,
        r.n_outcomes,
        r.lambda.value,
        r.mu.value,
        r.alpha_star,
        r.alpha_bound,
        r.beta_star,
        r.beta_bound,
        r.formula_certified
    )
}

fn cmd_construct(ctx: &Ctx, args: &ConstructArgs) -> Outcome {
    let mode = match (args.mode, args.n) {
        (ModeArg::Projective, None) => GroupingMode::Projective,
        (ModeArg::Povm, Some(n)) if n >= 2 => GroupingMode::Povm(n),
        (ModeArg::Povm, _) => return Err(Failure::Usage("--mode povm needs --n of at least 2".into())),
        (ModeArg::Projective, Some(_)) => return Err(Failure::Usage("--n only applies to --mode povm".into())),
    };
    let group = Arc::new(load_group(&args.group)?);
    let res = construct_assemblages(group.clone(), &ConstructionOptions { mode, ..Default::default() })?;
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    }
    let mut rows = Vec::new();
    let mut text = format!("{} (order {}): {} assemblages, {} orbits rejected\n", group.name(), group.order(), res.assemblages.len(), res.rejected.len());
    for (i, c) in res.assemblages.iter().enumerate() {
        let a = &c.assemblage;
        let mut row = json!({
            "name": a.name(),
            "dim": a.dim(),
            "n_measurements": a.n_measurements(),
            "n_outcomes": a.n_outcomes(),
            "projection_rank": c.projection_rank,
            "stabilizer_order": c.stabilizer_order,
        });
        text += &format!(
            "  {:<28} |M|={:<4} |Ω|={:<5} rank={} stabiliser order={}",
            a.name(),
            a.n_measurements(),
            a.n_outcomes(),
            c.projection_rank,
            c.stabilizer_order
        );
        if args.analyze {
            let cap = ctx.cap(TABLE_SECTION_CAP);
            let method = if a.bundle().section_count() <= cap { ScanMethod::Exhaustive } else { ScanMethod::Greedy };
            let r = robustness_report(a, Some(&c.symmetry), &AnalysisOptions { method, section_cap: cap, exec: Execution::Parallel })?;
            text += &format!("  α*={:.12} ({:?}) β*={:.12} ({:?})", r.alpha_star, r.alpha_bound, r.beta_star, r.beta_bound);
            row["report"] = serde_json::to_value(&r).expect("report serialises");
        }
        if let Some(dir) = &args.out_dir {
            let path = dir.join(format!("{i:02}-{}.json", a.name()));
            std::fs::write(&path, export_assemblage(a, Some(&c.symmetry)))
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            row["file"] = json!(path.display().to_string());
        }
        text.push('\n');
        rows.push(row);
    }
    let rejected = serde_json::to_value(&res.rejected).expect("rejections serialise");
    ctx.emit(&json!({ "group": group.name(), "order": group.order(), "assemblages": rows, "rejected": rejected }), || text);
    Ok(())
}

fn cmd_mub(args: &MubArgs) -> Outcome {
    let (a, sym) = mub_with_symmetry(args.dimension, !args.no_symmetry)?;
    println!("{}", export_assemblage(&a, sym.as_ref()));
    Ok(())
}

fn cmd_analyze(ctx: &Ctx, args: &AnalyzeArgs) -> Outcome {
    let (a, sym) = load_source(&args.source.assemblage, args.source.symmetry.as_deref())?;
    let opts = analysis(ctx, &args.source);
    let rep = robustness_report(&a, sym.as_ref(), &opts)?;
    let mut out = serde_json::to_value(&rep).expect("report serialises");
    let mut text = report_line(&rep);
    if let Some(note) = &rep.formula_note {
        text += &format!("  note: {note}\n");
    }
    if args.certificate {
        let cert = dual_certificate_with(&a, &rep, opts.section_cap, opts.exec)?;
        text += &format!(
            "  dual certificate: first residual {:.2e}, worst section eigenvalue {:.2e}, bound {:.12}\n",
            cert.first_residual, cert.worst_section_min_eig, cert.certified_upper_bound
        );
        out["certificate"] = serde_json::to_value(&cert).expect("certificate serialises");
    }
    if let Some(eta) = args.oracle {
        let oopts = OracleOptions { tol: ctx.tolerance.max(1e-12), ..Default::default() };
        let o = compatibility_oracle(&a, sym.as_ref(), eta, args.noise.into(), &oopts)?;
        text += &format!("  oracle at η={eta}: {:?} after {} iterations (residual {:.2e})\n", o.verdict, o.iterations, o.residual);
        out["oracle"] = serde_json::to_value(&o).expect("outcome serialises");
    }
    ctx.emit(&out, || text);
    Ok(())
}

fn cmd_steer(ctx: &Ctx, args: &SteerArgs) -> Outcome {
    let (a, sym) = load_source(&args.source.assemblage, args.source.symmetry.as_deref())?;
    let rep = robustness_report(&a, sym.as_ref(), &analysis(ctx, &args.source))?;
    let s = flag_beats_dichotomic(&rep, a.dim());
    let text = format!(
        "{}: isotropic {:.12} ({:?}) vs two-outcome {:.4}: {:?}\n{}  werner    {:.12} ({:?}) vs two-outcome {:.4}: {:?}\n",
        rep.name,
        s.isotropic_threshold,
        s.isotropic_bound,
        s.dichotomic_iso,
        s.iso_status,
        " ".repeat(rep.name.len()),
        s.werner_threshold,
        s.werner_bound,
        s.dichotomic_wer,
        s.wer_status
    );
    ctx.emit(&serde_json::to_value(&s).expect("report serialises"), || text);
    Ok(())
}

fn agreement_tag(a: Agreement) -> &'static str {
    match a {
        Agreement::Match => "ok",
        Agreement::ConsistentBound => "bound",
        Agreement::Mismatch => "MISMATCH",
        Agreement::NotComputed => "-",
    }
}

fn table_line(r: &TableRow) -> String {
    let s = &r.spec;
    let n = s.n.map_or(String::new(), |n| format!(" n={n}"));
    let head = format!("{} d={:<2} {:<6}{} |M|={:<4}", s.table.name(), s.dim, s.group, n, s.measurements);
    match &r.computed {
        Some(c) => format!(
            "{head} α* {:.10} vs {:.4} [{}]  β* {:.10} vs {:.4} [{}]  ‡ {}/{:?} [{}]  {:?}{}\n",
            c.alpha_star,
            s.expected_alpha.decimal,
            agreement_tag(r.alpha),
            c.beta_star,
            s.expected_beta.decimal,
            agreement_tag(r.beta),
            if s.expected_dagger { "yes" } else { "no" },
            c.werner_vs_dichotomic,
            agreement_tag(r.dagger),
            c.method,
            if c.formula_certified { "" } else { " uncertified" },
        ),
        None => format!("{head} not computed: {}\n", r.note.as_deref().unwrap_or("")),
    }
}

fn cmd_table(ctx: &Ctx, args: &TableArgs) -> Outcome {
    let id = match args.name {
        TableArg::Table1 => TableId::Table1,
        TableArg::Table2 => TableId::Table2,
        TableArg::Table3 => TableId::Table3,
    };
    let opts = TableOptions {
        dimension: args.dimension,
        max_d: args.max_d,
        section_cap: ctx.cap(TABLE_SECTION_CAP),
        exec: Execution::Parallel,
    };
    let rows = run_table(id, &opts)?;
    ctx.emit(&serde_json::to_value(&rows).expect("rows serialise"), || rows.iter().map(table_line).collect());
    let bad = rows.iter().filter(|r| r.has_mismatch()).count();
    if bad > 0 {
        return Err(Failure::Check(format!("{bad} rows disagree with the published values")));
    }
    Ok(())
}

fn cmd_export(args: &ExportArgs) -> Outcome {
    let (a, sym) = if let Some(name) = &args.solid {
        let solid = Solid::parse(name).ok_or_else(|| Failure::Usage(format!("unknown solid {name:?}")))?;
        let a = platonic_assemblage(solid);
        let sym = if args.with_symmetry { Some(solid_symmetry(solid, &a)?) } else { None };
        (a, sym)
    } else if let Some(d) = args.mub {
        mub_with_symmetry(d, args.with_symmetry)?
    } else {
        let path = args.assemblage.as_deref().unwrap_or("-");
        let (a, sym) = import_assemblage(&read_input(path)?)?;
        let sym = if args.with_symmetry { sym } else { None };
        (a, sym)
    };
    let doc = export_assemblage(&a, sym.as_ref());
    match &args.out {
        Some(p) => std::fs::write(p, doc).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => println!("{doc}"),
    }
    Ok(())
}

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs) -> Outcome {
    let mut checks: Vec<(String, bool, Value)> = Vec::new();
    if let Some(n) = args.clifford_qubits {
        let r = clifford_stabilizer_rigidity(n)?;
        checks.push(("clifford_stabilizer_rigid".into(), r.rigid, serde_json::to_value(&r).expect("serialises")));
    } else {
        let path = args.assemblage.as_deref().unwrap_or("-");
        let (a, sym) = load_source(path, args.symmetry.as_deref())?;
        let norm = a.check_normalization(ctx.tolerance);
        checks.push(("normalization".into(), norm.ok, serde_json::to_value(norm).expect("serialises")));
        checks.push(("uniform".into(), is_uniform(&a), Value::Null));
        if let Some(s) = &sym {
            let cov = check_covariance(s.group(), a.bundle(), s.outcome_action());
            checks.push(("covariance".into(), cov.ok, Value::Null));
            let chk = s.check_symmetry(&a, ctx.tolerance);
            checks.push(("symmetry".into(), chk.ok, json!({ "residual": chk.residual })));
            checks.push(("transitive".into(), s.is_uniform(), Value::Null));
            let rig = s.rigidity(&a);
            checks.push(("rigid".into(), rig.rigid, serde_json::to_value(&rig).expect("serialises")));
        }
        if args.certificate {
            let rep = robustness_report(&a, sym.as_ref(), &AnalysisOptions { section_cap: ctx.cap(DEFAULT_SECTION_CAP), ..Default::default() })?;
            match dual_certificate_with(&a, &rep, ctx.cap(DEFAULT_SECTION_CAP), Execution::Parallel) {
                Ok(c) => checks.push(("dual_certificate".into(), true, serde_json::to_value(&c).expect("serialises"))),
                Err(e) => checks.push(("dual_certificate".into(), false, json!({ "error": e.to_string() }))),
            }
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    let value = json!({
        "ok": failed.is_empty(),
        "checks": checks.iter().map(|(name, ok, detail)| json!({ "name": name, "ok": ok, "detail": detail })).collect::<Vec<_>>(),
    });
    ctx.emit(&value, || checks.iter().map(|(name, ok, _)| format!("{:<24} {}\n", name, if *ok { "pass" } else { "FAIL" })).collect());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed: {}", failed.join(", "))))
    }
}

fn configure_threads(n: Option<usize>) -> Outcome {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads(cli.threads)?;
    let ctx = Ctx { json: cli.json, tolerance: cli.tolerance, section_cap: cli.section_cap };
    match &cli.command {
        Command::Construct(a) => cmd_construct(&ctx, a),
        Command::Mub(a) => cmd_mub(a),
        Command::Analyze(a) => cmd_analyze(&ctx, a),
        Command::Steer(a) => cmd_steer(&ctx, a),
        Command::Table(a) => cmd_table(&ctx, a),
        Command::Export(a) => cmd_export(a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
