//! The `faq` command-line driver.
//!
//! Exit status is 0 on success, 1 for bad input (arguments, query text,
//! data files) and 2 when an internal invariant fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use faq_core::engine::{run_insideout, EngineOptions, StepKind, Trace};
use faq_core::exec::Execution;
use faq_core::factor::VarId;
use faq_core::frontend::{emit_plan, format_output, load_instance, parse_query};
use faq_core::hypergraph::{CostModel, EdgeWeight, ProjectionPolicy, StepMode, WidthReport};
use faq_core::optimizer::{
    build_precedence_poset, faqw_of_ordering, optimize_ordering, tree_decomposition, OptimizerOptions, Optimized,
    SearchMode, DEFAULT_CAP,
};
use faq_core::oracle::brute_force_eval;
use faq_core::ordering::VariableOrdering;
use faq_core::query::{FaqQuery, Instance};
use faq_core::{FaqError, Result};

mod demo;

#[derive(Debug, Parser)]
#[command(name = "faq", version, about = "Evaluate functional aggregate queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a query with variable elimination.
    Run(RunArgs),
    /// Evaluate a query by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Report the width and tree decomposition of an ordering.
    Analyze(AnalyzeArgs),
    /// Search for a low-width variable ordering.
    Optimize(OptimizeArgs),
    /// Print the rule script of an evaluation.
    Plan(PlanArgs),
    /// Write a sample reduction (query, data and expected output).
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Query file.
    #[arg(short, long)]
    query: PathBuf,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Directory holding the factor files; defaults to the query's directory.
    #[arg(short, long)]
    data: Option<PathBuf>,
    /// Skip the first data line of every factor file.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Args)]
struct OrderArgs {
    /// `auto` (greedy search), `exact` (exhaustive search) or a comma list
    /// of variable names.
    #[arg(long, default_value = "auto")]
    order: String,
    /// Most linear extensions scored by exact search.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Debug, Args)]
struct EngineArgs {
    /// Never add indicator projections to a subquery.
    #[arg(long)]
    no_projections: bool,
    /// Power every value in product steps, even idempotent ones.
    #[arg(long)]
    no_idempotence: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cost {
    Uniform,
    /// Weigh edges by the logarithm of their factor sizes.
    Data,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_enum, default_value = "uniform")]
    cost: Cost,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print per-step statistics to standard error.
    #[arg(long)]
    stats: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    data: DataArgs,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    order: OrderArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Greedy,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    order: OrderArgs,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Problem {
    /// Matrix chain multiplication.
    Mcm,
    /// Maximum a posteriori inference.
    Map,
    /// Counting quantified conjunctive query answers.
    Qcq,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(value_enum)]
    problem: Problem,
    /// Directory to write into.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn execute_command<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run(a) => run(a, out, err),
        Command::Oracle(a) => oracle(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Plan(a) => plan(a, out),
        Command::Demo(a) => {
            demo::write_demo(a.problem, &a.out, a.seed)?;
            emit(out, &format!("wrote {}\n", a.out.display()))
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> FaqError + '_ {
    move |source| FaqError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io_error(Path::new("<stdout>")))
}

fn write_output(path: Option<&Path>, out: &mut dyn Write, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(io_error(p)),
        None => emit(out, text),
    }
}

fn read_query(args: &QueryArgs) -> Result<FaqQuery> {
    let text = std::fs::read_to_string(&args.query).map_err(io_error(&args.query))?;
    parse_query(&text).map_err(|e| match e {
        FaqError::Parse { position, message } => FaqError::Parse {
            position,
            message: format!("{}: {message}", args.query.display()),
        },
        e => e,
    })
}

fn read_instance(q: &QueryArgs, d: &DataArgs) -> Result<Instance> {
    let query = read_query(q)?;
    let dir = match &d.data {
        Some(dir) => dir.clone(),
        None => q.query.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    load_instance(&query, &dir, d.header)
}

fn names(query: &FaqQuery, vars: &[VarId]) -> String {
    vars.iter().map(|&v| query.var_name(v)).collect::<Vec<_>>().join(",")
}

/// Resolves `--order`. Free variables missing from an explicit list are
/// placed first, in declared order.
fn resolve_order(
    query: &FaqQuery,
    args: &OrderArgs,
    opts: OptimizerOptions,
) -> Result<(VariableOrdering, Option<Optimized>)> {
    let search = |mode| {
        let opt = optimize_ordering(query, &OptimizerOptions { mode, cap: args.cap, ..opts })?;
        Ok((opt.ordering.clone(), Some(opt)))
    };
    match args.order.as_str() {
        "auto" => search(SearchMode::Greedy),
        "exact" => search(SearchMode::Exact),
        list => {
            let mut order = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                order.push(
                    query
                        .var_index(name)
                        .ok_or_else(|| FaqError::InvalidOrdering(format!("unknown variable `{name}`")))?,
                );
            }
            let missing: Vec<VarId> = (0..query.free_len()).filter(|v| !order.contains(v)).collect();
            order.splice(0..0, missing);
            let sigma = VariableOrdering::new(order, query.num_vars(), query.free_len())?;
            let poset = build_precedence_poset(query)?;
            if let Some((u, v)) = poset.pairs().into_iter().find(|&(u, v)| {
                let pos = sigma.positions();
                pos[u] > pos[v]
            }) {
                return Err(FaqError::InvalidOrdering(format!(
                    "`{}` must come before `{}` to keep the query's meaning",
                    query.var_name(u),
                    query.var_name(v)
                )));
            }
            Ok((sigma, None))
        }
    }
}

fn engine_options(args: &EngineArgs) -> EngineOptions {
    EngineOptions {
        projections: if args.no_projections {
            ProjectionPolicy::Never
        } else {
            ProjectionPolicy::default()
        },
        idempotence_shortcut: !args.no_idempotence,
    }
}

fn run(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let inst = read_instance(&args.query, &args.data)?;
    let opts = match args.cost {
        Cost::Uniform => OptimizerOptions::default(),
        Cost::Data => OptimizerOptions {
            cost: CostModel::DataAware,
            weights: Some(
                inst.hypergraph_factors()
                    .iter()
                    .map(|f| EdgeWeight::from_size(f.rows().len()))
                    .collect(),
            ),
            ..OptimizerOptions::default()
        },
    };
    let (sigma, _) = resolve_order(&inst.query, &args.order, opts)?;
    let result = run_insideout(&inst, &sigma, &engine_options(&args.engine))?;
    write_output(args.out.as_deref(), out, &format_output(&inst, &result.output))?;
    if args.stats {
        let mut text = format!("# ordering\t{}\n", names(&inst.query, sigma.as_slice()));
        text.push_str(&stats_table(&inst.query, &result.trace));
        err.write_all(text.as_bytes()).map_err(io_error(Path::new("<stderr>")))?;
    }
    Ok(())
}

fn stats_table(query: &FaqQuery, trace: &Trace) -> String {
    let mut text = String::from("# step\tvar\taggregate\t|U|\tinputs\texpanded\toutput\n");
    let sized = |name: &str, size: usize| format!("{name}:{size}");
    for (i, step) in trace.steps.iter().enumerate() {
        let (inputs, expanded, output) = match &step.kind {
            StepKind::Semiring {
                boundary,
                absorbed,
                projections,
                join,
                output_size,
                ..
            } => {
                let mut parts: Vec<String> =
                    boundary.iter().chain(absorbed).map(|p| sized(&p.factor.name, p.size)).collect();
                parts.extend(projections.iter().map(|p| sized(&p.factor.name, p.size)));
                (parts.join(","), join.expanded_bindings, output_size.to_string())
            }
            StepKind::Product { rewrites, .. } => {
                let parts: Vec<String> = rewrites.iter().map(|w| sized(&w.output.name, w.size)).collect();
                (parts.join(","), 0, parts.len().to_string())
            }
        };
        writeln!(
            text,
            "{}\t{}\t{}\t{}\t{inputs}\t{expanded}\t{output}",
            i + 1,
            query.var_name(step.var),
            step.aggregate,
            step.union.len()
        )
        .unwrap();
    }
    let f = &trace.finish;
    let inputs: Vec<String> = f.inputs.iter().map(|p| sized(&p.factor.name, p.size)).collect();
    writeln!(
        text,
        "join\t{}\t-\t{}\t{}\t{}\t{}",
        names(query, &f.vars),
        f.vars.len(),
        inputs.join(","),
        f.join.expanded_bindings,
        f.output_size
    )
    .unwrap();
    writeln!(text, "# total expanded bindings\t{}", trace.expanded_bindings()).unwrap();
    text
}

fn oracle(args: OracleArgs, out: &mut dyn Write) -> Result<()> {
    let inst = read_instance(&args.query, &args.data)?;
    let output = brute_force_eval(&inst, Execution::default())?;
    write_output(args.out.as_deref(), out, &format_output(&inst, &output))
}

fn width_table(query: &FaqQuery, report: &WidthReport) -> String {
    let mut text = String::from("step\tvar\tkind\tU\trho*\n");
    for (i, s) in report.steps.iter().enumerate() {
        let kind = match s.mode {
            StepMode::Semiring => "semiring",
            StepMode::Product => "product",
        };
        let rho = s.rho.as_ref().map_or_else(|| "-".to_string(), ToString::to_string);
        writeln!(
            text,
            "{}\t{}\t{kind}\t{{{}}}\t{rho}",
            i + 1,
            query.var_name(s.var),
            names(query, &s.union)
        )
        .unwrap();
    }
    text
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Result<()> {
    let query = read_query(&args.query)?;
    let (sigma, _) = resolve_order(&query, &args.order, OptimizerOptions::default())?;
    let report = faqw_of_ordering(&query, &sigma)?;
    let td = tree_decomposition(&query, &sigma)?;
    let mut text = format!("ordering\t{}\nfaqw\t{}\n", names(&query, sigma.as_slice()), report.width);
    text.push_str(&width_table(&query, &report));
    writeln!(text, "tree decomposition\twidth {}", td.width()).unwrap();
    for (i, (bag, w)) in td.bags.iter().zip(&td.widths).enumerate() {
        writeln!(text, "bag {i}\t{{{}}}\t{w}", names(&query, bag)).unwrap();
    }
    for (a, b) in &td.tree_edges {
        writeln!(text, "edge\t{a}\t{b}").unwrap();
    }
    emit(out, &text)
}

fn optimize(args: OptimizeArgs, out: &mut dyn Write) -> Result<()> {
    let query = read_query(&args.query)?;
    let mode = match args.mode {
        Mode::Exact => SearchMode::Exact,
        Mode::Greedy => SearchMode::Greedy,
    };
    let opt = optimize_ordering(
        &query,
        &OptimizerOptions {
            mode,
            cap: args.cap,
            ..OptimizerOptions::default()
        },
    )?;
    let mut text = format!("ordering\t{}\nfaqw\t{}\n", names(&query, opt.ordering.as_slice()), opt.width);
    match (mode, opt.fell_back) {
        (SearchMode::Exact, false) => writeln!(text, "search\texact, {} orderings", opt.candidates).unwrap(),
        (SearchMode::Exact, true) => {
            writeln!(text, "search\tgreedy (more than {} orderings)", args.cap).unwrap()
        }
        (SearchMode::Greedy, _) => writeln!(text, "search\tgreedy").unwrap(),
    }
    text.push_str(&width_table(&query, &opt.report));
    emit(out, &text)
}

fn plan(args: PlanArgs, out: &mut dyn Write) -> Result<()> {
    let inst = read_instance(&args.query, &args.data)?;
    let (sigma, _) = resolve_order(&inst.query, &args.order, OptimizerOptions::default())?;
    let result = run_insideout(&inst, &sigma, &engine_options(&args.engine))?;
    emit(out, &emit_plan(&inst.query, &result.trace))
}
