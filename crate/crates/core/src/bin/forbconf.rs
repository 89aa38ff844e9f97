use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forbconf::containment::{contains_generic, pair_counts, violating_pair, P00, P01, P10, P11};
use forbconf::decompose::{
    assign_marks, check_nonedge_structure, check_transitive_lemma, pattern_name, Decomposition, ASSIGNMENT_LABEL,
};
use forbconf::formulas::{evaluate, FORMULA_NAMES};
use forbconf::layout::{gen_notalways, gen_prelim, gen_prop_lower, ConstructionReport};
use forbconf::matrix::{read_matrix, write_matrix, ConfigurationF, SMatrix};
use forbconf::solver::{forb_exact, forb_reference, ForbResult, SolverError, SolverOptions};
use forbconf::triangle::{max_m_minus_n, min_ops_all_weak, verify_induction, SearchMode, TriangleOps};
use forbconf::verify::{self, emit_report, escape, run_verify_with, Suite, VerifyOptions, DEFAULT_SEED};

/// Forbidden configurations in ternary matrices.
///
/// Exit status: 0 on success, 1 when a check or the verification suite fails,
/// 2 on usage or input errors.
#[derive(Parser, Debug)]
#[command(name = "forbconf", version)]
struct Cli {
    /// Worker threads for the solver (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
    /// Seed for randomized cross-checks.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print wall-clock timings (output is then no longer reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Text,
    Machine,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a lower-bound construction and write it as a matrix file.
    Gen(GenArgs),
    /// Test whether a matrix contains a configuration.
    Check(CheckArgs),
    /// Mark assignment, [B | C] split and structural lemmas for a matrix.
    Decompose(DecomposeArgs),
    /// Exact forb(m, 3, F(a,b,c,d)) for small m.
    Forb(ForbArgs),
    /// The triangular-array operation game.
    Triangle(TriangleArgs),
    /// Evaluate a closed-form formula.
    Formulas(FormulasArgs),
    /// Run the bundled verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConstructionKind {
    Prelim,
    PropLower,
    Notalways,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    construction: ConstructionKind,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    p: usize,
    /// Deficit q for notalways.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    q0: Option<usize>,
    #[arg(long)]
    q1: Option<usize>,
    #[arg(long)]
    r1: Option<usize>,
    #[arg(long)]
    r2: Option<usize>,
    /// Output matrix file.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// 2-rowed configuration as a,b,c,d (counts of 00, 10, 01, 11 columns).
    #[arg(long = "F", value_parser = parse_fabcd, conflicts_with = "config", required_unless_present = "config")]
    f: Option<[usize; 4]>,
    /// Explicit configuration as a matrix file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// F(a,p,p,d) given as a,p,p,d.
    #[arg(long = "F", value_parser = parse_fabcd)]
    f: [usize; 4],
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Caps,
    Reference,
}

#[derive(Args, Debug)]
struct ForbArgs {
    #[arg(long)]
    m: usize,
    #[arg(long = "F", value_parser = parse_fabcd)]
    f: [usize; 4],
    #[arg(long, value_enum, default_value_t = MethodArg::Caps)]
    method: MethodArg,
    /// Write an extremal matrix here.
    #[arg(long)]
    witness: Option<PathBuf>,
    /// Permit m = 5 with the caps method.
    #[arg(long)]
    allow_m5: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TriangleTask {
    MaxMn,
    MinWeak,
    Induction,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Extended,
}

#[derive(Args, Debug)]
struct TriangleArgs {
    #[arg(long)]
    r: usize,
    #[arg(long, value_enum)]
    task: TriangleTask,
    /// Defaults to exhaustive for r <= 5 and extended above.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct FormulasArgs {
    /// Formula name; see --list.
    #[arg(long, required_unless_present = "list")]
    eval: Option<String>,
    /// Arguments, separated by commas or spaces.
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = false)]
    args: Vec<u64>,
    /// List the formula names and their arguments.
    #[arg(long)]
    list: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Quick)]
    suite: SuiteArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Quick,
    Full,
}

fn parse_fabcd(s: &str) -> Result<[usize; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("expected a,b,c,d, got {s:?}"));
    }
    let mut out = [0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = part.parse().map_err(|_| format!("not a count: {part:?}"))?;
    }
    Ok(out)
}

/// A failure to report on stderr, with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

fn usage(msg: impl ToString) -> Failure {
    Failure { code: 2, msg: msg.to_string() }
}

type Outcome = Result<bool, Failure>;

/// Output accumulated as ordered key/value pairs, rendered per format.
struct Record {
    format: OutFormat,
    fields: Vec<(String, String)>,
}

impl Record {
    fn new(format: OutFormat) -> Self {
        Record { format, fields: Vec::new() }
    }

    fn put(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    fn render(&self) -> String {
        let mut out = String::new();
        match self.format {
            OutFormat::Machine => {
                for (k, v) in &self.fields {
                    out += &format!("{k}={}\n", escape(v));
                }
            }
            OutFormat::Text => {
                let w = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &self.fields {
                    out += format!("{k:<w$}  {v}").trim_end();
                    out.push('\n');
                }
            }
        }
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Check(a) => cmd_check(cli, a),
        Command::Decompose(a) => cmd_decompose(cli, a),
        Command::Forb(a) => cmd_forb(cli, a),
        Command::Triangle(a) => cmd_triangle(cli, a),
        Command::Formulas(a) => cmd_formulas(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn load(path: &Path) -> Result<SMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    read_matrix(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn save(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn need(v: Option<usize>, name: &str) -> Result<usize, Failure> {
    v.ok_or_else(|| usage(format!("--{name} is required for this construction")))
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> Outcome {
    let report: ConstructionReport = match a.construction {
        ConstructionKind::Prelim => gen_prelim(a.m, a.p),
        ConstructionKind::PropLower => {
            gen_prop_lower(a.m, a.p, need(a.q0, "q0")?, need(a.q1, "q1")?, need(a.r1, "r1")?, need(a.r2, "r2")?)
        }
        ConstructionKind::Notalways => gen_notalways(a.m, a.p, need(a.q, "q")?),
    }
    .map_err(usage)?;
    if let Some(path) = &a.out {
        save(path, &write_matrix(&report.matrix))?;
    }
    match cli.format {
        OutFormat::Text => println!("{}", report.summary()),
        OutFormat::Machine => {
            let mut rec = Record::new(cli.format);
            let (fa, fb, fc, fd) = report.target;
            rec.put("construction", report.construction.name());
            rec.put("m", report.matrix.m());
            rec.put("columns", report.matrix.ncols());
            rec.put("predicted", &report.predicted_count);
            rec.put("target", format!("{fa},{fb},{fc},{fd}"));
            rec.put("nomark", report.nomark);
            rec.put("onemark", report.onemark.iter().map(|u| u.1).sum::<u64>());
            rec.put("nonedges", report.layout.nonedges());
            rec.put("simple", report.simple);
            rec.put("avoids", report.avoids);
            rec.put("counts_match", report.counts_match);
            print!("{}", rec.render());
        }
    }
    Ok(report.verified())
}

fn cmd_check(cli: &Cli, a: &CheckArgs) -> Outcome {
    let mat = load(&a.matrix)?;
    let mut rec = Record::new(cli.format);
    rec.put("columns", mat.ncols());
    rec.put("simple", mat.is_simple());
    let avoids = if let Some([fa, fb, fc, fd]) = a.f {
        rec.put("F", format!("F({fa},{fb},{fc},{fd})"));
        let counts = pair_counts(&mat);
        match violating_pair(&counts, fa, fb, fc, fd) {
            Some((i, j)) => {
                let c = counts.get(i, j);
                rec.put("result", "contains");
                rec.put("pair", format!("{i},{j}"));
                rec.put("counts", format!("00={} 10={} 01={} 11={}", c[P00], c[P10], c[P01], c[P11]));
                false
            }
            None => {
                rec.put("result", "avoids");
                true
            }
        }
    } else {
        let path = a.config.as_ref().expect("clap requires --F or --config");
        let f = load(path)?;
        let contains = contains_generic(&f, &mat).map_err(usage)?;
        rec.put("F", path.display());
        rec.put("result", if contains { "contains" } else { "avoids" });
        !contains
    };
    print!("{}", rec.render());
    Ok(avoids)
}

fn decomposition_text(dec: &Decomposition, format: OutFormat) -> String {
    let mut rec = Record::new(format);
    rec.put("assignment", ASSIGNMENT_LABEL);
    for (k, (i, j)) in forbconf::containment::row_pairs(dec.m()).enumerate() {
        let c = dec.counts.by_index()[k];
        rec.put(
            &format!("pair({i},{j})"),
            format!("{} counts 00={} 01={} 10={} 11={}", pattern_name(dec.assignment.get(i, j)), c[P00], c[P01], c[P10], c[P11]),
        );
    }
    let pairs = |v: &[(usize, usize)]| v.iter().map(|(i, j)| format!("({i},{j})")).collect::<Vec<_>>().join(" ");
    rec.put("B", dec.b_size());
    rec.put("C", dec.c_size());
    rec.put("N", dec.nonedges());
    rec.put("zero_nonedges", pairs(&dec.zero_nonedges()));
    rec.put("one_nonedges", pairs(&dec.one_nonedges()));
    rec.put("T_edges", dec.t.edges().iter().map(|(i, j)| format!("{i}->{j}")).collect::<Vec<_>>().join(" "));
    let tr = check_transitive_lemma(dec);
    rec.put("transitive_lemma", format!("applies={} transitive={} passed={}", tr.applies, tr.transitive, tr.passed()));
    let ne = check_nonedge_structure(dec);
    let w = |x: &Option<Vec<(usize, usize)>>| x.as_ref().map_or("ok".to_string(), |v| pairs(v));
    rec.put(
        "nonedge_structure",
        format!("transitive1={} transitive2={} location={} passed={}", w(&ne.transitive1), w(&ne.transitive2), w(&ne.location), ne.passed()),
    );
    rec.render()
}

fn cmd_decompose(cli: &Cli, a: &DecomposeArgs) -> Outcome {
    let [fa, fb, fc, fd] = a.f;
    if fb != fc {
        return Err(usage("decompose needs F(a,p,p,d) with equal middle counts"));
    }
    let mat = load(&a.matrix)?;
    let dec = assign_marks(&mat, fa, fb, fd).map_err(|e| Failure { code: 1, msg: e.to_string() })?;
    let text = decomposition_text(&dec, cli.format);
    match &a.out {
        Some(path) => save(path, &text)?,
        None => print!("{text}"),
    }
    Ok(check_transitive_lemma(&dec).passed() && check_nonedge_structure(&dec).passed())
}

fn cmd_forb(cli: &Cli, a: &ForbArgs) -> Outcome {
    let [fa, fb, fc, fd] = a.f;
    let opts = SolverOptions { threads: cli.threads, allow_m5: a.allow_m5, ..SolverOptions::default() };
    let result: ForbResult = match a.method {
        MethodArg::Caps => forb_exact(a.m, fa, fb, fc, fd, &opts),
        MethodArg::Reference => forb_reference(a.m, &ConfigurationF::Fabcd { a: fa, b: fb, c: fc, d: fd }),
    }
    .map_err(|e| match e {
        SolverError::TooLarge { m: 5, .. } => usage(format!("{e}; pass --allow-m5")),
        e => usage(e),
    })?;
    if let Some(path) = &a.witness {
        save(path, &write_matrix(&result.witness))?;
    }
    let mut rec = Record::new(cli.format);
    rec.put("value", result.value);
    rec.put("method", result.method.name());
    if cli.timings {
        rec.put("nodes", result.stats.nodes);
        rec.put("assignments", result.stats.assignments);
        rec.put("evaluated", result.stats.evaluated);
        rec.put("elapsed_ms", result.stats.elapsed.as_millis());
    }
    print!("{}", rec.render());
    Ok(true)
}

fn ops_text(ops: &TriangleOps) -> String {
    format!("a={:?} b={:?}", ops.a(), ops.b())
}

fn cmd_triangle(cli: &Cli, a: &TriangleArgs) -> Outcome {
    let mode = match a.mode {
        Some(ModeArg::Exhaustive) => SearchMode::Exhaustive,
        Some(ModeArg::Extended) => SearchMode::Extended,
        None if a.r <= forbconf::triangle::EXHAUSTIVE_MAX_R => SearchMode::Exhaustive,
        None => SearchMode::Extended,
    };
    let r = a.r;
    let nr = forbconf::formulas::n_r(r as u64) as i64;
    let mut rec = Record::new(cli.format);
    rec.put("mode", mode.label());
    let ok = match a.task {
        TriangleTask::MaxMn => {
            let (v, w) = max_m_minus_n(r, mode).map_err(usage)?;
            let closed = (r * r / 4) as i64;
            rec.put("value", v);
            rec.put("witness", ops_text(&w));
            rec.put("closed_form", format!("floor(r^2/4)={closed} match={}", v == closed));
            v == closed
        }
        TriangleTask::MinWeak => {
            let (v, w) = min_ops_all_weak(r, mode).map_err(usage)?;
            let lower = nr - r.div_ceil(2) as i64;
            rec.put("value", v);
            rec.put("witness", ops_text(&w));
            rec.put("closed_form", format!("N_r-ceil(r/2)={lower} holds={}", v as i64 >= lower));
            v as i64 >= lower
        }
        TriangleTask::Induction => {
            let c = verify_induction(r, mode).map_err(usage)?;
            rec.put("value", c.holds);
            rec.put("examined", c.examined);
            rec.put("witness", c.counterexample.as_ref().map_or("none".to_string(), ops_text));
            c.holds
        }
    };
    print!("{}", rec.render());
    Ok(ok)
}

fn cmd_formulas(cli: &Cli, a: &FormulasArgs) -> Outcome {
    if a.list {
        for (name, args) in FORMULA_NAMES {
            println!("{name} {args}");
        }
        return Ok(true);
    }
    let name = a.eval.as_deref().expect("clap requires --eval or --list");
    let result = evaluate(name, &a.args).map_err(usage)?;
    match cli.format {
        OutFormat::Text => println!("{result}"),
        OutFormat::Machine => {
            let mut rec = Record::new(cli.format);
            rec.put("value", &result.value);
            rec.put("valid", result.valid);
            for h in &result.hypotheses {
                rec.put(&format!("hypothesis.{}", h.name), h.holds);
            }
            print!("{}", rec.render());
        }
    }
    Ok(true)
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let suite = match a.suite {
        SuiteArg::Quick => Suite::Quick,
        SuiteArg::Full => Suite::Full,
    };
    let opts = VerifyOptions { threads: cli.threads, seed: cli.seed };
    let report = run_verify_with(suite, &opts, &verify::Formulas);
    let format = match cli.format {
        OutFormat::Text => verify::Format::Text,
        OutFormat::Machine => verify::Format::Machine,
    };
    print!("{}", emit_report(&report, format, cli.timings));
    Ok(report.passed())
}
