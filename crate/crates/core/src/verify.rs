//! The bundled verification suite and its report formats.
//!
//! Each acceptance criterion maps to one check (`C1` to `C9`). A check gathers
//! several comparisons of an observed value against an expected one and passes
//! when all of them agree. Expected values come from a [`FormulaSource`] so a
//! corrupted formula shows up as failing entries.

use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::containment::{avoids_2rowed, contains_generic};
use crate::decompose::{assign_marks, check_nonedge_structure, check_transitive_lemma};
use crate::formulas::{self, binom, FormulaError};
use crate::layout::{gen_notalways, gen_prelim, gen_prop_lower, scarce_census, ConstructionReport};
use crate::matrix::{ConfigurationF, SMatrix};
use crate::solver::{forb_exact, forb_reference, g_empirical, SolverOptions};
use crate::triangle::{max_m_minus_n, min_ops_all_weak, verify_induction, SearchMode};

/// Default seed for the randomized containment cross-check.
pub const DEFAULT_SEED: u64 = 0xF04B_5EED;

/// Random column subsets drawn by the containment cross-check.
pub const CROSS_CHECK_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Quick,
    Full,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Quick => "quick",
            Suite::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quick" => Some(Suite::Quick),
            "full" => Some(Suite::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(Status::Pass),
            "fail" => Some(Status::Fail),
            "skipped" => Some(Status::Skipped),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub description: String,
    /// The statement being tested.
    pub claim: String,
    pub status: Status,
    pub observed: String,
    pub expected: String,
    pub runtime: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn new(suite: Suite) -> Self {
        VerifyReport { suite, checks: Vec::new() }
    }

    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Closed forms the suite compares against.
///
/// The provided methods delegate to [`crate::formulas`]; overriding one is how
/// the tests inject faults.
pub trait FormulaSource: Sync {
    fn forb_pk2(&self, m: u64, p: u64) -> BigInt {
        formulas::forb_pk2(m, p).value
    }
    fn n_r(&self, r: u64) -> u64 {
        formulas::n_r(r)
    }
    fn g(&self, p: u64) -> Option<u64> {
        formulas::g_known(p)
    }
    fn g_upper(&self, p: u64) -> Result<BigInt, FormulaError> {
        formulas::g_upper(p)
    }
    fn prelim_count(&self, m: u64, p: u64) -> Result<BigInt, FormulaError> {
        formulas::prelim_count(m, p)
    }
    fn foursigma_bound(&self, r: u64, b: u64, c: u64) -> Result<BigInt, FormulaError> {
        formulas::foursigma_bound(r, b, c)
    }
    fn thm_pk(&self, m: u64, p: u64, q: u64) -> Result<BigInt, FormulaError> {
        formulas::thm_pk(m, p, q).map(|r| r.value)
    }
    fn cor_small_p(&self, m: u64, p: u64) -> Result<BigInt, FormulaError> {
        formulas::cor_small_p(m, p).map(|r| r.value)
    }
    fn notalways_value(&self, m: u64, p: u64, q: u64) -> Result<BigInt, FormulaError> {
        formulas::notalways_value(m, p, q).map(|r| r.value)
    }
}

/// The formulas as implemented in [`crate::formulas`].
#[derive(Clone, Copy, Debug, Default)]
pub struct Formulas;

impl FormulaSource for Formulas {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub threads: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { threads: 1, seed: DEFAULT_SEED }
    }
}

pub fn run_verify(suite: Suite) -> VerifyReport {
    run_verify_with(suite, &VerifyOptions::default(), &Formulas)
}

pub fn run_verify_with(suite: Suite, opts: &VerifyOptions, src: &dyn FormulaSource) -> VerifyReport {
    let full = suite == Suite::Full;
    let solver = SolverOptions { threads: opts.threads, ..SolverOptions::default() };
    let ctx = Ctx { full, solver, seed: opts.seed, src };
    let specs: [CheckSpec; 9] = [
        ("C1", "exact solver vs closed forms, m <= 3", "forb(m,3,pK2) = 2^m + m2^(m-1) + (p-1)C(m,2); g_1 = g_2 = 0", c1),
        ("C2", "exact solver at m = 4", "forb(4,3,3K2) = 60, g_3 = 1, F(2,3,3,2) one below 3K2", c2),
        ("C3", "caps solver vs reference solver, m <= 3", "two independent searches agree", c3),
        ("C4", "triangle game", "max M-N = floor(r^2/4); min ops >= N_r - ceil(r/2); induction step", c4),
        ("C5", "construction verification", "constructions reach the lower bounds and avoid F", c5),
        ("C6", "decomposition structure", "large B forces transitive T; non-edge closure and location", c6),
        ("C7", "scarce-pair census", "(r-1)2^r + 1 one-mark columns; bc-mark columns within the bound", c7),
        ("C8", "m-independence of g_p", "g_p does not depend on m once m >= 2r+2", c8),
        ("C9", "formula identities", "N_r = C(r+1,2) - floor(r^2/4) and the tabulated values", c9),
    ];
    let mut report = VerifyReport::new(suite);
    for (id, description, claim, run) in specs {
        let start = Instant::now();
        let outcome = run(&ctx);
        let runtime = start.elapsed();
        let (status, observed, expected) = match outcome {
            Outcome::Skipped(why) => (Status::Skipped, why.to_string(), String::new()),
            Outcome::Done(t) => (if t.ok { Status::Pass } else { Status::Fail }, t.observed.join("; "), t.expected.join("; ")),
        };
        report.checks.push(Check {
            id: id.to_string(),
            description: description.to_string(),
            claim: claim.to_string(),
            status,
            observed,
            expected,
            runtime,
        });
    }
    report
}

/// Id, description, claim and the function computing the check.
type CheckSpec = (&'static str, &'static str, &'static str, fn(&Ctx) -> Outcome);

struct Ctx<'a> {
    full: bool,
    solver: SolverOptions,
    seed: u64,
    src: &'a dyn FormulaSource,
}

enum Outcome {
    Done(Tally),
    Skipped(&'static str),
}

struct Tally {
    ok: bool,
    observed: Vec<String>,
    expected: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { ok: true, observed: Vec::new(), expected: Vec::new() }
    }

    fn cmp<T: PartialEq + fmt::Display>(&mut self, label: &str, observed: T, expected: T) {
        self.ok &= observed == expected;
        self.observed.push(format!("{label}={observed}"));
        self.expected.push(format!("{label}={expected}"));
    }

    fn fact(&mut self, label: &str, holds: bool) {
        self.cmp(label, holds, true);
    }

    fn error(&mut self, label: &str, err: impl fmt::Display) {
        self.ok = false;
        self.observed.push(format!("{label}=error({err})"));
        self.expected.push(format!("{label}=ok"));
    }

    fn done(self) -> Outcome {
        Outcome::Done(self)
    }
}

fn show<T: fmt::Display, E: fmt::Display>(r: Result<T, E>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error({e})"),
    }
}

/// `forb_pk2(m, p) - g_p` when the thresholds on 00 and 11 are below `p`.
fn expected_forb(src: &dyn FormulaSource, m: u64, a: u64, p: u64, d: u64) -> String {
    let pk2 = src.forb_pk2(m, p);
    if a >= p && d >= p {
        return pk2.to_string();
    }
    match src.g(p) {
        Some(g) => (pk2 - g).to_string(),
        None => "unknown".to_string(),
    }
}

fn c1(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    for (m, a, p, d) in [(2, 1, 1, 1), (3, 1, 1, 1), (3, 0, 2, 0), (3, 2, 2, 2)] {
        let label = format!("forb({m};{a},{p},{p},{d})");
        let observed = show(forb_exact(m, a, p, p, d, &ctx.solver).map(|r| r.value));
        t.cmp(&label, observed, expected_forb(ctx.src, m as u64, a as u64, p as u64, d as u64));
    }
    t.done()
}

fn c2(ctx: &Ctx) -> Outcome {
    if !ctx.full {
        return Outcome::Skipped("full suite only");
    }
    let mut t = Tally::new();
    for (a, p, d) in [(3, 3, 3), (0, 3, 0), (0, 2, 0)] {
        let label = format!("forb(4;{a},{p},{p},{d})");
        let observed = show(forb_exact(4, a, p, p, d, &ctx.solver).map(|r| r.value));
        t.cmp(&label, observed, expected_forb(ctx.src, 4, a as u64, p as u64, d as u64));
    }
    let observed = show(forb_exact(4, 2, 3, 3, 2, &ctx.solver).map(|r| r.value));
    t.cmp("forb(4;2,3,3,2)", observed, show(ctx.src.cor_small_p(4, 3)));
    t.done()
}

fn c3(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    let mut cells = 0u32;
    let mut mismatches = Vec::new();
    for m in 1..=3 {
        for p in 1..=3 {
            for a in 0..=3 {
                for d in 0..=3 {
                    cells += 1;
                    let exact = forb_exact(m, a, p, p, d, &ctx.solver).map(|r| r.value);
                    let reference = forb_reference(m, &ConfigurationF::Fabcd { a, b: p, c: p, d }).map(|r| r.value);
                    match (exact, reference) {
                        (Ok(x), Ok(y)) if x == y => {}
                        (x, y) => mismatches.push(format!("({m};{a},{p},{p},{d}):{}/{}", show(x), show(y))),
                    }
                }
            }
        }
    }
    t.cmp("cells", cells, 144);
    t.cmp("mismatches", mismatches.len(), 0);
    if !mismatches.is_empty() {
        t.observed.push(mismatches.join(","));
    }
    let disagreements = containment_cross_check(ctx.seed, CROSS_CHECK_SAMPLES);
    t.cmp("containment_disagreements", show(disagreements), "0".to_string());
    t.done()
}

/// Compares the pair-count test with the generic embedding search on random
/// subsets of the 3-rowed universe, for a handful of 2-rowed configurations.
/// Returns the number of disagreements.
pub fn containment_cross_check(seed: u64, samples: usize) -> Result<usize, crate::containment::ContainmentError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let universe = SMatrix::universe(3, 3).expect("3 rows");
    let configs = [(1, 1, 1, 1), (0, 2, 2, 0), (1, 2, 2, 1), (0, 1, 1, 0), (2, 1, 1, 0), (0, 0, 3, 1)];
    let mut bad = 0;
    for _ in 0..samples {
        let bits: u32 = rng.gen_range(0..1 << 27);
        let cols: Vec<_> = universe.columns().iter().enumerate().filter(|&(i, _)| bits >> i & 1 == 1).map(|(_, &c)| c).collect();
        let a_mat = SMatrix::from_packed(3, 3, cols).expect("subset of the universe");
        for &(a, b, c, d) in &configs {
            let f = ConfigurationF::Fabcd { a, b, c, d }.expand();
            if avoids_2rowed(&a_mat, a, b, c, d) == contains_generic(&f, &a_mat)? {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

fn c4(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    let rmax = if ctx.full { 5 } else { 4 };
    for r in 1..=rmax {
        match max_m_minus_n(r, SearchMode::Exhaustive) {
            Ok((v, _)) => t.cmp(&format!("max_mn({r})"), v, (r * r / 4) as i64),
            Err(e) => t.error(&format!("max_mn({r})"), e),
        }
        let lower = ctx.src.n_r(r as u64) as i64 - r.div_ceil(2) as i64;
        match min_ops_all_weak(r, SearchMode::Exhaustive) {
            Ok((v, _)) => {
                t.ok &= v as i64 >= lower;
                t.observed.push(format!("min_weak({r})={v}"));
                t.expected.push(format!("min_weak({r})>={lower}"));
            }
            Err(e) => t.error(&format!("min_weak({r})"), e),
        }
        match verify_induction(r, SearchMode::Exhaustive) {
            Ok(c) => t.fact(&format!("induction({r})"), c.holds),
            Err(e) => t.error(&format!("induction({r})"), e),
        }
    }
    t.done()
}

/// The constructions of criterion 5 with their expected sizes.
fn constructions(ctx: &Ctx) -> Vec<(String, Result<ConstructionReport, String>, String)> {
    let src = ctx.src;
    let mut out = vec![
        ("prelim(6,3)".to_string(), gen_prelim(6, 3).map_err(|e| e.to_string()), show(src.prelim_count(6, 3))),
        ("prelim(6,5)".to_string(), gen_prelim(6, 5).map_err(|e| e.to_string()), show(src.prelim_count(6, 5))),
        (
            "prop_lower(6,5,1,1,1,1)".to_string(),
            gen_prop_lower(6, 5, 1, 1, 1, 1).map_err(|e| e.to_string()),
            show(src.thm_pk(6, 5, 1)),
        ),
    ];
    if ctx.full {
        out.push((
            "notalways(10,6,4)".to_string(),
            gen_notalways(10, 6, 4).map_err(|e| e.to_string()),
            show(src.notalways_value(10, 6, 4)),
        ));
    }
    out
}

fn c5(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    for (label, rep, expected) in constructions(ctx) {
        match rep {
            Ok(rep) => {
                t.cmp(&label, rep.matrix.ncols().to_string(), expected);
                let (a, b, c, d) = rep.target;
                let avoids = avoids_2rowed(&rep.matrix, a, b, c, d);
                t.fact(&format!("{label}.simple"), rep.matrix.is_simple());
                t.fact(&format!("{label}.avoids"), avoids);
            }
            Err(e) => t.error(&label, e),
        }
    }
    if ctx.full {
        let bonus = (|| -> Result<BigInt, FormulaError> { Ok(ctx.src.notalways_value(10, 6, 4)? - ctx.src.thm_pk(10, 6, 4)?) })();
        t.cmp("notalways_excess", show(bonus), "1".to_string());
    }
    t.done()
}

fn c6(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    let mut subjects: Vec<(String, SMatrix, (usize, usize, usize))> = Vec::new();
    for (label, rep, _) in constructions(ctx) {
        match rep {
            Ok(rep) => subjects.push((label, rep.matrix, (rep.target.0, rep.target.1, rep.target.3))),
            Err(e) => t.error(&label, e),
        }
    }
    if ctx.full {
        for (a, p, d) in [(3, 3, 3), (0, 3, 0), (2, 3, 2), (0, 2, 0)] {
            let label = format!("witness(4;{a},{p},{p},{d})");
            match forb_exact(4, a, p, p, d, &ctx.solver) {
                Ok(r) => subjects.push((label, r.witness, (a, p, d))),
                Err(e) => t.error(&label, e),
            }
        }
    }
    for (label, mat, (a, p, d)) in subjects {
        match assign_marks(&mat, a, p, d) {
            Ok(dec) => {
                let tr = check_transitive_lemma(&dec);
                let ne = check_nonedge_structure(&dec);
                let observed = format!("ok|transitive_lemma={}|nonedges={}", tr.passed(), ne.passed());
                t.cmp(&label, observed, "ok|transitive_lemma=true|nonedges=true".to_string());
            }
            Err(e) => t.error(&label, e),
        }
    }
    t.done()
}

fn c7(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    for r in 1..=3usize {
        let census = match scarce_census(r) {
            Ok(c) => c,
            Err(e) => {
                t.error(&format!("census({r})"), e);
                continue;
            }
        };
        t.cmp(&format!("onemark({r})"), census.onemark, ((r as u64) - 1) * (1 << r) + 1);
        t.cmp(&format!("irregular({r})"), census.irregular, 0);
        let mut over = Vec::new();
        for b in 1..=r {
            for c in 1..=r + 1 - b {
                let n = census.by_shape.get(&(b, c)).copied().unwrap_or(0);
                match ctx.src.foursigma_bound(r as u64, b as u64, c as u64) {
                    Ok(bound) if BigInt::from(n) <= bound => {}
                    Ok(bound) => over.push(format!("({b},{c}):{n}>{bound}")),
                    Err(e) => over.push(format!("({b},{c}):error({e})")),
                }
            }
        }
        let shapes_out_of_range = census.by_shape.keys().filter(|&&(b, c)| b + c > r + 1).count();
        t.cmp(&format!("shapes_out_of_range({r})"), shapes_out_of_range, 0);
        t.cmp(&format!("over_bound({r})"), if over.is_empty() { "none".to_string() } else { over.join(",") }, "none".to_string());
    }
    t.done()
}

fn c8(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    let mut cases = vec![(2, 2), (2, 3)];
    if ctx.full {
        cases.push((3, 4));
    }
    for (p, m) in cases {
        let expected = ctx.src.g(p as u64).map_or("unknown".to_string(), |g| g.to_string());
        t.cmp(&format!("g({p};m={m})"), show(g_empirical(p, m, &ctx.solver)), expected);
    }
    t.done()
}

fn c9(ctx: &Ctx) -> Outcome {
    let mut t = Tally::new();
    let src = ctx.src;
    let bad: Vec<u64> = (0..=64).filter(|&r| BigInt::from(src.n_r(r)) != binom(r + 1, 2) - r * r / 4).collect();
    t.cmp("n_r_identity_failures", format!("{bad:?}"), "[]".to_string());
    let table: Vec<u64> = (2..=6).map(|r| src.n_r(r)).collect();
    t.cmp("n_r(2..6)", format!("{table:?}"), "[2, 4, 6, 9, 12]".to_string());
    t.cmp("g_upper(3)", show(src.g_upper(3)), "1".to_string());
    t.cmp("prelim_count(3,2)", show(src.prelim_count(3, 2)), "23".to_string());
    t.done()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(Format::Text),
            "machine" => Some(Format::Machine),
            _ => None,
        }
    }
}

/// Renders a report. Runtimes are included only when `timings` is set, so the
/// default output is byte-identical across runs.
pub fn emit_report(report: &VerifyReport, format: Format, timings: bool) -> String {
    match format {
        Format::Text => emit_text(report, timings),
        Format::Machine => emit_machine(report, timings),
    }
}

fn emit_text(report: &VerifyReport, timings: bool) -> String {
    let mut out = format!(
        "suite={} checks={} pass={} fail={} skipped={}\n",
        report.suite.name(),
        report.checks.len(),
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped)
    );
    let mut header = vec!["ID", "STATUS", "DESCRIPTION"];
    if timings {
        header.push("MS");
    }
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            let mut row = vec![c.id.clone(), c.status.name().to_string(), c.description.clone()];
            if timings {
                row.push(c.runtime.as_millis().to_string());
            }
            row
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|k| rows.iter().map(|r| r[k].len()).chain([header[k].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[&str]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    out += &line(&header);
    for (row, check) in rows.iter().zip(&report.checks) {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        out += &line(&cells);
        if check.status != Status::Pass {
            let _ = writeln!(out, "    observed: {}", check.observed);
            if !check.expected.is_empty() {
                let _ = writeln!(out, "    expected: {}", check.expected);
            }
        }
    }
    out
}

const MACHINE_KEYS: [&str; 7] = ["id", "status", "description", "claim", "observed", "expected", "runtime_us"];

fn emit_machine(report: &VerifyReport, timings: bool) -> String {
    let mut out = format!(
        "report suite={} pass={} fail={} skipped={}\n",
        report.suite.name(),
        report.count(Status::Pass),
        report.count(Status::Fail),
        report.count(Status::Skipped)
    );
    for c in &report.checks {
        let runtime = if timings { c.runtime.as_micros().to_string() } else { "-".to_string() };
        let values = [c.id.as_str(), c.status.name(), &c.description, &c.claim, &c.observed, &c.expected, &runtime];
        let fields: Vec<String> = MACHINE_KEYS.iter().zip(values).map(|(k, v)| format!("{k}={}", escape(v))).collect();
        out += &format!("check {}\n", fields.join(" "));
    }
    out
}

/// Escapes a value so it holds no spaces or line breaks.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(ch),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, ParseError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('s') => out.push(' '),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            other => return Err(ParseError(format!("bad escape \\{}", other.map_or(String::new(), String::from)))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("machine report: {0}")]
pub struct ParseError(pub String);

/// Reads back the machine format. Runtimes written as `-` parse as zero.
pub fn parse_machine(text: &str) -> Result<VerifyReport, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| ParseError("empty input".into()))?;
    let suite = header
        .strip_prefix("report ")
        .and_then(|rest| rest.split(' ').find_map(|kv| kv.strip_prefix("suite=")))
        .and_then(Suite::parse)
        .ok_or_else(|| ParseError(format!("bad header: {header}")))?;
    let mut report = VerifyReport::new(suite);
    for line in lines.filter(|l| !l.is_empty()) {
        let rest = line.strip_prefix("check ").ok_or_else(|| ParseError(format!("bad record: {line}")))?;
        let fields: Vec<&str> = rest.split(' ').collect();
        if fields.len() != MACHINE_KEYS.len() {
            return Err(ParseError(format!("expected {} fields: {line}", MACHINE_KEYS.len())));
        }
        let mut values = Vec::with_capacity(fields.len());
        for (field, key) in fields.iter().zip(MACHINE_KEYS) {
            let v = field
                .strip_prefix(key)
                .and_then(|s| s.strip_prefix('='))
                .ok_or_else(|| ParseError(format!("expected key {key}: {line}")))?;
            values.push(unescape(v)?);
        }
        let status = Status::parse(&values[1]).ok_or_else(|| ParseError(format!("bad status: {}", values[1])))?;
        let runtime = match values[6].as_str() {
            "-" => Duration::ZERO,
            us => Duration::from_micros(us.parse().map_err(|_| ParseError(format!("bad runtime: {us}")))?),
        };
        let mut it = values.into_iter();
        let id = it.next().unwrap_or_default();
        let description = it.nth(1).unwrap_or_default();
        let claim = it.next().unwrap_or_default();
        let observed = it.next().unwrap_or_default();
        let expected = it.next().unwrap_or_default();
        report.checks.push(Check { id, description, claim, status, observed, expected, runtime });
    }
    Ok(report)
}
