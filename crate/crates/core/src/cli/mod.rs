//! Command-line front end: argument parsing, dispatch and report rendering.
//!
//! Exit codes: 0 success or pass, 1 a verdict fails, 2 input error,
//! 3 precision or field-extension error.

pub mod catalog;
pub mod schema;

use std::fmt::Write as _;
use std::io::Read as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::elliptic_side::{
    a1a2_check, a3_check, good_check, ConditionReport, FilteredBundleData, GlobalBlock, Side, TorusPoint, Twist,
};
use crate::error::{Error, Result};
use crate::exact_algebra::{Field, FieldRef, Scalar};
use crate::filtered_disc::Q;
use crate::local_nahm::local_index;
use crate::nahm_global::{
    a0_check, higgs_good_check, invariants_bundle, invariants_higgs, nahm_backward, nahm_forward, roundtrip_report,
    AdmissibleHiggsData, NahmReport, TableRow,
};
use crate::oracle::{block_oracle, degree_crosscheck};
use schema::{ConfigDocument, Datum};

/// Truncation order used when neither the flag, the environment nor the document sets one.
pub const DEFAULT_CLI_PRECISION: i64 = 24;

#[derive(Debug, Parser)]
#[command(name = "nahmkit", version, about = "Exact filtered Higgs bundle calculus and algebraic Nahm transforms")]
pub struct Cli {
    /// Truncation order N of the oracle.
    #[arg(long, global = true, env = "NAHMKIT_PRECISION")]
    pub precision: Option<i64>,
    /// Session field Q(ζ_M)(x1, …, xk) as "M,k".
    #[arg(long, global = true, value_parser = parse_field_spec)]
    pub field: Option<(u32, usize)>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verdicts of A0 and goodness (Higgs data) or A1/A2, A3 and goodness (bundles).
    Check { input: String },
    /// Nahm transform; the direction defaults to the one the document kind admits.
    Transform {
        input: String,
        #[arg(long, value_enum)]
        direction: Option<Direction>,
    },
    /// Forward then backward transform with exact comparison.
    Roundtrip { input: String },
    /// Rank, parabolic degree and singularity table.
    Invariants { input: String },
    /// Emit a built-in example document, or list them with "list".
    Examples {
        name: String,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Truncated-cokernel oracle against degree bookkeeping, on a document or the built-in suite.
    Oracle { input: Option<String> },
}

fn parse_field_spec(s: &str) -> std::result::Result<(u32, usize), String> {
    let (m, k) = s.split_once(',').ok_or("expected M,k")?;
    let m: u32 = m.trim().parse().map_err(|_| format!("bad order {m:?}"))?;
    let k: usize = k.trim().parse().map_err(|_| format!("bad symbol count {k:?}"))?;
    if m == 0 {
        return Err("order must be positive".into());
    }
    Ok((m, k))
}

/// Exit code and rendered output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI on `argv` (including the program name) without touching the process.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{path}: {e}")))
    }
}

fn session_field(cli: &Cli, default_symbols: usize) -> FieldRef {
    match cli.field {
        Some((m, k)) => Field::with_symbols(m, k),
        None => Field::with_symbols(1, default_symbols),
    }
}

fn load(cli: &Cli, path: &str) -> Result<(Datum, i64)> {
    let doc = ConfigDocument::from_json(&read_input(path)?)?;
    if let Some((m, k)) = cli.field {
        if doc.field.order != m || doc.field.symbols.len() != k {
            return Err(Error::Input(format!(
                "--field {m},{k} disagrees with the document field ({}, {} symbols)",
                doc.field.order,
                doc.field.symbols.len()
            )));
        }
    }
    let precision = cli.precision.or(doc.precision).unwrap_or(DEFAULT_CLI_PRECISION);
    if precision < 2 {
        return Err(Error::Input(format!("precision must be at least 2, got {precision}")));
    }
    Ok((doc.parse()?, precision))
}

fn dispatch(cli: &Cli) -> Result<(i32, String)> {
    let fmt = cli.format;
    match &cli.command {
        Command::Check { input } => {
            let (datum, _) = load(cli, input)?;
            let reports = check(&datum)?;
            let code = if reports.iter().all(|r| r.holds) { 0 } else { 1 };
            Ok((code, render_conditions(&reports, fmt)))
        }
        Command::Transform { input, direction } => {
            let (datum, _) = load(cli, input)?;
            let (out, report) = match (&datum, direction) {
                (Datum::Higgs(h), None | Some(Direction::Forward)) => {
                    let (d, r) = nahm_forward(h)?;
                    (Datum::Bundle(d), r)
                }
                (Datum::Bundle(d), None | Some(Direction::Backward)) => {
                    let (h, r) = nahm_backward(d)?;
                    (Datum::Higgs(h), r)
                }
                (Datum::Higgs(_), Some(Direction::Backward)) => {
                    return Err(Error::Input("backward transform needs a bundle document".into()))
                }
                (Datum::Bundle(_), Some(Direction::Forward)) => {
                    return Err(Error::Input("forward transform needs a higgs document".into()))
                }
            };
            let code = if report.passed() { 0 } else { 1 };
            Ok((code, render_transform(&out, &report, fmt)))
        }
        Command::Roundtrip { input } => {
            let (datum, _) = load(cli, input)?;
            let report = match &datum {
                Datum::Higgs(h) => roundtrip_report(h)?,
                Datum::Bundle(d) => bundle_roundtrip(d)?,
            };
            let code = if report.passed() { 0 } else { 1 };
            Ok((code, render_report(&report, fmt)))
        }
        Command::Invariants { input } => {
            let (datum, _) = load(cli, input)?;
            let report = match &datum {
                Datum::Higgs(h) => invariants_higgs(h),
                Datum::Bundle(d) => invariants_bundle(d),
            };
            Ok((0, render_report(&report, fmt)))
        }
        Command::Examples { name, p, order } => {
            if name == "list" {
                let mut s = String::new();
                for (n, d) in catalog::CATALOG {
                    let _ = writeln!(s, "{n:<12} {d}");
                }
                return Ok((0, s));
            }
            let doc = catalog::example(name, &session_field(cli, 1), *p, *order)?;
            Ok((0, doc.to_json() + "\n"))
        }
        Command::Oracle { input } => {
            let precision = cli.precision.unwrap_or(DEFAULT_CLI_PRECISION);
            let (cases, n) = match input {
                Some(path) => {
                    let (datum, n) = load(cli, path)?;
                    match datum {
                        Datum::Higgs(h) => (vec![h], n),
                        Datum::Bundle(_) => return Err(Error::Input("the oracle runs on higgs documents".into())),
                    }
                }
                None => {
                    if precision < 2 {
                        return Err(Error::Input(format!("precision must be at least 2, got {precision}")));
                    }
                    let field = session_field(cli, 2);
                    let suite = catalog::elementary_suite(&field)?;
                    let blocks = suite
                        .into_iter()
                        .map(|b| GlobalBlock::new(TorusPoint::origin(Side::Dual), b, 0))
                        .collect::<Result<Vec<_>>>()?;
                    (vec![AdmissibleHiggsData::new(field, blocks)?], precision)
                }
            };
            let rows = oracle_suite(&cases, n)?;
            let code = if rows.iter().all(|r| r.agrees && r.smith_agrees) { 0 } else { 1 };
            Ok((code, render_oracle(&rows, fmt)))
        }
    }
}

/// Library verdicts reported by `check`.
pub fn check(datum: &Datum) -> Result<Vec<ConditionReport>> {
    Ok(match datum {
        Datum::Higgs(h) => vec![a0_check(h), higgs_good_check(h)?],
        Datum::Bundle(d) => vec![a1a2_check(d)?, a3_check(d), good_check(d)?],
    })
}

fn bundle_roundtrip(d: &FilteredBundleData) -> Result<NahmReport> {
    let (h, mut report) = nahm_backward(d)?;
    let (back, fwd) = nahm_forward(&h)?;
    report.conditions.extend(fwd.conditions);
    report.roundtrip = Some(back == *d);
    report.degree_preserved = Some(report.degree_preserved == Some(true) && fwd.degree_preserved == Some(true));
    Ok(report)
}

/// One line of the oracle run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRow {
    pub label: String,
    pub bookkeeping: usize,
    pub cokernel: usize,
    pub kernel: usize,
    pub agrees: bool,
    pub smith_agrees: bool,
}

/// Compares the truncated-cokernel rank at a symbolic twist with [C¹ : C⁰] for every block.
pub fn oracle_suite(cases: &[AdmissibleHiggsData], n: i64) -> Result<Vec<OracleRow>> {
    let mut rows = Vec::new();
    for h in cases {
        let name = (0..).map(|i| format!("w{i}")).find(|s| h.field.symbol_index(s).is_none()).expect("fresh name");
        let big = h.field.extended(&[name.as_str()]);
        let w = Scalar::var(&big, big.nvars() - 1);
        let smith_agrees = degree_crosscheck(h)?;
        for b in &h.blocks {
            let r = block_oracle(&b.block, &w, n as usize)?;
            if !r.certified {
                return Err(Error::PrecisionExhausted(format!(
                    "oracle for {} at {} did not stabilize at N = {n}",
                    b.block.type_label(),
                    b.point
                )));
            }
            let idx = local_index(&b.block);
            rows.push(OracleRow {
                label: format!("{} at {}", b.block.type_label(), b.point),
                bookkeeping: idx,
                cokernel: r.cokernel,
                kernel: r.kernel,
                agrees: r.cokernel == idx && r.kernel == 0,
                smith_agrees,
            });
        }
    }
    Ok(rows)
}

fn q_json(q: &Q) -> Value {
    serde_json::to_value(schema::RationalJson::emit(q)).expect("serializable")
}

fn twist_json(t: &Twist) -> Value {
    json!({
        "w": t.w.as_ref().map(|w| serde_json::to_value(schema::ScalarJson::emit(w)).expect("serializable")),
        "line": serde_json::to_value(schema::PointJson::emit(&t.line)).expect("serializable"),
    })
}

fn condition_json(c: &ConditionReport) -> Value {
    json!({
        "condition": c.condition,
        "holds": c.holds,
        "failing": c.failing.iter().map(twist_json).collect::<Vec<_>>(),
        "notes": c.notes,
    })
}

fn row_json(r: &TableRow) -> Value {
    json!({
        "point": serde_json::to_value(schema::PointJson::emit(&r.point)).expect("serializable"),
        "p": r.p,
        "m": r.m,
        "label": r.label,
        "alpha": serde_json::to_value(schema::ScalarJson::emit(&r.alpha)).expect("serializable"),
        "weights": r.weights.iter().map(q_json).collect::<Vec<_>>(),
        "rank": r.rank,
        "base_degree": r.base_degree,
        "injection": r.has_injection,
    })
}

/// JSON form of a report.
pub fn report_json(r: &NahmReport) -> Value {
    json!({
        "input_rank": r.input_rank,
        "input_degree": q_json(&r.input_degree),
        "input_table": r.input_table.iter().map(row_json).collect::<Vec<_>>(),
        "output_rank": r.output_rank,
        "output_degree": r.output_degree.as_ref().map(q_json),
        "output_table": r.output_table.iter().map(row_json).collect::<Vec<_>>(),
        "conditions": r.conditions.iter().map(condition_json).collect::<Vec<_>>(),
        "degree_preserved": r.degree_preserved,
        "roundtrip": r.roundtrip,
        "goodness_preserved": r.goodness_preserved,
        "second_chern": r.second_chern.as_ref().map(q_json),
        "passed": r.passed(),
    })
}

fn text_twist(t: &Twist) -> String {
    match &t.w {
        Some(w) => format!("(w = {w}, L = {})", t.line),
        None => format!("L = {}", t.line),
    }
}

fn text_conditions(out: &mut String, reports: &[ConditionReport]) {
    for c in reports {
        let verdict = if c.holds { "holds" } else { "FAILS" };
        let _ = writeln!(out, "{}: {verdict}", c.condition);
        for t in &c.failing {
            let _ = writeln!(out, "  failing twist {}", text_twist(t));
        }
        for n in &c.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
}

fn text_table(out: &mut String, title: &str, rows: &[TableRow]) {
    let _ = writeln!(out, "{title}:");
    for r in rows {
        let w: Vec<String> = r.weights.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            out,
            "  {} type {} rank {} base {} weights [{}]{}",
            r.point,
            r.label,
            r.rank,
            r.base_degree,
            w.join(", "),
            if r.has_injection { " +injection" } else { "" }
        );
    }
}

fn opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "NO",
        None => "n/a",
    }
}

fn render_report(r: &NahmReport, fmt: Format) -> String {
    if fmt == Format::Json {
        return serde_json::to_string_pretty(&report_json(r)).expect("serializable") + "\n";
    }
    let mut s = String::new();
    let _ = writeln!(s, "input: rank {} parabolic degree {}", r.input_rank, r.input_degree);
    text_table(&mut s, "input singularities", &r.input_table);
    if let (Some(rank), Some(deg)) = (r.output_rank, &r.output_degree) {
        let _ = writeln!(s, "output: rank {rank} parabolic degree {deg}");
        text_table(&mut s, "output singularities", &r.output_table);
    }
    text_conditions(&mut s, &r.conditions);
    let _ = writeln!(s, "degree preserved: {}", opt(r.degree_preserved));
    let _ = writeln!(s, "roundtrip: {}", opt(r.roundtrip));
    let _ = writeln!(s, "goodness preserved: {}", opt(r.goodness_preserved));
    let _ = writeln!(s, "second Chern number: not computed");
    let _ = writeln!(s, "{}", if r.passed() { "PASS" } else { "FAIL" });
    s
}

fn render_conditions(reports: &[ConditionReport], fmt: Format) -> String {
    if fmt == Format::Json {
        let v = json!({ "conditions": reports.iter().map(condition_json).collect::<Vec<_>>() });
        return serde_json::to_string_pretty(&v).expect("serializable") + "\n";
    }
    let mut s = String::new();
    text_conditions(&mut s, reports);
    s
}

fn render_transform(out: &Datum, r: &NahmReport, fmt: Format) -> String {
    let doc = ConfigDocument::emit(out);
    if fmt == Format::Json {
        let v = json!({ "output": serde_json::to_value(&doc).expect("serializable"), "report": report_json(r) });
        return serde_json::to_string_pretty(&v).expect("serializable") + "\n";
    }
    render_report(r, fmt) + &doc.to_json() + "\n"
}

fn render_oracle(rows: &[OracleRow], fmt: Format) -> String {
    if fmt == Format::Json {
        let v: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({"case": r.label, "bookkeeping": r.bookkeeping, "cokernel": r.cokernel,
                       "kernel": r.kernel, "agrees": r.agrees, "smith_agrees": r.smith_agrees})
            })
            .collect();
        return serde_json::to_string_pretty(&v).expect("serializable") + "\n";
    }
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "{}  {}: bookkeeping {} cokernel {} kernel {}",
            if r.agrees && r.smith_agrees { "ok  " } else { "FAIL" },
            r.label,
            r.bookkeeping,
            r.cokernel,
            r.kernel
        );
    }
    s
}
