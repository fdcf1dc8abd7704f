use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use higherk::atlas::{
    load_dir, load_golden, printed_group, regenerate, render_generated_csv, render_lambda, verify,
    CellReport, GeneratedRow, Status, TableId, VerifyOptions, VerifyReport,
};
use higherk::curve::{Curve, DEFAULT_ENUM_BOUND};
use higherk::field::DEFAULT_DEGREE_CAP;
use higherk::kgroup::{kgroup_structure, Caps};
use higherk::tower::{
    default_verified_window, tower_structures, DEFAULT_BITS_BUDGET, DEFAULT_VALUATION_WINDOW,
};
use higherk::zeta::{kgroup_order, trace};
use higherk::Error;

#[derive(Parser, Debug)]
#[command(
    name = "higherk",
    version,
    about = "K-groups of elliptic curves over finite fields"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Seed for random point sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest field size enumerated point by point.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_BOUND, value_parser = clap::value_parser!(u64).range(1..))]
    enum_bound: u64,
    /// Largest extension degree built for torsion computations.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_CAP, value_parser = positive_usize)]
    degree_cap: usize,
    /// Bit budget of the exact big-integer valuation cross-check.
    #[arg(long, global = true, default_value_t = DEFAULT_BITS_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    bits_budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Csv,
    Kv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Point count, group structure, trace and inverse roots of one curve.
    CurveInfo {
        /// Curve as `p:a2:a4:a6`.
        #[arg(allow_hyphen_values = true)]
        curve: String,
    },
    /// Orders and structures of K_{2m} over F_{p^n}.
    Kgroup {
        #[arg(allow_hyphen_values = true)]
        curve: String,
        /// Inclusive range `A..B`, or a single `m`.
        #[arg(long, default_value = "1", value_parser = parse_m_range)]
        m: RangeInclusive<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
    },
    /// Growth of the l-part of K_2 along F_{p^{l^m}}.
    Tower {
        #[arg(allow_hyphen_values = true)]
        curve: String,
        #[arg(long)]
        l: u64,
        /// Highest level for valuations.
        #[arg(long, default_value_t = DEFAULT_VALUATION_WINDOW)]
        window: u32,
        /// Highest level with certified structures (default 3 for l = 2, 3, else 1).
        #[arg(long)]
        verified: Option<u32>,
    },
    /// Recompute every golden table cell and report disagreements.
    Verify {
        /// Restrict to these tables (I..V); repeatable.
        #[arg(long = "table", value_parser = parse_table)]
        tables: Vec<TableId>,
        /// Read `table_<id>.csv` files from this directory instead of the built-in copies.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Recompute a whole table for every isomorphism class over F_p.
    Tables {
        #[arg(long)]
        field: u64,
        #[arg(long, default_value = "1", value_parser = parse_m_range)]
        m: RangeInclusive<u64>,
    },
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".to_string()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_m_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t:?}: {e}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let m = parse(s)?;
            (m, m)
        }
    };
    if a == 0 || a > b {
        return Err(format!("empty or invalid range {s:?}"));
    }
    Ok(a..=b)
}

fn parse_table(s: &str) -> Result<TableId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of a subcommand: usage-level errors exit 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::fmt::Error> for Failure {
    fn from(e: std::fmt::Error) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<(String, ExitCode), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let caps = Caps {
        degree_cap: g.degree_cap,
        enum_bound: g.enum_bound,
        seed: g.seed,
        ..Caps::default()
    };
    let opts = VerifyOptions {
        caps,
        bits_budget: g.bits_budget,
        ..VerifyOptions::default()
    };
    let outcome = match &cli.command {
        Command::CurveInfo { curve } => curve_info(curve, g.format, &caps),
        Command::Kgroup { curve, m, n } => kgroup(curve, m, *n, g.format, &caps),
        Command::Tower {
            curve,
            l,
            window,
            verified,
        } => tower(curve, *l, *window, *verified, g.format, &caps),
        Command::Verify { tables, data_dir } => {
            run_verify(tables, data_dir.as_ref(), g.format, &opts)
        }
        Command::Tables { field, m } => tables(*field, m, g.format, &opts),
    };
    match outcome {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn parse_curve(spec: &str) -> Result<Curve, Failure> {
    spec.parse::<Curve>()
        .map_err(|e| Failure(format!("{spec}: {e}")))
}

fn kv_line(pairs: &[(&str, String)]) -> String {
    let parts: Vec<String> = pairs
        .iter()
        .map(|(k, v)| {
            if v.is_empty() || v.contains([' ', '"', '=']) {
                format!("{k}={v:?}")
            } else {
                format!("{k}={v}")
            }
        })
        .collect();
    parts.join(" ") + "\n"
}

fn render(format: Format, header: &[&str], rows: &[Vec<String>]) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(header).expect("in-memory write");
            for r in rows {
                w.write_record(r).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("fields are UTF-8")
        }
        Format::Kv => rows
            .iter()
            .map(|r| {
                kv_line(
                    &header
                        .iter()
                        .copied()
                        .zip(r.iter().cloned())
                        .collect::<Vec<_>>(),
                )
            })
            .collect(),
        Format::Human => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for r in rows {
                for (w, c) in widths.iter_mut().zip(r) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let line = |cells: Vec<String>| {
                let padded: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                    .collect();
                padded.join("  ").trim_end().to_string() + "\n"
            };
            let mut out = line(header.iter().map(|h| h.to_string()).collect());
            for r in rows {
                out += &line(r.clone());
            }
            out
        }
    }
}

fn curve_info(spec: &str, format: Format, caps: &Caps) -> Outcome {
    let curve = parse_curve(spec)?;
    let z = trace(&curve)?;
    let ef = curve.over(1)?.structure_by_enumeration(caps.enum_bound)?;
    let out = match format {
        Format::Human => {
            let mut s = String::new();
            writeln!(s, "curve   {curve}")?;
            writeln!(s, "N       {}", z.points)?;
            writeln!(s, "E(F)    {}", printed_group(&ef))?;
            writeln!(s, "a       {}", z.a)?;
            writeln!(s, "roots   {}", z.surd.render_unicode())?;
            writeln!(s, "D       {}", z.disc)?;
            s
        }
        _ => render(
            format,
            &["curve", "equation", "N", "EF", "a", "roots", "D"],
            &[vec![
                curve.spec_string(),
                curve.equation(),
                z.points.to_string(),
                printed_group(&ef),
                z.a.to_string(),
                z.surd.render_ascii(),
                z.disc.to_string(),
            ]],
        ),
    };
    Ok((out, ExitCode::SUCCESS))
}

fn kgroup(spec: &str, ms: &RangeInclusive<u64>, n: u64, format: Format, caps: &Caps) -> Outcome {
    let curve = parse_curve(spec)?;
    let a = trace(&curve)?.a;
    let mut rows = Vec::new();
    for m in ms.clone() {
        let order = kgroup_order(a, curve.p, n, m);
        let (canonical, printed, verified) = match kgroup_structure(&curve, n, m, caps) {
            Ok(s) => (s.factors.to_string(), printed_group(&s.factors), "yes"),
            Err(Error::DegreeCap { .. } | Error::SamplingBudget { .. }) => {
                ("unverified".to_string(), String::new(), "no")
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(vec![
            m.to_string(),
            format!("K_{}", 2 * m),
            order.to_string(),
            canonical,
            printed,
            verified.to_string(),
        ]);
    }
    let header = ["m", "group", "order", "structure", "printed", "verified"];
    let mut out = String::new();
    if format == Format::Human {
        writeln!(out, "{curve}, n={n}")?;
    }
    out += &render(format, &header, &rows);
    Ok((out, ExitCode::SUCCESS))
}

fn tower(
    spec: &str,
    l: u64,
    window: u32,
    verified: Option<u32>,
    format: Format,
    caps: &Caps,
) -> Outcome {
    let curve = parse_curve(spec)?;
    let verified = verified.unwrap_or_else(|| default_verified_window(l));
    let r = tower_structures(&curve, l, window, verified, caps)?;
    let formula = r.formula.as_ref();
    let mut rows = Vec::new();
    for (m, v) in r.valuations.iter().enumerate() {
        let structure = match r.structures.get(m) {
            Some(Some((e1, e2))) => format!("{e1},{e2}"),
            Some(None) => "capped".to_string(),
            None => "-".to_string(),
        };
        rows.push(vec![m.to_string(), v.to_string(), structure]);
    }
    let out = match format {
        Format::Human => {
            let mut s = String::new();
            match formula {
                Some(f) => writeln!(s, "λ={}; {}", r.lambda, f.render_unicode())?,
                None => writeln!(
                    s,
                    "λ={}; formula not reached within the verified window",
                    r.lambda
                )?,
            }
            writeln!(s, "ν={}, linear from m={}", r.nu, r.m0)?;
            s + &render(format, &["m", "v_m", "exponents"], &rows)
        }
        _ => {
            let mut s = render(
                format,
                &["l", "lambda", "nu", "m0", "formula"],
                &[vec![
                    l.to_string(),
                    r.lambda.to_string(),
                    r.nu.to_string(),
                    r.m0.to_string(),
                    formula.map(|f| f.compact()).unwrap_or_default(),
                ]],
            );
            if format == Format::Csv {
                s.push('\n');
            }
            s + &render(format, &["m", "v_m", "exponents"], &rows)
        }
    };
    Ok((out, ExitCode::SUCCESS))
}

fn cell_fields(c: &CellReport) -> Vec<String> {
    vec![
        c.table.to_string(),
        c.row.to_string(),
        c.cell.clone(),
        c.status.to_string(),
        c.printed.clone(),
        c.computed.clone(),
        c.note.clone(),
    ]
}

const CELL_HEADER: [&str; 7] = [
    "table", "row", "cell", "status", "printed", "computed", "note",
];

fn run_verify(
    tables: &[TableId],
    data_dir: Option<&PathBuf>,
    format: Format,
    opts: &VerifyOptions,
) -> Outcome {
    let selected: Vec<TableId> = if tables.is_empty() {
        TableId::ALL.to_vec()
    } else {
        TableId::ALL
            .into_iter()
            .filter(|t| tables.contains(t))
            .collect()
    };
    let rows = match data_dir {
        Some(dir) => load_dir(dir, &selected)?,
        None => load_golden()?
            .into_iter()
            .filter(|r| selected.contains(&r.table))
            .collect(),
    };
    let report = verify(&rows, opts);
    let code = if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    };
    let out = match format {
        Format::Human => human_verify(&report, &selected, rows.len())?,
        _ => render(
            format,
            &CELL_HEADER,
            &report.cells.iter().map(cell_fields).collect::<Vec<_>>(),
        ),
    };
    Ok((out, code))
}

fn human_verify(
    report: &VerifyReport,
    tables: &[TableId],
    row_count: usize,
) -> Result<String, Failure> {
    let mut s = String::new();
    for &t in tables {
        let cells: Vec<&CellReport> = report.cells.iter().filter(|c| c.table == t).collect();
        let rows: std::collections::BTreeSet<u32> = cells.iter().map(|c| c.row).collect();
        let count = |st: Status| cells.iter().filter(|c| c.status == st).count();
        let findings = cells.iter().filter(|c| c.status.is_finding()).count();
        if findings == 0 {
            writeln!(
                s,
                "Table {t}: {} rows, all green ({} cells, {} partial)",
                rows.len(),
                cells.len(),
                count(Status::Partial)
            )?;
        } else {
            writeln!(
                s,
                "Table {t}: {} rows, {} cells: {} registered, {} duplicate, {} hard, {} partial",
                rows.len(),
                cells.len(),
                count(Status::Registered),
                count(Status::Duplicate),
                count(Status::Hard),
                count(Status::Partial)
            )?;
        }
    }
    let findings: Vec<Vec<String>> = report.findings().map(cell_fields).collect();
    if !findings.is_empty() {
        writeln!(s)?;
        s += &render(Format::Human, &CELL_HEADER, &findings);
    }
    let registered = report
        .findings()
        .filter(|c| c.status != Status::Hard)
        .count();
    let hard = report.hard_failures().count();
    writeln!(s)?;
    writeln!(
        s,
        "{} over {row_count} rows: {registered} registered findings, {hard} unregistered",
        if hard == 0 { "PASS" } else { "FAIL" }
    )?;
    Ok(s)
}

fn tables(p: u64, ms: &RangeInclusive<u64>, format: Format, opts: &VerifyOptions) -> Outcome {
    let ms: Vec<u64> = ms.clone().collect();
    let rows = regenerate(p, &ms, opts)?;
    let out = match format {
        Format::Csv => render_generated_csv(&rows)?,
        _ => {
            let mut header = vec![
                "row".to_string(),
                "curve".into(),
                "equation".into(),
                "roots".into(),
                "EF".into(),
            ];
            header.extend(ms.iter().map(|m| format!("K{}", 2 * m)));
            header.extend(["lambda".to_string(), "sylow".into()]);
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let body: Vec<Vec<String>> = rows.iter().map(|r| generated_fields(r, format)).collect();
            render(format, &header, &body)
        }
    };
    Ok((out, ExitCode::SUCCESS))
}

fn generated_fields(r: &GeneratedRow, format: Format) -> Vec<String> {
    let surd = higherk::zeta::Surd::from_trace(r.trace, r.curve.p);
    let human = format == Format::Human;
    let mut out = vec![
        r.row.to_string(),
        r.curve.spec_string(),
        r.curve.equation(),
        if human {
            surd.render_unicode()
        } else {
            surd.render_ascii()
        },
        printed_group(&r.ef),
    ];
    out.extend(r.k.iter().map(|k| match &k.structure {
        Some(s) => printed_group(s),
        None => format!("#{}", k.order),
    }));
    out.push(render_lambda(&r.lambda));
    out.push(
        r.sylow
            .iter()
            .map(|f| {
                if human {
                    f.render_unicode()
                } else {
                    f.render_ascii()
                }
            })
            .collect::<Vec<_>>()
            .join("; "),
    );
    out
}
