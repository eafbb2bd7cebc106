//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::congruence::{is_discriminant, sqrt_count};
use crate::cube::{default_entry_bound, orbit_count_normal_forms, orbit_count_oracle};
use crate::error::{domain, Error, Result};
use crate::identities::{
    partial_sum, verify_cor24, verify_lemma41, verify_prop21, verify_prop25, verify_thm12, IdentityReport,
    Status, Variant,
};
use crate::orbits::{congruence_pairs, cube_from_invariants, orbit_count, orbit_table};
use crate::ppart::{f_a3_expand, thm44_check, DEFAULT_K};
use crate::quadring::{moduli, verify_thm13};
use crate::wmds::{a_coeff3, coefficient_table, is_odd_discriminant};

pub const THREADS_ENV: &str = "CUBEZETA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cubezeta", version, about = "Orbit counts of integer cubes and related Dirichlet series")]
pub struct Cli {
    /// Worker threads (overrides CUBEZETA_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format (default csv; json for moduli).
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CountKind {
    /// Square roots of D modulo a.
    #[value(name = "A")]
    A,
    /// Orbit count B(D, m, n).
    #[value(name = "B")]
    B,
    /// Coefficient a(D, m, n).
    #[value(name = "a3")]
    A3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    #[value(name = "B")]
    B,
    #[value(name = "a3")]
    A3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Prop21,
    Cor24,
    Prop25,
    Thm12,
    Thm44,
    Thm13,
    Lemma41,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Printed,
    Corrected,
    Both,
}

impl VariantArg {
    fn variants(self) -> Vec<Variant> {
        match self {
            VariantArg::Printed => vec![Variant::Printed],
            VariantArg::Corrected => vec![Variant::Corrected],
            VariantArg::Both => vec![Variant::Printed, Variant::Corrected],
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Dmn {
    #[arg(long = "D", allow_negative_numbers = true)]
    pub d: i64,
    #[arg(long, default_value_t = 1)]
    pub m: i64,
    #[arg(long, default_value_t = 1)]
    pub n: i64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a single value.
    Count {
        #[arg(value_enum)]
        kind: CountKind,
        #[arg(long = "D", allow_negative_numbers = true)]
        d: i64,
        /// Modulus for A.
        #[arg(long, allow_negative_numbers = true)]
        a: Option<i64>,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long, default_value_t = 1)]
        n: i64,
    },
    /// Orbit count, optionally cross-checked by bounded enumeration.
    Orbits {
        #[command(flatten)]
        dmn: Dmn,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        entry_bound: Option<i64>,
        #[arg(long, default_value_t = 2)]
        slack: i64,
    },
    /// Congruence pairs and their constructed cubes.
    Pairs {
        #[command(flatten)]
        dmn: Dmn,
    },
    /// Coefficients of the A3 local factor.
    Ppart {
        #[arg(long, default_value_t = DEFAULT_K)]
        kmax: usize,
        /// Specialize p to an integer.
        #[arg(long)]
        p: Option<i64>,
    },
    /// Check a series identity over a range; exits 1 on any failure.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        #[arg(long = "D", allow_negative_numbers = true)]
        d: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        dmin: Option<i64>,
        #[arg(long, allow_negative_numbers = true)]
        dmax: Option<i64>,
        /// Dirichlet truncation.
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_K)]
        kmax: usize,
        #[arg(long)]
        p: Option<i64>,
        #[arg(long)]
        a1: Option<i64>,
        #[arg(long)]
        a2: Option<i64>,
        #[arg(long, default_value_t = 30)]
        amax: i64,
        #[arg(long, value_enum, default_value_t = VariantArg::Printed)]
        variant: VariantArg,
    },
    /// Emit a coefficient table.
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        #[arg(long = "Dmax")]
        d_max: i64,
        #[arg(long = "Mmax")]
        m_max: i64,
    },
    /// Truncated triple sum of orbit counts.
    Zeta {
        #[arg(long)]
        s1: f64,
        #[arg(long)]
        s2: f64,
        #[arg(long)]
        w: f64,
        #[arg(long = "Dmax")]
        d_max: i64,
        #[arg(long = "Mmax")]
        m_max: i64,
    },
    /// Ideal class pairs with their fiber sizes.
    Moduli {
        #[arg(long = "D", allow_negative_numbers = true)]
        d: i64,
        #[arg(long)]
        a1: i64,
        #[arg(long)]
        a2: i64,
    },
}

fn fields<T: Serialize>(row: &T, header: &[&str]) -> Result<Vec<String>> {
    let v = serde_json::to_value(row).map_err(|e| Error::Io(e.to_string()))?;
    Ok(header
        .iter()
        .map(|h| match &v[*h] {
            Value::String(s) => s.clone(),
            Value::Null => String::new(),
            other => other.to_string(),
        })
        .collect())
}

fn emit_rows<T: Serialize>(out: &mut dyn Write, format: Format, header: &[&str], rows: &[T]) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            let err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(header).map_err(err)?;
            for r in rows {
                w.write_record(fields(r, header)?).map_err(err)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(out)?;
        }
        Format::Text => {
            for r in rows {
                writeln!(out, "{}", fields(r, header)?.join(" "))?;
            }
        }
    }
    Ok(())
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

/// Decimal rendering with 15 significant digits.
pub fn fifteen_digits(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (14 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

fn d_range(d: Option<i64>, dmin: Option<i64>, dmax: Option<i64>) -> Result<Vec<i64>> {
    match (d, dmin, dmax) {
        (Some(d), None, None) => Ok(vec![d]),
        (None, lo, Some(hi)) => {
            let lo = lo.unwrap_or(-hi);
            if lo > hi {
                return domain("empty D range");
            }
            Ok((lo..=hi).filter(|&d| d != 0).collect())
        }
        _ => domain("give either --D or --dmax [--dmin]"),
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    schema: u32,
    identity: String,
    variant: Variant,
    params: Value,
    status: Status,
    checked: usize,
    failed: usize,
    findings: usize,
    first_mismatch: Option<Value>,
}

fn summarize(identity: &str, variant: Variant, params: Value, reports: &[IdentityReport]) -> Summary {
    let failed: Vec<&IdentityReport> = reports.iter().filter(|r| r.status == Status::Fail).collect();
    let findings: Vec<&IdentityReport> = reports.iter().filter(|r| r.status == Status::Finding).collect();
    let first = failed.first().or(findings.first()).map(|r| {
        json!({"params": r.params, "mismatch": r.first_mismatch, "finding": r.finding})
    });
    let status = if !failed.is_empty() {
        Status::Fail
    } else if !findings.is_empty() {
        Status::Finding
    } else {
        Status::Pass
    };
    Summary {
        schema: 1,
        identity: identity.to_string(),
        variant,
        params,
        status,
        checked: reports.len(),
        failed: failed.len(),
        findings: findings.len(),
        first_mismatch: first,
    }
}

fn relevant(identity: Identity, key: &str) -> bool {
    match identity {
        Identity::Thm44 => matches!(key, "kmax" | "p"),
        Identity::Thm13 => matches!(key, "D" | "dmin" | "dmax" | "a1" | "a2" | "amax"),
        _ => matches!(key, "D" | "dmin" | "dmax" | "M"),
    }
}

fn run_verify(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    let Command::Verify {
        identity,
        d,
        dmin,
        dmax,
        m,
        kmax,
        p,
        a1,
        a2,
        amax,
        variant,
    } = cmd
    else {
        unreachable!()
    };
    use rayon::prelude::*;
    let mut summaries = Vec::new();
    let name = format!("{identity:?}").to_lowercase();
    for v in variant.variants() {
        let reports: Vec<IdentityReport> = match identity {
            Identity::Thm44 => {
                let r = thm44_check(*kmax, *p)?;
                let report = IdentityReport {
                    schema: 1,
                    identity: "thm44".into(),
                    variant: v,
                    params: json!({"kmax": kmax, "p": p}),
                    status: if r.equal { Status::Pass } else { Status::Fail },
                    first_mismatch: r.first_mismatch.map(|mm| crate::identities::Mismatch {
                        index: format!("({},{},{})", mm.l, mm.k, mm.t),
                        lhs: mm.expansion,
                        rhs: mm.convolution,
                    }),
                    finding: None,
                };
                vec![report]
            }
            Identity::Thm13 => {
                let ds: Vec<i64> = d_range(*d, *dmin, *dmax)?
                    .into_iter()
                    .filter(|&d| is_discriminant(d))
                    .collect();
                let (r1, r2) = match (a1, a2) {
                    (Some(x), Some(y)) => ((*x..=*x), (*y..=*y)),
                    _ => ((1..=*amax), (1..=*amax)),
                };
                let mut cells = Vec::new();
                for &d in &ds {
                    for x in r1.clone() {
                        for y in r2.clone() {
                            cells.push((d, x, y));
                        }
                    }
                }
                cells
                    .par_iter()
                    .map(|&(d, x, y)| verify_thm13(d, x, y, v))
                    .collect::<Result<_>>()?
            }
            _ => {
                let ds = d_range(*d, *dmin, *dmax)?;
                let ds: Vec<i64> = match identity {
                    Identity::Prop21 | Identity::Cor24 => ds.into_iter().filter(|&d| is_discriminant(d)).collect(),
                    Identity::Prop25 => ds.into_iter().filter(|d| d % 2 != 0).collect(),
                    _ => ds.into_iter().filter(|&d| is_odd_discriminant(d)).collect(),
                };
                ds.par_iter()
                    .map(|&d| match identity {
                        Identity::Prop21 => verify_prop21(d, m.unwrap_or(200), v),
                        Identity::Cor24 => verify_cor24(d, m.unwrap_or(200), v),
                        Identity::Prop25 => verify_prop25(d, m.unwrap_or(100), v),
                        Identity::Thm12 => verify_thm12(d, m.unwrap_or(32), v),
                        Identity::Lemma41 => verify_lemma41(d, m.unwrap_or(48)),
                        _ => unreachable!(),
                    })
                    .collect::<Result<_>>()?
            }
        };
        let params = json!({
            "D": d, "dmin": dmin, "dmax": dmax, "M": m, "kmax": kmax, "p": p,
            "a1": a1, "a2": a2, "amax": amax,
        });
        let params = Value::Object(
            params
                .as_object()
                .unwrap()
                .iter()
                .filter(|(k, v)| !v.is_null() && relevant(*identity, k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        );
        summaries.push(summarize(&name, v, params, &reports));
    }
    let failed = summaries.iter().any(|s| s.status == Status::Fail);
    emit_json(out, &serde_json::to_value(&summaries).map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(if failed { 1 } else { 0 })
}

/// Runs a parsed command, writing to `out`; returns the process exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let format = cli.format.unwrap_or(Format::Csv);
    match &cli.command {
        Command::Count { kind, d, a, m, n } => {
            let v = match kind {
                CountKind::A => {
                    let a = a.ok_or_else(|| Error::Domain("count A needs --a".into()))?;
                    sqrt_count(*d, a)?
                }
                CountKind::B => orbit_count(*d, *m, *n)?,
                CountKind::A3 => {
                    if *m <= 0 || *n <= 0 {
                        return domain("m and n must be positive");
                    }
                    a_coeff3(*d, *m as u64, *n as u64)?
                }
            };
            writeln!(out, "{v}")?;
        }
        Command::Orbits { dmn, oracle, entry_bound, slack } => {
            let b = orbit_count(dmn.d, dmn.m, dmn.n)?;
            let mut row = json!({"D": dmn.d, "m": dmn.m, "n": dmn.n, "B": b});
            let mut code = 0;
            if *oracle {
                let bound = entry_bound.unwrap_or_else(|| default_entry_bound(dmn.m, dmn.n));
                let r = orbit_count_oracle(dmn.d, dmn.m, dmn.n, bound, *slack)?;
                let nf = orbit_count_normal_forms(dmn.d, dmn.m, dmn.n)?;
                row["oracle"] = json!(r.count);
                row["stable"] = json!(r.stable);
                row["canonical"] = json!(nf);
                if !r.stable || r.count != b || nf != b {
                    code = 1;
                }
            }
            let header: Vec<&str> = if *oracle {
                vec!["D", "m", "n", "B", "oracle", "stable", "canonical"]
            } else {
                vec!["D", "m", "n", "B"]
            };
            emit_rows(out, format, &header, &[row])?;
            return Ok(code);
        }
        Command::Pairs { dmn } => {
            let mut rows = Vec::new();
            for p in congruence_pairs(dmn.d, dmn.m, dmn.n)? {
                let cube = cube_from_invariants(&p)?;
                rows.push(json!({"x": p.x, "y": p.y, "s": p.s, "t": p.t, "cube": cube.to_string()}));
            }
            emit_rows(out, format, &["x", "y", "s", "t", "cube"], &rows)?;
        }
        Command::Ppart { kmax, p } => {
            let s = f_a3_expand(*kmax, *p)?;
            let rows: Vec<Value> = s
                .iter()
                .map(|(l, k, t, c)| json!({"l": l, "k": k, "t": t, "poly": c.to_string()}))
                .collect();
            emit_rows(out, format, &["l", "k", "t", "poly"], &rows)?;
        }
        cmd @ Command::Verify { .. } => return run_verify(cmd, out),
        Command::Table { kind, d_max, m_max } => match kind {
            TableKind::B => emit_rows(out, format, &["D", "m", "n", "B"], &orbit_table(*d_max, *m_max)?)?,
            TableKind::A3 => emit_rows(
                out,
                format,
                &["D", "m", "n", "a", "chi_m", "chi_n"],
                &coefficient_table(*d_max, (*m_max).max(0) as u64)?,
            )?,
        },
        Command::Zeta { s1, s2, w, d_max, m_max } => {
            let r = partial_sum(*s1, *s2, *w, *d_max, *m_max)?;
            if !r.converges {
                eprintln!("warning: parameters outside s1, s2, w > 1; partial sums may not converge");
            }
            let row = json!({
                "s1": s1, "s2": s2, "w": w, "Dmax": d_max, "Mmax": m_max,
                "value": fifteen_digits(r.value), "converges": r.converges,
            });
            emit_rows(out, format, &["s1", "s2", "w", "Dmax", "Mmax", "value", "converges"], &[row])?;
        }
        Command::Moduli { d, a1, a2 } => {
            let rows = moduli(*d, *a1, *a2)?;
            emit_rows(out, cli.format.unwrap_or(Format::Json), &["D", "a1", "b1", "a2", "b2", "fiber", "fiber_exact"], &rows)?;
        }
    }
    Ok(0)
}

fn configure_threads(threads: Option<usize>) {
    let n = threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Entry point for the binary: parses arguments, runs, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let result = match &cli.out {
        Some(path) => match File::create(path) {
            Ok(f) => {
                let mut w = BufWriter::new(f);
                execute(&cli, &mut w).and_then(|c| {
                    w.flush()?;
                    Ok(c)
                })
            }
            Err(e) => Err(Error::from(e)),
        },
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            execute(&cli, &mut lock)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String) {
        let cli = Cli::try_parse_from(std::iter::once("cubezeta").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let code = execute(&cli, &mut buf).unwrap();
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn count_examples() {
        assert_eq!(run(&["count", "B", "--D", "45", "--m", "3", "--n", "3"]).1, "16\n");
        assert_eq!(run(&["count", "A", "--D", "9", "--a", "27"]).1, "6\n");
        assert_eq!(run(&["count", "a3", "--D", "25", "--m", "5", "--n", "5"]).1, "5\n");
        assert_eq!(run(&["count", "B", "--D", "-4"]).1, "4\n");
    }

    #[test]
    fn empty_table_has_header() {
        assert_eq!(run(&["table", "B", "--Dmax", "0", "--Mmax", "5"]).1, "D,m,n,B\n");
        assert_eq!(run(&["table", "a3", "--Dmax", "0", "--Mmax", "5"]).1, "D,m,n,a,chi_m,chi_n\n");
    }

    #[test]
    fn table_rows() {
        let (_, s) = run(&["table", "B", "--Dmax", "5", "--Mmax", "1"]);
        assert_eq!(s, "D,m,n,B\n-4,1,1,4\n-3,1,1,4\n1,1,1,4\n4,1,1,4\n5,1,1,4\n");
    }

    #[test]
    fn verify_thm44_passes() {
        let (code, s) = run(&["verify", "thm44", "--kmax", "8"]);
        assert_eq!(code, 0, "{s}");
        assert!(s.contains("\"status\": \"pass\""));
    }

    #[test]
    fn verify_exit_codes() {
        assert_eq!(run(&["verify", "prop25", "--D", "5", "--variant", "corrected"]).0, 0);
        assert_eq!(run(&["verify", "prop25", "--D", "5"]).0, 1);
        let (code, s) = run(&["verify", "prop21", "--D", "5"]);
        assert_eq!(code, 0);
        assert!(s.contains("\"status\": \"finding\""));
        assert_eq!(run(&["verify", "thm13", "--D", "45", "--a1", "3", "--a2", "3"]).0, 0);
        assert_eq!(run(&["verify", "thm13", "--D", "16", "--a1", "4", "--a2", "4"]).0, 1);
    }

    #[test]
    fn orbits_with_oracle() {
        let (code, s) = run(&["orbits", "--D", "9", "--m", "3", "--n", "3", "--oracle"]);
        assert_eq!(code, 0);
        assert_eq!(s, "D,m,n,B,oracle,stable,canonical\n9,3,3,16,16,true,16\n");
    }

    #[test]
    fn pairs_and_ppart() {
        let (_, s) = run(&["pairs", "--D", "5"]);
        assert_eq!(s, "x,y,s,t,cube\n1,1,-1,-1,1 1 0 1 1 0 1 -1\n");
        let (_, s) = run(&["ppart", "--kmax", "2"]);
        assert!(s.starts_with("l,k,t,poly\n0,0,0,1\n"));
        assert!(s.contains("\n1,2,1,1*p\n"));
    }

    #[test]
    fn zeta_output() {
        let (_, s) = run(&["--format", "json", "zeta", "--s1", "2", "--s2", "2", "--w", "2", "--Dmax", "0", "--Mmax", "3"]);
        assert!(s.contains("\"value\": \"0\""));
        assert_eq!(fifteen_digits(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fifteen_digits(12.5), "12.5000000000000");
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        let err = Cli::try_parse_from(["cubezeta", "count", "Q", "--D", "5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = Cli::try_parse_from(["cubezeta", "table", "B", "--Dmax", "x", "--Mmax", "1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
