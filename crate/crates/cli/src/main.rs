//! `bsarr`: Bernstein-Sato certificates and symbol-ideal checks for generic
//! hyperplane arrangements.
//!
//! Exit status: 0 pass, 1 mathematical check failed, 2 input error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use bsarr_core::arrangement::{Arrangement, ArrangementFile};
use bsarr_core::bernstein::{
    ansatz_solve, build_witness_traced, candidate_b, timestamp_now, verify_certificate, AnsatzResult,
    BFactored, BRole, FactorPower, BernsteinCertificate, CertificateError, Provenance, Status,
};
use bsarr_core::charvariety::{ann_membership, conormal_check, groebner_check, regularity_check, slopes_report, symbol_ideal};
use bsarr_core::error::{ArrangementError, BernsteinError, CharVarError};
use bsarr_core::ls_module::annihilates;
use bsarr_core::weyl::{ck_table, euler_expand, EulerOffset, WeylOp};

#[derive(Parser, Debug)]
#[command(name = "bsarr", version, about = "Bernstein-Sato polynomials of generic hyperplane arrangements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Io {
    /// input JSON file
    #[arg(long)]
    input: PathBuf,
    /// output file; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Table {
    /// space dimension
    #[arg(long)]
    n: usize,
    /// number of Euler factors
    #[arg(long)]
    k: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test that every n of the forms are independent
    CheckGeneric(Io),
    /// Print the candidate b in factored form
    Candidate(Io),
    /// Build, verify and write a certificate
    Witness(Io),
    /// Re-check a certificate file
    Verify(Io),
    /// Solve for a witness by linear ansatz
    Ansatz {
        #[command(flatten)]
        io: Io,
        /// derivation order bound [default: n + p]
        #[arg(long)]
        order_bound: Option<u32>,
        /// coefficient (x, s)-degree bound [default: p]
        #[arg(long)]
        degree_bound: Option<u32>,
    },
    /// Test an operator against l^s; input {"arrangement": .., "operator": ".."}
    Annihilator(Io),
    /// Groebner structure of the reduced symbol ideal, plus the regularity test
    GroebnerCheck {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// random samples for the regularity test
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Slopes and component containments over H = 0
    Slopes(Io),
    /// Conormal containments at s = 0
    ConormalCheck(Io),
    /// Table of the Euler-product coefficients
    CkTable(Table),
    /// Compare expanded Euler products with the coefficient table
    EulerCheck(Table),
}

/// Input problems (exit 2) and failed checks (exit 1).
enum Failure {
    Input(String),
    Check(String),
}

impl From<ArrangementError> for Failure {
    fn from(e: ArrangementError) -> Self {
        match e {
            ArrangementError::NotGeneric { .. } => Failure::Check(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<BernsteinError> for Failure {
    fn from(e: BernsteinError) -> Self {
        match e {
            BernsteinError::Arrangement(a) => a.into(),
            other => Failure::Check(other.to_string()),
        }
    }
}

impl From<CharVarError> for Failure {
    fn from(e: CharVarError) -> Self {
        match e {
            CharVarError::Arrangement(a) => a.into(),
            CharVarError::WrongP { .. } => Failure::Input(e.to_string()),
            CharVarError::CheckFailed(m) => Failure::Check(m),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text)
        .map_err(|e| Failure::Input(format!("malformed JSON: {e}")))
}

fn load_arrangement(io: &Io) -> Result<Arrangement, Failure> {
    let f: ArrangementFile = parse_json(&read(&io.input)?)?;
    Ok(Arrangement::from_file(f)?)
}

fn emit(text: &str, output: &Option<PathBuf>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, output: &Option<PathBuf>) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    emit(&s, output)
}

/// Same field order as the `b` block of a certificate.
#[derive(Serialize)]
struct BOut<'a> {
    factors: &'a [FactorPower],
    text: String,
    role: BRole,
}

fn b_out(b: &BFactored) -> BOut<'_> {
    BOut { factors: &b.factors, text: b.to_string(), role: b.role }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::CheckGeneric(io) => {
            let f: ArrangementFile = parse_json(&read(&io.input)?)?;
            let a = Arrangement::from_file(f)?;
            let cert = a.check_generic();
            emit_json(&cert, &io.output)?;
            if let Some(w) = &cert.witness {
                eprintln!("not generic: dependent subset {w:?}");
            }
            Ok(cert.generic)
        }
        Command::Candidate(io) => {
            let a = load_arrangement(&io)?;
            emit_json(&b_out(&candidate_b(&a)?), &io.output)?;
            Ok(true)
        }
        Command::Witness(io) => {
            let a = load_arrangement(&io)?;
            let b = candidate_b(&a)?;
            let (cert, trace) = build_witness_traced(&a, &b)?;
            eprintln!(
                "provenance {:?}; {} monomials, {} exchanges checked, {} witness terms",
                cert.provenance,
                trace.monomials,
                trace.exchanges_checked,
                cert.witness.num_terms()
            );
            emit(&cert.to_json(), &io.output)?;
            Ok(cert.status == Status::Verified)
        }
        Command::Verify(io) => {
            let text = read(&io.input)?;
            let mut cert = BernsteinCertificate::from_json(&text).map_err(|e| match e {
                CertificateError::Arrangement(ArrangementError::NotGeneric { .. }) => Failure::Check(e.to_string()),
                other => Failure::Input(other.to_string()),
            })?;
            let ok = verify_certificate(&mut cert);
            emit_json(&json!({ "verified": ok, "provenance": cert.provenance }), &io.output)?;
            Ok(ok)
        }
        Command::Ansatz { io, order_bound, degree_bound } => {
            let a = load_arrangement(&io)?;
            let b = candidate_b(&a)?;
            let order = order_bound.unwrap_or((a.n() + a.p()) as u32);
            let degree = degree_bound.unwrap_or(a.p() as u32);
            match ansatz_solve(&a, &b, order, degree) {
                AnsatzResult::Found(w) => {
                    let mut cert = BernsteinCertificate {
                        arrangement: a,
                        b,
                        witness: w,
                        provenance: Provenance::Ansatz,
                        status: Status::Unverified,
                        timestamp: timestamp_now(),
                    };
                    let ok = verify_certificate(&mut cert);
                    emit(&cert.to_json(), &io.output)?;
                    Ok(ok)
                }
                AnsatzResult::NotFound { unknowns, rank } => {
                    emit_json(
                        &json!({
                            "found": false,
                            "order_bound": order,
                            "degree_bound": degree,
                            "unknowns": unknowns,
                            "rank": rank,
                            "note": "no solution at these bounds; membership is not decided",
                        }),
                        &io.output,
                    )?;
                    Ok(false)
                }
            }
        }
        Command::Annihilator(io) => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Input {
                arrangement: ArrangementFile,
                operator: String,
            }
            let input: Input = parse_json(&read(&io.input)?)?;
            let a = Arrangement::from_file(input.arrangement)?;
            let op = WeylOp::parse(&input.operator, a.n(), a.p()).map_err(|e| Failure::Input(e.to_string()))?;
            a.require_generic()?;
            let kills = annihilates(&op, &a);
            let mut report = json!({ "operator": op.to_string(), "annihilates": kills });
            let mut ok = kills;
            if a.p() == a.n() + 1 {
                let m = ann_membership(&op, &a)?;
                // membership in the generated ideal implies annihilation
                ok = kills == m.member;
                let cof = m.cofactors.as_ref().map(|c| {
                    m.labels.iter().zip(c).map(|(l, q)| json!({ "generator": l, "cofactor": q.to_string() })).collect::<Vec<_>>()
                });
                report["member"] = json!(m.member);
                report["cofactors"] = json!(cof);
            }
            emit_json(&report, &io.output)?;
            Ok(ok)
        }
        Command::GroebnerCheck { io, seed, samples } => {
            let a = load_arrangement(&io)?;
            let s = symbol_ideal(&a)?;
            let g = groebner_check(&s);
            let r = regularity_check(&s, samples, seed)?;
            emit_json(&json!({ "groebner": g, "regularity": r }), &io.output)?;
            Ok(g.passed && r.passed)
        }
        Command::Slopes(io) => {
            let a = load_arrangement(&io)?;
            let r = slopes_report(&a)?;
            emit_json(&r, &io.output)?;
            Ok(r.passed)
        }
        Command::ConormalCheck(io) => {
            let a = load_arrangement(&io)?;
            let r = conormal_check(&a)?;
            emit_json(&r, &io.output)?;
            Ok(r.passed)
        }
        Command::CkTable(t) => {
            check_table_args(&t)?;
            let table = ck_table(t.n, t.k);
            let entries: Vec<_> = table.entries.iter().map(|(i, c)| json!({ "index": i, "value": c })).collect();
            emit_json(&json!({ "n": t.n, "k": t.k, "entries": entries }), &t.output)?;
            Ok(true)
        }
        Command::EulerCheck(t) => {
            check_table_args(&t)?;
            let table = ck_table(t.n, t.k);
            let minus = euler_expand(t.n, t.k, EulerOffset::Minus) == table.x_then_d(0);
            let plus = euler_expand(t.n, t.k, EulerOffset::PlusN) == table.d_then_x(0);
            emit_json(&json!({ "n": t.n, "k": t.k, "minus_j": minus, "plus_j_plus_n": plus }), &t.output)?;
            Ok(minus && plus)
        }
    }
}

fn check_table_args(t: &Table) -> Result<(), Failure> {
    if t.n == 0 || t.k == 0 || t.n > 8 {
        return Err(Failure::Input(format!("need 1 <= n <= 8 and k >= 1 (got n = {}, k = {})", t.n, t.k)));
    }
    Ok(())
}

fn configure_threads() {
    if let Some(k) = std::env::var("BSARR_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if k > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("input error: {m}");
            ExitCode::from(2)
        }
    }
}
