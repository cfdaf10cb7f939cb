use std::path::Path;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use k3iso_core::decide::{self, DecisionRequest, Verdict};
use k3iso_core::mukai_model::{build_v, perp_quotient, verify_nu};
use k3iso_core::qsolve::forms::Mat2;
use k3iso_core::qsolve::{self, ConstraintSet, Representation, Strategy};
use k3iso_core::scan::{self, Cell, Row, ScanSpec, ROW_COLUMNS};

use crate::io::{open_output, read_input, write_json, Failure};
use crate::{Format, ScanArgs};

fn exit_code(verdict: &str) -> u8 {
    match verdict {
        "yes" => 0,
        "no" => 1,
        _ => 2,
    }
}

fn write_rows(out: &Path, rows: &[Row], format: Format) -> Result<(), Failure> {
    if format == Format::Json {
        return write_json(out, &rows);
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(open_output(out)?);
    w.write_record(ROW_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn decide(input: &Path, out: &Path, csv: bool) -> Result<u8, Failure> {
    let request: DecisionRequest = serde_json::from_str(&read_input(input)?)?;
    let input = request.into_input()?;
    if csv {
        let cell = Cell {
            mukai: input.mukai,
            lattice: input.lattice,
        };
        let row = scan::evaluate(&cell, input.full_picard_general, None);
        if let Some(e) = &row.error {
            return Err(Failure::invalid(e));
        }
        write_rows(out, std::slice::from_ref(&row), Format::Csv)?;
        return Ok(exit_code(&row.verdict));
    }
    let verdict: Verdict = decide::decide(&input)?;
    write_json(out, &verdict)?;
    Ok(exit_code(verdict.label()))
}

pub fn scan(args: ScanArgs) -> Result<(), Failure> {
    let spec = ScanSpec {
        r: (args.r_min, args.r_max),
        s: (args.s_min, args.s_max),
        d: (args.d_min, args.d_max),
        max_n_half: args.max_n_half,
        max_gamma_delta: args.max_gamma_delta,
        full_picard_general: args.full,
        series: args.series.map(Into::into),
    };
    let cells = spec.cells()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Failure::invalid(format!("thread pool: {e}")))?;
    let oracle = args.oracle.then_some(args.bound);
    // Indexed collect keeps cell order whatever the scheduling.
    let rows: Vec<Row> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| scan::evaluate(c, spec.full_picard_general, oracle))
            .collect()
    });
    let rows: Vec<Row> = rows.into_iter().filter(|r| spec.keeps(r)).collect();
    write_rows(&args.out, &rows, args.format)
}

#[derive(Deserialize)]
struct SolveRequest {
    #[serde(with = "k3iso_core::intser")]
    gamma: BigInt,
    #[serde(with = "k3iso_core::intser")]
    delta: BigInt,
    #[serde(with = "k3iso_core::intser")]
    m: BigInt,
    #[serde(default)]
    constraints: ConstraintSet,
}

#[derive(Serialize)]
struct SolveResponse {
    solvable: bool,
    #[serde(with = "k3iso_core::intser::option_pair")]
    witness: Option<(BigInt, BigInt)>,
    /// `witness`, `no_solution` or `incompatible_constraints`.
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleCheck>,
}

#[derive(Serialize)]
struct OracleCheck {
    bound: u64,
    /// Solutions in the box `|x|, |y| ≤ bound`.
    hits: usize,
    /// A negative answer has no box hit; a positive one verifies on its own.
    agrees: bool,
}

pub fn solve_form(input: &Path, out: &Path, strategy: Strategy, oracle: Option<u64>) -> Result<(), Failure> {
    let req: SolveRequest = serde_json::from_str(&read_input(input)?)?;
    let (rep, _) = qsolve::represent_with(&req.gamma, &req.delta, &req.m, &req.constraints, strategy)?;
    let status = match rep {
        Representation::Witness { .. } => "witness",
        Representation::NoSolution => "no_solution",
        Representation::IncompatibleConstraints => "incompatible_constraints",
    };
    let witness = rep.witness();
    let oracle = oracle.map(|bound| {
        let hits = qsolve::enumerate_bounded(&req.gamma, &req.delta, &req.m, &req.constraints, bound).len();
        let verified = witness
            .as_ref()
            .is_some_and(|(x, y)| &req.gamma * x * x - &req.delta * y * y == req.m && req.constraints.admits(x, y));
        OracleCheck {
            bound,
            hits,
            agrees: if witness.is_some() { verified } else { hits == 0 },
        }
    });
    write_json(
        out,
        &SolveResponse {
            solvable: rep.is_solvable(),
            witness,
            status,
            oracle,
        },
    )
}

fn one() -> BigInt {
    BigInt::one()
}

#[derive(Deserialize)]
struct ModelRequest {
    #[serde(with = "k3iso_core::intser")]
    a: BigInt,
    #[serde(with = "k3iso_core::intser")]
    b: BigInt,
    #[serde(with = "k3iso_core::intser")]
    c: BigInt,
    #[serde(with = "k3iso_core::intser", default = "one")]
    d1: BigInt,
    #[serde(with = "k3iso_core::intser", default = "one")]
    d2: BigInt,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelInput {
    One(ModelRequest),
    Many(Vec<ModelRequest>),
}

#[derive(Serialize)]
struct ModelResponse {
    #[serde(with = "k3iso_core::intser")]
    a: BigInt,
    #[serde(with = "k3iso_core::intser")]
    b: BigInt,
    #[serde(with = "k3iso_core::intser")]
    c: BigInt,
    #[serde(with = "k3iso_core::intser")]
    d1: BigInt,
    #[serde(with = "k3iso_core::intser")]
    d2: BigInt,
    #[serde(with = "k3iso_core::intser::matrix2")]
    gram: Mat2,
    #[serde(with = "k3iso_core::intser::option")]
    h_sq: Option<BigInt>,
    #[serde(with = "k3iso_core::intser::option")]
    index: Option<BigInt>,
    nu_ok: bool,
}

fn model_report(req: ModelRequest) -> Result<ModelResponse, Failure> {
    let q = perp_quotient(&build_v(&req.a, &req.b, &req.c, &req.d1, &req.d2)?)?;
    let nu = verify_nu(&req.a, &req.b, &req.c, &req.d1, &req.d2)?;
    Ok(ModelResponse {
        a: req.a,
        b: req.b,
        c: req.c,
        d1: req.d1,
        d2: req.d2,
        gram: q.gram,
        h_sq: q.h_sq,
        index: q.index,
        nu_ok: nu.nu_ok,
    })
}

pub fn verify_model(input: &Path, out: &Path) -> Result<(), Failure> {
    match serde_json::from_str(&read_input(input)?)? {
        ModelInput::One(req) => write_json(out, &model_report(req)?),
        ModelInput::Many(reqs) => {
            let reports = reqs.into_iter().map(model_report).collect::<Result<Vec<_>, _>>()?;
            write_json(out, &reports)
        }
    }
}
