//! Command implementations. Each takes file contents rather than paths and
//! returns an exit status with the text to print, so the binary stays a
//! thin wrapper and tests can call these directly.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use pets_core::certifier::{certify, is_zero_one, CertifyError};
use pets_core::derivation::Derivation;
use pets_core::frame::{Assignment, Frame};
use pets_core::oracle::{check_kappa_model, rewrite_eval, Fuel, ModelCheckScope, DEFAULT_CAP};

use crate::format::{
    parse_assignment, parse_derivation, parse_frame, parse_term, parse_theory, print_theory, DerivationFileError,
    Lines, Theory, TheoryError,
};
use crate::fuzz::{self, Corpus};
use crate::report::{certificate_json, model_check_json, to_json, CheckJson, DiagnosticJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_NICENESS: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_CERTIFY: i32 = 4;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Output {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output {
            status: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(status: i32, stderr: impl Into<String>) -> Output {
        Output {
            status,
            stdout: String::new(),
            stderr: stderr.into(),
        }
    }
}

fn load_theory(text: &str) -> Result<Theory, Output> {
    parse_theory(text).map_err(|e| match e {
        TheoryError::Parse(e) => Output::fail(EXIT_PARSE, format!("theory: {e}\n")),
        TheoryError::Niceness(e) => Output::fail(EXIT_NICENESS, format!("theory is not nice: {e}\n")),
    })
}

fn load_derivation(theory: &Theory, text: &str) -> Result<Derivation, Output> {
    parse_derivation(theory, text).map_err(|e| match e {
        DerivationFileError::Parse(e) => Output::fail(EXIT_PARSE, format!("derivation: {e}\n")),
        DerivationFileError::Rejected(e) => Output::fail(EXIT_REJECTED, format!("derivation rejected: {e}\n")),
    })
}

fn load_frame(theory: &Theory, text: Option<&str>) -> Result<Frame, Output> {
    text.map_or(Ok(Frame::new()), |t| {
        parse_frame(theory, t).map_err(|e| Output::fail(EXIT_PARSE, format!("frame: {e}\n")))
    })
}

fn load_assignment(text: Option<&str>) -> Result<Assignment, Output> {
    text.map_or(Ok(Assignment::new()), |t| {
        parse_assignment(t).map_err(|e| Output::fail(EXIT_PARSE, format!("assignment: {e}\n")))
    })
}

fn unwrap(result: Result<Output, Output>) -> Output {
    result.unwrap_or_else(|e| e)
}

/// Validates the theory and checks the derivation.
pub fn cmd_check(theory: &str, derivation: &str) -> Output {
    unwrap((|| {
        let th = load_theory(theory)?;
        let d = load_derivation(&th, derivation)?;
        let report = d.check(&th.axioms);
        let ok = report.is_ok();
        let json = CheckJson {
            status: if ok { "ok" } else { "rejected" },
            end_equation: ok.then(|| d.conclusion().into()),
            length: ok.then(|| d.length()),
            height: ok.then(|| d.height()),
            vnf: ok.then(|| d.is_vnf()),
            diagnostics: report.diagnostics.iter().map(DiagnosticJson::from).collect(),
        };
        let status = if ok { EXIT_OK } else { EXIT_REJECTED };
        Ok(Output {
            status,
            stdout: to_json(&json),
            stderr: String::new(),
        })
    })())
}

/// Prints the Variable Normal Form of a checking derivation. Fails with
/// [`EXIT_CERTIFY`] when the normal form is longer than `constant * lh(D)^2`.
pub fn cmd_vnf(theory: &str, derivation: &str, constant: usize) -> Output {
    unwrap((|| {
        let th = load_theory(theory)?;
        let d = load_derivation(&th, derivation)?;
        let normal = d
            .to_vnf(&th.axioms)
            .map_err(|e| Output::fail(EXIT_REJECTED, format!("derivation rejected: {e:?}\n")))?;
        let (before, after) = (d.length(), normal.length());
        let bound = constant * before * before;
        Ok(Output {
            status: if after <= bound { EXIT_OK } else { EXIT_CERTIFY },
            stdout: format!("{normal}\n"),
            stderr: format!("length {before} -> {after} (bound {bound})\n"),
        })
    })())
}

#[derive(Clone, Debug, Default)]
pub struct CertifyInput<'a> {
    pub theory: &'a str,
    pub derivation: &'a str,
    pub frame: Option<&'a str>,
    pub assignment: Option<&'a str>,
    pub trace: bool,
}

/// Certifies a derivation and prints its certificate as JSON. With `trace`
/// the forward and backward instruction sequences go to stderr.
pub fn cmd_certify(input: &CertifyInput<'_>) -> Output {
    unwrap((|| {
        let th = load_theory(input.theory)?;
        let d = load_derivation(&th, input.derivation)?;
        let frame = load_frame(&th, input.frame)?;
        let rho = load_assignment(input.assignment)?;
        let (cert, status) = match certify(&d, &th.axioms, &frame, &rho) {
            Ok(cert) => (cert, EXIT_OK),
            Err(CertifyError::Failed(cert)) => (*cert, EXIT_CERTIFY),
            Err(CertifyError::DoesNotCheck(diags)) => {
                let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
                return Err(Output::fail(
                    EXIT_REJECTED,
                    format!("derivation rejected:\n{}", Lines(&lines)),
                ));
            }
            Err(e) => return Err(Output::fail(EXIT_CERTIFY, format!("certification failed: {e}\n"))),
        };
        let stderr = if input.trace {
            format!("forward:\n{}backward:\n{}", Lines(&cert.forward), Lines(&cert.backward))
        } else {
            String::new()
        };
        Ok(Output {
            status,
            stdout: certificate_json(&cert),
            stderr,
        })
    })())
}

/// Evaluates a term in a frame under an assignment.
pub fn cmd_eval(theory: &str, term: &str, frame: Option<&str>, assignment: Option<&str>) -> Output {
    unwrap((|| {
        let th = load_theory(theory)?;
        let t = parse_term(&th, term).map_err(|e| Output::fail(EXIT_PARSE, format!("term: {e}\n")))?;
        let frame = load_frame(&th, frame)?;
        let rho = load_assignment(assignment)?;
        Ok(Output::ok(format!("{}\n", frame.eval(&rho, &t))))
    })())
}

/// Exhaustively checks that a frame is a κ-model for the axioms used in a
/// derivation. `kappa` defaults to the derivation's budget.
pub fn cmd_model_check(theory: &str, derivation: &str, frame: &str, kappa: Option<usize>, cap: usize) -> Output {
    unwrap((|| {
        let th = load_theory(theory)?;
        let d = load_derivation(&th, derivation)?;
        let frame = load_frame(&th, Some(frame))?;
        let kappa = kappa.unwrap_or_else(|| frame.gauge() + d.length());
        let scope = ModelCheckScope {
            cap,
            ..ModelCheckScope::for_derivation(kappa, &d)
        };
        let result = check_kappa_model(&frame, &th.axioms, &scope);
        Ok(Output {
            status: if result.passed() { EXIT_OK } else { EXIT_CERTIFY },
            stdout: model_check_json(kappa, &result),
            stderr: String::new(),
        })
    })())
}

/// Rewrites a ground term to a binary string with the axioms.
pub fn cmd_oracle(theory: &str, term: &str, fuel: usize) -> Output {
    unwrap((|| {
        let th = load_theory(theory)?;
        let t = parse_term(&th, term).map_err(|e| Output::fail(EXIT_PARSE, format!("term: {e}\n")))?;
        if !t.is_ground() {
            return Err(Output::fail(EXIT_PARSE, "term: the oracle needs a ground term\n"));
        }
        Ok(Output::ok(match rewrite_eval(&th.axioms, &t, Fuel(fuel)) {
            Some(bits) => format!("{}\n", pets_core::approx::Value::ground(&bits)),
            None => "absent\n".to_string(),
        }))
    })())
}

#[derive(Clone, Debug)]
pub struct FuzzInput<'a> {
    pub seed: u64,
    pub count: usize,
    pub theories: usize,
    /// Generate over this theory instead of random ones.
    pub theory: Option<&'a str>,
    pub max_height: usize,
}

/// Per-derivation statistics gathered by [`run_corpus`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct CaseStats {
    pub theory: usize,
    pub derivation: String,
    pub certified: bool,
    pub zero_one: bool,
    pub length: usize,
    pub vnf_length: usize,
    pub seqlh1: usize,
    pub seqlh2: usize,
    pub gauge1: usize,
    pub gauge2: usize,
    pub start_gauge: usize,
    pub instructions: usize,
    pub skipped: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub theories: usize,
    pub derivations: usize,
    pub certified: usize,
    pub failed: usize,
    pub zero_one: usize,
    pub max_height: usize,
    pub max_seqlh_ratio: f64,
    pub max_gauge_excess_ratio: f64,
    pub max_vnf_ratio: f64,
    pub total_skipped_psi: usize,
    pub mean_length: f64,
    pub elapsed_ms: u128,
}

/// Certifies every case of a corpus, in parallel.
pub fn run_corpus(corpus: &Corpus) -> Vec<CaseStats> {
    corpus
        .cases
        .par_iter()
        .map(|case| {
            let th = &corpus.theories[case.theory];
            let d = &case.derivation;
            let mut stats = CaseStats {
                theory: case.theory,
                derivation: d.to_string(),
                zero_one: is_zero_one(d.conclusion()),
                length: d.length(),
                start_gauge: case.rho.gauge(),
                ..CaseStats::default()
            };
            match certify(d, &th.axioms, &Frame::new(), &case.rho) {
                Ok(cert) => {
                    stats.certified = true;
                    stats.vnf_length = cert.length;
                    stats.seqlh1 = cert.sigma1.len();
                    stats.seqlh2 = cert.sigma2.len();
                    stats.gauge1 = cert.sigma1.measures().gauge;
                    stats.gauge2 = cert.sigma2.measures().gauge;
                    stats.instructions = cert.forward.len();
                    stats.skipped = cert.skipped;
                }
                Err(e) => stats.error = Some(e.to_string()),
            }
            stats
        })
        .collect()
}

pub fn summarize(seed: u64, corpus: &Corpus, stats: &[CaseStats], max_height: usize, elapsed_ms: u128) -> FuzzSummary {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut s = FuzzSummary {
        seed,
        theories: corpus.theories.len(),
        derivations: stats.len(),
        max_height,
        elapsed_ms,
        ..FuzzSummary::default()
    };
    for c in stats {
        if c.certified {
            s.certified += 1;
        } else {
            s.failed += 1;
        }
        s.zero_one += usize::from(c.zero_one);
        s.max_seqlh_ratio = s.max_seqlh_ratio.max(ratio(c.seqlh1.max(c.seqlh2), c.vnf_length));
        let excess = c.gauge1.max(c.gauge2).saturating_sub(c.start_gauge);
        s.max_gauge_excess_ratio = s.max_gauge_excess_ratio.max(ratio(excess, c.vnf_length));
        s.max_vnf_ratio = s.max_vnf_ratio.max(ratio(c.vnf_length, c.length * c.length));
        s.total_skipped_psi += c.skipped;
        s.mean_length += c.length as f64;
    }
    if !stats.is_empty() {
        s.mean_length /= stats.len() as f64;
    }
    s
}

/// Generates a corpus, certifies every derivation and prints a summary.
/// Returns the corpus too, for callers that want to write it out.
pub fn cmd_fuzz(input: &FuzzInput<'_>) -> (Output, Option<Corpus>) {
    let started = Instant::now();
    let corpus = match input.theory {
        Some(text) => match load_theory(text) {
            Ok(th) => {
                let mut rng = fuzz::rng_from_seed(input.seed);
                fuzz::corpus_over(&mut rng, vec![th], input.count, input.max_height)
            }
            Err(out) => return (out, None),
        },
        None => fuzz::corpus(input.seed, input.theories, input.count, input.max_height),
    };
    let stats = run_corpus(&corpus);
    let summary = summarize(
        input.seed,
        &corpus,
        &stats,
        input.max_height,
        started.elapsed().as_millis(),
    );
    let failures: Vec<String> = stats
        .iter()
        .filter_map(|c| c.error.as_ref().map(|e| format!("{}: {e}", c.derivation)))
        .collect();
    let status = if summary.failed == 0 { EXIT_OK } else { EXIT_CERTIFY };
    let out = Output {
        status,
        stdout: to_json(&summary),
        stderr: Lines(&failures).to_string(),
    };
    (out, Some(corpus))
}

/// File name and contents for every theory and derivation of a corpus.
pub fn corpus_files(corpus: &Corpus) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = corpus
        .theories
        .iter()
        .enumerate()
        .map(|(i, th)| (format!("theory-{i:02}.pets"), print_theory(th)))
        .collect();
    for (i, case) in corpus.cases.iter().enumerate() {
        let stem = format!("case-{i:04}-t{:02}", case.theory);
        files.push((format!("{stem}.der"), format!("{}\n", case.derivation)));
        if case.rho.width() > 0 {
            files.push((format!("{stem}.rho"), case.rho.to_string()));
        }
    }
    files
}

/// Default enumeration cap for `model-check`.
pub const MODEL_CHECK_CAP: usize = DEFAULT_CAP;
