//! JSON renderings of certificates and reports. Keys appear in a fixed
//! order so that outputs diff cleanly.

use serde::Serialize;

use pets_core::certifier::{Certificate, NodeFailure};
use pets_core::derivation::Diagnostic;
use pets_core::instructions::BoundCheck;
use pets_core::oracle::ModelCheck;
use pets_core::syntax::Equation;

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|i| i.to_string()).collect()
}

fn lines(text: String) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}

#[derive(Serialize)]
pub struct EquationJson {
    pub lhs: String,
    pub rhs: String,
}

impl From<&Equation> for EquationJson {
    fn from(eq: &Equation) -> EquationJson {
        EquationJson {
            lhs: eq.lhs.to_string(),
            rhs: eq.rhs.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct ValuesJson {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
}

#[derive(Serialize)]
pub struct InequalitiesJson {
    /// `a ⊑ b`
    pub forward: bool,
    /// `c ⊑ d`
    pub backward: bool,
}

#[derive(Serialize)]
pub struct BoundJson {
    pub name: String,
    pub value: usize,
    pub bound: usize,
    pub ok: bool,
}

impl From<&BoundCheck> for BoundJson {
    fn from(b: &BoundCheck) -> BoundJson {
        BoundJson {
            name: b.name.clone(),
            value: b.value,
            bound: b.bound,
            ok: b.holds(),
        }
    }
}

#[derive(Serialize)]
pub struct FailureJson {
    pub path: Vec<usize>,
    pub direction: &'static str,
    pub claim: EquationJson,
    pub left: String,
    pub right: String,
    pub assignment: Vec<String>,
    pub updates_before: usize,
    pub updates_after: usize,
}

impl From<&NodeFailure> for FailureJson {
    fn from(f: &NodeFailure) -> FailureJson {
        FailureJson {
            path: f.path.clone(),
            direction: if f.forward { "forward" } else { "backward" },
            claim: (&f.claim).into(),
            left: f.left.to_string(),
            right: f.right.to_string(),
            assignment: lines(f.rho.to_string()),
            updates_before: f.updates_before,
            updates_after: f.updates_after,
        }
    }
}

#[derive(Serialize)]
pub struct CertificateJson {
    pub verdict: &'static str,
    pub original_digest: String,
    pub normalized_digest: String,
    pub length_convention: &'static str,
    pub normalized_derivation: String,
    pub end_equation: EquationJson,
    pub frame: Vec<String>,
    pub assignment: Vec<String>,
    pub length: usize,
    pub budget: usize,
    pub forward: Vec<String>,
    pub backward: Vec<String>,
    pub sigma1: Vec<String>,
    pub sigma2: Vec<String>,
    pub values: ValuesJson,
    pub inequalities: InequalitiesJson,
    pub audits: Vec<BoundJson>,
    pub invalid_updates: Vec<String>,
    pub assignment_restored: bool,
    pub skipped_psi: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureJson>,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> CertificateJson {
        CertificateJson {
            verdict: if c.passed() { "certified" } else { "failed" },
            original_digest: c.original_digest.clone(),
            normalized_digest: c.normalized_digest.clone(),
            length_convention: c.length_convention,
            normalized_derivation: c.normalized.to_string(),
            end_equation: (&c.equation).into(),
            frame: lines(c.frame.to_string()),
            assignment: lines(c.rho.to_string()),
            length: c.length,
            budget: c.budget,
            forward: strings(&c.forward),
            backward: strings(&c.backward),
            sigma1: strings(c.sigma1.updates()),
            sigma2: strings(c.sigma2.updates()),
            values: ValuesJson {
                a: c.a.to_string(),
                b: c.b.to_string(),
                c: c.c.to_string(),
                d: c.d.to_string(),
            },
            inequalities: InequalitiesJson {
                forward: c.forward_holds(),
                backward: c.backward_holds(),
            },
            audits: c.audits.iter().map(Into::into).collect(),
            invalid_updates: c.invalid_updates.clone(),
            assignment_restored: c.rho_restored,
            skipped_psi: c.skipped,
            failure: c.failure.as_ref().map(Into::into),
        }
    }
}

pub fn certificate_json(c: &Certificate) -> String {
    to_json(&CertificateJson::from(c))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct DiagnosticJson {
    pub path: Vec<usize>,
    pub message: String,
}

impl From<&Diagnostic> for DiagnosticJson {
    fn from(d: &Diagnostic) -> DiagnosticJson {
        DiagnosticJson {
            path: d.path.clone(),
            message: d.error.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct CheckJson {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end_equation: Option<EquationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vnf: Option<bool>,
    pub diagnostics: Vec<DiagnosticJson>,
}

#[derive(Serialize)]
pub struct ModelCheckJson {
    pub status: &'static str,
    pub kappa: usize,
    #[serde(flatten)]
    pub detail: serde_json::Value,
}

pub fn model_check_json(kappa: usize, result: &ModelCheck) -> String {
    use serde_json::json;
    let (status, detail) = match result {
        ModelCheck::Pass { assignments } => ("pass", json!({ "assignments": assignments })),
        ModelCheck::FrameGauge { gauge, kappa } => (
            "fail",
            json!({ "reason": format!("frame gauge {gauge} exceeds {kappa}") }),
        ),
        ModelCheck::Counterexample(cx) => (
            "fail",
            json!({
                "axiom": cx.axiom.to_string(),
                "assignment": lines(cx.rho.to_string()),
                "lhs_value": cx.lhs.to_string(),
                "rhs_value": cx.rhs.to_string(),
            }),
        ),
        ModelCheck::CapExceeded { needed, cap } => ("cap-exceeded", json!({ "needed": needed, "cap": cap })),
    };
    to_json(&ModelCheckJson { status, kappa, detail })
}
