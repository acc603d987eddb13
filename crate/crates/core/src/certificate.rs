//! Certificate serialization: a line-oriented text rendering and a JSON
//! document (`entroproof-certificate/1`).
//!
//! JSON schema:
//!
//! ```text
//! {
//!   "format": "entroproof-certificate/1",
//!   "kind": "inequality" | "identity",
//!   "n": 4,
//!   "variables": ["X1", ...],
//!   "svars": ["s_1234", ...],             // the s-variable order, checked on load
//!   "equality_witness": [{"source": 12, "multiplier": "1/2"}],
//!   "jordan": [{"pivot": "s_4444", "tail": [["s_2234", "-2"]]}],
//!   "inequalities": [{"label": "C1", "source": 20, "poly": [["s_1111", "1"]]}],
//!   "conic": ["1", "0", ...],
//!   "reduced_goal": [["s_1111", "1"], ...]
//! }
//! ```
//!
//! Rationals are strings `"p"` or `"p/q"`. `source` indexes the pooled
//! inequality list: user inequality constraints in document order, then the
//! elemental inequalities in their canonical order.

use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{JordanForm, JordanRow, LinPoly, Rational, VarId};
use crate::atoms::{self, SVar, SVarSequence};
use crate::prover::{CertifiedInequality, GoalKind, ProofCertificate};

pub const FORMAT: &str = "entroproof-certificate/1";

#[derive(Debug, thiserror::Error)]
pub enum CertificateFormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported certificate format {0:?}")]
    Format(String),
    #[error("unknown certificate kind {0:?}")]
    Kind(String),
    #[error("invalid number of random variables: {0}")]
    Universe(String),
    #[error("s-variable table does not match the canonical order for n = {0}")]
    SVarTable(usize),
    #[error("unknown s-variable {0:?}")]
    UnknownSVar(String),
    #[error("invalid rational {0:?}")]
    Rational(String),
    #[error("invalid Jordan form: {0}")]
    Jordan(String),
}

type Terms = Vec<(String, String)>;

#[derive(Serialize, Deserialize)]
struct WitnessEntry {
    source: usize,
    multiplier: String,
}

#[derive(Serialize, Deserialize)]
struct RowDoc {
    pivot: String,
    tail: Terms,
}

#[derive(Serialize, Deserialize)]
struct InequalityDoc {
    label: String,
    source: usize,
    poly: Terms,
}

#[derive(Serialize, Deserialize)]
struct CertificateDoc {
    format: String,
    kind: String,
    n: usize,
    variables: Vec<String>,
    svars: Vec<String>,
    equality_witness: Vec<WitnessEntry>,
    jordan: Vec<RowDoc>,
    inequalities: Vec<InequalityDoc>,
    conic: Vec<String>,
    reduced_goal: Terms,
}

fn kind_name(k: GoalKind) -> &'static str {
    match k {
        GoalKind::Inequality => "inequality",
        GoalKind::Identity => "identity",
    }
}

fn terms_out(p: &LinPoly, seq: &SVarSequence) -> Terms {
    p.terms()
        .map(|(v, c)| (seq.name(v), c.to_string()))
        .collect()
}

fn parse_rational(s: &str) -> Result<Rational, CertificateFormatError> {
    let bad = || CertificateFormatError::Rational(s.to_string());
    let r: Rational = s.trim().parse().map_err(|_| bad())?;
    Ok(r)
}

fn parse_var(name: &str, seq: &SVarSequence) -> Result<VarId, CertificateFormatError> {
    let unknown = || CertificateFormatError::UnknownSVar(name.to_string());
    let s: SVar = name.parse().map_err(|_| unknown())?;
    seq.id_of(&s).ok_or_else(unknown)
}

fn terms_in(ts: &Terms, seq: &SVarSequence) -> Result<LinPoly, CertificateFormatError> {
    let mut p = LinPoly::zero();
    for (name, c) in ts {
        p.add_term(parse_var(name, seq)?, parse_rational(c)?);
    }
    Ok(p)
}

/// Serializes to pretty-printed JSON with a stable field order.
pub fn to_json(cert: &ProofCertificate) -> String {
    let seq = atoms::svar_sequence(cert.n).expect("certificate universe is valid");
    let doc = CertificateDoc {
        format: FORMAT.to_string(),
        kind: kind_name(cert.kind).to_string(),
        n: cert.n,
        variables: cert.variables.clone(),
        svars: seq.vars().iter().map(|s| s.to_string()).collect(),
        equality_witness: cert
            .equality_witness
            .iter()
            .map(|(source, w)| WitnessEntry {
                source: *source,
                multiplier: w.to_string(),
            })
            .collect(),
        jordan: cert
            .jordan
            .rows()
            .iter()
            .map(|r| RowDoc {
                pivot: seq.name(r.pivot),
                tail: terms_out(&r.tail, &seq),
            })
            .collect(),
        inequalities: cert
            .inequalities
            .iter()
            .enumerate()
            .map(|(i, c)| InequalityDoc {
                label: format!("C{}", i + 1),
                source: c.source,
                poly: terms_out(&c.poly, &seq),
            })
            .collect(),
        conic: cert.conic.iter().map(|c| c.to_string()).collect(),
        reduced_goal: terms_out(&cert.reduced_goal, &seq),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("certificate serializes");
    s.push('\n');
    s
}

/// Parses a JSON certificate. Structural checks only; soundness is
/// `verify_certificate`'s job.
pub fn from_json(text: &str) -> Result<ProofCertificate, CertificateFormatError> {
    let doc: CertificateDoc = serde_json::from_str(text)?;
    if doc.format != FORMAT {
        return Err(CertificateFormatError::Format(doc.format));
    }
    let kind = match doc.kind.as_str() {
        "inequality" => GoalKind::Inequality,
        "identity" => GoalKind::Identity,
        other => return Err(CertificateFormatError::Kind(other.to_string())),
    };
    let seq =
        atoms::svar_sequence(doc.n).map_err(|e| CertificateFormatError::Universe(e.to_string()))?;
    let table: Vec<String> = seq.vars().iter().map(|s| s.to_string()).collect();
    if doc.svars != table {
        return Err(CertificateFormatError::SVarTable(doc.n));
    }
    let rows = doc
        .jordan
        .iter()
        .map(|r| {
            Ok(JordanRow {
                pivot: parse_var(&r.pivot, &seq)?,
                tail: terms_in(&r.tail, &seq)?,
            })
        })
        .collect::<Result<Vec<_>, CertificateFormatError>>()?;
    let jordan =
        JordanForm::from_rows(rows).map_err(|e| CertificateFormatError::Jordan(e.to_string()))?;
    Ok(ProofCertificate {
        kind,
        n: doc.n,
        variables: doc.variables,
        equality_witness: doc
            .equality_witness
            .iter()
            .map(|w| Ok((w.source, parse_rational(&w.multiplier)?)))
            .collect::<Result<_, CertificateFormatError>>()?,
        jordan,
        inequalities: doc
            .inequalities
            .iter()
            .map(|c| {
                Ok(CertifiedInequality {
                    source: c.source,
                    poly: terms_in(&c.poly, &seq)?,
                })
            })
            .collect::<Result<_, CertificateFormatError>>()?,
        conic: doc
            .conic
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<_, _>>()?,
        reduced_goal: terms_in(&doc.reduced_goal, &seq)?,
    })
}

/// `F1 = C1 + 2*C3`, or `F1 = 0` when every coefficient vanishes.
pub fn combination_line(conic: &[Rational]) -> String {
    let mut parts = Vec::new();
    for (i, p) in conic.iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        if p.is_one() {
            parts.push(format!("C{}", i + 1));
        } else {
            parts.push(format!("{p}*C{}", i + 1));
        }
    }
    if parts.is_empty() {
        "F1 = 0".to_string()
    } else {
        format!("F1 = {}", parts.join(" + "))
    }
}

/// Human-readable certificate. `source_labels[i]` describes pooled
/// inequality `i` (for example in information-measure notation); missing
/// labels fall back to the pooled index.
pub fn render_text(cert: &ProofCertificate, source_labels: &[String]) -> String {
    let seq = atoms::svar_sequence(cert.n).expect("certificate universe is valid");
    let name = |v: VarId| seq.name(v);
    let label = |i: usize| {
        source_labels
            .get(i)
            .cloned()
            .unwrap_or_else(|| format!("pooled inequality #{i}"))
    };
    let mut out = String::new();
    let _ = writeln!(out, "certificate: {}", kind_name(cert.kind));
    let _ = writeln!(out, "variables: {}", cert.variables.join(", "));
    let _ = writeln!(out, "s-variables ({}):", seq.len());
    for (i, s) in seq.vars().iter().enumerate() {
        let _ = writeln!(out, "  [{i}] {s}");
    }

    if !cert.equality_witness.is_empty() {
        let _ = writeln!(
            out,
            "tight inequalities (combination lies in the span of the equalities):"
        );
        for (src, w) in &cert.equality_witness {
            let _ = writeln!(out, "  {w} * [{}]", label(*src));
        }
    }

    let _ = writeln!(out, "B ({} rows):", cert.jordan.rank());
    for r in cert.jordan.rows() {
        let _ = writeln!(out, "  {} = {}", name(r.pivot), r.tail.display_with(name));
    }

    if cert.kind == GoalKind::Identity {
        let _ = writeln!(out, "F1 = {}", cert.reduced_goal.display_with(name));
        if cert.reduced_goal.is_zero() {
            let _ = writeln!(out, "remainder of F under B is 0");
        }
        return out;
    }

    let _ = writeln!(out, "S_r' ({} inequalities):", cert.inequalities.len());
    for (i, c) in cert.inequalities.iter().enumerate() {
        let _ = writeln!(
            out,
            "  C{} = {} >= 0    from {}",
            i + 1,
            c.poly.display_with(name),
            label(c.source)
        );
    }
    let _ = writeln!(out, "conic coefficients:");
    for (i, p) in cert.conic.iter().enumerate() {
        let _ = writeln!(out, "  p{} = {p}", i + 1);
    }
    let _ = writeln!(out, "F1 = {}", cert.reduced_goal.display_with(name));
    let _ = writeln!(out, "{}", combination_line(&cert.conic));
    out
}
