use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use entroproof_core::algebra::{LinPoly, VarId};
use entroproof_core::atoms::{self, elemental_measures, SVarSequence};
use entroproof_core::certificate::{self, combination_line};
use entroproof_core::lp::direct_lp_prove;
use entroproof_core::parser::{self, Document, Lowered, Query, Relation, Statement};
use entroproof_core::prover::{
    self, reduce_constraints, verify_certificate, GoalKind, NotProvable, ProblemStats, ProofRun,
    Verdict,
};

use crate::{exit, read_input, Config, Format};

/// Largest n for which `--check` also runs the direct LP.
const ORACLE_MAX_N: usize = 5;

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    exit::USAGE
}

fn load_document(cfg: &Config, path: &Path) -> Result<Document, u8> {
    let text = read_input(path).map_err(usage)?;
    let doc =
        parser::parse_document(&text).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    if doc.n() == 0 {
        return Err(usage("document mentions no random variables"));
    }
    if doc.n() > cfg.max_n {
        return Err(usage(format!(
            "document has {} random variables; the limit is {} (see --max-n)",
            doc.n(),
            cfg.max_n
        )));
    }
    Ok(doc)
}

fn load_query(cfg: &Config, path: &Path) -> Result<Query, u8> {
    load_document(cfg, path)?
        .into_query()
        .map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn statement_text(s: &Statement, names: &[String]) -> String {
    let rel = match s.relation {
        Relation::Geq => ">=",
        Relation::Eq => "=",
    };
    format!("{} {rel} 0", s.expr.display_with(names))
}

/// Labels for the pooled inequalities: user inequalities, then elemental.
fn pooled_labels(names: &[String], user: &[&Statement]) -> Vec<String> {
    let mut out: Vec<String> = user
        .iter()
        .map(|s| format!("given {} (line {})", statement_text(s, names), s.line))
        .collect();
    out.extend(
        elemental_measures(names.len())
            .expect("n checked")
            .iter()
            .map(|m| m.display_with(names).to_string()),
    );
    out
}

fn poly_text(p: &LinPoly, seq: &SVarSequence) -> String {
    p.display_with(|v| seq.name(v)).to_string()
}

fn stats_text(s: &ProblemStats) -> String {
    let mut out = String::from("problem sizes (variables, equalities, inequalities):\n");
    let mut line = |name: &str, p: &prover::ProblemSize| {
        let _ = writeln!(
            out,
            "  {name}: {}, {}, {}",
            p.variables, p.equalities, p.inequalities
        );
    };
    line("P1 direct LP", &s.p1);
    line("P2 reduced", &s.p2);
    match &s.p3 {
        Some(p3) => line("P3 coefficient LP", p3),
        None => {
            let _ = writeln!(out, "  P3 coefficient LP: not reached");
        }
    }
    out
}

fn stats_json(s: &ProblemStats) -> Value {
    let size = |p: &prover::ProblemSize| json!({"variables": p.variables, "equalities": p.equalities, "inequalities": p.inequalities});
    json!({
        "p1": size(&s.p1),
        "p2": size(&s.p2),
        "p3": s.p3.as_ref().map(size),
    })
}

fn not_provable_detail(reason: &NotProvable, run: &ProofRun) -> String {
    match reason {
        NotProvable::OutsideSpan => {
            "F1 is not a linear combination of the reduced inequalities".to_string()
        }
        NotProvable::NegativeCoefficient { index, value } => {
            format!("coefficient p{} is forced to {value}", index + 1)
        }
        NotProvable::NoConicCombination(_) => {
            "no nonnegative choice of the coefficients exists (Farkas certificate found)"
                .to_string()
        }
        NotProvable::NonzeroRemainder { assignment, value } => {
            let parts: Vec<String> = assignment
                .iter()
                .map(|(v, x)| format!("{} = {x}", run.seq.name(*v)))
                .collect();
            format!(
                "F1 = {} is not identically 0; with {} and all other free s-variables 0, F1 = {value}",
                poly_text(&run.reduced_goal, &run.seq),
                parts.join(", ")
            )
        }
    }
}

fn reason_code(reason: &NotProvable) -> &'static str {
    match reason {
        NotProvable::OutsideSpan => "outside-span",
        NotProvable::NegativeCoefficient { .. } => "negative-coefficient",
        NotProvable::NoConicCombination(_) => "no-conic-combination",
        NotProvable::NonzeroRemainder { .. } => "nonzero-remainder",
    }
}

/// Re-verifies the certificate and compares with the direct LP.
fn cross_check(q: &Query, low: &Lowered, run: &ProofRun) -> Result<Vec<String>, String> {
    let mut notes = Vec::new();
    if let Some(cert) = run.verdict.certificate() {
        verify_certificate(
            &low.objective,
            &low.equalities,
            &low.inequalities,
            cert,
            q.n(),
        )
        .map_err(|e| format!("certificate rejected [{}]: {e}", e.code()))?;
        notes.push("certificate re-verified".to_string());
    }
    if q.n() <= ORACLE_MAX_N {
        let je = parser::lower_joint_entropy(q);
        let holds = |obj: &LinPoly| {
            direct_lp_prove(obj, &je.equalities, &je.inequalities, q.n()).expect("n checked")
        };
        let oracle = if low.identity {
            holds(&je.objective) && holds(&-&je.objective)
        } else {
            holds(&je.objective)
        };
        if oracle != run.verdict.is_proved() {
            return Err(format!(
                "direct LP says {}, prover says {}",
                if oracle { "implied" } else { "not implied" },
                if run.verdict.is_proved() {
                    "proved"
                } else {
                    "not provable"
                }
            ));
        }
        notes.push("direct LP agrees".to_string());
    } else {
        notes.push(format!("direct LP skipped (n > {ORACLE_MAX_N})"));
    }
    Ok(notes)
}

pub fn prove(
    cfg: &Config,
    path: &Path,
    check: bool,
    show_stats: bool,
    cert_out: Option<&Path>,
) -> u8 {
    let q = match load_query(cfg, path) {
        Ok(q) => q,
        Err(code) => return code,
    };
    let n = q.n();
    let seq = atoms::svar_sequence(n).expect("n checked");
    let low = parser::lower(&q, &seq);
    let f = if low.identity {
        prover::prove_identity
    } else {
        prover::prove_inequality
    };
    let mut run = f(&low.objective, &low.equalities, &low.inequalities, n).expect("n checked");
    if let Verdict::Proved(cert) = &mut run.verdict {
        cert.variables = q.variables.clone();
    }

    let checked = if check {
        Some(cross_check(&q, &low, &run))
    } else {
        None
    };

    let user: Vec<&Statement> = q.inequalities().collect();
    let labels = pooled_labels(&q.variables, &user);
    let objective = statement_text(&q.objective, &q.variables);

    if let (Some(out), Some(cert)) = (cert_out, run.verdict.certificate()) {
        if let Err(e) = std::fs::write(out, certificate::to_json(cert)) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return exit::USAGE;
        }
    }

    match cfg.format {
        Format::Text => {
            let mut out = String::new();
            if show_stats {
                out.push_str(&stats_text(&run.stats()));
            }
            if let Some(res) = &checked {
                match res {
                    Ok(notes) => {
                        for n in notes {
                            let _ = writeln!(out, "check: {n}");
                        }
                    }
                    Err(e) => {
                        let _ = writeln!(out, "check FAILED: {e}");
                    }
                }
            }
            match &run.verdict {
                Verdict::Proved(cert) => {
                    let _ = writeln!(out, "Proved: {objective}");
                    out.push_str(&certificate::render_text(cert, &labels));
                }
                Verdict::NotProvable(reason) => {
                    let _ = writeln!(
                        out,
                        "Not Provable: {objective} is not implied by the given constraints and the elemental inequalities"
                    );
                    let _ = writeln!(out, "reason: {}", not_provable_detail(reason, &run));
                }
            }
            print!("{out}");
        }
        Format::Json => {
            let mut v = json!({
                "status": if run.verdict.is_proved() { "proved" } else { "not-provable" },
                "kind": match run.kind { GoalKind::Inequality => "inequality", GoalKind::Identity => "identity" },
                "objective": objective,
                "reduced_goal": poly_text(&run.reduced_goal, &seq),
            });
            if show_stats {
                v["stats"] = stats_json(&run.stats());
            }
            match &run.verdict {
                Verdict::Proved(cert) => {
                    v["identity"] = Value::String(match cert.kind {
                        GoalKind::Inequality => combination_line(&cert.conic),
                        GoalKind::Identity => "F1 = 0".to_string(),
                    });
                    v["certificate"] = serde_json::from_str(&certificate::to_json(cert))
                        .expect("certificate JSON");
                }
                Verdict::NotProvable(reason) => {
                    v["reason"] = json!({
                        "code": reason_code(reason),
                        "detail": not_provable_detail(reason, &run),
                    });
                }
            }
            if let Some(res) = &checked {
                v["check"] = match res {
                    Ok(notes) => json!({"ok": true, "notes": notes}),
                    Err(e) => json!({"ok": false, "error": e}),
                };
            }
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
    }

    match (&checked, run.verdict.is_proved()) {
        (Some(Err(e)), _) => {
            eprintln!("internal inconsistency: {e}");
            exit::INTERNAL
        }
        (_, true) => exit::OK,
        (_, false) => exit::FAILED,
    }
}

pub fn verify(cfg: &Config, path: &Path, cert_path: &Path) -> u8 {
    let q = match load_query(cfg, path) {
        Ok(q) => q,
        Err(code) => return code,
    };
    let text = match read_input(cert_path) {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    // Accept a bare certificate or the JSON output of `prove`.
    let text = match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(m)) if m.contains_key("certificate") => m["certificate"].to_string(),
        _ => text,
    };
    let report = |ok: bool, code: &str, msg: String| {
        match cfg.format {
            Format::Text => {
                if ok {
                    println!("certificate verified");
                } else {
                    println!("verification failed [{code}]: {msg}");
                }
            }
            Format::Json => {
                let v = if ok {
                    json!({"verified": true})
                } else {
                    json!({"verified": false, "code": code, "message": msg})
                };
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            }
        }
        if ok {
            exit::OK
        } else {
            exit::FAILED
        }
    };
    let cert = match certificate::from_json(&text) {
        Ok(c) => c,
        Err(e) => return report(false, "malformed", e.to_string()),
    };
    let seq = atoms::svar_sequence(q.n()).expect("n checked");
    let low = parser::lower(&q, &seq);
    let want = if low.identity {
        GoalKind::Identity
    } else {
        GoalKind::Inequality
    };
    if cert.n == q.n() && cert.kind != want {
        return report(
            false,
            "kind-mismatch",
            "certificate kind does not match the objective".into(),
        );
    }
    match verify_certificate(
        &low.objective,
        &low.equalities,
        &low.inequalities,
        &cert,
        q.n(),
    ) {
        Ok(()) => report(true, "", String::new()),
        Err(e) => report(false, e.code(), e.to_string()),
    }
}

pub fn simplify(cfg: &Config, path: &Path) -> u8 {
    let doc = match load_document(cfg, path) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let n = doc.n();
    let seq = atoms::svar_sequence(n).expect("n checked");
    let names = &doc.variables;
    let eqs: Vec<LinPoly> = doc.equalities().map(|s| s.expr.lower(&seq)).collect();
    let user: Vec<&Statement> = doc.inequalities().collect();
    let ineqs: Vec<LinPoly> = user.iter().map(|s| s.expr.lower(&seq)).collect();
    let red = reduce_constraints(&eqs, &ineqs, n).expect("n checked");
    let labels = pooled_labels(names, &user);
    let name = |v: VarId| seq.name(v);
    let implied = red.implied_sources();

    match cfg.format {
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "equality constraints B ({} rows):",
                red.reduction.jordan.rank()
            );
            for r in red.reduction.jordan.rows() {
                let _ = writeln!(out, "  {} = {}", name(r.pivot), r.tail.display_with(name));
            }
            let _ = writeln!(
                out,
                "implied equalities E~ ({} rows, from {} inequalities):",
                red.characterization.jordan.rank(),
                implied.len()
            );
            for r in red.characterization.jordan.rows() {
                let _ = writeln!(out, "  {} = {}", name(r.pivot), r.tail.display_with(name));
            }
            for src in &implied {
                let _ = writeln!(out, "  tight: {}", labels[*src]);
            }
            let _ = writeln!(out, "S_r' ({} inequalities):", red.minimal.len());
            for (i, c) in red.minimal.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "  C{} = {} >= 0    from {}",
                    i + 1,
                    c.poly.display_with(name),
                    labels[c.source]
                );
            }
            print!("{out}");
        }
        Format::Json => {
            let rows = |j: &entroproof_core::JordanForm| -> Vec<Value> {
                j.rows()
                    .iter()
                    .map(|r| json!({"pivot": name(r.pivot), "tail": r.tail.display_with(name).to_string()}))
                    .collect()
            };
            let v = json!({
                "equalities": rows(&red.reduction.jordan),
                "implied": rows(&red.characterization.jordan),
                "tight": implied.iter().map(|&s| labels[s].clone()).collect::<Vec<_>>(),
                "inequalities": red.minimal.iter().enumerate().map(|(i, c)| json!({
                    "label": format!("C{}", i + 1),
                    "poly": c.poly.display_with(name).to_string(),
                    "source": labels[c.source],
                })).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
    }
    exit::OK
}

pub fn elemental(cfg: &Config, n: usize) -> u8 {
    if n == 0 || n > cfg.max_n {
        return usage(format!("n must be in 1..={}", cfg.max_n));
    }
    let seq = atoms::svar_sequence(n).expect("n checked");
    let names = atoms::default_names(n);
    let measures = elemental_measures(n).expect("n checked");
    match cfg.format {
        Format::Text => {
            for m in &measures {
                let p = atoms::expand_measure(m, &seq);
                println!(
                    "{} >= 0    {} >= 0",
                    m.display_with(&names),
                    poly_text(&p, &seq)
                );
            }
        }
        Format::Json => {
            let v: Vec<Value> = measures
                .iter()
                .map(|m| {
                    json!({
                        "measure": m.display_with(&names).to_string(),
                        "poly": poly_text(&atoms::expand_measure(m, &seq), &seq),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
        }
    }
    exit::OK
}
