use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::case::{load_case, Case, CaseKind, Family};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::invariants::{beta, ord_along, s_curve, s_divisor, CurveCase, SCurveOptions};
use crate::threefold::{cone_member_2d, restrict, verify_chambers, ChamberSpec1D};
use crate::zariski;

/// Relative tolerance between the exact value and the numeric oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-3;
/// Midpoints per axis per chamber in the numeric oracle.
pub const ORACLE_GRID: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    Mismatch,
    AnomalousInformational,
    Error,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Match => "match",
            Verdict::Mismatch => "mismatch",
            Verdict::AnomalousInformational => "anomalous-informational",
            Verdict::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub value: f64,
    pub relative_error: f64,
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub family: String,
    pub kind: String,
    pub computed: BTreeMap<String, String>,
    pub expected: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub printed: BTreeMap<String, String>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failed: Vec<String>,
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub oracle: bool,
}

/// Exact values of one case, keyed by quantity name.
#[derive(Clone, Debug, Default)]
pub struct Computed {
    pub values: BTreeMap<String, Rational>,
    /// Cone outcomes, rendered as `inside` or `outside`.
    pub labels: BTreeMap<String, String>,
    /// The quantity the numeric oracle checks.
    pub headline: Option<(String, Rational)>,
}

fn verified_spec(case: &Case) -> Result<ChamberSpec1D> {
    let spec = case
        .spec
        .as_ref()
        .ok_or_else(|| Error::UnverifiedInput(format!("{} has no chambers", case.id)))?;
    verify_chambers(spec)
}

fn anticanonical_volume(case: &Case) -> Result<Rational> {
    let ring = case.ring.as_ref().expect("non-cone cases carry a ring");
    let h = case.anticanonical.as_ref().expect("non-cone cases carry -K");
    ring.triple(h, h, h)
}

/// Runs the exact computation of a case.
pub fn compute(case: &Case) -> Result<Computed> {
    let mut out = Computed::default();
    if case.kind == CaseKind::Cone {
        let cone = case.cone.as_ref().expect("cone cases carry [cone]");
        for c in &cone.checks {
            let d = cone_member_2d([&cone.rays[0], &cone.rays[1]], &c.divisor)?;
            let [a, b] = d.coefficients;
            out.labels
                .insert(format!("{}.verdict", c.label), if d.inside { "inside" } else { "outside" }.into());
            out.values.insert(format!("{}.a", c.label), a);
            out.values.insert(format!("{}.b", c.label), b);
        }
        return Ok(out);
    }
    let vol = anticanonical_volume(case)?;
    out.values.insert("anticanonical_degree".into(), vol.clone());
    let spec = verified_spec(case)?;
    match case.kind {
        CaseKind::SDivisor | CaseKind::Beta => {
            let s = s_divisor(&spec, &vol)?;
            out.values.insert("s_divisor".into(), s.clone());
            out.headline = Some(("s_divisor".into(), s.clone()));
            if case.kind == CaseKind::Beta {
                let b = beta(case.log_discrepancy.clone().expect("beta cases carry A"), s);
                out.values.insert("beta".into(), b.beta);
            }
        }
        CaseKind::SCurve => {
            let surface = case.surface.as_ref().expect("s_curve cases carry [surface]");
            let curve = case.curve.as_ref().expect("s_curve cases carry [curve]");
            let r = s_curve(
                &CurveCase {
                    spec: &spec,
                    model: &surface.model,
                    restriction: &surface.restriction,
                    surface: &surface.divisor,
                    curve: curve.choice.clone(),
                    anticanonical_volume: vol,
                    ord_bound: curve.ord_bound.clone(),
                },
                &SCurveOptions::default(),
            )?;
            out.values.insert("s_curve_total".into(), r.total.clone());
            out.values.insert("s_curve_first_term".into(), r.first_term);
            out.values.insert("s_curve_second_term".into(), r.second_term);
            out.values.insert("s_curve_computed_first_term".into(), r.computed_first_term);
            out.headline = Some(("s_curve_total".into(), r.total));
        }
        CaseKind::Cone => unreachable!(),
    }
    Ok(out)
}

fn midpoints(lo: &Rational, hi: &Rational, n: usize) -> impl Iterator<Item = Rational> {
    let step = (hi - lo) / Rational::from_integer(2 * n as i64);
    let lo = lo.clone();
    (0..n).map(move |i| &lo + &step * &Rational::from_integer(2 * i as i64 + 1))
}

/// Midpoint-rule value of the case's headline quantity, evaluating volumes pointwise.
///
/// Threefold volumes come from `P(u)³` at each grid point. Surface volumes come from
/// a fresh Zariski decomposition at each grid point of the `(u, v)` rectangle
/// `[lo, hi] × [0, v_max(u)]`, where `v_max` is where `(P|_Y - vZ)·(-K_Y)` vanishes.
pub fn numeric_oracle(case: &Case) -> Result<Option<f64>> {
    if case.kind == CaseKind::Cone {
        return Ok(None);
    }
    let n = ORACLE_GRID;
    let spec = verified_spec(case)?;
    let ring = spec.ring().clone();
    let vol = anticanonical_volume(case)?.to_f64();
    match case.kind {
        CaseKind::SDivisor | CaseKind::Beta => {
            let mut acc = 0.0;
            for (idx, ch) in spec.chambers().iter().enumerate() {
                let p = spec.positive_part(idx);
                let h = (&ch.hi - &ch.lo).to_f64() / n as f64;
                for u in midpoints(&ch.lo, &ch.hi, n) {
                    let pu = p.at(&u);
                    acc += ring.triple(&pu, &pu, &pu)?.to_f64() * h;
                }
            }
            Ok(Some(acc / vol))
        }
        CaseKind::SCurve => {
            let surface = case.surface.as_ref().expect("s_curve cases carry [surface]");
            let curve = case.curve.as_ref().expect("s_curve cases carry [curve]");
            let model = &surface.model;
            let z = &curve.choice.class;
            let mk = model.anticanonical();
            let z_deg = model.pair(z, &mk)?;
            if !z_deg.is_positive() {
                return Err(Error::UnboundedSweep(z.to_string()));
            }
            let rows: Vec<(usize, Rational)> = spec
                .chambers()
                .iter()
                .enumerate()
                .flat_map(|(idx, ch)| midpoints(&ch.lo, &ch.hi, n).map(move |u| (idx, u)))
                .collect();
            let per_row = rows
                .par_iter()
                .map(|(idx, u)| -> Result<f64> {
                    let ch = &spec.chambers()[*idx];
                    let h = (&ch.hi - &ch.lo).to_f64() / n as f64;
                    let p = spec.positive_part(*idx).at(u);
                    let weight = ring.triple(&p, &p, &surface.divisor)?;
                    let restricted: Vec<_> = ch
                        .negative
                        .iter()
                        .map(|t| Ok((restrict(&surface.restriction, &t.class)?, t.coeff.clone())))
                        .collect::<Result<_>>()?;
                    let mut ord = ord_along(&restricted, &curve.choice, model)?.eval(u);
                    if let Some(bound) = &curve.ord_bound {
                        if let Some((_, _, poly)) = bound.intervals().find(|(a, b, _)| *a <= u && u < *b) {
                            ord = poly.eval(u);
                        }
                    }
                    let mut row = (&weight * &ord).to_f64() * h;
                    let py = restrict(&surface.restriction, &p)?;
                    let vmax = model.pair(&py, &mk)? / &z_deg;
                    if vmax.is_positive() {
                        let hv = vmax.to_f64() / n as f64;
                        for v in midpoints(&Rational::ZERO, &vmax, n) {
                            let d = py.sub(&z.scale(&v))?;
                            row += zariski::volume(model, &d).to_f64() * h * hv;
                        }
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Some(3.0 / vol * per_row.iter().sum::<f64>()))
        }
        CaseKind::Cone => unreachable!(),
    }
}

fn relative_error(exact: f64, approx: f64) -> f64 {
    if exact == 0.0 {
        approx.abs()
    } else {
        ((approx - exact) / exact).abs()
    }
}

/// Runs one case and compares with its expected values.
/// Adds `<key>.reduced` next to printed fractions that are not in lowest terms.
fn with_reduced_forms(printed: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let mut out = printed.clone();
    for (k, v) in printed {
        if let Ok(r) = v.trim().parse::<Rational>() {
            if r.to_string() != v.trim() {
                out.insert(format!("{k}.reduced"), r.to_string());
            }
        }
    }
    out
}

pub fn run_case(case: &Case, opts: RunOptions) -> CaseReport {
    let start = Instant::now();
    let mut report = CaseReport {
        id: case.id.clone(),
        family: case.family.to_string(),
        kind: case.kind.to_string(),
        computed: BTreeMap::new(),
        expected: case
            .expected
            .iter()
            .map(|e| (e.quantity.clone(), e.verbatim.clone()))
            .collect(),
        printed: with_reduced_forms(&case.printed),
        verdict: Verdict::Match,
        failed: Vec::new(),
        oracle: None,
        error: None,
        elapsed_ms: 0,
    };
    if let Some(cone) = &case.cone {
        for c in &cone.checks {
            let mut want = if c.expected_inside { "inside" } else { "outside" }.to_string();
            if let Some([a, b]) = &c.certificate {
                write!(want, " ({a}, {b})").unwrap();
            }
            report.expected.insert(c.label.clone(), want);
        }
    }
    let computed = match compute(case) {
        Ok(c) => c,
        Err(e) => {
            report.verdict = Verdict::Error;
            report.error = Some(format!("[{}] {e}", e.code()));
            report.elapsed_ms = start.elapsed().as_millis() as u64;
            return report;
        }
    };
    for (k, v) in &computed.values {
        report.computed.insert(k.clone(), v.to_string());
    }
    for (k, v) in &computed.labels {
        report.computed.insert(k.clone(), v.clone());
    }
    for e in &case.expected {
        match computed.values.get(&e.quantity) {
            Some(v) if e.relation.holds(v, &e.value) => {}
            _ => report.failed.push(e.quantity.clone()),
        }
    }
    if let Some(cone) = &case.cone {
        for c in &cone.checks {
            let inside = computed.labels[&format!("{}.verdict", c.label)] == "inside";
            let a = &computed.values[&format!("{}.a", c.label)];
            let b = &computed.values[&format!("{}.b", c.label)];
            let cert_ok = c.certificate.as_ref().is_none_or(|[ca, cb]| ca == a && cb == b);
            if inside != c.expected_inside || !cert_ok {
                report.failed.push(c.label.clone());
            }
        }
    }
    if opts.oracle {
        match (numeric_oracle(case), &computed.headline) {
            (Ok(Some(value)), Some((quantity, exact))) => {
                let rel = relative_error(exact.to_f64(), value);
                let agrees = rel <= ORACLE_TOLERANCE;
                if !agrees {
                    report.failed.push(format!("oracle:{quantity}"));
                }
                report.oracle = Some(OracleReport {
                    quantity: quantity.clone(),
                    value,
                    relative_error: rel,
                    agrees,
                });
            }
            (Ok(_), _) => {}
            (Err(e), _) => {
                report.verdict = Verdict::Error;
                report.error = Some(format!("[{}] oracle: {e}", e.code()));
            }
        }
    }
    if report.verdict != Verdict::Error {
        report.verdict = if case.flags.anomalous {
            Verdict::AnomalousInformational
        } else if report.failed.is_empty() {
            Verdict::Match
        } else {
            Verdict::Mismatch
        };
    }
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    report
}

/// A case file that could not be loaded.
#[derive(Clone, Debug, Serialize)]
pub struct LoadFailure {
    pub path: PathBuf,
    pub code: String,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub cases: Vec<CaseReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub load_failures: Vec<LoadFailure>,
}

impl CorpusReport {
    /// 0 when every case matches, 2 on corpus or schema errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.load_failures.is_empty() {
            2
        } else if self
            .cases
            .iter()
            .any(|c| matches!(c.verdict, Verdict::Mismatch | Verdict::Error))
        {
            1
        } else {
            0
        }
    }
}

fn case_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| Error::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    };
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(io)? {
            let path = entry.map_err(io)?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|e| e == "toml") {
                files.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}

/// Loads every `*.toml` under `dir`, rejecting duplicate ids.
pub fn load_corpus(dir: &Path) -> Result<(Vec<Case>, Vec<LoadFailure>)> {
    let mut cases: Vec<Case> = Vec::new();
    let mut failures = Vec::new();
    let mut seen = BTreeSet::new();
    for path in case_files(dir)? {
        match load_case(&path) {
            Ok(c) if !seen.insert(c.id.clone()) => {
                let e = Error::DuplicateId(c.id.clone());
                failures.push(LoadFailure {
                    path,
                    code: e.code().into(),
                    message: e.to_string(),
                });
            }
            Ok(c) => cases.push(c),
            Err(e) => failures.push(LoadFailure {
                path,
                code: e.code().into(),
                message: e.to_string(),
            }),
        }
    }
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((cases, failures))
}

pub fn run_corpus(dir: &Path, family: Option<Family>, opts: RunOptions) -> Result<CorpusReport> {
    let (cases, load_failures) = load_corpus(dir)?;
    let mut reports: Vec<CaseReport> = cases
        .par_iter()
        .filter(|c| family.is_none_or(|f| c.family == f))
        .map(|c| run_case(c, opts))
        .collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(CorpusReport {
        cases: reports,
        load_failures,
    })
}

/// Plain-text table of a corpus run.
pub fn render_table(report: &CorpusReport) -> String {
    let mut out = String::new();
    for c in &report.cases {
        let main = ["s_curve_total", "beta", "s_divisor"]
            .iter()
            .find_map(|k| c.computed.get(*k).map(|v| format!("{k} = {v}")))
            .unwrap_or_else(|| match c.computed.keys().filter(|k| k.ends_with(".verdict")).count() {
                0 => "-".to_string(),
                n => format!("{n} cone checks"),
            });
        let _ = write!(out, "{:<28} {:<4} {:<9} {:<34} {}", c.id, c.family, c.kind, main, c.verdict.as_str());
        if let Some(o) = &c.oracle {
            let _ = write!(out, "  oracle {:.6} (rel {:.1e})", o.value, o.relative_error);
        }
        if !c.failed.is_empty() {
            let _ = write!(out, "  failed: {}", c.failed.join(", "));
        }
        if let Some(e) = &c.error {
            let _ = write!(out, "  {e}");
        }
        out.push('\n');
    }
    for f in &report.load_failures {
        let _ = writeln!(out, "{}: [{}] {}", f.path.display(), f.code, f.message);
    }
    out
}

