use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::expr::{eval_class, eval_scalar, Scope};
use crate::delpezzo::{build_blowup_plane_named, build_blowup_quadric_named, SurfaceModel};
use crate::error::{Error, Result};
use crate::exact::{PiecewisePoly, Poly, Rational};
use crate::invariants::CurveChoice;
use crate::picard::{Basis, DivisorClass};
use crate::threefold::{
    check_restriction, AffineDivisor, Chamber1D, ChamberSpec1D, CurveFunctional, NegativeTerm, RestrictionMap,
    ThreefoldRing,
};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    schema: Option<i64>,
    id: Option<String>,
    family: Option<String>,
    kind: Option<String>,
    #[serde(default)]
    description: String,
    log_discrepancy: Option<String>,
    ring: Option<RawRing>,
    chambers: Option<RawChambers>,
    surface: Option<RawSurface>,
    restriction: Option<BTreeMap<String, String>>,
    curve: Option<RawCurve>,
    cone: Option<RawCone>,
    #[serde(default)]
    expected: BTreeMap<String, String>,
    #[serde(default)]
    printed: BTreeMap<String, String>,
    #[serde(default)]
    flags: RawFlags,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRing {
    basis: Vec<String>,
    anticanonical: String,
    triples: Vec<[String; 4]>,
    #[serde(default)]
    params: BTreeMap<String, String>,
    #[serde(default)]
    classes: BTreeMap<String, String>,
    #[serde(default)]
    curves: Vec<RawFunctional>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunctional {
    name: String,
    pairings: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChambers {
    #[serde(default)]
    name: Option<String>,
    divisor: String,
    slope: String,
    tau: String,
    chamber: Vec<RawChamber>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChamber {
    interval: [String; 2],
    #[serde(default)]
    negative: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    class: String,
    coeffs: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    model: String,
    exceptional: Vec<String>,
    divisor: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    class: String,
    #[serde(default)]
    irreducible: bool,
    #[serde(default)]
    ord_bound: Vec<RawPiece>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    interval: [String; 2],
    coeffs: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    basis: Vec<String>,
    rays: [String; 2],
    check: Vec<RawCheck>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCheck {
    label: String,
    divisor: String,
    expected: String,
    certificate: Option<[String; 2]>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFlags {
    #[serde(default)]
    anomalous: bool,
    #[serde(default)]
    bound_only: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    I,
    II,
    III,
}

impl Family {
    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "I" => Some(Family::I),
            "II" => Some(Family::II),
            "III" => Some(Family::III),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseKind {
    SDivisor,
    Beta,
    SCurve,
    Cone,
}

impl CaseKind {
    fn parse(s: &str) -> Option<CaseKind> {
        match s {
            "s_divisor" => Some(CaseKind::SDivisor),
            "beta" => Some(CaseKind::Beta),
            "s_curve" => Some(CaseKind::SCurve),
            "cone" => Some(CaseKind::Cone),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseKind::SDivisor => "s_divisor",
            CaseKind::Beta => "beta",
            CaseKind::SCurve => "s_curve",
            CaseKind::Cone => "cone",
        }
    }

    fn quantities(&self) -> &'static [&'static str] {
        match self {
            CaseKind::SDivisor => &["s_divisor", "anticanonical_degree"],
            CaseKind::Beta => &["beta", "s_divisor", "anticanonical_degree"],
            CaseKind::SCurve => &[
                "s_curve_total",
                "s_curve_first_term",
                "s_curve_second_term",
                "s_curve_computed_first_term",
                "anticanonical_degree",
            ],
            CaseKind::Cone => &[],
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(&self, computed: &Rational, expected: &Rational) -> bool {
        match self {
            Relation::Eq => computed == expected,
            Relation::Le => computed <= expected,
            Relation::Lt => computed < expected,
            Relation::Ge => computed >= expected,
            Relation::Gt => computed > expected,
        }
    }

    pub fn is_bound(&self) -> bool {
        *self != Relation::Eq
    }
}

#[derive(Clone, Debug)]
pub struct Expectation {
    pub quantity: String,
    pub relation: Relation,
    pub value: Rational,
    pub verbatim: String,
}

fn parse_expectation(quantity: &str, src: &str) -> Option<Expectation> {
    let s = src.trim();
    let (relation, rest) = if let Some(r) = s.strip_prefix("<=") {
        (Relation::Le, r)
    } else if let Some(r) = s.strip_prefix(">=") {
        (Relation::Ge, r)
    } else if let Some(r) = s.strip_prefix('<') {
        (Relation::Lt, r)
    } else if let Some(r) = s.strip_prefix('>') {
        (Relation::Gt, r)
    } else {
        (Relation::Eq, s)
    };
    let value = rest.trim().parse().ok()?;
    Some(Expectation {
        quantity: quantity.to_string(),
        relation,
        value,
        verbatim: s.to_string(),
    })
}

#[derive(Clone, Debug)]
pub struct SurfaceData {
    pub model: SurfaceModel,
    pub divisor: DivisorClass,
    pub restriction: RestrictionMap,
}

#[derive(Clone, Debug)]
pub struct CurveData {
    pub choice: CurveChoice,
    pub ord_bound: Option<PiecewisePoly>,
}

#[derive(Clone, Debug)]
pub struct ConeCheck {
    pub label: String,
    pub divisor: DivisorClass,
    pub expected_inside: bool,
    pub certificate: Option<[Rational; 2]>,
}

#[derive(Clone, Debug)]
pub struct ConeData {
    pub rays: [DivisorClass; 2],
    pub checks: Vec<ConeCheck>,
}

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub anomalous: bool,
    pub bound_only: bool,
}

/// A validated case file.
#[derive(Clone, Debug)]
pub struct Case {
    pub id: String,
    pub family: Family,
    pub kind: CaseKind,
    pub description: String,
    pub path: PathBuf,
    pub ring: Option<Arc<ThreefoldRing>>,
    pub anticanonical: Option<DivisorClass>,
    pub spec: Option<ChamberSpec1D>,
    pub log_discrepancy: Option<Rational>,
    pub surface: Option<SurfaceData>,
    pub curve: Option<CurveData>,
    pub cone: Option<ConeData>,
    pub expected: Vec<Expectation>,
    pub printed: BTreeMap<String, String>,
    pub flags: Flags,
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Reads and validates one case file.
pub fn load_case(path: &Path) -> Result<Case> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_case(&src, path)
}

/// Validates case source text; `path` is only used in messages.
pub fn parse_case(src: &str, path: &Path) -> Result<Case> {
    let table: toml::Table = src.parse().map_err(|e: toml::de::Error| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(src, s.start));
        Error::Parse {
            path: path.to_path_buf(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let raw: RawCase = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Schema {
        path: path.to_path_buf(),
        message: e.message().to_string(),
    })?;
    Loader { path }.build(raw)
}

struct Loader<'a> {
    path: &'a Path,
}

impl Loader<'_> {
    fn schema(&self, message: impl Into<String>) -> Error {
        Error::Schema {
            path: self.path.to_path_buf(),
            message: message.into(),
        }
    }

    fn require<T>(&self, v: Option<T>, what: &str) -> Result<T> {
        v.ok_or_else(|| self.schema(format!("missing {what}")))
    }

    fn build(&self, raw: RawCase) -> Result<Case> {
        match raw.schema {
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(self.schema(format!("unsupported schema version {v}"))),
            None => return Err(self.schema("missing schema version")),
        }
        let id = self.require(raw.id, "id")?;
        if id.trim().is_empty() {
            return Err(self.schema("empty id"));
        }
        let family_src = self.require(raw.family, "family")?;
        let family = Family::parse(&family_src).ok_or_else(|| self.schema(format!("unknown family {family_src:?}")))?;
        let kind_src = self.require(raw.kind, "kind")?;
        let kind = CaseKind::parse(&kind_src).ok_or_else(|| self.schema(format!("unknown kind {kind_src:?}")))?;

        let mut case = Case {
            id,
            family,
            kind,
            description: raw.description,
            path: self.path.to_path_buf(),
            ring: None,
            anticanonical: None,
            spec: None,
            log_discrepancy: None,
            surface: None,
            curve: None,
            cone: None,
            expected: Vec::new(),
            printed: raw.printed,
            flags: Flags {
                anomalous: raw.flags.anomalous,
                bound_only: raw.flags.bound_only,
            },
        };

        let empty_params = BTreeMap::new();
        let empty_classes = BTreeMap::new();
        let scalar = |src: &str, ctx: &str, basis: &Basis| {
            eval_scalar(
                src,
                &Scope {
                    basis,
                    classes: &empty_classes,
                    params: &empty_params,
                    context: ctx,
                },
            )
        };

        if kind == CaseKind::Cone {
            for (name, present) in [
                ("ring", raw.ring.is_some()),
                ("chambers", raw.chambers.is_some()),
                ("surface", raw.surface.is_some()),
                ("curve", raw.curve.is_some()),
            ] {
                if present {
                    return Err(self.schema(format!("[{name}] is not used by cone cases")));
                }
            }
            let cone = self.require(raw.cone, "[cone]")?;
            case.cone = Some(self.cone(cone)?);
        } else {
            if raw.cone.is_some() {
                return Err(self.schema("[cone] is only used by cone cases"));
            }
            let ring_raw = self.require(raw.ring, "[ring]")?;
            let (ring, params, classes, anticanonical) = self.ring(ring_raw)?;
            let scope = Scope {
                basis: ring.basis(),
                classes: &classes,
                params: &params,
                context: "chambers",
            };
            let chambers = self.require(raw.chambers, "[chambers]")?;
            case.spec = Some(self.chambers(chambers, &ring, &scope, &case.id)?);
            if kind == CaseKind::Beta {
                let a = self.require(raw.log_discrepancy, "log_discrepancy")?;
                case.log_discrepancy = Some(scalar(&a, "log_discrepancy", ring.basis())?);
            } else if raw.log_discrepancy.is_some() {
                return Err(self.schema("log_discrepancy is only used by beta cases"));
            }
            if kind == CaseKind::SCurve {
                let surface = self.require(raw.surface, "[surface]")?;
                let restriction = self.require(raw.restriction, "[restriction]")?;
                let scope = Scope { context: "surface", ..scope };
                let data = self.surface(surface, restriction, &ring, &scope)?;
                let curve = self.require(raw.curve, "[curve]")?;
                case.curve = Some(self.curve(curve, &data.model)?);
                case.surface = Some(data);
            } else {
                for (name, present) in [
                    ("surface", raw.surface.is_some()),
                    ("restriction", raw.restriction.is_some()),
                    ("curve", raw.curve.is_some()),
                ] {
                    if present {
                        return Err(self.schema(format!("[{name}] is only used by s_curve cases")));
                    }
                }
            }
            case.anticanonical = Some(anticanonical);
            case.ring = Some(ring);
        }

        let allowed = kind.quantities();
        for (k, v) in &raw.expected {
            if !allowed.contains(&k.as_str()) {
                return Err(self.schema(format!("expected value {k:?} does not apply to {kind} cases")));
            }
            let e = parse_expectation(k, v).ok_or_else(|| self.schema(format!("bad expected value {k} = {v:?}")))?;
            case.expected.push(e);
        }
        for (k, v) in &case.printed {
            if !allowed.contains(&k.as_str()) {
                return Err(self.schema(format!("printed value {k:?} does not apply to {kind} cases")));
            }
            if v.parse::<Rational>().is_err() {
                return Err(self.schema(format!("printed value {k} = {v:?} is not a rational")));
            }
        }
        let has_bound = case.expected.iter().any(|e| e.relation.is_bound());
        if has_bound != case.flags.bound_only {
            return Err(self.schema("flags.bound_only must be set exactly when an expected value is a bound"));
        }
        if case.expected.is_empty() && kind != CaseKind::Cone {
            return Err(self.schema("no expected values"));
        }
        Ok(case)
    }

    #[allow(clippy::type_complexity)]
    fn ring(
        &self,
        raw: RawRing,
    ) -> Result<(
        Arc<ThreefoldRing>,
        BTreeMap<String, Rational>,
        BTreeMap<String, DivisorClass>,
        DivisorClass,
    )> {
        let basis = Basis::new(raw.basis.iter().cloned()).map_err(|e| self.schema(e.to_string()))?;
        let no_classes = BTreeMap::new();
        let no_params = BTreeMap::new();
        let mut params = BTreeMap::new();
        for (k, v) in &raw.params {
            if basis.index_of(k).is_some() {
                return Err(self.schema(format!("parameter {k} shadows a basis symbol")));
            }
            let s = Scope {
                basis: &basis,
                classes: &no_classes,
                params: &no_params,
                context: "ring.params",
            };
            params.insert(k.clone(), eval_scalar(v, &s)?);
        }
        let idx = |name: &str| {
            basis.index_of(name).ok_or_else(|| Error::UnresolvedSymbol {
                symbol: name.to_string(),
                context: "ring.triples".into(),
            })
        };
        let mut entries = Vec::with_capacity(raw.triples.len());
        for [a, b, c, v] in &raw.triples {
            let s = Scope {
                basis: &basis,
                classes: &no_classes,
                params: &params,
                context: "ring.triples",
            };
            entries.push((idx(a)?, idx(b)?, idx(c)?, eval_scalar(v, &s)?));
        }
        // classes may refer to each other in any order
        let mut classes = BTreeMap::new();
        let mut pending: Vec<(&String, &String)> = raw.classes.iter().collect();
        for (k, _) in &pending {
            if basis.index_of(k).is_some() || params.contains_key(*k) {
                return Err(self.schema(format!("class {k} shadows another symbol")));
            }
        }
        while !pending.is_empty() {
            let mut next = Vec::new();
            let mut last_err = None;
            for (k, v) in pending.iter().copied() {
                let s = Scope {
                    basis: &basis,
                    classes: &classes,
                    params: &params,
                    context: "ring.classes",
                };
                match eval_class(v, &s) {
                    Ok(c) => {
                        classes.insert(k.clone(), c);
                    }
                    Err(e @ Error::UnresolvedSymbol { .. }) => {
                        next.push((k, v));
                        last_err = Some(e);
                    }
                    Err(e) => return Err(e),
                }
            }
            if next.len() == pending.len() {
                return Err(last_err.expect("a class failed"));
            }
            pending = next;
        }
        let scope = Scope {
            basis: &basis,
            classes: &classes,
            params: &params,
            context: "ring.curves",
        };
        let mut curves = Vec::new();
        for f in &raw.curves {
            let mut v = vec![Rational::ZERO; basis.len()];
            for (sym, val) in &f.pairings {
                v[idx(sym).map_err(|_| Error::UnresolvedSymbol {
                    symbol: sym.clone(),
                    context: format!("pairings of {}", f.name),
                })?] = eval_scalar(val, &scope)?;
            }
            curves.push(CurveFunctional::new(&basis, f.name.clone(), v)?);
        }
        let anticanonical = eval_class(&raw.anticanonical, &Scope { context: "ring.anticanonical", ..scope })?;
        let ring = Arc::new(ThreefoldRing::new(&basis, &entries, curves)?);
        Ok((ring, params, classes, anticanonical))
    }

    fn interval(&self, raw: &[String; 2], scope: &Scope<'_>) -> Result<(Rational, Rational)> {
        let lo = eval_scalar(&raw[0], scope)?;
        let hi = eval_scalar(&raw[1], scope)?;
        if lo >= hi {
            return Err(Error::EmptyInterval { lo, hi }).map_err(|e| self.schema(e.to_string()));
        }
        Ok((lo, hi))
    }

    fn poly(&self, coeffs: &[String], scope: &Scope<'_>) -> Result<Poly> {
        Ok(Poly::new(coeffs.iter().map(|c| eval_scalar(c, scope)).collect::<Result<Vec<_>>>()?))
    }

    fn chambers(&self, raw: RawChambers, ring: &Arc<ThreefoldRing>, scope: &Scope<'_>, id: &str) -> Result<ChamberSpec1D> {
        let constant = eval_class(&raw.divisor, scope)?;
        let slope = eval_class(&raw.slope, scope)?;
        let tau = eval_scalar(&raw.tau, scope)?;
        if raw.chamber.is_empty() {
            return Err(self.schema("no chambers"));
        }
        let mut chambers = Vec::new();
        for c in &raw.chamber {
            let (lo, hi) = self.interval(&c.interval, scope)?;
            let mut negative = Vec::new();
            for t in &c.negative {
                negative.push(NegativeTerm {
                    name: t.class.clone(),
                    class: eval_class(&t.class, scope)?,
                    coeff: self.poly(&t.coeffs, scope)?,
                });
            }
            chambers.push(Chamber1D { lo, hi, negative });
        }
        Ok(ChamberSpec1D::new(
            raw.name.unwrap_or_else(|| id.to_string()),
            ring.clone(),
            AffineDivisor { constant, slope },
            chambers,
            tau,
        ))
    }

    fn surface(
        &self,
        raw: RawSurface,
        restriction: BTreeMap<String, String>,
        ring: &Arc<ThreefoldRing>,
        scope: &Scope<'_>,
    ) -> Result<SurfaceData> {
        let model = match raw.model.as_str() {
            "plane" => build_blowup_plane_named(&raw.exceptional),
            "quadric" => build_blowup_quadric_named(&raw.exceptional),
            other => return Err(self.schema(format!("unknown surface model {other:?}"))),
        }
        .map_err(|e| self.schema(e.to_string()))?;
        let divisor = eval_class(&raw.divisor, scope)?;
        let names = ring.basis().names();
        for k in restriction.keys() {
            if !names.contains(k) {
                return Err(Error::UnresolvedSymbol {
                    symbol: k.clone(),
                    context: "restriction".into(),
                });
            }
        }
        let no_classes = BTreeMap::new();
        let surface_scope = Scope {
            basis: model.basis(),
            classes: &no_classes,
            params: scope.params,
            context: "restriction",
        };
        let mut images = Vec::new();
        for n in names {
            let src = restriction
                .get(n)
                .ok_or_else(|| self.schema(format!("restriction of {n} is missing")))?;
            images.push(eval_class(src, &surface_scope)?);
        }
        let map = RestrictionMap::new(ring.basis(), model.basis(), images)?;
        check_restriction(ring, &map, &divisor, &model)?;
        Ok(SurfaceData {
            model,
            divisor,
            restriction: map,
        })
    }

    fn curve(&self, raw: RawCurve, model: &SurfaceModel) -> Result<CurveData> {
        let no_classes = BTreeMap::new();
        let no_params = BTreeMap::new();
        let scope = Scope {
            basis: model.basis(),
            classes: &no_classes,
            params: &no_params,
            context: "curve",
        };
        let class = eval_class(&raw.class, &scope)?;
        let ord_bound = if raw.ord_bound.is_empty() {
            None
        } else {
            let mut breaks = Vec::new();
            let mut pieces = Vec::new();
            for p in &raw.ord_bound {
                let (lo, hi) = self.interval(&p.interval, &scope)?;
                match breaks.last() {
                    None => breaks.push(lo),
                    Some(last) if *last == lo => {}
                    Some(_) => return Err(self.schema("ord_bound intervals must be contiguous")),
                }
                breaks.push(hi);
                pieces.push(self.poly(&p.coeffs, &scope)?);
            }
            Some(PiecewisePoly::new(breaks, pieces, false).map_err(|e| self.schema(e.to_string()))?)
        };
        Ok(CurveData {
            choice: CurveChoice {
                class,
                declared_irreducible: raw.irreducible,
            },
            ord_bound,
        })
    }

    fn cone(&self, raw: RawCone) -> Result<ConeData> {
        let basis = Basis::new(raw.basis.iter().cloned()).map_err(|e| self.schema(e.to_string()))?;
        let no_classes = BTreeMap::new();
        let no_params = BTreeMap::new();
        let scope = Scope {
            basis: &basis,
            classes: &no_classes,
            params: &no_params,
            context: "cone",
        };
        let rays = [eval_class(&raw.rays[0], &scope)?, eval_class(&raw.rays[1], &scope)?];
        if raw.check.is_empty() {
            return Err(self.schema("cone case without checks"));
        }
        let mut checks = Vec::new();
        for c in &raw.check {
            let expected_inside = match c.expected.as_str() {
                "inside" => true,
                "outside" => false,
                other => return Err(self.schema(format!("cone expectation must be inside or outside, got {other:?}"))),
            };
            let certificate = match &c.certificate {
                Some([a, b]) => Some([eval_scalar(a, &scope)?, eval_scalar(b, &scope)?]),
                None => None,
            };
            checks.push(ConeCheck {
                label: c.label.clone(),
                divisor: eval_class(&c.divisor, &scope)?,
                expected_inside,
                certificate,
            });
        }
        Ok(ConeData { rays, checks })
    }
}
