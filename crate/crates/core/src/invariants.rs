//! S-invariants of divisors and curves, and β.

use serde::Serialize;

use crate::delpezzo::SurfaceModel;
use crate::error::{Error, Result};
use crate::exact::{PiecewisePoly, Poly, Rational};
use crate::picard::DivisorClass;
use crate::threefold::{restrict, volume_poly, ChamberSpec1D, RestrictionMap};
use crate::zariski::{self, solve_with_support, VolumeSweep};

/// `(lo, hi, F, supports)`: a cubic piece of the inner integral with the sampled supports.
type Piece = (Rational, Rational, Poly, Vec<Vec<usize>>);

/// `S_X(Y) = (1/V) ∫_0^τ vol(D(u)) du`.
pub fn s_divisor(spec: &ChamberSpec1D, anticanonical_volume: &Rational) -> Result<Rational> {
    if !anticanonical_volume.is_positive() {
        return Err(Error::UnsupportedModel(format!(
            "anticanonical volume {anticanonical_volume} is not positive"
        )));
    }
    Ok(volume_poly(spec)?.integrate() / anticanonical_volume)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BetaResult {
    pub log_discrepancy: Rational,
    pub s_value: Rational,
    pub beta: Rational,
}

pub fn beta(log_discrepancy: Rational, s_value: Rational) -> BetaResult {
    let beta = &log_discrepancy - &s_value;
    BetaResult {
        log_discrepancy,
        s_value,
        beta,
    }
}

/// The curve `Z` on the surface together with how its irreducibility is known.
#[derive(Clone, Debug)]
pub struct CurveChoice {
    pub class: DivisorClass,
    /// Irreducible by declaration of the case rather than by enumeration.
    pub declared_irreducible: bool,
}

/// Coefficient of `Z` in a restricted negative part.
///
/// A restricted term counts towards `Z` when its class is a rational multiple of `Z`.
/// A term that pairs negatively with `Z` without being a multiple of it must contain
/// `Z` with an undetermined multiplicity, which is reported as an error.
pub fn ord_along(
    n_restricted: &[(DivisorClass, Poly)],
    z: &CurveChoice,
    model: &SurfaceModel,
) -> Result<Poly> {
    model.basis().ensure_same(z.class.basis())?;
    if !z.declared_irreducible && !model.is_known_irreducible(&z.class) {
        return Err(Error::UnknownCurve(format!(
            "{} is neither a (-1)-curve of the model nor declared irreducible",
            z.class
        )));
    }
    let mut acc = Poly::zero();
    for (class, coeff) in n_restricted {
        model.basis().ensure_same(class.basis())?;
        if class.is_zero() || coeff.is_zero() {
            continue;
        }
        match class.ratio_to(&z.class) {
            Some(k) => acc = &acc + &coeff.scale(&k),
            None => {
                if model.pair(class, &z.class)?.is_negative() {
                    return Err(Error::UnknownCurve(format!(
                        "multiplicity of {} in {} is not determined by its class",
                        z.class, class
                    )));
                }
            }
        }
    }
    Ok(acc)
}

/// Where the outer samples are placed inside each chamber: `lo + (hi - lo)·k/den`.
#[derive(Clone, Debug)]
pub struct SampleScheme {
    pub numerators: Vec<i64>,
    pub denominator: i64,
}

impl Default for SampleScheme {
    fn default() -> Self {
        SampleScheme {
            numerators: (1..=6).collect(),
            denominator: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SCurveOptions {
    pub samples: SampleScheme,
    pub max_depth: u32,
}

impl Default for SCurveOptions {
    fn default() -> Self {
        SCurveOptions {
            samples: SampleScheme::default(),
            max_depth: 8,
        }
    }
}

/// Everything needed to evaluate `S(W^Y; Z)`.
#[derive(Clone, Debug)]
pub struct CurveCase<'a> {
    pub spec: &'a ChamberSpec1D,
    pub model: &'a SurfaceModel,
    pub restriction: &'a RestrictionMap,
    /// The surface `Y` as a class on the threefold.
    pub surface: &'a DivisorClass,
    pub curve: CurveChoice,
    pub anticanonical_volume: Rational,
    /// Replaces the computed `ord_Z` on the given intervals when present.
    pub ord_bound: Option<PiecewisePoly>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChamberAudit {
    pub lo: Rational,
    pub hi: Rational,
    /// Support sequence of the inner sweep, by curve name.
    pub supports: Vec<Vec<String>>,
    /// `F(u) = ∫ vol(P(u)|_Y - vZ) dv` on the chamber.
    pub integrand: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct SCurveResult {
    pub first_term: Rational,
    pub second_term: Rational,
    pub total: Rational,
    /// First term with the computed `ord_Z`, whether or not a bound replaced it.
    pub computed_first_term: Rational,
    pub first_term_from_bound: bool,
    pub outer_walls: Vec<Rational>,
    pub audit: Vec<ChamberAudit>,
}

struct Sample {
    u: Rational,
    // None when P(u)|_Y is not pseudoeffective
    sweep: Option<VolumeSweep>,
    value: Rational,
}

impl Sample {
    fn fingerprint(&self) -> Option<Vec<Vec<usize>>> {
        self.sweep.as_ref().map(VolumeSweep::fingerprint)
    }
}

struct Outer<'a> {
    model: &'a SurfaceModel,
    a: DivisorClass,
    b: DivisorClass,
    z: DivisorClass,
    opts: &'a SCurveOptions,
}

impl Outer<'_> {
    fn sample(&self, u: Rational) -> Result<Sample> {
        let d0 = self.a.add(&self.b.scale(&u))?;
        match zariski::sweep(self.model, &d0, &self.z) {
            Ok(s) => {
                let value = s.integral();
                Ok(Sample {
                    u,
                    sweep: Some(s),
                    value,
                })
            }
            Err(Error::NotPseudoeffective(_)) => Ok(Sample {
                u,
                sweep: None,
                value: Rational::ZERO,
            }),
            Err(e) => Err(e),
        }
    }

    /// Piecewise cubic `F` on `[lo, hi]`.
    fn integrate(&self, lo: &Rational, hi: &Rational, depth: u32) -> Result<Vec<Piece>> {
        let scheme = &self.opts.samples;
        let width = hi - lo;
        let den = Rational::from_integer(scheme.denominator);
        let samples: Vec<Sample> = scheme
            .numerators
            .iter()
            .map(|&k| self.sample(lo + &width * &(Rational::from_integer(k) / &den)))
            .collect::<Result<_>>()?;
        let fp0 = samples[0].fingerprint();
        if samples.iter().all(|s| s.fingerprint() == fp0) {
            let n = samples.len();
            let fit_idx = [0, n / 3, (2 * n) / 3, n - 1];
            let pts: Vec<(Rational, Rational)> = fit_idx
                .iter()
                .map(|&i| (samples[i].u.clone(), samples[i].value.clone()))
                .collect();
            let poly = Poly::interpolate(&pts, 3)?;
            if samples.iter().all(|s| poly.eval(&s.u) == s.value) {
                return Ok(vec![(lo.clone(), hi.clone(), poly, fp0.unwrap_or_default())]);
            }
        }
        if depth == 0 {
            return Err(Error::ChamberRefinementExhausted {
                lo: lo.clone(),
                hi: hi.clone(),
            });
        }
        let mut cuts: Vec<Rational> = Vec::new();
        for s in &samples {
            cuts.extend(self.transitions(s)?);
        }
        cuts.retain(|c| c > lo && c < hi);
        cuts.sort();
        cuts.dedup();
        if cuts.is_empty() {
            cuts.push((lo + hi) / Rational::from_integer(2));
        }
        let mut bounds = vec![lo.clone()];
        bounds.extend(cuts);
        bounds.push(hi.clone());
        let mut out = Vec::new();
        for w in bounds.windows(2) {
            out.extend(self.integrate(&w[0], &w[1], depth - 1)?);
        }
        Ok(out)
    }

    /// Values of `u` nearest to the sample on either side where the sample's chamber
    /// structure stops being valid: a different constraint becomes the binding wall
    /// of some chamber, or a chamber collapses.
    fn transitions(&self, s: &Sample) -> Result<Vec<Rational>> {
        let sweep = match &s.sweep {
            Some(sw) => sw,
            None => return Ok(Vec::new()),
        };
        let u0 = &s.u;
        let mut crossings: Vec<Rational> = Vec::new();
        for (k, ch) in sweep.chambers.iter().enumerate() {
            let cons = self.constraints(&ch.support, k == 0)?;
            // bounds on v as affine functions of u: v ≥ lower, v ≤ upper
            let mut lower: Vec<(Rational, Rational)> = Vec::new();
            let mut upper: Vec<(Rational, Rational)> = Vec::new();
            for (al, be, ga) in &cons {
                if ga.is_zero() {
                    if !be.is_zero() {
                        crossings.push(-al / be);
                    }
                    continue;
                }
                let f = (-(al / ga), -(be / ga));
                if ga.is_positive() {
                    lower.push(f);
                } else {
                    upper.push(f);
                }
            }
            let at = |f: &(Rational, Rational)| &f.0 + &f.1 * u0;
            let best = |fs: &[(Rational, Rational)], want_max: bool| -> Option<(Rational, Rational)> {
                fs.iter()
                    .max_by(|x, y| {
                        let o = at(x).cmp(&at(y));
                        if want_max {
                            o
                        } else {
                            o.reverse()
                        }
                    })
                    .cloned()
            };
            let lo_f = best(&lower, true);
            let hi_f = best(&upper, false);
            let mut cross = |f: &(Rational, Rational), g: &(Rational, Rational)| {
                if f.1 != g.1 {
                    crossings.push((&g.0 - &f.0) / (&f.1 - &g.1));
                }
            };
            if let Some(h) = &hi_f {
                for g in &upper {
                    cross(h, g);
                }
            }
            if let Some(l) = &lo_f {
                for g in &lower {
                    cross(l, g);
                }
            }
            if let (Some(l), Some(h)) = (&lo_f, &hi_f) {
                cross(l, h);
            }
        }
        let right = crossings.iter().filter(|c| *c > u0).min().cloned();
        let left = crossings.iter().filter(|c| *c < u0).max().cloned();
        let mut out: Vec<Rational> = left.into_iter().chain(right).collect();
        if crossings.iter().any(|c| c == u0) {
            out.push(u0.clone());
        }
        Ok(out)
    }

    /// Affine constraints `α + βu + γv ≥ 0` that keep the support fixed.
    fn constraints(&self, support: &[usize], first: bool) -> Result<Vec<(Rational, Rational, Rational)>> {
        let (pa, ca) = solve_with_support(self.model, support, &self.a)?;
        let (pb, cb) = solve_with_support(self.model, support, &self.b)?;
        let (pz, cz) = solve_with_support(self.model, support, &self.z)?;
        let mut out = Vec::new();
        for g in 0..self.model.generator_count() {
            if support.contains(&g) {
                continue;
            }
            let c = self.model.generator(g);
            out.push((
                self.model.pair(&pa, c)?,
                self.model.pair(&pb, c)?,
                -self.model.pair(&pz, c)?,
            ));
        }
        for k in 0..support.len() {
            out.push((ca[k].clone(), cb[k].clone(), -cz[k].clone()));
        }
        if first {
            out.push((Rational::ZERO, Rational::ZERO, Rational::ONE));
        }
        Ok(out)
    }
}

/// `S(W^Y; Z) = (3/V) ∫ (P²·Y) ord_Z(N|_Y) du + (3/V) ∫∫ vol(P(u)|_Y - vZ) dv du`.
pub fn s_curve(case: &CurveCase<'_>, opts: &SCurveOptions) -> Result<SCurveResult> {
    let spec = case.spec;
    if !spec.is_verified() {
        return Err(Error::UnverifiedInput(spec.name().to_string()));
    }
    if opts.samples.numerators.len() < 5 || opts.samples.denominator <= 0 {
        return Err(Error::UnsupportedModel("at least 5 outer samples are required".into()));
    }
    let ring = spec.ring();
    ring.basis().ensure_same(case.surface.basis())?;
    ring.basis().ensure_same(case.restriction.source())?;
    case.model.basis().ensure_same(case.restriction.target())?;
    let v = &case.anticanonical_volume;
    if !v.is_positive() {
        return Err(Error::UnsupportedModel(format!("anticanonical volume {v} is not positive")));
    }
    let scale = Rational::from_integer(3) / v;
    let z = &case.curve.class;
    let mut computed_first = Rational::ZERO;
    let mut bound_first = Rational::ZERO;
    let mut pieces: Vec<Piece> = Vec::new();
    for (idx, ch) in spec.chambers().iter().enumerate() {
        let p = spec.positive_part(idx);
        let weight = ring.square_against(&p.constant, &p.slope, case.surface)?;
        let restricted: Vec<(DivisorClass, Poly)> = ch
            .negative
            .iter()
            .map(|t| Ok((restrict(case.restriction, &t.class)?, t.coeff.clone())))
            .collect::<Result<_>>()?;
        let ord = ord_along(&restricted, &case.curve, case.model)?;
        let here = (&weight * &ord).integrate(&ch.lo, &ch.hi)?;
        computed_first += here.clone();
        bound_first += here;
        if let Some(bound) = &case.ord_bound {
            for (a, b, poly) in bound.intervals() {
                let lo = a.clone().max(ch.lo.clone());
                let hi = b.clone().min(ch.hi.clone());
                if lo < hi {
                    bound_first += (&weight * &(poly - &ord)).integrate(&lo, &hi)?;
                }
            }
        }
        let outer = Outer {
            model: case.model,
            a: restrict(case.restriction, &p.constant)?,
            b: restrict(case.restriction, &p.slope)?,
            z: z.clone(),
            opts,
        };
        pieces.extend(outer.integrate(&ch.lo, &ch.hi, opts.max_depth)?);
    }
    let mut breaks = vec![pieces[0].0.clone()];
    breaks.extend(pieces.iter().map(|p| p.1.clone()));
    let f = PiecewisePoly::new(breaks.clone(), pieces.iter().map(|p| p.2.clone()).collect(), false)?;
    if let Some(at) = f.first_jump() {
        return Err(Error::ChamberRefinementExhausted {
            lo: at.clone(),
            hi: at,
        });
    }
    let second_term = &scale * &f.integrate();
    let computed_first_term = &scale * &computed_first;
    let (first_term, from_bound) = match &case.ord_bound {
        Some(_) => (&scale * &bound_first, true),
        None => (computed_first_term.clone(), false),
    };
    let audit = pieces
        .into_iter()
        .map(|(lo, hi, integrand, fp)| ChamberAudit {
            lo,
            hi,
            supports: fp
                .iter()
                .map(|s| s.iter().map(|&i| case.model.curve_name(i)).collect())
                .collect(),
            integrand,
        })
        .collect();
    Ok(SCurveResult {
        total: &first_term + &second_term,
        first_term,
        second_term,
        computed_first_term,
        first_term_from_bound: from_bound,
        outer_walls: breaks,
        audit,
    })
}
