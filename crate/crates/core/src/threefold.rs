//! Trilinear intersection rings, verification of one-parameter Zariski chambers,
//! restriction to surfaces and rank-2 cone membership.

use std::sync::Arc;

use serde::Serialize;

use crate::delpezzo::SurfaceModel;
use crate::error::{Error, Result};
use crate::exact::{PiecewisePoly, Poly, Rational};
use crate::picard::{Basis, DivisorClass};

/// A curve on the threefold, known only through its intersection numbers with the
/// basis divisors.
#[derive(Clone, Debug)]
pub struct CurveFunctional {
    name: String,
    basis: Basis,
    pairings: Vec<Rational>,
}

impl CurveFunctional {
    pub fn new(basis: &Basis, name: impl Into<String>, pairings: Vec<Rational>) -> Result<Self> {
        if pairings.len() != basis.len() {
            return Err(Error::BasisMismatch {
                expected: basis.names().join(", "),
                found: format!("{} pairings", pairings.len()),
            });
        }
        Ok(CurveFunctional {
            name: name.into(),
            basis: basis.clone(),
            pairings,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pairings(&self) -> &[Rational] {
        &self.pairings
    }

    pub fn pair(&self, d: &DivisorClass) -> Result<Rational> {
        self.basis.ensure_same(d.basis())?;
        Ok(crate::exact::linalg::dot(d.coeffs(), &self.pairings))
    }
}

/// Symmetric trilinear form on a threefold Picard basis.
#[derive(Clone, Debug)]
pub struct ThreefoldRing {
    basis: Basis,
    // full n×n×n table, symmetric by construction
    table: Vec<Rational>,
    test_curves: Vec<CurveFunctional>,
}

impl ThreefoldRing {
    /// Builds the ring from `(i, j, k, value)` entries. Every unordered triple must be
    /// covered, and entries that are permutations of each other must agree.
    pub fn new(
        basis: &Basis,
        entries: &[(usize, usize, usize, Rational)],
        test_curves: Vec<CurveFunctional>,
    ) -> Result<ThreefoldRing> {
        let n = basis.len();
        let mut table: Vec<Option<Rational>> = vec![None; n * n * n];
        let names = basis.names();
        for (i, j, k, v) in entries {
            let (i, j, k) = (*i, *j, *k);
            if i >= n || j >= n || k >= n {
                return Err(Error::InvalidTripleForm(format!("index out of range in ({i}, {j}, {k})")));
            }
            for (a, b, c) in permutations(i, j, k) {
                let slot = &mut table[(a * n + b) * n + c];
                match slot {
                    Some(old) if old != v => {
                        return Err(Error::InvalidTripleForm(format!(
                            "{}·{}·{} given as both {old} and {v}",
                            names[i], names[j], names[k]
                        )))
                    }
                    _ => *slot = Some(v.clone()),
                }
            }
        }
        let mut full = Vec::with_capacity(n * n * n);
        for (idx, v) in table.into_iter().enumerate() {
            match v {
                Some(v) => full.push(v),
                None => {
                    let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
                    return Err(Error::InvalidTripleForm(format!(
                        "missing entry {}·{}·{}",
                        names[i], names[j], names[k]
                    )));
                }
            }
        }
        for c in &test_curves {
            basis.ensure_same(&c.basis)?;
        }
        Ok(ThreefoldRing {
            basis: basis.clone(),
            table: full,
            test_curves,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn test_curves(&self) -> &[CurveFunctional] {
        &self.test_curves
    }

    pub fn entry(&self, i: usize, j: usize, k: usize) -> &Rational {
        let n = self.basis.len();
        &self.table[(i * n + j) * n + k]
    }

    pub fn triple(&self, a: &DivisorClass, b: &DivisorClass, c: &DivisorClass) -> Result<Rational> {
        self.basis.ensure_same(a.basis())?;
        self.basis.ensure_same(b.basis())?;
        self.basis.ensure_same(c.basis())?;
        Ok(self.triple_raw(a.coeffs(), b.coeffs(), c.coeffs()))
    }

    pub(crate) fn triple_raw(&self, a: &[Rational], b: &[Rational], c: &[Rational]) -> Rational {
        let n = self.basis.len();
        let mut acc = Rational::ZERO;
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, z) in c.iter().enumerate() {
                    if z.is_zero() {
                        continue;
                    }
                    let t = &self.table[(i * n + j) * n + k];
                    if !t.is_zero() {
                        acc += &xy * &(z * t);
                    }
                }
            }
        }
        acc
    }

    /// `(A + uB)·(A + uB)·Y` as a polynomial in `u`.
    pub fn square_against(&self, a: &DivisorClass, b: &DivisorClass, y: &DivisorClass) -> Result<Poly> {
        Ok(Poly::new(vec![
            self.triple(a, a, y)?,
            Rational::from_integer(2) * self.triple(a, b, y)?,
            self.triple(b, b, y)?,
        ]))
    }

    /// `(A + uB)³` as a polynomial in `u`.
    pub fn cube(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Poly> {
        let three = Rational::from_integer(3);
        Ok(Poly::new(vec![
            self.triple(a, a, a)?,
            &three * self.triple(a, a, b)?,
            &three * self.triple(a, b, b)?,
            self.triple(b, b, b)?,
        ]))
    }
}

fn permutations(i: usize, j: usize, k: usize) -> [(usize, usize, usize); 6] {
    [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]
}

/// `constant + u · slope`
#[derive(Clone, Debug)]
pub struct AffineDivisor {
    pub constant: DivisorClass,
    pub slope: DivisorClass,
}

impl AffineDivisor {
    pub fn at(&self, u: &Rational) -> DivisorClass {
        self.constant
            .add(&self.slope.scale(u))
            .expect("constant and slope share a basis")
    }
}

#[derive(Clone, Debug)]
pub struct NegativeTerm {
    pub name: String,
    pub class: DivisorClass,
    pub coeff: Poly,
}

#[derive(Clone, Debug)]
pub struct Chamber1D {
    pub lo: Rational,
    pub hi: Rational,
    pub negative: Vec<NegativeTerm>,
}

impl Chamber1D {
    /// `N(u)` as a class.
    pub fn negative_at(&self, basis: &Basis, u: &Rational) -> DivisorClass {
        let mut acc = DivisorClass::zero(basis);
        for t in &self.negative {
            acc = acc.add(&t.class.scale(&t.coeff.eval(u))).expect("same basis");
        }
        acc
    }
}

/// Supplied Zariski chambers of `D(u)` on `[0, tau]`.
#[derive(Clone, Debug)]
pub struct ChamberSpec1D {
    name: String,
    ring: Arc<ThreefoldRing>,
    divisor: AffineDivisor,
    chambers: Vec<Chamber1D>,
    tau: Rational,
    verified: bool,
}

impl ChamberSpec1D {
    pub fn new(
        name: impl Into<String>,
        ring: Arc<ThreefoldRing>,
        divisor: AffineDivisor,
        chambers: Vec<Chamber1D>,
        tau: Rational,
    ) -> ChamberSpec1D {
        ChamberSpec1D {
            name: name.into(),
            ring,
            divisor,
            chambers,
            tau,
            verified: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ring(&self) -> &Arc<ThreefoldRing> {
        &self.ring
    }

    pub fn divisor(&self) -> &AffineDivisor {
        &self.divisor
    }

    pub fn chambers(&self) -> &[Chamber1D] {
        &self.chambers
    }

    pub fn tau(&self) -> &Rational {
        &self.tau
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    /// `P(u) = A + uB` on chamber `idx`.
    pub fn positive_part(&self, idx: usize) -> AffineDivisor {
        let mut constant = self.divisor.constant.clone();
        let mut slope = self.divisor.slope.clone();
        for t in &self.chambers[idx].negative {
            constant = constant.sub(&t.class.scale(&t.coeff.coeff(0))).expect("same basis");
            slope = slope.sub(&t.class.scale(&t.coeff.coeff(1))).expect("same basis");
        }
        AffineDivisor { constant, slope }
    }

    fn fail(&self, c: &Chamber1D, witness: String) -> Error {
        Error::InvalidChamber {
            name: self.name.clone(),
            lo: c.lo.clone(),
            hi: c.hi.clone(),
            witness,
        }
    }
}

/// Checks the partition, `N ≥ 0`, nefness of `P` on the ring's test curves and
/// continuity of `N`, returning the spec marked as verified.
pub fn verify_chambers(spec: &ChamberSpec1D) -> Result<ChamberSpec1D> {
    let basis = spec.ring.basis();
    basis.ensure_same(spec.divisor.constant.basis())?;
    basis.ensure_same(spec.divisor.slope.basis())?;
    let whole = Chamber1D {
        lo: Rational::ZERO,
        hi: spec.tau.clone(),
        negative: Vec::new(),
    };
    if !spec.tau.is_positive() {
        return Err(spec.fail(&whole, format!("threshold {} is not positive", spec.tau)));
    }
    let (first, last) = match (spec.chambers.first(), spec.chambers.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(spec.fail(&whole, "no chambers".into())),
    };
    if !first.lo.is_zero() {
        return Err(spec.fail(first, "first chamber does not start at u=0".into()));
    }
    if last.hi != spec.tau {
        return Err(spec.fail(last, format!("last chamber does not end at u={}", spec.tau)));
    }
    for c in &spec.chambers {
        if c.lo >= c.hi {
            return Err(spec.fail(c, "empty chamber".into()));
        }
    }
    for w in spec.chambers.windows(2) {
        if w[0].hi != w[1].lo {
            return Err(spec.fail(&w[1], format!("gap or overlap at u={}", w[0].hi)));
        }
    }
    for c in &spec.chambers {
        for t in &c.negative {
            basis.ensure_same(t.class.basis())?;
            if t.coeff.degree().unwrap_or(0) > 1 {
                return Err(spec.fail(c, format!("coefficient of {} is not affine in u", t.name)));
            }
            for u in [&c.lo, &c.hi] {
                if t.coeff.eval(u).is_negative() {
                    return Err(spec.fail(c, format!("negative coefficient at u={u} ({})", t.name)));
                }
            }
        }
    }
    for (idx, c) in spec.chambers.iter().enumerate() {
        let p = spec.positive_part(idx);
        for curve in spec.ring.test_curves() {
            for u in [&c.lo, &c.hi] {
                let v = curve.pair(&p.at(u))?;
                if v.is_negative() {
                    return Err(spec.fail(
                        c,
                        format!("curve {} pairs to {v} with P at u={u}", curve.name()),
                    ));
                }
            }
        }
    }
    for w in spec.chambers.windows(2) {
        let u = &w[0].hi;
        if w[0].negative_at(basis, u) != w[1].negative_at(basis, u) {
            return Err(spec.fail(&w[1], format!("N jumps at u={u}")));
        }
    }
    let mut out = spec.clone();
    out.verified = true;
    Ok(out)
}

/// `vol(D(u)) = P(u)³` on `[0, tau]`.
pub fn volume_poly(spec: &ChamberSpec1D) -> Result<PiecewisePoly> {
    if !spec.verified {
        return Err(Error::UnverifiedInput(spec.name.clone()));
    }
    let mut breaks = vec![Rational::ZERO];
    let mut pieces = Vec::new();
    for (idx, c) in spec.chambers.iter().enumerate() {
        let p = spec.positive_part(idx);
        pieces.push(spec.ring.cube(&p.constant, &p.slope)?);
        breaks.push(c.hi.clone());
    }
    PiecewisePoly::new(breaks, pieces, true).map_err(|e| Error::InvalidChamber {
        name: spec.name.clone(),
        lo: Rational::ZERO,
        hi: spec.tau.clone(),
        witness: format!("volume {e}"),
    })
}

/// Linear map from a threefold basis to a surface basis, one image per source element.
#[derive(Clone, Debug)]
pub struct RestrictionMap {
    source: Basis,
    target: Basis,
    images: Vec<DivisorClass>,
}

impl RestrictionMap {
    pub fn new(source: &Basis, target: &Basis, images: Vec<DivisorClass>) -> Result<Self> {
        if images.len() != source.len() {
            return Err(Error::BasisMismatch {
                expected: source.names().join(", "),
                found: format!("{} images", images.len()),
            });
        }
        for im in &images {
            target.ensure_same(im.basis())?;
        }
        Ok(RestrictionMap {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn source(&self) -> &Basis {
        &self.source
    }

    pub fn target(&self) -> &Basis {
        &self.target
    }

    pub fn images(&self) -> &[DivisorClass] {
        &self.images
    }
}

pub fn restrict(map: &RestrictionMap, d: &DivisorClass) -> Result<DivisorClass> {
    map.source.ensure_same(d.basis())?;
    let mut acc = vec![Rational::ZERO; map.target.len()];
    for (c, im) in d.coeffs().iter().zip(&map.images) {
        if c.is_zero() {
            continue;
        }
        for (a, x) in acc.iter_mut().zip(im.coeffs()) {
            if !x.is_zero() {
                *a += c * x;
            }
        }
    }
    DivisorClass::new(&map.target, acc)
}

/// Checks `A·B·Y = r(A)·r(B)` on every pair of basis divisors.
pub fn check_restriction(
    ring: &ThreefoldRing,
    map: &RestrictionMap,
    y: &DivisorClass,
    model: &SurfaceModel,
) -> Result<()> {
    model.basis().ensure_same(&map.target)?;
    ring.basis().ensure_same(&map.source)?;
    let names = ring.basis().names();
    for i in 0..names.len() {
        for j in i..names.len() {
            let a = DivisorClass::generator(ring.basis(), &names[i])?;
            let b = DivisorClass::generator(ring.basis(), &names[j])?;
            let lhs = ring.triple(&a, &b, y)?;
            let rhs = model.pair(&map.images[i], &map.images[j])?;
            if lhs != rhs {
                return Err(Error::RestrictionMismatch(format!(
                    "{}·{}·Y = {lhs} but the restrictions pair to {rhs}",
                    names[i], names[j]
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeDecision {
    pub inside: bool,
    /// `D = a·r1 + b·r2`
    pub coefficients: [Rational; 2],
}

/// Membership of `d` in the cone spanned by two rays of a rank-2 lattice.
pub fn cone_member_2d(rays: [&DivisorClass; 2], d: &DivisorClass) -> Result<ConeDecision> {
    let basis = d.basis();
    basis.ensure_same(rays[0].basis())?;
    basis.ensure_same(rays[1].basis())?;
    if basis.len() != 2 {
        return Err(Error::DegenerateCone(format!("lattice has rank {}, expected 2", basis.len())));
    }
    let (r, s, x) = (rays[0].coeffs(), rays[1].coeffs(), d.coeffs());
    let det = &r[0] * &s[1] - &r[1] * &s[0];
    if det.is_zero() {
        return Err(Error::DegenerateCone(format!("rays {} and {} are dependent", rays[0], rays[1])));
    }
    let a = (&x[0] * &s[1] - &x[1] * &s[0]) / &det;
    let b = (&r[0] * &x[1] - &r[1] * &x[0]) / &det;
    Ok(ConeDecision {
        inside: !a.is_negative() && !b.is_negative(),
        coefficients: [a, b],
    })
}
