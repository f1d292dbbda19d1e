//! Zariski decomposition, volumes and one-parameter volume sweeps on del Pezzo models.

use serde::Serialize;

use crate::delpezzo::SurfaceModel;
use crate::error::{Error, Result};
use crate::exact::{linalg, Poly, Rational};
use crate::picard::DivisorClass;

/// `D = P + Σ a_C C` with `P` nef and the support negative definite.
#[derive(Clone, Debug)]
pub struct SurfaceDecomposition {
    pub positive: DivisorClass,
    pub negative_support: Vec<(DivisorClass, Rational)>,
    /// Indices of the support curves in `model.negative_curves()`.
    pub support_indices: Vec<usize>,
}

impl SurfaceDecomposition {
    pub fn volume(&self, model: &SurfaceModel) -> Rational {
        model.pair_raw(self.positive.coeffs(), self.positive.coeffs())
    }
}

/// Why a sweep chamber ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WallEvent {
    /// A Mori generator outside the support starts pairing negatively with `P`.
    Pairing(usize),
    /// The coefficient of a support curve reaches zero.
    Coefficient(usize),
}

#[derive(Clone, Debug)]
pub struct SweepChamber {
    pub lo: Rational,
    pub hi: Rational,
    /// Support of `N(v)` on the open chamber, as indices into the negative curves.
    pub support: Vec<usize>,
    /// `vol(D0 - vZ)` on the chamber.
    pub volume: Poly,
    /// Coefficient of each support curve in `N(v)`.
    pub negative: Vec<(usize, Poly)>,
    /// Events that fix the upper wall.
    pub ending: Vec<WallEvent>,
}

/// Chamber structure of `v ↦ vol(D0 - vZ)` on `[0, effective_threshold]`.
#[derive(Clone, Debug)]
pub struct VolumeSweep {
    pub base: DivisorClass,
    pub direction: DivisorClass,
    pub walls: Vec<Rational>,
    pub chambers: Vec<SweepChamber>,
    pub effective_threshold: Rational,
}

impl VolumeSweep {
    /// Exact `∫_0^threshold vol(D0 - vZ) dv`.
    pub fn integral(&self) -> Rational {
        self.chambers
            .iter()
            .map(|c| c.volume.integrate(&c.lo, &c.hi).expect("walls increase"))
            .sum()
    }

    /// Sequence of supports, one per chamber.
    pub fn fingerprint(&self) -> Vec<Vec<usize>> {
        self.chambers.iter().map(|c| c.support.clone()).collect()
    }

    pub fn volume_at(&self, v: &Rational) -> Rational {
        self.chambers
            .iter()
            .find(|c| &c.lo <= v && v <= &c.hi)
            .map(|c| c.volume.eval(v))
            .unwrap_or(Rational::ZERO)
    }
}

struct Solved {
    coeffs: Vec<Vec<Rational>>,
    positive: Vec<Vec<Rational>>,
}

/// Solves `(D - Σ a_C C)·C' = 0` on `support` for each right-hand side class.
fn solve_support(model: &SurfaceModel, support: &[usize], ds: &[&[Rational]]) -> Result<Solved> {
    if support.is_empty() {
        return Ok(Solved {
            coeffs: vec![Vec::new(); ds.len()],
            positive: ds.iter().map(|d| d.to_vec()).collect(),
        });
    }
    let ng = model.neg_gram();
    let gram: Vec<Vec<Rational>> = support
        .iter()
        .map(|&i| support.iter().map(|&j| ng[i][j].clone()).collect())
        .collect();
    let rhs: Vec<Vec<Rational>> = ds
        .iter()
        .map(|d| support.iter().map(|&i| model.pair_generator(d, i)).collect())
        .collect();
    let coeffs = linalg::solve(&gram, &rhs).map_err(|e| Error::DegenerateSupport(e.to_string()))?;
    let positive = ds
        .iter()
        .zip(&coeffs)
        .map(|(d, a)| {
            let mut p = d.to_vec();
            for (k, &i) in a.iter().zip(support) {
                if k.is_zero() {
                    continue;
                }
                for (x, c) in p.iter_mut().zip(model.generator(i).coeffs()) {
                    if !c.is_zero() {
                        *x -= k * c;
                    }
                }
            }
            p
        })
        .collect();
    Ok(Solved { coeffs, positive })
}

/// Positive part and support coefficients of `d` for a fixed support.
pub fn solve_with_support(
    model: &SurfaceModel,
    support: &[usize],
    d: &DivisorClass,
) -> Result<(DivisorClass, Vec<Rational>)> {
    model.basis().ensure_same(d.basis())?;
    let mut s = solve_support(model, support, &[d.coeffs()])?;
    let p = DivisorClass::new(model.basis(), s.positive.pop().expect("one rhs"))?;
    Ok((p, s.coeffs.pop().expect("one rhs")))
}

/// Sign of `value + ε·slope` for small ε > 0.
fn lex_sign(terms: &[Rational]) -> i32 {
    terms.iter().map(Rational::signum).find(|&s| s != 0).unwrap_or(0)
}

/// Decomposition of the family `d0 + s·d1` at `s = t`, or at `t⁺` when `d1` is given.
/// `p0, p1` and `c0, c1` are the global affine parameterisations of `P(s)` and the
/// support coefficients valid on the chamber starting at `t`.
struct FamilyState {
    support: Vec<usize>,
    c0: Vec<Rational>,
    c1: Vec<Rational>,
    p0: Vec<Rational>,
    p1: Vec<Rational>,
}

fn decompose_family(
    model: &SurfaceModel,
    d0: &[Rational],
    d1: Option<&[Rational]>,
    t: &Rational,
) -> Result<FamilyState> {
    let zero = vec![Rational::ZERO; d0.len()];
    let d1v = d1.unwrap_or(&zero);
    let nneg = model.negative_curves().len();
    let mut support: Vec<usize> = Vec::new();
    let mut in_support = vec![false; nneg];
    loop {
        let solved = if d1.is_some() {
            solve_support(model, &support, &[d0, d1v])?
        } else {
            solve_support(model, &support, &[d0])?
        };
        let p0 = &solved.positive[0];
        let p1 = solved.positive.get(1).unwrap_or(&zero);
        let mut grew = false;
        for i in 0..nneg {
            if in_support[i] {
                continue;
            }
            let a = model.pair_generator(p0, i);
            let b = if d1.is_some() {
                model.pair_generator(p1, i)
            } else {
                Rational::ZERO
            };
            if lex_sign(&[&a + t * &b, b]) < 0 {
                in_support[i] = true;
                grew = true;
            }
        }
        if !grew {
            let c0 = solved.coeffs[0].clone();
            let c1 = solved
                .coeffs
                .get(1)
                .cloned()
                .unwrap_or_else(|| vec![Rational::ZERO; support.len()]);
            let state = FamilyState {
                support,
                c0,
                c1,
                p0: p0.clone(),
                p1: p1.clone(),
            };
            check_state(model, &state, t)?;
            return Ok(state);
        }
        support = (0..nneg).filter(|&i| in_support[i]).collect();
        let gram: Vec<Vec<Rational>> = support
            .iter()
            .map(|&i| support.iter().map(|&j| model.neg_gram()[i][j].clone()).collect())
            .collect();
        if !linalg::is_negative_definite(&gram) {
            return Err(Error::NotPseudoeffective(format!(
                "support {{{}}} is not negative definite",
                names(model, &support)
            )));
        }
    }
}

fn names(model: &SurfaceModel, idx: &[usize]) -> String {
    idx.iter().map(|&i| model.curve_name(i)).collect::<Vec<_>>().join(", ")
}

fn check_state(model: &SurfaceModel, st: &FamilyState, t: &Rational) -> Result<()> {
    for (k, &i) in st.support.iter().enumerate() {
        if lex_sign(&[&st.c0[k] + t * &st.c1[k], st.c1[k].clone()]) < 0 {
            return Err(Error::NotPseudoeffective(format!(
                "negative coefficient on {}",
                model.curve_name(i)
            )));
        }
    }
    let pv: Vec<Rational> = st.p0.iter().zip(&st.p1).map(|(a, b)| a + t * b).collect();
    for g in 0..model.generator_count() {
        let a = model.pair_generator(&pv, g);
        let b = model.pair_generator(&st.p1, g);
        if lex_sign(&[a, b]) < 0 {
            return Err(Error::NotPseudoeffective(format!(
                "positive part is negative on {}",
                model.curve_name(g)
            )));
        }
    }
    let sq = [
        model.pair_raw(&pv, &pv),
        model.pair_raw(&pv, &st.p1),
        model.pair_raw(&st.p1, &st.p1),
    ];
    if lex_sign(&sq) < 0 {
        return Err(Error::NotPseudoeffective("P² < 0".into()));
    }
    let ak = model.anticanonical();
    let deg = [model.pair_raw(&pv, ak.coeffs()), model.pair_raw(&st.p1, ak.coeffs())];
    if lex_sign(&deg) < 0 {
        return Err(Error::NotPseudoeffective("P·(-K) < 0".into()));
    }
    Ok(())
}

pub fn decompose(model: &SurfaceModel, d: &DivisorClass) -> Result<SurfaceDecomposition> {
    model.basis().ensure_same(d.basis())?;
    let st = decompose_family(model, d.coeffs(), None, &Rational::ZERO)?;
    let negative_support = st
        .support
        .iter()
        .zip(&st.c0)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&i, c)| (model.negative_curves()[i].clone(), c.clone()))
        .collect();
    let support_indices = st
        .support
        .iter()
        .zip(&st.c0)
        .filter(|(_, c)| !c.is_zero())
        .map(|(&i, _)| i)
        .collect();
    Ok(SurfaceDecomposition {
        positive: DivisorClass::new(model.basis(), st.p0)?,
        negative_support,
        support_indices,
    })
}

/// `P²` when `d` is pseudoeffective, else 0.
pub fn volume(model: &SurfaceModel, d: &DivisorClass) -> Rational {
    if !model.basis().same_as(d.basis()) {
        return Rational::ZERO;
    }
    volume_raw(model, d.coeffs())
}

pub(crate) fn volume_raw(model: &SurfaceModel, d: &[Rational]) -> Rational {
    match decompose_family(model, d, None, &Rational::ZERO) {
        Ok(st) => model.pair_raw(&st.p0, &st.p0),
        Err(_) => Rational::ZERO,
    }
}

/// Walks `v ↦ D0 - vZ` from `v = 0` until the class leaves the pseudoeffective cone.
pub fn sweep(model: &SurfaceModel, d0: &DivisorClass, z: &DivisorClass) -> Result<VolumeSweep> {
    model.basis().ensure_same(d0.basis())?;
    model.basis().ensure_same(z.basis())?;
    let ak = model.anticanonical();
    if !model.pair(z, &ak)?.is_positive() {
        return Err(Error::UnboundedSweep(z.to_string()));
    }
    decompose_family(model, d0.coeffs(), None, &Rational::ZERO)?;
    let dir: Vec<Rational> = z.coeffs().iter().map(|c| -c).collect();
    let mut t = Rational::ZERO;
    let mut walls = vec![t.clone()];
    let mut chambers = Vec::new();
    loop {
        let st = match decompose_family(model, d0.coeffs(), Some(&dir), &t) {
            Ok(st) => st,
            Err(Error::NotPseudoeffective(_)) => break,
            Err(e) => return Err(e),
        };
        let mut next: Option<Rational> = None;
        let mut ending = Vec::new();
        let mut consider = |root: Rational, ev: WallEvent| {
            if root <= t {
                return;
            }
            match &next {
                Some(n) if root > *n => {}
                Some(n) if root == *n => ending.push(ev),
                _ => {
                    next = Some(root);
                    ending = vec![ev];
                }
            }
        };
        for g in 0..model.generator_count() {
            if st.support.contains(&g) {
                continue;
            }
            let b = model.pair_generator(&st.p1, g);
            if b.is_negative() {
                let a = model.pair_generator(&st.p0, g);
                consider(-a / b, WallEvent::Pairing(g));
            }
        }
        for (k, &i) in st.support.iter().enumerate() {
            if st.c1[k].is_negative() {
                consider(-&st.c0[k] / &st.c1[k], WallEvent::Coefficient(i));
            }
        }
        let hi = next.ok_or_else(|| Error::UnboundedSweep(z.to_string()))?;
        let volume = Poly::new(vec![
            model.pair_raw(&st.p0, &st.p0),
            Rational::from_integer(2) * model.pair_raw(&st.p0, &st.p1),
            model.pair_raw(&st.p1, &st.p1),
        ]);
        let negative = st
            .support
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, Poly::linear(st.c0[k].clone(), st.c1[k].clone())))
            .collect();
        chambers.push(SweepChamber {
            lo: t.clone(),
            hi: hi.clone(),
            support: st.support,
            volume,
            negative,
            ending,
        });
        walls.push(hi.clone());
        t = hi;
    }
    Ok(VolumeSweep {
        base: d0.clone(),
        direction: z.clone(),
        walls,
        chambers,
        effective_threshold: t,
    })
}
