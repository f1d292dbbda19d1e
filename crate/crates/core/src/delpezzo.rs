//! Del Pezzo surface models and their (-1)-curves.

use crate::error::{Error, Result};
use crate::exact::{linalg, Rational};
use crate::picard::{Basis, DivisorClass, IntersectionForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Blowup of P² in `n` general points.
    Plane { n: usize },
    /// Blowup of P¹×P¹ in `k` general points.
    Quadric { k: usize },
}

/// Surface Picard lattice with its Mori cone generators.
///
/// `negative_curves` are the (-1)-curves. On degree-8 models they do not span the
/// Mori cone; the missing ruling classes are kept in `extra_generators`.
#[derive(Clone, Debug)]
pub struct SurfaceModel {
    form: IntersectionForm,
    canonical: DivisorClass,
    negative_curves: Vec<DivisorClass>,
    extra_generators: Vec<DivisorClass>,
    degree: i64,
    kind: ModelKind,
    // G·C for every Mori generator, negative curves first
    duals: Vec<Vec<Rational>>,
    neg_gram: Vec<Vec<Rational>>,
}

impl SurfaceModel {
    /// Builds a model from an explicit lattice; the shape is recognised under any
    /// ordering of the basis.
    pub fn from_form(form: IntersectionForm, canonical: DivisorClass) -> Result<SurfaceModel> {
        let shape = recognise(&form, &canonical)?;
        let negative_curves = enumerate_with_shape(&form, &shape);
        let kind = shape.kind();
        let extra_generators = extra_generators(&form, &shape);
        let degree = form.pair_raw(canonical.coeffs(), canonical.coeffs());
        let degree = degree.numer().try_into().expect("degree fits");
        let duals: Vec<Vec<Rational>> = negative_curves
            .iter()
            .chain(&extra_generators)
            .map(|c| form.dual(c.coeffs()))
            .collect();
        let neg_gram = negative_curves
            .iter()
            .map(|a| {
                (0..negative_curves.len())
                    .map(|j| linalg::dot(a.coeffs(), &duals[j]))
                    .collect()
            })
            .collect();
        Ok(SurfaceModel {
            form,
            canonical,
            negative_curves,
            extra_generators,
            degree,
            kind,
            duals,
            neg_gram,
        })
    }

    pub fn form(&self) -> &IntersectionForm {
        &self.form
    }

    pub fn basis(&self) -> &Basis {
        self.form.basis()
    }

    pub fn canonical(&self) -> &DivisorClass {
        &self.canonical
    }

    pub fn anticanonical(&self) -> DivisorClass {
        self.canonical.neg()
    }

    pub fn negative_curves(&self) -> &[DivisorClass] {
        &self.negative_curves
    }

    pub fn extra_generators(&self) -> &[DivisorClass] {
        &self.extra_generators
    }

    /// Negative curves followed by the extra generators.
    pub fn mori_generators(&self) -> impl Iterator<Item = &DivisorClass> {
        self.negative_curves.iter().chain(&self.extra_generators)
    }

    pub fn generator_count(&self) -> usize {
        self.negative_curves.len() + self.extra_generators.len()
    }

    pub fn generator(&self, i: usize) -> &DivisorClass {
        if i < self.negative_curves.len() {
            &self.negative_curves[i]
        } else {
            &self.extra_generators[i - self.negative_curves.len()]
        }
    }

    pub fn curve_name(&self, i: usize) -> String {
        self.generator(i).to_string().replace(' ', "")
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn pair(&self, a: &DivisorClass, b: &DivisorClass) -> Result<Rational> {
        self.form.pair(a, b)
    }

    pub fn curve_index(&self, c: &DivisorClass) -> Option<usize> {
        self.negative_curves.iter().position(|x| x == c)
    }

    /// Irreducible classes known to the model: (-1)-curves and degree-8 rulings.
    pub fn is_known_irreducible(&self, c: &DivisorClass) -> bool {
        self.mori_generators().any(|x| x == c)
    }

    pub(crate) fn pair_generator(&self, d: &[Rational], i: usize) -> Rational {
        linalg::dot(d, &self.duals[i])
    }

    pub(crate) fn neg_gram(&self) -> &[Vec<Rational>] {
        &self.neg_gram
    }

    pub(crate) fn pair_raw(&self, a: &[Rational], b: &[Rational]) -> Rational {
        self.form.pair_raw(a, b)
    }
}

fn names_with(prefix: &[&str], exceptional: &[String]) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain(exceptional.iter().cloned())
        .collect()
}

fn default_exceptional(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

/// P² blown up in `n` general points, basis `(l, e1, …, en)`.
pub fn build_blowup_plane(n: usize) -> Result<SurfaceModel> {
    build_blowup_plane_named(&default_exceptional(n))
}

/// As [`build_blowup_plane`] with caller-chosen exceptional symbols.
pub fn build_blowup_plane_named(exceptional: &[String]) -> Result<SurfaceModel> {
    let n = exceptional.len();
    if !(1..=7).contains(&n) {
        return Err(Error::UnsupportedModel(format!(
            "plane blowup needs 1..=7 points, got {n}"
        )));
    }
    let basis = Basis::new(names_with(&["l"], exceptional))?;
    let gram = diagonal(&basis, |i| if i == 0 { 1 } else { -1 });
    let form = IntersectionForm::new(&basis, gram)?;
    let mut k = vec![Rational::ONE; n + 1];
    k[0] = Rational::from_integer(-3);
    let canonical = DivisorClass::new(&basis, k)?;
    SurfaceModel::from_form(form, canonical)
}

/// P¹×P¹ blown up in `k` general points, basis `(l1, l2, e1, …, ek)`.
pub fn build_blowup_quadric(k: usize) -> Result<SurfaceModel> {
    build_blowup_quadric_named(&default_exceptional(k))
}

pub fn build_blowup_quadric_named(exceptional: &[String]) -> Result<SurfaceModel> {
    let k = exceptional.len();
    if k > 6 {
        return Err(Error::UnsupportedModel(format!(
            "quadric blowup needs 0..=6 points, got {k}"
        )));
    }
    let basis = Basis::new(names_with(&["l1", "l2"], exceptional))?;
    let mut gram = diagonal(&basis, |i| if i < 2 { 0 } else { -1 });
    gram[0][1] = Rational::ONE;
    gram[1][0] = Rational::ONE;
    let form = IntersectionForm::new(&basis, gram)?;
    let mut kc = vec![Rational::ONE; k + 2];
    kc[0] = Rational::from_integer(-2);
    kc[1] = Rational::from_integer(-2);
    let canonical = DivisorClass::new(&basis, kc)?;
    SurfaceModel::from_form(form, canonical)
}

fn diagonal(basis: &Basis, f: impl Fn(usize) -> i64) -> Vec<Vec<Rational>> {
    let n = basis.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::from_integer(f(i))
                    } else {
                        Rational::ZERO
                    }
                })
                .collect()
        })
        .collect()
}

/// Positions of the distinguished basis elements.
enum Shape {
    Plane { line: usize, points: Vec<usize> },
    Quadric { rulings: [usize; 2], points: Vec<usize> },
}

impl Shape {
    fn kind(&self) -> ModelKind {
        match self {
            Shape::Plane { points, .. } => ModelKind::Plane { n: points.len() },
            Shape::Quadric { points, .. } => ModelKind::Quadric { k: points.len() },
        }
    }
}

fn recognise(form: &IntersectionForm, k: &DivisorClass) -> Result<Shape> {
    form.basis().ensure_same(k.basis())?;
    let g = form.gram();
    let n = g.len();
    let int = |x: &Rational| -> Option<i64> {
        if x.is_integer() {
            x.numer().try_into().ok()
        } else {
            None
        }
    };
    let unsupported = |why: &str| Error::UnsupportedModel(why.to_string());
    let diag: Vec<i64> = (0..n)
        .map(|i| int(&g[i][i]).ok_or_else(|| unsupported("non-integral gram")))
        .collect::<Result<_>>()?;
    let points: Vec<usize> = (0..n).filter(|&i| diag[i] == -1).collect();
    let others: Vec<usize> = (0..n).filter(|&i| diag[i] != -1).collect();
    let off_ok = |allowed: &[(usize, usize)]| {
        (0..n).all(|i| {
            (0..n).all(|j| {
                i == j
                    || allowed.contains(&(i, j))
                    || allowed.contains(&(j, i))
                    || g[i][j].is_zero()
            })
        })
    };
    let kv = k.coeffs();
    let points_ok = points.iter().all(|&i| kv[i] == Rational::ONE);
    let shape = match others.as_slice() {
        [h] if diag[*h] == 1 && off_ok(&[]) => {
            if kv[*h] != Rational::from_integer(-3) || !points_ok {
                return Err(unsupported("canonical class is not -3l + sum e_i"));
            }
            Shape::Plane {
                line: *h,
                points,
            }
        }
        [a, b] if diag[*a] == 0 && diag[*b] == 0 && g[*a][*b] == Rational::ONE && off_ok(&[(*a, *b)]) => {
            let m2 = Rational::from_integer(-2);
            if kv[*a] != m2 || kv[*b] != m2 || !points_ok {
                return Err(unsupported("canonical class is not -2l1 - 2l2 + sum e_i"));
            }
            Shape::Quadric {
                rulings: [*a, *b],
                points,
            }
        }
        _ => return Err(unsupported("lattice is neither a plane nor a quadric blowup")),
    };
    let degree = match &shape {
        Shape::Plane { points, .. } => 9 - points.len() as i64,
        Shape::Quadric { points, .. } => 8 - points.len() as i64,
    };
    if !(2..=8).contains(&degree) {
        return Err(unsupported(&format!("degree {degree} is outside 2..=8")));
    }
    if let Shape::Plane { points, .. } = &shape {
        if points.is_empty() {
            return Err(unsupported("P² itself has no (-1)-curves"));
        }
    }
    Ok(shape)
}

/// All (-1)-curves of a del Pezzo lattice of degree 2..=8 with general points.
pub fn enumerate_negative_curves(form: &IntersectionForm, k: &DivisorClass) -> Result<Vec<DivisorClass>> {
    let shape = recognise(form, k)?;
    Ok(enumerate_with_shape(form, &shape))
}

/// Integer vectors `m` of length `len` with `Σm = sum`, `Σm² = sq`, `lo ≤ m_i ≤ hi`,
/// emitted in lexicographic order.
fn multiplicity_vectors(len: usize, sum: i64, sq: i64, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    fn rec(
        left: usize,
        sum: i64,
        sq: i64,
        lo: i64,
        hi: i64,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if left == 0 {
            if sum == 0 && sq == 0 {
                out.push(cur.clone());
            }
            return;
        }
        // Cauchy–Schwarz on the remaining entries: sum² ≤ left · sq
        if sq < 0 || sum * sum > left as i64 * sq {
            return;
        }
        for m in lo..=hi {
            if m * m > sq {
                continue;
            }
            cur.push(m);
            rec(left - 1, sum - m, sq - m * m, lo, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, sum, sq, lo, hi, &mut Vec::new(), &mut out);
    out
}

fn enumerate_with_shape(form: &IntersectionForm, shape: &Shape) -> Vec<DivisorClass> {
    let basis = form.basis();
    let n = basis.len();
    let mut out = Vec::new();
    let mut push = |entries: &[(usize, i64)]| {
        let mut v = vec![Rational::ZERO; n];
        for &(i, c) in entries {
            v[i] = Rational::from_integer(c);
        }
        out.push(DivisorClass::new(basis, v).expect("length matches"));
    };
    match shape {
        Shape::Plane { line, points } => {
            let r = points.len() as i64;
            for &p in points {
                push(&[(p, 1)]);
            }
            // C = d l - Σ m_i e_i with d² - Σm² = -1 and 3d - Σm = 1; Cauchy–Schwarz
            // (3d - 1)² ≤ r (d² + 1) bounds d.
            let dmax = (1..).take_while(|&d: &i64| (3 * d - 1).pow(2) <= r * (d * d + 1)).last();
            for d in 1..=dmax.unwrap_or(0) {
                let sq = d * d + 1;
                let hi = (sq as f64).sqrt() as i64;
                for m in multiplicity_vectors(points.len(), 3 * d - 1, sq, 0, hi) {
                    let mut entries = vec![(*line, d)];
                    entries.extend(points.iter().zip(&m).map(|(&p, &mi)| (p, -mi)));
                    push(&entries);
                }
            }
        }
        Shape::Quadric { rulings, points } => {
            let r = points.len() as i64;
            for &p in points {
                push(&[(p, 1)]);
            }
            // C = a l1 + b l2 - Σ m_i e_i, 2ab - Σm² = -1, 2(a + b) - Σm = 1 and
            // (2s - 1)² ≤ r (2ab + 1) ≤ r (s²/2 + 1) with s = a + b.
            let smax = (1..)
                .take_while(|&s: &i64| 2 * (2 * s - 1).pow(2) <= r * (s * s + 2))
                .last();
            for s in 1..=smax.unwrap_or(0) {
                for a in 0..=s {
                    let b = s - a;
                    let sq = 2 * a * b + 1;
                    let hi = (sq as f64).sqrt() as i64;
                    for m in multiplicity_vectors(points.len(), 2 * s - 1, sq, 0, hi) {
                        let mut entries = vec![(rulings[0], a), (rulings[1], b)];
                        entries.extend(points.iter().zip(&m).map(|(&p, &mi)| (p, -mi)));
                        push(&entries);
                    }
                }
            }
        }
    }
    out
}

fn extra_generators(form: &IntersectionForm, shape: &Shape) -> Vec<DivisorClass> {
    let basis = form.basis();
    let class = |entries: &[(usize, i64)]| {
        let mut v = vec![Rational::ZERO; basis.len()];
        for &(i, c) in entries {
            v[i] = Rational::from_integer(c);
        }
        DivisorClass::new(basis, v).expect("length matches")
    };
    match shape {
        Shape::Plane { line, points } if points.len() == 1 => vec![class(&[(*line, 1), (points[0], -1)])],
        Shape::Quadric { rulings, points } if points.is_empty() => {
            vec![class(&[(rulings[0], 1)]), class(&[(rulings[1], 1)])]
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(model: &SurfaceModel) -> Vec<String> {
        model.negative_curves().iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn plane_counts() {
        let counts: Vec<usize> = (1..=7)
            .map(|n| build_blowup_plane(n).unwrap().negative_curves().len())
            .collect();
        assert_eq!(counts, vec![1, 3, 6, 10, 16, 27, 56]);
        assert_eq!(build_blowup_plane(5).unwrap().degree(), 4);
        assert_eq!(build_blowup_plane(1).unwrap().degree(), 8);
        assert_eq!(build_blowup_plane(1).unwrap().negative_curves()[0].to_string(), "e1");
    }

    #[test]
    fn quadric_counts() {
        let counts: Vec<usize> = (0..=6)
            .map(|k| build_blowup_quadric(k).unwrap().negative_curves().len())
            .collect();
        assert_eq!(counts, vec![0, 3, 6, 10, 16, 27, 56]);
        assert_eq!(build_blowup_quadric(4).unwrap().degree(), 4);
        assert_eq!(build_blowup_quadric(6).unwrap().degree(), 2);
    }

    #[test]
    fn cubic_surface_contains_conics_through_five() {
        let m = build_blowup_plane(6).unwrap();
        let s = strings(&m);
        assert!(s.contains(&"2l - e1 - e2 - e3 - e4 - e5".to_string()));
        assert!(s.contains(&"2l - e2 - e3 - e4 - e5 - e6".to_string()));
        assert_eq!(s.iter().filter(|c| c.starts_with("2l")).count(), 6);
    }

    #[test]
    fn degree_six_quadric_list() {
        let m = build_blowup_quadric(2).unwrap();
        let mut s = strings(&m);
        s.sort();
        let mut want = vec!["e1", "e2", "l1 - e1", "l1 - e2", "l2 - e1", "l2 - e2"];
        want.sort();
        assert_eq!(s, want);
    }

    #[test]
    fn degree_two_families() {
        let m = build_blowup_quadric(6).unwrap();
        let s = strings(&m);
        // κ-type classes l1 + 2l2 - 2e_j - (all others)
        assert_eq!(s.iter().filter(|c| c.starts_with("l1 + 2l2")).count(), 6);
        assert_eq!(s.iter().filter(|c| c.starts_with("2l1 + l2")).count(), 6);
        assert_eq!(s.iter().filter(|c| c.starts_with("2l1 + 2l2")).count(), 6);
        assert_eq!(s.iter().filter(|c| c.starts_with("l1 + l2")).count(), 20);
    }

    #[test]
    fn out_of_range_is_unsupported() {
        assert_eq!(build_blowup_plane(8).unwrap_err().code(), "unsupported-model");
        assert_eq!(build_blowup_plane(0).unwrap_err().code(), "unsupported-model");
        assert_eq!(build_blowup_quadric(7).unwrap_err().code(), "unsupported-model");
    }

    #[test]
    fn rejects_foreign_lattice() {
        let b = Basis::new(["a", "b"]).unwrap();
        let r = |n| Rational::from_integer(n);
        let form = IntersectionForm::new(&b, vec![vec![r(2), r(0)], vec![r(0), r(-1)]]).unwrap();
        let k = DivisorClass::from_ints(&b, &[-3, 1]).unwrap();
        assert_eq!(enumerate_negative_curves(&form, &k).unwrap_err().code(), "unsupported-model");
    }

    #[test]
    fn degree_eight_extra_generators() {
        assert_eq!(build_blowup_plane(1).unwrap().extra_generators()[0].to_string(), "l - e1");
        assert_eq!(build_blowup_quadric(0).unwrap().extra_generators().len(), 2);
        assert!(build_blowup_plane(2).unwrap().extra_generators().is_empty());
    }
}
