//! Named bases, divisor classes and surface intersection forms.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::{linalg, Rational};

static NEXT_BASIS_ID: AtomicU64 = AtomicU64::new(1);

/// Ordered list of distinct symbols. Two bases are equal only when one was cloned
/// from the other; equal names on unrelated lattices do not make them compatible.
#[derive(Clone)]
pub struct Basis(Arc<BasisInner>);

struct BasisInner {
    id: u64,
    names: Vec<String>,
}

impl Basis {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Basis> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::UnsupportedModel("empty basis symbol".into()));
            }
            if names[..i].contains(n) {
                return Err(Error::UnsupportedModel(format!("duplicate basis symbol {n}")));
            }
        }
        Ok(Basis(Arc::new(BasisInner {
            id: NEXT_BASIS_ID.fetch_add(1, Ordering::Relaxed),
            names,
        })))
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }

    pub fn same_as(&self, other: &Basis) -> bool {
        self.0.id == other.0.id
    }

    pub(crate) fn ensure_same(&self, other: &Basis) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                expected: self.0.names.join(", "),
                found: other.0.names.join(", "),
            })
        }
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Basis) -> bool {
        self.same_as(other)
    }
}

impl Eq for Basis {}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Basis#{}{:?}", self.0.id, self.0.names)
    }
}

/// Rational coefficient vector over a basis.
#[derive(Clone, PartialEq, Eq)]
pub struct DivisorClass {
    basis: Basis,
    coeffs: Vec<Rational>,
}

impl DivisorClass {
    pub fn new(basis: &Basis, coeffs: Vec<Rational>) -> Result<DivisorClass> {
        if coeffs.len() != basis.len() {
            return Err(Error::BasisMismatch {
                expected: basis.names().join(", "),
                found: format!("{} coefficients", coeffs.len()),
            });
        }
        Ok(DivisorClass {
            basis: basis.clone(),
            coeffs,
        })
    }

    pub fn from_ints(basis: &Basis, coeffs: &[i64]) -> Result<DivisorClass> {
        DivisorClass::new(basis, coeffs.iter().map(|&c| Rational::from_integer(c)).collect())
    }

    pub fn zero(basis: &Basis) -> DivisorClass {
        DivisorClass {
            basis: basis.clone(),
            coeffs: vec![Rational::ZERO; basis.len()],
        }
    }

    /// The basis element called `name`.
    pub fn generator(basis: &Basis, name: &str) -> Result<DivisorClass> {
        let i = basis.index_of(name).ok_or_else(|| Error::UnresolvedSymbol {
            symbol: name.to_string(),
            context: format!("basis [{}]", basis.names().join(", ")),
        })?;
        let mut c = DivisorClass::zero(basis);
        c.coeffs[i] = Rational::ONE;
        Ok(c)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn coeff(&self, name: &str) -> Option<&Rational> {
        self.basis.index_of(name).map(|i| &self.coeffs[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(Rational::is_integer)
    }

    pub fn scale(&self, k: &Rational) -> DivisorClass {
        DivisorClass {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.basis.ensure_same(&other.basis)?;
        Ok(DivisorClass {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.basis.ensure_same(&other.basis)?;
        Ok(DivisorClass {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> DivisorClass {
        self.scale(&-Rational::ONE)
    }

    /// `Some(k)` when `self = k · other` and `other` is nonzero.
    pub fn ratio_to(&self, other: &DivisorClass) -> Option<Rational> {
        if !self.basis.same_as(&other.basis) {
            return None;
        }
        let pivot = other.coeffs.iter().position(|c| !c.is_zero())?;
        let k = &self.coeffs[pivot] / &other.coeffs[pivot];
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| *a == &k * b)
            .then_some(k)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(self.basis.names()) {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            match (first, c.is_negative()) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            if mag == Rational::ONE {
                write!(f, "{name}")?;
            } else if mag.is_integer() {
                write!(f, "{mag}{name}")?;
            } else {
                write!(f, "({mag}){name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// `Σ c_i D_i`. All terms must live on `basis`; the empty sum is the zero class.
pub fn linear_combine(basis: &Basis, terms: &[(Rational, &DivisorClass)]) -> Result<DivisorClass> {
    let mut acc = vec![Rational::ZERO; basis.len()];
    for (k, d) in terms {
        basis.ensure_same(d.basis())?;
        for (a, c) in acc.iter_mut().zip(d.coeffs()) {
            if !c.is_zero() {
                *a += k * c;
            }
        }
    }
    DivisorClass::new(basis, acc)
}

/// Symmetric bilinear form on a surface Picard lattice.
#[derive(Clone, Debug)]
pub struct IntersectionForm {
    basis: Basis,
    gram: Vec<Vec<Rational>>,
}

impl IntersectionForm {
    pub fn new(basis: &Basis, gram: Vec<Vec<Rational>>) -> Result<IntersectionForm> {
        let n = basis.len();
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(Error::UnsupportedModel(format!("gram matrix is not {n}x{n}")));
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::UnsupportedModel(format!(
                        "gram matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(IntersectionForm {
            basis: basis.clone(),
            gram,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn gram(&self) -> &[Vec<Rational>] {
        &self.gram
    }

    pub fn pair(&self, d: &DivisorClass, c: &DivisorClass) -> Result<Rational> {
        self.basis.ensure_same(d.basis())?;
        self.basis.ensure_same(c.basis())?;
        Ok(self.pair_raw(d.coeffs(), c.coeffs()))
    }

    pub fn self_pair(&self, d: &DivisorClass) -> Result<Rational> {
        self.pair(d, d)
    }

    pub(crate) fn pair_raw(&self, d: &[Rational], c: &[Rational]) -> Rational {
        linalg::dot(d, &linalg::mat_vec(&self.gram, c))
    }

    /// `G · c`, so that `pair(d, c) = d · dual(c)`.
    pub(crate) fn dual(&self, c: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.gram, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn plane(n: usize) -> (Basis, IntersectionForm) {
        let mut names = vec!["l".to_string()];
        names.extend((1..=n).map(|i| format!("e{i}")));
        let b = Basis::new(names).unwrap();
        let gram = (0..=n)
            .map(|i| {
                (0..=n)
                    .map(|j| match (i == j, i) {
                        (false, _) => Rational::ZERO,
                        (true, 0) => Rational::ONE,
                        (true, _) => -Rational::ONE,
                    })
                    .collect()
            })
            .collect();
        let f = IntersectionForm::new(&b, gram).unwrap();
        (b, f)
    }

    #[test]
    fn canonical_square_of_cubic_surface() {
        let (b, f) = plane(6);
        let k = DivisorClass::from_ints(&b, &[-3, 1, 1, 1, 1, 1, 1]).unwrap();
        assert_eq!(f.self_pair(&k).unwrap(), q(3, 1));
        let l12 = DivisorClass::from_ints(&b, &[1, -1, -1, 0, 0, 0, 0]).unwrap();
        assert_eq!(f.self_pair(&l12).unwrap(), q(-1, 1));
    }

    #[test]
    fn linear_combine_examples() {
        let (b, _) = plane(6);
        let g = |n: &str| DivisorClass::generator(&b, n).unwrap();
        let (l, e1, e2) = (g("l"), g("e1"), g("e2"));
        let one = Rational::ONE;
        let c = linear_combine(&b, &[(one.clone(), &l), (-&one, &e1), (-&one, &e2)]).unwrap();
        assert_eq!(c.to_string(), "l - e1 - e2");
        assert!(linear_combine(&b, &[]).unwrap().is_zero());
    }

    #[test]
    fn basis_identity_is_checked() {
        let (b1, f1) = plane(2);
        let (b2, _) = plane(2);
        assert_eq!(b1.names(), b2.names());
        let d = DivisorClass::generator(&b2, "l").unwrap();
        let err = f1.pair(&d, &d).unwrap_err();
        assert_eq!(err.code(), "basis-mismatch");
        let e = DivisorClass::generator(&b1, "e1").unwrap();
        assert!(e.add(&d).is_err());
        assert!(linear_combine(&b1, &[(Rational::ONE, &d)]).is_err());
    }

    #[test]
    fn ratio_detection() {
        let (b, _) = plane(2);
        let a = DivisorClass::from_ints(&b, &[2, -2, 0]).unwrap();
        let c = DivisorClass::from_ints(&b, &[1, -1, 0]).unwrap();
        assert_eq!(a.ratio_to(&c), Some(q(2, 1)));
        let d = DivisorClass::from_ints(&b, &[1, 0, 0]).unwrap();
        assert_eq!(a.ratio_to(&d), None);
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(Basis::new(["a", "a"]).is_err());
    }
}
