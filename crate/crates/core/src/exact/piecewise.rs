use serde::Serialize;

use super::{Poly, Rational};
use crate::error::{Error, Result};

/// Polynomial pieces on consecutive closed intervals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiecewisePoly {
    breakpoints: Vec<Rational>,
    pieces: Vec<Poly>,
    continuous: bool,
}

impl PiecewisePoly {
    /// Validates the layout; when `continuous` is set, adjacent pieces must agree at
    /// every interior breakpoint.
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Poly>, continuous: bool) -> Result<Self> {
        if breakpoints.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::InvalidPiecewise(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPiecewise(format!(
                "breakpoints not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        let pw = PiecewisePoly {
            breakpoints,
            pieces,
            continuous,
        };
        if continuous {
            if let Some(at) = pw.first_jump() {
                return Err(Error::InvalidPiecewise(format!("discontinuous at {at}")));
            }
        }
        Ok(pw)
    }

    pub fn single(lo: Rational, hi: Rational, p: Poly) -> Result<Self> {
        PiecewisePoly::new(vec![lo, hi], vec![p], true)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    pub fn intervals(&self) -> impl Iterator<Item = (&Rational, &Rational, &Poly)> {
        self.breakpoints
            .windows(2)
            .zip(&self.pieces)
            .map(|(w, p)| (&w[0], &w[1], p))
    }

    /// Interior breakpoint where the two adjacent pieces disagree, if any.
    pub fn first_jump(&self) -> Option<Rational> {
        (1..self.pieces.len())
            .map(|i| &self.breakpoints[i])
            .zip(self.pieces.windows(2))
            .find(|(x, w)| w[0].eval(x) != w[1].eval(x))
            .map(|(x, _)| x.clone())
    }

    /// Evaluates with intervals closed on the left; the last interval is closed.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let lo = self.breakpoints.first()?;
        let hi = self.breakpoints.last()?;
        if x < lo || x > hi {
            return None;
        }
        let idx = self.breakpoints[1..]
            .iter()
            .position(|b| x < b)
            .unwrap_or(self.pieces.len() - 1);
        Some(self.pieces[idx].eval(x))
    }

    pub fn integrate(&self) -> Rational {
        self.intervals()
            .map(|(a, b, p)| p.integrate(a, b).expect("breakpoints increasing"))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn family_two_hypersurface_integral() {
        let pw = PiecewisePoly::new(
            vec![r(0), r(1), r(2), r(3)],
            vec![
                Poly::from_ints(&[22, 0, 0, -2]),
                &Poly::from_ints(&[1, 1]) * &Poly::from_ints(&[19, -10, 1]),
                &Poly::from_ints(&[-9, 3]) * &Poly::from_ints(&[-7, 2]),
            ],
            true,
        )
        .unwrap();
        assert_eq!(pw.integrate(), q(161, 4));
    }

    #[test]
    fn family_three_integral() {
        let sq = &Poly::from_ints(&[-3, 1]) * &Poly::from_ints(&[-3, 1]);
        let pw = PiecewisePoly::new(
            vec![r(0), r(1), r(2), r(3)],
            vec![
                Poly::from_ints(&[22, 0, 0, -2]),
                Poly::from_ints(&[20, 6, -6]),
                &Poly::from_ints(&[12, -2]) * &sq,
            ],
            true,
        )
        .unwrap();
        assert_eq!(pw.integrate(), r(39));
    }

    #[test]
    fn zero_piece() {
        let pw = PiecewisePoly::single(r(0), r(1), Poly::zero()).unwrap();
        assert_eq!(pw.integrate(), Rational::ZERO);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(PiecewisePoly::new(vec![r(0), r(0)], vec![Poly::zero()], false).is_err());
        assert!(PiecewisePoly::new(vec![r(0), r(1)], vec![], false).is_err());
        let jump = vec![Poly::from_ints(&[0]), Poly::from_ints(&[1])];
        assert!(PiecewisePoly::new(vec![r(0), r(1), r(2)], jump.clone(), true).is_err());
        let pw = PiecewisePoly::new(vec![r(0), r(1), r(2)], jump, false).unwrap();
        assert_eq!(pw.first_jump(), Some(r(1)));
        assert_eq!(pw.eval(&r(1)), Some(r(1)));
        assert_eq!(pw.eval(&r(2)), Some(r(1)));
        assert_eq!(pw.eval(&r(3)), None);
    }
}
