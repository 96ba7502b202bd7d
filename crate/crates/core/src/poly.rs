//! Bivariate integer polynomials in `t` (cohomological degree) and `s` (weight).
//!
//! Poincaré polynomials, their first differences and the ratio polynomials of
//! shifted stability all live here. Exponents are non-negative; coefficients
//! are exact `i64` (Betti numbers at desk scale are far below overflow).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// `Σ c_{i,j} t^i s^j`, stored sparsely with zero coefficients absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), i64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0, 1)
    }

    /// `c · t^i s^j`
    pub fn monomial(t: u32, s: u32, c: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(t, s, c);
        p
    }

    /// Single-variable polynomial from coefficients indexed by `t`-degree.
    pub fn from_t_coeffs(coeffs: &[i64]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(i as u32, 0, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), i64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for ((t, s), c) in terms {
            p.add_term(t, s, c);
        }
        p
    }

    pub fn add_term(&mut self, t: u32, s: u32, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry((t, s)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(t, s));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, t: u32, s: u32) -> i64 {
        self.terms.get(&(t, s)).copied().unwrap_or(0)
    }

    /// Terms in ascending `(t, s)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest `t`-degree with a non-zero coefficient.
    pub fn top_t_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(t, _)| t).max()
    }

    pub fn min_t_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(t, _)| t).min()
    }

    pub fn max_s_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, s)| s).max()
    }

    /// Multiply by `t^shift`.
    pub fn shift_t(&self, shift: u32) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(t, s), &c)| ((t + shift, s), c)).collect(),
        }
    }

    /// Divide by `t^shift`, if every term is divisible.
    pub fn unshift_t(&self, shift: u32) -> Option<Self> {
        let mut terms = BTreeMap::new();
        for (&(t, s), &c) in &self.terms {
            terms.insert((t.checked_sub(shift)?, s), c);
        }
        Some(Self { terms })
    }

    /// Keep only terms whose `t`-degree lies in `lo..=hi`.
    pub fn t_window(&self, lo: u32, hi: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(&(t, _), _)| t >= lo && t <= hi)
                .map(|(&k, &v)| (k, v))
                .collect(),
        }
    }

    /// The component of weight `s = j`, as a polynomial in `t` only.
    pub fn weight_component(&self, j: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(&(_, s), _)| s == j)
                .map(|(&(t, _), &c)| ((t, 0), c))
                .collect(),
        }
    }

    /// Evaluate at `s = 1`, giving the single-variable polynomial.
    pub fn at_s_one(&self) -> Self {
        let mut p = Self::zero();
        for (&(t, _), &c) in &self.terms {
            p.add_term(t, 0, c);
        }
        p
    }

    /// `P(t, s)` at integer points.
    pub fn eval(&self, t: i64, s: i64) -> i64 {
        self.terms.iter().map(|(&(i, j), &c)| c * t.pow(i) * s.pow(j)).sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = Self::zero();
        for (&(t1, s1), &c1) in &self.terms {
            for (&(t2, s2), &c2) in &other.terms {
                p.add_term(t1 + t2, s1 + s2, c1 * c2);
            }
        }
        p
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|&c| c >= 0)
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut p = self.clone();
        for (&(t, s), &c) in &rhs.terms {
            p.add_term(t, s, c);
        }
        p
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut p = self.clone();
        for (&(t, s), &c) in &rhs.terms {
            p.add_term(t, s, -c);
        }
        p
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
}

fn fmt_power(f: &mut fmt::Formatter<'_>, var: &str, e: u32) -> fmt::Result {
    match e {
        0 => Ok(()),
        1 => write!(f, "{var}"),
        _ => write!(f, "{var}^{e}"),
    }
}

/// Terms are printed by ascending weight, then ascending degree, e.g.
/// `1 + 2t^2 + 2st^7 + s^2t^14`.
impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(&(t, s), _)| (s, t));
        for (n, (&(t, s), &c)) in ordered.into_iter().enumerate() {
            let mag = c.unsigned_abs();
            if n == 0 {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag != 1 || (t == 0 && s == 0) {
                write!(f, "{mag}")?;
            }
            fmt_power(f, "s", s)?;
            fmt_power(f, "t", t)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_orders_by_weight_then_degree() {
        let p = Poly2::from_terms([((3, 1), 1), ((0, 0), 1), ((2, 0), 2), ((14, 2), -1)]);
        assert_eq!(p.to_string(), "1 + 2t^2 + st^3 - s^2t^14");
        assert_eq!(Poly2::zero().to_string(), "0");
    }

    #[test]
    fn shift_and_unshift() {
        let p = Poly2::from_terms([((2, 0), 1), ((5, 1), 3)]);
        assert_eq!(p.shift_t(2).unshift_t(2), Some(p.clone()));
        assert_eq!(p.unshift_t(3), None);
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Poly2::monomial(1, 1, 2);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn eval_and_s_one() {
        // 1 + s t^3 at t = -1, s = 1
        let p = Poly2::from_terms([((0, 0), 1), ((3, 1), 1)]);
        assert_eq!(p.eval(-1, 1), 0);
        assert_eq!(p.at_s_one(), Poly2::from_t_coeffs(&[1, 0, 0, 1]));
    }
}
