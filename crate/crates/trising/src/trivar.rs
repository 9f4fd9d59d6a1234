//! Truncated trivariate Laurent polynomials in the three Boltzmann weights,
//! graded and windowed by total degree.
//!
//! This is the scalar used when the spinor engine treats `z1, z2, z3` as
//! independent formal variables, so its output can be compared term by term
//! with the brute-force partition-function oracle. The window logic mirrors
//! the univariate series type: `prec` bounds the exactly-known total degree,
//! `val` the smallest total degree present.

use crate::scalar::GaussRat;
use std::collections::BTreeMap;
use std::fmt;

/// Monomial exponents `(e1, e2, e3)` of `z1^e1 z2^e2 z3^e3` (may be negative).
pub type TriExp = [i32; 3];

fn deg(e: &TriExp) -> i64 {
    e[0] as i64 + e[1] as i64 + e[2] as i64
}

/// Truncated trivariate Laurent polynomial.
#[derive(Clone, PartialEq, Eq)]
pub struct TriSeries {
    coeffs: BTreeMap<TriExp, GaussRat>,
    prec: i64,
    val: i64,
}

impl TriSeries {
    pub fn zero(prec: i64) -> Self {
        TriSeries {
            coeffs: BTreeMap::new(),
            prec,
            val: prec,
        }
    }

    pub fn one(prec: i64) -> Self {
        Self::monomial(GaussRat::one(), [0, 0, 0], prec)
    }

    pub fn constant(c: GaussRat, prec: i64) -> Self {
        Self::monomial(c, [0, 0, 0], prec)
    }

    pub fn monomial(c: GaussRat, e: TriExp, prec: i64) -> Self {
        let mut s = TriSeries::zero(prec);
        if !c.is_zero() && deg(&e) < prec {
            s.val = deg(&e);
            s.coeffs.insert(e, c);
        }
        s
    }

    /// The formal variable `z_j` (`j` in `0..3`).
    pub fn var(j: usize, prec: i64) -> Self {
        let mut e = [0i32; 3];
        e[j] = 1;
        Self::monomial(GaussRat::one(), e, prec)
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn is_zero_to_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: TriExp) -> GaussRat {
        self.coeffs.get(&e).cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TriExp, &GaussRat)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(|c| c.is_real())
    }

    fn recompute_val(&mut self) {
        self.val = self
            .coeffs
            .keys()
            .map(deg)
            .min()
            .unwrap_or(self.prec)
            .min(self.prec);
    }

    pub fn truncate(&self, new_prec: i64) -> Self {
        let p = new_prec.min(self.prec);
        let mut s = TriSeries {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(e, _)| deg(e) < p)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
            prec: p,
            val: 0,
        };
        s.recompute_val();
        s
    }

    pub fn neg(&self) -> Self {
        TriSeries {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
            prec: self.prec,
            val: self.val,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let mut coeffs: BTreeMap<TriExp, GaussRat> = self
            .coeffs
            .iter()
            .filter(|(e, _)| deg(e) < prec)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        for (e, c) in &other.coeffs {
            if deg(e) < prec {
                let entry = coeffs.entry(*e).or_insert_with(GaussRat::zero);
                *entry += c;
                if entry.is_zero() {
                    coeffs.remove(e);
                }
            }
        }
        let mut s = TriSeries { coeffs, prec, val: 0 };
        s.recompute_val();
        s
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = (self.prec + other.val).min(other.prec + self.val);
        let mut coeffs: BTreeMap<TriExp, GaussRat> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                if deg(ea) + deg(eb) >= prec {
                    continue;
                }
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                let entry = coeffs.entry(e).or_insert_with(GaussRat::zero);
                *entry += &(ca * cb);
                if entry.is_zero() {
                    coeffs.remove(&e);
                }
            }
        }
        let mut s = TriSeries { coeffs, prec, val: 0 };
        s.recompute_val();
        s
    }

    /// Inverse of a series whose lowest total-degree part is a single
    /// monomial (always the case for the spinor-chain entries we invert).
    pub fn inverse(&self) -> Option<Self> {
        let lead: Vec<(&TriExp, &GaussRat)> = self
            .coeffs
            .iter()
            .filter(|(e, _)| deg(e) == self.val)
            .collect();
        if lead.len() != 1 {
            return None;
        }
        let (e0, c0) = (*lead[0].0, lead[0].1.clone());
        // self = c0 z^e0 (1 + u), val(u) > 0; invert the unit by the
        // geometric series.
        let rel = self.prec - self.val;
        let shift_inv = [-e0[0], -e0[1], -e0[2]];
        let unit = self
            .mul(&TriSeries::monomial(c0.inv(), shift_inv, rel));
        let u = unit.sub(&TriSeries::one(rel));
        let mut acc = TriSeries::one(rel);
        let mut term = TriSeries::one(rel);
        if !u.is_zero_to_window() {
            let max_pow = if u.val() > 0 { rel / u.val() + 1 } else { 0 };
            for _ in 0..max_pow {
                term = term.mul(&u).neg();
                if term.is_zero_to_window() {
                    break;
                }
                acc = acc.add(&term);
            }
        }
        Some(acc.mul(&TriSeries::monomial(c0.inv(), shift_inv, rel)))
    }
}

impl fmt::Debug for TriSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TriSeries[prec={}, val={};", self.prec, self.val)?;
        for (e, c) in self.coeffs.iter().take(8) {
            write!(f, " {}·z^({},{},{})", c, e[0], e[1], e[2])?;
        }
        if self.coeffs.len() > 8 {
            write!(f, " … ({} terms)", self.coeffs.len())?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_and_window() {
        let prec = 6;
        let z1 = TriSeries::var(0, prec);
        let z2 = TriSeries::var(1, prec);
        let p = z1.mul(&z2);
        assert_eq!(p.val(), 2);
        assert_eq!(p.prec(), 7); // min(6+1, 6+1)
        assert_eq!(p.coeff([1, 1, 0]), GaussRat::one());
    }

    #[test]
    fn laurent_inverse() {
        let prec = 8;
        let z1 = TriSeries::var(0, prec);
        let z2sq = TriSeries::var(1, prec).mul(&TriSeries::var(1, prec));
        // f = z1 (1 - z2²); 1/f = z1^{-1} (1 + z2² + z2⁴ + …)
        let f = z1.sub(&z1.mul(&z2sq));
        let inv = f.inverse().unwrap();
        let prod = f.mul(&inv);
        assert!(prod.sub(&TriSeries::one(prod.prec())).is_zero_to_window());
        assert_eq!(inv.coeff([-1, 2, 0]), GaussRat::one());
    }
}
