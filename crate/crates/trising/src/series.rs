//! Truncated Laurent series in `p^(1/4)` with exact Gaussian-rational
//! coefficients and a tracked precision window.
//!
//! A [`Series`] stores only nonzero coefficients, keyed by the exponent in
//! quarter units (so `p^(3/2)` lives at key 6). Two bounds accompany the map:
//!
//! * `prec` — every term with exponent `< prec` is exactly known;
//! * `val`  — a lower bound on the smallest nonzero exponent (equal to `prec`
//!   for a series that is zero over its whole window).
//!
//! Multiplication propagates windows by
//! `prec_out = min(prec_a + val_b, prec_b + val_a)`, which preserves the
//! *relative* window `prec - val`; long factor chains therefore keep exactly
//! the accuracy their inputs carry.

use crate::error::{Error, Result};
use crate::scalar::{rat_sqrt, GaussRat, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Exponent on the quarter-integer grid, in units of `p^(1/4)`.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct Exp(pub i64);

impl Exp {
    /// Integer exponent `p^n`.
    pub fn int(n: i64) -> Exp {
        Exp(4 * n)
    }
    /// Half-integer exponent `p^(n/2)`.
    pub fn half(n: i64) -> Exp {
        Exp(2 * n)
    }
    pub fn quarter(n: i64) -> Exp {
        Exp(n)
    }
    /// Integer part check.
    pub fn is_integer(self) -> bool {
        self.0 % 4 == 0
    }
    pub fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.0 / 4)
        } else {
            None
        }
    }
}

/// Truncated Laurent series over Gaussian rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    coeffs: BTreeMap<i64, GaussRat>,
    prec: i64,
    val: i64,
}

impl Series {
    /// The zero series known exactly below `prec`.
    pub fn zero(prec: Exp) -> Series {
        Series {
            coeffs: BTreeMap::new(),
            prec: prec.0,
            val: prec.0,
        }
    }

    /// The constant one.
    pub fn one(prec: Exp) -> Series {
        Series::monomial(GaussRat::one(), Exp(0), prec)
    }

    /// A constant series.
    pub fn constant(c: GaussRat, prec: Exp) -> Series {
        Series::monomial(c, Exp(0), prec)
    }

    /// `c · p^(e/4)`.
    pub fn monomial(c: GaussRat, e: Exp, prec: Exp) -> Series {
        let mut s = Series::zero(prec);
        if !c.is_zero() && e.0 < prec.0 {
            s.coeffs.insert(e.0, c);
            s.val = e.0;
        }
        s
    }

    /// Assemble from `(coefficient, exponent)` terms.
    pub fn from_terms(terms: &[(GaussRat, Exp)], prec: Exp) -> Series {
        let mut s = Series::zero(prec);
        for (c, e) in terms {
            if e.0 < prec.0 && !c.is_zero() {
                let entry = s.coeffs.entry(e.0).or_insert_with(GaussRat::zero);
                *entry += c;
            }
        }
        s.coeffs.retain(|_, c| !c.is_zero());
        s.recompute_val();
        s
    }

    fn recompute_val(&mut self) {
        self.val = self
            .coeffs
            .keys()
            .next()
            .copied()
            .unwrap_or(self.prec)
            .min(self.prec);
    }

    /// Precision bound: all terms with exponent `< prec` are exact.
    pub fn prec(&self) -> Exp {
        Exp(self.prec)
    }

    /// Lower bound on the smallest nonzero exponent.
    pub fn val(&self) -> Exp {
        Exp(self.val)
    }

    /// `prec - val`, the information actually carried.
    pub fn rel_window(&self) -> i64 {
        self.prec - self.val
    }

    pub fn is_zero_to_window(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient at `e`; an error if `e` falls outside the known window.
    pub fn coeff(&self, e: Exp) -> Result<GaussRat> {
        if e.0 >= self.prec {
            return Err(Error::PrecisionExhausted(e.0));
        }
        Ok(self.coeffs.get(&e.0).cloned().unwrap_or_else(GaussRat::zero))
    }

    /// Coefficient at `e`, treating unknown territory as zero. For display only.
    pub fn coeff_or_zero(&self, e: Exp) -> GaussRat {
        self.coeffs.get(&e.0).cloned().unwrap_or_else(GaussRat::zero)
    }

    /// Iterate stored `(exponent, coefficient)` pairs in increasing order.
    pub fn terms(&self) -> impl Iterator<Item = (Exp, &GaussRat)> {
        self.coeffs.iter().map(|(e, c)| (Exp(*e), c))
    }

    /// Leading `(exponent, coefficient)`, if any term is known.
    pub fn leading(&self) -> Option<(Exp, &GaussRat)> {
        self.coeffs.iter().next().map(|(e, c)| (Exp(*e), c))
    }

    /// True when every stored coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.coeffs.values().all(|c| c.is_real())
    }

    /// True when every stored coefficient is an integer (and real).
    pub fn is_integral(&self) -> bool {
        self.coeffs
            .values()
            .all(|c| c.is_real() && c.re.denom().is_one())
    }

    /// Shrink the window to `new_prec` (never extends knowledge).
    pub fn truncate(&self, new_prec: Exp) -> Series {
        let p = new_prec.0.min(self.prec);
        let mut s = Series {
            coeffs: self.coeffs.range(..p).map(|(e, c)| (*e, c.clone())).collect(),
            prec: p,
            val: 0,
        };
        s.val = self.val.min(p);
        if s.coeffs.is_empty() {
            s.val = p;
        }
        s
    }

    /// Multiply by the monomial `p^(e/4)` (exact shift).
    pub fn shift(&self, e: Exp) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|(k, c)| (k + e.0, c.clone())).collect(),
            prec: self.prec + e.0,
            val: self.val + e.0,
        }
    }

    /// Scale every coefficient by `c`.
    pub fn scale(&self, c: &GaussRat) -> Series {
        if c.is_zero() {
            return Series::zero(Exp(self.prec));
        }
        Series {
            coeffs: self.coeffs.iter().map(|(e, x)| (*e, x * c)).collect(),
            prec: self.prec,
            val: self.val,
        }
    }

    pub fn scale_rat(&self, r: &Rat) -> Series {
        self.scale(&GaussRat::from_rat(r.clone()))
    }

    pub fn neg(&self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
            prec: self.prec,
            val: self.val,
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let prec = self.prec.min(other.prec);
        let mut coeffs: BTreeMap<i64, GaussRat> = self
            .coeffs
            .range(..prec)
            .map(|(e, c)| (*e, c.clone()))
            .collect();
        for (e, c) in other.coeffs.range(..prec) {
            let entry = coeffs.entry(*e).or_insert_with(GaussRat::zero);
            *entry += c;
            if entry.is_zero() {
                coeffs.remove(e);
            }
        }
        let mut s = Series { coeffs, prec, val: 0 };
        s.recompute_val();
        s
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Series) -> Series {
        let val = self.val + other.val;
        let prec = (self.prec + other.val).min(other.prec + self.val);
        let len = prec - val;
        if len <= 0 || self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Series {
                coeffs: BTreeMap::new(),
                prec,
                val: prec,
            };
        }
        let mut dense: Vec<GaussRat> = vec![GaussRat::zero(); len as usize];
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                let e = ea + eb - val;
                if e < len {
                    dense[e as usize] += &(ca * cb);
                } else {
                    break;
                }
            }
        }
        Series::from_dense(dense, val, prec)
    }

    fn from_dense(dense: Vec<GaussRat>, val: i64, prec: i64) -> Series {
        let coeffs: BTreeMap<i64, GaussRat> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (val + i as i64, c))
            .collect();
        let mut s = Series { coeffs, prec, val: 0 };
        s.recompute_val();
        s
    }

    fn to_dense(&self, from: i64, len: i64) -> Vec<GaussRat> {
        let mut dense = vec![GaussRat::zero(); len.max(0) as usize];
        for (e, c) in &self.coeffs {
            let i = e - from;
            if i >= 0 && i < len {
                dense[i as usize] = c.clone();
            }
        }
        dense
    }

    /// Quotient `self / other`.
    pub fn div(&self, other: &Series) -> Result<Series> {
        if other.coeffs.is_empty() {
            return Err(Error::ZeroDivisor);
        }
        let bval = other.val;
        let val = self.val - bval;
        let prec = (self.prec - bval).min(other.prec + self.val - 2 * bval);
        let len = prec - val;
        if self.coeffs.is_empty() {
            return Ok(Series {
                coeffs: BTreeMap::new(),
                prec,
                val: prec,
            });
        }
        if len <= 0 {
            return Err(Error::PrecisionExhausted(prec));
        }
        let a = self.to_dense(self.val, len);
        let b = other.to_dense(bval, len);
        let b0inv = b[0].inv();
        let mut q: Vec<GaussRat> = Vec::with_capacity(len as usize);
        for i in 0..len as usize {
            let mut acc = a[i].clone();
            for j in 1..=i {
                if !b[j].is_zero() && !q[i - j].is_zero() {
                    acc -= &(&b[j] * &q[i - j]);
                }
            }
            q.push(&acc * &b0inv);
        }
        Ok(Series::from_dense(q, val, prec))
    }

    /// Multiplicative inverse.
    pub fn inverse(&self) -> Result<Series> {
        Series::one(Exp(self.prec - self.val)).div(&self.truncate(Exp(self.prec)))
    }

    /// Natural logarithm. Requires leading term exactly 1 at exponent 0.
    pub fn log(&self) -> Result<Series> {
        match self.leading() {
            Some((e, c)) if e.0 == 0 && c.is_one() => {}
            _ => return Err(Error::UnnormalizedLog),
        }
        let prec = self.prec;
        let len = prec;
        if len <= 0 {
            return Err(Error::PrecisionExhausted(prec));
        }
        let f = self.to_dense(0, len);
        // Scaled derivative D = 4p d/dp multiplies the term at exponent e by e.
        // Solve f · Dg = Df with f[0] = 1, then undo the scaling.
        let mut dg: Vec<GaussRat> = Vec::with_capacity(len as usize);
        for i in 0..len as usize {
            let mut acc = f[i].mul_rat(&Rat::from_integer(BigInt::from(i as i64)));
            for j in 1..=i {
                if !f[j].is_zero() && !dg[i - j].is_zero() {
                    acc -= &(&f[j] * &dg[i - j]);
                }
            }
            dg.push(acc);
        }
        let g: Vec<GaussRat> = dg
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    GaussRat::zero()
                } else {
                    c.mul_rat(&Rat::new(BigInt::one(), BigInt::from(i as i64)))
                }
            })
            .collect();
        Ok(Series::from_dense(g, 0, prec))
    }

    /// Exponential. Requires `val > 0`.
    pub fn exp(&self) -> Result<Series> {
        if self.coeffs.is_empty() {
            return Ok(Series::one(Exp(self.prec)));
        }
        if self.val <= 0 {
            return Err(Error::UnnormalizedLog);
        }
        let prec = self.prec;
        let len = prec;
        let u = self.to_dense(0, len);
        let mut h: Vec<GaussRat> = Vec::with_capacity(len as usize);
        for i in 0..len as usize {
            if i == 0 {
                h.push(GaussRat::one());
                continue;
            }
            // e·h_e = Σ_j (j·u_j) h_{e-j}
            let mut acc = GaussRat::zero();
            for j in 1..=i {
                if !u[j].is_zero() && !h[i - j].is_zero() {
                    acc += &(&u[j].mul_rat(&Rat::from_integer(BigInt::from(j as i64))) * &h[i - j]);
                }
            }
            h.push(acc.mul_rat(&Rat::new(BigInt::one(), BigInt::from(i as i64))));
        }
        Ok(Series::from_dense(h, 0, prec))
    }

    /// Integer power via repeated squaring (negative powers invert).
    pub fn pow_int(&self, n: i64) -> Result<Series> {
        if n == 0 {
            return Ok(Series::one(Exp(self.rel_window())));
        }
        let (mut base, mut k) = if n < 0 {
            (self.inverse()?, (-n) as u64)
        } else {
            (self.clone(), n as u64)
        };
        let mut acc: Option<Series> = None;
        loop {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.mul(&base);
        }
        Ok(acc.unwrap())
    }

    /// Rational power `self^r`.
    ///
    /// The leading exponent times `r` must stay on the quarter grid. The
    /// leading coefficient must be 1, or a perfect power of the required
    /// order when it is not.
    pub fn pow_ratio(&self, r: &Rat) -> Result<Series> {
        if r.is_integer() {
            let n = r.to_integer().to_i64().ok_or(Error::NonNormalizedRoot)?;
            return self.pow_int(n);
        }
        let (e0, c0) = match self.leading() {
            Some((e, c)) => (e, c.clone()),
            None => return Err(Error::NonNormalizedRoot),
        };
        // New leading exponent e0·r on the quarter grid.
        let scaled = Rat::from_integer(BigInt::from(e0.0)) * r;
        if !scaled.is_integer() {
            return Err(Error::GridViolation(e0.0, format!("power {}", r)));
        }
        let new_e = scaled.to_integer().to_i64().ok_or(Error::NonNormalizedRoot)?;
        let lead_pow = if c0.is_one() {
            GaussRat::one()
        } else {
            if !c0.is_real() || c0.re.is_negative() {
                return Err(Error::NonNormalizedRoot);
            }
            // c0^(p/q) must be rational: take the exact q-th root.
            let den = r
                .denom()
                .to_u32()
                .ok_or(Error::NonNormalizedRoot)?;
            let num = r
                .numer()
                .to_i64()
                .ok_or(Error::NonNormalizedRoot)?;
            let root = nth_root_rat(&c0.re, den).ok_or(Error::NonNormalizedRoot)?;
            let powed = rat_pow_int(&root, num);
            GaussRat::from_rat(powed)
        };
        // Normalize: self = c0 p^e0 (1 + u).
        let unit = self
            .shift(Exp(-e0.0))
            .scale(&c0.inv());
        let logu = unit.log()?;
        let body = logu.scale_rat(r).exp()?;
        Ok(body.scale(&lead_pow).shift(Exp(new_e)))
    }

    /// Square root (`pow_ratio` with r = 1/2, kept for discoverability).
    pub fn sqrt(&self) -> Result<Series> {
        self.pow_ratio(&Rat::new(BigInt::one(), BigInt::from(2)))
    }

    /// Substitute `p -> p^scale` for a positive rational `scale`.
    pub fn substitute(&self, scale: &Rat) -> Result<Series> {
        if !scale.is_positive() {
            return Err(Error::Domain("substitution scale must be positive".into()));
        }
        let map_exp = |e: i64| -> Result<i64> {
            let x = Rat::from_integer(BigInt::from(e)) * scale;
            if x.is_integer() {
                Ok(x.to_integer().to_i64().ok_or(Error::PrecisionExhausted(e))?)
            } else {
                Err(Error::GridViolation(e, format!("scale {}", scale)))
            }
        };
        let mut coeffs = BTreeMap::new();
        for (e, c) in &self.coeffs {
            coeffs.insert(map_exp(*e)?, c.clone());
        }
        // Every unknown exponent >= prec maps to >= floor(prec·scale).
        let pr = Rat::from_integer(BigInt::from(self.prec)) * scale;
        let prec = pr.floor().to_integer().to_i64().ok_or(Error::PrecisionExhausted(self.prec))?;
        let mut s = Series { coeffs, prec, val: 0 };
        s.coeffs.retain(|e, _| *e < prec);
        s.recompute_val();
        Ok(s)
    }

    /// Largest integer order `n` with all of `p^0..p^n` inside the window.
    pub fn known_int_order(&self) -> i64 {
        (self.prec - 1).div_euclid(4)
    }

    /// First exponent (quarter units) at which `self` and `other` disagree,
    /// scanning the common window. `None` when they agree throughout it.
    pub fn first_difference(&self, other: &Series) -> Option<Exp> {
        let prec = self.prec.min(other.prec);
        let d = self.sub(other);
        d.coeffs.range(..prec).next().map(|(e, _)| Exp(*e))
    }

    /// Serialize in the line format: a header with the window bounds, then
    /// one `coefficient<TAB>exponent-times-4` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("prec={} minexp={}\n", self.prec, self.val);
        for (e, c) in &self.coeffs {
            out.push_str(&format!("{}/{}", c.re.numer(), c.re.denom()));
            if !c.im.is_zero() {
                out.push_str(&format!("+i*{}/{}", c.im.numer(), c.im.denom()));
            }
            out.push_str(&format!("\t{}\n", e));
        }
        out
    }

    /// Parse the [`Series::to_text`] format.
    pub fn from_text(text: &str) -> Result<Series> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty series file".into()))?;
        let mut prec = None;
        let mut minexp = None;
        for field in header.split_whitespace() {
            if let Some(v) = field.strip_prefix("prec=") {
                prec = v.parse::<i64>().ok();
            } else if let Some(v) = field.strip_prefix("minexp=") {
                minexp = v.parse::<i64>().ok();
            }
        }
        let prec = prec.ok_or_else(|| Error::Parse("missing prec in header".into()))?;
        let _ = minexp;
        let mut coeffs = BTreeMap::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (coef, exp) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("bad term line: {line}")))?;
            let e: i64 = exp
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent: {exp}")))?;
            let c = parse_gauss(coef.trim())?;
            if !c.is_zero() {
                coeffs.insert(e, c);
            }
        }
        let mut s = Series { coeffs, prec, val: 0 };
        s.recompute_val();
        Ok(s)
    }
}

fn parse_rat(text: &str) -> Result<Rat> {
    let (n, d) = text
        .split_once('/')
        .ok_or_else(|| Error::Parse(format!("bad rational: {text}")))?;
    let num: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator: {n}")))?;
    let den: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator: {d}")))?;
    if den.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(Rat::new(num, den))
}

fn parse_gauss(text: &str) -> Result<GaussRat> {
    if let Some((re, im)) = text.split_once("+i*") {
        Ok(GaussRat::new(parse_rat(re)?, parse_rat(im)?))
    } else {
        Ok(GaussRat::from_rat(parse_rat(text)?))
    }
}

/// Exact q-th root of a positive rational, when it exists.
fn nth_root_rat(r: &Rat, q: u32) -> Option<Rat> {
    if q == 2 {
        return rat_sqrt(r);
    }
    let n = r.numer().nth_root(q);
    let d = r.denom().nth_root(q);
    let mut np = BigInt::one();
    let mut dp = BigInt::one();
    for _ in 0..q {
        np *= &n;
        dp *= &d;
    }
    if &np == r.numer() && &dp == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

fn rat_pow_int(r: &Rat, n: i64) -> Rat {
    let mut acc = Rat::one();
    let a = if n < 0 { r.recip() } else { r.clone() };
    for _ in 0..n.unsigned_abs() {
        acc *= &a;
    }
    acc
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[prec={}/4, val={}/4;", self.prec, self.val)?;
        for (e, c) in self.coeffs.iter().take(12) {
            write!(f, " {}·p^({}/4)", c, e)?;
        }
        if self.coeffs.len() > 12 {
            write!(f, " … ({} terms)", self.coeffs.len())?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rint;

    fn p(prec: i64) -> Series {
        Series::monomial(GaussRat::one(), Exp::int(1), Exp::int(prec))
    }

    #[test]
    fn geometric_series_identity() {
        // (1 - p) · (1 + p + p² + …) = 1 within the window.
        let prec = Exp::int(12);
        let one = Series::one(prec);
        let geom = one.div(&one.sub(&p(12))).unwrap();
        let product = one.sub(&p(12)).mul(&geom);
        assert!(product.sub(&Series::one(product.prec())).is_zero_to_window());
    }

    #[test]
    fn laurent_bookkeeping() {
        // (p^{-1} + p) · p = 1 + p² with minexp 0.
        let prec = Exp::int(10);
        let a = Series::from_terms(
            &[(GaussRat::one(), Exp::int(-1)), (GaussRat::one(), Exp::int(1))],
            prec,
        );
        let b = Series::monomial(GaussRat::one(), Exp::int(1), prec);
        let c = a.mul(&b);
        assert_eq!(c.val(), Exp::int(0));
        assert_eq!(c.coeff(Exp::int(0)).unwrap(), GaussRat::one());
        assert_eq!(c.coeff(Exp::int(2)).unwrap(), GaussRat::one());
        assert_eq!(c.coeff(Exp::int(1)).unwrap(), GaussRat::zero());
    }

    #[test]
    fn mercator_series() {
        let prec = Exp::int(8);
        let f = Series::one(prec).sub(&p(8));
        let l = f.log().unwrap();
        for n in 1..8 {
            assert_eq!(
                l.coeff(Exp::int(n)).unwrap(),
                GaussRat::from_rat(-crate::scalar::rat(1, n))
            );
        }
    }

    #[test]
    fn exp_of_zero_and_roundtrip() {
        let prec = Exp::int(10);
        assert_eq!(Series::zero(prec).exp().unwrap(), Series::one(prec));
        let u = Series::from_terms(
            &[
                (GaussRat::from_ratio(2, 3), Exp::int(1)),
                (GaussRat::from_ratio(-5, 7), Exp::int(3)),
                (GaussRat::from_ratio(1, 2), Exp::half(3)),
            ],
            prec,
        );
        let h = u.exp().unwrap();
        let back = h.log().unwrap();
        assert!(back.sub(&u).is_zero_to_window());
    }

    #[test]
    fn sqrt_of_perfect_square() {
        let prec = Exp::int(9);
        let f = Series::from_terms(
            &[
                (GaussRat::one(), Exp::int(0)),
                (GaussRat::from_int(2), Exp::int(1)),
                (GaussRat::one(), Exp::int(2)),
            ],
            prec,
        );
        let r = f.sqrt().unwrap();
        let expected = Series::from_terms(
            &[(GaussRat::one(), Exp::int(0)), (GaussRat::one(), Exp::int(1))],
            prec,
        );
        assert!(r.sub(&expected).is_zero_to_window());
    }

    #[test]
    fn fractional_exponent_additivity() {
        // (1-p²)^{3/2} · (1-p²)^{1/2} = (1-p²)²
        let prec = Exp::int(14);
        let f = Series::one(prec).sub(&Series::monomial(GaussRat::one(), Exp::int(2), prec));
        let a = f.pow_ratio(&crate::scalar::rat(3, 2)).unwrap();
        let b = f.pow_ratio(&crate::scalar::rat(1, 2)).unwrap();
        let lhs = a.mul(&b);
        let rhs = f.pow_int(2).unwrap();
        assert!(lhs.sub(&rhs).is_zero_to_window());
    }

    #[test]
    fn sqrt_with_perfect_square_lead() {
        let prec = Exp::int(8);
        let f = Series::from_terms(
            &[(GaussRat::from_int(4), Exp::int(0)), (GaussRat::from_int(4), Exp::int(1))],
            prec,
        );
        let r = f.sqrt().unwrap();
        assert_eq!(r.coeff(Exp::int(0)).unwrap(), GaussRat::from_int(2));
        assert!(r.mul(&r).sub(&f).is_zero_to_window());
        // Non-square lead is refused.
        let g = Series::from_terms(&[(GaussRat::from_int(2), Exp::int(0))], prec);
        assert!(matches!(g.sqrt(), Err(Error::NonNormalizedRoot)));
    }

    #[test]
    fn substitution_scales_exponents_and_window() {
        let prec = Exp::int(6);
        let f = Series::from_terms(
            &[(GaussRat::one(), Exp::int(0)), (GaussRat::one(), Exp::int(1))],
            prec,
        );
        let g = f.substitute(&rint(2)).unwrap();
        assert_eq!(g.coeff(Exp::int(2)).unwrap(), GaussRat::one());
        assert_eq!(g.prec(), Exp::int(12));
        // Identity scale is a no-op.
        let h = f.substitute(&rint(1)).unwrap();
        assert_eq!(h, f);
        // Off-grid substitution of a quarter exponent is rejected.
        let q = Series::monomial(GaussRat::one(), Exp(1), prec);
        assert!(matches!(
            q.substitute(&crate::scalar::rat(1, 2)),
            Err(Error::GridViolation(..))
        ));
    }

    #[test]
    fn division_errors() {
        let prec = Exp::int(5);
        let z = Series::zero(prec);
        let f = Series::one(prec);
        assert!(matches!(f.div(&z), Err(Error::ZeroDivisor)));
    }

    #[test]
    fn precision_window_rule_for_mul() {
        // prec_out = min(prec_a + val_b, prec_b + val_a)
        let a = Series::monomial(GaussRat::one(), Exp::int(2), Exp::int(7));
        let b = Series::monomial(GaussRat::one(), Exp::int(3), Exp::int(5));
        let c = a.mul(&b);
        assert_eq!(c.prec(), Exp::int(7)); // min(7+3, 5+2)
        assert_eq!(c.val(), Exp::int(5));
    }

    #[test]
    fn text_roundtrip() {
        let prec = Exp::int(6);
        let f = Series::from_terms(
            &[
                (GaussRat::from_ratio(-7, 3), Exp::int(-2)),
                (GaussRat::new(crate::scalar::rat(1, 2), crate::scalar::rat(5, 4)), Exp(9)),
            ],
            prec,
        );
        let g = Series::from_text(&f.to_text()).unwrap();
        assert_eq!(f, g);
    }
}
