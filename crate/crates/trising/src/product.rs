//! Euler-product form of a series: exponent extraction, reconstruction,
//! period-24 pattern fitting, and the closed product-to-sum formula.
//!
//! A unit series with integer exponents factors uniquely as
//! `f = ∏_{n≥1} (1 - p^n)^{e_n}` with rational `e_n`. The exponents follow
//! from `log f = -Σ_n e_n Σ_m p^{nm}/m` by recursion on n. Conjectured free
//! energies have `e_n` repeating with period 24 in `n`, each residue class
//! polynomial in the period index `k` of degree at most 2.

use crate::error::{Error, Result};
use crate::scalar::{GaussRat, Rat};
use crate::series::{Exp, Series};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Accumulates `log ∏ (1 - p^(E/4))^e` on a dense quarter grid.
///
/// Every factor is a binomial in a pure monomial, so its logarithm is the
/// sparse sum `-e Σ_j p^(jE/4)/j`; accumulating logs turns huge products
/// into one exponential at the end.
pub struct LogProduct {
    dense: Vec<Rat>,
    prec: i64,
}

impl LogProduct {
    pub fn new(prec: Exp) -> Self {
        LogProduct {
            dense: vec![Rat::zero(); prec.0.max(0) as usize],
            prec: prec.0,
        }
    }

    pub fn prec(&self) -> Exp {
        Exp(self.prec)
    }

    /// Multiply the running product by `(1 - p^(e/4))^expo`.
    pub fn factor(&mut self, e: Exp, expo: &Rat) -> Result<()> {
        if expo.is_zero() || e.0 >= self.prec {
            return Ok(());
        }
        if e.0 <= 0 {
            return Err(Error::Domain(format!(
                "product factor with non-positive exponent {}/4",
                e.0
            )));
        }
        let mut j: i64 = 1;
        while j * e.0 < self.prec {
            self.dense[(j * e.0) as usize] -= expo / Rat::from_integer(BigInt::from(j));
            j += 1;
        }
        Ok(())
    }

    /// Convenience for integer exponents.
    pub fn factor_int(&mut self, e: Exp, expo: i64) -> Result<()> {
        self.factor(e, &Rat::from_integer(BigInt::from(expo)))
    }

    /// The accumulated logarithm as a series.
    pub fn log_series(&self) -> Series {
        let terms: Vec<(GaussRat, Exp)> = self
            .dense
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (GaussRat::from_rat(c.clone()), Exp(i as i64)))
            .collect();
        Series::from_terms(&terms, Exp(self.prec))
    }

    /// The accumulated product as a series.
    pub fn series(&self) -> Result<Series> {
        self.log_series().exp()
    }
}

/// Pattern datum for one residue class mod 24: `e_{24(k-1)+r} = a + b·k + c·k²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResiduePattern {
    pub residue: i64,
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
}

impl ResiduePattern {
    pub fn eval(&self, k: i64) -> Rat {
        let kq = Rat::from_integer(BigInt::from(k));
        &self.a + &self.b * &kq + &self.c * &kq * &kq
    }
}

/// A series in Euler-product form: exponents `e_n`, with the optional
/// fitted period-24 pattern used for extrapolation.
#[derive(Clone, Debug)]
pub struct ProductForm {
    /// Nonzero exponents `n -> e_n`, `n >= 1`.
    pub exponents: BTreeMap<i64, Rat>,
    /// Largest `n` for which `e_n` is known (zero entries are omitted).
    pub max_n: i64,
    /// Per-residue polynomials, when fitted.
    pub pattern: Option<Vec<ResiduePattern>>,
    /// Range of `n` used to fit the pattern.
    pub fitted_from: Option<(i64, i64)>,
    /// Largest `n` at which the pattern reproduces the exponents.
    pub verified_to: Option<i64>,
}

impl ProductForm {
    pub fn exponent(&self, n: i64) -> Rat {
        self.exponents.get(&n).cloned().unwrap_or_else(Rat::zero)
    }

    /// Rebuild `∏ (1-p^n)^{e_n}` as a series.
    pub fn reconstruct(&self, prec: Exp) -> Result<Series> {
        let mut lp = LogProduct::new(prec);
        for (n, e) in &self.exponents {
            lp.factor(Exp::int(*n), e)?;
        }
        lp.series()
    }
}

/// Extract Euler-product exponents from a unit series with integer exponents.
///
/// `e_n` is solved recursively from coefficient `n` of `log f` given
/// `e_1 … e_{n-1}`.
pub fn product_exponents(f: &Series) -> Result<ProductForm> {
    match f.leading() {
        Some((e, c)) if e.0 == 0 && c.is_one() => {}
        _ => return Err(Error::UnnormalizedLog),
    }
    for (e, _) in f.terms() {
        if !e.is_integer() {
            return Err(Error::GridViolation(e.0, "product exponent extraction".into()));
        }
    }
    let lf = f.log()?;
    let max_n = lf.known_int_order();
    if max_n < 1 {
        return Err(Error::PrecisionExhausted(lf.prec().0));
    }
    let mut exps: BTreeMap<i64, Rat> = BTreeMap::new();
    for n in 1..=max_n {
        let c = lf.coeff(Exp::int(n))?;
        if !c.is_real() {
            return Err(Error::Internal(
                "complex coefficient in product-exponent extraction".into(),
            ));
        }
        // n·c_n = -Σ_{d|n} d·e_d
        let mut acc = -c.re * Rat::from_integer(BigInt::from(n));
        for (d, e) in exps.range(..n) {
            if n % d == 0 {
                acc -= e * Rat::from_integer(BigInt::from(*d));
            }
        }
        let en = acc / Rat::from_integer(BigInt::from(n));
        if !en.is_zero() {
            exps.insert(n, en);
        }
    }
    Ok(ProductForm {
        exponents: exps,
        max_n,
        pattern: None,
        fitted_from: None,
        verified_to: None,
    })
}

/// Fit the period-24 pattern of degree `degree` (0, 1 or 2) to the exponents,
/// using the earliest `degree + 1` periods of each residue class and
/// verifying against every remaining known exponent.
pub fn fit_period24(pf: &ProductForm, degree: u32) -> Result<ProductForm> {
    assert!(degree <= 2, "pattern degree is at most 2");
    let points = degree as i64 + 1;
    if pf.max_n < 24 * points {
        return Err(Error::PrecisionExhausted(Exp::int(24 * points).0));
    }
    let mut pattern = Vec::with_capacity(24);
    let mut verified_to = 0i64;
    for r in 1..=24i64 {
        // Solve for (a, b, c) on k = 1..=points, then verify the rest.
        let values: Vec<Rat> = (1..=points).map(|k| pf.exponent(24 * (k - 1) + r)).collect();
        let (a, b, c) = fit_poly(&values, degree);
        let pat = ResiduePattern {
            residue: r,
            a,
            b,
            c,
        };
        let mut k = points + 1;
        loop {
            let n = 24 * (k - 1) + r;
            if n > pf.max_n {
                break;
            }
            if pat.eval(k) != pf.exponent(n) {
                return Err(Error::NoStablePattern { residue: r, n });
            }
            verified_to = verified_to.max(n);
            k += 1;
        }
        pattern.push(pat);
    }
    Ok(ProductForm {
        exponents: pf.exponents.clone(),
        max_n: pf.max_n,
        pattern: Some(pattern),
        fitted_from: Some((1, 24 * points)),
        verified_to: Some(verified_to.max(24 * points)),
    })
}

/// Exact polynomial through `(k, values[k-1])`, `k = 1..=degree+1`.
fn fit_poly(values: &[Rat], degree: u32) -> (Rat, Rat, Rat) {
    let v = |i: usize| values[i].clone();
    match degree {
        0 => (v(0), Rat::zero(), Rat::zero()),
        1 => {
            // a + b·k through k=1,2
            let b = &v(1) - &v(0);
            (v(0) - &b, b, Rat::zero())
        }
        _ => {
            // a + b·k + c·k² through k=1,2,3
            let d1 = &v(1) - &v(0);
            let d2 = &v(2) - &v(1);
            let two = Rat::from_integer(BigInt::from(2));
            let c = (&d2 - &d1) / &two;
            let b = d1 - Rat::from_integer(BigInt::from(3)) * &c;
            let a = v(0) - &b - &c;
            (a, b, c)
        }
    }
}

/// The closed product-to-sum conversion:
///
/// `log ∏_{k≥1} (1-p^(rk-s))^(a+bk+ck²)
///    = -Σ_m p^((r-s)m)/m · [ a/(1-p^(rm)) + (b-c)/(1-p^(rm))² + 2c/(1-p^(rm))³ ]`
///
/// returned as a series to precision `prec`. Requires `r ≥ 1` and
/// `r > s ≥ 0` so all factor exponents are positive.
pub fn sum_formula(r: i64, s: i64, a: &Rat, b: &Rat, c: &Rat, prec: Exp) -> Result<Series> {
    if r < 1 || s < 0 || r <= s {
        return Err(Error::Domain(format!(
            "sum_formula requires r ≥ 1 and r > s ≥ 0, got r={r}, s={s}"
        )));
    }
    let d_int = (prec.0 + 3) / 4; // integer orders covered by the window
    let mut dense: Vec<Rat> = vec![Rat::zero(); (d_int.max(0) + 1) as usize];
    let bc = b - c;
    let c2 = c * Rat::from_integer(BigInt::from(2));
    let mut m: i64 = 1;
    while (r - s) * m <= d_int {
        let inv_m = Rat::new(BigInt::one(), BigInt::from(m));
        let base = (r - s) * m;
        let step = r * m;
        // 1/(1-x)^j = Σ_t C(t+j-1, j-1) x^t with x = p^(rm)
        let mut t: i64 = 0;
        while base + step * t <= d_int {
            let e = (base + step * t) as usize;
            let t1 = Rat::from_integer(BigInt::from(t + 1));
            let t2 = Rat::from_integer(BigInt::from(t + 2));
            let half = Rat::new(BigInt::one(), BigInt::from(2));
            let bracket = a + &bc * &t1 + &c2 * &t1 * &t2 * &half;
            dense[e] -= &inv_m * &bracket;
            t += 1;
        }
        m += 1;
    }
    let terms: Vec<(GaussRat, Exp)> = dense
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(n, v)| (GaussRat::from_rat(v), Exp::int(n as i64)))
        .collect();
    Ok(Series::from_terms(&terms, prec))
}

/// Largest integer `n` such that `e_n` can be read off a series of this
/// precision (used by callers to size requests).
pub fn max_exponent_order(f: &Series) -> i64 {
    f.known_int_order()
}

#[allow(dead_code)]
fn rat_i64(r: &Rat) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

#[allow(dead_code)]
fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}
