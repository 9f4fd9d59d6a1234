//! Closed-form product and summation representations of the bulk, surface
//! and corner free energies, isotropic and anisotropic.
//!
//! Everything is parametrized by the elliptic nome: `q = p^sigma` and
//! `a_j = p^alpha_j` with `alpha_1 + alpha_2 + alpha_3 = sigma`, so each
//! infinite product becomes an exact Laurent series on the quarter grid.
//! The summation forms are single functions `F` with
//! `log κ = Σ_m F(arguments^m)/m`; they are written once over the
//! field-operations trait and reused for exact rational identity checks,
//! floating-point critical-limit evaluation, and truncated series.
//!
//! The `F` evaluators take the *square roots* of their arguments, since
//! half-integer powers of `a` and `q` occur; with monomial parametrizations
//! those square roots are again exact monomials.

use crate::error::{Error, Result};
use crate::fieldops::{one_minus, one_plus, FieldOps};
use crate::product::LogProduct;
use crate::scalar::{rat, rint, GaussRat, Rat};
use crate::series::{Exp, Series};
use crate::spinor::{BoltzmannPoint, Provenance};
use num_traits::Zero;

/// Which free energy a formula refers to.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum KappaKind {
    Bulk,
    Surface,
    Corner60,
    Corner120,
}

impl KappaKind {
    pub fn all() -> [KappaKind; 4] {
        [
            KappaKind::Bulk,
            KappaKind::Surface,
            KappaKind::Corner60,
            KappaKind::Corner120,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            KappaKind::Bulk => "bulk",
            KappaKind::Surface => "surface",
            KappaKind::Corner60 => "corner60",
            KappaKind::Corner120 => "corner120",
        }
    }
}

/// Exponent parametrization `a_j = p^alpha_j`, `q = p^sigma`.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct EllipticParams {
    pub alpha: [i64; 3],
    pub sigma: i64,
}

impl EllipticParams {
    /// Physical parametrization: `q < a_j < 1`, i.e. `0 < alpha_j < sigma`
    /// with the product constraint `a_1 a_2 a_3 = q`.
    pub fn new(alpha: [i64; 3], sigma: i64) -> Result<Self> {
        if alpha.iter().sum::<i64>() != sigma {
            return Err(Error::Domain(format!(
                "alpha must sum to sigma: {alpha:?} vs {sigma}"
            )));
        }
        if alpha.iter().any(|&a| a <= 0 || a >= sigma) {
            return Err(Error::Domain(format!(
                "need 0 < alpha_j < sigma, got {alpha:?}"
            )));
        }
        Ok(EllipticParams { alpha, sigma })
    }

    /// The isotropic point `a_j = q^(1/3)`, `q = p^6`.
    pub fn isotropic() -> Self {
        EllipticParams {
            alpha: [2, 2, 2],
            sigma: 6,
        }
    }

    /// Boundary parametrizations such as the square-lattice reduction
    /// `a_3 = 1` are admitted here (`alpha_j ≥ 0`).
    pub fn relaxed(alpha: [i64; 3], sigma: i64) -> Result<Self> {
        if alpha.iter().sum::<i64>() != sigma || alpha.iter().any(|&a| a < 0 || a > sigma) {
            return Err(Error::Domain(format!(
                "inadmissible exponents {alpha:?} for sigma {sigma}"
            )));
        }
        Ok(EllipticParams { alpha, sigma })
    }

    /// Arguments of the type-`i` (0-based) surface or 120°-corner formula:
    /// `(a_i | a_(i+1), a_(i-1))`.
    pub fn args_for_type(&self, i: usize) -> [i64; 3] {
        [
            self.alpha[i % 3],
            self.alpha[(i + 1) % 3],
            self.alpha[(i + 2) % 3],
        ]
    }
}

// ---------------------------------------------------------------------------
// Summation-form F functions, generic over the scalar field.
// ---------------------------------------------------------------------------

/// `F_b(a, q)` from the bulk sum `log 𝜅_b(a,q) = Σ_m F_b(a^m, q^m)/m`.
/// Arguments are the square roots `sa = a^(1/2)`, `sq = q^(1/2)`.
pub fn f_bulk<T: FieldOps>(sa: &T, sq: &T) -> T {
    let q = sq.mul(sq);
    let a = sa.mul(sa);
    let q2 = q.mul(&q);
    let a_minus_inv = a.sub(&a.one_like().div(&a));
    let t1 = q
        .sub(&q2)
        .div(&one_plus(&q).mul(&one_plus(&q2)).mul(&a.int_like(3)));
    let t2 = q.mul(&a_minus_inv).div(&one_plus(&q2).mul(&a.int_like(2)));
    let t3 = q
        .mul(&a_minus_inv)
        .div(&one_plus(&q).mul(&one_plus(&q)).mul(&a.int_like(2)));
    t1.add(&t2).sub(&t3)
}

/// `F_s(a1 | a2, a3 | q)` from the surface sum. Square-root arguments.
pub fn f_surface<T: FieldOps>(sa1: &T, sa2: &T, sa3: &T, sq: &T) -> T {
    let q = sq.mul(sq);
    let a1 = sa1.mul(sa1);
    let a2 = sa2.mul(sa2);
    let a3 = sa3.mul(sa3);
    let q2 = q.mul(&q);
    let opq_sq = one_plus(&q).mul(&one_plus(&q));
    let opq2_sq = one_plus(&q2).mul(&one_plus(&q2));
    let four = q.int_like(4);
    let t1 = sq.mul(&sa1.sub(&q.div(sa1))).div(&opq_sq);
    let a1_part = a1.sub(&q2.div(&a1));
    let t2 = a1_part.div(&opq_sq.mul(&four));
    let t3 = opq_sq.mul(&a1_part).div(&opq2_sq.mul(&four));
    let sym = a2
        .sub(&a2.one_like().div(&a2))
        .add(&a3.sub(&a3.one_like().div(&a3)));
    let t4 = q.mul(&sym).div(&opq_sq.mul(&four));
    let t5 = q.mul(&sym).div(&one_plus(&q2).mul(&four));
    t1.add(&t2).sub(&t3).add(&t4).sub(&t5)
}

/// `F_c(a, q)` from the 60°-corner sum (`|a| > q`). Square-root arguments.
pub fn f_corner60<T: FieldOps>(sa: &T, sq: &T) -> T {
    let q = sq.mul(sq);
    let a = sa.mul(sa);
    let q2 = q.mul(&q);
    let q4 = q2.mul(&q2);
    let opq_sq = one_plus(&q).mul(&one_plus(&q));
    let om_qa = one_minus(&q.div(&a));
    let t1 = q2.div(&one_minus(&q4).mul(&q.int_like(6)));
    let t2 = sq.mul(&one_plus(&q2)).div(&sa.mul(&om_qa).mul(&opq_sq));
    let opqa = one_plus(&q.div(&a));
    let t3 = q.mul(&opqa).div(&om_qa.mul(&opq_sq));
    let t4 = q2.mul(&opqa).div(
        &om_qa
            .mul(&one_plus(&q2))
            .mul(&one_plus(&q2))
            .mul(&q.int_like(2)),
    );
    t2.sub(&t1).sub(&t3).add(&t4)
}

/// `F̃_c(a1 | a2, a3 | q)` from the 120°-corner sum. Square-root arguments.
pub fn f_corner120<T: FieldOps>(sa1: &T, sa2: &T, sa3: &T, sq: &T) -> T {
    let q = sq.mul(sq);
    let a1 = sa1.mul(sa1);
    let a2 = sa2.mul(sa2);
    let a3 = sa3.mul(sa3);
    let q2 = q.mul(&q);
    let q4 = q2.mul(&q2);
    let opq = one_plus(&q);
    let opq_sq = opq.mul(&opq);
    let opq2 = one_plus(&q2);
    let opq2_sq = opq2.mul(&opq2);
    let om_qa1 = one_minus(&q.mul(&a1));
    let op_qa1 = one_plus(&q.mul(&a1));
    let two = q.int_like(2);
    let t1 = q2.div(&one_minus(&q4).mul(&q.int_like(3)));
    let t2 = two
        .mul(&q)
        .mul(sa1)
        .mul(&q.one_like().sub(sq).add(&q))
        .div(&opq_sq.mul(&om_qa1));
    let t3 = sq.mul(&op_qa1).div(&opq.mul(&om_qa1));
    let t4 = q2.mul(&op_qa1).div(&opq2_sq.mul(&om_qa1).mul(&two));
    let t5 = two.mul(&q).mul(&op_qa1).div(&opq_sq.mul(&om_qa1));
    let t6 = q.mul(&op_qa1).div(&opq2.mul(&om_qa1).mul(&two));
    let t7 = q
        .mul(&om_qa1)
        .mul(&q.add(&a1))
        .div(&a1.mul(&opq_sq).mul(&opq2).mul(&two));
    let t8 = sq
        .mul(&sa2.add(sa3))
        .mul(&one_minus(sa1))
        .mul(&one_minus(&q.mul(sa1)))
        .div(&opq_sq.mul(&one_minus(&sq.mul(sa1))));
    let t9 = q
        .mul(&a2.add(&a3))
        .mul(&one_plus(&q).add(&q2))
        .mul(&one_minus(&a1))
        .mul(&one_minus(&q2.mul(&a1)))
        .div(&opq_sq.mul(&opq2_sq).mul(&om_qa1));
    t2.sub(&t1)
        .add(&t3)
        .add(&t4)
        .sub(&t5)
        .sub(&t6)
        .sub(&t7)
        .sub(&t8)
        .add(&t9)
}

/// Isotropic `F(p)` with `log κ = Σ_m F(p^m)/m`, rational in `p`.
pub fn f_iso<T: FieldOps>(kind: KappaKind, p: &T) -> T {
    let p2 = p.mul(p);
    let p4 = p2.mul(&p2);
    let p6 = p4.mul(&p2);
    let p8 = p4.mul(&p4);
    let p10 = p8.mul(&p2);
    let p12 = p8.mul(&p4);
    let p16 = p8.mul(&p8);
    let p24 = p12.mul(&p12);
    let one = p.one_like();
    match kind {
        KappaKind::Bulk => {
            // p⁶ (1-p²)³ (1+p²) / ((1+p^12)(1-p²+p⁴)²)
            let num = p6.mul(&one_minus(&p2).pow_i(3)).mul(&one_plus(&p2));
            let den = one_plus(&p12).mul(&one.sub(&p2).add(&p4).pow_i(2));
            num.div(&den)
        }
        KappaKind::Surface => {
            // p⁴ (1-p²)² (1-p⁴)(1+p⁶+p^12) / ((1+p^12)(1-p²+p⁴)²(1-p⁴+p⁸))
            let num = p4
                .mul(&one_minus(&p2).pow_i(2))
                .mul(&one_minus(&p4))
                .mul(&one.add(&p6).add(&p12));
            let den = one_plus(&p12)
                .mul(&one.sub(&p2).add(&p4).pow_i(2))
                .mul(&one.sub(&p4).add(&p8));
            num.div(&den)
        }
        KappaKind::Corner60 => {
            // p^12/(3(1-p^24)) + p²(1+p⁴)(1+p^12)/((1+p⁴+p⁸)(1-p^12))
            //   - p⁸(2 - p⁸ + 3p^12 - p^16 + 2p^24)/((1+p⁸+p^16)(1-p^24))
            let t1 = p12.div(&one_minus(&p24).mul(&p.int_like(3)));
            let t2 = p2
                .mul(&one_plus(&p4))
                .mul(&one_plus(&p12))
                .div(&one.add(&p4).add(&p8).mul(&one_minus(&p12)));
            let poly = p
                .int_like(2)
                .sub(&p8)
                .add(&p12.mul(&p.int_like(3)))
                .sub(&p16)
                .add(&p24.mul(&p.int_like(2)));
            let t3 = p8
                .mul(&poly)
                .div(&one.add(&p8).add(&p16).mul(&one_minus(&p24)));
            t1.add(&t2).sub(&t3)
        }
        KappaKind::Corner120 => {
            // p^12/(6(1-p^24)) - p^10/(2(1-p⁴)(1+p⁸+p^16))
            //   + p³/((1-p²)(1-p²+p⁴))
            //   - p⁶(3+6p⁴+8p⁸+9p^12+8p^16+6p^20+3p^24)
            //       /((1+p⁴)(1+p⁴+p⁸)(1-p^24))
            //   - p⁴(2+4p⁴+3p⁸+3p^12+6p^16+7p^20+6p^24+3p^28+3p^32+4p^36+2p^40)
            //       /((1+p⁴)²(1+p⁸+p^16)(1-p^24))
            let p3 = p2.mul(p);
            let t1 = p12.div(&one_minus(&p24).mul(&p.int_like(6)));
            let t2 = p10.div(
                &one_minus(&p4)
                    .mul(&one.add(&p8).add(&p16))
                    .mul(&p.int_like(2)),
            );
            let t3 = p3.div(&one_minus(&p2).mul(&one.sub(&p2).add(&p4)));
            let poly4 = poly_in(&p4, &[3, 6, 8, 9, 8, 6, 3]);
            let t4 = p6.mul(&poly4).div(
                &one_plus(&p4)
                    .mul(&one.add(&p4).add(&p8))
                    .mul(&one_minus(&p24)),
            );
            let poly5 = poly_in(&p4, &[2, 4, 3, 3, 6, 7, 6, 3, 3, 4, 2]);
            let t5 = p4.mul(&poly5).div(
                &one_plus(&p4)
                    .pow_i(2)
                    .mul(&one.add(&p8).add(&p16))
                    .mul(&one_minus(&p24)),
            );
            t1.sub(&t2).add(&t3).sub(&t4).sub(&t5)
        }
    }
}

/// `c0 + c1·x + c2·x² + …` by Horner evaluation.
fn poly_in<T: FieldOps>(x: &T, coeffs: &[i64]) -> T {
    let mut acc = x.int_like(*coeffs.last().unwrap());
    for c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(x).add(&x.int_like(*c));
    }
    acc
}

// ---------------------------------------------------------------------------
// Product forms as Laurent series.
// ---------------------------------------------------------------------------

/// One binomial factor `(1 - p^E)^expo` of an anisotropic product, with its
/// monomial recorded in half-powers of `q`, `a` (first argument) and `b`
/// (second argument, for the two-argument corner functions).
#[derive(Clone, Debug)]
pub struct ProductFactor {
    pub q_half: i64,
    pub a_half: i64,
    pub b_half: i64,
    pub expo: Rat,
}

impl ProductFactor {
    fn exp_quarter(&self, alpha_a: i64, alpha_b: i64, sigma: i64) -> i64 {
        2 * (self.q_half * sigma + self.a_half * alpha_a + self.b_half * alpha_b)
    }
}

fn push(
    lp: &mut LogProduct,
    q_half: i64,
    a_half: i64,
    b_half: i64,
    expo: Rat,
    alpha_a: i64,
    alpha_b: i64,
    sigma: i64,
) -> Result<()> {
    if expo.is_zero() {
        return Ok(());
    }
    let f = ProductFactor {
        q_half,
        a_half,
        b_half,
        expo,
    };
    let e = f.exp_quarter(alpha_a, alpha_b, sigma);
    if e >= lp.prec().0 {
        return Ok(());
    }
    lp.factor(Exp(e), &f.expo)
}

/// `𝜅_b(a, q)` as a series: the single-argument bulk product.
pub fn bold_kappa_b(alpha: i64, sigma: i64, prec: Exp) -> Result<Series> {
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    loop {
        let floor = 2 * ((4 * k - 3) * sigma - alpha.abs());
        if floor >= prec.0 {
            break;
        }
        let rows: [(i64, i64, Rat); 11] = [
            (4 * k - 2, 0, rat(2, 3)),
            (4 * k - 3, 0, rat(-1, 3)),
            (4 * k - 1, 0, rat(-1, 3)),
            (4 * k - 2, -1, rint(2 * k - 1)),
            (4 * k - 2, 1, rint(-(2 * k - 1))),
            (4 * k + 1, 1, rint(2 * k)),
            (4 * k - 1, 1, rint(2 * k)),
            (4 * k, -1, rint(2 * k)),
            (4 * k - 1, -1, rint(-2 * k)),
            (4 * k + 1, -1, rint(-2 * k)),
            (4 * k, 1, rint(-2 * k)),
        ];
        for (qi, ai, expo) in rows {
            push(&mut lp, 2 * qi, 2 * ai, 0, expo, alpha, 0, sigma)?;
        }
        k += 1;
    }
    lp.series()
}

/// `𝜅_s(a1 | a2, a3 | q)` as a series.
pub fn bold_kappa_s(alphas: [i64; 3], sigma: i64, prec: Exp) -> Result<Series> {
    let [a1, a2, a3] = alphas;
    let mut lp = LogProduct::new(prec);
    let amax = alphas.iter().map(|x| x.abs()).max().unwrap();
    let mut k = 1i64;
    loop {
        let floor = 2 * ((4 * k - 3) * sigma - 2 * amax);
        if floor >= prec.0 {
            break;
        }
        // First-argument factors: monomials in half powers.
        let rows_a: [(i64, i64, Rat); 10] = [
            (4 * k - 1, -1, rint(2 * k - 1)),
            (8 * k - 6, 2, rint(2 * k - 1)),
            (4 * k - 3, 1, rint(-(2 * k - 1))),
            (8 * k - 2, -2, rint(-(2 * k - 1))),
            (4 * k - 1, 1, rint(2 * k)),
            (4 * k + 1, -1, rint(-2 * k)),
            (8 * k, -2, rint(k)),
            (8 * k + 4, -2, rint(k)),
            (8 * k, 2, rint(-k)),
            (8 * k - 4, 2, rint(-k)),
        ];
        for (qh, ah, expo) in rows_a {
            push(&mut lp, qh, ah, 0, expo, a1, 0, sigma)?;
        }
        // Companion factors, symmetric in a2 and a3.
        for ac in [a2, a3] {
            let rows_b: [(i64, i64, Rat); 6] = [
                (4 * k, 2, rat(k, 2)),
                (4 * k, -2, rat(-k, 2)),
                (8 * k - 2, -2, rint(k)),
                (8 * k + 2, -2, rint(k)),
                (8 * k + 2, 2, rint(-k)),
                (8 * k - 2, 2, rint(-k)),
            ];
            for (qh, ah, expo) in rows_b {
                push(&mut lp, qh, ah, 0, expo, ac, 0, sigma)?;
            }
        }
        k += 1;
    }
    lp.series()
}

/// `𝜅_c(a, q)` as a series (`a > q`).
pub fn bold_kappa_c(alpha: i64, sigma: i64, prec: Exp) -> Result<Series> {
    if alpha >= sigma {
        return Err(Error::Domain("corner product needs a > q".into()));
    }
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    loop {
        let floor = 2 * ((2 * k - 1) * sigma);
        if floor - 4 * sigma >= prec.0 {
            break;
        }
        let rows: [(i64, i64, Rat); 4] = [
            (2 * (4 * k - 2), 0, rat(1, 6)),
            (2 * (2 * k - 1), 0, rint(2 * k - 1)),
            (2 * (4 * k - 2), 0, rat(5, 2) - rint(5 * k)),
            (2 * (4 * k), 0, rint(-3 * k)),
        ];
        for (qh, ah, expo) in rows {
            push(&mut lp, qh, ah, 0, expo, alpha, 0, sigma)?;
        }
        // Double product over m ≥ 1.
        let mut m = 1i64;
        loop {
            let e_min = 2 * ((4 * k + m - 2) * sigma - m * alpha);
            if e_min - 4 * sigma >= prec.0 {
                break;
            }
            // (1 - q^(2k+m/2-1)/a^(m/2))^(4k-2)
            push(
                &mut lp,
                4 * k + m - 2,
                -m,
                0,
                rint(4 * k - 2),
                alpha,
                0,
                sigma,
            )?;
            // (1 - q^(2k+m-1/2)/a^(m-1/2))^(-4k)
            push(
                &mut lp,
                4 * k + 2 * m - 1,
                -(2 * m - 1),
                0,
                rint(-4 * k),
                alpha,
                0,
                sigma,
            )?;
            // (1 - q^(4k+m-2)/a^m)^(-(10k-5))
            push(
                &mut lp,
                2 * (4 * k + m - 2),
                -2 * m,
                0,
                rint(-(10 * k - 5)),
                alpha,
                0,
                sigma,
            )?;
            // (1 - q^(4k+m)/a^m)^(-6k)
            push(
                &mut lp,
                2 * (4 * k + m),
                -2 * m,
                0,
                rint(-6 * k),
                alpha,
                0,
                sigma,
            )?;
            m += 1;
        }
        k += 1;
    }
    // The single m-product 1/(1 - (q/a)^(m-1/2)).
    let mut m = 1i64;
    loop {
        let qh = 2 * m - 1;
        let ah = -(2 * m - 1);
        if 2 * (qh * sigma + ah * alpha) >= prec.0 {
            break;
        }
        push(&mut lp, qh, ah, 0, rint(-1), alpha, 0, sigma)?;
        m += 1;
    }
    lp.series()
}

/// Factor table of `Q(a, b)`: every factor depends on `b` only through
/// `b^(1/2)` (checked structurally by tests).
pub fn q_function_factors(
    prec_hint: i64,
    alpha_a: i64,
    alpha_b: i64,
    sigma: i64,
) -> Vec<ProductFactor> {
    let mut out = Vec::new();
    let mut k = 1i64;
    loop {
        let floor = 2 * ((4 * k - 3) * sigma) / 2 + alpha_b - 2 * alpha_a.abs();
        if floor >= prec_hint {
            break;
        }
        out.push(ProductFactor {
            q_half: 4 * k - 3,
            a_half: 0,
            b_half: 1,
            expo: rint(2 * k - 1),
        });
        out.push(ProductFactor {
            q_half: 4 * k - 1,
            a_half: 0,
            b_half: 1,
            expo: rint(-2 * k),
        });
        let mut m = 1i64;
        loop {
            let e_min = 2 * ((4 * k + m - 4) * sigma + m * alpha_a.min(0) + alpha_b) / 2;
            if e_min >= prec_hint {
                break;
            }
            // ε_(m,1): 1/2 at m = 1, 1 beyond.
            let eps = if m == 1 { rat(1, 2) } else { rint(1) };
            out.push(ProductFactor {
                q_half: 4 * k + m - 3,
                a_half: m,
                b_half: 1,
                expo: rint(4 * k - 2) * eps.clone(),
            });
            out.push(ProductFactor {
                q_half: 4 * k + m - 2,
                a_half: m,
                b_half: 1,
                expo: rint(1),
            });
            out.push(ProductFactor {
                q_half: 4 * k + m - 1,
                a_half: m,
                b_half: 1,
                expo: rint(-4 * k) * eps,
            });
            out.push(ProductFactor {
                q_half: 4 * k + m - 4,
                a_half: m,
                b_half: 1,
                expo: rint(-1),
            });
            m += 1;
        }
        k += 1;
    }
    out
}

/// Factor table of `R(a, b)`: every factor depends on `b` linearly.
pub fn r_function_factors(
    prec_hint: i64,
    alpha_a: i64,
    alpha_b: i64,
    sigma: i64,
) -> Vec<ProductFactor> {
    let mut out = Vec::new();
    let mut k = 1i64;
    loop {
        let floor = 2 * ((8 * k - 8) * sigma / 2 + alpha_b);
        if k > 1 && floor >= prec_hint {
            break;
        }
        let rows: [(i64, i64, Rat); 7] = [
            (8 * k - 8, 0, rint(k - 1)),
            (8 * k - 4, 0, rint(k)),
            (8 * k - 6, 2, rint(3 * k - 2)),
            (8 * k - 6, 0, rint(-(2 * k - 1))),
            (8 * k - 4, 2, rint(-(4 * k - 2))),
            (8 * k - 2, 2, rint(3 * k - 1)),
            (8 * k, 2, rint(-2 * k)),
        ];
        for (qh, ah, expo) in rows {
            out.push(ProductFactor {
                q_half: qh,
                a_half: ah,
                b_half: 2,
                expo,
            });
        }
        let mut m = 2i64;
        loop {
            let e_min = (4 * k + m - 4) * sigma + m * alpha_a.min(0) + 2 * alpha_b;
            if e_min >= prec_hint {
                break;
            }
            let rows_m: [(i64, i64, Rat); 4] = [
                (2 * (4 * k + m - 4), 2 * m, rint(4 * k - 3)),
                (2 * (4 * k + m - 2), 2 * m, rint(4 * k - 1)),
                (2 * (4 * k + m - 3), 2 * m, rint(-(6 * k - 3))),
                (2 * (4 * k + m - 1), 2 * m, rint(-2 * k)),
            ];
            for (qh, ah, expo) in rows_m {
                out.push(ProductFactor {
                    q_half: qh,
                    a_half: ah,
                    b_half: 2,
                    expo,
                });
            }
            m += 1;
        }
        k += 1;
    }
    out
}

/// `𝜅̃_c(a1 | a2, a3 | q)` as a series, assembled as
/// `P0 P1(a1) P2(a1) P3(a1) Q(a1,a2) Q(a1,a3) R(a1,a2) R(a1,a3)`.
pub fn bold_kappa_ct(alphas: [i64; 3], sigma: i64, prec: Exp) -> Result<Series> {
    let [a1, a2, a3] = alphas;
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    loop {
        let floor = 2 * ((4 * k - 5) * sigma);
        if k > 2 && floor >= prec.0 {
            break;
        }
        // P0: (1 - q^(4k-2))^(1/3); the 1/3 is fixed by the summation form
        // and the isotropic reduction.
        push(&mut lp, 8 * k - 4, 0, 0, rat(1, 3), a1, 0, sigma)?;
        // P3 head factors.
        let p3_rows: [(i64, i64, Rat); 11] = [
            (8 * k, -4, rat(k, 2)),
            (16 * k - 4, -4, rint(-k)),
            (16 * k + 4, -4, rint(-k)),
            (16 * k - 12, 0, rint(8 * k - 5)),
            (16 * k - 4, 0, rint(8 * k - 2)),
            (16 * k - 8, 0, rat(7, 2) - rint(9 * k)),
            (16 * k, 0, rint(-7 * k)),
            (16 * k - 8, 4, rint(15 * k - 11) + rat(1, 2)),
            (16 * k, 4, rint(15 * k - 5)),
            (16 * k - 4, 4, rint(-(17 * k - 9))),
            (16 * k + 4, 4, rint(-13 * k)),
        ];
        for (q4, a4, expo) in p3_rows {
            push(&mut lp, q4 / 2, a4 / 2, 0, expo, a1, 0, sigma)?;
        }
        // P1 (m ≥ 1), P2 (m ≥ 0) and P3's m ≥ 2 tail.
        let mut m = 0i64;
        loop {
            let e_min = 2 * ((4 * k + 2 * m - 5) * sigma / 2);
            if m > 1 && e_min >= prec.0 {
                break;
            }
            if m >= 1 {
                let p1_rows: [(i64, i64, Rat); 4] = [
                    (4 * k + 2 * m - 3, 2 * m - 1, rint(4 * k - 2)),
                    (4 * k + 2 * m - 2, 2 * m - 1, rint(2)),
                    (4 * k + 2 * m - 5, 2 * m - 1, rint(-(4 * k - 4))),
                    (4 * k + 2 * m - 4, 2 * m - 1, rint(-2)),
                ];
                for (qh, ah, expo) in p1_rows {
                    push(&mut lp, qh, ah, 0, expo, a1, 0, sigma)?;
                }
            }
            // P2 with ε_(m,0): exponent 1 at m = 0, else 2.
            let eps2 = if m == 0 { rint(1) } else { rint(2) };
            push(&mut lp, 4 * k + 2 * m - 1, 2 * m, 0, eps2.clone(), a1, 0, sigma)?;
            push(&mut lp, 4 * k + 2 * m - 3, 2 * m, 0, -eps2, a1, 0, sigma)?;
            if m >= 2 {
                let p3m_rows: [(i64, i64, Rat); 4] = [
                    (2 * (4 * k + m - 3), 2 * m, rint(16 * k - 11)),
                    (2 * (4 * k + m - 1), 2 * m, rint(16 * k - 5)),
                    (2 * (4 * k + m), 2 * m, rint(-14 * k)),
                    (2 * (4 * k + m - 2), 2 * m, rint(-(18 * k - 9))),
                ];
                for (qh, ah, expo) in p3m_rows {
                    push(&mut lp, qh, ah, 0, expo, a1, 0, sigma)?;
                }
            }
            m += 1;
        }
        k += 1;
    }
    // P4 = Q(a1,a2) Q(a1,a3) and P5 = R(a1,a2) R(a1,a3).
    for b in [a2, a3] {
        for f in q_function_factors(prec.0, a1, b, sigma) {
            push(&mut lp, f.q_half, f.a_half, f.b_half, f.expo, a1, b, sigma)?;
        }
        for f in r_function_factors(prec.0, a1, b, sigma) {
            push(&mut lp, f.q_half, f.a_half, f.b_half, f.expo, a1, b, sigma)?;
        }
    }
    lp.series()
}

/// Isotropic products in `p` (`q = p^6`, `a = p^2`).
pub fn kappa_iso_product(kind: KappaKind, prec: Exp) -> Result<Series> {
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    loop {
        if 4 * (12 * k - 12) >= prec.0 {
            break;
        }
        let rows: Vec<(i64, Rat)> = match kind {
            KappaKind::Bulk => vec![
                (24 * k - 12, rint(2)),
                (24 * k - 18, rint(-1)),
                (24 * k - 6, rint(-1)),
                (24 * k - 14, rint(6 * k - 3)),
                (24 * k - 10, rint(-(6 * k - 3))),
                (24 * k + 8, rint(6 * k)),
                (24 * k - 2, rint(6 * k)),
                (24 * k - 4, rint(6 * k)),
                (24 * k - 8, rint(-6 * k)),
                (24 * k + 2, rint(-6 * k)),
                (24 * k + 4, rint(-6 * k)),
            ],
            KappaKind::Surface => vec![
                (12 * k - 2, rint(2 * k)),
                (12 * k + 2, rint(-2 * k)),
                (12 * k - 4, rint(2 * k - 1)),
                (12 * k - 8, rint(-(2 * k - 1))),
                (24 * k - 2, rint(k)),
                (24 * k + 10, rint(k)),
                (24 * k + 2, rint(-k)),
                (24 * k - 10, rint(-k)),
                (24 * k - 16, rint(2 * k - 1)),
                (24 * k - 8, rint(-(2 * k - 1))),
                (24 * k + 2, rint(2 * k)),
                (24 * k + 4, rint(2 * k)),
                (24 * k - 8, rint(2 * k)),
                (24 * k - 2, rint(-2 * k)),
                (24 * k - 4, rint(-2 * k)),
                (24 * k + 8, rint(-2 * k)),
                (24 * k - 10, rint(2 * k - 1)),
                (24 * k - 14, rint(-(2 * k - 1))),
            ],
            KappaKind::Corner60 => vec![
                (12 * k - 2, rint(2 * k - 1)),
                (24 * k - 16, rint(5 * k - 3)),
                (24 * k - 4, rint(3 * k)),
                (24 * k - 12, rat(-1, 3)),
                (12 * k - 10, rint(-(2 * k - 1))),
                (24 * k - 20, rint(-(3 * k - 3))),
                (24 * k - 8, rint(-(5 * k - 2))),
            ],
            KappaKind::Corner120 => vec![
                (24 * k - 14, rat(1, 2)),
                (24 * k - 10, rat(1, 2)),
                (24 * k - 12, rat(-1, 6)),
                (12 * k - 9, rint(-1)),
                (12 * k - 7, rint(-2)),
                (12 * k - 5, rint(-2)),
                (12 * k - 3, rint(-1)),
                (24 * k - 20, rint(k * k - k + 2)),
                (24 * k - 12, rint(k * k - k - 1)),
                (24 * k - 4, rint(k * k - k + 2)),
                (24 * k - 16, rint(-(k * k - 1))),
                (24 * k - 8, rint(-(k * k - 2 * k))),
                (24 * k, rint(-k * k)),
                (24 * k - 18, rint(k + 2)),
                (24 * k - 10, rint(2 * k)),
                (24 * k - 14, rint(-(2 * k - 2))),
                (24 * k - 6, rint(-(k - 3))),
            ],
        };
        for (e, expo) in rows {
            if 4 * e < prec.0 && !expo.is_zero() {
                lp.factor(Exp::int(e), &expo)?;
            }
        }
        k += 1;
    }
    lp.series()
}

/// The low-temperature variable as a series in the nome:
/// `z = p ∏ (1-p^(24k-20))(1-p^(24k-4)) / ((1-p^(24k-16))(1-p^(24k-8)))`.
pub fn iso_z_series(prec: Exp) -> Result<Series> {
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    while 4 * (24 * k - 20) < prec.0 {
        lp.factor_int(Exp::int(24 * k - 20), 1)?;
        lp.factor_int(Exp::int(24 * k - 4), 1)?;
        lp.factor_int(Exp::int(24 * k - 16), -1)?;
        lp.factor_int(Exp::int(24 * k - 8), -1)?;
        k += 1;
    }
    Ok(lp.series()?.shift(Exp::int(1)))
}

/// `G(a, q)` as a series with `a = p^alpha`, `q = p^sigma`.
pub fn elliptic_g_series(alpha: i64, sigma: i64, prec: Exp) -> Result<Series> {
    if alpha.abs() >= sigma {
        return Err(Error::Domain(format!(
            "G(p^{alpha}, p^{sigma}) does not expand on positive powers"
        )));
    }
    let mut lp = LogProduct::new(prec);
    let mut n = 1i64;
    while 4 * ((4 * n - 3) * sigma - alpha.abs()) < prec.0 {
        lp.factor_int(Exp::int((4 * n - 3) * sigma - alpha), 1)?;
        lp.factor_int(Exp::int((4 * n - 1) * sigma + alpha), 1)?;
        lp.factor_int(Exp::int((4 * n - 3) * sigma + alpha), -1)?;
        lp.factor_int(Exp::int((4 * n - 1) * sigma - alpha), -1)?;
        n += 1;
    }
    lp.series()
}

/// `H(a, q)` as a series with `a = p^alpha`, `q = p^sigma`.
pub fn elliptic_h_series(alpha: i64, sigma: i64, prec: Exp) -> Result<Series> {
    if alpha.abs() >= sigma {
        return Err(Error::Domain(format!(
            "H(p^{alpha}, p^{sigma}) does not expand on positive powers"
        )));
    }
    let mut lp = LogProduct::new(prec);
    let mut n = 1i64;
    while 4 * ((2 * n - 1) * sigma - alpha.abs()) < prec.0 {
        lp.factor(Exp::int((2 * n - 1) * sigma - alpha), &rint(2 * n - 1))?;
        lp.factor(Exp::int((2 * n - 1) * sigma + alpha), &rint(-(2 * n - 1)))?;
        lp.factor(Exp::int(2 * n * sigma + alpha), &rint(2 * n))?;
        lp.factor(Exp::int(2 * n * sigma - alpha), &rint(-2 * n))?;
        n += 1;
    }
    lp.series()
}

/// Boltzmann weights `z_j = a_j^(1/2) G(a_j, q)` as series with the given
/// relative window (quarter units).
pub fn boltzmann_point(params: &EllipticParams, rel_window: i64) -> Result<BoltzmannPoint> {
    let mut z = Vec::with_capacity(3);
    for j in 0..3 {
        let alpha = params.alpha[j];
        let g = elliptic_g_series(alpha, params.sigma, Exp(rel_window + 4))?;
        z.push(g.shift(Exp(2 * alpha)));
    }
    BoltzmannPoint::new(
        [z[0].clone(), z[1].clone(), z[2].clone()],
        if *params == EllipticParams::isotropic() {
            Provenance::Isotropic
        } else {
            Provenance::ExponentParametrized {
                alpha: params.alpha,
                sigma: params.sigma,
            }
        },
    )
}

/// Product form of a free energy at the given parametrization and type
/// index (0-based; ignored for the bulk).
pub fn kappa_product(
    kind: KappaKind,
    params: &EllipticParams,
    type_index: usize,
    prec: Exp,
) -> Result<Series> {
    match kind {
        KappaKind::Bulk => {
            let mut acc = Series::one(prec);
            for j in 0..3 {
                acc = acc.mul(&bold_kappa_b(params.alpha[j], params.sigma, prec)?);
            }
            Ok(acc)
        }
        KappaKind::Surface => bold_kappa_s(params.args_for_type(type_index), params.sigma, prec),
        KappaKind::Corner60 => bold_kappa_c(params.alpha[type_index % 3], params.sigma, prec),
        KappaKind::Corner120 => bold_kappa_ct(params.args_for_type(type_index), params.sigma, prec),
    }
}

fn sqrt_monomials(alphas: &[i64], sigma: i64, m: i64, prec: Exp) -> (Vec<Series>, Series) {
    // Generous internal window: the F evaluators divide by a^m and q^m, and
    // every Laurent inverse costs twice the valuation.
    let internal = Exp(prec.0 + 16 * sigma.max(1) * m + 16);
    let sa: Vec<Series> = alphas
        .iter()
        .map(|&a| Series::monomial(GaussRat::one(), Exp(2 * a * m), internal))
        .collect();
    let sq = Series::monomial(GaussRat::one(), Exp(2 * sigma * m), internal);
    (sa, sq)
}

fn check_domain(kind: KappaKind, args: [i64; 3], sigma: i64) -> Result<()> {
    let ok = match kind {
        // q² < a < q^(-2) for each factor argument
        KappaKind::Bulk => args.iter().all(|a| a.abs() < 2 * sigma),
        // q³ < a1 < 1/q and q² < a2, a3 < q^(-2)
        KappaKind::Surface => {
            args[0] < 3 * sigma
                && args[0] > -sigma
                && args[1].abs() < 2 * sigma
                && args[2].abs() < 2 * sigma
        }
        // a > q
        KappaKind::Corner60 => args[0] < sigma,
        // a1 < 1/q and a2, a3 < min(1/q, 1/(q a1))
        KappaKind::Corner120 => {
            let bound = (-sigma).max(-(sigma + args[0]));
            args[0] > -sigma && args[1] > bound && args[2] > bound
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{} sum form diverges at exponents {args:?}, sigma {sigma}",
            kind.label()
        )))
    }
}

/// `log κ` from the summation form: `Σ_m F(args^m)/m` to `prec`, with raw
/// exponent arguments (the bulk uses all three as the separate single
/// arguments of its three factors).
pub fn log_kappa_sum_raw(
    kind: KappaKind,
    args: [i64; 3],
    sigma: i64,
    prec: Exp,
) -> Result<Series> {
    check_domain(kind, args, sigma)?;
    let mut acc = Series::zero(prec);
    // The m-th summand is the m = 1 term with p -> p^m, so its valuation
    // grows linearly in m and the loop stops once it clears the window.
    let mut m = 1i64;
    loop {
        let term = match kind {
            KappaKind::Bulk => {
                let mut t = Series::zero(prec);
                for j in 0..3 {
                    let (sa, sq) = sqrt_monomials(&[args[j]], sigma, m, prec);
                    t = t.add(&f_bulk(&sa[0], &sq));
                }
                t
            }
            KappaKind::Surface => {
                let (sa, sq) = sqrt_monomials(&args, sigma, m, prec);
                f_surface(&sa[0], &sa[1], &sa[2], &sq)
            }
            KappaKind::Corner60 => {
                let (sa, sq) = sqrt_monomials(&args[..1], sigma, m, prec);
                f_corner60(&sa[0], &sq)
            }
            KappaKind::Corner120 => {
                let (sa, sq) = sqrt_monomials(&args, sigma, m, prec);
                f_corner120(&sa[0], &sa[1], &sa[2], &sq)
            }
        };
        if term.is_zero_to_window() {
            break;
        }
        acc = acc.add(&term.truncate(prec).scale_rat(&rat(1, m)));
        if term.val().0 * (m + 1) >= m * prec.0 {
            break;
        }
        m += 1;
    }
    Ok(acc)
}

/// Summation form of a free energy: `exp( Σ_m F(args^m)/m )` to `prec`.
pub fn kappa_sumform(
    kind: KappaKind,
    params: &EllipticParams,
    type_index: usize,
    prec: Exp,
) -> Result<Series> {
    let args = match kind {
        KappaKind::Bulk => params.alpha,
        _ => params.args_for_type(type_index),
    };
    log_kappa_sum_raw(kind, args, params.sigma, prec)?.exp()
}
