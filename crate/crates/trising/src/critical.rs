//! Floating-point evaluation of the elliptic parametrization, conjugate-nome
//! forms, critical-limit singular coefficients, conformal-invariance
//! cross-checks and the square-lattice reduction.
//!
//! The critical point sits at nome `q -> 1`; writing `q = e^(-πλ)`,
//! `a_j = e^(-πu_j)` with `u_1+u_2+u_3 = λ`, the conjugate nome
//! `q' = e^(-π/λ)` is the natural deviation-from-criticality variable
//! (`T_c - T` is identified with `q'`). Products and sums in `q` converge
//! slowly near criticality; the conjugate-nome (Poisson-resummed) forms
//! converge fast. Corner free energies diverge like `log q'`; their
//! closed-form coefficients are reported as the coefficient of
//! `q'^k·log(1/q')` in `log κ`, which is what the least-squares fits
//! recover and the positive quantity the conformal prediction matches after
//! `-log q' ↔ log L`.

use crate::error::{Error, Result};
use crate::formulas::{f_bulk, f_corner120, f_corner60, f_surface};
use crate::scalar::Rat;
use num_bigint::BigInt;
use num_traits::One;
use std::f64::consts::PI;

/// A point of the critical parametrization.
#[derive(Copy, Clone, Debug)]
pub struct CriticalPoint {
    pub lambda: f64,
    pub u: [f64; 3],
}

impl CriticalPoint {
    pub fn new(lambda: f64, u: [f64; 3]) -> Result<Self> {
        if lambda <= 0.0 {
            return Err(Error::Domain("lambda must be positive".into()));
        }
        if (u.iter().sum::<f64>() - lambda).abs() > 1e-12 * lambda {
            return Err(Error::Domain("u_1 + u_2 + u_3 must equal lambda".into()));
        }
        if u.iter().any(|&x| x < 0.0 || x >= lambda) {
            return Err(Error::Domain("need 0 <= u_j < lambda".into()));
        }
        Ok(CriticalPoint { lambda, u })
    }

    /// Ratios `u_j/λ`, fixed along the approach to criticality.
    pub fn ratios(&self) -> [f64; 3] {
        [
            self.u[0] / self.lambda,
            self.u[1] / self.lambda,
            self.u[2] / self.lambda,
        ]
    }

    pub fn isotropic(lambda: f64) -> Self {
        CriticalPoint {
            lambda,
            u: [lambda / 3.0; 3],
        }
    }

    /// Square-lattice reduction: third coupling off (`u_3 = 0`).
    pub fn square(lambda: f64) -> Self {
        CriticalPoint {
            lambda,
            u: [lambda / 2.0, lambda / 2.0, 0.0],
        }
    }

    pub fn q(&self) -> f64 {
        (-PI * self.lambda).exp()
    }

    pub fn qprime(&self) -> f64 {
        (-PI / self.lambda).exp()
    }

    /// The point with the same ratios at a different conjugate nome.
    pub fn with_qprime(&self, qprime: f64) -> Result<Self> {
        if qprime <= 0.0 || qprime >= 1.0 {
            return Err(Error::Domain("q' must lie in (0,1)".into()));
        }
        let lambda = -PI / qprime.ln();
        let r = self.ratios();
        CriticalPoint::new(lambda, [r[0] * lambda, r[1] * lambda, r[2] * lambda])
    }
}

/// Which defining product to evaluate.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EllipticFn {
    G,
    H,
    Z,
    ModulusK,
    Eta,
    Mu,
}

/// Evaluate one of the defining infinite products at `(w, q)` to the given
/// relative tolerance; products are truncated when a geometric bound on the
/// remaining log-tail drops below a tenth of the tolerance.
pub fn elliptic_eval(which: EllipticFn, w: f64, q: f64, tol: f64) -> Result<f64> {
    if q <= 0.0 || q >= 1.0 {
        return Err(Error::Domain(format!("need 0 < q < 1, got {q}")));
    }
    let check_w = |lim: f64| -> Result<()> {
        if w <= 0.0 || w >= lim {
            Err(Error::Domain(format!(
                "argument w = {w} outside the convergence region (0, {lim})"
            )))
        } else {
            Ok(())
        }
    };
    let log_tol = tol.max(1e-15) / 10.0;
    match which {
        EllipticFn::G => {
            // ∏ (1-q^(4n-3)/w)(1-q^(4n-1)w) / ((1-q^(4n-3)w)(1-q^(4n-1)/w)).
            // Early factors may be negative (w below q); track the sign and
            // sum logs of absolute values.
            check_w(1.0 / q)?;
            let mut acc = 0.0f64;
            let mut sign = 1.0f64;
            let mut n = 1i64;
            loop {
                let q3 = q.powi((4 * n - 3) as i32);
                let q1 = q.powi((4 * n - 1) as i32);
                for (fac, up) in [
                    (1.0 - q3 / w, true),
                    (1.0 - q1 * w, true),
                    (1.0 - q3 * w, false),
                    (1.0 - q1 / w, false),
                ] {
                    if fac == 0.0 {
                        return Err(Error::Domain("vanishing product factor".into()));
                    }
                    if fac < 0.0 {
                        sign = -sign;
                    }
                    acc += if up { fac.abs().ln() } else { -fac.abs().ln() };
                }
                // Tail: |log(1±x)| ≤ 2|x| for |x| ≤ 1/2, geometric in q⁴.
                let tail = 8.0 * q3 * q * (w + 1.0 / w) / (1.0 - q.powi(4));
                if tail < log_tol {
                    break;
                }
                n += 1;
            }
            Ok(sign * acc.exp())
        }
        EllipticFn::H => {
            check_w(1.0 / q)?;
            let mut acc = 0.0f64;
            let mut n = 1i64;
            loop {
                let qo = q.powi((2 * n - 1) as i32);
                let qe = q.powi((2 * n) as i32);
                acc += (2 * n - 1) as f64 * ((1.0 - qo / w).ln() - (1.0 - qo * w).ln())
                    + (2 * n) as f64 * ((1.0 - qe * w).ln() - (1.0 - qe / w).ln());
                let tail =
                    16.0 * (n as f64 + 1.0) * qe * q * (w + 1.0 / w) / (1.0 - q * q).powi(2);
                if tail < log_tol {
                    break;
                }
                n += 1;
            }
            Ok(acc.exp())
        }
        EllipticFn::Z => {
            // z(w, q) = w^(1/2) G(w, q).
            check_w(1.0 / q)?;
            let g = elliptic_eval(EllipticFn::G, w, q, tol)?;
            Ok(w.sqrt() * g)
        }
        EllipticFn::ModulusK => {
            // k = 4√q ∏ ((1+q^(2n))/(1+q^(2n-1)))⁴
            let mut acc = 0.0f64;
            let mut n = 1i64;
            loop {
                let qe = q.powi((2 * n) as i32);
                let qo = q.powi((2 * n - 1) as i32);
                acc += 4.0 * ((1.0 + qe).ln() - (1.0 + qo).ln());
                if 16.0 * qe * q / (1.0 - q * q) < log_tol {
                    break;
                }
                n += 1;
            }
            Ok(4.0 * q.sqrt() * acc.exp())
        }
        EllipticFn::Eta => {
            // ∏ (1-q^(4k-2))²/(1-q^(2k-1))
            let mut acc = 0.0f64;
            let mut k = 1i64;
            loop {
                let q42 = q.powi((4 * k - 2) as i32);
                let q21 = q.powi((2 * k - 1) as i32);
                acc += 2.0 * (1.0 - q42).ln() - (1.0 - q21).ln();
                if 8.0 * q21 * q / (1.0 - q * q) < log_tol {
                    break;
                }
                k += 1;
            }
            Ok(acc.exp())
        }
        EllipticFn::Mu => {
            let mut acc = 0.0f64;
            let mut k = 1i64;
            loop {
                let q42 = q.powi((4 * k - 2) as i32);
                acc += (1.0 - q42).ln();
                if 4.0 * q42 * q / (1.0 - q.powi(4)) < log_tol {
                    break;
                }
                k += 1;
            }
            Ok(acc.exp())
        }
    }
}

/// `ĝ(0)` of the H-function Poisson transform: the full-line integral of
/// `sinh(2rx)/(x cosh²x)`, `r = u/λ`, by adaptive Simpson quadrature.
/// The derivative identity `dĝ(0)/dr = 4πr/sin(πr)` gives an independent
/// quadrature route used as a cross-check in tests.
pub fn h_hat_g0(r: f64, tol: f64) -> Result<f64> {
    if r.abs() >= 1.0 {
        return Err(Error::Domain("u/lambda must lie in (-1, 1)".into()));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| -> f64 {
        if x.abs() < 1e-8 {
            2.0 * r + (4.0 / 3.0) * r.powi(3) * x * x - 2.0 * r * x * x
        } else {
            (2.0 * r * x).sinh() / (x * x.cosh() * x.cosh())
        }
    };
    // Integrand decays like e^((2|r|-2)x); cut where the tail is negligible.
    let decay = 2.0 - 2.0 * r.abs();
    let cut = (40.0 / decay.max(0.05)).clamp(10.0, 745.0);
    let value = adaptive_simpson(&f, 0.0, cut, tol / 4.0, 24);
    Ok(2.0 * value)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    rec(f, a, b, simpson(f, a, b), tol, depth)
}

/// Which conjugate-nome representation to evaluate.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum ConjugateWhich {
    /// `log z_j` for the given type index.
    Zj(usize),
    /// `log H(w, q)` at `w = e^(-πu)` for the given `u/λ` ratio.
    H(f64),
}

/// Conjugate-nome (fast near criticality) representations:
///
/// `log z_j = log tan[π(λ-u_j)/(4λ)]
///            - 4 Σ_(m odd) (-1)^((m-1)/2) q'^m sin[πm u_j/(2λ)]/(m(1-q'^m))`
///
/// `log H = πu/4 - ĝ(0)/4 - Σ_(m odd) [ 4 q'^(2m)(S_m - πm(u/λ)C_m)/(πm²(1-q'^(2m)))
///            + 8 q'^(2m) S_m/(λ m (1-q'^(2m))²) ]`,  `S_m, C_m = sin, cos(πmu/λ)`.
pub fn conjugate_form(pt: &CriticalPoint, which: ConjugateWhich, tol: f64) -> Result<f64> {
    let lambda = pt.lambda;
    let qp = pt.qprime();
    match which {
        ConjugateWhich::Zj(j) => {
            let u = pt.u[j];
            let mut acc = (PI * (lambda - u) / (4.0 * lambda)).tan().ln();
            let mut m = 1i64;
            loop {
                let qpm = qp.powi(m as i32);
                if 8.0 * qpm / (1.0 - qp) < tol / 10.0 {
                    break;
                }
                let sign = if (m - 1) % 4 == 0 { 1.0 } else { -1.0 };
                acc -= 4.0 * sign * qpm * (PI * m as f64 * u / (2.0 * lambda)).sin()
                    / (m as f64 * (1.0 - qpm));
                m += 2;
            }
            Ok(acc)
        }
        ConjugateWhich::H(r) => {
            let u = r * lambda;
            let mut acc = PI * u / 4.0 - h_hat_g0(r, tol)? / 4.0;
            let mut m = 1i64;
            loop {
                let qp2m = qp.powi(2 * m as i32);
                if 24.0 * qp2m / (1.0 - qp * qp) < tol / 10.0 {
                    break;
                }
                let s = (PI * m as f64 * r).sin();
                let c = (PI * m as f64 * r).cos();
                acc -= 4.0 * qp2m * (s - PI * m as f64 * r * c)
                    / (PI * (m * m) as f64 * (1.0 - qp2m));
                acc -= 8.0 * qp2m * s / (lambda * m as f64 * (1.0 - qp2m) * (1.0 - qp2m));
                m += 2;
            }
            Ok(acc)
        }
    }
}

/// Direct-product value of the same quantity, for cross-validation.
pub fn direct_form(pt: &CriticalPoint, which: ConjugateWhich, tol: f64) -> Result<f64> {
    let q = pt.q();
    match which {
        ConjugateWhich::Zj(j) => {
            let a = (-PI * pt.u[j]).exp();
            Ok(elliptic_eval(EllipticFn::Z, a, q, tol)?.ln())
        }
        ConjugateWhich::H(r) => {
            let w = (-PI * r * pt.lambda).exp();
            Ok(elliptic_eval(EllipticFn::H, w, q, tol)?.ln())
        }
    }
}

/// The free-energy pieces with closed-form singular coefficients.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FreeEnergyKind {
    Bulk,
    Surface,
    Corner60,
    Corner120,
    /// Square-lattice corner: `u_3 = 0`, arithmetic mean of the 60° and
    /// 120° forms, which removes the corner-split ambiguity.
    CornerSquareMean,
}

/// Closed-form coefficient of the leading singularity of `log κ`, reported
/// as the coefficient of `q'^k · log(1/q')` with `k = 2` (bulk), `1`
/// (surface) and `0` (corners):
///
/// * bulk — `(4/π) Σ_j sin(πu_j/λ)`;
/// * surface — `-(2/π) sin[π(1+u_1/λ)/2]` (sign and prefactor fixed by the
///   residue of the summation form at its `Im = 1/(2λ)` double pole and
///   confirmed by the fits);
/// * 60° corner — `(5+u/λ)/(144(1-u/λ))`;
/// * 120° corner — `(2-u_1/λ)/(72(1+u_1/λ))`.
pub fn singular_coefficient(which: FreeEnergyKind, pt: &CriticalPoint) -> Result<f64> {
    let r = pt.ratios();
    match which {
        FreeEnergyKind::Bulk => Ok((4.0 / PI) * r.iter().map(|&x| (PI * x).sin()).sum::<f64>()),
        FreeEnergyKind::Surface => Ok(-2.0 * (PI * (1.0 + r[0]) / 2.0).sin() / PI),
        FreeEnergyKind::Corner60 => {
            if (1.0 - r[0]).abs() < 1e-12 {
                return Err(Error::Domain("60° coefficient has a pole at u = λ".into()));
            }
            Ok((5.0 + r[0]) / (144.0 * (1.0 - r[0])))
        }
        FreeEnergyKind::Corner120 => Ok((2.0 - r[0]) / (72.0 * (1.0 + r[0]))),
        FreeEnergyKind::CornerSquareMean => {
            if pt.u[2].abs() > 1e-12 {
                return Err(Error::Domain("square-lattice mean needs u_3 = 0".into()));
            }
            let zero = CriticalPoint::new(pt.lambda, [0.0, pt.u[0], pt.u[1]])?;
            Ok(0.5
                * (singular_coefficient(FreeEnergyKind::Corner60, &zero)?
                    + singular_coefficient(FreeEnergyKind::Corner120, &zero)?))
        }
    }
}

/// Free-energy value at a point, from the convergent summation forms
/// (`Σ_m F(args^m)/m` with arguments `e^(-πu_j m)`, `e^(-πλm)`).
pub fn free_energy(which: FreeEnergyKind, pt: &CriticalPoint, tol: f64) -> Result<f64> {
    if which == FreeEnergyKind::CornerSquareMean && pt.u[2].abs() > 1e-12 {
        return Err(Error::Domain("square-lattice mean needs u_3 = 0".into()));
    }
    let lambda = pt.lambda;
    let u = pt.u;
    let term = |m: i64| -> f64 {
        let e = |x: f64| (-PI * x * m as f64 / 2.0).exp(); // square roots
        let sq = e(lambda);
        let sa = [e(u[0]), e(u[1]), e(u[2])];
        match which {
            FreeEnergyKind::Bulk => f_bulk(&sa[0], &sq) + f_bulk(&sa[1], &sq) + f_bulk(&sa[2], &sq),
            FreeEnergyKind::Surface => f_surface(&sa[0], &sa[1], &sa[2], &sq),
            FreeEnergyKind::Corner60 => f_corner60(&sa[0], &sq),
            FreeEnergyKind::Corner120 => f_corner120(&sa[0], &sa[1], &sa[2], &sq),
            FreeEnergyKind::CornerSquareMean => {
                0.5 * (f_corner60(&sa[2], &sq) + f_corner120(&sa[2], &sa[0], &sa[1], &sq))
            }
        }
    };
    let mut acc = 0.0f64;
    let mut m = 1i64;
    let mut last = f64::INFINITY;
    loop {
        let t = term(m) / m as f64;
        acc += t;
        // Terms decay geometrically once m clears ~1/λ; stop on a stable
        // small tail.
        if t.abs() < tol / 20.0 && last.abs() < tol / 20.0 {
            break;
        }
        if m > 200_000 {
            return Err(Error::ToleranceNotReached {
                achieved: t.abs(),
                requested: tol,
            });
        }
        last = t;
        m += 1;
    }
    Ok(acc)
}

/// Result of a singular-coefficient fit.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub coefficient: f64,
    pub closed_form: f64,
    pub relative_error: f64,
    pub condition: f64,
}

/// Fit the singular coefficient from free-energy values on a `q'` grid.
///
/// With `x = log(1/q')`, the models are: corners — `C·x + B + D/x` plus
/// first-order conjugate-nome duals `q'`, `q'x`; surface — `C·q'x` plus
/// analytic terms and the `q'²x` dual; bulk — `C·q'²x + analytic(q')`.
/// Residual corrections are `O(q'²)` and smaller.
pub fn fit_singularity(
    which: FreeEnergyKind,
    pt: &CriticalPoint,
    grid: &[f64],
) -> Result<FitResult> {
    if grid.len() < 6 {
        return Err(Error::Domain("need at least 6 grid points".into()));
    }
    for &qp in grid {
        if !(1e-9..0.05).contains(&qp) {
            return Err(Error::Domain(format!(
                "grid point {qp} outside (1e-9, 0.05)"
            )));
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut rhs: Vec<f64> = Vec::with_capacity(grid.len());
    let mut target_col = 0usize;
    for &qp in grid {
        let point = pt.with_qprime(qp)?;
        let y = free_energy(which, &point, 1e-14)?;
        let x = -qp.ln();
        let row = match which {
            FreeEnergyKind::Bulk => {
                target_col = 4;
                vec![1.0, qp, qp * qp, qp * qp * qp, qp * qp * x]
            }
            FreeEnergyKind::Surface => {
                target_col = 4;
                vec![1.0, qp, qp * qp, qp * qp * qp, qp * x, qp * qp * x]
            }
            _ => {
                target_col = 1;
                vec![1.0, x, 1.0 / x, qp, qp * x]
            }
        };
        rows.push(row);
        rhs.push(y);
    }
    let (sol, cond) = least_squares(&rows, &rhs)?;
    if cond > 1e12 {
        return Err(Error::IllConditionedFit(cond));
    }
    let closed = singular_coefficient(which, pt)?;
    let coefficient = sol[target_col];
    Ok(FitResult {
        coefficient,
        closed_form: closed,
        relative_error: (coefficient - closed).abs() / closed.abs().max(1e-300),
        condition: cond,
    })
}

/// Column-scaled normal-equation least squares (the systems here are tiny);
/// the condition estimate is a pivot ratio on the scaled Gram matrix.
fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let m = rows.len();
    let n = rows[0].len();
    if m < n {
        return Err(Error::Domain("fewer points than parameters".into()));
    }
    let mut scale = vec![0.0f64; n];
    for row in rows {
        for (j, &v) in row.iter().enumerate() {
            scale[j] = scale[j].max(v.abs());
        }
    }
    for s in &mut scale {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut g = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    for (row, &y) in rows.iter().zip(rhs) {
        for i in 0..n {
            let ri = row[i] / scale[i];
            b[i] += ri * y;
            for j in 0..n {
                g[i][j] += ri * row[j] / scale[j];
            }
        }
    }
    let mut a = g;
    let mut rhsv = b;
    let mut min_piv = f64::INFINITY;
    let mut max_piv = 0.0f64;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())
            .unwrap();
        a.swap(k, piv);
        rhsv.swap(k, piv);
        let p = a[k][k];
        if p.abs() < 1e-300 {
            return Err(Error::IllConditionedFit(f64::INFINITY));
        }
        min_piv = min_piv.min(p.abs());
        max_piv = max_piv.max(p.abs());
        for i in k + 1..n {
            let f = a[i][k] / p;
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            rhsv[i] -= f * rhsv[k];
        }
    }
    let mut x = vec![0.0f64; n];
    for k in (0..n).rev() {
        let mut acc = rhsv[k];
        for j in k + 1..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    for (j, v) in x.iter_mut().enumerate() {
        *v /= scale[j];
    }
    Ok((x, max_piv / min_piv))
}

/// The universal conformal corner term `(c/24)(γ/π - π/γ)`.
pub fn cardy_peschel(gamma: f64, c: f64) -> Result<f64> {
    if gamma <= 0.0 || gamma >= 2.0 * PI {
        return Err(Error::Domain("corner angle must lie in (0, 2π)".into()));
    }
    Ok(c / 24.0 * (gamma / PI - PI / gamma))
}

/// Exact-rational version at `γ = gamma_over_pi·π` and rational `c`.
pub fn cardy_peschel_exact(gamma_over_pi: Rat, c: Rat) -> Result<Rat> {
    use num_traits::Zero;
    if gamma_over_pi <= Rat::zero() || gamma_over_pi >= Rat::from_integer(BigInt::from(2)) {
        return Err(Error::Domain("corner angle must lie in (0, 2π)".into()));
    }
    let inv = Rat::from_integer(BigInt::one()) / gamma_over_pi.clone();
    Ok(c / Rat::from_integer(BigInt::from(24)) * (gamma_over_pi - inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_at_unit_argument_is_one() {
        for q in [0.05, 0.3, 0.6] {
            assert!((elliptic_eval(EllipticFn::G, 1.0, q, 1e-13).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_inversion_identities() {
        // z(1/a, q) = 1/z(a, q) and z(q²/a, q) = -z(a, q) at (a,q) = (0.3, 0.1).
        let (a, q) = (0.3, 0.1);
        let z = elliptic_eval(EllipticFn::Z, a, q, 1e-14).unwrap();
        let zinv = elliptic_eval(EllipticFn::Z, 1.0 / a, q, 1e-14).unwrap();
        assert!((z * zinv - 1.0).abs() < 1e-12);
        let zneg = elliptic_eval(EllipticFn::Z, q * q / a, q, 1e-14).unwrap();
        assert!((zneg + z).abs() < 1e-12);
    }

    #[test]
    fn modulus_small_nome_asymptotics() {
        // k -> 4√q as q -> 0.
        let q = 1e-8;
        let k = elliptic_eval(EllipticFn::ModulusK, 0.0, q, 1e-13).unwrap();
        assert!((k / (4.0 * q.sqrt()) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn modulus_conjugate_product() {
        // k(q) = ∏_(m odd) ((1-q'^m)/(1+q'^m))⁴ with q' the conjugate nome.
        let pt = CriticalPoint::isotropic(0.8);
        let k = elliptic_eval(EllipticFn::ModulusK, 0.0, pt.q(), 1e-14).unwrap();
        let qp = pt.qprime();
        let mut acc = 0.0f64;
        let mut m = 1;
        while qp.powi(m) > 1e-18 {
            acc += 4.0 * ((1.0 - qp.powi(m)).ln() - (1.0 + qp.powi(m)).ln());
            m += 2;
        }
        assert!((k - acc.exp()).abs() < 1e-12);
    }

    #[test]
    fn hat_g0_matches_derivative_route() {
        // ĝ(0)(r) = ∫_0^r 4πt/sin(πt) dt.
        for r in [0.25, 1.0 / 3.0, 0.5, 0.75] {
            let direct = h_hat_g0(r, 1e-12).unwrap();
            let f = |t: f64| {
                if t.abs() < 1e-12 {
                    4.0
                } else {
                    4.0 * PI * t / (PI * t).sin()
                }
            };
            let alt = adaptive_simpson(&f, 0.0, r, 1e-13, 24);
            assert!((direct - alt).abs() < 1e-10, "r = {r}: {direct} vs {alt}");
        }
    }

    #[test]
    fn conjugate_forms_agree_with_products() {
        for lambda in [0.3, 0.5, 1.0, 2.0, 3.0] {
            for ur in [0.0, 0.25, 1.0 / 3.0, 0.5, 0.75] {
                let u1 = ur * lambda;
                let rest = (lambda - u1) / 2.0;
                let pt = CriticalPoint::new(lambda, [u1, rest, rest]).unwrap();
                let za = direct_form(&pt, ConjugateWhich::Zj(0), 1e-14).unwrap();
                let zb = conjugate_form(&pt, ConjugateWhich::Zj(0), 1e-14).unwrap();
                assert!(
                    (za - zb).abs() <= 1e-10 * za.abs().max(1.0),
                    "z mismatch at λ={lambda}, u/λ={ur}: {za} vs {zb}"
                );
                let ha = direct_form(&pt, ConjugateWhich::H(ur), 1e-14).unwrap();
                let hb = conjugate_form(&pt, ConjugateWhich::H(ur), 1e-14).unwrap();
                assert!(
                    (ha - hb).abs() <= 1e-10 * ha.abs().max(1.0),
                    "H mismatch at λ={lambda}, u/λ={ur}: {ha} vs {hb}"
                );
            }
        }
    }

    #[test]
    fn conjugate_z_small_qprime_expansion() {
        // z_j -> tan[π(1-u_j/λ)/4]·[1 - 4q' sin(πu_j/(2λ)) + O(q'²)].
        let pt = CriticalPoint::isotropic(0.28);
        let qp = pt.qprime();
        let z = direct_form(&pt, ConjugateWhich::Zj(0), 1e-14).unwrap().exp();
        let lead = (PI * (1.0 - 1.0 / 3.0) / 4.0).tan();
        let first = 1.0 - 4.0 * qp * (PI / 6.0).sin();
        assert!((z / (lead * first) - 1.0).abs() < 30.0 * qp * qp);
    }

    #[test]
    fn corner_fits_recover_isotropic_rationals() {
        let grid: Vec<f64> = (0..18)
            .map(|i| 10f64.powf(-7.0 + 4.0 * i as f64 / 17.0))
            .collect();
        let pt = CriticalPoint::isotropic(1.0);
        let fit60 = fit_singularity(FreeEnergyKind::Corner60, &pt, &grid).unwrap();
        assert!((fit60.coefficient - 1.0 / 18.0).abs() < 1e-3 / 18.0, "{fit60:?}");
        let fit120 = fit_singularity(FreeEnergyKind::Corner120, &pt, &grid).unwrap();
        assert!(
            (fit120.coefficient - 5.0 / 288.0).abs() < 1e-3 * 5.0 / 288.0,
            "{fit120:?}"
        );
        let sq = CriticalPoint::square(1.0);
        let fitsq = fit_singularity(FreeEnergyKind::CornerSquareMean, &sq, &grid).unwrap();
        assert!((fitsq.coefficient - 1.0 / 32.0).abs() < 1e-3 / 32.0, "{fitsq:?}");
    }

    #[test]
    fn bulk_and_surface_fits_recover_closed_forms() {
        let grid: Vec<f64> = (0..16)
            .map(|i| 10f64.powf(-5.0 + 2.8 * i as f64 / 15.0))
            .collect();
        let pt = CriticalPoint::isotropic(1.0);
        let fb = fit_singularity(FreeEnergyKind::Bulk, &pt, &grid).unwrap();
        assert!(fb.relative_error < 1e-3, "{fb:?}");
        let fs = fit_singularity(FreeEnergyKind::Surface, &pt, &grid).unwrap();
        assert!(fs.relative_error < 1e-3, "{fs:?}");
    }

    #[test]
    fn synthetic_fit_consistency() {
        // Data generated from the closed form alone is fitted exactly.
        let c_true = 1.0 / 18.0;
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let x = 7.0 + i as f64;
                vec![1.0, x, 1.0 / x]
            })
            .collect();
        let rhs: Vec<f64> = rows
            .iter()
            .map(|r| 0.37 + c_true * r[1] + 0.05 * r[2])
            .collect();
        let (sol, cond) = least_squares(&rows, &rhs).unwrap();
        assert!(cond < 1e9);
        assert!((sol[1] - c_true).abs() < 1e-12);
    }

    #[test]
    fn cardy_peschel_values() {
        let half = crate::scalar::rat(1, 2);
        let cases = [
            (crate::scalar::rat(1, 3), crate::scalar::rat(-1, 18)),
            (crate::scalar::rat(2, 3), crate::scalar::rat(-5, 288)),
            (crate::scalar::rat(1, 2), crate::scalar::rat(-1, 32)),
        ];
        for (g, expect) in cases {
            assert_eq!(cardy_peschel_exact(g, half.clone()).unwrap(), expect);
        }
        // Flat boundary: no corner term.
        assert!(cardy_peschel(PI, 0.7).unwrap().abs() < 1e-15);
        // Their negatives are the singular coefficients of log κ.
        let pt = CriticalPoint::isotropic(1.0);
        let c60 = singular_coefficient(FreeEnergyKind::Corner60, &pt).unwrap();
        assert!((c60 - 1.0 / 18.0).abs() < 1e-14);
        let c120 = singular_coefficient(FreeEnergyKind::Corner120, &pt).unwrap();
        assert!((c120 - 5.0 / 288.0).abs() < 1e-14);
        let sq = CriticalPoint::square(1.0);
        let csq = singular_coefficient(FreeEnergyKind::CornerSquareMean, &sq).unwrap();
        assert!((csq - 1.0 / 32.0).abs() < 1e-14);
    }
}
