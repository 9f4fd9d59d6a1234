//! The inversion-identity suite, argument-inversion antisymmetry, and the
//! square-lattice reduction.
//!
//! The five relations among the summation-form functions are checked as
//! exact rational-function identities at random rational points (arguments
//! are perfect squares so every half-power is again rational). The η, μ and
//! `1 - z²` identities are checked as exact series. The square-lattice
//! reduction (`a_3 = 1`) is checked both as series identities in a rational
//! `w`-parametrization and numerically.

use crate::error::Result;
use crate::fieldops::{one_minus, one_plus, FieldOps};
use crate::formulas::{
    bold_kappa_c, bold_kappa_ct, elliptic_g_series, f_bulk, f_corner120, f_corner60, f_iso,
    f_surface, log_kappa_sum_raw, KappaKind,
};
use crate::product::LogProduct;
use crate::report::{Check, CheckClass, Report};
use crate::scalar::{rat, rint, GaussRat, Rat};
use crate::series::{Exp, Series};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Deterministic generator for reproducible random rational points.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// A random rational in (lo/denom, hi/denom] with a small denominator.
    pub fn rational(&mut self, lo: i64, hi: i64, denom: i64) -> Rat {
        let span = (hi - lo) as u64;
        let k = lo + (self.next_u64() % span) as i64 + 1;
        rat(k, denom)
    }
}

fn rat_is_zero(r: &Rat) -> bool {
    r.is_zero()
}

/// One random constrained point: square roots `(sa1, sa2, sa3, sq)` with
/// `a_1 a_2 a_3 = q`, all arguments strictly inside (0, 1).
fn random_point(rng: &mut SplitMix64) -> (Rat, Rat, Rat, Rat) {
    let sa1 = rng.rational(2, 18, 20);
    let sa2 = rng.rational(2, 18, 20);
    let sq = &sa1 * &sa2 * rng.rational(2, 18, 20);
    let sa3 = &sq / (&sa1 * &sa2);
    (sa1, sa2, sa3, sq)
}

/// The five relations among the summation-form functions, checked exactly.
pub fn identity_suite(points: usize, series_order: i64, seed: u64) -> Result<Report> {
    let mut report = Report::new("inversion identity suite");
    let mut rng = SplitMix64(seed);
    let inv = |x: &Rat| Rat::one() / x.clone();
    let mut ok = [true; 5];
    let mut detail = vec![String::new(); 5];
    for _ in 0..points {
        let (sa1, sa2, sa3, sq) = random_point(&mut rng);
        let q = &sq * &sq;
        let a1 = &sa1 * &sa1;
        let q2 = &q * &q;
        let q4 = &q2 * &q2;
        // Shared right-hand-side building block q/(1+q) - q²/(1+q²).
        let eta_block =
            &q / (Rat::one() + &q) - &q2 / (Rat::one() + &q2);
        // (1) F_b(a,q) + F_b(1/a,q) = (2/3)(q/(1+q) - q²/(1+q²))
        let lhs1 = f_bulk(&sa1, &sq).add(&f_bulk(&inv(&sa1), &sq));
        let rhs1 = rat(2, 3) * &eta_block;
        if !rat_is_zero(&(lhs1.clone() - rhs1.clone())) {
            ok[0] = false;
            detail[0] = format!("point sa1={sa1}, sq={sq}: {lhs1} vs {rhs1}");
        }
        // At a = 1 the two terms coincide: symmetric-point cross-check.
        let sym = f_bulk(&Rat::one(), &sq);
        if !rat_is_zero(&(&sym + &sym - rhs1.clone())) {
            ok[0] = false;
            detail[0] = format!("symmetric point failed at sq={sq}");
        }
        // (2) F_b(a,q) + F_b(q²/a,q) = (2/3 - q/a - a/q)(…)
        let lhs2 = f_bulk(&sa1, &sq).add(&f_bulk(&(&sq * &sq / &sa1), &sq));
        let rhs2 = (rat(2, 3) - &q / &a1 - &a1 / &q) * &eta_block;
        if !rat_is_zero(&(lhs2.clone() - rhs2.clone())) {
            ok[1] = false;
            detail[1] = format!("point sa1={sa1}, sq={sq}");
        }
        // (3) F_s(a1|a2,a3|q) + F_s(q²/a1|1/a2,1/a3|q) = 0
        let lhs3 = f_surface(&sa1, &sa2, &sa3, &sq).add(&f_surface(
            &(&sq * &sq / &sa1),
            &inv(&sa2),
            &inv(&sa3),
            &sq,
        ));
        if !rat_is_zero(&lhs3) {
            ok[2] = false;
            detail[2] = format!("point ({sa1},{sa2},{sa3};{sq}): residue {lhs3}");
        }
        // (4) F_c(a,q) + F_c(q²/a,q) = -q²/(3(1-q⁴))
        let lhs4 = f_corner60(&sa1, &sq).add(&f_corner60(&(&sq * &sq / &sa1), &sq));
        let rhs4 = -&q2 / (rint(3) * (Rat::one() - &q4));
        if !rat_is_zero(&(lhs4 - rhs4)) {
            ok[3] = false;
            detail[3] = format!("point sa1={sa1}, sq={sq}");
        }
        // (5) F̃_c(a1|a2,a3|q) + F̃_c(1/(q²a1)|q²/a2,q²/a3|q)
        //     = -2q²/(3(1-q⁴)) + (1-q)(1-qa1)²/(2a1(1+q)(1+q²))
        let lhs5 = f_corner120(&sa1, &sa2, &sa3, &sq).add(&f_corner120(
            &inv(&(&sq * &sq * &sa1)),
            &(&sq * &sq / &sa2),
            &(&sq * &sq / &sa3),
            &sq,
        ));
        let rhs5 = -rat(2, 1) * &q2 / (rint(3) * (Rat::one() - &q4))
            + (Rat::one() - &q) * (Rat::one() - &q * &a1) * (Rat::one() - &q * &a1)
                / (rat(2, 1) * &a1 * (Rat::one() + &q) * (Rat::one() + &q2));
        if !rat_is_zero(&(lhs5 - rhs5)) {
            ok[4] = false;
            detail[4] = format!("point ({sa1},{sa2},{sa3};{sq})");
        }
    }
    let names = [
        "bulk argument inversion a -> 1/a",
        "bulk argument inversion a -> q²/a",
        "surface inversion relation",
        "60° corner formal inversion",
        "120° corner formal inversion",
    ];
    for i in 0..5 {
        let mut c = Check::pass(names[i], CheckClass::ClosedForm);
        c.passed = ok[i];
        if !ok[i] {
            c = c.with_details(detail[i].clone());
        }
        report.push(c);
    }
    // η, μ and 1 - z² as exact series identities to the requested order.
    report.push(eta_series_identity(series_order)?);
    report.push(mu_series_identity(series_order)?);
    report.push(one_minus_z_squared_identity(series_order)?);
    Ok(report)
}

/// `log ∏ (1-q^(4k-2))²/(1-q^(2k-1)) = Σ_m [q^m/(m(1+q^m)) - q^(2m)/(m(1+q^(2m)))]`,
/// as series in `q`.
fn eta_series_identity(order: i64) -> Result<Check> {
    let prec = Exp::int(order + 1);
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    while 4 * (2 * k - 1) < prec.0 {
        lp.factor_int(Exp::int(4 * k - 2), 2)?;
        lp.factor_int(Exp::int(2 * k - 1), -1)?;
        k += 1;
    }
    let lhs = lp.log_series();
    let mut rhs = Series::zero(prec);
    for m in 1..=order {
        let qm = Series::monomial(GaussRat::one(), Exp::int(m), prec);
        let q2m = Series::monomial(GaussRat::one(), Exp::int(2 * m), prec);
        let t = qm
            .div(&one_plus(&qm))?
            .sub(&q2m.div(&one_plus(&q2m))?)
            .scale_rat(&rat(1, m));
        rhs = rhs.add(&t);
    }
    Ok(Check::series_compare(
        "eta product vs sum",
        CheckClass::ClosedForm,
        &lhs,
        &rhs,
        order,
    ))
}

/// `log ∏ (1-q^(4k-2)) = -Σ_m q^(2m)/(m(1-q^(4m)))`.
fn mu_series_identity(order: i64) -> Result<Check> {
    let prec = Exp::int(order + 1);
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    while 4 * (4 * k - 2) < prec.0 {
        lp.factor_int(Exp::int(4 * k - 2), 1)?;
        k += 1;
    }
    let lhs = lp.log_series();
    let mut rhs = Series::zero(prec);
    for m in 1..=order / 2 + 1 {
        let q2m = Series::monomial(GaussRat::one(), Exp::int(2 * m), prec);
        let q4m = Series::monomial(GaussRat::one(), Exp::int(4 * m), prec);
        rhs = rhs.sub(&q2m.div(&one_minus(&q4m))?.scale_rat(&rat(1, m)));
    }
    Ok(Check::series_compare(
        "mu product vs sum",
        CheckClass::ClosedForm,
        &lhs,
        &rhs,
        order,
    ))
}

/// Three routes to `1 - z(a,q)²` at `a = p^2, q = p^6`: the factor product,
/// the double sum, and `1 - (a^(1/2) G(a,q))²`.
fn one_minus_z_squared_identity(order: i64) -> Result<Check> {
    let (alpha, sigma) = (2i64, 6i64);
    let prec = Exp::int(order + 1);
    // Product: ∏ (1-q^(4k-2))⁴ (1-q^(2k-2)a)(1-q^(2k)/a)
    //            / ((1-q^(2k-1))² (1-q^(4k-3)a)² (1-q^(4k-1)/a)²)
    let mut lp = LogProduct::new(prec);
    let mut k = 1i64;
    while 4 * ((2 * k - 2) * sigma + alpha) < prec.0 + 4 * sigma {
        lp.factor_int(Exp::int((4 * k - 2) * sigma), 4)?;
        if k > 1 || alpha > 0 {
            lp.factor_int(Exp::int((2 * k - 2) * sigma + alpha), 1)?;
        }
        lp.factor_int(Exp::int(2 * k * sigma - alpha), 1)?;
        lp.factor_int(Exp::int((2 * k - 1) * sigma), -2)?;
        lp.factor_int(Exp::int((4 * k - 3) * sigma + alpha), -2)?;
        lp.factor_int(Exp::int((4 * k - 1) * sigma - alpha), -2)?;
        k += 1;
    }
    let product = lp.series()?;
    // Sum: log[1-z²] = Σ_m (2 - (q/a)^m - (a/q)^m)(q^m/(m(1+q^m)) - q^(2m)/(m(1+q^(2m))))
    let mut logsum = Series::zero(prec);
    let mut m = 1i64;
    // The (a/q)^m parts lead at exponent m·alpha.
    while m * alpha.min(sigma - alpha) <= order {
        let internal = Exp(prec.0 + 16 * sigma * m + 16);
        let qm = Series::monomial(GaussRat::one(), Exp::int(sigma * m), internal);
        let q2m = Series::monomial(GaussRat::one(), Exp::int(2 * sigma * m), internal);
        let qa = Series::monomial(GaussRat::one(), Exp::int((sigma - alpha) * m), internal);
        let aq = Series::monomial(GaussRat::one(), Exp::int((alpha - sigma) * m), internal);
        let bracket = qm
            .div(&one_plus(&qm))?
            .sub(&q2m.div(&one_plus(&q2m))?);
        let front = Series::constant(GaussRat::from_int(2), internal)
            .sub(&qa)
            .sub(&aq);
        logsum = logsum.add(&front.mul(&bracket).truncate(prec).scale_rat(&rat(1, m)));
        m += 1;
    }
    let sum = logsum.exp()?;
    // Direct: 1 - a G(a,q)².
    let g = elliptic_g_series(alpha, sigma, prec)?;
    let z2 = g.mul(&g).shift(Exp::int(alpha));
    let direct = Series::one(prec).sub(&z2);
    let c1 = Check::series_compare(
        "1-z² product vs sum",
        CheckClass::ClosedForm,
        &product,
        &sum,
        order,
    );
    let c2 = Check::series_compare(
        "1-z² product vs 1-(a^(1/2)G)²",
        CheckClass::Oracle,
        &product,
        &direct,
        order,
    );
    let mut merged = c1.clone();
    merged.passed = c1.passed && c2.passed;
    merged.name = "1-z² product vs sum vs direct".into();
    if !c1.passed {
        merged = merged.with_details(format!("product vs sum mismatch at {:?}", c1.first_mismatch));
    }
    if !c2.passed {
        merged.first_mismatch = c2.first_mismatch;
        merged = merged.with_details(format!(
            "product vs direct mismatch at {:?}",
            c2.first_mismatch
        ));
    }
    Ok(merged)
}

/// `F(1/p) = -F(p)` for the four isotropic forms and the same antisymmetry
/// for the anisotropic forms under inversion of every argument.
pub fn antisymmetry_suite(points: usize, seed: u64) -> Report {
    let mut report = Report::new("argument-inversion antisymmetry");
    let mut rng = SplitMix64(seed);
    let inv = |x: &Rat| Rat::one() / x.clone();
    let mut iso_ok = [true; 4];
    let mut aniso_ok = [true; 4];
    for _ in 0..points {
        let p = rng.rational(2, 18, 20);
        for (i, kind) in KappaKind::all().into_iter().enumerate() {
            let direct: Rat = f_iso(kind, &p);
            let inverted: Rat = f_iso(kind, &inv(&p));
            if !rat_is_zero(&(direct + inverted)) {
                iso_ok[i] = false;
            }
        }
        let (sa1, sa2, sa3, sq) = random_point(&mut rng);
        let pairs: [(Rat, Rat); 4] = [
            (
                f_bulk(&sa1, &sq),
                f_bulk(&inv(&sa1), &inv(&sq)),
            ),
            (
                f_surface(&sa1, &sa2, &sa3, &sq),
                f_surface(&inv(&sa1), &inv(&sa2), &inv(&sa3), &inv(&sq)),
            ),
            (
                f_corner60(&sa1, &sq),
                f_corner60(&inv(&sa1), &inv(&sq)),
            ),
            (
                f_corner120(&sa1, &sa2, &sa3, &sq),
                f_corner120(&inv(&sa1), &inv(&sa2), &inv(&sa3), &inv(&sq)),
            ),
        ];
        for (i, (a, b)) in pairs.into_iter().enumerate() {
            if !rat_is_zero(&(a + b)) {
                aniso_ok[i] = false;
            }
        }
    }
    for (i, kind) in KappaKind::all().into_iter().enumerate() {
        let mut c = Check::pass(
            format!("isotropic {} antisymmetry", kind.label()),
            CheckClass::ClosedForm,
        );
        c.passed = iso_ok[i];
        report.push(c);
        let mut c = Check::pass(
            format!("anisotropic {} antisymmetry", kind.label()),
            CheckClass::ClosedForm,
        );
        c.passed = aniso_ok[i];
        report.push(c);
    }
    report
}

/// Square-lattice reduction, series side: with `q = p^sigma`, `w = p^tau`
/// (so `a_1 = q/w², a_2 = w², a_3 = 1`), the bulk, odd-m surface and
/// two-corner sums hold to order `q^order`.
pub fn square_reduction_series(sigma: i64, tau: i64, order: i64) -> Result<Report> {
    assert!(sigma > 2 * tau && tau >= 1, "need q < w² < 1");
    let mut report = Report::new("square-lattice reduction (series)");
    let d = order * sigma; // order in q means sigma-fold order in p
    let prec = Exp::int(d + 1);
    let args = [sigma - 2 * tau, 2 * tau, 0];
    let mono = |e: i64, internal: Exp| Series::monomial(GaussRat::one(), Exp::int(e), internal);

    // (i) bulk: Σ_m Σ_j F_b(a_j^m, q^m)/m
    //     = Σ_m q^m (1-q^m)(w^m - q^m/w^m)(w^(-m) - w^m)/(m(1+q^m)²(1+q^(2m)))
    let lhs_b = log_kappa_sum_raw(KappaKind::Bulk, args, sigma, prec)?;
    let mut rhs_b = Series::zero(prec);
    let mut m = 1i64;
    while m * sigma <= d {
        let internal = Exp(prec.0 + 16 * sigma * m + 16);
        let qm = mono(sigma * m, internal);
        let wm = mono(tau * m, internal);
        let winv = mono(-tau * m, internal);
        let q2m = mono(2 * sigma * m, internal);
        let num = qm
            .mul(&one_minus(&qm))
            .mul(&wm.sub(&qm.mul(&winv)))
            .mul(&winv.sub(&wm));
        let den = one_plus(&qm).mul(&one_plus(&qm)).mul(&one_plus(&q2m));
        rhs_b = rhs_b.add(&num.div(&den)?.truncate(prec).scale_rat(&rat(1, m)));
        m += 1;
    }
    report.push(Check::series_compare(
        "bulk sum collapse",
        CheckClass::ClosedForm,
        &lhs_b,
        &rhs_b,
        d,
    ));

    // (ii) surface: Σ_m F_s((q/w²)^m | w^(2m), 1 | q^m)/m
    //      = Σ_(m odd) q^m (w^(-m) - w^m)/(m(1+q^m)²)
    let lhs_s = log_kappa_sum_raw(KappaKind::Surface, args, sigma, prec)?;
    let mut rhs_s = Series::zero(prec);
    let mut m = 1i64;
    while m * (sigma - tau) <= d {
        let internal = Exp(prec.0 + 16 * sigma * m + 16);
        let qm = mono(sigma * m, internal);
        let wm = mono(tau * m, internal);
        let winv = mono(-tau * m, internal);
        let num = qm.mul(&winv.sub(&wm));
        let den = one_plus(&qm).mul(&one_plus(&qm));
        rhs_s = rhs_s.add(&num.div(&den)?.truncate(prec).scale_rat(&rat(1, m)));
        m += 2;
    }
    report.push(Check::series_compare(
        "odd-m surface sum",
        CheckClass::ClosedForm,
        &lhs_s,
        &rhs_s,
        d,
    ));

    // (iii) two-corner sum: log[κ_c(a_3,q)·κ̃_c(a_3|a_1,a_2|q)]
    //       = (log k')/8 + 2 Σ_(m odd) q^(m/2)(1+q^(2m))/(m(1+q^m)(1-q^(2m)))
    //       with log k' = -8 Σ_(m odd) q^m/(m(1-q^(2m))).
    let kc = bold_kappa_c(0, sigma, prec)?;
    let kct = bold_kappa_ct([0, args[0], args[1]], sigma, prec)?;
    let lhs_c = kc.mul(&kct).log()?;
    let mut log_kprime = Series::zero(prec);
    let mut m = 1i64;
    while m * sigma <= d {
        let internal = Exp(prec.0 + 16 * sigma * m + 16);
        let qm = mono(sigma * m, internal);
        let q2m = mono(2 * sigma * m, internal);
        log_kprime = log_kprime.sub(
            &qm.div(&one_minus(&q2m))?
                .truncate(prec)
                .scale_rat(&rat(8, m)),
        );
        m += 2;
    }
    let mut rhs_c = log_kprime.scale_rat(&rat(1, 8));
    let mut m = 1i64;
    while m * sigma <= 2 * d {
        let internal = Exp(prec.0 + 16 * sigma * m + 16);
        let qhalf = Series::monomial(GaussRat::one(), Exp::half(sigma * m), internal);
        let qm = mono(sigma * m, internal);
        let q2m = mono(2 * sigma * m, internal);
        let num = qhalf.mul(&one_plus(&q2m));
        let den = one_plus(&qm).mul(&one_minus(&q2m));
        rhs_c = rhs_c.add(&num.div(&den)?.truncate(prec).scale_rat(&rat(2, m)));
        m += 2;
    }
    report.push(Check::series_compare(
        "two-corner sum",
        CheckClass::ClosedForm,
        &lhs_c,
        &rhs_c,
        d,
    ));
    Ok(report)
}

/// Pointwise square-lattice identities at exact rationals: the bulk
/// three-term collapse, the surface closed form, and the `w`-independence of
/// the two-corner sum `F_c(a_3,q) + F̃_c(a_3|a_1,a_2|q) = 𝓕(q) - 𝓕(q²)/2`
/// with `𝓕(q) = 2√q(1+q²)/((1+q)(1-q²)) - q/(1-q²)`.
pub fn square_reduction_rational(points: usize, seed: u64) -> Report {
    let mut report = Report::new("square-lattice reduction (rational points)");
    let mut rng = SplitMix64(seed);
    let mut ok = [true; 3];
    let mut wit = [String::new(), String::new(), String::new()];
    for _ in 0..points {
        // w and t = √q/w random in (0,1): then a1 = q/w² = t² stays inside.
        let w = rng.rational(2, 18, 20);
        let sa1 = rng.rational(2, 18, 20);
        let sq = &sa1 * &w; // q^(1/2) = w·√(a1)
        let q = &sq * &sq;
        let one = Rat::one();
        // (i) pointwise bulk collapse: sqrt arguments are (√a1, √a2, 1) =
        // (√q/w, w, 1).
        let lhs = f_bulk(&sa1, &sq)
            .add(&f_bulk(&w, &sq))
            .add(&f_bulk(&one, &sq));
        let q2 = &q * &q;
        let rhs = &q * (&one - &q) * (&w - &q / &w) * (&one / &w - &w)
            / ((&one + &q) * (&one + &q) * (&one + &q2));
        if lhs != rhs {
            ok[0] = false;
            wit[0] = format!("at sq={sq}, w={w}");
        }
        // (ii) pointwise surface form
        let lhs_s = f_surface(&sa1, &w, &one, &sq);
        let rhs_s = &q * (&one / &w - &w) / ((&one + &q) * (&one + &q))
            - &q2 * (&one / &w / &w - &w * &w)
                / (rat(2, 1) * (&one + &q2) * (&one + &q2));
        if lhs_s != rhs_s {
            ok[1] = false;
            wit[1] = format!("at sq={sq}, w={w}");
        }
        // (iii) two-corner sum: F_c(a3,q) + F̃_c(a3|a1,a2|q) = 𝓕(q) - 𝓕(q²)/2
        let fcsq = f_corner60(&one, &sq).add(&f_corner120(&one, &sa1, &w, &sq));
        let calf = |s: &Rat| -> Rat {
            let qq = s * s;
            rat(2, 1) * s * (&one + &qq * &qq) / ((&one + &qq) * (&one - &qq * &qq))
                - &qq / (&one - &qq * &qq)
        };
        let rhs_c = calf(&sq) - calf(&q) / rat(2, 1);
        if fcsq != rhs_c {
            ok[2] = false;
            wit[2] = format!("value mismatch at sq={sq}, w={w}");
        }
    }
    // w-independence: same q, different w must give the same sum.
    let mut rng2 = SplitMix64(seed ^ 0xabcd);
    let tq = rng2.rational(2, 8, 40);
    let q = &tq * &tq;
    let mut first: Option<Rat> = None;
    for _ in 0..points {
        let w = rng2.rational(10, 18, 20); // keep a1 = q/w² inside (0,1)
        let sa1 = &tq / &w;
        let v = f_corner60(&Rat::one(), &tq).add(&f_corner120(&Rat::one(), &sa1, &w, &tq));
        match &first {
            None => first = Some(v),
            Some(f) => {
                if *f != v {
                    ok[2] = false;
                    wit[2] = format!("w-dependence detected at q={q}");
                }
            }
        }
    }
    let names = [
        "pointwise bulk collapse",
        "pointwise surface form",
        "two-corner sum and w-independence",
    ];
    for i in 0..3 {
        let mut c = Check::pass(names[i], CheckClass::ClosedForm);
        c.passed = ok[i];
        if !ok[i] {
            c = c.with_details(wit[i].clone());
        }
        report.push(c);
    }
    report
}

/// Numeric square-lattice reduction at a floating point `(q, w)`.
pub fn square_reduction_numeric(q: f64, w: f64, tol: f64) -> Result<Report> {
    let mut report = Report::new("square-lattice reduction (numeric)");
    let sq = q.sqrt();
    // a1 = q/w², a2 = w², a3 = 1, so the square-root arguments are
    // sa1 = √q/w and sa2 = w.
    let sw = w;
    let sa1 = sq / w;
    let sums = |f: &dyn Fn(i64) -> f64, step: i64| -> f64 {
        let mut acc = 0.0;
        let mut m = 1i64;
        loop {
            let t = f(m);
            acc += t;
            if t.abs() < tol / 50.0 {
                break;
            }
            m += step;
            if m > 100_000 {
                break;
            }
        }
        acc
    };
    // (i) bulk
    let lhs_b = sums(
        &|m| {
            let (sqm, swm, sam) = (sq.powi(m as i32), sw.powi(m as i32), sa1.powi(m as i32));
            (f_bulk(&sam, &sqm) + f_bulk(&swm, &sqm) + f_bulk(&1.0, &sqm)) / m as f64
        },
        1,
    );
    let rhs_b = sums(
        &|m| {
            let qm = q.powi(m as i32);
            let wm = w.powi(m as i32);
            qm * (1.0 - qm) * (wm - qm / wm) * (1.0 / wm - wm)
                / (m as f64 * (1.0 + qm).powi(2) * (1.0 + qm * qm))
        },
        1,
    );
    let mut c = Check::pass("bulk sum collapse (numeric)", CheckClass::ClosedForm);
    c.passed = (lhs_b - rhs_b).abs() <= tol * lhs_b.abs().max(1.0);
    c = c.with_details(format!("lhs {lhs_b:.15e}, rhs {rhs_b:.15e}"));
    report.push(c);
    // (ii) surface
    let lhs_s = sums(
        &|m| {
            let (sqm, swm, sam) = (sq.powi(m as i32), sw.powi(m as i32), sa1.powi(m as i32));
            f_surface(&sam, &swm, &1.0, &sqm) / m as f64
        },
        1,
    );
    let rhs_s = sums(
        &|m| {
            let qm = q.powi(m as i32);
            let wm = w.powi(m as i32);
            qm * (1.0 / wm - wm) / (m as f64 * (1.0 + qm).powi(2))
        },
        2,
    );
    let mut c = Check::pass("odd-m surface sum (numeric)", CheckClass::ClosedForm);
    c.passed = (lhs_s - rhs_s).abs() <= tol * lhs_s.abs().max(1.0);
    c = c.with_details(format!("lhs {lhs_s:.15e}, rhs {rhs_s:.15e}"));
    report.push(c);
    // (iii) two corners
    let lhs_c = sums(
        &|m| {
            let (sqm, swm, sam) = (sq.powi(m as i32), sw.powi(m as i32), sa1.powi(m as i32));
            (f_corner60(&1.0, &sqm) + f_corner120(&1.0, &sam, &swm, &sqm)) / m as f64
        },
        1,
    );
    let log_kprime = -8.0
        * sums(
            &|m| {
                let qm = q.powi(m as i32);
                qm / (m as f64 * (1.0 - qm * qm))
            },
            2,
        );
    let rhs_c = log_kprime / 8.0
        + 2.0
            * sums(
                &|m| {
                    let qm = q.powi(m as i32);
                    let qhm = sq.powi(m as i32);
                    qhm * (1.0 + qm * qm) / (m as f64 * (1.0 + qm) * (1.0 - qm * qm))
                },
                2,
            );
    let mut c = Check::pass("two-corner sum (numeric)", CheckClass::ClosedForm);
    c.passed = (lhs_c - rhs_c).abs() <= tol * lhs_c.abs().max(1.0);
    c = c.with_details(format!("lhs {lhs_c:.15e}, rhs {rhs_c:.15e}"));
    report.push(c);
    Ok(report)
}

/// Compare extracted gauge-invariant combinations against the conjectured
/// products, reporting agreement orders.
pub fn verify_against_extraction(
    ks: &crate::extract::KappaSet,
    params: &crate::formulas::EllipticParams,
    through: i64,
) -> Result<Report> {
    use crate::formulas::kappa_product;
    let mut report = Report::new("extraction vs product forms");
    let prec = Exp::int(through + 1);
    let kb = kappa_product(KappaKind::Bulk, params, 0, prec)?.log()?;
    report.push(Check::series_compare(
        "log kappa_b",
        CheckClass::ClosedForm,
        &ks.log_kb,
        &kb,
        through,
    ));
    let mut prod60 = Series::zero(prec);
    let mut prod120 = Series::zero(prec);
    for i in 0..3 {
        let s = kappa_product(KappaKind::Surface, params, i, prec)?.log()?;
        report.push(Check::series_compare(
            format!("log kappa_s{}", i + 1),
            CheckClass::ClosedForm,
            &ks.log_ks[i],
            &s,
            through,
        ));
        let c60 = kappa_product(KappaKind::Corner60, params, i, prec)?.log()?;
        let c120 = kappa_product(KappaKind::Corner120, params, i, prec)?.log()?;
        report.push(Check::series_compare(
            format!("log kappa_c{}*kappa_ct{}", i + 1, i + 1),
            CheckClass::ClosedForm,
            &ks.corner_pair[i],
            &c60.add(&c120),
            through,
        ));
        prod60 = prod60.add(&c60);
        prod120 = prod120.add(&c120);
    }
    report.push(Check::series_compare(
        "log prod kappa_c",
        CheckClass::ClosedForm,
        &ks.corner_prod60,
        &prod60,
        through,
    ));
    report.push(Check::series_compare(
        "log prod kappa_ct",
        CheckClass::ClosedForm,
        &ks.corner_prod120,
        &prod120,
        through,
    ));
    Ok(report)
}

/// Isotropic counterpart of [`verify_against_extraction`].
pub fn verify_iso_extraction(
    ks: &crate::extract::IsoKappaSet,
    through: i64,
) -> Result<Report> {
    use crate::formulas::kappa_iso_product;
    let mut report = Report::new("isotropic extraction vs product forms");
    let prec = Exp::int(through + 1);
    let pairs: [(&str, &Series, KappaKind); 4] = [
        ("log kappa_b", &ks.log_kb, KappaKind::Bulk),
        ("log kappa_s", &ks.log_ks, KappaKind::Surface),
        ("log kappa_c", &ks.log_kc, KappaKind::Corner60),
        ("log kappa_ct", &ks.log_kct, KappaKind::Corner120),
    ];
    for (name, series, kind) in pairs {
        let product = kappa_iso_product(kind, prec)?.log()?;
        report.push(Check::series_compare(
            name,
            CheckClass::ClosedForm,
            series,
            &product,
            through,
        ));
    }
    Ok(report)
}

#[allow(unused_imports)]
use num_traits::Signed;
#[allow(dead_code)]
fn bigint(n: i64) -> BigInt {
    BigInt::from(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_suite_passes() {
        let report = identity_suite(5, 24, 0x5eed).unwrap();
        assert!(report.all_passed(), "{}", report.render_table());
    }

    #[test]
    fn antisymmetry_passes() {
        let report = antisymmetry_suite(5, 0x5eed2);
        assert!(report.all_passed(), "{}", report.render_table());
    }

    #[test]
    fn square_series_small() {
        let report = square_reduction_series(5, 1, 8).unwrap();
        assert!(report.all_passed(), "{}", report.render_table());
    }

    #[test]
    fn square_numeric() {
        let report = square_reduction_numeric(0.1, 0.7, 1e-10).unwrap();
        assert!(report.all_passed(), "{}", report.render_table());
    }
}
