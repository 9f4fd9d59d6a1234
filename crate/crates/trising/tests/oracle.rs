use trising::scalar::GaussRat;
use trising::series::{Exp, Series};
use trising::shapes::{make_shape, Rotation, ShapeName, ShapeSpec};
use trising::spinor::{
    required_window, zhat_bruteforce, zhat_series, zhat_trivariate, BoltzmannPoint, Provenance,
};

fn check(spec: &ShapeSpec, maxdeg: i64) {
    let brute = zhat_bruteforce(spec, maxdeg).unwrap();
    let spin = zhat_trivariate(spec, maxdeg).unwrap();
    assert!(
        spin.sub(&brute).is_zero_to_window(),
        "{spec:?}: {:?}",
        spin.sub(&brute)
    );
    assert!(spin.is_real());
}

#[test]
fn oracle_catalog_up_to_20_sites() {
    // Oracle equivalence for every catalog shape with at most 20 sites.
    let shapes = [
        ("par", make_shape(ShapeName::Parallelogram, 4, 5).unwrap(), 8),
        ("tri", make_shape(ShapeName::Triangle, 5, 5).unwrap(), 8),
        ("hex", make_shape(ShapeName::Hexagon, 5, 5).unwrap(), 8),
        ("clip", make_shape(ShapeName::Clipped, 4, 5).unwrap(), 8),
    ];
    for (label, shape, d) in shapes {
        assert!(shape.num_sites() <= 20, "{label}");
        let spec = ShapeSpec::plain(shape);
        check(&spec, d);
    }
}

#[test]
fn zhat_is_integral_and_log_linear_in_size() {
    // Integer coefficients, zero imaginary part; log Ẑ grows linearly in M
    // within the trusted window.
    use trising::extract::{family_weights, log_zhat};
    use trising::formulas::EllipticParams;
    let params = EllipticParams::isotropic();
    let d = 8i64;
    let specs: Vec<ShapeSpec> = (4..8)
        .map(|m| ShapeSpec::plain(make_shape(ShapeName::Parallelogram, m, 4).unwrap()))
        .collect();
    let z = family_weights(&specs, &params, d).unwrap();
    let zh = trising::spinor::zhat_series(&specs[0], &z, d).unwrap();
    assert!(zh.is_integral(), "{zh:?}");
    let logs: Vec<_> = specs.iter().map(|s| log_zhat(s, &z, d).unwrap()).collect();
    let d1 = logs[1].sub(&logs[0]);
    let d2 = logs[2].sub(&logs[1]);
    let d3 = logs[3].sub(&logs[2]);
    // Differences of consecutive sizes agree where finite-size effects are
    // below the window (error enters at 2·min(M,N) = 8 here).
    let agree = d1.first_difference(&d2);
    assert!(agree.map_or(true, |e| e.0 >= 4 * 8), "{agree:?}");
    let agree = d2.first_difference(&d3);
    assert!(agree.map_or(true, |e| e.0 >= 4 * 8), "{agree:?}");
}

#[test]
fn oracle9_parallelograms() {
    for (m, n) in [(3, 3), (3, 4), (4, 3), (4, 4)] {
        let s = ShapeSpec::plain(make_shape(ShapeName::Parallelogram, m, n).unwrap());
        check(&s, 10);
    }
}

#[test]
fn oracle_clipped_4x4() {
    let s = ShapeSpec::plain(make_shape(ShapeName::Clipped, 4, 4).unwrap());
    check(&s, 10);
}

#[test]
fn oracle_triangle_hexagon() {
    let t = ShapeSpec::plain(make_shape(ShapeName::Triangle, 5, 5).unwrap());
    check(&t, 8);
    let h = ShapeSpec::plain(make_shape(ShapeName::Hexagon, 5, 5).unwrap());
    check(&h, 8);
}

#[test]
fn oracle_rotated() {
    for rot in [Rotation::R1, Rotation::R2] {
        let s = ShapeSpec {
            shape: make_shape(ShapeName::Parallelogram, 3, 4).unwrap(),
            rot,
        };
        check(&s, 8);
    }
}

#[test]
fn univariate_slice_matches_trivariate() {
    // z = (2t, 3t, 5t): the univariate spinor path must agree with the
    // substituted trivariate polynomial.
    let spec = ShapeSpec::plain(make_shape(ShapeName::Parallelogram, 4, 4).unwrap());
    let d = 8i64;
    let win = required_window(&spec, [4, 4, 4], d);
    let prec = Exp(win + 4);
    let z = BoltzmannPoint::new(
        [
            Series::monomial(GaussRat::from_int(2), Exp::int(1), prec),
            Series::monomial(GaussRat::from_int(3), Exp::int(1), prec),
            Series::monomial(GaussRat::from_int(5), Exp::int(1), prec),
        ],
        Provenance::SymbolicPolynomial,
    )
    .unwrap();
    let zs = zhat_series(&spec, &z, d).unwrap();
    let tri = zhat_trivariate(&spec, d).unwrap();
    // Substitute the slice into the trivariate polynomial.
    let mut expect = Series::zero(Exp::int(d + 1));
    for (e, c) in tri.terms() {
        let deg = (e[0] + e[1] + e[2]) as i64;
        if deg > d {
            continue;
        }
        let scale = GaussRat::from_int(
            2i64.pow(e[0] as u32) * 3i64.pow(e[1] as u32) * 5i64.pow(e[2] as u32),
        );
        expect = expect.add(&Series::monomial(
            &scale * c,
            Exp::int(deg),
            Exp::int(d + 1),
        ));
    }
    assert!(zs.sub(&expect).is_zero_to_window(), "{:?}", zs.sub(&expect));
}
