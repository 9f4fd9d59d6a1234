use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use trising::extract::{family_weights, log_zhat};
use trising::formulas::{kappa_iso_product, kappa_product, EllipticParams, KappaKind};
use trising::series::{Exp, Series};
use trising::shapes::{make_shape, ShapeName, ShapeSpec};
use trising::spinor::{zhat_bruteforce, zhat_trivariate};

fn series_arithmetic(c: &mut Criterion) {
    let z = trising::formulas::iso_z_series(Exp::int(40)).unwrap();
    c.bench_function("series_mul_40", |b| {
        b.iter(|| black_box(z.mul(&z)))
    });
    let one = Series::one(Exp::int(40));
    let f = one.sub(&z.mul(&z));
    c.bench_function("series_inverse_40", |b| {
        b.iter(|| black_box(f.inverse().unwrap()))
    });
    c.bench_function("series_log_40", |b| {
        b.iter(|| black_box(f.log().unwrap()))
    });
}

fn kappa_products(c: &mut Criterion) {
    c.bench_function("iso_corner120_product_36", |b| {
        b.iter(|| black_box(kappa_iso_product(KappaKind::Corner120, Exp::int(36)).unwrap()))
    });
    let params = EllipticParams::new([2, 4, 6], 12).unwrap();
    c.bench_function("aniso_corner120_product_24", |b| {
        b.iter(|| black_box(kappa_product(KappaKind::Corner120, &params, 0, Exp::int(24)).unwrap()))
    });
}

fn spinor_engine(c: &mut Criterion) {
    let spec = ShapeSpec::plain(make_shape(ShapeName::Parallelogram, 6, 6).unwrap());
    let params = EllipticParams::isotropic();
    let z = family_weights(std::slice::from_ref(&spec), &params, 10).unwrap();
    c.bench_function("zhat_series_par6_order10", |b| {
        b.iter(|| black_box(log_zhat(&spec, &z, 10).unwrap()))
    });
    let small = ShapeSpec::plain(make_shape(ShapeName::Parallelogram, 3, 4).unwrap());
    c.bench_function("zhat_trivariate_par3x4_deg8", |b| {
        b.iter(|| black_box(zhat_trivariate(&small, 8).unwrap()))
    });
    c.bench_function("zhat_bruteforce_par3x4_deg8", |b| {
        b.iter(|| black_box(zhat_bruteforce(&small, 8).unwrap()))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = series_arithmetic, kappa_products, spinor_engine
}
criterion_main!(benches);
