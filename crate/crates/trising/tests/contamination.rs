use rayon::prelude::*;
use trising::extract::{family_weights, log_zhat};
use trising::formulas::{kappa_product, EllipticParams, KappaKind};
use trising::series::{Exp, Series};
use trising::shapes::{make_shape, Rotation, ShapeName, ShapeSpec};

fn predicted(params: &EllipticParams, prec: Exp) -> (Series, Vec<Series>, Vec<Series>, Vec<Series>) {
    let kb = kappa_product(KappaKind::Bulk, params, 0, prec).unwrap().log().unwrap();
    let ks: Vec<Series> = (0..3)
        .map(|i| kappa_product(KappaKind::Surface, params, i, prec).unwrap().log().unwrap())
        .collect();
    let kc: Vec<Series> = (0..3)
        .map(|i| kappa_product(KappaKind::Corner60, params, i, prec).unwrap().log().unwrap())
        .collect();
    let kt: Vec<Series> = (0..3)
        .map(|i| kappa_product(KappaKind::Corner120, params, i, prec).unwrap().log().unwrap())
        .collect();
    (kb, ks, kc, kt)
}

#[test]
fn scan() {
    let d = 24i64;
    for alpha in [[2i64, 4, 6]] {
        let params = EllipticParams::new(alpha, 12).unwrap();
        let prec = Exp::int(d + 1);
        let (kb, ks, kc, kt) = predicted(&params, prec);
        let mut specs: Vec<ShapeSpec> = Vec::new();
        for (m, n) in [(4, 4), (4, 6), (4, 8), (6, 4), (8, 4), (5, 5), (5, 7), (7, 5), (6, 6), (6, 7), (7, 6)] {
            specs.push(ShapeSpec::plain(
                make_shape(ShapeName::Parallelogram, m, n).unwrap(),
            ));
        }
        for rot in [Rotation::R1, Rotation::R2] {
            for (m, n) in [(5, 5), (5, 7), (7, 5)] {
                specs.push(ShapeSpec {
                    shape: make_shape(ShapeName::Parallelogram, m, n).unwrap(),
                    rot,
                });
            }
        }
        for l in [5, 6, 7] {
            specs.push(ShapeSpec::plain(make_shape(ShapeName::Triangle, l, l).unwrap()));
        }
        let z = family_weights(&specs, &params, d).unwrap();
        let out: Vec<String> = specs
            .par_iter()
            .map(|spec| {
                let lz = log_zhat(spec, &z, d).unwrap();
                let c = spec.counts();
                let mut pred = kb.scale_rat(&trising::scalar::rint(c.n_b));
                for i in 0..3 {
                    pred = pred.add(&ks[i].scale_rat(&trising::scalar::rint(c.n_s[i])));
                    pred = pred.add(&kc[i].scale_rat(&trising::scalar::rint(c.n_c[i])));
                    pred = pred.add(&kt[i].scale_rat(&trising::scalar::rint(c.nt_c[i])));
                }
                format!("{alpha:?} {spec}: {:?}", lz.first_difference(&pred))
            })
            .collect();
        for line in out {
            eprintln!("{line}");
        }
    }
}
