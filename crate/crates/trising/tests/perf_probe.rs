use rayon::prelude::*;
use std::time::Instant;
use trising::extract::*;
use trising::formulas::{kappa_iso_product, EllipticParams, KappaKind};
use trising::series::{Exp, Series};
use trising::shapes::ShapeSpec;

fn eval_families(
    fams: &[Vec<ShapeSpec>],
    params: &EllipticParams,
    d: i64,
) -> Vec<Vec<(ShapeSpec, Series)>> {
    let mut all: Vec<ShapeSpec> = Vec::new();
    for fam in fams {
        for s in fam {
            if !all.contains(s) {
                all.push(s.clone());
            }
        }
    }
    let z = family_weights(&all, params, d).unwrap();
    let evals: Vec<(ShapeSpec, Series)> = all
        .par_iter()
        .map(|s| {
            let t = Instant::now();
            let lz = log_zhat(s, &z, d).unwrap();
            eprintln!("  {s} dt={:?}", t.elapsed());
            (s.clone(), lz)
        })
        .collect();
    fams.iter()
        .map(|fam| {
            fam.iter()
                .map(|s| evals.iter().find(|(e, _)| e == s).unwrap().clone())
                .collect()
        })
        .collect()
}

#[test]
fn probe_iso_pipeline() {
    let d = 24i64;
    let t0 = Instant::now();
    let params = EllipticParams::isotropic();
    let fams = [iso_family(d).unwrap(), iso_family_shifted(d).unwrap()];
    let evals = eval_families(&fams, &params, d);
    let ka = extract_isotropic(&evals[0], d).unwrap();
    let kb = extract_isotropic(&evals[1], d).unwrap();
    let trusted = trusted_order_iso(&ka, &kb);
    eprintln!("trusted order = {trusted}");
    let kb_prod = kappa_iso_product(KappaKind::Bulk, Exp::int(d + 1)).unwrap();
    eprintln!(
        "bulk vs product first diff: {:?}",
        ka.log_kb.first_difference(&kb_prod.log().unwrap())
    );
    eprintln!("total iso {:?}", t0.elapsed());
}

#[test]
fn probe_aniso_pipeline() {
    let d = 20i64;
    for alpha in [[2i64, 4, 6], [2, 2, 8]] {
        let t0 = Instant::now();
        let params = EllipticParams::new(alpha, 12).unwrap();
        let fams = [
            aniso_family(&params, d).unwrap(),
            aniso_family_offset(&params, d, 1).unwrap(),
        ];
        eprintln!("{alpha:?} family A: {:?}", fams[0].iter().map(|s| s.to_string()).collect::<Vec<_>>());
        let evals = eval_families(&fams, &params, d);
        let ka = extract(&evals[0], d).unwrap();
        let kb = extract(&evals[1], d).unwrap();
        let trusted = trusted_order(&ka, &kb);
        eprintln!("{alpha:?} trusted order = {trusted}, total {:?}", t0.elapsed());
    }
}
