use trising::critical::*;

#[test]
fn probe_corner_linearity() {
    let pt = CriticalPoint::isotropic(1.0);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..10 {
        let x = 7.0 + i as f64;
        let qp = (-x).exp();
        let point = pt.with_qprime(qp).unwrap();
        let y = free_energy(FreeEnergyKind::Corner60, &point, 1e-14).unwrap();
        if let Some((x0, y0)) = prev {
            eprintln!("x={x:.2} slope={:.12} resid_from_C18={:.3e}", (y - y0) / (x - x0), (y - y0) / (x - x0) - 1.0/18.0);
        }
        prev = Some((x, y));
    }
}
