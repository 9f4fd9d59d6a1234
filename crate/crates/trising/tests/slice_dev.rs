use trising::shapes::{make_shape, ShapeName, ShapeSpec};
use trising::spinor::{zhat_bruteforce, zhat_trivariate_slices};

#[test]
fn slices_match_bruteforce() {
    for (m, n, d) in [(3, 3, 5), (4, 4, 6), (4, 5, 5)] {
        let spec = ShapeSpec::plain(make_shape(ShapeName::Parallelogram, m, n).unwrap());
        let brute = zhat_bruteforce(&spec, d).unwrap();
        let slices = zhat_trivariate_slices(&spec, d).unwrap();
        assert!(
            slices.sub(&brute).is_zero_to_window(),
            "{m}x{n}: {:?}",
            slices.sub(&brute)
        );
    }
}
