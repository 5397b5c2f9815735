//! Reference quadrature used only by tests. Deliberately unrelated to the
//! adaptive Gauss–Kronrod integrator it is used to check.

use num_complex::Complex64;

const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_361_8,
    0.313_706_645_877_887_05,
    0.222_381_034_453_374_34,
    0.101_228_536_290_376_69,
];

/// Composite 8-point Gauss–Legendre rule on `panels` equal panels.
pub fn gauss_legendre<F>(a: f64, b: f64, panels: usize, f: F) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
            total += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    total
}

#[test]
fn integrates_polynomials_exactly() {
    let got = gauss_legendre(0.0, 2.0, 3, |x| Complex64::new(x.powi(15), 0.0));
    assert!((got.re - 2f64.powi(16) / 16.0).abs() < 1e-9);
}
