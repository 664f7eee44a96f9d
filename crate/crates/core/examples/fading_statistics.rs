//! Steps Gauss-Markov tap processes and compares their empirical lag-one
//! correlation and mean power with the Clarke targets.

use num_complex::Complex64;
use soundsim::channel::{bessel_j0, lag_one_correlation, FadingProcess, PowerDelayProfile};

fn main() {
    let dt = 1e-3;
    let steps = 100_000;
    for doppler in [1.5, 15.0, 100.0] {
        let pdp = PowerDelayProfile::flat();
        let mut corr = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        let links = 64;
        for seed in 0..links {
            let mut p = FadingProcess::new(pdp.clone(), doppler, dt, seed).expect("valid process");
            let mut prev = p.gains()[0];
            for _ in 0..steps {
                p.step();
                let g = p.gains()[0];
                corr += g * prev.conj();
                power += prev.norm_sqr();
                prev = g;
            }
        }
        let n = (steps * links as usize) as f64;
        println!(
            "f_d = {doppler:>5} Hz: rho = {:.6} (J0 = {:.6}), mean |a|^2 = {:.4}",
            corr.re / power,
            bessel_j0(2.0 * std::f64::consts::PI * doppler * dt),
            power / n
        );
        assert!((lag_one_correlation(doppler, dt) - corr.re / power).abs() < 0.02);
    }
}
