//! Order-zero Bessel function of the first kind.
//!
//! Power series for `|x| <= 12`, Hankel asymptotic expansion beyond. Absolute
//! error stays below 1e-9 out to `|x| = 50`.

const SERIES_LIMIT: f64 = 12.0;

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax)
    } else {
        asymptotic(ax)
    }
}

fn series(x: f64) -> f64 {
    // sum_k (-1)^k (x^2/4)^k / (k!)^2
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && kf > q {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // a_k = prod_{m=1..k} (2m-1)^2 / (k! 8^k), alternating P/Q split.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= odd * odd / (k as f64 * 8.0 * x);
        }
        if a > prev {
            break;
        }
        prev = a;
        // P = 1 - b2 + b4 - ..., Q = -b1 + b3 - ...
        let signed = match k % 4 {
            0 | 3 => a,
            _ => -a,
        };
        if k % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if a < 1e-18 {
            break;
        }
    }
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
