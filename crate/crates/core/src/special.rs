//! Factorials, binomials, Gauss-Legendre nodes and a Bessel-type series.

use std::f64::consts::PI;
use std::sync::OnceLock;

const TABLE: usize = 4096;

fn ln_fact_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = vec![0.0; TABLE];
        for k in 1..TABLE {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

fn fact_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = vec![1.0; 171];
        for k in 1..171 {
            t[k] = t[k - 1] * k as f64;
        }
        t
    })
}

/// ln(n!).
pub fn ln_factorial(n: usize) -> f64 {
    if n < TABLE {
        ln_fact_table()[n]
    } else {
        // Stirling series, far beyond any cutoff used in practice.
        let x = n as f64 + 1.0;
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
    }
}

/// n! as a float (infinite past 170).
pub fn factorial(n: usize) -> f64 {
    if n <= 170 {
        fact_table()[n]
    } else {
        f64::INFINITY
    }
}

/// Binomial coefficient C(n, k) evaluated in log space when large.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 170 {
        let t = fact_table();
        let v = t[n] / t[k] / t[n - k];
        return if v < 9.0e15 { v.round() } else { v };
    }
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Σ_k d^{2k} / (k! (k+ν)!), which equals I_ν(2d) / d^ν.
///
/// Finite at d = 0, so no special handling of the removable singularity is needed.
pub fn bessel_i_scaled(nu: usize, d: f64) -> f64 {
    let d2 = d * d;
    let mut term = 1.0 / factorial(nu);
    if !term.is_finite() || term == 0.0 {
        term = (-ln_factorial(nu)).exp();
    }
    let mut sum = term;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= d2 / (k as f64 * (k + nu) as f64);
        sum += term;
        if term <= sum * 1e-17 || k > 10_000 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(5), 120.0);
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-12);
        assert_eq!(binomial(14, 4), 1001.0);
        assert_eq!(binomial(3, 5), 0.0);
        let big = ln_factorial(5000);
        let direct: f64 = (1..=5000).map(|k| (k as f64).ln()).sum();
        assert!((big - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn bessel_series_matches_integral() {
        // I_ν(z) = (1/π) ∫_0^π e^{z cos t} cos(ν t) dt for integer ν.
        for nu in 0..5usize {
            for &d in &[0.0, 0.1, 0.7, 2.3] {
                let z: f64 = 2.0 * d;
                let m = 4000;
                let h = PI / m as f64;
                let mut s = 0.0;
                for k in 0..=m {
                    let t = k as f64 * h;
                    let f = (z * t.cos()).exp() * (nu as f64 * t).cos();
                    s += if k == 0 || k == m { 0.5 * f } else { f };
                }
                let iv = s * h / PI;
                let lhs = bessel_i_scaled(nu, d) * d.powi(nu as i32);
                assert!((lhs - iv).abs() < 1e-12 * iv.abs().max(1.0), "nu={nu} d={d}");
            }
        }
    }
}
