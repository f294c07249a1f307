use num_complex::Complex64 as C64;

use super::rotation::eta;
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::special::{binomial, factorial};

fn check_labels(p: HalfInt, mus: &[HalfInt]) -> Result<()> {
    if p.twice() < 0 {
        return Err(Error::LabelInvalid(format!("p = {p} is negative")));
    }
    for &mu in mus {
        if mu.abs() > p || p.sub_int(mu).is_none() {
            return Err(Error::LabelInvalid(format!("μ = {mu} incompatible with p = {p}")));
        }
    }
    Ok(())
}

fn pochhammer(a: f64, k: usize) -> f64 {
    (0..k).map(|i| a + i as f64).product()
}

/// u^p_{μ'μ}(θ,φ), the amplitude of |p μ'⟩ in D(θ,φ)|p μ⟩.
///
/// The terminating hypergeometric series is summed directly; for μ < μ' the
/// 1/Γ(c+k) normalization drops the vanishing leading terms.
pub fn d_coefficients(p: HalfInt, mu_prime: HalfInt, mu: HalfInt, theta: f64, phi: f64) -> Result<C64> {
    check_labels(p, &[mu_prime, mu])?;
    let pm = |a: HalfInt, sgn: i32| HalfInt::from_twice(p.twice() + sgn * a.twice()).twice() / 2;
    let (p_plus_mu, p_minus_mu) = (pm(mu, 1), pm(mu, -1));
    let (p_plus_mup, p_minus_mup) = (pm(mu_prime, 1), pm(mu_prime, -1));
    let d = (mu.twice() - mu_prime.twice()) / 2;
    let a = -(p_minus_mu as f64);
    let b = -(p_plus_mup as f64);
    let (s, c) = (theta / 2.0).sin_cos();
    let twop = p.twice();
    let kmax = p_minus_mu.min(p_plus_mup);
    let mut sum = 0.0;
    for k in 0..=kmax.max(0) {
        let cc = d + 1 + k;
        if cc <= 0 {
            continue;
        }
        let sexp = d + 2 * k;
        let cexp = twop - d - 2 * k;
        let term = pochhammer(a, k as usize) * pochhammer(b, k as usize)
            / (factorial(k as usize) * factorial((cc - 1) as usize))
            * if k % 2 == 0 { 1.0 } else { -1.0 }
            * s.powi(sexp)
            * c.powi(cexp);
        sum += term;
    }
    let pre = (factorial(p_plus_mu as usize) * factorial(p_minus_mup as usize)
        / (factorial(p_plus_mup as usize) * factorial(p_minus_mu as usize)))
        .sqrt();
    Ok(C64::from_polar(pre * sum, phi * d as f64))
}

/// Expansion coefficient of |p,μ⟩ in the extremal GCS |θ,φ;p⟩_± (the μ-column ±p of u^p).
pub fn max_classical_coefficient(p: HalfInt, mu: HalfInt, plus: bool, theta: f64, phi: f64) -> Result<C64> {
    check_labels(p, &[mu])?;
    let ppm = p.add_int(mu).unwrap() as usize;
    let pmm = p.sub_int(mu).unwrap() as usize;
    let twop = p.twice() as usize;
    let (s, c) = (theta / 2.0).sin_cos();
    let root = binomial(twop, ppm).sqrt();
    let (amp, phase) = if plus {
        (s.powi(pmm as i32) * c.powi(ppm as i32), -(mu.value() - p.value()) * phi)
    } else {
        ((-s).powi(ppm as i32) * c.powi(pmm as i32), -(mu.value() + p.value()) * phi)
    };
    Ok(C64::from_polar(root * amp, phase))
}

/// A semi-coherent state label set (p, μ, n, λ) together with its angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiLabel {
    pub p: HalfInt,
    pub mu: HalfInt,
    pub n: usize,
    pub lambda: Option<HalfInt>,
    pub theta: f64,
    pub phi: f64,
}

/// ⟨θ,φ;p,μ,n,λ | θ',φ';p',μ',n',λ'⟩ in closed form.
///
/// Zero unless p, n and λ coincide; otherwise a finite double sum in the
/// factors (η'⁺η⁺*) and (η'⁺η⁻*) obtained from the rotated creation operators.
pub fn overlap_closed_form(a: &SemiLabel, b: &SemiLabel) -> Result<C64> {
    check_labels(a.p, &[a.mu])?;
    check_labels(b.p, &[b.mu])?;
    if a.p != b.p || a.n != b.n || a.lambda != b.lambda {
        return Ok(C64::new(0.0, 0.0));
    }
    let p = a.p;
    let (ep, em) = eta(a.theta, a.phi);
    let (epp, _) = eta(b.theta, b.phi);
    let dot = |x: &[C64; 2], y: &[C64; 2]| x[0].conj() * y[0] + x[1].conj() * y[1];
    let big_a = dot(&ep, &epp);
    let big_b = dot(&em, &epp);
    let ppm = p.add_int(a.mu).unwrap();
    let pmm = p.sub_int(a.mu).unwrap();
    let ppmp = p.add_int(b.mu).unwrap();
    let pmmp = p.sub_int(b.mu).unwrap();
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=pmmp {
        let j = ppm - k;
        if j < 0 || j > ppmp {
            continue;
        }
        let coeff = binomial(ppmp as usize, j as usize) * binomial(pmmp as usize, k as usize);
        sum += big_a.powi(j as i32)
            * big_b.powi((ppmp - j) as i32)
            * (-big_b.conj()).powi(k as i32)
            * big_a.conj().powi((pmmp - k) as i32)
            * coeff;
    }
    let pre = (factorial(ppm as usize) * factorial(pmm as usize) / (factorial(ppmp as usize) * factorial(pmmp as usize))).sqrt();
    Ok(sum * pre)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    /// Wigner small-d from the explicit factorial sum, an independent oracle.
    fn wigner_d(j: HalfInt, mp: HalfInt, m: HalfInt, beta: f64) -> f64 {
        let jpm = j.add_int(m).unwrap();
        let jmm = j.sub_int(m).unwrap();
        let jpmp = j.add_int(mp).unwrap();
        let jmmp = j.sub_int(mp).unwrap();
        let mut s = 0.0;
        for k in 0..=(2 * j.twice()) {
            let k = k as i64;
            let e = [jpm - k, k, mp.sub_int(m).unwrap() + k, jmmp - k];
            if e.iter().any(|&x| x < 0) {
                continue;
            }
            let den: f64 = e.iter().map(|&x| factorial(x as usize)).product();
            let sign = if (mp.sub_int(m).unwrap() + k) % 2 == 0 { 1.0 } else { -1.0 };
            let (sb, cb) = (beta / 2.0).sin_cos();
            s += sign / den * cb.powi((jpm + jmmp - 2 * k) as i32) * sb.powi((mp.sub_int(m).unwrap() + 2 * k) as i32);
        }
        s * (factorial(jpm as usize) * factorial(jmm as usize) * factorial(jpmp as usize) * factorial(jmmp as usize)).sqrt()
    }

    #[test]
    fn identity_at_theta_zero() {
        for tp in 0..6 {
            for a in (-tp..=tp).step_by(2) {
                for b in (-tp..=tp).step_by(2) {
                    let u = d_coefficients(h(tp), h(a), h(b), 0.0, 0.7).unwrap();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((u - C64::new(want, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn spin_half_entry() {
        let u = d_coefficients(h(1), h(1), h(1), 1.1, 0.4).unwrap();
        assert!((u.re - (0.55f64).cos()).abs() < 1e-15 && u.im.abs() < 1e-15);
    }

    #[test]
    fn matches_wigner_magnitudes_and_unitarity() {
        let (theta, phi) = (1.234, 2.1);
        for tp in 0..8 {
            for b in (-tp..=tp).step_by(2) {
                let mut col = 0.0;
                for a in (-tp..=tp).step_by(2) {
                    let u = d_coefficients(h(tp), h(a), h(b), theta, phi).unwrap();
                    col += u.norm_sqr();
                    assert!((u.norm() - wigner_d(h(tp), h(a), h(b), theta).abs()).abs() < 1e-13);
                }
                assert!((col - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_classical_is_column() {
        for tp in 0..6 {
            for a in (-tp..=tp).step_by(2) {
                let u = d_coefficients(h(tp), h(a), h(tp), 0.9, 1.7).unwrap();
                let c = max_classical_coefficient(h(tp), h(a), true, 0.9, 1.7).unwrap();
                assert!((u - c).norm() < 1e-14);
                let u = d_coefficients(h(tp), h(a), h(-tp), 0.9, 1.7).unwrap();
                let c = max_classical_coefficient(h(tp), h(a), false, 0.9, 1.7).unwrap();
                assert!((u - c).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let mk = |theta, phi| SemiLabel { p: h(1), mu: h(1), n: 1, lambda: None, theta, phi };
        let o = overlap_closed_form(&mk(std::f64::consts::FRAC_PI_2, 0.0), &mk(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((o - C64::new(0.5, 0.5)).norm() < 1e-15);
        let a = mk(0.3, 0.2);
        assert!((overlap_closed_form(&a, &a).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        let mut b = a;
        b.p = h(3);
        b.mu = h(1);
        b.n = 3;
        assert_eq!(overlap_closed_form(&a, &b).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn overlap_hermitian_and_matches_column_sum() {
        let p = h(4);
        let a = SemiLabel { p, mu: h(2), n: 4, lambda: None, theta: 0.7, phi: 0.3 };
        let b = SemiLabel { p, mu: h(-2), n: 4, lambda: None, theta: 2.2, phi: 4.1 };
        let ab = overlap_closed_form(&a, &b).unwrap();
        let ba = overlap_closed_form(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        let mut sum = C64::new(0.0, 0.0);
        for k in (-4..=4).step_by(2) {
            sum += d_coefficients(p, h(k), a.mu, a.theta, a.phi).unwrap().conj()
                * d_coefficients(p, h(k), b.mu, b.theta, b.phi).unwrap();
        }
        assert!((ab - sum).norm() < 1e-14);
    }

    #[test]
    fn labels_checked() {
        assert!(d_coefficients(h(1), h(3), h(1), 0.1, 0.1).is_err());
        assert!(d_coefficients(h(2), h(1), h(0), 0.1, 0.1).is_err());
    }
}
