//! Gamma, Gauss hypergeometric and Lerch functions.
//!
//! Only what the closed-form models need: complex Gamma, `2F1(a, b; c; z)` on
//! `0 <= z < 1` for real `c > 0`, and `Phi(z, s, x)` for integer `s`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_pole(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    Ok(())
}

/// Natural logarithm of the Gamma function (principal branch up to `2 pi i`).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let s = (z * PI).sin();
        if s.norm() == 0.0 {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        let rest = ln_gamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - rest);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln())
}

/// Complex Gamma function.
pub fn gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    if z.re < 0.5 {
        let s = (z * PI).sin();
        if s.norm() == 0.0 {
            return Err(Error::Pole { re: z.re, im: z.im });
        }
        return Ok(PI / (s * gamma(Complex64::new(1.0, 0.0) - z)?));
    }
    let zm = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (zm + i as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    // t^(zm+1/2) e^-t in log space keeps large |z| finite
    Ok((2.0 * PI).sqrt() * ((zm + 0.5) * t.ln() - t).exp() * acc)
}

pub fn gamma_real(x: f64) -> Result<f64> {
    Ok(gamma(Complex64::new(x, 0.0))?.re)
}

/// `Gamma(z) Gamma(conj z) = |Gamma(z)|^2`.
pub fn gamma_pair_product(z: Complex64) -> Result<f64> {
    Ok((2.0 * ln_gamma(z)?.re).exp())
}

fn is_nonpositive_integer(c: f64) -> bool {
    c <= 0.0 && c == c.round()
}

/// Power series of `2F1` and its derivative at `|z| <= 1/2`-ish arguments.
fn hyp2f1_series(a: Complex64, b: Complex64, c: f64, z: f64) -> Result<(Complex64, Complex64)> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut dsum = Complex64::new(0.0, 0.0);
    let mut quiet = 0;
    for k in 0..20_000 {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / (c + kf);
        // d/dz: sum over t_k (a+k)(b+k)/(c+k)
        let dterm = term * ratio;
        dsum += dterm;
        term = dterm * z / (kf + 1.0);
        sum += term;
        if term.norm() == 0.0 && dterm.norm() == 0.0 {
            return Ok((sum, dsum));
        }
        let small = term.norm() <= 1e-17 * sum.norm() && dterm.norm() <= 1e-17 * dsum.norm().max(1e-300);
        // terms may grow before they shrink; stop only once they fall steadily
        if small && kf > (a.norm() + b.norm()) {
            quiet += 1;
            if quiet >= 3 {
                return Ok((sum, dsum));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::SpecialFunction {
        func: "hyp2f1",
        reason: format!("series did not converge at z = {z}"),
    })
}

/// One Taylor step of the hypergeometric ODE from `z0` to `z0 + h`, given the
/// value and derivative at `z0`.
fn hyp2f1_taylor_step(
    a: Complex64,
    b: Complex64,
    c: f64,
    z0: f64,
    h: f64,
    w0: Complex64,
    dw0: Complex64,
) -> Result<(Complex64, Complex64)> {
    let p0 = z0 * (1.0 - z0);
    let p1 = 1.0 - 2.0 * z0;
    let p2 = -1.0;
    let q0 = c - (a + b + 1.0) * z0;
    let q1 = -(a + b + 1.0);
    let ab = a * b;
    // v_k = w_k h^k
    let mut v_prev = w0;
    let mut v_cur = dw0 * h;
    let mut sum = v_prev + v_cur;
    let mut dsum = v_cur; // sum k v_k / h
    let mut quiet = 0;
    for k in 0..5_000usize {
        let kf = k as f64;
        let next = -((p1 * kf * (kf + 1.0) + q0 * (kf + 1.0)) * v_cur * h
            + (p2 * kf * (kf - 1.0) + q1 * kf - ab) * v_prev * h * h)
            / (p0 * (kf + 1.0) * (kf + 2.0));
        sum += next;
        dsum += next * (kf + 2.0);
        let scale = sum.norm() + dsum.norm();
        if next.norm() * (kf + 3.0) <= 1e-17 * scale {
            quiet += 1;
            if quiet >= 3 {
                return Ok((sum, dsum / h));
            }
        } else {
            quiet = 0;
        }
        v_prev = v_cur;
        v_cur = next;
    }
    Err(Error::SpecialFunction {
        func: "hyp2f1",
        reason: format!("Taylor continuation stalled at z = {z0}"),
    })
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` and its `z`-derivative for
/// complex `a, b`, real `c > 0` and `0 <= z < 1`.
///
/// `z <= 1/2` uses the defining series; larger `z` continues the series value
/// along the real axis with Taylor steps of the hypergeometric ODE, which
/// stays regular for every `c - a - b` (no logarithmic special case).
pub fn hyp2f1_complex(a: Complex64, b: Complex64, c: f64, z: f64) -> Result<(Complex64, Complex64)> {
    if is_nonpositive_integer(c) {
        return Err(Error::SpecialFunction {
            func: "hyp2f1",
            reason: format!("c = {c} is a non-positive integer"),
        });
    }
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("hyp2f1 requires 0 <= z < 1, got {z}")));
    }
    if z <= 0.5 {
        return hyp2f1_series(a, b, c, z);
    }
    let (mut w, mut dw) = hyp2f1_series(a, b, c, 0.5)?;
    let mut z0 = 0.5;
    // local growth rate of the solutions, used to bound the step
    let rate = |z0: f64| {
        let p0 = z0 * (1.0 - z0);
        let q0 = (c - (a + b + 1.0) * z0).norm();
        1.0 + ((a * b).norm() / p0).sqrt() + q0 / p0
    };
    while z0 < z {
        let h = (z - z0).min(0.5 * (1.0 - z0)).min(1.0 / rate(z0));
        let (nw, ndw) = hyp2f1_taylor_step(a, b, c, z0, h, w, dw)?;
        w = nw;
        dw = ndw;
        z0 += h;
        if z - z0 < 1e-15 * z {
            break;
        }
    }
    Ok((w, dw))
}

fn admissible_pair(a: Complex64, b: Complex64) -> bool {
    let tol = 1e-12 * (1.0 + a.norm() + b.norm());
    let both_real = a.im.abs() <= tol && b.im.abs() <= tol;
    let conjugate = (a - b.conj()).norm() <= tol;
    both_real || conjugate
}

/// `2F1` restricted to real results: `a`, `b` real or a conjugate pair.
pub fn hyp2f1(a: Complex64, b: Complex64, c: f64, zeta: f64) -> Result<f64> {
    Ok(hyp2f1_with_derivative(a, b, c, zeta)?.0)
}

/// Real `2F1` value and derivative; rejects non-real parameter pairs and
/// checks that the imaginary residue of the computation stays negligible.
pub fn hyp2f1_with_derivative(a: Complex64, b: Complex64, c: f64, zeta: f64) -> Result<(f64, f64)> {
    if !admissible_pair(a, b) {
        return Err(Error::Domain(format!(
            "hyp2f1 parameters must be real or complex conjugates, got {a} and {b}"
        )));
    }
    let (w, dw) = hyp2f1_complex(a, b, c, zeta)?;
    if w.im.abs() > 1e-10 * w.norm().max(1e-300) {
        return Err(Error::SpecialFunction {
            func: "hyp2f1",
            reason: format!("imaginary residue {} at z = {zeta}", w.im),
        });
    }
    Ok((w.re, dw.re))
}

/// Exponential integral `E1(u)` for `u > 0`.
fn expint_e1(u: f64) -> f64 {
    if u <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -u / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER_GAMMA - u.ln() + sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = u + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-u).exp()
    }
}

/// `int_Y^inf e^{-lambda y} y^{-s} dy` by integration by parts down to `E1`.
fn tail_integral(lambda: f64, y: f64, s: u32) -> f64 {
    if lambda == 0.0 {
        return y.powi(1 - s as i32) / (s as f64 - 1.0);
    }
    let mut i = expint_e1(lambda * y);
    let e = (-lambda * y).exp();
    for k in 2..=s {
        let kf = k as f64;
        i = (e * y.powi(1 - k as i32) - lambda * i) / (kf - 1.0);
    }
    i
}

fn lerch_direct(z: f64, s: u32, x: f64) -> f64 {
    let mut sum = 0.0;
    let mut zm = 1.0;
    for m in 0..1_000_000u64 {
        let term = zm / (m as f64 + x).powi(s as i32);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        zm *= z;
        if zm == 0.0 {
            break;
        }
    }
    sum
}

const BERNOULLI_2K: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Euler-Maclaurin summation for `0 < z <= 1`.
fn lerch_euler_maclaurin(z: f64, s: u32, x: f64) -> f64 {
    let lambda = -z.ln();
    let big_m = 40usize;
    let mut head = 0.0;
    for m in 0..big_m {
        head += (-lambda * m as f64).exp() / (m as f64 + x).powi(s as i32);
    }
    let mf = big_m as f64;
    let y = mf + x;
    let em = (-lambda * mf).exp();
    // g^(j)(M) for g(m) = (m+x)^-s
    let mut gder = [0.0f64; 13];
    let mut rising = 1.0;
    for (j, slot) in gder.iter_mut().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * rising * y.powi(-(s as i32) - j as i32);
        rising *= s as f64 + j as f64;
    }
    let binom = |n: usize, k: usize| -> f64 {
        let mut r = 1.0;
        for i in 0..k {
            r = r * (n - i) as f64 / (i + 1) as f64;
        }
        r
    };
    let fder = |r: usize| -> f64 {
        (0..=r)
            .map(|j| binom(r, j) * (-lambda).powi((r - j) as i32) * gder[j])
            .sum::<f64>()
            * em
    };
    let mut tail = (lambda * x).exp() * tail_integral(lambda, y, s) + 0.5 * em * gder[0];
    let mut fact = 1.0;
    for (k, &b2k) in BERNOULLI_2K.iter().enumerate() {
        let two_k = 2 * (k + 1);
        fact *= ((two_k - 1) * two_k) as f64;
        tail -= b2k / fact * fder(two_k - 1);
    }
    head + tail
}

/// Lerch transcendent `Phi(z, s, x) = sum_m z^m / (m + x)^s` for `|z| < 1`
/// (and `z = 1` when `s >= 2`), `x > 0`.
pub fn lerch_phi(z: f64, s: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("lerch_phi requires x > 0, got {x}")));
    }
    if s == 0 {
        return Err(Error::Domain("lerch_phi requires s >= 1".into()));
    }
    if !z.is_finite() || z.abs() > 1.0 || z == -1.0 || (z == 1.0 && s < 2) {
        return Err(Error::Domain(format!(
            "lerch_phi requires |z| < 1 (or z = 1 with s >= 2), got z = {z}, s = {s}"
        )));
    }
    if z < 0.0 {
        // split even and odd terms: both become series in y^2 > 0
        let y = -z;
        let scale = 0.5f64.powi(s as i32);
        let even = lerch_phi(y * y, s, 0.5 * x)?;
        let odd = lerch_phi(y * y, s, 0.5 * (x + 1.0))?;
        return Ok(scale * (even - y * odd));
    }
    if z <= 0.9 {
        Ok(lerch_direct(z, s, x))
    } else {
        Ok(lerch_euler_maclaurin(z, s, x))
    }
}
