//! Bessel, Hankel, spherical Bessel, Legendre and Gamma values for real arguments.
//!
//! Integer-order Bessel functions use three regimes: power series up to
//! `x = 4`, Miller backward recurrence with Neumann series for `Y` up to
//! `x = 25`, and the Hankel asymptotic expansion beyond.

use crate::error::{HnaError, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_MAX: f64 = 4.0;
const MILLER_MAX: f64 = 25.0;

/// J0, J1, Y0, Y1 at one argument.
#[derive(Debug, Clone, Copy)]
struct Bessel01 {
    j0: f64,
    j1: f64,
    y0: f64,
    y1: f64,
}

fn series01(x: f64) -> Bessel01 {
    let t = 0.25 * x * x;
    // J0 = sum (-t)^m/(m!)^2, J1 = (x/2) sum (-t)^m/(m!(m+1)!)
    let mut a0 = 1.0; // (-t)^m/(m!)^2
    let mut a1 = 1.0; // (-t)^m/(m!(m+1)!)
    let mut j0 = 1.0;
    let mut j1s = 1.0;
    let mut harm = 0.0; // H_m
    let mut y0s = 0.0; // sum_{m>=1} (-1)^{m+1} H_m t^m/(m!)^2
    let psi1 = -EULER_GAMMA; // psi(1)
    let mut y1s = psi1 + (1.0 - EULER_GAMMA); // psi(1)+psi(2) for m = 0
    for m in 1..60 {
        let mf = m as f64;
        a0 *= -t / (mf * mf);
        a1 *= -t / (mf * (mf + 1.0));
        harm += 1.0 / mf;
        j0 += a0;
        j1s += a1;
        y0s -= harm * a0;
        // psi(m+1) + psi(m+2) = -2 gamma + H_m + H_{m+1}
        let psi_sum = -2.0 * EULER_GAMMA + 2.0 * harm + 1.0 / (mf + 1.0);
        y1s += psi_sum * a1;
        if a0.abs() < 1e-18 && a1.abs() < 1e-18 {
            break;
        }
    }
    let j1 = 0.5 * x * j1s;
    let lg = (0.5 * x).ln();
    let y0 = FRAC_2_PI * ((lg + EULER_GAMMA) * j0 + y0s);
    let y1 = FRAC_2_PI * lg * j1 - FRAC_2_PI / x - 0.5 * x * y1s / PI;
    Bessel01 { j0, j1, y0, y1 }
}

/// Regular part of Y0 from the series, `(2/pi)(gamma J0 + sum)`.
fn series_y0_regular(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let mut a0 = 1.0;
    let mut j0 = 1.0;
    let mut harm = 0.0;
    let mut y0s = 0.0;
    for m in 1..60 {
        let mf = m as f64;
        a0 *= -t / (mf * mf);
        harm += 1.0 / mf;
        j0 += a0;
        y0s -= harm * a0;
        if a0.abs() < 1e-18 {
            break;
        }
    }
    (j0, FRAC_2_PI * (EULER_GAMMA * j0 + y0s))
}

fn miller01(x: f64) -> Bessel01 {
    let n = ((x + 40.0) as usize + 1) & !1;
    let mut v = vec![0.0f64; n + 2];
    v[n] = 1e-30;
    for m in (1..=n).rev() {
        v[m - 1] = 2.0 * m as f64 / x * v[m] - v[m + 1];
    }
    let mut norm = v[0];
    for k in (2..=n).step_by(2) {
        norm += 2.0 * v[k];
    }
    let inv = 1.0 / norm;
    for e in v.iter_mut() {
        *e *= inv;
    }
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut sign = -1.0;
    let mut k = 1;
    while 2 * k < n {
        let kf = k as f64;
        s0 += sign * v[2 * k] / kf;
        s1 += sign * (v[2 * k - 1] - v[2 * k + 1]) / kf;
        sign = -sign;
        k += 1;
    }
    let y0 = FRAC_2_PI * (lg * v[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (-v[0] / x + lg * v[1] + s1);
    Bessel01 {
        j0: v[0],
        j1: v[1],
        y0,
        y1,
    }
}

/// Hankel asymptotic factors P and Q for order with `mu = 4 nu^2`.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        let signed = if (k / 2) % 2 == 0 { term } else { -term };
        if k % 2 == 1 {
            q += signed;
        } else {
            p += signed;
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic01(x: f64) -> Bessel01 {
    let (s, c) = x.sin_cos();
    let amp = (FRAC_2_PI / x).sqrt();
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    // x - pi/4 and x - 3pi/4 phases expanded to avoid rounding in the shift.
    let c0 = (c + s) * FRAC_1_SQRT_2;
    let s0 = (s - c) * FRAC_1_SQRT_2;
    let c1 = (s - c) * FRAC_1_SQRT_2;
    let s1 = -(s + c) * FRAC_1_SQRT_2;
    Bessel01 {
        j0: amp * (p0 * c0 - q0 * s0),
        y0: amp * (p0 * s0 + q0 * c0),
        j1: amp * (p1 * c1 - q1 * s1),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

fn bessel01(x: f64) -> Bessel01 {
    if x <= SERIES_MAX {
        series01(x)
    } else if x <= MILLER_MAX {
        miller01(x)
    } else {
        asymptotic01(x)
    }
}

/// Bessel function of the first kind of order zero. Even in `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 1.0;
    }
    bessel01(x).j0
}

/// Bessel function of the first kind of order one. Odd in `x`.
pub fn bessel_j1(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let v = bessel01(x.abs()).j1;
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Bessel function of the second kind of order zero, `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(HnaError::Domain(format!("Y0 requires x > 0, got {x}")));
    }
    Ok(bessel01(x).y0)
}

/// Bessel function of the second kind of order one, `x > 0`.
pub fn bessel_y1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(HnaError::Domain(format!("Y1 requires x > 0, got {x}")));
    }
    Ok(bessel01(x).y1)
}

/// Hankel function `H0^(1)(x) = J0(x) + i Y0(x)`, `x > 0`.
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(HnaError::Domain(format!("H0 requires x > 0, got {x}")));
    }
    let b = bessel01(x);
    Ok(Complex64::new(b.j0, b.y0))
}

/// `H0^(1)(x) e^{-ix}` for `x > 0`; slowly varying for large `x`.
pub fn hankel1_0_scaled(x: f64) -> Complex64 {
    debug_assert!(x > 0.0);
    if x > MILLER_MAX {
        let (p, q) = hankel_pq(0.0, x);
        let amp = (FRAC_2_PI / x).sqrt() * FRAC_1_SQRT_2;
        // (P + iQ) e^{-i pi/4} scaled by sqrt(2/(pi x))
        Complex64::new(amp * (p + q), amp * (q - p))
    } else {
        let b = bessel01(x);
        let (s, c) = x.sin_cos();
        Complex64::new(b.j0, b.y0) * Complex64::new(c, -s)
    }
}

/// `J0(x)` together with `Y0(x) - (2/pi) ln(x/2) J0(x)`, which is smooth at the origin.
pub fn bessel_j0_y0_regular(x: f64) -> (f64, f64) {
    let x = x.abs();
    if x <= SERIES_MAX {
        series_y0_regular(x)
    } else {
        let b = bessel01(x);
        (b.j0, b.y0 - FRAC_2_PI * (0.5 * x).ln() * b.j0)
    }
}

/// Spherical Bessel function `j_q(x)`.
pub fn spherical_bessel_j(q: usize, x: f64) -> f64 {
    let mut out = vec![0.0; q + 1];
    spherical_bessel_j_all(x, &mut out);
    out[q]
}

/// Fills `out[q] = j_q(x)` for `q = 0..out.len()`.
pub fn spherical_bessel_j_all(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    if x < 0.0 {
        spherical_bessel_j_all(-x, out);
        for (q, v) in out.iter_mut().enumerate() {
            if q % 2 == 1 {
                *v = -*v;
            }
        }
        return;
    }
    let qmax = out.len() - 1;
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    if x <= 1.0 {
        let h = -0.5 * x * x;
        let mut pre = 1.0;
        for (q, v) in out.iter_mut().enumerate() {
            if q > 0 {
                pre *= x / (2 * q + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for m in 1..40 {
                term *= h / (m as f64 * (2 * q + 2 * m + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *v = pre * sum;
        }
        return;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > qmax as f64 {
        out[0] = j0;
        if qmax >= 1 {
            out[1] = j1;
        }
        for q in 1..qmax {
            out[q + 1] = (2 * q + 1) as f64 / x * out[q] - out[q - 1];
        }
        return;
    }
    let n = qmax + 20 + x as usize;
    let mut v = vec![0.0f64; n + 2];
    v[n] = 1e-30;
    for m in (1..=n).rev() {
        v[m - 1] = (2 * m + 1) as f64 / x * v[m] - v[m + 1];
        if v[m - 1].abs() > 1e250 {
            for e in v[m - 1..].iter_mut() {
                *e *= 1e-250;
            }
        }
    }
    let sum: f64 = v
        .iter()
        .enumerate()
        .map(|(i, e)| (2 * i + 1) as f64 * e * e)
        .sum();
    let mut scale = 1.0 / sum.sqrt();
    let reference = if j0.abs() >= j1.abs() { (j0, v[0]) } else { (j1, v[1]) };
    if reference.0 * reference.1 < 0.0 {
        scale = -scale;
    }
    for (o, e) in out.iter_mut().zip(v.iter()) {
        *o = e * scale;
    }
}

/// Legendre polynomial `P_q(t)` by the three-term recurrence.
pub fn legendre_p(q: usize, t: f64) -> f64 {
    let mut p0 = 1.0;
    if q == 0 {
        return p0;
    }
    let mut p1 = t;
    for n in 1..q {
        let nf = n as f64;
        let p2 = ((2.0 * nf + 1.0) * t * p1 - nf * p0) / (nf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Fills `out[q] = P_q(t)` for `q = 0..out.len()`.
#[inline]
pub fn legendre_all(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0) * t * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// `Gamma(1 + nu)` with `nu = two_nu / 2`.
pub fn gamma_half_integer(two_nu: u32) -> f64 {
    if two_nu % 2 == 0 {
        (1..=two_nu / 2).fold(1.0, |acc, i| acc * i as f64)
    } else {
        let m = (two_nu - 1) / 2;
        (0..=m).fold(PI.sqrt(), |acc, i| acc * (i as f64 + 0.5))
    }
}
