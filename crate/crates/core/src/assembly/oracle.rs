//! Brute-force reference integration of the single-layer kernel.
//!
//! Everything here uses composite Gauss–Legendre panels with adaptive
//! refinement, geometric grading towards endpoint singularities and
//! subtraction of the logarithmic kernel singularity. It shares no
//! quadrature rule with the Filon-based assembly and is slow.

use super::pair::Piece;
use crate::error::{HnaError, Result};
use crate::geometry::Screen;
use crate::quadrature::{gauss_legendre_cached, gauss_log_cached};
use crate::specfun::{bessel_j0_y0_regular, hankel1_0, legendre_all};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const LOG_POINTS: usize = 24;
const GROWTH: f64 = 4.0;
const SMALLEST: f64 = 1e-16;
const PANEL_POINTS: usize = 16;
const MAX_DEPTH: usize = 40;

/// Geometric panels of `[a, b]`: when `fine_a` is set the first panel has
/// length `fine_a` and each next one is `GROWTH` times longer, likewise from `b`.
fn panels(a: f64, b: f64, fine_a: Option<f64>, fine_b: Option<f64>) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if !(b > a) {
        return out;
    }
    let (ma, mb) = match (fine_a, fine_b) {
        (Some(_), Some(_)) => (0.5 * (a + b), 0.5 * (a + b)),
        (Some(_), None) => (b, b),
        (None, Some(_)) => (a, a),
        (None, None) => {
            out.push((a, b));
            return out;
        }
    };
    if let Some(h0) = fine_a {
        let mut x = a;
        let mut h = h0.max(SMALLEST * (b - a)).max(8.0 * f64::EPSILON * a.abs().max(b.abs()));
        while x < ma {
            let y = (x + h).min(ma);
            if ma - y < 0.5 * h {
                out.push((x, ma));
                break;
            }
            out.push((x, y));
            x = y;
            h *= GROWTH - 1.0;
        }
    }
    if let Some(h0) = fine_b {
        let mut right = Vec::new();
        let mut x = b;
        let mut h = h0.max(SMALLEST * (b - a)).max(8.0 * f64::EPSILON * a.abs().max(b.abs()));
        while x > mb {
            let y = (x - h).max(mb);
            if y - mb < 0.5 * h {
                right.push((mb, x));
                break;
            }
            right.push((y, x));
            x = y;
            h *= GROWTH - 1.0;
        }
        right.reverse();
        out.extend(right);
    }
    out
}

fn integrate_panels<F: FnMut(f64, &mut [Complex64])>(
    f: &mut F,
    dim: usize,
    list: &[(f64, f64)],
    k: f64,
    tol: f64,
    acc: &mut [Complex64],
) -> Result<()> {
    let wavelength = 2.0 * PI / k;
    for &(a, b) in list {
        let pieces = ((b - a) / (0.5 * wavelength)).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            let x = a + i as f64 * h;
            let y = if i + 1 == pieces { b } else { x + h };
            let whole = gauss_panel(f, dim, x, y);
            adaptive_panel(f, dim, x, y, whole, tol, 0, acc)?;
        }
    }
    Ok(())
}

fn gauss_panel<F: FnMut(f64, &mut [Complex64])>(f: &mut F, dim: usize, a: f64, b: f64) -> Vec<Complex64> {
    let rule = gauss_legendre_cached(PANEL_POINTS);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = vec![ZERO; dim];
    let mut buf = vec![ZERO; dim];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        f(mid + half * x, &mut buf);
        for (s, v) in acc.iter_mut().zip(&buf) {
            *s += v * (half * w);
        }
    }
    acc
}

/// Bisects until the two halves agree with the whole to `tol` relative to its largest component.
#[allow(clippy::too_many_arguments)]
fn adaptive_panel<F: FnMut(f64, &mut [Complex64])>(
    f: &mut F,
    dim: usize,
    a: f64,
    b: f64,
    whole: Vec<Complex64>,
    tol: f64,
    depth: usize,
    acc: &mut [Complex64],
) -> Result<()> {
    let m = 0.5 * (a + b);
    let left = gauss_panel(f, dim, a, m);
    let right = gauss_panel(f, dim, m, b);
    let scale = whole.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let change = whole
        .iter()
        .zip(left.iter().zip(&right))
        .map(|(w, (l, r))| (w - l - r).norm())
        .fold(0.0, f64::max);
    if change <= tol * scale + 1e-300 || b - a <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) {
        for (s, (l, r)) in acc.iter_mut().zip(left.iter().zip(&right)) {
            *s += l + r;
        }
        return Ok(());
    }
    if depth >= MAX_DEPTH {
        return Err(HnaError::NonConvergence {
            levels: depth,
            change,
        });
    }
    adaptive_panel(f, dim, a, m, left, tol, depth + 1, acc)?;
    adaptive_panel(f, dim, m, b, right, tol, depth + 1, acc)
}

/// `\int_0^d Phi(x) g(x) dx` for smooth `g`, with the log singularity integrated exactly.
fn log_panel<F: FnMut(f64, &mut [Complex64])>(g: &mut F, dim: usize, d: f64, k: f64, acc: &mut [Complex64]) {
    let gl = gauss_legendre_cached(LOG_POINTS);
    let lg = gauss_log_cached(LOG_POINTS);
    let mut buf = vec![ZERO; dim];
    let c_reg = Complex64::new(-(0.5 * k).ln() / (2.0 * PI), 0.25);
    for i in 0..LOG_POINTS {
        let x = 0.5 * d * (gl.nodes[i] + 1.0);
        let (j0, y0r) = bessel_j0_y0_regular(k * x);
        let w = (c_reg * j0 - 0.25 * y0r - d.ln() / (2.0 * PI) * j0) * (0.5 * d * gl.weights[i]);
        g(x, &mut buf);
        for (s, v) in acc.iter_mut().zip(&buf) {
            *s += w * v;
        }
        let x = d * lg.nodes[i];
        let j0 = bessel_j0_y0_regular(k * x).0;
        let w = d * lg.weights[i] * j0 / (2.0 * PI);
        g(x, &mut buf);
        for (s, v) in acc.iter_mut().zip(&buf) {
            *s += w * v;
        }
    }
}

fn kernel_value(k: f64, r: f64) -> Complex64 {
    hankel1_0(k * r).map(|h| h * Complex64::new(0.0, 0.25)).unwrap_or(ZERO)
}

/// `\int_a^b Phi(|s - t|) g(t) dt` where `s` is outside `(a, b)` or equal to an end.
/// `grade` requests geometric refinement towards the ends of `[a, b]`.
/// The integration variable is the offset `t - s`, so the kernel argument is exact.
#[allow(clippy::too_many_arguments)]
fn kernel_integral<F: FnMut(f64, &mut [Complex64])>(
    g: &mut F,
    dim: usize,
    a: f64,
    b: f64,
    s: f64,
    k: f64,
    grade: (bool, bool),
    tol: f64,
) -> Result<Vec<Complex64>> {
    let mut acc = vec![ZERO; dim];
    if !(b > a) {
        return Ok(acc);
    }
    let (a, b) = (a - s, b - s);
    let len = b - a;
    let fine = 1e-15 * len;
    let at_a = a == 0.0;
    let at_end = at_a || b == 0.0;
    let d = (0.5 * len).min(0.5 / k);
    if at_end {
        let mut shifted = |x: f64, out: &mut [Complex64]| g(if at_a { s + x } else { s - x }, out);
        log_panel(&mut shifted, dim, d, k, &mut acc);
    }
    let mut f = |x: f64, out: &mut [Complex64]| {
        g(s + x, out);
        let phi = kernel_value(k, x.abs());
        for v in out.iter_mut() {
            *v *= phi;
        }
    };
    let list = if at_end {
        if at_a {
            panels(d, b, Some(d), grade.1.then_some(fine))
        } else {
            panels(a, -d, grade.0.then_some(fine), Some(d))
        }
    } else {
        let gap = a.max(-b);
        panels(
            a,
            b,
            if grade.0 { Some(fine) } else if a > 0.0 { Some(gap.max(fine)) } else { None },
            if grade.1 { Some(fine) } else if b < 0.0 { Some(gap.max(fine)) } else { None },
        )
    };
    integrate_panels(&mut f, dim, &list, k, tol, &mut acc)?;
    Ok(acc)
}

/// Reference value of the block computed by [`super::pair::pair_block`].
pub fn oracle_pair_block(test: &Piece, trial: &Piece, k: f64) -> Result<Vec<Complex64>> {
    let origin = if test.len() <= trial.len() { test.anchor } else { trial.anchor };
    let (s0, s1) = (test.anchor - origin + test.lo, test.anchor - origin + test.hi);
    let (t0, t1) = (trial.anchor - origin + trial.lo, trial.anchor - origin + trial.hi);
    let (sm, sh) = (test.anchor - origin + 0.5 * (test.lo + test.hi), 0.5 * (test.hi - test.lo));
    let (tm, th) = (trial.anchor - origin + 0.5 * (trial.lo + trial.hi), 0.5 * (trial.hi - trial.lo));
    let nt = test.degree + 1;
    let nl = trial.degree + 1;
    let tol = 1e-12;
    let mut trial_fn = |t: f64, out: &mut [Complex64]| {
        let mut p = [0.0; 64];
        legendre_all(((t - tm) / th).clamp(-1.0, 1.0), &mut p[..nl]);
        let e = Complex64::from_polar(1.0, trial.phase * t);
        for (o, q) in out.iter_mut().zip(&p[..nl]) {
            *o = e * q;
        }
    };
    let mut error = None;
    let mut outer = |s: f64, out: &mut [Complex64]| {
        let mut inner = vec![ZERO; nl];
        let parts: Vec<(f64, f64)> = if s > t0 && s < t1 { vec![(t0, s), (s, t1)] } else { vec![(t0, t1)] };
        for (a, b) in parts {
            match kernel_integral(&mut trial_fn, nl, a, b, s, k, (false, false), tol) {
                Ok(v) => inner.iter_mut().zip(v).for_each(|(x, y)| *x += y),
                Err(e) => error = Some(e),
            }
        }
        let mut p = [0.0; 64];
        legendre_all(((s - sm) / sh).clamp(-1.0, 1.0), &mut p[..nt]);
        let e = Complex64::from_polar(1.0, test.phase * s);
        for q in 0..nt {
            for r in 0..nl {
                out[q * nl + r] = e * p[q] * inner[r];
            }
        }
    };
    let mut cuts = vec![s0, s1];
    for c in [t0, t1] {
        if c > s0 && c < s1 {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = vec![ZERO; nt * nl];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let near = |x: f64| {
            let dist = (x - t0).abs().min((x - t1).abs());
            (dist < b - a).then_some(dist.max(1e-10 * (b - a)))
        };
        let list = panels(a, b, near(a), near(b));
        integrate_panels(&mut outer, nt * nl, &list, k, tol, &mut acc)?;
    }
    if let Some(e) = error {
        return Err(e);
    }
    let factor = Complex64::from_polar(1.0, (test.phase + trial.phase) * origin);
    Ok(acc.into_iter().map(|v| v * factor).collect())
}

/// `S_k g(s) = \int_Gamma Phi_k(|s - t|) g(t) dt` by brute-force quadrature,
/// graded towards the segment ends and the evaluation point.
pub fn single_layer_apply<F: Fn(f64) -> Complex64>(screen: &Screen, g: F, s: f64, k: f64) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(HnaError::Parameter(format!("wavenumber must be positive, got {k}")));
    }
    if !s.is_finite() {
        return Err(HnaError::Domain(format!("evaluation point must be finite, got {s}")));
    }
    let mut acc = ZERO;
    let mut gv = |t: f64, out: &mut [Complex64]| out[0] = g(t);
    for (a, b) in screen.segments() {
        let parts: Vec<(f64, f64, (bool, bool))> = if s > a && s < b {
            vec![(a, s, (true, false)), (s, b, (false, true))]
        } else {
            vec![(a, b, (true, true))]
        };
        for (x, y, grade) in parts {
            acc += kernel_integral(&mut gv, 1, x, y, s, k, grade, 1e-12)?[0];
        }
    }
    Ok(acc)
}
