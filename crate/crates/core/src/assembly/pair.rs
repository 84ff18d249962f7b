//! Double integrals of the single-layer kernel against two oscillatory
//! Legendre pieces.
//!
//! For a pair of pieces the integral over the rectangle is split along the
//! diagonal. On each half the variables become `r = u - v > 0` (kernel
//! argument) and `v`. The inner `v` integral of a polynomial times a linear
//! phase is computed exactly by Filon–Gauss weights; when its phase spans
//! many periods it is split into two terms anchored at the moving limits,
//! each with a slowly varying amplitude. The outer `r` integral then
//! carries `H0(kr) e^{-ikr}` times linear phases and is done by Filon–Gauss
//! rules on pieces graded geometrically towards `r = 0` (log-weighted rules on
//! the first piece) and towards points where the inner interval collapses.
//! Well separated pairs use a tensor Filon–Gauss rule instead.

use crate::quadrature::{filon_gauss_cached, gauss_legendre_cached, gauss_log_cached, FilonGauss};
use crate::specfun::{bessel_j0_y0_regular, hankel1_0_scaled, legendre_all};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const QUARTER_I: Complex64 = Complex64::new(0.0, 0.25);

/// Inner phase (in radians over the half-width) above which the split form is used.
const OMEGA_SPLIT: f64 = 10.0;
/// Largest change of the inner phase across one outer piece in the unsplit form.
const OMEGA_STEP: f64 = 3.0;
/// Outer pieces satisfy `length <= GRADE * distance to the nearest singular point`.
const GRADE: f64 = 1.0;
/// The log-weighted first piece extends to at most `LOG_SCALE / k`.
const LOG_SCALE: f64 = 1.0;
const LOG_POINTS: usize = 18;
const OUTER_BASE: usize = 16;
/// Separation (relative to the longer piece) above which the tensor rule is used.
const ADMISSIBLE: f64 = 1.0;
const TENSOR_TOL_DIGITS: f64 = 34.0;

/// `P(s) e^{i phase s}` on `anchor + [lo, hi]`, with `P` ranging over
/// Legendre polynomials of degree `<= degree` in the local variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub anchor: f64,
    pub lo: f64,
    pub hi: f64,
    pub degree: usize,
    pub phase: f64,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Interval in coordinates relative to a common origin, with exact half-length.
#[derive(Debug, Clone, Copy)]
struct Local {
    x0: f64,
    x1: f64,
    mid: f64,
    half: f64,
    degree: usize,
    phase: f64,
}

impl Local {
    fn new(p: &Piece, origin: f64) -> Self {
        let shift = p.anchor - origin;
        Local {
            x0: shift + p.lo,
            x1: shift + p.hi,
            mid: shift + 0.5 * (p.lo + p.hi),
            half: 0.5 * (p.hi - p.lo),
            degree: p.degree,
            phase: p.phase,
        }
    }
}

/// Raw block `R[q][r] = \int\int (i/4) H0(k|s-t|) P_q(s^) e^{i a s} P_r(t^) e^{i b t} ds dt`
/// for test piece `s` (phase `a`) and trial piece `t` (phase `b`), written
/// row-major into `out` of size `(test.degree+1) * (trial.degree+1)`.
pub fn pair_block(test: &Piece, trial: &Piece, k: f64, out: &mut [Complex64]) {
    let nt = test.degree + 1;
    let nl = trial.degree + 1;
    debug_assert_eq!(out.len(), nt * nl);
    out.fill(ZERO);
    let origin = if test.len() <= trial.len() { test.anchor } else { trial.anchor };
    let s = Local::new(test, origin);
    let t = Local::new(trial, origin);
    let gap = (s.x0 - t.x1).max(t.x0 - s.x1);
    let longest = (2.0 * s.half).max(2.0 * t.half);
    if gap >= ADMISSIBLE * longest {
        tensor(&s, &t, k, out);
    } else {
        // s > t half: u = s, v = t
        region(&s, &t, k, out, false);
        // t > s half: u = t, v = s, accumulated transposed
        region(&t, &s, k, out, true);
    }
    let factor = Complex64::from_polar(1.0, (test.phase + trial.phase) * origin);
    for v in out.iter_mut() {
        *v *= factor;
    }
}

fn tensor_points(degree: usize, half: f64, gap: f64) -> usize {
    let x = 1.0 + gap / half;
    let rho = x + (x * x - 1.0).sqrt();
    let n = (TENSOR_TOL_DIGITS / rho.ln()).ceil() as usize;
    (degree + n.clamp(4, 24) + 1).min(64)
}

fn tensor(s: &Local, t: &Local, k: f64, out: &mut [Complex64]) {
    let gap = (s.x0 - t.x1).max(t.x0 - s.x1);
    let ns = tensor_points(s.degree, s.half, gap);
    let nt = tensor_points(t.degree, t.half, gap);
    let rs = filon_gauss_cached(ns);
    let rt = filon_gauss_cached(nt);
    let sign = if s.x0 > t.x1 { 1.0 } else { -1.0 };
    let ls = s.phase + sign * k;
    let lt = t.phase - sign * k;
    let mut ws = [ZERO; 64];
    let mut wt = [ZERO; 64];
    rs.weights_into(ls * s.half, &mut ws[..ns]);
    rt.weights_into(lt * t.half, &mut wt[..nt]);
    let cs = Complex64::from_polar(s.half, ls * s.mid);
    let ct = Complex64::from_polar(t.half, lt * t.mid) * QUARTER_I;
    for w in ws[..ns].iter_mut() {
        *w *= cs;
    }
    for w in wt[..nt].iter_mut() {
        *w *= ct;
    }
    let dq = s.degree + 1;
    let dr = t.degree + 1;
    let ps = legendre_table(rs, dq);
    let pt = legendre_table(rt, dr);
    let dm = s.mid - t.mid;
    // tmp[q][j] = sum_i P_q(x_i) ws_i h(k|s_i - t_j|)
    let mut tmp = vec![ZERO; dq * nt];
    for i in 0..ns {
        let si = dm + s.half * rs.nodes[i];
        for j in 0..nt {
            let r = (si - t.half * rt.nodes[j]).abs();
            let v = hankel1_0_scaled(k * r) * ws[i];
            for q in 0..dq {
                tmp[q * nt + j] += v * ps[q * ns + i];
            }
        }
    }
    for q in 0..dq {
        for j in 0..nt {
            let v = tmp[q * nt + j] * wt[j];
            for r in 0..dr {
                out[q * dr + r] += v * pt[r * nt + j];
            }
        }
    }
}

/// `table[q * n + i] = P_q(x_i)` for the nodes of a rule.
fn legendre_table(rule: &FilonGauss, nq: usize) -> Vec<f64> {
    let n = rule.len();
    let mut table = vec![0.0; nq * n];
    let mut p = [0.0; 64];
    for (i, x) in rule.nodes.iter().enumerate() {
        legendre_all(*x, &mut p[..nq]);
        for q in 0..nq {
            table[q * n + i] = p[q];
        }
    }
    table
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Log,
    Whole,
    Split,
}

/// Linear function `c0 + c1 r`.
#[derive(Debug, Clone, Copy)]
struct Lin {
    c0: f64,
    c1: f64,
}

impl Lin {
    fn at(&self, r: f64) -> f64 {
        self.c0 + self.c1 * r
    }
}

#[derive(Debug, Clone, Copy)]
struct OuterPiece {
    ra: f64,
    rb: f64,
    mode: Mode,
    lo: Lin,
    hi: Lin,
}

/// Half of the double integral where `u > v`, accumulated into `out`
/// (`out[qu][qv]`, or `out[qv][qu]` when `transpose`).
fn region(u: &Local, v: &Local, k: f64, out: &mut [Complex64], transpose: bool) {
    let rmin = (u.x0 - v.x1).max(0.0);
    let rmax = u.x1 - v.x0;
    if rmax <= rmin {
        return;
    }
    let gamma = u.phase + v.phase;
    let mut cuts = vec![rmin, rmax];
    for c in [u.x0 - v.x0, u.x1 - v.x1] {
        if c > rmin && c < rmax {
            cuts.push(c);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let lo_of = |r: f64| {
        if r < u.x0 - v.x0 {
            Lin { c0: u.x0, c1: -1.0 }
        } else {
            Lin { c0: v.x0, c1: 0.0 }
        }
    };
    let hi_of = |r: f64| {
        if r < u.x1 - v.x1 {
            Lin { c0: v.x1, c1: 0.0 }
        } else {
            Lin { c0: u.x1, c1: -1.0 }
        }
    };
    let split_width = if gamma != 0.0 { 2.0 * OMEGA_SPLIT / gamma.abs() } else { f64::INFINITY };
    let mut pieces: Vec<OuterPiece> = Vec::new();
    for w in cuts.windows(2) {
        let (ra, rb) = (w[0], w[1]);
        let mid = 0.5 * (ra + rb);
        let lo = lo_of(mid);
        let hi = hi_of(mid);
        let width = Lin {
            c0: hi.c0 - lo.c0,
            c1: hi.c1 - lo.c1,
        };
        let mut sub = vec![ra, rb];
        if width.c1 != 0.0 && split_width.is_finite() {
            let rs = (split_width - width.c0) / width.c1;
            if rs > ra && rs < rb {
                sub.insert(1, rs);
            }
        }
        for s in sub.windows(2) {
            let m = 0.5 * (s[0] + s[1]);
            let mode = if width.at(m) >= split_width { Mode::Split } else { Mode::Whole };
            pieces.push(OuterPiece {
                ra: s[0],
                rb: s[1],
                mode,
                lo,
                hi,
            });
        }
    }
    // log-weighted first piece at the kernel singularity
    if rmin == 0.0 {
        let first = pieces[0];
        let rl = first.rb.min(LOG_SCALE / k);
        if rl < first.rb {
            pieces[0].ra = rl;
            pieces.insert(0, OuterPiece { rb: rl, mode: Mode::Log, ..first });
        } else {
            pieces[0].mode = Mode::Log;
        }
    }
    let mut ctx = RegionCtx::new(u, v, k, gamma, out, transpose);
    for piece in pieces {
        match piece.mode {
            Mode::Log => ctx.log_piece(&piece),
            _ => {
                let width = Lin {
                    c0: piece.hi.c0 - piece.lo.c0,
                    c1: piece.hi.c1 - piece.lo.c1,
                };
                let mut sings = vec![0.0];
                let mut max_len = f64::INFINITY;
                if piece.mode == Mode::Split && width.c1 != 0.0 {
                    sings.push(-width.c0 / width.c1);
                }
                if piece.mode == Mode::Whole && width.c1 != 0.0 && gamma != 0.0 {
                    max_len = 2.0 * OMEGA_STEP / (gamma.abs() * width.c1.abs());
                }
                for (a, b) in grade(piece.ra, piece.rb, &sings, max_len) {
                    ctx.filon_piece(&OuterPiece { ra: a, rb: b, ..piece });
                }
            }
        }
    }
}

/// Splits `[ra, rb]` so that every part has length at most `GRADE` times its
/// distance to the nearest point of `sings` and at most `max_len`.
fn grade(ra: f64, rb: f64, sings: &[f64], max_len: f64) -> Vec<(f64, f64)> {
    let left = sings.iter().copied().filter(|&x| x <= ra).fold(f64::NEG_INFINITY, f64::max);
    let right = sings.iter().copied().filter(|&x| x >= rb).fold(f64::INFINITY, f64::min);
    let mut done = Vec::new();
    let mut stack = vec![(ra, rb)];
    while let Some((a, b)) = stack.pop() {
        let dl = a - left;
        let dr = right - b;
        let allowed = (GRADE * dl.min(dr)).min(max_len);
        if b - a <= allowed * (1.0 + 1e-12) || !(allowed > 0.0) {
            done.push((a, b));
            continue;
        }
        let cut = if max_len <= GRADE * dl.min(dr) {
            a + max_len
        } else if dl <= dr {
            a + GRADE * dl
        } else {
            b - GRADE * dr
        };
        if !(cut > a && cut < b) {
            done.push((a, b));
            continue;
        }
        stack.push((a, cut));
        stack.push((cut, b));
    }
    done.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    done
}

struct RegionCtx<'a> {
    u: &'a Local,
    v: &'a Local,
    k: f64,
    gamma: f64,
    out: &'a mut [Complex64],
    transpose: bool,
    inner_n: usize,
    inner: &'static FilonGauss,
    gauss_inner: bool,
    outer_n: usize,
}

impl<'a> RegionCtx<'a> {
    fn new(u: &'a Local, v: &'a Local, k: f64, gamma: f64, out: &'a mut [Complex64], transpose: bool) -> Self {
        let deg = u.degree + v.degree;
        let gauss_inner = gamma == 0.0;
        let inner_n = if gauss_inner { deg / 2 + 1 } else { deg + 1 };
        RegionCtx {
            u,
            v,
            k,
            gamma,
            out,
            transpose,
            inner_n,
            inner: filon_gauss_cached(inner_n),
            gauss_inner,
            outer_n: OUTER_BASE + deg / 2,
        }
    }

    /// Adds `sum_j w_j P_qu(u^_j) P_qv(v^_j)` over the inner nodes at `r`, where the
    /// inner weights are `coef_whole * whole_j` (anchored at the midpoint) or
    /// `coef_hi * plus_j + coef_lo * minus_j` (anchored at the limits).
    fn r_node(&mut self, r: f64, lo: f64, hi: f64, coefs: Coefs) {
        let w = hi - lo;
        if !(w > 0.0) {
            return;
        }
        let n = self.inner_n;
        let half = 0.5 * w;
        let c = 0.5 * (lo + hi);
        let mut wt = [ZERO; 64];
        match coefs {
            Coefs::Whole(cw) => {
                if self.gauss_inner {
                    let g = gauss_legendre_cached(n);
                    for j in 0..n {
                        wt[j] = cw * (half * g.weights[j]);
                    }
                } else {
                    self.inner.weights_into(self.gamma * half, &mut wt[..n]);
                    let f = cw * half;
                    for x in wt[..n].iter_mut() {
                        *x *= f;
                    }
                }
            }
            Coefs::Split(chi, clo) => {
                let mut p = [ZERO; 64];
                let mut m = [ZERO; 64];
                self.inner.split_weights_into(self.gamma * half, &mut p[..n], &mut m[..n]);
                let (fh, fl) = (chi * half, clo * half);
                for j in 0..n {
                    wt[j] = fh * p[j] + fl * m[j];
                }
            }
        }
        let nodes: &[f64] = if self.gauss_inner { &gauss_legendre_cached(n).nodes } else { &self.inner.nodes };
        let du = self.u.degree + 1;
        let dv = self.v.degree + 1;
        let mut pu = [0.0; 64];
        let mut pv = [0.0; 64];
        for j in 0..n {
            let vj = c + half * nodes[j];
            legendre_all((vj + r - self.u.mid) / self.u.half, &mut pu[..du]);
            legendre_all((vj - self.v.mid) / self.v.half, &mut pv[..dv]);
            let wj = wt[j];
            for qu in 0..du {
                let t = wj * pu[qu];
                if self.transpose {
                    for qv in 0..dv {
                        self.out[qv * du + qu] += t * pv[qv];
                    }
                } else {
                    let row = &mut self.out[qu * dv..(qu + 1) * dv];
                    for qv in 0..dv {
                        row[qv] += t * pv[qv];
                    }
                }
            }
        }
    }

    /// Full outer integrand factor `e^{i alpha_u r} e^{i gamma c(r)}` for the unsplit form.
    fn whole_phase(&self, r: f64, lo: f64, hi: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.u.phase * r + self.gamma * 0.5 * (lo + hi))
    }

    fn log_piece(&mut self, piece: &OuterPiece) {
        let rb = piece.rb;
        let k = self.k;
        let g = gauss_legendre_cached(LOG_POINTS);
        let lg = gauss_log_cached(LOG_POINTS);
        let ln_rb = rb.ln();
        let c_reg = Complex64::new(-(0.5 * k).ln() / (2.0 * PI), 0.25);
        for i in 0..LOG_POINTS {
            let r = 0.5 * rb * (g.nodes[i] + 1.0);
            let (j0, y0r) = bessel_j0_y0_regular(k * r);
            // -(1/2pi) ln(rb) J0 + R(r), R = J0 (i/4 - ln(k/2)/(2pi)) - y0reg/4
            let kern = c_reg * j0 - 0.25 * y0r - ln_rb / (2.0 * PI) * j0;
            let wgt = kern * (0.5 * rb * g.weights[i]);
            let (lo, hi) = (piece.lo.at(r), piece.hi.at(r));
            let cw = wgt * self.whole_phase(r, lo, hi);
            self.r_node(r, lo, hi, Coefs::Whole(cw));
        }
        for i in 0..LOG_POINTS {
            let r = rb * lg.nodes[i];
            let j0 = bessel_j0_y0_regular(k * r).0;
            let wgt = Complex64::new(rb * lg.weights[i] * j0 / (2.0 * PI), 0.0);
            let (lo, hi) = (piece.lo.at(r), piece.hi.at(r));
            let cw = wgt * self.whole_phase(r, lo, hi);
            self.r_node(r, lo, hi, Coefs::Whole(cw));
        }
    }

    fn filon_piece(&mut self, piece: &OuterPiece) {
        let n = self.outer_n;
        let rule = filon_gauss_cached(n);
        let half = 0.5 * (piece.rb - piece.ra);
        let mid = 0.5 * (piece.ra + piece.rb);
        let base = self.k + self.u.phase;
        let outer = |rate: f64, w: &mut [Complex64]| {
            rule.weights_into(rate * half, w);
            let f = Complex64::from_polar(half, rate * mid);
            for x in w.iter_mut() {
                *x *= f;
            }
        };
        let mut wa = [ZERO; 64];
        let mut wb = [ZERO; 64];
        let gamma = self.gamma;
        match piece.mode {
            Mode::Split => {
                outer(base + gamma * piece.hi.c1, &mut wa[..n]);
                outer(base + gamma * piece.lo.c1, &mut wb[..n]);
                let ph = Complex64::from_polar(1.0, gamma * piece.hi.c0);
                let pl = Complex64::from_polar(1.0, gamma * piece.lo.c0);
                for i in 0..n {
                    let r = mid + half * rule.nodes[i];
                    let h = hankel1_0_scaled(self.k * r) * QUARTER_I;
                    let coefs = Coefs::Split(wa[i] * h * ph, wb[i] * h * pl);
                    self.r_node(r, piece.lo.at(r), piece.hi.at(r), coefs);
                }
            }
            _ => {
                let c1 = 0.5 * (piece.lo.c1 + piece.hi.c1);
                let c0 = 0.5 * (piece.lo.c0 + piece.hi.c0);
                outer(base + gamma * c1, &mut wa[..n]);
                let pc = Complex64::from_polar(1.0, gamma * c0);
                for i in 0..n {
                    let r = mid + half * rule.nodes[i];
                    let h = hankel1_0_scaled(self.k * r) * QUARTER_I;
                    self.r_node(r, piece.lo.at(r), piece.hi.at(r), Coefs::Whole(wa[i] * h * pc));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Coefs {
    Whole(Complex64),
    Split(Complex64, Complex64),
}
