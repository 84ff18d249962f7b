//! Boundary density, far field, domain and aperture fields, and
//! energy-norm errors from solved coefficients.

use crate::assembly::{assemble, assemble_cross, go_blocks, hna_blocks, Block, GalerkinSystem};
use crate::error::{HnaError, Result};
use crate::geometry::{IncidentWave, Screen};
use crate::hna_space::{go_density, HnaSpace};
use crate::linalg::{lu_solve, relative_residual, DenseComplexMatrix};
use crate::quadrature::{fill_moments, gauss_legendre_cached};
use crate::specfun::{hankel1_0, legendre_all};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const PANEL_POINTS: usize = 16;
/// Panels near the evaluation point are at most this multiple of their distance to it.
const NEAR_RATIO: f64 = 0.5;
/// Default number of far-field angles.
pub const DEFAULT_FARFIELD_SAMPLES: usize = 50_000;
/// Largest number of points sampled on a rectangle.
pub const RECTANGLE_CAP: usize = 89_600;

/// One group of terms `sum_q coeffs[q] scale[q] P_q e^{i phase s}` of a line density.
#[derive(Debug, Clone)]
pub struct DensityTerm {
    pub block: Block,
    pub coeffs: Vec<Complex64>,
}

/// Density on the screen as a sum of oscillatory Legendre pieces.
#[derive(Debug, Clone)]
pub struct LineDensity {
    pub k: f64,
    pub terms: Vec<DensityTerm>,
}

impl LineDensity {
    /// Density `sum_l c_l u_l` for basis blocks `blocks`, multiplied by `factor`.
    pub fn from_blocks(k: f64, blocks: &[Block], coeffs: &[Complex64], factor: Complex64) -> Self {
        let terms = blocks
            .iter()
            .map(|b| DensityTerm {
                block: b.clone(),
                coeffs: (0..b.size()).map(|q| coeffs[b.first + q] * factor).collect(),
            })
            .collect();
        LineDensity { k, terms }
    }

    pub fn extend(&mut self, other: LineDensity) {
        self.terms.extend(other.terms);
    }

    /// Value at `s`, counting each piece on its half-open interval `[a, b)`.
    pub fn evaluate(&self, s: f64) -> Complex64 {
        let mut acc = ZERO;
        let mut p = [0.0; 64];
        for t in &self.terms {
            let pc = &t.block.piece;
            let x = s - pc.anchor;
            if x < pc.lo || x >= pc.hi {
                continue;
            }
            let n = t.block.size();
            legendre_all((2.0 * x - pc.lo - pc.hi) / (pc.hi - pc.lo), &mut p[..n]);
            let e = Complex64::from_polar(1.0, pc.phase * s);
            for q in 0..n {
                acc += t.coeffs[q] * (t.block.scale[q] * p[q]) * e;
            }
        }
        acc
    }

    /// `-\int e^{-i k xhat1 s} phi(s) ds`, in closed form.
    pub fn far_field_at(&self, xhat1: f64) -> Complex64 {
        let mut acc = ZERO;
        let mut m = [ZERO; 64];
        for t in &self.terms {
            let pc = &t.block.piece;
            let rate = pc.phase - self.k * xhat1;
            let half = 0.5 * (pc.hi - pc.lo);
            let mid = 0.5 * (pc.lo + pc.hi);
            let n = t.block.size();
            fill_moments(rate * half, &mut m[..n]);
            let f = Complex64::from_polar(half, rate * pc.anchor) * Complex64::from_polar(1.0, rate * mid);
            let s: Complex64 = (0..n).map(|q| t.coeffs[q] * t.block.scale[q] * m[q]).sum();
            acc += f * s;
        }
        -acc
    }

    /// Single-layer potential `\int Phi_k(|x - (s, 0)|) phi(s) ds` at a point off the screen.
    pub fn potential(&self, x: [f64; 2]) -> Complex64 {
        let mut acc = ZERO;
        for t in &self.terms {
            acc += term_potential(t, self.k, x);
        }
        acc
    }
}

fn term_potential(t: &DensityTerm, k: f64, x: [f64; 2]) -> Complex64 {
    let pc = &t.block.piece;
    let rule = gauss_legendre_cached(PANEL_POINTS);
    let n = t.block.size();
    let max_len = PI / k;
    let mut acc = ZERO;
    let mut p = [0.0; 64];
    let mut stack = vec![(pc.lo, pc.hi)];
    let rel = x[0] - pc.anchor;
    while let Some((u, w)) = stack.pop() {
        let dx = if rel < u { u - rel } else if rel > w { rel - w } else { 0.0 };
        let dist = dx.hypot(x[1]);
        if w - u > max_len.min(NEAR_RATIO * dist.max(1e-300)) && w - u > 1e-15 * (pc.hi - pc.lo) {
            let m = 0.5 * (u + w);
            stack.push((u, m));
            stack.push((m, w));
            continue;
        }
        let (mid, half) = (0.5 * (u + w), 0.5 * (w - u));
        for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
            let s = mid + half * xi;
            let r = (rel - s).hypot(x[1]);
            let kern = hankel1_0(k * r).unwrap_or(ZERO) * Complex64::new(0.0, 0.25);
            legendre_all((2.0 * s - pc.lo - pc.hi) / (pc.hi - pc.lo), &mut p[..n]);
            let mut amp = ZERO;
            for q in 0..n {
                amp += t.coeffs[q] * (t.block.scale[q] * p[q]);
            }
            acc += kern * amp * Complex64::from_polar(half * wi, pc.phase * (pc.anchor + s));
        }
    }
    acc
}

/// Solved hybrid density `phi_N = sum v_l chi_l` with its space and wave.
#[derive(Debug, Clone)]
pub struct Density {
    pub space: HnaSpace,
    pub coeffs: Vec<Complex64>,
    pub wave: IncidentWave,
}

impl Density {
    pub fn new(space: HnaSpace, coeffs: Vec<Complex64>, wave: IncidentWave) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(HnaError::Dimension {
                expected: space.dim(),
                got: coeffs.len(),
            });
        }
        if space.k != wave.k {
            return Err(HnaError::Mismatch(format!("space k = {} but wave k = {}", space.k, wave.k)));
        }
        Ok(Density { space, coeffs, wave })
    }

    /// Diffracted part `phi_N`.
    pub fn evaluate(&self, s: f64) -> Result<Complex64> {
        self.space.evaluate(&self.coeffs, s)
    }

    /// Full jump `Psi + k phi_N`.
    pub fn jump(&self, s: f64) -> Result<Complex64> {
        Ok(go_density(&self.wave, s) + self.wave.k * self.evaluate(s)?)
    }

    /// `Psi + k phi_N` as a line density.
    pub fn line_density(&self) -> LineDensity {
        let k = self.wave.k;
        let mut d = LineDensity::from_blocks(k, &hna_blocks(&self.space), &self.coeffs, Complex64::new(k, 0.0));
        if self.wave.d[1] != 0.0 {
            let amp = vec![Complex64::new(0.0, 2.0 * k * self.wave.d[1]); self.space.screen.num_segments()];
            d.extend(LineDensity::from_blocks(k, &go_blocks(&self.space.screen, &self.wave), &amp, Complex64::new(1.0, 0.0)));
        }
        d
    }
}

/// Galerkin system, its solution and the relative residual of the solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub system: GalerkinSystem,
    pub density: Density,
    pub residual: f64,
}

/// Assembles and solves the Galerkin system for one space and wave.
pub fn solve(space: &HnaSpace, wave: &IncidentWave) -> Result<Solution> {
    let system = assemble(space, wave)?;
    solve_assembled(space, wave, system)
}

pub fn solve_assembled(space: &HnaSpace, wave: &IncidentWave, system: GalerkinSystem) -> Result<Solution> {
    let coeffs = lu_solve(&system.matrix, &system.rhs)?;
    let residual = relative_residual(&system.matrix, &coeffs, &system.rhs)?;
    let density = Density::new(space.clone(), coeffs, *wave)?;
    Ok(Solution {
        system,
        density,
        residual,
    })
}

/// Far-field pattern at the given angles.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldSamples {
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FarFieldSamples {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_i |F(t_i) - G(t_i)|`.
    pub fn sup_difference(&self, other: &FarFieldSamples) -> Result<f64> {
        if self.angles != other.angles {
            return Err(HnaError::Mismatch("far fields sampled at different angles".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// `M` evenly spaced angles `2 pi i / M`.
pub fn uniform_angles(m: usize) -> Vec<f64> {
    (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
}

/// Observation direction for angle `t`: `t = 0` points back towards the
/// source of the incident wave, angles increase anticlockwise.
pub fn observation_direction(d: [f64; 2], t: f64) -> [f64; 2] {
    let (s, c) = t.sin_cos();
    [-d[0] * c + d[1] * s, -d[0] * s - d[1] * c]
}

/// Angle whose direction is the mirror image of direction `t` in the screen line.
pub fn mirror_angle(d: [f64; 2], t: f64) -> f64 {
    let theta0 = (-d[1]).atan2(-d[0]);
    (-2.0 * theta0 - t).rem_euclid(2.0 * PI)
}

fn check_angles(angles: &[f64]) -> Result<()> {
    if angles.is_empty() {
        return Err(HnaError::Parameter("at least one far-field angle is required".into()));
    }
    if angles.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(HnaError::Parameter("far-field angles must increase strictly".into()));
    }
    Ok(())
}

/// Far field of a line density for incidence direction `d`.
pub fn far_field_of(density: &LineDensity, d: [f64; 2], angles: &[f64]) -> Result<FarFieldSamples> {
    check_angles(angles)?;
    let values = angles
        .par_iter()
        .map(|&t| density.far_field_at(observation_direction(d, t)[0]))
        .collect();
    Ok(FarFieldSamples {
        angles: angles.to_vec(),
        values,
    })
}

/// Far field `-\int e^{-ik xhat.y} (Psi + k phi_N) ds`.
pub fn far_field(density: &Density, angles: &[f64]) -> Result<FarFieldSamples> {
    far_field_of(&density.line_density(), density.wave.d, angles)
}

fn check_off_screen(screen: &Screen, x: [f64; 2]) -> Result<()> {
    if !x[0].is_finite() || !x[1].is_finite() {
        return Err(HnaError::Domain("evaluation point must be finite".into()));
    }
    if x[1].abs() <= 1e-12 * screen.diameter() && screen.contains_closed(x[0]) {
        return Err(HnaError::PointOnScreen(x[0], x[1]));
    }
    Ok(())
}

/// Total field `u_N = u^i - S_k (Psi + k phi_N)` at a point off the screen.
pub fn domain_field(density: &Density, x: [f64; 2]) -> Result<Complex64> {
    check_off_screen(&density.space.screen, x)?;
    Ok(density.wave.field(x) - density.line_density().potential(x))
}

/// Total field at many points, in parallel.
pub fn domain_field_many(density: &Density, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    let line = density.line_density();
    points
        .par_iter()
        .map(|&x| {
            check_off_screen(&density.space.screen, x)?;
            Ok(density.wave.field(x) - line.potential(x))
        })
        .collect()
}

/// Field of the complementary aperture problem: `u^i + u^r - S_k phi` above
/// the line and `S_k phi` below it.
pub fn aperture_field(density: &Density, x: [f64; 2]) -> Result<Complex64> {
    let wave = &density.wave;
    if !(wave.d[1] < 0.0) {
        return Err(HnaError::Parameter(format!(
            "aperture field needs incidence from above (d2 < 0), got d2 = {}",
            wave.d[1]
        )));
    }
    if x[1] == 0.0 {
        return Err(HnaError::PointOnScreen(x[0], x[1]));
    }
    check_off_screen(&density.space.screen, x)?;
    let sl = density.line_density().potential(x);
    Ok(aperture_from_potential(wave, x, sl))
}

fn aperture_from_potential(wave: &IncidentWave, x: [f64; 2], sl: Complex64) -> Complex64 {
    if x[1] > 0.0 {
        wave.field(x) + wave.reflected_field(x) - sl
    } else {
        sl
    }
}

/// Aperture field at many points.
pub fn aperture_field_many(density: &Density, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    if !(density.wave.d[1] < 0.0) {
        return Err(HnaError::Parameter("aperture field needs incidence from above (d2 < 0)".into()));
    }
    let line = density.line_density();
    points
        .par_iter()
        .map(|&x| {
            if x[1] == 0.0 {
                return Err(HnaError::PointOnScreen(x[0], x[1]));
            }
            check_off_screen(&density.space.screen, x)?;
            Ok(aperture_from_potential(&density.wave, x, line.potential(x)))
        })
        .collect()
}

/// Gram matrix of the single-layer pairing over two concatenated bases.
#[derive(Debug, Clone)]
pub struct CrossGram {
    pub matrix: DenseComplexMatrix,
    pub split: usize,
}

impl CrossGram {
    /// `[[A_aa, A_ab], [A_ba, A_bb]]` with `A_xy[m][l] = <S chi^y_l, chi^x_m>`.
    pub fn from_blocks(
        aa: &DenseComplexMatrix,
        ab: &DenseComplexMatrix,
        ba: &DenseComplexMatrix,
        bb: &DenseComplexMatrix,
    ) -> Result<Self> {
        let (na, nb) = (aa.rows(), bb.rows());
        let shapes = [(aa, na, na), (ab, na, nb), (ba, nb, na), (bb, nb, nb)];
        for (m, r, c) in shapes {
            if m.rows() != r || m.cols() != c {
                return Err(HnaError::Dimension {
                    expected: r * c,
                    got: m.rows() * m.cols(),
                });
            }
        }
        let n = na + nb;
        let matrix = DenseComplexMatrix::from_fn(n, n, |i, j| match (i < na, j < na) {
            (true, true) => aa.get(i, j),
            (true, false) => ab.get(i, j - na),
            (false, true) => ba.get(i - na, j),
            (false, false) => bb.get(i - na, j - na),
        });
        Ok(CrossGram { matrix, split: na })
    }

    /// Assembles all four blocks for spaces `a` and `b`.
    pub fn new(a: &HnaSpace, b: &HnaSpace) -> Result<Self> {
        let aa = crate::assembly::assemble_matrix(a)?;
        let bb = crate::assembly::assemble_matrix(b)?;
        Self::from_blocks(&aa, &assemble_cross(a, b)?, &assemble_cross(b, a)?, &bb)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// `sqrt|w^* G w|`.
pub fn energy_norm(gram: &CrossGram, w: &[Complex64]) -> Result<f64> {
    let gw = gram.matrix.matvec(w)?;
    let q: Complex64 = w.iter().zip(&gw).map(|(a, b)| a.conj() * b).sum();
    Ok(q.norm().sqrt())
}

/// Absolute and relative energy-norm distance from a reference density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub e: f64,
    pub r: f64,
}

/// `e = ||phi_ref - phi||` and `r = e / ||phi_ref||`, reusing the two Galerkin matrices.
pub fn error_report(reference: &Solution, approx: &Solution) -> Result<ErrorReport> {
    let (dr, da) = (&reference.density, &approx.density);
    if dr.wave != da.wave || dr.space.screen != da.space.screen {
        return Err(HnaError::Mismatch("error report needs the same screen and wave".into()));
    }
    let gram = CrossGram::from_blocks(
        &reference.system.matrix,
        &assemble_cross(&dr.space, &da.space)?,
        &assemble_cross(&da.space, &dr.space)?,
        &approx.system.matrix,
    )?;
    let mut w = dr.coeffs.clone();
    w.extend(da.coeffs.iter().map(|z| -z));
    let e = energy_norm(&gram, &w)?;
    let mut wr = dr.coeffs.clone();
    wr.extend(std::iter::repeat(ZERO).take(da.coeffs.len()));
    let norm = energy_norm(&gram, &wr)?;
    Ok(ErrorReport { e, r: e / norm })
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_max > x_min && y_max > y_min) {
            return Err(HnaError::Parameter("rectangle needs x_min < x_max and y_min < y_max".into()));
        }
        Ok(Rectangle { x_min, x_max, y_min, y_max })
    }

    /// Corners `(-pi, pi)`, `(11 pi, pi)`, `(11 pi, -pi)`, `(-pi, -pi)`.
    pub fn benchmark() -> Self {
        Rectangle {
            x_min: -PI,
            x_max: 11.0 * PI,
            y_min: -PI,
            y_max: PI,
        }
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.x_max - self.x_min) + (self.y_max - self.y_min))
    }

    /// Point at arclength `t`, starting at the top-left corner and running clockwise.
    pub fn point(&self, t: f64) -> [f64; 2] {
        let w = self.x_max - self.x_min;
        let h = self.y_max - self.y_min;
        let t = t.rem_euclid(self.perimeter());
        if t < w {
            [self.x_min + t, self.y_max]
        } else if t < w + h {
            [self.x_max, self.y_max - (t - w)]
        } else if t < 2.0 * w + h {
            [self.x_max - (t - w - h), self.y_min]
        } else {
            [self.x_min, self.y_min + (t - 2.0 * w - h)]
        }
    }

    /// `per_wavelength` samples per wavelength `2 pi / k`, at most `cap`, evenly spaced in arclength.
    pub fn samples(&self, k: f64, per_wavelength: f64, cap: usize) -> Vec<(f64, [f64; 2])> {
        let m = ((self.perimeter() * k * per_wavelength / (2.0 * PI)).ceil() as usize).clamp(1, cap.max(1));
        let step = self.perimeter() / m as f64;
        (0..m).map(|i| (i as f64 * step, self.point(i as f64 * step))).collect()
    }
}

/// `max |a_i - b_i|` and that maximum divided by `max |a_i|`.
pub fn max_errors(reference: &[Complex64], approx: &[Complex64]) -> (f64, f64) {
    let abs = reference.iter().zip(approx).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (abs, abs / scale)
}
