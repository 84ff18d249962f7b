//! Piecewise-constant Galerkin discretization of `S_k phi = u^i` on uniform
//! meshes, solving for the full jump `phi` without any asymptotic ansatz.

use crate::assembly::pair::Piece;
use crate::assembly::{assemble_pairings, plane_wave_pairings, Block};
use crate::error::{HnaError, Result};
use crate::geometry::{IncidentWave, Screen};
use crate::linalg::{lu_solve, relative_residual};
use crate::postprocess::{far_field_of, FarFieldSamples, LineDensity};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest number of unknowns accepted.
pub const MAX_UNKNOWNS: usize = 20_000;
const MIN_PER_WAVELENGTH: usize = 5;

/// Uniform subdivision of every segment into elements of width at most `lambda / n_pw`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardSpace {
    pub screen: Screen,
    pub k: f64,
    pub n_pw: usize,
    /// `(segment, a, b)` for each element, in order.
    pub elements: Vec<(usize, f64, f64)>,
}

/// Elements on a segment of length `len`: `ceil(len k n_pw / (2 pi))`, at least two.
/// Counts within rounding of an integer are not bumped up.
pub fn elements_per_segment(len: f64, k: f64, n_pw: usize) -> usize {
    let x = len * k * n_pw as f64 / (2.0 * PI);
    ((x * (1.0 - 1e-12)).ceil() as usize).max(2)
}

impl StandardSpace {
    pub fn new(screen: &Screen, k: f64, n_pw: usize) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(HnaError::Parameter(format!("wavenumber must be positive, got {k}")));
        }
        if n_pw < MIN_PER_WAVELENGTH {
            return Err(HnaError::Parameter(format!(
                "need at least {MIN_PER_WAVELENGTH} elements per wavelength, got {n_pw}"
            )));
        }
        let counts: Vec<usize> = screen.segments().map(|(a, b)| elements_per_segment(b - a, k, n_pw)).collect();
        let total: usize = counts.iter().sum();
        if total > MAX_UNKNOWNS {
            return Err(HnaError::TooLarge(total, MAX_UNKNOWNS));
        }
        let mut elements = Vec::with_capacity(total);
        for (j, ((a, b), m)) in screen.segments().zip(counts).enumerate() {
            let h = (b - a) / m as f64;
            for i in 0..m {
                let lo = a + i as f64 * h;
                let hi = if i + 1 == m { b } else { a + (i + 1) as f64 * h };
                elements.push((j, lo, hi));
            }
        }
        Ok(StandardSpace {
            screen: screen.clone(),
            k,
            n_pw,
            elements,
        })
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Indicator functions as degree-0 blocks.
    pub fn blocks(&self) -> Vec<Block> {
        self.elements
            .iter()
            .enumerate()
            .map(|(i, &(_, a, b))| Block {
                piece: Piece {
                    anchor: a,
                    lo: 0.0,
                    hi: b - a,
                    degree: 0,
                    phase: 0.0,
                },
                first: i,
                scale: vec![1.0],
            })
            .collect()
    }
}

/// Piecewise-constant approximation of the jump `[du/dn]`.
#[derive(Debug, Clone)]
pub struct StandardSolution {
    pub space: StandardSpace,
    pub wave: IncidentWave,
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
}

impl StandardSolution {
    pub fn line_density(&self) -> LineDensity {
        LineDensity::from_blocks(self.wave.k, &self.space.blocks(), &self.coeffs, Complex64::new(1.0, 0.0))
    }

    /// Value of the jump at `s`.
    pub fn evaluate(&self, s: f64) -> Complex64 {
        self.line_density().evaluate(s)
    }

    pub fn far_field(&self, angles: &[f64]) -> Result<FarFieldSamples> {
        far_field_of(&self.line_density(), self.wave.d, angles)
    }
}

/// Assembles and solves `<S_k phi, v> = <u^i, v>` over indicator functions.
pub fn solve_standard(screen: &Screen, wave: &IncidentWave, n_pw: usize) -> Result<StandardSolution> {
    let space = StandardSpace::new(screen, wave.k, n_pw)?;
    let blocks = space.blocks();
    let a = assemble_pairings(&blocks, &blocks, wave.k)?;
    let b = plane_wave_pairings(&blocks, wave.k * wave.d[0]);
    let coeffs = lu_solve(&a, &b)?;
    let residual = relative_residual(&a, &coeffs, &b)?;
    Ok(StandardSolution {
        space,
        wave: *wave,
        coeffs,
        residual,
    })
}
