//! Oscillatory hp approximation space on a screen.
//!
//! Every segment carries two geometric meshes. The left mesh is graded
//! towards the left endpoint and its basis functions carry the factor
//! `e^{iks}`; the right mesh is graded towards the right endpoint with
//! `e^{-iks}`. On an element `(a, b)` of degree `d` the basis functions are
//! `sqrt((2q+1)/(b-a)) P_q(2(s-a)/(b-a) - 1) e^{rho i k s}` for `q = 0..=d`.

use crate::error::{HnaError, Result};
use crate::geometry::{IncidentWave, Screen};
use crate::specfun::legendre_all;
use num_complex::Complex64;

/// Breakpoints `x_0 = 0`, `x_i = sigma^{n-i} l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricMesh {
    pub l: f64,
    pub n: usize,
    pub sigma: f64,
    pub points: Vec<f64>,
}

pub fn geometric_mesh(l: f64, n: usize, sigma: f64) -> Result<GeometricMesh> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(HnaError::Parameter(format!("mesh length must be positive, got {l}")));
    }
    if n == 0 {
        return Err(HnaError::Parameter("a geometric mesh needs at least one layer".into()));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(HnaError::Parameter(format!("grading parameter must lie in (0, 1), got {sigma}")));
    }
    let mut points = Vec::with_capacity(n + 1);
    points.push(0.0);
    for i in 1..=n {
        points.push(sigma.powi((n - i) as i32) * l);
    }
    Ok(GeometricMesh { l, n, sigma, points })
}

/// Polynomial degrees on the elements of a geometric mesh, smallest at the singular end.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector {
    pub p: usize,
    pub alpha: f64,
    pub degrees: Vec<usize>,
}

pub fn degree_vector(p: usize, n: usize, alpha: f64) -> DegreeVector {
    let degrees = (1..=n)
        .map(|i| {
            if i == n {
                return p;
            }
            let drop = if alpha == 1.0 {
                (n + 1 - i) * p / n
            } else {
                (alpha * ((n + 1 - i) * p) as f64 / n as f64 + 1e-12).floor() as usize
            };
            p - drop.min(p)
        })
        .collect();
    DegreeVector { p, alpha, degrees }
}

/// Which end of its segment a mesh is graded towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign of the oscillatory factor `e^{rho i k s}`.
    pub fn rho(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }
}

/// Rule for the number of mesh layers as a function of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayersRule {
    /// `n = 2(p + 1)`
    TwicePPlusOne,
    Fixed(usize),
}

impl LayersRule {
    pub fn layers(self, p: usize) -> usize {
        match self {
            LayersRule::TwicePPlusOne => 2 * (p + 1),
            LayersRule::Fixed(n) => n,
        }
    }
}

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 30;

/// Discretisation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceParams {
    pub p: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub layers: LayersRule,
}

impl SpaceParams {
    pub fn new(p: usize) -> Self {
        SpaceParams {
            p,
            sigma: 0.15,
            alpha: 1.0,
            layers: LayersRule::TwicePPlusOne,
        }
    }
}

/// One mesh element. Its points are `anchor + t` for `t` in `[lo, hi]`,
/// where the anchor is the segment endpoint the mesh is graded towards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub segment: usize,
    pub side: Side,
    /// Position in the mesh, counted from the singular end.
    pub index: usize,
    pub anchor: f64,
    pub lo: f64,
    pub hi: f64,
    pub degree: usize,
    /// Index of the degree-0 basis function on this element.
    pub first_basis: usize,
}

impl Element {
    pub fn a(&self) -> f64 {
        self.anchor + self.lo
    }

    pub fn b(&self) -> f64 {
        self.anchor + self.hi
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn rho(&self) -> f64 {
        self.side.rho()
    }
}

/// A single basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFunction {
    pub segment: usize,
    pub side: Side,
    pub element: usize,
    pub a: f64,
    pub b: f64,
    pub degree: usize,
    pub rho: f64,
}

/// The enumerated basis, ordered by segment, then left mesh before right,
/// then element index, then degree.
#[derive(Debug, Clone)]
pub struct HnaSpace {
    pub screen: Screen,
    pub k: f64,
    pub params: SpaceParams,
    pub elements: Vec<Element>,
    pub basis: Vec<BasisFunction>,
}

pub fn build_space(screen: &Screen, k: f64, params: SpaceParams) -> Result<HnaSpace> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(HnaError::Parameter(format!("wavenumber must be positive and finite, got {k}")));
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(HnaError::Parameter(format!("alpha must lie in [0, 1], got {}", params.alpha)));
    }
    if params.p > MAX_DEGREE {
        return Err(HnaError::Parameter(format!("degree {} exceeds the supported maximum {MAX_DEGREE}", params.p)));
    }
    let n = params.layers.layers(params.p);
    if n < params.p {
        log::warn!("{} layers for degree {}: fewer layers than the polynomial degree", n, params.p);
    }
    let degrees = degree_vector(params.p, n, params.alpha);
    let mut elements = Vec::new();
    let mut basis = Vec::new();
    for (j, (s0, s1)) in screen.segments().enumerate() {
        let l = s1 - s0;
        let mesh = geometric_mesh(l, n, params.sigma)?;
        for side in [Side::Left, Side::Right] {
            for m in 0..n {
                let (anchor, lo, hi) = match side {
                    Side::Left => (s0, mesh.points[m], mesh.points[m + 1]),
                    Side::Right => (s1, -mesh.points[m + 1], -mesh.points[m]),
                };
                let degree = degrees.degrees[m];
                let el = Element {
                    segment: j,
                    side,
                    index: m,
                    anchor,
                    lo,
                    hi,
                    degree,
                    first_basis: basis.len(),
                };
                for _ in 0..=degree {
                    basis.push(BasisFunction {
                        segment: j,
                        side,
                        element: elements.len(),
                        a: el.a(),
                        b: el.b(),
                        degree: basis.len() - el.first_basis,
                        rho: side.rho(),
                    });
                }
                elements.push(el);
            }
        }
    }
    Ok(HnaSpace {
        screen: screen.clone(),
        k,
        params,
        elements,
        basis,
    })
}

/// Number of unknowns implied by the mesh and degree parameters.
pub fn dof_count(num_segments: usize, p: usize, n: usize, alpha: f64) -> usize {
    let per_mesh: usize = degree_vector(p, n, alpha).degrees.iter().map(|d| d + 1).sum();
    2 * num_segments * per_mesh
}

impl HnaSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Value of basis function `l` at the point `s`; zero outside its support.
    pub fn evaluate_basis(&self, l: usize, s: f64) -> Result<Complex64> {
        let bf = self.basis.get(l).ok_or(HnaError::IndexOutOfRange {
            index: l,
            len: self.dim(),
        })?;
        if !(bf.a < s && s < bf.b) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let h = bf.b - bf.a;
        let mut p = [0.0; 65];
        legendre_all(2.0 * (s - bf.a) / h - 1.0, &mut p[..=bf.degree]);
        let amp = ((2 * bf.degree + 1) as f64 / h).sqrt() * p[bf.degree];
        Ok(Complex64::from_polar(amp, bf.rho * self.k * s))
    }

    /// `phi_N(s) = sum_l v_l chi_l(s)` for a point in the interior of a segment.
    pub fn evaluate(&self, coeffs: &[Complex64], s: f64) -> Result<Complex64> {
        if coeffs.len() != self.dim() {
            return Err(HnaError::Dimension {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let j = self.screen.segment_of(s).ok_or(HnaError::PointInGap(s))?;
        let mut total = Complex64::new(0.0, 0.0);
        let mut p = [0.0; 65];
        for el in self.elements.iter().filter(|e| e.segment == j) {
            let (a, b) = (el.a(), el.b());
            // half-open so that interior mesh points are counted once per mesh
            let inside = match el.side {
                Side::Left => a < s && s <= b,
                Side::Right => a <= s && s < b,
            };
            if !inside {
                continue;
            }
            let h = b - a;
            legendre_all(2.0 * (s - a) / h - 1.0, &mut p[..=el.degree]);
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..=el.degree {
                acc += coeffs[el.first_basis + q] * (((2 * q + 1) as f64 / h).sqrt() * p[q]);
            }
            total += acc * Complex64::from_polar(1.0, el.rho() * self.k * s);
        }
        Ok(total)
    }
}

/// Returns `(phi_N(s), Psi(s) + k phi_N(s))`.
pub fn evaluate_density(space: &HnaSpace, coeffs: &[Complex64], s: f64, wave: &IncidentWave) -> Result<(Complex64, Complex64)> {
    if wave.k != space.k {
        return Err(HnaError::Mismatch(format!("space built for k = {}, wave has k = {}", space.k, wave.k)));
    }
    let phi = space.evaluate(coeffs, s)?;
    Ok((phi, go_density(wave, s) + phi * wave.k))
}

/// Geometrical-optics density `Psi(s) = 2 i k d2 e^{i k d1 s}`.
pub fn go_density(wave: &IncidentWave, s: f64) -> Complex64 {
    Complex64::new(0.0, 2.0 * wave.k * wave.d[1]) * Complex64::from_polar(1.0, wave.k * wave.d[0] * s)
}
