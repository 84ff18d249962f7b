//! Collinear screens on the line `x2 = 0` and incident plane waves.
//!
//! Segments are indexed from zero: segment `j` is the open interval
//! `(s_{2j}, s_{2j+1})` of the breakpoint list.

use crate::error::{HnaError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Union of disjoint open collinear intervals, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Screen {
    breakpoints: Vec<f64>,
}

impl Screen {
    /// Validates the breakpoints: even count, first equal to zero, strictly increasing.
    pub fn new(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints.len() % 2 != 0 {
            return Err(HnaError::Geometry(format!(
                "expected an even number (at least 2) of breakpoints, got {}",
                breakpoints.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(HnaError::Geometry("breakpoints must be finite".into()));
        }
        if breakpoints[0] != 0.0 {
            return Err(HnaError::Geometry(format!("first breakpoint must be 0, got {}", breakpoints[0])));
        }
        if let Some(i) = (1..breakpoints.len()).find(|&i| breakpoints[i] <= breakpoints[i - 1]) {
            return Err(HnaError::Geometry(format!(
                "breakpoints must increase strictly: s[{}] = {} is not above s[{}] = {}",
                i,
                breakpoints[i],
                i - 1,
                breakpoints[i - 1]
            )));
        }
        Ok(Screen { breakpoints })
    }

    /// Five segments of total length `9 pi` inside `[0, 10 pi]`, the standard benchmark configuration.
    pub fn benchmark() -> Self {
        let b = [0.0, 2.0, 2.1, 2.5, 2.8, 3.5, 4.0, 6.0, 6.1, 10.0];
        Screen::new(b.iter().map(|x| x * PI).collect()).expect("valid benchmark screen")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn num_segments(&self) -> usize {
        self.breakpoints.len() / 2
    }

    /// Endpoints of segment `j`.
    pub fn segment(&self, j: usize) -> (f64, f64) {
        (self.breakpoints[2 * j], self.breakpoints[2 * j + 1])
    }

    pub fn segment_length(&self, j: usize) -> f64 {
        let (a, b) = self.segment(j);
        b - a
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Diameter of the screen, the last breakpoint.
    pub fn diameter(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// Smallest distance between consecutive breakpoints.
    pub fn min_spacing(&self) -> f64 {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn total_length(&self) -> f64 {
        self.segments().map(|(a, b)| b - a).sum()
    }

    /// Segment containing `s` in its interior.
    pub fn segment_of(&self, s: f64) -> Option<usize> {
        self.segments().position(|(a, b)| a < s && s < b)
    }

    /// True if `(x1, 0)` belongs to the closure of the screen.
    pub fn contains_closed(&self, x1: f64) -> bool {
        self.segments().any(|(a, b)| a <= x1 && x1 <= b)
    }
}

/// Plane wave `e^{i k x . d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub k: f64,
    pub d: [f64; 2],
}

impl IncidentWave {
    /// Directions within `1e-14` of unit length are kept as given, others are normalized.
    pub fn new(k: f64, d: [f64; 2]) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(HnaError::Parameter(format!("wavenumber must be positive and finite, got {k}")));
        }
        let norm = d[0].hypot(d[1]);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(HnaError::Parameter("direction must be a nonzero finite vector".into()));
        }
        let d = if (norm - 1.0).abs() <= 1e-14 { d } else { [d[0] / norm, d[1] / norm] };
        Ok(IncidentWave { k, d })
    }

    /// Mirror direction `(d1, -d2)`.
    pub fn reflected_direction(&self) -> [f64; 2] {
        [self.d[0], -self.d[1]]
    }

    pub fn field(&self, x: [f64; 2]) -> Complex64 {
        Complex64::from_polar(1.0, self.k * (x[0] * self.d[0] + x[1] * self.d[1]))
    }

    /// Plane wave travelling in the reflected direction.
    pub fn reflected_field(&self, x: [f64; 2]) -> Complex64 {
        let d = self.reflected_direction();
        Complex64::from_polar(1.0, self.k * (x[0] * d[0] + x[1] * d[1]))
    }

    pub fn is_grazing(&self) -> bool {
        self.d[1] == 0.0
    }
}

/// Number of wavelengths spanned by the segments, `sum L_j k / (2 pi)`.
pub fn wavelengths_on_screen(screen: &Screen, wave: &IncidentWave) -> f64 {
    screen.total_length() * wave.k / (2.0 * PI)
}

/// Logs a warning when the shortest gap or segment is under one unit of `1/k`.
pub fn check_resolution(screen: &Screen, wave: &IncidentWave) {
    if wave.k * screen.min_spacing() < 1.0 {
        log::warn!(
            "k * l_min = {:.3e} is below 1; frequency-explicit bounds may not apply",
            wave.k * screen.min_spacing()
        );
    }
}
