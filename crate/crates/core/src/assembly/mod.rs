//! Galerkin matrix and right-hand side for the single-layer equation in
//! the hybrid space.
//!
//! Entries are `A[m][l] = <S_k chi_l, chi_m>` with the pairing conjugated
//! in its second argument, and `b[m] = (1/k) <f - S_k Psi, chi_m>` where
//! `Psi` enters as one degree-0 oscillatory piece per segment.

pub mod oracle;
pub mod pair;

use crate::error::{HnaError, Result};
use crate::geometry::{IncidentWave, Screen};
use crate::hna_space::HnaSpace;
use crate::linalg::DenseComplexMatrix;
use crate::specfun::hankel1_0;
use num_complex::Complex64;
use pair::{pair_block, Piece};
use rayon::prelude::*;
use std::io::{Read, Write};

pub use oracle::single_layer_apply;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAGIC: &[u8; 4] = b"HNAS";
const DUMP_VERSION: u32 = 1;

/// `Phi_k(r) = (i/4) H0(kr)`.
pub fn kernel(k: f64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(HnaError::Domain(format!("kernel distance must be positive, got {r}")));
    }
    Ok(hankel1_0(k * r)? * Complex64::new(0.0, 0.25))
}

/// `Psi(s) = 2 i k d2 e^{i k d1 s}`, twice the normal derivative of the incident wave.
pub fn go_density(wave: &IncidentWave, s: f64) -> Complex64 {
    crate::hna_space::go_density(wave, s)
}

/// Trace of the incident wave on the screen, `e^{i k d1 s}`.
pub fn dirichlet_data(wave: &IncidentWave, s: f64) -> Complex64 {
    Complex64::from_polar(1.0, wave.k * wave.d[0] * s)
}

/// A set of consecutive basis functions `scale[q] P_q e^{i phase s}` on one piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub piece: Piece,
    pub first: usize,
    pub scale: Vec<f64>,
}

impl Block {
    pub fn size(&self) -> usize {
        self.piece.degree + 1
    }

    /// Same functions complex conjugated (as used on the test side of the pairing).
    pub fn conjugate(&self) -> Block {
        let mut b = self.clone();
        b.piece.phase = -b.piece.phase;
        b
    }
}

/// Basis of the hybrid space grouped by element, with `L2`-normalized Legendre factors.
pub fn hna_blocks(space: &HnaSpace) -> Vec<Block> {
    space
        .elements
        .iter()
        .map(|e| {
            let len = e.len();
            Block {
                piece: Piece {
                    anchor: e.anchor,
                    lo: e.lo,
                    hi: e.hi,
                    degree: e.degree,
                    phase: e.rho() * space.k,
                },
                first: e.first_basis,
                scale: (0..=e.degree).map(|q| ((2 * q + 1) as f64 / len).sqrt()).collect(),
            }
        })
        .collect()
}

/// The term `Psi` as one block per segment, with amplitude `2 i k d2` left out.
pub fn go_blocks(screen: &Screen, wave: &IncidentWave) -> Vec<Block> {
    screen
        .segments()
        .enumerate()
        .map(|(j, (a, b))| Block {
            piece: Piece {
                anchor: a,
                lo: 0.0,
                hi: b - a,
                degree: 0,
                phase: wave.k * wave.d[0],
            },
            first: j,
            scale: vec![1.0],
        })
        .collect()
}

/// Block matrix `M[m][l] = <S_k u_l, v_m>` for trial functions `u` and test functions `v`.
pub fn assemble_pairings(test: &[Block], trial: &[Block], k: f64) -> Result<DenseComplexMatrix> {
    pairings_with(test, trial, k, |t, l, k| {
        let mut out = vec![ZERO; (t.degree + 1) * (l.degree + 1)];
        pair_block(t, l, k, &mut out);
        Ok(out)
    })
}

/// As [`assemble_pairings`] with every block computed by brute-force quadrature.
pub fn oracle_pairings(test: &[Block], trial: &[Block], k: f64) -> Result<DenseComplexMatrix> {
    pairings_with(test, trial, k, oracle::oracle_pair_block)
}

fn pairings_with<F>(test: &[Block], trial: &[Block], k: f64, f: F) -> Result<DenseComplexMatrix>
where
    F: Fn(&Piece, &Piece, f64) -> Result<Vec<Complex64>> + Sync,
{
    let rows = test.iter().map(|b| b.first + b.size()).max().unwrap_or(0);
    let cols = trial.iter().map(|b| b.first + b.size()).max().unwrap_or(0);
    let strips: Vec<Vec<Complex64>> = test
        .par_iter()
        .map(|tb| {
            let tp = Piece {
                phase: -tb.piece.phase,
                ..tb.piece
            };
            let nt = tb.size();
            let mut strip = vec![ZERO; nt * cols];
            for lb in trial {
                let nl = lb.size();
                let raw = f(&tp, &lb.piece, k).map_err(|e| HnaError::Assembly {
                    row: tb.first,
                    col: lb.first,
                    source: Box::new(e),
                })?;
                for q in 0..nt {
                    for r in 0..nl {
                        strip[q * cols + lb.first + r] = raw[q * nl + r] * (tb.scale[q] * lb.scale[r]);
                    }
                }
            }
            Ok(strip)
        })
        .collect::<Result<_>>()?;
    let mut m = DenseComplexMatrix::zeros(rows, cols);
    for (tb, strip) in test.iter().zip(strips) {
        let start = tb.first * cols;
        m.data_mut()[start..start + strip.len()].copy_from_slice(&strip);
    }
    Ok(m)
}

/// `<e^{i kappa s}, v_m>` for every test function, in closed form.
pub fn plane_wave_pairings(test: &[Block], kappa: f64) -> Vec<Complex64> {
    let n = test.iter().map(|b| b.first + b.size()).max().unwrap_or(0);
    let mut out = vec![ZERO; n];
    let mut moments = [ZERO; 64];
    for b in test {
        let p = &b.piece;
        let rate = kappa - p.phase;
        let half = 0.5 * (p.hi - p.lo);
        let mid = 0.5 * (p.lo + p.hi);
        crate::quadrature::fill_moments(rate * half, &mut moments[..b.size()]);
        let f = Complex64::from_polar(half, rate * p.anchor) * Complex64::from_polar(1.0, rate * mid);
        for q in 0..b.size() {
            out[b.first + q] = f * moments[q] * b.scale[q];
        }
    }
    out
}

/// Right-hand side `(1/k) <f - S_k Psi, v_m>`.
fn rhs_with(test: &[Block], screen: &Screen, wave: &IncidentWave, psi: &DenseComplexMatrix) -> Vec<Complex64> {
    let k = wave.k;
    let f = plane_wave_pairings(test, k * wave.d[0]);
    let amp = Complex64::new(0.0, 2.0 * k * wave.d[1]);
    (0..f.len())
        .map(|m| {
            let s: Complex64 = (0..screen.num_segments()).map(|j| psi.get(m, j)).sum();
            (f[m] - amp * s) / k
        })
        .collect()
}

/// Assembled linear system with its configuration.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub matrix: DenseComplexMatrix,
    pub rhs: Vec<Complex64>,
    pub k: f64,
    pub d: [f64; 2],
    pub space_id: String,
}

impl GalerkinSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

fn space_id(space: &HnaSpace) -> String {
    format!(
        "hna k={} p={} sigma={} alpha={} N={}",
        space.k,
        space.params.p,
        space.params.sigma,
        space.params.alpha,
        space.dim()
    )
}

fn check_wave(space: &HnaSpace, wave: &IncidentWave) -> Result<()> {
    if space.k != wave.k {
        return Err(HnaError::Mismatch(format!(
            "space built for k = {} but wave has k = {}",
            space.k, wave.k
        )));
    }
    Ok(())
}

/// Galerkin matrix alone, which does not depend on the incident direction.
pub fn assemble_matrix(space: &HnaSpace) -> Result<DenseComplexMatrix> {
    let blocks = hna_blocks(space);
    assemble_pairings(&blocks, &blocks, space.k)
}

/// Right-hand side alone.
pub fn assemble_rhs(space: &HnaSpace, wave: &IncidentWave) -> Result<Vec<Complex64>> {
    check_wave(space, wave)?;
    let blocks = hna_blocks(space);
    let psi = assemble_pairings(&blocks, &go_blocks(&space.screen, wave), wave.k)?;
    Ok(rhs_with(&blocks, &space.screen, wave, &psi))
}

pub fn assemble(space: &HnaSpace, wave: &IncidentWave) -> Result<GalerkinSystem> {
    check_wave(space, wave)?;
    let matrix = assemble_matrix(space)?;
    let rhs = assemble_rhs(space, wave)?;
    Ok(GalerkinSystem {
        matrix,
        rhs,
        k: wave.k,
        d: wave.d,
        space_id: space_id(space),
    })
}

/// Same system with every entry from brute-force quadrature.
pub fn oracle_assemble(space: &HnaSpace, wave: &IncidentWave) -> Result<GalerkinSystem> {
    check_wave(space, wave)?;
    let blocks = hna_blocks(space);
    let matrix = oracle_pairings(&blocks, &blocks, space.k)?;
    let psi = oracle_pairings(&blocks, &go_blocks(&space.screen, wave), wave.k)?;
    let rhs = rhs_with(&blocks, &space.screen, wave, &psi);
    Ok(GalerkinSystem {
        matrix,
        rhs,
        k: wave.k,
        d: wave.d,
        space_id: format!("{} (oracle)", space_id(space)),
    })
}

/// `C[m][l] = <S_k chi_l, chi_m>` with `chi_m` from `test` and `chi_l` from `trial`.
pub fn assemble_cross(test: &HnaSpace, trial: &HnaSpace) -> Result<DenseComplexMatrix> {
    if test.k != trial.k || test.screen != trial.screen {
        return Err(HnaError::Mismatch("cross pairings need the same screen and wavenumber".into()));
    }
    assemble_pairings(&hna_blocks(test), &hna_blocks(trial), test.k)
}

/// Writes `A` and `b` as little-endian complex doubles after a 16-byte header.
pub fn write_system<W: Write>(system: &GalerkinSystem, mut w: W) -> Result<()> {
    let n = system.dim();
    if system.matrix.rows() != n || system.matrix.cols() != n {
        return Err(HnaError::Dimension {
            expected: n,
            got: system.matrix.rows(),
        });
    }
    let mut buf = Vec::with_capacity(16 + 16 * n * (n + 1));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for z in system.matrix.data().iter().chain(&system.rhs) {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads back the output of [`write_system`] as `(A, b)`.
pub fn read_system<R: Read>(mut r: R) -> Result<(DenseComplexMatrix, Vec<Complex64>)> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(HnaError::Format("bad magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    if word(4) != DUMP_VERSION {
        return Err(HnaError::Format(format!("unsupported version {}", word(4))));
    }
    let n = word(8) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 16 * n * (n + 1) {
        return Err(HnaError::Format(format!(
            "expected {} payload bytes, found {}",
            16 * n * (n + 1),
            body.len()
        )));
    }
    let vals: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let rhs = vals[n * n..].to_vec();
    let a = DenseComplexMatrix::from_row_major(n, n, vals[..n * n].to_vec())?;
    Ok((a, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hna_space::{build_space, SpaceParams};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn strip_space(len: f64, k: f64, p: usize) -> HnaSpace {
        build_space(&Screen::new(vec![0.0, len]).unwrap(), k, SpaceParams::new(p)).unwrap()
    }

    #[test]
    fn kernel_values() {
        let expected = Complex64::new(-0.022_064_241_053_919_24, 0.191_299_421_639_491_64);
        assert!(close(kernel(1.0, 1.0).unwrap(), expected, 1e-14));
        assert!(close(kernel(2.0, 0.5).unwrap(), expected, 1e-14));
        assert!(kernel(1.0, 0.0).is_err());
        assert!(kernel(1.0, -1.0).is_err());
    }

    #[test]
    fn incident_data() {
        let wave = IncidentWave::new(2.0, [0.6, -0.8]).unwrap();
        let s = 0.75;
        let phase = Complex64::from_polar(1.0, 2.0 * 0.6 * s);
        assert!(close(dirichlet_data(&wave, s), phase, 1e-15));
        assert!(close(go_density(&wave, s), Complex64::new(0.0, -3.2) * phase, 1e-15));
        let grazing = IncidentWave::new(2.0, [1.0, 0.0]).unwrap();
        assert_eq!(go_density(&grazing, s), ZERO);
    }

    #[test]
    fn single_layer_of_constant() {
        let strip = Screen::new(vec![0.0, 1.0]).unwrap();
        let v = single_layer_apply(&strip, |_| Complex64::new(1.0, 0.0), 0.5, 1.0).unwrap();
        let expected = Complex64::new(0.280_897_727_957_320_14, 0.244_840_253_323_022_53);
        assert!(close(v, expected, 1e-11), "{v}");
        let v = single_layer_apply(&strip, |t| Complex64::from_polar(1.0, t), 0.2, 1.0).unwrap();
        let expected = Complex64::new(0.120_508_098_756_107_82, 0.278_126_284_716_821_67);
        assert!(close(v, expected, 1e-11), "{v}");
        assert!(single_layer_apply(&strip, |_| ZERO, 0.5, 0.0).is_err());
    }

    #[test]
    fn fast_assembly_matches_brute_force() {
        let space = strip_space(2.0 * PI, 5.0, 0);
        assert_eq!(space.dim(), 4);
        let wave = IncidentWave::new(5.0, [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap();
        let fast = assemble(&space, &wave).unwrap();
        let slow = oracle_assemble(&space, &wave).unwrap();
        assert!(rel_diff(fast.matrix.data(), slow.matrix.data()) < 1e-12);
        assert!(rel_diff(&fast.rhs, &slow.rhs) < 1e-12);
    }

    #[test]
    fn grazing_rhs_is_plane_wave_projection() {
        let space = strip_space(2.0 * PI, 5.0, 2);
        let wave = IncidentWave::new(5.0, [1.0, 0.0]).unwrap();
        let b = assemble_rhs(&space, &wave).unwrap();
        let f = plane_wave_pairings(&hna_blocks(&space), 5.0);
        for (x, y) in b.iter().zip(&f) {
            assert!(close(*x, y / 5.0, 1e-15));
        }
        let other = IncidentWave::new(6.0, [1.0, 0.0]).unwrap();
        assert!(matches!(assemble_rhs(&space, &other), Err(HnaError::Mismatch(_))));
    }

    #[test]
    fn pairing_transpose_symmetry() {
        let space = strip_space(PI, 8.0, 2);
        let u = hna_blocks(&space);
        let wave = IncidentWave::new(8.0, [0.6, -0.8]).unwrap();
        let v = go_blocks(&space.screen, &wave);
        let a = assemble_pairings(&u, &v, 8.0).unwrap();
        let uc: Vec<Block> = u.iter().map(Block::conjugate).collect();
        let vc: Vec<Block> = v.iter().map(Block::conjugate).collect();
        let b = assemble_pairings(&vc, &uc, 8.0).unwrap();
        for m in 0..a.rows() {
            for l in 0..a.cols() {
                assert!(close(a.get(m, l), b.get(l, m), 1e-13));
            }
        }
    }

    #[test]
    fn scale_covariance() {
        let a = assemble_matrix(&strip_space(2.0 * PI, 4.0, 2)).unwrap();
        let b = assemble_matrix(&strip_space(PI, 8.0, 2)).unwrap();
        let half: Vec<Complex64> = a.data().iter().map(|z| z * 0.5).collect();
        assert!(rel_diff(b.data(), &half) < 1e-12);
    }

    #[test]
    fn galerkin_matrix_is_nondegenerate() {
        let space = strip_space(2.0 * PI, 5.0, 3);
        let a = assemble_matrix(&space).unwrap();
        let n = a.rows();
        for seed in 0..8 {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(((i * 7 + seed * 13) % 11) as f64 - 5.0, ((i * 3 + seed) % 5) as f64 - 2.0))
                .collect();
            let ax = a.matvec(&x).unwrap();
            let form: Complex64 = ax.iter().zip(&x).map(|(y, xi)| y * xi.conj()).sum();
            let norm2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            assert!(form.norm() > 1e-8 * norm2);
        }
        let sv = crate::linalg::singular_values(&a);
        assert!(sv.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn dump_round_trip() {
        let space = strip_space(2.0 * PI, 3.0, 1);
        let wave = IncidentWave::new(3.0, [0.6, -0.8]).unwrap();
        let system = assemble(&space, &wave).unwrap();
        let mut bytes = Vec::new();
        write_system(&system, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 16 * system.dim() * (system.dim() + 1));
        let (a, b) = read_system(bytes.as_slice()).unwrap();
        assert_eq!(a, system.matrix);
        assert_eq!(b, system.rhs);
        bytes[0] = b'X';
        assert!(matches!(read_system(bytes.as_slice()), Err(HnaError::Format(_))));
        assert!(read_system(&bytes[..10]).is_err());
    }
}
