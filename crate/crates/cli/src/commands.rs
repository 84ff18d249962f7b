//! Subcommand implementations. Every command writes CSV files into the
//! output directory and returns the paths it wrote.

use crate::config::{FieldMode, RunConfig};
use crate::csv::{fmt_real, CsvWriter};
use hnabem::assembly::{assemble, oracle_assemble, write_system};
use hnabem::hna_space::{build_space, HnaSpace};
use hnabem::linalg::{condition_number, lu_solve, relative_residual};
use hnabem::postprocess::{
    aperture_field_many, domain_field_many, error_report, far_field, far_field_of, max_errors, mirror_angle,
    observation_direction, solve_assembled, uniform_angles, FarFieldSamples, Solution,
};
use hnabem::reference_bem::solve_standard;
use hnabem::{Complex64, HnaError};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(HnaError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl From<HnaError> for CliError {
    fn from(e: HnaError) -> Self {
        match e {
            HnaError::Io(io) => CliError::Io(io),
            e if e.is_numerical() => CliError::Numerical(e),
            e => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Options shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Write timing columns as zero so repeated runs give identical files.
    pub no_timings: bool,
    /// Also write the binary system dump for each solve.
    pub dump: bool,
}

impl RunOptions {
    fn seconds(&self, start: Instant) -> f64 {
        if self.no_timings {
            0.0
        } else {
            start.elapsed().as_secs_f64()
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

struct Run {
    solution: Solution,
    assembly_s: f64,
    solve_s: f64,
}

fn build(cfg: &RunConfig, k: f64, p: usize) -> CliResult<HnaSpace> {
    Ok(build_space(&cfg.screen()?, k, cfg.space_params(p))?)
}

fn run_one(cfg: &RunConfig, opts: &RunOptions, k: f64, p: usize) -> CliResult<Run> {
    let space = build(cfg, k, p)?;
    let wave = cfg.wave(k)?;
    log::info!("k = {k}, p = {p}: N = {}", space.dim());
    let t = Instant::now();
    let system = assemble(&space, &wave)?;
    let assembly_s = opts.seconds(t);
    let t = Instant::now();
    let solution = solve_assembled(&space, &wave, system)?;
    let solve_s = opts.seconds(t);
    log::info!(
        "k = {k}, p = {p}: assembly {assembly_s:.3} s, solve {solve_s:.3} s, residual {:.2e}",
        solution.residual
    );
    Ok(Run {
        solution,
        assembly_s,
        solve_s,
    })
}

fn k_label(k: f64) -> String {
    format!("{k}")
}

/// Assembles and solves every `(k, p)`; writes `solve.csv` and one coefficient file per run.
pub fn cmd_solve(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let mut written = Vec::new();
    let summary_path = opts.path("solve.csv");
    let mut summary = CsvWriter::create(&summary_path, &["k", "p", "N", "residual", "cond", "assembly_s", "solve_s"])?;
    for &k in &cfg.k {
        for p in cfg.degrees() {
            let run = run_one(cfg, opts, k, p)?;
            let sol = &run.solution;
            let cond = condition_number(&sol.system.matrix)?;
            log::info!("k = {k}, p = {p}: cond = {cond:.3e}");
            summary.row(&[
                fmt_real(k),
                p.to_string(),
                sol.system.dim().to_string(),
                fmt_real(sol.residual),
                fmt_real(cond),
                fmt_real(run.assembly_s),
                fmt_real(run.solve_s),
            ])?;
            let path = opts.path(&format!("coeffs_k{}_p{}.csv", k_label(k), p));
            let mut w = CsvWriter::create(&path, &["index", "segment", "side", "element", "degree", "re", "im"])?;
            for (i, (b, c)) in sol.density.space.basis.iter().zip(&sol.density.coeffs).enumerate() {
                w.row(&[
                    i.to_string(),
                    b.segment.to_string(),
                    format!("{:?}", b.side).to_lowercase(),
                    b.element.to_string(),
                    b.degree.to_string(),
                    fmt_real(c.re),
                    fmt_real(c.im),
                ])?;
            }
            w.finish()?;
            written.push(path);
            if opts.dump {
                let path = opts.path(&format!("system_k{}_p{}.bin", k_label(k), p));
                let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
                write_system(&sol.system, file)?;
                written.push(path);
            }
        }
    }
    summary.finish()?;
    written.insert(0, summary_path);
    Ok(written)
}

fn reference_degree(cfg: &RunConfig) -> CliResult<usize> {
    let degrees = cfg.degrees();
    let pmax = *degrees.last().unwrap();
    if pmax < 2 {
        return Err(CliError::Config(format!("[space] p: the largest degree must be at least 2, got {pmax}")));
    }
    Ok(pmax)
}

/// Energy-norm errors against the largest degree; writes `errors.csv`.
pub fn cmd_converge(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let pmax = reference_degree(cfg)?;
    let path = opts.path("errors.csv");
    let mut w = CsvWriter::create(&path, &["k", "p", "N", "e_p", "r_p", "cond", "assembly_s", "solve_s"])?;
    for &k in &cfg.k {
        let reference = run_one(cfg, opts, k, pmax)?;
        for p in cfg.degrees().into_iter().filter(|&p| p < pmax) {
            let run = run_one(cfg, opts, k, p)?;
            let report = error_report(&reference.solution, &run.solution)?;
            let cond = condition_number(&run.solution.system.matrix)?;
            log::info!("k = {k}, p = {p}: e_p = {:.3e}, r_p = {:.3e}", report.e, report.r);
            w.row(&[
                fmt_real(k),
                p.to_string(),
                run.solution.system.dim().to_string(),
                fmt_real(report.e),
                fmt_real(report.r),
                fmt_real(cond),
                fmt_real(run.assembly_s),
                fmt_real(run.solve_s),
            ])?;
        }
    }
    w.finish()?;
    Ok(vec![path])
}

/// Largest `|F(t) - F(t')|` over the samples, `t'` the mirror image of `t` in the screen line.
fn mirror_defect(ff: &FarFieldSamples, at: impl Fn(f64) -> Complex64, d: [f64; 2]) -> f64 {
    ff.angles
        .iter()
        .zip(&ff.values)
        .map(|(&t, v)| (v - at(mirror_angle(d, t))).norm())
        .fold(0.0, f64::max)
}

/// Far fields for every degree plus sup-norm errors; writes `farfield.csv` and `fferrors.csv`.
pub fn cmd_farfield(cfg: &RunConfig, opts: &RunOptions, with_standard: bool) -> CliResult<Vec<PathBuf>> {
    let pmax = reference_degree(cfg)?;
    let angles = uniform_angles(cfg.farfield_samples);
    let ff_path = opts.path("farfield.csv");
    let err_path = opts.path("fferrors.csv");
    let mut ff = CsvWriter::create(&ff_path, &["method", "k", "p", "t", "re_F", "im_F", "abs_F"])?;
    let mut errs = CsvWriter::create(
        &err_path,
        &["method", "k", "p", "N", "sup_error", "rel_sup_error", "ref_sup", "mirror_defect"],
    )?;
    let write_samples = |w: &mut CsvWriter, method: &str, k: f64, p: &str, s: &FarFieldSamples| -> CliResult<()> {
        for (t, v) in s.angles.iter().zip(&s.values) {
            w.row(&[method.into(), fmt_real(k), p.into(), fmt_real(*t), fmt_real(v.re), fmt_real(v.im), fmt_real(v.norm())])?;
        }
        Ok(())
    };
    for &k in &cfg.k {
        let d = cfg.d;
        let mut fields = Vec::new();
        for p in cfg.degrees() {
            let run = run_one(cfg, opts, k, p)?;
            let f = far_field(&run.solution.density, &angles)?;
            let line = run.solution.density.line_density();
            let defect = mirror_defect(&f, |t| line.far_field_at(observation_direction(d, t)[0]), d);
            fields.push((p, run.solution.system.dim(), f, defect));
        }
        let reference = &fields.last().unwrap().2;
        let ref_sup = reference.sup_norm();
        log::info!("k = {k}: ||F_{pmax}||_inf = {ref_sup:.4e}");
        for (p, n, f, defect) in &fields {
            write_samples(&mut ff, "hna", k, &p.to_string(), f)?;
            let err = f.sup_difference(reference)?;
            errs.row(&[
                "hna".into(),
                fmt_real(k),
                p.to_string(),
                n.to_string(),
                fmt_real(err),
                fmt_real(err / ref_sup),
                fmt_real(ref_sup),
                fmt_real(*defect),
            ])?;
        }
        if with_standard || cfg.oracle {
            let std = solve_standard(&cfg.screen()?, &cfg.wave(k)?, cfg.n_pw)?;
            let line = std.line_density();
            let f = far_field_of(&line, d, &angles)?;
            let defect = mirror_defect(&f, |t| line.far_field_at(observation_direction(d, t)[0]), d);
            write_samples(&mut ff, "standard", k, "", &f)?;
            let err = f.sup_difference(reference)?;
            log::info!("k = {k}: standard BEM (N = {}) vs p = {pmax}: {:.3e} relative", std.space.dim(), err / ref_sup);
            errs.row(&[
                "standard".into(),
                fmt_real(k),
                String::new(),
                std.space.dim().to_string(),
                fmt_real(err),
                fmt_real(err / ref_sup),
                fmt_real(ref_sup),
                fmt_real(defect),
            ])?;
        }
    }
    ff.finish()?;
    errs.finish()?;
    Ok(vec![ff_path, err_path])
}

/// Fields on the sampling rectangle; writes `domain.csv` and `domain_errors.csv`.
pub fn cmd_domain(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let pmax = reference_degree(cfg)?;
    let path = opts.path("domain.csv");
    let err_path = opts.path("domain_errors.csv");
    let mut w = CsvWriter::create(&path, &["mode", "k", "p", "t", "x1", "x2", "re_u", "im_u", "abs_u"])?;
    let mut errs = CsvWriter::create(&err_path, &["mode", "k", "p", "N", "max_abs_error", "rel_max_abs_error"])?;
    let mode = match cfg.mode {
        FieldMode::Screen => "screen",
        FieldMode::Aperture => "aperture",
    };
    for &k in &cfg.k {
        let samples = cfg.rectangle.samples(k, 10.0, hnabem::postprocess::RECTANGLE_CAP);
        let points: Vec<[f64; 2]> = samples.iter().map(|s| s.1).collect();
        log::info!("k = {k}: {} points on the rectangle", points.len());
        let mut values = Vec::new();
        for p in cfg.degrees() {
            let run = run_one(cfg, opts, k, p)?;
            let u = match cfg.mode {
                FieldMode::Screen => domain_field_many(&run.solution.density, &points)?,
                FieldMode::Aperture => aperture_field_many(&run.solution.density, &points)?,
            };
            values.push((p, run.solution.system.dim(), u));
        }
        let reference = values.last().unwrap().2.clone();
        for (p, n, u) in &values {
            for ((t, x), v) in samples.iter().zip(u) {
                w.row(&[
                    mode.into(),
                    fmt_real(k),
                    p.to_string(),
                    fmt_real(*t),
                    fmt_real(x[0]),
                    fmt_real(x[1]),
                    fmt_real(v.re),
                    fmt_real(v.im),
                    fmt_real(v.norm()),
                ])?;
            }
            if *p < pmax {
                let (abs, rel) = max_errors(&reference, u);
                errs.row(&[mode.into(), fmt_real(k), p.to_string(), n.to_string(), fmt_real(abs), fmt_real(rel)])?;
            }
        }
    }
    w.finish()?;
    errs.finish()?;
    Ok(vec![path, err_path])
}

/// 2-norm condition numbers; writes `condition.csv`.
pub fn cmd_condition(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let path = opts.path("condition.csv");
    let mut w = CsvWriter::create(&path, &["k", "p", "N", "cond"])?;
    for &k in &cfg.k {
        for p in cfg.degrees() {
            let space = build(cfg, k, p)?;
            let matrix = hnabem::assembly::assemble_matrix(&space)?;
            let cond = condition_number(&matrix)?;
            log::info!("k = {k}, p = {p}: N = {}, cond = {cond:.3e}", space.dim());
            w.row(&[fmt_real(k), p.to_string(), space.dim().to_string(), fmt_real(cond)])?;
        }
    }
    w.finish()?;
    Ok(vec![path])
}

/// Filon assembly against brute-force quadrature; writes `oracle.csv`.
pub fn cmd_oracle_compare(cfg: &RunConfig, opts: &RunOptions) -> CliResult<Vec<PathBuf>> {
    let path = opts.path("oracle.csv");
    let mut w = CsvWriter::create(
        &path,
        &["k", "p", "N", "matrix_rel_frobenius", "rhs_rel_error", "solution_rel_error", "fast_s", "oracle_s"],
    )?;
    for &k in &cfg.k {
        for p in cfg.degrees() {
            let space = build(cfg, k, p)?;
            let wave = cfg.wave(k)?;
            if space.dim() > 200 {
                log::warn!("oracle assembly for N = {} will be slow", space.dim());
            }
            let t = Instant::now();
            let fast = assemble(&space, &wave)?;
            let fast_s = opts.seconds(t);
            let t = Instant::now();
            let slow = oracle_assemble(&space, &wave)?;
            let oracle_s = opts.seconds(t);
            let diff = |a: &[Complex64], b: &[Complex64]| {
                let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
                let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
                (num / den).sqrt()
            };
            let m = diff(fast.matrix.data(), slow.matrix.data());
            let r = diff(&fast.rhs, &slow.rhs);
            let vf = lu_solve(&fast.matrix, &fast.rhs)?;
            let vs = lu_solve(&slow.matrix, &slow.rhs)?;
            let s = diff(&vf, &vs);
            log::info!(
                "k = {k}, p = {p}: matrix {m:.2e}, rhs {r:.2e}, solution {s:.2e}, residual of oracle solve {:.1e}",
                relative_residual(&slow.matrix, &vs, &slow.rhs)?
            );
            w.row(&[
                fmt_real(k),
                p.to_string(),
                space.dim().to_string(),
                fmt_real(m),
                fmt_real(r),
                fmt_real(s),
                fmt_real(fast_s),
                fmt_real(oracle_s),
            ])?;
        }
    }
    w.finish()?;
    Ok(vec![path])
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}
