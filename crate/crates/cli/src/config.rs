//! Run configuration read from a sectioned key-value file.
//!
//! ```text
//! [screen]
//! breakpoints = 0, 2pi, 2.1pi, 2.5pi
//! [wave]
//! k = 10, 20
//! d = 0.7071067811865476, -0.7071067811865476
//! [space]
//! p = 0, 1, 2, 3
//! [run]
//! farfield_samples = 10000
//! ```
//!
//! Reals accept a `pi` suffix (`2.1pi`, `-pi`, `3*pi`).

use hnabem::geometry::{IncidentWave, Screen};
use hnabem::hna_space::{LayersRule, SpaceParams};
use hnabem::postprocess::{Rectangle, DEFAULT_FARFIELD_SAMPLES};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Screen,
    Aperture,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub breakpoints: Vec<f64>,
    pub k: Vec<f64>,
    pub d: [f64; 2],
    pub p: Vec<usize>,
    pub sigma: f64,
    pub alpha: f64,
    pub layers: LayersRule,
    pub farfield_samples: usize,
    pub rectangle: Rectangle,
    pub mode: FieldMode,
    pub oracle: bool,
    pub n_pw: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            breakpoints: Screen::benchmark().breakpoints().to_vec(),
            k: Vec::new(),
            d: [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            p: (0..=7).collect(),
            sigma: 0.15,
            alpha: 1.0,
            layers: LayersRule::TwicePPlusOne,
            farfield_samples: DEFAULT_FARFIELD_SAMPLES,
            rectangle: Rectangle::benchmark(),
            mode: FieldMode::Screen,
            oracle: false,
            n_pw: 40,
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("screen", &["breakpoints"]),
    ("wave", &["k", "d"]),
    ("space", &["p", "sigma", "alpha", "layers"]),
    ("run", &["farfield_samples", "rectangle", "mode", "oracle", "n_pw"]),
];

/// Real number with optional `pi` factor.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (body, factor) = match t.strip_suffix("pi") {
        Some(b) => (b.trim().trim_end_matches('*').trim(), PI),
        None => (t, 1.0),
    };
    let value = match body {
        "" | "+" if factor != 1.0 => 1.0,
        "-" if factor != 1.0 => -1.0,
        _ => body.parse::<f64>().map_err(|_| format!("`{t}` is not a number"))?,
    };
    let v = value * factor;
    if !v.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    Ok(v)
}

fn split_list(v: &str) -> Vec<&str> {
    v.split([',', ' ', '\t']).map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_reals(v: &str) -> Result<Vec<f64>, String> {
    split_list(v).into_iter().map(parse_real).collect()
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.trim().parse::<usize>().map_err(|_| format!("`{}` is not a non-negative integer", v.trim()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section: Option<&str> = None;
        let mut seen: Vec<(String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| ConfigError(format!("line {line_no}: {msg}"));
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                section = Some(
                    KEYS.iter()
                        .find(|(s, _)| *s == name)
                        .map(|(s, _)| *s)
                        .ok_or_else(|| err(format!("unknown section [{name}]")))?,
                );
                continue;
            }
            let sec = section.ok_or_else(|| err("key outside of any section".into()))?;
            let (key, value) = line
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let allowed = KEYS.iter().find(|(s, _)| *s == sec).unwrap().1;
            if !allowed.contains(&key) {
                return Err(err(format!("unknown key `{key}` in [{sec}]")));
            }
            if seen.iter().any(|(s, k)| s == sec && k == key) {
                return Err(err(format!("duplicate key `{key}` in [{sec}]")));
            }
            seen.push((sec.to_string(), key.to_string()));
            cfg.set(key, value).map_err(|m| err(format!("[{sec}] {key}: {m}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "breakpoints" => self.breakpoints = parse_reals(value)?,
            "k" => self.k = parse_reals(value)?,
            "d" => {
                let v = parse_reals(value)?;
                if v.len() != 2 {
                    return Err(format!("expected two components, got {}", v.len()));
                }
                self.d = [v[0], v[1]];
            }
            "p" => self.p = split_list(value).into_iter().map(parse_usize).collect::<Result<_, _>>()?,
            "sigma" => self.sigma = parse_real(value)?,
            "alpha" => self.alpha = parse_real(value)?,
            "layers" => {
                self.layers = match value.replace(' ', "").as_str() {
                    "2(p+1)" => LayersRule::TwicePPlusOne,
                    v => LayersRule::Fixed(parse_usize(v)?),
                }
            }
            "farfield_samples" => self.farfield_samples = parse_usize(value)?,
            "rectangle" => {
                let v = parse_reals(value)?;
                if v.len() != 4 {
                    return Err(format!("expected x_min x_max y_min y_max, got {} values", v.len()));
                }
                self.rectangle = Rectangle::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())?;
            }
            "mode" => {
                self.mode = match value {
                    "screen" => FieldMode::Screen,
                    "aperture" => FieldMode::Aperture,
                    other => return Err(format!("expected `screen` or `aperture`, got `{other}`")),
                }
            }
            "oracle" => {
                self.oracle = match value {
                    "true" | "yes" | "1" => true,
                    "false" | "no" | "0" => false,
                    other => return Err(format!("expected a boolean, got `{other}`")),
                }
            }
            "n_pw" => self.n_pw = parse_usize(value)?,
            _ => unreachable!(),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let e = |m: &str| Err(ConfigError(m.to_string()));
        if self.k.is_empty() {
            return e("[wave] k: the wavenumber list is empty");
        }
        if self.k.iter().any(|&k| !(k > 0.0)) {
            return e("[wave] k: wavenumbers must be positive");
        }
        if self.p.is_empty() {
            return e("[space] p: the degree list is empty");
        }
        if self.p.iter().any(|&p| p > hnabem::hna_space::MAX_DEGREE) {
            return Err(ConfigError(format!("[space] p: degrees above {} are not supported", hnabem::hna_space::MAX_DEGREE)));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return e("[space] sigma: must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return e("[space] alpha: must lie in [0, 1]");
        }
        if let LayersRule::Fixed(0) = self.layers {
            return e("[space] layers: must be at least 1");
        }
        if self.farfield_samples == 0 {
            return e("[run] farfield_samples: must be positive");
        }
        self.screen().map_err(|err| ConfigError(format!("[screen] breakpoints: {err}")))?;
        for &k in &self.k {
            IncidentWave::new(k, self.d).map_err(|err| ConfigError(format!("[wave] d: {err}")))?;
        }
        Ok(())
    }

    pub fn screen(&self) -> hnabem::Result<Screen> {
        Screen::new(self.breakpoints.clone())
    }

    pub fn wave(&self, k: f64) -> hnabem::Result<IncidentWave> {
        IncidentWave::new(k, self.d)
    }

    pub fn space_params(&self, p: usize) -> SpaceParams {
        SpaceParams {
            p,
            sigma: self.sigma,
            alpha: self.alpha,
            layers: self.layers,
        }
    }

    /// Degree list sorted and deduplicated.
    pub fn degrees(&self) -> Vec<usize> {
        let mut p = self.p.clone();
        p.sort_unstable();
        p.dedup();
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_with_pi() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("2.1pi").unwrap(), 2.1 * PI);
        assert_eq!(parse_real("3*pi").unwrap(), 3.0 * PI);
        assert_eq!(parse_real(" 0.5 ").unwrap(), 0.5);
        assert!(parse_real("abc").is_err());
        assert!(parse_real("inf").is_err());
    }

    #[test]
    fn full_config() {
        let cfg = RunConfig::parse(
            "# comment\n[screen]\nbreakpoints = 0, 2pi\n[wave]\nk = 5, 10\nd = 1, 0\n[space]\np = 3, 1, 2\nsigma = 0.2\nalpha = 1\nlayers = 6\n[run]\nfarfield_samples = 100\nrectangle = -pi, 3pi, -pi, pi\nmode = aperture\noracle = true\nn_pw = 20\n",
        )
        .unwrap();
        assert_eq!(cfg.breakpoints, vec![0.0, 2.0 * PI]);
        assert_eq!(cfg.k, vec![5.0, 10.0]);
        assert_eq!(cfg.d, [1.0, 0.0]);
        assert_eq!(cfg.degrees(), vec![1, 2, 3]);
        assert_eq!(cfg.layers, LayersRule::Fixed(6));
        assert_eq!(cfg.mode, FieldMode::Aperture);
        assert!(cfg.oracle);
        assert_eq!(cfg.n_pw, 20);
        assert_eq!(cfg.rectangle.x_max, 3.0 * PI);
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::parse("[wave]\nk = 10\n").unwrap();
        assert_eq!(cfg.sigma, 0.15);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.layers, LayersRule::TwicePPlusOne);
        assert_eq!(cfg.farfield_samples, 50_000);
        assert_eq!(cfg.screen().unwrap(), Screen::benchmark());
    }

    #[test]
    fn errors_carry_context() {
        let e = RunConfig::parse("[wave]\nk =\n").unwrap_err();
        assert!(e.0.contains("empty"), "{}", e.0);
        let e = RunConfig::parse("[wave]\nk = 1\nfoo = 2\n").unwrap_err();
        assert!(e.0.starts_with("line 3"), "{}", e.0);
        let e = RunConfig::parse("[wave]\nk = 1\n[space]\np = x\n").unwrap_err();
        assert!(e.0.contains("line 4") && e.0.contains("p"), "{}", e.0);
        assert!(RunConfig::parse("k = 1\n").is_err());
        assert!(RunConfig::parse("[bogus]\n").is_err());
        assert!(RunConfig::parse("[wave]\nk = 1\nk = 2\n").is_err());
        assert!(RunConfig::parse("[wave]\nk = 1\n[screen]\nbreakpoints = 0, 2, 1, 3\n").is_err());
        assert!(RunConfig::parse("[wave]\nk = -1\n").is_err());
    }
}
