//! Run configuration: a sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [dimensional]
//! phi_f = 0.9
//! [scenario]
//! model = cartesian
//! ```
//!
//! Unknown sections and keys are errors. Every key has a default, and
//! [`RunConfig::to_text`] writes all of them back out in a form that parses to
//! the same configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;

use crate::cartesian::Xi;
use crate::error::{Error, Result};
use crate::parameters::{default_carman_kozeny_constant, DimensionalParams};
use crate::thermal::ConvectionScheme;
use crate::transient::{CouplingLevel, HeatPreset, PiecewiseLinear, TimeScheme, TransientConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Spherical,
    Cartesian,
    Thermal,
    Transient,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Spherical => "spherical",
            Model::Cartesian => "cartesian",
            Model::Thermal => "thermal",
            Model::Transient => "transient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocitySource {
    ClosedForm,
    Zero,
    File,
}

impl VelocitySource {
    pub fn name(self) -> &'static str {
        match self {
            VelocitySource::ClosedForm => "closed_form",
            VelocitySource::Zero => "zero",
            VelocitySource::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: DimensionalParams,
    pub grid: usize,
    pub dt: f64,
    pub convection: ConvectionScheme,
    pub time_scheme: TimeScheme,
    pub quadrature_nodes: usize,
    pub converge_grids: Vec<usize>,
    pub model: Model,
    pub xi: Xi,
    pub lambda: f64,
    pub varrho: f64,
    pub velocity_source: VelocitySource,
    pub velocity_file: Option<PathBuf>,
    pub radius: f64,
    pub t_end: f64,
    pub dim: usize,
    pub robin_alpha_f: f64,
    pub robin_alpha_s: f64,
    pub ambient_f: f64,
    pub ambient_s: f64,
    pub theta_f_initial: f64,
    pub theta_s_base: f64,
    pub theta_s_amplitude: f64,
    pub pw1: PiecewiseLinear,
    pub velocity_gradient: f64,
    pub heat_preset: HeatPreset,
    pub coupling: CouplingLevel,
    pub exchange: bool,
    pub drag: bool,
    pub inertia: bool,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub precision: usize,
    /// Informational messages produced while resolving defaults.
    pub notes: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TransientConfig::default();
        Self {
            params: DimensionalParams::default(),
            grid: 201,
            dt: t.dt,
            convection: ConvectionScheme::Auto,
            time_scheme: TimeScheme::BackwardEuler,
            quadrature_nodes: 101,
            converge_grids: vec![101, 201, 401],
            model: Model::Cartesian,
            xi: Xi::Off,
            lambda: 1.0,
            varrho: 1.0,
            velocity_source: VelocitySource::ClosedForm,
            velocity_file: None,
            radius: t.radius,
            t_end: t.t_end,
            dim: t.dim,
            robin_alpha_f: t.robin_alpha_f,
            robin_alpha_s: t.robin_alpha_s,
            ambient_f: t.ambient_f,
            ambient_s: t.ambient_s,
            theta_f_initial: t.theta_f_initial,
            theta_s_base: t.theta_s_base,
            theta_s_amplitude: t.theta_s_amplitude,
            pw1: t.initial_profile,
            velocity_gradient: t.velocity_gradient,
            heat_preset: HeatPreset::Moderate,
            coupling: CouplingLevel::Off,
            exchange: true,
            drag: true,
            inertia: false,
            snapshot_times: vec![0.0, 1800.0, 3600.0, 5400.0, 7200.0],
            out_dir: PathBuf::from("out"),
            precision: 17,
            notes: Vec::new(),
        }
    }
}

const SECTIONS: [(&str, &[&str]); 7] = [
    (
        "dimensional",
        &[
            "rho_f", "rho_s", "c_f", "c_s", "kappa_f", "kappa_s", "h_exch", "mu_f", "mu_s", "lambda_f", "chi_s",
            "gamma_f", "gamma_s", "alpha_s_exp", "phi_f", "phi_s", "a0", "p_a", "drag_k", "beta", "mu_f_k",
        ],
    ),
    ("scales", &["length", "velocity"]),
    ("ck", &["c_k", "d_c"]),
    ("solver", &["grid", "dt", "convection", "time_scheme", "quadrature_nodes", "converge_grids"]),
    ("scenario", &["model", "xi", "lambda", "varrho", "velocity_source", "velocity_file"]),
    (
        "transient",
        &[
            "radius", "t_end", "dim", "robin_alpha_f", "robin_alpha_s", "ambient_f", "ambient_s", "theta_f_initial",
            "theta_s_base", "theta_s_amplitude", "pw1", "velocity_gradient", "heat_preset", "coupling", "exchange",
            "drag", "inertia", "snapshot_times",
        ],
    ),
    ("output", &["dir", "precision"]),
];

/// All valid keys as `section.key`.
pub fn known_keys() -> Vec<String> {
    SECTIONS
        .iter()
        .flat_map(|(s, keys)| keys.iter().map(move |k| format!("{s}.{k}")))
        .collect()
}

fn nearest<'a>(word: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .into_iter()
        .map(|c| (strsim::jaro_winkler(word, c), c))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

/// Resolves `key` or `section.key` to a canonical `(section, key)` pair.
fn resolve_key(section: Option<&str>, key: &str) -> std::result::Result<(&'static str, &'static str), String> {
    let (section, key) = match key.split_once('.') {
        Some((s, k)) => (Some(s), k),
        None => (section, key),
    };
    let matches: Vec<(&'static str, &'static str)> = SECTIONS
        .iter()
        .filter(|(s, _)| section.is_none_or(|want| *s == want))
        .flat_map(|(s, keys)| keys.iter().filter(|k| **k == key).map(move |k| (*s, *k)))
        .collect();
    if let Some(m) = matches.first() {
        return Ok(*m);
    }
    let pool: Vec<(&str, &str)> = SECTIONS
        .iter()
        .filter(|(name, _)| section.is_none_or(|s| *name == s))
        .flat_map(|(name, keys)| keys.iter().map(move |k| (*name, *k)))
        .collect();
    let hint = nearest(key, pool.iter().map(|(_, k)| *k))
        .and_then(|k| pool.iter().find(|(_, c)| *c == k))
        .map(|(s, k)| format!("; did you mean '{k}' in [{s}]?"))
        .unwrap_or_default();
    match section {
        Some(s) => Err(format!("unknown key '{key}' in section [{s}]{hint}")),
        None => Err(format!("unknown key '{key}'{hint}")),
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got '{v}'"))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got '{v}'"));
    }
    Ok(x)
}

fn positive(v: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(v)?;
    if x <= 0.0 {
        return Err(format!("value must be > 0, got {x}"));
    }
    Ok(x)
}

fn non_negative(v: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(v)?;
    if x < 0.0 {
        return Err(format!("value must be >= 0, got {x}"));
    }
    Ok(x)
}

fn fraction(v: &str) -> std::result::Result<f64, String> {
    let x = parse_f64(v)?;
    if !(x > 0.0 && x < 1.0) {
        return Err(format!("volume fraction must lie in (0, 1), got {x}"));
    }
    Ok(x)
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn parse_list<T>(v: &str, item: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| item(s.trim())).collect()
}

fn choice<T: Copy>(v: &str, options: &[(&str, T)]) -> std::result::Result<T, String> {
    options.iter().find(|(name, _)| *name == v).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, got '{v}'", names.join(" | "))
    })
}

fn fmt_f64(x: f64) -> String {
    // Debug formatting is the shortest representation that round-trips
    format!("{x:?}")
}

fn fmt_list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

#[derive(Default)]
struct Explicit {
    phi_f: Option<usize>,
    phi_s: Option<usize>,
    c_k: bool,
}

impl RunConfig {
    /// Sets one value; `key` may be bare (if unambiguous) or `section.key`.
    /// Volume fractions are closed, but `c_k` is left as is.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let (section, key) = resolve_key(None, key).map_err(Error::Argument)?;
        self.set_value(section, key, value).map_err(Error::Argument)?;
        match key {
            "phi_f" => self.params.phi_s = 1.0 - self.params.phi_f,
            "phi_s" => self.params.phi_f = 1.0 - self.params.phi_s,
            _ => {}
        }
        self.validate_cross().map_err(Error::Argument)
    }

    fn set_value(&mut self, section: &str, key: &str, v: &str) -> std::result::Result<(), String> {
        let p = &mut self.params;
        let v = v.trim();
        match (section, key) {
            ("dimensional", "rho_f") => p.rho_f = positive(v)?,
            ("dimensional", "rho_s") => p.rho_s = positive(v)?,
            ("dimensional", "c_f") => p.c_f = positive(v)?,
            ("dimensional", "c_s") => p.c_s = positive(v)?,
            ("dimensional", "kappa_f") => p.kappa_f = positive(v)?,
            ("dimensional", "kappa_s") => p.kappa_s = positive(v)?,
            ("dimensional", "h_exch") => p.h_exch = positive(v)?,
            ("dimensional", "mu_f") => p.mu_f = positive(v)?,
            ("dimensional", "mu_s") => p.mu_s = positive(v)?,
            ("dimensional", "lambda_f") => p.lambda_f = positive(v)?,
            ("dimensional", "chi_s") => p.chi_s = positive(v)?,
            ("dimensional", "gamma_f") => p.gamma_f = positive(v)?,
            ("dimensional", "gamma_s") => p.gamma_s = positive(v)?,
            ("dimensional", "alpha_s_exp") => p.alpha_s_exp = positive(v)?,
            ("dimensional", "phi_f") => p.phi_f = fraction(v)?,
            ("dimensional", "phi_s") => p.phi_s = fraction(v)?,
            ("dimensional", "a0") => p.a0 = positive(v)?,
            ("dimensional", "p_a") => p.p_a = positive(v)?,
            ("dimensional", "drag_k") => p.drag_k = positive(v)?,
            ("dimensional", "beta") => p.beta = non_negative(v)?,
            ("dimensional", "mu_f_k") => p.mu_f_k = if v == "auto" { None } else { Some(positive(v)?) },
            ("scales", "length") => p.length = positive(v)?,
            ("scales", "velocity") => p.velocity = positive(v)?,
            ("ck", "c_k") => p.c_k = positive(v)?,
            ("ck", "d_c") => p.d_c = positive(v)?,
            ("solver", "grid") => {
                let n = parse_usize(v)?;
                if n < 5 {
                    return Err(format!("grid needs at least 5 nodes, got {n}"));
                }
                self.grid = n;
            }
            ("solver", "dt") => self.dt = positive(v)?,
            ("solver", "convection") => {
                self.convection = choice(
                    v,
                    &[
                        ("auto", ConvectionScheme::Auto),
                        ("centered", ConvectionScheme::Centered),
                        ("upwind", ConvectionScheme::Upwind),
                    ],
                )?
            }
            ("solver", "time_scheme") => {
                self.time_scheme = choice(
                    v,
                    &[
                        ("backward_euler", TimeScheme::BackwardEuler),
                        ("crank_nicolson", TimeScheme::CrankNicolson),
                    ],
                )?
            }
            ("solver", "quadrature_nodes") => {
                let n = parse_usize(v)?;
                if n < 3 || n % 2 == 0 {
                    return Err(format!("quadrature_nodes must be odd and >= 3, got {n}"));
                }
                self.quadrature_nodes = n;
            }
            ("solver", "converge_grids") => self.converge_grids = parse_list(v, parse_usize)?,
            ("scenario", "model") => {
                self.model = choice(
                    v,
                    &[
                        ("spherical", Model::Spherical),
                        ("cartesian", Model::Cartesian),
                        ("thermal", Model::Thermal),
                        ("transient", Model::Transient),
                    ],
                )?
            }
            ("scenario", "xi") => self.xi = choice(v, &[("0", Xi::Off), ("1", Xi::On)])?,
            ("scenario", "lambda") => self.lambda = positive(v)?,
            ("scenario", "varrho") => self.varrho = positive(v)?,
            ("scenario", "velocity_source") => {
                self.velocity_source = choice(
                    v,
                    &[
                        ("closed_form", VelocitySource::ClosedForm),
                        ("zero", VelocitySource::Zero),
                        ("file", VelocitySource::File),
                    ],
                )?
            }
            ("scenario", "velocity_file") => {
                self.velocity_file = if v.is_empty() { None } else { Some(PathBuf::from(v)) }
            }
            ("transient", "radius") => self.radius = positive(v)?,
            ("transient", "t_end") => self.t_end = positive(v)?,
            ("transient", "dim") => {
                self.dim = choice(v, &[("2", 2), ("3", 3)])?;
            }
            ("transient", "robin_alpha_f") => self.robin_alpha_f = non_negative(v)?,
            ("transient", "robin_alpha_s") => self.robin_alpha_s = non_negative(v)?,
            ("transient", "ambient_f") => self.ambient_f = parse_f64(v)?,
            ("transient", "ambient_s") => self.ambient_s = parse_f64(v)?,
            ("transient", "theta_f_initial") => self.theta_f_initial = parse_f64(v)?,
            ("transient", "theta_s_base") => self.theta_s_base = parse_f64(v)?,
            ("transient", "theta_s_amplitude") => self.theta_s_amplitude = parse_f64(v)?,
            ("transient", "pw1") => {
                let pts = parse_list(v, |item| {
                    let (x, y) = item
                        .split_once(':')
                        .ok_or_else(|| format!("pw1 breakpoints are written x:y, got '{item}'"))?;
                    Ok((parse_f64(x.trim())?, parse_f64(y.trim())?))
                })?;
                self.pw1 = PiecewiseLinear::new(pts).map_err(|e| e.to_string())?;
            }
            ("transient", "velocity_gradient") => self.velocity_gradient = parse_f64(v)?,
            ("transient", "heat_preset") => self.heat_preset = HeatPreset::parse(v).map_err(|e| e.to_string())?,
            ("transient", "coupling") => self.coupling = CouplingLevel::parse(v).map_err(|e| e.to_string())?,
            ("transient", "exchange") => self.exchange = parse_bool(v)?,
            ("transient", "drag") => self.drag = parse_bool(v)?,
            ("transient", "inertia") => self.inertia = parse_bool(v)?,
            ("transient", "snapshot_times") => self.snapshot_times = parse_list(v, parse_f64)?,
            ("output", "dir") => self.out_dir = PathBuf::from(v),
            ("output", "precision") => {
                let n = parse_usize(v)?;
                if !(1..=17).contains(&n) {
                    return Err(format!("precision must lie in 1..=17, got {n}"));
                }
                self.precision = n;
            }
            _ => unreachable!("key table and setter out of sync: {section}.{key}"),
        }
        Ok(())
    }

    fn validate_cross(&self) -> std::result::Result<(), String> {
        let g = &self.converge_grids;
        if g.iter().any(|n| *n < 5 || n % 2 == 0) {
            return Err(format!("converge_grids must be odd and >= 5, got {g:?}"));
        }
        if g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("converge_grids must be strictly increasing, got {g:?}"));
        }
        let s = &self.snapshot_times;
        if s.windows(2).any(|w| w[1] < w[0]) {
            return Err("snapshot_times must be sorted".into());
        }
        if let Some(t) = s.iter().find(|t| **t < 0.0 || **t > self.t_end) {
            return Err(format!("snapshot time {t} outside [0, t_end = {}]", self.t_end));
        }
        if self.dt > self.t_end {
            return Err(format!("dt ({}) exceeds t_end ({})", self.dt, self.t_end));
        }
        Ok(())
    }

    /// Parses configuration text; `origin` names the source in error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        Self::parse_with_overrides(text, origin, &[])
    }

    /// Parses `text`, then applies `key=value` overrides as if they were
    /// appended to it. An override of one volume fraction replaces the other.
    pub fn parse_with_overrides(text: &str, origin: &str, overrides: &[(String, String)]) -> Result<Self> {
        let cfg_err = |line: usize, message: String| Error::Config {
            path: origin.to_string(),
            line,
            message,
        };
        let mut cfg = RunConfig::default();
        let mut explicit = Explicit::default();
        let mut section: Option<&'static str> = None;
        let mut last_line = 0;

        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(line_no, format!("malformed section header '{line}'")))?
                    .trim();
                section = Some(SECTIONS.iter().find(|(s, _)| *s == name).map(|(s, _)| *s).ok_or_else(|| {
                    let hint = nearest(name, SECTIONS.iter().map(|(s, _)| *s))
                        .map(|s| format!("; did you mean [{s}]?"))
                        .unwrap_or_default();
                    cfg_err(line_no, format!("unknown section [{name}]{hint}"))
                })?);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(line_no, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(cfg_err(line_no, "missing key before '='".into()));
            }
            let (sec, key) = resolve_key(section, key).map_err(|m| cfg_err(line_no, m))?;
            cfg.set_value(sec, key, value).map_err(|m| cfg_err(line_no, format!("{key}: {m}")))?;
            match key {
                "phi_f" => explicit.phi_f = Some(line_no),
                "phi_s" => explicit.phi_s = Some(line_no),
                "c_k" => explicit.c_k = true,
                _ => {}
            }
            last_line = line_no;
        }
        for (key, value) in overrides {
            let arg_err = |m: String| Error::Argument(format!("--set {key}: {m}"));
            let (sec, k) = resolve_key(None, key).map_err(arg_err)?;
            cfg.set_value(sec, k, value).map_err(arg_err)?;
            match k {
                "phi_f" => {
                    explicit.phi_f = Some(last_line);
                    explicit.phi_s = None;
                }
                "phi_s" => {
                    explicit.phi_s = Some(last_line);
                    explicit.phi_f = None;
                }
                "c_k" => explicit.c_k = true,
                _ => {}
            }
        }

        let p = &mut cfg.params;
        match (explicit.phi_f, explicit.phi_s) {
            (Some(_), Some(line)) => {
                if (p.phi_f + p.phi_s - 1.0).abs() > 1e-12 {
                    return Err(cfg_err(
                        line,
                        format!("phi_f = {} and phi_s = {} do not sum to 1", p.phi_f, p.phi_s),
                    ));
                }
            }
            (Some(_), None) => {
                p.phi_s = 1.0 - p.phi_f;
                cfg.notes.push(format!("phi_s set to 1 - phi_f = {}", fmt_f64(p.phi_s)));
            }
            (None, Some(_)) => {
                p.phi_f = 1.0 - p.phi_s;
                cfg.notes.push(format!("phi_f set to 1 - phi_s = {}", fmt_f64(p.phi_f)));
            }
            (None, None) => {}
        }
        if !explicit.c_k {
            p.c_k = default_carman_kozeny_constant(p.phi_f);
        }
        cfg.validate_cross().map_err(|m| cfg_err(last_line, m))?;
        for note in &cfg.notes {
            info!("{note}");
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// Value of one key as it appears in the resolved text.
    pub fn get(&self, key: &str) -> Result<String> {
        let (section, key) = resolve_key(None, key).map_err(Error::Argument)?;
        Ok(self
            .entries()
            .into_iter()
            .find(|(s, k, _)| *s == section && *k == key)
            .map(|(_, _, v)| v)
            .expect("every key has an entry"))
    }

    /// Every `(section, key, value)` in table order.
    pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
        let p = &self.params;
        let b = |x: bool| if x { "true" } else { "false" }.to_string();
        let mut out = Vec::new();
        for (section, keys) in SECTIONS {
            for key in keys {
                let v = match (section, *key) {
                    ("dimensional", "rho_f") => fmt_f64(p.rho_f),
                    ("dimensional", "rho_s") => fmt_f64(p.rho_s),
                    ("dimensional", "c_f") => fmt_f64(p.c_f),
                    ("dimensional", "c_s") => fmt_f64(p.c_s),
                    ("dimensional", "kappa_f") => fmt_f64(p.kappa_f),
                    ("dimensional", "kappa_s") => fmt_f64(p.kappa_s),
                    ("dimensional", "h_exch") => fmt_f64(p.h_exch),
                    ("dimensional", "mu_f") => fmt_f64(p.mu_f),
                    ("dimensional", "mu_s") => fmt_f64(p.mu_s),
                    ("dimensional", "lambda_f") => fmt_f64(p.lambda_f),
                    ("dimensional", "chi_s") => fmt_f64(p.chi_s),
                    ("dimensional", "gamma_f") => fmt_f64(p.gamma_f),
                    ("dimensional", "gamma_s") => fmt_f64(p.gamma_s),
                    ("dimensional", "alpha_s_exp") => fmt_f64(p.alpha_s_exp),
                    ("dimensional", "phi_f") => fmt_f64(p.phi_f),
                    ("dimensional", "phi_s") => fmt_f64(p.phi_s),
                    ("dimensional", "a0") => fmt_f64(p.a0),
                    ("dimensional", "p_a") => fmt_f64(p.p_a),
                    ("dimensional", "drag_k") => fmt_f64(p.drag_k),
                    ("dimensional", "beta") => fmt_f64(p.beta),
                    ("dimensional", "mu_f_k") => p.mu_f_k.map_or("auto".into(), fmt_f64),
                    ("scales", "length") => fmt_f64(p.length),
                    ("scales", "velocity") => fmt_f64(p.velocity),
                    ("ck", "c_k") => fmt_f64(p.c_k),
                    ("ck", "d_c") => fmt_f64(p.d_c),
                    ("solver", "grid") => self.grid.to_string(),
                    ("solver", "dt") => fmt_f64(self.dt),
                    ("solver", "convection") => match self.convection {
                        ConvectionScheme::Auto => "auto",
                        ConvectionScheme::Centered => "centered",
                        ConvectionScheme::Upwind => "upwind",
                    }
                    .into(),
                    ("solver", "time_scheme") => match self.time_scheme {
                        TimeScheme::BackwardEuler => "backward_euler",
                        TimeScheme::CrankNicolson => "crank_nicolson",
                    }
                    .into(),
                    ("solver", "quadrature_nodes") => self.quadrature_nodes.to_string(),
                    ("solver", "converge_grids") => fmt_list(&self.converge_grids, |n| n.to_string()),
                    ("scenario", "model") => self.model.name().into(),
                    ("scenario", "xi") => self.xi.as_int().to_string(),
                    ("scenario", "lambda") => fmt_f64(self.lambda),
                    ("scenario", "varrho") => fmt_f64(self.varrho),
                    ("scenario", "velocity_source") => self.velocity_source.name().into(),
                    ("scenario", "velocity_file") => self
                        .velocity_file
                        .as_ref()
                        .map(|p| p.display().to_string())
                        .unwrap_or_default(),
                    ("transient", "radius") => fmt_f64(self.radius),
                    ("transient", "t_end") => fmt_f64(self.t_end),
                    ("transient", "dim") => self.dim.to_string(),
                    ("transient", "robin_alpha_f") => fmt_f64(self.robin_alpha_f),
                    ("transient", "robin_alpha_s") => fmt_f64(self.robin_alpha_s),
                    ("transient", "ambient_f") => fmt_f64(self.ambient_f),
                    ("transient", "ambient_s") => fmt_f64(self.ambient_s),
                    ("transient", "theta_f_initial") => fmt_f64(self.theta_f_initial),
                    ("transient", "theta_s_base") => fmt_f64(self.theta_s_base),
                    ("transient", "theta_s_amplitude") => fmt_f64(self.theta_s_amplitude),
                    ("transient", "pw1") => {
                        fmt_list(self.pw1.points(), |(x, y)| format!("{}:{}", fmt_f64(*x), fmt_f64(*y)))
                    }
                    ("transient", "velocity_gradient") => fmt_f64(self.velocity_gradient),
                    ("transient", "heat_preset") => self.heat_preset.name().into(),
                    ("transient", "coupling") => self.coupling.name().into(),
                    ("transient", "exchange") => b(self.exchange),
                    ("transient", "drag") => b(self.drag),
                    ("transient", "inertia") => b(self.inertia),
                    ("transient", "snapshot_times") => fmt_list(&self.snapshot_times, |t| fmt_f64(*t)),
                    ("output", "dir") => self.out_dir.display().to_string(),
                    ("output", "precision") => self.precision.to_string(),
                    _ => unreachable!("key table and getter out of sync: {section}.{key}"),
                };
                out.push((section, *key, v));
            }
        }
        out
    }

    /// Fully resolved configuration text; parsing it reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::from(
            "# resolved configuration; every default is written out\n\
             # scales.length = 1 m and scales.velocity = 1e-6 m/s are inferred reference scales\n",
        );
        let mut current = "";
        for (section, key, value) in self.entries() {
            if section != current {
                let _ = write!(s, "\n[{section}]\n");
                current = section;
            }
            let _ = writeln!(s, "{key} = {value}");
        }
        s
    }

    /// Transient configuration with the heat and coupling presets applied.
    pub fn transient_config(&self) -> TransientConfig {
        let mut t = TransientConfig {
            radius: self.radius,
            t_end: self.t_end,
            dt: self.dt,
            nodes: self.grid,
            dim: self.dim,
            robin_alpha_f: self.robin_alpha_f,
            robin_alpha_s: self.robin_alpha_s,
            ambient_f: self.ambient_f,
            ambient_s: self.ambient_s,
            scheme: self.time_scheme,
            params: self.params.clone(),
            theta_f_initial: self.theta_f_initial,
            theta_s_base: self.theta_s_base,
            theta_s_amplitude: self.theta_s_amplitude,
            initial_profile: self.pw1.clone(),
            velocity_gradient: self.velocity_gradient,
            ..TransientConfig::default()
        };
        t.apply_preset(self.heat_preset, self.coupling);
        t.coupling.exchange_on = self.exchange;
        t.coupling.drag_on = self.drag;
        t.coupling.inertia_on = self.inertia;
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::parse_str("", "empty").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.length, 1.0);
        assert_eq!(c.params.velocity, 1e-6);
        assert_eq!(c.params.rho_f, 1050.0);
    }

    #[test]
    fn comments_and_sections() {
        let text = "# header\n[dimensional]\nkappa_s = 3 # trailing\n\n[scenario]\nmodel = thermal\n";
        let c = RunConfig::parse_str(text, "t").unwrap();
        assert_eq!(c.params.kappa_s, 3.0);
        assert_eq!(c.model, Model::Thermal);
    }

    #[test]
    fn porosity_closure() {
        let c = RunConfig::parse_str("[dimensional]\nphi_f = 0.9\n", "t").unwrap();
        assert!((c.params.phi_s - 0.1).abs() < 1e-15);
        assert_eq!(c.params.c_k, 2.0);
        assert_eq!(c.notes.len(), 1);
        let err = RunConfig::parse_str("[dimensional]\nphi_f = 0.9\nphi_s = 0.2\n", "t").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        let c = RunConfig::parse_str("[dimensional]\nphi_s = 0.5\n", "t").unwrap();
        assert_eq!(c.params.phi_f, 0.5);
        assert_eq!(c.params.c_k, 4.0);
    }

    #[test]
    fn unknown_key_names_line_and_suggestion() {
        let err = RunConfig::parse_str("[dimensional]\n\nphif = 0.9\n", "cfg.txt").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config { line: 3, .. }));
        assert!(msg.contains("cfg.txt:3"), "{msg}");
        assert!(msg.contains("phi_f"), "{msg}");
    }

    #[test]
    fn malformed_lines() {
        for (text, line) in [
            ("[dimensional\n", 1),
            ("[nowhere]\n", 1),
            ("[solver]\ngrid 10\n", 2),
            ("[solver]\ngrid = x\n", 2),
            ("[dimensional]\nphi_f = 1.5\n", 2),
            ("[solver]\nconverge_grids = 101, 100\n", 2),
            ("[scenario]\nxi = 2\n", 2),
        ] {
            match RunConfig::parse_str(text, "t") {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn resolved_text_round_trips() {
        let text = "[dimensional]\nphi_f = 0.9\nmu_f_k = 0.1\n[transient]\npw1 = 0:0, 0.5:1, 1:0\ncoupling = strong\n[scenario]\nvelocity_file = v.csv\n";
        let c = RunConfig::parse_str(text, "t").unwrap();
        let echoed = c.to_text();
        let mut again = RunConfig::parse_str(&echoed, "echo").unwrap();
        assert_eq!(again.to_text(), echoed);
        again.notes = c.notes.clone();
        assert_eq!(again, c);
    }

    #[test]
    fn overrides_behave_like_appended_lines() {
        let ov = |k: &str, v: &str| (k.to_string(), v.to_string());
        let c = RunConfig::parse_with_overrides("[dimensional]\nphi_s = 0.7\n", "t", &[ov("phi_f", "0.9")]).unwrap();
        assert!((c.params.phi_s - 0.1).abs() < 1e-15);
        assert_eq!(c.params.c_k, 2.0);
        let c = RunConfig::parse_with_overrides("", "t", &[ov("ck.c_k", "3")]).unwrap();
        assert_eq!(c.params.c_k, 3.0);
        let err = RunConfig::parse_with_overrides("", "t", &[ov("kapa_s", "3")]).unwrap_err();
        assert!(err.to_string().contains("kappa_s"), "{err}");
    }

    #[test]
    fn set_overrides() {
        let mut c = RunConfig::default();
        c.set("phi_f", "0.5").unwrap();
        assert_eq!(c.params.phi_s, 0.5);
        c.set("solver.grid", "101").unwrap();
        assert_eq!(c.grid, 101);
        c.set("scenario.xi", "1").unwrap();
        assert_eq!(c.xi, Xi::On);
        assert!(c.set("phif", "0.5").is_err());
        assert!(c.set("grid", "2").is_err());
        assert_eq!(c.get("grid").unwrap(), "101");
    }

    #[test]
    fn every_key_is_settable_from_its_echo() {
        let c = RunConfig::default();
        for (s, k, v) in c.entries() {
            let mut d = RunConfig::default();
            d.set_value(s, k, &v).unwrap_or_else(|e| panic!("{s}.{k} = {v}: {e}"));
            assert_eq!(d, c, "{s}.{k}");
        }
    }
}
