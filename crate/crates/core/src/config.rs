//! Strict line-oriented configuration.
//!
//! ```text
//! mode = evolve            # evolve | picard | division-lemma | convergence
//!
//! [grid]
//! x_min = -6
//! ...
//! ```
//!
//! Blank lines and `#` comments are ignored. Values are numbers, `true`/`false`,
//! bare or double-quoted strings, or comma-separated number lists. Unknown
//! sections and keys are errors, as is a key given twice.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::coupling::{SolverOptions, TransportMode};
use crate::division::DEFAULT_SWEEP;
use crate::error::ConfigError;
use crate::grid::DomainBounds;
use crate::profile::{Bump, InitialData, Profile1d, Profile2d};

type Res<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Evolve,
    Picard,
    DivisionLemma,
    Convergence,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Evolve => "evolve",
            Mode::Picard => "picard",
            Mode::DivisionLemma => "division-lemma",
            Mode::Convergence => "convergence",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        [Mode::Evolve, Mode::Picard, Mode::DivisionLemma, Mode::Convergence].into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub bounds: DomainBounds,
    pub nx: usize,
    pub nv: usize,
    pub t_final: f64,
}

impl Default for GridConfig {
    /// The desk preset grid.
    fn default() -> Self {
        GridConfig {
            bounds: DomainBounds { x_min: -6.0, x_max: 6.0, v_min: -4.0, v_max: 4.0 },
            nx: 256,
            nv: 256,
            t_final: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    /// Horizon `T`.
    pub horizon: f64,
    pub max_iter: usize,
    /// Stop when `‖g_{n+1} − g_n‖∞ < tol · ‖f₀‖∞`.
    pub tol: f64,
    /// Horizons at which the contraction ratio is measured (empty: no sweep).
    pub sweep: Vec<f64>,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { horizon: 0.25, max_iter: 50, tol: 1e-10, sweep: Vec::new() }
    }
}

/// Sampling of the post-run audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsConfig {
    /// Lattice refinement for the mass and energy integrals at both ends of
    /// the run (analytic transport only; 0 disables).
    pub quadrature_refine: usize,
    /// The `∂x∂tA` cross-check uses this many levels and as many x-nodes.
    pub representation_samples: usize,
    /// Level stride of the derivative-system audit.
    pub derivative_stride: usize,
    /// Levels sampled by the three-way `∂tA` comparison.
    pub wave_levels: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig { quadrature_refine: 4, representation_samples: 10, derivative_stride: 4, wave_levels: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write `f_<step>.csv` every this many steps (0 disables snapshots).
    pub snapshot_every: usize,
    pub csv: bool,
    pub json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), snapshot_every: 10, csv: true, json: true }
    }
}

/// Thresholds used by `--strict` audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub energy_drift: f64,
    pub mass: f64,
    pub sup_norm: f64,
    pub undershoot: f64,
    pub gronwall_margin: f64,
    pub division: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { energy_drift: 1e-4, mass: 1e-6, sup_norm: 1e-3, undershoot: 1e-6, gronwall_margin: 1e-6, division: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub mode: Mode,
    pub grid: GridConfig,
    pub data: InitialData,
    pub solver: SolverOptions,
    pub picard: PicardConfig,
    /// Transport speeds for the division identity sweep.
    pub a_sweep: Vec<f64>,
    /// x-cell counts of the convergence study; `nv` scales with `nx`.
    pub resolutions: Vec<usize>,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

impl Config {
    /// The desk preset: `bump2d` centred at `(0, 0.5)` on the default grid.
    pub fn desk() -> Self {
        Config {
            mode: Mode::Evolve,
            grid: GridConfig::default(),
            data: InitialData { f0: Profile2d::bump2d(0.0, 1.0, 0.5, 1.0, 1.0), ..InitialData::zero() },
            solver: SolverOptions::default(),
            picard: PicardConfig::default(),
            a_sweep: DEFAULT_SWEEP.to_vec(),
            resolutions: vec![64, 128, 256],
            diagnostics: DiagnosticsConfig::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["mode"]),
    ("grid", &["x_min", "x_max", "v_min", "v_max", "nx", "nv", "t_final"]),
    ("f0", &["preset", "x_center", "x_radius", "v_center", "v_radius", "height"]),
    ("a0", &["preset", "center", "radius", "height"]),
    ("a1", &["preset", "center", "radius", "height"]),
    ("solver", &["transport", "coupling", "clamp", "history_cap", "corrector_passes"]),
    ("picard", &["T", "max_iter", "tol", "sweep"]),
    ("diagnostics", &["quadrature_refine", "representation_samples", "derivative_stride", "wave_levels"]),
    ("division", &["a_sweep"]),
    ("convergence", &["resolutions"]),
    ("output", &["dir", "snapshot_every", "csv", "json"]),
    ("tolerances", &["energy_drift", "mass", "sup_norm", "undershoot", "gronwall_margin", "division"]),
];

struct Entry {
    value: String,
    line: usize,
}

struct Table {
    entries: BTreeMap<(String, String), Entry>,
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

impl Table {
    fn parse(text: &str) -> Res<Table> {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut section = String::new();
        let mut allowed: &[&str] = SECTIONS[0].1;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::Syntax { line, msg: "unterminated section header".into() })?
                    .trim();
                let (_, keys) = SECTIONS
                    .iter()
                    .find(|(s, _)| !s.is_empty() && *s == name)
                    .ok_or_else(|| ConfigError::UnknownSection { line, section: name.to_string() })?;
                section = name.to_string();
                allowed = keys;
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, msg: format!("expected `key = value`, got `{body}`") })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax { line, msg: format!("malformed key `{key}`") });
            }
            if value.is_empty() {
                return Err(ConfigError::Syntax { line, msg: format!("missing value for `{key}`") });
            }
            if !allowed.contains(&key) {
                return Err(ConfigError::UnknownKey { line, key: qualified(&section, key) });
            }
            let slot = (section.clone(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                return Err(ConfigError::Duplicate { key: qualified(&section, key), first: prev.line, second: line });
            }
            entries.insert(slot, Entry { value: unquote(value, line)?, line });
        }
        Ok(Table { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.keys().any(|(s, _)| s == section)
    }

    fn str_or(&self, section: &str, key: &str, default: Option<&str>) -> Res<String> {
        match (self.get(section, key), default) {
            (Some(e), _) => Ok(e.value.clone()),
            (None, Some(d)) => Ok(d.to_string()),
            (None, None) => Err(ConfigError::Missing { key: qualified(section, key) }),
        }
    }

    fn f64_or(&self, section: &str, key: &str, default: Option<f64>) -> Res<f64> {
        match (self.get(section, key), default) {
            (Some(e), _) => match e.value.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(ConfigError::Type { line: e.line, key: qualified(section, key), expected: "a finite number" }),
            },
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ConfigError::Missing { key: qualified(section, key) }),
        }
    }

    /// Integers are read signed so that negative values reach validation.
    fn int_or(&self, section: &str, key: &str, default: Option<i64>) -> Res<i64> {
        match (self.get(section, key), default) {
            (Some(e), _) => e
                .value
                .parse::<i64>()
                .map_err(|_| ConfigError::Type { line: e.line, key: qualified(section, key), expected: "an integer" }),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ConfigError::Missing { key: qualified(section, key) }),
        }
    }

    fn count(&self, section: &str, key: &str, default: usize, min: i64) -> Res<usize> {
        let v = self.int_or(section, key, Some(default as i64))?;
        if v < min {
            return Err(ConfigError::Invalid { key: qualified(section, key), msg: format!("{key} must be ≥ {min}") });
        }
        Ok(v as usize)
    }

    fn bool_or(&self, section: &str, key: &str, default: bool) -> Res<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError::Type { line: e.line, key: qualified(section, key), expected: "true or false" }),
            },
        }
    }

    fn list_or<T: std::str::FromStr>(&self, section: &str, key: &str, default: Vec<T>, expected: &'static str) -> Res<Vec<T>> {
        match self.get(section, key) {
            None => Ok(default),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().parse::<T>())
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|_| ConfigError::Type { line: e.line, key: qualified(section, key), expected }),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(value: &str, line: usize) -> Res<String> {
    if let Some(rest) = value.strip_prefix('"') {
        let inner = rest
            .strip_suffix('"')
            .ok_or_else(|| ConfigError::Syntax { line, msg: "unterminated string".into() })?;
        if inner.contains('"') {
            return Err(ConfigError::Syntax { line, msg: "stray quote in string".into() });
        }
        Ok(inner.to_string())
    } else if value.contains('"') {
        Err(ConfigError::Syntax { line, msg: "stray quote".into() })
    } else {
        Ok(value.to_string())
    }
}

fn positive(key: &str, v: f64) -> Res<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::Invalid { key: key.to_string(), msg: format!("must be > 0, got {v}") })
    }
}

fn parse_f0(t: &Table) -> Res<Profile2d> {
    if !t.has_section("f0") {
        return Ok(Profile2d::Zero);
    }
    let preset = t.str_or("f0", "preset", None)?;
    match preset.as_str() {
        "zero" => {
            for k in ["x_center", "x_radius", "v_center", "v_radius", "height"] {
                if let Some(e) = t.get("f0", k) {
                    return Err(ConfigError::UnknownKey { line: e.line, key: format!("f0.{k} (preset zero)") });
                }
            }
            Ok(Profile2d::Zero)
        }
        "bump2d" => {
            let xc = t.f64_or("f0", "x_center", Some(0.0))?;
            let xr = positive("f0.x_radius", t.f64_or("f0", "x_radius", None)?)?;
            let vc = t.f64_or("f0", "v_center", Some(0.0))?;
            let vr = positive("f0.v_radius", t.f64_or("f0", "v_radius", None)?)?;
            let h = t.f64_or("f0", "height", Some(1.0))?;
            if h < 0.0 {
                return Err(ConfigError::Invalid { key: "f0.height".into(), msg: "f₀ must be non-negative".into() });
            }
            Ok(Profile2d::bump2d(xc, xr, vc, vr, h))
        }
        other => Err(ConfigError::Invalid { key: "f0.preset".into(), msg: format!("unknown preset `{other}` (zero | bump2d)") }),
    }
}

fn parse_1d(t: &Table, s: &str) -> Res<Profile1d> {
    if !t.has_section(s) {
        return Ok(Profile1d::Zero);
    }
    let preset = t.str_or(s, "preset", None)?;
    let key = |k: &str| format!("{s}.{k}");
    match preset.as_str() {
        "zero" => {
            for k in ["center", "radius", "height"] {
                if let Some(e) = t.get(s, k) {
                    return Err(ConfigError::UnknownKey { line: e.line, key: format!("{} (preset zero)", key(k)) });
                }
            }
            Ok(Profile1d::Zero)
        }
        "bump" | "shifted_bump" => {
            let center = if preset == "bump" {
                if let Some(e) = t.get(s, "center") {
                    return Err(ConfigError::UnknownKey { line: e.line, key: format!("{} (use shifted_bump)", key("center")) });
                }
                0.0
            } else {
                t.f64_or(s, "center", None)?
            };
            let radius = positive(&key("radius"), t.f64_or(s, "radius", None)?)?;
            let height = t.f64_or(s, "height", Some(1.0))?;
            Ok(Profile1d::Bump(Bump::new(center, radius, height)))
        }
        other => Err(ConfigError::Invalid {
            key: key("preset"),
            msg: format!("unknown preset `{other}` (zero | bump | shifted_bump)"),
        }),
    }
}

/// Parse and validate a configuration file.
pub fn parse_config(text: &str) -> Res<Config> {
    let t = Table::parse(text)?;
    let mode_s = t.str_or("", "mode", None)?;
    let mode = Mode::parse(&mode_s).ok_or_else(|| ConfigError::Invalid {
        key: "mode".into(),
        msg: format!("unknown mode `{mode_s}` (evolve | picard | division-lemma | convergence)"),
    })?;

    let d = GridConfig::default();
    let bounds = DomainBounds {
        x_min: t.f64_or("grid", "x_min", Some(d.bounds.x_min))?,
        x_max: t.f64_or("grid", "x_max", Some(d.bounds.x_max))?,
        v_min: t.f64_or("grid", "v_min", Some(d.bounds.v_min))?,
        v_max: t.f64_or("grid", "v_max", Some(d.bounds.v_max))?,
    };
    if bounds.x_max <= bounds.x_min {
        return Err(ConfigError::Invalid { key: "grid.x_max".into(), msg: "x_max must exceed x_min".into() });
    }
    if bounds.v_max <= bounds.v_min {
        return Err(ConfigError::Invalid { key: "grid.v_max".into(), msg: "v_max must exceed v_min".into() });
    }
    let nx = t.count("grid", "nx", d.nx, 2)?;
    let nv = t.count("grid", "nv", d.nv, 2)?;
    let t_final = t.f64_or("grid", "t_final", Some(d.t_final))?;
    if t_final < 0.0 {
        return Err(ConfigError::Invalid { key: "grid.t_final".into(), msg: "t_final must be ≥ 0".into() });
    }
    let grid = GridConfig { bounds, nx, nv, t_final };

    let data = InitialData { f0: parse_f0(&t)?, a0: parse_1d(&t, "a0")?, a1: parse_1d(&t, "a1")? };

    let sd = SolverOptions::default();
    let transport = match t.str_or("solver", "transport", Some("analytic"))?.as_str() {
        "analytic" => TransportMode::Analytic,
        "depth_one" => TransportMode::DepthOne,
        other => {
            return Err(ConfigError::Invalid {
                key: "solver.transport".into(),
                msg: format!("unknown transport `{other}` (analytic | depth_one)"),
            })
        }
    };
    let solver = SolverOptions {
        transport,
        coupling: t.bool_or("solver", "coupling", sd.coupling)?,
        clamp: t.bool_or("solver", "clamp", sd.clamp)?,
        history_cap: t.count("solver", "history_cap", sd.history_cap, 0)?,
        corrector_passes: t.count("solver", "corrector_passes", sd.corrector_passes, 0)?,
    };

    let pd = PicardConfig::default();
    let picard = PicardConfig {
        horizon: positive("picard.T", t.f64_or("picard", "T", Some(pd.horizon))?)?,
        max_iter: t.count("picard", "max_iter", pd.max_iter, 1)?,
        tol: positive("picard.tol", t.f64_or("picard", "tol", Some(pd.tol))?)?,
        sweep: t.list_or("picard", "sweep", Vec::new(), "a list of numbers")?,
    };
    if let Some(h) = picard.sweep.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(ConfigError::Invalid { key: "picard.sweep".into(), msg: format!("horizon {h} must be > 0") });
    }
    let dd = DiagnosticsConfig::default();
    let diagnostics = DiagnosticsConfig {
        quadrature_refine: t.count("diagnostics", "quadrature_refine", dd.quadrature_refine, 0)?,
        representation_samples: t.count("diagnostics", "representation_samples", dd.representation_samples, 1)?,
        derivative_stride: t.count("diagnostics", "derivative_stride", dd.derivative_stride, 1)?,
        wave_levels: t.count("diagnostics", "wave_levels", dd.wave_levels, 1)?,
    };

    let a_sweep: Vec<f64> = t.list_or("division", "a_sweep", DEFAULT_SWEEP.to_vec(), "a list of numbers")?;
    if let Some(a) = a_sweep.iter().find(|a| a.is_nan() || a.abs() >= 1.0) {
        return Err(ConfigError::Invalid { key: "division.a_sweep".into(), msg: format!("speed {a} outside (-1, 1)") });
    }
    let resolutions: Vec<usize> = t.list_or("convergence", "resolutions", vec![64, 128, 256], "a list of cell counts")?;
    if resolutions.len() != 3 || resolutions.iter().any(|&n| n < 2) || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(ConfigError::Invalid {
            key: "convergence.resolutions".into(),
            msg: "need three cell counts, each double the previous".into(),
        });
    }

    let od = OutputConfig::default();
    let output = OutputConfig {
        dir: PathBuf::from(t.str_or("output", "dir", Some(od.dir.to_str().unwrap_or("out")))?),
        snapshot_every: t.count("output", "snapshot_every", od.snapshot_every, 0)?,
        csv: t.bool_or("output", "csv", od.csv)?,
        json: t.bool_or("output", "json", od.json)?,
    };

    let td = Tolerances::default();
    let tol = |k: &str, d: f64| -> Res<f64> { positive(&format!("tolerances.{k}"), t.f64_or("tolerances", k, Some(d))?) };
    let tolerances = Tolerances {
        energy_drift: tol("energy_drift", td.energy_drift)?,
        mass: tol("mass", td.mass)?,
        sup_norm: tol("sup_norm", td.sup_norm)?,
        undershoot: tol("undershoot", td.undershoot)?,
        gronwall_margin: tol("gronwall_margin", td.gronwall_margin)?,
        division: tol("division", td.division)?,
    };

    Ok(Config { mode, grid, data, solver, picard, a_sweep, resolutions, diagnostics, output, tolerances })
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn render_1d(out: &mut String, name: &str, p: &Profile1d) {
    let _ = writeln!(out, "\n[{name}]");
    match p {
        Profile1d::Zero => {
            let _ = writeln!(out, "preset = zero");
        }
        Profile1d::Bump(b) => {
            if b.center == 0.0 {
                let _ = writeln!(out, "preset = bump");
            } else {
                let _ = writeln!(out, "preset = shifted_bump\ncenter = {}", num(b.center));
            }
            let _ = writeln!(out, "radius = {}\nheight = {}", num(b.radius), num(b.height));
        }
    }
}

/// Canonical text form; `parse_config(&render(c)) == c`.
pub fn render(c: &Config) -> String {
    let mut s = String::new();
    let g = &c.grid;
    let _ = writeln!(s, "mode = {}", c.mode.name());
    let _ = writeln!(
        s,
        "\n[grid]\nx_min = {}\nx_max = {}\nv_min = {}\nv_max = {}\nnx = {}\nnv = {}\nt_final = {}",
        num(g.bounds.x_min),
        num(g.bounds.x_max),
        num(g.bounds.v_min),
        num(g.bounds.v_max),
        g.nx,
        g.nv,
        num(g.t_final)
    );
    let _ = writeln!(s, "\n[f0]");
    match c.data.f0 {
        Profile2d::Zero => {
            let _ = writeln!(s, "preset = zero");
        }
        Profile2d::Product { x, v } => {
            let _ = writeln!(
                s,
                "preset = bump2d\nx_center = {}\nx_radius = {}\nv_center = {}\nv_radius = {}\nheight = {}",
                num(x.center),
                num(x.radius),
                num(v.center),
                num(v.radius),
                num(x.height * v.height)
            );
        }
    }
    render_1d(&mut s, "a0", &c.data.a0);
    render_1d(&mut s, "a1", &c.data.a1);
    let o = &c.solver;
    let transport = match o.transport {
        TransportMode::Analytic => "analytic",
        TransportMode::DepthOne => "depth_one",
    };
    let _ = writeln!(
        s,
        "\n[solver]\ntransport = {transport}\ncoupling = {}\nclamp = {}\nhistory_cap = {}\ncorrector_passes = {}",
        o.coupling, o.clamp, o.history_cap, o.corrector_passes
    );
    let p = &c.picard;
    let list = |v: &[String]| v.join(", ");
    let _ = writeln!(s, "\n[picard]\nT = {}\nmax_iter = {}\ntol = {}", num(p.horizon), p.max_iter, num(p.tol));
    if !p.sweep.is_empty() {
        let _ = writeln!(s, "sweep = {}", list(&p.sweep.iter().map(|h| num(*h)).collect::<Vec<_>>()));
    }
    let d = &c.diagnostics;
    let _ = writeln!(
        s,
        "\n[diagnostics]\nquadrature_refine = {}\nrepresentation_samples = {}\nderivative_stride = {}\nwave_levels = {}",
        d.quadrature_refine, d.representation_samples, d.derivative_stride, d.wave_levels
    );
    let _ = writeln!(s, "\n[division]\na_sweep = {}", list(&c.a_sweep.iter().map(|a| num(*a)).collect::<Vec<_>>()));
    let _ = writeln!(
        s,
        "\n[convergence]\nresolutions = {}",
        list(&c.resolutions.iter().map(|n| n.to_string()).collect::<Vec<_>>())
    );
    let out = &c.output;
    let _ = writeln!(
        s,
        "\n[output]\ndir = \"{}\"\nsnapshot_every = {}\ncsv = {}\njson = {}",
        out.dir.display(),
        out.snapshot_every,
        out.csv,
        out.json
    );
    let t = &c.tolerances;
    let _ = writeln!(
        s,
        "\n[tolerances]\nenergy_drift = {}\nmass = {}\nsup_norm = {}\nundershoot = {}\ngronwall_margin = {}\ndivision = {}",
        num(t.energy_drift),
        num(t.mass),
        num(t.sup_norm),
        num(t.undershoot),
        num(t.gronwall_margin),
        num(t.division)
    );
    s
}
