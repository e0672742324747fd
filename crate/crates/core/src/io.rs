//! File formats shared by the subcommands: `LDSN` snapshots, `key = value`
//! run configs, the `series.csv` time series, small CSV tables and the run
//! manifest. Layouts are documented in `docs/formats.md`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsRecord;
use crate::dipole::{DipoleSpec, Point};
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::perturbation::{theorem2_data, PerturbationSpec};
use crate::solver::{auto_dt, LedgerDrift, MeanFlow, SolverConfig};
use crate::tracer::{TracerSet, TrajectoryLog};

pub const MAGIC: &[u8; 4] = b"LDSN";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;

/// Header fields of a snapshot besides the grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotMeta {
    pub time: f64,
    pub frame_speed: f64,
    pub alpha: f64,
}

impl Default for SnapshotMeta {
    fn default() -> Self {
        SnapshotMeta {
            time: 0.0,
            frame_speed: 0.0,
            alpha: 1.0,
        }
    }
}

pub fn encode_snapshot(field: &ScalarField, meta: &SnapshotMeta) -> Vec<u8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n as u32).to_le_bytes());
    for v in [g.half_extent, meta.time, meta.frame_speed, meta.alpha] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn format_err<T>(offset: usize, reason: impl Into<String>) -> Result<T> {
    Err(Error::Format {
        offset: offset as u64,
        reason: reason.into(),
    })
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(ScalarField, SnapshotMeta)> {
    if bytes.len() < HEADER_LEN {
        return format_err(bytes.len(), format!("truncated header ({} of {HEADER_LEN} bytes)", bytes.len()));
    }
    if &bytes[0..4] != MAGIC {
        return format_err(0, "bad magic, expected LDSN");
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return format_err(4, format!("unsupported version {version}"));
    }
    let n = u32_at(bytes, 8) as usize;
    let l = f64_at(bytes, 12);
    let grid = match Grid::new(n, l) {
        Ok(g) => g,
        Err(e) => {
            let off = if n < 16 || !n.is_power_of_two() { 8 } else { 12 };
            return format_err(off, e.to_string());
        }
    };
    let meta = SnapshotMeta {
        time: f64_at(bytes, 20),
        frame_speed: f64_at(bytes, 28),
        alpha: f64_at(bytes, 36),
    };
    for (off, v) in [(20, meta.time), (28, meta.frame_speed), (36, meta.alpha)] {
        if !v.is_finite() {
            return format_err(off, "non-finite header value");
        }
    }
    let want = HEADER_LEN + 8 * n * n;
    if bytes.len() < want {
        let whole = HEADER_LEN + (bytes.len() - HEADER_LEN) / 8 * 8;
        return format_err(whole, format!("truncated payload: {} of {want} bytes", bytes.len()));
    }
    if bytes.len() > want {
        return format_err(want, format!("{} trailing bytes", bytes.len() - want));
    }
    let mut values = Vec::with_capacity(n * n);
    for k in 0..n * n {
        let off = HEADER_LEN + 8 * k;
        let v = f64_at(bytes, off);
        if !v.is_finite() {
            return format_err(off, "non-finite payload value");
        }
        values.push(v);
    }
    Ok((ScalarField { grid, values }, meta))
}

pub fn write_snapshot(path: &Path, field: &ScalarField, meta: &SnapshotMeta) -> Result<()> {
    fs::write(path, encode_snapshot(field, meta))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ScalarField, SnapshotMeta)> {
    decode_snapshot(&fs::read(path)?)
}

/// File name used for the snapshot at time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("t_{t:09.4}.fld")
}

/// Every `*.fld` file in `dir`, read and sorted by header time.
pub fn read_snapshot_dir(dir: &Path) -> Result<Vec<(PathBuf, ScalarField, SnapshotMeta)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e == "fld") {
            let (f, m) = read_snapshot(&p)?;
            out.push((p, f, m));
        }
    }
    out.sort_by(|a, b| a.2.time.total_cmp(&b.2.time));
    Ok(out)
}

/// `dt = auto` or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtChoice {
    Auto,
    Fixed(f64),
}

/// Initial field selector.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialSpec {
    #[default]
    Lamb,
    Perturbed,
    File(PathBuf),
}

/// Documentation of one config key.
#[derive(Debug, Clone, Copy)]
pub struct KeyDoc {
    pub key: &'static str,
    pub default: &'static str,
    pub unit: &'static str,
    pub help: &'static str,
}

const fn key(key: &'static str, default: &'static str, unit: &'static str, help: &'static str) -> KeyDoc {
    KeyDoc {
        key,
        default,
        unit,
        help,
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[KeyDoc] = &[
    key("n", "(required)", "points", "grid points per side, power of two >= 16"),
    key("L", "(required)", "length", "half extent, the box is [-L, L)^2"),
    key("dt", "(required)", "time", "time step, or `auto` for 0.4 h / max|u0 - V e1|"),
    key("t_end", "(required)", "time", "final time"),
    key("alpha", "1", "-", "velocity law exponent in (1/2, 1]; 1 is Euler"),
    key("frame_speed", "1", "velocity", "speed V of the co-moving frame, 0 for the lab frame"),
    key("symmetrize_every", "1", "steps", "odd-symmetry projection period, 0 for never"),
    key("snapshot_interval", "0.25", "time", "spacing of snapshots and series rows"),
    key("hyperviscosity_coeff", "0", "-", "coefficient nu of nu (-Lap)^p"),
    key("hyperviscosity_order", "4", "-", "order p of the hyperviscosity"),
    key("hyperviscosity_start", "0", "time", "hyperviscosity acts for t >= this"),
    key("mean_flow", "free-space", "-", "zero | free-space: remove the box counterflow of a dipole (alpha = 1 only)"),
    key("initial", "lamb", "-", "lamb | perturbed | file:PATH"),
    key("mollify_scale", "0.05", "length", "mollifier radius for perturbed data, 0 samples the dipole"),
    key("bump_amplitude", "0", "vorticity", "amplitude of the odd bump pair"),
    key("bump_center", "0, 0.5", "point", "bump centre in the upper half plane"),
    key("bump_radius", "0.3", "length", "bump support radius"),
    key("arm_enabled", "false", "bool", "add the arm joining the core to arm_target"),
    key("arm_target", "-2.5, 0.5", "point", "far end z of the arm, z1 < -2, z2 > 0"),
    key("arm_width", "0.05", "length", "half width of the arm support"),
    key("arm_amplitude", "8.858", "vorticity", "arm plateau value in (m/2, 7m/8), default 0.8 m"),
    key("holder_alpha", "0.5", "-", "exponent of the reported Holder quotient"),
];

/// A parsed run configuration. Required keys stay `None` until set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: Option<usize>,
    pub half_extent: Option<f64>,
    pub dt: Option<DtChoice>,
    pub t_end: Option<f64>,
    pub alpha: f64,
    pub frame_speed: f64,
    pub symmetrize_every: u32,
    pub snapshot_interval: f64,
    pub hyperviscosity_coeff: f64,
    pub hyperviscosity_order: u32,
    pub hyperviscosity_start: f64,
    pub mean_flow: MeanFlow,
    pub initial: InitialSpec,
    pub perturbation: PerturbationSpec,
    pub holder_alpha: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: None,
            half_extent: None,
            dt: None,
            t_end: None,
            alpha: 1.0,
            frame_speed: 1.0,
            symmetrize_every: 1,
            snapshot_interval: 0.25,
            hyperviscosity_coeff: 0.0,
            hyperviscosity_order: 4,
            hyperviscosity_start: 0.0,
            mean_flow: MeanFlow::FreeSpace,
            initial: InitialSpec::Lamb,
            perturbation: PerturbationSpec::default(),
            holder_alpha: 0.5,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_point(key: &str, v: &str) -> Result<Point> {
    let inner = v.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("{key}: expected two numbers, got '{v}'")));
    }
    Ok([parse_num(key, parts[0])?, parse_num(key, parts[1])?])
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

impl Config {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let p = &mut self.perturbation;
        match key {
            "n" => self.n = Some(parse_num(key, v)?),
            "L" | "half_extent" => self.half_extent = Some(parse_num(key, v)?),
            "dt" => {
                self.dt = Some(if v == "auto" {
                    DtChoice::Auto
                } else {
                    DtChoice::Fixed(parse_num(key, v)?)
                })
            }
            "t_end" => self.t_end = Some(parse_num(key, v)?),
            "alpha" => self.alpha = parse_num(key, v)?,
            "frame_speed" => self.frame_speed = parse_num(key, v)?,
            "symmetrize_every" => self.symmetrize_every = parse_num(key, v)?,
            "snapshot_interval" => self.snapshot_interval = parse_num(key, v)?,
            "hyperviscosity_coeff" => self.hyperviscosity_coeff = parse_num(key, v)?,
            "hyperviscosity_order" => self.hyperviscosity_order = parse_num(key, v)?,
            "hyperviscosity_start" => self.hyperviscosity_start = parse_num(key, v)?,
            "mean_flow" => self.mean_flow = v.parse()?,
            "initial" => {
                self.initial = match v {
                    "lamb" => InitialSpec::Lamb,
                    "perturbed" => InitialSpec::Perturbed,
                    _ => match v.strip_prefix("file:") {
                        Some(path) if !path.is_empty() => InitialSpec::File(PathBuf::from(path)),
                        _ => {
                            return Err(Error::Config(format!(
                                "initial: expected lamb | perturbed | file:PATH, got '{v}'"
                            )))
                        }
                    },
                }
            }
            "mollify_scale" => p.mollify_scale = parse_num(key, v)?,
            "bump_amplitude" => p.bump_amplitude = parse_num(key, v)?,
            "bump_center" => p.bump_center = parse_point(key, v)?,
            "bump_radius" => p.bump_radius = parse_num(key, v)?,
            "arm_enabled" => p.arm_enabled = parse_bool(key, v)?,
            "arm_target" => p.arm_target = parse_point(key, v)?,
            "arm_width" => p.arm_width = parse_num(key, v)?,
            "arm_amplitude" => p.arm_amplitude = parse_num(key, v)?,
            "holder_alpha" => self.holder_alpha = parse_num(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Canonical textual value of a key, `None` for unset required keys.
    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.perturbation;
        let pt = |x: Point| format!("{}, {}", x[0], x[1]);
        Some(match key {
            "n" => self.n?.to_string(),
            "L" => self.half_extent?.to_string(),
            "dt" => match self.dt? {
                DtChoice::Auto => "auto".into(),
                DtChoice::Fixed(d) => d.to_string(),
            },
            "t_end" => self.t_end?.to_string(),
            "alpha" => self.alpha.to_string(),
            "frame_speed" => self.frame_speed.to_string(),
            "symmetrize_every" => self.symmetrize_every.to_string(),
            "snapshot_interval" => self.snapshot_interval.to_string(),
            "hyperviscosity_coeff" => self.hyperviscosity_coeff.to_string(),
            "hyperviscosity_order" => self.hyperviscosity_order.to_string(),
            "hyperviscosity_start" => self.hyperviscosity_start.to_string(),
            "mean_flow" => self.mean_flow.to_string(),
            "initial" => match &self.initial {
                InitialSpec::Lamb => "lamb".into(),
                InitialSpec::Perturbed => "perturbed".into(),
                InitialSpec::File(p) => format!("file:{}", p.display()),
            },
            "mollify_scale" => p.mollify_scale.to_string(),
            "bump_amplitude" => p.bump_amplitude.to_string(),
            "bump_center" => pt(p.bump_center),
            "bump_radius" => p.bump_radius.to_string(),
            "arm_enabled" => p.arm_enabled.to_string(),
            "arm_target" => pt(p.arm_target),
            "arm_width" => p.arm_width.to_string(),
            "arm_amplitude" => p.arm_amplitude.to_string(),
            "holder_alpha" => self.holder_alpha.to_string(),
            _ => return None,
        })
    }

    /// Every set key as `key = value` lines in canonical order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            if let Some(v) = self.get(k.key) {
                let _ = writeln!(s, "{} = {}", k.key, v);
            }
        }
        s
    }

    /// SHA-256 of [`Config::to_text`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn require<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
        v.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    }

    pub fn grid(&self) -> Result<Grid> {
        let n = Self::require(self.n, "n")?;
        let l = Self::require(self.half_extent, "L")?;
        Grid::new(n, l)
    }

    /// Checks everything that does not need the initial field.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid()?;
        Self::require(self.t_end, "t_end")?;
        let dt = match Self::require(self.dt, "dt")? {
            DtChoice::Auto => 1.0,
            DtChoice::Fixed(d) => d,
        };
        self.solver_with_dt(g, dt).validate()?;
        if !(self.holder_alpha > 0.0 && self.holder_alpha <= 1.0) {
            return Err(Error::Config(format!("holder_alpha = {} must lie in (0, 1]", self.holder_alpha)));
        }
        Ok(())
    }

    fn solver_with_dt(&self, grid: Grid, dt: f64) -> SolverConfig {
        SolverConfig {
            grid,
            alpha: self.alpha,
            dt,
            t_end: self.t_end.unwrap_or(0.0),
            frame_speed: self.frame_speed,
            symmetrize_every: self.symmetrize_every,
            snapshot_interval: self.snapshot_interval,
            hyperviscosity_coeff: self.hyperviscosity_coeff,
            hyperviscosity_order: self.hyperviscosity_order,
            hyperviscosity_start: self.hyperviscosity_start,
            mean_flow: self.mean_flow,
        }
    }

    /// Solver configuration, resolving `dt = auto` against `initial`.
    pub fn solver_config(&self, initial: &ScalarField) -> Result<SolverConfig> {
        self.validate()?;
        let g = self.grid()?;
        let mut cfg = self.solver_with_dt(g, 1.0);
        cfg.dt = match self.dt.unwrap() {
            DtChoice::Fixed(d) => d,
            DtChoice::Auto => auto_dt(initial, &cfg)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the initial field named by `initial`.
    pub fn initial_field(&self) -> Result<ScalarField> {
        let g = self.grid()?;
        match &self.initial {
            InitialSpec::Lamb => {
                let d = DipoleSpec::lamb();
                Ok(ScalarField::from_fn(g, |x| d.vorticity_at(x)))
            }
            InitialSpec::Perturbed => Ok(theorem2_data(&self.perturbation, g)?.0),
            InitialSpec::File(p) => {
                let (f, _) = read_snapshot(p)?;
                if f.grid != g {
                    return Err(Error::Config(format!(
                        "{}: grid n = {}, L = {} does not match the config",
                        p.display(),
                        f.grid.n,
                        f.grid.half_extent
                    )));
                }
                Ok(f)
            }
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    let mut seen = std::collections::HashSet::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", no + 1)));
        };
        let k = k.trim();
        if !seen.insert(k.to_string()) {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", no + 1)));
        }
        cfg.set(k, v).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("line {}: {m}", no + 1)),
            other => other,
        })?;
    }
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Shortest round-trip decimal form.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Appends rows to `series.csv`, flushing after each one.
#[derive(Debug)]
pub struct SeriesWriter {
    file: fs::File,
}

impl SeriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = fs::File::create(path)?;
        writeln!(file, "{}", DiagnosticsRecord::COLUMNS.join(","))?;
        Ok(SeriesWriter { file })
    }

    pub fn push(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let row: Vec<String> = r.values().iter().map(|&v| fmt_f64(v)).collect();
        writeln!(self.file, "{}", row.join(","))?;
        self.file.flush()?;
        Ok(())
    }
}

pub fn write_series(path: &Path, rows: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = SeriesWriter::create(path)?;
    rows.iter().try_for_each(|r| w.push(r))
}

/// Numeric CSV with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format {
                offset: 0,
                reason: format!("missing column '{name}'"),
            })?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        offset: 0,
        reason: "empty file, no header".into(),
    })?;
    let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    let mut offset = header.len() + 1;
    for line in lines {
        if !line.trim().is_empty() {
            let row: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format {
                    offset: offset as u64,
                    reason: format!("unparsable row '{line}'"),
                })?;
            if row.len() != columns.len() {
                return format_err(offset, format!("row has {} fields, header {}", row.len(), columns.len()));
            }
            rows.push(row);
        }
        offset += line.len() + 1;
    }
    Ok(Table { columns, rows })
}

/// Reads `series.csv`, requiring exactly the documented columns in order.
pub fn read_series(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let t = parse_table(&fs::read_to_string(path)?)?;
    if t.columns != DiagnosticsRecord::COLUMNS {
        for c in DiagnosticsRecord::COLUMNS {
            t.column(c)?;
        }
        return format_err(0, "series columns out of order");
    }
    Ok(t
        .rows
        .iter()
        .map(|r| DiagnosticsRecord::from_values(&r[..].try_into().unwrap()))
        .collect())
}

/// `label,x1,x2` rows, header optional.
pub fn parse_points(text: &str, origin_time: f64) -> Result<TracerSet> {
    let mut set = TracerSet::new(origin_time);
    let mut offset = 0;
    for (no, line) in text.lines().enumerate() {
        let l = line.trim();
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        let skip = l.is_empty() || l.starts_with('#') || (no == 0 && fields.first() == Some(&"label"));
        if !skip {
            let parsed = if fields.len() == 3 {
                fields[1].parse::<f64>().ok().zip(fields[2].parse::<f64>().ok())
            } else {
                None
            };
            match parsed {
                Some((a, b)) if a.is_finite() && b.is_finite() => set.push(fields[0], [a, b]),
                _ => return format_err(offset, format!("expected label,x1,x2 on line {}", no + 1)),
            }
        }
        offset += line.len() + 1;
    }
    if set.is_empty() {
        return format_err(0, "no points");
    }
    Ok(set)
}

/// `t,label,x1,x2` rows.
pub fn write_trajectories(path: &Path, log: &TrajectoryLog) -> Result<()> {
    let mut s = String::from("t,label,x1,x2\n");
    for (t, row) in log.times.iter().zip(&log.positions) {
        for (label, x) in log.labels.iter().zip(row) {
            let _ = writeln!(s, "{},{},{},{}", fmt_f64(*t), label, fmt_f64(x[0]), fmt_f64(x[1]));
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_trajectories(path: &Path) -> Result<TrajectoryLog> {
    let text = fs::read_to_string(path)?;
    let mut log = TrajectoryLog::default();
    let mut offset = 0;
    for (no, line) in text.lines().enumerate() {
        if no == 0 || line.trim().is_empty() {
            offset += line.len() + 1;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let nums = (f.len() == 4)
            .then(|| (f[0].parse::<f64>(), f[2].parse::<f64>(), f[3].parse::<f64>()));
        let Some((Ok(t), Ok(a), Ok(b))) = nums else {
            return format_err(offset, format!("expected t,label,x1,x2 on line {}", no + 1));
        };
        if log.times.last() != Some(&t) {
            log.times.push(t);
            log.positions.push(Vec::new());
        }
        let row = log.positions.last_mut().unwrap();
        if log.times.len() == 1 {
            log.labels.push(f[1].to_string());
        } else if log.labels.get(row.len()).map(String::as_str) != Some(f[1]) {
            return format_err(offset, format!("label order differs at line {}", no + 1));
        }
        row.push([a, b]);
        offset += line.len() + 1;
    }
    Ok(log)
}

/// Outcome recorded in the manifest.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Running,
    Complete,
    Aborted(String),
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunStatus::Running => f.write_str("running"),
            RunStatus::Complete => f.write_str("complete"),
            RunStatus::Aborted(m) => write!(f, "aborted: {m}"),
        }
    }
}

/// Contents of `manifest.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub status: RunStatus,
    pub config_text: String,
    pub config_hash: String,
    pub code_version: String,
    pub dt: Option<f64>,
    /// Seconds since the Unix epoch.
    pub start_time: f64,
    pub end_time: Option<f64>,
    pub snapshots: Vec<String>,
    pub drift: Option<LedgerDrift>,
    pub flags: Vec<(String, bool)>,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(cfg: &Config) -> Self {
        RunManifest {
            status: RunStatus::Running,
            config_text: cfg.to_text(),
            config_hash: cfg.hash(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            dt: None,
            start_time: unix_now(),
            end_time: None,
            snapshots: Vec::new(),
            drift: None,
            flags: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "status = {}", self.status);
        let _ = writeln!(s, "code_version = {}", self.code_version);
        let _ = writeln!(s, "config_hash = {}", self.config_hash);
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "dt_used = {}", fmt_f64(dt));
        }
        let _ = writeln!(s, "start_time = {:.3}", self.start_time);
        if let Some(e) = self.end_time {
            let _ = writeln!(s, "end_time = {e:.3}");
            let _ = writeln!(s, "wall_clock_seconds = {:.3}", e - self.start_time);
        }
        if let Some(d) = &self.drift {
            let _ = writeln!(s, "drift_mass_plus = {:.6e}", d.mass_plus);
            let _ = writeln!(s, "drift_l1 = {:.6e}", d.l1);
            let _ = writeln!(s, "drift_l2 = {:.6e}", d.l2);
            let _ = writeln!(s, "drift_impulse = {:.6e}", d.impulse);
            let _ = writeln!(s, "drift_energy = {:.6e}", d.energy);
            let _ = writeln!(s, "linf_growth = {:.6e}", d.linf_growth);
        }
        for (k, v) in &self.flags {
            let _ = writeln!(s, "flag_{k} = {v}");
        }
        let _ = writeln!(s, "snapshot_count = {}", self.snapshots.len());
        for name in &self.snapshots {
            let _ = writeln!(s, "snapshot = {name}");
        }
        s.push_str("[config]\n");
        s.push_str(&self.config_text);
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// `key = value` pairs of a manifest above its `[config]` section.
pub fn read_manifest(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .take_while(|l| l.trim() != "[config]")
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}
