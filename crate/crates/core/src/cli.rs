//! The `lamb` command line: argument parsing, subcommand dispatch and the
//! exit-code convention (0 success, 1 runtime error, 2 usage error). Errors
//! are reported as one line `error: kind=<kind> msg=<message>` on stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand};

use crate::diagnostics::{Diagnostics, DiagnosticsConfig};
use crate::dipole::{shell_table, DipoleSpec};
use crate::error::Error;
use crate::grid::{Grid, ScalarField};
use crate::io::{
    read_config, read_manifest, read_series, read_snapshot_dir, read_trajectories, snapshot_name, unix_now,
    write_snapshot, write_trajectories, Config, RunManifest, RunStatus, SeriesWriter, SnapshotMeta, KEYS,
};
use crate::perturbation::theorem2_data;
use crate::report::{checks, lag_margin, render, SeriesSummary};
use crate::solver::{LedgerDrift, MeanFlow, SimState, Solver, SolverConfig};
use crate::tracer::{advect_frames, BoundaryPolicy, FrameSeries};

/// Failure of a subcommand, split by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(Error),
    Runtime(Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn line(&self) -> String {
        let e = match self {
            CliError::Usage(e) | CliError::Runtime(e) => e,
        };
        let msg = e.to_string().replace('\n', " ");
        format!("error: kind={} msg={}", e.kind(), msg)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(e: Error) -> CliResult<T> {
    Err(CliError::Usage(e))
}

trait Ctx<T> {
    fn usage(self) -> CliResult<T>;
    fn runtime(self) -> CliResult<T>;
}

impl<T> Ctx<T> for crate::Result<T> {
    fn usage(self) -> CliResult<T> {
        self.map_err(CliError::Usage)
    }
    fn runtime(self) -> CliResult<T> {
        self.map_err(CliError::Runtime)
    }
}

impl<T> Ctx<T> for std::io::Result<T> {
    fn usage(self) -> CliResult<T> {
        self.map_err(|e| CliError::Usage(e.into()))
    }
    fn runtime(self) -> CliResult<T> {
        self.map_err(|e| CliError::Runtime(e.into()))
    }
}

/// `--key value` for every config key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides(pub Vec<(String, String)>);

impl FromArgMatches for Overrides {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        Ok(Overrides(
            KEYS.iter()
                .filter_map(|k| m.get_one::<String>(k.key).map(|v| (k.key.to_string(), v.clone())))
                .collect(),
        ))
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl Args for Overrides {
    fn augment_args(cmd: Command) -> Command {
        KEYS.iter().fold(cmd, |c, k| {
            c.arg(
                Arg::new(k.key)
                    .long(k.key)
                    .value_name("VALUE")
                    .allow_hyphen_values(true)
                    .help_heading("Config keys")
                    .help(format!("{} [default: {}] [unit: {}]", k.help, k.default, k.unit)),
            )
        })
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) -> crate::Result<()> {
        self.0.iter().try_for_each(|(k, v)| cfg.set(k, v))
    }
}

#[derive(Debug, Parser)]
#[command(name = "lamb", version, about = "Lamb dipole simulator and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Closed-form dipole utilities.
    #[command(subcommand)]
    Dipole(DipoleCmd),
    /// Generate perturbed initial data and its distance report.
    Perturb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Distance budget the report is compared against.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Integrate a configuration, writing snapshots, series.csv and manifest.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute the diagnostics series from a snapshot directory.
    Diagnose {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha_holder: f64,
        /// Level-set reference maximum, default max of the dipole.
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value = "free-space")]
        mean_flow: MeanFlow,
    },
    /// Advect tracer points through the velocity of a snapshot directory.
    Trace {
        #[arg(long)]
        snapshots: PathBuf,
        /// CSV of label,x1,x2 rows in lab coordinates.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Release time, default the first snapshot.
        #[arg(long)]
        t0: Option<f64>,
        /// Final time, default the last snapshot.
        #[arg(long)]
        t_end: Option<f64>,
        /// abort | unwrap (periodic in x1).
        #[arg(long, default_value = "abort")]
        boundary: BoundaryPolicy,
        #[arg(long, default_value = "free-space")]
        mean_flow: MeanFlow,
    },
    /// Acceptance summary over a run directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        window_start: f64,
        #[arg(long, default_value_t = 20.0)]
        window_end: f64,
        /// Tracer label used for the lag check when traj.csv is present.
        #[arg(long, default_value = "z")]
        label: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DipoleCmd {
    /// Sample the dipole vorticity on a grid into a snapshot file.
    Sample {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        extent: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulate the shell mass S(kappa) and S(kappa)/kappa^3.
    CheckLemma {
        #[arg(long, default_value_t = 0.25)]
        kappa_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Output CSV, stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the command line and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=usage msg={first}");
            return 2;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.code()
        }
    }
}

pub fn execute(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Dipole(DipoleCmd::Sample { grid, extent, out }) => dipole_sample(grid, extent, &out),
        Cmd::Dipole(DipoleCmd::CheckLemma { kappa_max, step, out }) => check_lemma(kappa_max, step, out.as_deref()),
        Cmd::Perturb {
            config,
            out,
            report,
            delta,
            overrides,
        } => perturb(&config, &out, &report, delta, &overrides),
        Cmd::Run { config, out, overrides } => run(&config, &out, &overrides),
        Cmd::Diagnose {
            snapshots,
            out,
            alpha_holder,
            m,
            mean_flow,
        } => diagnose(&snapshots, &out, alpha_holder, m, mean_flow),
        Cmd::Trace {
            snapshots,
            points,
            out,
            t0,
            t_end,
            boundary,
            mean_flow,
        } => trace(&snapshots, &points, &out, t0, t_end, boundary, mean_flow),
        Cmd::Report {
            dir,
            out,
            window_start,
            window_end,
            label,
        } => report(&dir, out.as_deref(), (window_start, window_end), &label),
    }
}

fn need_file(p: &Path, what: &str) -> CliResult<()> {
    if p.is_file() {
        Ok(())
    } else {
        usage(Error::Config(format!("{what} file not found: {}", p.display())))
    }
}

fn need_dir(p: &Path, what: &str) -> CliResult<()> {
    if p.is_dir() {
        Ok(())
    } else {
        usage(Error::Config(format!("{what} directory not found: {}", p.display())))
    }
}

fn dipole_sample(n: usize, l: f64, out: &Path) -> CliResult<()> {
    let g = Grid::new(n, l).usage()?;
    let d = DipoleSpec::lamb();
    let f = ScalarField::from_fn(g, |x| d.vorticity_at(x));
    write_snapshot(out, &f, &SnapshotMeta::default()).runtime()
}

fn check_lemma(kappa_max: f64, step: f64, out: Option<&Path>) -> CliResult<()> {
    let rows = shell_table(&DipoleSpec::lamb(), kappa_max, step).usage()?;
    let mut s = String::from("kappa,S,S_over_kappa3\n");
    for r in &rows {
        s.push_str(&format!("{:?},{:?},{:?}\n", r.kappa, r.mass, r.ratio));
    }
    match out {
        Some(p) => fs::write(p, s).runtime(),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn load_config(path: &Path, overrides: &Overrides) -> CliResult<Config> {
    need_file(path, "config")?;
    let mut cfg = read_config(path).usage()?;
    overrides.apply(&mut cfg).usage()?;
    Ok(cfg)
}

fn perturb(config: &Path, out: &Path, report: &Path, delta: Option<f64>, overrides: &Overrides) -> CliResult<()> {
    let cfg = load_config(config, overrides)?;
    let g = cfg.grid().usage()?;
    let (field, rep) = theorem2_data(&cfg.perturbation, g).usage()?;
    write_snapshot(out, &field, &SnapshotMeta::default()).runtime()?;
    let mut s = String::from("l1_dist,l2_dist,impulse_dist,distance,measured_m,a1_area,a0_area");
    if delta.is_some() {
        s.push_str(",delta,within_delta");
    }
    s.push('\n');
    s.push_str(&format!(
        "{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
        rep.l1_dist,
        rep.l2_dist,
        rep.impulse_dist,
        rep.distance(),
        rep.measured_m,
        rep.a1_area,
        rep.a0_area
    ));
    if let Some(d) = delta {
        s.push_str(&format!(",{d:?},{}", u8::from(rep.distance() <= d)));
    }
    s.push('\n');
    fs::write(report, s).runtime()
}

/// Runs a validated configuration into `out`, which must not be needed
/// before validation. The manifest is written before the first step and
/// rewritten on completion or abort.
fn run(config: &Path, out: &Path, overrides: &Overrides) -> CliResult<()> {
    let cfg = load_config(config, overrides)?;
    cfg.validate().usage()?;
    let initial = cfg.initial_field().usage()?;
    let scfg = cfg.solver_config(&initial).usage()?;
    let mut solver = Solver::new(scfg.clone()).usage()?;
    if scfg.symmetrize_every > 0 && initial.odd_symmetry_residual() > 1e-10 * initial.max_abs().max(1.0) {
        return usage(Error::Domain("initial field is not odd in x2".into()));
    }

    let snap_dir = out.join("snapshots");
    fs::create_dir_all(&snap_dir).runtime()?;
    let manifest_path = out.join("manifest.txt");
    let mut manifest = RunManifest::new(&cfg);
    manifest.dt = Some(scfg.effective_dt());
    manifest.write(&manifest_path).runtime()?;

    let mut series = SeriesWriter::create(&out.join("series.csv")).runtime()?;
    let mut diag = Diagnostics::new(DiagnosticsConfig {
        holder_alpha: cfg.holder_alpha,
        frame_speed: scfg.frame_speed,
        ..Default::default()
    });
    let meta = |t: f64| SnapshotMeta {
        time: t,
        frame_speed: scfg.frame_speed,
        alpha: scfg.alpha,
    };
    let mut first: Option<crate::solver::Ledger> = None;
    let mut drift = LedgerDrift::default();
    let mut names = Vec::new();
    let (mut multimodal, mut empty) = (false, false);
    let result = {
        let mut sink = |st: &SimState, s: &mut Solver| -> crate::Result<()> {
            let name = snapshot_name(st.time);
            write_snapshot(&snap_dir.join(&name), &st.field, &meta(st.time))?;
            names.push(name);
            let u = s.velocity(&st.field);
            let (rec, flags) = diag.measure(s.spectral(), &st.field, &u, st.time)?;
            multimodal |= flags.multimodal_shift;
            empty |= flags.empty_level_set;
            series.push(&rec)?;
            let base = *first.get_or_insert(st.ledger);
            drift = drift.max(&st.ledger.drift_from(&base));
            Ok(())
        };
        solver.run(initial, &mut sink)
    };
    manifest.end_time = Some(unix_now());
    manifest.snapshots = names;
    manifest.drift = first.map(|_| drift);
    manifest.flags = vec![
        ("multimodal_shift".into(), multimodal),
        ("empty_level_set".into(), empty),
    ];
    manifest.status = match &result {
        Ok(_) => RunStatus::Complete,
        Err(e) => RunStatus::Aborted(format!("{} {}", e.kind(), e)),
    };
    manifest.write(&manifest_path).runtime()?;
    result.map(|_| ()).runtime()
}

fn velocity_solver(field: &ScalarField, meta: &SnapshotMeta, mean_flow: MeanFlow) -> crate::Result<Solver> {
    let mut c = SolverConfig::new(field.grid, 1.0, 0.0);
    c.alpha = meta.alpha;
    c.frame_speed = meta.frame_speed;
    c.mean_flow = mean_flow;
    Solver::new(c)
}

fn load_snapshots(dir: &Path) -> CliResult<Vec<(PathBuf, ScalarField, SnapshotMeta)>> {
    need_dir(dir, "snapshot")?;
    let snaps = read_snapshot_dir(dir).usage()?;
    if snaps.is_empty() {
        return usage(Error::Config(format!("no .fld snapshots in {}", dir.display())));
    }
    Ok(snaps)
}

fn diagnose(dir: &Path, out: &Path, alpha_holder: f64, m: Option<f64>, mean_flow: MeanFlow) -> CliResult<()> {
    if !(alpha_holder > 0.0 && alpha_holder <= 1.0) {
        return usage(Error::Config(format!("alpha-holder = {alpha_holder} must lie in (0, 1]")));
    }
    let snaps = load_snapshots(dir)?;
    let meta0 = snaps[0].2;
    let mut diag = Diagnostics::new(DiagnosticsConfig {
        m: m.unwrap_or_else(|| DipoleSpec::lamb().max_vorticity()),
        holder_alpha: alpha_holder,
        frame_speed: meta0.frame_speed,
    });
    let mut solver = velocity_solver(&snaps[0].1, &meta0, mean_flow).usage()?;
    let mut w = SeriesWriter::create(out).runtime()?;
    for (_, f, meta) in &snaps {
        if f.grid != snaps[0].1.grid || meta.frame_speed != meta0.frame_speed || meta.alpha != meta0.alpha {
            return Err(CliError::Runtime(Error::Config("snapshots differ in grid, frame or alpha".into())));
        }
        let u = solver.velocity(f);
        let (rec, _) = diag.measure(solver.spectral(), f, &u, meta.time).runtime()?;
        w.push(&rec).runtime()?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn trace(
    dir: &Path,
    points: &Path,
    out: &Path,
    t0: Option<f64>,
    t_end: Option<f64>,
    boundary: BoundaryPolicy,
    mean_flow: MeanFlow,
) -> CliResult<()> {
    need_file(points, "points")?;
    let snaps = load_snapshots(dir)?;
    let meta0 = snaps[0].2;
    let t0 = t0.unwrap_or(meta0.time);
    let t_end = t_end.unwrap_or(snaps.last().unwrap().2.time);
    let text = fs::read_to_string(points).usage()?;
    let set = crate::io::parse_points(&text, t0).usage()?;
    let mut solver = velocity_solver(&snaps[0].1, &meta0, mean_flow).usage()?;
    let mut frames = FrameSeries::new(meta0.frame_speed);
    for (_, f, meta) in &snaps {
        frames.push(meta.time, solver.velocity(f)).usage()?;
    }
    match advect_frames(&set, &frames, t_end, boundary) {
        Ok(log) => write_trajectories(out, &log).runtime(),
        Err(Error::TracerExit { label, t, partial }) => {
            write_trajectories(out, &partial).runtime()?;
            Err(CliError::Runtime(Error::TracerExit { label, t, partial }))
        }
        Err(e) => usage(e),
    }
}

fn report(dir: &Path, out: Option<&Path>, window: (f64, f64), label: &str) -> CliResult<()> {
    need_dir(dir, "run")?;
    let series_path = dir.join("series.csv");
    need_file(&series_path, "series")?;
    let rows = read_series(&series_path).usage()?;
    let Some(summary) = SeriesSummary::new(&rows, window) else {
        return usage(Error::Format {
            offset: 0,
            reason: "series.csv has no rows".into(),
        });
    };
    let manifest = dir.join("manifest.txt");
    let drift_l1 = if manifest.is_file() {
        read_manifest(&manifest)
            .usage()?
            .into_iter()
            .find(|(k, _)| k == "drift_l1")
            .and_then(|(_, v)| v.parse().ok())
    } else {
        None
    };
    let traj = dir.join("traj.csv");
    let lag = if traj.is_file() {
        let log = read_trajectories(&traj).usage()?;
        lag_margin(&rows, &log, label, 1.0, window.1)
    } else {
        None
    };
    let text = render(&checks(&summary, drift_l1, lag));
    match out {
        Some(p) => fs::write(p, text).runtime(),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
