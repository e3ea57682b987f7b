//! Command-line surface: config ingestion, orchestration, CSV/SVG output.
//!
//! Every flag of the run commands can also come from a JSON file passed with
//! `--params`; flags given on the command line win.

mod manifest;
mod svg;

pub use manifest::{RunManifest, SCHEMA_VERSION};
pub use svg::Canvas;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{shadow_arc, BoundaryPoint, GeometryError, Horoball, Point};
use crate::group::{
    classify, enumerate_orbit, load_group_spec, read_orbit_csv, write_orbit_csv, GroupError,
    GroupSpec, Isometry, OrbitBall,
};
use crate::horoflow::{
    doubling_ratio, CuspMassProfile, CuspMassSummary, HoroflowError, ProfileOptions, UnitVector,
};
use crate::patterson::{
    build_patterson, cyclic_orbit_distances, estimate_delta, growth_condition_check, write_measure,
    AtomicBoundaryMeasure, CountingProfile, CriticalExponentEstimate, PattersonError,
    DEFAULT_MIN_COUNT,
};
use crate::shadows::{
    parse_target, radial_point, verify_shadow_lemma, HoroballIndex, ShadowError, ShadowOptions,
    DEFAULT_MAX_LOG_DRIFT,
};

pub const DEFAULT_S_FACTOR: f64 = 1.02;
pub const DEFAULT_T_GRID: &str = "0:8:0.5";
pub const DEFAULT_R_GRID: &str = "log:0.1:1000:4";
pub const DEFAULT_N_GRID: &str = "0:8:0.5";
pub const DEFAULT_MIN_DIAMETER: f64 = 1e-4;
pub const DEFAULT_GROWTH_CAP: f64 = 4.0;
/// Radius of the parabolic-subgroup orbit used for `δ̂_Π`.
pub const PARABOLIC_RADIUS: f64 = 30.0;
/// Smallest disk diameter of horoballs drawn in SVG output.
const DRAWN_DIAMETER: f64 = 0.005;
const DRAWN_POINTS: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Patterson(#[from] PattersonError),
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Horoflow(#[from] HoroflowError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Usage(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    fn is_budget(&self) -> bool {
        let group = match self {
            CliError::Group(g) => Some(g),
            CliError::Shadow(ShadowError::Group(g)) => Some(g),
            CliError::Horoflow(HoroflowError::Shadow(ShadowError::Group(g))) => Some(g),
            _ => None,
        };
        matches!(group, Some(GroupError::Budget { .. }))
    }

    /// 1 validation, 2 budget, 3 internal.
    pub fn exit_code(&self) -> i32 {
        if self.is_budget() {
            2
        } else if matches!(self, CliError::Io { .. } | CliError::Internal(_)) {
            3
        } else {
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "horoshadow",
    version,
    about = "Orbits, Patterson measures, shadows and horocyclic averages"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Group config validation.
    Group {
        #[command(subcommand)]
        action: GroupAction,
    },
    /// Orbit points within radius T, as CSV.
    Orbit(Run),
    /// Orbit counting profile and critical exponent estimate.
    Delta(Run),
    /// Shell growth of the cusp stabilizer against e^{δ_Π T}.
    Growth(Run),
    /// Atomic Patterson measure file.
    Patterson(Run),
    /// Shadow masses along a ray.
    Shadow(Run),
    /// Cusp-mass fractions of horocyclic averages and doubling ratios.
    Horo(Run),
    /// SVG from earlier outputs.
    Render(Run),
}

#[derive(Subcommand, Debug)]
pub enum GroupAction {
    Check { config: PathBuf },
}

#[derive(Args, Debug)]
pub struct Run {
    /// Group config (JSON).
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Opts,
}

/// Run options. The same keys (kebab-case) are accepted in a `--params` file.
#[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// Orbit radius T.
    #[arg(short = 'T', long)]
    pub radius: Option<f64>,
    /// Fit window `lo,hi` for exponent estimates and growth checks.
    #[arg(long)]
    pub window: Option<String>,
    /// Patterson exponent (overrides --s-factor).
    #[arg(long)]
    pub s: Option<f64>,
    /// Patterson exponent as a multiple of δ̂.
    #[arg(long)]
    pub s_factor: Option<f64>,
    /// Shadow target: `radial:WORD`, `cusp:WORD` or a boundary point.
    #[arg(long)]
    pub xi: Option<String>,
    /// Grid as `a:b:step`, `log:a:b:per_decade` or a comma list.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Periodic word whose attracting point is u⁻.
    #[arg(long)]
    pub u: Option<String>,
    /// Target u⁺, same syntax as --xi.
    #[arg(long)]
    pub u_plus: Option<String>,
    #[arg(long)]
    pub r_grid: Option<String>,
    #[arg(long)]
    pub n_grid: Option<String>,
    /// Lower end of the slope fit of log sup_r f against N.
    #[arg(long)]
    pub n_min: Option<f64>,
    #[arg(long)]
    pub min_atoms: Option<usize>,
    #[arg(long)]
    pub max_unresolved: Option<f64>,
    /// Smallest listed horoball, as a disk-chart diameter.
    #[arg(long)]
    pub min_diameter: Option<f64>,
    /// Growth-check cap on max(a_T/e^{δT}, e^{δT}/a_T).
    #[arg(long)]
    pub cap: Option<f64>,
    /// Orbit CSV for `render`.
    #[arg(long)]
    pub orbit: Option<PathBuf>,
    /// Shadow CSV for `render`.
    #[arg(long)]
    pub shadow: Option<PathBuf>,
    /// Cusp-mass CSV for `render`.
    #[arg(long)]
    pub horo: Option<PathBuf>,
    /// Group config (same as the positional argument).
    #[arg(long = "config", id = "config_flag")]
    pub config: Option<PathBuf>,
    /// Output directory (`render`: output file).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// JSON file with defaults for any of these options.
    #[arg(long)]
    #[serde(skip)]
    pub params: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($a:expr, $b:expr, $($f:ident),*) => {
        Opts { $($f: $a.$f.or($b.$f),)* params: None }
    };
}

impl Opts {
    /// Fields set here win over `other`.
    pub fn or(self, other: Opts) -> Opts {
        merge_fields!(
            self,
            other,
            radius,
            window,
            s,
            s_factor,
            xi,
            t_grid,
            u,
            u_plus,
            r_grid,
            n_grid,
            n_min,
            min_atoms,
            max_unresolved,
            min_diameter,
            cap,
            orbit,
            shadow,
            horo,
            config,
            out
        )
    }

    fn resolve(run: Run) -> Result<Opts, CliError> {
        let mut opts = run.opts;
        if let Some(c) = run.config {
            opts.config = Some(c);
        }
        let from_file = match &opts.params {
            None => Opts::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(io_err(p))?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::Usage(format!(
                        "{}: line {}, column {}: {e}",
                        p.display(),
                        e.line(),
                        e.column()
                    ))
                })?
            }
        };
        Ok(opts.or(from_file))
    }

    fn radius(&self) -> Result<f64, CliError> {
        self.radius
            .ok_or_else(|| CliError::Usage("orbit radius -T is required".into()))
    }

    fn window(&self) -> Result<Option<(f64, f64)>, CliError> {
        self.window
            .as_deref()
            .map(|w| {
                let v = parse_list(w)?;
                match v[..] {
                    [lo, hi] => Ok((lo, hi)),
                    _ => Err(CliError::Usage(format!("window {w:?} must be `lo,hi`"))),
                }
            })
            .transpose()
    }
}

fn parse_num(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Usage(format!("bad number {s:?}")))
}

fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(parse_num).collect()
}

/// `a:b:step` (inclusive), `log:a:b:k` (k points per decade from a to b) or
/// a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Usage(format!("bad grid {s:?}"));
    let grid = match parts[..] {
        ["log", a, b, k] => {
            let (a, b, k) = (parse_num(a)?, parse_num(b)?, parse_num(k)?);
            if !(a > 0.0 && b >= a && k >= 1.0) {
                return Err(bad());
            }
            let n = ((b / a).log10() * k + 1e-9).floor() as usize;
            (0..=n).map(|i| a * 10f64.powf(i as f64 / k)).collect()
        }
        [a, b, step] => {
            let (a, b, step) = (parse_num(a)?, parse_num(b)?, parse_num(step)?);
            if !(step > 0.0 && b >= a) {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| a + i as f64 * step).collect()
        }
        [_] => parse_list(s)?,
        _ => return Err(bad()),
    };
    if grid.is_empty() || grid.len() > 100_000 {
        return Err(bad());
    }
    Ok(grid)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One command run: resolved options, manifest and output directory.
struct Session {
    manifest: RunManifest,
    out: PathBuf,
    start: Instant,
}

impl Session {
    fn new(command: &str, config_hash: &str, opts: &Opts, extra: BTreeMap<String, String>) -> Self {
        let mut params = BTreeMap::new();
        let value = serde_json::to_value(opts).expect("serializable");
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                if v.is_null()
                    || matches!(k.as_str(), "out" | "config" | "orbit" | "shadow" | "horo")
                {
                    continue;
                }
                params.insert(k, v.to_string().trim_matches('"').to_string());
            }
        }
        params.extend(extra);
        Session {
            manifest: RunManifest::new(command, config_hash, params),
            out: opts.out.clone().unwrap_or_else(|| PathBuf::from(".")),
            start: Instant::now(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(io_err(&self.out))?;
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(io_err(&path))?;
        self.manifest.outputs.push(name.to_string());
        Ok(path)
    }

    fn csv(
        &mut self,
        name: &str,
        extra_header: &[String],
        body: &str,
    ) -> Result<PathBuf, CliError> {
        let mut text = self.manifest.csv_header();
        for h in extra_header {
            text.push_str("# ");
            text.push_str(h);
            text.push('\n');
        }
        text.push_str(body);
        self.write(name, &text)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        #[derive(Serialize)]
        struct Stamped<'a, T> {
            manifest_hash: String,
            #[serde(flatten)]
            value: &'a T,
        }
        let mut text = serde_json::to_string_pretty(&Stamped {
            manifest_hash: self.manifest.hash(),
            value,
        })
        .map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        let text = self.manifest.to_json();
        self.write("manifest.json", &text)?;
        println!(
            "manifest {} ({:.2} s)",
            self.manifest.hash(),
            self.manifest.wall_time_s
        );
        Ok(())
    }
}

fn load(opts: &Opts) -> Result<GroupSpec, CliError> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("a group config is required".into()))?;
    if !path.exists() {
        return Err(CliError::MissingInput(path.display().to_string()));
    }
    Ok(load_group_spec(path)?)
}

/// `δ̂` by least squares on `log N(T)`; needs at least two complete shells.
pub fn estimate_ball_delta(
    ball: &OrbitBall,
    window: Option<(f64, f64)>,
) -> Result<(CountingProfile, CriticalExponentEstimate), CliError> {
    let profile = CountingProfile::from_ball(ball);
    if profile.shells.len() < 2 {
        return Err(PattersonError::InsufficientData(format!(
            "radius {} gives {} complete unit shells, need at least 2",
            ball.radius,
            profile.shells.len()
        ))
        .into());
    }
    let window = window.unwrap_or_else(|| profile.default_window(DEFAULT_MIN_COUNT));
    let est = estimate_delta(&profile, window, DEFAULT_MIN_COUNT)?;
    Ok((profile, est))
}

/// `δ̂_Π` of the cusp stabilizer from its cyclic orbit, window `[6, 29]`.
pub fn estimate_parabolic_delta(
    spec: &GroupSpec,
) -> Result<(CountingProfile, CriticalExponentEstimate), CliError> {
    let mark = spec
        .cusp_mark()
        .or(spec.parabolic_marks.first())
        .ok_or_else(|| CliError::Usage("config declares no parabolic mark".into()))?;
    let dists = cyclic_orbit_distances(&mark.m, spec.basepoint, PARABOLIC_RADIUS);
    let profile = CountingProfile::from_distances(&dists, PARABOLIC_RADIUS);
    let est = estimate_delta(&profile, (6.0, PARABOLIC_RADIUS - 1.0), 1)?;
    Ok((profile, est))
}

fn measure_for(
    spec: &GroupSpec,
    ball: &OrbitBall,
    opts: &Opts,
    session: &mut Session,
) -> Result<(AtomicBoundaryMeasure, f64), CliError> {
    let (_, est) = estimate_ball_delta(ball, opts.window()?)?;
    let s = opts
        .s
        .unwrap_or(opts.s_factor.unwrap_or(DEFAULT_S_FACTOR) * est.delta_hat);
    let mut mu = build_patterson(ball, s, est.delta_hat)?;
    mu.spec_hash = spec.hash.clone();
    session
        .manifest
        .delta_hats
        .insert("delta_hat".into(), est.delta_hat);
    session.manifest.stamp_measure(&mu, mu.len());
    Ok((mu, est.delta_hat))
}

fn cmd_group_check(path: &Path) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(path.display().to_string()));
    }
    let spec = match load_group_spec(path) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL {}: {e}", path.display());
            return Err(e.into());
        }
    };
    println!(
        "PASS {} ({}), config hash {}",
        spec.name,
        path.display(),
        spec.hash
    );
    for g in &spec.generators {
        let order = g.order.map(|n| format!(", order {n}")).unwrap_or_default();
        println!(
            "  generator {}: {}{order}, trace {}",
            g.name,
            classify(&g.m).name(),
            g.m.trace()
        );
    }
    for m in &spec.parabolic_marks {
        println!(
            "  parabolic mark {} = {} fixing {}",
            m.name,
            spec.render_word(&m.word),
            m.fixed
        );
    }
    if let Some(c) = &spec.cusp {
        println!(
            "  cusp horoball at {} (disk diameter {:.6})",
            c.horoball.center,
            c.horoball.disk_diameter()
        );
    }
    if let Some(cert) = &spec.certificate {
        for check in &cert.checks {
            println!("  ok: {check}");
        }
    }
    Ok(())
}

fn cmd_orbit(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let t = opts.radius()?;
    let mut session = Session::new("orbit", &spec.hash, &opts, BTreeMap::new());
    let ball = enumerate_orbit(&spec, t)?;
    let mut body = Vec::new();
    write_orbit_csv(
        &ball,
        &spec.names(),
        &[format!("radius {t}"), format!("points {}", ball.len())],
        &mut body,
    )
    .map_err(|e| CliError::Internal(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Internal(e.to_string()))?;
    session.csv("orbit.csv", &[], &body)?;
    println!("{}: {} orbit points within {t}", spec.name, ball.len());
    session.finish()
}

fn cmd_delta(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let t = opts.radius()?;
    let mut session = Session::new("delta", &spec.hash, &opts, BTreeMap::new());
    let ball = enumerate_orbit(&spec, t)?;
    let (profile, est) = estimate_ball_delta(&ball, opts.window()?)?;
    session
        .manifest
        .delta_hats
        .insert("delta_hat".into(), est.delta_hat);
    session.csv("delta.csv", &[format!("radius {t}")], &profile.to_csv())?;
    session.json("delta_summary.json", &est)?;
    println!(
        "delta_hat {:.6} +- {:.6} over [{}, {}]",
        est.delta_hat, est.stderr, est.window.0, est.window.1
    );
    session.finish()
}

fn cmd_growth(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let mut session = Session::new("growth", &spec.hash, &opts, BTreeMap::new());
    let (profile, est) = estimate_parabolic_delta(&spec)?;
    let window = match opts.window()? {
        Some((lo, hi)) => (lo as usize, hi as usize),
        None => (4, 20),
    };
    let report = growth_condition_check(
        &profile,
        est.delta_hat,
        window,
        opts.cap.unwrap_or(DEFAULT_GROWTH_CAP),
    )?;
    session
        .manifest
        .delta_hats
        .insert("delta_pi_hat".into(), est.delta_hat);
    let mut body = String::from("T,shell,ratio\n");
    for &(t, r) in &report.ratios {
        body.push_str(&format!("{t},{},{r}\n", profile.shells[t]));
    }
    session.csv(
        "growth.csv",
        &[format!("delta_pi_hat {}", est.delta_hat)],
        &body,
    )?;
    #[derive(Serialize)]
    struct Summary<'a> {
        delta_pi: &'a CriticalExponentEstimate,
        growth: &'a crate::patterson::GrowthCheckReport,
    }
    session.json(
        "growth_summary.json",
        &Summary {
            delta_pi: &est,
            growth: &report,
        },
    )?;
    println!(
        "delta_pi_hat {:.6} +- {:.6}; growth condition {} (D_hat {:.4}, cap {})",
        est.delta_hat,
        est.stderr,
        if report.passed { "holds" } else { "fails" },
        report.d_hat,
        report.cap
    );
    session.finish()
}

fn cmd_patterson(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let t = opts.radius()?;
    let mut session = Session::new("patterson", &spec.hash, &opts, BTreeMap::new());
    let ball = enumerate_orbit(&spec, t)?;
    let (mu, delta) = measure_for(&spec, &ball, &opts, &mut session)?;
    let mut body = Vec::new();
    write_measure(&mu, &mut body).map_err(|e| CliError::Internal(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Internal(e.to_string()))?;
    session.csv("measure.txt", &[], &body)?;
    println!(
        "{} atoms, s = {:.6} (delta_hat {delta:.6}), tail fraction {:.3}",
        mu.len(),
        mu.s_used,
        mu.tail_fraction
    );
    session.finish()
}

/// Pixel offset of the `k`-th of `n` nested arcs, kept inside the canvas.
fn arc_offset(k: usize, n: usize) -> f64 {
    4.0 + k as f64 * (30.0 / n.max(1) as f64).min(3.0)
}

fn drawn_horoballs(index: &HoroballIndex, canvas: &mut Canvas) {
    for h in index
        .horoballs
        .iter()
        .filter(|h| h.diameter >= DRAWN_DIAMETER)
    {
        canvas.horoball(&h.horoball, "#4f7fbf");
    }
}

fn cmd_shadow(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let t = opts.radius()?;
    let xi_text = opts
        .xi
        .clone()
        .ok_or_else(|| CliError::Usage("--xi is required".into()))?;
    let grid = parse_grid(opts.t_grid.as_deref().unwrap_or(DEFAULT_T_GRID))?;
    let mut session = Session::new("shadow", &spec.hash, &opts, BTreeMap::new());
    let xi = parse_target(&spec, &xi_text)?;
    let ball = enumerate_orbit(&spec, t)?;
    let (mu, delta) = measure_for(&spec, &ball, &opts, &mut session)?;
    let reference = if t >= 2.0 {
        let smaller = ball.truncate(t - 1.0);
        Some(build_patterson(&smaller, mu.s_used, delta)?)
    } else {
        None
    };
    let (_, pi) = estimate_parabolic_delta(&spec)?;
    session
        .manifest
        .delta_hats
        .insert("delta_pi_hat".into(), pi.delta_hat);
    let index = HoroballIndex::from_ball(
        &spec,
        &ball,
        opts.min_diameter.unwrap_or(DEFAULT_MIN_DIAMETER),
    )?;
    let options = ShadowOptions {
        min_atoms: opts.min_atoms.unwrap_or(crate::shadows::DEFAULT_MIN_ATOMS),
        reference: reference.as_ref(),
        max_log_drift: DEFAULT_MAX_LOG_DRIFT,
    };
    let report = verify_shadow_lemma(&mu, xi, &grid, &index, delta, pi.delta_hat, &options)?;
    let header = [
        format!("xi {xi}"),
        format!("target {xi_text}"),
        format!("delta_hat {delta}"),
        format!("delta_pi_hat {}", pi.delta_hat),
        format!("s {}", mu.s_used),
    ];
    session.csv("shadow.csv", &header, &report.to_csv())?;
    session.json("shadow_summary.json", &report.summary)?;

    let mut canvas = Canvas::new();
    drawn_horoballs(&index, &mut canvas);
    for p in ball.points.iter().take(DRAWN_POINTS) {
        canvas.point(p.image, 0.8, "#555555");
    }
    canvas.radius_to(xi, "#c03030");
    for (k, &tk) in grid.iter().enumerate() {
        canvas.arc(
            &shadow_arc(Point::BASE, xi, tk.max(0.0))?,
            arc_offset(k, grid.len()),
            "#d07020",
        );
    }
    let svg = canvas.finish(
        &format!("shadows toward {xi_text}"),
        &session.manifest.hash(),
    );
    session.write("shadow.svg", &svg)?;

    if let Some(row) = report.rows.iter().find(|r| r.atoms == 0) {
        let cause = if row.t < 0.5 * t - 1.0 {
            "well inside the orbit radius, so the target is likely outside the limit set"
        } else {
            "near T/2, where deep shadows need orbit points beyond the radius; raise -T"
        };
        eprintln!("warning: shadows starve from t = {}: {cause}", row.t);
    }
    let s = &report.summary;
    println!(
        "rows {} usable {} flagged {}; band {:?}, thick band {:?}, cusp slope {:?} (target {:.4})",
        report.rows.len(),
        s.usable_rows,
        s.flagged_rows,
        s.band_width,
        s.thick_band_width,
        s.cusp_slope.as_ref().map(|f| f.slope),
        s.target_slope
    );
    session.finish()
}

fn cmd_horo(opts: Opts) -> Result<(), CliError> {
    let spec = load(&opts)?;
    let t = opts.radius()?;
    let word = opts
        .u
        .clone()
        .ok_or_else(|| CliError::Usage("--u WORD is required".into()))?;
    let plus_text = opts
        .u_plus
        .clone()
        .ok_or_else(|| CliError::Usage("--u-plus is required".into()))?;
    let r_grid = parse_grid(opts.r_grid.as_deref().unwrap_or(DEFAULT_R_GRID))?;
    let n_grid = parse_grid(opts.n_grid.as_deref().unwrap_or(DEFAULT_N_GRID))?;
    if r_grid.iter().any(|&r| r <= 0.0) {
        return Err(CliError::Usage("radii must be positive".into()));
    }
    let n_min = opts.n_min.unwrap_or(2.0 * 3f64.ln());
    let mut session = Session::new("horo", &spec.hash, &opts, BTreeMap::new());
    let u = UnitVector::nearest_to(
        Point::BASE,
        radial_point(&spec, &word)?,
        parse_target(&spec, &plus_text)?,
    )?;
    let ball = enumerate_orbit(&spec, t)?;
    let (mu, delta) = measure_for(&spec, &ball, &opts, &mut session)?;
    let index = HoroballIndex::from_ball(
        &spec,
        &ball,
        opts.min_diameter.unwrap_or(DEFAULT_MIN_DIAMETER),
    )?;
    let popts = ProfileOptions {
        min_atoms: opts
            .min_atoms
            .unwrap_or(ProfileOptions::default().min_atoms),
        max_unresolved: opts
            .max_unresolved
            .unwrap_or(ProfileOptions::default().max_unresolved),
    };
    let mut profile = CuspMassProfile::compute(&u, &r_grid, &n_grid, &mu, &index, delta, &popts)?;
    profile.s_used = mu.s_used;
    profile.t_used = t;
    profile.spec_hash = spec.hash.clone();
    profile.horoball_cutoff = index.complete_above;
    let summary = CuspMassSummary::new(std::slice::from_ref(&profile), n_min);
    let doubling = r_grid
        .iter()
        .map(|&r| doubling_ratio(&u, r, &mu, delta))
        .collect::<Result<Vec<_>, _>>()?;
    let header = [
        format!("u_minus {}", u.u_minus),
        format!("u_plus {}", u.u_plus),
        format!("s {}", u.s),
        format!("delta_hat {delta}"),
        format!("horoball_cutoff {}", index.complete_above),
    ];
    session.csv("horo.csv", &header, &profile.to_csv())?;
    let mut dcsv = String::from("r,ratio,inner_mass,outer_mass,inner_atoms,outer_atoms,flag\n");
    for (r, d) in r_grid.iter().zip(&doubling) {
        dcsv.push_str(&format!(
            "{r},{},{},{},{},{},{:?}\n",
            d.ratio, d.inner_mass, d.outer_mass, d.inner_atoms, d.outer_atoms, d.flag
        ));
    }
    session.csv("doubling.csv", &header, &dcsv)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        u: &'a UnitVector,
        cusp_mass: &'a CuspMassSummary,
        n_hat_005: Option<f64>,
        max_unresolved_fraction: f64,
        max_doubling_ratio: Option<f64>,
    }
    let max_doubling = doubling
        .iter()
        .filter(|d| d.flag == crate::horoflow::DoublingFlag::Ok)
        .map(|d| d.ratio)
        .reduce(f64::max);
    session.json(
        "horo_summary.json",
        &Summary {
            u: &u,
            cusp_mass: &summary,
            n_hat_005: summary.n_hat(0.05),
            max_unresolved_fraction: profile.max_unresolved_fraction(),
            max_doubling_ratio: max_doubling,
        },
    )?;

    let mut canvas = Canvas::new();
    drawn_horoballs(&index, &mut canvas);
    canvas.horocycle(&Horoball::new(u.u_minus, u.s)?, "#208040");
    let frame = u.frame();
    for (k, &r) in r_grid.iter().enumerate() {
        canvas.arc(
            &frame.ball_arc(&u, r)?,
            arc_offset(k, r_grid.len()),
            "#d07020",
        );
    }
    canvas.point(u.basepoint(), 3.0, "#c03030");
    let svg = canvas.finish(
        &format!("horocyclic balls of {word} toward {plus_text}"),
        &session.manifest.hash(),
    );
    session.write("horo.svg", &svg)?;

    println!(
        "sup_r f: {}",
        summary
            .sup
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    println!(
        "slope {:?}, N_hat(0.05) {:?}, max doubling {:?}",
        summary.slope.as_ref().map(|f| f.slope),
        summary.n_hat(0.05),
        max_doubling
    );
    session.finish()
}

fn read_input(path: &Path) -> Result<String, CliError> {
    if !path.exists() {
        return Err(CliError::MissingInput(path.display().to_string()));
    }
    std::fs::read_to_string(path).map_err(io_err(path))
}

fn header_value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
}

fn data_rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|l| l.split(',').collect())
}

fn cmd_render(opts: Opts) -> Result<(), CliError> {
    if opts.orbit.is_none() && opts.shadow.is_none() && opts.horo.is_none() {
        return Err(CliError::MissingInput(
            "render needs --orbit, --shadow or --horo".into(),
        ));
    }
    let mut extra = BTreeMap::new();
    let mut canvas = Canvas::new();
    let spec = opts.config.as_ref().map(|_| load(&opts)).transpose()?;
    if let Some(path) = &opts.orbit {
        let text = read_input(path)?;
        extra.insert("orbit_sha256".into(), sha256_hex(text.as_bytes()));
        let rows = read_orbit_csv(text.as_bytes())?;
        if let Some(cusp) = spec.as_ref().and_then(|s| s.cusp.as_ref()) {
            let mut seen = BTreeSet::new();
            for row in &rows {
                let h = Isometry::new(row.m).apply_horoball(&cusp.horoball);
                let key = (h.center.angle() * 1e9).round() as i64;
                if h.disk_diameter() >= DRAWN_DIAMETER && seen.insert(key) {
                    canvas.horoball(&h, "#4f7fbf");
                }
            }
        }
        for row in rows.iter().take(DRAWN_POINTS) {
            canvas.point(row.m.apply(Point::BASE), 0.8, "#555555");
        }
    }
    if let Some(path) = &opts.shadow {
        let text = read_input(path)?;
        extra.insert("shadow_sha256".into(), sha256_hex(text.as_bytes()));
        let xi: BoundaryPoint = header_value(&text, "xi")
            .ok_or_else(|| CliError::Usage(format!("{}: no `# xi` header", path.display())))?
            .parse()?;
        let mut ts = data_rows(&text)
            .map(|f| parse_num(f[0]))
            .collect::<Result<Vec<_>, _>>()?;
        ts.sort_by(f64::total_cmp);
        canvas.radius_to(xi, "#c03030");
        let mut prev: Option<crate::geometry::Arc> = None;
        for (k, &t) in ts.iter().enumerate() {
            let arc = shadow_arc(Point::BASE, xi, t.max(0.0))?;
            if let Some(p) = prev {
                if !p.contains_arc(&arc, 1e-12) {
                    return Err(CliError::Internal(format!(
                        "shadow at t = {t} is not nested in its predecessor"
                    )));
                }
            }
            canvas.arc(&arc, arc_offset(k, ts.len()), "#d07020");
            prev = Some(arc);
        }
    }
    if let Some(path) = &opts.horo {
        let text = read_input(path)?;
        extra.insert("horo_sha256".into(), sha256_hex(text.as_bytes()));
        let get = |k: &str| {
            header_value(&text, k)
                .ok_or_else(|| CliError::Usage(format!("{}: no `# {k}` header", path.display())))
        };
        let u = UnitVector::new(
            get("u_minus")?.parse()?,
            get("u_plus")?.parse()?,
            parse_num(get("s")?)?,
        )?;
        let mut radii: Vec<f64> = Vec::new();
        for f in data_rows(&text) {
            let r = parse_num(f[0])?;
            if radii.last() != Some(&r) {
                radii.push(r);
            }
        }
        canvas.horocycle(&Horoball::new(u.u_minus, u.s)?, "#208040");
        let frame = u.frame();
        for (k, &r) in radii.iter().enumerate() {
            canvas.arc(
                &frame.ball_arc(&u, r)?,
                arc_offset(k, radii.len()),
                "#d07020",
            );
        }
        canvas.point(u.basepoint(), 3.0, "#c03030");
    }
    let config_hash = spec
        .as_ref()
        .map(|s| s.hash.clone())
        .unwrap_or_else(|| "-".into());
    let mut render_opts = opts.clone();
    let target = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("render.svg"));
    render_opts.out = Some(target.parent().map(Path::to_path_buf).unwrap_or_default());
    let mut session = Session::new("render", &config_hash, &render_opts, extra);
    let svg = canvas.finish("horoshadow render", &session.manifest.hash());
    let name = target
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Usage(format!("bad output path {}", target.display())))?
        .to_string();
    session.write(&name, &svg)?;
    println!("{} sha256 {}", target.display(), sha256_hex(svg.as_bytes()));
    Ok(())
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Group {
            action: GroupAction::Check { config },
        } => cmd_group_check(&config),
        Command::Orbit(run) => cmd_orbit(Opts::resolve(run)?),
        Command::Delta(run) => cmd_delta(Opts::resolve(run)?),
        Command::Growth(run) => cmd_growth(Opts::resolve(run)?),
        Command::Patterson(run) => cmd_patterson(Opts::resolve(run)?),
        Command::Shadow(run) => cmd_shadow(Opts::resolve(run)?),
        Command::Horo(run) => cmd_horo(Opts::resolve(run)?),
        Command::Render(run) => cmd_render(Opts::resolve(run)?),
    }
}

/// Parses arguments, runs, prints errors, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(cli))) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => 3,
    }
}
