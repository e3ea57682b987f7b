//! Shadow Lemma verification: cusp horoball indexing, position
//! classification along rays, and shadow masses of the atomic measure.

mod index;

pub use index::{HoroballIndex, IndexedHoroball};

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{point_on_ray, shadow_arc, BoundaryPoint, GeometryError, Point};
use crate::group::{classify, Classification, GroupError, GroupSpec};
use crate::numerics::ols;
use crate::patterson::AtomicBoundaryMeasure;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShadowError {
    #[error("{x:?} lies in horoballs {first} and {second}, which should be disjoint")]
    OverlappingHoroballs {
        x: Point,
        first: usize,
        second: usize,
    },
    #[error("the group config declares no cusp horoball")]
    NoCusp,
    #[error("the basepoint lies inside the cusp horoball")]
    BasepointInCusp,
    #[error("shadow computations use the basepoint (0, 1); got {0:?}")]
    UnsupportedBasepoint(Point),
    #[error("pattern {pattern:?} is not usable: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionTag {
    Thick,
    /// Inside the listed horoball with this index.
    Cusp(usize),
    /// Outside every listed horoball but too close to the boundary for the
    /// list to be complete.
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositionClass {
    pub tag: PositionTag,
    /// Busemann depth inside the horoball; 0 unless `Cusp`.
    pub depth: f64,
}

impl PositionClass {
    pub fn label(&self) -> String {
        match self.tag {
            PositionTag::Thick => "thick".into(),
            PositionTag::Cusp(i) => format!("cusp({i})"),
            PositionTag::Unresolved => "unresolved".into(),
        }
    }
}

pub fn classify_position(x: Point, index: &HoroballIndex) -> Result<PositionClass, ShadowError> {
    index.classify(x)
}

/// Attracting fixed point of the hyperbolic element spelled by a cyclically
/// reduced word.
pub fn radial_point(spec: &GroupSpec, pattern: &str) -> Result<BoundaryPoint, ShadowError> {
    let bad = |reason: &str| ShadowError::BadPattern {
        pattern: pattern.to_string(),
        reason: reason.to_string(),
    };
    let w = spec.parse_word(pattern)?;
    let syl = w.syllables();
    if syl.is_empty() {
        return Err(bad("empty word"));
    }
    if syl.len() > 1 && syl[0].gen == syl[syl.len() - 1].gen {
        return Err(bad("not cyclically reduced"));
    }
    match classify(&spec.eval_word(&w)) {
        Classification::Hyperbolic { attracting, .. } => Ok(attracting),
        c => Err(bad(&format!("evaluates to a {} element", c.name()))),
    }
}

/// Boundary target from text: `radial:WORD` (see [`radial_point`]),
/// `cusp:WORD` (image of the cusp point under the word) or a plain boundary
/// point such as `0`, `-1.5` or `inf`.
pub fn parse_target(spec: &GroupSpec, text: &str) -> Result<BoundaryPoint, ShadowError> {
    if let Some(pattern) = text.strip_prefix("radial:") {
        return radial_point(spec, pattern);
    }
    if let Some(word) = text.strip_prefix("cusp:") {
        let mark = spec.cusp_mark().ok_or(ShadowError::NoCusp)?;
        let g = if word.is_empty() {
            crate::geometry::Mobius::IDENTITY
        } else {
            spec.eval_word(&spec.parse_word(word)?)
        };
        return Ok(g.apply_boundary(mark.fixed));
    }
    text.trim()
        .parse::<BoundaryPoint>()
        .map_err(|_| ShadowError::BadPattern {
            pattern: text.to_string(),
            reason: "expected radial:WORD, cusp:WORD or a boundary point".into(),
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFlag {
    Ok,
    /// Fewer atoms in the shadow than the configured floor.
    Starved,
    Unresolved,
    /// Shadow mass moved by more than the tolerance when the orbit ball
    /// shrank by one unit.
    Unconverged,
}

/// Row acceptance rules for [`verify_shadow_lemma`].
#[derive(Clone, Copy, Debug)]
pub struct ShadowOptions<'a> {
    /// Rows whose shadow holds fewer atoms are flagged `Starved`.
    pub min_atoms: usize,
    /// Same recipe built from a smaller orbit ball.
    pub reference: Option<&'a AtomicBoundaryMeasure>,
    /// Largest accepted `|log ν̂(V) - log ν̂_ref(V)|`.
    pub max_log_drift: f64,
}

impl Default for ShadowOptions<'_> {
    fn default() -> Self {
        ShadowOptions {
            min_atoms: DEFAULT_MIN_ATOMS,
            reference: None,
            max_log_drift: DEFAULT_MAX_LOG_DRIFT,
        }
    }
}

pub const DEFAULT_MIN_ATOMS: usize = 20;
pub const DEFAULT_MAX_LOG_DRIFT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowRow {
    pub t: f64,
    pub position: PositionClass,
    pub nu: f64,
    pub atoms: usize,
    /// `log ν̂(V) + δ̂ t - (2δ̂_Π - δ̂) depth`.
    pub residual: f64,
    /// `log ν̂(V) - log ν̂_ref(V)` when a reference measure was given.
    pub drift: Option<f64>,
    pub flag: RowFlag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowSummary {
    /// `exp max |log ν̂ + δ̂ t|` over usable thick rows.
    pub a0_hat: Option<f64>,
    /// `exp max |residual|` over all usable rows.
    pub a1_hat: Option<f64>,
    /// `max - min` residual over usable rows.
    pub band_width: Option<f64>,
    /// Same, thick rows only.
    pub thick_band_width: Option<f64>,
    /// Fit of `log ν̂ + δ̂ t` against depth over usable cusp rows of depth ≥ 1.
    pub cusp_slope: Option<SlopeFit>,
    pub target_slope: f64,
    pub usable_rows: usize,
    pub flagged_rows: usize,
    /// Weight of atoms sitting at the target itself. These belong to every
    /// shadow along the ray; orbit points on the ray put them there.
    pub mass_at_target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadowLemmaReport {
    pub xi: BoundaryPoint,
    pub delta_hat: f64,
    pub delta_pi_hat: f64,
    pub rows: Vec<ShadowRow>,
    pub summary: ShadowSummary,
}

impl ShadowLemmaReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,position,depth,nu,atoms,residual,drift,flag\n");
        for r in &self.rows {
            let flag = match r.flag {
                RowFlag::Ok => "ok",
                RowFlag::Starved => "starved",
                RowFlag::Unresolved => "unresolved",
                RowFlag::Unconverged => "unconverged",
            };
            let drift = r.drift.map(|d| d.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{drift},{flag}\n",
                r.t,
                r.position.label(),
                r.position.depth,
                r.nu,
                r.atoms,
                r.residual
            ));
        }
        out
    }
}

fn band(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Evaluates `ν̂(V(o, ξ, t))` along the ray for each `t` in the grid and
/// compares with `e^{-δ̂ t + (2δ̂_Π - δ̂) depth}`. Flagged rows are reported
/// but left out of the summary.
pub fn verify_shadow_lemma(
    measure: &AtomicBoundaryMeasure,
    xi: BoundaryPoint,
    t_grid: &[f64],
    index: &HoroballIndex,
    delta_hat: f64,
    delta_pi_hat: f64,
    options: &ShadowOptions,
) -> Result<ShadowLemmaReport, ShadowError> {
    let o = Point::BASE;
    if measure.basepoint != o {
        return Err(ShadowError::UnsupportedBasepoint(measure.basepoint));
    }
    let excess = 2.0 * delta_pi_hat - delta_hat;
    let rows: Vec<ShadowRow> = t_grid
        .par_iter()
        .map(|&t| -> Result<ShadowRow, ShadowError> {
            let position = index.classify(point_on_ray(o, xi, t)?)?;
            let arc = shadow_arc(o, xi, t)?;
            let nu = measure.measure_of_arc(&arc);
            let atoms = measure.atoms_in_arc(&arc);
            let residual = nu.ln() + delta_hat * t - excess * position.depth;
            let drift = options
                .reference
                .map(|r| nu.ln() - r.measure_of_arc(&arc).ln());
            let flag = if position.tag == PositionTag::Unresolved {
                RowFlag::Unresolved
            } else if atoms < options.min_atoms.max(1) {
                RowFlag::Starved
            } else if drift.is_some_and(|d| !(d.abs() <= options.max_log_drift)) {
                RowFlag::Unconverged
            } else {
                RowFlag::Ok
            };
            Ok(ShadowRow {
                t,
                position,
                nu,
                atoms,
                residual,
                drift,
                flag,
            })
        })
        .collect::<Result<_, _>>()?;

    let usable: Vec<&ShadowRow> = rows.iter().filter(|r| r.flag == RowFlag::Ok).collect();
    let thick: Vec<&ShadowRow> = usable
        .iter()
        .copied()
        .filter(|r| r.position.tag == PositionTag::Thick)
        .collect();
    let a0_hat = band(thick.iter().map(|r| r.residual.abs())).map(|(_, hi)| hi.exp());
    let a1_hat = band(usable.iter().map(|r| r.residual.abs())).map(|(_, hi)| hi.exp());
    let band_width = band(usable.iter().map(|r| r.residual)).map(|(lo, hi)| hi - lo);
    let thick_band_width = band(thick.iter().map(|r| r.residual)).map(|(lo, hi)| hi - lo);
    let cusp: Vec<&ShadowRow> = usable
        .iter()
        .copied()
        .filter(|r| matches!(r.position.tag, PositionTag::Cusp(_)) && r.position.depth >= 1.0)
        .collect();
    let xs: Vec<f64> = cusp.iter().map(|r| r.position.depth).collect();
    let ys: Vec<f64> = cusp.iter().map(|r| r.nu.ln() + delta_hat * r.t).collect();
    let cusp_slope = ols(&xs, &ys).map(|f| SlopeFit {
        slope: f.slope,
        stderr: f.slope_stderr,
        rows: f.n,
    });
    let summary = ShadowSummary {
        a0_hat,
        a1_hat,
        band_width,
        thick_band_width,
        cusp_slope,
        target_slope: excess,
        usable_rows: usable.len(),
        flagged_rows: rows.len() - usable.len(),
        mass_at_target: measure.mass_at_angle(xi.angle(), 1e-12),
    };
    Ok(ShadowLemmaReport {
        xi,
        delta_hat,
        delta_pi_hat,
        rows,
        summary,
    })
}
