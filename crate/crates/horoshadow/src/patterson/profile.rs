use serde::Serialize;

use super::PattersonError;
use crate::geometry::{dist, Mobius, Point};
use crate::group::OrbitBall;
use crate::numerics::ols;

/// Minimal `N(T_min)` accepted by [`estimate_delta`].
pub const DEFAULT_MIN_COUNT: u64 = 50;

/// Unit-shell counts `a_k = #{γ : d(o, γo) ∈ [k, k+1)}` for the complete
/// shells below the radius, and the cumulative counts `N(k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingProfile {
    pub radius: f64,
    pub shells: Vec<u64>,
    /// `cumulative[k] = N(k) = #{d ≤ k}` for `k = 0..=shells.len()`.
    pub cumulative: Vec<u64>,
}

impl CountingProfile {
    /// Profile of orbit distances, all at most `radius`.
    pub fn from_distances(dists: &[f64], radius: f64) -> Self {
        let mut dists = dists.to_vec();
        dists.sort_by(f64::total_cmp);
        let k_max = radius.floor().max(0.0) as usize;
        let cumulative = (0..=k_max)
            .map(|k| dists.partition_point(|d| *d <= k as f64) as u64)
            .collect();
        let mut shells = vec![0u64; k_max];
        for d in &dists {
            let k = d.floor() as usize;
            if k < k_max {
                shells[k] += 1;
            }
        }
        CountingProfile {
            radius,
            shells,
            cumulative,
        }
    }

    pub fn from_ball(ball: &OrbitBall) -> Self {
        let dists: Vec<f64> = ball.points.iter().map(|p| p.dist).collect();
        Self::from_distances(&dists, ball.radius)
    }

    /// `[T_min, T - 1]` with `T_min` the first integer at least 6 where
    /// `N(T_min) ≥ min_count`.
    pub fn default_window(&self, min_count: u64) -> (f64, f64) {
        let hi = self.cumulative.len().saturating_sub(2);
        let lo = (6..=hi)
            .find(|&k| self.cumulative[k] >= min_count)
            .unwrap_or(hi);
        (lo as f64, hi as f64)
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().unwrap_or(&0)
    }

    /// CSV rows `T,shell,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("T,shell,cumulative\n");
        for (k, a) in self.shells.iter().enumerate() {
            out.push_str(&format!("{k},{a},{}\n", self.cumulative[k + 1]));
        }
        out
    }
}

/// Orbit distances `d(x, gⁿx)` within `radius` for the cyclic group of a
/// parabolic or hyperbolic `g`, identity included. Both `n` and `-n` are
/// listed. Elliptic `g` stops at the first return near `x`.
pub fn cyclic_orbit_distances(g: &Mobius, x: Point, radius: f64) -> Vec<f64> {
    const MAX_POWER: usize = 10_000_000;
    let mut out = vec![0.0];
    let mut m = *g;
    for _ in 0..MAX_POWER {
        let d = dist(x, m.apply(x));
        if d > radius || d < 1e-9 {
            break;
        }
        out.extend([d, d]);
        m = m.compose(g);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalExponentEstimate {
    pub delta_hat: f64,
    pub window: (f64, f64),
    pub stderr: f64,
    pub method: String,
}

fn window_indices(
    profile: &CountingProfile,
    window: (f64, f64),
) -> Result<Vec<usize>, PattersonError> {
    let max = (profile.cumulative.len() - 1) as f64;
    let (lo, hi) = window;
    if !(lo >= 0.0 && hi <= max && hi - lo >= 1.0) {
        return Err(PattersonError::BadWindow { lo, hi, max });
    }
    Ok((lo.ceil() as usize..=hi.floor() as usize).collect())
}

/// Least-squares slope of `log N(T)` against integer `T` in the window.
pub fn estimate_delta(
    profile: &CountingProfile,
    window: (f64, f64),
    min_count: u64,
) -> Result<CriticalExponentEstimate, PattersonError> {
    let ts = window_indices(profile, window)?;
    let first = profile.cumulative[ts[0]];
    if first < min_count {
        return Err(PattersonError::InsufficientData(format!(
            "N({}) = {first} < {min_count}",
            ts[0]
        )));
    }
    let xs: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    let ys: Vec<f64> = ts
        .iter()
        .map(|&t| (profile.cumulative[t] as f64).ln())
        .collect();
    let fit =
        ols(&xs, &ys).ok_or_else(|| PattersonError::InsufficientData("degenerate fit".into()))?;
    Ok(CriticalExponentEstimate {
        delta_hat: fit.slope,
        window,
        stderr: fit.slope_stderr,
        method: "log_count_ols".into(),
    })
}

/// The exponent where truncated Poincaré shell weights stop growing: the
/// root in `s` of the fitted slope of `log Σ_{shell k} e^{-s d}` over the
/// window, found by bisection.
pub fn estimate_delta_poincare(
    ball: &OrbitBall,
    window: (f64, f64),
) -> Result<CriticalExponentEstimate, PattersonError> {
    let profile = CountingProfile::from_ball(ball);
    let ts = window_indices(&profile, window)?;
    if ts
        .iter()
        .any(|&k| k >= profile.shells.len() || profile.shells[k] == 0)
    {
        return Err(PattersonError::InsufficientData(
            "empty or incomplete shell in the window".into(),
        ));
    }
    let slope = |s: f64| -> f64 {
        let mut w = vec![crate::numerics::NeumaierSum::new(); profile.shells.len()];
        for p in &ball.points {
            let k = p.dist.floor() as usize;
            if k < w.len() {
                w[k].add((-s * p.dist).exp());
            }
        }
        let xs: Vec<f64> = ts.iter().map(|&k| k as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|&k| w[k].value().ln()).collect();
        ols(&xs, &ys).map(|f| f.slope).unwrap_or(0.0)
    };
    let (mut lo, mut hi) = (0.0, 4.0);
    if slope(lo) < 0.0 {
        return Ok(CriticalExponentEstimate {
            delta_hat: 0.0,
            window,
            stderr: f64::NAN,
            method: "poincare_bisection".into(),
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalExponentEstimate {
        delta_hat: 0.5 * (lo + hi),
        window,
        stderr: f64::NAN,
        method: "poincare_bisection".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthCheckReport {
    pub delta_pi: f64,
    pub window: (usize, usize),
    /// `(T, a_T / e^{δ_Π T})`.
    pub ratios: Vec<(usize, f64)>,
    pub d_hat: f64,
    pub cap: f64,
    /// False when `δ_Π ≤ 0`, where the growth condition says nothing.
    pub in_scope: bool,
    pub passed: bool,
}

/// Per-shell check of `a_T ≍ e^{δ_Π T}` for integer `T` in the window.
pub fn growth_condition_check(
    profile: &CountingProfile,
    delta_pi: f64,
    window: (usize, usize),
    cap: f64,
) -> Result<GrowthCheckReport, PattersonError> {
    let (lo, hi) = window;
    if hi >= profile.shells.len() || lo > hi {
        return Err(PattersonError::BadWindow {
            lo: lo as f64,
            hi: hi as f64,
            max: profile.shells.len() as f64,
        });
    }
    let mut ratios = Vec::new();
    for t in lo..=hi {
        let a = profile.shells[t];
        if a == 0 {
            return Err(PattersonError::EmptyShell { index: t });
        }
        ratios.push((t, a as f64 / (delta_pi * t as f64).exp()));
    }
    let d_hat = ratios
        .iter()
        .map(|&(_, r)| r.max(1.0 / r))
        .fold(1.0, f64::max);
    let in_scope = delta_pi > 0.0;
    Ok(GrowthCheckReport {
        delta_pi,
        window,
        ratios,
        d_hat,
        cap,
        in_scope,
        passed: in_scope && d_hat <= cap,
    })
}
