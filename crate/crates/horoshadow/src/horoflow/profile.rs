use rayon::prelude::*;
use serde::Serialize;

use super::{frame_atoms, FrameAtom, HoroflowError, UnitVector};
use crate::numerics::{compensated_sum, ols};
use crate::patterson::AtomicBoundaryMeasure;
use crate::shadows::{HoroballIndex, PositionTag, SlopeFit};

/// `M_{r,u}` of the indicator of base points at depth at least `N` in a
/// listed horoball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspFraction {
    pub fraction: f64,
    /// `μ_{H^+}(B⁺(u, r))`.
    pub mass: f64,
    pub atoms: usize,
    /// Share of the mass whose base points fall beyond the horoball listing.
    pub unresolved_fraction: f64,
    /// Fewer atoms in the ball than the floor.
    pub starved: bool,
    /// Unresolved share above the accepted level.
    pub unresolved: bool,
}

impl CuspFraction {
    pub fn usable(&self) -> bool {
        !self.starved && !self.unresolved
    }
}

/// Cell acceptance rules for cusp-mass profiles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileOptions {
    pub min_atoms: usize,
    /// Largest accepted share of mass based beyond the horoball listing.
    pub max_unresolved: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            min_atoms: 20,
            max_unresolved: 0.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
struct ClassifiedAtom {
    x: f64,
    mass: f64,
    depth: f64,
    unresolved: bool,
}

fn classify_atoms(
    atoms: Vec<FrameAtom>,
    index: &HoroballIndex,
) -> Result<Vec<ClassifiedAtom>, HoroflowError> {
    atoms
        .into_par_iter()
        .map(|a| {
            let c = index.classify(a.basepoint)?;
            Ok(ClassifiedAtom {
                x: a.x,
                mass: a.mass,
                depth: c.depth,
                unresolved: c.tag == PositionTag::Unresolved,
            })
        })
        .collect()
}

fn fraction_of(atoms: &[&ClassifiedAtom], n: f64, options: &ProfileOptions) -> CuspFraction {
    let mass = compensated_sum(atoms.iter().map(|a| a.mass));
    let deep = compensated_sum(
        atoms
            .iter()
            .filter(|a| a.depth > 0.0 && a.depth >= n)
            .map(|a| a.mass),
    );
    let unresolved = compensated_sum(atoms.iter().filter(|a| a.unresolved).map(|a| a.mass));
    let ok = mass > 0.0;
    let unresolved_fraction = if ok { unresolved / mass } else { 0.0 };
    CuspFraction {
        fraction: if ok { deep / mass } else { 0.0 },
        mass,
        atoms: atoms.len(),
        unresolved_fraction,
        starved: atoms.len() < options.min_atoms.max(1) || !ok,
        unresolved: unresolved_fraction > options.max_unresolved,
    }
}

/// Single-cell version of [`CuspMassProfile::compute`].
pub fn mean_cusp_fraction(
    u: &UnitVector,
    r: f64,
    n: f64,
    measure: &AtomicBoundaryMeasure,
    index: &HoroballIndex,
    delta: f64,
    options: &ProfileOptions,
) -> Result<CuspFraction, HoroflowError> {
    let p = CuspMassProfile::compute(u, &[r], &[n], measure, index, delta, options)?;
    Ok(p.cells[0][0].clone())
}

/// Cusp-mass fractions `f(r, N)` over a grid, for one vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspMassProfile {
    pub u: UnitVector,
    pub r_grid: Vec<f64>,
    pub n_grid: Vec<f64>,
    /// `cells[i][j]` is `f(r_grid[i], n_grid[j])`.
    pub cells: Vec<Vec<CuspFraction>>,
    pub s_used: f64,
    pub t_used: f64,
    pub spec_hash: String,
    pub horoball_cutoff: f64,
}

impl CuspMassProfile {
    pub fn compute(
        u: &UnitVector,
        r_grid: &[f64],
        n_grid: &[f64],
        measure: &AtomicBoundaryMeasure,
        index: &HoroballIndex,
        delta: f64,
        options: &ProfileOptions,
    ) -> Result<Self, HoroflowError> {
        let frame = u.frame();
        let r_max = r_grid.iter().copied().fold(f64::NAN, f64::max);
        let arc = frame.ball_arc(u, r_max)?;
        let atoms = classify_atoms(frame_atoms(&frame, measure, &arc, delta)?, index)?;
        let centre = frame.coordinate(u.u_plus)?;
        let cells = r_grid
            .iter()
            .map(|&r| {
                let w = r * frame.height;
                let inside: Vec<&ClassifiedAtom> =
                    atoms.iter().filter(|a| (a.x - centre).abs() <= w).collect();
                n_grid
                    .iter()
                    .map(|&n| fraction_of(&inside, n, options))
                    .collect()
            })
            .collect();
        Ok(CuspMassProfile {
            u: *u,
            r_grid: r_grid.to_vec(),
            n_grid: n_grid.to_vec(),
            cells,
            s_used: measure.s_used,
            t_used: measure.t_used,
            spec_hash: measure.spec_hash.clone(),
            horoball_cutoff: index.complete_above,
        })
    }

    /// `sup_r f(r, N)` over usable radii, per `N`.
    pub fn sup_over_r(&self) -> Vec<f64> {
        (0..self.n_grid.len())
            .map(|j| {
                self.cells
                    .iter()
                    .filter(|row| row[j].usable())
                    .map(|row| row[j].fraction)
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Number of usable radii.
    pub fn usable_radii(&self) -> usize {
        self.cells.iter().filter(|row| row[0].usable()).count()
    }

    /// Largest share of unresolved mass over the grid.
    pub fn max_unresolved_fraction(&self) -> f64 {
        self.cells
            .iter()
            .map(|row| row[0].unresolved_fraction)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,N,f,mass,atoms,unresolved_fraction,starved,unresolved\n");
        for (row, &r) in self.cells.iter().zip(&self.r_grid) {
            for (c, &n) in row.iter().zip(&self.n_grid) {
                out.push_str(&format!(
                    "{r},{n},{},{},{},{},{},{}\n",
                    c.fraction, c.mass, c.atoms, c.unresolved_fraction, c.starved, c.unresolved
                ));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DoublingFlag {
    Ok,
    /// Both balls hold the same atoms.
    UnderResolved,
    /// The inner ball has no mass.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoublingRatio {
    /// `μ(B⁺(u, 3r)) / μ(B⁺(u, r))`, infinite when the inner ball is empty.
    pub ratio: f64,
    pub inner_mass: f64,
    pub outer_mass: f64,
    pub inner_atoms: usize,
    pub outer_atoms: usize,
    pub flag: DoublingFlag,
}

pub fn doubling_ratio(
    u: &UnitVector,
    r: f64,
    measure: &AtomicBoundaryMeasure,
    delta: f64,
) -> Result<DoublingRatio, HoroflowError> {
    let frame = u.frame();
    let atoms = frame_atoms(&frame, measure, &frame.ball_arc(u, 3.0 * r)?, delta)?;
    let centre = frame.coordinate(u.u_plus)?;
    let w = r * frame.height;
    let inner: Vec<f64> = atoms
        .iter()
        .filter(|a| (a.x - centre).abs() <= w)
        .map(|a| a.mass)
        .collect();
    let inner_mass = compensated_sum(inner.iter().copied());
    let outer_mass = compensated_sum(atoms.iter().map(|a| a.mass));
    let flag = if inner_mass <= 0.0 {
        DoublingFlag::Empty
    } else if inner.len() == atoms.len() {
        DoublingFlag::UnderResolved
    } else {
        DoublingFlag::Ok
    };
    Ok(DoublingRatio {
        ratio: if inner_mass > 0.0 {
            outer_mass / inner_mass
        } else {
            f64::INFINITY
        },
        inner_mass,
        outer_mass,
        inner_atoms: inner.len(),
        outer_atoms: atoms.len(),
        flag,
    })
}

/// `sup_{u, r} f(r, N)` over several profiles sharing one level grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CuspMassSummary {
    pub n_grid: Vec<f64>,
    pub sup: Vec<f64>,
    pub profiles: usize,
    pub usable_cells: usize,
    /// Fit of `log sup` against `N` over levels `N ≥ n_min` with positive
    /// supremum.
    pub slope: Option<SlopeFit>,
    pub n_min: f64,
}

impl CuspMassSummary {
    pub fn new(profiles: &[CuspMassProfile], n_min: f64) -> Self {
        let n_grid = profiles
            .first()
            .map(|p| p.n_grid.clone())
            .unwrap_or_default();
        let mut sup = vec![0.0f64; n_grid.len()];
        for p in profiles {
            for (s, v) in sup.iter_mut().zip(p.sup_over_r()) {
                *s = s.max(v);
            }
        }
        let usable_cells = profiles.iter().map(|p| p.usable_radii()).sum();
        let (xs, ys): (Vec<f64>, Vec<f64>) = n_grid
            .iter()
            .zip(&sup)
            .filter(|(&n, &f)| n >= n_min && f > 0.0)
            .map(|(&n, &f)| (n, f.ln()))
            .unzip();
        let slope = ols(&xs, &ys).map(|f| SlopeFit {
            slope: f.slope,
            stderr: f.slope_stderr,
            rows: f.n,
        });
        CuspMassSummary {
            n_grid,
            sup,
            profiles: profiles.len(),
            usable_cells,
            slope,
            n_min,
        }
    }

    /// Smallest grid level from which the supremum stays at or below `eps`.
    pub fn n_hat(&self, eps: f64) -> Option<f64> {
        let k = self.sup.iter().rposition(|&f| f > eps).map_or(0, |k| k + 1);
        self.n_grid.get(k).copied()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.sup.windows(2).all(|w| w[1] <= w[0])
    }
}
