//! Fuchsian group configs, classification of isometries, ping-pong
//! certificates and enumeration of orbit balls.

mod config;
mod cosets;
mod enumerate;
mod pingpong;
mod word;

use std::fmt;

pub use config::{
    load_group_spec, parse_group_spec, Budget, CuspSpec, FactorDomain, Generator, GroupSpec,
    ParabolicMark, Structure,
};
pub use cosets::{coset_reps_mod_parabolic, CosetRep};
pub use enumerate::{
    enumerate_breadth_first, enumerate_orbit, enumerate_orbit_with, read_orbit_csv,
    write_orbit_csv, DedupReport, OrbitBall, OrbitPoint, OrbitRow,
};
pub use pingpong::{half_plane_distance, ping_pong_check, PingPongCertificate};
pub use word::{canonical_exponent, Syllable, Word};

use crate::geometry::{BoundaryPoint, Horoball, Mobius, Point};

/// A group element: normalized matrix plus the word that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub m: Mobius,
    pub word: Option<Word>,
}

impl Isometry {
    pub fn new(m: Mobius) -> Self {
        Isometry {
            m: m.canonical(),
            word: None,
        }
    }

    pub fn with_word(m: Mobius, word: Word) -> Self {
        Isometry {
            m: m.canonical(),
            word: Some(word),
        }
    }

    pub fn identity() -> Self {
        Isometry::with_word(Mobius::IDENTITY, Word::identity())
    }

    pub fn compose(&self, other: &Isometry) -> Isometry {
        let word = match (&self.word, &other.word) {
            (Some(a), Some(b)) => {
                let mut w = a.clone();
                w.0.extend_from_slice(&b.0);
                Some(w)
            }
            _ => None,
        };
        Isometry {
            m: self.m.compose(&other.m),
            word,
        }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry {
            m: self.m.inverse(),
            word: self.word.as_ref().map(Word::inverse),
        }
    }

    pub fn apply(&self, z: Point) -> Point {
        self.m.apply(z)
    }

    pub fn apply_boundary(&self, xi: BoundaryPoint) -> BoundaryPoint {
        self.m.apply_boundary(xi)
    }

    pub fn apply_horoball(&self, h: &Horoball) -> Horoball {
        h.image(&self.m)
    }

    pub fn classify(&self) -> Classification {
        classify(&self.m)
    }
}

/// Dynamical type of an isometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Classification {
    Identity,
    Elliptic,
    Parabolic {
        fixed: BoundaryPoint,
    },
    Hyperbolic {
        attracting: BoundaryPoint,
        repelling: BoundaryPoint,
        translation_length: f64,
    },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Identity => "identity",
            Classification::Elliptic => "elliptic",
            Classification::Parabolic { .. } => "parabolic",
            Classification::Hyperbolic { .. } => "hyperbolic",
        }
    }
}

pub const TRACE_TOL: f64 = 1e-9;

/// Classifies a normalized matrix by its trace.
pub fn classify(m: &Mobius) -> Classification {
    let m = m.canonical();
    let tr = m.trace().abs();
    let scale = m.entries().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let small = |v: f64| v.abs() <= 1e-12 * scale;
    if (tr - 2.0).abs() <= TRACE_TOL {
        if small(m.b) && small(m.c) && small(m.a - m.d) {
            return Classification::Identity;
        }
        let fixed = if small(m.c) {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Real((m.a - m.d) / (2.0 * m.c))
        };
        return Classification::Parabolic { fixed };
    }
    if tr < 2.0 {
        return Classification::Elliptic;
    }
    let translation_length = 2.0 * (tr / 2.0).acosh();
    let (attracting, repelling) = if small(m.c) {
        let fin = BoundaryPoint::Real(m.b / (m.d - m.a));
        if m.a.abs() > m.d.abs() {
            (BoundaryPoint::Infinity, fin)
        } else {
            (fin, BoundaryPoint::Infinity)
        }
    } else {
        let disc = (m.trace() * m.trace() - 4.0).sqrt();
        let z1 = (m.a - m.d + disc) / (2.0 * m.c);
        let z2 = (m.a - m.d - disc) / (2.0 * m.c);
        if (m.c * z1 + m.d).abs() > 1.0 {
            (BoundaryPoint::Real(z1), BoundaryPoint::Real(z2))
        } else {
            (BoundaryPoint::Real(z2), BoundaryPoint::Real(z1))
        }
    };
    Classification::Hyperbolic {
        attracting,
        repelling,
        translation_length,
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroupError {
    #[error("config: {0}")]
    Config(String),
    #[error("generator {name}: {reason}")]
    InvalidGenerator { name: String, reason: String },
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("malformed word {0:?}")]
    BadWord(String),
    #[error("{0} is not parabolic")]
    NotParabolic(String),
    #[error("ping-pong failure between {first} and {second}: {reason}")]
    PingPong {
        first: String,
        second: String,
        reason: String,
    },
    #[error("budget exceeded: {emitted} elements emitted, {explored} words explored (limit {limit}); results complete up to radius {certified_radius}")]
    Budget {
        emitted: usize,
        explored: usize,
        limit: usize,
        certified_radius: f64,
    },
    #[error("radius {0} must be finite and non-negative")]
    BadRadius(f64),
    #[error("orbit file: {0}")]
    OrbitFile(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

impl fmt::Display for Isometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.word {
            Some(w) => write!(f, "{} = {}", w, self.m),
            None => write!(f, "{}", self.m),
        }
    }
}
