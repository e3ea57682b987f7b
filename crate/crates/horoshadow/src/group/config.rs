use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::pingpong::{derive_domain, ping_pong_check, PingPongCertificate};
use super::{classify, Classification, GroupError, Word};
use crate::geometry::{Arc, BoundaryPoint, Horoball, Mobius, Point};

pub use super::enumerate::Budget;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    /// Free product of the cyclic groups generated by each generator.
    FreeProduct,
    /// Anything else: breadth-first search with matrix dedup.
    Generic,
}

/// Ping-pong region of one free factor, as closed boundary arcs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorDomain {
    Finite(Arc),
    Infinite { plus: Arc, minus: Arc },
}

#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub m: Mobius,
    pub order: Option<u32>,
    pub domain: Option<FactorDomain>,
}

#[derive(Clone, Debug)]
pub struct ParabolicMark {
    pub name: String,
    pub word: Word,
    pub m: Mobius,
    pub fixed: BoundaryPoint,
}

/// Horoball at a marked cusp.
#[derive(Clone, Debug)]
pub struct CuspSpec {
    pub mark: usize,
    pub horoball: Horoball,
}

#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub name: String,
    pub model: String,
    pub structure: Structure,
    pub generators: Vec<Generator>,
    pub parabolic_marks: Vec<ParabolicMark>,
    pub basepoint: Point,
    pub cusp: Option<CuspSpec>,
    pub certificate: Option<PingPongCertificate>,
    /// SHA-256 of the canonical JSON form.
    pub hash: String,
}

impl GroupSpec {
    pub fn names(&self) -> Vec<String> {
        self.generators.iter().map(|g| g.name.clone()).collect()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, GroupError> {
        Word::parse(text, &self.names())
    }

    pub fn eval_word(&self, w: &Word) -> Mobius {
        w.syllables().iter().fold(Mobius::IDENTITY, |acc, s| {
            acc.compose(&self.generators[s.gen as usize].m.pow(s.exp as i64))
        })
    }

    pub fn render_word(&self, w: &Word) -> String {
        w.render(&self.names())
    }

    pub fn mark(&self, name: &str) -> Option<&ParabolicMark> {
        self.parabolic_marks.iter().find(|m| m.name == name)
    }

    pub fn cusp_mark(&self) -> Option<&ParabolicMark> {
        self.cusp.as_ref().map(|c| &self.parabolic_marks[c.mark])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    #[serde(default = "default_model")]
    model: String,
    structure: Structure,
    #[serde(default = "default_basepoint")]
    basepoint: [f64; 2],
    generators: Vec<RawGenerator>,
    #[serde(default)]
    parabolic_marks: Vec<RawMark>,
    #[serde(default)]
    cusp: Option<RawCusp>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    matrix: [f64; 4],
    #[serde(default)]
    order: Option<u32>,
    #[serde(default)]
    domain: Option<RawDomain>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    #[serde(default)]
    arc: Option<[BoundaryPoint; 2]>,
    #[serde(default)]
    plus: Option<[BoundaryPoint; 2]>,
    #[serde(default)]
    minus: Option<[BoundaryPoint; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMark {
    name: String,
    word: String,
    #[serde(default)]
    fixed_point: Option<BoundaryPoint>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCusp {
    mark: String,
    #[serde(default)]
    height: Option<f64>,
    #[serde(default)]
    diameter: Option<f64>,
}

fn default_model() -> String {
    "upper_half_plane".to_string()
}

fn default_basepoint() -> [f64; 2] {
    [0.0, 1.0]
}

pub fn load_group_spec(path: &Path) -> Result<GroupSpec, GroupError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GroupError::Config(format!("{}: {e}", path.display())))?;
    parse_group_spec(&text)
}

/// Parses and validates a JSON group config. Syntax errors carry line and
/// column.
pub fn parse_group_spec(text: &str) -> Result<GroupSpec, GroupError> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
        GroupError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    let canonical = serde_json::to_vec(&raw).expect("serializable");
    let hash = hex::encode(Sha256::digest(&canonical));

    if raw.model != "upper_half_plane" {
        return Err(GroupError::Config(format!(
            "unsupported model {:?}",
            raw.model
        )));
    }
    let basepoint = Point::try_new(raw.basepoint[0], raw.basepoint[1])?;
    if raw.generators.is_empty() {
        return Err(GroupError::Config("no generators".into()));
    }
    let mut generators = Vec::with_capacity(raw.generators.len());
    for g in &raw.generators {
        generators.push(validate_generator(g, raw.structure)?);
    }
    for (i, g) in generators.iter().enumerate() {
        if generators[..i].iter().any(|h| h.name == g.name) {
            return Err(GroupError::Config(format!(
                "duplicate generator name {:?}",
                g.name
            )));
        }
    }
    let names: Vec<String> = generators.iter().map(|g| g.name.clone()).collect();

    let mut parabolic_marks = Vec::new();
    for m in &raw.parabolic_marks {
        let word = Word::parse(&m.word, &names)?;
        let mat = word.syllables().iter().fold(Mobius::IDENTITY, |acc, s| {
            acc.compose(&generators[s.gen as usize].m.pow(s.exp as i64))
        });
        let Classification::Parabolic { fixed } = classify(&mat) else {
            return Err(GroupError::NotParabolic(format!(
                "mark {} (trace {})",
                m.name,
                mat.trace()
            )));
        };
        if let Some(declared) = m.fixed_point {
            if !declared.approx_eq(fixed, 1e-9) {
                return Err(GroupError::Config(format!(
                    "mark {}: declared fixed point {declared} but the element fixes {fixed}",
                    m.name
                )));
            }
        }
        parabolic_marks.push(ParabolicMark {
            name: m.name.clone(),
            word,
            m: mat,
            fixed,
        });
    }

    let cusp = match &raw.cusp {
        None => None,
        Some(c) => {
            let idx = parabolic_marks
                .iter()
                .position(|m| m.name == c.mark)
                .ok_or_else(|| {
                    GroupError::Config(format!("cusp refers to unknown mark {:?}", c.mark))
                })?;
            let horoball = match (parabolic_marks[idx].fixed, c.height, c.diameter) {
                (BoundaryPoint::Infinity, Some(h), None) => Horoball::above(h)?,
                (BoundaryPoint::Real(r), None, Some(d)) => Horoball::tangent_disk(r, d)?,
                _ => {
                    return Err(GroupError::Config(
                        "cusp needs `height` for a cusp at infinity or `diameter` otherwise".into(),
                    ))
                }
            };
            Some(CuspSpec {
                mark: idx,
                horoball,
            })
        }
    };

    let mut spec = GroupSpec {
        name: raw.name.clone(),
        model: raw.model.clone(),
        structure: raw.structure,
        generators,
        parabolic_marks,
        basepoint,
        cusp,
        certificate: None,
        hash,
    };
    if spec.structure == Structure::FreeProduct {
        spec.certificate = Some(ping_pong_check(&spec)?);
    }
    Ok(spec)
}

fn validate_generator(g: &RawGenerator, structure: Structure) -> Result<Generator, GroupError> {
    let bad = |reason: String| GroupError::InvalidGenerator {
        name: g.name.clone(),
        reason,
    };
    if g.name.is_empty() || g.name == "e" || g.name.contains(['.', '^', ' ']) {
        return Err(bad(
            "names must be non-empty, not `e`, without `.`, `^` or spaces".into(),
        ));
    }
    let [a, b, c, d] = g.matrix;
    let det = a * d - b * c;
    if !g.matrix.iter().all(|v| v.is_finite()) {
        return Err(bad("non-finite entry".into()));
    }
    if (det - 1.0).abs() > 1e-9 {
        return Err(bad(format!(
            "determinant {det} is not 1; divide all entries by sqrt(det) = {} if det > 0",
            det.abs().sqrt()
        )));
    }
    let m = Mobius::normalized(a, b, c, d)?;
    let class = classify(&m);
    match (g.order, class) {
        (_, Classification::Identity) => return Err(bad("identity generator".into())),
        (Some(n), _) if n < 2 => return Err(bad(format!("order {n} < 2"))),
        (Some(n), _) => {
            if !m.pow(n as i64).is_identity(1e-9) {
                return Err(bad(format!(
                    "declared order {n} but g^{n} is not the identity"
                )));
            }
        }
        (None, Classification::Elliptic) => {
            return Err(bad("elliptic generator needs a finite `order`".into()));
        }
        (None, _) => {}
    }
    let domain = match &g.domain {
        Some(raw) => Some(match (raw.arc, raw.plus, raw.minus, g.order) {
            (Some([p, q]), None, None, Some(_)) => FactorDomain::Finite(Arc::between(p, q)?),
            (None, Some([p1, q1]), Some([p2, q2]), None) => {
                FactorDomain::Infinite { plus: Arc::between(p1, q1)?, minus: Arc::between(p2, q2)? }
            }
            _ => {
                return Err(bad(
                    "domain must be {\"arc\": [from, to]} for finite order or {\"plus\": .., \"minus\": ..} otherwise"
                        .into(),
                ))
            }
        }),
        None if structure == Structure::FreeProduct => Some(derive_domain(&m, g.order).map_err(bad)?),
        None => None,
    };
    Ok(Generator {
        name: g.name.clone(),
        m,
        order: g.order,
        domain,
    })
}
