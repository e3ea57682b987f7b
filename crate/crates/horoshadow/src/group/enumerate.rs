use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{FactorDomain, GroupSpec, Structure};
use super::pingpong::{finite_exponents, half_plane_distance};
use super::{classify, Classification, GroupError, Isometry, Syllable, Word};
use crate::geometry::{dist, Arc, Mobius, Point};

/// Caps on enumeration work.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    pub max_elements: usize,
    pub max_explored: usize,
}

impl Budget {
    pub const ENV: &'static str = "HOROSHADOW_MAX_ELEMENTS";
    pub const DEFAULT_MAX_ELEMENTS: usize = 20_000_000;

    /// Reads `HOROSHADOW_MAX_ELEMENTS`; explored words are capped at 40 times that.
    pub fn from_env() -> Self {
        let max_elements = std::env::var(Self::ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(Self::DEFAULT_MAX_ELEMENTS);
        Budget::with_elements(max_elements)
    }

    pub fn with_elements(max_elements: usize) -> Self {
        Budget {
            max_elements,
            max_explored: max_elements.saturating_mul(40).max(1_000),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::with_elements(Self::DEFAULT_MAX_ELEMENTS)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitPoint {
    pub gamma: Isometry,
    pub image: Point,
    pub dist: f64,
    pub direction_angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DedupReport {
    pub strategy: String,
    /// Duplicate group elements detected (and dropped).
    pub collisions: usize,
    pub explored: usize,
    /// True when completeness follows from the ping-pong certificate; false
    /// for the heuristic pruning of the breadth-first search.
    pub certified: bool,
}

/// All orbit points within a radius, sorted by distance then shortlex word.
#[derive(Clone, Debug)]
pub struct OrbitBall {
    pub radius: f64,
    pub basepoint: Point,
    pub points: Vec<OrbitPoint>,
    pub dedup_report: DedupReport,
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `#{γ : d(o, γo) ≤ t}`.
    pub fn count_within(&self, t: f64) -> usize {
        self.points.partition_point(|p| p.dist <= t)
    }

    /// The sub-ball of radius `t ≤ radius`.
    pub fn truncate(&self, t: f64) -> OrbitBall {
        OrbitBall {
            radius: t.min(self.radius),
            basepoint: self.basepoint,
            points: self.points[..self.count_within(t)].to_vec(),
            dedup_report: self.dedup_report.clone(),
        }
    }
}

pub fn enumerate_orbit(spec: &GroupSpec, radius: f64) -> Result<OrbitBall, GroupError> {
    enumerate_orbit_with(spec, radius, Budget::from_env())
}

pub fn enumerate_orbit_with(
    spec: &GroupSpec,
    radius: f64,
    budget: Budget,
) -> Result<OrbitBall, GroupError> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(GroupError::BadRadius(radius));
    }
    let ctx = Ctx::new(spec, radius, budget);
    let (mut points, report) = match spec.structure {
        Structure::FreeProduct => free_product(spec, &ctx)?,
        Structure::Generic => breadth_first(spec, &ctx, None)?,
    };
    sort_points(&mut points);
    Ok(OrbitBall {
        radius,
        basepoint: spec.basepoint,
        points,
        dedup_report: report,
    })
}

fn sort_points(points: &mut [OrbitPoint]) {
    points.par_sort_by(|a, b| {
        a.dist.total_cmp(&b.dist).then_with(|| {
            let wa = a.gamma.word.as_ref();
            let wb = b.gamma.word.as_ref();
            match (wa, wb) {
                (Some(x), Some(y)) => x.shortlex_cmp(y),
                _ => std::cmp::Ordering::Equal,
            }
        })
    });
}

struct Ctx {
    o: Point,
    frame: Mobius,
    radius: f64,
    budget: Budget,
    emitted: AtomicUsize,
    explored: AtomicUsize,
    stop: AtomicBool,
}

impl Ctx {
    fn new(spec: &GroupSpec, radius: f64, budget: Budget) -> Self {
        Ctx {
            o: spec.basepoint,
            frame: Mobius::center_at(spec.basepoint),
            radius,
            budget,
            emitted: AtomicUsize::new(0),
            explored: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
        }
    }

    fn point(&self, m: Mobius, word: Word) -> OrbitPoint {
        let image = m.apply(self.o);
        let d = dist(self.o, image);
        let direction_angle = if d == 0.0 {
            0.0
        } else {
            self.frame.apply(image).radial_direction().angle()
        };
        OrbitPoint {
            gamma: Isometry {
                m,
                word: Some(word),
            },
            image,
            dist: d,
            direction_angle,
        }
    }

    fn budget_error(&self) -> GroupError {
        GroupError::Budget {
            emitted: self.emitted.load(Ordering::Relaxed),
            explored: self.explored.load(Ordering::Relaxed),
            limit: self.budget.max_elements,
            certified_radius: 0.0,
        }
    }

    /// Counts one explored word; false once a cap is hit.
    fn tick(&self, emitted: bool) -> bool {
        let e = self.explored.fetch_add(1, Ordering::Relaxed) + 1;
        let n = if emitted {
            self.emitted.fetch_add(1, Ordering::Relaxed) + 1
        } else {
            0
        };
        if e > self.budget.max_explored || n > self.budget.max_elements {
            self.stop.store(true, Ordering::Relaxed);
        }
        !self.stop.load(Ordering::Relaxed)
    }

    /// Distance from the basepoint to the half-plane facing `m(arc)`.
    fn bound(&self, m: &Mobius, arc: &Arc) -> f64 {
        half_plane_distance(self.frame.compose(m).apply_arc(arc).len())
    }
}

enum Kind {
    Finite {
        arc: Arc,
        powers: Vec<(i32, Mobius)>,
    },
    Cyclic {
        g: Mobius,
        ginv: Mobius,
        plus: Arc,
        minus: Arc,
        parabolic: bool,
        others: Vec<Arc>,
    },
}

struct Factor {
    gen: u16,
    kind: Kind,
}

struct Frame {
    m: Mobius,
    /// Arena node of the last syllable; `NO_NODE` for the task's seed.
    node: u32,
    last: Option<usize>,
}

const NO_NODE: u32 = u32::MAX;

fn factors(spec: &GroupSpec) -> Vec<Factor> {
    let all_arcs = |skip: usize| -> Vec<Arc> {
        spec.generators
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, g)| match g.domain.expect("validated free product") {
                FactorDomain::Finite(a) => vec![a],
                FactorDomain::Infinite { plus, minus } => vec![plus, minus],
            })
            .collect()
    };
    spec.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let kind = match (g.domain.expect("validated free product"), g.order) {
                (FactorDomain::Finite(arc), Some(n)) => Kind::Finite {
                    arc,
                    powers: finite_exponents(n)
                        .into_iter()
                        .map(|k| (k, g.m.pow(k as i64)))
                        .collect(),
                },
                (FactorDomain::Infinite { plus, minus }, _) => Kind::Cyclic {
                    g: g.m,
                    ginv: g.m.inverse(),
                    plus,
                    minus,
                    parabolic: matches!(classify(&g.m), Classification::Parabolic { .. }),
                    others: all_arcs(i),
                },
                _ => unreachable!("validated free product"),
            };
            Factor {
                gen: i as u16,
                kind,
            }
        })
        .collect()
}

/// Children of `frame` whose subtrees may meet the ball, in a fixed order,
/// passed as (matrix, appended syllable, factor index).
fn children(
    frame: &Frame,
    facs: &[Factor],
    ctx: &Ctx,
    mut visit: impl FnMut(Mobius, Syllable, usize) -> bool,
) {
    let t = ctx.radius;
    for (fi, f) in facs.iter().enumerate() {
        if frame.last == Some(fi) {
            continue;
        }
        match &f.kind {
            Kind::Finite { arc, powers } => {
                if ctx.bound(&frame.m, arc) > t {
                    continue;
                }
                for (k, gk) in powers {
                    if !visit(
                        frame.m.compose(gk),
                        Syllable {
                            gen: f.gen,
                            exp: *k,
                        },
                        fi,
                    ) {
                        return;
                    }
                }
            }
            Kind::Cyclic {
                g,
                ginv,
                plus,
                minus,
                parabolic,
                others,
            } => {
                for (sign, step, region) in [(1i32, g, plus), (-1i32, ginv, minus)] {
                    let mut cur = frame.m;
                    let mut e = 0i32;
                    if *parabolic {
                        // Each piece of the lower bound is unimodal in e.
                        let pieces = |m: &Mobius| -> Vec<f64> {
                            let mut v = vec![dist(ctx.o, m.apply(ctx.o))];
                            v.extend(others.iter().map(|a| ctx.bound(m, a)));
                            v
                        };
                        let mut prev = pieces(&cur);
                        loop {
                            cur = cur.compose(step);
                            e += 1;
                            let now = pieces(&cur);
                            let lb = now.iter().cloned().fold(f64::INFINITY, f64::min);
                            if lb <= t {
                                if !visit(
                                    cur,
                                    Syllable {
                                        gen: f.gen,
                                        exp: sign * e,
                                    },
                                    fi,
                                ) {
                                    return;
                                }
                            } else if now.iter().zip(&prev).all(|(a, b)| a > b) {
                                break;
                            }
                            if ctx.stop.load(Ordering::Relaxed) {
                                return;
                            }
                            prev = now;
                        }
                    } else {
                        // Subtrees below g^e lie in g^(e-1)(region), a nested family.
                        loop {
                            if ctx.bound(&cur, region) > t {
                                break;
                            }
                            cur = cur.compose(step);
                            e += 1;
                            if !visit(
                                cur,
                                Syllable {
                                    gen: f.gen,
                                    exp: sign * e,
                                },
                                fi,
                            ) {
                                return;
                            }
                        }
                    }
                }
            }
        }
    }
}

fn free_product(spec: &GroupSpec, ctx: &Ctx) -> Result<(Vec<OrbitPoint>, DedupReport), GroupError> {
    let facs = factors(spec);
    let root = Frame {
        m: Mobius::IDENTITY,
        node: NO_NODE,
        last: None,
    };
    let mut seeds = Vec::new();
    children(&root, &facs, ctx, |m, s, fi| {
        seeds.push((
            Frame {
                m,
                node: NO_NODE,
                last: Some(fi),
            },
            Word(vec![s]),
        ));
        true
    });
    ctx.tick(true);
    let mut points = vec![ctx.point(Mobius::IDENTITY, Word::identity())];
    let parts: Vec<Vec<OrbitPoint>> = seeds
        .into_par_iter()
        .map(|(seed, prefix)| {
            // Words share prefixes through a parent-pointer arena.
            let mut arena: Vec<(u32, Syllable)> = Vec::new();
            let mut hits: Vec<(u32, Mobius)> = Vec::new();
            let mut stack = vec![seed];
            while let Some(frame) = stack.pop() {
                let image = frame.m.apply(ctx.o);
                let inside = dist(ctx.o, image) <= ctx.radius;
                if !ctx.tick(inside) {
                    break;
                }
                if inside {
                    hits.push((frame.node, frame.m));
                }
                let base = stack.len();
                children(&frame, &facs, ctx, |m, s, fi| {
                    arena.push((frame.node, s));
                    stack.push(Frame {
                        m,
                        node: (arena.len() - 1) as u32,
                        last: Some(fi),
                    });
                    true
                });
                stack[base..].reverse();
            }
            hits.into_iter()
                .map(|(node, m)| {
                    let mut tail = Vec::new();
                    let mut n = node;
                    while n != NO_NODE {
                        let (parent, s) = arena[n as usize];
                        tail.push(s);
                        n = parent;
                    }
                    let mut w = prefix.0.clone();
                    w.extend(tail.into_iter().rev());
                    ctx.point(m, Word(w))
                })
                .collect()
        })
        .collect();
    if ctx.stop.load(Ordering::Relaxed) {
        return Err(ctx.budget_error());
    }
    for p in parts {
        points.extend(p);
    }
    let collisions = count_collisions(&points);
    let report = DedupReport {
        strategy: "normal_forms".into(),
        collisions,
        explored: ctx.explored.load(Ordering::Relaxed),
        certified: true,
    };
    Ok((points, report))
}

/// Hash key of a group element; integer matrices are keyed exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Key([i64; 4]);

pub(crate) const DEDUP_QUANTUM: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-12;

fn integral(m: &Mobius) -> bool {
    m.entries()
        .iter()
        .all(|v| (v - v.round()).abs() <= 1e-9 && v.abs() < 9.0e15)
}

/// Sign fixed by the first entry that is clearly nonzero.
fn sign_fixed(m: &Mobius, eps: f64) -> [f64; 4] {
    let e = m.entries();
    let lead = e.iter().find(|v| v.abs() > eps).copied().unwrap_or(1.0);
    if lead < 0.0 {
        e.map(|v| -v)
    } else {
        e
    }
}

fn exact_key(m: &Mobius) -> Key {
    Key(sign_fixed(m, 0.5).map(|v| v.round() as i64))
}

/// Cells a matrix may share with near-equal matrices.
fn quantized_keys(m: &Mobius) -> Vec<Key> {
    let e = sign_fixed(m, DEDUP_QUANTUM);
    let mut keys = vec![[0i64; 4]];
    for (i, v) in e.iter().enumerate() {
        let s = v / DEDUP_QUANTUM;
        let k = s.floor();
        let frac = s - k;
        let mut next = Vec::with_capacity(keys.len() * 2);
        for key in &keys {
            let mut a = *key;
            a[i] = k as i64;
            next.push(a);
            let slack = DEDUP_TOL / DEDUP_QUANTUM;
            if frac < slack {
                let mut b = *key;
                b[i] = k as i64 - 1;
                next.push(b);
            } else if frac > 1.0 - slack {
                let mut b = *key;
                b[i] = k as i64 + 1;
                next.push(b);
            }
        }
        keys = next;
    }
    keys.into_iter().map(Key).collect()
}

/// Dedup set for group elements.
pub(crate) struct ElementSet {
    exact: bool,
    map: HashMap<Key, Vec<Mobius>>,
}

impl ElementSet {
    pub(crate) fn new(exact: bool) -> Self {
        ElementSet {
            exact,
            map: HashMap::new(),
        }
    }

    /// Inserts `m`; false when an equal element is already present.
    pub(crate) fn insert(&mut self, m: &Mobius) -> bool {
        if self.exact {
            return self.map.insert(exact_key(m), Vec::new()).is_none();
        }
        let keys = quantized_keys(m);
        let same = |q: &Mobius| {
            let a = sign_fixed(q, DEDUP_QUANTUM);
            let b = sign_fixed(m, DEDUP_QUANTUM);
            a.iter()
                .zip(&b)
                .all(|(x, y)| (x - y).abs() <= DEDUP_TOL * (1.0 + x.abs()))
        };
        for k in &keys {
            if let Some(v) = self.map.get(k) {
                if v.iter().any(same) {
                    return false;
                }
            }
        }
        self.map.entry(keys[0]).or_default().push(*m);
        true
    }
}

fn count_collisions(points: &[OrbitPoint]) -> usize {
    let exact = points.iter().all(|p| integral(&p.gamma.m));
    let mut set = ElementSet::new(exact);
    points.iter().filter(|p| !set.insert(&p.gamma.m)).count()
}

/// Breadth-first search over the Cayley graph, pruning words farther than
/// the radius plus the largest generator displacement. `force_exact`
/// overrides the choice of dedup.
fn breadth_first(
    spec: &GroupSpec,
    ctx: &Ctx,
    force_exact: Option<bool>,
) -> Result<(Vec<OrbitPoint>, DedupReport), GroupError> {
    let mut moves: Vec<(u16, i32, Mobius, Option<u32>)> = Vec::new();
    for (i, g) in spec.generators.iter().enumerate() {
        moves.push((i as u16, 1, g.m, g.order));
        if g.order != Some(2) {
            moves.push((i as u16, -1, g.m.inverse(), g.order));
        }
    }
    let slack = moves
        .iter()
        .map(|(_, _, m, _)| dist(ctx.o, m.apply(ctx.o)))
        .fold(0.0, f64::max);
    let exact = force_exact.unwrap_or_else(|| spec.generators.iter().all(|g| integral(&g.m)));
    let mut seen = ElementSet::new(exact);
    let mut collisions = 0;
    seen.insert(&Mobius::IDENTITY);
    let mut points = vec![ctx.point(Mobius::IDENTITY, Word::identity())];
    ctx.tick(true);
    let mut frontier = vec![(Mobius::IDENTITY, Word::identity())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (m, w) in &frontier {
            for (gen, k, step, order) in &moves {
                let c = m.compose(step);
                let image = c.apply(ctx.o);
                let d = dist(ctx.o, image);
                if d > ctx.radius + slack {
                    continue;
                }
                if !seen.insert(&c) {
                    collisions += 1;
                    continue;
                }
                let mut word = w.clone();
                word.push_reduced(*gen, *k, *order);
                let inside = d <= ctx.radius;
                if !ctx.tick(inside) {
                    return Err(ctx.budget_error());
                }
                if inside {
                    points.push(ctx.point(c, word.clone()));
                }
                next.push((c, word));
            }
        }
        frontier = next;
    }
    let report = DedupReport {
        strategy: if exact {
            "bfs_exact_integer".into()
        } else {
            "bfs_quantized".into()
        },
        collisions,
        explored: ctx.explored.load(Ordering::Relaxed),
        certified: false,
    };
    Ok((points, report))
}

/// Breadth-first enumeration regardless of the declared structure; the
/// dedup can be forced to exact or quantized for cross-checks.
pub fn enumerate_breadth_first(
    spec: &GroupSpec,
    radius: f64,
    exact_dedup: Option<bool>,
) -> Result<OrbitBall, GroupError> {
    let ctx = Ctx::new(spec, radius, Budget::from_env());
    let (mut points, report) = breadth_first(spec, &ctx, exact_dedup)?;
    sort_points(&mut points);
    Ok(OrbitBall {
        radius,
        basepoint: spec.basepoint,
        points,
        dedup_report: report,
    })
}

/// Writes `word,a,b,c,d,dist,direction_angle` rows after `#` header lines.
pub fn write_orbit_csv<W: Write>(
    ball: &OrbitBall,
    names: &[String],
    header: &[String],
    mut w: W,
) -> std::io::Result<()> {
    for h in header {
        writeln!(w, "# {h}")?;
    }
    writeln!(w, "word,a,b,c,d,dist,direction_angle")?;
    for p in &ball.points {
        let word = p
            .gamma
            .word
            .as_ref()
            .map(|x| x.render(names))
            .unwrap_or_default();
        let m = p.gamma.m;
        writeln!(
            w,
            "{word},{},{},{},{},{},{}",
            m.a, m.b, m.c, m.d, p.dist, p.direction_angle
        )?;
    }
    Ok(())
}

/// One row of an orbit CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRow {
    pub word: String,
    pub m: Mobius,
    pub dist: f64,
    pub direction_angle: f64,
}

pub fn read_orbit_csv<R: BufRead>(r: R) -> Result<Vec<OrbitRow>, GroupError> {
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| GroupError::OrbitFile(e.to_string()))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            if line.trim() != "word,a,b,c,d,dist,direction_angle" {
                return Err(GroupError::OrbitFile(format!(
                    "line {}: unexpected header {line:?}",
                    n + 1
                )));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(GroupError::OrbitFile(format!(
                "line {}: expected 7 fields",
                n + 1
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| GroupError::OrbitFile(format!("line {}: bad number {s:?}", n + 1)))
        };
        rows.push(OrbitRow {
            word: f[0].to_string(),
            m: Mobius::raw(num(f[1])?, num(f[2])?, num(f[3])?, num(f[4])?),
            dist: num(f[5])?,
            direction_angle: num(f[6])?,
        });
    }
    if !header_seen {
        return Err(GroupError::OrbitFile("missing header".into()));
    }
    Ok(rows)
}
