//! Subsurface projections: annuli around a curve, and the complement of a
//! curve with a twice-punctured side.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::census::{distance, CensusConfig, SphereCensus};
use crate::curve::{Curve, CurveJson};
use crate::error::{Error, Result};
use crate::intersect::{intersection, shared_segments};
use crate::lowpaths::Outcome;
use crate::mcg::{apply_steps, conjugator, dehn_twist};
use crate::overlay::Overlay;
use crate::path::reverse;
use crate::surface::{dart_rev, Dart, EdgeKind, Preset, Surface};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Threshold of the bounded geodesic image experiments.
    pub m: u32,
    /// Margin added to `m` where a projection must be far beyond it.
    pub slack: u32,
    pub max_twist_power: i64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig { m: 100, slack: 20, max_twist_power: 64 }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.slack == 0 || self.max_twist_power < 1 {
            return Err(Error::Precondition("projection thresholds must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Annular projections

/// One end of a lift crossing the axis of the core curve: where it leaves
/// the axis, on which side, and the ray it follows from there.
#[derive(Clone, Debug)]
struct End {
    pos: i64,
    word: Vec<Dart>,
    start: usize,
    backward: bool,
}

impl End {
    fn dart(&self, t: usize) -> Dart {
        let k = self.word.len();
        if self.backward {
            dart_rev(self.word[(self.start + k * (t / k + 1) - t) % k])
        } else {
            self.word[(self.start + t) % k]
        }
    }
}

/// A lift to the annular cover, as its two ends on the left and right of
/// the core.
#[derive(Clone, Debug)]
struct Arc2 {
    left: End,
    right: End,
}

fn annular_arcs(a: &Curve, x: &Curve) -> Vec<Arc2> {
    let s = a.surface().as_ref();
    let u = a.word();
    let m = u.len();
    let mut out = Vec::new();
    for v in [x.word().to_vec(), reverse(x.word())] {
        let k = v.len();
        let segs = shared_segments(s, u, &v).unwrap_or_default();
        for g in segs.into_iter().filter(|g| g.crosses) {
            let prev_u = u[(g.i + m - 1) % m];
            let prev_v = v[(g.j + k - 1) % k];
            let (t, kv) = s.head(prev_v);
            let start_left = s.is_left_turn(prev_u, s.exit_dart(t, kv));
            let start = End {
                pos: g.i as i64,
                word: v.clone(),
                start: (g.j + k - 1) % k,
                backward: true,
            };
            let end = End {
                pos: (g.i + g.len) as i64,
                word: v.clone(),
                start: (g.j + g.len) % k,
                backward: false,
            };
            out.push(if start_left {
                Arc2 { left: start, right: end }
            } else {
                Arc2 { left: end, right: start }
            });
        }
    }
    out
}

/// Order of two ends on the same side, the second shifted by `shift`
/// along the axis. `left_side` selects the side of the core.
fn compare_ends(s: &Surface, e: &End, f: &End, shift: i64, left_side: bool) -> Ordering {
    let (p, q) = (e.pos, f.pos + shift);
    if p != q {
        return p.cmp(&q);
    }
    let limit = 2 * (e.word.len() + f.word.len()) + 2;
    for t in 1..limit {
        let (de, df) = (e.dart(t), f.dart(t));
        if de != df {
            let e_left = s.is_left_turn(e.dart(t - 1), de);
            // Moving away on the left side, a left turn heads backwards
            // along the core; on the right side it heads forwards.
            return if e_left == left_side { Ordering::Less } else { Ordering::Greater };
        }
    }
    Ordering::Equal
}

/// Intersections of two arcs in the annular cover: translates of `beta`
/// whose ends interleave with those of `alpha`.
fn arc_intersection(s: &Surface, period: i64, alpha: &Arc2, beta: &Arc2) -> u64 {
    let dl = alpha.left.pos - beta.left.pos;
    let dr = alpha.right.pos - beta.right.pos;
    let lo = dl.min(dr).div_euclid(period) - 1;
    let hi = dl.max(dr).div_euclid(period) + 1;
    let mut count = 0;
    for k in lo..=hi {
        let shift = k * period;
        let l = compare_ends(s, &alpha.left, &beta.left, shift, true);
        let r = compare_ends(s, &alpha.right, &beta.right, shift, false);
        if l != Ordering::Equal && r != Ordering::Equal && l != r {
            count += 1;
        }
    }
    count
}

/// Annular projection distance: the largest `1 + i(α, β)` over lifts `α`
/// of `x` and `β` of `y` crossing the core of the annulus around `a`.
pub fn annular_distance(a: &Curve, x: &Curve, y: &Curve) -> Result<u64> {
    a.check_same_surface(x)?;
    a.check_same_surface(y)?;
    if intersection(a, x)? == 0 || intersection(a, y)? == 0 {
        return Err(Error::DoesNotCut);
    }
    let s = a.surface().as_ref();
    let period = a.word().len() as i64;
    let (ax, ay) = (annular_arcs(a, x), annular_arcs(a, y));
    let mut best = 0;
    for alpha in &ax {
        for beta in &ay {
            best = best.max(1 + arc_intersection(s, period, alpha, beta));
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Complement projections

/// Curves obtained by surgering each arc of `x` outside `z` with an arc of
/// `z`: the essential ones disjoint from `z`, sorted and deduplicated. When
/// `x` already misses `z` the result is `x` itself.
pub fn surgery_curves(z: &Curve, x: &Curve) -> Result<Vec<Curve>> {
    z.check_same_surface(x)?;
    if x == z {
        return Ok(Vec::new());
    }
    if intersection(z, x)? == 0 {
        return Ok(vec![x.clone()]);
    }
    let s = z.surface();
    let ov = Overlay::new(x, z)?;
    let (xw, zw) = (ov.word(0).to_vec(), ov.word(1).to_vec());
    let (nx, nz) = (xw.len(), zw.len());
    let along = ov.crossings_along(0);
    let mut out: Vec<Curve> = Vec::new();
    for k in 0..along.len() {
        let (c1, c2) = (along[k], along[(k + 1) % along.len()]);
        let steps = if (c2.own, c2.own_rank) > (c1.own, c1.own_rank) {
            c2.own - c1.own
        } else {
            c2.own + nx - c1.own
        };
        let arc: Vec<Dart> = (1..=steps).map(|t| xw[(c1.own + t) % nx]).collect();
        // Along z from the second crossing back to the first, both ways.
        let forward = if (c1.other, c1.other_rank) > (c2.other, c2.other_rank) {
            c1.other - c2.other
        } else {
            c1.other + nz - c2.other
        };
        let fwd: Vec<Dart> = (1..=forward).map(|t| zw[(c2.other + t) % nz]).collect();
        let bwd: Vec<Dart> =
            (0..nz - forward).map(|t| dart_rev(zw[(c2.other + nz - t) % nz])).collect();
        for back in [fwd, bwd] {
            let mut w = arc.clone();
            w.extend(back);
            if let Ok(c) = Curve::from_word(s, &w) {
                if &c != z && intersection(z, &c)? == 0 && !out.contains(&c) {
                    out.push(c);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// The non-pants complementary component of a pants curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "curve")]
pub enum SubsurfaceId {
    Annulus(CurveJson),
    Complement(CurveJson),
}

/// Lower and upper bounds on a distance in a curve graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: u32,
    pub hi: Option<u32>,
}

impl Bounds {
    pub fn exact(d: u32) -> Self {
        Bounds { lo: d, hi: Some(d) }
    }

    pub fn value(&self) -> Option<u32> {
        (self.hi == Some(self.lo)).then_some(self.lo)
    }

    fn max(self, other: Bounds) -> Bounds {
        Bounds {
            lo: self.lo.max(other.lo),
            hi: match (self.hi, other.hi) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionResult {
    pub subsurface: SubsurfaceId,
    pub images: Vec<CurveJson>,
    pub diameter: Bounds,
}

fn require_cut(z: &Curve, x: &Curve) -> Result<()> {
    z.check_same_surface(x)?;
    if !z.is_pants() {
        return Err(Error::NotPants);
    }
    if x == z {
        return Err(Error::DoesNotCut);
    }
    Ok(())
}

/// Projection of `x` to the complement of the pants curve `z`.
pub fn subsurface_projection(z: &Curve, x: &Curve) -> Result<ProjectionResult> {
    require_cut(z, x)?;
    let images = surgery_curves(z, x)?;
    if images.is_empty() {
        return Err(Error::DoesNotCut);
    }
    let frame = ComplementFrame::new(z)?;
    let mut diameter = Bounds::exact(0);
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            diameter = diameter.max(frame.distance(&images[i], &images[j])?);
        }
    }
    Ok(ProjectionResult {
        subsurface: SubsurfaceId::Complement(z.to_json(None)),
        images: images.iter().map(|c| c.to_json(None)).collect(),
        diameter,
    })
}

/// Projection distance in the complement of `z`: the diameter of the union
/// of both projections.
pub fn d_u(z: &Curve, x: &Curve, y: &Curve) -> Result<Bounds> {
    require_cut(z, x)?;
    require_cut(z, y)?;
    let mut images = surgery_curves(z, x)?;
    for c in surgery_curves(z, y)? {
        if !images.contains(&c) {
            images.push(c);
        }
    }
    if images.is_empty() {
        return Err(Error::DoesNotCut);
    }
    let frame = ComplementFrame::new(z)?;
    let mut out = Bounds::exact(0);
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            out = out.max(frame.distance(&images[i], &images[j])?);
        }
    }
    Ok(out)
}

/// Coordinates on the complement of a pants curve: a mapping class moves
/// the curve around a polygon side away from position 0, after which the
/// complement is read off directly.
struct ComplementFrame {
    surface: Arc<Surface>,
    side: usize,
    steps: Vec<(usize, i64)>,
}

impl ComplementFrame {
    fn new(z: &Curve) -> Result<Self> {
        let (side, steps) = conjugator(z, true)?;
        Ok(ComplementFrame { surface: z.surface().clone(), side, steps })
    }

    fn normalize(&self, x: &Curve) -> Result<Curve> {
        Curve::from_word(&self.surface, &apply_steps(&self.surface, &self.steps, x.word()))
    }

    fn distance(&self, x: &Curve, y: &Curve) -> Result<Bounds> {
        let (gx, gy) = (self.normalize(x)?, self.normalize(y)?);
        if self.surface.puncture_count() == 5 {
            let slope = |c: &Curve| self.slope(c);
            Ok(Bounds::exact(farey_distance(slope(&gx)?, slope(&gy)?)))
        } else {
            let (cx, cy) = (collapse_side(&gx, self.side)?, collapse_side(&gy, self.side)?);
            let cert = distance(&cx, &cy, &CensusConfig::default())?;
            Ok(Bounds { lo: cert.lo, hi: cert.hi })
        }
    }

    /// Slope of a curve in the four-holed complement, relative to chord
    /// curves among the other three positions.
    fn slope(&self, c: &Curve) -> Result<(i64, i64)> {
        let s = &self.surface;
        let others: Vec<u8> = (0..5)
            .filter(|&p| p != self.side && p != self.side + 1)
            .map(|p| s.puncture_cycle()[p])
            .collect();
        let chord = |i: usize, j: usize| Curve::standard(s, others[i], others[j]);
        let q = intersection(c, &chord(0, 1)?)? as i64 / 2;
        let p = intersection(c, &chord(1, 2)?)? as i64 / 2;
        let d = intersection(c, &chord(0, 2)?)? as i64 / 2;
        Ok(if d == (p - q).abs() { (p, q) } else { (-p, q) })
    }
}

/// Distance in the Farey graph between slopes `p/q`.
pub fn farey_distance(x: (i64, i64), y: (i64, i64)) -> u32 {
    let (p1, q1) = x;
    let (r, s) = bezout(p1, q1);
    // p1*s - q1*r = 1; the inverse of [[p1, r], [q1, s]] sends x to 1/0.
    let (p2, q2) = y;
    let mut memo = HashMap::new();
    from_infinity(s * p2 - r * q2, -q1 * p2 + p1 * q2, &mut memo)
}

fn bezout(p: i64, q: i64) -> (i64, i64) {
    // Solves p*s - q*r = 1 for coprime p, q.
    let (mut old_r, mut r) = (p, q);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let k = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - k * r);
        (old_s, s) = (s, old_s - k * s);
        (old_t, t) = (t, old_t - k * t);
    }
    // p*old_s + q*old_t = old_r = ±1.
    let sign = old_r.signum();
    (-old_t * sign, old_s * sign)
}

fn from_infinity(p: i64, q: i64, memo: &mut HashMap<(i64, i64), u32>) -> u32 {
    let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
    if q == 0 {
        return 0;
    }
    if q == 1 {
        return 1;
    }
    if let Some(&d) = memo.get(&(p, q)) {
        return d;
    }
    let f = p.div_euclid(q);
    let d = 1 + [f, f + 1]
        .iter()
        .map(|&n| from_infinity(-q, p - n * q, memo))
        .min()
        .unwrap();
    memo.insert((p, q), d);
    d
}

/// Index of the edge of the five-punctured surface that edge `e` becomes
/// when polygon side `side` of the six-punctured surface is collapsed.
fn collapsed_edge(s: &Surface, side: usize, e: usize) -> Option<usize> {
    let m = s.puncture_count() - 1;
    let squash = |p: usize| if p > side { p - 1 } else { p };
    let edge = &s.edges()[e];
    let ends = edge.ends.map(|l| squash(s.position(l).unwrap()));
    let (a, b) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
    Some(if a == b {
        return None;
    } else if b == a + 1 {
        a
    } else if a == 0 && b == m - 1 {
        m - 1
    } else if edge.kind == EdgeKind::Outer {
        m + (m - 3) + b - 2
    } else {
        m + b - 2
    })
}

/// Reads a curve missing the curve around polygon side `side` on the
/// six-punctured sphere as a curve on the five-punctured sphere where that
/// side is collapsed to one puncture.
fn collapse_side(c: &Curve, side: usize) -> Result<Curve> {
    let s = c.surface();
    if c.coords()[side] != 0 {
        return Err(Error::Precondition("curve crosses the collapsed side".into()));
    }
    let target = Preset::S05Sorted.surface();
    let mut coords = vec![None; target.edge_count()];
    for e in 0..s.edge_count() {
        let Some(idx) = collapsed_edge(s, side, e) else { continue };
        let w = c.coords()[e];
        match coords[idx] {
            Some(old) if old != w => {
                return Err(Error::Audit("collapsed edges disagree".into()));
            }
            _ => coords[idx] = Some(w),
        }
    }
    let coords: Vec<u32> = coords.into_iter().map(|w| w.unwrap_or(0)).collect();
    Curve::from_coords(&target, &coords)
}

/// The non-pants complement of a pants curve on the six-punctured sphere,
/// read as a five-punctured sphere whose extra puncture is the collapsed
/// pants side.
pub struct ComplementChart {
    frame: ComplementFrame,
    z: Curve,
}

impl ComplementChart {
    pub fn new(z: &Curve) -> Result<Self> {
        if z.surface().puncture_count() != 6 {
            return Err(Error::Precondition("complement charts need six punctures".into()));
        }
        if !z.is_pants() {
            return Err(Error::NotPants);
        }
        Ok(ComplementChart { frame: ComplementFrame::new(z)?, z: z.clone() })
    }

    pub fn pants_curve(&self) -> &Curve {
        &self.z
    }

    /// Label of the puncture standing for the pants side.
    pub fn collapsed_label(&self) -> u8 {
        Preset::S05Sorted.surface().puncture_cycle()[self.frame.side]
    }

    /// Image of a curve disjoint from and distinct from the pants curve.
    pub fn to_complement(&self, x: &Curve) -> Result<Curve> {
        self.z.check_same_surface(x)?;
        if x == &self.z || intersection(x, &self.z)? != 0 {
            return Err(Error::Precondition("curve must lie in the complement".into()));
        }
        collapse_side(&self.frame.normalize(x)?, self.frame.side)
    }

    pub fn from_complement(&self, y: &Curve) -> Result<Curve> {
        let s = &self.frame.surface;
        if y.surface().puncture_count() != 5 {
            return Err(Error::SurfaceMismatch);
        }
        let coords: Vec<u32> = (0..s.edge_count())
            .map(|e| collapsed_edge(s, self.frame.side, e).map_or(0, |i| y.coords()[i]))
            .collect();
        let normal = Curve::from_coords(s, &coords)?;
        let inverse: Vec<(usize, i64)> = self.frame.steps.iter().rev().map(|&(e, p)| (e, -p)).collect();
        Curve::from_word(s, &apply_steps(s, &inverse, normal.word()))
    }
}

// ---------------------------------------------------------------------------
// Experiments

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BgiStatus {
    Satisfied,
    Violated,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct BgiReport {
    pub status: BgiStatus,
    pub endpoint_distance: Option<u64>,
    /// First path vertex missing the annulus, if any.
    pub missing_vertex: Option<usize>,
}

/// Checks a certified geodesic against bounded geodesic image for the
/// annulus around `a`.
pub fn bgi_check(path: &[Curve], a: &Curve, cfg: &ProjectionConfig) -> Result<BgiReport> {
    cfg.validate()?;
    let (x, y) = match (path.first(), path.last()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(Error::Precondition("empty path".into())),
    };
    for w in path.windows(2) {
        if w[0] == w[1] || intersection(&w[0], &w[1])? != 0 {
            return Err(Error::Precondition("path has non-adjacent consecutive curves".into()));
        }
    }
    let cert = distance(x, y, &CensusConfig::default())?;
    if cert.value() != Some(path.len() as u32 - 1) {
        return Err(Error::Precondition("path is not a certified geodesic".into()));
    }
    bgi_verdict(path, a, cfg)
}

fn bgi_verdict(path: &[Curve], a: &Curve, cfg: &ProjectionConfig) -> Result<BgiReport> {
    let (x, y) = (&path[0], &path[path.len() - 1]);
    let missing_vertex = path.iter().position(|v| v == a || intersection(v, a).unwrap_or(1) == 0);
    if intersection(a, x)? == 0 || intersection(a, y)? == 0 {
        return Ok(BgiReport { status: BgiStatus::NotApplicable, endpoint_distance: None, missing_vertex });
    }
    let d = annular_distance(a, x, y)?;
    let status = if d < cfg.m as u64 {
        BgiStatus::NotApplicable
    } else if missing_vertex.is_some() {
        BgiStatus::Satisfied
    } else {
        BgiStatus::Violated
    };
    Ok(BgiReport { status, endpoint_distance: Some(d), missing_vertex })
}

/// Least twist power `N` such that every tested power from `N` up to the
/// cap moves `b` at least `m + slack` away from `c` in the annulus of `a`.
pub fn twist_threshold(a: &Curve, b: &Curve, c: &Curve, cfg: &ProjectionConfig) -> Result<i64> {
    cfg.validate()?;
    if intersection(a, b)? == 0 {
        return Err(Error::Precondition("the twisted curve must meet the core twice or more".into()));
    }
    if a == c || intersection(a, c)? == 0 {
        return Err(Error::DoesNotCut);
    }
    let need = (cfg.m + cfg.slack) as u64;
    let mut threshold = None;
    for n in (0..=cfg.max_twist_power).rev() {
        let t = dehn_twist(a, n, b)?;
        if annular_distance(a, &t, c)? >= need {
            threshold = Some(n);
        } else {
            break;
        }
    }
    threshold.ok_or_else(|| {
        Error::NotFoundUnderCap(format!("threshold not reached by twist power {}", cfg.max_twist_power))
    })
}

// ---------------------------------------------------------------------------
// Projection suite

/// Largest window around `|n|` seen for `d_a(b, T_a^n b)` on small powers.
pub const TWIST_WINDOW: u64 = 3;
/// Powers checked against the window.
pub const TWIST_WINDOW_POWERS: std::ops::RangeInclusive<i64> = 3..=20;
/// Lipschitz constant of complement projections.
pub const LIPSCHITZ: u32 = 6;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRecord {
    pub core: CurveJson,
    pub curve: CurveJson,
    pub intersection: u64,
    /// `d_a(b, T_a^n b)` for `n = 1..=max_twist_power`.
    pub forward: Vec<u64>,
    pub backward: Vec<u64>,
    /// First power from which both sequences are non-decreasing.
    pub monotone_from: Option<i64>,
    pub bound: u64,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipschitzRecord {
    pub pivot: CurveJson,
    pub edges: usize,
    pub max_lo: u32,
    pub unresolved: usize,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct BgiRecord {
    pub core: CurveJson,
    pub from: CurveJson,
    pub to: CurveJson,
    pub twist_power: i64,
    pub geodesic_length: Option<usize>,
    pub report: Option<BgiReport>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionReport {
    pub cap: u32,
    pub config: ProjectionConfig,
    pub growth: Vec<GrowthRecord>,
    pub lipschitz: Vec<LipschitzRecord>,
    pub bgi: Vec<BgiRecord>,
}

impl ProjectionReport {
    fn outcomes(&self) -> impl Iterator<Item = &Outcome> {
        self.growth
            .iter()
            .map(|r| &r.outcome)
            .chain(self.lipschitz.iter().map(|r| &r.outcome))
            .chain(self.bgi.iter().map(|r| &r.outcome))
    }

    pub fn failures(&self) -> usize {
        self.outcomes().filter(|o| matches!(o, Outcome::AuditFailure(_))).count()
    }

    pub fn exhausted(&self) -> usize {
        self.outcomes().filter(|o| matches!(o, Outcome::CapExhausted(_))).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }
}

fn growth_record(a: &Curve, b: &Curve, cfg: &ProjectionConfig) -> Result<GrowthRecord> {
    let top = cfg.max_twist_power;
    let mut seqs = [Vec::new(), Vec::new()];
    for (k, sign) in [1i64, -1].into_iter().enumerate() {
        for n in 1..=top {
            let t = dehn_twist(a, sign * n, b)?;
            seqs[k].push(annular_distance(a, b, &t)?);
        }
    }
    let [forward, backward] = seqs;
    let monotone = |s: &[u64]| (0..s.len()).rev().take_while(|&i| i == 0 || s[i - 1] <= s[i]).last();
    let monotone_from = match (monotone(&forward), monotone(&backward)) {
        (Some(x), Some(y)) => Some(x.max(y) as i64 + 1),
        _ => None,
    };
    let bound = (top / 2) as u64;
    let mut problems = Vec::new();
    for (s, name) in [(&forward, "forward"), (&backward, "backward")] {
        if *s.last().unwrap() <= bound {
            problems.push(format!("{name} sequence stays at or below {bound}"));
        }
        for n in TWIST_WINDOW_POWERS.clone().filter(|&n| n <= top) {
            let d = s[n as usize - 1];
            if d + TWIST_WINDOW < n as u64 || d > n as u64 + TWIST_WINDOW {
                problems.push(format!("{name} d_a at power {n} is {d}"));
            }
        }
    }
    if monotone_from.map_or(true, |n| n > top / 2) {
        problems.push("sequence not eventually non-decreasing".into());
    }
    let outcome = if problems.is_empty() { Outcome::Passed } else { Outcome::AuditFailure(problems.join("; ")) };
    Ok(GrowthRecord {
        core: a.to_json(None),
        curve: b.to_json(None),
        intersection: intersection(a, b)?,
        forward,
        backward,
        monotone_from,
        bound,
        outcome,
    })
}

fn lipschitz_record(census: &SphereCensus, z: &Curve, edges: &[(usize, usize)]) -> LipschitzRecord {
    let per_edge: Vec<Result<Bounds>> = edges
        .par_iter()
        .filter(|&&(x, y)| census.curve(x) != z && census.curve(y) != z)
        .map(|&(x, y)| d_u(z, census.curve(x), census.curve(y)))
        .collect();
    let mut max_lo = 0;
    let mut unresolved = 0;
    let mut problems = Vec::new();
    for b in &per_edge {
        match b {
            Ok(b) => {
                max_lo = max_lo.max(b.lo);
                if b.lo > LIPSCHITZ {
                    problems.push(format!("edge with d_U >= {}", b.lo));
                } else if b.hi.map_or(true, |h| h > LIPSCHITZ) {
                    unresolved += 1;
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    let outcome = if !problems.is_empty() {
        Outcome::AuditFailure(problems.join("; "))
    } else if unresolved > 0 {
        Outcome::CapExhausted(format!("{unresolved} edges without an upper bound of {LIPSCHITZ}"))
    } else {
        Outcome::Passed
    };
    LipschitzRecord { pivot: z.to_json(None), edges: per_edge.len(), max_lo, unresolved, outcome }
}

/// Twists `y` about `a` until the annular distance from `x` reaches `m`,
/// then checks the certified geodesic returned by the distance oracle.
fn bgi_record(a: &Curve, x: &Curve, y: &Curve, sign: i64, cfg: &ProjectionConfig) -> Result<BgiRecord> {
    let need = cfg.m as u64;
    let mut n = sign * need as i64;
    let mut far = dehn_twist(a, n, y)?;
    for _ in 0..8 {
        let d = annular_distance(a, x, &far)?;
        if d >= need {
            break;
        }
        n += sign * (need - d) as i64;
        far = dehn_twist(a, n, y)?;
    }
    let mut record = BgiRecord {
        core: a.to_json(None),
        from: x.to_json(None),
        to: far.to_json(None),
        twist_power: n,
        geodesic_length: None,
        report: None,
        outcome: Outcome::Passed,
    };
    if annular_distance(a, x, &far)? < need {
        record.outcome = Outcome::CapExhausted("annular distance did not reach the threshold".into());
        return Ok(record);
    }
    let cert = distance(x, &far, &CensusConfig::default())?;
    if cert.semi_certified() {
        record.outcome = Outcome::CapExhausted("endpoint distance not certified exactly".into());
        return Ok(record);
    }
    let path = cert
        .witness_path
        .iter()
        .map(|c| Curve::from_coords(a.surface(), c))
        .collect::<Result<Vec<_>>>()?;
    // The certificate was just computed for these endpoints; re-auditing its
    // path stands in for the certification inside `bgi_check`.
    cert.audit(x, &far)?;
    record.geodesic_length = Some(path.len() - 1);
    let report = bgi_verdict(&path, a, cfg)?;
    record.outcome = match report.status {
        BgiStatus::Satisfied => Outcome::Passed,
        BgiStatus::Violated => Outcome::AuditFailure("geodesic cuts the annulus at every vertex".into()),
        BgiStatus::NotApplicable => Outcome::AuditFailure("threshold reached but check not applicable".into()),
    };
    record.report = Some(report);
    Ok(record)
}

/// Runs the three projection audits on a census: twist growth of annular
/// distances, the Lipschitz bound for complement projections over census
/// edges, and bounded geodesic image on twisted geodesics.
pub fn verify_projection(census: &SphereCensus, samples: usize, seed: u64, cfg: &ProjectionConfig) -> Result<ProjectionReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = census.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && census.intersection(i, j) > 0)
        .collect();
    if pairs.is_empty() {
        return Err(Error::Precondition("census has no intersecting pairs".into()));
    }

    let growth_pairs: Vec<(usize, usize)> = pairs.choose_multiple(&mut rng, samples).copied().collect();
    let growth = growth_pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (census.curve(i), census.curve(j));
            growth_record(a, b, cfg).unwrap_or_else(|e| GrowthRecord {
                core: a.to_json(None),
                curve: b.to_json(None),
                intersection: census.intersection(i, j),
                forward: Vec::new(),
                backward: Vec::new(),
                monotone_from: None,
                bound: 0,
                outcome: Outcome::from_error(&e),
            })
        })
        .collect();

    let edges = census.edges();
    let mut pivots = vec![census.center_index()];
    let others: Vec<usize> = (0..n).filter(|&i| i != census.center_index()).collect();
    pivots.extend(others.choose_multiple(&mut rng, samples.min(others.len())).copied());
    let lipschitz = pivots.iter().map(|&z| lipschitz_record(census, census.curve(z), &edges)).collect();

    // A curve w, a core a and an endpoint x both disjoint from w, and a
    // curve y two steps from w. Twisting y about a fixes w, so the endpoints
    // stay within distance 3 while their annular distance grows. Both x and
    // y meet a at most four times to keep the twisted overlays small.
    let light = |i: usize, j: usize| (1..=4).contains(&census.intersection(i, j));
    let mut triples = Vec::new();
    let mut attempts = 0;
    while triples.len() < samples && attempts < 1000 * samples.max(1) {
        attempts += 1;
        let w = rng.gen_range(0..n);
        let near = census.neighbors(w);
        let (Some(&a), Some(&x), Some(&u)) = (near.choose(&mut rng), near.choose(&mut rng), near.choose(&mut rng)) else {
            continue;
        };
        let Some(&y) = census.neighbors(u).choose(&mut rng) else { continue };
        if a != x && y != x && y != a && light(a, x) && light(a, y) {
            triples.push((a, x, y, if rng.gen_bool(0.5) { 1 } else { -1 }));
        }
    }
    let bgi = triples
        .par_iter()
        .map(|&(a, x, y, sign)| {
            let (a, x, y) = (census.curve(a), census.curve(x), census.curve(y));
            bgi_record(a, x, y, sign, cfg).unwrap_or_else(|e| BgiRecord {
                core: a.to_json(None),
                from: x.to_json(None),
                to: y.to_json(None),
                twist_power: 0,
                geodesic_length: None,
                report: None,
                outcome: Outcome::from_error(&e),
            })
        })
        .collect();

    Ok(ProjectionReport { cap: census.cap(), config: cfg.clone(), growth, lipschitz, bgi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcg::{half_twist, MappingClassWord};
    use crate::surface::Preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn farey_distances() {
        assert_eq!(farey_distance((1, 0), (0, 1)), 1);
        assert_eq!(farey_distance((1, 0), (1, 2)), 2);
        assert_eq!(farey_distance((0, 1), (1, 0)), 1);
        assert_eq!(farey_distance((2, 5), (2, 5)), 0);
        // 1/0 - 0/1 - 1/3 - 2/7 (a continued fraction path).
        assert_eq!(farey_distance((1, 0), (2, 7)), 3);
        assert_eq!(farey_distance((1, 0), (5, 3)), 2);
        assert_eq!(farey_distance((1, 2), (1, 3)), 1);
    }

    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }

    /// Breadth-first search in the Farey graph truncated to small slopes.
    #[test]
    fn farey_distance_matches_truncated_search() {
        let bound = 24;
        let mut verts: Vec<(i64, i64)> = vec![(1, 0)];
        for q in 1..=bound {
            for p in -bound..=bound {
                if gcd(p, q) == 1 {
                    verts.push((p, q));
                }
            }
        }
        let adj = |x: (i64, i64), y: (i64, i64)| (x.0 * y.1 - x.1 * y.0).abs() == 1;
        let small: Vec<usize> = (0..verts.len())
            .filter(|&i| verts[i].0.abs() <= 5 && verts[i].1 <= 5)
            .collect();
        for &src in &small {
            let mut dist = vec![u32::MAX; verts.len()];
            dist[src] = 0;
            let mut queue = std::collections::VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for v in 0..verts.len() {
                    if dist[v] == u32::MAX && adj(verts[u], verts[v]) {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for &dst in &small {
                assert_eq!(farey_distance(verts[src], verts[dst]), dist[dst], "{:?} {:?}", verts[src], verts[dst]);
            }
        }
    }

    #[test]
    fn annular_distance_grows_with_twisting() {
        let s = Preset::S05Fig1.surface();
        let a = p(&s, 1, 2);
        let b = p(&s, 2, 5);
        assert_eq!(annular_distance(&a, &b, &b).unwrap(), 1);
        assert!(annular_distance(&a, &b, &p(&s, 3, 4)).is_err());
        let mut last = 0;
        for n in 1..=12 {
            let t = dehn_twist(&a, n, &b).unwrap();
            let d = annular_distance(&a, &b, &t).unwrap();
            assert!(d + 3 >= n as u64 && d <= n as u64 + 3, "n={n} d={d}");
            assert!(d >= last);
            last = d;
            let back = dehn_twist(&a, -n, &b).unwrap();
            assert_eq!(annular_distance(&a, &b, &back).unwrap(), d);
            assert_eq!(annular_distance(&a, &t, &b).unwrap(), d);
        }
    }

    #[test]
    fn annular_triangle_inequality() {
        let s = Preset::S05Sorted.surface();
        let a = p(&s, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = [p(&s, 1, 2), p(&s, 3, 5), p(&s, 1, 3)];
        let mut pool = Vec::new();
        for b in &base {
            for _ in 0..3 {
                let w = MappingClassWord::random(&s, 3, &mut rng);
                let x = w.apply(b).unwrap();
                if intersection(&a, &x).unwrap() > 0 {
                    pool.push(x);
                }
            }
        }
        for x in &pool {
            for y in &pool {
                for w in &pool {
                    let d = |u: &Curve, v: &Curve| annular_distance(&a, u, v).unwrap();
                    assert!(d(x, y) <= d(x, w) + d(w, y));
                    assert_eq!(d(x, y), d(y, x));
                }
            }
        }
    }

    #[test]
    fn surgery_projection_on_five_punctures() {
        let s = Preset::S05Fig1.surface();
        let z = p(&s, 1, 2);
        let inside = p(&s, 3, 4);
        let r = subsurface_projection(&z, &inside).unwrap();
        assert_eq!(r.images, vec![inside.to_json(None)]);
        let v = p(&s, 2, 5);
        let r = subsurface_projection(&z, &v).unwrap();
        assert!(!r.images.is_empty());
        for img in &r.images {
            let c = img.to_curve().unwrap();
            assert_eq!(intersection(&c, &z).unwrap(), 0);
        }
        assert!(matches!(subsurface_projection(&z, &z), Err(Error::DoesNotCut)));
        // Half twists about z fix the complement pointwise up to isotopy, so
        // projections agree.
        let t = half_twist(&z, 3, &v).unwrap();
        assert_eq!(d_u(&z, &v, &t).unwrap().value(), r.diameter.value().map(|d| d.max(0)));
    }

    #[test]
    fn complement_distance_matches_slope_geometry() {
        let s = Preset::S05Sorted.surface();
        let z = p(&s, 1, 2);
        // Inside the complement, chord curves among 3, 4, 5 meet twice.
        let (x, y) = (p(&s, 3, 4), p(&s, 4, 5));
        assert_eq!(d_u(&z, &x, &y).unwrap().value(), Some(1));
        assert_eq!(d_u(&z, &x, &x).unwrap().value(), Some(0));
        let far = dehn_twist(&p(&s, 3, 5), 2, &x).unwrap();
        assert!(d_u(&z, &x, &far).unwrap().lo >= 2);
    }

    #[test]
    fn collapse_on_six_punctures() {
        let s = Preset::S06Sorted.surface();
        let z = p(&s, 3, 4);
        let (x, y) = (p(&s, 1, 2), p(&s, 5, 6));
        assert_eq!(d_u(&z, &x, &y).unwrap().value(), Some(1));
        let w = p(&s, 2, 5);
        let d = d_u(&z, &x, &w).unwrap();
        assert!(d.lo >= 1 && d.hi.is_some());
    }

    #[test]
    fn complement_chart_round_trips() {
        let s = Preset::S06Sorted.surface();
        let z = p(&s, 2, 5);
        let chart = ComplementChart::new(&z).unwrap();
        let census = crate::census::build_census(&p(&s, 1, 3), 16).unwrap();
        let mut seen = 0;
        for x in census.curves() {
            if x == &z || intersection(x, &z).unwrap() != 0 {
                assert!(chart.to_complement(x).is_err());
                continue;
            }
            let y = chart.to_complement(x).unwrap();
            assert_eq!(y.surface().puncture_count(), 5);
            assert_eq!(&chart.from_complement(&y).unwrap(), x);
            seen += 1;
        }
        assert!(seen > 3);
    }

    #[test]
    fn projection_suite_on_a_small_census() {
        let s = Preset::S05Fig1.surface();
        let census = crate::census::build_census(&p(&s, 1, 2), 16).unwrap();
        let report = verify_projection(&census, 4, 3, &ProjectionConfig::default()).unwrap();
        assert_eq!(report.growth.len(), 4);
        assert_eq!(report.lipschitz.len(), 5);
        assert_eq!(report.bgi.len(), 4);
        assert_eq!(report.exhausted(), 0);
        assert_eq!(report.failures(), 0, "{:#?}", report);
        for r in &report.bgi {
            assert!(r.report.as_ref().is_some_and(|b| b.endpoint_distance >= Some(100)) || r.outcome != Outcome::Passed);
        }
        assert!(report.lipschitz.iter().all(|r| r.max_lo <= LIPSCHITZ));
    }

}
