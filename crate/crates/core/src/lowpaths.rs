//! Paths that climb above a layer on the five-punctured sphere: preliminary
//! paths around a pivot curve, detours off its link, the Dehn twist push-up
//! and the connection lemmas built on them.
//!
//! Every vertex of a constructed path is `T_a^N(v)` for a census curve `v`
//! and the pivot `a`. Searches run on the census and are mapped through the
//! twist; the resulting curves are then certified from scratch.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::{distance, CensusConfig, DistanceCertificate, SphereCensus};
use crate::curve::{Curve, CurveJson};
use crate::error::{Error, Result};
use crate::intersect::intersection;
use crate::mcg::dehn_twist;
use crate::overlay::fills;
use crate::pentagon::{complete_pentagon_edge, is_pentagon, vertex_flags};
use crate::projection::{twist_threshold, ProjectionConfig};

/// Limits for path constructions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct LowPathConfig {
    /// Twist thresholds: pushed vertices end at least `m + slack` from the
    /// center in the pivot's annulus.
    pub projection: ProjectionConfig,
    pub distances: CensusConfig,
}

impl Default for LowPathConfig {
    fn default() -> Self {
        LowPathConfig {
            projection: ProjectionConfig { m: 8, slack: 4, max_twist_power: 64 },
            distances: CensusConfig::default(),
        }
    }
}

/// Certified facts about one path vertex.
#[derive(Clone, Debug, Serialize)]
pub struct VertexNote {
    pub curve: CurveJson,
    pub to_center: DistanceCertificate,
    pub to_pivot: DistanceCertificate,
    pub in_first_sphere: bool,
    pub in_third_sphere: bool,
    /// Within distance 2 of a pivot neighbor lying in layer `r - 1` or `r`.
    pub near_low_link: bool,
}

/// A path with per-vertex certificates relative to the census center and a
/// pivot curve.
#[derive(Clone, Debug, Serialize)]
pub struct AnnotatedPath {
    pub pivot: CurveJson,
    pub twist_power: i64,
    pub notes: Vec<VertexNote>,
    #[serde(skip)]
    pub vertices: Vec<Curve>,
    #[serde(skip)]
    bases: Vec<usize>,
}

impl AnnotatedPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Largest certified upper bound on the distance to the center.
    pub fn max_center_distance(&self) -> Option<u32> {
        self.notes.iter().map(|n| n.to_center.hi).try_fold(0, |m, h| h.map(|h| m.max(h)))
    }

    pub fn max_pivot_distance(&self) -> Option<u32> {
        self.notes.iter().map(|n| n.to_pivot.hi).try_fold(0, |m, h| h.map(|h| m.max(h)))
    }

    /// Whether every vertex is certified in the layers `lo..=hi`.
    pub fn within_layers(&self, lo: u32, hi: u32) -> bool {
        self.notes.iter().all(|n| n.to_center.lo >= lo && n.to_center.hi.is_some_and(|h| h <= hi))
    }
}

/// Census state for one pivot and one twist power.
struct Frame<'a> {
    census: &'a SphereCensus,
    pivot: usize,
    r: u32,
    power: i64,
    cfg: &'a LowPathConfig,
    to_pivot: Vec<DistanceCertificate>,
    hops: RefCell<HashMap<usize, Vec<Option<u32>>>>,
    images: RefCell<HashMap<usize, Curve>>,
}

impl<'a> Frame<'a> {
    fn new(census: &'a SphereCensus, pivot: usize, power: i64, cfg: &'a LowPathConfig) -> Result<Self> {
        let r = census
            .layer_of(pivot)
            .ok_or_else(|| Error::Precondition("pivot has no certified layer".into()))?;
        Ok(Frame {
            census,
            pivot,
            r,
            power,
            cfg,
            to_pivot: census.distances_from(pivot)?,
            hops: RefCell::default(),
            images: RefCell::default(),
        })
    }

    fn pivot_curve(&self) -> &Curve {
        self.census.curve(self.pivot)
    }

    fn pivot_hops(&self, v: usize) -> Option<u32> {
        self.to_pivot[v].hi
    }

    fn hops(&self, from: usize, to: usize) -> Option<u32> {
        self.hops
            .borrow_mut()
            .entry(from)
            .or_insert_with(|| self.census.hops_from(from))[to]
    }

    fn image(&self, v: usize) -> Result<Curve> {
        if let Some(c) = self.images.borrow().get(&v) {
            return Ok(c.clone());
        }
        let c = dehn_twist(self.pivot_curve(), self.power, self.census.curve(v))?;
        self.images.borrow_mut().insert(v, c.clone());
        Ok(c)
    }

    fn images(&self, vs: &[usize]) -> Result<Vec<Curve>> {
        vs.iter().map(|&v| self.image(v)).collect()
    }

    fn census_path(&self, from: usize, to: usize) -> Result<Vec<usize>> {
        self.census
            .path_within(from, to, |_| Ok(true))?
            .ok_or_else(|| Error::NotFoundUnderCap("census is disconnected".into()))
    }

    /// Pivot neighbors (and the pivot) are fixed by the twist, so a census
    /// path to one of them maps to a path from the image.
    fn fixed_targets(&self) -> Vec<usize> {
        let mut out = vec![self.pivot];
        out.extend_from_slice(self.census.neighbors(self.pivot));
        out
    }

    /// Upper bound on the distance from the image of `v` to the center via
    /// fixed curves, without calling the distance oracle.
    fn hinted_center_bound(&self, v: usize) -> Option<u32> {
        self.fixed_targets()
            .into_iter()
            .filter_map(|z| Some(self.hops(v, z)? + self.census.layer_of(z)?))
            .min()
    }

    fn center_certificate(&self, v: usize) -> Result<DistanceCertificate> {
        let x = self.image(v)?;
        let c = self.census.center();
        let mut cert = distance(&x, c, &self.cfg.distances)?;
        if x == *self.census.curve(v) {
            let path = self.census.certificate(v).witness_path.clone();
            sharpen(&mut cert, &x, c, from_coords(self.census, &path)?)?;
        }
        let best = self.fixed_targets().into_iter().filter_map(|z| {
            Some((self.hops(v, z)? + self.census.layer_of(z)?, z))
        });
        if let Some((_, z)) = best.min() {
            let mut path = self.images(&self.census_path(v, z)?)?;
            let tail = from_coords(self.census, &self.census.certificate(z).witness_path)?;
            path.extend(tail.into_iter().skip(1));
            sharpen(&mut cert, &x, c, path)?;
        }
        Ok(cert)
    }

    fn pivot_certificate(&self, v: usize) -> Result<DistanceCertificate> {
        let x = self.image(v)?;
        let a = self.pivot_curve();
        let mut cert = distance(&x, a, &self.cfg.distances)?;
        let path = self.images(&self.census_path(v, self.pivot)?)?;
        sharpen(&mut cert, &x, a, path)?;
        Ok(cert)
    }

    /// Whether the image of `v` lies in layer `r + 1` or `r + 2`.
    fn above(&self, v: usize) -> Result<bool> {
        let x = self.image(v)?;
        let c = self.census.center();
        let lo = if x == *c {
            0
        } else if intersection(&x, c)? == 0 {
            1
        } else if !fills(&x, c)? {
            2
        } else {
            3
        };
        if lo < self.r + 1 {
            return Ok(false);
        }
        if self.hinted_center_bound(v).is_some_and(|h| h <= self.r + 2) {
            return Ok(true);
        }
        Ok(self.center_certificate(v)?.hi.is_some_and(|h| h <= self.r + 2))
    }

    fn annotate(&self, bases: Vec<usize>) -> Result<AnnotatedPath> {
        let vertices = self.images(&bases)?;
        for w in vertices.windows(2) {
            if w[0] == w[1] || intersection(&w[0], &w[1])? != 0 {
                return Err(Error::Audit("constructed path has non-adjacent consecutive curves".into()));
            }
        }
        let low_link: Vec<&Curve> = self
            .census
            .neighbors(self.pivot)
            .iter()
            .filter(|&&z| {
                self.census.layer_of(z).is_some_and(|l| l + 1 >= self.r && l <= self.r)
            })
            .map(|&z| self.census.curve(z))
            .collect();
        let mut notes = Vec::with_capacity(bases.len());
        for (&v, x) in bases.iter().zip(&vertices) {
            let to_pivot = self.pivot_certificate(v)?;
            let mut near_low_link = false;
            for z in &low_link {
                if x == *z || intersection(x, z)? == 0 || !fills(x, z)? {
                    near_low_link = true;
                    break;
                }
            }
            notes.push(VertexNote {
                curve: x.to_json(None),
                to_center: self.center_certificate(v)?,
                in_first_sphere: to_pivot.value() == Some(1),
                in_third_sphere: to_pivot.value() == Some(3),
                to_pivot,
                near_low_link,
            });
        }
        Ok(AnnotatedPath {
            pivot: self.pivot_curve().to_json(None),
            twist_power: self.power,
            notes,
            vertices,
            bases,
        })
    }

    /// Census path from `prev` to `next` whose images stay in layers
    /// `r + 1`, `r + 2` and within `radius` of the image of `mid`.
    fn detour_above(&self, prev: usize, mid: usize, next: usize, radius: u32) -> Result<Option<Vec<usize>>> {
        self.census.path_within(prev, next, |v| {
            Ok(self.hops(mid, v).is_some_and(|d| d <= radius) && self.above(v)?)
        })
    }

    /// Pentagon through adjacent `x`, `y` whose other curves map above
    /// layer `r`, returned as the path x, a4, a2, a5, y.
    fn pentagon_above(&self, x: usize, y: usize) -> Result<Option<Vec<usize>>> {
        let census = self.census;
        for &i4 in census.neighbors(x) {
            if i4 == y || !self.above(i4)? {
                continue;
            }
            for &i5 in census.neighbors(y) {
                if i5 == x || i5 == i4 || !self.above(i5)? {
                    continue;
                }
                for &i2 in census.neighbors(i4) {
                    if !census.is_adjacent(i2, i5) || [x, y].contains(&i2) || !self.above(i2)? {
                        continue;
                    }
                    let curves = self.images(&[x, i2, y, i4, i5])?;
                    if is_pentagon(&curves.try_into().expect("five curves"))? {
                        return Ok(Some(vec![x, i4, i2, i5, y]));
                    }
                }
            }
        }
        Ok(None)
    }
}

fn from_coords(census: &SphereCensus, path: &[Vec<u32>]) -> Result<Vec<Curve>> {
    path.iter().map(|v| Curve::from_coords(census.surface(), v)).collect()
}

/// Lowers the upper bound of `cert` when `path` is a shorter audited path
/// from `a` to `b`.
fn sharpen(cert: &mut DistanceCertificate, a: &Curve, b: &Curve, path: Vec<Curve>) -> Result<()> {
    if path.first() != Some(a) || path.last() != Some(b) {
        return Err(Error::Audit("hint path has wrong endpoints".into()));
    }
    let len = path.len() as u32 - 1;
    if cert.hi.is_some_and(|h| h <= len) {
        return Ok(());
    }
    for w in path.windows(2) {
        if w[0] == w[1] || intersection(&w[0], &w[1])? != 0 {
            return Err(Error::Audit("hint path has non-adjacent consecutive curves".into()));
        }
    }
    if len < cert.lo {
        return Err(Error::Audit("hint path is shorter than the certified lower bound".into()));
    }
    cert.hi = Some(len);
    cert.witness_path = path.iter().map(|c| c.coords().to_vec()).collect();
    Ok(())
}

fn layer(census: &SphereCensus, i: usize) -> Result<u32> {
    census
        .layer_of(i)
        .ok_or_else(|| Error::Precondition("curve has no certified layer".into()))
}

fn check_endpoints(census: &SphereCensus, a: usize, b: usize, b2: usize) -> Result<u32> {
    let r = layer(census, a)?;
    for e in [b, b2] {
        if layer(census, e)? != r + 1 || !census.is_adjacent(a, e) {
            return Err(Error::Precondition("endpoints must be pivot neighbors one layer out".into()));
        }
    }
    Ok(r)
}

fn preliminary_bases(frame: &Frame, b: usize, b2: usize) -> Result<Vec<usize>> {
    let census = frame.census;
    if b == b2 {
        return Ok(vec![b]);
    }
    let base = census
        .path_within(b, b2, |v| Ok(matches!(frame.pivot_hops(v), Some(1 | 2))))?
        .ok_or_else(|| Error::NotFoundUnderCap("no path through the first two pivot spheres".into()))?;
    let r = frame.r;
    let mut out = vec![base[0]];
    for j in 1..base.len() - 1 {
        let x = base[j];
        let low = census.layer_of(x).is_some_and(|l| l + 1 >= r && l <= r);
        if frame.pivot_hops(x) == Some(1) && low {
            let detour = detour_bases(frame, base[j - 1], x, base[j + 1])?;
            out.extend_from_slice(&detour[1..detour.len() - 1]);
        } else {
            out.push(x);
        }
    }
    out.push(*base.last().unwrap());
    Ok(out)
}

fn detour_bases(frame: &Frame, prev: usize, mid: usize, next: usize) -> Result<Vec<usize>> {
    if prev == next {
        return Ok(vec![prev]);
    }
    let from_mid = frame.census.distances_from(mid)?;
    frame
        .census
        .path_within(prev, next, |v| {
            Ok(matches!(frame.pivot_hops(v), Some(2 | 3)) && from_mid[v].hi.is_some_and(|d| d <= 2))
        })?
        .ok_or_else(|| Error::NotFoundUnderCap("no detour off the pivot link".into()))
}

/// Path from `b` to `b2` near the pivot `a` that meets the pivot's link only
/// in layer `r + 1`.
pub fn preliminary_path(
    census: &SphereCensus,
    a: &Curve,
    b: &Curve,
    b2: &Curve,
    cfg: &LowPathConfig,
) -> Result<AnnotatedPath> {
    let (ai, bi, b2i) = (census.require(a)?, census.require(b)?, census.require(b2)?);
    check_endpoints(census, ai, bi, b2i)?;
    let frame = Frame::new(census, ai, 0, cfg)?;
    frame.annotate(preliminary_bases(&frame, bi, b2i)?)
}

/// Replacement for `prev, mid, next` with `mid` adjacent to the pivot: a
/// path from `prev` to `next` in the pivot's second and third spheres,
/// within distance 2 of `mid`.
pub fn detour_off_s1(
    census: &SphereCensus,
    prev: &Curve,
    mid: &Curve,
    next: &Curve,
    a: &Curve,
    cfg: &LowPathConfig,
) -> Result<AnnotatedPath> {
    let ai = census.require(a)?;
    let [p, m, n] = [prev, mid, next].map(|c| census.require(c));
    let (p, m, n) = (p?, m?, n?);
    let frame = Frame::new(census, ai, 0, cfg)?;
    if frame.pivot_hops(m) != Some(1) || !census.is_adjacent(p, m) || !census.is_adjacent(m, n) {
        return Err(Error::Precondition("middle curve must be a pivot neighbor on the path".into()));
    }
    if ![p, n].iter().all(|&v| matches!(frame.pivot_hops(v), Some(1 | 2))) {
        return Err(Error::Precondition("path must stay in the first two pivot spheres".into()));
    }
    frame.annotate(detour_bases(&frame, p, m, n)?)
}

/// Outcome of checking the four push-up properties on a path.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PushUpAudit {
    pub pivot_range: bool,
    pub center_range: bool,
    pub unique_backtrack: bool,
    /// Checked only when the pivot has unique backtracking in the census.
    pub no_sidestep: Option<bool>,
    /// Every distance to the center is exact (possibly exhaustion-backed).
    pub exact: bool,
    pub exhaustion_backed: usize,
    pub failures: Vec<String>,
}

impl PushUpAudit {
    pub fn passed(&self) -> bool {
        self.pivot_range && self.center_range && self.unique_backtrack && self.no_sidestep != Some(false)
    }
}

/// Checks the four push-up properties on the interior of `path`.
pub fn audit_push_up(census: &SphereCensus, a: &Curve, path: &AnnotatedPath) -> Result<PushUpAudit> {
    let ai = census.require(a)?;
    let r = layer(census, ai)?;
    let ubt = r > 0 && vertex_flags(census, a)?.unique_backtracking;
    let mut out = PushUpAudit {
        pivot_range: true,
        center_range: true,
        unique_backtrack: true,
        no_sidestep: ubt.then_some(true),
        exact: true,
        ..Default::default()
    };
    let n = path.len();
    for (k, (x, note)) in path.vertices.iter().zip(&path.notes).enumerate() {
        let (tc, tp) = (&note.to_center, &note.to_pivot);
        out.exact &= tc.is_exact();
        if tc.is_exact() && tc.semi_certified() {
            out.exhaustion_backed += 1;
        }
        if k == 0 || k + 1 == n {
            continue;
        }
        if tp.lo < 1 || tp.hi.is_none_or(|h| h > 3) {
            out.pivot_range = false;
            out.failures.push(format!("vertex {k}: distance to pivot outside 1..=3"));
        }
        if tc.lo < r || tc.hi.is_none_or(|h| h > r + 2) {
            out.center_range = false;
            out.failures.push(format!("vertex {k}: distance to center outside {r}..={}", r + 2));
        }
        if tc.value() != Some(r) {
            continue;
        }
        let common: Vec<usize> = census
            .neighbors(ai)
            .iter()
            .copied()
            .filter(|&z| intersection(census.curve(z), x).is_ok_and(|i| i == 0) && census.curve(z) != x)
            .collect();
        let mut backtracks = Vec::new();
        for &z in census.layer(r.saturating_sub(1)) {
            if r > 0 && intersection(census.curve(z), x)? == 0 {
                backtracks.push(z);
            }
        }
        let ok = tp.value() == Some(2)
            && common.len() == 1
            && census.layer_of(common[0]) == Some(r - 1)
            && backtracks == common;
        if !ok {
            out.unique_backtrack = false;
            out.failures.push(format!("vertex {k}: no unique backtrack through a pivot neighbor"));
        }
        if ubt {
            for &s in census.layer(r) {
                if census.curve(s) != x && intersection(census.curve(s), x)? == 0 {
                    out.no_sidestep = Some(false);
                    out.failures.push(format!("vertex {k}: sidesteps within the census"));
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn twist_power_for(frame_census: &SphereCensus, ai: usize, bases: &[usize], cfg: &LowPathConfig) -> Result<i64> {
    let a = frame_census.curve(ai);
    let c = frame_census.center();
    // A pivot missing the center commutes with it; twisting cannot move
    // anything away from the center.
    if a == c || intersection(a, c)? == 0 {
        return Ok(0);
    }
    let mut n = 0;
    for &v in bases {
        let y = frame_census.curve(v);
        if intersection(a, y)? > 0 {
            n = n.max(twist_threshold(a, y, c, &cfg.projection)?);
        }
    }
    Ok(n)
}

/// Applies `T_a^k` to a path built around the pivot `a`.
pub fn twist_path(census: &SphereCensus, path: &AnnotatedPath, k: i64, cfg: &LowPathConfig) -> Result<AnnotatedPath> {
    let a = path.pivot.to_curve()?;
    Frame::new(census, census.require(&a)?, path.twist_power + k, cfg)?.annotate(path.bases.clone())
}

/// Twists the interior of a preliminary path about the pivot far enough
/// that every twisted vertex is pushed to layer `r` or beyond.
pub fn push_up(census: &SphereCensus, a: &Curve, prelim: &AnnotatedPath, cfg: &LowPathConfig) -> Result<AnnotatedPath> {
    let ai = census.require(a)?;
    if prelim.pivot.coords != a.coords() {
        return Err(Error::Precondition("expected a preliminary path around this pivot".into()));
    }
    let power = prelim.twist_power + twist_power_for(census, ai, &prelim.bases, cfg)?;
    let path = Frame::new(census, ai, power, cfg)?.annotate(prelim.bases.clone())?;
    let audit = audit_push_up(census, a, &path)?;
    if !audit.passed() {
        return Err(Error::Audit(audit.failures.join("; ")));
    }
    Ok(path)
}

fn push_up_bases(census: &SphereCensus, ai: usize, bases: Vec<usize>, cfg: &LowPathConfig) -> Result<AnnotatedPath> {
    let power = twist_power_for(census, ai, &bases, cfg)?;
    Frame::new(census, ai, power, cfg)?.annotate(bases)
}

fn low_vertex(note: &VertexNote, r: u32) -> bool {
    note.to_center.lo <= r
}

/// Replaces every layer-`r` vertex of a pushed path by a detour above it.
fn lift_low_vertices(frame: &Frame, pushed: &AnnotatedPath, radii: &[u32]) -> Result<Vec<usize>> {
    let r = frame.r;
    let bases = &pushed.bases;
    let low: Vec<bool> = pushed.notes.iter().map(|n| low_vertex(n, r)).collect();
    if low.first() == Some(&true) || low.last() == Some(&true) {
        return Err(Error::Audit("path endpoint lies in the pivot layer".into()));
    }
    let mut out = vec![bases[0]];
    for k in 1..bases.len().saturating_sub(1) {
        if !low[k] {
            out.push(bases[k]);
            continue;
        }
        if low[k - 1] || low[k + 1] {
            return Err(Error::Audit("adjacent vertices in the pivot layer".into()));
        }
        let mut found = None;
        for &radius in radii {
            found = frame.detour_above(bases[k - 1], bases[k], bases[k + 1], radius)?;
            if found.is_some() {
                break;
            }
        }
        let detour = found.ok_or_else(|| Error::NotFoundUnderCap("no detour above the pivot layer".into()))?;
        out.extend_from_slice(&detour[1..detour.len() - 1]);
    }
    if bases.len() > 1 {
        out.push(*bases.last().unwrap());
    }
    Ok(out)
}

fn audit_above(path: &AnnotatedPath, r: u32, ball: u32) -> Result<()> {
    if !path.within_layers(r + 1, r + 2) {
        return Err(Error::Audit(format!("path leaves layers {}..={}", r + 1, r + 2)));
    }
    if path.max_pivot_distance().is_none_or(|d| d > ball) {
        return Err(Error::Audit(format!("path leaves the ball of radius {ball} about the pivot")));
    }
    Ok(())
}

/// Path between two outward neighbors of a pivot with unique backtracking,
/// in layers `r + 1`, `r + 2` and within distance 4 of the pivot.
pub fn connect_above_ubt(
    census: &SphereCensus,
    a: &Curve,
    b: &Curve,
    b2: &Curve,
    cfg: &LowPathConfig,
) -> Result<AnnotatedPath> {
    let (ai, bi, b2i) = (census.require(a)?, census.require(b)?, census.require(b2)?);
    let r = check_endpoints(census, ai, bi, b2i)?;
    if r == 0 || !vertex_flags(census, a)?.unique_backtracking {
        return Err(Error::Precondition("pivot lacks unique backtracking".into()));
    }
    let prelim = Frame::new(census, ai, 0, cfg)?;
    let pushed = push_up_bases(census, ai, preliminary_bases(&prelim, bi, b2i)?, cfg)?;
    let audit = audit_push_up(census, a, &pushed)?;
    if !audit.passed() {
        return Err(Error::Audit(audit.failures.join("; ")));
    }
    let frame = Frame::new(census, ai, pushed.twist_power, cfg)?;
    let path = frame.annotate(lift_low_vertices(&frame, &pushed, &[2])?)?;
    audit_above(&path, r, 4)?;
    Ok(path)
}

/// Path between two outward neighbors of any pivot in layer `r`, in layers
/// `r + 1`, `r + 2` and within distance 6 of the pivot.
pub fn connect_above(
    census: &SphereCensus,
    a: &Curve,
    b: &Curve,
    b2: &Curve,
    cfg: &LowPathConfig,
) -> Result<AnnotatedPath> {
    let (ai, bi, b2i) = (census.require(a)?, census.require(b)?, census.require(b2)?);
    let r = check_endpoints(census, ai, bi, b2i)?;
    let prelim = Frame::new(census, ai, 0, cfg)?;
    let pushed = push_up_bases(census, ai, preliminary_bases(&prelim, bi, b2i)?, cfg)?;
    let audit = audit_push_up(census, a, &pushed)?;
    if !(audit.pivot_range && audit.center_range && audit.unique_backtrack) {
        return Err(Error::Audit(audit.failures.join("; ")));
    }
    let frame = Frame::new(census, ai, pushed.twist_power, cfg)?;
    // Separate adjacent layer-r vertices with pentagons.
    let low: Vec<bool> = pushed.notes.iter().map(|n| low_vertex(n, r)).collect();
    let mut bases = vec![pushed.bases[0]];
    for k in 1..pushed.bases.len() {
        if low[k - 1] && low[k] {
            let pent = frame
                .pentagon_above(pushed.bases[k - 1], pushed.bases[k])?
                .ok_or_else(|| Error::NotFoundUnderCap("no pentagon above an adjacent low pair".into()))?;
            bases.extend_from_slice(&pent[1..]);
        } else {
            bases.push(pushed.bases[k]);
        }
    }
    let separated = frame.annotate(bases)?;
    let path = frame.annotate(lift_low_vertices(&frame, &separated, &[2, 4])?)?;
    audit_above(&path, r, 6)?;
    Ok(path)
}

/// How one sampled check ended.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "status", content = "detail")]
pub enum Outcome {
    Passed,
    CapExhausted(String),
    AuditFailure(String),
}

impl Outcome {
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::NotFoundUnderCap(_) | Error::ResourceCap(_) => Outcome::CapExhausted(e.to_string()),
            _ => Outcome::AuditFailure(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectRecord {
    pub pivot: CurveJson,
    pub from: CurveJson,
    pub to: CurveJson,
    pub outcome: Outcome,
    pub path_length: Option<usize>,
    pub max_pivot_distance: Option<u32>,
    pub twist_power: Option<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PentagonPathRecord {
    pub from: CurveJson,
    pub to: CurveJson,
    pub outcome: Outcome,
    pub interior_layers: Vec<u32>,
}

/// Evidence that layers `r` and `r + 1` are connected: outward connections
/// around sampled pivots, and pentagon paths over sampled adjacent pairs.
#[derive(Clone, Debug, Serialize)]
pub struct WrightReport {
    pub r: u32,
    pub cap: u32,
    pub connections: Vec<ConnectRecord>,
    pub adjacent_pairs: Vec<PentagonPathRecord>,
    /// Adjacent pairs available in layer `r` before sampling.
    pub adjacent_pair_count: usize,
}

impl WrightReport {
    pub fn failures(&self) -> usize {
        let bad = |o: &Outcome| matches!(o, Outcome::AuditFailure(_));
        self.connections.iter().filter(|c| bad(&c.outcome)).count()
            + self.adjacent_pairs.iter().filter(|c| bad(&c.outcome)).count()
    }

    pub fn exhausted(&self) -> usize {
        let ex = |o: &Outcome| matches!(o, Outcome::CapExhausted(_));
        self.connections.iter().filter(|c| ex(&c.outcome)).count()
            + self.adjacent_pairs.iter().filter(|c| ex(&c.outcome)).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0 && self.exhausted() == 0
    }
}

/// Samples pivots in layer `r` with two outward neighbors and adjacent
/// pairs in layer `r`, and checks both connection conditions.
pub fn verify_wright_conditions(
    census: &SphereCensus,
    r: u32,
    samples: usize,
    seed: u64,
    cfg: &LowPathConfig,
) -> Result<WrightReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for &z in census.layer(r) {
        let out: Vec<usize> =
            census.neighbors(z).iter().copied().filter(|&x| census.layer_of(x) == Some(r + 1)).collect();
        for (i, &x) in out.iter().enumerate() {
            for &y in &out[i + 1..] {
                triples.push((z, x, y));
            }
        }
    }
    triples.shuffle(&mut rng);
    triples.truncate(samples);
    let mut pairs: Vec<(usize, usize)> = census
        .edges()
        .into_iter()
        .filter(|&(i, j)| census.layer_of(i) == Some(r) && census.layer_of(j) == Some(r))
        .collect();
    let adjacent_pair_count = pairs.len();
    pairs.shuffle(&mut rng);
    pairs.truncate(samples);

    let connections = triples
        .par_iter()
        .map(|&(z, x, y)| {
            let (zc, xc, yc) = (census.curve(z), census.curve(x), census.curve(y));
            let res = connect_above(census, zc, xc, yc, cfg);
            ConnectRecord {
                pivot: zc.to_json(None),
                from: xc.to_json(None),
                to: yc.to_json(None),
                outcome: res.as_ref().map_or_else(Outcome::from_error, |_| Outcome::Passed),
                path_length: res.as_ref().ok().map(|p| p.len()),
                max_pivot_distance: res.as_ref().ok().and_then(|p| p.max_pivot_distance()),
                twist_power: res.as_ref().ok().map(|p| p.twist_power),
            }
        })
        .collect();
    let adjacent_pairs = pairs
        .par_iter()
        .map(|&(i, j)| pentagon_path_record(census, i, j, r))
        .collect();
    Ok(WrightReport { r, cap: census.cap(), connections, adjacent_pairs, adjacent_pair_count })
}

/// One sampled push-up: pivot `a`, endpoints `b, b2` one layer out.
#[derive(Clone, Debug, Serialize)]
pub struct PushUpRecord {
    pub pivot: CurveJson,
    pub from: CurveJson,
    pub to: CurveJson,
    pub outcome: Outcome,
    pub twist_power: Option<i64>,
    pub audit: Option<PushUpAudit>,
    pub notes: Vec<VertexNote>,
}

/// Builds, pushes up and audits one preliminary path.
pub fn push_up_record(census: &SphereCensus, a: &Curve, b: &Curve, b2: &Curve, cfg: &LowPathConfig) -> PushUpRecord {
    let mut rec = PushUpRecord {
        pivot: a.to_json(None),
        from: b.to_json(None),
        to: b2.to_json(None),
        outcome: Outcome::Passed,
        twist_power: None,
        audit: None,
        notes: Vec::new(),
    };
    let pushed = preliminary_path(census, a, b, b2, cfg)
        .and_then(|prelim| push_up(census, a, &prelim, cfg))
        .and_then(|path| Ok((audit_push_up(census, a, &path)?, path)));
    match pushed {
        Ok((audit, path)) => {
            rec.outcome = if !audit.passed() {
                Outcome::AuditFailure(audit.failures.join("; "))
            } else if !audit.exact {
                Outcome::CapExhausted("a distance to the center is not exact".into())
            } else {
                Outcome::Passed
            };
            rec.twist_power = Some(path.twist_power);
            rec.audit = Some(audit);
            rec.notes = path.notes;
        }
        Err(e) => rec.outcome = Outcome::from_error(&e),
    }
    rec
}

/// Samples pivots in layer `r` with two outward neighbors and checks the
/// push-up properties on the path between them.
pub fn verify_push_up(
    census: &SphereCensus,
    r: u32,
    samples: usize,
    seed: u64,
    cfg: &LowPathConfig,
) -> Result<Vec<PushUpRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for &a in census.layer(r) {
        let out: Vec<usize> =
            census.neighbors(a).iter().copied().filter(|&x| census.layer_of(x) == Some(r + 1)).collect();
        for (i, &x) in out.iter().enumerate() {
            for &y in &out[i + 1..] {
                triples.push((a, x, y));
            }
        }
    }
    if triples.is_empty() && samples > 0 {
        return Err(Error::Precondition(format!("no pivot in layer {r} has two outward neighbors")));
    }
    triples.shuffle(&mut rng);
    triples.truncate(samples);
    Ok(triples
        .par_iter()
        .map(|&(a, x, y)| push_up_record(census, census.curve(a), census.curve(x), census.curve(y), cfg))
        .collect())
}

fn pentagon_path_record(census: &SphereCensus, i: usize, j: usize, r: u32) -> PentagonPathRecord {
    let (x, y) = (census.curve(i), census.curve(j));
    let mut rec = PentagonPathRecord {
        from: x.to_json(None),
        to: y.to_json(None),
        outcome: Outcome::Passed,
        interior_layers: Vec::new(),
    };
    let w = match complete_pentagon_edge(census, x, y) {
        Ok(w) => w,
        Err(e) => {
            rec.outcome = Outcome::from_error(&e);
            return rec;
        }
    };
    // The 5-cycle a1, a3, a5, a2, a4 read from a1 back to a3.
    for k in [3, 1, 4] {
        let c = w.curves[k].to_curve().and_then(|c| census.require(&c));
        match c.map(|c| census.layer_of(c)) {
            Ok(Some(l)) => rec.interior_layers.push(l),
            _ => rec.outcome = Outcome::AuditFailure("pentagon curve without a layer".into()),
        }
    }
    if rec.interior_layers.iter().any(|&l| l != r + 1 && l != r + 2) {
        rec.outcome = Outcome::AuditFailure("pentagon path leaves the two layers above".into());
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::surface::{Preset, Surface};
    use std::sync::{Arc, OnceLock};

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    fn census24() -> &'static SphereCensus {
        static C: OnceLock<SphereCensus> = OnceLock::new();
        C.get_or_init(|| {
            let s = Preset::S05Fig1.surface();
            build_census(&p(&s, 1, 2), 24).unwrap()
        })
    }

    fn outward(census: &SphereCensus, a: usize) -> Vec<usize> {
        let r = census.layer_of(a).unwrap();
        census.neighbors(a).iter().copied().filter(|&x| census.layer_of(x) == Some(r + 1)).collect()
    }

    #[test]
    fn trivial_paths() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let s = census.surface().clone();
        let a = p(&s, 3, 4);
        let b = census.curve(outward(census, census.index_of(&a).unwrap())[0]).clone();
        for path in [
            preliminary_path(census, &a, &b, &b, &cfg).unwrap(),
            connect_above(census, &a, &b, &b, &cfg).unwrap(),
            connect_above_ubt(census, &a, &b, &b, &cfg).unwrap(),
        ] {
            assert_eq!(path.vertices, vec![b.clone()]);
        }
        let c = census.center();
        assert!(matches!(preliminary_path(census, &a, c, &b, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn preliminary_paths_in_the_first_layer() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let s = census.surface().clone();
        let a = p(&s, 3, 4);
        let ai = census.index_of(&a).unwrap();
        let out = outward(census, ai);
        let mut checked = 0;
        for &b in &out[..4] {
            for &b2 in &out[..4] {
                let path = preliminary_path(census, &a, census.curve(b), census.curve(b2), &cfg).unwrap();
                for n in &path.notes {
                    let d = n.to_pivot.value().unwrap();
                    assert!((1..=3).contains(&d));
                    if n.in_first_sphere {
                        assert_eq!(n.to_center.value(), Some(2));
                    }
                    if n.in_third_sphere {
                        assert!(n.near_low_link);
                    }
                    n.to_center.audit(&n.curve.to_curve().unwrap(), census.center()).unwrap();
                }
                checked += 1;
            }
        }
        assert_eq!(checked, 16);
    }

    #[test]
    fn detours_avoid_the_pivot_link() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let s = census.surface().clone();
        let a = p(&s, 3, 4);
        let ai = census.index_of(&a).unwrap();
        let to_a = census.distances_from(ai).unwrap();
        // A vertex in the pivot's link, between two curves of its second sphere.
        let mid = census.neighbors(ai).iter().copied().find(|&m| {
            census.neighbors(m).iter().filter(|&&v| to_a[v].hi == Some(2)).count() >= 2
        });
        let mid = mid.unwrap();
        let ends: Vec<usize> =
            census.neighbors(mid).iter().copied().filter(|&v| to_a[v].hi == Some(2)).take(2).collect();
        let (prev, next) = (census.curve(ends[0]), census.curve(ends[1]));
        let single = detour_off_s1(census, prev, census.curve(mid), prev, &a, &cfg).unwrap();
        assert_eq!(single.len(), 1);
        let path = detour_off_s1(census, prev, census.curve(mid), next, &a, &cfg).unwrap();
        for x in &path.vertices {
            let d = distance(x, &a, &cfg.distances).unwrap().value().unwrap();
            assert!(d == 2 || d == 3);
            assert!(!fills(x, census.curve(mid)).unwrap() || intersection(x, census.curve(mid)).unwrap() == 0);
        }
    }

    #[test]
    fn push_up_in_the_second_layer() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let mut tried = 0;
        for &a in census.layer(2).iter().step_by(9) {
            let out = outward(census, a);
            if out.len() < 2 {
                continue;
            }
            let ac = census.curve(a);
            let prelim = preliminary_path(census, ac, census.curve(out[0]), census.curve(out[1]), &cfg).unwrap();
            let pushed = push_up(census, ac, &prelim, &cfg).unwrap();
            assert!(pushed.twist_power > 0);
            for (x, y) in pushed.vertices.iter().zip(&prelim.vertices) {
                if intersection(x, ac).unwrap() == 0 {
                    assert_eq!(x, y);
                }
            }
            let audit = audit_push_up(census, ac, &pushed).unwrap();
            assert!(audit.passed() && audit.exact, "{:?}", audit.failures);
            // Twisting further keeps every property.
            let shifted = twist_path(census, &prelim, 3, &cfg).unwrap();
            let again = push_up(census, ac, &shifted, &cfg).unwrap();
            assert!(again.twist_power >= pushed.twist_power + 3);
            tried += 1;
        }
        assert!(tried >= 3);
    }

    #[test]
    fn connections_above_the_first_layer() {
        let census = census24();
        let cfg = LowPathConfig::default();
        for &a in census.layer(1).iter().step_by(5) {
            let out = outward(census, a);
            let ac = census.curve(a);
            let (b, b2) = (census.curve(out[0]), census.curve(*out.last().unwrap()));
            let ubt = connect_above_ubt(census, ac, b, b2, &cfg).unwrap();
            assert!(ubt.within_layers(2, 3));
            assert!(ubt.max_pivot_distance().unwrap() <= 4);
            let path = connect_above(census, ac, b, b2, &cfg).unwrap();
            assert!(path.within_layers(2, 3));
            assert!(path.max_pivot_distance().unwrap() <= 6);
            assert_eq!(path.vertices.first(), Some(b));
            assert_eq!(path.vertices.last(), Some(b2));
        }
    }

    #[test]
    fn wright_report() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let empty = verify_wright_conditions(census, 1, 0, 7, &cfg).unwrap();
        assert!(empty.connections.is_empty() && empty.adjacent_pairs.is_empty());
        let rep = verify_wright_conditions(census, 1, 6, 7, &cfg).unwrap();
        assert_eq!(rep.connections.len(), 6);
        assert!(rep.passed());
        // The first layer has no edges; the second does.
        assert_eq!(rep.adjacent_pair_count, 0);
        let rep2 = verify_wright_conditions(census, 2, 6, 7, &cfg).unwrap();
        assert!(rep2.adjacent_pair_count > 0);
        assert_eq!(rep2.failures(), 0);
        let passed: Vec<_> = rep2.adjacent_pairs.iter().filter(|r| r.outcome == Outcome::Passed).collect();
        assert!(!passed.is_empty());
        for rec in passed {
            assert_eq!(rec.interior_layers.len(), 3);
        }
    }

    #[test]
    fn sampled_push_ups() {
        let census = census24();
        let cfg = LowPathConfig::default();
        let recs = verify_push_up(census, 2, 4, 11, &cfg).unwrap();
        assert_eq!(recs.len(), 4);
        for rec in &recs {
            assert_eq!(rec.outcome, Outcome::Passed, "{:?}", rec.outcome);
            assert!(rec.twist_power.unwrap() > 0);
            assert!(rec.audit.as_ref().unwrap().exact);
        }
        assert!(matches!(verify_push_up(census, 9, 1, 11, &cfg), Err(Error::Precondition(_))));
    }

}
