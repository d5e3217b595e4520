//! The non-isolated part of the radius-2 sphere as a ℤ-bundle over the
//! first sphere: fibers, half-twist charts, pairings between fibers over
//! Farey edges, and monodromy numbers.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::census::SphereCensus;
use crate::curve::{Curve, CurveJson};
use crate::error::{Error, Result};
use crate::intersect::intersection;
use crate::lowpaths::Outcome;
use crate::mcg::half_twist;
use crate::pentagon::complete_pentagon_wedge;
use crate::surface::Preset;

pub const DEFAULT_WINDOW: u32 = 16;
pub const MAX_WINDOW: u32 = 64;

/// The fiber over a first-layer curve `x`: curves disjoint from `x` meeting
/// the center twice, indexed by half-twist powers about the center.
#[derive(Clone, Debug, Serialize)]
pub struct FareyFiberChart {
    pub center: CurveJson,
    pub base: CurveJson,
    pub basepoint: CurveJson,
    pub window: u32,
    /// Element with index `n` sits at position `n + window`.
    pub elements: Vec<CurveJson>,
    #[serde(skip)]
    center_curve: Curve,
    #[serde(skip)]
    base_curve: Curve,
    #[serde(skip)]
    curves: Vec<Curve>,
    #[serde(skip)]
    index: HashMap<Curve, i64>,
}

impl FareyFiberChart {
    pub fn base_curve(&self) -> &Curve {
        &self.base_curve
    }

    pub fn basepoint_curve(&self) -> &Curve {
        &self.curves[self.window as usize]
    }

    /// Index of a fiber member inside the window.
    pub fn zeta(&self, v: &Curve) -> Option<i64> {
        self.index.get(v).copied()
    }

    /// Element of index `n`, computed on demand outside the window.
    pub fn element(&self, n: i64) -> Result<Curve> {
        let w = self.window as i64;
        if n.abs() <= w {
            return Ok(self.curves[(n + w) as usize].clone());
        }
        half_twist(&self.center_curve, n, self.basepoint_curve())
    }

    pub fn in_window(&self, n: i64) -> bool {
        n.abs() <= self.window as i64
    }
}

fn require_layer(census: &SphereCensus, v: &Curve, r: u32) -> Result<usize> {
    let i = census.require(v)?;
    if census.layer_of(i) != Some(r) || !census.certificate(i).is_exact() {
        return Err(Error::Precondition(format!("curve is not certified in layer {r}")));
    }
    Ok(i)
}

/// Whether `v` lies in the fiber over `x`.
fn in_fiber(center: &Curve, x: &Curve, v: &Curve) -> Result<bool> {
    Ok(v != x && intersection(v, x)? == 0 && intersection(v, center)? == 2)
}

/// First-layer curves are certified directly: distinct from and disjoint
/// from the center.
fn require_first_layer(census: &SphereCensus, x: &Curve) -> Result<()> {
    let c = census.center();
    c.check_same_surface(x)?;
    if x == c || intersection(x, c)? != 0 {
        return Err(Error::Precondition("curve is not in the first layer".into()));
    }
    Ok(())
}

/// The unique first-layer curve disjoint from a second-layer census curve,
/// searched among census neighbors and the curve's distance witness.
pub fn backtrack(census: &SphereCensus, v: &Curve) -> Result<Curve> {
    let i = require_layer(census, v, 2)?;
    let mut down: Vec<Curve> = census
        .neighbors(i)
        .iter()
        .filter(|&&j| census.layer_of(j) == Some(1))
        .map(|&j| census.curve(j).clone())
        .collect();
    if let Some(coords) = census.certificate(i).witness_path.get(1) {
        let w = Curve::from_coords(census.surface(), coords)?;
        if !down.contains(&w) && intersection(&w, census.center())? == 0 && intersection(&w, v)? == 0 {
            down.push(w);
        }
    }
    match down.len() {
        1 => Ok(down.pop().unwrap()),
        0 => Err(Error::NotFoundUnderCap("no first-layer neighbor found".into())),
        n => Err(Error::Audit(format!("{n} first-layer neighbors: a quadrilateral"))),
    }
}

/// `Some(true)` when a non-isolated second-layer curve meets the center
/// twice and misses its backtrack; `None` for isolated curves.
pub fn chop_down_check(census: &SphereCensus, v: &Curve) -> Result<Option<bool>> {
    let i = require_layer(census, v, 2)?;
    if !census.nonisolated(2).contains(&i) {
        return Ok(None);
    }
    let x = backtrack(census, v)?;
    Ok(Some(in_fiber(census.center(), &x, v)?))
}

/// Census members of the fiber over `x`, in census order.
pub fn census_fiber(census: &SphereCensus, x: &Curve) -> Result<Vec<usize>> {
    require_first_layer(census, x)?;
    let ci = census.center_index();
    let in_fiber_at = |j: usize| census.layer_of(j) == Some(2) && census.intersection(j, ci) == 2;
    if let Some(xi) = census.index_of(x) {
        return Ok(census.neighbors(xi).iter().copied().filter(|&j| in_fiber_at(j)).collect());
    }
    let mut out = Vec::new();
    for &j in census.layer(2) {
        if in_fiber_at(j) && intersection(census.curve(j), x)? == 0 {
            out.push(j);
        }
    }
    Ok(out)
}

/// Chart with the lexicographically least census fiber member as basepoint.
pub fn build_chart(census: &SphereCensus, x: &Curve, window: u32) -> Result<FareyFiberChart> {
    let basepoint = census_fiber(census, x)?
        .into_iter()
        .map(|j| census.curve(j))
        .min_by(|a, b| a.coords().cmp(b.coords()))
        .cloned()
        .ok_or_else(|| Error::NotFoundUnderCap("fiber has no census member".into()))?;
    build_chart_at(census, x, &basepoint, window)
}

pub fn build_chart_at(census: &SphereCensus, x: &Curve, basepoint: &Curve, window: u32) -> Result<FareyFiberChart> {
    require_first_layer(census, x)?;
    let c = census.center();
    if !in_fiber(c, x, basepoint)? {
        return Err(Error::Precondition("basepoint is not in the fiber".into()));
    }
    let w = window as i64;
    let curves = (-w..=w).into_par_iter().map(|n| half_twist(c, n, basepoint)).collect::<Result<Vec<_>>>()?;
    let mut index = HashMap::new();
    for (k, v) in curves.iter().enumerate() {
        if !in_fiber(c, x, v)? {
            return Err(Error::Audit("half twist left the fiber".into()));
        }
        if index.insert(v.clone(), k as i64 - w).is_some() {
            return Err(Error::Audit("half-twist action is not free".into()));
        }
    }
    Ok(FareyFiberChart {
        center: c.to_json(None),
        base: x.to_json(None),
        basepoint: basepoint.to_json(None),
        window,
        elements: curves.iter().map(|v| v.to_json(None)).collect(),
        center_curve: c.clone(),
        base_curve: x.clone(),
        curves,
        index,
    })
}

/// The matching between two fibers over a Farey edge, restricted to the
/// chart windows.
#[derive(Clone, Debug, Serialize)]
pub struct PairingTable {
    pub first: CurveJson,
    pub second: CurveJson,
    pub window: u32,
    /// `zeta_second(psi(v)) = zeta_first(v) + offset`.
    pub offset: i64,
    /// Matched index pairs `(zeta_first, zeta_second)`.
    pub matched: Vec<(i64, i64)>,
}

impl PairingTable {
    pub fn image(&self, n: i64) -> Option<i64> {
        self.matched.iter().find(|p| p.0 == n).map(|p| p.1)
    }
}

/// Finds every edge between the two windows and audits that they form a
/// matching with one offset that covers all indices away from the edges of
/// the windows.
pub fn pairing(first: &FareyFiberChart, second: &FareyFiberChart) -> Result<PairingTable> {
    let (x1, x2) = (&first.base_curve, &second.base_curve);
    if first.center_curve != second.center_curve {
        return Err(Error::Precondition("charts have different centers".into()));
    }
    if intersection(x1, x2)? != 2 {
        return Err(Error::Precondition("fiber bases are not Farey neighbors".into()));
    }
    let w = first.window.min(second.window) as i64;
    let (w1, w2) = (first.window as i64, second.window as i64);
    let rows = (-w1..=w1)
        .into_par_iter()
        .map(|n| {
            let v = &first.curves[(n + w1) as usize];
            let mut hits = Vec::new();
            for m in -w2..=w2 {
                if intersection(v, &second.curves[(m + w2) as usize])? == 0 {
                    hits.push(m);
                }
            }
            Ok((n, hits))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matched = Vec::new();
    let mut used = HashMap::new();
    for (n, hits) in rows {
        match hits.as_slice() {
            [] => {}
            [m] => {
                if used.insert(*m, n).is_some() {
                    return Err(Error::Audit(format!("second-fiber element {m} matched twice")));
                }
                matched.push((n, *m));
            }
            _ => return Err(Error::Audit(format!("element {n} has {} partners", hits.len()))),
        }
    }
    let offset = match matched.first() {
        Some(&(n, m)) => m - n,
        None => return Err(Error::NotFoundUnderCap(format!("no pairing edge within window {w}"))),
    };
    if matched.iter().any(|&(n, m)| m - n != offset) {
        return Err(Error::Audit("pairing offsets disagree".into()));
    }
    // Every index whose partner also falls inside the window must be matched.
    let expected = (-w1..=w1).filter(|n| (n + offset).abs() <= w2).count();
    if matched.len() != expected {
        return Err(Error::Audit("pairing misses an index inside both windows".into()));
    }
    Ok(PairingTable { first: first.base.clone(), second: second.base.clone(), window: w as u32, offset, matched })
}

/// Indices of the pentagon edge `c, x1, s1, s2, x2` found by completing the
/// wedge at the center, which seeds the pairing in the existence argument.
pub fn pentagon_seed(census: &SphereCensus, first: &FareyFiberChart, second: &FareyFiberChart) -> Result<(i64, i64)> {
    let wit = complete_pentagon_wedge(census, census.center(), &first.base_curve, &second.base_curve)?;
    let (s1, s2) = (wit.curves[4].to_curve()?, wit.curves[1].to_curve()?);
    match (first.zeta(&s1), second.zeta(&s2)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::NotFoundUnderCap("pentagon edge lies outside the windows".into())),
    }
}

/// Charts and pairings over a census, built on demand with the window
/// doubled on exhaustion.
pub struct BundleAtlas<'a> {
    census: &'a SphereCensus,
    window: u32,
    charts: Mutex<HashMap<Curve, Arc<FareyFiberChart>>>,
    pairings: Mutex<HashMap<(Curve, Curve), Arc<PairingTable>>>,
}

impl<'a> BundleAtlas<'a> {
    pub fn new(census: &'a SphereCensus, window: u32) -> Self {
        BundleAtlas { census, window, charts: Mutex::default(), pairings: Mutex::default() }
    }

    pub fn census(&self) -> &'a SphereCensus {
        self.census
    }

    pub fn chart(&self, x: &Curve) -> Result<Arc<FareyFiberChart>> {
        if let Some(ch) = self.charts.lock().unwrap().get(x) {
            return Ok(ch.clone());
        }
        let ch = Arc::new(build_chart(self.census, x, self.window)?);
        Ok(self.charts.lock().unwrap().entry(x.clone()).or_insert(ch).clone())
    }

    /// Chart whose window contains `v`, doubling the window up to the
    /// maximum.
    fn chart_containing(&self, x: &Curve, v: &Curve) -> Result<(Arc<FareyFiberChart>, i64)> {
        let mut ch = self.chart(x)?;
        loop {
            if let Some(n) = ch.zeta(v) {
                return Ok((ch, n));
            }
            if ch.window >= MAX_WINDOW {
                return Err(Error::NotFoundUnderCap("fiber member outside the largest window".into()));
            }
            let bigger = Arc::new(build_chart_at(self.census, x, ch.basepoint_curve(), ch.window * 2)?);
            self.charts.lock().unwrap().insert(x.clone(), bigger.clone());
            ch = bigger;
        }
    }

    pub fn zeta(&self, x: &Curve, v: &Curve) -> Result<i64> {
        Ok(self.chart_containing(x, v)?.1)
    }

    pub fn pairing(&self, x1: &Curve, x2: &Curve) -> Result<Arc<PairingTable>> {
        let key = (x1.clone(), x2.clone());
        if let Some(p) = self.pairings.lock().unwrap().get(&key) {
            return Ok(p.clone());
        }
        let (mut c1, mut c2) = (self.chart(x1)?, self.chart(x2)?);
        let table = loop {
            match pairing(&c1, &c2) {
                Err(Error::NotFoundUnderCap(_)) if c1.window < MAX_WINDOW => {
                    c1 = Arc::new(build_chart_at(self.census, x1, c1.basepoint_curve(), c1.window * 2)?);
                    c2 = Arc::new(build_chart_at(self.census, x2, c2.basepoint_curve(), c2.window * 2)?);
                }
                res => break res?,
            }
        };
        let table = Arc::new(table);
        Ok(self.pairings.lock().unwrap().entry(key).or_insert(table).clone())
    }

    /// `psi(v)` for a fiber member over `x1`, audited as an edge.
    pub fn pair(&self, x1: &Curve, x2: &Curve, v: &Curve) -> Result<Curve> {
        let n = self.zeta(x1, v)?;
        let o = self.pairing(x1, x2)?.offset;
        let image = self.chart(x2)?.element(n + o)?;
        if intersection(v, &image)? != 0 {
            return Err(Error::Audit("paired curves intersect".into()));
        }
        Ok(image)
    }
}

fn check_farey_path(census: &SphereCensus, path: &[Curve]) -> Result<()> {
    if path.is_empty() {
        return Err(Error::Precondition("empty Farey path".into()));
    }
    for x in path {
        require_first_layer(census, x)?;
    }
    for w in path.windows(2) {
        if intersection(&w[0], &w[1])? != 2 {
            return Err(Error::Precondition("consecutive curves are not Farey neighbors".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct MonodromyRecord {
    pub path: Vec<CurveJson>,
    pub value: i64,
    pub offsets: Vec<i64>,
    /// Start and end indices of the sampled compositions.
    pub samples: Vec<(i64, i64)>,
}

/// Monodromy number of a Farey path in the first layer: the index shift of
/// the composed pairings, composed explicitly for three starting curves and
/// audited against the sum of pairing offsets.
pub fn monodromy(atlas: &BundleAtlas, path: &[Curve]) -> Result<MonodromyRecord> {
    check_farey_path(atlas.census, path)?;
    let mut offsets = Vec::new();
    let mut tables = Vec::new();
    for w in path.windows(2) {
        let t = atlas.pairing(&w[0], &w[1])?;
        offsets.push(t.offset);
        tables.push(t);
    }
    let total: i64 = offsets.iter().sum();
    let mut samples = Vec::new();
    for start in [-1i64, 0, 1] {
        let mut n = start;
        let mut v = atlas.chart(&path[0])?.element(n)?;
        for (k, t) in tables.iter().enumerate() {
            n = t.image(n).ok_or_else(|| Error::NotFoundUnderCap("composition left the pairing window".into()))?;
            let next = atlas.chart(&path[k + 1])?.element(n)?;
            if intersection(&v, &next)? != 0 {
                return Err(Error::Audit("composed pairing step is not an edge".into()));
            }
            v = next;
        }
        samples.push((start, n));
    }
    let value = samples[0].1 - samples[0].0;
    if samples.iter().any(|&(a, b)| b - a != value) || value != total {
        return Err(Error::Audit("monodromy depends on the starting curve".into()));
    }
    Ok(MonodromyRecord { path: path.iter().map(|x| x.to_json(None)).collect(), value, offsets, samples })
}

/// Monodromy of a closed path recomputed with the `k`-th census fiber
/// member (lexicographic, cyclically) as every basepoint, for each `k`.
pub fn monodromy_by_basepoint(census: &SphereCensus, path: &[Curve], choices: usize) -> Result<Vec<i64>> {
    if path.first() != path.last() {
        return Err(Error::Precondition("basepoint independence needs a closed path".into()));
    }
    (0..choices)
        .into_par_iter()
        .map(|k| {
            let atlas = BundleAtlas::new(census, DEFAULT_WINDOW);
            for x in path {
                let mut fiber: Vec<&Curve> = census_fiber(census, x)?.into_iter().map(|j| census.curve(j)).collect();
                fiber.sort_by(|a, b| a.coords().cmp(b.coords()));
                let bp = fiber
                    .get(k % fiber.len().max(1))
                    .ok_or_else(|| Error::NotFoundUnderCap("fiber has no census member".into()))?;
                let ch = Arc::new(build_chart_at(census, x, bp, DEFAULT_WINDOW)?);
                atlas.charts.lock().unwrap().insert(x.clone(), ch);
            }
            Ok(monodromy(&atlas, path)?.value)
        })
        .collect()
}

/// The three first-layer curves around punctures {3,4}, {3,5}, {4,5} for
/// the center around {1,2} on the pentagon-labelled five-punctured sphere.
pub fn fundamental_triangle(census: &SphereCensus) -> Result<[Curve; 3]> {
    let s = census.surface();
    if s.preset() != Some(Preset::S05Fig1) || census.center() != &Curve::standard(s, 1, 2)? {
        return Err(Error::Precondition("needs the pentagon-labelled surface centered at {1,2}".into()));
    }
    let t = [Curve::standard(s, 3, 4)?, Curve::standard(s, 3, 5)?, Curve::standard(s, 4, 5)?];
    for k in 0..3 {
        require_first_layer(census, &t[k])?;
        if intersection(&t[k], &t[(k + 1) % 3])? != 2 {
            return Err(Error::Audit("triangle curves are not Farey neighbors".into()));
        }
    }
    Ok(t)
}

/// The pairing images of the curve around {2,5} around the fundamental
/// triangle, and the triangle's monodromy.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleRecord {
    pub start: CurveJson,
    pub images: Vec<CurveJson>,
    pub half_twist_image: CurveJson,
    pub closes_by_half_twist: bool,
    pub monodromy: i64,
    pub reversed_monodromy: i64,
    pub basepoint_values: Vec<i64>,
}

pub fn triangle_record(atlas: &BundleAtlas) -> Result<TriangleRecord> {
    let census = atlas.census;
    let t = fundamental_triangle(census)?;
    let v = Curve::standard(census.surface(), 2, 5)?;
    let mut images = Vec::new();
    let mut cur = v.clone();
    for k in 0..3 {
        cur = atlas.pair(&t[k], &t[(k + 1) % 3], &cur)?;
        images.push(cur.clone());
    }
    let tau = half_twist(census.center(), 1, &v)?;
    let cycle = [t[0].clone(), t[1].clone(), t[2].clone(), t[0].clone()];
    let back = [t[0].clone(), t[2].clone(), t[1].clone(), t[0].clone()];
    Ok(TriangleRecord {
        start: v.to_json(None),
        closes_by_half_twist: images[2] == tau,
        images: images.iter().map(|c| c.to_json(None)).collect(),
        half_twist_image: tau.to_json(None),
        monodromy: monodromy(atlas, &cycle)?.value,
        reversed_monodromy: monodromy(atlas, &back)?.value,
        basepoint_values: monodromy_by_basepoint(census, &cycle, 5)?,
    })
}

/// A path in the non-isolated second layer with each vertex's fiber.
#[derive(Clone, Debug, Serialize)]
pub struct BundlePath {
    pub curves: Vec<CurveJson>,
    pub fibers: Vec<CurveJson>,
    pub zetas: Vec<i64>,
    #[serde(skip)]
    pub vertices: Vec<Curve>,
}

impl BundlePath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Shortest path from `from` to `to` with Farey edges through first-layer
/// census curves.
fn farey_path(census: &SphereCensus, from: &Curve, to: &Curve) -> Result<Vec<Curve>> {
    let mut nodes: Vec<Curve> = census.layer(1).iter().map(|&i| census.curve(i).clone()).collect();
    for e in [from, to] {
        require_first_layer(census, e)?;
        if !nodes.contains(e) {
            nodes.push(e.clone());
        }
    }
    let a = nodes.iter().position(|n| n == from).unwrap();
    let b = nodes.iter().position(|n| n == to).unwrap();
    let mut prev: HashMap<usize, usize> = HashMap::from([(a, a)]);
    let mut queue = VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        if u == b {
            let mut p = vec![b];
            while *p.last().unwrap() != a {
                p.push(prev[p.last().unwrap()]);
            }
            return Ok(p.into_iter().rev().map(|i| nodes[i].clone()).collect());
        }
        for v in 0..nodes.len() {
            if !prev.contains_key(&v) && intersection(&nodes[u], &nodes[v])? == 2 {
                prev.insert(v, u);
                queue.push_back(v);
            }
        }
    }
    Err(Error::NotFoundUnderCap("first layer has no Farey path under the cap".into()))
}

/// Fiber walk: `(fiber base, index)` steps along a Farey path.
fn walk(atlas: &BundleAtlas, path: &[Curve], start: i64) -> Result<Vec<(Curve, i64)>> {
    let mut out = vec![(path[0].clone(), start)];
    let mut n = start;
    for w in path.windows(2) {
        n += atlas.pairing(&w[0], &w[1])?.offset;
        out.push((w[1].clone(), n));
    }
    Ok(out)
}

/// Path between two non-isolated second-layer census curves: pairings along
/// Farey paths into the fiber over the triangle's first curve, then loops
/// around the fundamental triangle to close the index gap.
pub fn s2prime_path(atlas: &BundleAtlas, v: &Curve, w: &Curve) -> Result<BundlePath> {
    let census = atlas.census;
    for e in [v, w] {
        let i = require_layer(census, e, 2)?;
        if !census.nonisolated(2).contains(&i) {
            return Err(Error::Precondition("endpoint is isolated in the second layer".into()));
        }
    }
    let (bv, bw) = (backtrack(census, v)?, backtrack(census, w)?);
    let mut steps = vec![(bv.clone(), atlas.zeta(&bv, v)?)];
    if v != w {
        let t = fundamental_triangle(census)?;
        let to_hub = farey_path(census, &bv, &t[0])?;
        steps = walk(atlas, &to_hub, steps[0].1)?;
        let back_path = farey_path(census, &bw, &t[0])?;
        let mut back = walk(atlas, &back_path, atlas.zeta(&bw, w)?)?;
        let gap = back.last().unwrap().1 - steps.last().unwrap().1;
        let forward = [t[0].clone(), t[1].clone(), t[2].clone(), t[0].clone()];
        let reverse = [t[0].clone(), t[2].clone(), t[1].clone(), t[0].clone()];
        let m = monodromy(atlas, &forward)?.value;
        if m.abs() != 1 {
            return Err(Error::Audit(format!("triangle monodromy {m}")));
        }
        let loop_path = if gap * m > 0 { forward } else { reverse };
        for _ in 0..gap.abs() {
            let start = steps.last().unwrap().1;
            steps.extend(walk(atlas, &loop_path, start)?.into_iter().skip(1));
        }
        if steps.last().unwrap().1 != back.last().unwrap().1 {
            return Err(Error::Audit("triangle loops did not close the gap".into()));
        }
        back.pop();
        steps.extend(back.into_iter().rev());
    }
    let mut vertices = Vec::with_capacity(steps.len());
    for (x, n) in &steps {
        vertices.push(atlas.chart(x)?.element(*n)?);
    }
    audit_bundle_path(census, &steps, &vertices)?;
    if vertices.first() != Some(v) || vertices.last() != Some(w) {
        return Err(Error::Audit("path endpoints differ from the request".into()));
    }
    Ok(BundlePath {
        curves: vertices.iter().map(|c| c.to_json(None)).collect(),
        fibers: steps.iter().map(|(x, _)| x.to_json(None)).collect(),
        zetas: steps.iter().map(|s| s.1).collect(),
        vertices,
    })
}

/// Every vertex meets the center twice and misses a first-layer curve, so
/// it lies in layer 2 exactly; consecutive vertices are disjoint, which
/// makes each one non-isolated.
fn audit_bundle_path(census: &SphereCensus, steps: &[(Curve, i64)], vertices: &[Curve]) -> Result<()> {
    for ((x, _), v) in steps.iter().zip(vertices) {
        if !in_fiber(census.center(), x, v)? {
            return Err(Error::Audit("path vertex left its fiber".into()));
        }
    }
    for p in vertices.windows(2) {
        if p[0] == p[1] || intersection(&p[0], &p[1])? != 0 {
            return Err(Error::Audit("path has non-adjacent consecutive curves".into()));
        }
    }
    if vertices.len() == 1 {
        let i = census.require(&vertices[0])?;
        if !census.nonisolated(2).contains(&i) {
            return Err(Error::Audit("single vertex is isolated".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingRecord {
    pub first: CurveJson,
    pub second: CurveJson,
    pub outcome: Outcome,
    pub offset: Option<i64>,
    pub matched: usize,
    pub pentagon_seed_agrees: Option<bool>,
}

/// Exhaustive audit of the bundle structure on a census.
#[derive(Clone, Debug, Serialize)]
pub struct BundleReport {
    pub cap: u32,
    pub window: u32,
    pub nonisolated: usize,
    pub backtrack_failures: Vec<CurveJson>,
    pub chop_down_failures: Vec<CurveJson>,
    /// Non-isolated curves not in exactly one census fiber.
    pub fiber_overlaps: Vec<CurveJson>,
    /// Census fiber members missing from their chart window.
    pub uncharted: Vec<CurveJson>,
    pub fibers: usize,
    pub pairings: Vec<PairingRecord>,
}

impl BundleReport {
    pub fn failures(&self) -> usize {
        self.backtrack_failures.len()
            + self.chop_down_failures.len()
            + self.fiber_overlaps.len()
            + self.pairings.iter().filter(|p| matches!(p.outcome, Outcome::AuditFailure(_))).count()
            + self.pairings.iter().filter(|p| p.pentagon_seed_agrees == Some(false)).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0 && self.uncharted.is_empty()
    }
}

pub fn verify_bundle(atlas: &BundleAtlas) -> Result<BundleReport> {
    let census = atlas.census;
    let s2: Vec<usize> = census.nonisolated(2).to_vec();
    let checks = s2
        .par_iter()
        .map(|&i| {
            let v = census.curve(i);
            let b = backtrack(census, v);
            let chop = match &b {
                Ok(_) => chop_down_check(census, v)?,
                Err(_) => None,
            };
            Ok((i, b.is_ok(), chop))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = BundleReport {
        cap: census.cap(),
        window: atlas.window,
        nonisolated: s2.len(),
        backtrack_failures: Vec::new(),
        chop_down_failures: Vec::new(),
        fiber_overlaps: Vec::new(),
        uncharted: Vec::new(),
        fibers: 0,
        pairings: Vec::new(),
    };
    for (i, ok, chop) in checks {
        if !ok {
            report.backtrack_failures.push(census.curve(i).to_json(None));
        } else if chop != Some(true) {
            report.chop_down_failures.push(census.curve(i).to_json(None));
        }
    }
    let ring: Vec<usize> = census.layer(1).to_vec();
    let mut bases: Vec<Curve> = ring.iter().map(|&x| census.curve(x).clone()).collect();
    for &i in &s2 {
        if let Ok(x) = backtrack(census, census.curve(i)) {
            if !bases.contains(&x) {
                bases.push(x);
            }
        }
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for x in &bases {
        let fiber = census_fiber(census, x)?;
        if fiber.is_empty() {
            continue;
        }
        report.fibers += 1;
        let chart = atlas.chart(x)?;
        for j in fiber {
            *owner.entry(j).or_default() += 1;
            if chart.zeta(census.curve(j)).is_none() {
                report.uncharted.push(census.curve(j).to_json(None));
            }
        }
    }
    for &i in &s2 {
        if owner.get(&i) != Some(&1) {
            report.fiber_overlaps.push(census.curve(i).to_json(None));
        }
    }
    let edges: Vec<(usize, usize)> = ring
        .iter()
        .flat_map(|&a| ring.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| a != b && census.intersection(a, b) == 2)
        .collect();
    report.pairings = edges
        .par_iter()
        .map(|&(a, b)| {
            let (x1, x2) = (census.curve(a), census.curve(b));
            let table = atlas.pairing(x1, x2);
            let seed = match &table {
                Ok(t) => match (atlas.chart(x1), atlas.chart(x2)) {
                    (Ok(c1), Ok(c2)) => pentagon_seed(census, &c1, &c2).ok().map(|(p, q)| q - p == t.offset),
                    _ => None,
                },
                Err(_) => None,
            };
            PairingRecord {
                first: x1.to_json(None),
                second: x2.to_json(None),
                outcome: table.as_ref().map_or_else(Outcome::from_error, |_| Outcome::Passed),
                offset: table.as_ref().ok().map(|t| t.offset),
                matched: table.as_ref().map_or(0, |t| t.matched.len()),
                pentagon_seed_agrees: seed,
            }
        })
        .collect();
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct BundlePathRecord {
    pub from: CurveJson,
    pub to: CurveJson,
    pub outcome: Outcome,
    pub length: Option<usize>,
}

pub fn verify_s2prime_paths(atlas: &BundleAtlas, samples: usize, seed: u64) -> Result<Vec<BundlePathRecord>> {
    let census = atlas.census;
    let s2 = census.nonisolated(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = (0..samples)
        .filter_map(|_| Some((*s2.choose(&mut rng)?, *s2.choose(&mut rng)?)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(a, b)| {
            let (v, w) = (census.curve(a), census.curve(b));
            let res = s2prime_path(atlas, v, w);
            BundlePathRecord {
                from: v.to_json(None),
                to: w.to_json(None),
                outcome: res.as_ref().map_or_else(Outcome::from_error, |_| Outcome::Passed),
                length: res.ok().map(|p| p.len()),
            }
        })
        .collect())
}

/// Fiber base and index of each census curve in the non-isolated second
/// layer, for annotated exports.
pub fn fiber_labels(atlas: &BundleAtlas) -> Result<HashMap<usize, (Curve, Option<i64>)>> {
    let census = atlas.census;
    let mut out = HashMap::new();
    for &i in census.nonisolated(2) {
        if let Ok(x) = backtrack(census, census.curve(i)) {
            let z = atlas.zeta(&x, census.curve(i)).ok();
            out.insert(i, (x, z));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use std::sync::OnceLock;

    fn p(a: u8, b: u8) -> Curve {
        Curve::standard(&Preset::S05Fig1.surface(), a, b).unwrap()
    }

    fn census24() -> &'static SphereCensus {
        static CENSUS: OnceLock<SphereCensus> = OnceLock::new();
        CENSUS.get_or_init(|| build_census(&p(1, 2), 24).unwrap())
    }

    #[test]
    fn backtrack_and_chop_down() {
        let census = census24();
        assert_eq!(backtrack(census, &p(2, 5)).unwrap(), p(3, 4));
        assert_eq!(chop_down_check(census, &p(2, 5)).unwrap(), Some(true));
        assert!(matches!(backtrack(census, &p(3, 4)), Err(Error::Precondition(_))));
        let moved = half_twist(&p(1, 2), 1, &p(2, 5)).unwrap();
        assert_eq!(backtrack(census, &moved).unwrap(), p(3, 4));
    }

    #[test]
    fn charts_cover_their_census_fibers() {
        let census = census24();
        let x = p(3, 4);
        let chart = build_chart(census, &x, 8).unwrap();
        assert_eq!(chart.zeta(chart.basepoint_curve()), Some(0));
        assert_eq!(chart.elements.len(), 17);
        for j in census_fiber(census, &x).unwrap() {
            assert!(chart.zeta(census.curve(j)).is_some());
        }
        assert_eq!(chart.element(9).unwrap(), half_twist(&p(1, 2), 9, chart.basepoint_curve()).unwrap());
        assert!(build_chart(census, &p(2, 5), 8).is_err());
    }

    #[test]
    fn pairing_over_a_farey_edge() {
        let census = census24();
        let atlas = BundleAtlas::new(census, 8);
        let (x1, x2) = (p(3, 4), p(3, 5));
        let v = p(2, 5);
        assert_eq!(atlas.pair(&x1, &x2, &v).unwrap(), p(1, 4));
        let tv = half_twist(&p(1, 2), 1, &v).unwrap();
        let (a, b) = (atlas.pair(&x1, &x2, &v).unwrap(), atlas.pair(&x1, &x2, &tv).unwrap());
        assert_eq!(atlas.zeta(&x2, &b).unwrap() - atlas.zeta(&x2, &a).unwrap(), 1);
        let table = atlas.pairing(&x1, &x2).unwrap();
        let mut seconds: Vec<i64> = table.matched.iter().map(|m| m.1).collect();
        seconds.dedup();
        assert_eq!(seconds.len(), table.matched.len());
        let (c1, c2) = (atlas.chart(&x1).unwrap(), atlas.chart(&x2).unwrap());
        let (s1, s2) = pentagon_seed(census, &c1, &c2).unwrap();
        assert_eq!(s2 - s1, table.offset);
        assert!(matches!(atlas.pairing(&x1, &p(2, 5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn monodromy_numbers() {
        let census = census24();
        let atlas = BundleAtlas::new(census, DEFAULT_WINDOW);
        let (x1, x2) = (p(3, 4), p(3, 5));
        assert_eq!(monodromy(&atlas, &[x1.clone()]).unwrap().value, 0);
        assert_eq!(monodromy(&atlas, &[x1.clone(), x2.clone(), x1.clone()]).unwrap().value, 0);
        let rec = triangle_record(&atlas).unwrap();
        assert_eq!(rec.images[0], p(1, 4).to_json(None));
        assert_eq!(rec.images[2], p(1, 5).to_json(None));
        assert!(rec.closes_by_half_twist);
        assert_eq!(rec.monodromy, 1);
        assert_eq!(rec.reversed_monodromy, -1);
        assert!(rec.basepoint_values.iter().all(|&m| m == 1));
    }

    #[test]
    fn paths_in_the_bundle() {
        let census = census24();
        let atlas = BundleAtlas::new(census, DEFAULT_WINDOW);
        let v = p(2, 5);
        assert_eq!(s2prime_path(&atlas, &v, &v).unwrap().len(), 1);
        let w = half_twist(&p(1, 2), 1, &v).unwrap();
        let one = s2prime_path(&atlas, &v, &w).unwrap();
        assert_eq!(one.len() - 1, 3);
        let back = s2prime_path(&atlas, &w, &v).unwrap();
        assert_eq!(back.len() - 1, 3);
        let recs = verify_s2prime_paths(&atlas, 12, 3).unwrap();
        assert!(recs.iter().all(|r| r.outcome == Outcome::Passed), "{recs:?}");
    }

    #[test]
    fn bundle_structure_is_exact() {
        let atlas = BundleAtlas::new(census24(), DEFAULT_WINDOW);
        let rep = verify_bundle(&atlas).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.nonisolated > 0 && rep.fibers > 0 && !rep.pairings.is_empty());
        assert!(rep.pairings.iter().all(|p| p.outcome == Outcome::Passed));
    }
}
