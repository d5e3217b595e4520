//! Paths inside one sphere of the six-punctured sphere's curve graph,
//! through the subgraph on essentially non-separating curves and the sets of
//! curves projecting far from the center in a pants curve's complement.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use crate::census::{build_census, distance, SphereCensus};
use crate::curve::{Curve, CurveJson, PunctureSet};
use crate::error::{Error, Result};
use crate::intersect::intersection;
use crate::lowpaths::Outcome;
use crate::overlay::fills;
use crate::projection::{d_u, surgery_curves, Bounds, ComplementChart};

/// Thresholds for the far-projection sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct MediumConfig {
    /// Members of a far set project more than `m` from the center.
    pub m: u32,
    /// Endpoints reached by `connect_to_oz` project more than `m + slack`.
    pub slack: u32,
    /// Weight cap of the census searched inside a pants curve's complement.
    pub complement_cap: u32,
}

impl Default for MediumConfig {
    fn default() -> Self {
        MediumConfig { m: 2, slack: 0, complement_cap: 28 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnsClassification {
    pub is_pants: bool,
    pub essentially_nonseparating: bool,
}

/// Which conditions of the two-curve definition hold for a disjoint pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnsPairClassification {
    pub first: EnsClassification,
    pub second: EnsClassification,
    pub union_nonseparating: bool,
    pub has_pants: bool,
    pub bounds_once_punctured: bool,
    pub essentially_nonseparating: bool,
}

fn require_six(c: &Curve) -> Result<()> {
    if c.surface().puncture_count() != 6 {
        return Err(Error::Precondition("expected a curve on the six-punctured sphere".into()));
    }
    Ok(())
}

/// Every curve on a punctured sphere separates, so only pants curves are
/// essentially non-separating.
pub fn classify_ens(a: &Curve) -> Result<EnsClassification> {
    require_six(a)?;
    let is_pants = a.is_pants();
    Ok(EnsClassification { is_pants, essentially_nonseparating: is_pants })
}

/// Punctures of the region between two disjoint distinct curves.
fn middle_region(a: &Curve, b: &Curve) -> PunctureSet {
    let (a0, a1) = a.partition();
    let (b0, b1) = b.partition();
    let cells = [(a0 & b0, a1, b1), (a0 & b1, a1, b0), (a1 & b0, a0, b1), (a1 & b1, a0, b0)];
    // Exactly one cell is empty; the region between the curves is the cell
    // on the opposite side of both.
    let (_, oa, ob) = cells.into_iter().find(|(cell, _, _)| *cell == 0).expect("nested sides");
    oa & ob
}

pub fn classify_ens_pair(a: &Curve, b: &Curve) -> Result<EnsPairClassification> {
    require_six(a)?;
    a.check_same_surface(b)?;
    if a == b || intersection(a, b)? != 0 {
        return Err(Error::Precondition("expected two disjoint distinct curves".into()));
    }
    let (first, second) = (classify_ens(a)?, classify_ens(b)?);
    let union_nonseparating = false;
    let has_pants = first.is_pants || second.is_pants;
    let bounds_once_punctured = middle_region(a, b).count_ones() == 1;
    let essentially_nonseparating = first.essentially_nonseparating
        && second.essentially_nonseparating
        && (union_nonseparating || has_pants || bounds_once_punctured);
    Ok(EnsPairClassification {
        first,
        second,
        union_nonseparating,
        has_pants,
        bounds_once_punctured,
        essentially_nonseparating,
    })
}

/// The subgraph on the center and the essentially non-separating curves.
pub struct RestrictedGraphView<'a> {
    census: &'a SphereCensus,
    in_view: Vec<bool>,
    view_layers: Vec<Option<u32>>,
    complements: Mutex<HashMap<Curve, Arc<OnceLock<Arc<ComplementCensus>>>>>,
}

pub fn restricted_view(census: &SphereCensus) -> Result<RestrictedGraphView<'_>> {
    require_six(census.center())?;
    let ci = census.center_index();
    let mut in_view = vec![false; census.len()];
    for (i, c) in census.curves().iter().enumerate() {
        in_view[i] = i == ci || classify_ens(c)?.essentially_nonseparating;
    }
    let mut view =
        RestrictedGraphView { census, in_view, view_layers: Vec::new(), complements: Mutex::new(HashMap::new()) };
    let mut layers = vec![None; census.len()];
    layers[ci] = Some(0);
    let mut queue = VecDeque::from([ci]);
    while let Some(u) = queue.pop_front() {
        let d = layers[u].unwrap();
        for &v in census.neighbors(u) {
            if layers[v].is_none() && view.in_view[v] && view.edge_rule(u, v)? {
                layers[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    view.view_layers = layers;
    Ok(view)
}

impl<'a> RestrictedGraphView<'a> {
    pub fn census(&self) -> &'a SphereCensus {
        self.census
    }

    pub fn contains(&self, i: usize) -> bool {
        self.in_view[i]
    }

    fn edge_rule(&self, i: usize, j: usize) -> Result<bool> {
        let c = self.census;
        if c.layer_of(i) != c.layer_of(j) {
            return Ok(true);
        }
        Ok(classify_ens_pair(c.curve(i), c.curve(j))?.essentially_nonseparating)
    }

    pub fn is_edge(&self, i: usize, j: usize) -> Result<bool> {
        Ok(self.in_view[i] && self.in_view[j] && self.census.is_adjacent(i, j) && self.edge_rule(i, j)?)
    }

    fn complement(&self, z: &Curve, cfg: &MediumConfig) -> Result<Arc<ComplementCensus>> {
        let slot = self.complements.lock().unwrap().entry(z.clone()).or_default().clone();
        if let Some(cc) = slot.get() {
            return Ok(cc.clone());
        }
        let cc = Arc::new(ComplementCensus::build(self.census.center(), z, cfg.complement_cap)?);
        Ok(slot.get_or_init(|| cc).clone())
    }

    /// Distance from the center inside the view.
    pub fn view_layer(&self, i: usize) -> Option<u32> {
        self.view_layers[i]
    }

    /// View members of global layer `r`.
    pub fn layer(&self, r: u32) -> Vec<usize> {
        self.census.layer(r).iter().copied().filter(|&i| self.in_view[i]).collect()
    }

    /// Whether view distances match global distances on view members up to
    /// layer `r`.
    pub fn agrees_through(&self, r: u32) -> bool {
        (0..self.census.len()).filter(|&i| self.in_view[i]).all(|i| {
            let g = self.census.layer_of(i);
            let v = self.view_layers[i];
            match (g, v) {
                (Some(g), _) if g <= r => v == Some(g),
                (_, Some(v)) if v <= r => g == Some(v),
                _ => true,
            }
        })
    }
}

/// Neighbors of a pants curve in the view that project far from the center
/// in its non-pants complement.
#[derive(Clone, Debug, Serialize)]
pub struct OzSet {
    pub z: CurveJson,
    pub layer: u32,
    pub threshold: u32,
    pub members: Vec<CurveJson>,
    pub projections: Vec<Bounds>,
    #[serde(skip)]
    pub indices: Vec<usize>,
}

fn pivot_checked(view: &RestrictedGraphView, z: &Curve) -> Result<(usize, u32)> {
    if !z.is_pants() {
        return Err(Error::NotPants);
    }
    let zi = view.census.require(z)?;
    let r = view
        .census
        .layer_of(zi)
        .ok_or_else(|| Error::Precondition("curve has no certified layer".into()))?;
    Ok((zi, r))
}

/// Projection distance to the center in the complement of `z`.
fn far_from_center(view: &RestrictedGraphView, z: &Curve, a: usize) -> Result<Bounds> {
    d_u(z, view.census.curve(a), view.census.center())
}

pub fn oz_set(view: &RestrictedGraphView, z: &Curve, cfg: &MediumConfig) -> Result<OzSet> {
    let (zi, r) = pivot_checked(view, z)?;
    let census = view.census;
    let mut out = OzSet {
        z: z.to_json(None),
        layer: r,
        threshold: cfg.m,
        members: Vec::new(),
        projections: Vec::new(),
        indices: Vec::new(),
    };
    if census.center() == z {
        return Ok(out);
    }
    for &a in census.neighbors(zi) {
        if !view.in_view[a] || a == census.center_index() {
            continue;
        }
        let b = far_from_center(view, z, a)?;
        if b.lo > cfg.m {
            out.members.push(census.curve(a).to_json(None));
            out.projections.push(b);
            out.indices.push(a);
        }
    }
    Ok(out)
}

/// Exact layer of a curve disjoint from `z`, which sits in layer `r`.
/// Census members use their certificates; other curves get the upper bound
/// from `z` and a lower bound from how they meet the center.
fn certify_layer(census: &SphereCensus, v: &Curve, pivot: Option<(&Curve, u32)>) -> Result<Option<u32>> {
    if let Some(i) = census.index_of(v) {
        return Ok(census.certificate(i).value());
    }
    let Some((z, r)) = pivot else { return Ok(None) };
    if v == z || intersection(v, z)? != 0 {
        return Ok(None);
    }
    let c = census.center();
    let lo = if v == c {
        0
    } else if intersection(v, c)? == 0 {
        1
    } else if r + 1 <= 2 || !fills(v, c)? {
        2
    } else if r + 1 <= 3 {
        3
    } else {
        distance(v, c, census.config())?.lo
    };
    // The upper bound through `z` caps the layer at r + 1.
    Ok((lo >= r + 1).then_some(r + 1))
}

/// A path with the exact layer of every vertex.
#[derive(Clone, Debug, Serialize)]
pub struct LayeredPath {
    pub curves: Vec<CurveJson>,
    pub layers: Vec<u32>,
    #[serde(skip)]
    pub vertices: Vec<Curve>,
}

impl LayeredPath {
    fn new(census: &SphereCensus, vertices: Vec<Curve>, pivot: Option<(&Curve, u32)>) -> Result<Self> {
        for w in vertices.windows(2) {
            if w[0] == w[1] || intersection(&w[0], &w[1])? != 0 {
                return Err(Error::Audit("path has non-adjacent consecutive curves".into()));
            }
        }
        let layers = vertices
            .iter()
            .map(|v| {
                certify_layer(census, v, pivot)?
                    .ok_or_else(|| Error::Audit("path vertex without an exact layer".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LayeredPath { curves: vertices.iter().map(|v| v.to_json(None)).collect(), layers, vertices })
    }

    fn concat(parts: Vec<(Curve, u32)>) -> Result<Self> {
        for w in parts.windows(2) {
            if w[0].0 == w[1].0 || intersection(&w[0].0, &w[1].0)? != 0 {
                return Err(Error::Audit("path has non-adjacent consecutive curves".into()));
            }
        }
        let (vertices, layers): (Vec<Curve>, Vec<u32>) = parts.into_iter().unzip();
        Ok(LayeredPath { curves: vertices.iter().map(|v| v.to_json(None)).collect(), layers, vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Census of the complement of a pants curve, read as a five-punctured
/// sphere, with each member carried back to the six-punctured sphere.
struct ComplementCensus {
    chart: ComplementChart,
    census: SphereCensus,
    lifts: Vec<Curve>,
    far: Vec<OnceLock<Bounds>>,
    upper: Vec<OnceLock<bool>>,
}

impl ComplementCensus {
    fn build(center: &Curve, z: &Curve, cap: u32) -> Result<Self> {
        let chart = ComplementChart::new(z)?;
        let inside = surgery_curves(z, center)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Precondition("center has no image in the complement".into()))?;
        let census = build_census(&chart.to_complement(&inside)?, cap)?;
        let lifts = census.curves().iter().map(|y| chart.from_complement(y)).collect::<Result<Vec<_>>>()?;
        let n = lifts.len();
        Ok(ComplementCensus {
            chart,
            census,
            lifts,
            far: (0..n).map(|_| OnceLock::new()).collect(),
            upper: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    fn far(&self, center: &Curve, i: usize) -> Result<Bounds> {
        if let Some(b) = self.far[i].get() {
            return Ok(*b);
        }
        let b = d_u(self.chart.pants_curve(), &self.lifts[i], center)?;
        let _ = self.far[i].set(b);
        Ok(b)
    }

    /// Whether the lift lies in layer `r + 1` of the six-punctured census.
    fn in_upper(&self, census: &SphereCensus, r: u32, i: usize) -> Result<bool> {
        if let Some(b) = self.upper[i].get() {
            return Ok(*b);
        }
        let b = certify_layer(census, &self.lifts[i], Some((self.chart.pants_curve(), r)))? == Some(r + 1);
        let _ = self.upper[i].set(b);
        Ok(b)
    }

    fn start(&self, x: &Curve) -> Result<usize> {
        self.census
            .index_of(&self.chart.to_complement(x)?)
            .ok_or_else(|| Error::NotFoundUnderCap("curve lies outside the complement census".into()))
    }

    fn search(
        &self,
        from: usize,
        mut allowed: impl FnMut(usize) -> Result<bool>,
        mut goal: impl FnMut(usize) -> Result<bool>,
    ) -> Result<Option<Vec<Curve>>> {
        let n = self.census.len();
        let mut prev = vec![usize::MAX; n];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if goal(u)? {
                let mut p = vec![u];
                while *p.last().unwrap() != from {
                    p.push(prev[*p.last().unwrap()]);
                }
                return Ok(Some(p.into_iter().rev().map(|i| self.lifts[i].clone()).collect()));
            }
            for &v in self.census.neighbors(u) {
                if prev[v] == usize::MAX && allowed(v)? {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        Ok(None)
    }
}

/// Path from `x` inside the pants curve's link and layer `r + 1` of the
/// view to a curve projecting more than `n` from the center.
pub fn connect_to_oz(
    view: &RestrictedGraphView,
    z: &Curve,
    x: &Curve,
    n: u32,
    cfg: &MediumConfig,
) -> Result<LayeredPath> {
    let (_, r) = pivot_checked(view, z)?;
    let census = view.census;
    let cc = view.complement(z, cfg)?;
    let pants_upper = |i: usize| -> Result<bool> { Ok(cc.lifts[i].is_pants() && cc.in_upper(census, r, i)?) };
    let start = cc.start(x)?;
    if !pants_upper(start)? {
        return Err(Error::Precondition("start must be a view neighbor one layer out".into()));
    }
    let path = cc
        .search(start, pants_upper, |i| Ok(cc.far(census.center(), i)?.lo > n))?
        .ok_or_else(|| Error::NotFoundUnderCap("no far curve reachable in the link".into()))?;
    let out = LayeredPath::new(census, path, Some((z, r)))?;
    audit_in_link(&out, z, r)?;
    for w in out.vertices.windows(2) {
        if !classify_ens_pair(&w[0], &w[1])?.essentially_nonseparating {
            return Err(Error::Audit("path to the far set leaves the view".into()));
        }
    }
    Ok(out)
}

fn audit_in_link(path: &LayeredPath, z: &Curve, r: u32) -> Result<()> {
    for v in &path.vertices {
        if v == z || intersection(v, z)? != 0 {
            return Err(Error::Audit("path leaves the complement".into()));
        }
    }
    if path.layers.iter().any(|&l| l != r + 1) {
        return Err(Error::Audit("path leaves layer r + 1".into()));
    }
    Ok(())
}

/// Path between two far curves through curves of the complement that
/// project far from the center, audited to lie in layer `r + 1`.
pub fn connect_in_oz(
    view: &RestrictedGraphView,
    z: &Curve,
    a: &Curve,
    b: &Curve,
    cfg: &MediumConfig,
) -> Result<LayeredPath> {
    let (_, r) = pivot_checked(view, z)?;
    let census = view.census;
    let cc = view.complement(z, cfg)?;
    let far = |i: usize| -> Result<bool> { Ok(cc.far(census.center(), i)?.lo > cfg.m) };
    let (ai, bi) = (cc.start(a)?, cc.start(b)?);
    if !far(ai)? || !far(bi)? {
        return Err(Error::Precondition("endpoints must project far from the center".into()));
    }
    let path = cc
        .search(ai, |i| Ok(far(i)? && cc.in_upper(census, r, i)?), |i| Ok(i == bi))?
        .ok_or_else(|| Error::NotFoundUnderCap("far curves not connected within the complement census".into()))?;
    let out = LayeredPath::new(census, path, Some((z, r)))?;
    audit_in_link(&out, z, r)?;
    Ok(out)
}

/// `x` itself when it is a pants curve, else a pants neighbor in its layer.
pub fn nearest_ens(census: &SphereCensus, x: &Curve) -> Result<Curve> {
    require_six(x)?;
    let xi = census.require(x)?;
    if x.is_pants() {
        return Ok(x.clone());
    }
    let r = census.layer_of(xi);
    let found = census
        .neighbors(xi)
        .iter()
        .copied()
        .find(|&v| census.layer_of(v) == r && census.curve(v).is_pants())
        .ok_or_else(|| Error::NotFoundUnderCap("no pants neighbor in the same layer".into()))?;
    Ok(census.curve(found).clone())
}

fn push_distinct(out: &mut Vec<(Curve, u32)>, v: &Curve, layer: u32) {
    if out.last().map(|p| &p.0) != Some(v) {
        out.push((v.clone(), layer));
    }
}

/// Path between `x` and `y` of layer `r + 1` that never enters layer `r`.
pub fn medium_sphere_path(
    view: &RestrictedGraphView,
    x: &Curve,
    y: &Curve,
    cfg: &MediumConfig,
) -> Result<LayeredPath> {
    let census = view.census;
    let (xi, yi) = (census.require(x)?, census.require(y)?);
    let layer = census.layer_of(xi);
    if layer != census.layer_of(yi) || layer.is_none_or(|l| l < 2) {
        return Err(Error::Precondition("endpoints must share a layer r + 1 with r > 0".into()));
    }
    let r = layer.unwrap() - 1;
    if xi == yi {
        return LayeredPath::new(census, vec![x.clone()], None);
    }
    let x2 = census.require(&nearest_ens(census, x)?)?;
    let y2 = census.require(&nearest_ens(census, y)?)?;
    let low = |v: usize| census.layer_of(v) == Some(r);
    // View path through layers r and r + 1 that never uses an edge between
    // two low vertices, so each low vertex is replaced on its own.
    let mut prev = vec![usize::MAX; census.len()];
    prev[x2] = x2;
    let mut queue = VecDeque::from([x2]);
    while let Some(u) = queue.pop_front() {
        if u == y2 {
            break;
        }
        for &v in census.neighbors(u) {
            let layered = matches!(census.layer_of(v), Some(l) if l == r || l == r + 1);
            if prev[v] == usize::MAX && layered && !(low(u) && low(v)) && view.is_edge(u, v)? {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    if prev[y2] == usize::MAX {
        return Err(Error::NotFoundUnderCap("no view path through layers r and r + 1".into()));
    }
    let mut spread = vec![y2];
    while *spread.last().unwrap() != x2 {
        spread.push(prev[*spread.last().unwrap()]);
    }
    spread.reverse();
    let mut out = Vec::new();
    push_distinct(&mut out, x, r + 1);
    for k in 0..spread.len() {
        let v = spread[k];
        if !low(v) {
            push_distinct(&mut out, census.curve(v), r + 1);
            continue;
        }
        let (prev, next) = (census.curve(spread[k - 1]), census.curve(spread[k + 1]));
        let z = census.curve(v);
        let far = cfg.m + cfg.slack;
        let to_prev = connect_to_oz(view, z, prev, far, cfg)?;
        let to_next = connect_to_oz(view, z, next, far, cfg)?;
        let (e1, e2) = (to_prev.vertices.last().unwrap(), to_next.vertices.last().unwrap());
        let middle = connect_in_oz(view, z, e1, e2, cfg)?;
        let pieces = [&to_prev, &middle];
        for p in pieces {
            for (w, &l) in p.vertices.iter().zip(&p.layers) {
                push_distinct(&mut out, w, l);
            }
        }
        for (w, &l) in to_next.vertices.iter().zip(&to_next.layers).rev() {
            push_distinct(&mut out, w, l);
        }
    }
    push_distinct(&mut out, y, r + 1);
    let path = LayeredPath::concat(out)?;
    if path.layers.iter().any(|&l| l != r + 1) {
        return Err(Error::Audit("sphere path enters another layer".into()));
    }
    Ok(path)
}

#[derive(Clone, Debug, Serialize)]
pub struct OzRecord {
    pub z: CurveJson,
    pub members: usize,
    pub outside_layer: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpherePathRecord {
    pub from: CurveJson,
    pub to: CurveJson,
    pub outcome: Outcome,
    pub length: Option<usize>,
}

/// Sampled evidence that layer `r + 1` of the census is connected.
#[derive(Clone, Debug, Serialize)]
pub struct MediumReport {
    pub r: u32,
    pub cap: u32,
    pub view_agrees: bool,
    pub far_sets: Vec<OzRecord>,
    pub paths: Vec<SpherePathRecord>,
}

impl MediumReport {
    pub fn failures(&self) -> usize {
        self.far_sets.iter().filter(|o| o.outside_layer > 0).count()
            + self.paths.iter().filter(|p| matches!(p.outcome, Outcome::AuditFailure(_))).count()
    }

    pub fn exhausted(&self) -> usize {
        self.paths.iter().filter(|p| matches!(p.outcome, Outcome::CapExhausted(_))).count()
    }
}

pub fn verify_medium(
    census: &SphereCensus,
    r: u32,
    samples: usize,
    seed: u64,
    cfg: &MediumConfig,
) -> Result<MediumReport> {
    let view = restricted_view(census)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pivots = view.layer(r);
    pivots.shuffle(&mut rng);
    pivots.truncate(samples);
    let upper = census.layer(r + 1);
    let mut pairs = Vec::new();
    for _ in 0..samples {
        if let (Some(&a), Some(&b)) = (upper.choose(&mut rng), upper.choose(&mut rng)) {
            pairs.push((a, b));
        }
    }
    let far_sets = pivots
        .par_iter()
        .map(|&z| {
            let set = oz_set(&view, census.curve(z), cfg)?;
            let outside = set.indices.iter().filter(|&&i| census.layer_of(i) != Some(r + 1)).count();
            Ok(OzRecord { z: set.z, members: set.indices.len(), outside_layer: outside })
        })
        .collect::<Result<Vec<_>>>()?;
    let paths = pairs
        .par_iter()
        .map(|&(a, b)| {
            let res = medium_sphere_path(&view, census.curve(a), census.curve(b), cfg);
            SpherePathRecord {
                from: census.curve(a).to_json(None),
                to: census.curve(b).to_json(None),
                outcome: res.as_ref().map_or_else(Outcome::from_error, |_| Outcome::Passed),
                length: res.ok().map(|p| p.len()),
            }
        })
        .collect();
    Ok(MediumReport { r, cap: census.cap(), view_agrees: view.agrees_through(3), far_sets, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::surface::Preset;
    use std::sync::OnceLock;

    fn p(a: u8, b: u8) -> Curve {
        Curve::standard(&Preset::S06Sorted.surface(), a, b).unwrap()
    }

    fn census18() -> &'static SphereCensus {
        static CENSUS: OnceLock<SphereCensus> = OnceLock::new();
        CENSUS.get_or_init(|| build_census(&p(1, 2), 18).unwrap())
    }

    #[test]
    fn only_pants_curves_are_essentially_nonseparating() {
        for c in census18().curves() {
            let k = classify_ens(c).unwrap();
            assert_eq!(k.essentially_nonseparating, c.partition().0.count_ones() == 2 || c.partition().1.count_ones() == 2);
        }
        let five = Curve::standard(&Preset::S05Sorted.surface(), 1, 2).unwrap();
        assert!(classify_ens(&five).is_err());
    }

    #[test]
    fn pair_conditions() {
        let k = classify_ens_pair(&p(1, 2), &p(3, 4)).unwrap();
        assert!(k.has_pants && !k.union_nonseparating && k.essentially_nonseparating);
        // The region between the two curves holds punctures 5 and 6.
        assert!(!k.bounds_once_punctured);
        assert!(classify_ens_pair(&p(1, 2), &p(1, 2)).is_err());
        assert!(classify_ens_pair(&p(1, 2), &p(2, 3)).is_err());
    }

    #[test]
    fn view_layers_match_the_census() {
        let view = restricted_view(census18()).unwrap();
        assert!(view.agrees_through(3));
        assert!(view.layer(1).iter().all(|&i| census18().curve(i).is_pants()));
    }

    #[test]
    fn far_sets_sit_one_layer_out() {
        let census = census18();
        let view = restricted_view(census).unwrap();
        let cfg = MediumConfig::default();
        let mut nonempty = 0;
        for z in view.layer(1) {
            let set = oz_set(&view, census.curve(z), &cfg).unwrap();
            assert!(set.indices.iter().all(|&i| census.layer_of(i) == Some(2)));
            assert!(set.projections.iter().all(|b| b.lo > cfg.m));
            nonempty += usize::from(!set.indices.is_empty());
        }
        assert!(nonempty > 0);
        assert!(oz_set(&view, census.center(), &cfg).unwrap().members.is_empty());
    }

    #[test]
    fn nearest_pants_curve() {
        let census = census18();
        for &i in census.layer(2) {
            let x = census.curve(i);
            let e = nearest_ens(census, x).unwrap();
            assert!(e.is_pants());
            assert_eq!(census.layer_of(census.require(&e).unwrap()), Some(2));
            assert!(&e == x || intersection(&e, x).unwrap() == 0);
        }
    }

    #[test]
    fn sphere_paths_stay_in_the_layer() {
        let census = census18();
        let view = restricted_view(census).unwrap();
        let cfg = MediumConfig::default();
        let x = census.curve(census.layer(2)[0]);
        let trivial = medium_sphere_path(&view, x, x, &cfg).unwrap();
        assert_eq!(trivial.layers, vec![2]);
        let low = census.curve(census.layer(1)[0]);
        assert!(matches!(medium_sphere_path(&view, low, low, &cfg), Err(Error::Precondition(_))));

        let rep = verify_medium(census, 1, 10, 7, &cfg).unwrap();
        assert!(rep.view_agrees);
        assert_eq!(rep.failures(), 0);
        assert_eq!(rep.exhausted(), 0);
        assert_eq!(rep.paths.len(), 10);
    }
}
