//! Complete enumeration of curves under a weight cap, layered by distance to
//! a center curve.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use rayon::prelude::*;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::intersect::intersection;
use crate::overlay::{common_disjoint, fills};
use crate::projection::surgery_curves;
use crate::surface::Surface;

/// Every admissible normal-coordinate vector with coordinate sum at most
/// `cap`, in lexicographic order. Only parity and triangle inequalities are
/// checked here.
pub fn admissible_vectors(s: &Surface, cap: u32) -> Vec<Vec<u32>> {
    let m = s.edge_count();
    // Triangles checked once their last edge (in index order) is assigned.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); m];
    for t in 0..s.triangle_count() {
        let last = s.triangle(t).sides.iter().map(|sd| sd.edge).max().unwrap();
        closing[last].push(t);
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; m];
    fill(s, &closing, cap, 0, &mut cur, &mut out);
    out
}

fn fill(
    s: &Surface,
    closing: &[Vec<usize>],
    budget: u32,
    e: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if e == cur.len() {
        if cur.iter().any(|&x| x > 0) {
            out.push(cur.clone());
        }
        return;
    }
    for v in 0..=budget {
        cur[e] = v;
        let ok = closing[e].iter().all(|&t| {
            let w = s.triangle(t).sides.map(|sd| cur[sd.edge]);
            (w[0] + w[1] + w[2]) % 2 == 0
                && w[0] <= w[1] + w[2]
                && w[1] <= w[0] + w[2]
                && w[2] <= w[0] + w[1]
        });
        if ok {
            fill(s, closing, budget - v, e + 1, cur, out);
        }
    }
    cur[e] = 0;
}

/// All curves with coordinate sum at most `cap`, sorted by coordinates.
pub fn curves_under(surface: &Arc<Surface>, cap: u32) -> Vec<Curve> {
    admissible_vectors(surface, cap)
        .into_iter()
        .filter_map(|v| Curve::from_coords(surface, &v).ok())
        .collect()
}

/// What proves the lower bound of a distance certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "kind")]
pub enum LowerEvidence {
    Equal,
    Distinct,
    Intersecting,
    Filling,
    /// No path of length 3 among curves of weight at most `bound`.
    Exhaustion { bound: u32 },
}

/// Bounds on the distance between two curves, with a path realizing the
/// upper bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceCertificate {
    pub lo: u32,
    pub hi: Option<u32>,
    /// Coordinates of the curves along a shortest known path.
    pub witness_path: Vec<Vec<u32>>,
    pub lower_evidence: LowerEvidence,
}

impl DistanceCertificate {
    fn exact(d: u32, path: Vec<Vec<u32>>, ev: LowerEvidence) -> Self {
        DistanceCertificate { lo: d, hi: Some(d), witness_path: path, lower_evidence: ev }
    }

    pub fn value(&self) -> Option<u32> {
        (self.hi == Some(self.lo)).then_some(self.lo)
    }

    pub fn is_exact(&self) -> bool {
        self.value().is_some()
    }

    /// Exhaustion-based bounds hold only relative to a weight cap.
    pub fn semi_certified(&self) -> bool {
        matches!(self.lower_evidence, LowerEvidence::Exhaustion { .. }) || !self.is_exact()
    }

    /// Re-checks the witness path against the intersection oracle.
    pub fn audit(&self, a: &Curve, b: &Curve) -> Result<()> {
        let s = a.surface();
        let path = self
            .witness_path
            .iter()
            .map(|v| Curve::from_coords(s, v))
            .collect::<Result<Vec<_>>>()?;
        let bad = |m: &str| Err(Error::Audit(m.to_string()));
        if path.first() != Some(a) || path.last() != Some(b) {
            return bad("witness path endpoints differ from the queried pair");
        }
        if Some(path.len() as u32 - 1) != self.hi {
            return bad("witness path length differs from the upper bound");
        }
        for w in path.windows(2) {
            if w[0] == w[1] || intersection(&w[0], &w[1])? != 0 {
                return bad("consecutive witness curves are not adjacent");
            }
        }
        Ok(())
    }
}

/// Limits for censuses and distance searches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    /// Maximum coordinate sum of curves used as path witnesses.
    pub witness_bound: u32,
    /// Refuse to build a census with more curves than this.
    pub max_curves: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig { witness_bound: 24, max_curves: 20_000 }
    }
}

/// Whether two curves span an edge of the curve graph.
pub fn adjacent(a: &Curve, b: &Curve) -> Result<bool> {
    Ok(a != b && intersection(a, b)? == 0)
}

fn coords_path(curves: &[&Curve]) -> Vec<Vec<u32>> {
    curves.iter().map(|c| c.coords().to_vec()).collect()
}

/// Certified distance. Exact up to 3; beyond that an upper bound from a
/// search among curves of weight at most the witness bound, with the lower
/// bound 4 resting on exhaustion of that search.
pub fn distance(a: &Curve, b: &Curve, cfg: &CensusConfig) -> Result<DistanceCertificate> {
    a.check_same_surface(b)?;
    if a == b {
        return Ok(DistanceCertificate::exact(0, coords_path(&[a]), LowerEvidence::Equal));
    }
    if intersection(a, b)? == 0 {
        return Ok(DistanceCertificate::exact(1, coords_path(&[a, b]), LowerEvidence::Distinct));
    }
    if !fills(a, b)? {
        if let Some(x) = common_disjoint(a, b)? {
            let path = coords_path(&[a, &x, b]);
            return Ok(DistanceCertificate::exact(2, path, LowerEvidence::Intersecting));
        }
    }
    if let Some(path) = surgery_path(a, b, 3)? {
        return Ok(DistanceCertificate::exact(3, path, LowerEvidence::Filling));
    }
    let semi = |hi: Option<u32>, path: Vec<Vec<u32>>| DistanceCertificate {
        lo: 4,
        hi,
        witness_path: path,
        lower_evidence: LowerEvidence::Exhaustion { bound: cfg.witness_bound },
    };
    let pool = witness_pool(a.surface(), cfg.witness_bound)?;
    if let Some(p) = pool.path(a, b)? {
        let cs: Vec<&Curve> = p.iter().collect();
        if p.len() == 4 {
            return Ok(DistanceCertificate::exact(3, coords_path(&cs), LowerEvidence::Filling));
        }
        let hi = p.len() as u32 - 1;
        if hi == 4 {
            return Ok(semi(Some(hi), coords_path(&cs)));
        }
        if let Some(path) = surgery_path(a, b, 4)? {
            return Ok(semi(Some(4), path));
        }
        return Ok(semi(Some(hi), coords_path(&cs)));
    }
    Ok(match surgery_path(a, b, 4)? {
        Some(path) => semi(Some(4), path),
        None => semi(None, Vec::new()),
    })
}

/// A path of the given length (3 or 4) between filling curves, built from
/// surgery curves: `a`, a surgery of `b` into the complement of `a`, and so
/// on until a curve not filling with `b` is reached.
fn surgery_path(a: &Curve, b: &Curve, len: usize) -> Result<Option<Vec<Vec<u32>>>> {
    for (x, y, flip) in [(a, b, false), (b, a, true)] {
        let mut found = None;
        'outer: for w in surgery_curves(x, y)? {
            if len == 3 {
                if let Some(v) = common_disjoint(&w, y)? {
                    found = Some(coords_path(&[x, &w, &v, y]));
                    break;
                }
            } else {
                for w2 in surgery_curves(&w, y)? {
                    if let Some(v) = common_disjoint(&w2, y)? {
                        found = Some(coords_path(&[x, &w, &w2, &v, y]));
                        break 'outer;
                    }
                }
            }
        }
        if let Some(mut p) = found {
            if flip {
                p.reverse();
            }
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Curves under a weight bound with their disjointness graph, shared by
/// every distance search on the same surface.
struct WitnessPool {
    curves: Vec<Curve>,
    neighbors: Vec<Vec<usize>>,
}

type PoolKey = (Vec<u8>, u32);

fn witness_pool(s: &Arc<Surface>, bound: u32) -> Result<Arc<WitnessPool>> {
    static POOLS: OnceLock<Mutex<HashMap<PoolKey, Arc<WitnessPool>>>> = OnceLock::new();
    let key = (s.puncture_cycle().to_vec(), bound);
    let pools = POOLS.get_or_init(Default::default);
    if let Some(p) = pools.lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let curves = curves_under(s, bound);
    let mut neighbors = vec![Vec::new(); curves.len()];
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            if intersection(&curves[i], &curves[j])? == 0 {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    let pool = Arc::new(WitnessPool { curves, neighbors });
    pools.lock().unwrap().insert(key, pool.clone());
    Ok(pool)
}

impl WitnessPool {
    /// Shortest path from `a` to `b` whose interior lies in the pool.
    fn path(&self, a: &Curve, b: &Curve) -> Result<Option<Vec<Curve>>> {
        let n = self.curves.len();
        let mut dst = vec![false; n];
        for (i, x) in self.curves.iter().enumerate() {
            dst[i] = x != a && adjacent(x, b)?;
        }
        let mut prev = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for (i, x) in self.curves.iter().enumerate() {
            if x != b && adjacent(a, x)? {
                prev[i] = i;
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            if dst[u] {
                let mut p = vec![b.clone(), self.curves[u].clone()];
                let mut v = u;
                while prev[v] != v {
                    v = prev[v];
                    p.push(self.curves[v].clone());
                }
                p.push(a.clone());
                p.reverse();
                return Ok(Some(p));
            }
            for &v in &self.neighbors[u] {
                if prev[v] == usize::MAX && &self.curves[v] != a && &self.curves[v] != b {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        Ok(None)
    }
}

/// All curves under a weight cap with certified distances to a center.
#[derive(Clone, Debug)]
pub struct SphereCensus {
    center: Curve,
    cap: u32,
    config: CensusConfig,
    curves: Vec<Curve>,
    index: HashMap<Vec<u32>, usize>,
    certificates: Vec<DistanceCertificate>,
    intersections: Vec<u64>,
    neighbors: Vec<Vec<usize>>,
    layers: BTreeMap<u32, Vec<usize>>,
    nonisolated: BTreeMap<u32, Vec<usize>>,
}

/// Builds the census of all curves with coordinate sum at most `cap`.
pub fn build_census(center: &Curve, cap: u32) -> Result<SphereCensus> {
    build_census_with(center, cap, &CensusConfig::default())
}

pub fn build_census_with(center: &Curve, cap: u32, cfg: &CensusConfig) -> Result<SphereCensus> {
    let s = center.surface();
    if center.weight() > cap {
        return Err(Error::Precondition(format!(
            "center weight {} exceeds the cap {cap}",
            center.weight()
        )));
    }
    let vectors = admissible_vectors(s, cap);
    let mut curves = Vec::new();
    for v in vectors {
        if let Ok(c) = Curve::from_coords(s, &v) {
            curves.push(c);
            if curves.len() > cfg.max_curves {
                return Err(Error::ResourceCap(format!(
                    "more than {} curves under cap {cap}",
                    cfg.max_curves
                )));
            }
        }
    }
    let n = curves.len();
    let (intersections, neighbors) = intersection_table(&curves)?;
    let ci = curves
        .iter()
        .position(|c| c == center)
        .ok_or_else(|| Error::Audit("center missing from its census".into()))?;
    let certificates = certify(&curves, &neighbors, &intersections, ci, cap)?;
    debug_assert_eq!(certificates.len(), n);
    Ok(assemble(center, cap, cfg, curves, certificates, intersections, neighbors))
}

fn intersection_table(curves: &[Curve]) -> Result<(Vec<u64>, Vec<Vec<usize>>)> {
    let n = curves.len();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| intersection(&curves[i], &curves[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut intersections = vec![0u64; n * n];
    let mut neighbors = vec![Vec::new(); n];
    for (i, row) in rows.into_iter().enumerate() {
        for (k, x) in row.into_iter().enumerate() {
            let j = i + 1 + k;
            intersections[i * n + j] = x;
            intersections[j * n + i] = x;
            if x == 0 {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
    }
    for nb in &mut neighbors {
        nb.sort_unstable();
    }
    Ok((intersections, neighbors))
}

fn assemble(
    center: &Curve,
    cap: u32,
    cfg: &CensusConfig,
    curves: Vec<Curve>,
    certificates: Vec<DistanceCertificate>,
    intersections: Vec<u64>,
    neighbors: Vec<Vec<usize>>,
) -> SphereCensus {
    let index: HashMap<Vec<u32>, usize> =
        curves.iter().enumerate().map(|(i, c)| (c.coords().to_vec(), i)).collect();
    let mut layers: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, cert) in certificates.iter().enumerate() {
        if let Some(r) = cert.hi {
            layers.entry(r).or_default().push(i);
        }
    }
    let mut nonisolated: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (&r, members) in &layers {
        let marked: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&i| neighbors[i].iter().any(|&j| certificates[j].hi == Some(r)))
            .collect();
        nonisolated.insert(r, marked);
    }
    SphereCensus {
        center: center.clone(),
        cap,
        config: cfg.clone(),
        curves,
        index,
        certificates,
        intersections,
        neighbors,
        layers,
        nonisolated,
    }
}

/// Rebuilds a census from stored curves, certificates and adjacency. The
/// intersection table is recomputed and must reproduce the stored
/// adjacency, and every certificate's witness path is re-audited.
pub fn census_from_parts(
    center: &Curve,
    cap: u32,
    cfg: &CensusConfig,
    curves: Vec<Curve>,
    certificates: Vec<DistanceCertificate>,
    neighbors: Vec<Vec<usize>>,
) -> Result<SphereCensus> {
    if curves.len() != certificates.len() || curves.len() != neighbors.len() {
        return Err(Error::Format("census parts have different lengths".into()));
    }
    let (intersections, fresh) = intersection_table(&curves)?;
    let mut stored = neighbors;
    for nb in &mut stored {
        nb.sort_unstable();
    }
    if stored != fresh {
        return Err(Error::Audit("stored adjacency disagrees with the intersection oracle".into()));
    }
    if !curves.contains(center) {
        return Err(Error::Format("center missing from the stored census".into()));
    }
    certificates
        .par_iter()
        .zip(&curves)
        .try_for_each(|(cert, c)| if cert.hi.is_some() { cert.audit(c, center) } else { Ok(()) })?;
    Ok(assemble(center, cap, cfg, curves, certificates, intersections, fresh))
}

/// Distances to the center: exact up to 3 through intersection, filling and
/// the common-disjoint witness; beyond that by breadth-first search through
/// the census.
fn certify(
    curves: &[Curve],
    neighbors: &[Vec<usize>],
    inter: &[u64],
    ci: usize,
    cap: u32,
) -> Result<Vec<DistanceCertificate>> {
    let n = curves.len();
    let c = &curves[ci];
    let mut certs: Vec<Option<DistanceCertificate>> = vec![None; n];
    let mut fill_set = Vec::new();
    for i in 0..n {
        let x = &curves[i];
        certs[i] = if i == ci {
            Some(DistanceCertificate::exact(0, coords_path(&[c]), LowerEvidence::Equal))
        } else if inter[i * n + ci] == 0 {
            Some(DistanceCertificate::exact(1, coords_path(&[x, c]), LowerEvidence::Distinct))
        } else if !fills(x, c)? {
            let w = common_disjoint(x, c)?
                .ok_or_else(|| Error::Audit("non-filling pair without a witness".into()))?;
            Some(DistanceCertificate::exact(2, coords_path(&[x, &w, c]), LowerEvidence::Intersecting))
        } else {
            fill_set.push(i);
            None
        };
    }
    // Breadth-first layering of the filling curves from the exact layer 2.
    let mut frontier: Vec<usize> = (0..n).filter(|&i| certs[i].as_ref().is_some_and(|d| d.lo == 2)).collect();
    let mut r = 2;
    while !frontier.is_empty() {
        r += 1;
        let mut next = Vec::new();
        for &i in &fill_set {
            if certs[i].is_some() {
                continue;
            }
            let via = neighbors[i].iter().copied().filter(|j| frontier.contains(j)).min();
            if let Some(j) = via {
                let mut path = vec![curves[i].coords().to_vec()];
                path.extend(certs[j].as_ref().unwrap().witness_path.iter().cloned());
                let (lo, ev) = if r == 3 {
                    (3, LowerEvidence::Filling)
                } else {
                    (4, LowerEvidence::Exhaustion { bound: cap })
                };
                certs[i] = Some(DistanceCertificate { lo, hi: Some(r), witness_path: path, lower_evidence: ev });
                next.push(i);
            }
        }
        frontier = next;
    }
    Ok(certs
        .into_iter()
        .map(|d| {
            d.unwrap_or(DistanceCertificate {
                lo: 4,
                hi: None,
                witness_path: Vec::new(),
                lower_evidence: LowerEvidence::Exhaustion { bound: cap },
            })
        })
        .collect())
}

impl SphereCensus {
    pub fn center(&self) -> &Curve {
        &self.center
    }

    pub fn center_index(&self) -> usize {
        self.index[self.center.coords()]
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn config(&self) -> &CensusConfig {
        &self.config
    }

    pub fn surface(&self) -> &Arc<Surface> {
        self.center.surface()
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &Curve {
        &self.curves[i]
    }

    pub fn index_of(&self, c: &Curve) -> Option<usize> {
        self.index.get(c.coords()).copied()
    }

    /// Index of a curve, or a cap error when it is too heavy to be included.
    pub fn require(&self, c: &Curve) -> Result<usize> {
        self.index_of(c).ok_or_else(|| {
            Error::NotFoundUnderCap(format!("curve of weight {} is outside cap {}", c.weight(), self.cap))
        })
    }

    pub fn certificate(&self, i: usize) -> &DistanceCertificate {
        &self.certificates[i]
    }

    /// Layer of a curve: its distance to the center, or the best upper bound
    /// when only semi-certified.
    pub fn layer_of(&self, i: usize) -> Option<u32> {
        self.certificates[i].hi
    }

    pub fn layer(&self, r: u32) -> &[usize] {
        self.layers.get(&r).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn radii(&self) -> Vec<u32> {
        self.layers.keys().copied().collect()
    }

    /// Members of layer `r` with a neighbor in the same layer.
    pub fn nonisolated(&self, r: u32) -> &[usize] {
        self.nonisolated.get(&r).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn intersection(&self, i: usize, j: usize) -> u64 {
        self.intersections[i * self.curves.len() + j]
    }

    /// Edges as index pairs with the smaller index first.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Certified distances from census curve `i` to every census curve,
    /// computed as if `i` were the center.
    pub fn distances_from(&self, i: usize) -> Result<Vec<DistanceCertificate>> {
        certify(&self.curves, &self.neighbors, &self.intersections, i, self.cap)
    }

    /// Graph distances inside the census from curve `src`.
    pub fn hops_from(&self, src: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.curves.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.neighbors[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest census path from `src` to `dst` whose vertices all pass
    /// `allowed` (endpoints included).
    pub fn path_within(
        &self,
        src: usize,
        dst: usize,
        mut allowed: impl FnMut(usize) -> Result<bool>,
    ) -> Result<Option<Vec<usize>>> {
        if !allowed(src)? || !allowed(dst)? {
            return Ok(None);
        }
        let n = self.curves.len();
        let mut prev = vec![usize::MAX; n];
        let mut checked: Vec<Option<bool>> = vec![None; n];
        prev[src] = src;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u == dst {
                let mut p = vec![dst];
                while *p.last().unwrap() != src {
                    p.push(prev[*p.last().unwrap()]);
                }
                p.reverse();
                return Ok(Some(p));
            }
            for &v in &self.neighbors[u] {
                if prev[v] != usize::MAX {
                    continue;
                }
                let ok = match checked[v] {
                    Some(ok) => ok,
                    None => {
                        let ok = allowed(v)?;
                        checked[v] = Some(ok);
                        ok
                    }
                };
                if ok {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        Ok(None)
    }

    /// Whether every layer up to `r` is exactly certified.
    pub fn exact_through(&self, r: u32) -> bool {
        (0..=r).all(|q| self.layer(q).iter().all(|&i| self.certificates[i].is_exact()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Preset;

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn enumeration_matches_validation() {
        let s = Preset::S05Sorted.surface();
        let curves = curves_under(&s, 12);
        for c in &curves {
            assert!(c.weight() <= 12);
        }
        for a in 1..=5u8 {
            for b in a + 1..=5 {
                let c = p(&s, a, b);
                assert_eq!(curves.contains(&c), c.weight() <= 12);
            }
        }
        let mut sorted = curves.clone();
        sorted.sort();
        assert_eq!(sorted, curves);
    }

    #[test]
    fn small_distances() {
        let s = Preset::S05Fig1.surface();
        let cfg = CensusConfig::default();
        let c = p(&s, 1, 2);
        assert_eq!(distance(&c, &c, &cfg).unwrap().value(), Some(0));
        assert_eq!(distance(&c, &p(&s, 3, 4), &cfg).unwrap().value(), Some(1));
        let d = distance(&c, &p(&s, 2, 5), &cfg).unwrap();
        assert_eq!(d.value(), Some(2));
        assert_eq!(d.witness_path[1], p(&s, 3, 4).coords());
        d.audit(&c, &p(&s, 2, 5)).unwrap();
        assert!(adjacent(&c, &p(&s, 3, 4)).unwrap());
        assert!(!adjacent(&c, &c).unwrap());
        assert!(!adjacent(&c, &p(&s, 2, 5)).unwrap());
    }

    #[test]
    fn figure_census_layers() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        let census = build_census(&c, 20).unwrap();
        let ci = census.center_index();
        assert_eq!(census.layer(0), &[ci]);
        let layer1: Vec<usize> = (0..census.len())
            .filter(|&i| i != ci && census.intersection(i, ci) == 0)
            .collect();
        assert_eq!(census.layer(1), layer1.as_slice());
        let xs: Vec<usize> = [(3, 4), (4, 5), (3, 5)]
            .iter()
            .map(|&(a, b)| census.index_of(&p(&s, a, b)).unwrap())
            .collect();
        for (k, &x) in xs.iter().enumerate() {
            assert_eq!(census.layer_of(x), Some(1));
            assert_eq!(census.intersection(x, xs[(k + 1) % 3]), 2);
        }
        for i in 0..census.len() {
            census.certificate(i).audit(census.curve(i), &c).unwrap();
        }
        assert!(census.exact_through(3));
    }

    #[test]
    fn census_agrees_with_standalone_distance() {
        let s = Preset::S05Sorted.surface();
        let c = p(&s, 2, 4);
        let census = build_census(&c, 20).unwrap();
        let cfg = CensusConfig { witness_bound: 20, ..CensusConfig::default() };
        for i in 0..census.len() {
            let x = census.curve(i);
            let d = distance(x, &c, &cfg).unwrap();
            d.audit(x, &c).unwrap();
            assert_eq!(d.lo, census.certificate(i).lo, "{:?}", x.coords());
            assert_eq!(d.hi, census.certificate(i).hi, "{:?}", x.coords());
        }
    }

    #[test]
    fn cap_and_surface_preconditions() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        assert!(matches!(build_census(&c, 1), Err(Error::Precondition(_))));
        let tiny = CensusConfig { max_curves: 3, ..CensusConfig::default() };
        assert!(build_census_with(&c, 12, &tiny).unwrap_err().is_cap_exhaustion());
    }
}
