//! Pentagons, short cycles, and the backtracking flags of census vertices.

use serde::Serialize;

use crate::census::SphereCensus;
use crate::curve::{labels, Curve, CurveJson};
use crate::error::{Error, Result};
use crate::intersect::intersection;

/// Order in which a pentagon's curves form a 5-cycle of disjoint curves.
pub const TRAVERSAL: [usize; 5] = [0, 2, 4, 1, 3];

/// Five curves, each around two punctures, consecutive ones meeting twice
/// and the others disjoint.
#[derive(Clone, Debug, Serialize)]
pub struct PentagonWitness {
    pub curves: Vec<CurveJson>,
    /// The two punctures each curve surrounds.
    pub punctures: Vec<[u8; 2]>,
    pub traversal: [usize; 5],
}

/// Whether the surrounded puncture pairs form a 5-cycle of punctures in
/// the given order.
fn pairs_form_cycle(curves: &[Curve; 5]) -> bool {
    let sides: Vec<u8> = curves.iter().map(|c| c.pants_side()).collect();
    if sides.iter().any(|s| s.count_ones() != 2) {
        return false;
    }
    let mut shared = 0u8;
    for i in 0..5 {
        let common = sides[i] & sides[(i + 1) % 5];
        if common.count_ones() != 1 || shared & common != 0 {
            return false;
        }
        shared |= common;
    }
    shared.count_ones() == 5
}

/// Pentagon test: puncture pairs in cyclic order, intersection 2 between
/// neighbors in the tuple and 0 between the others.
pub fn is_pentagon(curves: &[Curve; 5]) -> Result<bool> {
    let s = curves[0].surface();
    for c in curves.iter() {
        curves[0].check_same_surface(c)?;
    }
    if s.puncture_count() != 5 {
        return Ok(false);
    }
    for i in 0..5 {
        for j in i + 1..5 {
            if curves[i] == curves[j] {
                return Ok(false);
            }
        }
    }
    if !pairs_form_cycle(curves) {
        return Ok(false);
    }
    for i in 0..5 {
        if intersection(&curves[i], &curves[(i + 1) % 5])? != 2
            || intersection(&curves[i], &curves[(i + 2) % 5])? != 0
        {
            return Ok(false);
        }
    }
    Ok(true)
}

fn witness(curves: &[Curve; 5]) -> PentagonWitness {
    PentagonWitness {
        curves: curves.iter().map(|c| c.to_json(None)).collect(),
        punctures: curves
            .iter()
            .map(|c| {
                let l = labels(c.pants_side());
                [l[0], l[1]]
            })
            .collect(),
        traversal: TRAVERSAL,
    }
}

/// Short cycles of a census graph.
#[derive(Clone, Debug, Default, Serialize)]
pub struct GirthReport {
    pub triangles: Vec<[usize; 3]>,
    pub quadrilaterals: Vec<[usize; 4]>,
    pub five_cycles: usize,
    /// 5-cycles whose curves, read as a pentagon tuple, fail the test.
    pub non_pentagons: Vec<[usize; 5]>,
}

impl GirthReport {
    pub fn passed(&self) -> bool {
        self.triangles.is_empty() && self.quadrilaterals.is_empty() && self.non_pentagons.is_empty()
    }
}

/// Lists all 3-, 4- and 5-cycles of the census graph, each once, and tests
/// every 5-cycle as a pentagon.
pub fn check_girth(census: &SphereCensus) -> Result<GirthReport> {
    let mut report = GirthReport::default();
    let n = census.len();
    for v in 0..n {
        // Cycles are rooted at their smallest vertex, with the second vertex
        // smaller than the last to fix the direction.
        let mut path = vec![v];
        extend_cycles(census, &mut path, &mut report)?;
    }
    Ok(report)
}

fn extend_cycles(census: &SphereCensus, path: &mut Vec<usize>, report: &mut GirthReport) -> Result<()> {
    let root = path[0];
    let last = *path.last().unwrap();
    for &w in census.neighbors(last) {
        if w <= root || path.contains(&w) {
            continue;
        }
        path.push(w);
        let len = path.len();
        if len >= 3 && census.is_adjacent(w, root) && path[1] < w {
            match len {
                3 => report.triangles.push([path[0], path[1], path[2]]),
                4 => report.quadrilaterals.push([path[0], path[1], path[2], path[3]]),
                _ => {
                    report.five_cycles += 1;
                    let tuple = from_traversal(path);
                    let curves = tuple.map(|i| census.curve(i).clone());
                    if !is_pentagon(&curves)? {
                        report.non_pentagons.push(tuple);
                    }
                }
            }
        }
        if len < 5 {
            extend_cycles(census, path, report)?;
        }
        path.pop();
    }
    Ok(())
}

/// Pentagon tuple read off a 5-cycle listed in traversal order.
fn from_traversal(cycle: &[usize]) -> [usize; 5] {
    let mut out = [0; 5];
    for (k, &slot) in TRAVERSAL.iter().enumerate() {
        out[slot] = cycle[k];
    }
    out
}

fn in_layers(census: &SphereCensus, i: usize, r: u32) -> bool {
    matches!(census.layer_of(i), Some(l) if l == r || l == r + 1)
}

fn layer_checked(census: &SphereCensus, i: usize) -> Result<u32> {
    census
        .layer_of(i)
        .ok_or_else(|| Error::Precondition("curve has no certified layer".into()))
}

/// Completes adjacent curves `a1`, `a3` of layer `r - 1` to a pentagon
/// whose other three curves lie in layers `r` and `r + 1`.
pub fn complete_pentagon_edge(census: &SphereCensus, a1: &Curve, a3: &Curve) -> Result<PentagonWitness> {
    let (i1, i3) = (census.require(a1)?, census.require(a3)?);
    if !census.is_adjacent(i1, i3) {
        return Err(Error::Precondition("the two curves are not adjacent".into()));
    }
    let r0 = layer_checked(census, i1)?;
    if layer_checked(census, i3)? != r0 {
        return Err(Error::Precondition("the two curves lie in different layers".into()));
    }
    let r = r0 + 1;
    // Cycle a1, a3, a5, a2, a4.
    for &i4 in census.neighbors(i1) {
        if !in_layers(census, i4, r) {
            continue;
        }
        for &i5 in census.neighbors(i3) {
            if !in_layers(census, i5, r) {
                continue;
            }
            for &i2 in census.neighbors(i4) {
                if !in_layers(census, i2, r) || !census.is_adjacent(i2, i5) {
                    continue;
                }
                let curves = [i1, i2, i3, i4, i5].map(|i| census.curve(i).clone());
                if is_pentagon(&curves)? {
                    return Ok(witness(&curves));
                }
            }
        }
    }
    Err(Error::NotFoundUnderCap(format!("no pentagon completion under cap {}", census.cap())))
}

/// Completes `a1` in layer `r - 1` and its neighbors `a3`, `a4` in layer `r`
/// meeting twice to a pentagon with `a2`, `a5` in layers `r` and `r + 1`.
pub fn complete_pentagon_wedge(
    census: &SphereCensus,
    a1: &Curve,
    a3: &Curve,
    a4: &Curve,
) -> Result<PentagonWitness> {
    let (i1, i3, i4) = (census.require(a1)?, census.require(a3)?, census.require(a4)?);
    let r = layer_checked(census, i1)? + 1;
    if layer_checked(census, i3)? != r || layer_checked(census, i4)? != r {
        return Err(Error::Precondition("the wedge curves are not one layer out".into()));
    }
    if !census.is_adjacent(i1, i3) || !census.is_adjacent(i1, i4) {
        return Err(Error::Precondition("the wedge curves are not adjacent to the apex".into()));
    }
    if census.intersection(i3, i4) != 2 {
        return Err(Error::Precondition("the wedge curves do not meet twice".into()));
    }
    for &i5 in census.neighbors(i3) {
        if !in_layers(census, i5, r) {
            continue;
        }
        for &i2 in census.neighbors(i4) {
            if !in_layers(census, i2, r) || !census.is_adjacent(i2, i5) {
                continue;
            }
            let curves = [i1, i2, i3, i4, i5].map(|i| census.curve(i).clone());
            if is_pentagon(&curves)? {
                return Ok(witness(&curves));
            }
        }
    }
    Err(Error::NotFoundUnderCap(format!("no wedge completion under cap {}", census.cap())))
}

/// Backtracking and sidestepping of a census vertex, counted among census
/// neighbors only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexFlags {
    pub layer: u32,
    pub backtracks: usize,
    pub sidesteps: usize,
    pub unique_backtracking: bool,
    pub no_sidestepping: bool,
    pub forward_facing: bool,
    /// The flags hold relative to this weight cap.
    pub cap: u32,
}

pub fn vertex_flags(census: &SphereCensus, x: &Curve) -> Result<VertexFlags> {
    let i = census.require(x)?;
    let r = layer_checked(census, i)?;
    if r == 0 {
        return Err(Error::Precondition("the center has no backtracking".into()));
    }
    let count = |q: u32| census.neighbors(i).iter().filter(|&&j| census.layer_of(j) == Some(q)).count();
    let (backtracks, sidesteps) = (count(r - 1), count(r));
    Ok(VertexFlags {
        layer: r,
        backtracks,
        sidesteps,
        unique_backtracking: backtracks == 1,
        no_sidestepping: sidesteps == 0,
        forward_facing: backtracks == 1 && sidesteps == 0,
        cap: census.cap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::build_census;
    use crate::surface::{Preset, Surface};
    use std::sync::Arc;

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn chord_pentagon() {
        let s = Preset::S05Sorted.surface();
        let t = [p(&s, 1, 2), p(&s, 2, 3), p(&s, 3, 4), p(&s, 4, 5), p(&s, 5, 1)];
        assert!(is_pentagon(&t).unwrap());
        let mut r = t.clone();
        r[4] = r[0].clone();
        assert!(!is_pentagon(&r).unwrap());
        let shuffled = [t[0].clone(), t[2].clone(), t[1].clone(), t[3].clone(), t[4].clone()];
        assert!(!is_pentagon(&shuffled).unwrap());
    }

    #[test]
    fn census_girth_and_completions() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        let census = build_census(&c, 16).unwrap();
        let report = check_girth(&census).unwrap();
        assert!(report.triangles.is_empty() && report.quadrilaterals.is_empty());
        assert!(report.five_cycles > 0);
        assert!(report.non_pentagons.is_empty());

        let x1 = p(&s, 3, 4);
        assert!(matches!(complete_pentagon_edge(&census, &c, &x1), Err(Error::Precondition(_))));
        let big = build_census(&c, 24).unwrap();
        let i = big.nonisolated(2)[0];
        let j = *big.neighbors(i).iter().find(|&&j| big.layer_of(j) == Some(2)).unwrap();
        let (a1, a3) = (big.curve(i), big.curve(j));
        let w = complete_pentagon_edge(&big, a1, a3).unwrap();
        assert_eq!(w.curves[0].coords, a1.coords());
        assert_eq!(w.curves[2].coords, a3.coords());
        let curves: Vec<Curve> = w.curves.iter().map(|j| j.to_curve().unwrap()).collect();
        for x in &curves[..] {
            let l = big.layer_of(big.index_of(x).unwrap()).unwrap();
            assert!(x == a1 || x == a3 || l == 3 || l == 4);
        }
        assert!(is_pentagon(&curves.clone().try_into().unwrap()).unwrap());

        let x2 = p(&s, 4, 5);
        let w = complete_pentagon_wedge(&census, &c, &x1, &x2).unwrap();
        let curves: Vec<Curve> = w.curves.iter().map(|j| j.to_curve().unwrap()).collect();
        assert!(is_pentagon(&curves.try_into().unwrap()).unwrap());
        assert!(matches!(
            complete_pentagon_wedge(&census, &c, &x1, &x1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn flags_in_the_first_layer() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        let census = build_census(&c, 16).unwrap();
        for &i in census.layer(1) {
            let f = vertex_flags(&census, census.curve(i)).unwrap();
            assert_eq!(f.backtracks, 1);
            assert!(f.forward_facing);
        }
        for &i in census.nonisolated(2) {
            assert!(!vertex_flags(&census, census.curve(i)).unwrap().no_sidestepping);
        }
    }
}
