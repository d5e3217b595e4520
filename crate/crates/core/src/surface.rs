//! Punctured spheres with a fixed fan ideal triangulation.
//!
//! Punctures sit in convex position on a circle in the plane, in the cyclic
//! order given by `puncture_cycle`. The inside of the polygon is triangulated
//! by the fan from position 0, and so is the outside (the region containing
//! the point at infinity, which is not a puncture). Every edge joins two
//! distinct punctures.
//!
//! Curves are handled as cyclic sequences of *darts*: oriented crossings of
//! triangulation edges, i.e. directed edges of the dual trivalent graph.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named surface presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Five punctures in the cyclic order (3,4,1,2,5).
    #[serde(rename = "S0_5_FIG1")]
    S05Fig1,
    /// Five punctures in the cyclic order (1,2,3,4,5).
    #[serde(rename = "S0_5_SORTED")]
    S05Sorted,
    /// Six punctures in the cyclic order (1,...,6).
    #[serde(rename = "S0_6_SORTED")]
    S06Sorted,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::S05Fig1, Preset::S05Sorted, Preset::S06Sorted];

    pub fn name(self) -> &'static str {
        match self {
            Preset::S05Fig1 => "S0_5_FIG1",
            Preset::S05Sorted => "S0_5_SORTED",
            Preset::S06Sorted => "S0_6_SORTED",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "S0_5_FIG1" | "s05-fig1" => Ok(Preset::S05Fig1),
            "S0_5_SORTED" | "s05-sorted" => Ok(Preset::S05Sorted),
            "S0_6_SORTED" | "s06" => Ok(Preset::S06Sorted),
            other => Err(Error::UnknownSurface(other.to_string())),
        }
    }

    pub fn cycle(self) -> &'static [u8] {
        match self {
            Preset::S05Fig1 => &FIG1,
            Preset::S05Sorted => &SORTED5,
            Preset::S06Sorted => &SORTED6,
        }
    }

    /// Shared instance of the preset surface.
    pub fn surface(self) -> Arc<Surface> {
        static CACHE: [OnceLock<Arc<Surface>>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        let slot = match self {
            Preset::S05Fig1 => 0,
            Preset::S05Sorted => 1,
            Preset::S06Sorted => 2,
        };
        CACHE[slot].get_or_init(|| Arc::new(self.build())).clone()
    }

    pub fn build(self) -> Surface {
        Surface::with_preset(self.cycle().len(), self.cycle(), Some(self))
            .expect("presets are valid")
    }
}

/// Cyclic puncture order of the fundamental-triangle figure.
pub const FIG1: [u8; 5] = [3, 4, 1, 2, 5];
pub const SORTED5: [u8; 5] = [1, 2, 3, 4, 5];
pub const SORTED6: [u8; 6] = [1, 2, 3, 4, 5, 6];

/// A directed crossing of a triangulation edge: `2 * edge + dir`.
///
/// Direction 0 crosses from the triangle on the left of the edge (where the
/// edge is traversed start-to-end by a counterclockwise side) to the one on
/// the right.
pub type Dart = u32;

#[inline]
pub fn dart(edge: usize, dir: u32) -> Dart {
    (edge as u32) * 2 + dir
}

#[inline]
pub fn dart_edge(d: Dart) -> usize {
    (d / 2) as usize
}

#[inline]
pub fn dart_rev(d: Dart) -> Dart {
    d ^ 1
}

/// One side of a triangle: an edge and whether the side runs along the edge's
/// own direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Side {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Endpoint puncture labels, in the edge's direction.
    pub ends: [u8; 2],
    /// `(triangle, side index)` where the side runs forward, then backward.
    pub sides: [(usize, usize); 2],
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Boundary,
    Inner,
    Outer,
}

/// A triangle with counterclockwise corners; side `k` runs from corner `k`
/// to corner `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    pub corners: [u8; 3],
    pub sides: [Side; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surface {
    puncture_count: usize,
    puncture_cycle: Vec<u8>,
    edges: Vec<Edge>,
    triangles: Vec<Triangle>,
    preset: Option<Preset>,
}

impl Surface {
    /// Builds the fan-triangulated sphere for `n` punctures placed in the
    /// given cyclic order.
    pub fn new(n: usize, puncture_cycle: &[u8]) -> Result<Self> {
        let preset = Preset::ALL
            .into_iter()
            .find(|p| p.cycle() == puncture_cycle);
        Self::with_preset(n, puncture_cycle, preset)
    }

    fn with_preset(n: usize, cycle: &[u8], preset: Option<Preset>) -> Result<Self> {
        if n != 5 && n != 6 {
            return Err(Error::InvalidPunctureCount(n));
        }
        let mut seen = vec![false; n + 1];
        if cycle.len() != n {
            return Err(Error::InvalidCycle(cycle.to_vec()));
        }
        for &p in cycle {
            let p = p as usize;
            if p == 0 || p > n || seen[p] {
                return Err(Error::InvalidCycle(cycle.to_vec()));
            }
            seen[p] = true;
        }

        // Edge numbering: polygon sides (i, i+1), then inner diagonals (0, k),
        // then outer diagonals (0, k), k = 2..n-2.
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * (n - 2));
        let mut boundary = vec![0usize; n];
        for (i, slot) in boundary.iter_mut().enumerate() {
            let j = (i + 1) % n;
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            *slot = edges.len();
            edges.push(Edge {
                ends: [cycle[a], cycle[b]],
                sides: [(usize::MAX, 0); 2],
                kind: EdgeKind::Boundary,
            });
        }
        let mut inner = vec![usize::MAX; n];
        for (k, slot) in inner.iter_mut().enumerate().take(n - 1).skip(2) {
            *slot = edges.len();
            edges.push(Edge {
                ends: [cycle[0], cycle[k]],
                sides: [(usize::MAX, 0); 2],
                kind: EdgeKind::Inner,
            });
        }
        let mut outer = vec![usize::MAX; n];
        for (k, slot) in outer.iter_mut().enumerate().take(n - 1).skip(2) {
            *slot = edges.len();
            edges.push(Edge {
                ends: [cycle[0], cycle[k]],
                sides: [(usize::MAX, 0); 2],
                kind: EdgeKind::Outer,
            });
        }

        // Edge joining positions i < j, choosing the inner or outer copy of a
        // diagonal from position 0.
        let edge_between = |i: usize, j: usize, outside: bool| -> usize {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if j == i + 1 || (i == 0 && j == n - 1) {
                if j == i + 1 {
                    boundary[i]
                } else {
                    boundary[n - 1]
                }
            } else {
                debug_assert_eq!(i, 0);
                if outside {
                    outer[j]
                } else {
                    inner[j]
                }
            }
        };

        let mut triangles = Vec::with_capacity(2 * (n - 2));
        let push = |pos: [usize; 3], outside: bool, triangles: &mut Vec<Triangle>| {
            let mut sides = [Side { edge: 0, forward: true }; 3];
            for k in 0..3 {
                let (a, b) = (pos[k], pos[(k + 1) % 3]);
                sides[k] = Side {
                    edge: edge_between(a, b, outside),
                    forward: a < b,
                };
            }
            triangles.push(Triangle {
                corners: [cycle[pos[0]], cycle[pos[1]], cycle[pos[2]]],
                sides,
            });
        };
        for k in 1..n - 1 {
            push([0, k, k + 1], false, &mut triangles);
        }
        for k in 1..n - 1 {
            push([0, k + 1, k], true, &mut triangles);
        }

        for (t, tri) in triangles.iter().enumerate() {
            for (k, side) in tri.sides.iter().enumerate() {
                let slot = if side.forward { 0 } else { 1 };
                debug_assert_eq!(edges[side.edge].sides[slot].0, usize::MAX);
                edges[side.edge].sides[slot] = (t, k);
            }
        }

        Ok(Surface {
            puncture_count: n,
            puncture_cycle: cycle.to_vec(),
            edges,
            triangles,
            preset,
        })
    }

    pub fn puncture_count(&self) -> usize {
        self.puncture_count
    }

    pub fn puncture_cycle(&self) -> &[u8] {
        &self.puncture_cycle
    }

    /// Complexity `3g - 3 + n` with genus zero.
    pub fn complexity(&self) -> usize {
        self.puncture_count - 3
    }

    pub fn preset(&self) -> Option<Preset> {
        self.preset
    }

    /// Stable surface id used in JSON.
    pub fn id(&self) -> String {
        match self.preset {
            Some(p) => p.name().to_string(),
            None => {
                let labels: Vec<String> =
                    self.puncture_cycle.iter().map(|p| p.to_string()).collect();
                format!("S0_{}_{}", self.puncture_count, labels.join(""))
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> &Triangle {
        &self.triangles[t]
    }

    /// Position of a puncture label in the cyclic order.
    pub fn position(&self, label: u8) -> Option<usize> {
        self.puncture_cycle.iter().position(|&p| p == label)
    }

    pub fn check_label(&self, label: u8) -> Result<()> {
        if label == 0 || label as usize > self.puncture_count {
            Err(Error::LabelOutOfRange(label))
        } else {
            Ok(())
        }
    }

    /// Triangle a dart leaves.
    #[inline]
    pub fn tail(&self, d: Dart) -> usize {
        self.edges[dart_edge(d)].sides[(d & 1) as usize].0
    }

    /// Triangle a dart enters, with the side index it enters through.
    #[inline]
    pub fn head(&self, d: Dart) -> (usize, usize) {
        self.edges[dart_edge(d)].sides[1 - (d & 1) as usize]
    }

    /// Dart leaving triangle `t` through side `k`.
    #[inline]
    pub fn exit_dart(&self, t: usize, k: usize) -> Dart {
        let side = self.triangles[t].sides[k];
        dart(side.edge, if side.forward { 0 } else { 1 })
    }

    /// Side index through which dart `d` leaves its tail triangle.
    #[inline]
    pub fn exit_side(&self, d: Dart) -> usize {
        self.edges[dart_edge(d)].sides[(d & 1) as usize].1
    }

    /// Whether the dart `next` is a left turn after `prev`.
    #[inline]
    pub fn is_left_turn(&self, prev: Dart, next: Dart) -> bool {
        let (_, entered) = self.head(prev);
        self.exit_side(next) == (entered + 2) % 3
    }

    /// Darts of a counterclockwise loop around the corner `corner` of
    /// triangle `t`, stopping before `stop` is re-entered at the same puncture
    /// (or after a full turn when `stop` is `None`).
    fn rotate(
        &self,
        t: usize,
        corner: usize,
        ccw: bool,
        stop: Option<usize>,
    ) -> Vec<Dart> {
        let mut out = Vec::new();
        let (mut tri, mut k) = (t, corner);
        loop {
            let side = if ccw { (k + 2) % 3 } else { k };
            let d = self.exit_dart(tri, side);
            out.push(d);
            let (nt, entered) = self.head(d);
            tri = nt;
            k = if ccw { entered } else { (entered + 1) % 3 };
            if Some(tri) == stop || (stop.is_none() && tri == t && k == corner) {
                break;
            }
            assert!(out.len() <= 4 * self.edges.len(), "rotation did not close");
        }
        out
    }

    /// Full counterclockwise loop around the puncture at corner `corner` of
    /// triangle `t`, starting and ending in `t`.
    pub fn ccw_loop(&self, t: usize, corner: usize) -> Vec<Dart> {
        self.rotate(t, corner, true, None)
    }

    /// The two triangles on either side of edge `e`: left (where the edge
    /// runs forward) then right.
    pub fn edge_triangles(&self, e: usize) -> (usize, usize) {
        (self.edges[e].sides[0].0, self.edges[e].sides[1].0)
    }

    /// Darts going counterclockwise around the start puncture of `e`, from the
    /// left triangle of `e` to its right triangle, without crossing `e`.
    pub fn around_start(&self, e: usize) -> Vec<Dart> {
        let (t1, k1) = self.edges[e].sides[0];
        let (t2, _) = self.edges[e].sides[1];
        self.rotate(t1, k1, true, Some(t2))
    }

    /// Darts going clockwise around the end puncture of `e`, from the left
    /// triangle of `e` to its right triangle, without crossing `e`.
    pub fn around_end(&self, e: usize) -> Vec<Dart> {
        let (t1, k1) = self.edges[e].sides[0];
        let (t2, _) = self.edges[e].sides[1];
        self.rotate(t1, (k1 + 1) % 3, false, Some(t2))
    }

    /// A corner `(triangle, corner index)` at the given puncture.
    pub fn corner_of(&self, label: u8) -> (usize, usize) {
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(k) = tri.corners.iter().position(|&c| c == label) {
                return (t, k);
            }
        }
        unreachable!("every puncture is a triangulation vertex")
    }

    /// Edge joining two punctures that are adjacent in the cyclic order, or
    /// an inner diagonal from position 0.
    pub fn chord_edge(&self, p: u8, q: u8) -> Option<usize> {
        let (i, j) = (self.position(p)?, self.position(q)?);
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges.iter().position(|e| {
            e.kind != EdgeKind::Outer
                && self.position(e.ends[0]) == Some(i)
                && self.position(e.ends[1]) == Some(j)
        })
    }

    /// Index of the inner triangle with corner positions (0, k, k+1).
    pub(crate) fn inner_triangle(&self, k: usize) -> usize {
        k - 1
    }

    /// Inner diagonal from position 0 to position `k`.
    pub(crate) fn inner_diagonal(&self, k: usize) -> usize {
        self.puncture_count + k - 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let s = Preset::S05Fig1.build();
        assert_eq!((s.edge_count(), s.triangle_count()), (9, 6));
        assert_eq!(s.complexity(), 2);
        let s = Preset::S06Sorted.build();
        assert_eq!((s.edge_count(), s.triangle_count()), (12, 8));
        assert_eq!(s.complexity(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Surface::new(4, &[1, 2, 3, 4]),
            Err(Error::InvalidPunctureCount(4))
        ));
        assert!(Surface::new(5, &[1, 2, 3, 4, 4]).is_err());
        assert!(Surface::new(5, &[1, 2, 3, 4]).is_err());
        assert!(Surface::new(5, &[0, 2, 3, 4, 5]).is_err());
    }

    #[test]
    fn every_edge_glued_with_opposite_orientations() {
        for p in Preset::ALL {
            let s = p.build();
            for (e, edge) in s.edges().iter().enumerate() {
                let (t0, k0) = edge.sides[0];
                let (t1, k1) = edge.sides[1];
                assert!(s.triangle(t0).sides[k0].forward);
                assert!(!s.triangle(t1).sides[k1].forward);
                assert_eq!(s.triangle(t0).sides[k0].edge, e);
                assert_eq!(s.triangle(t1).sides[k1].edge, e);
                let tri = s.triangle(t0);
                assert_eq!(tri.corners[k0], edge.ends[0]);
                assert_eq!(tri.corners[(k0 + 1) % 3], edge.ends[1]);
                assert_ne!(edge.ends[0], edge.ends[1]);
            }
        }
    }

    #[test]
    fn loops_close_with_vertex_degree() {
        let s = Preset::S05Sorted.build();
        for label in 1..=5u8 {
            let (t, k) = s.corner_of(label);
            let degree = s
                .edges()
                .iter()
                .filter(|e| e.ends.contains(&label))
                .count();
            assert_eq!(s.ccw_loop(t, k).len(), degree);
        }
    }
}
