//! Essential simple closed curves in normal coordinates.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CoordError, Error, Result};
use crate::path::{edge_counts, reduce_cyclic};
use crate::surface::{dart, dart_edge, Dart, Preset, Surface};

/// An isotopy class of essential, non-peripheral simple closed curve.
///
/// Equality and ordering only look at the coordinate vector (and the
/// surface), so two curves compare equal exactly when they are isotopic.
#[derive(Clone)]
pub struct Curve {
    surface: Arc<Surface>,
    coords: Vec<u32>,
    word: Vec<Dart>,
    small_side: u8,
}

/// Bit mask of puncture labels: bit `p` set for puncture `p`.
pub type PunctureSet = u8;

pub fn labels(mask: PunctureSet) -> Vec<u8> {
    (1..8u8).filter(|p| mask & (1 << p) != 0).collect()
}

pub fn mask_of(labels: &[u8]) -> PunctureSet {
    labels.iter().fold(0, |m, &p| m | (1 << p))
}

/// Result of tracing a (possibly invalid) coordinate vector.
struct Trace {
    components: usize,
    first: Vec<Dart>,
}

fn side_weights(s: &Surface, coords: &[u32], t: usize) -> [u32; 3] {
    let tri = s.triangle(t);
    [
        coords[tri.sides[0].edge],
        coords[tri.sides[1].edge],
        coords[tri.sides[2].edge],
    ]
}

/// Checks parity and the triangle inequalities in every triangle.
fn check_matching(s: &Surface, coords: &[u32]) -> Result<()> {
    for t in 0..s.triangle_count() {
        let w = side_weights(s, coords, t);
        if (w[0] + w[1] + w[2]) % 2 != 0 {
            return Err(Error::coords(
                CoordError::Parity,
                format!("odd weight sum in triangle {t}"),
            ));
        }
        for k in 0..3 {
            if w[k] > w[(k + 1) % 3] + w[(k + 2) % 3] {
                return Err(Error::coords(
                    CoordError::TriangleIneq,
                    format!("triangle {t} violates the triangle inequality"),
                ));
            }
        }
    }
    Ok(())
}

/// Follows the normal arcs through every triangle, counting components and
/// recording the dart word of the component through the first point.
fn trace(s: &Surface, coords: &[u32]) -> Trace {
    let mut seen: Vec<Vec<bool>> = coords.iter().map(|&w| vec![false; w as usize]).collect();
    let mut components = 0;
    let mut first = Vec::new();
    for e in 0..coords.len() {
        for p0 in 0..coords[e] {
            if seen[e][p0 as usize] {
                continue;
            }
            components += 1;
            let record = components == 1;
            let (mut d, mut p) = (dart(e, 0), p0);
            loop {
                seen[dart_edge(d)][p as usize] = true;
                if record {
                    first.push(d);
                }
                let (nd, np) = step(s, coords, d, p);
                d = nd;
                p = np;
                if dart_edge(d) == e && p == p0 {
                    break;
                }
            }
        }
    }
    Trace { components, first }
}

/// Crosses the triangle entered by dart `d` at edge position `p`.
pub(crate) fn step(s: &Surface, coords: &[u32], d: Dart, p: u32) -> (Dart, u32) {
    let (t, k) = s.head(d);
    let tri = s.triangle(t);
    let w = side_weights(s, coords, t);
    let q = if tri.sides[k].forward { p } else { w[k] - 1 - p };
    // Arcs cutting off corner k (between sides k+2 and k).
    let corner_k = (w[(k + 2) % 3] + w[k] - w[(k + 1) % 3]) / 2;
    let (out_side, out_q) = if q < corner_k {
        ((k + 2) % 3, w[(k + 2) % 3] - 1 - q)
    } else {
        ((k + 1) % 3, w[k] - 1 - q)
    };
    let side = tri.sides[out_side];
    let out_p = if side.forward { out_q } else { w[out_side] - 1 - out_q };
    (s.exit_dart(t, out_side), out_p)
}

/// Splits the punctures by the curve: the endpoints of an edge lie on the
/// same side iff the curve crosses it an even number of times.
fn partition(s: &Surface, coords: &[u32]) -> (PunctureSet, PunctureSet) {
    let n = s.puncture_count();
    let mut color = vec![u8::MAX; n + 1];
    color[1] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for (e, edge) in s.edges().iter().enumerate() {
            let [a, b] = edge.ends;
            let flip = (coords[e] % 2) as u8;
            let (a, b) = (a as usize, b as usize);
            if color[a] != u8::MAX && color[b] == u8::MAX {
                color[b] = color[a] ^ flip;
                changed = true;
            } else if color[b] != u8::MAX && color[a] == u8::MAX {
                color[a] = color[b] ^ flip;
                changed = true;
            }
        }
    }
    let mut sides = (0u8, 0u8);
    for (p, &c) in color.iter().enumerate().skip(1) {
        if c == 0 {
            sides.0 |= 1 << p;
        } else {
            sides.1 |= 1 << p;
        }
    }
    sides
}

/// Chooses the "small" side: fewer punctures, ties broken toward puncture 1.
fn small_side(a: PunctureSet, b: PunctureSet) -> PunctureSet {
    match a.count_ones().cmp(&b.count_ones()) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if a & 2 != 0 {
                a
            } else {
                b
            }
        }
    }
}

impl Curve {
    /// Validates a coordinate vector as a single essential curve.
    pub fn from_coords(surface: &Arc<Surface>, coords: &[u32]) -> Result<Curve> {
        let s = surface.as_ref();
        if coords.len() != s.edge_count() {
            return Err(Error::coords(
                CoordError::Length,
                format!("expected {} coordinates, got {}", s.edge_count(), coords.len()),
            ));
        }
        check_matching(s, coords)?;
        if coords.iter().all(|&c| c == 0) {
            return Err(Error::coords(CoordError::Empty, "all coordinates are zero"));
        }
        let tr = trace(s, coords);
        if tr.components > 1 {
            return Err(Error::coords(
                CoordError::Disconnected,
                format!("{} components", tr.components),
            ));
        }
        let (a, b) = partition(s, coords);
        if a.count_ones() <= 1 || b.count_ones() <= 1 {
            return Err(Error::coords(CoordError::Peripheral, "curve encloses one puncture"));
        }
        Ok(Curve {
            surface: surface.clone(),
            coords: coords.to_vec(),
            word: tr.first,
            small_side: small_side(a, b),
        })
    }

    /// Same as [`Curve::from_coords`] with signed input.
    pub fn from_signed(surface: &Arc<Surface>, coords: &[i64]) -> Result<Curve> {
        let mut out = Vec::with_capacity(coords.len());
        for &c in coords {
            if c < 0 || c > u32::MAX as i64 {
                return Err(Error::coords(CoordError::Length, format!("entry {c} out of range")));
            }
            out.push(c as u32);
        }
        Curve::from_coords(surface, &out)
    }

    /// The curve carried by a closed dart word; the word need not be reduced.
    pub fn from_word(surface: &Arc<Surface>, word: &[Dart]) -> Result<Curve> {
        let reduced = reduce_cyclic(word);
        let coords = edge_counts(&reduced, surface.edge_count());
        Curve::from_coords(surface, &coords)
    }

    /// Boundary of a small neighbourhood of the straight chord from `p` to `q`.
    pub fn standard(surface: &Arc<Surface>, p: u8, q: u8) -> Result<Curve> {
        surface.check_label(p)?;
        surface.check_label(q)?;
        if p == q {
            return Err(Error::SamePuncture);
        }
        let word = chord_boundary_word(surface, p, q);
        Curve::from_word(surface, &word)
    }

    /// Edge position (along the edge's direction) of each crossing in
    /// [`Curve::word`].
    pub fn word_positions(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.word.len());
        let mut p = 0;
        for (i, &d) in self.word.iter().enumerate() {
            out.push(p);
            let (nd, np) = step(&self.surface, &self.coords, d, p);
            debug_assert_eq!(nd, self.word[(i + 1) % self.word.len()]);
            p = np;
        }
        out
    }

    pub fn surface(&self) -> &Arc<Surface> {
        &self.surface
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    /// Cyclically reduced dart word, starting at the first crossing of the
    /// lowest-numbered edge.
    pub fn word(&self) -> &[Dart] {
        &self.word
    }

    /// Total number of edge crossings.
    pub fn weight(&self) -> u32 {
        self.coords.iter().sum()
    }

    /// The two complementary puncture sets, smaller side first.
    pub fn partition(&self) -> (PunctureSet, PunctureSet) {
        let all = mask_of(self.surface.puncture_cycle());
        (self.small_side, all & !self.small_side)
    }

    /// The side with two punctures (or the side holding puncture 1 when the
    /// curve splits six punctures three and three).
    pub fn pants_side(&self) -> PunctureSet {
        self.small_side
    }

    /// Bounds a twice-punctured disk.
    pub fn is_pants(&self) -> bool {
        self.small_side.count_ones() == 2
    }

    pub fn same_surface(&self, other: &Curve) -> bool {
        Arc::ptr_eq(&self.surface, &other.surface) || self.surface == other.surface
    }

    pub fn check_same_surface(&self, other: &Curve) -> Result<()> {
        if self.same_surface(other) {
            Ok(())
        } else {
            Err(Error::SurfaceMismatch)
        }
    }

    /// Name of a standard curve if this is one, e.g. `P12`.
    pub fn standard_name(&self) -> Option<String> {
        if !self.is_pants() {
            return None;
        }
        let l = labels(self.small_side);
        let c = Curve::standard(&self.surface, l[0], l[1]).ok()?;
        (c == *self).then(|| format!("P{}{}", l[0], l[1]))
    }

    pub fn to_json(&self, name: Option<&str>) -> CurveJson {
        CurveJson {
            surface: self.surface.id(),
            coords: self.coords.clone(),
            name: name.map(str::to_string),
        }
    }
}

impl PartialEq for Curve {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && self.same_surface(other)
    }
}

impl Eq for Curve {}

impl Hash for Curve {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl PartialOrd for Curve {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Curve {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coords.cmp(&other.coords)
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve{:?}", self.coords)
    }
}

/// Wire format for a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveJson {
    pub surface: String,
    pub coords: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub name: Option<String>,
}

impl CurveJson {
    pub fn to_curve(&self) -> Result<Curve> {
        let preset = Preset::from_name(&self.surface)?;
        Curve::from_coords(&preset.surface(), &self.coords)
    }
}

/// Dart word of the boundary of a neighbourhood of the chord `p`–`q`.
fn chord_boundary_word(s: &Surface, p: u8, q: u8) -> Vec<Dart> {
    if let Some(e) = s.chord_edge(p, q) {
        // Loop around both ends of the edge.
        let mut w = s.around_start(e);
        let (t1, _) = s.edge(e).sides[0];
        let (t2, k2) = s.edge(e).sides[1];
        // Counterclockwise around the end puncture, from the right triangle
        // back to the left one. In the right triangle the edge runs backward,
        // so the end puncture sits at corner k2.
        let mut back = Vec::new();
        let (mut tri, mut k) = (t2, k2);
        loop {
            let d = s.exit_dart(tri, (k + 2) % 3);
            back.push(d);
            let (nt, entered) = s.head(d);
            tri = nt;
            k = entered;
            if tri == t1 {
                break;
            }
        }
        w.extend(back);
        return w;
    }
    // Non-adjacent chord between positions 1 <= i < j-1 crosses the inner
    // diagonals (0,k) for i < k < j.
    let (mut i, mut j) = (s.position(p).unwrap(), s.position(q).unwrap());
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    let (lo, hi) = (s.puncture_cycle()[i], s.puncture_cycle()[j]);
    let t0 = s.inner_triangle(i);
    let tm = s.inner_triangle(j - 1);
    let mut across = Vec::new();
    for k in i + 1..j {
        // Inner triangle (0,k-1,k) has the diagonal (0,k) as side 2, running
        // backward, so crossing from it toward higher k uses direction 1.
        across.push(dart(s.inner_diagonal(k), 1));
    }
    let corner = |t: usize, label: u8| s.triangle(t).corners.iter().position(|&c| c == label).unwrap();
    let mut w = across.clone();
    w.extend(s.ccw_loop(tm, corner(tm, hi)));
    w.extend(crate::path::reverse(&across));
    w.extend(s.ccw_loop(t0, corner(t0, lo)));
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Arc<Surface> {
        Preset::S05Fig1.surface()
    }

    #[test]
    fn zero_vector_is_empty() {
        let s = fig1();
        let e = Curve::from_coords(&s, &[0; 9]).unwrap_err();
        assert!(matches!(e, Error::Coords { kind: CoordError::Empty, .. }));
    }

    #[test]
    fn standard_curves_have_their_pants_side() {
        for preset in Preset::ALL {
            let s = preset.surface();
            let n = s.puncture_count() as u8;
            for p in 1..=n {
                for q in p + 1..=n {
                    let c = Curve::standard(&s, p, q).unwrap();
                    assert_eq!(c.pants_side(), mask_of(&[p, q]), "{preset:?} {p}{q}");
                    let back = Curve::from_coords(&s, c.coords()).unwrap();
                    assert_eq!(back, c);
                }
            }
        }
    }

    #[test]
    fn standard_rejects_bad_pairs() {
        let s = fig1();
        assert_eq!(Curve::standard(&s, 2, 2).unwrap_err(), Error::SamePuncture);
        assert_eq!(Curve::standard(&s, 1, 7).unwrap_err(), Error::LabelOutOfRange(7));
    }

    #[test]
    fn sum_of_disjoint_curves_is_disconnected() {
        let s = fig1();
        let a = Curve::standard(&s, 1, 2).unwrap();
        let b = Curve::standard(&s, 3, 4).unwrap();
        let sum: Vec<u32> = a.coords().iter().zip(b.coords()).map(|(x, y)| x + y).collect();
        let e = Curve::from_coords(&s, &sum).unwrap_err();
        assert!(matches!(e, Error::Coords { kind: CoordError::Disconnected, .. }));
    }

    #[test]
    fn doubled_curve_is_disconnected() {
        let s = fig1();
        let a = Curve::standard(&s, 2, 5).unwrap();
        let twice: Vec<u32> = a.coords().iter().map(|x| 2 * x).collect();
        assert!(matches!(
            Curve::from_coords(&s, &twice).unwrap_err(),
            Error::Coords { kind: CoordError::Disconnected, .. }
        ));
    }

    #[test]
    fn puncture_loop_is_peripheral() {
        let s = fig1();
        let (t, k) = s.corner_of(4);
        let e = Curve::from_word(&s, &s.ccw_loop(t, k)).unwrap_err();
        assert!(matches!(e, Error::Coords { kind: CoordError::Peripheral, .. }));
    }

    #[test]
    fn word_matches_coordinates() {
        let s = Preset::S06Sorted.surface();
        let c = Curve::standard(&s, 2, 5).unwrap();
        assert_eq!(edge_counts(c.word(), s.edge_count()), c.coords());
        assert!(crate::path::is_cyclically_reduced(c.word()));
    }

    #[test]
    fn json_round_trip() {
        let s = fig1();
        let c = Curve::standard(&s, 1, 2).unwrap();
        let j = c.to_json(Some("P12"));
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with("{\"surface\":\"S0_5_FIG1\",\"coords\":["));
        let back: CurveJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_curve().unwrap(), c);
        assert_eq!(c.standard_name().as_deref(), Some("P12"));
    }
}
