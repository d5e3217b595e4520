//! Mapping classes acting on curves: half twists, Dehn twists and words in
//! them.
//!
//! A half twist about a triangulation edge is realised as a map of the dual
//! graph that moves only the dual edge crossing it. Half twists about other
//! curves are conjugates of those. Dehn twists are computed separately, by
//! surgery on the overlay, so that the two can be checked against each
//! other.

use std::collections::{BinaryHeap, HashMap, HashSet};
use std::cmp::Reverse;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::intersect::intersection;
use crate::overlay::Overlay;
use crate::path::reverse;
use crate::surface::{dart, dart_edge, Dart, Surface};

/// Exponent relating the two twists: a half twist squared is the Dehn twist
/// raised to this power.
pub const HALF_TWIST_SQUARE_SIGN: i64 = -1;

/// Image of the dual edge crossing `e` (direction 0) under the half twist
/// about `e`, or its inverse.
fn edge_image(s: &Surface, e: usize, inverse: bool) -> Vec<Dart> {
    let (a, b) = (s.around_start(e), s.around_end(e));
    let mut w = Vec::with_capacity(a.len() + b.len() + 1);
    if inverse {
        w.extend(&b);
        w.push(dart(e, 1));
        w.extend(&a);
    } else {
        w.extend(&a);
        w.push(dart(e, 1));
        w.extend(&b);
    }
    w
}

/// Applies the half twist about edge `e` (counterclockwise when
/// `power > 0`) to a closed word.
pub fn twist_word_about_edge(s: &Surface, e: usize, power: i64, word: &[Dart]) -> Vec<Dart> {
    let inverse = power < 0;
    let image = edge_image(s, e, inverse);
    let image_rev = reverse(&image);
    let mut w = word.to_vec();
    for _ in 0..power.unsigned_abs() {
        let mut out = Vec::with_capacity(w.len() * 2);
        for &d in &w {
            if dart_edge(d) == e {
                out.extend(if d & 1 == 0 { &image } else { &image_rev });
            } else {
                out.push(d);
            }
        }
        w = crate::path::reduce_cyclic(&out);
    }
    w
}

/// Half twist about a triangulation edge applied to a curve.
pub fn half_twist_edge(e: usize, power: i64, b: &Curve) -> Result<Curve> {
    let s = b.surface();
    if power == 0 {
        return Ok(b.clone());
    }
    let w = twist_word_about_edge(s, e, power, b.word());
    Curve::from_word(s, &w)
}

/// Boundary of a neighbourhood of triangulation edge `e`.
pub fn edge_curve(s: &Arc<Surface>, e: usize) -> Curve {
    let mut w = s.around_start(e);
    let (t1, _) = s.edge(e).sides[0];
    let (t2, k2) = s.edge(e).sides[1];
    let (mut tri, mut k) = (t2, k2);
    loop {
        let d = s.exit_dart(tri, (k + 2) % 3);
        w.push(d);
        let (nt, entered) = s.head(d);
        tri = nt;
        k = entered;
        if tri == t1 {
            break;
        }
    }
    Curve::from_word(s, &w).expect("edge neighbourhoods are essential")
}

/// Dehn twist `T_a^n(b)` (left twist for positive `n`), by surgery: at each
/// crossing `b` turns left onto `a` and follows it `n` times around.
pub fn dehn_twist(a: &Curve, n: i64, b: &Curve) -> Result<Curve> {
    a.check_same_surface(b)?;
    if n == 0 || a == b || intersection(a, b)? == 0 {
        return Ok(b.clone());
    }
    let ov = Overlay::new(b, a)?;
    let (wb, wa) = (ov.word(0), ov.word(1));
    let la = wa.len();
    let forward_loop = |j: usize| -> Vec<Dart> { (1..=la).map(|t| wa[(j + t) % la]).collect() };
    let crossings = ov.crossings_along(0);
    let reps = n.unsigned_abs() as usize;
    let mut out = Vec::with_capacity(wb.len() + crossings.len() * reps * la);
    let mut next = 0;
    for (i, &d) in wb.iter().enumerate() {
        out.push(d);
        while next < crossings.len() && crossings[next].own == i {
            let cr = crossings[next];
            let along = cr.left_to_right == (n > 0);
            let lp = forward_loop(cr.other);
            let lp = if along { lp } else { reverse(&lp) };
            for _ in 0..reps {
                out.extend(&lp);
            }
            next += 1;
        }
    }
    Curve::from_word(a.surface(), &out)
}

/// One letter of a mapping class word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Letter {
    /// Half twist about a triangulation edge.
    Edge { edge: usize, power: i64 },
    /// Half twist about a curve bounding a twice-punctured disk.
    Half { curve: Vec<u32>, power: i64 },
    /// Left Dehn twist about a curve.
    Dehn { curve: Vec<u32>, power: i64 },
}

impl Letter {
    fn inverse(&self) -> Letter {
        match self {
            Letter::Edge { edge, power } => Letter::Edge { edge: *edge, power: -power },
            Letter::Half { curve, power } => Letter::Half { curve: curve.clone(), power: -power },
            Letter::Dehn { curve, power } => Letter::Dehn { curve: curve.clone(), power: -power },
        }
    }
}

/// A word in mapping classes, read as a composition: the last letter acts
/// first.
#[derive(Debug, Clone)]
pub struct MappingClassWord {
    surface: Arc<Surface>,
    letters: Vec<Letter>,
}

impl MappingClassWord {
    pub fn identity(surface: &Arc<Surface>) -> Self {
        MappingClassWord { surface: surface.clone(), letters: Vec::new() }
    }

    pub fn from_letters(surface: &Arc<Surface>, letters: Vec<Letter>) -> Self {
        MappingClassWord { surface: surface.clone(), letters }
    }

    /// Half twist swapping the punctures at cyclic positions `i` and `i+1`.
    pub fn generator(surface: &Arc<Surface>, i: usize, power: i64) -> Self {
        let edge = i % surface.puncture_count();
        Self::from_letters(surface, vec![Letter::Edge { edge, power }])
    }

    pub fn half_twist(c: &Curve, power: i64) -> Self {
        Self::from_letters(c.surface(), vec![Letter::Half { curve: c.coords().to_vec(), power }])
    }

    pub fn dehn_twist(c: &Curve, power: i64) -> Self {
        Self::from_letters(c.surface(), vec![Letter::Dehn { curve: c.coords().to_vec(), power }])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// `self · other`: apply `other` first.
    pub fn compose(&self, other: &MappingClassWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        MappingClassWord { surface: self.surface.clone(), letters }
    }

    pub fn inverse(&self) -> Self {
        let letters = self.letters.iter().rev().map(Letter::inverse).collect();
        MappingClassWord { surface: self.surface.clone(), letters }
    }

    /// Random word of the given length in the cyclic-neighbour generators.
    pub fn random<R: Rng>(surface: &Arc<Surface>, len: usize, rng: &mut R) -> Self {
        let n = surface.puncture_count();
        let letters = (0..len)
            .map(|_| Letter::Edge {
                edge: rng.gen_range(0..n),
                power: if rng.gen_bool(0.5) { 1 } else { -1 },
            })
            .collect();
        MappingClassWord { surface: surface.clone(), letters }
    }

    pub fn apply(&self, a: &Curve) -> Result<Curve> {
        if !Arc::ptr_eq(&self.surface, a.surface()) && *self.surface != **a.surface() {
            return Err(Error::SurfaceMismatch);
        }
        let mut x = a.clone();
        for letter in self.letters.iter().rev() {
            x = match letter {
                Letter::Edge { edge, power } => half_twist_edge(*edge, *power, &x)?,
                Letter::Half { curve, power } => {
                    let c = Curve::from_coords(&self.surface, curve)?;
                    half_twist(&c, *power, &x)?
                }
                Letter::Dehn { curve, power } => {
                    let c = Curve::from_coords(&self.surface, curve)?;
                    dehn_twist(&c, *power, &x)?
                }
            };
        }
        Ok(x)
    }
}

/// Letters `(edge, ±1)` in the order they are applied.
pub(crate) type EdgeSteps = Vec<(usize, i64)>;

/// Applies edge half twists in order to a cyclic word.
pub(crate) fn apply_steps(s: &Surface, steps: &[(usize, i64)], word: &[Dart]) -> Vec<Dart> {
    let mut w = word.to_vec();
    for &(edge, power) in steps {
        w = twist_word_about_edge(s, edge, power, &w);
    }
    w
}

type ConjugatorKey = (String, Vec<u32>, bool);

fn conjugator_cache() -> &'static Mutex<HashMap<ConjugatorKey, (usize, EdgeSteps)>> {
    static CACHE: OnceLock<Mutex<HashMap<ConjugatorKey, (usize, EdgeSteps)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const CONJUGATOR_SEARCH_LIMIT: usize = 200_000;

/// Finds half twists about edges carrying `c` to the neighbourhood boundary
/// of some edge: returns that edge and the steps, applied in order. With
/// `inner_sides` the target is a polygon side away from position 0.
pub(crate) fn conjugator(c: &Curve, inner_sides: bool) -> Result<(usize, EdgeSteps)> {
    let s = c.surface();
    let key = (s.id(), c.coords().to_vec(), inner_sides);
    if let Some(hit) = conjugator_cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let allowed: Vec<usize> = if inner_sides {
        (1..s.puncture_count() - 1).collect()
    } else {
        (0..s.edge_count()).collect()
    };
    let targets: Vec<(Curve, usize)> = allowed.into_iter().map(|e| (edge_curve(s, e), e)).collect();
    let target_of = |x: &Curve| targets.iter().find(|(t, _)| t == x).map(|(_, e)| *e);

    let mut heap = BinaryHeap::new();
    let mut parent: HashMap<Vec<u32>, (Vec<u32>, usize, i64)> = HashMap::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut curves: HashMap<Vec<u32>, Curve> = HashMap::new();
    heap.push(Reverse((c.weight(), c.coords().to_vec())));
    seen.insert(c.coords().to_vec());
    curves.insert(c.coords().to_vec(), c.clone());
    let mut expanded = 0;
    while let Some(Reverse((_, coords))) = heap.pop() {
        let x = curves[&coords].clone();
        if let Some(e) = target_of(&x) {
            let mut steps = Vec::new();
            let mut cur = coords;
            while let Some((prev, edge, power)) = parent.get(&cur) {
                steps.push((*edge, *power));
                cur = prev.clone();
            }
            steps.reverse();
            let out = (e, steps);
            conjugator_cache().lock().unwrap().insert(key, out.clone());
            return Ok(out);
        }
        expanded += 1;
        if expanded > CONJUGATOR_SEARCH_LIMIT {
            break;
        }
        for e in 0..s.edge_count() {
            for power in [1i64, -1] {
                let y = half_twist_edge(e, power, &x)?;
                if seen.insert(y.coords().to_vec()) {
                    parent.insert(y.coords().to_vec(), (x.coords().to_vec(), e, power));
                    heap.push(Reverse((y.weight(), y.coords().to_vec())));
                    curves.insert(y.coords().to_vec(), y);
                }
            }
        }
    }
    Err(Error::ResourceCap("no conjugator to a standard curve found".into()))
}

/// Half twist `τ_c^n(b)` about a curve bounding a twice-punctured disk.
pub fn half_twist(c: &Curve, n: i64, b: &Curve) -> Result<Curve> {
    c.check_same_surface(b)?;
    if !c.is_pants() {
        return Err(Error::NotPants);
    }
    if n == 0 || c == b || intersection(c, b)? == 0 {
        return Ok(b.clone());
    }
    let (e, steps) = conjugator(c, false)?;
    let s = b.surface();
    let mut w = apply_steps(s, &steps, b.word());
    w = twist_word_about_edge(s, e, n, &w);
    for &(edge, power) in steps.iter().rev() {
        w = twist_word_about_edge(s, edge, -power, &w);
    }
    Curve::from_word(s, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Preset;

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn edge_twist_swaps_peripheral_loops() {
        for preset in Preset::ALL {
            let s = preset.surface();
            for e in 0..s.edge_count() {
                let [ps, qs] = s.edge(e).ends;
                let (t, k) = s.corner_of(ps);
                let around_p = crate::path::reduce_cyclic(&s.ccw_loop(t, k));
                let (t, k) = s.corner_of(qs);
                let around_q = crate::path::reduce_cyclic(&s.ccw_loop(t, k));
                let img = twist_word_about_edge(&s, e, 1, &around_p);
                let counts = crate::path::edge_counts(&img, s.edge_count());
                assert_eq!(counts, crate::path::edge_counts(&around_q, s.edge_count()));
            }
        }
    }

    #[test]
    fn edge_twist_inverts() {
        let s = Preset::S05Sorted.surface();
        let b = p(&s, 2, 4);
        for e in 0..s.edge_count() {
            let x = half_twist_edge(e, 1, &b).unwrap();
            assert_eq!(half_twist_edge(e, -1, &x).unwrap(), b);
            assert_eq!(half_twist_edge(e, 1, &edge_curve(&s, e)).unwrap(), edge_curve(&s, e));
        }
    }

    #[test]
    fn figure_two_half_twist() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        let v = p(&s, 2, 5);
        assert_eq!(half_twist(&c, 1, &v).unwrap(), p(&s, 1, 5));
        assert_eq!(half_twist(&c, 1, &c).unwrap(), c);
    }

    #[test]
    fn half_twist_squares_to_dehn_twist() {
        let s = Preset::S05Fig1.surface();
        let n = 5u8;
        for (a, b) in [(1, 2), (2, 5), (1, 3), (3, 5)] {
            let c = p(&s, a, b);
            for x in 1..=n {
                for y in x + 1..=n {
                    let v = p(&s, x, y);
                    let twice = half_twist(&c, 2, &v).unwrap();
                    let full = dehn_twist(&c, HALF_TWIST_SQUARE_SIGN, &v).unwrap();
                    assert_eq!(twice, full, "c={a}{b} v={x}{y}");
                }
            }
        }
    }

    #[test]
    fn dehn_twist_intersection_growth() {
        let s = Preset::S05Sorted.surface();
        let a = p(&s, 1, 2);
        let b = p(&s, 2, 4);
        let i = intersection(&a, &b).unwrap();
        for n in -4i64..=4 {
            let tb = dehn_twist(&a, n, &b).unwrap();
            assert_eq!(intersection(&tb, &b).unwrap(), n.unsigned_abs() * i * i, "n={n}");
            assert_eq!(intersection(&tb, &a).unwrap(), i);
        }
        let t2 = dehn_twist(&a, 2, &b).unwrap();
        assert_eq!(dehn_twist(&a, 3, &t2).unwrap(), dehn_twist(&a, 5, &b).unwrap());
        assert_eq!(dehn_twist(&a, -2, &t2).unwrap(), b);
    }

    #[test]
    fn word_action_composes() {
        use rand::SeedableRng;
        let s = Preset::S05Fig1.surface();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = p(&s, 1, 3);
        let b = p(&s, 2, 3);
        for _ in 0..10 {
            let w1 = MappingClassWord::random(&s, 4, &mut rng);
            let w2 = MappingClassWord::random(&s, 4, &mut rng);
            let both = w1.compose(&w2).apply(&a).unwrap();
            assert_eq!(both, w1.apply(&w2.apply(&a).unwrap()).unwrap());
            assert_eq!(w1.inverse().apply(&w1.apply(&a).unwrap()).unwrap(), a);
            let (wa, wb) = (w1.apply(&a).unwrap(), w1.apply(&b).unwrap());
            assert_eq!(intersection(&wa, &wb).unwrap(), intersection(&a, &b).unwrap());
        }
    }
}
