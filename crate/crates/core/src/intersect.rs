//! Geometric intersection numbers from linked pairs of reduced words.
//!
//! Two reduced cyclic words in the dual graph are geodesic representatives.
//! Each time they run along a common segment (in either direction) they
//! either cross or touch and separate; they cross iff they enter and leave
//! the segment on opposite sides.

use crate::curve::Curve;
use crate::error::Result;
use crate::path::reverse;
use crate::surface::{dart_edge, Dart, Surface};

/// Side-of-strand flags at the two ends of a shared segment.
fn crosses(s: &Surface, u_in: Dart, first: Dart, last: Dart, u_out: Dart) -> bool {
    // Entry vertex: both leave through `first`.
    let h = s.exit_side(first);
    let (_, u_entered) = s.head(u_in);
    let left_at_start = u_entered == (h + 1) % 3;
    // Exit vertex: both arrive through `last`.
    let (_, h2) = s.head(last);
    let left_at_end = s.exit_side(u_out) == (h2 + 2) % 3;
    left_at_start != left_at_end
}

/// A maximal common run of two cyclic words: `u[i..i+len]` equals
/// `v[j..j+len]` (indices cyclic), entered and left through different darts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Segment {
    pub i: usize,
    pub j: usize,
    pub len: usize,
    pub crosses: bool,
}

/// All maximal shared segments of cyclic words `u` and `v`, where `v` may be
/// the reverse of a curve's word. Returns `None` when the words are cyclic
/// rotations of each other.
pub(crate) fn shared_segments(s: &Surface, u: &[Dart], v: &[Dart]) -> Option<Vec<Segment>> {
    let (m, k) = (u.len(), v.len());
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); 2 * s.edge_count()];
    for (j, &d) in v.iter().enumerate() {
        at[d as usize].push(j);
    }
    let limit = m + k;
    let mut out = Vec::new();
    for i in 0..m {
        let prev_u = u[(i + m - 1) % m];
        for &j in &at[u[i] as usize] {
            let prev_v = v[(j + k - 1) % k];
            if prev_u == prev_v {
                continue;
            }
            let mut len = 1;
            while u[(i + len) % m] == v[(j + len) % k] {
                len += 1;
                if len > limit {
                    return None;
                }
            }
            let crosses = crosses(s, prev_u, u[i], u[(i + len - 1) % m], u[(i + len) % m]);
            out.push(Segment { i, j, len, crosses });
        }
    }
    Some(out)
}

fn linked_pairs(s: &Surface, u: &[Dart], v: &[Dart]) -> Option<u64> {
    shared_segments(s, u, v).map(|segs| segs.iter().filter(|g| g.crosses).count() as u64)
}

/// Intersection number of two reduced cyclic words.
pub fn word_intersection(s: &Surface, u: &[Dart], v: &[Dart]) -> u64 {
    if u.is_empty() || v.is_empty() {
        return 0;
    }
    let same = match linked_pairs(s, u, v) {
        None => return 0,
        Some(c) => c,
    };
    match linked_pairs(s, u, &reverse(v)) {
        None => 0,
        Some(c) => same + c,
    }
}

/// Geometric intersection number.
pub fn intersection(a: &Curve, b: &Curve) -> Result<u64> {
    a.check_same_surface(b)?;
    Ok(word_intersection(a.surface(), a.word(), b.word()))
}

/// Whether the curves cross a common edge, a cheap necessary condition for
/// a nonzero intersection.
pub fn shares_edges(a: &Curve, b: &Curve) -> bool {
    a.word()
        .iter()
        .any(|&d| b.coords()[dart_edge(d)] > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Preset;

    fn p(s: &std::sync::Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn chord_curves_on_figure_surface() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        assert_eq!(intersection(&c, &c).unwrap(), 0);
        assert_eq!(intersection(&c, &p(&s, 3, 4)).unwrap(), 0);
        assert_eq!(intersection(&c, &p(&s, 2, 5)).unwrap(), 2);
        assert_eq!(intersection(&p(&s, 2, 5), &c).unwrap(), 2);
    }

    /// Straight chords in convex position: sharing an endpoint gives 2,
    /// crossing chords give 4, disjoint chords give 0.
    #[test]
    fn convex_chord_rule() {
        for preset in Preset::ALL {
            let s = preset.surface();
            let n = s.puncture_count();
            let pos = |l: u8| s.position(l).unwrap();
            for a in 1..=n as u8 {
                for b in a + 1..=n as u8 {
                    for c in 1..=n as u8 {
                        for d in c + 1..=n as u8 {
                            if (a, b) == (c, d) {
                                continue;
                            }
                            let (x, y) = (pos(a).min(pos(b)), pos(a).max(pos(b)));
                            let inside = |t: u8| x < pos(t) && pos(t) < y;
                            let expect = if a == c || a == d || b == c || b == d {
                                2
                            } else if inside(c) != inside(d) {
                                4
                            } else {
                                0
                            };
                            let got = intersection(&p(&s, a, b), &p(&s, c, d)).unwrap();
                            assert_eq!(got, expect, "{preset:?} {a}{b} vs {c}{d}");
                        }
                    }
                }
            }
        }
    }
}
