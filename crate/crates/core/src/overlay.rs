//! Two curves drawn together in minimal position.
//!
//! Each curve is normal with respect to the triangulation. On every edge the
//! crossing points of both curves are merged by comparing where their
//! forward rays end up in the universal cover, which puts the pair in
//! minimal position: the chords of the two curves inside each triangle
//! cross exactly `i(a, b)` times in total.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::curve::{Curve, PunctureSet};
use crate::error::Result;
use crate::intersect::intersection;
use crate::path::reverse;
use crate::surface::{dart, dart_edge, dart_rev, Dart, Surface};

/// A normal arc of one curve inside one triangle.
#[derive(Debug, Clone, Copy)]
pub struct Chord {
    pub curve: usize,
    /// The arc enters through `word[index]` and leaves through
    /// `word[index + 1]`.
    pub index: usize,
    /// Boundary indices of the endpoints, counterclockwise around the
    /// triangle.
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone)]
struct TriangleChords {
    offsets: [u32; 3],
    total: u32,
    chords: Vec<Chord>,
}

/// One transverse crossing, seen from one of the two curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    pub triangle: usize,
    /// Chord index along this curve.
    pub own: usize,
    /// Chord index along the other curve.
    pub other: usize,
    /// Rank of the crossing along this curve's chord, from its entry.
    pub own_rank: u32,
    /// Rank along the other curve's chord, from its entry.
    pub other_rank: u32,
    /// This curve passes from the other's left to its right.
    pub left_to_right: bool,
}

pub struct Overlay {
    surface: Arc<Surface>,
    words: [Vec<Dart>; 2],
    merged: [Vec<u32>; 2],
    load: Vec<u32>,
    triangles: Vec<TriangleChords>,
}

fn in_open_arc(x: u32, p: u32, q: u32, m: u32) -> bool {
    let dx = (x + m - p) % m;
    let dq = (q + m - p) % m;
    dx != 0 && dx < dq
}

impl Overlay {
    /// Overlays two distinct curves on the same surface.
    pub fn new(a: &Curve, b: &Curve) -> Result<Overlay> {
        a.check_same_surface(b)?;
        assert!(a != b, "overlay of a curve with itself");
        let s = a.surface().clone();
        let words = [a.word().to_vec(), b.word().to_vec()];
        let own = [a.word_positions(), b.word_positions()];
        let load: Vec<u32> = a.coords().iter().zip(b.coords()).map(|(x, y)| x + y).collect();

        // Occurrences per edge, in each curve's own edge order.
        let mut per_edge: [Vec<Vec<usize>>; 2] = [
            vec![Vec::new(); s.edge_count()],
            vec![Vec::new(); s.edge_count()],
        ];
        for c in 0..2 {
            for (i, &d) in words[c].iter().enumerate() {
                per_edge[c][dart_edge(d)].push(i);
            }
            for list in per_edge[c].iter_mut() {
                list.sort_by_key(|&i| own[c][i]);
            }
        }

        let mut merged = [vec![0u32; words[0].len()], vec![0u32; words[1].len()]];
        for e in 0..s.edge_count() {
            let (la, lb) = (&per_edge[0][e], &per_edge[1][e]);
            let (mut x, mut y, mut pos) = (0, 0, 0u32);
            while x < la.len() || y < lb.len() {
                let take_a = if x == la.len() {
                    false
                } else if y == lb.len() {
                    true
                } else {
                    compare_rays(&s, &words, la[x], lb[y]) == Ordering::Less
                };
                if take_a {
                    merged[0][la[x]] = pos;
                    x += 1;
                } else {
                    merged[1][lb[y]] = pos;
                    y += 1;
                }
                pos += 1;
            }
        }

        let mut ov = Overlay { surface: s, words, merged, load, triangles: Vec::new() };
        ov.build_chords();
        let target = intersection(a, b)?;
        loop {
            let removed = ov.remove_bigons();
            if removed == 0 {
                break;
            }
            ov.build_chords();
        }
        assert_eq!(ov.crossing_count(), target, "overlay left in non-minimal position");
        Ok(ov)
    }

    fn build_chords(&mut self) {
        let s = &self.surface;
        let load = &self.load;
        let mut triangles: Vec<TriangleChords> = (0..s.triangle_count())
            .map(|t| {
                let tri = s.triangle(t);
                let m: Vec<u32> = tri.sides.iter().map(|sd| load[sd.edge]).collect();
                TriangleChords {
                    offsets: [0, m[0], m[0] + m[1]],
                    total: m[0] + m[1] + m[2],
                    chords: Vec::new(),
                }
            })
            .collect();
        let boundary = |t: usize, k: usize, p: u32, tc: &TriangleChords| -> u32 {
            let side = s.triangle(t).sides[k];
            let sp = if side.forward { p } else { load[side.edge] - 1 - p };
            tc.offsets[k] + sp
        };
        for c in 0..2 {
            let w = &self.words[c];
            let n = w.len();
            for i in 0..n {
                let (t, k_in) = s.head(w[i]);
                let k_out = s.exit_side(w[(i + 1) % n]);
                let from = boundary(t, k_in, self.merged[c][i], &triangles[t]);
                let to = boundary(t, k_out, self.merged[c][(i + 1) % n], &triangles[t]);
                triangles[t].chords.push(Chord { curve: c, index: i, from, to });
            }
        }
        self.triangles = triangles;
    }

    /// Removes a batch of innermost bigons by swapping the two strands on
    /// every edge between the corners. Returns how many were removed.
    fn remove_bigons(&mut self) -> usize {
        let along_a = self.crossings_along(0);
        if along_a.len() < 2 {
            return 0;
        }
        let along_b = self.crossings_along(1);
        let key = |t: usize, ia: usize, ib: usize| (t, ia, ib);
        let mut index_b: HashMap<(usize, usize, usize), usize> = HashMap::new();
        for (k, cr) in along_b.iter().enumerate() {
            index_b.insert(key(cr.triangle, cr.other, cr.own), k);
        }
        let (na, nb) = (self.words[0].len(), self.words[1].len());
        let nb_cross = along_b.len();
        let mut used_a = vec![false; na];
        let mut used_b = vec![false; nb];
        let mut removed = 0;
        for k in 0..along_a.len() {
            let (c1, c2) = (along_a[k], along_a[(k + 1) % along_a.len()]);
            let p = index_b[&key(c1.triangle, c1.own, c1.other)];
            let q = index_b[&key(c2.triangle, c2.own, c2.other)];
            let forward_b = q == (p + 1) % nb_cross;
            if !forward_b && p != (q + 1) % nb_cross {
                continue;
            }
            // Edge crossings of a strictly between the two corners.
            let steps_a = (c2.own + na - c1.own) % na;
            if steps_a == 0 {
                continue;
            }
            let occ_a: Vec<usize> = (1..=steps_a).map(|t| (c1.own + t) % na).collect();
            let occ_b: Vec<usize> = if forward_b {
                let steps = (c2.other + nb - c1.other) % nb;
                (1..=steps).map(|t| (c1.other + t) % nb).collect()
            } else {
                let steps = (c1.other + nb - c2.other) % nb;
                (0..steps).map(|t| (c1.other + nb - t) % nb).collect()
            };
            if occ_a.len() != occ_b.len() {
                continue;
            }
            let same_path = occ_a.iter().zip(&occ_b).all(|(&i, &j)| {
                let (da, db) = (self.words[0][i], self.words[1][j]);
                if forward_b { da == db } else { da == dart_rev(db) }
            });
            if !same_path {
                continue;
            }
            if occ_a.iter().any(|&i| used_a[i]) || occ_b.iter().any(|&j| used_b[j]) {
                continue;
            }
            for (&i, &j) in occ_a.iter().zip(&occ_b) {
                let (pa, pb) = (self.merged[0][i], self.merged[1][j]);
                assert_eq!(pa.abs_diff(pb), 1, "bigon sides are not adjacent");
                self.merged[0][i] = pb;
                self.merged[1][j] = pa;
                used_a[i] = true;
                used_b[j] = true;
            }
            removed += 1;
        }
        removed
    }


    pub fn surface(&self) -> &Arc<Surface> {
        &self.surface
    }

    pub fn word(&self, c: usize) -> &[Dart] {
        &self.words[c]
    }

    /// Merged position of each crossing of curve `c`, along the edge.
    pub fn merged_positions(&self, c: usize) -> &[u32] {
        &self.merged[c]
    }

    /// All crossings, listed from curve `c`'s point of view, sorted along `c`.
    pub fn crossings_along(&self, c: usize) -> Vec<Crossing> {
        let mut out = Vec::new();
        for (t, tc) in self.triangles.iter().enumerate() {
            let m = tc.total;
            for x in tc.chords.iter().filter(|ch| ch.curve == c) {
                for y in tc.chords.iter().filter(|ch| ch.curve != c) {
                    let x_from_inside = in_open_arc(x.from, y.from, y.to, m);
                    let x_to_inside = in_open_arc(x.to, y.from, y.to, m);
                    if x_from_inside == x_to_inside {
                        continue;
                    }
                    // Counterclockwise boundary from y.from to y.to lies on
                    // y's right.
                    let own_rank = if x_from_inside {
                        (y.to + m - y.from) % m
                    } else {
                        (y.from + m - y.to) % m
                    };
                    let y_from_inside = in_open_arc(y.from, x.from, x.to, m);
                    let other_rank = if y_from_inside {
                        (x.to + m - x.from) % m
                    } else {
                        (x.from + m - x.to) % m
                    };
                    out.push(Crossing {
                        triangle: t,
                        own: x.index,
                        other: y.index,
                        own_rank,
                        other_rank,
                        left_to_right: !x_from_inside,
                    });
                }
            }
        }
        // Nested chords: the one cutting off fewer boundary points on the
        // entry side is met first.
        out.sort_by_key(|cr| (cr.own, cr.own_rank));
        out
    }

    pub fn crossing_count(&self) -> u64 {
        let mut n = 0;
        for tc in &self.triangles {
            for x in tc.chords.iter().filter(|ch| ch.curve == 0) {
                for y in tc.chords.iter().filter(|ch| ch.curve == 1) {
                    if in_open_arc(x.from, y.from, y.to, tc.total)
                        != in_open_arc(x.to, y.from, y.to, tc.total)
                    {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    /// Complementary regions of the union. Returns, per triangle, the region
    /// of each boundary gap, and the region containing each puncture.
    fn regions(&self) -> Regions {
        let s = &self.surface;
        let mut gap_base = Vec::with_capacity(s.edge_count());
        let mut total = 0usize;
        for &m in &self.load {
            gap_base.push(total);
            total += m as usize + 1;
        }
        let n = s.puncture_count();
        let punct_base = total;
        let mut uf = UnionFind::new(total + n + 1);
        // Per triangle: (region-local id of every triangle gap).
        let mut local: Vec<Vec<usize>> = Vec::with_capacity(s.triangle_count());
        for (t, tc) in self.triangles.iter().enumerate() {
            let tri = s.triangle(t);
            let m = tc.total as usize;
            let gap_of = |k: usize, g: u32| -> usize {
                let side = tri.sides[k];
                let eg = if side.forward { g } else { self.load[side.edge] - g };
                gap_base[side.edge] + eg as usize
            };
            if m == 0 {
                let first = gap_of(0, 0);
                for k in 0..3 {
                    uf.union(first, gap_of(k, 0));
                    uf.union(first, punct_base + tri.corners[k] as usize);
                }
                local.push(vec![0]);
                continue;
            }
            let words = tc.chords.len().div_ceil(64);
            let mut owner = vec![usize::MAX; m];
            for (ci, ch) in tc.chords.iter().enumerate() {
                owner[ch.from as usize] = ci;
                owner[ch.to as usize] = ci;
            }
            let mut sig = vec![0u64; words];
            let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut region_of_gap = vec![0usize; m];
            for (j, slot) in region_of_gap.iter_mut().enumerate() {
                let next = ids.len();
                *slot = *ids.entry(sig.clone()).or_insert(next);
                let ci = owner[j];
                sig[ci / 64] ^= 1 << (ci % 64);
            }
            let mut rep: Vec<Option<usize>> = vec![None; ids.len()];
            for k in 0..3 {
                let mk = self.load[tri.sides[k].edge];
                for g in 0..=mk {
                    let j = (tc.offsets[k] + g) as usize % m;
                    let node = gap_of(k, g);
                    let r = region_of_gap[j];
                    match rep[r] {
                        Some(first) => uf.union(first, node),
                        None => rep[r] = Some(node),
                    }
                }
                uf.union(punct_base + tri.corners[k] as usize, gap_of(k, 0));
            }
            local.push(region_of_gap);
        }
        Regions { gap_base, punct_base, uf, local }
    }

    /// Puncture sets of the complementary regions that contain punctures.
    pub fn face_punctures(&self) -> Vec<PunctureSet> {
        let mut r = self.regions();
        let mut by_root: Vec<(usize, PunctureSet)> = Vec::new();
        for p in 1..=self.surface.puncture_count() {
            let root = r.uf.find(r.punct_base + p);
            match by_root.iter_mut().find(|(x, _)| *x == root) {
                Some((_, m)) => *m |= 1 << p,
                None => by_root.push((root, 1 << p)),
            }
        }
        let mut out: Vec<PunctureSet> = by_root.into_iter().map(|(_, m)| m).collect();
        out.sort_unstable();
        out
    }

    /// A closed word surrounding punctures `p` and `q` inside their common
    /// region, if they share one.
    pub fn surrounding_word(&self, p: u8, q: u8) -> Option<Vec<Dart>> {
        let s = &self.surface;
        let r = self.regions();
        // Local regions become graph nodes.
        let mut base = Vec::with_capacity(s.triangle_count());
        let mut count = 0;
        for l in &r.local {
            base.push(count);
            count += l.iter().copied().max().unwrap_or(0) + 1;
        }
        let node_of = |t: usize, k: usize, g: u32| -> usize {
            let tc = &self.triangles[t];
            let m = tc.total.max(1);
            let j = (tc.offsets[k] + g) % m;
            base[t] + r.local[t][j as usize]
        };
        let mut owner = vec![0usize; count];
        for (t, &b) in base.iter().enumerate() {
            let next = base.get(t + 1).copied().unwrap_or(count);
            owner[b..next].iter_mut().for_each(|o| *o = t);
        }
        let corner_node = |label: u8| -> Vec<(usize, usize)> {
            let mut v = Vec::new();
            for t in 0..s.triangle_count() {
                if let Some(k) = s.triangle(t).corners.iter().position(|&c| c == label) {
                    v.push((node_of(t, k, 0), k));
                }
            }
            v
        };
        let starts = corner_node(p);
        let goals = corner_node(q);
        let mut adj: Vec<Vec<(usize, Dart)>> = vec![Vec::new(); count];
        for (e, edge) in s.edges().iter().enumerate() {
            let (t1, k1) = edge.sides[0];
            let (t2, k2) = edge.sides[1];
            let m = self.load[e];
            for g in 0..=m {
                let a = node_of(t1, k1, g);
                let b = node_of(t2, k2, m - g);
                adj[a].push((b, dart(e, 0)));
                adj[b].push((a, dart(e, 1)));
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        let mut prev: Vec<Option<(usize, Dart)>> = vec![None; count];
        let mut seen = vec![false; count];
        let mut queue = VecDeque::new();
        for &(n0, _) in &starts {
            if !seen[n0] {
                seen[n0] = true;
                queue.push_back(n0);
            }
        }
        let mut hit = None;
        while let Some(x) = queue.pop_front() {
            if let Some(&(g, k)) = goals.iter().find(|(g, _)| *g == x) {
                hit = Some((g, k));
                break;
            }
            for &(y, d) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, d));
                    queue.push_back(y);
                }
            }
        }
        let (goal, kq) = hit?;
        let mut darts = Vec::new();
        let mut cur = goal;
        while let Some((x, d)) = prev[cur] {
            darts.push(d);
            cur = x;
        }
        darts.reverse();
        let (_, kp) = *starts.iter().find(|(n0, _)| *n0 == cur).unwrap();
        let (t0, tm) = (owner[cur], owner[goal]);
        let mut w = darts.clone();
        w.extend(s.ccw_loop(tm, kq));
        w.extend(reverse(&darts));
        w.extend(s.ccw_loop(t0, kp));
        Some(w)
    }
}

struct Regions {
    #[allow(dead_code)]
    gap_base: Vec<usize>,
    punct_base: usize,
    uf: UnionFind,
    local: Vec<Vec<usize>>,
}

/// Orders a crossing of curve 0 against one of curve 1 on the same edge by
/// following both across the edge in direction 0 until they part: the one
/// turning left lies at the larger edge position. This is consistent on each
/// edge; crossings it misplaces along shared segments come in bigons, which
/// [`Overlay::new`] removes afterwards.
fn compare_rays(s: &Surface, words: &[Vec<Dart>; 2], ia: usize, ib: usize) -> Ordering {
    let ray = |c: usize, i: usize, t: usize| -> Dart {
        let w = &words[c];
        let n = w.len();
        if w[i] & 1 == 0 {
            w[(i + t) % n]
        } else {
            dart_rev(w[(i + n - t % n) % n])
        }
    };
    let limit = 2 * (words[0].len() + words[1].len()) + 2;
    for t in 1..limit {
        let (da, db) = (ray(0, ia, t), ray(1, ib, t));
        if da != db {
            let prev = ray(0, ia, t - 1);
            return if s.is_left_turn(prev, da) {
                Ordering::Greater
            } else {
                Ordering::Less
            };
        }
    }
    panic!("rays never diverge: the curves coincide");
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Whether the union cuts the surface into disks and once-punctured disks.
pub fn fills(a: &Curve, b: &Curve) -> Result<bool> {
    a.check_same_surface(b)?;
    if a == b || intersection(a, b)? == 0 {
        return Ok(false);
    }
    let ov = Overlay::new(a, b)?;
    Ok(ov.face_punctures().iter().all(|m| m.count_ones() <= 1))
}

/// Filling inside the complement of a pants curve `z`: the twice-punctured
/// side of `z` counts as a single puncture.
pub fn fills_outside(z: &Curve, a: &Curve, b: &Curve) -> Result<bool> {
    a.check_same_surface(b)?;
    if a == b || intersection(a, b)? == 0 {
        return Ok(false);
    }
    let pants = z.pants_side();
    let ov = Overlay::new(a, b)?;
    Ok(ov.face_punctures().iter().all(|&m| {
        let merged = if m & pants != 0 { (m & !pants).count_ones() + 1 } else { m.count_ones() };
        merged <= 1
    }))
}

/// A curve disjoint from both `a` and `b`, when they intersect but do not
/// fill. The curve surrounds two punctures sharing a complementary region.
pub fn common_disjoint(a: &Curve, b: &Curve) -> Result<Option<Curve>> {
    a.check_same_surface(b)?;
    if a == b || intersection(a, b)? == 0 {
        return Ok(None);
    }
    let ov = Overlay::new(a, b)?;
    for face in ov.face_punctures() {
        if face.count_ones() < 2 {
            continue;
        }
        let l = crate::curve::labels(face);
        if let Some(w) = ov.surrounding_word(l[0], l[1]) {
            let x = Curve::from_word(a.surface(), &w)?;
            return Ok(Some(x));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Preset;

    fn p(s: &Arc<Surface>, a: u8, b: u8) -> Curve {
        Curve::standard(s, a, b).unwrap()
    }

    #[test]
    fn overlay_crossings_match_linked_pairs() {
        for preset in Preset::ALL {
            let s = preset.surface();
            let n = s.puncture_count() as u8;
            let curves: Vec<Curve> = (1..=n)
                .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
                .map(|(a, b)| p(&s, a, b))
                .collect();
            for a in &curves {
                for b in &curves {
                    if a == b {
                        continue;
                    }
                    let ov = Overlay::new(a, b).unwrap();
                    assert_eq!(ov.crossing_count(), intersection(a, b).unwrap(), "{preset:?} {a:?} {b:?}");
                    assert_eq!(ov.crossings_along(0).len() as u64, ov.crossing_count());
                }
            }
        }
    }

    #[test]
    fn chord_pairs_never_fill() {
        let s = Preset::S05Fig1.surface();
        let c = p(&s, 1, 2);
        let v = p(&s, 2, 5);
        assert!(!fills(&c, &c).unwrap());
        assert!(!fills(&c, &p(&s, 3, 4)).unwrap());
        assert!(!fills(&c, &v).unwrap());
        let x = common_disjoint(&c, &v).unwrap().unwrap();
        assert_eq!(intersection(&x, &c).unwrap(), 0);
        assert_eq!(intersection(&x, &v).unwrap(), 0);
        assert_eq!(x, p(&s, 3, 4));
    }

    #[test]
    fn faces_partition_the_punctures() {
        let s = Preset::S06Sorted.surface();
        let ov = Overlay::new(&p(&s, 1, 4), &p(&s, 2, 5)).unwrap();
        let faces = ov.face_punctures();
        assert_eq!(faces.iter().fold(0u8, |m, f| m | f), 0b111_1110);
        assert_eq!(faces.iter().map(|f| f.count_ones()).sum::<u32>(), 6);
    }
}
