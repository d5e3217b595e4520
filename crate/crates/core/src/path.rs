//! Words in the dual graph: free and cyclic reduction, reversal, counting.

use crate::surface::{dart_edge, dart_rev, Dart};

/// Freely and cyclically reduces a closed dart word. An empty result means
/// the loop was null-homotopic.
pub fn reduce_cyclic(word: &[Dart]) -> Vec<Dart> {
    let mut stack: Vec<Dart> = Vec::with_capacity(word.len());
    for &d in word {
        if stack.last() == Some(&dart_rev(d)) {
            stack.pop();
        } else {
            stack.push(d);
        }
    }
    let (mut lo, mut hi) = (0, stack.len());
    while hi - lo >= 2 && stack[lo] == dart_rev(stack[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    stack[lo..hi].to_vec()
}

/// Free reduction of an open word.
pub fn reduce_open(word: &[Dart]) -> Vec<Dart> {
    let mut stack: Vec<Dart> = Vec::with_capacity(word.len());
    for &d in word {
        if stack.last() == Some(&dart_rev(d)) {
            stack.pop();
        } else {
            stack.push(d);
        }
    }
    stack
}

pub fn reverse(word: &[Dart]) -> Vec<Dart> {
    word.iter().rev().map(|&d| dart_rev(d)).collect()
}

/// Number of crossings of each triangulation edge.
pub fn edge_counts(word: &[Dart], edge_count: usize) -> Vec<u32> {
    let mut out = vec![0u32; edge_count];
    for &d in word {
        out[dart_edge(d)] += 1;
    }
    out
}

/// Whether the cyclic word is reduced.
pub fn is_cyclically_reduced(word: &[Dart]) -> bool {
    let n = word.len();
    (0..n).all(|i| word[(i + 1) % n] != dart_rev(word[i])) && n != 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_inner_and_wraparound() {
        assert_eq!(reduce_cyclic(&[4, 2, 3, 6, 5]), vec![6]);
        assert!(reduce_cyclic(&[0, 1]).is_empty());
        assert_eq!(reduce_cyclic(&[0, 2, 4]), vec![0, 2, 4]);
        assert_eq!(reduce_open(&[0, 2, 3, 1]), Vec::<Dart>::new());
    }

    #[test]
    fn reverse_twice_is_identity() {
        let w = vec![0, 3, 4, 9];
        assert_eq!(reverse(&reverse(&w)), w);
        assert_eq!(reverse(&w), vec![8, 5, 2, 1]);
    }
}
