//! Brute-force enumeration of origin-containing bond animals.
//!
//! Grows every animal one edge at a time and deduplicates by the sorted edge
//! set, then recomputes the outlying count from scratch. It shares nothing
//! with the backtracking enumerator beyond the [`Edge`] type and is only meant
//! for small `n`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::lattice::{Edge, MAX_DIM, ORIGIN};

type Animal = Vec<Edge>;

/// Number of outlying edges: edges outside the animal sharing an endpoint with it.
pub fn outlying_count(animal: &[Edge], d: usize) -> usize {
    let members: BTreeSet<Edge> = animal.iter().copied().collect();
    let mut outlying = BTreeSet::new();
    for e in animal {
        let (a, b) = e.endpoints();
        for v in [a, b] {
            for f in Edge::incident(v, d) {
                if !members.contains(&f) {
                    outlying.insert(f);
                }
            }
        }
    }
    outlying.len()
}

fn neighbours(animal: &[Edge], d: usize) -> BTreeSet<Edge> {
    let mut out = BTreeSet::new();
    for e in animal {
        let (a, b) = e.endpoints();
        for v in [a, b] {
            out.extend(Edge::incident(v, d).filter(|f| !animal.contains(f)));
        }
    }
    out
}

/// All animals with exactly `n` edges containing the origin, as sorted edge lists.
pub fn animals(d: usize, n: usize) -> BTreeSet<Animal> {
    if n == 0 {
        return BTreeSet::new();
    }
    let mut level: BTreeSet<Animal> = Edge::incident(ORIGIN, d).map(|e| alloc::vec![e]).collect();
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for animal in &level {
            for f in neighbours(animal, d) {
                let mut grown = animal.clone();
                grown.push(f);
                grown.sort_unstable();
                next.insert(grown);
            }
        }
        level = next;
    }
    level
}

/// `sigma(n, m)` for every `n <= n_max`, keyed by `(n, m)`.
pub fn count_animals(d: usize, n_max: usize) -> BTreeMap<(usize, usize), u64> {
    assert!((2..=MAX_DIM).contains(&d));
    let mut counts = BTreeMap::new();
    let mut level: BTreeSet<Animal> = Edge::incident(ORIGIN, d).map(|e| alloc::vec![e]).collect();
    for n in 1..=n_max {
        for animal in &level {
            *counts.entry((n, outlying_count(animal, d))).or_insert(0) += 1;
        }
        if n == n_max {
            break;
        }
        let mut next = BTreeSet::new();
        for animal in &level {
            for f in neighbours(animal, d) {
                let mut grown = animal.clone();
                grown.push(f);
                grown.sort_unstable();
                next.insert(grown);
            }
        }
        level = next;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edges() {
        assert_eq!(count_animals(2, 1).into_iter().collect::<Vec<_>>(), [((1, 6), 4)]);
        assert_eq!(count_animals(3, 1).into_iter().collect::<Vec<_>>(), [((1, 10), 6)]);
    }

    #[test]
    fn two_edge_animals_square_lattice() {
        // 6 fixed shapes, each with 3 vertices to place on the origin.
        let c = count_animals(2, 2);
        assert_eq!(c.get(&(2, 8)), Some(&18));
        assert_eq!(c.iter().filter(|k| k.0 .0 == 2).count(), 1);
        assert_eq!(animals(2, 2).len(), 18);
    }

    #[test]
    fn unit_square_has_eight_outlying_edges() {
        let mut v = ORIGIN;
        let mut square = Vec::new();
        square.push(Edge::up(v, 0));
        square.push(Edge::up(v, 1));
        v[0] = 1;
        square.push(Edge::up(v, 1));
        v = ORIGIN;
        v[1] = 1;
        square.push(Edge::up(v, 0));
        assert_eq!(outlying_count(&square, 2), 8);
    }
}
