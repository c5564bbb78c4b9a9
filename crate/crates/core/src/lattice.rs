//! The hypercubic lattice Z^d, its critical point, and nearest-neighbour edges.

use alloc::format;

use crate::error::{Error, Result};

/// Largest dimension the fixed-size coordinate arrays can hold.
pub const MAX_DIM: usize = 6;

/// Dimension and critical bond probability of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    d: usize,
    p_c: f64,
    alpha: f64,
}

/// Exact bond threshold of the square lattice.
pub const SQUARE_LATTICE_PC: f64 = 0.5;

impl LatticeConfig {
    pub fn new(d: usize, p_c: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidConfig(format!(
                "dimension d={d} must lie in 2..={MAX_DIM}"
            )));
        }
        if !(p_c > 0.0 && p_c < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "critical probability p_c={p_c} must lie in (0, 1)"
            )));
        }
        Ok(Self {
            d,
            p_c,
            alpha: 1.0 / p_c - 1.0,
        })
    }

    /// The default configuration for dimension `d`. Only d = 2 has a known
    /// exact threshold; higher dimensions need an explicit `p_c`.
    pub fn with_default_pc(d: usize) -> Result<Self> {
        match d {
            2 => Self::new(2, SQUARE_LATTICE_PC),
            _ => Err(Error::InvalidConfig(format!(
                "no default p_c for d={d}; supply one explicitly"
            ))),
        }
    }

    pub fn square() -> Self {
        Self::new(2, SQUARE_LATTICE_PC).expect("valid square lattice")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    /// `1/p_c - 1`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest ratio at which a cluster can still be exponentially favoured, `2(d-1)`.
    #[inline]
    pub fn ratio_limit(&self) -> usize {
        2 * (self.d - 1)
    }

    /// Upper end of the outlying-edge support for `n`-edge animals,
    /// `2(d-1)n + 2d`.
    #[inline]
    pub fn max_outlying(&self, n: usize) -> usize {
        max_outlying(self.d, n)
    }
}

#[inline]
pub fn max_outlying(d: usize, n: usize) -> usize {
    2 * (d - 1) * n + 2 * d
}

/// A nearest-neighbour edge `{base, base + unit(axis)}`.
///
/// Coordinates beyond the dimension are kept at zero so that every lattice
/// edge has exactly one representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub base: [i32; MAX_DIM],
    pub axis: u8,
}

impl Edge {
    pub fn new(base: [i32; MAX_DIM], axis: usize) -> Self {
        debug_assert!(axis < MAX_DIM);
        Self {
            base,
            axis: axis as u8,
        }
    }

    /// The edge leaving `v` in the positive direction of `axis`.
    pub fn up(v: [i32; MAX_DIM], axis: usize) -> Self {
        Self::new(v, axis)
    }

    /// The edge entering `v` from the negative direction of `axis`.
    pub fn down(v: [i32; MAX_DIM], axis: usize) -> Self {
        let mut base = v;
        base[axis] -= 1;
        Self::new(base, axis)
    }

    pub fn endpoints(&self) -> ([i32; MAX_DIM], [i32; MAX_DIM]) {
        let mut tip = self.base;
        tip[self.axis as usize] += 1;
        (self.base, tip)
    }

    pub fn touches(&self, v: &[i32; MAX_DIM]) -> bool {
        let (a, b) = self.endpoints();
        a == *v || b == *v
    }

    /// All `2d` edges incident to vertex `v`.
    pub fn incident(v: [i32; MAX_DIM], d: usize) -> impl Iterator<Item = Edge> {
        (0..d).flat_map(move |axis| [Edge::up(v, axis), Edge::down(v, axis)])
    }
}

pub const ORIGIN: [i32; MAX_DIM] = [0; MAX_DIM];

/// Dense indexing of a box `[-r, r]^d` used by the enumerator.
///
/// Vertex ids are mixed-radix offsets; edge `(v, axis)` has id `v * d + axis`.
#[derive(Debug, Clone)]
pub(crate) struct BoxGeometry {
    pub d: usize,
    pub strides: [usize; MAX_DIM],
    pub vertex_count: usize,
    pub origin: usize,
}

impl BoxGeometry {
    pub fn new(d: usize, radius: usize) -> Self {
        let side = 2 * radius + 1;
        let mut strides = [0usize; MAX_DIM];
        let mut stride = 1usize;
        for s in strides.iter_mut().take(d) {
            *s = stride;
            stride *= side;
        }
        let origin = strides[..d].iter().map(|s| s * radius).sum();
        Self {
            d,
            strides,
            vertex_count: stride,
            origin,
        }
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.vertex_count * self.d
    }

    #[inline]
    pub fn edge_id(&self, base: usize, axis: usize) -> u32 {
        (base * self.d + axis) as u32
    }

    #[inline]
    pub fn endpoints(&self, edge: u32) -> (usize, usize) {
        let e = edge as usize;
        let base = e / self.d;
        let axis = e % self.d;
        (base, base + self.strides[axis])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(LatticeConfig::new(1, 0.5).is_err());
        assert!(LatticeConfig::new(2, 0.0).is_err());
        assert!(LatticeConfig::new(2, 1.0).is_err());
        assert!(LatticeConfig::with_default_pc(3).is_err());
        let c = LatticeConfig::square();
        assert_eq!(c.alpha(), 1.0);
        assert_eq!(c.max_outlying(1), 6);
        let c3 = LatticeConfig::new(3, 0.2488).unwrap();
        assert_eq!(c3.max_outlying(1), 10);
        assert_eq!(c3.alpha(), 1.0 / 0.2488 - 1.0);
    }

    #[test]
    fn edge_canonical_form() {
        let mut v = ORIGIN;
        v[0] = 3;
        let e = Edge::down(v, 0);
        let mut w = ORIGIN;
        w[0] = 2;
        assert_eq!(e, Edge::up(w, 0));
        assert!(e.touches(&v) && e.touches(&w));
        assert_eq!(Edge::incident(ORIGIN, 3).count(), 6);
    }

    #[test]
    fn box_ids_round_trip() {
        let g = BoxGeometry::new(2, 3);
        assert_eq!(g.vertex_count, 49);
        let e = g.edge_id(g.origin, 1);
        let (a, b) = g.endpoints(e);
        assert_eq!(a, g.origin);
        assert_eq!(b, g.origin + 7);
    }
}
