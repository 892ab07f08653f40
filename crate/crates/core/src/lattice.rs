//! Finite windows of the hypercubic lattice.
//!
//! A [`Geometry`] is either an open box, whose boundary sites have "sink"
//! neighbours that swallow anything sent to them, or a torus where every site
//! has exactly `2d` in-window neighbours. Sites are addressed by coordinates
//! or by a linear index in which coordinate 0 varies fastest.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Marker in the neighbour table for a neighbour outside an open box.
pub const SINK: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Dissipative boundary: neighbours outside the window are sinks.
    OpenBox,
    Torus,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::OpenBox => "open",
            Boundary::Torus => "torus",
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(Vec<usize>);

impl Site {
    pub fn new(coords: impl Into<Vec<usize>>) -> Self {
        Site(coords.into())
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl<const N: usize> From<[usize; N]> for Site {
    fn from(c: [usize; N]) -> Self {
        Site(c.to_vec())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// In-window neighbours of a site plus the number of sink neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighbors {
    pub in_window: Vec<Site>,
    pub sink_count: usize,
}

#[derive(Clone)]
pub struct Geometry {
    dim: usize,
    side: usize,
    boundary: Boundary,
    len: usize,
    strides: Vec<usize>,
    // len * 2d entries; direction 2a is +e_a, 2a+1 is -e_a.
    table: Arc<[u32]>,
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Geometry")
            .field("dim", &self.dim)
            .field("side", &self.side)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.side == other.side && self.boundary == other.boundary
    }
}

impl Eq for Geometry {}

impl Geometry {
    /// Builds a window of `side^dim` sites.
    ///
    /// Tori need `side >= 3`; below that the `+e_a` and `-e_a` neighbours
    /// coincide and the lattice stops being simple.
    pub fn new(dim: usize, side: usize, boundary: Boundary) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Geometry("dimension must be at least 1".into()));
        }
        if side == 0 {
            return Err(Error::Geometry("side must be at least 1".into()));
        }
        if boundary == Boundary::Torus && side < 3 {
            return Err(Error::Geometry(format!(
                "torus side must be at least 3, got {side}"
            )));
        }
        let len = (0..dim)
            .try_fold(1usize, |acc, _| acc.checked_mul(side))
            .filter(|&n| n < SINK as usize)
            .ok_or_else(|| Error::Geometry(format!("{side}^{dim} sites is too many")))?;
        let strides: Vec<usize> = (0..dim).map(|a| side.pow(a as u32)).collect();

        let deg = 2 * dim;
        let mut table = vec![SINK; len * deg];
        for idx in 0..len {
            for (axis, &stride) in strides.iter().enumerate() {
                let c = (idx / stride) % side;
                let plus = if c + 1 < side {
                    Some(idx + stride)
                } else if boundary == Boundary::Torus {
                    Some(idx + stride - side * stride)
                } else {
                    None
                };
                let minus = if c > 0 {
                    Some(idx - stride)
                } else if boundary == Boundary::Torus {
                    Some(idx + (side - 1) * stride)
                } else {
                    None
                };
                if let Some(j) = plus {
                    table[idx * deg + 2 * axis] = j as u32;
                }
                if let Some(j) = minus {
                    table[idx * deg + 2 * axis + 1] = j as u32;
                }
            }
        }
        Ok(Geometry {
            dim,
            side,
            boundary,
            len,
            strides,
            table: table.into(),
        })
    }

    pub fn open_box(dim: usize, side: usize) -> Result<Self> {
        Self::new(dim, side, Boundary::OpenBox)
    }

    pub fn torus(dim: usize, side: usize) -> Result<Self> {
        Self::new(dim, side, Boundary::Torus)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn is_torus(&self) -> bool {
        self.boundary == Boundary::Torus
    }

    /// Number of sites, `side^dim`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Lattice degree `2d`.
    pub fn degree(&self) -> usize {
        2 * self.dim
    }

    pub fn index(&self, site: &Site) -> Result<usize> {
        if site.dim() != self.dim || site.coords().iter().any(|&c| c >= self.side) {
            return Err(Error::OutOfWindow {
                coords: site.coords().to_vec(),
                side: self.side,
            });
        }
        Ok(site
            .coords()
            .iter()
            .zip(&self.strides)
            .map(|(c, s)| c * s)
            .sum())
    }

    pub fn site(&self, index: usize) -> Site {
        Site(self.coords_of(index).collect())
    }

    pub fn coords_of(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.strides.iter().map(move |s| (index / s) % self.side)
    }

    #[inline]
    pub fn coord(&self, index: usize, axis: usize) -> usize {
        (index / self.strides[axis]) % self.side
    }

    /// Neighbour slots of a site, `SINK` where the neighbour lies outside the
    /// window.
    #[inline]
    pub fn neighbor_slots(&self, index: usize) -> &[u32] {
        let deg = self.degree();
        &self.table[index * deg..(index + 1) * deg]
    }

    /// In-window neighbour indices of a site.
    #[inline]
    pub fn neighbor_indices(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbor_slots(index)
            .iter()
            .filter(|&&j| j != SINK)
            .map(|&j| j as usize)
    }

    #[inline]
    pub fn sink_count(&self, index: usize) -> usize {
        self.neighbor_slots(index)
            .iter()
            .filter(|&&j| j == SINK)
            .count()
    }

    pub fn neighbors(&self, site: &Site) -> Result<Neighbors> {
        let idx = self.index(site)?;
        Ok(Neighbors {
            in_window: self.neighbor_indices(idx).map(|j| self.site(j)).collect(),
            sink_count: self.sink_count(idx),
        })
    }

    /// Signed displacement from `from` to `to` along `axis`, taking the short
    /// way round on a torus (ties go the positive way).
    fn step_toward(&self, from: usize, to: usize) -> Option<bool> {
        if from == to {
            return None;
        }
        match self.boundary {
            Boundary::OpenBox => Some(to > from),
            Boundary::Torus => {
                let fwd = (to + self.side - from) % self.side;
                let back = self.side - fwd;
                Some(fwd <= back)
            }
        }
    }

    fn axis_distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::OpenBox => d,
            Boundary::Torus => d.min(self.side - d),
        }
    }

    /// Graph distance between two site indices.
    pub fn distance(&self, u: usize, v: usize) -> usize {
        (0..self.dim)
            .map(|a| self.axis_distance(self.coord(u, a), self.coord(v, a)))
            .sum()
    }

    /// All sites within graph distance `radius` of `center`, in index order.
    pub fn ball(&self, center: &Site, radius: usize) -> Result<Vec<Site>> {
        let c = self.index(center)?;
        Ok(self
            .ball_indices(c, radius)
            .into_iter()
            .map(|i| self.site(i))
            .collect())
    }

    /// Breadth-first ball around a site index, sorted by index.
    pub fn ball_indices(&self, center: usize, radius: usize) -> Vec<usize> {
        let mut seen = std::collections::HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(center);
        queue.push_back((center, 0usize));
        let mut out = vec![center];
        while let Some((i, depth)) = queue.pop_front() {
            if depth == radius {
                continue;
            }
            for j in self.neighbor_indices(i) {
                if seen.insert(j) {
                    out.push(j);
                    queue.push_back((j, depth + 1));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// A shortest path from `u` to `v`, both endpoints included.
    ///
    /// At every step the walk moves along the lowest-indexed axis on which it
    /// has not yet reached `v`, so the path is a fixed function of `(u, v)`.
    pub fn geodesic(&self, u: &Site, v: &Site) -> Result<Vec<Site>> {
        let a = self.index(u)?;
        let b = self.index(v)?;
        Ok(self
            .geodesic_indices(a, b)
            .into_iter()
            .map(|i| self.site(i))
            .collect())
    }

    pub fn geodesic_indices(&self, u: usize, v: usize) -> Vec<usize> {
        let mut path = vec![u];
        let mut cur = u;
        while cur != v {
            let (axis, plus) = (0..self.dim)
                .find_map(|a| {
                    self.step_toward(self.coord(cur, a), self.coord(v, a))
                        .map(|p| (a, p))
                })
                .expect("distinct sites differ on some axis");
            let slot = self.neighbor_slots(cur)[2 * axis + usize::from(!plus)];
            debug_assert_ne!(slot, SINK);
            cur = slot as usize;
            path.push(cur);
        }
        path
    }

    /// Index of `y + z` on the torus.
    fn shift_index(&self, index: usize, z: &[usize]) -> usize {
        self.coords_of(index)
            .zip(z)
            .zip(&self.strides)
            .map(|((c, dz), s)| ((c + dz) % self.side) * s)
            .sum()
    }

    /// Applies the torus translation `tau_z`: `out[y] = values[y - z]`.
    pub fn translate<T: Clone>(&self, values: &[T], z: &Site) -> Result<Vec<T>> {
        if !self.is_torus() {
            return Err(Error::NotTorus);
        }
        self.index(z)?;
        if values.len() != self.len {
            return Err(Error::ShapeMismatch {
                expected: self.len,
                got: values.len(),
            });
        }
        let mut out = values.to_vec();
        for (y, v) in values.iter().enumerate() {
            out[self.shift_index(y, z.coords())] = v.clone();
        }
        Ok(out)
    }

    /// The inverse translation vector `-z mod L`.
    pub fn negate(&self, z: &Site) -> Site {
        Site(
            z.coords()
                .iter()
                .map(|&c| (self.side - c % self.side) % self.side)
                .collect(),
        )
    }

    /// The site closest to the centre of the window.
    pub fn center(&self) -> Site {
        Site(vec![self.side / 2; self.dim])
    }

    /// True when the site index touches the outside of an open box.
    #[inline]
    pub fn on_boundary(&self, index: usize) -> bool {
        !self.is_torus() && self.sink_count(index) > 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bfs_distances(g: &Geometry, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; g.len()];
        let mut q = VecDeque::from([from]);
        dist[from] = 0;
        while let Some(i) = q.pop_front() {
            for j in g.neighbor_indices(i) {
                if dist[j] == usize::MAX {
                    dist[j] = dist[i] + 1;
                    q.push_back(j);
                }
            }
        }
        dist
    }

    #[test]
    fn torus_corner_wraps() {
        let g = Geometry::torus(2, 4).unwrap();
        let n = g.neighbors(&Site::from([0, 0])).unwrap();
        assert_eq!(n.sink_count, 0);
        let expect: Vec<Site> = vec![[1, 0].into(), [3, 0].into(), [0, 1].into(), [0, 3].into()];
        assert_eq!(n.in_window, expect);
    }

    #[test]
    fn open_box_corner_has_two_sinks() {
        let g = Geometry::open_box(2, 4).unwrap();
        let n = g.neighbors(&Site::from([0, 0])).unwrap();
        assert_eq!(n.in_window.len(), 2);
        assert_eq!(n.sink_count, 2);
    }

    #[test]
    fn interior_site_in_one_dimension() {
        let g = Geometry::open_box(1, 3).unwrap();
        let n = g.neighbors(&Site::from([1])).unwrap();
        assert_eq!(n.in_window, vec![Site::from([2]), Site::from([0])]);
        assert_eq!(n.sink_count, 0);
    }

    #[test]
    fn out_of_window_rejected() {
        let g = Geometry::open_box(2, 4).unwrap();
        assert!(matches!(
            g.neighbors(&Site::from([4, 0])),
            Err(Error::OutOfWindow { .. })
        ));
        assert!(g.neighbors(&Site::from([1])).is_err());
    }

    #[test]
    fn degenerate_geometries_rejected() {
        assert!(Geometry::open_box(0, 4).is_err());
        assert!(Geometry::open_box(2, 0).is_err());
        assert!(Geometry::torus(2, 2).is_err());
        assert!(Geometry::open_box(1, 1).is_ok());
    }

    #[test]
    fn degree_accounting() {
        for g in [
            Geometry::open_box(3, 4).unwrap(),
            Geometry::torus(3, 4).unwrap(),
            Geometry::open_box(1, 1).unwrap(),
        ] {
            for i in 0..g.len() {
                let n = g.neighbor_indices(i).count();
                assert_eq!(n + g.sink_count(i), 2 * g.dim());
                if g.is_torus() {
                    assert_eq!(g.sink_count(i), 0);
                }
                let mut uniq: Vec<usize> = g.neighbor_indices(i).collect();
                uniq.sort_unstable();
                uniq.dedup();
                assert_eq!(uniq.len(), n, "duplicate neighbours at {i}");
            }
        }
    }

    #[test]
    fn unit_ball_is_a_cross() {
        let g = Geometry::torus(2, 9).unwrap();
        assert_eq!(g.ball(&Site::from([4, 4]), 1).unwrap().len(), 5);
        assert_eq!(
            g.ball(&Site::from([4, 4]), 0).unwrap(),
            vec![Site::from([4, 4])]
        );
    }

    #[test]
    fn radius_two_ball_matches_bfs() {
        let g = Geometry::torus(2, 9).unwrap();
        let c = g.index(&Site::from([4, 4])).unwrap();
        let dist = bfs_distances(&g, c);
        let oracle: Vec<usize> = (0..g.len()).filter(|&i| dist[i] <= 2).collect();
        assert_eq!(oracle.len(), 13);
        assert_eq!(g.ball_indices(c, 2), oracle);
    }

    #[test]
    fn geodesic_examples() {
        let g = Geometry::open_box(2, 4).unwrap();
        let u = Site::from([0, 0]);
        assert_eq!(g.geodesic(&u, &u).unwrap(), vec![u.clone()]);
        assert_eq!(
            g.geodesic(&u, &Site::from([2, 0])).unwrap(),
            vec![Site::from([0, 0]), Site::from([1, 0]), Site::from([2, 0])]
        );
    }

    #[test]
    fn geodesic_tie_break_is_axis_order() {
        let g = Geometry::open_box(2, 4).unwrap();
        let (u, v) = (Site::from([0, 0]), Site::from([1, 1]));
        // Both shortest paths, enumerated by hand.
        let via_x = vec![u.clone(), Site::from([1, 0]), v.clone()];
        let via_y = vec![u.clone(), Site::from([0, 1]), v.clone()];
        let got = g.geodesic(&u, &v).unwrap();
        assert!(got == via_x || got == via_y);
        assert_eq!(got, via_x);
    }

    #[test]
    fn geodesic_length_matches_bfs_on_tori() {
        for side in 3..=8 {
            let g = Geometry::torus(2, side).unwrap();
            for u in 0..g.len() {
                let dist = bfs_distances(&g, u);
                for v in 0..g.len() {
                    let path = g.geodesic_indices(u, v);
                    assert_eq!(path.len() - 1, dist[v]);
                    assert_eq!(g.distance(u, v), dist[v]);
                    for w in path.windows(2) {
                        assert!(g.neighbor_indices(w[0]).any(|j| j == w[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn translation_examples() {
        let g = Geometry::torus(1, 3).unwrap();
        let cfg = vec![5.0, 0.0, 0.0];
        assert_eq!(
            g.translate(&cfg, &Site::from([1])).unwrap(),
            vec![0.0, 5.0, 0.0]
        );
        assert_eq!(g.translate(&cfg, &Site::from([0])).unwrap(), cfg);
        let open = Geometry::open_box(1, 3).unwrap();
        assert!(matches!(
            open.translate(&cfg, &Site::from([1])),
            Err(Error::NotTorus)
        ));
    }

    fn torus_and_shift() -> impl Strategy<Value = (usize, usize, Vec<usize>)> {
        (1usize..=3, 3usize..=6).prop_flat_map(|(d, l)| {
            (Just(d), Just(l), proptest::collection::vec(0..l, d))
        })
    }

    proptest! {
        #[test]
        fn neighbours_are_symmetric(d in 1usize..=3, l in 1usize..=6, torus in any::<bool>()) {
            let b = if torus { Boundary::Torus } else { Boundary::OpenBox };
            prop_assume!(!(torus && l < 3));
            let g = Geometry::new(d, l, b).unwrap();
            for i in 0..g.len() {
                for j in g.neighbor_indices(i) {
                    prop_assert!(g.neighbor_indices(j).any(|k| k == i));
                }
            }
        }

        #[test]
        fn translation_is_a_bijection((d, l, z) in torus_and_shift(), seed in any::<u64>()) {
            let g = Geometry::torus(d, l).unwrap();
            let values: Vec<u64> = (0..g.len()).map(|i| crate::rng::stream(seed, i as u64, 0) % 7).collect();
            let z = Site::new(z);
            let moved = g.translate(&values, &z).unwrap();
            let back = g.translate(&moved, &g.negate(&z)).unwrap();
            prop_assert_eq!(&back, &values);
            let (mut a, mut b) = (values.clone(), moved);
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
