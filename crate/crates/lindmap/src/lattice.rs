use crate::error::{Error, Result};

/// A 1D periodic lattice (ring) of `n` sites with local dimension `d`.
///
/// Site `0` is the slowest-varying tensor index in every global matrix built
/// from this lattice. Distances are measured along the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeGeometry {
    n: usize,
    d: usize,
}

impl LatticeGeometry {
    /// A ring carrying only the metric is valid for any `n`; building dense
    /// operators additionally needs `d^n` to be representable (see `dim`).
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("lattice needs at least one site".into()));
        }
        if d < 2 {
            return Err(Error::InvalidInput("local dimension must be at least 2".into()));
        }
        Ok(Self { n, d })
    }

    /// Ring of qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(n, 2)
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    /// Global Hilbert-space dimension `d^n`, checked.
    pub fn try_dim(&self) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..self.n {
            dim = dim.checked_mul(self.d).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "d^n overflows for n={}, d={}; this lattice only supports metric use",
                    self.n, self.d
                ))
            })?;
        }
        Ok(dim)
    }

    /// Global Hilbert-space dimension `d^n`. Panics if unrepresentable;
    /// dense pipelines stay far below that.
    pub fn dim(&self) -> usize {
        self.try_dim().expect("Hilbert dimension overflows usize")
    }

    /// Dimension of the vectorized operator space, `d^(2n)`.
    pub fn superop_dim(&self) -> usize {
        self.dim() * self.dim()
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            Err(Error::SiteOutOfRange { site, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Ring metric `min(|i-j|, n-|i-j|)`.
    pub fn dist(&self, i: usize, j: usize) -> usize {
        let diff = i.abs_diff(j);
        diff.min(self.n - diff)
    }

    /// Minimal ring distance between two site sets; 0 if either is empty.
    pub fn dist_sets(&self, a: &[usize], b: &[usize]) -> usize {
        if a.is_empty() || b.is_empty() {
            return 0;
        }
        a.iter()
            .flat_map(|&i| b.iter().map(move |&j| self.dist(i, j)))
            .min()
            .unwrap()
    }

    /// Whether the site set lies inside some contiguous window on the ring.
    pub fn is_contiguous(&self, sites: &[usize]) -> bool {
        if sites.len() <= 1 {
            return true;
        }
        if sites.len() >= self.n {
            return sites.len() == self.n;
        }
        let mut sorted: Vec<usize> = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return false;
        }
        // The set is contiguous on the ring iff some rotation makes it an
        // interval, i.e. at most one cyclic "gap" larger than one step.
        let mut big_gaps = 0;
        for w in 0..sorted.len() {
            let cur = sorted[w];
            let next = sorted[(w + 1) % sorted.len()];
            let gap = if w + 1 == sorted.len() { next + self.n - cur } else { next - cur };
            if gap > 1 {
                big_gaps += 1;
            }
        }
        big_gaps <= 1
    }

    /// Sites of the contiguous window of length `len` starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Vec<usize> {
        (0..len).map(|o| (start + o) % self.n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_metric() {
        let lat = LatticeGeometry::qubits(6).unwrap();
        assert_eq!(lat.dist(0, 0), 0);
        assert_eq!(lat.dist(0, 5), 1);
        assert_eq!(lat.dist(1, 4), 3);
        assert_eq!(lat.dist(4, 1), 3);
        // triangle inequality on a handful of triples
        for i in 0..6 {
            for j in 0..6 {
                for k in 0..6 {
                    assert!(lat.dist(i, k) <= lat.dist(i, j) + lat.dist(j, k));
                }
            }
        }
    }

    #[test]
    fn contiguity_on_ring() {
        let lat = LatticeGeometry::qubits(5).unwrap();
        assert!(lat.is_contiguous(&[1, 2, 3]));
        assert!(lat.is_contiguous(&[4, 0, 1])); // wraps the boundary
        assert!(!lat.is_contiguous(&[0, 2]));
        assert!(lat.is_contiguous(&[3]));
        assert!(lat.is_contiguous(&[0, 1, 2, 3, 4]));
    }

    #[test]
    fn set_distance() {
        let lat = LatticeGeometry::qubits(8).unwrap();
        assert_eq!(lat.dist_sets(&[0, 1], &[4, 5]), 3);
        assert_eq!(lat.dist_sets(&[0], &[7]), 1);
        assert_eq!(lat.dist_sets(&[2], &[2]), 0);
    }

    #[test]
    fn invalid_lattices_rejected() {
        assert!(LatticeGeometry::new(0, 2).is_err());
        assert!(LatticeGeometry::new(3, 1).is_err());
    }
}
