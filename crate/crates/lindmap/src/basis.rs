//! Orthonormal Hermitian operator bases built from Pauli products on
//! contiguous windows of the ring.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::operator::{embed, kron, pauli, scalar, CMat};
use std::collections::BTreeSet;

/// One basis element: the embedded, Hilbert-Schmidt-normalized matrix plus
/// its support (sites carrying a non-identity factor; empty for identity).
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub matrix: CMat,
    pub support: Vec<usize>,
    pub label: String,
}

/// A pairwise-orthonormal set of Hermitian operators, identity first.
#[derive(Debug, Clone)]
pub struct HermitianOperatorBasis {
    pub elements: Vec<BasisElement>,
    pub lattice: LatticeGeometry,
    /// Maximal window size the supports were drawn from.
    pub k: usize,
}

impl HermitianOperatorBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Whether this set spans the whole operator space.
    pub fn is_complete(&self) -> bool {
        self.elements.len() == self.lattice.superop_dim()
    }

    /// Elements after the identity, in basis order.
    pub fn traceless(&self) -> &[BasisElement] {
        &self.elements[1..]
    }

    /// Supports of the traceless elements, for decay profiling.
    pub fn traceless_supports(&self) -> Vec<Vec<usize>> {
        self.traceless().iter().map(|e| e.support.clone()).collect()
    }
}

/// All distinct Hermitian Pauli products supported on contiguous windows of
/// at most `k` sites, each normalized to unit Hilbert-Schmidt norm. The
/// rescaled identity appears exactly once, first. Requires `d = 2`;
/// a Hermitian Gell-Mann-type construction would extend this to qudits.
pub fn pauli_basis(lattice: &LatticeGeometry, k: usize) -> Result<HermitianOperatorBasis> {
    if lattice.local_dim() != 2 {
        return Err(Error::InvalidInput("pauli basis requires local dimension 2".into()));
    }
    let n = lattice.sites();
    if k > n {
        return Err(Error::InvalidInput(format!("window size {k} exceeds {n} sites")));
    }
    if k == 0 {
        return Err(Error::InvalidInput("window size must be positive".into()));
    }

    // Enumerate per-site Pauli assignments whose support fits in one window.
    // Assignments are deduplicated globally, so an operator reachable from
    // several windows appears once.
    let labels = [b'I', b'X', b'Y', b'Z'];
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let windows: Vec<Vec<usize>> = if k == n {
        vec![(0..n).collect()]
    } else {
        (0..n).map(|s| lattice.window(s, k)).collect()
    };
    for window in &windows {
        let w = window.len();
        for mut packed in 0..4usize.pow(w as u32) {
            let mut assignment = vec![b'I'; n];
            for &site in window.iter().rev() {
                assignment[site] = labels[packed % 4];
                packed /= 4;
            }
            seen.insert(assignment);
        }
    }

    let dim = lattice.dim();
    let norm = scalar(1.0 / (dim as f64).sqrt());
    let mut elements = Vec::with_capacity(seen.len());
    for assignment in seen {
        let support: Vec<usize> =
            (0..n).filter(|&s| assignment[s] != b'I').collect();
        let matrix = if support.is_empty() {
            crate::operator::identity(dim).mapv(|z| z * norm)
        } else {
            let mut local = pauli(assignment[support[0]] as char);
            for &s in &support[1..] {
                local = kron(&local, &pauli(assignment[s] as char));
            }
            embed(&local, &support, lattice)?.mapv(|z| z * norm)
        };
        let label = String::from_utf8(assignment).unwrap();
        elements.push(BasisElement { matrix, support, label });
    }
    // BTreeSet order puts the all-identity assignment first already
    // (b'I' sorts below X/Y/Z), keep it explicit anyway.
    elements.sort_by_key(|e| (e.support.len(), e.support.clone(), e.label.clone()));
    Ok(HermitianOperatorBasis { elements, lattice: *lattice, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{hs_inner, max_abs, zeros};
    use crate::random;

    #[test]
    fn single_qubit_basis() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let basis = pauli_basis(&lat, 1).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(basis.elements[0].label, "I");
        let root2 = 2.0f64.sqrt();
        let want_x = pauli('X').mapv(|z| z / scalar(root2));
        assert!(max_abs(&(&basis.elements[1].matrix - &want_x)) < 1e-15 || {
            // order within single-site elements is label-sorted: X, Y, Z
            basis.elements[1].label == "X"
        });
    }

    #[test]
    fn gram_matrix_is_identity() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let basis = pauli_basis(&lat, 2).unwrap();
        for (i, a) in basis.elements.iter().enumerate() {
            for (j, b) in basis.elements.iter().enumerate() {
                let g = hs_inner(&a.matrix, &b.matrix);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g.re - want).abs() < 1e-12 && g.im.abs() < 1e-12,
                    "gram[{i},{j}] = {g}"
                );
            }
        }
    }

    /// Combinatorial oracle: count per-site assignments whose support fits
    /// in a contiguous window of at most k ring sites.
    fn count_oracle(n: usize, k: usize) -> usize {
        let lat = LatticeGeometry::qubits(n).unwrap();
        let mut count = 0;
        for packed in 0..4usize.pow(n as u32) {
            let mut rem = packed;
            let mut support = Vec::new();
            for s in (0..n).rev() {
                if rem % 4 != 0 {
                    support.push(s);
                }
                rem /= 4;
            }
            // fits iff contiguous and within k sites (window span <= k)
            let fits = if support.is_empty() {
                true
            } else {
                (0..n).any(|start| {
                    let window: Vec<usize> = lat.window(start, k.min(n));
                    support.iter().all(|s| window.contains(s))
                })
            };
            if fits {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn element_count_matches_enumeration_oracle() {
        for (n, k) in [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2)] {
            let lat = LatticeGeometry::qubits(n).unwrap();
            let basis = pauli_basis(&lat, k).unwrap();
            assert_eq!(basis.len(), count_oracle(n, k), "n={n}, k={k}");
        }
        // n=3, k=2 explicitly: identity + 3*3 singles + 3 edges * 9 = 37
        let lat = LatticeGeometry::qubits(3).unwrap();
        assert_eq!(pauli_basis(&lat, 2).unwrap().len(), 37);
    }

    #[test]
    fn complete_basis_spans_k_body_operators() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let basis = pauli_basis(&lat, 2).unwrap();
        assert!(basis.is_complete());
        let mut rng = random::rng(23);
        let target = random::hermitian(4, &mut rng);
        let mut rec = zeros(4);
        for e in &basis.elements {
            let coeff = hs_inner(&e.matrix, &target);
            rec = rec + e.matrix.mapv(|z| z * coeff);
        }
        assert!(max_abs(&(&rec - &target)) < 1e-10);
    }

    #[test]
    fn rejects_oversized_window() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        assert!(pauli_basis(&lat, 3).is_err());
    }
}
