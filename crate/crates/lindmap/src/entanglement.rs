//! Vectorization of `sqrt(sigma)` onto the doubled (site, partner-site)
//! lattice and the desk-scale diagnostics built on it: mutual information,
//! operator-space entanglement entropy across cuts, and sequential-SVD
//! bond-truncation curves.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::operator::{
    self, dag, hermitian_eig, hermitian_sqrt, partial_trace, scalar, unvec, vec_op, CMat, CVec,
};
use ndarray::{Array1, Array2};
use ndarray_linalg::{JobSvd, Norm, SVDDC};
use num_complex::Complex64 as C64;

/// `vec(sqrt(sigma))` rearranged onto the composite lattice in which every
/// site is followed by its fictitious partner: digit order
/// `(x_0, y_0, x_1, y_1, ...)`.
#[derive(Debug, Clone)]
pub struct DoubledState {
    pub interleaved: CVec,
    pub lattice: LatticeGeometry,
}

/// Permute base-`d` digits of the indices of `v`: the digit at new position
/// `t` is the old digit at position `perm[t]`.
fn permute_digits(v: &CVec, d: usize, perm: &[usize]) -> CVec {
    let ndig = perm.len();
    let len = v.len();
    debug_assert_eq!(len, d.pow(ndig as u32));
    let mut out = Array1::from_elem(len, C64::new(0.0, 0.0));
    let mut digits = vec![0usize; ndig];
    for (old_idx, &val) in v.iter().enumerate() {
        let mut rem = old_idx;
        for t in (0..ndig).rev() {
            digits[t] = rem % d;
            rem /= d;
        }
        let mut new_idx = 0;
        for t in 0..ndig {
            new_idx = new_idx * d + digits[perm[t]];
        }
        out[new_idx] = val;
    }
    out
}

impl DoubledState {
    /// Back to the plain bipartite layout `(x_0..x_{n-1}, y_0..y_{n-1})`.
    pub fn plain(&self) -> CVec {
        let n = self.lattice.sites();
        // new position t takes old digit at perm[t]; plain position i holds
        // interleaved digit 2i, plain n+i holds 2i+1
        let mut perm = vec![0usize; 2 * n];
        for i in 0..n {
            perm[i] = 2 * i;
            perm[n + i] = 2 * i + 1;
        }
        permute_digits(&self.interleaved, self.lattice.local_dim(), &perm)
    }

    /// The doubled lattice: `2n` sites of the original local dimension.
    pub fn doubled_lattice(&self) -> LatticeGeometry {
        LatticeGeometry::new(2 * self.lattice.sites(), self.lattice.local_dim()).unwrap()
    }

    /// Partial trace over every fictitious site; recovers `sigma`.
    pub fn reduce_to_original(&self) -> Result<CMat> {
        let plain = self.plain();
        let x = unvec(&plain, self.lattice.dim())?;
        Ok(x.dot(&dag(&x)))
    }

    pub fn norm(&self) -> f64 {
        self.interleaved.norm_l2()
    }
}

/// Vectorize `sqrt(sigma)` into the interleaved layout. Verifies the
/// purification identities on deterministic probes: unit norm,
/// `<A ⊗ 1> = Tr(sigma A)`, and partial trace over fictitious sites.
pub fn vectorize_state(sigma: &CMat, lattice: &LatticeGeometry) -> Result<DoubledState> {
    let dim = lattice.dim();
    if sigma.nrows() != dim || sigma.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: sigma.nrows() });
    }
    let tr = operator::trace(sigma);
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("state trace is {tr}, expected 1")));
    }
    let root = hermitian_sqrt(sigma)?;
    let plain = vec_op(&root);

    let n = lattice.sites();
    let d = lattice.local_dim();
    // interleaved position 2i <- plain i; 2i+1 <- plain n+i
    let mut perm = vec![0usize; 2 * n];
    for i in 0..n {
        perm[2 * i] = i;
        perm[2 * i + 1] = n + i;
    }
    let interleaved = permute_digits(&plain, d, &perm);
    let state = DoubledState { interleaved, lattice: *lattice };

    let nrm = state.norm();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::InvariantViolated(format!("doubled state norm {nrm}")));
    }
    let back = state.reduce_to_original()?;
    if operator::max_abs(&(&back - sigma)) > 1e-9 {
        return Err(Error::InvariantViolated(
            "partial trace over fictitious sites does not recover sigma".into(),
        ));
    }
    // expectation identity on a few deterministic probes
    let mut rng = crate::random::rng(0x5eed);
    for _ in 0..3 {
        let a = crate::random::hermitian(dim, &mut rng);
        let lhs = {
            let av = a.dot(&unvec(&plain, dim)?);
            operator::hs_inner(&unvec(&plain, dim)?, &av).re
        };
        let rhs = operator::trace(&sigma.dot(&a)).re;
        if (lhs - rhs).abs() > 1e-10 * operator::max_abs(&a).max(1.0) {
            return Err(Error::InvariantViolated(
                "purification expectation identity failed".into(),
            ));
        }
    }
    Ok(state)
}

/// Von Neumann entropy in nats from a density matrix; eigenvalues below
/// 1e-14 are dropped.
pub fn vn_entropy(rho: &CMat) -> Result<f64> {
    let (w, _) = hermitian_eig(rho)?;
    Ok(w.iter().filter(|&&p| p > 1e-14).map(|&p| -p * p.ln()).sum())
}

/// `I(A:B) = S(A) + S(B) - S(AB)` for disjoint site sets.
pub fn mutual_information_parts(
    sigma: &CMat,
    a: &[usize],
    b: &[usize],
    lattice: &LatticeGeometry,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("both parts must be nonempty".into()));
    }
    if a.iter().any(|s| b.contains(s)) {
        return Err(Error::InvalidInput("parts must be disjoint".into()));
    }
    let mut ab: Vec<usize> = a.iter().chain(b.iter()).cloned().collect();
    ab.sort_unstable();
    let rho_a = partial_trace(sigma, a, lattice)?;
    let rho_b = partial_trace(sigma, b, lattice)?;
    let rho_ab = partial_trace(sigma, &ab, lattice)?;
    Ok(vn_entropy(&rho_a)? + vn_entropy(&rho_b)? - vn_entropy(&rho_ab)?)
}

/// Mutual information between `a` and its complement.
pub fn mutual_information(sigma: &CMat, a: &[usize], lattice: &LatticeGeometry) -> Result<f64> {
    let n = lattice.sites();
    if a.is_empty() || a.len() >= n {
        return Err(Error::InvalidInput("cut must be a nonempty proper subset".into()));
    }
    let b: Vec<usize> = (0..n).filter(|s| !a.contains(s)).collect();
    mutual_information_parts(sigma, a, &b, lattice)
}

/// Entanglement data across one cut of the doubled lattice.
#[derive(Debug, Clone)]
pub struct EntanglementReport {
    /// Sites of the cut (original lattice labels).
    pub cut: Vec<usize>,
    /// Operator-space entanglement entropy of `sqrt(sigma)` (nats).
    pub entropy: f64,
    /// Mutual information `I(cut : rest)` in `sigma` (nats).
    pub mutual_information: f64,
    /// Schmidt coefficients across the doubled cut, descending.
    pub schmidt: Vec<f64>,
}

/// Normalize a contiguous-on-ring cut to a non-wrapping interval, using the
/// complement when the set wraps (entropies agree across a pure-state cut).
fn cut_as_interval(cut: &[usize], lattice: &LatticeGeometry) -> Result<Vec<usize>> {
    let n = lattice.sites();
    let mut sorted: Vec<usize> = cut.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != cut.len() || sorted.is_empty() || sorted.len() >= n {
        return Err(Error::InvalidInput("cut must be a nonempty proper subset".into()));
    }
    let is_interval =
        |v: &[usize]| v.windows(2).all(|w| w[1] == w[0] + 1);
    if is_interval(&sorted) {
        return Ok(sorted);
    }
    let comp: Vec<usize> = (0..n).filter(|s| !sorted.contains(s)).collect();
    if is_interval(&comp) {
        return Ok(comp);
    }
    Err(Error::InvalidInput("cut is not contiguous on the ring".into()))
}

/// Operator-space entanglement entropy of `sqrt(sigma)` across a contiguous
/// cut: Schmidt decomposition of the doubled state between the cut's
/// (site, partner) pairs and the rest. Also checks the bound
/// `I(A:B) <= 2 S(A)` that makes the entropy an operational proxy.
pub fn op_space_entropy(
    sigma: &CMat,
    cut: &[usize],
    lattice: &LatticeGeometry,
) -> Result<EntanglementReport> {
    let interval = cut_as_interval(cut, lattice)?;
    let state = vectorize_state(sigma, lattice)?;
    let n = lattice.sites();
    let d = lattice.local_dim();

    // move the cut's digit pairs to the front
    let mut perm = Vec::with_capacity(2 * n);
    for &s in &interval {
        perm.push(2 * s);
        perm.push(2 * s + 1);
    }
    for s in 0..n {
        if !interval.contains(&s) {
            perm.push(2 * s);
            perm.push(2 * s + 1);
        }
    }
    let rearranged = permute_digits(&state.interleaved, d, &perm);
    let rows = d.pow(2 * interval.len() as u32);
    let cols = rearranged.len() / rows;
    let mat = Array2::from_shape_vec((rows, cols), rearranged.to_vec()).unwrap();
    let (_, sv, _) = mat.svddc(JobSvd::None)?;
    let schmidt: Vec<f64> = sv.to_vec();

    let entropy: f64 = schmidt
        .iter()
        .map(|&s| s * s)
        .filter(|&p| p > 1e-14)
        .map(|p| -p * p.ln())
        .sum();
    let mi = mutual_information(sigma, &interval, lattice)?;
    if mi > 2.0 * entropy + 1e-8 {
        return Err(Error::InvariantViolated(format!(
            "mutual information {mi} exceeds twice the operator-space entropy {entropy}"
        )));
    }
    Ok(EntanglementReport { cut: interval, entropy, mutual_information: mi, schmidt })
}

/// One point of a bond-truncation curve.
#[derive(Debug, Clone, Copy)]
pub struct TruncationPoint {
    pub bond_dim: usize,
    /// Schatten-1 distance `||sigma - sigma_D||_1`.
    pub trace_distance: f64,
    /// `|<psi_D | vec(sqrt(sigma))>|` after normalization.
    pub overlap: f64,
    /// True vector gap `||vec(sqrt(sigma)) - psi_D||`.
    pub vec_error: f64,
    /// Proven trace-distance bound `2 sqrt(1 - overlap^2)`, the purified
    /// trace distance before reduction.
    pub bound: f64,
}

/// Sequential-SVD matrix-product truncation of the doubled state at each
/// bond dimension, reporting the trace distance between `sigma` and the
/// reduced state of the truncated purification. Plain SVD truncation, no
/// variational sweep.
pub fn truncation_curve(
    sigma: &CMat,
    bond_dims: &[usize],
    lattice: &LatticeGeometry,
) -> Result<Vec<TruncationPoint>> {
    if bond_dims.is_empty() {
        return Err(Error::InvalidInput("need at least one bond dimension".into()));
    }
    if bond_dims.windows(2).any(|w| w[1] < w[0]) || bond_dims[0] < 1 {
        return Err(Error::InvalidInput("bond dimensions must be ascending and >= 1".into()));
    }
    let state = vectorize_state(sigma, lattice)?;
    let psi = &state.interleaved;
    let n = lattice.sites();
    let q = lattice.local_dim() * lattice.local_dim(); // composite site dim

    let mut points = Vec::with_capacity(bond_dims.len());
    for &dmax in bond_dims {
        let psi_d = mps_truncate(psi, n, q, dmax)?;
        let overlap: C64 = psi_d.iter().zip(psi.iter()).map(|(a, b)| a.conj() * b).sum();
        let vec_error = psi_d
            .iter()
            .zip(psi.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let overlap = overlap.norm().min(1.0);

        // reduce the truncated purification
        let trunc_state = DoubledState { interleaved: psi_d, lattice: *lattice };
        let sigma_d = trunc_state.reduce_to_original()?;
        let diff = sigma - &sigma_d;
        let (w, _) = hermitian_eig(&diff)?;
        let trace_distance: f64 = w.iter().map(|x| x.abs()).sum();

        // two proven bounds: the purified trace distance before reduction,
        // and 2 * ||Psi - psi_D|| from the overlap chain
        let bound = 2.0 * (1.0 - overlap * overlap).max(0.0).sqrt();
        let gap_bound = 2.0 * vec_error;
        if trace_distance > bound + 1e-9 || trace_distance > gap_bound + 1e-9 {
            return Err(Error::InvariantViolated(format!(
                "trace distance {trace_distance} exceeds a proven bound \
                 (purified {bound}, 2*gap {gap_bound})"
            )));
        }
        points.push(TruncationPoint {
            bond_dim: dmax,
            trace_distance,
            overlap,
            vec_error,
            bound,
        });
    }
    Ok(points)
}

/// Left-to-right SVD sweep with rank cap `dmax`; returns the normalized
/// truncated state as a full vector.
fn mps_truncate(psi: &CVec, n: usize, q: usize, dmax: usize) -> Result<CVec> {
    let mut tensors: Vec<Array2<C64>> = Vec::with_capacity(n);
    let total = psi.len();
    let mut carry = Array2::from_shape_vec((1, total), psi.to_vec()).unwrap();
    let mut rank = 1usize;
    for _site in 0..n - 1 {
        let rows = rank * q;
        let cols = carry.len() / rows;
        let m = carry.into_shape_with_order((rows, cols)).unwrap();
        let (u, s, vt) = m.svddc(JobSvd::Some)?;
        let u = u.expect("left vectors");
        let vt = vt.expect("right vectors");
        let smax = s.iter().cloned().fold(0.0f64, f64::max);
        let nonzero = s.iter().filter(|&&x| x > 1e-14 * smax.max(1.0)).count();
        let keep = nonzero.min(dmax).max(1);
        let u_k = u.slice(ndarray::s![.., 0..keep]).to_owned();
        let mut sv = vt.slice(ndarray::s![0..keep, ..]).to_owned();
        for (i, mut row) in sv.rows_mut().into_iter().enumerate() {
            let w = scalar(s[i]);
            row.mapv_inplace(|z| z * w);
        }
        tensors.push(u_k);
        carry = sv;
        rank = keep;
    }
    tensors.push(carry);

    // contract back to a full vector
    let mut acc = tensors[0].clone(); // (q, r1) with leading block = q^1
    for t in &tensors[1..] {
        let r_prev = t.nrows() / q * 0 + {
            // tensors after the first have shape (r_prev * q, r_next) except
            // the last, which is (r_prev, q); normalize both to 2-d contract
            0
        };
        let _ = r_prev;
        let left = acc.nrows();
        let r = acc.ncols();
        let right_cols = t.ncols();
        // t rows = r * q for middle tensors (stored as (r*q, r_next)) or the
        // last carry with rows = r and cols = q
        if t.nrows() == r * q {
            let prod = acc.dot(&t.clone().into_shape_with_order((r, q * right_cols)).unwrap());
            acc = prod.into_shape_with_order((left * q, right_cols)).unwrap();
        } else {
            debug_assert_eq!(t.nrows(), r);
            let prod = acc.dot(t);
            acc = prod.into_shape_with_order((left * t.ncols(), 1)).unwrap();
        }
    }
    let mut v = Array1::from_iter(acc.iter().cloned());
    let nrm = v.norm_l2();
    if nrm > 0.0 {
        v.mapv_inplace(|z| z / scalar(nrm));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity, kron, max_abs, zeros, ONE, ZERO};
    use crate::random;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vectorize_pure_state_is_product_vector() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let mut sigma = zeros(2);
        sigma[[0, 0]] = ONE;
        let state = vectorize_state(&sigma, &lat).unwrap();
        let mut want = Array1::from_elem(4, ZERO);
        want[0] = ONE; // |00> in the (site, partner) layout
        assert!((state.interleaved[0] - want[0]).norm() < 1e-12);
        assert!(state.interleaved.iter().skip(1).all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn vectorize_maximally_mixed_is_bell_pair_per_site() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let sigma = identity(4).mapv(|z| z * scalar(0.25));
        let state = vectorize_state(&sigma, &lat).unwrap();
        // per-site Bell pair (|00> + |11>)/sqrt(2), interleaved layout
        let bell = {
            let mut b = Array1::from_elem(4, ZERO);
            b[0] = scalar(1.0 / 2.0f64.sqrt());
            b[3] = scalar(1.0 / 2.0f64.sqrt());
            b
        };
        let want = {
            let b2 = Array2::from_shape_vec((4, 1), bell.to_vec()).unwrap();
            let prod = kron(&b2, &b2);
            Array1::from_iter(prod.iter().cloned())
        };
        let diff: f64 = state
            .interleaved
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn purification_identities_on_random_states() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(7);
        for _ in 0..5 {
            let sigma = random::density(8, &mut rng);
            let state = vectorize_state(&sigma, &lat).unwrap();
            assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-10);
            let back = state.reduce_to_original().unwrap();
            assert!(max_abs(&(&back - &sigma)) < 1e-9);
            // probe identity with an independent trace oracle
            for _ in 0..10 {
                let a = random::hermitian(8, &mut rng);
                let plain = state.plain();
                let x = unvec(&plain, 8).unwrap();
                let lhs = operator::hs_inner(&x, &a.dot(&x)).re;
                let rhs = operator::trace(&sigma.dot(&a)).re;
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10 * max_abs(&a).max(1.0));
            }
        }
    }

    #[test]
    fn mutual_information_product_and_classical() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let mut rng = random::rng(11);
        let a = random::density(2, &mut rng);
        let b = random::density(2, &mut rng);
        let product = kron(&a, &b);
        let mi = mutual_information(&product, &[0], &lat).unwrap();
        assert!(mi.abs() < 1e-10);

        // perfectly correlated classical bits: I = ln 2
        let mut corr = zeros(4);
        corr[[0, 0]] = scalar(0.5);
        corr[[3, 3]] = scalar(0.5);
        let mi = mutual_information(&corr, &[0], &lat).unwrap();
        assert_abs_diff_eq!(mi, 2.0f64.ln(), epsilon = 1e-12);
    }

    /// Definition-level oracle with independent partial trace and entropy.
    fn mi_oracle(sigma: &CMat, a: &[usize], lat: &LatticeGeometry) -> f64 {
        let n = lat.sites();
        let b: Vec<usize> = (0..n).filter(|s| !a.contains(s)).collect();
        let ent = |rho: &CMat| -> f64 {
            let (w, _) = hermitian_eig(rho).unwrap();
            w.iter().filter(|&&p| p > 1e-14).map(|&p| -p * p.ln()).sum()
        };
        let ra = partial_trace(sigma, a, lat).unwrap();
        let rb = partial_trace(sigma, &b, lat).unwrap();
        ent(&ra) + ent(&rb) - ent(sigma)
    }

    #[test]
    fn mutual_information_matches_oracle_and_is_monotone() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(13);
        for _ in 0..5 {
            let sigma = random::density(8, &mut rng);
            for cut in [vec![0], vec![1], vec![0, 2]] {
                let got = mutual_information(&sigma, &cut, &lat).unwrap();
                assert_abs_diff_eq!(got, mi_oracle(&sigma, &cut, &lat), epsilon = 1e-10);
                assert!(got >= -1e-12);
            }
            // data processing: discarding a site never raises MI
            let full = mutual_information_parts(&sigma, &[0], &[1, 2], &lat).unwrap();
            let dropped = mutual_information_parts(&sigma, &[0], &[1], &lat).unwrap();
            assert!(dropped <= full + 1e-10);
        }
    }

    #[test]
    fn op_space_entropy_product_and_mixed() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        // pure product state: everything uncorrelated
        let mut sigma = zeros(4);
        sigma[[0, 0]] = ONE;
        let rep = op_space_entropy(&sigma, &[0], &lat).unwrap();
        assert!(rep.entropy.abs() < 1e-10);
        assert!(rep.mutual_information.abs() < 1e-10);

        // maximally mixed: per-site purification pairs, no cross-cut content
        let sigma = identity(4).mapv(|z| z * scalar(0.25));
        let rep = op_space_entropy(&sigma, &[0], &lat).unwrap();
        assert!(rep.entropy.abs() < 1e-10);
    }

    #[test]
    fn op_space_entropy_bound_holds_on_random_states() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(17);
        for _ in 0..20 {
            let sigma = random::density(8, &mut rng);
            for cut in [vec![0], vec![0, 1], vec![2]] {
                let rep = op_space_entropy(&sigma, &cut, &lat).unwrap();
                assert!(rep.mutual_information <= 2.0 * rep.entropy + 1e-8);
            }
        }
    }

    #[test]
    fn op_space_entropy_accepts_wrapping_cut() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(19);
        let sigma = random::density(8, &mut rng);
        // {2, 0} wraps; complement {1} is the interval used
        let rep = op_space_entropy(&sigma, &[2, 0], &lat).unwrap();
        let direct = op_space_entropy(&sigma, &[1], &lat).unwrap();
        assert_abs_diff_eq!(rep.entropy, direct.entropy, epsilon = 1e-10);
        assert!(op_space_entropy(&sigma, &[0, 2], &LatticeGeometry::qubits(4).unwrap()).is_err());
    }

    #[test]
    fn truncation_curve_full_rank_is_exact_and_monotone() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(23);
        let sigma = random::density(8, &mut rng);
        let dims = [1, 2, 4, 8, 16];
        let points = truncation_curve(&sigma, &dims, &lat).unwrap();
        // full rank reproduces sigma
        let last = points.last().unwrap();
        assert!(last.trace_distance < 1e-9, "{}", last.trace_distance);
        // SVD truncation improves monotonically in D
        for w in points.windows(2) {
            assert!(w[1].trace_distance <= w[0].trace_distance + 1e-9);
        }
        for p in &points {
            assert!(p.trace_distance <= p.bound + 1e-9);
        }
    }

    #[test]
    fn truncation_curve_product_state_needs_bond_one() {
        let lat = LatticeGeometry::qubits(3).unwrap();
        let mut rng = random::rng(29);
        let a = random::density(2, &mut rng);
        let b = random::density(2, &mut rng);
        let c = random::density(2, &mut rng);
        let sigma = kron(&kron(&a, &b), &c);
        let points = truncation_curve(&sigma, &[1], &lat).unwrap();
        assert!(points[0].trace_distance < 1e-9, "{}", points[0].trace_distance);
        assert!(points[0].overlap > 1.0 - 1e-12);
    }

    #[test]
    fn truncation_rejects_bad_bond_dims() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let sigma = identity(4).mapv(|z| z * scalar(0.25));
        assert!(truncation_curve(&sigma, &[], &lat).is_err());
        assert!(truncation_curve(&sigma, &[2, 1], &lat).is_err());
        assert!(truncation_curve(&sigma, &[0], &lat).is_err());
    }
}
