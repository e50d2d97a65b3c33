//! Finite-size gap certification for frustration-free super-Hamiltonians on
//! the ring: local positive-spectrum projectors, pairwise local gaps, the
//! degree-2 finite-size bound, the reference local-gap table, and dense
//! soundness checks of the certificate.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::models::{classical_local_jump, gibbs_sigma, ClassicalModelParams};
use crate::operator::{
    self, dag, embed, hermitian_eig, identity, kron, scalar, vec_op, zeros, CMat, CVec,
};
use ndarray::Array1;
use ndarray_linalg::{CholeskyFactorized, FactorizeC, Norm, SolveC, UPLO};
use num_complex::Complex64 as C64;

/// Relative threshold separating the positive spectrum from the kernel.
pub const PROJECTOR_THRESHOLD: f64 = 1e-9;

/// The weight-stripped local super-Hamiltonian of one site of the classical
/// model, acting on the operator space of its 3-site window (64 x 64 in the
/// plain vectorized layout). Summed over the three outer-occupation sectors.
pub fn classical_local_term(eps_k: f64, mu: f64, u: f64, beta: f64) -> CMat {
    let eye = identity(8);
    let mut h = zeros(64);
    for b in 0..3usize {
        let omega = -(eps_k - mu) - u * b as f64;
        let lower = classical_local_jump(b);
        let raise = dag(&lower);
        let a_w = (-beta * omega / 2.0).exp();
        let b_w = (beta * omega / 2.0).exp();
        h = h - kron(&lower, &lower.mapv(|z| z.conj()));
        h = h - kron(&raise, &raise.mapv(|z| z.conj()));
        let ldl = raise.dot(&lower);
        let lld = lower.dot(&raise);
        h = h + (kron(&ldl, &eye) + kron(&eye, &ldl.t().to_owned()))
            .mapv(|z| z * scalar(a_w / 2.0));
        h = h + (kron(&lld, &eye) + kron(&eye, &lld.t().to_owned()))
            .mapv(|z| z * scalar(b_w / 2.0));
    }
    h
}

/// Spectral projector onto the positive spectrum of a PSD local term,
/// with its gap `g = min positive eigenvalue` (threshold relative to the
/// largest eigenvalue).
pub fn positive_projector(h: &CMat) -> Result<(CMat, f64)> {
    let (w, v) = hermitian_eig(h)?;
    let wmax = w.iter().cloned().fold(0.0f64, f64::max);
    if wmax <= 0.0 {
        return Err(Error::InvalidInput("term has no positive spectrum".into()));
    }
    let cut = PROJECTOR_THRESHOLD * wmax;
    for &l in w.iter() {
        if l < -cut {
            return Err(Error::NotPositiveSemiDefinite { value: l, tol: cut });
        }
    }
    let mut scaled = v.clone();
    let mut g = f64::INFINITY;
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        if w[j] > cut {
            g = g.min(w[j]);
            // keep the eigenvector
        } else {
            col.mapv_inplace(|_| C64::new(0.0, 0.0));
        }
    }
    let p = scaled.dot(&dag(&v));
    let p = (&p + &dag(&p)).mapv(|z| z * 0.5);
    Ok((p, g))
}

/// One 3-site local term with its window sites on the original ring.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    /// Superoperator matrix on the term's own window (plain layout).
    pub matrix: CMat,
    /// Window sites, slowest first: `(k-1, k, k+1)`.
    pub sites: Vec<usize>,
}

/// A frustration-free family of local terms sharing the kernel vector
/// `vec(sqrt(sigma))` on the doubled lattice.
#[derive(Debug, Clone)]
pub struct LocalTermSet {
    pub terms: Vec<LocalTerm>,
    pub lattice: LatticeGeometry,
    /// Shared kernel vector in the plain vectorized layout (normalized).
    pub kernel: CVec,
}

/// Build the weight-stripped term set of the classical model together with
/// its shared kernel, verifying positivity and frustration-freeness.
pub fn classical_term_set(params: &ClassicalModelParams) -> Result<LocalTermSet> {
    let lattice = params.lattice();
    let n = params.n;
    let sigma = gibbs_sigma(params);
    let root = operator::hermitian_sqrt(&sigma)?;
    let kernel = vec_op(&root);

    let doubled = LatticeGeometry::qubits(2 * n)?;
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let sites = vec![(k + n - 1) % n, k, (k + 1) % n];
        let matrix = classical_local_term(params.eps[k], params.mu, params.u, params.beta);
        // embedded consistency checks: PSD and frustration-free
        let doubled_sites: Vec<usize> =
            sites.iter().cloned().chain(sites.iter().map(|&s| s + n)).collect();
        let full = embed(&matrix, &doubled_sites, &doubled)?;
        let hv = full.dot(&kernel);
        let resid = hv.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if resid > 1e-8 {
            return Err(Error::InvariantViolated(format!(
                "term {k} does not annihilate vec(sqrt(sigma)): {resid:.3e}"
            )));
        }
        terms.push(LocalTerm { matrix, sites });
    }
    Ok(LocalTermSet { terms, lattice, kernel })
}

/// Gap of the sum of two positive-spectrum projectors over the union of the
/// two windows; spectrum lies in `[0, 2]`.
pub fn projector_pair_gap(
    left: &LocalTerm,
    right: &LocalTerm,
    lattice: &LatticeGeometry,
) -> Result<f64> {
    let n = lattice.sites();
    let mut union: Vec<usize> = left.sites.clone();
    for &s in &right.sites {
        if !union.contains(&s) {
            union.push(s);
        }
    }
    union.sort_unstable();
    let m = union.len();
    let slot = |site: usize| union.iter().position(|&s| s == site).unwrap();
    let window = LatticeGeometry::qubits(2 * m)?;
    let mut sum = zeros(1 << (2 * m));
    for term in [left, right] {
        let (p, _) = positive_projector(&term.matrix)?;
        let doubled_sites: Vec<usize> = term
            .sites
            .iter()
            .map(|&s| slot(s))
            .chain(term.sites.iter().map(|&s| slot(s) + m))
            .collect();
        sum = sum + embed(&p, &doubled_sites, &window)?;
    }
    let _ = n;
    let (w, _) = hermitian_eig(&sum)?;
    let gap = w
        .iter()
        .cloned()
        .filter(|&x| x > PROJECTOR_THRESHOLD * 2.0)
        .fold(f64::INFINITY, f64::min);
    if !gap.is_finite() {
        return Err(Error::InvalidInput("projector pair sums to zero".into()));
    }
    Ok(gap)
}

/// Local-gap report over the adjacent ring pairs `(k, k+1)`.
#[derive(Debug, Clone)]
pub struct LocalGapReport {
    pub gamma_loc: f64,
    pub pair_gaps: Vec<f64>,
}

/// `gamma_loc = min_k gap(P_k + P_{k+1})` over ring-adjacent pairs (terms
/// overlapping on a single site commute, so only these pairs enter the
/// degree-2 criterion).
pub fn local_gap(set: &LocalTermSet) -> Result<LocalGapReport> {
    let n = set.terms.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two terms".into()));
    }
    let mut pair_gaps = Vec::with_capacity(n);
    for k in 0..n {
        let next = (k + 1) % n;
        if n == 2 && k == 1 {
            break;
        }
        pair_gaps.push(projector_pair_gap(&set.terms[k], &set.terms[next], &set.lattice)?);
    }
    let gamma_loc = pair_gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LocalGapReport { gamma_loc, pair_gaps })
}

/// The degree-`delta` finite-size bound
/// `2 (delta - 1) (gamma_loc - (1 - 1/(2(delta-1))))`.
pub fn knabe_bound(gamma_loc: f64, delta: usize) -> Result<f64> {
    if delta < 2 {
        return Err(Error::InvalidInput("graph degree must be at least 2".into()));
    }
    if !(0.0..=2.0).contains(&gamma_loc) {
        return Err(Error::InvalidInput(format!(
            "local gap {gamma_loc} outside [0, 2]"
        )));
    }
    let dm1 = (delta - 1) as f64;
    Ok(2.0 * dm1 * (gamma_loc - (1.0 - 1.0 / (2.0 * dm1))))
}

/// Certificate data for one model instance.
#[derive(Debug, Clone)]
pub struct GapCertificate {
    pub gamma_loc: f64,
    pub delta: usize,
    pub bound: f64,
    /// Smallest local term gap `min_k g_k`.
    pub g_min: f64,
    pub pair_gaps: Vec<f64>,
    /// The certificate only certifies a gap when the bound is positive.
    pub valid: bool,
}

pub fn certificate(params: &ClassicalModelParams) -> Result<GapCertificate> {
    let set = classical_term_set(params)?;
    let report = local_gap(&set)?;
    let delta = 2;
    let bound = knabe_bound(report.gamma_loc, delta)?;
    let mut g_min = f64::INFINITY;
    for term in &set.terms {
        let (_, g) = positive_projector(&term.matrix)?;
        g_min = g_min.min(g);
    }
    Ok(GapCertificate {
        gamma_loc: report.gamma_loc,
        delta,
        bound,
        g_min,
        pair_gaps: report.pair_gaps,
        valid: bound > 0.0,
    })
}

/// Dense gap of `sum_k P_k` on the doubled lattice, with the kernel
/// dimension. Uses a full eigendecomposition up to `n = 5` and deflated
/// inverse iteration at `n = 6`.
pub fn sum_projectors_gap(params: &ClassicalModelParams) -> Result<(f64, usize)> {
    let n = params.n;
    if n > 6 {
        return Err(Error::DimensionCap { dim: 1 << (2 * n), cap: 1 << 12 });
    }
    let set = classical_term_set(params)?;
    let doubled = LatticeGeometry::qubits(2 * n)?;
    let dim2 = 1usize << (2 * n);
    let mut sum = zeros(dim2);
    for term in &set.terms {
        let (p, _) = positive_projector(&term.matrix)?;
        let doubled_sites: Vec<usize> = term
            .sites
            .iter()
            .cloned()
            .chain(term.sites.iter().map(|&s| s + n))
            .collect();
        sum = sum + embed(&p, &doubled_sites, &doubled)?;
    }

    if n <= 5 {
        let (w, _) = hermitian_eig(&sum)?;
        let wmax = w.iter().cloned().fold(0.0f64, f64::max);
        let cut = 1e-9 * wmax.max(1.0);
        let kernel_dim = w.iter().filter(|&&x| x.abs() <= cut).count();
        let gap = w.iter().cloned().filter(|&x| x > cut).fold(f64::INFINITY, f64::min);
        return Ok((gap, kernel_dim));
    }

    // n = 6: deflate the known kernel direction and inverse-iterate.
    let kappa = scalar((n + 1) as f64);
    let v = &set.kernel;
    let mut b = sum.clone();
    for i in 0..dim2 {
        for j in 0..dim2 {
            b[[i, j]] += kappa * v[i] * v[j].conj();
        }
    }
    let f: CholeskyFactorized<_> = b.factorizec(UPLO::Lower)?;
    let mut x: CVec = Array1::from_shape_fn(dim2, |i| {
        C64::new(1.0 + 0.01 * ((i * 37) % 17) as f64, 0.02 * ((i * 11) % 7) as f64)
    });
    // remove the kernel component from the start vector
    let overlap: C64 = v.iter().zip(x.iter()).map(|(a, c)| a.conj() * c).sum();
    x = &x - &v.mapv(|z| z * overlap);
    let nx = x.norm_l2();
    x.mapv_inplace(|z| z / nx);
    let mut prev = f64::INFINITY;
    let mut lambda = f64::INFINITY;
    for _ in 0..200 {
        let y = f.solvec(&x)?;
        let ny = y.norm_l2();
        x = y.mapv(|z| z / ny);
        // Rayleigh quotient of the original sum
        let sx = sum.dot(&x);
        lambda = x.iter().zip(sx.iter()).map(|(a, c)| (a.conj() * c).re).sum();
        if (lambda - prev).abs() <= 1e-12 * lambda.abs().max(1.0) {
            break;
        }
        prev = lambda;
    }
    // kernel dimension is certified separately by the uniqueness checks;
    // report 1 for the deflated route
    Ok((lambda, 1))
}

/// One row of the local-gap table.
#[derive(Debug, Clone)]
pub struct KnabeRow {
    pub label: String,
    pub gamma_loc: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct KnabeTable {
    pub u_values: Vec<f64>,
    pub rows: Vec<KnabeRow>,
    pub beta: f64,
}

/// Pair gap for explicit left/right site energies on the open 4-site window.
pub fn pair_gap_for_energies(
    eps_left: f64,
    eps_right: f64,
    mu: f64,
    u: f64,
    beta: f64,
) -> Result<f64> {
    let lattice = LatticeGeometry::qubits(4)?;
    let left = LocalTerm {
        matrix: classical_local_term(eps_left, mu, u, beta),
        sites: vec![0, 1, 2],
    };
    let right = LocalTerm {
        matrix: classical_local_term(eps_right, mu, u, beta),
        sites: vec![1, 2, 3],
    };
    projector_pair_gap(&left, &right, &lattice)
}

/// Reproduce the reference local-gap table at `mu = 0`:
/// rows {random eps in [0,1] averaged over 100 draws, eps = 1, eps = 0.5,
/// alternating eps = 1/10} against `u in {-1, 0.5, 2}`.
pub fn knabe_table(beta: f64, seed: u64) -> Result<KnabeTable> {
    let u_values = vec![-1.0, 0.5, 2.0];
    let mu = 0.0;
    let mut rows = Vec::new();

    let mut random_row = Vec::new();
    for &u in &u_values {
        let mut acc = 0.0;
        for i in 0..100u64 {
            let mut rng = crate::random::rng(seed.wrapping_add(i));
            let e1: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
            let e2: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
            acc += pair_gap_for_energies(e1, e2, mu, u, beta)?;
        }
        random_row.push(acc / 100.0);
    }
    rows.push(KnabeRow { label: "random eps in [0,1]".into(), gamma_loc: random_row });

    for (label, eps) in [("const eps = 1", 1.0), ("const eps = 0.5", 0.5)] {
        let mut row = Vec::new();
        for &u in &u_values {
            row.push(pair_gap_for_energies(eps, eps, mu, u, beta)?);
        }
        rows.push(KnabeRow { label: label.into(), gamma_loc: row });
    }

    let mut alt_row = Vec::new();
    for &u in &u_values {
        let a = pair_gap_for_energies(1.0, 10.0, mu, u, beta)?;
        let b = pair_gap_for_energies(10.0, 1.0, mu, u, beta)?;
        alt_row.push(a.min(b));
    }
    rows.push(KnabeRow { label: "alternating eps = 1, 10".into(), gamma_loc: alt_row });

    Ok(KnabeTable { u_values, rows, beta })
}
