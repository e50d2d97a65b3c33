//! Seeded random matrix and instance generators used by verification
//! workloads and the CLI.

use crate::basis::{pauli_basis, HermitianOperatorBasis};
use crate::lattice::LatticeGeometry;
use crate::lindblad::SuperOpMatrix;
use crate::operator::{dag, scalar, CMat};
use crate::qdb::{assemble_gks, modular_basis, ModularBasis};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Deterministic RNG for a given seed.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn std_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; adequate for test-instance generation.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Complex Ginibre matrix with iid standard normal entries.
pub fn ginibre(dim: usize, rng: &mut impl Rng) -> CMat {
    Array2::from_shape_fn((dim, dim), |_| C64::new(std_normal(rng), std_normal(rng)))
}

pub fn hermitian(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(dim, rng);
    (&g + &dag(&g)).mapv(|z| z * 0.5)
}

/// Random PSD matrix `G G†`.
pub fn psd(dim: usize, rng: &mut impl Rng) -> CMat {
    let g = ginibre(dim, rng);
    g.dot(&dag(&g))
}

/// Random density matrix, trace one, full rank almost surely.
pub fn density(dim: usize, rng: &mut impl Rng) -> CMat {
    let p = psd(dim, rng);
    let tr = crate::operator::trace(&p).re;
    p.mapv(|z| z / scalar(tr))
}

/// Full-rank density matrix with eigenvalues bounded away from zero.
pub fn full_rank_density(dim: usize, rng: &mut impl Rng) -> CMat {
    let p = psd(dim, rng) + crate::operator::identity(dim).mapv(|z| z * scalar(0.2 * dim as f64));
    let tr = crate::operator::trace(&p).re;
    p.mapv(|z| z / scalar(tr))
}

/// Haar-ish random unitary from the QR of a Ginibre matrix.
pub fn unitary(dim: usize, rng: &mut impl Rng) -> CMat {
    use ndarray_linalg::QR;
    let g = ginibre(dim, rng);
    let (q, r) = g.qr().expect("qr");
    // fix phases so the diagonal of R is positive
    let mut q = q;
    for j in 0..dim {
        let rjj = r[[j, j]];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[[i, j]] *= phase.conj();
        }
    }
    q
}

/// Random Hermitian PSD matrix with exact 2-norm condition number `cond`:
/// largest eigenvalue 1, smallest `1/cond`, the rest uniform in between.
pub fn psd_with_condition(dim: usize, cond: f64, rng: &mut impl Rng) -> CMat {
    assert!(dim >= 2 && cond >= 1.0);
    let u = unitary(dim, rng);
    let mut eigs = vec![0.0; dim];
    eigs[0] = 1.0;
    eigs[1] = 1.0 / cond;
    for e in eigs.iter_mut().skip(2) {
        *e = rng.random_range(1.0 / cond..1.0);
    }
    let mut scaled = u.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        col.mapv_inplace(|z| z * scalar(eigs[j]));
    }
    let out = scaled.dot(&dag(&u));
    (&out + &dag(&out)).mapv(|z| z * 0.5)
}

/// Random complex PSD matrix normalized to unit operator norm.
pub fn psd_normalized(dim: usize, rng: &mut impl Rng) -> CMat {
    let p = psd(dim, rng);
    let norm = crate::operator::op_norm2(&p);
    p.mapv(|z| z / scalar(norm))
}

/// A randomly generated detailed-balanced Lindbladian in canonical form,
/// together with everything used to build it.
pub struct QdbInstance {
    pub lattice: LatticeGeometry,
    pub sigma: CMat,
    pub modular: ModularBasis,
    /// `(modular index, gamma, omega)` of every retained canonical term.
    pub terms: Vec<(usize, f64, f64)>,
    pub superop: SuperOpMatrix,
}

/// Draw a canonical-form detailed-balanced Lindbladian: random full-rank
/// `sigma`, a random adjoint-closed subset of its modular basis, and weights
/// `gamma` uniform in `[0.1, 1]` shared within each adjoint pair.
pub fn qdb_instance(lattice: &LatticeGeometry, rng: &mut impl Rng) -> QdbInstance {
    let dim = lattice.dim();
    let sigma = full_rank_density(dim, rng);
    let modular = modular_basis(&sigma).expect("modular basis of full-rank state");
    let nel = modular.len();

    let mut gamma = vec![0.0f64; nel];
    // Off-diagonal adjoint pairs (omega, -omega): keep with probability 0.7.
    let mut visited = vec![false; nel];
    for alpha in 1..nel {
        if visited[alpha] {
            continue;
        }
        let partner = modular.adjoint_pair[alpha];
        visited[alpha] = true;
        visited[partner] = true;
        let keep_prob = if partner == alpha { 0.5 } else { 0.7 };
        if rng.random::<f64>() < keep_prob {
            let g = rng.random_range(0.1..1.0);
            gamma[alpha] = g;
            gamma[partner] = g;
        }
    }
    // Ensure at least one dissipative direction.
    if gamma.iter().all(|&g| g == 0.0) {
        let alpha = 1 + rng.random_range(0..nel - 1);
        let g = rng.random_range(0.1..1.0);
        gamma[alpha] = g;
        gamma[modular.adjoint_pair[alpha]] = g;
    }

    let mut kdiag = crate::operator::zeros(nel - 1);
    let mut terms = Vec::new();
    for alpha in 1..nel {
        if gamma[alpha] > 0.0 {
            let omega = modular.omegas[alpha];
            kdiag[[alpha - 1, alpha - 1]] = scalar(gamma[alpha] * (-omega / 2.0).exp());
            terms.push((alpha, gamma[alpha], omega));
        }
    }
    let elements: Vec<CMat> = modular.elements[1..].to_vec();
    let matrix = assemble_gks(&kdiag, &elements);
    QdbInstance {
        lattice: *lattice,
        sigma,
        modular,
        terms,
        superop: SuperOpMatrix { matrix, provenance: "random canonical".into() },
    }
}

/// Random geometrically local Lindblad spec (not detailed-balanced in
/// general): traceless random jumps and Hermitian terms on contiguous
/// windows.
pub fn local_spec(
    lattice: &LatticeGeometry,
    k: usize,
    jumps: usize,
    hamiltonian_terms: usize,
    rng: &mut impl Rng,
) -> crate::lindblad::LindbladSpec {
    use crate::lindblad::{HamiltonianTerm, JumpTerm, LindbladSpec};
    let n = lattice.sites();
    let d = lattice.local_dim();
    let mut jump_terms = Vec::new();
    for _ in 0..jumps {
        let w = 1 + rng.random_range(0..k.min(n));
        let start = rng.random_range(0..n);
        let sites = lattice.window(start, w);
        let dloc = d.pow(w as u32);
        let mut m = ginibre(dloc, rng);
        // make traceless
        let tr = crate::operator::trace(&m) / scalar(dloc as f64);
        for i in 0..dloc {
            m[[i, i]] -= tr;
        }
        jump_terms.push(JumpTerm {
            local: m,
            support: sites,
            weight: rng.random_range(0.2..1.0),
            partner: None,
        });
    }
    let mut ham = Vec::new();
    for _ in 0..hamiltonian_terms {
        let w = 1 + rng.random_range(0..k.min(n));
        let start = rng.random_range(0..n);
        let sites = lattice.window(start, w);
        let dloc = d.pow(w as u32);
        ham.push(HamiltonianTerm { local: hermitian(dloc, rng), support: sites });
    }
    LindbladSpec { lattice: *lattice, jumps: jump_terms, hamiltonian: ham, locality: k }
}

/// Full Pauli product basis for small lattices (complete when `k = n`).
pub fn complete_pauli_basis(lattice: &LatticeGeometry) -> HermitianOperatorBasis {
    pauli_basis(lattice, lattice.sites()).expect("complete pauli basis")
}
