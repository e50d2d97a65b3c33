//! Quantum detailed balance: the sigma-weighted multiplication superoperator
//! Gamma_s, detailed-balance residuals, the modular basis of Bohr
//! frequencies, coefficient-matrix (GKS) extraction, canonical forms, the
//! deformed family `Gamma^{-x} L Gamma^{x}`, and the coefficient commutator
//! check that is necessary for detailed balance.

use crate::basis::HermitianOperatorBasis;
use crate::error::{Error, Result};
use crate::lindblad::SuperOpMatrix;
use crate::operator::{
    self, dag, hermitian_eig, hermitian_power, identity, kron, max_abs, op_norm2, reshuffle,
    scalar, unvec, vec_op, zeros, CMat,
};
use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

/// Eigen-system of the modular superoperator `A -> sigma A sigma^{-1}`:
/// orthonormal operators with definite Bohr frequencies. Element 0 is the
/// rescaled identity; elements `1..N` span the traceless diagonal algebra of
/// `sigma` (frequency zero); the rest are the off-diagonal `|u_i><u_j|`.
#[derive(Debug, Clone)]
pub struct ModularBasis {
    pub elements: Vec<CMat>,
    pub omegas: Vec<f64>,
    /// `adjoint_pair[a] = a'` with `S_a† = S_{a'}` and `omega_{a'} = -omega_a`.
    pub adjoint_pair: Vec<usize>,
    /// Indices grouped by degenerate Bohr frequency.
    pub groups: Vec<Vec<usize>>,
    pub hilbert_dim: usize,
}

impl ModularBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Grouping tolerance for degenerate Bohr frequencies, relative to the
/// largest frequency magnitude.
pub const OMEGA_GROUP_TOL: f64 = 1e-9;

/// Build a modular basis from a positive-definite state.
pub fn modular_basis(sigma: &CMat) -> Result<ModularBasis> {
    let n = sigma.nrows();
    let (lam, u) = hermitian_eig(sigma)?;
    let lam_max = lam.iter().cloned().fold(0.0f64, f64::max);
    if lam.iter().any(|&l| l <= 1e-14 * lam_max) {
        return Err(Error::Singular);
    }
    let energies: Vec<f64> = lam.iter().map(|&l| -l.ln()).collect();

    let col = |i: usize| u.column(i).to_owned();
    let outer = |i: usize, j: usize| -> CMat {
        let ui = col(i);
        let uj = col(j);
        Array2::from_shape_fn((n, n), |(r, c)| ui[r] * uj[c].conj())
    };

    let nel = n * n;
    let mut elements = Vec::with_capacity(nel);
    let mut omegas = Vec::with_capacity(nel);
    let mut adjoint_pair = vec![0usize; nel];

    // 0: identity
    elements.push(identity(n).mapv(|z| z * scalar(1.0 / (n as f64).sqrt())));
    omegas.push(0.0);

    // 1..n: traceless diagonal combinations (Helmert weights), self-adjoint
    for m in 1..n {
        let norm = 1.0 / ((m * (m + 1)) as f64).sqrt();
        let mut mat = zeros(n);
        for i in 0..m {
            mat = mat + outer(i, i).mapv(|z| z * scalar(norm));
        }
        mat = mat + outer(m, m).mapv(|z| z * scalar(-(m as f64) * norm));
        elements.push(mat);
        omegas.push(0.0);
    }
    for a in 0..n {
        adjoint_pair[a] = a;
    }

    // off-diagonal |u_i><u_j|, row-major over i != j
    let off_index = |i: usize, j: usize| -> usize {
        n + i * (n - 1) + if j < i { j } else { j - 1 }
    };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            elements.push(outer(i, j));
            omegas.push(energies[i] - energies[j]);
            adjoint_pair[off_index(i, j)] = off_index(j, i);
        }
    }

    // group by degenerate frequency
    let omega_max = omegas.iter().map(|w| w.abs()).fold(0.0f64, f64::max);
    let tol = OMEGA_GROUP_TOL * omega_max.max(1.0);
    let mut order: Vec<usize> = (0..nel).collect();
    order.sort_by(|&a, &b| omegas[a].total_cmp(&omegas[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match groups.last_mut() {
            Some(g) if (omegas[idx] - omegas[g[0]]).abs() <= tol => g.push(idx),
            _ => groups.push(vec![idx]),
        }
    }

    Ok(ModularBasis { elements, omegas, adjoint_pair, groups, hilbert_dim: n })
}

/// `sigma A sigma^{-1}`.
pub fn delta_apply(sigma: &CMat, a: &CMat) -> Result<CMat> {
    let left = hermitian_power(sigma, 1.0)?;
    let right = hermitian_power(sigma, -1.0)?;
    Ok(left.dot(a).dot(&right))
}

/// `Gamma_s^x(A) = sigma^{x(1-s)} A sigma^{x s}`.
pub fn gamma_apply(sigma: &CMat, s: f64, x: f64, a: &CMat) -> Result<CMat> {
    let left = hermitian_power(sigma, x * (1.0 - s))?;
    let right = hermitian_power(sigma, x * s)?;
    Ok(left.dot(a).dot(&right))
}

/// Matrix of `Gamma_s^x` on vectorized operators:
/// `sigma^{x(1-s)} ⊗ (sigma^{x s})^T`.
pub fn gamma_superop(sigma: &CMat, s: f64, x: f64) -> Result<CMat> {
    let left = hermitian_power(sigma, x * (1.0 - s))?;
    let right = hermitian_power(sigma, x * s)?;
    Ok(kron(&left, &right.t().to_owned()))
}

/// Both detailed-balance residuals at one `s`, scale-free.
#[derive(Debug, Clone, Copy)]
pub struct QdbResidual {
    /// `||L Gamma_s - Gamma_s L*|| / ||L||`.
    pub direct: f64,
    /// Self-adjointness defect of `Gamma_s^{-1/2} L Gamma_s^{1/2}`.
    pub conjugated: f64,
}

impl QdbResidual {
    pub fn max(&self) -> f64 {
        self.direct.max(self.conjugated)
    }
}

pub fn qdb_residual(s_op: &SuperOpMatrix, sigma: &CMat, s: f64) -> Result<QdbResidual> {
    let l = &s_op.matrix;
    let norm_l = op_norm2(l);
    if norm_l == 0.0 {
        return Ok(QdbResidual { direct: 0.0, conjugated: 0.0 });
    }
    let g = gamma_superop(sigma, s, 1.0)?;
    let adjoint = dag(l);
    let direct = op_norm2(&(l.dot(&g) - g.dot(&adjoint))) / norm_l;

    let g_half = gamma_superop(sigma, s, 0.5)?;
    let g_inv_half = gamma_superop(sigma, s, -0.5)?;
    let conj = g_inv_half.dot(l).dot(&g_half);
    let conjugated = op_norm2(&(&conj - &dag(&conj))) / op_norm2(&conj).max(1e-300);
    Ok(QdbResidual { direct, conjugated })
}

/// `Gamma_s^{-x} L Gamma_s^{x}` as a matrix.
pub fn deformed_family(
    s_op: &SuperOpMatrix,
    sigma: &CMat,
    s: f64,
    x: f64,
) -> Result<SuperOpMatrix> {
    let fwd = gamma_superop(sigma, s, x)?;
    let bwd = gamma_superop(sigma, s, -x)?;
    Ok(SuperOpMatrix {
        matrix: bwd.dot(&s_op.matrix).dot(&fwd),
        provenance: format!("{} deformed x={x}", s_op.provenance),
    })
}

/// Assemble `sum_ab K_ab (G_a rho G_b† - (1/2){G_b† G_a, rho})` as a dense
/// superoperator matrix over the given operator set.
pub fn assemble_gks(k: &CMat, elements: &[CMat]) -> CMat {
    let nel = elements.len();
    assert_eq!(k.nrows(), nel, "coefficient matrix must match element count");
    let dim = elements[0].nrows();
    let dim2 = dim * dim;

    // jump part through the Choi side: C_J = V K V† with V = [vec(G_a)]
    let mut v = Array2::zeros((dim2, nel));
    for (a, g) in elements.iter().enumerate() {
        let col = vec_op(g);
        for i in 0..dim2 {
            v[[i, a]] = col[i];
        }
    }
    let choi = v.dot(k).dot(&dag(&v));
    let jump = reshuffle(&choi).expect("square choi");

    // anticommutator partner: sum K_ab G_b† G_a = unvec(J† vec(1))
    let m2 = unvec(&dag(&jump).dot(&vec_op(&identity(dim))), dim).unwrap();
    let eye = identity(dim);
    let anti = kron(&m2, &eye) + kron(&eye, &m2.t().to_owned());
    jump - anti.mapv(|z| z * 0.5)
}

/// Reference to either supported basis kind for coefficient extraction.
pub enum GksBasis<'a> {
    Hermitian(&'a HermitianOperatorBasis),
    Modular(&'a ModularBasis),
}

impl<'a> GksBasis<'a> {
    fn elements(&self) -> Vec<&CMat> {
        match self {
            GksBasis::Hermitian(b) => b.elements.iter().map(|e| &e.matrix).collect(),
            GksBasis::Modular(b) => b.elements.iter().collect(),
        }
    }

    /// Supports of traceless elements when the basis carries geometry.
    fn supports(&self) -> Option<Vec<Vec<usize>>> {
        match self {
            GksBasis::Hermitian(b) => Some(b.traceless_supports()),
            GksBasis::Modular(_) => None,
        }
    }
}

/// Coefficient matrix of a generator over the traceless part of an
/// orthonormal operator basis, with the extracted Hamiltonian and
/// reconstruction diagnostics.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    /// Hermitian matrix over the traceless elements of the provided basis.
    pub kmatrix: CMat,
    /// Extracted Hamiltonian (traceless Hermitian); zero for purely
    /// dissipative generators.
    pub hamiltonian: CMat,
    /// Relative mass of the generator outside the span of the provided
    /// basis elements. Small iff the basis spans the jump algebra.
    pub span_residual: f64,
    /// Residual of rebuilding with the Lindblad normal form `(K, H)`.
    /// Small for genuine Lindbladians; nonzero for deformed generators.
    pub lindblad_residual: f64,
    /// Supports of the traceless basis elements, when available.
    pub supports: Option<Vec<Vec<usize>>>,
}

impl CoefficientMatrix {
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (w, _) = hermitian_eig(&self.kmatrix)?;
        Ok(w.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

/// Default acceptance for the GKS reconstruction residual.
pub const GKS_SPAN_TOL: f64 = 1e-9;

/// Extract the coefficient matrix of `s_op` over `basis`:
/// `L(rho) = sum_ab K_ab (F_a rho F_b† - (1/2){F_b† F_a, rho}) - i[H, rho]`.
///
/// The extraction orthogonally projects the reshuffled generator onto
/// `vec(F_a) vec(F_b)†` (least squares in the Hilbert-Schmidt geometry; the
/// coefficients are unique for a fixed orthonormal traceless basis). Errors
/// if the basis misses part of the jump algebra.
pub fn gks_matrix(s_op: &SuperOpMatrix, basis: &GksBasis) -> Result<CoefficientMatrix> {
    let dim = s_op.hilbert_dim();
    let dim2 = dim * dim;
    let elements = basis.elements();
    let nel = elements.len();
    if nel == 0 || elements[0].nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: elements.first().map(|e| e.nrows()).unwrap_or(0),
        });
    }
    let root_n = (dim as f64).sqrt();
    let id_check = max_abs(&(elements[0] - &identity(dim).mapv(|z| z * scalar(1.0 / root_n))));
    if id_check > 1e-10 {
        return Err(Error::InvalidInput(
            "basis must list the rescaled identity as its first element".into(),
        ));
    }

    // V holds vec(F_a) for the provided elements, completed to a unitary.
    let mut v = Array2::<C64>::zeros((dim2, nel));
    for (a, g) in elements.iter().enumerate() {
        let col = vec_op(g);
        for i in 0..dim2 {
            v[[i, a]] = col[i];
        }
    }
    let v_full = if nel < dim2 {
        let (u, _, _) = v.svd(true, false)?;
        let u = u.expect("left singular vectors");
        let mut vf = Array2::<C64>::zeros((dim2, dim2));
        for a in 0..nel {
            for i in 0..dim2 {
                vf[[i, a]] = v[[i, a]];
            }
        }
        for a in nel..dim2 {
            for i in 0..dim2 {
                vf[[i, a]] = u[[i, a]];
            }
        }
        vf
    } else {
        v.clone()
    };

    let choi = reshuffle(&s_op.matrix)?;
    let q = dag(&v_full).dot(&choi).dot(&v_full);
    let herm_resid = operator::hermitian_residual(&q);
    let scale = max_abs(&q).max(1e-300);
    if herm_resid > 1e-8 * scale {
        return Err(Error::NotHermitian { residual: herm_resid });
    }
    let q = (&q + &dag(&q)).mapv(|z| z * 0.5);

    // Coefficients over provided traceless elements.
    let k = q.slice(ndarray::s![1..nel, 1..nel]).to_owned();

    // No-jump part from the border, over the full completed basis.
    let mut e_op = identity(dim).mapv(|z| z * (q[[0, 0]] / scalar(2.0 * dim as f64)));
    for a in 1..dim2 {
        let coeff = q[[a, 0]] / scalar(root_n);
        if coeff.norm() == 0.0 {
            continue;
        }
        let g = unvec(&v_full.column(a).to_owned(), dim)?;
        e_op = e_op + g.mapv(|z| z * coeff);
    }

    // Jump superoperator restricted to the provided block.
    let v_tl = v.slice(ndarray::s![.., 1..nel]).to_owned();
    let jump_choi = v_tl.dot(&k).dot(&dag(&v_tl));
    let jump = reshuffle(&jump_choi)?;

    let eye = identity(dim);
    let s_norm = operator::fro_norm(&s_op.matrix).max(1e-300);
    let rec_span = &jump
        + &kron(&e_op, &eye)
        + &kron(&eye, &e_op.mapv(|z| z.conj()));
    let span_residual = operator::fro_norm(&(&rec_span - &s_op.matrix)) / s_norm;

    // Lindblad normal form: H = i(E + M2/2), Hermitized and detraced.
    let m2 = unvec(&dag(&jump).dot(&vec_op(&eye)), dim)?;
    let h_raw = (e_op.clone() + m2.mapv(|z| z * 0.5)).mapv(|z| z * C64::new(0.0, 1.0));
    let mut h = (&h_raw + &dag(&h_raw)).mapv(|z| z * 0.5);
    let tr = operator::trace(&h) / scalar(dim as f64);
    for i in 0..dim {
        h[[i, i]] -= tr;
    }
    let anti = kron(&m2, &eye) + kron(&eye, &m2.t().to_owned());
    let comm = kron(&h, &eye) - kron(&eye, &h.t().to_owned());
    let rec_lind = &jump - &anti.mapv(|z| z * 0.5) - comm.mapv(|z| z * C64::new(0.0, 1.0));
    let lindblad_residual = operator::fro_norm(&(&rec_lind - &s_op.matrix)) / s_norm;

    if span_residual > GKS_SPAN_TOL {
        return Err(Error::BasisSpan { residual: span_residual });
    }

    Ok(CoefficientMatrix {
        kmatrix: k,
        hamiltonian: h,
        span_residual,
        lindblad_residual,
        supports: basis.supports(),
    })
}

/// One retained canonical term.
#[derive(Debug, Clone)]
pub struct CanonicalEntry {
    pub gamma: f64,
    pub omega: f64,
    pub jump: CMat,
}

/// Canonical (modular-diagonal) form of a detailed-balanced generator.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub entries: Vec<CanonicalEntry>,
    /// Worst multiset mismatch between weights at `omega` and `-omega`.
    pub pairing_residual: f64,
    /// Relative off-block coefficient mass across Bohr-frequency groups.
    pub off_block_residual: f64,
}

impl CanonicalForm {
    /// Rebuild the generator matrix from the retained entries.
    pub fn assemble(&self) -> CMat {
        let nel = self.entries.len();
        let mut k = zeros(nel);
        for (i, e) in self.entries.iter().enumerate() {
            k[[i, i]] = scalar(e.gamma * (-e.omega / 2.0).exp());
        }
        let jumps: Vec<CMat> = self.entries.iter().map(|e| e.jump.clone()).collect();
        assemble_gks(&k, &jumps)
    }
}

/// Weights below this fraction of the largest are dropped.
pub const GAMMA_DROP_TOL: f64 = 1e-10;

/// Extract the canonical form of a detailed-balanced generator with respect
/// to `sigma`. The coefficient matrix over the modular basis must be block
/// diagonal across Bohr-frequency groups; each block is diagonalized, so
/// degenerate frequencies are handled by rotating the jumps inside their
/// eigenspace.
pub fn canonical_form(s_op: &SuperOpMatrix, sigma: &CMat, tol: f64) -> Result<CanonicalForm> {
    let modular = modular_basis(sigma)?;
    let coeffs = gks_matrix(s_op, &GksBasis::Modular(&modular))?;
    let k = &coeffs.kmatrix;
    let k_norm = operator::fro_norm(k).max(1e-300);

    let h_norm = max_abs(&coeffs.hamiltonian);
    let scale = op_norm2(&s_op.matrix).max(1e-300);
    if h_norm > tol * scale {
        return Err(Error::NotDetailedBalanced(format!(
            "extracted Hamiltonian part has norm {h_norm:.3e}"
        )));
    }
    if coeffs.lindblad_residual > tol {
        return Err(Error::NotDetailedBalanced(format!(
            "generator is not in Lindblad form (residual {:.3e})",
            coeffs.lindblad_residual
        )));
    }

    // Off-block mass across frequency groups (indices shifted past identity).
    let group_of = {
        let mut map = vec![0usize; modular.len()];
        for (gi, g) in modular.groups.iter().enumerate() {
            for &idx in g {
                map[idx] = gi;
            }
        }
        map
    };
    let nel = modular.len();
    let mut off_sq = 0.0;
    for a in 1..nel {
        for b in 1..nel {
            if group_of[a] != group_of[b] {
                off_sq += k[[a - 1, b - 1]].norm_sqr();
            }
        }
    }
    let off_block_residual = off_sq.sqrt() / k_norm;
    if off_block_residual > tol {
        return Err(Error::NotDetailedBalanced(format!(
            "coefficients couple distinct Bohr frequencies (residual {off_block_residual:.3e})"
        )));
    }

    // Diagonalize each frequency block.
    let mut raw: Vec<CanonicalEntry> = Vec::new();
    let mut kappa_max = 0.0f64;
    for group in &modular.groups {
        let members: Vec<usize> = group.iter().cloned().filter(|&i| i >= 1).collect();
        if members.is_empty() {
            continue;
        }
        let omega = modular.omegas[members[0]];
        let m = members.len();
        let mut block = zeros(m);
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                block[[i, j]] = k[[a - 1, b - 1]];
            }
        }
        let (w, vecs) = hermitian_eig(&block)?;
        for m_idx in 0..m {
            let kappa = w[m_idx];
            kappa_max = kappa_max.max(kappa);
            if kappa == 0.0 {
                continue;
            }
            let mut jump = zeros(modular.hilbert_dim);
            for (i, &a) in members.iter().enumerate() {
                jump = jump + modular.elements[a].mapv(|z| z * vecs[[i, m_idx]]);
            }
            raw.push(CanonicalEntry { gamma: kappa * (omega / 2.0).exp(), omega, jump });
        }
    }

    let drop = GAMMA_DROP_TOL * kappa_max.max(1e-300);
    let mut entries = Vec::new();
    for e in raw {
        let kappa = e.gamma * (-e.omega / 2.0).exp();
        if kappa.abs() <= drop {
            continue;
        }
        if kappa < 0.0 {
            return Err(Error::NotDetailedBalanced(format!(
                "negative canonical weight {kappa:.3e}"
            )));
        }
        entries.push(e);
    }

    // gamma pairing: weights at omega match weights at -omega.
    let gamma_max = entries.iter().map(|e| e.gamma).fold(0.0f64, f64::max);
    let omega_scale = entries.iter().map(|e| e.omega.abs()).fold(0.0f64, f64::max).max(1.0);
    let mut pairing_residual = 0.0f64;
    for e in &entries {
        if e.omega.abs() <= OMEGA_GROUP_TOL * omega_scale {
            continue;
        }
        let mut partners: Vec<f64> = entries
            .iter()
            .filter(|o| (o.omega + e.omega).abs() <= OMEGA_GROUP_TOL * omega_scale)
            .map(|o| o.gamma)
            .collect();
        partners.sort_by(f64::total_cmp);
        let best = partners
            .iter()
            .map(|g| (g - e.gamma).abs())
            .fold(f64::INFINITY, f64::min);
        pairing_residual = pairing_residual.max(best / gamma_max.max(1e-300));
    }

    Ok(CanonicalForm { entries, pairing_residual, off_block_residual })
}

/// `||C C* - C* C|| / ||C||^2`: zero is necessary for detailed balance.
pub fn commutator_check(c: &CMat) -> f64 {
    let norm = op_norm2(c);
    if norm == 0.0 {
        return 0.0;
    }
    let conj = c.mapv(|z| z.conj());
    op_norm2(&(c.dot(&conj) - conj.dot(c))) / (norm * norm)
}
