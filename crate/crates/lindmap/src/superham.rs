//! The super-Hamiltonian `-Gamma_s^{-1/2} L Gamma_s^{1/2}` of a
//! detailed-balanced generator, built by three routes (dense conjugation,
//! paired normalized jumps, coefficient matrix over a Hermitian basis),
//! plus spectrum/kernel verification, locality decay profiles, and the
//! polynomial square-root approximation with its proven error bound.

use crate::basis::HermitianOperatorBasis;
use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::lindblad::{LindbladSpec, SuperOpMatrix};
use crate::operator::{
    self, dag, embed, hermitian_eig, hermitian_sqrt, identity, kron, max_abs,
    op_norm2, scalar, vec_op, zeros, CMat,
};
use crate::qdb::{commutator_check, gamma_superop, qdb_residual};
use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

/// Which construction produced a super-Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Direct conjugation `-Gamma^{-1/2} L Gamma^{1/2}`.
    Dense,
    /// Paired normalized jumps with positive weights.
    LocalJumps,
    /// Coefficient matrix over an orthonormal Hermitian basis.
    Basis,
}

/// Lightweight per-term metadata kept by the structured routes.
#[derive(Debug, Clone)]
pub struct TermInfo {
    pub support: Vec<usize>,
    pub strength: f64,
}

#[derive(Debug, Clone)]
pub struct SuperHamiltonian {
    pub matrix: CMat,
    pub route: Route,
    /// Terms with supports, empty for the dense route.
    pub terms: Vec<TermInfo>,
    /// Detailed-balance residual observed during construction, when the
    /// route computed one (dense route only).
    pub qdb_residual: Option<f64>,
}

/// Dense route: `H = -Gamma_s^{-1/2} S Gamma_s^{1/2}`. Computes the
/// detailed-balance residual as a warning signal but maps regardless.
pub fn map_dense(s_op: &SuperOpMatrix, sigma: &CMat, s: f64) -> Result<SuperHamiltonian> {
    let fwd = gamma_superop(sigma, s, 0.5)?;
    let bwd = gamma_superop(sigma, s, -0.5)?;
    let matrix = bwd.dot(&s_op.matrix).dot(&fwd).mapv(|z| -z);
    let residual = qdb_residual(s_op, sigma, s)?.direct;
    Ok(SuperHamiltonian {
        matrix,
        route: Route::Dense,
        terms: vec![],
        qdb_residual: Some(residual),
    })
}

/// Jump route: for linearly independent, unit-norm jumps with a total
/// adjoint pairing `pi` and positive weights `c_j`,
/// `H(rho) = -sum_j (sqrt(c_j c_pi(j)) L_j rho L_j† - (c_j/2){L_j†L_j, rho})`.
pub fn map_local_jumps(spec: &LindbladSpec) -> Result<SuperHamiltonian> {
    let dim = spec.lattice.dim();
    if spec.jumps.is_empty() {
        return Err(Error::InvalidInput("jump route needs at least one jump".into()));
    }
    if !spec.hamiltonian.is_empty() {
        return Err(Error::InvalidInput(
            "jump route applies to purely dissipative generators".into(),
        ));
    }
    let embedded: Vec<CMat> = spec
        .jumps
        .iter()
        .map(|j| embed(&j.local, &j.support, &spec.lattice))
        .collect::<Result<_>>()?;

    // normalization and total pairing
    for (j, (jump, full)) in spec.jumps.iter().zip(&embedded).enumerate() {
        let norm = operator::hs_inner(full, full).re;
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "jump {j} has Hilbert-Schmidt norm {norm:.6}, expected 1"
            )));
        }
        let partner = jump
            .partner
            .ok_or_else(|| Error::InvalidInput(format!("jump {j} lacks an adjoint partner")))?;
        if partner >= spec.jumps.len() {
            return Err(Error::InvalidInput(format!("jump {j} partner index out of range")));
        }
        let partner_full = &embedded[partner];
        if max_abs(&(&dag(full) - partner_full)) > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "jump {j}: partner is not its adjoint"
            )));
        }
    }

    // linear independence via the Gram matrix of vectorized jumps
    let m = embedded.len();
    let mut gram = Array2::<C64>::zeros((m, m));
    for a in 0..m {
        for b in 0..m {
            gram[[a, b]] = operator::hs_inner(&embedded[a], &embedded[b]);
        }
    }
    let (_, sv, _) = gram.svd(false, false)?;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 1e-10 * smax.max(1.0) {
        return Err(Error::InvalidInput(
            "jump operators are linearly dependent; the paired-jump form does not apply".into(),
        ));
    }

    let dim2 = dim * dim;
    let mut matrix = zeros(dim2);
    let eye = identity(dim);
    let mut terms = Vec::with_capacity(m);
    for (j, full) in embedded.iter().enumerate() {
        let cj = spec.jumps[j].weight;
        let cpi = spec.jumps[spec.jumps[j].partner.unwrap()].weight;
        let hop = (cj * cpi).sqrt();
        matrix = matrix - kron(full, &full.mapv(|z| z.conj())).mapv(|z| z * scalar(hop));
        let ldl = dag(full).dot(full);
        let anti = kron(&ldl, &eye) + kron(&eye, &ldl.t().to_owned());
        matrix = matrix + anti.mapv(|z| z * scalar(cj / 2.0));
        terms.push(TermInfo { support: spec.jumps[j].support.clone(), strength: hop });
    }
    Ok(SuperHamiltonian { matrix, route: Route::LocalJumps, terms, qdb_residual: None })
}

/// Basis route: for a coefficient matrix `C` (over the traceless elements of
/// `basis`) commuting with its conjugate,
/// `H(rho) = -sum_ab ((C C*)^{1/2}_ab P_a rho P_b - (1/2) C_ab {P_b P_a, rho})`.
pub fn map_basis(
    coeff: &CMat,
    basis: &HermitianOperatorBasis,
    commutator_tol: f64,
) -> Result<SuperHamiltonian> {
    let elements = basis.traceless();
    let nel = elements.len();
    if coeff.nrows() != nel || coeff.ncols() != nel {
        return Err(Error::DimensionMismatch { expected: nel, got: coeff.nrows() });
    }
    let comm = commutator_check(coeff);
    if comm > commutator_tol {
        return Err(Error::NonCommutingCoefficients { residual: comm });
    }
    let (w, _) = hermitian_eig(coeff)?;
    let min_eig = w.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eig = w.iter().cloned().fold(0.0f64, f64::max);
    if min_eig < -1e-9 * max_eig.max(1.0) {
        return Err(Error::NotPositiveSemiDefinite { value: min_eig, tol: 1e-9 });
    }

    let conj = coeff.mapv(|z| z.conj());
    let product = coeff.dot(&conj);
    let sqrt_cc = if operator::hermitian_residual(&product)
        <= operator::HERMITIAN_TOL * max_abs(&product).max(1.0)
    {
        psd_sqrt_gapped(&product)?
    } else {
        // commutation residual at the tolerance edge: symmetrize as
        // C^{1/2} C* C^{1/2}, which is Hermitian PSD by construction
        let half = psd_sqrt_gapped(coeff)?;
        psd_sqrt_gapped(&half.dot(&conj).dot(&half))?
    };

    let dim = basis.lattice.dim();
    let dim2 = dim * dim;
    let eye = identity(dim);
    let mut matrix = zeros(dim2);
    let mut terms = Vec::new();
    for a in 0..nel {
        for b in 0..nel {
            let hop = sqrt_cc[[a, b]];
            if hop.norm() > 1e-14 {
                matrix = matrix
                    - kron(&elements[a].matrix, &elements[b].matrix.mapv(|z| z.conj()))
                        .mapv(|z| z * hop);
            }
            let cab = coeff[[a, b]];
            if cab.norm() > 1e-14 {
                let pba = elements[b].matrix.dot(&elements[a].matrix);
                let anti = kron(&pba, &eye) + kron(&eye, &pba.t().to_owned());
                matrix = matrix + anti.mapv(|z| z * cab * scalar(0.5));
            }
            if hop.norm() > 1e-14 || cab.norm() > 1e-14 {
                let mut support = elements[a].support.clone();
                support.extend_from_slice(&elements[b].support);
                support.sort_unstable();
                support.dedup();
                terms.push(TermInfo { support, strength: hop.norm().max(cab.norm()) });
            }
        }
    }
    Ok(SuperHamiltonian { matrix, route: Route::Basis, terms, qdb_residual: None })
}

/// Spectral square root treating the spectrum as `{0} ∪ [lmin, lmax]`:
/// eigenvalues below `1e-10 lmax` count as zero. Rounding noise in the null
/// space would otherwise surface as `sqrt(eps)`-sized entries.
fn psd_sqrt_gapped(a: &CMat) -> Result<CMat> {
    let (w, v) = hermitian_eig(a)?;
    let wmax = w.iter().cloned().fold(0.0f64, f64::max);
    if wmax <= 0.0 {
        return Ok(zeros(a.nrows()));
    }
    let cut = 1e-10 * wmax;
    for &l in w.iter() {
        if l < -cut {
            return Err(Error::NotPositiveSemiDefinite { value: l, tol: cut });
        }
    }
    let mut scaled = v.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        let r = if w[j] > cut { w[j].sqrt() } else { 0.0 };
        col.mapv_inplace(|z| z * scalar(r));
    }
    let out = scaled.dot(&dag(&v));
    Ok((&out + &dag(&out)).mapv(|z| z * 0.5))
}

/// Verification report for one `(L, H, sigma)` triple.
#[derive(Debug, Clone)]
pub struct MappingReport {
    /// Worst pairwise distance after lexicographic sorting of `spec(H)`
    /// against `-spec(L)`.
    pub spectrum_distance: f64,
    /// `||H vec(sqrt(sigma))||`.
    pub kernel_residual: f64,
    /// `max |H - H†|`.
    pub hermiticity_residual: f64,
    /// Smallest eigenvalue of the Hermitized `H`.
    pub min_eigenvalue: f64,
    pub gap_h: f64,
    pub gap_l: f64,
}

impl MappingReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.spectrum_distance <= tol
            && self.kernel_residual <= tol
            && self.hermiticity_residual <= tol
            && self.min_eigenvalue >= -tol
    }
}

/// Multiset distance between two spectra: lexicographic sort by `(Re, Im)`
/// then the worst matched-pair distance. Stable under degeneracies.
pub fn spectrum_multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut a: Vec<C64> = a.to_vec();
    let mut b: Vec<C64> = b.to_vec();
    operator::sort_complex(&mut a);
    operator::sort_complex(&mut b);
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn verify_mapping(
    s_op: &SuperOpMatrix,
    h: &SuperHamiltonian,
    sigma: &CMat,
) -> Result<MappingReport> {
    let spec_l = operator::general_spectrum(&s_op.matrix)?;
    let spec_h = operator::general_spectrum(&h.matrix)?;
    let negated: Vec<C64> = spec_l.iter().map(|z| -z).collect();
    let spectrum_distance = spectrum_multiset_distance(&spec_h, &negated);

    let root = hermitian_sqrt(sigma)?;
    let kernel_residual = {
        let v = h.matrix.dot(&vec_op(&root));
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };

    let hermiticity_residual = operator::hermitian_residual(&h.matrix);
    let sym = (&h.matrix + &dag(&h.matrix)).mapv(|z| z * 0.5);
    let (w, _) = hermitian_eig(&sym)?;
    let min_eigenvalue = w.iter().cloned().fold(f64::INFINITY, f64::min);

    let scale = op_norm2(&s_op.matrix).max(1e-300);
    let thr = 1e-8 * scale;
    let gap_of = |spec: &[C64]| -> f64 {
        spec.iter()
            .filter(|z| z.norm() > thr)
            .map(|z| z.re.abs())
            .fold(f64::INFINITY, f64::min)
    };
    Ok(MappingReport {
        spectrum_distance,
        kernel_residual,
        hermiticity_residual,
        min_eigenvalue,
        gap_h: gap_of(&spec_h),
        gap_l: gap_of(&spec_l),
    })
}

/// Entrywise decay of a coefficient-indexed matrix against support distance.
#[derive(Debug, Clone)]
pub struct DecayProfile {
    /// `per_distance[r]` = max `|M_ab|` over index pairs whose supports sit
    /// at ring distance `r`; length `floor(n/2) + 1`.
    pub per_distance: Vec<f64>,
    /// Exponential fit `c1 e^{-c2 r}` over `1 <= r <= floor(n/4)`.
    pub exp_fit: Option<DecayFit>,
    /// Power-law fit `c r^{-p}` on the same window (log-log).
    pub poly_fit: Option<DecayFit>,
    /// Smallest nonzero and largest eigenvalue of `M M†`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Locality used in the proven bound.
    pub k: usize,
    /// True when every entry beyond distance zero is below 1e-14.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub prefactor: f64,
    pub rate: f64,
    /// Coefficient of determination of the linearized fit.
    pub r_squared: f64,
}

impl DecayProfile {
    /// The proven bound on `|sqrt(M M†)_ab|` at support distance `r`:
    /// with `m(r)` the largest integer with `2 k m < r`,
    /// `sqrt(lambda_max) e^{-m(r) lambda_min / lambda_max}`.
    pub fn proven_bound_at(&self, r: usize) -> f64 {
        if self.lambda_max == 0.0 {
            return 0.0;
        }
        let m = if r == 0 { 0 } else { (r + 2 * self.k - 1) / (2 * self.k) - 1 };
        self.lambda_max.sqrt() * (-(m as f64) * self.lambda_min / self.lambda_max).exp()
    }

    /// Smooth exponential envelope of the proven bound,
    /// `e sqrt(lambda_max) e^{-r lambda_min / (2 k lambda_max)}`.
    pub fn bound_curve_at(&self, r: usize) -> f64 {
        if self.lambda_max == 0.0 {
            return 0.0;
        }
        let tau = self.lambda_min / self.lambda_max;
        std::f64::consts::E
            * self.lambda_max.sqrt()
            * (-(r as f64) * tau / (2.0 * self.k as f64)).exp()
    }
}

fn linear_fit(points: &[(f64, f64)]) -> Option<DecayFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 =
        points.iter().map(|p| (p.1 - (intercept + slope * p.0)).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some(DecayFit { prefactor: intercept.exp(), rate: -slope, r_squared })
}

/// Profile the entrywise decay of `m` whose rows/columns are indexed by
/// operators with the given supports on `lattice`; `k` is the locality of
/// the underlying coefficient sparsity (used only in the reported bound).
pub fn decay_profile(
    m: &CMat,
    supports: &[Vec<usize>],
    lattice: &LatticeGeometry,
    k: usize,
) -> Result<DecayProfile> {
    let nel = supports.len();
    if m.nrows() != nel || m.ncols() != nel {
        return Err(Error::DimensionMismatch { expected: nel, got: m.nrows() });
    }
    let n = lattice.sites();
    let rmax = n / 2;
    let mut per_distance = vec![0.0f64; rmax + 1];
    for a in 0..nel {
        for b in 0..nel {
            let r = lattice.dist_sets(&supports[a], &supports[b]);
            per_distance[r] = per_distance[r].max(m[[a, b]].norm());
        }
    }

    let gram = m.dot(&dag(m));
    let sym = (&gram + &dag(&gram)).mapv(|z| z * 0.5);
    let (w, _) = hermitian_eig(&sym)?;
    let lambda_max = w.iter().cloned().fold(0.0f64, f64::max);
    let lambda_min = w
        .iter()
        .cloned()
        .filter(|&x| x > 1e-10 * lambda_max)
        .fold(f64::INFINITY, f64::min)
        .min(lambda_max);

    // ring wrap contaminates the tail, fit on r in [1, n/4]
    let fit_max = (n / 4).max(1).min(rmax);
    let exp_points: Vec<(f64, f64)> = (1..=fit_max)
        .filter(|&r| per_distance[r] > 1e-14)
        .map(|r| (r as f64, per_distance[r].ln()))
        .collect();
    let poly_points: Vec<(f64, f64)> = (1..=fit_max)
        .filter(|&r| per_distance[r] > 1e-14)
        .map(|r| ((r as f64).ln(), per_distance[r].ln()))
        .collect();
    let degenerate = per_distance[1..].iter().all(|&x| x < 1e-14);

    Ok(DecayProfile {
        per_distance,
        exp_fit: if degenerate { None } else { linear_fit(&exp_points) },
        poly_fit: if degenerate { None } else { linear_fit(&poly_points) },
        lambda_min: if lambda_min.is_finite() { lambda_min } else { 0.0 },
        lambda_max,
        k,
        degenerate,
    })
}

/// `P_m(A)` with `P_m(z) = z Q_m(z)` and `Q_m` the degree-`m-1` truncation
/// of the binomial series for `1/sqrt(z)` around `lambda_max`, together
/// with the measured error and the proven bound
/// `sqrt(lambda_max) e^{-m lambda_min / lambda_max}`.
#[derive(Debug, Clone)]
pub struct SqrtPolyResult {
    pub value: CMat,
    pub error: f64,
    pub bound: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn sqrt_poly(a: &CMat, m: usize) -> Result<SqrtPolyResult> {
    if m < 1 {
        return Err(Error::InvalidInput("polynomial degree must be at least 1".into()));
    }
    let (w, v) = hermitian_eig(a)?;
    let mut lam = Vec::with_capacity(w.len());
    for &l in w.iter() {
        if l < -operator::PSD_CLAMP {
            return Err(Error::NotPositiveSemiDefinite { value: l, tol: operator::PSD_CLAMP });
        }
        lam.push(l.max(0.0));
    }
    let lambda_max = lam.iter().cloned().fold(0.0f64, f64::max);
    if lambda_max == 0.0 {
        return Ok(SqrtPolyResult {
            value: zeros(a.nrows()),
            error: 0.0,
            bound: 0.0,
            lambda_min: 0.0,
            lambda_max: 0.0,
        });
    }
    let lambda_min = lam
        .iter()
        .cloned()
        .filter(|&x| x > 1e-10 * lambda_max)
        .fold(f64::INFINITY, f64::min)
        .min(lambda_max);

    // series coefficients of 1/sqrt(1+u): alpha_0 = 1,
    // alpha_j = -alpha_{j-1} (2j-1)/(2j)
    let mut alphas = Vec::with_capacity(m);
    let mut alpha = 1.0f64;
    for j in 0..m {
        if j > 0 {
            alpha *= -((2 * j - 1) as f64) / ((2 * j) as f64);
        }
        alphas.push(alpha);
    }
    let p_at = |z: f64| -> f64 {
        let u = z / lambda_max - 1.0;
        // Horner for Q_m
        let mut q = 0.0;
        for &c in alphas.iter().rev() {
            q = q * u + c;
        }
        z * q / lambda_max.sqrt()
    };

    let p_vals: Vec<f64> = lam.iter().map(|&z| p_at(z)).collect();
    let error = lam
        .iter()
        .zip(&p_vals)
        .map(|(&z, &p)| (z.sqrt() - p).abs())
        .fold(0.0, f64::max);
    let bound = lambda_max.sqrt() * (-(m as f64) * lambda_min / lambda_max).exp();
    if error > bound * (1.0 + 1e-6) {
        return Err(Error::InvariantViolated(format!(
            "polynomial sqrt error {error:.6e} exceeds proven bound {bound:.6e}"
        )));
    }

    let mut scaled = v.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        col.mapv_inplace(|z| z * scalar(p_vals[j]));
    }
    let value = scaled.dot(&dag(&v));
    Ok(SqrtPolyResult { value, error, bound, lambda_min, lambda_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{assemble, JumpTerm, LindbladSpec};
    use crate::operator::{hs_inner, pauli, sigma_minus, sigma_plus, ONE, ZERO};
    use crate::qdb::{assemble_gks, gks_matrix, GksBasis};
    use crate::random;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dense_map_on_uniform_sigma_is_minus_generator() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let mut rng = random::rng(3);
        let spec = random::local_spec(&lat, 1, 2, 1, &mut rng);
        let s = assemble(&spec).unwrap();
        let sigma = identity(2).mapv(|z| z * scalar(0.5));
        let h = map_dense(&s, &sigma, 0.6).unwrap();
        assert!(max_abs(&(&h.matrix + &s.matrix)) < 1e-12);
    }

    /// Thermal qubit pair: jumps sigma^- and sigma^+ with weights w_down,
    /// w_up satisfying detailed balance against diag(p, 1-p).
    fn thermal_qubit(w_down: f64, w_up: f64) -> (SuperOpMatrix, CMat) {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![
                JumpTerm { local: sigma_minus(), support: vec![0], weight: w_down, partner: Some(1) },
                JumpTerm { local: sigma_plus(), support: vec![0], weight: w_up, partner: Some(0) },
            ],
            hamiltonian: vec![],
            locality: 1,
        };
        let p = w_down / (w_down + w_up);
        let sigma = ndarray::array![[scalar(p), ZERO], [ZERO, scalar(1.0 - p)]];
        (assemble(&spec).unwrap(), sigma)
    }

    #[test]
    fn dense_map_matches_hand_built_thermal_qubit() {
        let (w_down, w_up) = (3.0, 1.0);
        let (s, sigma) = thermal_qubit(w_down, w_up);
        let h = map_dense(&s, &sigma, 1.0).unwrap();
        assert!(h.qdb_residual.unwrap() < 1e-10);

        // hand-built: -sqrt(w_down w_up)(sm ⊗ sm + sp ⊗ sp)
        //             + w_down/2 (n⊗1 + 1⊗n) + w_up/2 ((1-n)⊗1 + 1⊗(1-n))
        let sm = sigma_minus();
        let sp = sigma_plus();
        let nn = crate::operator::number_op();
        let eye = identity(2);
        let hole = &eye - &nn;
        let hop = (w_down * w_up).sqrt();
        let want = kron(&sm, &sm).mapv(|z| z * scalar(-hop))
            + kron(&sp, &sp).mapv(|z| z * scalar(-hop))
            + (kron(&nn, &eye) + kron(&eye, &nn)).mapv(|z| z * scalar(w_down / 2.0))
            + (kron(&hole, &eye) + kron(&eye, &hole)).mapv(|z| z * scalar(w_up / 2.0));
        assert!(max_abs(&(&h.matrix - &want)) < 1e-10);
    }

    #[test]
    fn dense_map_is_s_independent_on_qdb_inputs() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let mut rng = random::rng(7);
        let inst = random::qdb_instance(&lat, &mut rng);
        let h0 = map_dense(&inst.superop, &inst.sigma, 0.0).unwrap();
        for s in [0.3, 1.0] {
            let hs = map_dense(&inst.superop, &inst.sigma, s).unwrap();
            assert!(max_abs(&(&hs.matrix - &h0.matrix)) < 1e-9);
        }
    }

    #[test]
    fn dense_map_equals_negated_deformed_family_at_half() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let mut rng = random::rng(11);
        let inst = random::qdb_instance(&lat, &mut rng);
        let h = map_dense(&inst.superop, &inst.sigma, 0.4).unwrap();
        let lx = crate::qdb::deformed_family(&inst.superop, &inst.sigma, 0.4, 0.5).unwrap();
        assert!(max_abs(&(&h.matrix + &lx.matrix)) < 1e-10);
    }

    #[test]
    fn jump_route_hermitian_jump_gives_minus_generator() {
        // L = L† self-paired: sqrt(c c) = c, so H = -L
        let lat = LatticeGeometry::qubits(1).unwrap();
        let root2 = 2.0f64.sqrt();
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![JumpTerm {
                local: pauli('Z').mapv(|z| z / scalar(root2)),
                support: vec![0],
                weight: 0.9,
                partner: Some(0),
            }],
            hamiltonian: vec![],
            locality: 1,
        };
        let s = assemble(&spec).unwrap();
        let h = map_local_jumps(&spec).unwrap();
        assert!(max_abs(&(&h.matrix + &s.matrix)) < 1e-12);
    }

    #[test]
    fn jump_route_agrees_with_dense_on_thermal_pair() {
        let (w_down, w_up) = (2.0, 0.5);
        let lat = LatticeGeometry::qubits(1).unwrap();
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![
                JumpTerm { local: sigma_minus(), support: vec![0], weight: w_down, partner: Some(1) },
                JumpTerm { local: sigma_plus(), support: vec![0], weight: w_up, partner: Some(0) },
            ],
            hamiltonian: vec![],
            locality: 1,
        };
        let s = assemble(&spec).unwrap();
        let p = w_down / (w_down + w_up);
        let sigma = ndarray::array![[scalar(p), ZERO], [ZERO, scalar(1.0 - p)]];
        let dense = map_dense(&s, &sigma, 1.0).unwrap();
        let jumps = map_local_jumps(&spec).unwrap();
        assert!(max_abs(&(&dense.matrix - &jumps.matrix)) < 1e-9);
        assert_eq!(jumps.terms.len(), 2);
    }

    #[test]
    fn jump_route_rejects_defective_specs() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        // unnormalized jump
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![JumpTerm {
                local: sigma_minus().mapv(|z| z * scalar(2.0)),
                support: vec![0],
                weight: 1.0,
                partner: Some(0),
            }],
            hamiltonian: vec![],
            locality: 1,
        };
        assert!(map_local_jumps(&spec).is_err());
        // missing pairing
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![JumpTerm {
                local: sigma_minus(),
                support: vec![0],
                weight: 1.0,
                partner: None,
            }],
            hamiltonian: vec![],
            locality: 1,
        };
        assert!(map_local_jumps(&spec).is_err());
        // linearly dependent jumps
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![
                JumpTerm { local: sigma_minus(), support: vec![0], weight: 1.0, partner: Some(1) },
                JumpTerm { local: sigma_plus(), support: vec![0], weight: 1.0, partner: Some(0) },
                JumpTerm { local: sigma_minus(), support: vec![0], weight: 0.5, partner: Some(3) },
                JumpTerm { local: sigma_plus(), support: vec![0], weight: 0.5, partner: Some(2) },
            ],
            hamiltonian: vec![],
            locality: 1,
        };
        assert!(map_local_jumps(&spec).is_err());
    }

    #[test]
    fn basis_route_real_diagonal_coefficients_give_minus_generator() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let basis = random::complete_pauli_basis(&lat);
        let mut c = zeros(3);
        for (i, w) in [0.7, 0.2, 1.1].iter().enumerate() {
            c[[i, i]] = scalar(*w);
        }
        let elements: Vec<CMat> = basis.traceless().iter().map(|e| e.matrix.clone()).collect();
        let s = assemble_gks(&c, &elements);
        let h = map_basis(&c, &basis, 1e-8).unwrap();
        assert!(max_abs(&(&h.matrix + &s)) < 1e-10);
    }

    #[test]
    fn basis_route_agrees_with_dense_on_qdb_instances() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let mut rng = random::rng(13);
        for _ in 0..3 {
            let inst = random::qdb_instance(&lat, &mut rng);
            let basis = random::complete_pauli_basis(&lat);
            let coeffs = gks_matrix(&inst.superop, &GksBasis::Hermitian(&basis)).unwrap();
            let dense = map_dense(&inst.superop, &inst.sigma, 0.5).unwrap();
            let via_basis = map_basis(&coeffs.kmatrix, &basis, 1e-8).unwrap();
            assert!(max_abs(&(&dense.matrix - &via_basis.matrix)) < 1e-9);
        }
    }

    #[test]
    fn basis_route_rejects_non_commuting_coefficients() {
        let lat = LatticeGeometry::qubits(1).unwrap();
        let basis = random::complete_pauli_basis(&lat);
        let mut rng = random::rng(17);
        // generic complex PSD almost surely fails [C, C*] = 0
        let c = random::psd(3, &mut rng);
        assert!(matches!(
            map_basis(&c, &basis, 1e-8),
            Err(Error::NonCommutingCoefficients { .. })
        ));
    }

    #[test]
    fn verify_mapping_on_qdb_instance() {
        let lat = LatticeGeometry::qubits(2).unwrap();
        let mut rng = random::rng(19);
        let inst = random::qdb_instance(&lat, &mut rng);
        let h = map_dense(&inst.superop, &inst.sigma, 1.0).unwrap();
        let report = verify_mapping(&inst.superop, &h, &inst.sigma).unwrap();
        assert!(report.spectrum_distance < 1e-8, "{}", report.spectrum_distance);
        assert!(report.kernel_residual < 1e-8);
        assert!(report.hermiticity_residual < 1e-9);
        assert!(report.min_eigenvalue > -1e-8);
        assert!((report.gap_h - report.gap_l).abs() < 1e-7);

        // negative control: wrong sigma leaves a big kernel residual
        let mut rng2 = random::rng(991);
        let wrong = random::full_rank_density(4, &mut rng2);
        let bad = verify_mapping(&inst.superop, &h, &wrong).unwrap();
        assert!(bad.kernel_residual > 1e-3);
    }

    #[test]
    fn psd_and_unique_kernel_for_unique_steady_state() {
        let (s, sigma) = thermal_qubit(2.0, 1.0);
        let h = map_dense(&s, &sigma, 1.0).unwrap();
        let sym = (&h.matrix + &dag(&h.matrix)).mapv(|z| z * 0.5);
        let (w, _) = hermitian_eig(&sym).unwrap();
        assert!(w[0] > -1e-10);
        let zero_count = w.iter().filter(|&&x| x.abs() < 1e-10).count();
        assert_eq!(zero_count, 1);
        // kernel vector is vec(sqrt(sigma))
        let root = hermitian_sqrt(&sigma).unwrap();
        let v = vec_op(&root);
        let hv = h.matrix.dot(&v);
        assert!(hv.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    }

    /// Independent matrix square root: Denman-Beavers iteration.
    fn sqrt_denman_beavers(a: &CMat) -> CMat {
        use ndarray_linalg::Inverse;
        let mut y = a.clone();
        let mut z = identity(a.nrows());
        for _ in 0..60 {
            let y_next = (&y + &z.inv().unwrap()).mapv(|w| w * 0.5);
            let z_next = (&z + &y.inv().unwrap()).mapv(|w| w * 0.5);
            y = y_next;
            z = z_next;
        }
        y
    }

    #[test]
    fn decay_profile_banded_coefficients_respect_bound() {
        // random real banded PSD C on a 60-site ring of singleton supports
        let n = 60;
        // the lattice only provides the ring metric here
        let lat = LatticeGeometry::new(n, 2).unwrap();
        let mut rng = random::rng(23);
        let mut band = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for off in 0..2usize {
                let j = (i + off) % n;
                let v = scalar(rand::Rng::random_range(&mut rng, 0.2..1.0));
                band[[i, j]] = v;
            }
        }
        let c = band.dot(&dag(&band)); // bandwidth 2, PSD, real
        let supports: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let sqrt_c = hermitian_sqrt(&c).unwrap();
        // oracle: Denman-Beavers square root agrees
        let oracle = sqrt_denman_beavers(&(&c + &identity(n).mapv(|z| z * scalar(1e-12))));
        assert!(max_abs(&(&sqrt_c - &oracle)) < 1e-8);

        let profile = decay_profile(&sqrt_c, &supports, &lat, 2).unwrap();
        for r in 0..=n / 2 {
            assert!(
                profile.per_distance[r] <= profile.proven_bound_at(r) * (1.0 + 1e-9),
                "r={r}: {} vs bound {}",
                profile.per_distance[r],
                profile.proven_bound_at(r)
            );
        }
        let fit = profile.exp_fit.unwrap();
        assert!(fit.rate > 0.0);
    }

    #[test]
    fn decay_profile_diagonal_matrix_is_degenerate() {
        let n = 12;
        let lat = LatticeGeometry::new(n, 2).unwrap();
        let mut diag = zeros(n);
        for i in 0..n {
            diag[[i, i]] = scalar(1.0 + i as f64);
        }
        let supports: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let profile = decay_profile(&diag, &supports, &lat, 1).unwrap();
        assert!(profile.degenerate);
        assert!(profile.per_distance[1..].iter().all(|&x| x < 1e-14));
    }

    #[test]
    fn sqrt_poly_identity_is_exact() {
        let eye = identity(5);
        for m in [1, 3, 10] {
            let res = sqrt_poly(&eye, m).unwrap();
            assert!(res.error < 1e-14);
            assert!(max_abs(&(&res.value - &eye)) < 1e-12);
        }
    }

    #[test]
    fn sqrt_poly_two_level_bound() {
        // A = diag(1, 4): bound 2 e^{-m/4}
        let a = ndarray::array![[ONE, ZERO], [ZERO, scalar(4.0)]];
        for m in 1..=40 {
            let res = sqrt_poly(&a, m).unwrap();
            let bound = 2.0 * (-(m as f64) / 4.0).exp();
            assert_abs_diff_eq!(res.bound, bound, epsilon = 1e-12);
            assert!(res.error <= bound * (1.0 + 1e-6), "m={m}: {} > {}", res.error, bound);
        }
    }

    #[test]
    fn sqrt_poly_error_decays_at_condition_rate() {
        let mut rng = random::rng(29);
        let a = random::psd_with_condition(30, 10.0, &mut rng);
        let mut logs = Vec::new();
        for m in (4..=40).step_by(4) {
            let res = sqrt_poly(&a, m).unwrap();
            if res.error > 1e-14 {
                logs.push((m as f64, res.error.ln()));
            }
        }
        let fit = linear_fit(&logs).unwrap();
        // fitted decay rate at least lambda_min / lambda_max = 1/10
        assert!(fit.rate >= 0.1 - 1e-6, "rate {}", fit.rate);
    }

    #[test]
    fn spectrum_multiset_distance_detects_mismatch() {
        let a = vec![C64::new(1.0, 0.0), C64::new(2.0, 1.0)];
        let b = vec![C64::new(2.0, 1.0), C64::new(1.0, 0.0)];
        assert!(spectrum_multiset_distance(&a, &b) < 1e-15);
        let c = vec![C64::new(1.0, 0.0), C64::new(2.5, 1.0)];
        assert!((spectrum_multiset_distance(&a, &c) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hs_norms_of_jump_terms_checked() {
        // embedded norm includes identity factors: sigma^- on 2 qubits has
        // norm sqrt(2), so the raw matrix must be rejected
        let lat = LatticeGeometry::qubits(2).unwrap();
        let spec = LindbladSpec {
            lattice: lat,
            jumps: vec![JumpTerm {
                local: sigma_minus(),
                support: vec![0],
                weight: 1.0,
                partner: Some(0),
            }],
            hamiltonian: vec![],
            locality: 1,
        };
        assert!(map_local_jumps(&spec).is_err());
        let fixed = LindbladSpec {
            lattice: lat,
            jumps: vec![
                JumpTerm {
                    local: sigma_minus().mapv(|z| z / scalar(2.0f64.sqrt())),
                    support: vec![0],
                    weight: 1.0,
                    partner: Some(1),
                },
                JumpTerm {
                    local: sigma_plus().mapv(|z| z / scalar(2.0f64.sqrt())),
                    support: vec![0],
                    weight: 1.0,
                    partner: Some(0),
                },
            ],
            hamiltonian: vec![],
            locality: 1,
        };
        let h = map_local_jumps(&fixed).unwrap();
        assert_eq!(h.route, Route::LocalJumps);
        let _ = hs_inner(&h.matrix, &h.matrix);
    }
}
