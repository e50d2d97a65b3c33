//! Lindbladian specs, vectorized superoperator assembly, spectra and gaps,
//! steady-state kernels, and time evolution.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::operator::{
    self, dag, embed, expm, general_spectrum, identity, kron, max_abs, op_norm2, scalar, trace,
    unvec, vec_op, zeros, CMat, ONE,
};
use ndarray::Array1;
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64 as C64;

/// Hard cap on the vectorized dimension `N^2` accepted by `assemble`.
pub const DEFAULT_SUPEROP_CAP: usize = 1 << 14;

/// Default scale-relative threshold below which an eigenvalue or singular
/// value counts as zero.
pub const ZERO_THRESHOLD_SCALE: f64 = 1e-8;

/// One dissipative term: a local jump matrix with its support (slowest site
/// first), a positive weight, and an optional index of the adjoint partner
/// jump within the owning spec.
#[derive(Debug, Clone)]
pub struct JumpTerm {
    pub local: CMat,
    pub support: Vec<usize>,
    pub weight: f64,
    pub partner: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub local: CMat,
    pub support: Vec<usize>,
}

/// A geometrically local Lindbladian: weighted jumps plus optional
/// Hamiltonian terms on a ring.
#[derive(Debug, Clone)]
pub struct LindbladSpec {
    pub lattice: LatticeGeometry,
    pub jumps: Vec<JumpTerm>,
    pub hamiltonian: Vec<HamiltonianTerm>,
    /// Declared locality: every support must fit a contiguous window of
    /// this many sites.
    pub locality: usize,
}

/// Dense matrix of the vectorized generator, acting on `vec(A)`.
#[derive(Debug, Clone)]
pub struct SuperOpMatrix {
    pub matrix: CMat,
    pub provenance: String,
}

impl SuperOpMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Hilbert-space side `N` with `N^2` the matrix side.
    pub fn hilbert_dim(&self) -> usize {
        (self.dim() as f64).sqrt().round() as usize
    }

    /// Apply to an operator: `unvec(S vec(A))`.
    pub fn apply(&self, a: &CMat) -> Result<CMat> {
        let n = self.hilbert_dim();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
        }
        unvec(&self.matrix.dot(&vec_op(a)), n)
    }

    /// Estimated spectral norm, used for scale-relative thresholds.
    pub fn norm_scale(&self) -> f64 {
        op_norm2(&self.matrix)
    }
}

/// Spectrum, gap, and kernel bookkeeping for one assembled generator.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues sorted by `(Re, Im)`.
    pub eigenvalues: Vec<C64>,
    /// `min |Re(lambda)|` over eigenvalues treated as nonzero.
    pub gap: f64,
    /// Number of eigenvalues with `|lambda| <= zero_threshold`.
    pub zero_count: usize,
    /// True when every eigenvalue was classified as zero.
    pub no_nonzero: bool,
    pub max_real_part: f64,
    /// Fact check: spectrum confined to the closed left half-plane.
    pub left_half_plane_ok: bool,
    pub zero_threshold: f64,
}

#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    /// Physical states recovered from the kernel: Hermitian, PSD within
    /// tolerance, trace one.
    pub states: Vec<CMat>,
    pub kernel_dim: usize,
    pub unique: bool,
}

/// The superoperator of `A -> L A L† - (1/2){L†L, A}` for a full-space `L`.
pub fn dissipator_superop(l: &CMat) -> CMat {
    let dim = l.nrows();
    let ld = dag(l);
    let ldl = ld.dot(l);
    let eye = identity(dim);
    let jump = kron(l, &l.mapv(|z| z.conj()));
    let anti = kron(&ldl, &eye) + kron(&eye, &ldl.t().to_owned());
    jump - anti.mapv(|z| z * 0.5)
}

/// The superoperator of `A -> -i[H, A]`.
pub fn hamiltonian_superop(h: &CMat) -> CMat {
    let dim = h.nrows();
    let eye = identity(dim);
    let comm = kron(h, &eye) - kron(&eye, &h.t().to_owned());
    comm.mapv(|z| z * C64::new(0.0, -1.0))
}

/// Assemble the dense vectorized generator
/// `sum_j w_j (L_j ⊗ L_j* - (1/2) L_j†L_j ⊗ 1 - (1/2) 1 ⊗ (L_j†L_j)^T)
///  - i (H ⊗ 1 - 1 ⊗ H^T)`.
pub fn assemble(spec: &LindbladSpec) -> Result<SuperOpMatrix> {
    assemble_with_cap(spec, DEFAULT_SUPEROP_CAP)
}

pub fn assemble_with_cap(spec: &LindbladSpec, cap: usize) -> Result<SuperOpMatrix> {
    let dim2 = spec.lattice.superop_dim();
    if dim2 > cap {
        return Err(Error::DimensionCap { dim: dim2, cap });
    }
    let mut s = zeros(dim2);
    for jump in &spec.jumps {
        if jump.weight <= 0.0 {
            return Err(Error::InvalidInput("jump weights must be positive".into()));
        }
        let full = embed(&jump.local, &jump.support, &spec.lattice)?;
        s = s + dissipator_superop(&full).mapv(|z| z * scalar(jump.weight));
    }
    for term in &spec.hamiltonian {
        let full = embed(&term.local, &term.support, &spec.lattice)?;
        s = s + hamiltonian_superop(&full);
    }
    Ok(SuperOpMatrix { matrix: s, provenance: "assembled spec".into() })
}

/// Spectrum with the gap of the generator: `min |Re(lambda)|` over
/// eigenvalues of modulus above `zero_threshold` (default
/// `1e-8 * ||S||`).
pub fn spectrum_and_gap(s: &SuperOpMatrix, zero_threshold: Option<f64>) -> Result<SpectrumReport> {
    let eigenvalues = general_spectrum(&s.matrix)?;
    let scale = s.norm_scale();
    let thr = zero_threshold.unwrap_or(ZERO_THRESHOLD_SCALE * scale);
    let mut gap = f64::INFINITY;
    let mut zero_count = 0;
    let mut max_real_part = f64::NEG_INFINITY;
    for z in &eigenvalues {
        max_real_part = max_real_part.max(z.re);
        if z.norm() <= thr {
            zero_count += 1;
        } else {
            gap = gap.min(z.re.abs());
        }
    }
    let no_nonzero = zero_count == eigenvalues.len();
    Ok(SpectrumReport {
        eigenvalues,
        gap: if no_nonzero { 0.0 } else { gap },
        zero_count,
        no_nonzero,
        max_real_part,
        left_half_plane_ok: max_real_part <= 1e-9 * scale.max(1.0),
        zero_threshold: thr,
    })
}

/// Orthonormal kernel basis via SVD, post-processed into physical states:
/// kernel matrices are split into Hermitian and anti-Hermitian parts (the
/// kernel is closed under adjoints for hermiticity-preserving generators),
/// re-orthonormalized, and kept when PSD within tolerance after trace
/// normalization.
pub fn steady_states(
    s: &SuperOpMatrix,
    zero_threshold: Option<f64>,
) -> Result<SteadyStateReport> {
    let n = s.hilbert_dim();
    let scale = s.norm_scale();
    let thr = zero_threshold.unwrap_or(ZERO_THRESHOLD_SCALE * scale.max(1e-300));
    let (_, sv, vt) = s.matrix.svd(false, true)?;
    let vt = vt.expect("right singular vectors");
    let mut kernel: Vec<CMat> = Vec::new();
    for (i, &sigma) in sv.iter().enumerate() {
        if sigma <= thr {
            let row = vt.row(i);
            let v: Array1<C64> = row.mapv(|z| z.conj());
            kernel.push(unvec(&v, n)?);
        }
    }
    let kernel_dim = kernel.len();
    if kernel_dim == 0 {
        return Err(Error::InvariantViolated(
            "no kernel vector found below the zero threshold; a Lindbladian always has \
             at least one steady state, so the threshold is off"
                .into(),
        ));
    }

    // Hermitian candidates from the kernel.
    let mut herm: Vec<CMat> = Vec::new();
    for m in &kernel {
        let h = (m + &dag(m)).mapv(|z| z * 0.5);
        let a = ((m - &dag(m)).mapv(|z| z * C64::new(0.0, -0.5))).to_owned();
        for cand in [h, a] {
            if max_abs(&cand) < 1e-12 {
                continue;
            }
            // Gram-Schmidt against what we already kept.
            let mut reduced = cand;
            for kept in &herm {
                let overlap = operator::hs_inner(kept, &reduced);
                reduced = reduced - kept.mapv(|z| z * overlap);
            }
            let norm = operator::fro_norm(&reduced);
            if norm > 1e-9 {
                herm.push(reduced.mapv(|z| z / scalar(norm)));
            }
        }
    }

    let mut states = Vec::new();
    for h in &herm {
        let tr = trace(h).re;
        if tr.abs() < 1e-10 {
            continue;
        }
        let candidate = h.mapv(|z| z / scalar(tr));
        if let Ok((w, _)) = operator::hermitian_eig(&candidate) {
            let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = w.iter().cloned().fold(0.0f64, f64::max);
            if min >= -1e-8 * max.max(1.0) {
                states.push(candidate);
            }
        }
    }
    Ok(SteadyStateReport { states, kernel_dim, unique: kernel_dim == 1 })
}

/// `rho(t) = unvec(e^{S t} vec(rho0))`. Uses the eigendecomposition of `S`
/// when it is well-conditioned, otherwise falls back to scaling-and-squaring.
pub fn evolve(s: &SuperOpMatrix, rho0: &CMat, t: f64) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::InvalidInput("evolution time must be nonnegative".into()));
    }
    let n = s.hilbert_dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho0.nrows() });
    }
    let tr = trace(rho0);
    if (tr - ONE).norm() > 1e-8 {
        return Err(Error::InvalidInput(format!("initial state has trace {tr}")));
    }
    let v0 = vec_op(rho0);
    let vt = propagate(&s.matrix, &v0, t)?;
    unvec(&vt, n)
}

fn propagate(m: &CMat, v0: &Array1<C64>, t: f64) -> Result<Array1<C64>> {
    // Eigendecomposition route with a reconstruction check.
    if let Ok((w, vr)) = m.eig() {
        if let Ok(vinv) = vr.inv() {
            let recon = {
                let mut scaled = vr.clone();
                for (j, col) in scaled.columns_mut().into_iter().enumerate() {
                    let mut col = col;
                    col.mapv_inplace(|z| z * w[j]);
                }
                scaled.dot(&vinv)
            };
            let resid = max_abs(&(&recon - m));
            if resid <= 1e-8 * max_abs(m).max(1.0) {
                let mut coeff = vinv.dot(v0);
                for (j, c) in coeff.iter_mut().enumerate() {
                    *c *= (w[j] * scalar(t)).exp();
                }
                return Ok(vr.dot(&coeff));
            }
        }
    }
    // Defective or badly conditioned: dense matrix exponential.
    let e = expm(&m.mapv(|z| z * scalar(t)))?;
    Ok(e.dot(v0))
}

/// One line of the validation report.
#[derive(Debug, Clone)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub measure: f64,
}

#[derive(Debug, Clone, Default)]
pub struct DiagnosticsReport {
    pub items: Vec<CheckItem>,
}

impl DiagnosticsReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, measure: f64) {
        self.items.push(CheckItem { name: name.into(), passed, measure });
    }
}

/// Report-only structural checks: traceless jumps, Hermitian `h_i`,
/// contiguous supports, adjoint-pairing consistency, and trace preservation
/// of the assembled matrix on random probes.
pub fn validate(spec: &LindbladSpec) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    for (j, jump) in spec.jumps.iter().enumerate() {
        let tr = trace(&jump.local).norm();
        report.push(format!("jump[{j}] traceless"), tr <= 1e-10, tr);
        let contiguous = spec.lattice.is_contiguous(&jump.support)
            && jump.support.len() <= spec.locality;
        report.push(
            format!("jump[{j}] support contiguous within {} sites", spec.locality),
            contiguous,
            jump.support.len() as f64,
        );
        report.push(format!("jump[{j}] weight positive"), jump.weight > 0.0, jump.weight);
        if let Some(p) = jump.partner {
            let ok = p < spec.jumps.len() && {
                let other = &spec.jumps[p];
                other.support == jump.support
                    && max_abs(&(&dag(&jump.local) - &other.local)) <= 1e-10
            };
            let measure = if p < spec.jumps.len() && spec.jumps[p].support == jump.support {
                max_abs(&(&dag(&jump.local) - &spec.jumps[p].local))
            } else {
                f64::INFINITY
            };
            report.push(format!("jump[{j}] adjoint partner matches"), ok, measure);
        }
    }
    for (i, term) in spec.hamiltonian.iter().enumerate() {
        let resid = operator::hermitian_residual(&term.local);
        report.push(format!("hamiltonian[{i}] hermitian"), resid <= 1e-10, resid);
        let contiguous = spec.lattice.is_contiguous(&term.support)
            && term.support.len() <= spec.locality;
        report.push(
            format!("hamiltonian[{i}] support contiguous within {} sites", spec.locality),
            contiguous,
            term.support.len() as f64,
        );
    }
    if spec.lattice.superop_dim() <= DEFAULT_SUPEROP_CAP {
        let s = assemble(spec)?;
        let scale = s.norm_scale().max(1e-300);
        // vec(1)† S = 0 row-wise is exactly trace preservation
        let eye_vec = vec_op(&identity(s.hilbert_dim()));
        let row = eye_vec.mapv(|z| z.conj()).dot(&s.matrix);
        let worst = row.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        report.push("trace preservation (vec(1)† S = 0)", worst <= 1e-10, worst);

        let mut rng = crate::random::rng(0x1d0b);
        let mut worst_probe = 0.0f64;
        for _ in 0..5 {
            let a = crate::random::ginibre(s.hilbert_dim(), &mut rng);
            let out = s.apply(&a)?;
            worst_probe = worst_probe.max(trace(&out).norm() / max_abs(&a).max(1.0));
        }
        report.push("trace of L(A) vanishes on random probes", worst_probe <= 1e-9, worst_probe);
    }
    Ok(report)
}

/// Convenience constructor: a single-qubit amplitude-damping spec with rate
/// `gamma` (jump `sqrt(gamma) sigma^-`).
pub fn amplitude_damping(gamma: f64) -> LindbladSpec {
    let lattice = LatticeGeometry::qubits(1).unwrap();
    LindbladSpec {
        lattice,
        jumps: vec![JumpTerm {
            local: operator::sigma_minus(),
            support: vec![0],
            weight: gamma,
            partner: None,
        }],
        hamiltonian: vec![],
        locality: 1,
    }
}
