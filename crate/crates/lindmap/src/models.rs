//! The two solvable reference models: a classical-like thermalizing
//! Lindbladian whose steady state is the Gibbs state of a diagonal
//! nearest-neighbour Hamiltonian, and a quadratic fermionic Lindbladian with
//! circulant absorption/emission rate matrices (realized on qubits through
//! Jordan-Wigner strings).

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::lindblad::{JumpTerm, LindbladSpec, SuperOpMatrix};
use crate::operator::{
    self, dag, expm, general_spectrum, hermitian_map, identity, kron, scalar, sigma_minus, zeros,
    CMat, ONE,
};
use ndarray::Array2;
use num_complex::Complex64 as C64;

// ---------------------------------------------------------------------------
// classical-like model
// ---------------------------------------------------------------------------

/// Parameters of the classical-like model on a qubit ring: site energies,
/// chemical potential, nearest-neighbour interaction, inverse temperature,
/// and positive per-term weights `gamma[k][b]`.
#[derive(Debug, Clone)]
pub struct ClassicalModelParams {
    pub n: usize,
    pub eps: Vec<f64>,
    pub mu: f64,
    pub u: f64,
    pub beta: f64,
    pub gammas: Vec<[f64; 3]>,
}

impl ClassicalModelParams {
    /// Uniform weights `gamma = 1`.
    pub fn new(n: usize, eps: Vec<f64>, mu: f64, u: f64, beta: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("the model needs at least three sites".into()));
        }
        if eps.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: eps.len() });
        }
        Ok(Self { n, eps, mu, u, beta, gammas: vec![[1.0; 3]; n] })
    }

    pub fn uniform(n: usize, eps: f64, mu: f64, u: f64, beta: f64) -> Result<Self> {
        Self::new(n, vec![eps; n], mu, u, beta)
    }

    /// `omega_{k,b} = -(eps_k - mu) - u b`.
    pub fn omega(&self, k: usize, b: usize) -> f64 {
        -(self.eps[k] - self.mu) - self.u * b as f64
    }

    /// Classical energy of an occupation string (site 0 = most significant
    /// bit of the index).
    pub fn energy(&self, x: usize) -> f64 {
        let n = self.n;
        let bit = |s: usize| ((x >> (n - 1 - s)) & 1) as f64;
        let mut e = 0.0;
        for i in 0..n {
            e += (self.eps[i] - self.mu) * bit(i);
            e += self.u * bit(i) * bit((i + 1) % n);
        }
        e
    }

    pub fn lattice(&self) -> LatticeGeometry {
        LatticeGeometry::qubits(self.n).unwrap()
    }
}

/// The Gibbs state `exp(-beta E_x)/Z` as a diagonal density matrix.
pub fn gibbs_sigma(params: &ClassicalModelParams) -> CMat {
    let dim = 1usize << params.n;
    let weights: Vec<f64> = (0..dim).map(|x| (-params.beta * params.energy(x)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut sigma = zeros(dim);
    for (x, w) in weights.iter().enumerate() {
        sigma[[x, x]] = scalar(w / z);
    }
    sigma
}

/// The raw 3-site jump on ordered window sites `(k-1, k, k+1)`: lower the
/// middle qubit when the outer occupations sum to `b`.
pub fn classical_local_jump(b: usize) -> CMat {
    let mut l = zeros(8);
    for a in 0..2usize {
        for c in 0..2usize {
            if a + c == b {
                let col = a * 4 + 2 + c; // middle occupied
                let row = a * 4 + c; // middle emptied
                l[[row, col]] = ONE;
            }
        }
    }
    l
}

/// Number of outer configurations with occupation sum `b` (the squared
/// Hilbert-Schmidt norm of the raw local jump).
pub fn outer_multiplicity(b: usize) -> f64 {
    match b {
        0 | 2 => 1.0,
        1 => 2.0,
        _ => 0.0,
    }
}

/// Build the dissipative spec driving the system into the Gibbs state: for
/// every site and outer occupation `b`, a lowering jump with weight
/// `gamma e^{-beta omega/2}` and its raising adjoint with
/// `gamma e^{+beta omega/2}` (raw-operator normalization absorbed into the
/// weights so jumps stay unit norm).
pub fn build_classical(params: &ClassicalModelParams) -> Result<(LindbladSpec, CMat)> {
    let lattice = params.lattice();
    let n = params.n;
    let env_factor = 2f64.powi(n as i32 - 3);
    let mut jumps = Vec::with_capacity(6 * n);
    for k in 0..n {
        let support = vec![(k + n - 1) % n, k, (k + 1) % n];
        for b in 0..3usize {
            let gamma = params.gammas[k][b];
            if gamma <= 0.0 {
                return Err(Error::InvalidInput("weights gamma must be positive".into()));
            }
            let norm_sq = outer_multiplicity(b) * env_factor;
            let raw = classical_local_jump(b);
            let lower = raw.mapv(|z| z / scalar(norm_sq.sqrt() / env_factor.sqrt()));
            // local matrix normalized so the EMBEDDED operator has unit
            // Hilbert-Schmidt norm: divide by sqrt(mult * 2^(n-3))
            let lower = {
                let _ = lower;
                raw.mapv(|z| z / scalar(norm_sq.sqrt()))
            };
            let raise = dag(&lower);
            let omega = params.omega(k, b);
            let idx = jumps.len();
            jumps.push(JumpTerm {
                local: lower,
                support: support.clone(),
                weight: gamma * (-params.beta * omega / 2.0).exp() * norm_sq,
                partner: Some(idx + 1),
            });
            jumps.push(JumpTerm {
                local: raise,
                support: support.clone(),
                weight: gamma * (params.beta * omega / 2.0).exp() * norm_sq,
                partner: Some(idx),
            });
        }
    }
    let spec = LindbladSpec { lattice, jumps, hamiltonian: vec![], locality: 3 };
    Ok((spec, gibbs_sigma(params)))
}

/// Classical continuous-time generator on occupation strings:
/// `generator[x', x] = f_{x -> x'}` for single-bit flips, columns sum to 0.
#[derive(Debug, Clone)]
pub struct RateMatrix {
    pub generator: Array2<f64>,
    /// Exit rates `g_x = sum_{x'} f_{x -> x'}`.
    pub exit: Vec<f64>,
}

/// Flip rate `f_{x -> x^k}` for the single-bit flip at site `k`.
pub fn flip_rate(params: &ClassicalModelParams, x: usize, k: usize) -> f64 {
    let n = params.n;
    let bit = |s: usize| (x >> (n - 1 - s)) & 1;
    let b = bit((k + n - 1) % n) + bit((k + 1) % n);
    let gamma = params.gammas[k][b];
    let omega = params.omega(k, b);
    if bit(k) == 1 {
        gamma * (-params.beta * omega / 2.0).exp()
    } else {
        gamma * (params.beta * omega / 2.0).exp()
    }
}

pub fn classical_rate_matrix(params: &ClassicalModelParams) -> Result<RateMatrix> {
    if params.n > 14 {
        return Err(Error::DimensionCap { dim: 1 << params.n, cap: 1 << 14 });
    }
    let dim = 1usize << params.n;
    let mut generator = Array2::<f64>::zeros((dim, dim));
    let mut exit = vec![0.0; dim];
    for x in 0..dim {
        for k in 0..params.n {
            let rate = flip_rate(params, x, k);
            let flipped = x ^ (1 << (params.n - 1 - k));
            generator[[flipped, x]] += rate;
            exit[x] += rate;
        }
        generator[[x, x]] = -exit[x];
    }
    Ok(RateMatrix { generator, exit })
}

/// Steady-state uniqueness diagnostics for the classical model.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// Smallest entry of the diagonal-block propagator `e^{Q t}`.
    pub propagator_min: f64,
    pub propagator_positive: bool,
    /// Kernel dimension of the full vectorized generator.
    pub kernel_dim: usize,
    /// Strict column dominance on the coherence block: smallest value of
    /// `(g_x + g_y)/2 - sum f_{xy -> x'y'}` over pairs `x != y`.
    pub dominance_margin: f64,
    pub dominance_ok: bool,
    /// Largest real part of the coherence-block spectrum.
    pub offdiag_max_re: f64,
    pub time: f64,
}

impl UniquenessReport {
    pub fn all_pass(&self) -> bool {
        self.propagator_positive
            && self.kernel_dim == 1
            && self.dominance_ok
            && self.offdiag_max_re < 0.0
    }
}

pub fn uniqueness_report(params: &ClassicalModelParams, t: f64) -> Result<UniquenessReport> {
    if params.n > 6 {
        return Err(Error::DimensionCap { dim: 1 << (2 * params.n), cap: 1 << 12 });
    }
    let dim = 1usize << params.n;
    let rates = classical_rate_matrix(params)?;

    // (i) strict positivity of the classical propagator
    let q_c: CMat = rates.generator.mapv(|x| C64::new(x * t, 0.0));
    let prop = expm(&q_c)?;
    let propagator_min = prop.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let propagator_positive = propagator_min > 0.0;

    // (ii) kernel dimension of the full generator
    let (spec, _) = build_classical(params)?;
    let s = crate::lindblad::assemble(&spec)?;
    let steady = crate::lindblad::steady_states(&s, None)?;

    // (iii) column dominance over coherence pairs
    let mut dominance_margin = f64::INFINITY;
    for x in 0..dim {
        for y in 0..dim {
            if x == y {
                continue;
            }
            let bit = |v: usize, s_: usize| (v >> (params.n - 1 - s_)) & 1;
            let mut total = 0.0;
            for k in 0..params.n {
                let bx = bit(x, (k + params.n - 1) % params.n) + bit(x, (k + 1) % params.n);
                let by = bit(y, (k + params.n - 1) % params.n) + bit(y, (k + 1) % params.n);
                if bit(x, k) == bit(y, k) && bx == by {
                    total += flip_rate(params, x, k);
                }
            }
            let margin = 0.5 * (rates.exit[x] + rates.exit[y]) - total;
            dominance_margin = dominance_margin.min(margin);
        }
    }
    let dominance_ok = dominance_margin > 0.0;

    // (iv) coherence-block spectrum strictly damped
    let mut offdiag_max_re = f64::NEG_INFINITY;
    {
        let picks: Vec<usize> = (0..dim * dim)
            .filter(|idx| idx / dim != idx % dim)
            .collect();
        let m = picks.len();
        let mut block = Array2::<C64>::zeros((m, m));
        for (i, &ri) in picks.iter().enumerate() {
            for (j, &cj) in picks.iter().enumerate() {
                block[[i, j]] = s.matrix[[ri, cj]];
            }
        }
        for z in general_spectrum(&block)? {
            offdiag_max_re = offdiag_max_re.max(z.re);
        }
    }

    Ok(UniquenessReport {
        propagator_min,
        propagator_positive,
        kernel_dim: steady.kernel_dim,
        dominance_margin,
        dominance_ok,
        offdiag_max_re,
        time: t,
    })
}

// ---------------------------------------------------------------------------
// quadratic fermionic model
// ---------------------------------------------------------------------------

/// Circulant nearest-neighbour rate parameters `(gamma_0, gamma_1)` for
/// absorption (`in`) and emission (`out`).
#[derive(Debug, Clone, Copy)]
pub struct FermionParams {
    pub n: usize,
    pub gamma_in: (f64, f64),
    pub gamma_out: (f64, f64),
}

impl FermionParams {
    pub fn new(n: usize, gamma_in: (f64, f64), gamma_out: (f64, f64)) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("need at least one mode".into()));
        }
        if n < 3 && (gamma_in.1 != 0.0 || gamma_out.1 != 0.0) {
            return Err(Error::InvalidInput(
                "nearest-neighbour rates need at least three sites".into(),
            ));
        }
        for (g0, g1) in [gamma_in, gamma_out] {
            if g0 < 2.0 * g1.abs() {
                return Err(Error::InvalidInput(format!(
                    "circulant ({g0}, {g1}) is not positive semi-definite"
                )));
            }
        }
        Ok(Self { n, gamma_in, gamma_out })
    }
}

fn circulant(n: usize, g0: f64, g1: f64) -> Array2<f64> {
    let mut m = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = g0;
        if n >= 3 && g1 != 0.0 {
            m[[i, (i + 1) % n]] = g1;
            m[[i, (n + i - 1) % n]] = g1;
        }
    }
    m
}

/// The commuting circulant pair, with derived Fourier-mode data.
#[derive(Debug, Clone)]
pub struct SingleParticleModel {
    pub params: FermionParams,
    pub gamma_in: Array2<f64>,
    pub gamma_out: Array2<f64>,
}

impl SingleParticleModel {
    pub fn new(params: FermionParams) -> Self {
        Self {
            params,
            gamma_in: circulant(params.n, params.gamma_in.0, params.gamma_in.1),
            gamma_out: circulant(params.n, params.gamma_out.0, params.gamma_out.1),
        }
    }
}

/// Per-mode data from the discrete Fourier transform of the circulants.
#[derive(Debug, Clone)]
pub struct ModeReport {
    /// `d_k = gamma_0 + 2 gamma_1 cos(2 pi k / n)`, `k = 0..n`.
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
    /// `epsilon_k = -ln(d_in/d_out)`; infinite when a rate vanishes.
    pub epsilons: Vec<f64>,
    /// Steady-state mode occupations `d_in / (d_in + d_out)`.
    pub occupations: Vec<f64>,
    /// `min_k (d_in + d_out)/2`.
    pub gap: f64,
    /// Set when some mode rate falls below 1e-10.
    pub gapless: bool,
}

pub fn fermionic_modes(params: &FermionParams) -> Result<ModeReport> {
    let n = params.n;
    let mode = |g: (f64, f64), k: usize| {
        g.0 + 2.0 * g.1 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()
    };
    let d_in: Vec<f64> = (0..n).map(|k| mode(params.gamma_in, k)).collect();
    let d_out: Vec<f64> = (0..n).map(|k| mode(params.gamma_out, k)).collect();
    for &d in d_in.iter().chain(d_out.iter()) {
        if d < -1e-12 {
            return Err(Error::NotPositiveSemiDefinite { value: d, tol: 1e-12 });
        }
    }
    let epsilons: Vec<f64> = d_in
        .iter()
        .zip(&d_out)
        .map(|(&i, &o)| if i > 0.0 && o > 0.0 { -(i / o).ln() } else { f64::INFINITY })
        .collect();
    let occupations: Vec<f64> =
        d_in.iter().zip(&d_out).map(|(&i, &o)| i / (i + o)).collect();
    let gap = d_in
        .iter()
        .zip(&d_out)
        .map(|(&i, &o)| (i + o) / 2.0)
        .fold(f64::INFINITY, f64::min);
    let gapless = d_in
        .iter()
        .chain(d_out.iter())
        .any(|&d| d.max(0.0) <= 1e-10);
    Ok(ModeReport { d_in, d_out, epsilons, occupations, gap, gapless })
}

/// Jordan-Wigner annihilation operator on site `i` of an `n`-qubit register:
/// `Z_0 ... Z_{i-1} sigma^-_i`.
pub fn jw_annihilation(i: usize, n: usize) -> CMat {
    let mut op = Array2::from_elem((1, 1), ONE);
    for s in 0..n {
        let factor = if s < i {
            operator::pauli('Z')
        } else if s == i {
            sigma_minus()
        } else {
            identity(2)
        };
        op = kron(&op, &factor);
    }
    op
}

/// The qubit image of the quadratic model, plus its Gaussian steady state.
#[derive(Debug, Clone)]
pub struct FermionManyBody {
    pub spec: LindbladSpec,
    pub sigma: CMat,
    pub modes: ModeReport,
    /// Fourier-mode annihilation operators `c_k` (full-space matrices).
    pub mode_ops: Vec<CMat>,
}

/// Build the many-body spec through the Fourier modes: the circulants
/// diagonalize simultaneously, so the jumps are `c_k†` with weight `d_in_k`
/// and `c_k` with weight `d_out_k` (unit-normalized with the norms folded
/// into the weights). Requires full rank (all mode rates positive).
pub fn build_fermionic_manybody(params: &FermionParams) -> Result<FermionManyBody> {
    let n = params.n;
    if n > 7 {
        return Err(Error::DimensionCap { dim: 1 << (2 * n), cap: 1 << 14 });
    }
    let modes = fermionic_modes(params)?;
    if modes.d_in.iter().chain(modes.d_out.iter()).any(|&d| d <= 1e-12) {
        return Err(Error::InvalidInput(
            "a mode rate vanishes; the steady state is not full rank".into(),
        ));
    }
    let lattice = LatticeGeometry::qubits(n)?;
    let dim = lattice.dim();
    let a_ops: Vec<CMat> = (0..n).map(|i| jw_annihilation(i, n)).collect();
    let mut mode_ops = Vec::with_capacity(n);
    for k in 0..n {
        let mut c = zeros(dim);
        for (j, a) in a_ops.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * (k as f64) * (j as f64) / n as f64;
            let coeff = C64::from_polar(1.0 / (n as f64).sqrt(), phase);
            c = c + a.mapv(|z| z * coeff);
        }
        mode_ops.push(c);
    }

    let norm_sq = 2f64.powi(n as i32 - 1); // Tr(c† c) on the full register
    let support: Vec<usize> = (0..n).collect();
    let mut jumps = Vec::with_capacity(2 * n);
    for (k, c) in mode_ops.iter().enumerate() {
        let scale = scalar(1.0 / norm_sq.sqrt());
        let idx = jumps.len();
        jumps.push(JumpTerm {
            local: dag(c).mapv(|z| z * scale),
            support: support.clone(),
            weight: modes.d_in[k] * norm_sq,
            partner: Some(idx + 1),
        });
        jumps.push(JumpTerm {
            local: c.mapv(|z| z * scale),
            support: support.clone(),
            weight: modes.d_out[k] * norm_sq,
            partner: Some(idx),
        });
    }
    let spec = LindbladSpec { lattice, jumps, hamiltonian: vec![], locality: n };

    // Gaussian steady state: exp(-sum_k eps_k c_k† c_k)/Z
    let mut h_ss = zeros(dim);
    for (k, c) in mode_ops.iter().enumerate() {
        h_ss = h_ss + dag(c).dot(c).mapv(|z| z * scalar(modes.epsilons[k]));
    }
    let unnorm = hermitian_map(&h_ss, |x| (-x).exp())?;
    let z = operator::trace(&unnorm).re;
    let sigma = unnorm.mapv(|v| v / scalar(z));

    Ok(FermionManyBody { spec, sigma, modes, mode_ops })
}

/// Apply the two-index quadratic generator directly (oracle form):
/// `sum_ij gin_ij (a_i† rho a_j - ...) + gout_ji (a_i rho a_j† - ...)`.
pub fn fermionic_apply_direct(model: &SingleParticleModel, rho: &CMat) -> Result<CMat> {
    let n = model.params.n;
    let dim = 1usize << n;
    if rho.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho.nrows() });
    }
    let a_ops: Vec<CMat> = (0..n).map(|i| jw_annihilation(i, n)).collect();
    let mut out = zeros(dim);
    for i in 0..n {
        for j in 0..n {
            let gin = model.gamma_in[[i, j]];
            if gin != 0.0 {
                let jump = dag(&a_ops[i]).dot(rho).dot(&a_ops[j]);
                let m = a_ops[j].dot(&dag(&a_ops[i]));
                let anti = m.dot(rho) + rho.dot(&m);
                out = out + (jump - anti.mapv(|z| z * 0.5)).mapv(|z| z * scalar(gin));
            }
            let gout = model.gamma_out[[j, i]];
            if gout != 0.0 {
                let jump = a_ops[i].dot(rho).dot(&dag(&a_ops[j]));
                let m = dag(&a_ops[j]).dot(&a_ops[i]);
                let anti = m.dot(rho) + rho.dot(&m);
                out = out + (jump - anti.mapv(|z| z * 0.5)).mapv(|z| z * scalar(gout));
            }
        }
    }
    Ok(out)
}

/// Vectorized matrix of the exact quadratic super-Hamiltonian
/// `-sum_ij (B_ij a_i† rho a_j + B_ij* a_i rho a_j†
///          - (gin_ij/2){a_j a_i†, rho} - (gout_ji/2){a_j† a_i, rho})`
/// with `B = sqrt(gin gout)`.
pub fn fermionic_super_h_exact(model: &SingleParticleModel) -> Result<CMat> {
    let n = model.params.n;
    let dim = 1usize << n;
    let coeff = fermionic_super_h_coeffs(model)?;
    let b = &coeff.matrix;
    let a_ops: Vec<CMat> = (0..n).map(|i| jw_annihilation(i, n)).collect();
    let eye = identity(dim);
    let mut h = zeros(dim * dim);
    let mut anti_in = zeros(dim);
    let mut anti_out = zeros(dim);
    for i in 0..n {
        for j in 0..n {
            let bij = scalar(b[[i, j]]);
            if b[[i, j]] != 0.0 {
                h = h - kron(&dag(&a_ops[i]), &a_ops[j].t().to_owned()).mapv(|z| z * bij);
                h = h - kron(&a_ops[i], &dag(&a_ops[j]).t().to_owned()).mapv(|z| z * bij);
            }
            if model.gamma_in[[i, j]] != 0.0 {
                anti_in = anti_in
                    + a_ops[j]
                        .dot(&dag(&a_ops[i]))
                        .mapv(|z| z * scalar(model.gamma_in[[i, j]]));
            }
            if model.gamma_out[[j, i]] != 0.0 {
                anti_out = anti_out
                    + dag(&a_ops[j])
                        .dot(&a_ops[i])
                        .mapv(|z| z * scalar(model.gamma_out[[j, i]]));
            }
        }
    }
    let m = (anti_in + anti_out).mapv(|z| z * 0.5);
    h = h + kron(&m, &eye) + kron(&eye, &m.t().to_owned());
    Ok(h)
}

/// `sqrt(gamma_in gamma_out)` via the Fourier symbol, with the closed-form
/// nearest-neighbour decay bound checked entrywise when both ratios
/// `2 gamma_1 / gamma_0` lie in `[0, 1)`.
#[derive(Debug, Clone)]
pub struct FermionCoeffReport {
    /// Real circulant `sqrt(gamma_in gamma_out)`.
    pub matrix: Array2<f64>,
    /// None when a ratio is outside `[0, 1)` (bound inapplicable).
    pub bound_ok: Option<bool>,
    /// Worst entry-to-bound ratio observed (when applicable).
    pub worst_ratio: f64,
    pub profile: crate::superham::DecayProfile,
}

pub fn fermionic_super_h_coeffs(model: &SingleParticleModel) -> Result<FermionCoeffReport> {
    let n = model.params.n;
    let modes = fermionic_modes(&model.params)?;
    let symbol: Vec<f64> = modes
        .d_in
        .iter()
        .zip(&modes.d_out)
        .map(|(&i, &o)| (i.max(0.0) * o.max(0.0)).sqrt())
        .collect();
    // inverse transform of the symmetric symbol is real
    let mut by_distance = vec![0.0f64; n];
    for (r, slot) in by_distance.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &s) in symbol.iter().enumerate() {
            acc += s * (2.0 * std::f64::consts::PI * (k * r) as f64 / n as f64).cos();
        }
        *slot = acc / n as f64;
    }
    let mut matrix = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            matrix[[i, j]] = by_distance[(n + i - j) % n];
        }
    }

    let lattice = LatticeGeometry::new(n, 2)?;
    let supports: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let cmat: CMat = matrix.mapv(|x| C64::new(x, 0.0));
    let profile = crate::superham::decay_profile(&cmat, &supports, &lattice, 1)?;

    let (g0_in, g1_in) = model.params.gamma_in;
    let (g0_out, g1_out) = model.params.gamma_out;
    let r_in = 2.0 * g1_in / g0_in;
    let r_out = 2.0 * g1_out / g0_out;
    let applicable = (0.0..1.0).contains(&r_in) && (0.0..1.0).contains(&r_out);
    let mut bound_ok = None;
    let mut worst_ratio = 0.0f64;
    if applicable {
        let pref = 2.0 * (g0_in.sqrt() / (1.0 - r_in).powi(2))
            * (g0_out.sqrt() / (1.0 - r_out).powi(2));
        let mut ok = true;
        for i in 0..n {
            for j in 0..n {
                let d = lattice.dist(i, j) as f64;
                let bound: f64 = pref * (r_in.powf(d / 2.0) + r_out.powf(d / 2.0));
                let ratio = matrix[[i, j]].abs() / bound.max(1e-300);
                worst_ratio = worst_ratio.max(ratio);
                if matrix[[i, j]].abs() > bound * (1.0 + 1e-9) {
                    ok = false;
                }
            }
        }
        bound_ok = Some(ok);
    }
    Ok(FermionCoeffReport { matrix, bound_ok, worst_ratio, profile })
}

/// Convenience: assemble the many-body generator.
pub fn assemble_fermionic(params: &FermionParams) -> Result<(SuperOpMatrix, FermionManyBody)> {
    let mb = build_fermionic_manybody(params)?;
    let s = crate::lindblad::assemble(&mb.spec)?;
    Ok((s, mb))
}
