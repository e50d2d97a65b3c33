//! Dense complex operator algebra on the qudit lattice: embedding, partial
//! traces, Hermitian matrix functions, spectra, vectorization.

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, Norm, OperationNorm, SVD, UPLO};
use num_complex::Complex64 as C64;

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for treating a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues of a PSD matrix above this negative floor are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-12;

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

pub fn zeros(dim: usize) -> CMat {
    Array2::zeros((dim, dim))
}

pub fn scalar(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Conjugate transpose.
pub fn dag(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    ndarray::linalg::kron(a, b)
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

/// Hilbert-Schmidt inner product `Tr(a† b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.opnorm_fro().expect("frobenius norm")
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - A†|` entrywise.
pub fn hermitian_residual(a: &CMat) -> f64 {
    let (r, c) = a.dim();
    debug_assert_eq!(r, c);
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in i..c {
            let diff = (a[[i, j]] - a[[j, i]].conj()).norm();
            worst = worst.max(diff);
        }
    }
    worst
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) + b.dot(a)
}

/// Row-major vectorization, so `vec(A X B) = (A ⊗ B^T) vec(X)`.
pub fn vec_op(a: &CMat) -> CVec {
    let (r, c) = a.dim();
    Array1::from_iter(a.iter().cloned()).into_shape_with_order(r * c).unwrap()
}

pub fn unvec(v: &CVec, dim: usize) -> Result<CMat> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: v.len() });
    }
    Ok(Array2::from_shape_vec((dim, dim), v.to_vec()).unwrap())
}

/// Reshuffle a superoperator matrix into its Choi-like form:
/// `R(S)[(i,j),(k,l)] = S[(i,k),(j,l)]`. Involutive; maps
/// `A ⊗ conj(B)` to `vec(A) vec(B)†`.
pub fn reshuffle(s: &CMat) -> Result<CMat> {
    let dim2 = s.nrows();
    if s.ncols() != dim2 {
        return Err(Error::DimensionMismatch { expected: dim2, got: s.ncols() });
    }
    let dim = (dim2 as f64).sqrt().round() as usize;
    if dim * dim != dim2 {
        return Err(Error::InvalidInput("superoperator side is not a perfect square".into()));
    }
    let mut out = Array2::zeros((dim2, dim2));
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    out[[i * dim + j, k * dim + l]] = s[[i * dim + k, j * dim + l]];
                }
            }
        }
    }
    Ok(out)
}

fn check_sites(sites: &[usize], lattice: &LatticeGeometry) -> Result<()> {
    for &s in sites {
        lattice.check_site(s)?;
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::InvalidInput("duplicate sites in support".into()));
    }
    Ok(())
}

/// Base-`d` digit decomposition helpers for one lattice.
struct Places {
    place: Vec<usize>,
    d: usize,
}

impl Places {
    fn new(lattice: &LatticeGeometry) -> Self {
        let n = lattice.sites();
        let d = lattice.local_dim();
        let mut place = vec![1usize; n];
        for s in (0..n.saturating_sub(1)).rev() {
            place[s] = place[s + 1] * d;
        }
        Places { place, d }
    }

    /// Contribution of a packed local index to the global index, with local
    /// digit `t` (slowest first) landing at `sites[t]`.
    fn spread(&self, mut packed: usize, sites: &[usize]) -> usize {
        let mut idx = 0;
        for t in (0..sites.len()).rev() {
            idx += (packed % self.d) * self.place[sites[t]];
            packed /= self.d;
        }
        idx
    }
}

/// Embed `local` (acting on `sites`, listed slowest-first) into the full
/// lattice as `local ⊗ 1` with tensor factors at the listed site slots.
pub fn embed(local: &CMat, sites: &[usize], lattice: &LatticeGeometry) -> Result<CMat> {
    check_sites(sites, lattice)?;
    let d = lattice.local_dim();
    let dloc = d.pow(sites.len() as u32);
    if local.nrows() != dloc || local.ncols() != dloc {
        return Err(Error::DimensionMismatch { expected: dloc, got: local.nrows() });
    }
    let n = lattice.sites();
    let dim = lattice.dim();
    let comp: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let denv = d.pow(comp.len() as u32);
    let places = Places::new(lattice);

    let loc_idx: Vec<usize> = (0..dloc).map(|p| places.spread(p, sites)).collect();
    let env_idx: Vec<usize> = (0..denv).map(|p| places.spread(p, &comp)).collect();

    let mut out = zeros(dim);
    for r in 0..dloc {
        for c in 0..dloc {
            let val = local[[r, c]];
            if val == ZERO {
                continue;
            }
            for &e in &env_idx {
                out[[loc_idx[r] + e, loc_idx[c] + e]] = val;
            }
        }
    }
    Ok(out)
}

/// Reduce `op` to the sites in `keep` (result ordered by ascending site).
/// An empty `keep` returns the scalar trace as a 1x1 matrix.
pub fn partial_trace(op: &CMat, keep: &[usize], lattice: &LatticeGeometry) -> Result<CMat> {
    check_sites(keep, lattice)?;
    let dim = lattice.dim();
    if op.nrows() != dim || op.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: op.nrows() });
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    let n = lattice.sites();
    let d = lattice.local_dim();
    let traced: Vec<usize> = (0..n).filter(|s| !keep_sorted.contains(s)).collect();
    let dkeep = d.pow(keep_sorted.len() as u32);
    let dtr = d.pow(traced.len() as u32);
    let places = Places::new(lattice);

    let keep_idx: Vec<usize> = (0..dkeep).map(|p| places.spread(p, &keep_sorted)).collect();
    let tr_idx: Vec<usize> = (0..dtr).map(|p| places.spread(p, &traced)).collect();

    let mut out = zeros(dkeep.max(1));
    for a in 0..dkeep {
        for b in 0..dkeep {
            let mut acc = ZERO;
            for &e in &tr_idx {
                acc += op[[keep_idx[a] + e, keep_idx[b] + e]];
            }
            out[[a, b]] = acc;
        }
    }
    Ok(out)
}

/// Checked Hermitian eigendecomposition (ascending eigenvalues), with
/// eigenvectors as columns satisfying `A v_j = w_j v_j`.
pub fn hermitian_eig(a: &CMat) -> Result<(Array1<f64>, CMat)> {
    let resid = hermitian_residual(a);
    let scale = max_abs(a).max(1.0);
    if resid > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { residual: resid });
    }
    let sym = (a + &dag(a)).mapv(|z| z * 0.5);
    let (w, v) = sym.eigh(UPLO::Lower)?;
    // The LAPACK wrapper hands a row-major buffer to a column-major routine,
    // which diagonalizes conj(A); undo the conjugation when that happened.
    let dim = sym.nrows();
    let check = |vv: &CMat| -> f64 {
        let mut worst = 0.0f64;
        for j in [0, dim - 1] {
            let col = vv.column(j).to_owned();
            let r = (&sym.dot(&col) - &col.mapv(|z| z * scalar(w[j])))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            worst = worst.max(r);
        }
        worst
    };
    let plain = check(&v);
    let conj = v.mapv(|z| z.conj());
    if check(&conj) < plain {
        Ok((w, conj))
    } else {
        Ok((w, v))
    }
}

/// Apply a real scalar function to a Hermitian matrix through its
/// eigendecomposition.
pub fn hermitian_map(a: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (w, v) = hermitian_eig(a)?;
    let fw: Vec<C64> = w.iter().map(|&x| scalar(f(x))).collect();
    let mut scaled = v.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        col.mapv_inplace(|z| z * fw[j]);
    }
    Ok(scaled.dot(&dag(&v)))
}

/// `A^x` for Hermitian PSD `A` via eigendecomposition. Eigenvalues in
/// `[-PSD_CLAMP, 0)` are clamped to zero; anything more negative is an error,
/// as is a singular `A` with `x < 0`.
pub fn hermitian_power(a: &CMat, x: f64) -> Result<CMat> {
    let (w, v) = hermitian_eig(a)?;
    let mut lam = Vec::with_capacity(w.len());
    for &l in w.iter() {
        if l < -PSD_CLAMP {
            return Err(Error::NotPositiveSemiDefinite { value: l, tol: PSD_CLAMP });
        }
        lam.push(l.max(0.0));
    }
    if x < 0.0 && lam.iter().any(|&l| l == 0.0) {
        return Err(Error::Singular);
    }
    let fw: Vec<C64> = lam
        .iter()
        .map(|&l| if l == 0.0 && x == 0.0 { ONE } else { scalar(l.powf(x)) })
        .collect();
    let mut scaled = v.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let mut col = col;
        col.mapv_inplace(|z| z * fw[j]);
    }
    let out = scaled.dot(&dag(&v));
    // symmetrize away roundoff
    Ok((&out + &dag(&out)).mapv(|z| z * 0.5))
}

pub fn hermitian_sqrt(a: &CMat) -> Result<CMat> {
    hermitian_power(a, 0.5)
}

/// All eigenvalues of a general square matrix, sorted by `(Re, Im)`.
pub fn general_spectrum(m: &CMat) -> Result<Vec<C64>> {
    let (w, _) = m.eig()?;
    let mut vals: Vec<C64> = w.to_vec();
    if vals.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvariantViolated("eigensolver produced non-finite values".into()));
    }
    sort_complex(&mut vals);
    Ok(vals)
}

pub fn sort_complex(vals: &mut [C64]) {
    vals.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest singular value. Exact SVD below `600`, power iteration above.
pub fn op_norm2(a: &CMat) -> f64 {
    let (r, c) = a.dim();
    if r == 0 || c == 0 {
        return 0.0;
    }
    if r.min(c) <= 600 {
        let (_, s, _) = a.svd(false, false).expect("svd for operator norm");
        return s.iter().cloned().fold(0.0, f64::max);
    }
    // Power iteration on A†A with a deterministic start vector.
    let mut v: CVec = Array1::from_shape_fn(c, |i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.3));
    let nv = v.norm_l2();
    v.mapv_inplace(|z| z / nv);
    let ad = dag(a);
    let mut est = 0.0;
    for _ in 0..60 {
        let w = ad.dot(&a.dot(&v));
        let nw = w.norm_l2();
        if nw == 0.0 {
            return 0.0;
        }
        v = w.mapv(|z| z / nw);
        est = nw.sqrt();
    }
    est
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let dim = a.nrows();
    if a.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: a.ncols() });
    }
    const THETA13: f64 = 5.371920351148152;
    let norm1 = a.opnorm_one()?;
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = scalar(0.5f64.powi(s));
    let m = a.mapv(|z| z * scale);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let eye = identity(dim);
    let m2 = m.dot(&m);
    let m4 = m2.dot(&m2);
    let m6 = m2.dot(&m4);

    let u_inner = m6.mapv(|z| z * scalar(B[13]))
        + m4.mapv(|z| z * scalar(B[11]))
        + m2.mapv(|z| z * scalar(B[9]));
    let u_poly = m6.dot(&u_inner)
        + m6.mapv(|z| z * scalar(B[7]))
        + m4.mapv(|z| z * scalar(B[5]))
        + m2.mapv(|z| z * scalar(B[3]))
        + eye.mapv(|z| z * scalar(B[1]));
    let u = m.dot(&u_poly);

    let v_inner = m6.mapv(|z| z * scalar(B[12]))
        + m4.mapv(|z| z * scalar(B[10]))
        + m2.mapv(|z| z * scalar(B[8]));
    let v = m6.dot(&v_inner)
        + m6.mapv(|z| z * scalar(B[6]))
        + m4.mapv(|z| z * scalar(B[4]))
        + m2.mapv(|z| z * scalar(B[2]))
        + eye.mapv(|z| z * scalar(B[0]));

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom.inv()?.dot(&numer);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Pauli matrices, unnormalized.
pub fn pauli(which: char) -> CMat {
    match which {
        'I' => identity(2),
        'X' => ndarray::array![[ZERO, ONE], [ONE, ZERO]],
        'Y' => ndarray::array![[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]],
        'Z' => ndarray::array![[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]],
        _ => panic!("unknown Pauli label {which}"),
    }
}

/// Lowering operator |0><1|.
pub fn sigma_minus() -> CMat {
    ndarray::array![[ZERO, ONE], [ZERO, ZERO]]
}

pub fn sigma_plus() -> CMat {
    ndarray::array![[ZERO, ZERO], [ONE, ZERO]]
}

/// Occupation projector |1><1|.
pub fn number_op() -> CMat {
    ndarray::array![[ZERO, ZERO], [ZERO, ONE]]
}
