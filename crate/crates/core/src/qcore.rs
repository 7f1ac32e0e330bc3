//! Complex linear algebra and the basic quantum-information operations.
//!
//! Bipartite operators use the index convention `i * dim_b + j` for
//! `|i>_A (x) |j>_B` everywhere in the crate, including the JSON formats.

use ndarray::{s, Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix.
pub type ComplexMatrix = Array2<C64>;

pub const TOL_HERM: f64 = 1e-9;
pub const TOL_TRACE: f64 = 1e-9;
/// Eigenvalues above `-TOL_PSD` count as nonnegative and are clipped to zero.
pub const TOL_PSD: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn eye(n: usize) -> ComplexMatrix {
    Array2::eye(n)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diag().sum()
}

/// `Re Tr[a b]` without forming the product.
pub fn trace_product_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let mut acc = 0.0;
    for ((i, j), x) in a.indexed_iter() {
        acc += (x * b[[j, i]]).re;
    }
    acc
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &dagger(m)).mapv(|z| z * 0.5)
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn is_real(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn eigh(m: &ComplexMatrix) -> Result<(Array1<f64>, ComplexMatrix)> {
    // LAPACK sees a row-major Hermitian matrix as its conjugate, which would
    // conjugate the eigenvectors; hand it column-major storage instead.
    let h = hermitian_part(m);
    let mut f = Array2::zeros(h.dim().f());
    f.assign(&h);
    Ok(f.eigh(UPLO::Lower)?)
}

pub fn eigvalsh(m: &ComplexMatrix) -> Result<Array1<f64>> {
    Ok(eigh(m)?.0)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvalsh(m)?.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Reassembles `V diag(f(lambda)) V^dagger`.
pub fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(m)?;
    let mut scaled = vecs.clone();
    for (mut col, &v) in scaled.columns_mut().into_iter().zip(vals.iter()) {
        let fv = f(v);
        col.mapv_inplace(|z| z * fv);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}

/// Square root of a PSD matrix. Eigenvalues at roundoff level relative to
/// the largest one are treated as zero, since their square roots would not.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (vals, vecs) = eigh(m)?;
    let cutoff = 1e-14 * vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut scaled = vecs.clone();
    for (mut col, &v) in scaled.columns_mut().into_iter().zip(vals.iter()) {
        let r = if v > cutoff { v.sqrt() } else { 0.0 };
        col.mapv_inplace(|z| z * r);
    }
    Ok(scaled.dot(&dagger(&vecs)))
}

/// Kronecker product; `(a (x) b)[i*rb + k, j*cb + l] = a[i,j] b[k,l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ((i, j), &x) in a.indexed_iter() {
        if x == ZERO {
            continue;
        }
        let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
        block.zip_mut_with(b, |o, &y| *o = x * y);
    }
    out
}

pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(Array2::from_elem((1, 1), ONE), |acc, f| tensor(&acc, f))
}

/// Sum of singular values.
pub fn trace_norm(x: &ComplexMatrix) -> Result<f64> {
    let (_, sv, _) = x.svd(false, false)?;
    Ok(sv.sum())
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn undigits(d: &[usize], dims: &[usize]) -> usize {
    d.iter().zip(dims).fold(0, |acc, (&x, &n)| acc * n + x)
}

fn check_square(m: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but subsystem dimensions {:?} give {}",
            m.nrows(),
            m.ncols(),
            dims,
            total
        )));
    }
    Ok(())
}

/// Transposes every subsystem flagged in `mask`; `dims` lists the factor
/// dimensions in tensor order.
pub fn partial_transpose_subsystems(m: &ComplexMatrix, dims: &[usize], mask: &[bool]) -> Result<ComplexMatrix> {
    check_square(m, dims)?;
    if mask.len() != dims.len() {
        return Err(Error::DimensionMismatch("mask length".into()));
    }
    let n = m.nrows();
    let mut out = Array2::zeros((n, n));
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..n {
        digits(r, dims, &mut rd);
        for c in 0..n {
            digits(c, dims, &mut cd);
            let (mut r2, mut c2) = (rd.clone(), cd.clone());
            for k in 0..dims.len() {
                if mask[k] {
                    std::mem::swap(&mut r2[k], &mut c2[k]);
                }
            }
            out[[undigits(&r2, dims), undigits(&c2, dims)]] = m[[r, c]];
        }
    }
    Ok(out)
}

/// Traces out every subsystem flagged in `mask`.
pub fn partial_trace_subsystems(m: &ComplexMatrix, dims: &[usize], mask: &[bool]) -> Result<ComplexMatrix> {
    check_square(m, dims)?;
    let kept: Vec<usize> = dims.iter().zip(mask).map(|(&d, &t)| if t { 1 } else { d }).collect();
    let n_out: usize = kept.iter().product();
    let mut out = Array2::zeros((n_out, n_out));
    let n = m.nrows();
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..n {
        digits(r, dims, &mut rd);
        for c in 0..n {
            digits(c, dims, &mut cd);
            if (0..dims.len()).any(|k| mask[k] && rd[k] != cd[k]) {
                continue;
            }
            let ro: Vec<usize> = (0..dims.len()).map(|k| if mask[k] { 0 } else { rd[k] }).collect();
            let co: Vec<usize> = (0..dims.len()).map(|k| if mask[k] { 0 } else { cd[k] }).collect();
            out[[undigits(&ro, &kept), undigits(&co, &kept)]] += m[[r, c]];
        }
    }
    Ok(out)
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_square(m, dims)?;
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len()
        || perm
            .iter()
            .any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true))
    {
        return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let n = m.nrows();
    let mut out = Array2::zeros((n, n));
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    let mut rn = vec![0; dims.len()];
    let mut cn = vec![0; dims.len()];
    for r in 0..n {
        digits(r, dims, &mut rd);
        for k in 0..dims.len() {
            rn[k] = rd[perm[k]];
        }
        let ro = undigits(&rn, &new_dims);
        for c in 0..n {
            digits(c, dims, &mut cd);
            for k in 0..dims.len() {
                cn[k] = cd[perm[k]];
            }
            out[[ro, undigits(&cn, &new_dims)]] = m[[r, c]];
        }
    }
    Ok(out)
}

/// Validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = hermiticity_error(&matrix);
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = trace(&matrix);
        if (tr - ONE).norm() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = min_eigenvalue(&matrix)?;
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!("not PSD (minimum eigenvalue {min:.3e})")));
        }
        Ok(DensityMatrix { matrix })
    }

    /// Wraps a matrix already known to be a state (up to rounding).
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        debug_assert!(hermiticity_error(&matrix) < 1e-6);
        DensityMatrix { matrix }
    }

    /// `|psi><psi|` for a normalized copy of `ket`.
    pub fn pure(ket: &Array1<C64>) -> Result<Self> {
        let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if ket.is_empty() || norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v = ket.mapv(|z| z / norm);
        let n = v.len();
        let m = Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj());
        Ok(DensityMatrix { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", 0.0, "must be at least 1"));
        }
        Ok(DensityMatrix {
            matrix: eye(dim).mapv(|z| z / dim as f64),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        trace_product_re(&self.matrix, &self.matrix)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// A state on `A (x) B` with explicit factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    state: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, state: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || state.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} cannot be split as {dim_a} x {dim_b}",
                state.dim()
            )));
        }
        Ok(BipartiteState { dim_a, dim_b, state })
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        BipartiteState {
            dim_a: a.dim(),
            dim_b: b.dim(),
            state: DensityMatrix::from_trusted(tensor(a.matrix(), b.matrix())),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.state.into_matrix()
    }
}

/// `(1/d) sum_{i,j} |ii><jj|`.
pub fn max_entangled_state(d: usize) -> Result<BipartiteState> {
    if d == 0 {
        return Err(Error::param("d", 0.0, "must be at least 1"));
    }
    let n = d * d;
    let mut m = Array2::zeros((n, n));
    let w = C64::new(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            m[[i * d + i, j * d + j]] = w;
        }
    }
    Ok(BipartiteState {
        dim_a: d,
        dim_b: d,
        state: DensityMatrix::from_trusted(m),
    })
}

/// Reduced state after discarding `traced`.
pub fn partial_trace(s: &BipartiteState, traced: Subsystem) -> DensityMatrix {
    let mask = match traced {
        Subsystem::A => [true, false],
        Subsystem::B => [false, true],
    };
    let m = partial_trace_subsystems(s.matrix(), &[s.dim_a, s.dim_b], &mask)
        .expect("bipartite dimensions are consistent by construction");
    DensityMatrix::from_trusted(m)
}

pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    let mask = match which {
        Subsystem::A => [true, false],
        Subsystem::B => [false, true],
    };
    partial_transpose_subsystems(m, &[dim_a, dim_b], &mask)
}

pub fn partial_transpose(s: &BipartiteState, which: Subsystem) -> ComplexMatrix {
    partial_transpose_matrix(s.matrix(), s.dim_a, s.dim_b, which)
        .expect("bipartite dimensions are consistent by construction")
}

/// `F(omega, tau) = || sqrt(omega) sqrt(tau) ||_1^2`.
pub fn fidelity(omega: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if omega.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity of {}- and {}-dimensional states",
            omega.dim(),
            tau.dim()
        )));
    }
    let prod = psd_sqrt(omega.matrix())?.dot(&psd_sqrt(tau.matrix())?);
    let root = trace_norm(&prod)?;
    Ok((root * root).clamp(0.0, 1.0))
}

/// Generalized Pauli operator `Z^z X^x` with `X|k> = |k+1>`, `Z|k> = w^k |k>`.
pub fn heisenberg_weyl(d: usize, z: usize, x: usize) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::param("d", 0.0, "must be at least 1"));
    }
    if z >= d || x >= d {
        return Err(Error::DimensionMismatch(format!(
            "Heisenberg-Weyl indices ({z}, {x}) out of range for d = {d}"
        )));
    }
    let mut w = Array2::zeros((d, d));
    for k in 0..d {
        let row = (k + x) % d;
        let phase = 2.0 * std::f64::consts::PI * ((z * row) % d) as f64 / d as f64;
        w[[row, k]] = C64::from_polar(1.0, phase);
    }
    Ok(w)
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    use ndarray_linalg::QR;
    let g = ginibre(rng, n, n);
    let (q, r) = g.qr().expect("Ginibre matrices are full rank almost surely");
    let mut q = q;
    for (k, mut col) in q.columns_mut().into_iter().enumerate() {
        let d = r[[k, k]];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        col.mapv_inplace(|z| z * phase);
    }
    q
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    Array2::from_shape_simple_fn((rows, cols), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Full-rank random state `G G^dagger / Tr`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DensityMatrix {
    let g = ginibre(rng, n, n);
    let m = g.dot(&dagger(&g));
    let tr = trace(&m).re;
    DensityMatrix::from_trusted(hermitian_part(&m.mapv(|z| z / tr)))
}

/// Random Hermitian matrix with standard normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    hermitian_part(&ginibre(rng, n, n))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pauli_x() -> ComplexMatrix {
        ndarray::array![[ZERO, ONE], [ONE, ZERO]]
    }

    fn pauli_z() -> ComplexMatrix {
        ndarray::array![[ONE, ZERO], [ZERO, -ONE]]
    }

    #[test]
    fn bell_state_entries() {
        let phi = max_entangled_state(2).unwrap();
        for ((i, j), z) in phi.matrix().indexed_iter() {
            let expected = if [0, 3].contains(&i) && [0, 3].contains(&j) {
                0.5
            } else {
                0.0
            };
            assert_eq!(*z, c(expected), "entry ({i},{j})");
        }
        assert!((trace(phi.matrix()).re - 1.0).abs() < 1e-15);
        assert!((phi.state().purity() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn max_entangled_marginals_are_maximally_mixed() {
        let phi = max_entangled_state(3).unwrap();
        let target = eye(3).mapv(|z| z / 3.0);
        for side in [Subsystem::A, Subsystem::B] {
            assert!(max_abs_diff(partial_trace(&phi, side).matrix(), &target) < 1e-15);
        }
        let phi2 = max_entangled_state(2).unwrap();
        assert!(max_abs_diff(partial_trace(&phi2, Subsystem::B).matrix(), &eye(2).mapv(|z| z / 2.0)) < 1e-15);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(max_entangled_state(0).is_err());
        assert!(heisenberg_weyl(0, 0, 0).is_err());
    }

    #[test]
    fn kronecker_products() {
        assert_eq!(tensor(&eye(2), &eye(2)), eye(4));
        let p0 = ndarray::array![[ONE, ZERO], [ZERO, ZERO]];
        let p1 = ndarray::array![[ZERO, ZERO], [ZERO, ONE]];
        let mut expected = Array2::zeros((4, 4));
        expected[[1, 1]] = ONE;
        assert_eq!(tensor(&p0, &p1), expected);
        let zx = tensor(&pauli_z(), &pauli_x());
        assert_eq!(zx[[0, 1]], ONE);
        assert_eq!(zx[[2, 3]], -ONE);
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let phi = max_entangled_state(2).unwrap();
        let pt = partial_transpose(&phi, Subsystem::B);
        // T_B(Phi) = SWAP / 2
        let mut swap = Array2::zeros((4, 4));
        for i in 0..2 {
            for j in 0..2 {
                swap[[i * 2 + j, j * 2 + i]] = c(0.5);
            }
        }
        assert!(max_abs_diff(&pt, &swap) < 1e-15);
        let ev = eigvalsh(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((trace_norm(&pt).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_and_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let s = BipartiteState::product(&a, &b);
        let pt = partial_transpose(&s, Subsystem::B);
        assert!(max_abs_diff(&pt, &tensor(a.matrix(), &b.matrix().t().to_owned())) < 1e-15);
        assert!(min_eigenvalue(&pt).unwrap() > -1e-12);
        let m = random_hermitian(&mut rng, 6);
        let twice = partial_transpose_matrix(
            &partial_transpose_matrix(&m, 2, 3, Subsystem::B).unwrap(),
            2,
            3,
            Subsystem::B,
        )
        .unwrap();
        assert_eq!(twice, m);
    }

    #[test]
    fn trace_norm_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&mut rng, 4);
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_norm(&pauli_z()).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 3);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-9);

        let ket = Array1::from(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let psi = DensityMatrix::pure(&ket).unwrap();
        let tau = random_density(&mut rng, 2);
        let overlap: C64 = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| ket[i].conj() * tau.matrix()[[i, j]] * ket[j])
            .sum();
        assert!((fidelity(&psi, &tau).unwrap() - overlap.re).abs() < 1e-9);

        let zero = DensityMatrix::pure(&Array1::from(vec![ONE, ZERO])).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-12);

        let one = DensityMatrix::pure(&Array1::from(vec![ZERO, ONE])).unwrap();
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        assert!(fidelity(&zero, &mixed.clone()).is_ok());
        assert!(fidelity(&zero, &DensityMatrix::maximally_mixed(3).unwrap()).is_err());
    }

    #[test]
    fn heisenberg_weyl_qubit_and_orthogonality() {
        assert_eq!(heisenberg_weyl(2, 0, 0).unwrap(), eye(2));
        assert!(max_abs_diff(&heisenberg_weyl(2, 1, 0).unwrap(), &pauli_z()) < 1e-15);
        assert!(max_abs_diff(&heisenberg_weyl(2, 0, 1).unwrap(), &pauli_x()) < 1e-15);
        assert!(heisenberg_weyl(3, 3, 0).is_err());

        let d = 3;
        let ops: Vec<_> = (0..d)
            .flat_map(|z| (0..d).map(move |x| (z, x)))
            .map(|(z, x)| heisenberg_weyl(d, z, x).unwrap())
            .collect();
        for (a, wa) in ops.iter().enumerate() {
            assert!(max_abs_diff(&dagger(wa).dot(wa), &eye(d)) < 1e-14);
            for (b, wb) in ops.iter().enumerate() {
                let ip = trace(&dagger(wa).dot(wb));
                let expected = if a == b { 3.0 } else { 0.0 };
                assert!((ip - c(expected)).norm() < 1e-12, "pair {a},{b}");
            }
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(eye(2)).is_err());
        let mut not_herm = eye(2).mapv(|z| z / 2.0);
        not_herm[[0, 1]] = c(0.1);
        assert!(DensityMatrix::new(not_herm).is_err());
        let neg = ndarray::array![[c(1.5), ZERO], [ZERO, c(-0.5)]];
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::new(eye(3).mapv(|z| z / 3.0)).is_ok());
        assert!(BipartiteState::new(2, 2, DensityMatrix::maximally_mixed(3).unwrap()).is_err());
    }

    #[test]
    fn subsystem_permutation_reorders_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_density(&mut rng, 2);
        let b = random_density(&mut rng, 3);
        let ab = tensor(a.matrix(), b.matrix());
        let ba = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(max_abs_diff(&ba, &tensor(b.matrix(), a.matrix())) < 1e-15);
        assert!(permute_subsystems(&ab, &[2, 3], &[0, 0]).is_err());
    }
}
