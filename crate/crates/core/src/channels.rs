//! Kraus and Choi channel representations, plus the specific channels the
//! teleportation analysis needs: the two-qudit swap, the generalized Pauli
//! garbling channel and the generalized amplitude damping channel.
//!
//! Choi matrices are unnormalized and reference-first:
//! `J = sum_{ij} |i><j| (x) N(|i><j|)`, so `Tr J = dim_in` and
//! `Tr_out J = I_in` for a trace-preserving map.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::{
    self, dagger, eigh, eye, haar_unitary, heisenberg_weyl, max_abs_diff, partial_trace_subsystems, random_density,
    tensor, ComplexMatrix, DensityMatrix, C64, ONE, TOL_PSD, ZERO,
};

/// Trace-preservation tolerance for Kraus sets and Choi marginals.
pub const TOL_TP: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerance(dim_in, dim_out, kraus, TOL_TP)
    }

    pub(crate) fn with_tolerance(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("zero dimension".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus set".into()));
        }
        if let Some(bad) = kraus.iter().find(|k| k.dim() != (dim_out, dim_in)) {
            return Err(Error::InvalidChannel(format!(
                "Kraus operator is {:?}, expected {dim_out}x{dim_in}",
                bad.dim()
            )));
        }
        let mut effect = Array2::zeros((dim_in, dim_in));
        for k in &kraus {
            effect += &dagger(k).dot(k);
        }
        let dev = max_abs_diff(&effect, &eye(dim_in));
        if dev > tol {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(KrausChannel { dim_in, dim_out, kraus })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, d, vec![eye(d)])
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let n = u.nrows();
        Self::new(n, n, vec![u])
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `sum_i A_i X A_i^dagger` on an arbitrary operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}, operator is {:?}",
                self.dim_in,
                x.dim()
            )));
        }
        let mut out = Array2::zeros((self.dim_out, self.dim_out));
        for k in &self.kraus {
            out += &k.dot(x).dot(&dagger(k));
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply_operator(rho.matrix())?))
    }

    /// `self (x) other` acting on the joint input in tensor order.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| tensor(a, b)))
            .collect();
        KrausChannel {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch("composition dimensions".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| first.kraus.iter().map(move |b| a.dot(b)))
            .collect();
        Ok(KrausChannel {
            dim_in: first.dim_in,
            dim_out: self.dim_out,
            kraus,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(dim_in: usize, dim_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(dim_in, dim_out, matrix, TOL_PSD, TOL_TP)
    }

    pub(crate) fn with_tolerance(
        dim_in: usize,
        dim_out: usize,
        matrix: ComplexMatrix,
        tol_psd: f64,
        tol_tp: f64,
    ) -> Result<Self> {
        let n = dim_in * dim_out;
        if n == 0 || matrix.dim() != (n, n) {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is {:?}, expected {n}x{n}",
                matrix.dim()
            )));
        }
        let min = qcore::min_eigenvalue(&matrix)?;
        if min < -tol_psd {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not PSD (minimum eigenvalue {min:.3e})"
            )));
        }
        let marginal = partial_trace_subsystems(&matrix, &[dim_in, dim_out], &[false, true])?;
        let dev = max_abs_diff(&marginal, &eye(dim_in));
        if dev > tol_tp {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not trace preserving (deviation {dev:.3e})"
            )));
        }
        Ok(ChoiMatrix {
            dim_in,
            dim_out,
            matrix,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `N(X) = Tr_in[(X^T (x) I) J]`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.dim() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "channel input is {}, operator is {:?}",
                self.dim_in,
                x.dim()
            )));
        }
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut out = Array2::zeros((dout, dout));
        for i in 0..di {
            for j in 0..di {
                let w = x[[i, j]];
                if w == ZERO {
                    continue;
                }
                // coefficient of |i><j| in X picks block (i, j) of J
                let block = self
                    .matrix
                    .slice(ndarray::s![i * dout..(i + 1) * dout, j * dout..(j + 1) * dout]);
                out.scaled_add(w, &block);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(self.apply_operator(rho.matrix())?))
    }
}

/// Unnormalized reference-first Choi matrix of an arbitrary linear map given
/// as a closure on operators.
pub fn choi_from_map(
    dim_in: usize,
    dim_out: usize,
    map: impl Fn(&ComplexMatrix) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    let n = dim_in * dim_out;
    let mut j = Array2::zeros((n, n));
    let mut unit = Array2::zeros((dim_in, dim_in));
    for a in 0..dim_in {
        for b in 0..dim_in {
            unit[[a, b]] = ONE;
            let image = map(&unit)?;
            unit[[a, b]] = ZERO;
            j.slice_mut(ndarray::s![
                a * dim_out..(a + 1) * dim_out,
                b * dim_out..(b + 1) * dim_out
            ])
            .assign(&image);
        }
    }
    Ok(j)
}

pub fn choi_of(ch: &KrausChannel) -> ChoiMatrix {
    let (di, dout) = (ch.dim_in, ch.dim_out);
    let n = di * dout;
    let mut j = Array2::zeros((n, n));
    for k in &ch.kraus {
        // column vector of (I (x) A)|Gamma>: entry (i, a) = A[a, i]
        let v: Vec<C64> = (0..n).map(|idx| k[[idx % dout, idx / dout]]).collect();
        for r in 0..n {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..n {
                j[[r, c]] += v[r] * v[c].conj();
            }
        }
    }
    ChoiMatrix {
        dim_in: di,
        dim_out: dout,
        matrix: j,
    }
}

/// Kraus operators from the spectral decomposition of a Choi matrix; spectral
/// weight below `TOL_PSD` is dropped.
pub fn kraus_of(choi: &ChoiMatrix) -> Result<KrausChannel> {
    let (vals, vecs) = eigh(&choi.matrix)?;
    if let Some(&min) = vals.iter().min_by(|a, b| a.total_cmp(b)) {
        if min < -TOL_PSD {
            return Err(Error::InvalidChannel(format!(
                "Choi matrix is not PSD (minimum eigenvalue {min:.3e})"
            )));
        }
    }
    let (di, dout) = (choi.dim_in, choi.dim_out);
    let mut kraus = Vec::new();
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda <= TOL_PSD {
            continue;
        }
        let s = lambda.sqrt();
        let a = Array2::from_shape_fn((dout, di), |(a, i)| vecs[[i * dout + a, k]] * s);
        kraus.push(a);
    }
    // Clipping perturbs trace preservation by at most n * TOL_PSD.
    KrausChannel::with_tolerance(di, dout, kraus, (di * dout) as f64 * TOL_PSD + TOL_TP)
}

/// The `d^2 x d^2` operator exchanging two `d`-dimensional factors.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let n = d * d;
    let mut s = Array2::zeros((n, n));
    for i in 0..d {
        for j in 0..d {
            s[[j * d + i, i * d + j]] = ONE;
        }
    }
    s
}

/// Factor dimensions of a channel `A_in B_in -> A_out B_out`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteDims {
    pub a_in: usize,
    pub b_in: usize,
    pub a_out: usize,
    pub b_out: usize,
}

impl BipartiteDims {
    pub fn square(d: usize) -> Self {
        BipartiteDims {
            a_in: d,
            b_in: d,
            a_out: d,
            b_out: d,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.a_in * self.b_in
    }

    pub fn dim_out(&self) -> usize {
        self.a_out * self.b_out
    }
}

#[derive(Debug, Clone)]
pub enum ChannelRepr {
    Kraus(KrausChannel),
    Choi(ChoiMatrix),
}

#[derive(Debug, Clone)]
pub struct BipartiteChannel {
    pub dims: BipartiteDims,
    pub repr: ChannelRepr,
}

impl BipartiteChannel {
    pub fn new(dims: BipartiteDims, repr: ChannelRepr) -> Result<Self> {
        let (di, dout) = match &repr {
            ChannelRepr::Kraus(k) => (k.dim_in, k.dim_out),
            ChannelRepr::Choi(c) => (c.dim_in, c.dim_out),
        };
        if di != dims.dim_in() || dout != dims.dim_out() {
            return Err(Error::DimensionMismatch(format!(
                "channel is {di}->{dout} but factor dimensions are {dims:?}"
            )));
        }
        Ok(BipartiteChannel { dims, repr })
    }

    pub fn choi(&self) -> ChoiMatrix {
        match &self.repr {
            ChannelRepr::Kraus(k) => choi_of(k),
            ChannelRepr::Choi(c) => c.clone(),
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match &self.repr {
            ChannelRepr::Kraus(k) => k.apply(rho),
            ChannelRepr::Choi(c) => c.apply(rho),
        }
    }
}

/// Ideal two-qudit swap: conjugation by the SWAP unitary.
pub fn swap_channel(d: usize) -> Result<BipartiteChannel> {
    if d == 0 {
        return Err(Error::param("d", 0.0, "must be at least 1"));
    }
    let k = KrausChannel::unitary(swap_operator(d))?;
    BipartiteChannel::new(BipartiteDims::square(d), ChannelRepr::Kraus(k))
}

/// `D(s) = 1/(d^2-1) sum_{(z,x) != (0,0)} W^{z,x} s W^{z,x}^dagger`.
pub fn gen_pauli_channel(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::param("d", d as f64, "garbling channel needs d >= 2"));
    }
    let scale = 1.0 / ((d * d - 1) as f64).sqrt();
    let mut kraus = Vec::with_capacity(d * d - 1);
    for z in 0..d {
        for x in 0..d {
            if (z, x) != (0, 0) {
                kraus.push(heisenberg_weyl(d, z, x)?.mapv(|w| w * scale));
            }
        }
    }
    KrausChannel::new(d, d, kraus)
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::param(name, v, "must lie in [0, 1]"));
    }
    Ok(())
}

/// Generalized amplitude damping with damping `gamma` and noise `n`.
pub fn gadc(gamma: f64, n: f64) -> Result<KrausChannel> {
    check_unit_interval("gamma", gamma)?;
    check_unit_interval("noise", n)?;
    let r = |x: f64| C64::new(x.sqrt(), 0.0);
    let a1 = ndarray::array![[r(1.0 - n), ZERO], [ZERO, r((1.0 - n) * (1.0 - gamma))]];
    let a2 = ndarray::array![[ZERO, r(gamma * (1.0 - n))], [ZERO, ZERO]];
    let a3 = ndarray::array![[r(n * (1.0 - gamma)), ZERO], [ZERO, r(n)]];
    let a4 = ndarray::array![[ZERO, ZERO], [r(gamma * n), ZERO]];
    KrausChannel::new(2, 2, vec![a1, a2, a3, a4])
}

/// Outcome of the randomized check of `(V_A (x) U_B) S = S (U_A (x) V_B)`.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryReport {
    pub trials: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

pub const SWAP_SYMMETRY_TOL: f64 = 1e-9;

pub fn swap_symmetry_report(d: usize, trials: usize, seed: u64) -> Result<SymmetryReport> {
    if d == 0 || trials == 0 {
        return Err(Error::param("trials", trials as f64, "d and trials must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let swap = swap_operator(d);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = haar_unitary(&mut rng, d);
        let v = haar_unitary(&mut rng, d);
        let omega = random_density(&mut rng, d * d);
        let before = KrausChannel::unitary(tensor(&u, &v))?;
        let after = KrausChannel::unitary(tensor(&v, &u))?;
        let s = KrausChannel::unitary(swap.clone())?;
        let lhs = after.compose(&s)?.apply_operator(omega.matrix())?;
        let rhs = s.compose(&before)?.apply_operator(omega.matrix())?;
        worst = worst.max(max_abs_diff(&lhs, &rhs));
    }
    Ok(SymmetryReport {
        trials,
        max_deviation: worst,
        passed: worst <= SWAP_SYMMETRY_TOL,
    })
}

pub fn verify_swap_symmetry(d: usize, trials: usize, seed: u64) -> Result<bool> {
    Ok(swap_symmetry_report(d, trials, seed)?.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{eigvalsh, max_entangled_state, random_density, trace};
    use ndarray::Array1;

    fn basis_state(d: usize, k: usize) -> DensityMatrix {
        let mut v = Array1::from_elem(d, ZERO);
        v[k] = ONE;
        DensityMatrix::pure(&v).unwrap()
    }

    #[test]
    fn swap_exchanges_basis_product() {
        let ch = swap_channel(2).unwrap();
        let input = tensor(basis_state(2, 0).matrix(), basis_state(2, 1).matrix());
        let out = ch.apply(&DensityMatrix::new(input).unwrap()).unwrap();
        let expected = tensor(basis_state(2, 1).matrix(), basis_state(2, 0).matrix());
        assert_eq!(out.matrix(), &expected);

        let phi = max_entangled_state(2).unwrap();
        let out = ch.apply(phi.state()).unwrap();
        assert!(max_abs_diff(out.matrix(), phi.matrix()) < 1e-15);
    }

    #[test]
    fn swap_choi_is_rank_one_with_trace_four() {
        let j = swap_channel(2).unwrap().choi();
        assert!((trace(j.matrix()).re - 4.0).abs() < 1e-12);
        let ev = eigvalsh(j.matrix()).unwrap();
        assert!((ev[15] - 4.0).abs() < 1e-12);
        assert!(ev.iter().take(15).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn swap_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(&mut rng, 9);
        let ch = swap_channel(3).unwrap();
        let twice = ch.apply(&ch.apply(&rho).unwrap()).unwrap();
        assert_eq!(twice.matrix(), rho.matrix());
    }

    #[test]
    fn identity_channel_and_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let id = KrausChannel::identity(3).unwrap();
        let rho = random_density(&mut rng, 3);
        assert!(max_abs_diff(id.apply(&rho).unwrap().matrix(), rho.matrix()) < 1e-15);

        let j = choi_of(&KrausChannel::identity(2).unwrap());
        let phi = max_entangled_state(2).unwrap();
        assert!(max_abs_diff(j.matrix(), &phi.matrix().mapv(|z| z * 2.0)) < 1e-15);
    }

    #[test]
    fn full_damping_maps_to_ground_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = gadc(1.0, 0.0).unwrap();
        let ground = basis_state(2, 0);
        for _ in 0..5 {
            let out = ch.apply(&random_density(&mut rng, 2)).unwrap();
            assert!(max_abs_diff(out.matrix(), ground.matrix()) < 1e-15);
        }
    }

    #[test]
    fn no_damping_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [0.0, 0.3, 1.0] {
            let ch = gadc(0.0, n).unwrap();
            let rho = random_density(&mut rng, 2);
            assert!(max_abs_diff(ch.apply(&rho).unwrap().matrix(), rho.matrix()) < 1e-15);
        }
    }

    #[test]
    fn gadc_rejects_out_of_range() {
        assert!(gadc(-0.1, 0.5).is_err());
        assert!(gadc(0.5, 1.5).is_err());
        assert!(gadc(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn kraus_and_choi_agree_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for ch in [gadc(0.3, 0.2).unwrap(), gen_pauli_channel(3).unwrap()] {
            let j = choi_of(&ch);
            let back = kraus_of(&j).unwrap();
            for _ in 0..20 {
                let rho = random_density(&mut rng, ch.dim_in());
                let a = ch.apply(&rho).unwrap();
                let b = j.apply(&rho).unwrap();
                let c = back.apply(&rho).unwrap();
                assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
                assert!(max_abs_diff(a.matrix(), c.matrix()) < 1e-10);
            }
            assert!(max_abs_diff(choi_of(&back).matrix(), j.matrix()) < 1e-9);
        }
    }

    #[test]
    fn pauli_channel_qubit_action() {
        let d2 = gen_pauli_channel(2).unwrap();
        let out = d2.apply(&basis_state(2, 0)).unwrap();
        let expected = ndarray::array![[C64::new(1.0 / 3.0, 0.0), ZERO], [ZERO, C64::new(2.0 / 3.0, 0.0)]];
        assert!(max_abs_diff(out.matrix(), &expected) < 1e-15);

        // sum over all d^2 Weyl conjugations of rho is d Tr[rho] I, so D(rho) = (2I - rho)/3 on qubits
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let rho = random_density(&mut rng, 2);
            let expected = (eye(2).mapv(|z| z * 2.0) - rho.matrix()).mapv(|z| z / 3.0);
            assert!(max_abs_diff(d2.apply(&rho).unwrap().matrix(), &expected) < 1e-14);
        }
    }

    #[test]
    fn pauli_channel_choi_spectrum() {
        let j = choi_of(&gen_pauli_channel(2).unwrap());
        let ev = eigvalsh(j.matrix()).unwrap();
        assert!(ev[0].abs() < 1e-12);
        for v in ev.iter().skip(1) {
            assert!((v - 2.0 / 3.0).abs() < 1e-12);
        }
        assert!(gen_pauli_channel(1).is_err());
    }

    #[test]
    fn choi_validation_rejects_bad_matrices() {
        let j = choi_of(&gadc(0.4, 0.1).unwrap());
        assert!(ChoiMatrix::new(2, 2, j.matrix().clone()).is_ok());
        assert!(ChoiMatrix::new(2, 2, j.matrix().mapv(|z| z * 2.0)).is_err());
        let not_psd = swap_operator(2);
        assert!(ChoiMatrix::new(2, 2, not_psd).is_err());
        assert!(KrausChannel::new(2, 2, vec![eye(2).mapv(|z| z * 0.5)]).is_err());
    }

    #[test]
    fn symmetry_hand_example() {
        // U = X on Alice, V = Z on Bob, input |01><01|
        let x = heisenberg_weyl(2, 0, 1).unwrap();
        let z = heisenberg_weyl(2, 1, 0).unwrap();
        let input = tensor(basis_state(2, 0).matrix(), basis_state(2, 1).matrix());
        let s = KrausChannel::unitary(swap_operator(2)).unwrap();
        let lhs = KrausChannel::unitary(tensor(&z, &x))
            .unwrap()
            .compose(&s)
            .unwrap()
            .apply_operator(&input)
            .unwrap();
        let rhs = s
            .compose(&KrausChannel::unitary(tensor(&x, &z)).unwrap())
            .unwrap()
            .apply_operator(&input)
            .unwrap();
        let expected = tensor(basis_state(2, 1).matrix(), basis_state(2, 1).matrix());
        assert!(max_abs_diff(&lhs, &expected) < 1e-15);
        assert!(max_abs_diff(&rhs, &expected) < 1e-15);
        assert!(verify_swap_symmetry(2, 1, 0).unwrap());
    }
}
