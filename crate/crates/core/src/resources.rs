//! Resource states shared by the two parties.

use crate::channels::{gadc, KrausChannel};
use crate::error::{Error, Result};
use crate::qcore::{
    eye, max_entangled_state, permute_subsystems, trace_product_re, BipartiteState, ComplexMatrix, DensityMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    fidelity: f64,
    dim: usize,
}

impl IsotropicParams {
    pub fn new(fidelity: f64, dim: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::param("fidelity", fidelity, "must lie in [0, 1]"));
        }
        if dim < 2 {
            return Err(Error::param(
                "dim",
                dim as f64,
                "isotropic states need local dimension >= 2",
            ));
        }
        Ok(IsotropicParams { fidelity, dim })
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadcParams {
    gamma: f64,
    noise: f64,
}

impl GadcParams {
    pub fn new(gamma: f64, noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param("gamma", gamma, "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&noise) {
            return Err(Error::param("noise", noise, "must lie in [0, 1]"));
        }
        Ok(GadcParams { gamma, noise })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }
}

/// `F Phi + (1 - F) (I - Phi) / (d^2 - 1)`.
pub fn isotropic_state(p: IsotropicParams) -> BipartiteState {
    let d = p.dim;
    let n = d * d;
    let phi = max_entangled_state(d).expect("dim >= 2").into_matrix();
    let f = p.fidelity;
    let rest = (1.0 - f) / (n - 1) as f64;
    // F Phi + rest (I - Phi)
    let m = eye(n).mapv(|z| z * rest) + phi.mapv(|z| z * (f - rest));
    BipartiteState::new(d, d, DensityMatrix::from_trusted(m)).expect("square dimensions")
}

/// `Tr[Phi_d rho]` for a state on `d x d`.
pub fn max_entangled_overlap(s: &BipartiteState) -> Result<f64> {
    let (da, db) = s.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "overlap with the maximally entangled state needs equal local dimensions, got {da} x {db}"
        )));
    }
    let d = da;
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += s.matrix()[[j * d + j, i * d + i]].re;
        }
    }
    Ok(acc / d as f64)
}

/// Exact Haar average over `U (x) conj(U)` conjugations: the isotropic state
/// with the same overlap with the maximally entangled state.
pub fn twirl_to_isotropic(s: &BipartiteState) -> Result<BipartiteState> {
    let (da, db) = s.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "bilateral twirl needs equal local dimensions, got {da} x {db}"
        )));
    }
    if da < 2 {
        return Err(Error::param("dim", da as f64, "twirl needs local dimension >= 2"));
    }
    let f = max_entangled_overlap(s)?.clamp(0.0, 1.0);
    Ok(isotropic_state(IsotropicParams::new(f, da)?))
}

/// Tensor-factor order of `Phi (x) Phi` is `(A1 B1 A2 B2)`; the resource is
/// regrouped to `(A1 A2)(B1 B2)` so Alice's two qubits form the first party.
pub const GADC_REGROUPING: [usize; 4] = [0, 2, 1, 3];

fn apply_on_qubit(ch: &KrausChannel, m: &ComplexMatrix, qubit: usize, count: usize) -> ComplexMatrix {
    let mut factors: Vec<KrausChannel> = (0..count).map(|_| KrausChannel::identity(2).unwrap()).collect();
    factors[qubit] = ch.clone();
    let local = factors[1..].iter().fold(factors[0].clone(), |acc, f| acc.tensor(f));
    local.apply_operator(m).expect("dimensions match by construction")
}

/// Two Bell pairs with every qubit sent through the same GADC, as a state on
/// `d_A = d_B = 4`.
pub fn gadc_resource_state(p: GadcParams) -> BipartiteState {
    let ch = gadc(p.gamma, p.noise).expect("validated parameters");
    let bell = max_entangled_state(2).unwrap().into_matrix();
    let pairs = crate::qcore::tensor(&bell, &bell);
    let mut m = permute_subsystems(&pairs, &[2, 2, 2, 2], &GADC_REGROUPING).expect("four qubits");
    for q in 0..4 {
        m = apply_on_qubit(&ch, &m, q, 4);
    }
    BipartiteState::new(4, 4, DensityMatrix::from_trusted(m)).expect("16-dimensional state")
}

/// `[1 + (g/2)(g - 2[1 + g N (1 - N)])]^2`.
pub fn gadc_entanglement_fidelity(p: GadcParams) -> f64 {
    let (g, n) = (p.gamma, p.noise);
    let inner = 1.0 + 0.5 * g * (g - 2.0 * (1.0 + g * n * (1.0 - n)));
    inner * inner
}

/// `Tr[Phi rho]` evaluated by the trace formula rather than the closed form.
pub fn gadc_fidelity_by_trace(p: GadcParams) -> f64 {
    let s = gadc_resource_state(p);
    let phi = max_entangled_state(4).unwrap();
    trace_product_re(phi.matrix(), s.matrix())
}
