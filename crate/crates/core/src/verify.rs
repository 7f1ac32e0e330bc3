//! Reconstruction of an explicit simulating channel from a POVM witness, and
//! end-to-end checks of the resulting channel.

use serde::Serialize;

use crate::channels::{choi_from_map, choi_of, gen_pauli_channel, swap_operator, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::qcore::{
    eye, min_eigenvalue, partial_trace_subsystems, partial_transpose_subsystems, tensor, BipartiteState, ComplexMatrix,
    TOL_PSD,
};
use crate::sdp::{diamond_distance, ppt_simulation_error, PovmTriple, SolveStatus};

/// Tolerance for the realized channel and the outcome probabilities.
pub const TOL_CHANNEL: f64 = 1e-7;

/// The simulating channel for one POVM witness and resource state.
#[derive(Debug, Clone)]
pub struct Remark2Channel {
    pub povm: PovmTriple,
    pub d: usize,
    pub resource: BipartiteState,
    /// `(p_K, p_L, p_N)`.
    pub probabilities: (f64, f64, f64),
    /// Effective `AB -> AB` channel once the resource is consumed.
    pub realized: ChoiMatrix,
}

/// Choi matrices of `S o M_K`, `S o M_L`, `S o M_N`: the `M` act in place
/// and the swap then exchanges the two outputs. All of the branch wiring
/// lives here.
fn branch_chois(d: usize) -> Result<[ComplexMatrix; 3]> {
    let swap = KrausChannel::unitary(swap_operator(d))?;
    let id = KrausChannel::identity(d)?;
    let garble = gen_pauli_channel(d)?;
    let k = choi_of(&swap);
    // identity on A and garbling on B, or the other way round, with equal weight
    let l1 = choi_of(&swap.compose(&id.tensor(&garble))?);
    let l2 = choi_of(&swap.compose(&garble.tensor(&id))?);
    let n = choi_of(&swap.compose(&garble.tensor(&garble))?);
    let l = (l1.matrix() + l2.matrix()).mapv(|z| z * 0.5);
    Ok([k.matrix().clone(), l, n.matrix().clone()])
}

pub fn build_remark2_channel(povm: &PovmTriple, rho: &BipartiteState, d: usize) -> Result<Remark2Channel> {
    if d < 2 {
        return Err(Error::param("d", d as f64, "swap dimension must be at least 2"));
    }
    if povm.dim() != rho.matrix().nrows() {
        return Err(Error::DimensionMismatch(format!(
            "POVM acts on dimension {}, resource has dimension {}",
            povm.dim(),
            rho.matrix().nrows()
        )));
    }
    let (pk, pl, pn) = povm.probabilities(rho.matrix());
    let total = pk + pl + pn;
    if (total - 1.0).abs() > TOL_CHANNEL {
        return Err(Error::InvalidState(format!(
            "outcome probabilities sum to {total}, the POVM does not match the state"
        )));
    }
    if pk.min(pl).min(pn) < -TOL_CHANNEL {
        return Err(Error::InvalidState("negative outcome probability".into()));
    }
    let probabilities = (pk.max(0.0), pl.max(0.0), pn.max(0.0));
    let [jk, jl, jn] = branch_chois(d)?;
    let j = jk.mapv(|z| z * probabilities.0) + jl.mapv(|z| z * probabilities.1) + jn.mapv(|z| z * probabilities.2);
    let realized = ChoiMatrix::with_tolerance(d * d, d * d, j, TOL_CHANNEL, TOL_CHANNEL)?;
    Ok(Remark2Channel {
        povm: povm.clone(),
        d,
        resource: rho.clone(),
        probabilities,
        realized,
    })
}

impl Remark2Channel {
    /// Choi matrix of the full map `A B A^ B^ -> A B`, with input factors in
    /// that order. The resource is measured and the outcome selects a branch.
    pub fn full_choi(&self) -> Result<ComplexMatrix> {
        let d = self.d;
        let (da, db) = self.resource.dims();
        let nres = da * db;
        let [jk, jl, jn] = branch_chois(d)?;
        let branches: Vec<(ChoiMatrix, &ComplexMatrix)> = [(jk, &self.povm.k), (jl, &self.povm.l), (jn, &self.povm.n)]
            .into_iter()
            .map(|(j, e)| {
                Ok((
                    ChoiMatrix::with_tolerance(d * d, d * d, j, TOL_CHANNEL, TOL_CHANNEL)?,
                    e,
                ))
            })
            .collect::<Result<_>>()?;
        choi_from_map(d * d * nres, d * d, |x| {
            let mut out = ComplexMatrix::zeros((d * d, d * d));
            for (ch, e) in &branches {
                let weighted = tensor(&eye(d * d), e).dot(x);
                let omega = partial_trace_subsystems(&weighted, &[d * d, nres], &[false, true])?;
                out = out + ch.apply_operator(&omega)?;
            }
            Ok(out)
        })
    }
}

/// `(1/2) || S - realized ||_diamond`.
pub fn achieved_error(ch: &Remark2Channel) -> Result<f64> {
    let ideal = choi_of(&KrausChannel::unitary(swap_operator(ch.d))?);
    diamond_distance(&ideal, &ch.realized)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CpptpReport {
    /// Smallest eigenvalue of the partially transposed Choi matrix.
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// Checks that `T_B' o N o T_B` is completely positive, i.e. that the Choi
/// matrix transposed on every factor flagged as Bob's is PSD. `in_dims` and
/// `out_dims` list the factors in Choi order (inputs first).
pub fn check_cpptp_factors(
    choi: &ComplexMatrix,
    in_dims: &[usize],
    in_bob: &[bool],
    out_dims: &[usize],
    out_bob: &[bool],
) -> Result<CpptpReport> {
    if in_dims.len() != in_bob.len() || out_dims.len() != out_bob.len() {
        return Err(Error::DimensionMismatch(
            "factor lists and Bob masks differ in length".into(),
        ));
    }
    let dims: Vec<usize> = in_dims.iter().chain(out_dims).copied().collect();
    let mask: Vec<bool> = in_bob.iter().chain(out_bob).copied().collect();
    let pt = partial_transpose_subsystems(choi, &dims, &mask)?;
    let min = min_eigenvalue(&pt)?;
    Ok(CpptpReport {
        min_eigenvalue: min,
        passed: min >= -TOL_PSD,
    })
}

/// C-PPT-P check for a channel `A_in B_in -> A_out B_out` with `d x d` on
/// both sides.
pub fn check_cpptp(ch: &ChoiMatrix, d: usize) -> Result<bool> {
    if ch.dim_in() != d * d || ch.dim_out() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}->{}, expected {}->{}",
            ch.dim_in(),
            ch.dim_out(),
            d * d,
            d * d
        )));
    }
    Ok(check_cpptp_factors(ch.matrix(), &[d, d], &[false, true], &[d, d], &[false, true])?.passed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CpptpTarget {
    /// The `AB -> AB` channel with the resource consumed.
    Effective,
    /// The map `A B A^ B^ -> A B` including the measurement of the resource.
    Full,
}

impl Remark2Channel {
    pub fn check_cpptp(&self, target: CpptpTarget) -> Result<CpptpReport> {
        let d = self.d;
        match target {
            CpptpTarget::Effective => {
                check_cpptp_factors(self.realized.matrix(), &[d, d], &[false, true], &[d, d], &[false, true])
            }
            CpptpTarget::Full => {
                let (da, db) = self.resource.dims();
                check_cpptp_factors(
                    &self.full_choi()?,
                    &[d, d, da, db],
                    &[false, true, false, true],
                    &[d, d],
                    &[false, true],
                )
            }
        }
    }
}

/// Summary of the witness-to-channel pipeline.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifyReport {
    pub d: usize,
    pub sdp_value: f64,
    pub sdp_status: SolveStatus,
    pub max_residual: f64,
    pub probabilities: [f64; 3],
    pub achieved_error: f64,
    pub discrepancy: f64,
    pub cpptp: CpptpReport,
}

/// Solves the simulation-error program for `rho`, rebuilds the channel from
/// its witness and measures how well that channel really does.
pub fn verify_resource(rho: &BipartiteState, d: usize) -> Result<VerifyReport> {
    let sol = ppt_simulation_error(rho, d)?;
    if !sol.status.is_usable() {
        return Err(Error::Solver(format!(
            "simulation-error program ended with status {:?}",
            sol.status
        )));
    }
    let ch = build_remark2_channel(&sol.witness, rho, d)?;
    let achieved = achieved_error(&ch)?;
    let cpptp = ch.check_cpptp(CpptpTarget::Full)?;
    let (pk, pl, pn) = ch.probabilities;
    Ok(VerifyReport {
        d,
        sdp_value: sol.value,
        sdp_status: sol.status,
        max_residual: sol.max_residual,
        probabilities: [pk, pl, pn],
        achieved_error: achieved,
        discrepancy: (achieved - sol.value).abs(),
        cpptp,
    })
}
