//! PPT simulation error of the `d`-dimensional swap channel with a shared
//! resource state on `A^ (x) B^`.

use serde::Serialize;

use super::program::{Equality, SdpProgram, Sense, Term, Transform, VarId, MAX_JOINT_DIM};
use super::{program_residual, solve_program, SdpSolution, SolveStatus, SolverSettings};
use crate::error::{Error, Result};
use crate::qcore::{
    eye, hermitian_part, max_abs_diff, min_eigenvalue, partial_transpose_matrix, spectral_map, trace_product_re,
    BipartiteState, ComplexMatrix, Subsystem, TOL_PSD,
};

/// POVM elements `K`, `L`, `N` on the resource system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmTriple {
    #[serde(serialize_with = "crate::json::serialize_matrix")]
    pub k: ComplexMatrix,
    #[serde(serialize_with = "crate::json::serialize_matrix")]
    pub l: ComplexMatrix,
    #[serde(serialize_with = "crate::json::serialize_matrix")]
    pub n: ComplexMatrix,
}

impl PovmTriple {
    pub fn new(k: ComplexMatrix, l: ComplexMatrix, n: ComplexMatrix) -> Result<Self> {
        let dim = k.nrows();
        if [k.dim(), l.dim(), n.dim()].iter().any(|s| *s != (dim, dim)) {
            return Err(Error::DimensionMismatch(
                "POVM elements must share one square shape".into(),
            ));
        }
        let t = PovmTriple { k, l, n };
        for m in [&t.k, &t.l, &t.n] {
            if min_eigenvalue(m)? < -TOL_PSD {
                return Err(Error::InvalidState("POVM element is not positive semidefinite".into()));
            }
        }
        if max_abs_diff(&(&t.k + &t.l + &t.n), &eye(dim)) > 1e-7 {
            return Err(Error::InvalidState("POVM elements do not sum to the identity".into()));
        }
        Ok(t)
    }

    /// `(I, 0, 0)`, `(0, I, 0)` or `(0, 0, I)` style triples.
    pub fn deterministic(dim: usize, which: usize) -> Self {
        let z = ComplexMatrix::zeros((dim, dim));
        let mut v = [z.clone(), z.clone(), z];
        v[which.min(2)] = eye(dim);
        let [k, l, n] = v;
        PovmTriple { k, l, n }
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// `(Tr[K rho], Tr[L rho], Tr[N rho])`.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> (f64, f64, f64) {
        (
            trace_product_re(&self.k, rho),
            trace_product_re(&self.l, rho),
            trace_product_re(&self.n, rho),
        )
    }
}

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::param("d", d as f64, "swap dimension must be at least 2"));
    }
    Ok(())
}

/// The simulation-error program for `rho` and swap dimension `d`. Variables
/// are `K`, `L`, `N` in that order; the objective is `1 - Tr[rho K]`,
/// minimized.
pub fn build_prop1_program(rho: &BipartiteState, d: usize) -> Result<SdpProgram> {
    check_d(d)?;
    let (da, db) = rho.dims();
    let n = da * db;
    if n > MAX_JOINT_DIM {
        return Err(Error::param(
            "joint dimension",
            n as f64,
            "resource dimension exceeds the solver limit",
        ));
    }
    let df = d as f64;
    let mut p = SdpProgram::new();
    p.sense = Sense::Minimize;
    let k = p.add_var("K", n);
    let l = p.add_var("L", n);
    let nn = p.add_var("N", n);
    let pt = Transform::PartialTranspose {
        dims: (da, db),
        on: Subsystem::B,
    };
    let term = |var: VarId, coeff: f64| Term {
        var,
        coeff,
        transform: pt,
    };

    p.objective_offset = 1.0;
    p.maximize(k, rho.matrix().mapv(|z| -z));

    p.require_psd(
        "T(K + L/(d+1) + N/(d+1)^2) >= 0",
        vec![
            term(k, 1.0),
            term(l, 1.0 / (df + 1.0)),
            term(nn, 1.0 / ((df + 1.0) * (df + 1.0))),
        ],
        None,
    );
    let s = 1.0 / (df * df - 1.0);
    p.require_psd(
        "T(L + N)/(d^2-1) >= T(K)",
        vec![term(l, s), term(nn, s), term(k, -1.0)],
        None,
    );
    p.require_psd(
        "T(K + N/(d-1)^2) >= T(L)/(d-1)",
        vec![
            term(k, 1.0),
            term(nn, 1.0 / ((df - 1.0) * (df - 1.0))),
            term(l, -1.0 / (df - 1.0)),
        ],
        None,
    );
    p.require_equal(Equality::Matrix {
        terms: vec![(k, 1.0), (l, 1.0), (nn, 1.0)],
        rhs: eye(n),
    });
    for v in [k, l, nn] {
        p.require_var_psd(v);
    }
    Ok(p)
}

/// Largest violation of the program's constraints by `t`, recomputed from
/// scratch with dense partial transposes.
pub fn prop1_residual(t: &PovmTriple, dims: (usize, usize), d: usize) -> Result<f64> {
    check_d(d)?;
    let (da, db) = dims;
    if t.dim() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "witness is {0}x{0}, resource is {da}x{db}",
            t.dim()
        )));
    }
    let df = d as f64;
    let tb = |m: &ComplexMatrix| partial_transpose_matrix(m, da, db, Subsystem::B);
    let (k, l, n) = (tb(&t.k)?, tb(&t.l)?, tb(&t.n)?);
    let c1 = &k + &(&l / (df + 1.0)) + &n / ((df + 1.0) * (df + 1.0));
    let c2 = (&l + &n) / (df * df - 1.0) - &k;
    let c3 = &k + &(&n / ((df - 1.0) * (df - 1.0))) - &l / (df - 1.0);
    let mut worst: f64 = 0.0;
    for m in [&c1, &c2, &c3, &t.k, &t.l, &t.n] {
        worst = worst.max(-min_eigenvalue(m)?);
    }
    Ok(worst.max(max_abs_diff(&(&t.k + &t.l + &t.n), &eye(t.dim()))))
}

/// Makes the triple an exact POVM: Hermitian parts, negative eigenvalues
/// raised to zero, then renormalized by `S^{-1/2} . S^{-1/2}` with
/// `S = K + L + N`.
fn clean_witness(k: &ComplexMatrix, l: &ComplexMatrix, n: &ComplexMatrix) -> Result<PovmTriple> {
    let clip = |m: &ComplexMatrix| spectral_map(&hermitian_part(m), |v| v.max(0.0));
    let (k, l, n) = (clip(k)?, clip(l)?, clip(n)?);
    let s = &k + &l + &n;
    let s_inv_sqrt = spectral_map(&s, |v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })?;
    let conj = |m: &ComplexMatrix| hermitian_part(&s_inv_sqrt.dot(m).dot(&s_inv_sqrt));
    Ok(PovmTriple {
        k: conj(&k),
        l: conj(&l),
        n: conj(&n),
    })
}

pub fn solve(p: &SdpProgram) -> Result<SdpSolution> {
    solve_with(p, &SolverSettings::from_env())
}

/// Solves a program produced by [`build_prop1_program`].
pub fn solve_with(p: &SdpProgram, settings: &SolverSettings) -> Result<SdpSolution> {
    let names: Vec<&str> = p.vars.iter().map(|v| v.name.as_str()).collect();
    if names != ["K", "L", "N"] || p.objective.len() != 1 {
        return Err(Error::InvalidProgram("not a simulation-error program".into()));
    }
    let rho = p.objective[0].1.mapv(|z| -z);
    let sol = solve_program(p, settings)?;
    let witness = clean_witness(&sol.variables[0], &sol.variables[1], &sol.variables[2])?;
    let raw_value = 1.0 - trace_product_re(&witness.k, &rho);
    let max_residual = program_residual(p, &[witness.k.clone(), witness.l.clone(), witness.n.clone()])?;
    let mut status = sol.status;
    if status == SolveStatus::Optimal && max_residual > 1e-6 {
        status = SolveStatus::NearOptimal;
    }
    Ok(SdpSolution {
        value: raw_value.clamp(0.0, 1.0),
        raw_value,
        witness,
        status,
        max_residual,
        iterations: sol.iterations,
    })
}

pub fn ppt_simulation_error(rho: &BipartiteState, d: usize) -> Result<SdpSolution> {
    ppt_simulation_error_with(rho, d, &SolverSettings::from_env())
}

pub fn ppt_simulation_error_with(rho: &BipartiteState, d: usize, settings: &SolverSettings) -> Result<SdpSolution> {
    let p = build_prop1_program(rho, d)?;
    solve_with(&p, settings)
}
