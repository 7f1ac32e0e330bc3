//! Semidefinite programs: the PPT simulation-error program for the swap
//! channel and a generic diamond-distance program, on top of a small
//! interior-point backend.

mod diamond;
mod embed;
mod ipm;
mod program;
mod prop1;

pub use diamond::{diamond_distance, diamond_distance_with};
pub use embed::{embed_hermitian, unembed_hermitian, HermitianBasis};
pub use ipm::{IpmResult, IpmStatus, LmiBlock, RealLmi, SolverSettings, SparseSym, NEAR_OPTIMAL_TOL};
pub use program::{
    CompiledProgram, Equality, PsdConstraint, SdpProgram, Sense, Term, Transform, VarDecl, VarId, MAX_JOINT_DIM,
};
pub use prop1::{
    build_prop1_program, ppt_simulation_error, ppt_simulation_error_with, prop1_residual, solve, solve_with, PovmTriple,
};

use serde::Serialize;

use crate::error::Result;
use crate::qcore::{min_eigenvalue, ComplexMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

impl From<&IpmResult> for SolveStatus {
    fn from(r: &IpmResult) -> Self {
        match r.status {
            IpmStatus::Optimal => SolveStatus::Optimal,
            IpmStatus::NearOptimal => SolveStatus::NearOptimal,
            // a y-side residual that never closes means there is no feasible point
            IpmStatus::Failed if r.dual_infeasibility > 1e-3 => SolveStatus::Infeasible,
            IpmStatus::Failed => SolveStatus::NumericalFailure,
        }
    }
}

/// Result of the simulation-error program.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Simulation error clipped to `[0, 1]`.
    pub value: f64,
    /// Unclipped `1 - Tr[rho K]` of the reported witness.
    pub raw_value: f64,
    pub witness: PovmTriple,
    pub status: SolveStatus,
    /// Largest constraint violation of the reported witness, checked
    /// independently of the solver.
    pub max_residual: f64,
    pub iterations: usize,
}

/// Result of a generic program.
#[derive(Debug, Clone)]
pub struct ProgramSolution {
    /// Objective of the returned variables.
    pub value: f64,
    /// Objective of the dual certificate; brackets the optimum with `value`.
    pub bound: f64,
    pub variables: Vec<ComplexMatrix>,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Compiles, solves and maps the solution back to Hermitian variables.
pub fn solve_program(p: &SdpProgram, settings: &SolverSettings) -> Result<ProgramSolution> {
    let compiled = p.compile()?;
    let r = compiled.lmi.solve(settings)?;
    let variables = compiled.variables(&r.y);
    let s = compiled.sign;
    Ok(ProgramSolution {
        value: s * (r.dual_objective + compiled.objective_offset),
        bound: s * (r.primal_objective + compiled.objective_offset),
        variables,
        status: SolveStatus::from(&r),
        iterations: r.iterations,
    })
}

/// Most negative eigenvalue over all PSD constraints of `p` at `vars`, and
/// the largest equality violation, as one nonnegative number.
pub fn program_residual(p: &SdpProgram, vars: &[ComplexMatrix]) -> Result<f64> {
    use crate::qcore::{max_abs_diff, trace_product_re};
    let mut worst: f64 = 0.0;
    for c in &p.constraints {
        let mut m = c
            .constant
            .clone()
            .unwrap_or_else(|| ComplexMatrix::zeros((c.dim, c.dim)));
        for t in &c.terms {
            let x = &vars[t.var.0];
            for ((r, col), v) in x.indexed_iter() {
                for (i, j) in t.transform.image(r, col) {
                    m[[i, j]] += v * t.coeff;
                }
            }
        }
        worst = worst.max(-min_eigenvalue(&m)?);
    }
    for e in &p.equalities {
        match e {
            Equality::Matrix { terms, rhs } => {
                let mut lhs = ComplexMatrix::zeros(rhs.dim());
                for (v, c) in terms {
                    lhs = lhs + vars[v.0].mapv(|z| z * c);
                }
                worst = worst.max(max_abs_diff(&lhs, rhs));
            }
            Equality::Trace { terms, rhs } => {
                let lhs: f64 = terms.iter().map(|(v, g)| trace_product_re(g, &vars[v.0])).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(worst)
}
