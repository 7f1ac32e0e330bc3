use super::program::{Equality, SdpProgram, Term, Transform, MAX_JOINT_DIM};
use super::{solve_program, SolveStatus, SolverSettings};
use crate::channels::ChoiMatrix;
use crate::error::{Error, Result};
use crate::qcore::{eye, hermitian_part};

/// `(1/2) ||A - B||_diamond`.
pub fn diamond_distance(a: &ChoiMatrix, b: &ChoiMatrix) -> Result<f64> {
    diamond_distance_with(a, b, &SolverSettings::from_env())
}

/// Half the diamond norm of the difference, as the optimum of
///
/// ```text
///   maximize  Re Tr[(J_A - J_B) W]
///   s.t.      0 <= W <= rho (x) I_out,  rho >= 0,  Tr rho = 1
/// ```
pub fn diamond_distance_with(a: &ChoiMatrix, b: &ChoiMatrix, settings: &SolverSettings) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}->{} and {}->{}",
            a.dim_in(),
            a.dim_out(),
            b.dim_in(),
            b.dim_out()
        )));
    }
    let (din, dout) = (a.dim_in(), a.dim_out());
    let n = din * dout;
    if n > MAX_JOINT_DIM {
        return Err(Error::param(
            "joint dimension",
            n as f64,
            "Choi dimension exceeds the solver limit",
        ));
    }
    let delta = hermitian_part(&(a.matrix() - b.matrix()));
    if delta.iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }

    let mut p = SdpProgram::new();
    let w = p.add_var("W", n);
    let rho = p.add_var("rho", din);
    p.maximize(w, delta);
    p.require_var_psd(w);
    p.require_psd(
        "rho (x) I - W >= 0",
        vec![
            Term {
                var: rho,
                coeff: 1.0,
                transform: Transform::TensorIdentity(dout),
            },
            Term {
                var: w,
                coeff: -1.0,
                transform: Transform::Identity,
            },
        ],
        None,
    );
    p.require_equal(Equality::Trace {
        terms: vec![(rho, eye(din))],
        rhs: 1.0,
    });

    let sol = solve_program(&p, settings)?;
    match sol.status {
        SolveStatus::Optimal | SolveStatus::NearOptimal => Ok(sol.value.clamp(0.0, 1.0)),
        s => Err(Error::Solver(format!(
            "diamond-distance program ended with status {s:?} after {} iterations",
            sol.iterations
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_of, KrausChannel};
    use crate::qcore::{ComplexMatrix, C64};
    use ndarray::array;

    fn pauli_x() -> ComplexMatrix {
        array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ]
    }

    #[test]
    fn identical_channels_are_at_distance_zero() {
        let id = choi_of(&KrausChannel::identity(2).unwrap());
        assert_eq!(diamond_distance(&id, &id).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_outputs_are_perfectly_distinguishable() {
        let id = choi_of(&KrausChannel::identity(2).unwrap());
        let x = choi_of(&KrausChannel::unitary(pauli_x()).unwrap());
        let v = diamond_distance(&id, &x).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }
}
