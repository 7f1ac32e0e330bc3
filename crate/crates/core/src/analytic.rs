//! Closed-form simulation errors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::resources::{gadc_entanglement_fidelity, GadcParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Branch {
    /// `F <= 1/d_hat`: the resource is useless.
    NoEntanglement,
    /// `F > 1/d_hat` and `d_hat <= d^2`.
    MidDimension,
    /// `F > 1/d_hat` and `d_hat > d^2`.
    HighDimension,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::NoEntanglement => "noEntanglement",
            Branch::MidDimension => "midDimension",
            Branch::HighDimension => "highDimension",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ErrorBranch {
    pub value: f64,
    pub branch: Branch,
    /// The PPT value is known to be achievable with LOCC. `false` means
    /// unknown, not strictly loose.
    pub locc_tight: bool,
}

/// `1 - 1/d^2`.
pub fn no_resource_error(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::param("d", d as f64, "must be at least 1"));
    }
    let d2 = (d * d) as f64;
    Ok(1.0 - 1.0 / d2)
}

/// Simulation error with an isotropic resource of fidelity `f` and local
/// dimension `d_hat`.
pub fn isotropic_error(d: usize, f: f64, d_hat: usize) -> Result<ErrorBranch> {
    if d < 2 {
        return Err(Error::param("d", d as f64, "must be at least 2"));
    }
    if d_hat < 2 {
        return Err(Error::param("dHat", d_hat as f64, "must be at least 2"));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::param("fidelity", f, "must lie in [0, 1]"));
    }
    let d2 = (d * d) as f64;
    let dh = d_hat as f64;
    let (value, branch) = if f <= 1.0 / dh {
        (1.0 - 1.0 / d2, Branch::NoEntanglement)
    } else if d_hat <= d * d {
        (1.0 - f * dh / d2, Branch::MidDimension)
    } else {
        ((1.0 - 1.0 / d2) * (1.0 - f) / (1.0 - 1.0 / dh), Branch::HighDimension)
    };
    Ok(ErrorBranch {
        value,
        branch,
        locc_tight: branch != Branch::HighDimension,
    })
}

/// `1 - max{F(gamma, N), 1/16}`, the published expression for two GADC-damped
/// Bell pairs. The floor is not attained: once `F < 1/4` the PPT error is the
/// no-resource value `3/4`, see [`gadc_twirl_error`].
pub fn gadc_error(gamma: f64, n: f64) -> Result<f64> {
    let f = gadc_entanglement_fidelity(GadcParams::new(gamma, n)?);
    Ok(1.0 - f.max(1.0 / 16.0))
}

/// Error of twirling the GADC resource to an isotropic state on `4 x 4` and
/// feeding it to the qubit swap: `1 - max{F, 1/4}`.
pub fn gadc_twirl_error(gamma: f64, n: f64) -> Result<f64> {
    let f = gadc_entanglement_fidelity(GadcParams::new(gamma, n)?);
    Ok(isotropic_error(2, f, 4)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_resource_values() {
        assert_eq!(no_resource_error(1).unwrap(), 0.0);
        assert_eq!(no_resource_error(2).unwrap(), 0.75);
        assert!((no_resource_error(10).unwrap() - 0.99).abs() < 1e-15);
        assert!(no_resource_error(0).is_err());
    }

    #[test]
    fn branch_examples() {
        let e = isotropic_error(2, 1.0, 4).unwrap();
        assert_eq!((e.value, e.branch, e.locc_tight), (0.0, Branch::MidDimension, true));
        let e = isotropic_error(2, 0.2, 4).unwrap();
        assert_eq!((e.value, e.branch), (0.75, Branch::NoEntanglement));
        let e = isotropic_error(2, 0.5, 9).unwrap();
        assert!((e.value - 27.0 / 64.0).abs() < 1e-15);
        assert_eq!((e.branch, e.locc_tight), (Branch::HighDimension, false));
    }

    #[test]
    fn parameters_are_rejected_not_clamped() {
        assert!(isotropic_error(1, 0.5, 4).is_err());
        assert!(isotropic_error(2, 1.5, 4).is_err());
        assert!(isotropic_error(2, 0.5, 1).is_err());
        assert!(gadc_error(1.2, 0.0).is_err());
    }

    #[test]
    fn gadc_examples() {
        assert_eq!(gadc_error(0.0, 0.3).unwrap(), 0.0);
        assert!((gadc_error(1.0, 0.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((gadc_twirl_error(1.0, 0.5).unwrap() - 0.75).abs() < 1e-15);
    }
}
