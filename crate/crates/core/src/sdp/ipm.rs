//! Primal-dual interior-point method for real block-diagonal LMIs.
//!
//! Solves
//!
//! ```text
//!   maximize    b'y
//!   subject to  Z_j = C_j + sum_i y_i A_ij  >= 0     for every block j
//! ```
//!
//! together with its dual `minimize <C, X>` s.t. `<A_i, X> = -b_i`, `X >= 0`,
//! using the HKM search direction with Mehrotra predictor-corrector steps
//! from an infeasible start.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Diag, EigValsh, FactorizeCInto, InverseC, SolveC, SolveTriangular, UPLO};

use crate::error::{Error, Result};

/// Real symmetric matrix stored as a list of nonzero entries; both triangles
/// are present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        if let Some(e) = self.entries.iter_mut().find(|e| e.0 == r && e.1 == c) {
            e.2 += v;
        } else {
            self.entries.push((r, c, v));
        }
    }

    pub fn scaled_add(&mut self, other: &SparseSym, s: f64) {
        for &(r, c, v) in &other.entries {
            self.add(r, c, s * v);
        }
    }

    pub fn prune(&mut self) {
        self.entries.retain(|e| e.2 != 0.0);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn inner(&self, m: &Array2<f64>) -> f64 {
        self.entries.iter().map(|&(r, c, v)| v * m[[r, c]]).sum()
    }

    fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct LmiBlock {
    pub dim: usize,
    pub constant: Array2<f64>,
    /// `(variable, coefficient matrix)`, sorted by variable.
    pub coeffs: Vec<(usize, SparseSym)>,
}

impl LmiBlock {
    /// `C_j + sum_i y_i A_ij`.
    pub fn evaluate(&self, y: &[f64]) -> Array2<f64> {
        let mut z = self.constant.clone();
        for (i, a) in &self.coeffs {
            for &(r, c, v) in &a.entries {
                z[[r, c]] += y[*i] * v;
            }
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct RealLmi {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-8,
            max_iterations: 200_000,
        }
    }
}

impl SolverSettings {
    /// Default settings, with the tolerance taken from `BQT_SOLVER_TOL` when it
    /// is set to a positive number. `BQT_SOLVER_MAX_ITER` caps the iterations.
    pub fn from_env() -> Self {
        let mut s = SolverSettings::default();
        if let Some(t) = std::env::var("BQT_SOLVER_TOL")
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|t| *t > 0.0 && t.is_finite())
        {
            s.tolerance = t;
        }
        if let Some(n) = std::env::var("BQT_SOLVER_MAX_ITER")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|n| *n > 0)
        {
            s.max_iterations = n;
        }
        s
    }
}

/// Search direction `(dX, dy, dZ)`.
type Direction = (Vec<Array2<f64>>, Array1<f64>, Vec<Array2<f64>>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    /// Stalled, but with gap and infeasibilities below `NEAR_OPTIMAL_TOL`.
    NearOptimal,
    Failed,
}

pub const NEAR_OPTIMAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub y: Vec<f64>,
    pub x: Vec<Array2<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: IpmStatus,
}

impl IpmResult {
    fn error_measure(&self) -> f64 {
        self.relative_gap
            .max(self.primal_infeasibility)
            .max(self.dual_infeasibility)
    }
}

fn symmetrize(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
}

fn inner(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn frob(a: &Array2<f64>) -> f64 {
    inner(a, a).sqrt()
}

/// Largest `alpha` with `x + alpha dx >= 0`, or infinity.
fn max_step(x: &Array2<f64>, dx: &Array2<f64>) -> Result<f64> {
    let l = x.cholesky(UPLO::Lower)?;
    let t = l.solve_triangular(UPLO::Lower, Diag::NonUnit, dx)?;
    let mut w = l.solve_triangular(UPLO::Lower, Diag::NonUnit, &t.t().to_owned())?;
    symmetrize(&mut w);
    let lmin = w.eigvalsh(UPLO::Lower)?.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY })
}

struct State {
    x: Vec<Array2<f64>>,
    z: Vec<Array2<f64>>,
    y: Vec<f64>,
}

impl RealLmi {
    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::InvalidProgram(
                "objective length differs from variable count".into(),
            ));
        }
        for (j, b) in self.blocks.iter().enumerate() {
            if b.constant.dim() != (b.dim, b.dim) {
                return Err(Error::InvalidProgram(format!("block {j} constant has wrong shape")));
            }
            for (i, a) in &b.coeffs {
                if *i >= self.num_vars || a.entries.iter().any(|e| e.0 >= b.dim || e.1 >= b.dim) {
                    return Err(Error::InvalidProgram(format!("block {j} coefficient out of range")));
                }
            }
        }
        Ok(())
    }

    /// `A(G)_i = sum_j <A_ij, G_j>`.
    fn apply_op(&self, g: &[Array2<f64>]) -> Array1<f64> {
        let mut out = Array1::zeros(self.num_vars);
        for (b, gj) in self.blocks.iter().zip(g) {
            for (i, a) in &b.coeffs {
                out[*i] += a.inner(gj);
            }
        }
        out
    }

    /// `sum_i v_i A_ij` for every block.
    fn apply_adjoint(&self, v: &[f64]) -> Vec<Array2<f64>> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = Array2::zeros((b.dim, b.dim));
                for (i, a) in &b.coeffs {
                    for &(r, c, w) in &a.entries {
                        m[[r, c]] += v[*i] * w;
                    }
                }
                m
            })
            .collect()
    }

    /// `M_ik = sum_j tr(A_ij X_j A_kj Z_j^{-1})`.
    fn schur(&self, x: &[Array2<f64>], zinv: &[Array2<f64>]) -> Array2<f64> {
        let m = self.num_vars;
        let mut out = Array2::<f64>::zeros((m, m));
        for ((b, xj), wj) in self.blocks.iter().zip(x).zip(zinv) {
            for (ii, (i, ai)) in b.coeffs.iter().enumerate() {
                for (k, ak) in &b.coeffs[ii..] {
                    let mut acc = 0.0;
                    for &(p, q, va) in &ai.entries {
                        for &(r, s, vb) in &ak.entries {
                            acc += va * vb * xj[[s, p]] * wj[[q, r]];
                        }
                    }
                    out[[*i, *k]] += acc;
                }
            }
        }
        // mirror the upper triangle
        for i in 0..m {
            for k in (i + 1)..m {
                out[[k, i]] = out[[i, k]];
            }
        }
        out
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<IpmResult> {
        self.validate()?;
        let m = self.num_vars;
        let nblocks = self.blocks.len();
        let b = Array1::from(self.objective.clone());
        let total_dim: usize = self.blocks.iter().map(|b| b.dim).sum();
        if total_dim == 0 {
            return Err(Error::InvalidProgram("program has no PSD blocks".into()));
        }
        let b_norm = b.dot(&b).sqrt();
        let c_norm = self
            .blocks
            .iter()
            .map(|b| frob(&b.constant).powi(2))
            .sum::<f64>()
            .sqrt();

        let mut st = State {
            x: Vec::with_capacity(nblocks),
            z: Vec::with_capacity(nblocks),
            y: vec![0.0; m],
        };
        for blk in &self.blocks {
            let n = blk.dim as f64;
            let a_max = blk.coeffs.iter().map(|(_, a)| a.frobenius()).fold(0.0, f64::max);
            let mut xi: f64 = 10f64.max(n.sqrt());
            for (i, a) in &blk.coeffs {
                xi = xi.max(n.sqrt() * (1.0 + b[*i].abs()) / (1.0 + a.frobenius()));
            }
            let eta = 10f64.max(n.sqrt()).max(frob(&blk.constant)).max(a_max);
            st.x.push(Array2::eye(blk.dim) * xi);
            st.z.push(Array2::eye(blk.dim) * eta);
        }

        let mut best: Option<IpmResult> = None;
        let mut stall = 0usize;

        for iter in 0..settings.max_iterations {
            // residuals
            let aty = self.apply_adjoint(&st.y);
            let rd: Vec<Array2<f64>> = (0..nblocks)
                .map(|j| &self.blocks[j].constant + &aty[j] - &st.z[j])
                .collect();
            let ax = self.apply_op(&st.x);
            let rp = &b + &ax;
            let mu = (0..nblocks).map(|j| inner(&st.x[j], &st.z[j])).sum::<f64>() / total_dim as f64;
            let pobj: f64 = (0..nblocks).map(|j| inner(&self.blocks[j].constant, &st.x[j])).sum();
            let dobj = b.dot(&Array1::from(st.y.clone()));
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let pinf = rp.dot(&rp).sqrt() / (1.0 + b_norm);
            let dinf = rd.iter().map(|r| frob(r).powi(2)).sum::<f64>().sqrt() / (1.0 + c_norm);

            let snapshot = IpmResult {
                y: st.y.clone(),
                x: st.x.clone(),
                primal_objective: pobj,
                dual_objective: dobj,
                relative_gap: gap,
                primal_infeasibility: pinf,
                dual_infeasibility: dinf,
                iterations: iter,
                status: IpmStatus::Failed,
            };
            if gap <= settings.tolerance && pinf <= settings.tolerance && dinf <= settings.tolerance {
                return Ok(IpmResult {
                    status: IpmStatus::Optimal,
                    ..snapshot
                });
            }
            if best
                .as_ref()
                .is_none_or(|bst| snapshot.error_measure() < bst.error_measure())
            {
                best = Some(snapshot);
            }
            if !mu.is_finite() {
                break;
            }

            let zinv: Vec<Array2<f64>> = match st
                .z
                .iter()
                .map(|z| z.invc())
                .collect::<std::result::Result<Vec<_>, _>>()
            {
                Ok(mut v) => {
                    v.iter_mut().for_each(symmetrize);
                    v
                }
                Err(_) => break,
            };
            let mut schur = self.schur(&st.x, &zinv);
            let max_diag = schur.diag().iter().copied().fold(0.0, f64::max).max(1e-300);
            let factor = match schur.clone().factorizec_into(UPLO::Lower) {
                Ok(f) => f,
                Err(_) => {
                    schur.diag_mut().mapv_inplace(|v| v + 1e-13 * max_diag);
                    match schur.factorizec_into(UPLO::Lower) {
                        Ok(f) => f,
                        Err(_) => break,
                    }
                }
            };

            // X R_d Z^{-1} is shared by both solves
            let xrz: Vec<Array2<f64>> = (0..nblocks).map(|j| st.x[j].dot(&rd[j]).dot(&zinv[j])).collect();

            let direction = |sigma_mu: f64, corr: Option<&Vec<Array2<f64>>>| -> Result<Direction> {
                // G = sigma mu Z^{-1} - X R_d Z^{-1} - corr Z^{-1}
                let g: Vec<Array2<f64>> = (0..nblocks)
                    .map(|j| {
                        let mut g = &zinv[j] * sigma_mu - &xrz[j];
                        if let Some(c) = corr {
                            g -= &c[j].dot(&zinv[j]);
                        }
                        g
                    })
                    .collect();
                let rhs = &b + &self.apply_op(&g);
                let dy = factor.solvec(&rhs)?;
                let ady = self.apply_adjoint(dy.as_slice().unwrap());
                let dz: Vec<Array2<f64>> = (0..nblocks).map(|j| &rd[j] + &ady[j]).collect();
                let dx: Vec<Array2<f64>> = (0..nblocks)
                    .map(|j| {
                        let mut t = st.x[j].dot(&dz[j]);
                        if let Some(c) = corr {
                            t += &c[j];
                        }
                        let mut dx = &zinv[j] * sigma_mu - &st.x[j] - t.dot(&zinv[j]);
                        symmetrize(&mut dx);
                        dx
                    })
                    .collect();
                Ok((dx, dy, dz))
            };

            let steps = |dx: &[Array2<f64>], dz: &[Array2<f64>]| -> Result<(f64, f64)> {
                let mut ap = f64::INFINITY;
                let mut ad = f64::INFINITY;
                for j in 0..nblocks {
                    ap = ap.min(max_step(&st.x[j], &dx[j])?);
                    ad = ad.min(max_step(&st.z[j], &dz[j])?);
                }
                Ok((ap, ad))
            };

            // predictor
            let Ok((dx_a, _, dz_a)) = direction(0.0, None) else {
                break;
            };
            let Ok((ap_max, ad_max)) = steps(&dx_a, &dz_a) else {
                break;
            };
            let ap = ap_max.min(1.0);
            let ad = ad_max.min(1.0);
            let mu_aff = (0..nblocks)
                .map(|j| inner(&(&st.x[j] + &(&dx_a[j] * ap)), &(&st.z[j] + &(&dz_a[j] * ad))))
                .sum::<f64>()
                / total_dim as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let corr: Vec<Array2<f64>> = (0..nblocks).map(|j| dx_a[j].dot(&dz_a[j])).collect();
            let Ok((dx, dy, dz)) = direction(sigma * mu, Some(&corr)) else {
                break;
            };
            let Ok((ap_max, ad_max)) = steps(&dx, &dz) else { break };
            let tau = 0.98;
            let ap = (tau * ap_max).min(1.0);
            let ad = (tau * ad_max).min(1.0);

            for j in 0..nblocks {
                st.x[j].scaled_add(ap, &dx[j]);
                st.z[j].scaled_add(ad, &dz[j]);
                symmetrize(&mut st.x[j]);
                symmetrize(&mut st.z[j]);
            }
            for (yi, d) in st.y.iter_mut().zip(dy.iter()) {
                *yi += ad * d;
            }

            if ap.min(ad) < 1e-10 {
                stall += 1;
                if stall >= 5 {
                    break;
                }
            } else {
                stall = 0;
            }
        }

        let mut out = best.ok_or_else(|| Error::Solver("no iterate was produced".into()))?;
        out.status = if out.error_measure() <= NEAR_OPTIMAL_TOL {
            IpmStatus::NearOptimal
        } else {
            IpmStatus::Failed
        };
        Ok(out)
    }
}
