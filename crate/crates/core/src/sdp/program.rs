//! Solver-independent description of a semidefinite program over Hermitian
//! matrix variables, and its compilation to a real block LMI.

use std::collections::BTreeMap;

use ndarray::Array2;

use super::embed::{embed_hermitian, HermitianBasis};
use super::ipm::{LmiBlock, RealLmi, SparseSym};
use crate::error::{Error, Result};
use crate::qcore::{hermiticity_error, is_real, ComplexMatrix, Subsystem};

/// Largest matrix dimension accepted by the compiler.
pub const MAX_JOINT_DIM: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Partial transpose of one factor of a `dims.0 x dims.1` space.
    PartialTranspose {
        dims: (usize, usize),
        on: Subsystem,
    },
    /// `X -> X (x) I_k`.
    TensorIdentity(usize),
}

impl Transform {
    pub fn output_dim(&self, var_dim: usize) -> usize {
        match *self {
            Transform::TensorIdentity(k) => var_dim * k,
            _ => var_dim,
        }
    }

    /// Positions that the matrix unit `E_rc` is sent to, each with weight one.
    pub(crate) fn image(&self, r: usize, c: usize) -> Vec<(usize, usize)> {
        match *self {
            Transform::Identity => vec![(r, c)],
            Transform::PartialTranspose { dims: (_, db), on } => {
                let (ra, rb) = (r / db, r % db);
                let (ca, cb) = (c / db, c % db);
                vec![match on {
                    Subsystem::B => (ra * db + cb, ca * db + rb),
                    Subsystem::A => (ca * db + rb, ra * db + cb),
                }]
            }
            Transform::TensorIdentity(k) => (0..k).map(|i| (r * k + i, c * k + i)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sense {
    #[default]
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub var: VarId,
    pub coeff: f64,
    pub transform: Transform,
}

/// `sum_k coeff_k T_k(X_k) + constant >= 0`.
#[derive(Debug, Clone)]
pub struct PsdConstraint {
    pub label: String,
    pub dim: usize,
    pub terms: Vec<Term>,
    pub constant: Option<ComplexMatrix>,
}

#[derive(Debug, Clone)]
pub enum Equality {
    /// `sum_k c_k X_k = rhs` entrywise.
    Matrix {
        terms: Vec<(VarId, f64)>,
        rhs: ComplexMatrix,
    },
    /// `sum_k Re Tr[G_k X_k] = rhs`.
    Trace {
        terms: Vec<(VarId, ComplexMatrix)>,
        rhs: f64,
    },
}

#[derive(Debug, Clone)]
pub struct VarDecl {
    pub name: String,
    pub dim: usize,
}

/// Optimizes `sum_k Re Tr[C_k X_k] + offset` over Hermitian `X_k`.
#[derive(Debug, Clone, Default)]
pub struct SdpProgram {
    pub vars: Vec<VarDecl>,
    pub objective: Vec<(VarId, ComplexMatrix)>,
    pub objective_offset: f64,
    pub sense: Sense,
    pub equalities: Vec<Equality>,
    pub constraints: Vec<PsdConstraint>,
}

impl SdpProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, dim: usize) -> VarId {
        self.vars.push(VarDecl { name: name.into(), dim });
        VarId(self.vars.len() - 1)
    }

    pub fn var_dim(&self, v: VarId) -> usize {
        self.vars[v.0].dim
    }

    pub fn maximize(&mut self, var: VarId, c: ComplexMatrix) {
        self.objective.push((var, c));
    }

    pub fn require_psd(&mut self, label: impl Into<String>, terms: Vec<Term>, constant: Option<ComplexMatrix>) {
        let dim = terms
            .first()
            .map(|t| t.transform.output_dim(self.var_dim(t.var)))
            .unwrap_or_else(|| constant.as_ref().map(|c| c.nrows()).unwrap_or(0));
        self.constraints.push(PsdConstraint {
            label: label.into(),
            dim,
            terms,
            constant,
        });
    }

    /// Shorthand for `X >= 0`.
    pub fn require_var_psd(&mut self, var: VarId) {
        let label = format!("{} >= 0", self.vars[var.0].name);
        self.require_psd(
            label,
            vec![Term {
                var,
                coeff: 1.0,
                transform: Transform::Identity,
            }],
            None,
        );
    }

    pub fn require_equal(&mut self, eq: Equality) {
        self.equalities.push(eq);
    }

    /// True when every data matrix is real, in which case an optimum exists
    /// among real symmetric variables (average any optimum with its complex
    /// conjugate).
    pub fn is_real(&self) -> bool {
        let obj = self.objective.iter().all(|(_, c)| is_real(c));
        let eq = self.equalities.iter().all(|e| match e {
            Equality::Matrix { rhs, .. } => is_real(rhs),
            Equality::Trace { terms, .. } => terms.iter().all(|(_, g)| is_real(g)),
        });
        let cons = self.constraints.iter().all(|c| c.constant.as_ref().is_none_or(is_real));
        obj && eq && cons
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.vars {
            if v.dim == 0 || v.dim > MAX_JOINT_DIM {
                return Err(Error::InvalidProgram(format!(
                    "variable `{}` has dimension {} (allowed 1..={MAX_JOINT_DIM})",
                    v.name, v.dim
                )));
            }
        }
        let check_var = |v: VarId| -> Result<usize> {
            self.vars
                .get(v.0)
                .map(|d| d.dim)
                .ok_or_else(|| Error::InvalidProgram(format!("unknown variable {}", v.0)))
        };
        let check_herm = |m: &ComplexMatrix, dim: usize, what: &str| -> Result<()> {
            if m.dim() != (dim, dim) {
                return Err(Error::InvalidProgram(format!(
                    "{what} has shape {:?}, expected {dim}x{dim}",
                    m.dim()
                )));
            }
            if hermiticity_error(m) > 1e-12 {
                return Err(Error::InvalidProgram(format!("{what} is not Hermitian")));
            }
            Ok(())
        };
        for (v, c) in &self.objective {
            let d = check_var(*v)?;
            check_herm(c, d, "objective matrix")?;
        }
        for e in &self.equalities {
            match e {
                Equality::Matrix { terms, rhs } => {
                    for (v, _) in terms {
                        let d = check_var(*v)?;
                        check_herm(rhs, d, "equality right-hand side")?;
                    }
                }
                Equality::Trace { terms, .. } => {
                    for (v, g) in terms {
                        let d = check_var(*v)?;
                        check_herm(g, d, "trace functional")?;
                    }
                }
            }
        }
        for c in &self.constraints {
            if c.dim == 0 || c.dim > MAX_JOINT_DIM {
                return Err(Error::InvalidProgram(format!(
                    "constraint `{}` has dimension {}",
                    c.label, c.dim
                )));
            }
            for t in &c.terms {
                let d = check_var(t.var)?;
                if t.transform.output_dim(d) != c.dim {
                    return Err(Error::InvalidProgram(format!(
                        "constraint `{}` mixes dimensions",
                        c.label
                    )));
                }
                if let Transform::PartialTranspose { dims, .. } = t.transform {
                    if dims.0 * dims.1 != d {
                        return Err(Error::InvalidProgram(format!(
                            "partial transpose dims {dims:?} do not factor {d}"
                        )));
                    }
                }
            }
            if let Some(k) = &c.constant {
                check_herm(k, c.dim, "constraint constant")?;
            }
        }
        Ok(())
    }

    pub fn compile(&self) -> Result<CompiledProgram> {
        self.validate()?;
        let real = self.is_real();
        let bases: Vec<HermitianBasis> = self.vars.iter().map(|v| HermitianBasis::new(v.dim, real)).collect();
        let mut offsets = Vec::with_capacity(bases.len());
        let mut raw_count = 0;
        for b in &bases {
            offsets.push(raw_count);
            raw_count += b.len();
        }

        // raw linear equalities over parameters
        let mut rows: Vec<(BTreeMap<usize, f64>, f64)> = Vec::new();
        for e in &self.equalities {
            match e {
                Equality::Matrix { terms, rhs } => {
                    let basis = &bases[terms[0].0 .0];
                    let target = basis.coordinates(rhs);
                    for (p, &t) in target.iter().enumerate() {
                        let mut row = BTreeMap::new();
                        for (v, c) in terms {
                            *row.entry(offsets[v.0] + p).or_insert(0.0) += c;
                        }
                        rows.push((row, t));
                    }
                }
                Equality::Trace { terms, rhs } => {
                    let mut row = BTreeMap::new();
                    for (v, g) in terms {
                        let basis = &bases[v.0];
                        for p in 0..basis.len() {
                            let w = basis.functional(g, p);
                            if w != 0.0 {
                                *row.entry(offsets[v.0] + p).or_insert(0.0) += w;
                            }
                        }
                    }
                    rows.push((row, *rhs));
                }
            }
        }
        let elim = Elimination::run(raw_count, rows)?;

        // objective over raw parameters
        let mut raw_obj = vec![0.0; raw_count];
        for (v, c) in &self.objective {
            let basis = &bases[v.0];
            for p in 0..basis.len() {
                raw_obj[offsets[v.0] + p] += basis.functional(c, p);
            }
        }
        let mut objective = vec![0.0; elim.free.len()];
        let sign = match self.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut offset = sign * self.objective_offset;
        for (raw, &w) in raw_obj.iter().enumerate() {
            let w = sign * w;
            if w == 0.0 {
                continue;
            }
            let expr = elim.expression(raw);
            offset += w * expr.constant;
            for &(f, a) in &expr.coeffs {
                objective[f] += w * a;
            }
        }

        // blocks
        let mut blocks = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let bdim = if real { c.dim } else { 2 * c.dim };
            let mut constant = match &c.constant {
                Some(k) => embed_hermitian(k, real),
                None => Array2::zeros((bdim, bdim)),
            };
            let mut per_free: BTreeMap<usize, SparseSym> = BTreeMap::new();
            for t in &c.terms {
                let basis = &bases[t.var.0];
                for p in 0..basis.len() {
                    let local = basis.embedded_entries(p, t.transform, real);
                    let expr = elim.expression(offsets[t.var.0] + p);
                    if expr.constant != 0.0 {
                        for &(r, col, v) in &local.entries {
                            constant[[r, col]] += t.coeff * expr.constant * v;
                        }
                    }
                    for &(f, a) in &expr.coeffs {
                        per_free.entry(f).or_default().scaled_add(&local, t.coeff * a);
                    }
                }
            }
            let coeffs = per_free
                .into_iter()
                .filter_map(|(f, mut s)| {
                    s.prune();
                    (!s.is_empty()).then_some((f, s))
                })
                .collect();
            blocks.push(LmiBlock {
                dim: bdim,
                constant,
                coeffs,
            });
        }

        Ok(CompiledProgram {
            lmi: RealLmi {
                num_vars: elim.free.len(),
                objective,
                blocks,
            },
            objective_offset: offset,
            sign,
            bases,
            offsets,
            elimination: elim,
            real,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct AffineExpr {
    pub constant: f64,
    /// `(free index, coefficient)`
    pub coeffs: Vec<(usize, f64)>,
}

/// Raw parameters expressed through the free ones after Gaussian elimination
/// of the equality constraints.
#[derive(Debug, Clone)]
pub(crate) struct Elimination {
    /// raw index of each free parameter
    pub free: Vec<usize>,
    free_of_raw: Vec<Option<usize>>,
    /// eliminated raw parameter -> affine expression in raw free parameters
    eliminated: BTreeMap<usize, (f64, BTreeMap<usize, f64>)>,
}

impl Elimination {
    fn run(raw_count: usize, rows: Vec<(BTreeMap<usize, f64>, f64)>) -> Result<Self> {
        let mut eliminated: BTreeMap<usize, (f64, BTreeMap<usize, f64>)> = BTreeMap::new();
        for (row, rhs) in rows {
            // substitute earlier pivots
            let mut rhs = rhs;
            let mut reduced: BTreeMap<usize, f64> = BTreeMap::new();
            for (p, a) in row {
                if let Some((c0, expr)) = eliminated.get(&p) {
                    rhs -= a * c0;
                    for (&q, &b) in expr {
                        *reduced.entry(q).or_insert(0.0) += a * b;
                    }
                } else {
                    *reduced.entry(p).or_insert(0.0) += a;
                }
            }
            reduced.retain(|_, a| a.abs() > 1e-14);
            let scale = reduced.values().fold(0.0f64, |m, a| m.max(a.abs()));
            if reduced.is_empty() {
                if rhs.abs() > 1e-10 {
                    return Err(Error::InvalidProgram("equality constraints are inconsistent".into()));
                }
                continue;
            }
            // largest coefficient; ties go to the latest-declared parameter
            let (&pivot, &a) = reduced
                .iter()
                .rfind(|(_, a)| a.abs() >= scale * (1.0 - 1e-12))
                .expect("nonempty row");
            let mut expr = BTreeMap::new();
            for (&q, &b) in &reduced {
                if q != pivot {
                    expr.insert(q, -b / a);
                }
            }
            let c0 = rhs / a;
            // back-substitute into earlier expressions
            for (ec, e) in eliminated.values_mut() {
                if let Some(w) = e.remove(&pivot) {
                    *ec += w * c0;
                    for (&q, &b) in &expr {
                        *e.entry(q).or_insert(0.0) += w * b;
                    }
                    e.retain(|_, v| *v != 0.0);
                }
            }
            eliminated.insert(pivot, (c0, expr));
        }
        let mut free = Vec::new();
        let mut free_of_raw = vec![None; raw_count];
        for (raw, slot) in free_of_raw.iter_mut().enumerate() {
            if !eliminated.contains_key(&raw) {
                *slot = Some(free.len());
                free.push(raw);
            }
        }
        Ok(Elimination {
            free,
            free_of_raw,
            eliminated,
        })
    }

    pub fn expression(&self, raw: usize) -> AffineExpr {
        if let Some(f) = self.free_of_raw[raw] {
            return AffineExpr {
                constant: 0.0,
                coeffs: vec![(f, 1.0)],
            };
        }
        let (c0, e) = &self.eliminated[&raw];
        AffineExpr {
            constant: *c0,
            coeffs: e
                .iter()
                .map(|(&q, &b)| (self.free_of_raw[q].expect("expressions only use free parameters"), b))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub lmi: RealLmi,
    /// Offset of the internal maximization objective.
    pub objective_offset: f64,
    /// `+1` if the program maximizes, `-1` if the objective was negated.
    pub sign: f64,
    pub(crate) bases: Vec<HermitianBasis>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) elimination: Elimination,
    /// Variables were restricted to real symmetric matrices.
    pub real: bool,
}

impl CompiledProgram {
    /// Reassembles the Hermitian variables from a free-parameter vector.
    pub fn variables(&self, y: &[f64]) -> Vec<ComplexMatrix> {
        let raw_count = self
            .offsets
            .last()
            .map(|o| o + self.bases.last().unwrap().len())
            .unwrap_or(0);
        let mut raw = vec![0.0; raw_count];
        for (r, slot) in raw.iter_mut().enumerate() {
            let e = self.elimination.expression(r);
            *slot = e.constant + e.coeffs.iter().map(|&(f, a)| a * y[f]).sum::<f64>();
        }
        self.bases
            .iter()
            .zip(&self.offsets)
            .map(|(b, &o)| b.assemble(&raw[o..o + b.len()]))
            .collect()
    }
}
