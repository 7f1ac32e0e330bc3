//! JSON formats for matrices, states and channels.
//!
//! Matrix: `{"rows": n, "cols": m, "re": [[..]], "im": [[..]]}`, row-major.
//! State: a matrix object with extra `"dimA"` and `"dimB"` keys.
//! Channel: `{"dimIn", "dimOut", "kraus": [matrix, ..]}` or
//! `{"dimIn", "dimOut", "choi": matrix}`.

use ndarray::Array2;
use serde::{Deserialize, Serialize, Serializer};

use crate::channels::{choi_of, ChoiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::qcore::{BipartiteState, ComplexMatrix, DensityMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = m.outer_iter().map(|r| r.iter().map(|z| z.re).collect()).collect();
        let imag = m.outer_iter().map(|r| r.iter().map(|z| z.im).collect()).collect();
        MatrixJson {
            rows: m.nrows(),
            cols: m.ncols(),
            re: rows,
            im: imag,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = |v: &Vec<Vec<f64>>| v.len() == self.rows && v.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::DimensionMismatch(format!(
                "matrix arrays do not match the declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        if self.re.iter().chain(&self.im).flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("matrix has non-finite entries".into()));
        }
        Ok(Array2::from_shape_fn((self.rows, self.cols), |(r, c)| {
            C64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

pub fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_matrix(m).serialize(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelJson {
    #[serde(rename_all = "camelCase")]
    Kraus {
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<MatrixJson>,
    },
    #[serde(rename_all = "camelCase")]
    Choi {
        dim_in: usize,
        dim_out: usize,
        choi: MatrixJson,
    },
}

pub fn state_to_json(s: &BipartiteState) -> StateJson {
    StateJson {
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        matrix: MatrixJson::from_matrix(s.matrix()),
    }
}

/// Parses and validates a bipartite state.
pub fn parse_state(text: &str) -> Result<BipartiteState> {
    let j: StateJson = serde_json::from_str(text)?;
    let m = j.matrix.to_matrix()?;
    BipartiteState::new(j.dim_a, j.dim_b, DensityMatrix::new(m)?)
}

pub fn kraus_to_json(ch: &KrausChannel) -> ChannelJson {
    ChannelJson::Kraus {
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        kraus: ch.kraus().iter().map(MatrixJson::from_matrix).collect(),
    }
}

pub fn choi_to_json(ch: &ChoiMatrix) -> ChannelJson {
    ChannelJson::Choi {
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        choi: MatrixJson::from_matrix(ch.matrix()),
    }
}

/// Parses either channel form and validates it, returning its Choi matrix.
pub fn parse_channel(text: &str) -> Result<ChoiMatrix> {
    match serde_json::from_str::<ChannelJson>(text)? {
        ChannelJson::Kraus { dim_in, dim_out, kraus } => {
            let ops = kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
            Ok(choi_of(&KrausChannel::new(dim_in, dim_out, ops)?))
        }
        ChannelJson::Choi { dim_in, dim_out, choi } => ChoiMatrix::new(dim_in, dim_out, choi.to_matrix()?),
    }
}
