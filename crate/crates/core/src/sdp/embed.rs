//! Real coordinates for Hermitian matrices and the real embedding
//! `H -> [[Re H, -Im H], [Im H, Re H]]`.

use ndarray::Array2;
use num_complex::Complex64;

use super::ipm::SparseSym;
use super::program::Transform;
use crate::qcore::{ComplexMatrix, C64};

/// Embeds a Hermitian matrix as a real symmetric one. With `real` set the
/// imaginary part is dropped and the dimension is kept.
pub fn embed_hermitian(h: &ComplexMatrix, real: bool) -> Array2<f64> {
    let n = h.nrows();
    if real {
        return h.mapv(|z| z.re);
    }
    let mut out = Array2::zeros((2 * n, 2 * n));
    for r in 0..n {
        for c in 0..n {
            let z = h[[r, c]];
            out[[r, c]] = z.re;
            out[[r + n, c + n]] = z.re;
            out[[r + n, c]] = z.im;
            out[[r, c + n]] = -z.im;
        }
    }
    out
}

/// Inverse of [`embed_hermitian`] for the complex embedding.
pub fn unembed_hermitian(m: &Array2<f64>) -> ComplexMatrix {
    let n = m.nrows() / 2;
    Array2::from_shape_fn((n, n), |(r, c)| {
        let re = 0.5 * (m[[r, c]] + m[[r + n, c + n]]);
        let im = 0.5 * (m[[r + n, c]] - m[[r, c + n]]);
        Complex64::new(re, im)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Element {
    Diag(usize),
    Sym(usize, usize),
    Anti(usize, usize),
}

/// Basis of the Hermitian (or real symmetric) `n x n` matrices:
/// `E_ii`, `E_ij + E_ji` and, when complex, `i (E_ij - E_ji)` for `i < j`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    dim: usize,
    elements: Vec<Element>,
}

impl HermitianBasis {
    pub fn new(dim: usize, real: bool) -> Self {
        let mut elements: Vec<Element> = (0..dim).map(Element::Diag).collect();
        for i in 0..dim {
            for j in (i + 1)..dim {
                elements.push(Element::Sym(i, j));
                if !real {
                    elements.push(Element::Anti(i, j));
                }
            }
        }
        HermitianBasis { dim, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn entries(&self, p: usize) -> Vec<(usize, usize, C64)> {
        match self.elements[p] {
            Element::Diag(i) => vec![(i, i, C64::new(1.0, 0.0))],
            Element::Sym(i, j) => vec![(i, j, C64::new(1.0, 0.0)), (j, i, C64::new(1.0, 0.0))],
            Element::Anti(i, j) => vec![(i, j, C64::new(0.0, 1.0)), (j, i, C64::new(0.0, -1.0))],
        }
    }

    pub fn element(&self, p: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros((self.dim, self.dim));
        for (r, c, v) in self.entries(p) {
            m[[r, c]] = v;
        }
        m
    }

    /// `Re Tr[G B_p]`.
    pub fn functional(&self, g: &ComplexMatrix, p: usize) -> f64 {
        self.entries(p).iter().map(|&(r, c, v)| (g[[c, r]] * v).re).sum()
    }

    /// Coordinates of a Hermitian matrix in this basis.
    pub fn coordinates(&self, m: &ComplexMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|e| match *e {
                Element::Diag(i) => m[[i, i]].re,
                Element::Sym(i, j) => m[[i, j]].re,
                Element::Anti(i, j) => m[[i, j]].im,
            })
            .collect()
    }

    pub fn assemble(&self, coords: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros((self.dim, self.dim));
        for (p, &a) in coords.iter().enumerate() {
            for (r, c, v) in self.entries(p) {
                m[[r, c]] += v * a;
            }
        }
        m
    }

    /// Embedded image of `T(B_p)` as a sparse real symmetric matrix.
    pub fn embedded_entries(&self, p: usize, t: Transform, real: bool) -> SparseSym {
        let n = t.output_dim(self.dim);
        let mut s = SparseSym::default();
        for (r0, c0, v) in self.entries(p) {
            for (r, c) in t.image(r0, c0) {
                if real {
                    s.add(r, c, v.re);
                } else {
                    s.add(r, c, v.re);
                    s.add(r + n, c + n, v.re);
                    s.add(r + n, c, v.im);
                    s.add(r, c + n, -v.im);
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{max_abs_diff, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn embedding_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 5);
        let back = unembed_hermitian(&embed_hermitian(&h, false));
        assert!(max_abs_diff(&h, &back) < 1e-15);
    }

    #[test]
    fn coordinates_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 4);
        let b = HermitianBasis::new(4, false);
        assert_eq!(b.len(), 16);
        assert!(max_abs_diff(&h, &b.assemble(&b.coordinates(&h))) < 1e-15);
        assert_eq!(HermitianBasis::new(4, true).len(), 10);
    }

    #[test]
    fn functional_matches_dense_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_hermitian(&mut rng, 3);
        let b = HermitianBasis::new(3, false);
        for p in 0..b.len() {
            let dense = crate::qcore::trace_product_re(&g, &b.element(p));
            assert!((dense - b.functional(&g, p)).abs() < 1e-14);
        }
    }
}
