//! Dense matrix helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Builds a matrix from row lists. Returns `None` when rows are ragged.
pub fn from_rows(rows: &[Vec<f64>]) -> Option<Mat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(Mat::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// `d × len` matrix whose columns `offset..offset+len` of the identity are kept,
/// i.e. the embedding of a `len`-vector into slot `offset` of a `d`-vector.
pub fn selector(d: usize, offset: usize, len: usize) -> Mat {
    let mut s = Mat::zeros(d, len);
    for k in 0..len {
        s[(offset + k, k)] = 1.0;
    }
    s
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// `M + Mᵀ`.
pub fn sym(m: &Mat) -> Mat {
    m + m.transpose()
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Infinity norm of the asymmetric part.
pub fn asymmetry(m: &Mat) -> f64 {
    max_abs(&(m - m.transpose()))
}

/// Solves `m · out = rhs` for symmetric positive-definite `m`.
pub fn spd_solve(m: &Mat, rhs: &Mat) -> Option<Mat> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    Some(chol.solve(rhs))
}

pub fn spd_inverse(m: &Mat) -> Option<Mat> {
    nalgebra::Cholesky::new(m.clone()).map(|c| c.inverse())
}

/// Serde adapter storing a matrix as a list of rows.
pub mod rows_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }
}

/// Serde adapter for a list of matrices.
pub mod rows_serde_vec {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[Mat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Mat>, D::Error> {
        let all = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
        all.iter()
            .map(|rows| from_rows(rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_rejected() {
        assert!(from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
        let m = from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(to_rows(&m), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn block_diag_places_blocks() {
        let a = Mat::identity(2, 2);
        let b = Mat::from_element(1, 1, 5.0);
        let d = block_diag(&[&a, &b]);
        assert_eq!(d.shape(), (3, 3));
        assert_eq!(d[(2, 2)], 5.0);
        assert_eq!(d[(0, 2)], 0.0);
    }

    #[test]
    fn selector_embeds_slot() {
        let s = selector(5, 2, 2);
        let v = Vector::from_vec(vec![7.0, 8.0]);
        let e = &s * v;
        assert_eq!(e.as_slice(), &[0.0, 0.0, 7.0, 8.0, 0.0]);
    }
}
