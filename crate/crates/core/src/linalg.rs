//! Small dense complex-matrix helpers sized for link-level work
//! (tens of antennas / RIS elements). Row-major storage, no external
//! linear-algebra dependency.

use num_complex::Complex64;

use crate::error::CoreError;

pub type C64 = Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self, CoreError> {
        let r = rows.len();
        if r == 0 {
            return Err(CoreError::structure("matrix needs at least one row"));
        }
        let c = rows[0].len();
        if rows.iter().any(|row| row.len() != c) {
            return Err(CoreError::structure("ragged rows in matrix literal"));
        }
        Ok(CMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    /// y = A x (matrix times column vector).
    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, CoreError> {
        if x.len() != self.cols {
            return Err(CoreError::structure(format!(
                "matvec dimension mismatch: matrix is {}x{}, vector has {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let mut acc = C64::new(0.0, 0.0);
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            y[r] = acc;
        }
        Ok(y)
    }

    /// y = x A (row vector times matrix).
    pub fn row_vec_mul(&self, x: &[C64]) -> Result<Vec<C64>, CoreError> {
        if x.len() != self.rows {
            return Err(CoreError::structure(format!(
                "row_vec_mul dimension mismatch: matrix is {}x{}, row vector has {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![C64::new(0.0, 0.0); self.cols];
        for r in 0..self.rows {
            let xr = x[r];
            if xr == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (yc, a) in y.iter_mut().zip(row.iter()) {
                *yc += xr * a;
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.at(r, c));
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Conjugate a vector entrywise.
pub fn conj_vec(x: &[C64]) -> Vec<C64> {
    x.iter().map(|z| z.conj()).collect()
}

/// Inner product `x^H y` (conjugates the first argument).
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Plain dot product `x^T y` (no conjugation).
pub fn dot(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Squared Euclidean norm.
pub fn norm_sq(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    norm_sq(x).sqrt()
}

/// Scale a vector in place.
pub fn scale(x: &mut [C64], s: f64) {
    for z in x.iter_mut() {
        *z *= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matvec_hand_checked() {
        let a = CMat::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 1.0)],
            vec![c(2.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let y = a.matvec(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(y[0], c(1.0, 1.0));
        assert_eq!(y[1], c(2.0, 0.0));
    }

    #[test]
    fn row_vec_mul_matches_transpose_matvec() {
        let a = CMat::from_rows(vec![
            vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.0)],
            vec![c(0.0, 1.0), c(-2.0, 0.0), c(1.0, 1.0)],
        ])
        .unwrap();
        let x = [c(0.3, -0.4), c(1.0, 2.0)];
        let via_row = a.row_vec_mul(&x).unwrap();
        let via_t = a.transpose().matvec(&x).unwrap();
        for (u, v) in via_row.iter().zip(via_t.iter()) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let a = CMat::zeros(2, 3);
        assert!(a.matvec(&[c(1.0, 0.0)]).is_err());
        assert!(a.row_vec_mul(&[c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn inner_conjugates_first_argument() {
        let x = [c(0.0, 1.0)];
        let y = [c(0.0, 1.0)];
        assert_eq!(inner(&x, &y), c(1.0, 0.0));
        assert_eq!(dot(&x, &y), c(-1.0, 0.0));
    }
}
