//! Scalar abstraction: real field types the toolkit is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::Array2;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

use crate::{Error, Result};

/// Real scalar the core math is generic over. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + NumAssign + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion from a literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal convertible to scalar")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Complex number with both parts from a pair of `f64` literals.
pub fn cx<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::of(re), R::of(im))
}

/// Scalars with a dense general (non-Hermitian) eigensolver.
///
/// Backed by LAPACK `?geev`; right eigenvectors are returned as the columns
/// of the second tuple element.
pub trait EigScalar: Real {
    fn eig(matrix: &Array2<Complex<Self>>) -> Result<(Vec<Complex<Self>>, Array2<Complex<Self>>)>;
}

// LAPACK expects column-major storage; num_complex::Complex is repr(C) and
// layout-compatible with the Fortran complex types.
extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex<f64>,
        lda: *const i32,
        w: *mut Complex<f64>,
        vl: *mut Complex<f64>,
        ldvl: *const i32,
        vr: *mut Complex<f64>,
        ldvr: *const i32,
        work: *mut Complex<f64>,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn cgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex<f32>,
        lda: *const i32,
        w: *mut Complex<f32>,
        vl: *mut Complex<f32>,
        ldvl: *const i32,
        vr: *mut Complex<f32>,
        ldvr: *const i32,
        work: *mut Complex<f32>,
        lwork: *const i32,
        rwork: *mut f32,
        info: *mut i32,
    );
}

macro_rules! impl_eig {
    ($real:ty, $geev:ident) => {
        impl EigScalar for $real {
            fn eig(
                matrix: &Array2<Complex<Self>>,
            ) -> Result<(Vec<Complex<Self>>, Array2<Complex<Self>>)> {
                let (rows, cols) = matrix.dim();
                if rows != cols {
                    return Err(Error::DimensionMismatch {
                        expected: rows,
                        got: cols,
                    });
                }
                let n = rows as i32;
                // Column-major copy.
                let mut a: Vec<Complex<Self>> = Vec::with_capacity(rows * rows);
                for j in 0..rows {
                    for i in 0..rows {
                        a.push(matrix[[i, j]]);
                    }
                }
                let mut w = vec![Complex::default(); rows];
                let mut vr = vec![Complex::default(); rows * rows];
                let mut vl = vec![Complex::default(); 1];
                let mut rwork = vec![<$real>::default(); 2 * rows.max(1)];
                let mut info = 0i32;
                let (jobvl, jobvr) = (b'N', b'V');
                let (ldvl, ldvr) = (1i32, n.max(1));

                // Workspace query, then the actual factorization.
                let mut work = vec![Complex::default(); 1];
                let mut lwork = -1i32;
                unsafe {
                    $geev(
                        &jobvl, &jobvr, &n,
                        a.as_mut_ptr(), &n.max(1),
                        w.as_mut_ptr(),
                        vl.as_mut_ptr(), &ldvl,
                        vr.as_mut_ptr(), &ldvr,
                        work.as_mut_ptr(), &lwork,
                        rwork.as_mut_ptr(), &mut info,
                    );
                }
                if info != 0 {
                    return Err(Error::EigNonConvergence(info));
                }
                lwork = work[0].re as i32;
                work = vec![Complex::default(); lwork.max(1) as usize];
                unsafe {
                    $geev(
                        &jobvl, &jobvr, &n,
                        a.as_mut_ptr(), &n.max(1),
                        w.as_mut_ptr(),
                        vl.as_mut_ptr(), &ldvl,
                        vr.as_mut_ptr(), &ldvr,
                        work.as_mut_ptr(), &lwork,
                        rwork.as_mut_ptr(), &mut info,
                    );
                }
                if info != 0 {
                    return Err(Error::EigNonConvergence(info));
                }

                let mut vectors = Array2::default((rows, rows));
                for j in 0..rows {
                    for i in 0..rows {
                        vectors[[i, j]] = vr[j * rows + i];
                    }
                }
                Ok((w, vectors))
            }
        }
    };
}

impl_eig!(f64, zgeev_);
impl_eig!(f32, cgeev_);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn eig_of_diagonal() {
        let m = array![[cx::<f64>(2.0, 1.0), cx(0.0, 0.0)], [cx(0.0, 0.0), cx(-1.0, 0.5)]];
        let (vals, _) = f64::eig(&m).unwrap();
        let mut vals = vals;
        vals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_abs_diff_eq!(vals[0].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[0].im, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1].im, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_right_vectors_satisfy_definition() {
        let m = array![
            [cx::<f64>(0.0, 0.3), cx(-1.0, 0.0)],
            [cx(-1.0, 0.0), cx(0.0, -0.3)]
        ];
        let (vals, vecs) = f64::eig(&m).unwrap();
        for (j, lambda) in vals.iter().enumerate() {
            let v = vecs.column(j);
            let mv = m.dot(&v);
            for i in 0..2 {
                assert_abs_diff_eq!(mv[i].re, (lambda * v[i]).re, epsilon = 1e-12);
                assert_abs_diff_eq!(mv[i].im, (lambda * v[i]).im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn eig_single_precision_path() {
        let m = array![[cx::<f32>(1.0, 0.0), cx(2.0, 0.0)], [cx(0.0, 0.0), cx(3.0, 0.0)]];
        let (vals, _) = f32::eig(&m).unwrap();
        let mut re: Vec<f32> = vals.iter().map(|v| v.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - 1.0).abs() < 1e-5 && (re[1] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn eig_rejects_non_square() {
        let m = Array2::<Complex<f64>>::zeros((2, 3));
        assert!(f64::eig(&m).is_err());
    }
}
