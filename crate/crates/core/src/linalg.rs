//! Small dense LU solves shared by the matrix exponential and the
//! restricted confusion-matrix inversion.

use ndarray::Array2;
use num_complex::Complex;

use crate::{Error, Real, Result};

/// Solve `A X = B` for complex square `A` by LU with partial pivoting.
pub(crate) fn solve_complex<R: Real>(
    a: &Array2<Complex<R>>,
    b: &Array2<Complex<R>>,
) -> Result<Array2<Complex<R>>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if a.ncols() != n { a.ncols() } else { b.nrows() },
        });
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = x.ncols();

    for k in 0..n {
        let mut pivot = k;
        let mut pmag = lu[[k, k]].norm_sqr();
        for i in k + 1..n {
            let mag = lu[[i, k]].norm_sqr();
            if mag > pmag {
                pivot = i;
                pmag = mag;
            }
        }
        if pmag == R::zero() {
            return Err(Error::SingularSystem(0.0));
        }
        if pivot != k {
            for j in 0..n {
                let tmp = lu[[k, j]];
                lu[[k, j]] = lu[[pivot, j]];
                lu[[pivot, j]] = tmp;
            }
            for j in 0..m {
                let tmp = x[[k, j]];
                x[[k, j]] = x[[pivot, j]];
                x[[pivot, j]] = tmp;
            }
        }
        let d = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / d;
            lu[[i, k]] = f;
            for j in k + 1..n {
                let s = lu[[k, j]];
                lu[[i, j]] = lu[[i, j]] - f * s;
            }
            for j in 0..m {
                let s = x[[k, j]];
                x[[i, j]] = x[[i, j]] - f * s;
            }
        }
    }
    for j in 0..m {
        for i in (0..n).rev() {
            let mut s = x[[i, j]];
            for k in i + 1..n {
                s = s - lu[[i, k]] * x[[k, j]];
            }
            x[[i, j]] = s / lu[[i, i]];
        }
    }
    Ok(x)
}

/// Solve `A x = b` for real square `A`; fails with a condition estimate when
/// the pivot ratio indicates (near-)singularity.
pub(crate) fn solve_real<R: Real>(a: &Array2<R>, b: &[R]) -> Result<Vec<R>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if a.ncols() != n { a.ncols() } else { b.len() },
        });
    }
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let mut max_pivot = R::zero();
    let mut min_pivot = R::infinity();

    for k in 0..n {
        let mut pivot = k;
        let mut pmag = lu[[k, k]].abs();
        for i in k + 1..n {
            let mag = lu[[i, k]].abs();
            if mag > pmag {
                pivot = i;
                pmag = mag;
            }
        }
        max_pivot = max_pivot.max(pmag);
        min_pivot = min_pivot.min(pmag);
        if pmag == R::zero() || pmag < max_pivot * R::of(1e-14) {
            let cond = if pmag == R::zero() {
                f64::INFINITY
            } else {
                (max_pivot / pmag).to_f64_lossy()
            };
            return Err(Error::SingularSystem(cond));
        }
        if pivot != k {
            for j in 0..n {
                lu.swap([k, j], [pivot, j]);
            }
            x.swap(k, pivot);
        }
        let d = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / d;
            lu[[i, k]] = f;
            for j in k + 1..n {
                let s = lu[[k, j]];
                lu[[i, j]] = lu[[i, j]] - f * s;
            }
            let s = x[k];
            x[i] = x[i] - f * s;
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s = s - lu[[i, k]] * x[k];
        }
        x[i] = s / lu[[i, i]];
    }
    let _ = min_pivot;
    Ok(x)
}
