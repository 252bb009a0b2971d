//! Dense matrix construction of the complex-field Ising chain and its
//! diagonal magnetization observable.
//!
//! The model: `H = -lambda * sum Z_i Z_{i+1} - h_x * sum X_i + i*theta * sum Z_p`
//! with open boundaries, where the imaginary field acts either on every site
//! or only on the even sites (1-based) of the chain.

use ndarray::Array2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Which sites carry the imaginary longitudinal field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldPattern {
    AllSites,
    AlternateSites,
}

/// Parameters of the chain Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec<R> {
    /// ZZ coupling strength.
    pub lambda: R,
    /// Transverse field.
    pub h_x: R,
    /// Imaginary longitudinal field strength, >= 0.
    pub theta: R,
    /// Number of chain sites, >= 1.
    pub n_sites: usize,
    pub pattern: FieldPattern,
}

/// Dense complex matrix over a 2^n-dimensional register.
pub type DenseOperator<R> = Array2<Complex<R>>;

impl<R: Real> HamiltonianSpec<R> {
    pub fn new(lambda: R, h_x: R, theta: R, n_sites: usize, pattern: FieldPattern) -> Result<Self> {
        let spec = Self {
            lambda,
            h_x,
            theta,
            n_sites,
            pattern,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParameter("n_sites must be >= 1".into()));
        }
        if self.theta < R::zero() {
            return Err(Error::InvalidParameter(
                "theta must be >= 0 (flip the basis instead of the sign)".into(),
            ));
        }
        Ok(())
    }

    /// 1-based site indices the imaginary field acts on.
    pub fn pattern_sites(&self) -> Vec<usize> {
        match self.pattern {
            FieldPattern::AllSites => (1..=self.n_sites).collect(),
            FieldPattern::AlternateSites => (1..=self.n_sites).filter(|s| s % 2 == 0).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn with_theta(&self, theta: R) -> Self {
        Self { theta, ..*self }
    }
}

/// Z eigenvalue of site `site` (1-based) in basis state `basis`: +1 for bit 0.
fn z_sign<R: Real>(basis: usize, site: usize) -> R {
    if basis >> (site - 1) & 1 == 0 {
        R::one()
    } else {
        -R::one()
    }
}

/// Build the dense Hamiltonian matrix. Site 1 is the least-significant bit.
pub fn build_hamiltonian<R: Real>(spec: &HamiltonianSpec<R>) -> Result<DenseOperator<R>> {
    spec.validate()?;
    let n = spec.n_sites;
    let dim = spec.dim();
    let pattern = spec.pattern_sites();
    let mut h = Array2::zeros((dim, dim));

    for b in 0..dim {
        // Diagonal: ZZ coupling and the imaginary field.
        let mut zz = R::zero();
        for site in 1..n {
            zz += z_sign::<R>(b, site) * z_sign::<R>(b, site + 1);
        }
        let mut zp = R::zero();
        for &site in &pattern {
            zp += z_sign::<R>(b, site);
        }
        h[[b, b]] = Complex::new(-spec.lambda * zz, spec.theta * zp);

        // Off-diagonal: transverse field flips one bit.
        for site in 1..=n {
            let flipped = b ^ (1 << (site - 1));
            h[[flipped, b]] -= Complex::new(spec.h_x, R::zero());
        }
    }
    Ok(h)
}

/// Average-magnetization observable `(1/N) sum Z_i`, as a diagonal matrix.
pub fn build_observable<R: Real>(n_sites: usize) -> Result<DenseOperator<R>> {
    if n_sites == 0 {
        return Err(Error::InvalidParameter("n_sites must be >= 1".into()));
    }
    let dim = 1usize << n_sites;
    let mut o = Array2::zeros((dim, dim));
    for b in 0..dim {
        o[[b, b]] = Complex::new(observable_eigenvalue::<R>(b, n_sites), R::zero());
    }
    Ok(o)
}

/// Eigenvalue of the magnetization observable on basis state `basis`.
pub fn observable_eigenvalue<R: Real>(basis: usize, n_sites: usize) -> R {
    let mut sum = R::zero();
    for site in 1..=n_sites {
        sum += z_sign::<R>(basis, site);
    }
    sum / R::of(n_sites as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec(lambda: f64, h_x: f64, theta: f64, n: usize, p: FieldPattern) -> HamiltonianSpec<f64> {
        HamiltonianSpec::new(lambda, h_x, theta, n, p).unwrap()
    }

    #[test]
    fn two_site_zz_only_is_diagonal() {
        let h = build_hamiltonian(&spec(1.0, 0.0, 0.0, 2, FieldPattern::AllSites)).unwrap();
        let expect = [-1.0, 1.0, 1.0, -1.0];
        for b in 0..4 {
            assert_abs_diff_eq!(h[[b, b]].re, expect[b], epsilon = 1e-15);
            for b2 in 0..4 {
                if b2 != b {
                    assert_eq!(h[[b2, b]], cx(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn single_site_transverse_field() {
        let h = build_hamiltonian(&spec(0.0, 1.0, 0.0, 1, FieldPattern::AllSites)).unwrap();
        assert_eq!(h[[0, 0]], cx(0.0, 0.0));
        assert_eq!(h[[0, 1]], cx(-1.0, 0.0));
        assert_eq!(h[[1, 0]], cx(-1.0, 0.0));
        assert_eq!(h[[1, 1]], cx(0.0, 0.0));
    }

    #[test]
    fn two_site_alternate_matches_kronecker_oracle() {
        // Oracle: -Z(x)Z - 0.5 (X(x)1 + 1(x)X) + i 0.2 (Z on site 2).
        // Site 1 = low bit, so "A on site 2, B on site 1" is kron(A, B)
        // with row index = 2*b2 + b1.
        let h = build_hamiltonian(&spec(1.0, 0.5, 0.2, 2, FieldPattern::AlternateSites)).unwrap();
        let z = [[1.0, 0.0], [0.0, -1.0]];
        let x = [[0.0, 1.0], [1.0, 0.0]];
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let mut oracle = Array2::<num_complex::Complex<f64>>::zeros((4, 4));
        for r2 in 0..2 {
            for r1 in 0..2 {
                for c2 in 0..2 {
                    for c1 in 0..2 {
                        let (r, c) = (2 * r2 + r1, 2 * c2 + c1);
                        let zz = z[r2][c2] * z[r1][c1];
                        let xs = x[r2][c2] * id[r1][c1] + id[r2][c2] * x[r1][c1];
                        let z2 = z[r2][c2] * id[r1][c1];
                        oracle[[r, c]] = cx(-zz - 0.5 * xs, 0.2 * z2);
                    }
                }
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                assert_abs_diff_eq!(h[[r, c]].re, oracle[[r, c]].re, epsilon = 1e-15);
                assert_abs_diff_eq!(h[[r, c]].im, oracle[[r, c]].im, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn observable_small_cases() {
        let o1 = build_observable::<f64>(1).unwrap();
        assert_eq!(o1[[0, 0]].re, 1.0);
        assert_eq!(o1[[1, 1]].re, -1.0);

        let o2 = build_observable::<f64>(2).unwrap();
        let expect = [1.0, 0.0, 0.0, -1.0];
        for b in 0..4 {
            assert_abs_diff_eq!(o2[[b, b]].re, expect[b], epsilon = 1e-15);
        }

        for n in 1..=6 {
            let all_ones = (1usize << n) - 1;
            assert_abs_diff_eq!(observable_eigenvalue::<f64>(all_ones, n), -1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(HamiltonianSpec::new(1.0, 1.0, 0.1, 0, FieldPattern::AllSites).is_err());
        assert!(HamiltonianSpec::new(1.0, 1.0, -0.1, 2, FieldPattern::AllSites).is_err());
    }

    #[test]
    fn matrix_is_symmetric() {
        let h = build_hamiltonian(&spec(0.7, 0.4, 0.3, 3, FieldPattern::AlternateSites)).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(h[[r, c]], h[[c, r]]);
            }
        }
    }

    proptest! {
        #[test]
        fn hermiticity_split(
            lambda in -2.0..2.0f64,
            h_x in -2.0..2.0f64,
            theta in 0.0..2.0f64,
            n in 1usize..5,
            alt in proptest::bool::ANY,
        ) {
            let pattern = if alt { FieldPattern::AlternateSites } else { FieldPattern::AllSites };
            let s = spec(lambda, h_x, theta, n, pattern);
            let h = build_hamiltonian(&s).unwrap();
            let h0 = build_hamiltonian(&s.with_theta(0.0)).unwrap();
            let dim = s.dim();
            // Difference is i*theta times a real diagonal; theta=0 part Hermitian.
            for r in 0..dim {
                for c in 0..dim {
                    let d = h[[r, c]] - h0[[r, c]];
                    if r == c {
                        prop_assert!(d.re.abs() < 1e-14);
                    } else {
                        prop_assert!(d.norm() < 1e-14);
                    }
                    let herm = h0[[r, c]] - h0[[c, r]].conj();
                    prop_assert!(herm.norm() < 1e-14);
                }
            }
        }

        #[test]
        fn pt_symmetry(
            lambda in -2.0..2.0f64,
            h_x in -2.0..2.0f64,
            theta in 0.0..2.0f64,
            n in 1usize..5,
            alt in proptest::bool::ANY,
        ) {
            let pattern = if alt { FieldPattern::AlternateSites } else { FieldPattern::AllSites };
            let s = spec(lambda, h_x, theta, n, pattern);
            let h = build_hamiltonian(&s).unwrap();
            let dim = s.dim();
            let flip = dim - 1;
            // P = tensor of X on every site permutes b -> !b; check P conj(H) P = H.
            for r in 0..dim {
                for c in 0..dim {
                    let lhs = h[[r ^ flip, c ^ flip]].conj();
                    prop_assert!((lhs - h[[r, c]]).norm() < 1e-14);
                }
            }
        }

        #[test]
        fn patterns_agree_at_zero_theta(
            lambda in -2.0..2.0f64,
            h_x in -2.0..2.0f64,
            n in 1usize..5,
        ) {
            let a = build_hamiltonian(&spec(lambda, h_x, 0.0, n, FieldPattern::AllSites)).unwrap();
            let b = build_hamiltonian(&spec(lambda, h_x, 0.0, n, FieldPattern::AlternateSites)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
