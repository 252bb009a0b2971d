//! Closed-form math of the single-qubit damping channel: Kraus pair,
//! dilation unitary, controlled-rotation angle, and success probability.
//!
//! The channel realizes `exp(theta * Z * dt)` on a system qubit, conditioned
//! on an ancilla measuring 0. The jump branch (ancilla reads 1) leaves the
//! physical subspace.

use ndarray::Array2;
use num_complex::Complex;

use crate::{Error, Real, Result};

/// Damping-channel parameters for one Trotter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<R> {
    pub theta: R,
    pub dt: R,
    /// Damping strength, `1 - exp(-4*theta*dt)`, in [0, 1).
    pub gamma: R,
}

/// The two Kraus operators of the channel.
#[derive(Debug, Clone)]
pub struct KrausPair<R> {
    pub e0: Array2<Complex<R>>,
    pub e1: Array2<Complex<R>>,
}

pub fn channel_params<R: Real>(theta: R, dt: R) -> Result<ChannelParams<R>> {
    if theta < R::zero() {
        return Err(Error::InvalidParameter("theta must be >= 0".into()));
    }
    if dt <= R::zero() {
        return Err(Error::InvalidParameter("dt must be > 0".into()));
    }
    let gamma = R::one() - (-R::of(4.0) * theta * dt).exp();
    Ok(ChannelParams { theta, dt, gamma })
}

impl<R: Real> ChannelParams<R> {
    /// Construct directly from a damping strength in [0, 1), for sweeps over
    /// gamma itself.
    pub fn from_gamma(gamma: R) -> Result<Self> {
        if gamma < R::zero() || gamma >= R::one() {
            return Err(Error::InvalidParameter("gamma must lie in [0, 1)".into()));
        }
        Ok(ChannelParams {
            theta: R::zero(),
            dt: R::one(),
            gamma,
        })
    }

    pub fn kraus(&self) -> KrausPair<R> {
        let g = self.gamma;
        let zero = Complex::new(R::zero(), R::zero());
        let mut e0 = Array2::from_elem((2, 2), zero);
        e0[[0, 0]] = Complex::new(R::one(), R::zero());
        e0[[1, 1]] = Complex::new((R::one() - g).sqrt(), R::zero());
        let mut e1 = Array2::from_elem((2, 2), zero);
        e1[[1, 1]] = Complex::new(g.sqrt(), R::zero());
        KrausPair { e0, e1 }
    }

    /// Controlled-Y rotation angle `phi = -2 asin(sqrt(gamma))`, in [-pi, 0].
    pub fn cry_angle(&self) -> R {
        -R::of(2.0) * self.gamma.sqrt().asin()
    }

    /// The 4x4 unitary dilating the channel onto system + ancilla.
    ///
    /// The system qubit is the low bit and the ancilla the high bit, i.e.
    /// row/column index = 2*ancilla + system. In tensor-product notation this
    /// is `kron(I, E0) - i * kron(sigma_y, E1)` with the ancilla factor first.
    pub fn dilation_unitary(&self) -> Array2<Complex<R>> {
        let g = self.gamma;
        let c = (R::one() - g).sqrt();
        let s = g.sqrt();
        let zero = Complex::new(R::zero(), R::zero());
        let re = |x: R| Complex::new(x, R::zero());
        let mut u = Array2::from_elem((4, 4), zero);
        u[[0, 0]] = re(R::one());
        u[[1, 1]] = re(c);
        u[[2, 2]] = re(R::one());
        u[[3, 3]] = re(c);
        // -i sigma_y (x) E1: jump amplitude couples |anc 0, sys 1> <-> |anc 1, sys 1>.
        u[[1, 3]] = re(-s);
        u[[3, 1]] = re(s);
        u
    }
}

/// Probability of the no-jump (ancilla 0) outcome for a single-qubit state:
/// `p0 = <psi| E0^dag E0 |psi> = 1 - gamma * P(qubit = 1)`.
pub fn success_probability<R: Real>(state: &[Complex<R>], params: &ChannelParams<R>) -> Result<R> {
    if state.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: state.len(),
        });
    }
    let norm = state[0].norm_sqr() + state[1].norm_sqr();
    if (norm - R::one()).abs() > R::of(1e-8) {
        return Err(Error::NotNormalized((norm - R::one()).abs().to_f64_lossy()));
    }
    Ok(R::one() - params.gamma * state[1].norm_sqr())
}
