//! Circuit-free reference dynamics: dense matrix exponentials, exact
//! Trotterized evolution, spectra, exceptional-point bisection, and
//! attractor diagnostics.

use ndarray::{Array1, Array2};
use num_complex::Complex;

use crate::hamiltonian::{build_hamiltonian, DenseOperator, HamiltonianSpec};
use crate::linalg::solve_complex;
use crate::scalar::EigScalar;
use crate::simulator::StateVector;
use crate::{Error, Real, Result};

/// Default tolerance on |Im lambda| for calling a spectrum broken.
pub const DEFAULT_IMAG_TOL: f64 = 1e-9;
/// Default bisection tolerance in theta.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-6;
/// Default upper end of the bisection bracket.
pub const DEFAULT_THETA_MAX: f64 = 2.0;

/// Full complex spectrum plus the broken/unbroken classification.
#[derive(Debug, Clone)]
pub struct SpectralReport<R> {
    pub eigenvalues: Vec<Complex<R>>,
    /// Largest |Im lambda| over the spectrum.
    pub max_imag: R,
    /// Any eigenvalue pair left the real axis.
    pub is_broken: bool,
    /// |Im| of the lowest-Re eigenvalue.
    pub ground_imag: R,
    /// The ground-state pair left the real axis. For larger chains excited
    /// pairs break first at level crossings, so this is strictly weaker
    /// than `is_broken`; the exceptional line tracks the ground pair.
    pub is_ground_broken: bool,
}

/// Result of the exceptional-point bisection at one transverse field value.
#[derive(Debug, Clone, Copy)]
pub struct ExceptionalPoint<R> {
    pub h_x: R,
    pub theta_star: R,
    /// Final bracket half-width; the spectrum is unbroken at
    /// `theta_star - bracket_width` and broken at `theta_star + bracket_width`.
    pub bracket_width: R,
}

/// Matrix exponential by scaling-and-squaring with a degree-13 Pade
/// approximant.
///
/// Eigendecomposition is deliberately avoided: the Hamiltonians handled here
/// are defective exactly at exceptional points, where eigenvector matrices
/// are singular.
pub fn matrix_exponential<R: Real>(a: &DenseOperator<R>) -> Result<DenseOperator<R>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(a.clone());
    }

    // 1-norm decides the scaling power.
    let mut norm1 = R::zero();
    for c in 0..n {
        let mut col = R::zero();
        for r in 0..n {
            col += a[[r, c]].norm();
        }
        norm1 = norm1.max(col);
    }
    let theta13 = R::of(5.371920351148152);
    let s = if norm1 > theta13 {
        (norm1 / theta13).log2().ceil().to_f64_lossy() as i32
    } else {
        0
    };
    let scale = R::of(0.5).powi(s);
    let a = a.mapv(|x| x * Complex::new(scale, R::zero()));

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let b: Vec<Complex<R>> = B.iter().map(|&x| Complex::new(R::of(x), R::zero())).collect();

    let id = Array2::from_diag_elem(n, Complex::new(R::one(), R::zero()));
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    // u = A * (A6*(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let inner_u = a6.mapv(|x| x * b[13]) + a4.mapv(|x| x * b[11]) + a2.mapv(|x| x * b[9]);
    let u = a.dot(
        &(a6.dot(&inner_u)
            + a6.mapv(|x| x * b[7])
            + a4.mapv(|x| x * b[5])
            + a2.mapv(|x| x * b[3])
            + id.mapv(|x| x * b[1])),
    );
    // v = A6*(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let inner_v = a6.mapv(|x| x * b[12]) + a4.mapv(|x| x * b[10]) + a2.mapv(|x| x * b[8]);
    let v = a6.dot(&inner_v)
        + a6.mapv(|x| x * b[6])
        + a4.mapv(|x| x * b[4])
        + a2.mapv(|x| x * b[2])
        + id.mapv(|x| x * b[0]);

    let mut r = solve_complex(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Exact evolution `exp(-i H t) |psi0>`, renormalized, plus the
/// pre-normalization norm (survival amplitude of the physical subspace).
pub fn evolve_exact<R: Real>(
    spec: &HamiltonianSpec<R>,
    psi0: &StateVector<R>,
    t: R,
) -> Result<(StateVector<R>, R)> {
    let h = build_hamiltonian(spec)?;
    let dim = spec.dim();
    if psi0.amplitudes.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi0.amplitudes.len(),
        });
    }
    let a = h.mapv(|x| x * Complex::new(R::zero(), -t));
    let u = matrix_exponential(&a)?;
    let psi = Array1::from(psi0.amplitudes.clone());
    let out = u.dot(&psi);
    let norm = out.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt();
    if norm <= R::zero() {
        return Err(Error::NormFailure(norm.to_f64_lossy()));
    }
    let amplitudes = out.iter().map(|x| x / Complex::new(norm, R::zero())).collect();
    Ok((StateVector::from_amplitudes(amplitudes)?, norm))
}

/// The three factor matrices of one first-order Trotter step over the system
/// register. The ZZ and imaginary-field factors are diagonal.
pub struct TrotterFactors<R> {
    pub m_nu_diag: Vec<Complex<R>>,
    pub u_x: Array2<Complex<R>>,
    pub u_nn_diag: Vec<Complex<R>>,
    /// Diagonal of the no-jump Kraus product over pattern sites:
    /// `m_nu_diag` rescaled so single-site weights are `{1, exp(-2 theta dt)}`.
    pub e0_diag: Vec<Complex<R>>,
}

impl<R: Real> TrotterFactors<R> {
    pub fn build(spec: &HamiltonianSpec<R>, dt: R) -> Result<Self> {
        spec.validate()?;
        if dt <= R::zero() {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        let n = spec.n_sites;
        let dim = spec.dim();
        let pattern = spec.pattern_sites();

        let mut m_nu_diag = Vec::with_capacity(dim);
        let mut u_nn_diag = Vec::with_capacity(dim);
        let mut e0_diag = Vec::with_capacity(dim);
        for b in 0..dim {
            let mut zsum = R::zero();
            let mut ones = 0usize;
            for &site in &pattern {
                if b >> (site - 1) & 1 == 0 {
                    zsum += R::one();
                } else {
                    zsum -= R::one();
                    ones += 1;
                }
            }
            m_nu_diag.push(Complex::new((spec.theta * dt * zsum).exp(), R::zero()));
            e0_diag.push(Complex::new(
                (-R::of(2.0) * spec.theta * dt * R::of(ones as f64)).exp(),
                R::zero(),
            ));

            let mut zz = R::zero();
            for site in 1..n {
                let za = if b >> (site - 1) & 1 == 0 { R::one() } else { -R::one() };
                let zb = if b >> site & 1 == 0 { R::one() } else { -R::one() };
                zz += za * zb;
            }
            let phase = spec.lambda * dt * zz;
            u_nn_diag.push(Complex::new(phase.cos(), phase.sin()));
        }

        // exp(i h_x dt X) per site, Kronecker product over the chain.
        let phase = spec.h_x * dt;
        let (c, s) = (phase.cos(), phase.sin());
        let rx1 = [
            [Complex::new(c, R::zero()), Complex::new(R::zero(), s)],
            [Complex::new(R::zero(), s), Complex::new(c, R::zero())],
        ];
        let mut u_x = Array2::from_elem((1, 1), Complex::new(R::one(), R::zero()));
        for _ in 0..n {
            let d = u_x.nrows();
            let mut next = Array2::from_elem((2 * d, 2 * d), Complex::new(R::zero(), R::zero()));
            for hb in 0..2 {
                for cb in 0..2 {
                    for r in 0..d {
                        for cc in 0..d {
                            next[[hb * d + r, cb * d + cc]] = rx1[hb][cb] * u_x[[r, cc]];
                        }
                    }
                }
            }
            u_x = next;
        }

        Ok(TrotterFactors {
            m_nu_diag,
            u_x,
            u_nn_diag,
            e0_diag,
        })
    }
}

/// One exact Trotter step: the imaginary-field factor first, then the
/// transverse-field and nearest-neighbour unitaries. Returns the
/// renormalized state and the norm contributed by the non-unitary factor.
pub fn trotter_step_exact<R: Real>(
    spec: &HamiltonianSpec<R>,
    psi: &StateVector<R>,
    dt: R,
) -> Result<(StateVector<R>, R)> {
    let factors = TrotterFactors::build(spec, dt)?;
    trotter_step_with(&factors, psi)
}

/// Same step applied through prebuilt factors, for repeated stepping.
pub fn trotter_step_with<R: Real>(
    factors: &TrotterFactors<R>,
    psi: &StateVector<R>,
) -> Result<(StateVector<R>, R)> {
    let dim = factors.m_nu_diag.len();
    if psi.amplitudes.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi.amplitudes.len(),
        });
    }
    let mut v: Vec<Complex<R>> = psi
        .amplitudes
        .iter()
        .zip(&factors.m_nu_diag)
        .map(|(a, d)| a * d)
        .collect();
    let step_norm = v.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt();
    if step_norm <= R::zero() {
        return Err(Error::NormFailure(step_norm.to_f64_lossy()));
    }
    let inv = Complex::new(R::one() / step_norm, R::zero());
    for x in &mut v {
        *x = *x * inv;
    }
    let after_x = factors.u_x.dot(&Array1::from(v));
    let out: Vec<Complex<R>> = after_x
        .iter()
        .zip(&factors.u_nn_diag)
        .map(|(a, d)| a * d)
        .collect();
    Ok((StateVector::from_amplitudes(out)?, step_norm))
}

/// Full complex spectrum with the default broken-phase tolerance.
pub fn spectrum<R: EigScalar>(spec: &HamiltonianSpec<R>) -> Result<SpectralReport<R>> {
    spectrum_with_tol(spec, R::of(DEFAULT_IMAG_TOL))
}

pub fn spectrum_with_tol<R: EigScalar>(
    spec: &HamiltonianSpec<R>,
    imag_tol: R,
) -> Result<SpectralReport<R>> {
    let h = build_hamiltonian(spec)?;
    let (eigenvalues, _) = R::eig(&h)?;
    let max_imag = eigenvalues
        .iter()
        .map(|l| l.im.abs())
        .fold(R::zero(), R::max);
    let ground_imag = eigenvalues
        .iter()
        .min_by(|a, b| a.re.partial_cmp(&b.re).expect("finite eigenvalues"))
        .map(|l| l.im.abs())
        .unwrap_or_else(R::zero);
    Ok(SpectralReport {
        is_broken: max_imag > imag_tol,
        max_imag,
        ground_imag,
        is_ground_broken: ground_imag > imag_tol,
        eigenvalues,
    })
}

/// Locate the exceptional theta at fixed `h_x` by bisection over
/// `[0, theta_max]` on the ground-pair predicate — the point where the two
/// lowest levels merge and split into a conjugate pair.
pub fn exceptional_theta<R: EigScalar>(
    spec: &HamiltonianSpec<R>,
    h_x: R,
    tol: R,
    theta_max: R,
) -> Result<ExceptionalPoint<R>> {
    if h_x <= R::zero() {
        return Err(Error::InvalidParameter("h_x must be > 0".into()));
    }
    let base = HamiltonianSpec { h_x, ..*spec };
    let broken = |theta: R| -> Result<bool> {
        Ok(spectrum(&base.with_theta(theta))?.is_ground_broken)
    };
    if broken(tol)? {
        return Err(Error::BracketFailure(format!(
            "spectrum already broken at theta = {tol} (h_x = {h_x})"
        )));
    }
    if !broken(theta_max)? {
        return Err(Error::BracketFailure(format!(
            "spectrum still unbroken at theta_max = {theta_max} (h_x = {h_x})"
        )));
    }
    let mut lo = tol;
    let mut hi = theta_max;
    while hi - lo > tol {
        let mid = (lo + hi) / R::of(2.0);
        if broken(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ExceptionalPoint {
        h_x,
        theta_star: (lo + hi) / R::of(2.0),
        bracket_width: hi - lo,
    })
}

/// Orthonormal basis of the attractor subspace: the span of every
/// eigenvector whose eigenvalue's imaginary part ties the maximum. The
/// degeneracy is generic here — eigenvalues pair as `+-Re + i Im` in the
/// broken phase — so a single eigenvector is not a well-defined attractor.
pub fn attractor_basis<R: EigScalar>(spec: &HamiltonianSpec<R>) -> Result<Vec<Vec<Complex<R>>>> {
    let h = build_hamiltonian(spec)?;
    let (vals, vecs) = R::eig(&h)?;
    let max_im = vals.iter().map(|l| l.im).fold(-R::infinity(), R::max);
    let tol = R::of(1e-8) * (R::one() + max_im.abs());
    let mut basis: Vec<Vec<Complex<R>>> = Vec::new();
    for (i, l) in vals.iter().enumerate() {
        if l.im < max_im - tol {
            continue;
        }
        // Gram-Schmidt against what is already kept.
        let mut v: Vec<Complex<R>> = vecs.column(i).iter().cloned().collect();
        for q in &basis {
            let ip = q
                .iter()
                .zip(&v)
                .map(|(a, b)| a.conj() * b)
                .fold(Complex::new(R::zero(), R::zero()), |acc, x| acc + x);
            for (vk, qk) in v.iter_mut().zip(q) {
                *vk = *vk - ip * qk;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<R>().sqrt();
        if norm > R::of(1e-10) {
            let inv = Complex::new(R::one() / norm, R::zero());
            basis.push(v.into_iter().map(|x| x * inv).collect());
        }
    }
    Ok(basis)
}

/// Squared projection of `psi` onto the attractor subspace after each
/// Trotter step. Refuses to run in the unbroken phase.
pub fn attractor_overlap<R: EigScalar>(
    spec: &HamiltonianSpec<R>,
    psi0: &StateVector<R>,
    n_steps: usize,
    dt: R,
) -> Result<Vec<R>> {
    let report = spectrum(spec)?;
    if !report.is_broken {
        return Err(Error::UnbrokenPhase(report.max_imag.to_f64_lossy()));
    }
    let basis = attractor_basis(spec)?;
    let factors = TrotterFactors::build(spec, dt)?;
    let mut psi = psi0.clone();
    let mut overlaps = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let (next, _) = trotter_step_with(&factors, &psi)?;
        psi = next;
        let mut p = R::zero();
        for q in &basis {
            let ip = q
                .iter()
                .zip(&psi.amplitudes)
                .map(|(a, b)| a.conj() * b)
                .fold(Complex::new(R::zero(), R::zero()), |acc, x| acc + x);
            p += ip.norm_sqr();
        }
        overlaps.push(p);
    }
    Ok(overlaps)
}
