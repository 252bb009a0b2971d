//! Readout-error mitigation by restricted confusion-matrix inversion: the
//! linear system is built only over observed bitstrings within a Hamming
//! cutoff of each other, never over the full 2^N space.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::observable_eigenvalue;
use crate::linalg::solve_real;
use crate::noise::{NoiseModel, ReadoutError};
use crate::{Error, Real, Result};

/// Hamming cutoff used when none is requested.
pub const DEFAULT_HAMMING_CUTOFF: usize = 3;

/// Uncorrelated per-qubit readout confusion model. `matrices[q][obs][true]`
/// is `P(read obs | prepared true)` on qubit `q`; columns sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSpec<R> {
    pub matrices: Vec<[[R; 2]; 2]>,
}

impl<R: Real> ConfusionSpec<R> {
    pub fn identity(n_qubits: usize) -> Self {
        ConfusionSpec {
            matrices: vec![[[R::one(), R::zero()], [R::zero(), R::one()]]; n_qubits],
        }
    }

    /// Build from per-qubit flip rates: `p01 = P(read 1 | state 0)`,
    /// `p10 = P(read 0 | state 1)`.
    pub fn from_rates(rates: &[ReadoutError<R>]) -> Self {
        ConfusionSpec {
            matrices: rates
                .iter()
                .map(|r| [[R::one() - r.p01, r.p10], [r.p01, R::one() - r.p10]])
                .collect(),
        }
    }

    pub fn from_noise_model(noise: &NoiseModel<R>, n_qubits: usize) -> Self {
        ConfusionSpec::from_rates(
            &(0..n_qubits)
                .map(|q| noise.readout_for(q))
                .collect::<Vec<_>>(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        for m in &self.matrices {
            for col in 0..2 {
                let sum = m[0][col] + m[1][col];
                if (sum - R::one()).abs() > R::of(1e-12)
                    || m[0][col] < R::zero()
                    || m[1][col] < R::zero()
                {
                    return Err(Error::InvalidParameter(
                        "confusion columns must be stochastic".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn n_qubits(&self) -> usize {
        self.matrices.len()
    }

    /// `P(read bitstring i | prepared bitstring j)` under the tensor model.
    fn transition(&self, observed: &str, prepared: &str) -> R {
        observed
            .bytes()
            .zip(prepared.bytes())
            .enumerate()
            .map(|(q, (o, t))| {
                self.matrices[q][usize::from(o == b'1')][usize::from(t == b'1')]
            })
            .fold(R::one(), |acc, p| acc * p)
    }
}

/// Signed probability weights over bitstrings; negatives are kept, the sum
/// is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution<R> {
    pub entries: BTreeMap<String, R>,
}

impl<R: Real> QuasiDistribution<R> {
    pub fn sum(&self) -> R {
        self.entries.values().copied().sum()
    }

    /// Quasi-probability-weighted average magnetization.
    pub fn expectation_observable(&self, n_system: usize) -> R {
        self.entries
            .iter()
            .map(|(bits, &w)| {
                let index = bits
                    .bytes()
                    .enumerate()
                    .fold(0usize, |acc, (q, b)| acc | (usize::from(b == b'1') << q));
                observable_eigenvalue::<R>(index, n_system) * w
            })
            .sum()
    }
}

fn hamming(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count()
}

/// Confusion matrix restricted to the observed bitstring set, zeroing
/// transitions beyond the Hamming cutoff. Row/column order follows the
/// input slice.
pub fn restricted_confusion<R: Real>(
    observed: &[String],
    spec: &ConfusionSpec<R>,
    hamming_cutoff: usize,
) -> Array2<R> {
    let n = observed.len();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if hamming(&observed[i], &observed[j]) <= hamming_cutoff {
                a[[i, j]] = spec.transition(&observed[i], &observed[j]);
            }
        }
    }
    a
}

/// Invert the restricted confusion matrix against the observed frequencies
/// and renormalize the solution to unit sum. Negative weights are kept.
pub fn mitigate<R: Real>(
    counts: &BTreeMap<String, u64>,
    spec: &ConfusionSpec<R>,
    hamming_cutoff: usize,
) -> Result<QuasiDistribution<R>> {
    spec.validate()?;
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::NoData);
    }
    let observed: Vec<String> = counts.keys().cloned().collect();
    if let Some(bits) = observed.iter().find(|b| b.len() != spec.n_qubits()) {
        return Err(Error::DimensionMismatch {
            expected: spec.n_qubits(),
            got: bits.len(),
        });
    }
    let a = restricted_confusion(&observed, spec, hamming_cutoff);
    let freq: Vec<R> = observed
        .iter()
        .map(|b| R::of(counts[b] as f64 / total as f64))
        .collect();
    let x = solve_real(&a, &freq)?;
    let sum: R = x.iter().copied().sum();
    if sum.abs() < R::of(1e-12) {
        return Err(Error::SingularSystem(f64::INFINITY));
    }
    let entries = observed
        .into_iter()
        .zip(x)
        .map(|(bits, w)| (bits, w / sum))
        .collect();
    Ok(QuasiDistribution { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::corrupt_readout;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn symmetric_spec(p: f64, n: usize) -> ConfusionSpec<f64> {
        ConfusionSpec::from_rates(&vec![ReadoutError::symmetric(p); n])
    }

    #[test]
    fn identity_spec_restricted_is_identity() {
        let observed: Vec<String> = ["00", "01", "11"].iter().map(|s| s.to_string()).collect();
        let a = restricted_confusion(&observed, &ConfusionSpec::<f64>::identity(2), 2);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a[[i, j]], expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn single_qubit_restricted_matches_tensor() {
        let observed = vec!["0".to_string(), "1".to_string()];
        let a = restricted_confusion(&observed, &symmetric_spec(0.1, 1), 1);
        assert_abs_diff_eq!(a[[0, 0]], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(a[[0, 1]], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(a[[1, 0]], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(a[[1, 1]], 0.9, epsilon = 1e-15);
    }

    #[test]
    fn zero_cutoff_is_diagonal() {
        let observed: Vec<String> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let a = restricted_confusion(&observed, &symmetric_spec(0.05, 2), 0);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(a[[i, j]], 0.0);
                } else {
                    assert_abs_diff_eq!(a[[i, j]], 0.95 * 0.95, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn noiseless_counts_pass_through() {
        let mut counts = BTreeMap::new();
        counts.insert("00".to_string(), 600u64);
        counts.insert("11".to_string(), 400u64);
        let q = mitigate(&counts, &ConfusionSpec::<f64>::identity(2), 3).unwrap();
        assert_abs_diff_eq!(q.entries["00"], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(q.entries["11"], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(q.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_empty_and_bad_spec() {
        let empty: BTreeMap<String, u64> = BTreeMap::new();
        assert!(matches!(
            mitigate(&empty, &ConfusionSpec::<f64>::identity(2), 3),
            Err(Error::NoData)
        ));
        let mut bad = ConfusionSpec::<f64>::identity(1);
        bad.matrices[0][0][0] = 0.7; // column no longer sums to 1
        let mut counts = BTreeMap::new();
        counts.insert("0".to_string(), 1u64);
        assert!(mitigate(&counts, &bad, 3).is_err());
    }

    /// Apply the exact tensor confusion map to a distribution over all 2^N
    /// strings.
    fn apply_confusion_exact(
        probs: &BTreeMap<String, f64>,
        spec: &ConfusionSpec<f64>,
    ) -> BTreeMap<String, f64> {
        let n = spec.n_qubits();
        let mut out = BTreeMap::new();
        for obs_idx in 0..1usize << n {
            let obs: String = (0..n)
                .map(|q| if obs_idx >> q & 1 == 0 { '0' } else { '1' })
                .collect();
            let mut p = 0.0;
            for (prep, &w) in probs {
                p += spec.transition(&obs, prep) * w;
            }
            if p > 0.0 {
                out.insert(obs, p);
            }
        }
        out
    }

    #[test]
    fn full_rank_round_trip_is_identity() {
        // All 2^N strings observed with d >= N: confusion followed by
        // mitigation recovers the input distribution exactly.
        for n in [2usize, 3] {
            let spec = symmetric_spec(0.07, n);
            let mut ideal = BTreeMap::new();
            let dim = 1usize << n;
            for i in 0..dim {
                let bits: String = (0..n)
                    .map(|q| if i >> q & 1 == 0 { '0' } else { '1' })
                    .collect();
                ideal.insert(bits, (i + 1) as f64 / (dim * (dim + 1) / 2) as f64);
            }
            let noisy = apply_confusion_exact(&ideal, &spec);
            // Scale to integer-free counts by using a large common factor.
            let counts: BTreeMap<String, u64> = noisy
                .iter()
                .map(|(k, v)| (k.clone(), (v * 1e12).round() as u64))
                .collect();
            let q = mitigate(&counts, &spec, n).unwrap();
            for (bits, &w) in &ideal {
                assert_abs_diff_eq!(q.entries[bits], w, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn residual_never_grows_with_cutoff() {
        // Synthetic noisy counts over a partial observed set.
        let spec = symmetric_spec(0.08, 3);
        let mut counts = BTreeMap::new();
        counts.insert("000".to_string(), 5000u64);
        counts.insert("001".to_string(), 800u64);
        counts.insert("011".to_string(), 300u64);
        counts.insert("111".to_string(), 2000u64);
        let observed: Vec<String> = counts.keys().cloned().collect();
        let total: f64 = counts.values().sum::<u64>() as f64;
        let freq: Vec<f64> = observed.iter().map(|b| counts[b] as f64 / total).collect();

        let mut last = f64::INFINITY;
        for d in 0..=3usize {
            let a = restricted_confusion(&observed, &spec, d);
            let q = mitigate(&counts, &spec, d).unwrap();
            let x: Vec<f64> = observed.iter().map(|b| q.entries[b]).collect();
            // Undo the unit-sum renormalization before computing the
            // residual of the raw solve.
            let raw_sum: f64 = {
                let raw = solve_real(&a, &freq).unwrap();
                raw.iter().sum()
            };
            let residual: f64 = (0..observed.len())
                .map(|i| {
                    let ax: f64 = (0..observed.len()).map(|j| a[[i, j]] * x[j] * raw_sum).sum();
                    (ax - freq[i]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!(residual <= last + 1e-12, "d={d}: {residual} > {last}");
            last = residual;
        }
    }

    #[test]
    fn synthetic_pipeline_recovers_observable() {
        // Ideal distribution -> per-shot readout corruption -> mitigation;
        // the mitigated <O> must land within 3 sigma of ideal and beat the
        // unmitigated estimate.
        let n = 3usize;
        let p = 0.06;
        let spec = symmetric_spec(p, n);
        let noise = NoiseModel::<f64>::noiseless().with_uniform_readout(p, p, n);
        let mut ideal = BTreeMap::new();
        ideal.insert("000".to_string(), 0.55);
        ideal.insert("101".to_string(), 0.3);
        ideal.insert("111".to_string(), 0.15);
        let ideal_o: f64 = ideal
            .iter()
            .map(|(bits, w)| {
                let idx = bits
                    .bytes()
                    .enumerate()
                    .fold(0usize, |acc, (q, b)| acc | (usize::from(b == b'1') << q));
                observable_eigenvalue::<f64>(idx, n) * w
            })
            .sum();

        let n_shots = 200_000u64;
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        let keys: Vec<&String> = ideal.keys().collect();
        let weights: Vec<f64> = ideal.values().copied().collect();
        use rand::Rng;
        for _ in 0..n_shots {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = 0;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if r < acc {
                    pick = i;
                    break;
                }
            }
            let mut bits: Vec<u8> = keys[pick].bytes().map(|b| u8::from(b == b'1')).collect();
            corrupt_readout(&mut bits, &noise, &mut rng);
            let s: String = bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
            *counts.entry(s).or_insert(0) += 1;
        }

        let raw_o = crate::simulator::expectation_observable::<f64>(&counts, n).unwrap();
        let q = mitigate(&counts, &spec, 2).unwrap();
        let mit_o = q.expectation_observable(n);
        let sigma = (1.0 / n_shots as f64).sqrt();
        assert!(
            (mit_o - ideal_o).abs() < 3.0 * sigma,
            "mitigated {mit_o} vs ideal {ideal_o}"
        );
        assert!((mit_o - ideal_o).abs() < (raw_o - ideal_o).abs());
    }
}
