//! Intrinsic-dimension estimators: the linear singular-value-ratio method
//! and the transversality combination of the three exploration dimensions.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::variation::VariationMatrix;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("degenerate spectrum: all singular values are zero")]
    DegenerateSpectrum,
    #[error("spectrum too short: need at least 2 values, got {0}")]
    SpectrumTooShort(usize),
    #[error("degenerate profile: all projection costs are zero")]
    DegenerateProfile,
    #[error("invalid cost profile: {0}")]
    InvalidProfile(String),
}

/// Which estimation pipeline produced a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "cca")]
    Cca,
    #[serde(rename = "cca-boot-inf")]
    CcaBootInfinitesimal,
    #[serde(rename = "cca-boot-finite")]
    CcaBootFinite,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Method::Linear),
            "cca" => Ok(Method::Cca),
            "cca-boot-inf" => Ok(Method::CcaBootInfinitesimal),
            "cca-boot-finite" => Ok(Method::CcaBootFinite),
            other => Err(format!(
                "unknown method `{other}` (expected linear, cca, cca-boot-inf or cca-boot-finite)"
            )),
        }
    }
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Linear,
        Method::Cca,
        Method::CcaBootInfinitesimal,
        Method::CcaBootFinite,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::Cca => "cca",
            Method::CcaBootInfinitesimal => "cca-boot-inf",
            Method::CcaBootFinite => "cca-boot-finite",
        }
    }
}

/// Singular values in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Wraps a descending, non-negative sequence.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.windows(2).all(|w| w[0] >= w[1]) && values.last().is_none_or(|&v| v >= 0.0),
            "singular spectrum must be non-increasing and non-negative"
        );
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What a [`DimensionEstimate`] was read off from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EstimateDiagnostics {
    /// Descending singular values.
    Spectrum(Vec<f64>),
    /// Projection costs J(1)..J(p_max).
    Costs(Vec<f64>),
}

/// An estimated intrinsic dimension together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: usize,
    pub method: Method,
    pub diagnostics: EstimateDiagnostics,
}

/// Singular values of the variation matrix, in decreasing order.
pub fn singular_spectrum(matrix: &VariationMatrix) -> SingularSpectrum {
    spectrum_of(&matrix.data)
}

/// Singular values of an arbitrary matrix, in decreasing order.
pub fn spectrum_of(data: &DMatrix<f64>) -> SingularSpectrum {
    let mut values = data.clone().singular_values().as_slice().to_vec();
    values.sort_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    SingularSpectrum::new(values)
}

/// The linear ratio estimator: the number of significative singular values,
/// located where the ratio of successive values peaks.
///
/// Ties break toward the smallest index. A zero singular value following a
/// positive one is decisive (infinite ratio); an all-zero spectrum is an
/// error.
pub fn estimate_dim_linear(spectrum: &SingularSpectrum) -> Result<DimensionEstimate, EstimateError> {
    let v = spectrum.values();
    if v.len() < 2 {
        return Err(EstimateError::SpectrumTooShort(v.len()));
    }
    if v[0] <= 0.0 {
        return Err(EstimateError::DegenerateSpectrum);
    }
    let mut best_j = 0usize;
    let mut best_ratio = f64::NEG_INFINITY;
    for j in 1..v.len() {
        if v[j] == 0.0 {
            // First positive-to-zero boundary dominates every finite ratio.
            let estimate = j;
            return Ok(DimensionEstimate {
                value: estimate,
                method: Method::Linear,
                diagnostics: EstimateDiagnostics::Spectrum(v.to_vec()),
            });
        }
        let ratio = v[j - 1] / v[j];
        if ratio > best_ratio {
            best_ratio = ratio;
            best_j = j;
        }
    }
    Ok(DimensionEstimate {
        value: best_j,
        method: Method::Linear,
        diagnostics: EstimateDiagnostics::Spectrum(v.to_vec()),
    })
}

/// Transversality: dimension of the displacement group from the three
/// exploration dimensions. May be negative on non-physical inputs; the
/// caller decides how to flag that.
pub fn displacement_dim(m: usize, e: usize, b: usize) -> i64 {
    e as i64 + m as i64 - b as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::ExplorationMode;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wrap(data: DMatrix<f64>) -> VariationMatrix {
        VariationMatrix {
            preprocessing: vec![],
            data,
            mode: ExplorationMode::Both,
            amplitude: 0.0,
        }
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let s = spectrum_of(&m);
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn rank_two_outer_product_matches_gram_eigenvalue_oracle() {
        // Oracle route: eigenvalues of the 5x5 Gram matrix M * M^T, computed
        // with the symmetric eigensolver, must be the squared singular values.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let u1 = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let u2 = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0));
        let v1 = DVector::from_fn(50, |_, _| rng.random_range(-1.0..1.0));
        let v2 = DVector::from_fn(50, |_, _| rng.random_range(-1.0..1.0));
        let m = &u1 * v1.transpose() + &u2 * v2.transpose();

        let spectrum = spectrum_of(&m);
        let gram = &m * m.transpose();
        let mut eig: Vec<f64> = gram
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|&l| l.max(0.0).sqrt())
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (s, o) in spectrum.values().iter().zip(&eig) {
            assert!((s - o).abs() <= 1e-10 * spectrum.values()[0]);
        }
        assert!(spectrum.values()[2] / spectrum.values()[1] < 1e-8);
    }

    #[test]
    fn spectrum_invariant_under_row_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(6, 30, |_, _| rng.random_range(-1.0..1.0));
        let mut permuted = m.clone();
        permuted.swap_rows(0, 4);
        permuted.swap_rows(2, 5);
        let a = spectrum_of(&m);
        let b = spectrum_of(&permuted);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() <= 1e-10 * a.values()[0]);
        }
    }

    #[test]
    fn svd_factors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = DMatrix::from_fn(12, 40, |_, _| rng.random_range(-1.0..1.0));
        let svd = m.clone().svd(true, true);
        let rebuilt = svd.recompose().unwrap();
        assert!((&rebuilt - &m).norm() / m.norm() < 1e-10);
    }

    #[test]
    fn ratio_picks_the_gap() {
        let s = SingularSpectrum::new(vec![10.0, 9.0, 8.5, 1e-9, 1e-10]);
        assert_eq!(estimate_dim_linear(&s).unwrap().value, 3);
    }

    #[test]
    fn zero_tail_is_decisive() {
        let s = SingularSpectrum::new(vec![5.0, 4.0, 0.0, 0.0]);
        assert_eq!(estimate_dim_linear(&s).unwrap().value, 2);
    }

    #[test]
    fn all_zero_spectrum_errors() {
        let s = SingularSpectrum::new(vec![0.0, 0.0, 0.0]);
        assert!(matches!(
            estimate_dim_linear(&s),
            Err(EstimateError::DegenerateSpectrum)
        ));
    }

    #[test]
    fn ties_break_toward_smallest_dimension() {
        // Ratios: 2/1=2 at j=1, 1/0.5=2 at j=2: j=1 wins.
        let s = SingularSpectrum::new(vec![2.0, 1.0, 0.5]);
        assert_eq!(estimate_dim_linear(&s).unwrap().value, 1);
    }

    #[test]
    fn transversality_arithmetic() {
        assert_eq!(displacement_dim(9, 6, 12), 3);
        assert_eq!(displacement_dim(4, 7, 11), 0);
        assert_eq!(displacement_dim(12, 9, 15), 6);
        assert_eq!(displacement_dim(2, 2, 7), -3);
    }

    #[test]
    fn exact_rank_recovery_on_synthetic_linear_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(321);
        for _ in 0..25 {
            let n = rng.random_range(6..24usize);
            let k = rng.random_range(1..(n.min(9)));
            let samples = 25 * k;
            let basis = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0))
                .qr()
                .q();
            let coords = DMatrix::from_fn(k, samples, |_, _| rng.random_range(-1.0..1.0));
            let data = basis * coords;
            let est = estimate_dim_linear(&spectrum_of(&data)).unwrap();
            assert_eq!(est.value, k, "rank {k} in dimension {n}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn scale_invariance(c in 1e-6f64..1e6, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DMatrix::from_fn(5, 25, |_, _| rng.random_range(-1.0..1.0));
            let a = estimate_dim_linear(&singular_spectrum(&wrap(m.clone()))).unwrap();
            let b = estimate_dim_linear(&singular_spectrum(&wrap(m * c))).unwrap();
            prop_assert_eq!(a.value, b.value);
        }
    }
}
