//! Shared domain types: feature bags, SVMP descriptors, MIL labelings, and
//! the pooling configuration.
//!
//! A positive bag holds the per-frame features of one sequence in temporal
//! order. A negative bag holds features known to be irrelevant. Pooling a
//! positive bag against a negative bag produces an [`SvmpDescriptor`], the
//! parameters `(w, b)` of a max-margin hyperplane, which serves as the
//! fixed-length representation of the sequence.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

fn check_finite(features: &Array2<f64>) -> Result<()> {
    for ((row, col), v) in features.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Ordered sequence of p-dimensional feature vectors for one sequence.
/// Row order encodes temporal order.
#[derive(Debug, Clone)]
pub struct FeatureBag {
    features: Array2<f64>,
    sequence_id: String,
}

impl FeatureBag {
    pub fn new(features: Array2<f64>, sequence_id: impl Into<String>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Empty(
                "feature bag must have at least one row and one column".into(),
            ));
        }
        check_finite(&features)?;
        Ok(Self {
            features,
            sequence_id: sequence_id.into(),
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    /// Number of frames n.
    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    /// Feature dimensionality p.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }
}

/// How a negative bag was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SyntheticNoise,
    CorpusSample,
}

/// Unordered collection of feature vectors known to be irrelevant; the
/// negative class shared by every pooling solve.
///
/// The paper's M negative sequences are flattened into one bag of m rows:
/// the MIL objective only ever treats negatives as individually labeled
/// points, so sequence structure on the negative side carries no information.
#[derive(Debug, Clone)]
pub struct NegativeBag {
    features: Array2<f64>,
    provenance: Provenance,
}

impl NegativeBag {
    pub fn new(features: Array2<f64>, provenance: Provenance) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Empty(
                "negative bag must have at least one row and one column".into(),
            ));
        }
        check_finite(&features)?;
        Ok(Self {
            features,
            provenance,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }
}

/// Which solver produced a descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Enumerate,
    Alternating,
    ParamTuning,
    Ordered,
    AveragePool,
    MaxPool,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Enumerate => "enumerate",
            Algorithm::Alternating => "alternating",
            Algorithm::ParamTuning => "param-tuning",
            Algorithm::Ordered => "ordered",
            Algorithm::AveragePool => "avg",
            Algorithm::MaxPool => "max",
        }
    }
}

/// Solve metadata attached to a descriptor.
#[derive(Debug, Clone)]
pub struct DescriptorMeta {
    /// Fraction of the positive bag classified nonnegative by (w, b).
    pub eta_achieved: f64,
    /// Final value of the pooling objective.
    pub objective: f64,
    pub algorithm: Algorithm,
    /// Outer iterations: candidate subsets (enumerate), alternations
    /// (alternating), or ladder rungs (parameter tuning / ordered).
    pub iterations: usize,
}

/// The SVMP descriptor: the tuple (w, b) of the separating hyperplane,
/// used as the fixed-length representation of the pooled sequence.
#[derive(Debug, Clone)]
pub struct SvmpDescriptor {
    pub w: Array1<f64>,
    pub b: f64,
    pub meta: DescriptorMeta,
}

impl SvmpDescriptor {
    pub fn new(w: Array1<f64>, b: f64, meta: DescriptorMeta) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Empty("descriptor weight vector".into()));
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "descriptor entries must be finite".into(),
            ));
        }
        Ok(Self { w, b, meta })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// The concatenated [w; b] vector of length p + 1.
    pub fn stacked(&self) -> Array1<f64> {
        let mut v = Array1::zeros(self.w.len() + 1);
        v.slice_mut(ndarray::s![..self.w.len()]).assign(&self.w);
        v[self.w.len()] = self.b;
        v
    }
}

/// Evaluates the raw decision value w'x + b. No thresholding.
pub fn score(desc: &SvmpDescriptor, x: &ArrayView1<f64>) -> Result<f64> {
    if x.len() != desc.w.len() {
        return Err(Error::DimensionMismatch(format!(
            "descriptor has dimension {}, input has {}",
            desc.w.len(),
            x.len()
        )));
    }
    Ok(desc.w.dot(x) + desc.b)
}

/// Fraction of bag rows with score >= 0, i.e. |{x : w'x + b >= 0}| / n.
pub fn classified_fraction(desc: &SvmpDescriptor, bag: &FeatureBag) -> Result<f64> {
    if bag.is_empty() {
        return Err(Error::Empty("cannot classify an empty bag".into()));
    }
    let mut positive = 0usize;
    for row in bag.features().rows() {
        if score(desc, &row)? >= 0.0 {
            positive += 1;
        }
    }
    Ok(positive as f64 / bag.len() as f64)
}

/// Rescales a descriptor so the concatenated [w; b] has unit Euclidean norm.
///
/// Consistent normalization across a descriptor set leaves the argmax of any
/// downstream linear classifier unchanged, and keeps descriptors from
/// sequences with different solve scales comparable.
pub fn normalize_descriptor(desc: &SvmpDescriptor) -> Result<SvmpDescriptor> {
    let norm = (desc.w.dot(&desc.w) + desc.b * desc.b).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput(
            "cannot normalize the zero descriptor".into(),
        ));
    }
    Ok(SvmpDescriptor {
        w: &desc.w / norm,
        b: desc.b / norm,
        meta: desc.meta.clone(),
    })
}

/// The +/-1 MIL labeling over positive-bag rows; +1 marks the selected
/// classifiable subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilLabeling {
    theta: Vec<i8>,
}

impl MilLabeling {
    pub fn new(theta: Vec<i8>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Empty("labeling".into()));
        }
        if theta.iter().any(|&t| t != 1 && t != -1) {
            return Err(Error::InvalidInput("labels must be +1 or -1".into()));
        }
        Ok(Self { theta })
    }

    /// All-(-1) labeling over n rows.
    pub fn all_negative(n: usize) -> Self {
        Self { theta: vec![-1; n] }
    }

    /// All-(+1) labeling over n rows.
    pub fn all_positive(n: usize) -> Self {
        Self { theta: vec![1; n] }
    }

    pub fn theta(&self) -> &[i8] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn set(&mut self, i: usize, label: i8) {
        assert!(label == 1 || label == -1);
        self.theta[i] = label;
    }

    pub fn positive_count(&self) -> usize {
        self.theta.iter().filter(|&&t| t == 1).count()
    }

    /// Indices labeled +1, in ascending order.
    pub fn positive_indices(&self) -> Vec<usize> {
        self.theta
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether the labeling meets the eta count constraint over n rows.
    pub fn satisfies_eta(&self, eta: f64) -> bool {
        self.positive_count() >= required_positive_count(eta, self.theta.len())
    }
}

/// Minimum number of positive labels R = ceil(eta * n), clamped to at least 1.
///
/// The ceiling guarantees the `|H+| >= eta * n` constraint for non-integral
/// eta * n. A small epsilon keeps ceil from overshooting when eta * n is
/// integral but inexact in binary (e.g. 0.2 * 50).
pub fn required_positive_count(eta: f64, n: usize) -> usize {
    ((eta * n as f64 - 1e-9).ceil() as usize).max(1)
}

/// Pair generation pattern for temporal ordering constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Every ordered pair (l, m) with l < m among selected rows.
    AllPairs,
    /// Adjacent selected rows only; O(n) pairs.
    Consecutive,
}

/// Hyperparameters shared by the pooling solvers.
#[derive(Debug, Clone)]
pub struct PoolingConfig {
    /// Minimum fraction of positive-bag rows that must classify positive.
    pub eta: f64,
    /// Slack weight C1 for the fixed-C solvers (enumerate, alternating).
    pub c1: f64,
    /// Parameter-tuning ladder: initial C1.
    pub c1_init: f64,
    /// Parameter-tuning ladder: geometric multiplier (> 1).
    pub c1_multiplier: f64,
    /// Parameter-tuning ladder: largest C1 tried.
    pub c1_max: f64,
    /// Weight of the temporal-ordering penalty.
    pub c2: f64,
    /// Ordering margin delta.
    pub delta: f64,
    /// Regularizer of the differentiable pooling layer.
    pub lambda_layer: f64,
    /// Relative duality-gap / gradient-norm tolerance of inner solvers.
    pub solver_tol: f64,
    /// Outer-iteration cap (alternations or ladder rungs).
    pub max_outer_iters: usize,
    /// Inner-iteration cap of the ordered gradient solver.
    pub max_inner_iters: usize,
    /// Alternating solver stops when the objective reduction between
    /// consecutive outer iterations falls below this.
    pub convergence_threshold: f64,
    /// Normalize [w; b] to unit norm before classification.
    pub normalize_descriptor: bool,
    /// Value of the constant feature that carries the bias. Values above 1
    /// soften the shrinkage of b that comes with a regularized bias.
    pub bias_scale: f64,
    /// Largest bag size accepted by the enumeration solver.
    pub enumeration_cap: usize,
    /// Ordering-pair pattern used by the ordered solver.
    pub pair_mode: PairMode,
    pub seed: u64,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        Self {
            eta: 0.9,
            c1: 10.0,
            c1_init: 1e-4,
            c1_multiplier: 10.0,
            c1_max: 1e4,
            c2: 1.0,
            delta: 1.0,
            lambda_layer: 1.0,
            solver_tol: 1e-6,
            max_outer_iters: 50,
            max_inner_iters: 2000,
            convergence_threshold: 1e-4,
            normalize_descriptor: true,
            bias_scale: 10.0,
            enumeration_cap: 16,
            pair_mode: PairMode::AllPairs,
            seed: 0,
        }
    }
}

impl PoolingConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("c1", self.c1),
            ("c1_init", self.c1_init),
            ("c1_max", self.c1_max),
            ("lambda_layer", self.lambda_layer),
            ("solver_tol", self.solver_tol),
            ("convergence_threshold", self.convergence_threshold),
            ("bias_scale", self.bias_scale),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if !(self.c1_multiplier > 1.0 && self.c1_multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "c1_multiplier must exceed 1, got {}",
                self.c1_multiplier
            )));
        }
        if self.c1_max < self.c1_init {
            return Err(Error::Config(format!(
                "c1_max ({}) must be at least c1_init ({})",
                self.c1_max, self.c1_init
            )));
        }
        for (name, v) in [("c2", self.c2), ("delta", self.delta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        if self.max_outer_iters == 0 || self.max_inner_iters == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, arr2, array};

    fn desc(w: Vec<f64>, b: f64) -> SvmpDescriptor {
        SvmpDescriptor::new(
            Array1::from(w),
            b,
            DescriptorMeta {
                eta_achieved: 1.0,
                objective: 0.0,
                algorithm: Algorithm::ParamTuning,
                iterations: 0,
            },
        )
        .unwrap()
    }

    #[test]
    fn score_identity_projection() {
        let d = desc(vec![1.0, 0.0], 0.0);
        assert_eq!(score(&d, &arr1(&[2.0, 5.0]).view()).unwrap(), 2.0);
    }

    #[test]
    fn score_constant() {
        let d = desc(vec![0.0, 0.0], 3.0);
        assert_eq!(score(&d, &arr1(&[-7.0, 11.0]).view()).unwrap(), 3.0);
    }

    #[test]
    fn score_hand_arithmetic() {
        let d = desc(vec![1.0, 2.0], -1.0);
        assert_eq!(score(&d, &arr1(&[1.0, 1.0]).view()).unwrap(), 2.0);
    }

    #[test]
    fn score_dimension_mismatch() {
        let d = desc(vec![1.0, 2.0], 0.0);
        assert!(score(&d, &arr1(&[1.0]).view()).is_err());
    }

    #[test]
    fn classified_fraction_split_pair() {
        let d = desc(vec![1.0], 0.0);
        let bag = FeatureBag::new(arr2(&[[1.0], [-1.0]]), "s").unwrap();
        assert_eq!(classified_fraction(&d, &bag).unwrap(), 0.5);
    }

    #[test]
    fn classified_fraction_constant_positive() {
        let d = desc(vec![0.0], 1.0);
        let bag = FeatureBag::new(arr2(&[[5.0], [-5.0], [0.0]]), "s").unwrap();
        assert_eq!(classified_fraction(&d, &bag).unwrap(), 1.0);
    }

    #[test]
    fn classified_fraction_matches_brute_count() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rows = 37;
        let p = 5;
        let feats = Array2::from_shape_fn((rows, p), |_| rng.gen_range(-2.0..2.0));
        let bag = FeatureBag::new(feats.clone(), "s").unwrap();
        let d = desc((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect(), 0.3);
        let brute = feats
            .rows()
            .into_iter()
            .filter(|r| r.dot(&d.w) + d.b >= 0.0)
            .count();
        assert_eq!(
            classified_fraction(&d, &bag).unwrap(),
            brute as f64 / rows as f64
        );
    }

    #[test]
    fn normalize_three_four_five() {
        let d = desc(vec![3.0], 4.0);
        let n = normalize_descriptor(&d).unwrap();
        assert!((n.w[0] - 0.6).abs() < 1e-15);
        assert!((n.b - 0.8).abs() < 1e-15);
    }

    #[test]
    fn normalize_idempotent_and_unit() {
        let d = desc(vec![0.3, -1.2, 0.05], -2.0);
        let n = normalize_descriptor(&d).unwrap();
        let norm = (n.w.dot(&n.w) + n.b * n.b).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let n2 = normalize_descriptor(&n).unwrap();
        assert!((&n2.w - &n.w).iter().all(|v| v.abs() < 1e-15));
        assert!((n2.b - n.b).abs() < 1e-15);
    }

    #[test]
    fn normalize_preserves_score_sign() {
        let d = desc(vec![1.5, -0.7], 0.4);
        let n = normalize_descriptor(&d).unwrap();
        for x in [
            array![1.0, 1.0],
            array![-3.0, 0.2],
            array![0.0, 0.0],
            array![2.0, 4.0],
        ] {
            let s0 = score(&d, &x.view()).unwrap();
            let s1 = score(&n, &x.view()).unwrap();
            assert_eq!(s0 >= 0.0, s1 >= 0.0);
        }
    }

    #[test]
    fn normalize_rejects_zero() {
        let d = desc(vec![0.0, 0.0], 0.0);
        assert!(normalize_descriptor(&d).is_err());
    }

    #[test]
    fn bag_rejects_nan() {
        let res = FeatureBag::new(arr2(&[[1.0, f64::NAN]]), "s");
        assert!(matches!(res, Err(Error::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn bag_rejects_empty() {
        assert!(FeatureBag::new(Array2::zeros((0, 3)), "s").is_err());
    }

    #[test]
    fn required_count_ceils() {
        assert_eq!(required_positive_count(0.5, 2), 1);
        assert_eq!(required_positive_count(0.5, 5), 3);
        assert_eq!(required_positive_count(1.0, 4), 4);
        assert_eq!(required_positive_count(0.2, 50), 10);
        assert_eq!(required_positive_count(0.9, 50), 45);
        assert_eq!(required_positive_count(0.01, 3), 1);
    }

    #[test]
    fn labeling_counts() {
        let l = MilLabeling::new(vec![1, -1, 1, -1]).unwrap();
        assert_eq!(l.positive_count(), 2);
        assert_eq!(l.positive_indices(), vec![0, 2]);
        assert!(l.satisfies_eta(0.5));
        assert!(!l.satisfies_eta(0.75));
    }

    #[test]
    fn config_validation() {
        assert!(PoolingConfig::default().validate().is_ok());
        let mut bad = PoolingConfig::default();
        bad.eta = 0.0;
        assert!(bad.validate().is_err());
        bad = PoolingConfig::default();
        bad.c1_multiplier = 1.0;
        assert!(bad.validate().is_err());
        bad = PoolingConfig::default();
        bad.c1_max = bad.c1_init / 10.0;
        assert!(bad.validate().is_err());
    }
}
