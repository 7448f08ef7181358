//! Seeded generation of the synthetic benchmark datasets: the three coupled
//! scenarios with controlled noise and component weights, missing-entry
//! masks, and the four-group clustering construction.

use crate::coupled::{CmtfModel, CoupledDataset};
use crate::eval::WeightedKruskal;
use crate::tensor::{khatri_rao, kruskal_to_full, DenseTensor, Matrix};
use crate::{CmtfError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Third-order tensor and one matrix coupled in mode 0.
    TensorMatrix,
    /// Two third-order tensors coupled in mode 0; the second tensor is
    /// carried as its mode-0 unfolding, whose true side factor is the
    /// Khatri-Rao product of the second tensor's non-shared factors.
    TensorTensor,
    /// Third-order tensor with matrices coupled to modes 0 and 2.
    TensorTwoMatrices,
}

impl Scenario {
    pub fn side_modes(&self) -> Vec<usize> {
        match self {
            Scenario::TensorMatrix | Scenario::TensorTensor => vec![0],
            Scenario::TensorTwoMatrices => vec![0, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// All component weights 1 (every generating column unit norm).
    Unit,
    /// Integer weights >= 1: |draw from N(0,25)| rounded, plus 1.
    RandomInteger,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub shape: Vec<usize>,
    /// TensorMatrix: [M]; TensorTensor: the second tensor's two non-shared
    /// dimensions; TensorTwoMatrices: [M0, M2].
    pub side_dims: Vec<usize>,
    pub rank: usize,
    pub eta: f64,
    pub weight_mode: WeightMode,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Desk-scale defaults: 20x20x20 tensor, side dimension 20, rank 3.
    pub fn desk(scenario: Scenario, eta: f64, weight_mode: WeightMode, seed: u64) -> Self {
        let side_dims = match scenario {
            Scenario::TensorMatrix => vec![20],
            Scenario::TensorTensor | Scenario::TensorTwoMatrices => vec![20, 20],
        };
        ScenarioConfig {
            scenario,
            shape: vec![20, 20, 20],
            side_dims,
            rank: 3,
            eta,
            weight_mode,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.eta < 0.0 {
            return Err(CmtfError::InvalidArgument(
                "rank must be >= 1 and eta >= 0".into(),
            ));
        }
        let want = match self.scenario {
            Scenario::TensorMatrix => 1,
            Scenario::TensorTensor | Scenario::TensorTwoMatrices => 2,
        };
        if self.side_dims.len() != want || self.side_dims.iter().any(|&d| d == 0) {
            return Err(CmtfError::InvalidArgument(format!(
                "scenario needs {} positive side dimension(s)",
                want
            )));
        }
        if self.shape.len() != 3 || self.shape.iter().any(|&d| d == 0) {
            return Err(CmtfError::InvalidArgument(
                "scenarios use a third-order tensor with positive dimensions".into(),
            ));
        }
        Ok(())
    }
}

/// A generated instance: unit-column generating factors, the component
/// weights they carry, and the noisy dataset built from them.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Unit-column factors; side factors in realized (matrix) form.
    pub model: CmtfModel,
    pub side_modes: Vec<usize>,
    pub lambdas: Vec<f64>,
    pub alphas: Vec<Vec<f64>>,
    pub dataset: CoupledDataset,
}

impl GroundTruth {
    /// Normalized view for factor-match scoring.
    pub fn to_weighted_kruskal(&self) -> WeightedKruskal {
        let weights = (0..self.lambdas.len())
            .map(|r| self.lambdas[r] + self.alphas.iter().map(|a| a[r]).sum::<f64>())
            .collect();
        WeightedKruskal {
            tensor_factors: self.model.tensor_factors.clone(),
            side_factors: self.model.side_factors.clone(),
            side_modes: self.side_modes.clone(),
            lambdas: self.lambdas.clone(),
            alphas: self.alphas.clone(),
            weights,
        }
    }

    /// Model with weights folded back into the factors, so it reproduces
    /// the clean data exactly (useful as a noiseless fitting target).
    pub fn weighted_model(&self) -> CmtfModel {
        let mut model = self.model.clone();
        for (r, &l) in self.lambdas.iter().enumerate() {
            model.tensor_factors[0].scale_col(r, l);
        }
        // side m sees the shared factor scaled by lambda; compensate so
        // A_unit diag(alpha) V^T is preserved
        for (m, alpha) in self.alphas.iter().enumerate() {
            let shared_scale: Vec<f64> = if self.side_modes[m] == 0 {
                self.lambdas.clone()
            } else {
                vec![1.0; self.lambdas.len()]
            };
            for (r, (&a, s)) in alpha.iter().zip(&shared_scale).enumerate() {
                model.side_factors[m].scale_col(r, a / s);
            }
        }
        model
    }

    pub fn num_factor_matrices(&self) -> usize {
        self.model.tensor_factors.len() + self.model.side_factors.len()
    }
}

fn randn_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn unit_columns(m: &mut Matrix) {
    for r in 0..m.cols() {
        let n = m.col_norm(r);
        if n > 0.0 {
            m.scale_col(r, 1.0 / n);
        }
    }
}

fn draw_weights(rank: usize, mode: WeightMode, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match mode {
        WeightMode::Unit => vec![1.0; rank],
        WeightMode::RandomInteger => (0..rank)
            .map(|_| {
                let z: f64 = rng.sample::<f64, _>(StandardNormal) * 5.0;
                z.abs().round() + 1.0
            })
            .collect(),
    }
}

/// Adds standard-normal noise scaled so the relative residual is exactly
/// `eta`: clean + eta * N * ||clean|| / ||N||.
fn add_noise(clean: &[f64], eta: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if eta == 0.0 {
        return clean.to_vec();
    }
    let noise: Vec<f64> = (0..clean.len()).map(|_| rng.sample(StandardNormal)).collect();
    let clean_norm = clean.iter().map(|v| v * v).sum::<f64>().sqrt();
    let noise_norm = noise.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = eta * clean_norm / noise_norm;
    clean.iter().zip(&noise).map(|(c, n)| c + s * n).collect()
}

pub fn gen_scenario(cfg: &ScenarioConfig) -> Result<GroundTruth> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rank = cfg.rank;

    let mut tensor_factors: Vec<Matrix> = cfg
        .shape
        .iter()
        .map(|&d| randn_matrix(d, rank, &mut rng))
        .collect();
    for f in tensor_factors.iter_mut() {
        unit_columns(f);
    }

    let side_modes = cfg.scenario.side_modes();
    let mut side_factors: Vec<Matrix> = Vec::new();
    match cfg.scenario {
        Scenario::TensorMatrix => {
            let mut v = randn_matrix(cfg.side_dims[0], rank, &mut rng);
            unit_columns(&mut v);
            side_factors.push(v);
        }
        Scenario::TensorTensor => {
            // second tensor's non-shared factors; their Khatri-Rao product
            // is the true side factor of the unfolding (unit columns stay
            // unit under column-wise Kronecker products)
            let mut d = randn_matrix(cfg.side_dims[0], rank, &mut rng);
            let mut e = randn_matrix(cfg.side_dims[1], rank, &mut rng);
            unit_columns(&mut d);
            unit_columns(&mut e);
            side_factors.push(khatri_rao(&e, &d)?);
        }
        Scenario::TensorTwoMatrices => {
            for &w in &cfg.side_dims {
                let mut v = randn_matrix(w, rank, &mut rng);
                unit_columns(&mut v);
                side_factors.push(v);
            }
        }
    }

    let lambdas = draw_weights(rank, cfg.weight_mode, &mut rng);
    let alphas: Vec<Vec<f64>> = side_modes
        .iter()
        .map(|_| draw_weights(rank, cfg.weight_mode, &mut rng))
        .collect();

    let clean_tensor = kruskal_to_full(&tensor_factors, Some(&lambdas))?;
    let noisy = DenseTensor::from_data(
        &cfg.shape,
        add_noise(clean_tensor.data(), cfg.eta, &mut rng),
    )?;

    let mut sides = Vec::new();
    for (m, (&mode, v)) in side_modes.iter().zip(&side_factors).enumerate() {
        let mut scaled = tensor_factors[mode].clone();
        for (r, &a) in alphas[m].iter().enumerate() {
            scaled.scale_col(r, a);
        }
        let clean = scaled.dot_t(v);
        let noisy_side = Matrix::from_data(
            clean.rows(),
            clean.cols(),
            add_noise(clean.data(), cfg.eta, &mut rng),
        )?;
        sides.push((mode, noisy_side));
    }

    let model = CmtfModel {
        tensor_factors,
        side_factors,
    };
    let dataset = CoupledDataset::new(noisy, None, sides)?;
    Ok(GroundTruth {
        model,
        side_modes,
        lambdas,
        alphas,
        dataset,
    })
}

/// Binary mask with exactly round(fraction * size) zeros placed uniformly
/// without replacement.
pub fn gen_mask(shape: &[usize], missing_fraction: f64, seed: u64) -> Result<DenseTensor> {
    if !(0.0..1.0).contains(&missing_fraction) {
        return Err(CmtfError::InvalidArgument(
            "missing fraction must be in [0, 1)".into(),
        ));
    }
    let len: usize = shape.iter().product();
    let zeros = (missing_fraction * len as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = vec![1.0; len];
    for idx in rand::seq::index::sample(&mut rng, len, zeros) {
        data[idx] = 0.0;
    }
    DenseTensor::from_data(shape, data)
}

/// The four-group clustering construction: mode-0 carries group structure
/// split two ways (tensor factor separates G1+G2 from G3+G4, side factor
/// separates G1+G3 from G2+G4), so only the coupled factorization sees all
/// four groups.
#[derive(Debug, Clone)]
pub struct ClusteringExample {
    /// Group index 0..=3 per mode-0 row.
    pub labels: Vec<usize>,
    pub tensor: DenseTensor,
    pub side: Matrix,
    /// Generating factors after column normalization (a1, b, c for the
    /// tensor; a2, v for the matrix).
    pub a1: Matrix,
    pub a2: Matrix,
}

pub fn gen_clustering_example(
    i: usize,
    j: usize,
    k: usize,
    m: usize,
    noise_scale: f64,
    seed: u64,
) -> Result<ClusteringExample> {
    if i == 0 || i % 4 != 0 {
        return Err(CmtfError::InvalidArgument(
            "mode-0 dimension must be a positive multiple of 4".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = |row: usize| row / (i / 4);
    let labels: Vec<usize> = (0..i).map(group).collect();

    // column 0: +1 for the first split, -1 for the second; column 1 is the
    // reverse; both plus scaled noise
    let mut pattern = |split: fn(usize) -> bool| -> Matrix {
        Matrix::from_fn(i, 2, |row, col| {
            let sign = if split(group(row)) == (col == 0) {
                1.0
            } else {
                -1.0
            };
            sign + noise_scale * rng.sample::<f64, _>(StandardNormal)
        })
    };
    let mut a1 = pattern(|g| g < 2); // G1, G2 vs G3, G4
    let mut a2 = pattern(|g| g % 2 == 0); // G1, G3 vs G2, G4
    let mut b = randn_matrix(j, 2, &mut rng);
    let mut c = randn_matrix(k, 2, &mut rng);
    let mut v = randn_matrix(m, 2, &mut rng);
    for f in [&mut a1, &mut a2, &mut b, &mut c, &mut v] {
        unit_columns(f);
    }
    let tensor = kruskal_to_full(&[a1.clone(), b, c], None)?;
    let side = a2.dot_t(&v);
    Ok(ClusteringExample {
        labels,
        tensor,
        side,
        a1,
        a2,
    })
}

/// Relative residual of the dataset against the clean model output; equals
/// the generation eta by construction.
pub fn relative_noise(truth: &GroundTruth) -> f64 {
    let clean = truth.to_weighted_kruskal().reconstruct_tensor();
    let diff: f64 = clean
        .data()
        .iter()
        .zip(truth.dataset.tensor.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    diff.sqrt() / clean.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupled::objective;
    use crate::eval::normalize_model;
    use crate::tensor::matricize;

    fn all_scenarios() -> Vec<Scenario> {
        vec![
            Scenario::TensorMatrix,
            Scenario::TensorTensor,
            Scenario::TensorTwoMatrices,
        ]
    }

    #[test]
    fn noise_level_is_exact() {
        for scenario in all_scenarios() {
            for &eta in &[0.1, 0.25, 0.35] {
                for mode in [WeightMode::Unit, WeightMode::RandomInteger] {
                    let mut cfg = ScenarioConfig::desk(scenario, eta, mode, 42);
                    cfg.shape = vec![8, 7, 6];
                    cfg.side_dims = cfg.side_dims.iter().map(|_| 5).collect();
                    let truth = gen_scenario(&cfg).unwrap();
                    assert!(
                        (relative_noise(&truth) - eta).abs() < 1e-12,
                        "{:?} eta {}",
                        scenario,
                        eta
                    );
                    // sides carry the same exact noise level
                    let wk = truth.to_weighted_kruskal();
                    for (mm, (_, y)) in truth.dataset.sides.iter().enumerate() {
                        let clean = wk.reconstruct_side(mm);
                        let rel = y.sub(&clean).norm() / clean.norm();
                        assert!((rel - eta).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_noise_matches_model_exactly() {
        for scenario in all_scenarios() {
            let mut cfg = ScenarioConfig::desk(scenario, 0.0, WeightMode::RandomInteger, 7);
            cfg.shape = vec![6, 5, 4];
            cfg.side_dims = cfg.side_dims.iter().map(|_| 4).collect();
            let truth = gen_scenario(&cfg).unwrap();
            let f = objective(&truth.dataset, &truth.weighted_model()).unwrap();
            // the gram-based objective cancels large terms, so allow
            // rounding at the scale of the data norm
            let scale = truth.dataset.tensor.norm().powi(2);
            assert!(f.abs() < 1e-10 * scale, "{:?}: f = {}", scenario, f);
        }
    }

    #[test]
    fn unit_weights_normalize_to_one() {
        let cfg = ScenarioConfig::desk(Scenario::TensorMatrix, 0.0, WeightMode::Unit, 3);
        let truth = gen_scenario(&cfg).unwrap();
        let wk = normalize_model(&truth.weighted_model(), &truth.side_modes).unwrap();
        for r in 0..3 {
            assert!((wk.lambdas[r] - 1.0).abs() < 1e-10);
            assert!((wk.alphas[0][r] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn integer_weights_are_integers_at_least_one() {
        let cfg = ScenarioConfig::desk(Scenario::TensorTwoMatrices, 0.1, WeightMode::RandomInteger, 9);
        let truth = gen_scenario(&cfg).unwrap();
        for w in truth.lambdas.iter().chain(truth.alphas.iter().flatten()) {
            assert!(*w >= 1.0 && w.fract() == 0.0, "weight {}", w);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = ScenarioConfig::desk(Scenario::TensorTensor, 0.25, WeightMode::RandomInteger, 11);
        let a = gen_scenario(&cfg).unwrap();
        let b = gen_scenario(&cfg).unwrap();
        assert_eq!(a.dataset.tensor.data(), b.dataset.tensor.data());
        assert_eq!(a.dataset.sides[0].1.data(), b.dataset.sides[0].1.data());
        let mut cfg2 = cfg.clone();
        cfg2.seed = 12;
        let c = gen_scenario(&cfg2).unwrap();
        assert_ne!(a.dataset.tensor.data(), c.dataset.tensor.data());
    }

    #[test]
    fn tensor_tensor_side_is_an_unfolded_cp_tensor() {
        // the side matrix width is the product of the second tensor's free
        // dims, and with eta=0 it is exactly rank-R (A times Khatri-Rao^T)
        let mut cfg = ScenarioConfig::desk(Scenario::TensorTensor, 0.0, WeightMode::Unit, 13);
        cfg.shape = vec![5, 4, 3];
        cfg.side_dims = vec![4, 3];
        let truth = gen_scenario(&cfg).unwrap();
        let y = &truth.dataset.sides[0].1;
        assert_eq!(y.cols(), 12);
        // reshaping recovers a tensor whose mode-0 unfolding is y again
        let reshaped = DenseTensor::from_data(&[5, 4, 3], {
            let mut data = Vec::new();
            for c in 0..y.cols() {
                data.extend_from_slice(y.col(c));
            }
            data
        })
        .unwrap();
        let unfolded = matricize(&reshaped, 0).unwrap();
        assert_eq!(unfolded.data(), y.data());
    }

    #[test]
    fn mask_counts_and_determinism() {
        let w = gen_mask(&[10, 10, 10], 0.8, 5).unwrap();
        let zeros = w.data().iter().filter(|&&v| v == 0.0).count();
        assert_eq!(zeros, 800);
        let w2 = gen_mask(&[10, 10, 10], 0.8, 5).unwrap();
        assert_eq!(w.data(), w2.data());
        let all_ones = gen_mask(&[4, 4], 0.0, 1).unwrap();
        assert!(all_ones.data().iter().all(|&v| v == 1.0));
        assert!(gen_mask(&[4, 4], 1.0, 1).is_err());
        assert!(gen_mask(&[4, 4], -0.1, 1).is_err());
    }

    #[test]
    fn clustering_patterns_and_labels() {
        let ex = gen_clustering_example(8, 5, 4, 6, 0.0, 2).unwrap();
        assert_eq!(ex.labels, vec![0, 0, 1, 1, 2, 2, 3, 3]);
        // noiseless columns are exact +-1 patterns up to normalization
        for row in 0..8 {
            let g = ex.labels[row];
            let s1 = if g < 2 { 1.0 } else { -1.0 };
            let s2 = if g % 2 == 0 { 1.0 } else { -1.0 };
            assert!(ex.a1[(row, 0)].signum() == s1 && ex.a1[(row, 1)].signum() == -s1);
            assert!(ex.a2[(row, 0)].signum() == s2 && ex.a2[(row, 1)].signum() == -s2);
            assert!((ex.a1[(row, 0)].abs() - ex.a1[(0, 0)].abs()).abs() < 1e-12);
        }
        assert!(gen_clustering_example(10, 5, 4, 6, 0.0, 2).is_err());
    }

    #[test]
    fn clustering_data_shapes() {
        let ex = gen_clustering_example(40, 30, 20, 10, 0.1, 3).unwrap();
        assert_eq!(ex.tensor.shape(), &[40, 30, 20]);
        assert_eq!(ex.side.rows(), 40);
        assert_eq!(ex.side.cols(), 10);
    }
}
