//! Entropy functionals. All logarithms are base 2, so every value is in bits.

use crate::linalg;
use crate::states::{Block, DensityMatrix, Partition};
use crate::tol::{EPS_RANK, TOL_ENT, TOL_PROB};
use crate::{Error, Result};

/// An information quantity in bits.
pub type Bits = f64;

/// Maps values within `TOL_ENT` below zero to zero.
fn clamp_bits(value: f64) -> Bits {
    if value < 0.0 && value >= -TOL_ENT {
        0.0
    } else {
        value
    }
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(probabilities: &[f64]) -> Bits {
    let h: f64 = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    clamp_bits(h)
}

/// `S(rho) = -Tr[rho log2 rho]`, from the clamped spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Bits {
    shannon_entropy(rho.spectrum())
}

/// `S(rho || sigma) = Tr[rho log2 rho - rho log2 sigma]`.
///
/// Returns `f64::INFINITY` when `rho` puts weight above `EPS_RANK` outside
/// the support of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Bits> {
    rho.check_same_shape(sigma)?;
    let (rho_vals, rho_vecs) = linalg::hermitian_eigen(rho.matrix());
    let (sigma_vals, sigma_vecs) = linalg::hermitian_eigen(sigma.matrix());
    let rho_vals = clamp_normalized(&rho_vals);
    let sigma_vals = clamp_normalized(&sigma_vals);
    // |<r_i|s_j>|^2
    let overlaps = rho_vecs.adjoint() * &sigma_vecs;

    let mut outside_support = 0.0;
    let mut cross = 0.0;
    for (i, &p) in rho_vals.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        for (j, &q) in sigma_vals.iter().enumerate() {
            let w = p * overlaps[(i, j)].norm_sqr();
            if q > EPS_RANK {
                cross += w * q.log2();
            } else {
                outside_support += w;
            }
        }
    }
    if outside_support > EPS_RANK {
        return Ok(f64::INFINITY);
    }
    let neg_entropy: f64 = rho_vals
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum();
    Ok(clamp_bits(neg_entropy - cross))
}

fn clamp_normalized(values: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    clamped.iter().map(|v| v / total).collect()
}

fn block_reduction(rho: &DensityMatrix, indices: &[usize]) -> Result<DensityMatrix> {
    if indices.len() == rho.dims().len() {
        Ok(rho.clone())
    } else {
        rho.reduce(indices)
    }
}

/// `S(A:C) = S(rho_A) + S(rho_C) - S(rho_AC)`. Subsystems assigned to `R`
/// are traced out first.
pub fn mutual_information(rho: &DensityMatrix, partition: &Partition) -> Result<Bits> {
    partition.check_covers(rho.dims())?;
    let a = partition.indices(Block::A);
    let c = partition.indices(Block::C);
    let mut ac: Vec<usize> = a.iter().chain(&c).copied().collect();
    ac.sort_unstable();
    let s_a = von_neumann_entropy(&rho.reduce(&a)?);
    let s_c = von_neumann_entropy(&rho.reduce(&c)?);
    let s_ac = von_neumann_entropy(&block_reduction(rho, &ac)?);
    Ok(clamp_bits(s_a + s_c - s_ac))
}

/// A joint probability table `p[i][j]` over two outcome alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    rows: usize,
    cols: usize,
    p: Vec<f64>,
}

impl JointDistribution {
    /// Row-major probabilities. Entries within `TOL_PROB` below zero are
    /// clamped to zero; the total must be one within `TOL_PROB`.
    pub fn new(rows: usize, cols: usize, mut p: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || p.len() != rows * cols {
            return Err(Error::InvalidDistribution(format!(
                "{} entries for a {rows}x{cols} table",
                p.len()
            )));
        }
        for x in p.iter_mut() {
            if !x.is_finite() || *x < -TOL_PROB {
                return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
            }
            *x = x.max(0.0);
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > TOL_PROB {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { rows, cols, p })
    }

    /// Independent outcomes `p_ij = q_i r_j`.
    pub fn product(q: &[f64], r: &[f64]) -> Result<Self> {
        let p = q.iter().flat_map(|&a| r.iter().map(move |&b| a * b)).collect();
        Self::new(q.len(), r.len(), p)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.cols + j]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    /// `q_i = sum_j p_ij`.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.p.chunks(self.cols).map(|row| row.iter().sum()).collect()
    }

    /// `r_j = sum_i p_ij`.
    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn joint_entropy(&self) -> Bits {
        shannon_entropy(&self.p)
    }
}

/// `I(A:C) = sum_ij p_ij log2(p_ij / (q_i r_j))`.
pub fn classical_mutual_information(joint: &JointDistribution) -> Bits {
    let q = joint.row_marginal();
    let r = joint.col_marginal();
    let mut total = 0.0;
    for i in 0..joint.rows {
        for j in 0..joint.cols {
            let p = joint.get(i, j);
            if p > 0.0 {
                total += p * (p / (q[i] * r[j])).log2();
            }
        }
    }
    clamp_bits(total)
}

/// `H(joint) - max(H(q), H(r))`. Never negative for a classical table: a
/// joint distribution is at least as uncertain as either of its marginals.
pub fn joint_entropy_margin(joint: &JointDistribution) -> Bits {
    let hq = shannon_entropy(&joint.row_marginal());
    let hr = shannon_entropy(&joint.col_marginal());
    joint.joint_entropy() - hq.max(hr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{gates, random_density, random_density_with, seeded_rng, tensor, PureState};
    use rand::Rng;

    fn bell() -> DensityMatrix {
        let cnot = gates::cnot();
        let psi = PureState::product(&[gates::plus_state(), PureState::basis(vec![2], 0).unwrap()])
            .unwrap()
            .evolve(&cnot)
            .unwrap();
        psi.to_density()
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        assert!(von_neumann_entropy(&gates::plus_state().to_density()).abs() < 1e-12);
        assert!(von_neumann_entropy(&bell()).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_is_one_bit() {
        let half = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!((von_neumann_entropy(&half) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn three_level_spectrum() {
        let rho = DensityMatrix::diagonal(vec![3], &[0.5, 0.25, 0.25]).unwrap();
        let oracle = -(0.5f64 * 0.5f64.log2() + 2.0 * 0.25 * 0.25f64.log2());
        assert_eq!(oracle, 1.5);
        assert!((von_neumann_entropy(&rho) - oracle).abs() < 1e-14);
    }

    #[test]
    fn entropy_range() {
        for seed in 0..20 {
            let dim = 2 + (seed as usize % 5);
            let rho = random_density(dim, dim, seed).unwrap();
            let s = von_neumann_entropy(&rho);
            assert!(s >= 0.0 && s <= (dim as f64).log2() + TOL_ENT);
        }
    }

    #[test]
    fn relative_entropy_of_identical_states() {
        let rho = random_density(3, 3, 4).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_disjoint_supports_is_infinite() {
        let zero = DensityMatrix::diagonal(vec![2], &[1.0, 0.0]).unwrap();
        let one = DensityMatrix::diagonal(vec![2], &[0.0, 1.0]).unwrap();
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
        // the reverse direction is finite when the support is contained
        let half = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!(relative_entropy(&half, &zero).unwrap().is_infinite());
        assert!(relative_entropy(&zero, &half).unwrap().is_finite());
    }

    #[test]
    fn relative_entropy_commuting_case() {
        // Tr[rho log rho - rho log sigma] for diagonal inputs, evaluated directly
        let commuting = |p: &[f64], q: &[f64]| -> f64 {
            p.iter()
                .zip(q)
                .filter(|(&a, _)| a > 0.0)
                .map(|(&a, &b)| a * a.log2() - a * b.log2())
                .sum()
        };
        let zero = DensityMatrix::diagonal(vec![2], &[1.0, 0.0]).unwrap();
        let half = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let oracle = commuting(&[1.0, 0.0], &[0.5, 0.5]);
        assert_eq!(oracle, 1.0);
        assert!((relative_entropy(&zero, &half).unwrap() - oracle).abs() < 1e-14);

        let p = [0.7, 0.2, 0.1];
        let q = [0.3, 0.3, 0.4];
        let rho = DensityMatrix::diagonal(vec![3], &p).unwrap();
        let sigma = DensityMatrix::diagonal(vec![3], &q).unwrap();
        assert!((relative_entropy(&rho, &sigma).unwrap() - commuting(&p, &q)).abs() < 1e-13);
    }

    #[test]
    fn relative_entropy_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        let b = DensityMatrix::maximally_mixed(vec![3]).unwrap();
        assert!(matches!(
            relative_entropy(&a, &b).unwrap_err(),
            Error::DimensionMismatch(_)
        ));
    }

    #[test]
    fn klein_inequality() {
        let mut rng = seeded_rng(31);
        for _ in 0..50 {
            let dim = rng.random_range(2..=4);
            let rho = random_density_with(vec![dim], dim, &mut rng).unwrap();
            let sigma = random_density_with(vec![dim], dim, &mut rng).unwrap();
            let d = relative_entropy(&rho, &sigma).unwrap();
            assert!(d >= 0.0);
            assert!(d > 1e-8 || rho.max_abs_diff(&sigma).unwrap() <= 1e-8);
        }
    }

    #[test]
    fn mutual_information_of_product_is_zero() {
        let rho = tensor(&random_density(2, 2, 1).unwrap(), &random_density(3, 2, 2).unwrap()).unwrap();
        let p = Partition::contiguous(1, 1, 2).unwrap();
        assert!(mutual_information(&rho, &p).unwrap().abs() < 1e-10);
    }

    #[test]
    fn measurement_record_carries_two_bits() {
        let p = Partition::contiguous(1, 1, 2).unwrap();
        assert!((mutual_information(&bell(), &p).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_equals_relative_entropy_to_product() {
        let p = Partition::contiguous(1, 1, 2).unwrap();
        let mut rng = seeded_rng(8);
        for _ in 0..20 {
            let rank = rng.random_range(1..=4);
            let rho = random_density_with(vec![2, 2], rank, &mut rng).unwrap();
            let product = tensor(&rho.reduce(&[0]).unwrap(), &rho.reduce(&[1]).unwrap()).unwrap();
            let via_relative = relative_entropy(&rho, &product).unwrap();
            let direct = mutual_information(&rho, &p).unwrap();
            assert!((direct - via_relative).abs() < 1e-8, "{direct} vs {via_relative}");
        }
    }

    #[test]
    fn mutual_information_traces_out_reservoir() {
        let mut rng = seeded_rng(3);
        let rho = random_density_with(vec![2, 2, 2], 3, &mut rng).unwrap();
        let p = Partition::from_blocks(3, &[2], &[0], &[1]).unwrap();
        let reduced = rho.reduce(&[0, 2]).unwrap();
        let q = Partition::from_blocks(2, &[1], &[0], &[]).unwrap();
        let a = mutual_information(&rho, &p).unwrap();
        let b = mutual_information(&reduced, &q).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_rejects_mismatched_partition() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        let p = Partition::contiguous(1, 1, 3).unwrap();
        assert!(matches!(
            mutual_information(&rho, &p).unwrap_err(),
            Error::InvalidPartition(_)
        ));
    }

    #[test]
    fn classical_mutual_information_cases() {
        let independent = JointDistribution::product(&[0.3, 0.7], &[0.2, 0.5, 0.3]).unwrap();
        assert!(classical_mutual_information(&independent).abs() < 1e-14);
        let shared_bit = JointDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((classical_mutual_information(&shared_bit) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_mutual_information_shannon_decomposition() {
        // H(q) + H(r) - H(p) with an independent Shannon evaluation
        let h = |xs: &[f64]| -> f64 { xs.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum::<f64>() / 2f64.ln() };
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let raw: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let joint = JointDistribution::new(3, 4, p.clone()).unwrap();
            let q: Vec<f64> = p.chunks(4).map(|r| r.iter().sum()).collect();
            let r: Vec<f64> = (0..4).map(|j| (0..3).map(|i| p[i * 4 + j]).sum()).collect();
            let oracle = h(&q) + h(&r) - h(&p);
            assert!((classical_mutual_information(&joint) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_distribution_validation() {
        assert!(JointDistribution::new(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(JointDistribution::new(2, 2, vec![0.5, 0.5]).is_err());
        assert!(JointDistribution::new(1, 2, vec![1.1, -0.1]).is_err());
        let clamped = JointDistribution::new(1, 2, vec![1.0 + 1e-11, -1e-11]).unwrap();
        assert_eq!(clamped.get(0, 1), 0.0);
    }

    #[test]
    fn classical_joint_dominates_but_bell_state_does_not() {
        let table = JointDistribution::new(2, 2, vec![0.4, 0.1, 0.2, 0.3]).unwrap();
        assert!(joint_entropy_margin(&table) >= 0.0);
        let rho = bell();
        assert!(von_neumann_entropy(&rho) < 1e-12);
        assert!((von_neumann_entropy(&rho.reduce(&[0]).unwrap()) - 1.0).abs() < 1e-12);
    }
}
