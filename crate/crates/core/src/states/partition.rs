use crate::{Error, Result};

/// The three roles a subsystem can play in the entropy ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    /// The observer (memory, lab, detectors).
    A,
    /// The observed system.
    C,
    /// A reservoir purifying `AC`. May be empty.
    R,
}

/// Assignment of every subsystem index to exactly one of `A`, `C`, `R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<Block>,
}

impl Partition {
    /// `assignment[k]` is the block owning subsystem `k`. `A` and `C` must be
    /// non-empty; `R` may be empty.
    pub fn new(assignment: Vec<Block>) -> Result<Self> {
        for block in [Block::A, Block::C] {
            if !assignment.contains(&block) {
                return Err(Error::InvalidPartition(format!("block {block:?} is empty")));
            }
        }
        Ok(Self { assignment })
    }

    /// Builds a partition of `n` subsystems from explicit index lists.
    pub fn from_blocks(n: usize, a: &[usize], c: &[usize], r: &[usize]) -> Result<Self> {
        let mut assignment: Vec<Option<Block>> = vec![None; n];
        for (block, indices) in [(Block::A, a), (Block::C, c), (Block::R, r)] {
            for &k in indices {
                let slot = assignment.get_mut(k).ok_or_else(|| {
                    Error::InvalidPartition(format!("subsystem {k} out of range for {n} subsystems"))
                })?;
                if slot.is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "subsystem {k} assigned more than once"
                    )));
                }
                *slot = Some(block);
            }
        }
        let assignment = assignment
            .into_iter()
            .enumerate()
            .map(|(k, b)| b.ok_or_else(|| Error::InvalidPartition(format!("subsystem {k} unassigned"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(assignment)
    }

    /// `A` = first `n_a` subsystems, `C` = the next `n_c`, `R` = the rest of `n`.
    pub fn contiguous(n_a: usize, n_c: usize, n: usize) -> Result<Self> {
        if n_a + n_c > n {
            return Err(Error::InvalidPartition(format!(
                "{n_a} + {n_c} subsystems requested from {n}"
            )));
        }
        let assignment = (0..n)
            .map(|k| {
                if k < n_a {
                    Block::A
                } else if k < n_a + n_c {
                    Block::C
                } else {
                    Block::R
                }
            })
            .collect();
        Self::new(assignment)
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[Block] {
        &self.assignment
    }

    /// Subsystem indices of `block` in ascending order.
    pub fn indices(&self, block: Block) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == block)
            .map(|(k, _)| k)
            .collect()
    }

    /// Product of the dimensions of `block` (1 for an empty block).
    pub fn block_dim(&self, block: Block, dims: &[usize]) -> usize {
        self.indices(block).iter().map(|&k| dims[k]).product()
    }

    pub fn check_covers(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.assignment.len() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} subsystems, state has {}",
                self.assignment.len(),
                dims.len()
            )));
        }
        Ok(())
    }

    /// The same partition with `extra` trailing subsystems appended to `block`.
    pub fn extended(&self, block: Block, extra: usize) -> Self {
        let mut assignment = self.assignment.clone();
        assignment.extend(std::iter::repeat_n(block, extra));
        Self { assignment }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_and_dims() {
        let p = Partition::from_blocks(3, &[2], &[0], &[1]).unwrap();
        assert_eq!(p.indices(Block::A), vec![2]);
        assert_eq!(p.indices(Block::C), vec![0]);
        assert_eq!(p.block_dim(Block::R, &[2, 3, 4]), 3);
    }

    #[test]
    fn empty_reservoir_has_unit_dimension() {
        let p = Partition::contiguous(1, 1, 2).unwrap();
        assert!(p.indices(Block::R).is_empty());
        assert_eq!(p.block_dim(Block::R, &[2, 2]), 1);
    }

    #[test]
    fn rejects_double_assignment_and_gaps() {
        assert!(Partition::from_blocks(2, &[0], &[0], &[]).is_err());
        assert!(Partition::from_blocks(3, &[0], &[1], &[]).is_err());
        assert!(Partition::from_blocks(2, &[0], &[5], &[]).is_err());
    }

    #[test]
    fn observer_and_system_must_be_present() {
        assert!(Partition::new(vec![Block::A, Block::R]).is_err());
        assert!(Partition::new(vec![Block::C]).is_err());
    }
}
