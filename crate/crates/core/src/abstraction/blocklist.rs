use std::collections::HashSet;

use crate::bmc::LassoPath;

/// Rejected lassos, keyed by cell sequence and loop index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Blocklist {
    set: HashSet<(Vec<usize>, usize)>,
}

impl Blocklist {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` if the lasso was already blocked.
    pub fn block(&mut self, lasso: &LassoPath) -> bool {
        self.set.insert((lasso.cells.clone(), lasso.loop_index))
    }

    pub fn contains(&self, cells: &[usize], loop_index: usize) -> bool {
        self.set.contains(&(cells.to_vec(), loop_index))
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

pub fn block_lasso(mut blocklist: Blocklist, lasso: &LassoPath) -> Blocklist {
    blocklist.block(lasso);
    blocklist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_index_is_part_of_identity() {
        let l = LassoPath {
            cells: vec![0, 1, 1],
            loop_index: 1,
        };
        let bl = block_lasso(Blocklist::new(), &l);
        assert!(bl.contains(&[0, 1, 1], 1));
        assert!(!bl.contains(&[0, 1, 1], 2));
        let bl = block_lasso(bl, &l);
        assert_eq!(bl.len(), 1);
    }
}
