use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Resource bounds shared by every search in the crate.
///
/// Exceeding a bound never truncates silently: the affected procedure reports
/// an inconclusive status instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Largest number of words an equivalence-class exploration may visit.
    pub max_class_size: usize,
    /// Largest number of cells in a single grid under construction.
    pub max_cells: usize,
    /// Largest number of grids (partial or complete) kept by one enumeration step.
    pub max_grids: usize,
    /// Largest word weight the congruence oracle may produce, unless an input is heavier.
    pub max_word_weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("budget field `{0}` must be positive")]
pub struct BudgetError(pub &'static str);

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_class_size: 100_000,
            max_cells: 10_000,
            max_grids: 10_000,
            max_word_weight: 12,
        }
    }
}

impl Budget {
    pub fn new(
        max_class_size: usize,
        max_cells: usize,
        max_grids: usize,
        max_word_weight: u64,
    ) -> Result<Self, BudgetError> {
        let budget = Budget {
            max_class_size,
            max_cells,
            max_grids,
            max_word_weight,
        };
        budget.check()?;
        Ok(budget)
    }

    pub fn check(&self) -> Result<(), BudgetError> {
        if self.max_class_size == 0 {
            return Err(BudgetError("max_class_size"));
        }
        if self.max_cells == 0 {
            return Err(BudgetError("max_cells"));
        }
        if self.max_grids == 0 {
            return Err(BudgetError("max_grids"));
        }
        if self.max_word_weight == 0 {
            return Err(BudgetError("max_word_weight"));
        }
        Ok(())
    }
}
