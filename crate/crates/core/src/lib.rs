//! Cutoff-rule capital reallocation under a liquidity shock.
//!
//! * [`allocation`]: the static liquidate / coerce / preserve problem and its
//!   closed-form cutoffs, thresholds, and regimes.
//! * [`oracle`]: an exhaustive grid-search optimizer used as ground truth.
//! * [`growth`]: the static solver embedded in a distance-to-frontier growth
//!   recursion, with coercion-only and liquidation-only counterfactuals.
//! * [`scenario`]: JSON scenario files and the CSV/JSON records the CLI emits.

pub mod allocation;
pub mod growth;
pub mod oracle;
pub mod scenario;

pub use allocation::{
    AllocationError, AllocationSolution, CutoffPolicy, FormulaMode, LiquidityShock, RegimeLabel,
    StrategyPayoffs,
};
pub use growth::{GrowthError, GrowthParams, PolicyMode};
pub use oracle::{ConstraintMode, OracleConfig, OracleError, OracleResult, PolicyClass};
