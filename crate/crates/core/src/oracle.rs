//! Exhaustive grid-search oracle for the static allocation problem.
//!
//! Every point of `{0, 1/(n−1), …, 1}²` with `λs ≤ λl` inside the requested
//! policy class is evaluated; the admissible point with the largest
//! final-stage output wins. Ties go to the smaller `λs`, then the smaller `λl`.

use crate::allocation::{
    liquidity_raised, max_liquidity, stage2_output, AllocationError, CutoffPolicy, LiquidityShock,
    StrategyPayoffs, BOUNDARY_RTOL,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Grid used by the test suite.
pub const TEST_GRID: usize = 2001;
/// Grid used by interactive CLI runs.
pub const CLI_GRID: usize = 501;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error("grid_n must be at least 2, got {0}")]
    GridTooSmall(usize),
    #[error("slack must be finite and positive, got {0}")]
    InvalidSlack(f64),
    #[error("no admissible grid point for delta_l = {delta_l} (maximum raisable liquidity {max_liquidity})")]
    EmptyFeasibleSet { delta_l: f64, max_liquidity: f64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// `|liquidity − ΔL| ≤ slack·ΔL_max`.
    #[default]
    Equality,
    /// `liquidity ≥ ΔL − slack·ΔL_max`.
    AtLeast,
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::Equality => "equality",
            ConstraintMode::AtLeast => "at_least",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyClass {
    #[default]
    Unrestricted,
    /// `λs = 0`.
    CoercionOnly,
    /// `λs = λl`.
    LiquidationOnly,
}

impl PolicyClass {
    pub fn contains(self, c: &CutoffPolicy) -> bool {
        match self {
            PolicyClass::Unrestricted => true,
            PolicyClass::CoercionOnly => c.lambda_s == 0.0,
            PolicyClass::LiquidationOnly => c.lambda_s == c.lambda_l,
        }
    }
}

impl fmt::Display for PolicyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyClass::Unrestricted => "unrestricted",
            PolicyClass::CoercionOnly => "coercion_only",
            PolicyClass::LiquidationOnly => "liquidation_only",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub grid_n: usize,
    pub constraint: ConstraintMode,
    pub class: PolicyClass,
    /// Feasibility band as a fraction of `ΔL_max`. `None` uses
    /// [`default_slack`].
    #[serde(default)]
    pub slack: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::new(
            TEST_GRID,
            ConstraintMode::Equality,
            PolicyClass::Unrestricted,
        )
    }
}

impl OracleConfig {
    pub fn new(grid_n: usize, constraint: ConstraintMode, class: PolicyClass) -> Self {
        Self {
            grid_n,
            constraint,
            class,
            slack: None,
        }
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = Some(slack);
        self
    }

    fn check(&self) -> Result<(), OracleError> {
        if self.grid_n < 2 {
            return Err(OracleError::GridTooSmall(self.grid_n));
        }
        if let Some(s) = self.slack {
            if !(s.is_finite() && s > 0.0) {
                return Err(OracleError::InvalidSlack(s));
            }
        }
        Ok(())
    }

    /// Effective slack fraction for `p`.
    pub fn slack_for(&self, p: &StrategyPayoffs) -> f64 {
        self.slack.unwrap_or_else(|| default_slack(p, self.grid_n))
    }
}

/// 1.5 grid cells' worth of liquidity variation, as a fraction of `ΔL_max`.
///
/// Across one cell of side `h` the liquidity identity moves by at most
/// `x1·(|θ1s − θ1l| + |2θ1l − θ1s|)·h`.
pub fn default_slack(p: &StrategyPayoffs, grid_n: usize) -> f64 {
    let h = 1.0 / (grid_n.max(2) - 1) as f64;
    let per_cell = p.x1 * (p.coercion_gain().abs() + p.liquidation_coefficient().abs()) * h;
    1.5 * per_cell / max_liquidity(p).value
}

/// Upper bound on the objective's variation across one grid cell.
pub fn epsilon_grid(p: &StrategyPayoffs, grid_n: usize) -> f64 {
    p.x2 * (p.theta2_s + p.theta2_l) / (grid_n.max(2) - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_policy: CutoffPolicy,
    pub objective: f64,
    pub feasible_count: u64,
    pub achieved_liquidity: f64,
    pub constraint: ConstraintMode,
    pub class: PolicyClass,
    pub grid_n: usize,
    pub slack: f64,
}

#[derive(Clone, Copy)]
struct Band {
    lower: f64,
    upper: f64,
}

impl Band {
    fn new(p: &StrategyPayoffs, s: LiquidityShock, cfg: &OracleConfig) -> Self {
        let tol = cfg.slack_for(p) * max_liquidity(p).value;
        let dl = s.value();
        match cfg.constraint {
            ConstraintMode::Equality => Band {
                lower: dl - tol,
                upper: dl + tol,
            },
            ConstraintMode::AtLeast => Band {
                lower: dl - tol,
                upper: f64::INFINITY,
            },
        }
    }

    #[inline]
    fn admits(&self, liquidity: f64) -> bool {
        liquidity >= self.lower && liquidity <= self.upper
    }
}

/// Whether `c` is inside the policy class and meets the constraint band.
pub fn is_admissible(
    p: &StrategyPayoffs,
    s: LiquidityShock,
    cfg: &OracleConfig,
    c: &CutoffPolicy,
) -> bool {
    cfg.class.contains(c) && Band::new(p, s, cfg).admits(liquidity_raised(p, c))
}

#[derive(Clone, Copy)]
struct Best {
    i: usize,
    j: usize,
    objective: f64,
    liquidity: f64,
    count: u64,
}

impl Best {
    /// Larger objective wins; ties resolve to the lexicographically smaller (i, j).
    fn merge(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(a), Some(b)) => {
                let count = a.count + b.count;
                let pick_b = b.objective > a.objective
                    || (b.objective == a.objective && (b.i, b.j) < (a.i, a.j));
                let mut w = if pick_b { b } else { a };
                w.count = count;
                Some(w)
            }
        }
    }
}

fn scan_row(
    p: &StrategyPayoffs,
    grid: &[f64],
    band: Band,
    class: PolicyClass,
    i: usize,
) -> Option<Best> {
    let js = match class {
        PolicyClass::Unrestricted => i..grid.len(),
        PolicyClass::CoercionOnly if i == 0 => 0..grid.len(),
        PolicyClass::CoercionOnly => return None,
        PolicyClass::LiquidationOnly => i..i + 1,
    };
    let mut best: Option<Best> = None;
    let mut count = 0u64;
    for j in js {
        let c = CutoffPolicy {
            lambda_s: grid[i],
            lambda_l: grid[j],
        };
        let liquidity = liquidity_raised(p, &c);
        if !band.admits(liquidity) {
            continue;
        }
        count += 1;
        let objective = stage2_output(p, &c);
        if best.is_none_or(|b| objective > b.objective) {
            best = Some(Best {
                i,
                j,
                objective,
                liquidity,
                count: 0,
            });
        }
    }
    best.map(|mut b| {
        b.count = count;
        b
    })
}

/// Brute-force maximizer of final-stage output subject to the liquidity band.
pub fn oracle_solve(
    p: &StrategyPayoffs,
    s: LiquidityShock,
    cfg: &OracleConfig,
) -> Result<OracleResult, OracleError> {
    p.require_solvable()?;
    cfg.check()?;
    let max = max_liquidity(p).value;
    let empty = OracleError::EmptyFeasibleSet {
        delta_l: s.value(),
        max_liquidity: max,
    };
    if s.value() > max * (1.0 + BOUNDARY_RTOL) {
        return Err(empty);
    }

    let n = cfg.grid_n;
    let step = 1.0 / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|k| if k + 1 == n { 1.0 } else { k as f64 * step })
        .collect();
    let band = Band::new(p, s, cfg);

    let best = (0..n)
        .into_par_iter()
        .map(|i| scan_row(p, &grid, band, cfg.class, i))
        .reduce(|| None, Best::merge)
        .ok_or(empty)?;

    Ok(OracleResult {
        best_policy: CutoffPolicy {
            lambda_s: grid[best.i],
            lambda_l: grid[best.j],
        },
        objective: best.objective,
        feasible_count: best.count,
        achieved_liquidity: best.liquidity,
        constraint: cfg.constraint,
        class: cfg.class,
        grid_n: n,
        slack: cfg.slack_for(p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub candidate: CutoffPolicy,
    pub candidate_objective: f64,
    pub candidate_liquidity: f64,
    pub candidate_admissible: bool,
    /// `None` when the oracle's feasible set is empty.
    pub oracle: Option<OracleResult>,
    /// Oracle objective minus candidate objective.
    pub gap: Option<f64>,
    pub epsilon_grid: f64,
    pub constraint: ConstraintMode,
    pub grid_n: usize,
}

impl ComparisonReport {
    /// The oracle beats the candidate by more than one grid cell's worth.
    pub fn oracle_strictly_better(&self) -> bool {
        self.gap.is_some_and(|g| g > self.epsilon_grid)
    }
}

pub fn oracle_compare(
    p: &StrategyPayoffs,
    s: LiquidityShock,
    cfg: &OracleConfig,
    candidate: CutoffPolicy,
) -> Result<ComparisonReport, OracleError> {
    let candidate_objective = stage2_output(p, &candidate);
    let oracle = match oracle_solve(p, s, cfg) {
        Ok(r) => Some(r),
        Err(OracleError::EmptyFeasibleSet { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ComparisonReport {
        candidate,
        candidate_objective,
        candidate_liquidity: liquidity_raised(p, &candidate),
        candidate_admissible: is_admissible(p, s, cfg, &candidate),
        gap: oracle.map(|o| o.objective - candidate_objective),
        oracle,
        epsilon_grid: epsilon_grid(p, cfg.grid_n),
        constraint: cfg.constraint,
        grid_n: cfg.grid_n,
    })
}
