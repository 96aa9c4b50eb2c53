//! Static two-stage allocation problem.
//!
//! A conglomerate funds a unit mass of firms indexed by innovation type
//! `λ ∈ [0, 1]`. After a liquidity shock `ΔL` it picks two cutoffs
//! `λs ≤ λl`: firms below `λs` are liquidated, firms in `[λs, λl)` are
//! coerced onto the short-term strategy, and the rest are preserved on the
//! long-term strategy. Liquidity raised and final-stage output are both
//! quadratic in the cutoffs:
//!
//! ```text
//! liquidity = ½·x1·[(θ1s − θ1l)·λl² + (2θ1l − θ1s)·λs²]
//! output    = ½·x2·[θ2s·(λl² − λs²) + θ2l·(1 − λl²)]
//! ```
//!
//! The closed-form solvers treat the liquidity constraint as an equality.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Relative tolerance used when comparing a shock against a regime boundary.
pub const BOUNDARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("payoff parameters must be finite and strictly positive (offending field: {0})")]
    NonPositive(&'static str),
    #[error("payoffs violate assumption ({assumption}): {detail}")]
    AssumptionViolated {
        assumption: &'static str,
        detail: String,
    },
    #[error("degenerate payoffs: {0}")]
    Degenerate(&'static str),
    #[error("liquidity shock must be finite and non-negative, got {0}")]
    InvalidShock(f64),
    #[error("invalid cutoff policy (lambda_s = {lambda_s}, lambda_l = {lambda_l}): need 0 <= lambda_s <= lambda_l <= 1")]
    InvalidPolicy { lambda_s: f64, lambda_l: f64 },
    #[error("invalid firm index {0}: must lie in [0, 1]")]
    InvalidFirmIndex(f64),
    #[error("shock {delta_l} exceeds the interior threshold {threshold}")]
    Infeasible { delta_l: f64, threshold: f64 },
    #[error("shock {delta_l} outside the corner range [{lower}, {upper}]")]
    OutOfRange {
        delta_l: f64,
        lower: f64,
        upper: f64,
    },
    #[error("corner cutoff has no real solution (quotient under the root is {0})")]
    NoRealSolution(f64),
}

pub type Result<T> = std::result::Result<T, AllocationError>;

/// Which family of formulas to use where the derivations disagree.
///
/// `Consistent` derives every boundary and corner value from the liquidity
/// identity; `PaperLiteral` reproduces the published closed forms verbatim.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaMode {
    #[default]
    Consistent,
    PaperLiteral,
}

impl fmt::Display for FormulaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaMode::Consistent => "consistent",
            FormulaMode::PaperLiteral => "paper_literal",
        })
    }
}

/// Stage-specific productivities and scale factors for one allocation instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyPayoffs {
    pub theta1_s: f64,
    pub theta1_l: f64,
    pub theta2_s: f64,
    pub theta2_l: f64,
    pub x1: f64,
    pub x2: f64,
}

impl StrategyPayoffs {
    pub const fn new(
        theta1_s: f64,
        theta1_l: f64,
        theta2_s: f64,
        theta2_l: f64,
        x1: f64,
        x2: f64,
    ) -> Self {
        Self {
            theta1_s,
            theta1_l,
            theta2_s,
            theta2_l,
            x1,
            x2,
        }
    }

    /// First-stage liquidity gained per unit `λ²/2·x1` by coercing a firm.
    #[inline]
    pub fn coercion_gain(&self) -> f64 {
        self.theta1_s - self.theta1_l
    }

    /// Coefficient on `λs²` in the liquidity identity, `2θ1l − θ1s`.
    #[inline]
    pub fn liquidation_coefficient(&self) -> f64 {
        2.0 * self.theta1_l - self.theta1_s
    }

    pub fn validate(&self) -> ValidationReport {
        validate_payoffs(self)
    }

    /// Errors unless the payoffs are positive and satisfy (i) and (ii).
    pub fn require_solvable(&self) -> Result<()> {
        let fields = [
            ("theta1_s", self.theta1_s),
            ("theta1_l", self.theta1_l),
            ("theta2_s", self.theta2_s),
            ("theta2_l", self.theta2_l),
            ("x1", self.x1),
            ("x2", self.x2),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(AllocationError::NonPositive(name));
            }
        }
        if self.theta1_s < self.theta1_l {
            return Err(AllocationError::AssumptionViolated {
                assumption: "i",
                detail: format!(
                    "theta1_s = {} < theta1_l = {}",
                    self.theta1_s, self.theta1_l
                ),
            });
        }
        if self.theta2_l <= self.theta2_s {
            return Err(AllocationError::AssumptionViolated {
                assumption: "ii",
                detail: format!(
                    "theta2_l = {} <= theta2_s = {}",
                    self.theta2_l, self.theta2_s
                ),
            });
        }
        Ok(())
    }
}

/// Outcome of a single assumption check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Pass,
    /// Holds only with equality; allowed, but interior solves are refused.
    Boundary,
    Fail,
}

impl Check {
    pub fn holds(self) -> bool {
        !matches!(self, Check::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub positive: bool,
    /// (i) θ1s ≥ θ1l.
    pub first_stage_order: Check,
    /// (ii) θ2l > θ2s.
    pub second_stage_order: Check,
    /// (iii) long-term lifetime value exceeds short-term. Advisory only.
    pub lifetime_value: Check,
}

impl ValidationReport {
    /// Positivity, (i) and (ii) hold; the solvers accept these payoffs.
    pub fn solvable(&self) -> bool {
        self.positive && self.first_stage_order.holds() && self.second_stage_order == Check::Pass
    }

    /// As [`solvable`](Self::solvable) with (i) strict, so Γ is defined.
    pub fn interior_solvable(&self) -> bool {
        self.solvable() && self.first_stage_order == Check::Pass
    }

    /// (iii) failed; reported but never blocks a solve.
    pub fn has_warning(&self) -> bool {
        self.lifetime_value == Check::Fail
    }
}

pub fn validate_payoffs(p: &StrategyPayoffs) -> ValidationReport {
    let positive = [p.theta1_s, p.theta1_l, p.theta2_s, p.theta2_l, p.x1, p.x2]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0);
    let first_stage_order = if p.theta1_s > p.theta1_l {
        Check::Pass
    } else if p.theta1_s == p.theta1_l {
        Check::Boundary
    } else {
        Check::Fail
    };
    let second_stage_order = if p.theta2_l > p.theta2_s {
        Check::Pass
    } else {
        Check::Fail
    };
    let long = p.theta1_l * p.x1 + p.theta2_l * p.x2;
    let short = p.theta1_s * p.x1 + p.theta2_s * p.x2;
    let lifetime_value = if long > short {
        Check::Pass
    } else {
        Check::Fail
    };
    ValidationReport {
        positive,
        first_stage_order,
        second_stage_order,
        lifetime_value,
    }
}

/// A firm's innovation type.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct FirmIndex(f64);

impl FirmIndex {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self(lambda))
        } else {
            Err(AllocationError::InvalidFirmIndex(lambda))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Realized liquidity requirement `ΔL`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct LiquidityShock(f64);

impl LiquidityShock {
    pub fn new(delta_l: f64) -> Result<Self> {
        if delta_l.is_finite() && delta_l >= 0.0 {
            Ok(Self(delta_l))
        } else {
            Err(AllocationError::InvalidShock(delta_l))
        }
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Liquidation cutoff `λs` and preservation cutoff `λl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    pub lambda_s: f64,
    pub lambda_l: f64,
}

impl CutoffPolicy {
    pub fn new(lambda_s: f64, lambda_l: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda_s)
            && (0.0..=1.0).contains(&lambda_l)
            && lambda_s <= lambda_l
        {
            Ok(Self { lambda_s, lambda_l })
        } else {
            Err(AllocationError::InvalidPolicy { lambda_s, lambda_l })
        }
    }

    /// Clamps both cutoffs into the unit triangle `0 ≤ λs ≤ λl ≤ 1`.
    pub fn clamped(lambda_s: f64, lambda_l: f64) -> Self {
        let lambda_l = lambda_l.clamp(0.0, 1.0);
        let lambda_s = lambda_s.clamp(0.0, lambda_l);
        Self { lambda_s, lambda_l }
    }

    pub const NO_SHOCK: CutoffPolicy = CutoffPolicy {
        lambda_s: 0.0,
        lambda_l: 0.0,
    };

    pub const LIQUIDATE_ALL: CutoffPolicy = CutoffPolicy {
        lambda_s: 1.0,
        lambda_l: 1.0,
    };

    pub fn share_liquidated(&self) -> f64 {
        self.lambda_s
    }

    pub fn share_coerced(&self) -> f64 {
        self.lambda_l - self.lambda_s
    }

    pub fn share_preserved(&self) -> f64 {
        1.0 - self.lambda_l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    NoShock,
    Interior,
    CornerFullCoercion,
    Infeasible,
}

impl RegimeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::NoShock => "no_shock",
            RegimeLabel::Interior => "interior",
            RegimeLabel::CornerFullCoercion => "corner_full_coercion",
            RegimeLabel::Infeasible => "infeasible",
        }
    }

    /// Position in the ordering NoShock < Interior < Corner < Infeasible.
    pub fn index(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationSolution {
    pub policy: CutoffPolicy,
    pub regime: RegimeLabel,
    pub liquidity: f64,
    pub objective: f64,
    /// `None` only when Γ is undefined (θ1s = θ1l) and no solve was needed.
    pub gamma: Option<f64>,
    pub mode: FormulaMode,
}

impl AllocationSolution {
    pub fn is_feasible(&self) -> bool {
        self.regime != RegimeLabel::Infeasible
    }
}

/// Total liquidity raised by liquidating `[0, λs)` and coercing `[λs, λl)`.
#[inline]
pub fn liquidity_raised(p: &StrategyPayoffs, c: &CutoffPolicy) -> f64 {
    0.5 * p.x1
        * (p.coercion_gain() * c.lambda_l * c.lambda_l
            + p.liquidation_coefficient() * c.lambda_s * c.lambda_s)
}

/// Final-stage output of coerced and preserved firms.
#[inline]
pub fn stage2_output(p: &StrategyPayoffs, c: &CutoffPolicy) -> f64 {
    let ll = c.lambda_l * c.lambda_l;
    let ss = c.lambda_s * c.lambda_s;
    0.5 * p.x2 * (p.theta2_s * (ll - ss) + p.theta2_l * (1.0 - ll))
}

/// Relative second-stage cost of coercion against liquidation,
/// `Γ = (θ2l − θ2s)·θ1l / ((θ1s − θ1l)·θ2l)`.
pub fn gamma(p: &StrategyPayoffs) -> Result<f64> {
    if p.theta1_s == p.theta1_l {
        return Err(AllocationError::Degenerate(
            "theta1_s = theta1_l leaves gamma undefined",
        ));
    }
    Ok((p.theta2_l - p.theta2_s) * p.theta1_l / (p.coercion_gain() * p.theta2_l))
}

/// `λl / λs = (1 + Γ)/Γ` on the interior branch.
pub fn cutoff_ratio(p: &StrategyPayoffs) -> Result<f64> {
    let g = gamma(p)?;
    if g <= 0.0 {
        return Err(AllocationError::Degenerate(
            "theta2_s = theta2_l gives gamma = 0",
        ));
    }
    Ok((1.0 + g) / g)
}

/// Bracket `(θ1s − θ1l)·r² + (2θ1l − θ1s)`, bounded below by θ1l.
pub fn interior_denominator(p: &StrategyPayoffs) -> Result<f64> {
    let r = cutoff_ratio(p)?;
    Ok(p.coercion_gain() * r * r + p.liquidation_coefficient())
}

fn require_interior(p: &StrategyPayoffs) -> Result<()> {
    p.require_solvable()?;
    if p.theta1_s == p.theta1_l {
        return Err(AllocationError::Degenerate(
            "theta1_s = theta1_l leaves gamma undefined",
        ));
    }
    Ok(())
}

/// Closed-form interior cutoffs meeting `ΔL` exactly with `λl = r·λs`.
pub fn interior_cutoffs(p: &StrategyPayoffs, s: LiquidityShock) -> Result<CutoffPolicy> {
    require_interior(p)?;
    let r = cutoff_ratio(p)?;
    let threshold = feasibility_threshold(p, FormulaMode::Consistent)?;
    let dl = s.value();
    if dl > threshold * (1.0 + BOUNDARY_RTOL) {
        return Err(AllocationError::Infeasible {
            delta_l: dl,
            threshold,
        });
    }
    let denom = p.coercion_gain() * r * r + p.liquidation_coefficient();
    let lambda_s = (2.0 * dl / (p.x1 * denom)).sqrt();
    Ok(CutoffPolicy::clamped(lambda_s, r * lambda_s))
}

/// Largest shock the interior branch can absorb before `λl` reaches 1.
pub fn feasibility_threshold(p: &StrategyPayoffs, mode: FormulaMode) -> Result<f64> {
    let g = gamma(p)?;
    let factor = match mode {
        FormulaMode::Consistent => g / (1.0 + g),
        FormulaMode::PaperLiteral => {
            if g <= 0.0 {
                return Err(AllocationError::Degenerate(
                    "theta2_s = theta2_l gives gamma = 0",
                ));
            }
            (1.0 + g) / g
        }
    };
    Ok(0.5 * p.x1 * (p.coercion_gain() + p.liquidation_coefficient() * factor * factor))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxLiquidity {
    pub value: f64,
    pub policy: CutoffPolicy,
    /// Both `(0, 1)` and `(1, 1)` attain the maximum (θ1s = 2θ1l).
    pub tie: bool,
}

/// Maximum of the liquidity identity over the unit triangle.
pub fn max_liquidity(p: &StrategyPayoffs) -> MaxLiquidity {
    let liquidate_all = p.theta1_l;
    let coerce_all = p.coercion_gain();
    let policy = if p.liquidation_coefficient() >= 0.0 {
        CutoffPolicy::LIQUIDATE_ALL
    } else {
        CutoffPolicy {
            lambda_s: 0.0,
            lambda_l: 1.0,
        }
    };
    MaxLiquidity {
        value: 0.5 * p.x1 * liquidate_all.max(coerce_all),
        policy,
        tie: p.liquidation_coefficient() == 0.0,
    }
}

/// Cutoffs once `λl` is pinned at 1 and only liquidation adjusts.
pub fn corner_cutoffs(
    p: &StrategyPayoffs,
    s: LiquidityShock,
    mode: FormulaMode,
) -> Result<CutoffPolicy> {
    require_interior(p)?;
    let dl = s.value();
    match mode {
        FormulaMode::Consistent => {
            let lower = feasibility_threshold(p, FormulaMode::Consistent)?;
            let upper = max_liquidity(p).value;
            if dl < lower * (1.0 - BOUNDARY_RTOL) || dl > upper * (1.0 + BOUNDARY_RTOL) {
                return Err(AllocationError::OutOfRange {
                    delta_l: dl,
                    lower,
                    upper,
                });
            }
            let coef = p.liquidation_coefficient();
            if coef == 0.0 {
                // Liquidity no longer depends on λs; stay on the interior branch's endpoint.
                let g = gamma(p)?;
                return Ok(CutoffPolicy::clamped(g / (1.0 + g), 1.0));
            }
            let quotient = (2.0 * dl / p.x1 - p.coercion_gain()) / coef;
            if quotient < -BOUNDARY_RTOL {
                return Err(AllocationError::NoRealSolution(quotient));
            }
            Ok(CutoffPolicy::clamped(quotient.max(0.0).sqrt(), 1.0))
        }
        FormulaMode::PaperLiteral => {
            let quotient = (2.0 * dl - p.x1 * p.theta1_s) / (p.x1 * (p.theta1_l - p.theta1_s));
            if quotient < 0.0 {
                return Err(AllocationError::NoRealSolution(quotient));
            }
            if quotient > 1.0 {
                return Err(AllocationError::OutOfRange {
                    delta_l: dl,
                    lower: 0.5 * p.x1 * p.theta1_l,
                    upper: 0.5 * p.x1 * p.theta1_s,
                });
            }
            Ok(CutoffPolicy::clamped(quotient.sqrt(), 1.0))
        }
    }
}

/// Regime boundaries are inclusive toward the lower regime.
pub fn classify_regime(p: &StrategyPayoffs, s: LiquidityShock) -> Result<RegimeLabel> {
    p.require_solvable()?;
    let dl = s.value();
    if dl == 0.0 {
        return Ok(RegimeLabel::NoShock);
    }
    let threshold = feasibility_threshold(p, FormulaMode::Consistent)?;
    if dl <= threshold * (1.0 + BOUNDARY_RTOL) {
        return Ok(RegimeLabel::Interior);
    }
    if dl <= max_liquidity(p).value * (1.0 + BOUNDARY_RTOL) {
        Ok(RegimeLabel::CornerFullCoercion)
    } else {
        Ok(RegimeLabel::Infeasible)
    }
}

/// Solves the static problem, dispatching on the regime of `ΔL`.
pub fn solve_allocation(
    p: &StrategyPayoffs,
    s: LiquidityShock,
    mode: FormulaMode,
) -> Result<AllocationSolution> {
    let regime = classify_regime(p, s)?;
    let policy = match regime {
        RegimeLabel::NoShock => CutoffPolicy::NO_SHOCK,
        RegimeLabel::Interior => interior_cutoffs(p, s)?,
        RegimeLabel::CornerFullCoercion => corner_cutoffs(p, s, mode)?,
        RegimeLabel::Infeasible => CutoffPolicy::LIQUIDATE_ALL,
    };
    Ok(AllocationSolution {
        policy,
        regime,
        liquidity: liquidity_raised(p, &policy),
        objective: stage2_output(p, &policy),
        gamma: gamma(p).ok(),
        mode,
    })
}
