//! Static allocation embedded in a distance-to-frontier growth model.
//!
//! Each period the static problem is solved on development-dependent payoffs
//!
//! ```text
//! θ1s = Ā, θ1l = A, θ2s = β^s·Ā, θ2l = β^l·A, x1 = β, x2 = 1, ΔL = η·Ā
//! ```
//!
//! and aggregate productivity grows by
//! `1 + g = (1/2a)·[(λl² − λs²)·β^s + (1 − λl²)·β^l·a]` where `a = A/Ā`.
//! All payoffs and the shock scale with `Ā`, so cutoffs and growth depend
//! on the state only through `a`.

use crate::allocation::{
    liquidity_raised, solve_allocation, AllocationError, CutoffPolicy, FormulaMode, LiquidityShock,
    RegimeLabel, StrategyPayoffs,
};
use crate::oracle::{oracle_solve, ConstraintMode, OracleConfig, OracleError, PolicyClass};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrowthError {
    #[error("invalid growth parameter: {0}")]
    InvalidParams(String),
    #[error("distance to frontier a = {a} outside the admissible window ({lower}, 1)")]
    GammaDomain { a: f64, lower: f64 },
    #[error("invalid development state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub type Result<T> = std::result::Result<T, GrowthError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    /// First-stage scale.
    pub beta: f64,
    /// Second-stage factor of the short-term (imitation) strategy.
    pub beta_s: f64,
    /// Second-stage factor of the long-term (innovation) strategy.
    pub beta_l: f64,
    /// Liquidity shock per unit of frontier productivity.
    pub eta: f64,
    pub a0: f64,
    pub periods: usize,
    /// Per-period growth of the frontier itself.
    #[serde(default)]
    pub frontier_growth: f64,
}

impl GrowthParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GrowthError::InvalidParams(msg));
        for (name, v) in [
            ("beta", self.beta),
            ("beta_s", self.beta_s),
            ("beta_l", self.beta_l),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!("eta must be non-negative, got {}", self.eta));
        }
        if !(self.a0 > 0.0 && self.a0 <= 1.0) {
            return bad(format!("a0 must lie in (0, 1], got {}", self.a0));
        }
        if self.a0 < self.beta {
            return bad(format!("a0 = {} is below beta = {}", self.a0, self.beta));
        }
        if self.periods == 0 {
            return bad("periods must be at least 1".into());
        }
        if !(self.frontier_growth.is_finite() && self.frontier_growth >= 0.0) {
            return bad(format!(
                "frontier_growth must be non-negative, got {}",
                self.frontier_growth
            ));
        }
        Ok(())
    }

    /// `β^s/β^l`: at or below this distance Γ is non-positive.
    pub fn gamma_floor(&self) -> f64 {
        self.beta_s / self.beta_l
    }

    pub fn in_window(&self, a: f64) -> bool {
        a > self.gamma_floor() && a < 1.0
    }

    fn require_window(&self, a: f64) -> Result<()> {
        if self.in_window(a) {
            Ok(())
        } else {
            Err(GrowthError::GammaDomain {
                a,
                lower: self.gamma_floor(),
            })
        }
    }

    /// `sqrt(2η/β)`, the liquidation share that persists at the frontier.
    pub fn frontier_liquidation_share(&self) -> f64 {
        (2.0 * self.eta / self.beta).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DevelopmentState {
    pub a: f64,
    pub a_level: f64,
    pub frontier: f64,
}

impl DevelopmentState {
    pub fn new(a_level: f64, frontier: f64) -> Result<Self> {
        if !(a_level.is_finite() && frontier.is_finite() && a_level > 0.0 && frontier > 0.0) {
            return Err(GrowthError::InvalidState(format!(
                "levels must be positive (A = {a_level}, frontier = {frontier})"
            )));
        }
        let a = a_level / frontier;
        if a > 1.0 {
            return Err(GrowthError::InvalidState(format!(
                "a = {a} exceeds the frontier"
            )));
        }
        Ok(Self {
            a,
            a_level,
            frontier,
        })
    }

    /// State at distance `a` with the frontier normalized to 1.
    pub fn at_distance(a: f64) -> Result<Self> {
        Self::new(a, 1.0)
    }
}

/// Payoffs and shock for one period at the current state.
pub fn dynamic_payoffs(
    gp: &GrowthParams,
    st: &DevelopmentState,
) -> (StrategyPayoffs, LiquidityShock) {
    let p = StrategyPayoffs::new(
        st.frontier,
        st.a_level,
        gp.beta_s * st.frontier,
        gp.beta_l * st.a_level,
        gp.beta,
        1.0,
    );
    (
        p,
        LiquidityShock::new(gp.eta * st.frontier).unwrap_or(LiquidityShock::zero()),
    )
}

/// Γ as a function of the distance to the frontier.
///
/// `Consistent` applies the static definition to the substituted payoffs,
/// `(β^l·a − β^s)/(β^l·(1 − a))`; `PaperLiteral` drops the `β^l` in the
/// denominator.
pub fn gamma_dynamic(gp: &GrowthParams, a: f64, mode: FormulaMode) -> Result<f64> {
    gp.require_window(a)?;
    let num = gp.beta_l * a - gp.beta_s;
    Ok(match mode {
        FormulaMode::Consistent => num / (gp.beta_l * (1.0 - a)),
        FormulaMode::PaperLiteral => num / (1.0 - a),
    })
}

/// Uncapped interior cutoffs written directly in development coordinates.
///
/// `λs = sqrt(2η / (β·[(1 − a)·r² + (2a − 1)]))`, `λl = r·λs`, `r = (1+Γ)/Γ`.
pub fn dynamic_interior_formula(
    gp: &GrowthParams,
    a: f64,
    mode: FormulaMode,
) -> Result<(f64, f64)> {
    let g = gamma_dynamic(gp, a, mode)?;
    let r = (1.0 + g) / g;
    let lambda_s = (2.0 * gp.eta / (gp.beta * ((1.0 - a) * r * r + (2.0 * a - 1.0)))).sqrt();
    Ok((lambda_s, r * lambda_s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyChoice {
    pub policy: CutoffPolicy,
    pub regime: RegimeLabel,
}

/// The conglomerate's optimal cutoffs at distance `a`.
pub fn optimal_policy(gp: &GrowthParams, a: f64, mode: FormulaMode) -> Result<PolicyChoice> {
    gp.require_window(a)?;
    let st = DevelopmentState::at_distance(a)?;
    let (p, shock) = dynamic_payoffs(gp, &st);
    match mode {
        FormulaMode::Consistent => {
            let sol = solve_allocation(&p, shock, FormulaMode::Consistent)?;
            Ok(PolicyChoice {
                policy: sol.policy,
                regime: sol.regime,
            })
        }
        FormulaMode::PaperLiteral => {
            if gp.eta == 0.0 {
                return Ok(PolicyChoice {
                    policy: CutoffPolicy::NO_SHOCK,
                    regime: RegimeLabel::NoShock,
                });
            }
            let (s, l) = dynamic_interior_formula(gp, a, mode)?;
            let regime = if l > 1.0 {
                RegimeLabel::CornerFullCoercion
            } else {
                RegimeLabel::Interior
            };
            Ok(PolicyChoice {
                policy: CutoffPolicy::clamped(s, l),
                regime,
            })
        }
    }
}

/// Never liquidate: `λs = 0`, `λl = min(1, sqrt(2η/(β(1 − a))))`.
pub fn coercion_only_policy(gp: &GrowthParams, a: f64) -> CutoffPolicy {
    if gp.eta == 0.0 {
        return CutoffPolicy::NO_SHOCK;
    }
    let lambda_l = if a >= 1.0 {
        1.0
    } else {
        (2.0 * gp.eta / (gp.beta * (1.0 - a))).sqrt()
    };
    CutoffPolicy::clamped(0.0, lambda_l)
}

/// Which closed form to use for the never-coerce cutoff.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiquidationVariant {
    /// Liquidation alone raises `½·β·A·λ²`, so `λ = sqrt(2η/(β·a))`.
    #[default]
    Consistent,
    /// `λ = sqrt(2η/(β(1 − a)))`, the coercion-margin expression reused.
    PaperLiteral,
    /// `λ = sqrt(2η/β)` at every `a`.
    FrontierConstant,
}

impl From<FormulaMode> for LiquidationVariant {
    fn from(mode: FormulaMode) -> Self {
        match mode {
            FormulaMode::Consistent => LiquidationVariant::Consistent,
            FormulaMode::PaperLiteral => LiquidationVariant::PaperLiteral,
        }
    }
}

impl fmt::Display for LiquidationVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiquidationVariant::Consistent => "consistent",
            LiquidationVariant::PaperLiteral => "paper_literal",
            LiquidationVariant::FrontierConstant => "frontier_constant",
        })
    }
}

/// Never coerce: `λs = λl = λ`, capped at 1.
pub fn liquidation_only_policy(
    gp: &GrowthParams,
    a: f64,
    variant: LiquidationVariant,
) -> Result<CutoffPolicy> {
    let base = 2.0 * gp.eta / gp.beta;
    let lambda = match variant {
        LiquidationVariant::Consistent => {
            if a <= 0.0 {
                return Err(GrowthError::GammaDomain { a, lower: 0.0 });
            }
            (base / a).sqrt()
        }
        LiquidationVariant::PaperLiteral => {
            if a >= 1.0 {
                return Err(GrowthError::GammaDomain {
                    a,
                    lower: gp.gamma_floor(),
                });
            }
            (base / (1.0 - a)).sqrt()
        }
        LiquidationVariant::FrontierConstant => base.sqrt(),
    };
    let lambda = lambda.min(1.0);
    Ok(CutoffPolicy::clamped(lambda, lambda))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    #[default]
    Optimal,
    CoercionOnly,
    LiquidationOnly,
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyMode::Optimal => "optimal",
            PolicyMode::CoercionOnly => "coercion_only",
            PolicyMode::LiquidationOnly => "liquidation_only",
        })
    }
}

/// Gross growth `1 + g` at distance `a` under `c`.
pub fn gross_growth(gp: &GrowthParams, a: f64, c: &CutoffPolicy) -> f64 {
    let ll = c.lambda_l * c.lambda_l;
    let ss = c.lambda_s * c.lambda_s;
    ((ll - ss) * gp.beta_s + (1.0 - ll) * gp.beta_l * a) / (2.0 * a)
}

/// Cutoffs and regime label chosen by `mode` at distance `a`.
pub fn policy_for(
    gp: &GrowthParams,
    a: f64,
    mode: PolicyMode,
    formula: FormulaMode,
) -> Result<PolicyChoice> {
    match mode {
        PolicyMode::Optimal => optimal_policy(gp, a, formula),
        PolicyMode::CoercionOnly => Ok(label_restricted(gp, a, coercion_only_policy(gp, a))),
        PolicyMode::LiquidationOnly => {
            let c = liquidation_only_policy(gp, a, formula.into())?;
            Ok(label_restricted(gp, a, c))
        }
    }
}

fn label_restricted(gp: &GrowthParams, a: f64, policy: CutoffPolicy) -> PolicyChoice {
    let regime = if gp.eta == 0.0 {
        RegimeLabel::NoShock
    } else if !meets_shock(gp, a, &policy) {
        RegimeLabel::Infeasible
    } else if policy.lambda_l == 1.0 {
        RegimeLabel::CornerFullCoercion
    } else {
        RegimeLabel::Interior
    };
    PolicyChoice { policy, regime }
}

/// Whether `c` raises `η·Ā` at distance `a`.
pub fn meets_shock(gp: &GrowthParams, a: f64, c: &CutoffPolicy) -> bool {
    let (p, shock) = dynamic_payoffs(
        gp,
        &DevelopmentState {
            a,
            a_level: a,
            frontier: 1.0,
        },
    );
    liquidity_raised(&p, c) >= shock.value() * (1.0 - 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub a: f64,
    pub gamma: f64,
    pub policy: CutoffPolicy,
    pub share_liquidated: f64,
    pub share_coerced: f64,
    pub share_longterm: f64,
    /// Net growth rate `g`.
    pub growth: f64,
    pub regime: RegimeLabel,
    pub a_next: f64,
    /// The policy raised at least `η·Ā`.
    pub liquidity_met: bool,
}

/// One period of the recursion. Returns the record and the next state.
pub fn growth_step(
    gp: &GrowthParams,
    st: &DevelopmentState,
    t: usize,
    mode: PolicyMode,
    formula: FormulaMode,
) -> Result<(TrajectoryPoint, DevelopmentState)> {
    let a = st.a;
    let gamma = gamma_dynamic(gp, a, formula)?;
    let choice = policy_for(gp, a, mode, formula)?;
    let c = choice.policy;
    let ll = c.lambda_l * c.lambda_l;
    let ss = c.lambda_s * c.lambda_s;
    let gross = gross_growth(gp, a, &c);
    let frontier_factor = 1.0 + gp.frontier_growth;
    let a_next = ((ll - ss) / 2.0 * gp.beta_s + (1.0 - ll) / 2.0 * gp.beta_l * a) / frontier_factor;
    let next = DevelopmentState {
        a: a_next,
        a_level: st.a_level * gross,
        frontier: st.frontier * frontier_factor,
    };
    let point = TrajectoryPoint {
        t,
        a,
        gamma,
        policy: c,
        share_liquidated: c.share_liquidated(),
        share_coerced: c.share_coerced(),
        share_longterm: c.share_preserved(),
        growth: gross - 1.0,
        regime: choice.regime,
        a_next,
        liquidity_met: choice.regime != RegimeLabel::Infeasible && meets_shock(gp, a, &c),
    };
    Ok((point, next))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    HorizonReached,
    /// `a` fell to or below `β^s/β^l`.
    GammaDomain {
        t: usize,
        a: f64,
    },
    FrontierReached {
        t: usize,
        a: f64,
    },
    SolverError {
        t: usize,
        message: String,
    },
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopReason::HorizonReached => write!(f, "horizon reached"),
            StopReason::GammaDomain { t, a } => write!(f, "gamma domain at t={t} (a={a})"),
            StopReason::FrontierReached { t, a } => write!(f, "frontier reached at t={t} (a={a})"),
            StopReason::SolverError { t, message } => write!(f, "solver error at t={t}: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub stop: StopReason,
}

/// Iterates [`growth_step`] for `gp.periods` periods or until `a` leaves
/// `(β^s/β^l, 1)`.
pub fn simulate(gp: &GrowthParams, mode: PolicyMode, formula: FormulaMode) -> Trajectory {
    let mut points = Vec::with_capacity(gp.periods);
    let mut st = DevelopmentState {
        a: gp.a0,
        a_level: gp.a0,
        frontier: 1.0,
    };
    for t in 0..gp.periods {
        if st.a >= 1.0 {
            return Trajectory {
                points,
                stop: StopReason::FrontierReached { t, a: st.a },
            };
        }
        if !gp.in_window(st.a) {
            return Trajectory {
                points,
                stop: StopReason::GammaDomain { t, a: st.a },
            };
        }
        match growth_step(gp, &st, t, mode, formula) {
            Ok((point, next)) => {
                points.push(point);
                st = next;
            }
            Err(e) => {
                return Trajectory {
                    points,
                    stop: StopReason::SolverError {
                        t,
                        message: e.to_string(),
                    },
                }
            }
        }
    }
    Trajectory {
        points,
        stop: StopReason::HorizonReached,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    ClosedForm,
    /// At-least, unrestricted oracle on the given grid.
    Oracle {
        grid_n: usize,
    },
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Baseline::ClosedForm => write!(f, "closed_form"),
            Baseline::Oracle { grid_n } => write!(f, "oracle(at_least, grid_n={grid_n})"),
        }
    }
}

/// Baseline growth rate `g` at distance `a`.
pub fn baseline_growth(
    gp: &GrowthParams,
    a: f64,
    baseline: Baseline,
    formula: FormulaMode,
) -> Result<f64> {
    match baseline {
        Baseline::ClosedForm => {
            let c = optimal_policy(gp, a, formula)?.policy;
            Ok(gross_growth(gp, a, &c) - 1.0)
        }
        Baseline::Oracle { grid_n } => {
            gp.require_window(a)?;
            let st = DevelopmentState::at_distance(a)?;
            let (p, shock) = dynamic_payoffs(gp, &st);
            let cfg = OracleConfig::new(grid_n, ConstraintMode::AtLeast, PolicyClass::Unrestricted);
            let r = oracle_solve(&p, shock, &cfg)?;
            // output / A with the frontier normalized to 1
            Ok(r.objective / st.a_level - 1.0)
        }
    }
}

/// Growth rate `g` under `mode`.
pub fn mode_growth(
    gp: &GrowthParams,
    a: f64,
    mode: PolicyMode,
    formula: FormulaMode,
) -> Result<f64> {
    gp.require_window(a)?;
    let c = policy_for(gp, a, mode, formula)?.policy;
    Ok(gross_growth(gp, a, &c) - 1.0)
}

/// `g_baseline(a) − g_mode(a)`.
pub fn growth_loss(
    gp: &GrowthParams,
    a: f64,
    mode: PolicyMode,
    baseline: Baseline,
    formula: FormulaMode,
) -> Result<f64> {
    Ok(baseline_growth(gp, a, baseline, formula)? - mode_growth(gp, a, mode, formula)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSample {
    pub a: f64,
    pub lambda_s: f64,
    pub coercion_gap: f64,
    pub loss_coerce: f64,
    pub loss_liquidate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitCheck {
    pub name: &'static str,
    pub predicted: f64,
    pub computed: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    /// `a = 1 − 2^(−k)` for `k = 4..=20`.
    pub frontier_sequence: Vec<LimitSample>,
    pub early: LimitSample,
    pub checks: Vec<LimitCheck>,
    /// `β^s > β·β^l`: early on, coercion-only growth is at least the optimum.
    pub short_term_sign_condition: bool,
    /// `β^s < β^l·β`: early on, coercion-only growth falls short by a capped margin.
    pub long_term_sign_condition: bool,
}

/// Agreement tolerance for [`LimitCheck`].
pub const LIMIT_TOL: f64 = 1e-3;

fn limit_sample(gp: &GrowthParams, a: f64) -> Result<LimitSample> {
    let f = FormulaMode::Consistent;
    let c = optimal_policy(gp, a, f)?.policy;
    Ok(LimitSample {
        a,
        lambda_s: c.lambda_s,
        coercion_gap: c.lambda_l - c.lambda_s,
        loss_coerce: growth_loss(gp, a, PolicyMode::CoercionOnly, Baseline::ClosedForm, f)?,
        loss_liquidate: growth_loss(gp, a, PolicyMode::LiquidationOnly, Baseline::ClosedForm, f)?,
    })
}

/// Limiting cutoffs and losses near the frontier and near the lower edge of
/// the admissible window, next to their closed-form limits.
pub fn limit_report(gp: &GrowthParams) -> Result<LimitReport> {
    let frontier_sequence = (4..=20)
        .map(|k| limit_sample(gp, 1.0 - 0.5f64.powi(k)))
        .collect::<Result<Vec<_>>>()?;
    let a_lo = gp.beta.max(gp.gamma_floor()) + 1e-6;
    let early = limit_sample(gp, a_lo)?;
    let last = *frontier_sequence.last().expect("non-empty sequence");

    let g_opt = baseline_growth(gp, last.a, Baseline::ClosedForm, FormulaMode::Consistent)?;
    let const_liq = liquidation_only_policy(gp, last.a, LiquidationVariant::FrontierConstant)?;
    let loss_const = g_opt - (gross_growth(gp, last.a, &const_liq) - 1.0);

    let b = gp.beta;
    let capped_c = (2.0 * gp.eta / (b * (1.0 - b))).sqrt().min(1.0);
    let check = |name, predicted: f64, computed: f64| LimitCheck {
        name,
        predicted,
        computed,
        agrees: (predicted - computed).abs() <= LIMIT_TOL,
    };
    let checks = vec![
        check(
            "coercion_loss_at_frontier",
            0.5 * (gp.beta_l - gp.beta_s),
            last.loss_coerce,
        ),
        check(
            "liquidation_share_at_frontier",
            gp.frontier_liquidation_share(),
            last.lambda_s,
        ),
        check("coercion_gap_at_frontier", 0.0, last.coercion_gap),
        check("liquidation_loss_at_frontier", 0.0, last.loss_liquidate),
        check(
            "liquidation_loss_at_frontier_constant_variant",
            0.0,
            loss_const,
        ),
        check("coercion_loss_early_zero", 0.0, early.loss_coerce),
        check(
            "coercion_loss_early_capped",
            capped_c * capped_c * (gp.beta_l * b - gp.beta_s) / (2.0 * b),
            early.loss_coerce,
        ),
        check(
            "liquidation_loss_early",
            (gp.beta_l * b + 2.0 * gp.eta / (1.0 - b) * (gp.beta_s / b - gp.beta_l)) / (2.0 * b),
            early.loss_liquidate,
        ),
    ];
    Ok(LimitReport {
        frontier_sequence,
        early,
        checks,
        short_term_sign_condition: gp.beta_s > b * gp.beta_l,
        long_term_sign_condition: gp.beta_s < gp.beta_l * b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GP: GrowthParams = GrowthParams {
        beta: 0.5,
        beta_s: 1.2,
        beta_l: 2.0,
        eta: 0.05,
        a0: 0.9,
        periods: 5,
        frontier_growth: 0.0,
    };

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn params_validation() {
        assert!(GP.validate().is_ok());
        assert!(GrowthParams { a0: 0.4, ..GP }.validate().is_err());
        assert!(GrowthParams { periods: 0, ..GP }.validate().is_err());
        assert!(GrowthParams { eta: -0.1, ..GP }.validate().is_err());
        // outside the Γ window but still accepted; simulate stops instead
        assert!(GrowthParams { a0: 0.55, ..GP }.validate().is_ok());
    }

    #[test]
    fn payoff_substitution() {
        let st = DevelopmentState::new(0.8, 1.0).unwrap();
        let (p, s) = dynamic_payoffs(&GrowthParams { a0: 0.8, ..GP }, &st);
        assert_eq!(p, StrategyPayoffs::new(1.0, 0.8, 1.2, 1.6, 0.5, 1.0));
        assert_eq!(s.value(), 0.05);

        let st = DevelopmentState::new(1.0, 1.0).unwrap();
        let (p, _) = dynamic_payoffs(&GP, &st);
        assert!(crate::allocation::gamma(&p).is_err());

        let (_, s) = dynamic_payoffs(&GrowthParams { eta: 0.0, ..GP }, &st);
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn state_rejects_beyond_frontier() {
        assert!(DevelopmentState::new(1.2, 1.0).is_err());
        assert!(DevelopmentState::new(-1.0, 1.0).is_err());
        let st = DevelopmentState::new(3.0, 4.0).unwrap();
        assert_eq!(st.a, 0.75);
    }

    #[test]
    fn gamma_fixtures() {
        assert!(close(
            gamma_dynamic(&GP, 0.8, FormulaMode::Consistent).unwrap(),
            1.0,
            1e-12
        ));
        assert!(close(
            gamma_dynamic(&GP, 0.8, FormulaMode::PaperLiteral).unwrap(),
            2.0,
            1e-12
        ));
        assert!(close(
            gamma_dynamic(&GP, 0.9, FormulaMode::Consistent).unwrap(),
            3.0,
            1e-12
        ));
        let near = gamma_dynamic(&GP, 0.6 + 1e-9, FormulaMode::Consistent).unwrap();
        assert!(near > 0.0 && near < 1e-8);
        assert!(gamma_dynamic(&GP, 0.6, FormulaMode::Consistent).is_err());
        assert!(gamma_dynamic(&GP, 1.0, FormulaMode::Consistent).is_err());
    }

    #[test]
    fn optimal_fixtures() {
        let c = optimal_policy(&GP, 0.9, FormulaMode::Consistent).unwrap();
        assert_eq!(c.regime, RegimeLabel::Interior);
        assert!(close(c.policy.lambda_s, 0.452267, 1e-5));
        assert!(close(c.policy.lambda_l, 0.603023, 1e-5));
        let c = optimal_policy(&GP, 0.8, FormulaMode::Consistent).unwrap();
        assert!(close(c.policy.lambda_s, 0.377964, 1e-5));
        assert!(close(c.policy.lambda_l, 0.755929, 1e-5));
        let c = optimal_policy(&GP, 1.0 - 1e-6, FormulaMode::Consistent).unwrap();
        assert!(close(c.policy.lambda_s, 0.447214, 1e-5));
    }

    #[test]
    fn dynamic_formula_agrees_with_static_solve() {
        for a in [0.62, 0.7, 0.8, 0.9, 0.99] {
            let (s, l) = dynamic_interior_formula(&GP, a, FormulaMode::Consistent).unwrap();
            let c = optimal_policy(&GP, a, FormulaMode::Consistent)
                .unwrap()
                .policy;
            assert!(close(s, c.lambda_s, 1e-12), "a={a}");
            assert!(close(l, c.lambda_l, 1e-12), "a={a}");
        }
    }

    #[test]
    fn paper_literal_optimal_uses_literal_gamma() {
        // Γ = 2 ⇒ r = 1.5; bracket 0.2·2.25 + 0.6 = 1.05
        let c = optimal_policy(&GP, 0.8, FormulaMode::PaperLiteral).unwrap();
        let s = (0.1f64 / (0.5 * 1.05)).sqrt();
        assert!(close(c.policy.lambda_s, s, 1e-12));
        assert!(close(c.policy.lambda_l, 1.5 * s, 1e-12));
    }

    #[test]
    fn coercion_only_fixtures() {
        assert_eq!(
            coercion_only_policy(&GP, 0.8),
            CutoffPolicy::new(0.0, 1.0).unwrap()
        );
        let c = coercion_only_policy(&GP, 0.2);
        assert!(close(c.lambda_l, 0.5, 1e-12));
        assert_eq!(coercion_only_policy(&GP, 1.0 - 1e-12).lambda_l, 1.0);
        assert_eq!(coercion_only_policy(&GP, 1.0).lambda_l, 1.0);
    }

    #[test]
    fn liquidation_only_fixtures() {
        let c = liquidation_only_policy(&GP, 0.8, LiquidationVariant::Consistent).unwrap();
        assert!(close(c.lambda_s, 0.5, 1e-12));
        assert_eq!(c.lambda_s, c.lambda_l);
        assert!(meets_shock(&GP, 0.8, &c));
        let c = liquidation_only_policy(&GP, 0.8, LiquidationVariant::PaperLiteral).unwrap();
        assert!(close(c.lambda_s, 1.0, 1e-12));
        for a in [0.61, 0.8, 0.95] {
            let c = liquidation_only_policy(&GP, a, LiquidationVariant::FrontierConstant).unwrap();
            assert!(close(c.lambda_s, 0.447214, 1e-6));
        }
        assert!(liquidation_only_policy(&GP, 0.0, LiquidationVariant::Consistent).is_err());
        assert!(liquidation_only_policy(&GP, 1.0, LiquidationVariant::PaperLiteral).is_err());
    }

    #[test]
    fn growth_step_fixtures() {
        let st = DevelopmentState::at_distance(0.9).unwrap();
        let (pt, next) =
            growth_step(&GP, &st, 0, PolicyMode::Optimal, FormulaMode::Consistent).unwrap();
        assert!(close(1.0 + pt.growth, 0.742424, 1e-5));
        assert!(close(pt.a_next, 0.668182, 1e-5));
        assert!(close(next.a_level / next.frontier, pt.a_next, 1e-12));
        assert!(pt.liquidity_met);

        let st = DevelopmentState::at_distance(0.8).unwrap();
        let (pt, _) = growth_step(
            &GP,
            &st,
            0,
            PolicyMode::CoercionOnly,
            FormulaMode::Consistent,
        )
        .unwrap();
        assert!(close(1.0 + pt.growth, 0.75, 1e-12));
        assert_eq!(pt.regime, RegimeLabel::CornerFullCoercion);

        let no_shock = GrowthParams { eta: 0.0, ..GP };
        let (pt, _) = growth_step(
            &no_shock,
            &st,
            0,
            PolicyMode::Optimal,
            FormulaMode::Consistent,
        )
        .unwrap();
        assert_eq!(pt.policy, CutoffPolicy::NO_SHOCK);
        assert!(close(1.0 + pt.growth, 1.0, 1e-15));
    }

    #[test]
    fn capped_coercion_flags_shortfall() {
        let st = DevelopmentState::at_distance(0.9).unwrap();
        let (pt, _) = growth_step(
            &GP,
            &st,
            0,
            PolicyMode::CoercionOnly,
            FormulaMode::Consistent,
        )
        .unwrap();
        assert_eq!(pt.regime, RegimeLabel::Infeasible);
        assert!(!pt.liquidity_met);
        assert!(close(1.0 + pt.growth, 1.2 / 1.8, 1e-12));
    }

    #[test]
    fn frontier_growth_divides_next_distance() {
        let gp = GrowthParams {
            frontier_growth: 0.02,
            ..GP
        };
        let st = DevelopmentState::at_distance(0.9).unwrap();
        let (pt, next) =
            growth_step(&gp, &st, 0, PolicyMode::Optimal, FormulaMode::Consistent).unwrap();
        assert!(close(pt.a_next * 1.02, pt.a * (1.0 + pt.growth), 1e-12));
        assert!(close(next.frontier, 1.02, 1e-15));
        assert!(close(next.a_level / next.frontier, pt.a_next, 1e-12));
    }

    #[test]
    fn simulate_stops() {
        let traj = simulate(
            &GrowthParams { a0: 0.55, ..GP },
            PolicyMode::Optimal,
            FormulaMode::Consistent,
        );
        assert!(traj.points.is_empty());
        assert!(matches!(traj.stop, StopReason::GammaDomain { t: 0, .. }));

        let traj = simulate(
            &GrowthParams { a0: 1.0, ..GP },
            PolicyMode::Optimal,
            FormulaMode::Consistent,
        );
        assert!(matches!(
            traj.stop,
            StopReason::FrontierReached { t: 0, .. }
        ));

        let traj = simulate(
            &GrowthParams { eta: 0.0, ..GP },
            PolicyMode::Optimal,
            FormulaMode::Consistent,
        );
        assert_eq!(traj.stop, StopReason::HorizonReached);
        for pt in &traj.points {
            assert_eq!(pt.policy, CutoffPolicy::NO_SHOCK);
            assert!(close(1.0 + pt.growth, GP.beta_l / 2.0, 1e-15));
        }
    }

    #[test]
    fn limit_report_flags_each_prediction() {
        let rep = limit_report(&GP).unwrap();
        assert_eq!(rep.frontier_sequence.len(), 17);
        let by_name = |n: &str| rep.checks.iter().find(|c| c.name == n).unwrap().clone();
        assert!(by_name("liquidation_share_at_frontier").agrees);
        assert!(by_name("coercion_gap_at_frontier").agrees);
        // persistent liquidation keeps the optimal growth below β^l/2
        let c = by_name("coercion_loss_at_frontier");
        assert!(!c.agrees);
        assert!(close(
            c.computed,
            0.5 * (2.0 - 1.2) - 0.05 / 0.5 * 2.0,
            1e-4
        ));
        assert!(rep.short_term_sign_condition);
        assert!(!rep.long_term_sign_condition);
    }
}
