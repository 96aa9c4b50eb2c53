//! Scenario configuration and deterministic CSV/JSON emission.
//!
//! A scenario is one JSON document with optional `payoffs`, `growth`, and
//! `oracle` blocks. Every `run_*` function returns the full output text so
//! the caller decides where it goes; identical inputs give identical bytes.

use crate::allocation::{
    solve_allocation, AllocationError, FormulaMode, LiquidityShock, StrategyPayoffs,
};
use crate::growth::{
    baseline_growth, mode_growth, simulate, Baseline, GrowthError, GrowthParams,
    LiquidationVariant, PolicyMode,
};
use crate::oracle::{
    oracle_compare, ConstraintMode, OracleConfig, OracleError, PolicyClass, CLI_GRID,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

pub type Result<T> = std::result::Result<T, ScenarioError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ScenarioError::Invalid(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub constraint: ConstraintMode,
    #[serde(default)]
    pub class: PolicyClass,
    #[serde(default)]
    pub slack: Option<f64>,
}

fn default_grid() -> usize {
    CLI_GRID
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            grid_n: CLI_GRID,
            constraint: ConstraintMode::default(),
            class: PolicyClass::default(),
            slack: None,
        }
    }
}

impl OracleSettings {
    pub fn to_config(self) -> OracleConfig {
        OracleConfig {
            grid_n: self.grid_n,
            constraint: self.constraint,
            class: self.class,
            slack: self.slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub payoffs: Option<StrategyPayoffs>,
    #[serde(default)]
    pub growth: Option<GrowthParams>,
    #[serde(default)]
    pub oracle: Option<OracleSettings>,
    #[serde(default)]
    pub mode: FormulaMode,
    /// Free-form labels carried along for provenance; never computed on.
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.payoffs.is_none() && self.growth.is_none() {
            return invalid("at least one of `payoffs` or `growth` must be present");
        }
        if let Some(p) = &self.payoffs {
            p.require_solvable()?;
        }
        if let Some(g) = &self.growth {
            g.validate()?;
        }
        if let Some(o) = &self.oracle {
            if o.grid_n < 2 {
                return Err(OracleError::GridTooSmall(o.grid_n).into());
            }
        }
        Ok(())
    }

    pub fn require_payoffs(&self) -> Result<StrategyPayoffs> {
        self.payoffs
            .ok_or_else(|| ScenarioError::Invalid("scenario has no `payoffs` block".into()))
    }

    pub fn require_growth(&self) -> Result<GrowthParams> {
        self.growth
            .ok_or_else(|| ScenarioError::Invalid("scenario has no `growth` block".into()))
    }
}

/// Number formatting for emitted records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Fixed-point with this many decimals.
    Fixed(usize),
    /// Shortest representation that round-trips the `f64`.
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Fixed(6)
    }
}

impl std::str::FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("full") {
            return Ok(Precision::Full);
        }
        match s.parse::<usize>() {
            Ok(d) if d <= 17 => Ok(Precision::Fixed(d)),
            _ => Err(format!("precision must be 0..=17 or `full`, got `{s}`")),
        }
    }
}

impl Precision {
    pub fn fmt(self, x: f64) -> String {
        let s = match self {
            Precision::Fixed(d) => format!("{x:.d$}"),
            Precision::Full => format!("{x}"),
        };
        // no "-0.000000"
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s[1..].to_string()
        } else {
            s
        }
    }

    pub fn json(self, x: f64) -> Value {
        if !x.is_finite() {
            return Value::Null;
        }
        match self {
            Precision::Full => json!(x),
            Precision::Fixed(_) => {
                let v: f64 = self.fmt(x).parse().expect("formatted float parses");
                json!(v)
            }
        }
    }

    fn json_opt(self, x: Option<f64>) -> Value {
        x.map_or(Value::Null, |v| self.json(v))
    }
}

/// Emitted text and whether the scenario hit an infeasible outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub text: String,
    pub infeasible: bool,
}

impl RunOutput {
    fn ok(text: String) -> Self {
        Self {
            text,
            infeasible: false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.infeasible {
            2
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    DeltaL,
    A,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return invalid(format!("sweep needs start < stop, got {start} .. {stop}"));
        }
        if steps < 2 {
            return invalid(format!("sweep needs at least 2 steps, got {steps}"));
        }
        Ok(Self {
            variable,
            start,
            stop,
            steps,
        })
    }

    /// Evenly spaced points, endpoints included exactly.
    pub fn points(&self) -> Vec<f64> {
        let width = self.stop - self.start;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| {
                if i == last {
                    self.stop
                } else {
                    self.start + width * i as f64 / last as f64
                }
            })
            .collect()
    }
}

pub const SWEEP_HEADER: &str = "delta_l,regime,lambda_s,lambda_l,liquidity,objective";
pub const DYNAMICS_HEADER: &str =
    "t,a,gamma,lambda_s,lambda_l,share_liq,share_coerce,share_long,growth,regime";
pub const COMPARE_HEADER: &str = "a,g_opt,g_coerce,g_liq,loss_coerce,loss_liq";

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("json values serialize");
    s.push('\n');
    s
}

/// One static solve as a JSON record.
pub fn run_solve(
    cfg: &ScenarioConfig,
    delta_l: f64,
    mode: FormulaMode,
    precision: Precision,
) -> Result<RunOutput> {
    let p = cfg.require_payoffs()?;
    let shock = LiquidityShock::new(delta_l)?;
    let sol = solve_allocation(&p, shock, mode)?;
    let record = json!({
        "delta_l": precision.json(delta_l),
        "regime": sol.regime.as_str(),
        "lambda_s": precision.json(sol.policy.lambda_s),
        "lambda_l": precision.json(sol.policy.lambda_l),
        "liquidity": precision.json(sol.liquidity),
        "objective": precision.json(sol.objective),
        "gamma": precision.json_opt(sol.gamma),
        "mode": mode.to_string(),
        "feasible": sol.is_feasible(),
    });
    Ok(RunOutput {
        text: json_line(&record),
        infeasible: !sol.is_feasible(),
    })
}

/// Cutoffs across a range of shocks, one CSV row per shock.
pub fn run_sweep(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    mode: FormulaMode,
    precision: Precision,
) -> Result<RunOutput> {
    let p = cfg.require_payoffs()?;
    if spec.variable != SweepVariable::DeltaL {
        return invalid("the solve sweep runs over delta_l");
    }
    if spec.start < 0.0 {
        return invalid("delta_l sweep must start at or above 0");
    }
    let rows = spec
        .points()
        .into_par_iter()
        .map(|dl| {
            let sol = solve_allocation(&p, LiquidityShock::new(dl)?, mode)?;
            Ok(format!(
                "{},{},{},{},{},{}\n",
                precision.fmt(dl),
                sol.regime,
                precision.fmt(sol.policy.lambda_s),
                precision.fmt(sol.policy.lambda_l),
                precision.fmt(sol.liquidity),
                precision.fmt(sol.objective),
            ))
        })
        .collect::<Result<Vec<String>>>()?;
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    rows.iter().for_each(|r| out.push_str(r));
    Ok(RunOutput::ok(out))
}

/// A simulated trajectory, one CSV row per period plus a stop-reason comment.
pub fn run_dynamics(
    cfg: &ScenarioConfig,
    policy: PolicyMode,
    mode: FormulaMode,
    precision: Precision,
) -> Result<RunOutput> {
    let gp = cfg.require_growth()?;
    let traj = simulate(&gp, policy, mode);
    let mut out = String::from(DYNAMICS_HEADER);
    out.push('\n');
    for pt in &traj.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            pt.t,
            precision.fmt(pt.a),
            precision.fmt(pt.gamma),
            precision.fmt(pt.policy.lambda_s),
            precision.fmt(pt.policy.lambda_l),
            precision.fmt(pt.share_liquidated),
            precision.fmt(pt.share_coerced),
            precision.fmt(pt.share_longterm),
            precision.fmt(pt.growth),
            pt.regime,
        );
    }
    let _ = writeln!(out, "# stop: {}", traj.stop);
    Ok(RunOutput::ok(out))
}

/// Growth under the optimal and the two restricted policies across `a`.
pub fn run_compare(
    cfg: &ScenarioConfig,
    spec: &SweepSpec,
    baseline: Baseline,
    mode: FormulaMode,
    precision: Precision,
) -> Result<RunOutput> {
    let gp = cfg.require_growth()?;
    if spec.variable != SweepVariable::A {
        return invalid("the comparison sweep runs over a");
    }
    let rows = spec
        .points()
        .into_par_iter()
        .map(|a| -> Result<String> {
            let g_opt = baseline_growth(&gp, a, baseline, mode)?;
            let g_coerce = mode_growth(&gp, a, PolicyMode::CoercionOnly, mode)?;
            let g_liq = mode_growth(&gp, a, PolicyMode::LiquidationOnly, mode)?;
            Ok(format!(
                "{},{},{},{},{},{}\n",
                precision.fmt(a),
                precision.fmt(g_opt),
                precision.fmt(g_coerce),
                precision.fmt(g_liq),
                precision.fmt(g_opt - g_coerce),
                precision.fmt(g_opt - g_liq),
            ))
        })
        .collect::<Result<Vec<String>>>()?;
    let mut out = String::new();
    let _ = writeln!(out, "# baseline: {baseline}");
    let _ = writeln!(out, "# formula_mode: {mode}");
    let _ = writeln!(
        out,
        "# liquidation_variant: {}",
        LiquidationVariant::from(mode)
    );
    out.push_str(COMPARE_HEADER);
    out.push('\n');
    rows.iter().for_each(|r| out.push_str(r));
    Ok(RunOutput::ok(out))
}

fn policy_json(precision: Precision, s: f64, l: f64) -> Value {
    json!({ "lambda_s": precision.json(s), "lambda_l": precision.json(l) })
}

/// Closed-form solution against the brute-force oracle, as a JSON record.
pub fn run_oracle(
    cfg: &ScenarioConfig,
    delta_l: f64,
    settings: OracleSettings,
    mode: FormulaMode,
    precision: Precision,
) -> Result<RunOutput> {
    let p = cfg.require_payoffs()?;
    let shock = LiquidityShock::new(delta_l)?;
    let ocfg = settings.to_config();
    let closed = solve_allocation(&p, shock, mode)?;
    let rep = oracle_compare(&p, shock, &ocfg, closed.policy)?;
    let oracle = match &rep.oracle {
        Some(o) => json!({
            "policy": policy_json(precision, o.best_policy.lambda_s, o.best_policy.lambda_l),
            "objective": precision.json(o.objective),
            "liquidity": precision.json(o.achieved_liquidity),
            "feasible_count": o.feasible_count,
        }),
        None => Value::Null,
    };
    let record = json!({
        "delta_l": precision.json(delta_l),
        "constraint": ocfg.constraint.to_string(),
        "class": ocfg.class.to_string(),
        "grid_n": ocfg.grid_n,
        "slack": precision.json(ocfg.slack_for(&p)),
        "mode": mode.to_string(),
        "closed_form": {
            "regime": closed.regime.as_str(),
            "policy": policy_json(precision, closed.policy.lambda_s, closed.policy.lambda_l),
            "objective": precision.json(closed.objective),
            "liquidity": precision.json(closed.liquidity),
            "admissible": rep.candidate_admissible,
        },
        "oracle": oracle,
        "gap": precision.json_opt(rep.gap),
        "epsilon_grid": precision.json(rep.epsilon_grid),
        "oracle_strictly_better": rep.oracle_strictly_better(),
        "empty_feasible_set": rep.oracle.is_none(),
    });
    Ok(RunOutput {
        text: json_line(&record),
        infeasible: rep.oracle.is_none(),
    })
}
