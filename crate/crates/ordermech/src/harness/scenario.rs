//! Scenario configuration: the JSON schema, loading, and eager validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentStrategy, GammaPolicy, StrategyKind, DEFAULT_BUDGET};
use crate::econ::{CostFunction, PaymentRule, ProfitFunction};
use crate::error::{Error, Result};
use crate::mech_dynamic::{M2PaymentMode, TypeModel, TypeTable};
use crate::mech_static::EconSetup;
use crate::money::Money;
use crate::verifier::{MarkovGrid, ReportBehavior, StaticGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Indivisible,
    M1,
    M2,
}

/// Per-agent entry: a scalar true type (indivisible mode) and a strategy.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AgentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<u64>,
    #[serde(default)]
    pub strategy: StrategySpec,
}

/// Strategy entry; the gamma policy falls back to the scenario's `tie_break`
/// when omitted.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StrategySpec {
    #[serde(flatten)]
    pub kind: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_policy: Option<GammaPolicy>,
}

impl StrategySpec {
    pub fn resolve(&self, tie_break: GammaPolicy) -> AgentStrategy {
        AgentStrategy {
            kind: self.kind.clone(),
            gamma_policy: self.gamma_policy.unwrap_or(tie_break),
        }
    }
}

/// True types for the multi-stage modes: either `fixed` (rows per agent,
/// columns per stage) or the Markov pair `hat`/`tilde` (tilde rows cover
/// stages 2..=K and must be strictly below the matching hat entries).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TypesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hat: Option<Vec<Vec<u64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilde: Option<Vec<Vec<u64>>>,
}

impl TypesSpec {
    pub fn to_model(&self) -> Result<TypeModel> {
        match (&self.fixed, &self.hat, &self.tilde) {
            (Some(rows), None, None) => TypeModel::fixed(rows.clone()),
            (None, Some(hat), Some(tilde)) => {
                Ok(TypeModel::Markov(TypeTable::new(hat.clone(), tilde.clone())?))
            }
            _ => Err(Error::InvalidScenario(
                "types must give either `fixed` or both `hat` and `tilde`".into(),
            )),
        }
    }
}

/// Instance generation for scalar (indivisible) runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSpec {
    /// Every profile in `[theta_min, theta_max]^agents`, lexicographic.
    Exhaustive {
        agents: usize,
        #[serde(default)]
        theta_min: u64,
        theta_max: u64,
    },
    /// `count` seeded uniform profiles.
    Sample { agents: usize, theta_max: u64, count: usize },
    /// `count` seeded instances whose types are footrule totals of random
    /// task permutations against the identity order.
    Permutation { agents: usize, tasks: usize, count: usize },
}

impl InstanceSpec {
    pub fn agents(&self) -> usize {
        match *self {
            InstanceSpec::Exhaustive { agents, .. }
            | InstanceSpec::Sample { agents, .. }
            | InstanceSpec::Permutation { agents, .. } => agents,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyName {
    Ic,
    Ir,
    So,
    Payment,
    Gamma,
}

/// Grid overrides for verification; anything omitted takes the defaults (or
/// is derived from the scenario's types).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
}

impl GridSpec {
    pub fn static_grid(&self) -> StaticGrid {
        let d = StaticGrid::default();
        StaticGrid {
            agent_counts: self.agent_counts.clone().unwrap_or(d.agent_counts),
            theta_max: self.theta_max.unwrap_or(d.theta_max),
        }
    }

    pub fn markov_grid(&self, types_agents: Option<usize>, types_stages: Option<usize>) -> MarkovGrid {
        let d = MarkovGrid::default();
        MarkovGrid {
            agents: self
                .agent_counts
                .as_ref()
                .and_then(|c| c.first().copied())
                .or(types_agents)
                .unwrap_or(d.agents),
            stages: self.stages.or(types_stages).unwrap_or(d.stages),
            entry_max: self.entry_max.unwrap_or(d.entry_max),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySpec {
    pub properties: Vec<PropertyName>,
    #[serde(default)]
    pub grid: GridSpec,
    /// Report behavior for the SO check (defaults to truthful).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub so_behavior: Option<ReportBehavior>,
    /// Gamma policy for the SO/IR checks (defaults to the scenario
    /// tie-break).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub so_gamma_policy: Option<GammaPolicy>,
    /// Seeded multi-stage instances for the fixed-type repeated-mechanism
    /// checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

fn default_scenario_id() -> String {
    "scenario".to_string()
}

fn default_payment() -> PaymentRule {
    PaymentRule::second_price_linear()
}

fn default_cost() -> CostFunction {
    CostFunction::Linear
}

fn default_profit() -> ProfitFunction {
    ProfitFunction::Affine { intercept: Money::from_int(10), slope: Money::from_int(2) }
}

/// A full experiment description. Deterministic contract: identical
/// (scenario, seed) pairs produce byte-identical outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "default_scenario_id")]
    pub scenario_id: String,
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<TypesSpec>,
    #[serde(default = "default_payment")]
    pub payment: PaymentRule,
    #[serde(default = "default_cost")]
    pub cost: CostFunction,
    #[serde(default = "default_profit")]
    pub profit: ProfitFunction,
    #[serde(default)]
    pub tie_break: GammaPolicy,
    #[serde(default)]
    pub m2_payment: M2PaymentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySpec>,
}

impl Scenario {
    pub fn econ(&self) -> EconSetup {
        EconSetup {
            payment: self.payment.clone(),
            cost: self.cost.clone(),
            profit: self.profit.clone(),
        }
    }

    /// Enumeration budget: `ORDERMECH_BUDGET` env var, then the config value,
    /// then the built-in default.
    pub fn effective_budget(&self) -> u64 {
        if let Ok(v) = std::env::var("ORDERMECH_BUDGET") {
            if let Ok(n) = v.trim().parse::<u64>() {
                return n;
            }
        }
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn types_model(&self) -> Result<Option<TypeModel>> {
        self.types.as_ref().map(|t| t.to_model()).transpose()
    }

    /// Strategies for `n` agents: the per-agent specs when given, otherwise
    /// everyone truthful under the scenario tie-break.
    pub fn strategies(&self, n: usize) -> Result<Vec<AgentStrategy>> {
        if self.agents.is_empty() {
            return Ok(vec![
                AgentStrategy {
                    kind: StrategyKind::Truthful,
                    gamma_policy: self.tie_break
                };
                n
            ]);
        }
        if self.agents.len() != n {
            return Err(Error::InvalidScenario(format!(
                "{} agent entries for {} agents",
                self.agents.len(),
                n
            )));
        }
        Ok(self.agents.iter().map(|a| a.strategy.resolve(self.tie_break)).collect())
    }

    /// Report-enumeration cap: the config value, the footrule bound for
    /// permutation-derived instances, otherwise the instance maximum.
    pub fn report_cap(&self, instance_max: u64) -> u64 {
        if let Some(v) = self.report_max {
            return v;
        }
        if let Some(InstanceSpec::Permutation { tasks, .. }) = &self.instances {
            return (*tasks as u64 * *tasks as u64) / 2;
        }
        instance_max
    }

    pub fn validate(&self) -> Result<()> {
        self.cost.validate()?;
        self.profit.validate()?;
        match self.mode {
            Mode::Indivisible => {
                self.payment.validate()?;
                if let Some(spec) = &self.instances {
                    if spec.agents() < 2 {
                        return Err(Error::InsufficientAgents(spec.agents()));
                    }
                    if !self.agents.is_empty() && self.agents.len() != spec.agents() {
                        return Err(Error::InvalidScenario(format!(
                            "{} agent entries but generated instances have {} agents",
                            self.agents.len(),
                            spec.agents()
                        )));
                    }
                } else {
                    if self.agents.len() < 2 {
                        return Err(Error::InsufficientAgents(self.agents.len()));
                    }
                    for (i, a) in self.agents.iter().enumerate() {
                        if a.theta.is_none() {
                            return Err(Error::InvalidScenario(format!(
                                "agent {} has no theta and no instance generator is configured",
                                i + 1
                            )));
                        }
                    }
                }
            }
            Mode::M1 => {
                self.payment.validate()?;
                let types = self
                    .types_model()?
                    .ok_or_else(|| Error::InvalidScenario("m1 requires `types`".into()))?;
                if types.agents() < 2 {
                    return Err(Error::InsufficientAgents(types.agents()));
                }
                if !self.agents.is_empty() && self.agents.len() != types.agents() {
                    return Err(Error::InvalidScenario(format!(
                        "{} agent entries for {} typed agents",
                        self.agents.len(),
                        types.agents()
                    )));
                }
            }
            Mode::M2 => {
                let types = self
                    .types_model()?
                    .ok_or_else(|| Error::InvalidScenario("m2 requires `types`".into()))?;
                match types {
                    TypeModel::Markov(t) => {
                        if t.agents() < 2 {
                            return Err(Error::InsufficientAgents(t.agents()));
                        }
                    }
                    TypeModel::Fixed(_) => {
                        return Err(Error::InvalidScenario(
                            "m2 requires conditional types (`hat`/`tilde`), not `fixed`".into(),
                        ))
                    }
                }
                if !self.cost.is_linear() {
                    return Err(Error::NonlinearCostUnsupported);
                }
            }
        }
        Ok(())
    }
}

/// Reads and validates a scenario file. Parse errors carry the line/column
/// from the JSON parser; invariant violations name the failing constraint.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}
