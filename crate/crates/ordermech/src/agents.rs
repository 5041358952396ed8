//! Agent behavior models: how an agent picks a report (or a full contingent
//! report table) and a realized misalignment, given a mechanism.
//!
//! Best response is computed against fixed peer reports by exhaustive
//! enumeration; the game-theoretic quantifier over all peer profiles lives in
//! the verifier, not here.

use serde::{Deserialize, Serialize};

use crate::econ::{pay, CostFunction, PaymentRule, ProfitFunction};
use crate::error::{Error, Result};
use crate::mech_static::EconSetup;
use crate::money::Money;

/// Default enumeration budget (single utility evaluations). Overridable per
/// scenario and through the `ORDERMECH_BUDGET` environment variable.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// How an agent resolves indifference over the realized misalignment once his
/// utility is maximized: in favor of welfare (social), against it
/// (adversarial), or toward an extreme of the indifference set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPolicy {
    #[default]
    Social,
    #[serde(rename = "min", alias = "min_gamma")]
    MinGamma,
    #[serde(rename = "max", alias = "max_gamma")]
    MaxGamma,
    Adversarial,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    Truthful,
    /// Reports `max(0, true value + offset)`; contingent tables keep their
    /// validity by capping the conditional entry below the unconditional one.
    FixedMisreport { offset: i64 },
    /// Exhaustive argmax over reports against fixed peer reports, ties broken
    /// toward the truthful report, then toward smaller reports.
    BestResponse,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentStrategy {
    #[serde(flatten)]
    pub kind: StrategyKind,
    #[serde(default)]
    pub gamma_policy: GammaPolicy,
}

impl AgentStrategy {
    pub fn truthful() -> Self {
        AgentStrategy::default()
    }

    pub fn best_response() -> Self {
        AgentStrategy { kind: StrategyKind::BestResponse, gamma_policy: GammaPolicy::Social }
    }

    pub fn is_best_response(&self) -> bool {
        matches!(self.kind, StrategyKind::BestResponse)
    }
}

/// Offset misreport clamped at zero.
pub fn offset_report(true_value: u64, offset: i64) -> u64 {
    (true_value as i64).saturating_add(offset).max(0) as u64
}

/// Report produced without looking at peers: the truthful value for both
/// `Truthful` and (provisionally) `BestResponse`, the clamped offset for
/// `FixedMisreport`.
pub fn naive_report(kind: &StrategyKind, true_theta: u64) -> u64 {
    match kind {
        StrategyKind::Truthful | StrategyKind::BestResponse => true_theta,
        StrategyKind::FixedMisreport { offset } => offset_report(true_theta, *offset),
    }
}

// ---------------------------------------------------------------------------
// Realized-misalignment choice
// ---------------------------------------------------------------------------

/// What the winner is paid at the decision point where he picks gamma.
pub enum StagePayment<'a> {
    /// Single-auction payment: the configured rule at the recorded
    /// second-lowest bid.
    Auction { rule: &'a PaymentRule, theta_bar: u64 },
    /// A stage of the lookahead mechanism: a fixed base, minus gamma unless
    /// running in the literal payment mode.
    PathStage { base: Money, deduct_gamma: bool },
}

pub struct GammaContext<'a> {
    pub cost: &'a CostFunction,
    pub profit: &'a ProfitFunction,
    pub payment: StagePayment<'a>,
}

impl<'a> GammaContext<'a> {
    pub fn auction(econ: &'a EconSetup, theta_bar: u64) -> Self {
        GammaContext {
            cost: &econ.cost,
            profit: &econ.profit,
            payment: StagePayment::Auction { rule: &econ.payment, theta_bar },
        }
    }

    fn winner_payment(&self, report: u64, gamma: u64) -> Result<Money> {
        match &self.payment {
            StagePayment::Auction { rule, theta_bar } => {
                Ok(pay(rule, *theta_bar, report, gamma, self.cost)?.amount)
            }
            StagePayment::PathStage { base, deduct_gamma } => Ok(if *deduct_gamma {
                base.clone() - Money::from_u64(gamma)
            } else {
                base.clone()
            }),
        }
    }
}

/// The winner's realized-misalignment choice: utility argmax over
/// `gamma in [0, min(theta, report)]`, indifference resolved per policy
/// (and then toward the smallest gamma).
pub fn choose_gamma(
    policy: GammaPolicy,
    true_theta: u64,
    report: u64,
    ctx: &GammaContext,
) -> Result<u64> {
    let hi = true_theta.min(report);
    let mut utilities = Vec::with_capacity(hi as usize + 1);
    for gamma in 0..=hi {
        let u = ctx.winner_payment(report, gamma)? - ctx.cost.evaluate(true_theta, gamma)?;
        utilities.push((gamma, u));
    }
    let best = utilities.iter().map(|(_, u)| u).max().cloned().expect("gamma 0 is feasible");
    let candidates: Vec<u64> =
        utilities.iter().filter(|(_, u)| *u == best).map(|(g, _)| *g).collect();

    Ok(match policy {
        GammaPolicy::MinGamma => candidates[0],
        GammaPolicy::MaxGamma => *candidates.last().unwrap(),
        GammaPolicy::Social | GammaPolicy::Adversarial => {
            let welfare = |gamma: u64| -> Result<Money> {
                Ok(ctx.profit.evaluate(gamma) - ctx.cost.evaluate(true_theta, gamma)?)
            };
            let mut pick = candidates[0];
            let mut pick_welfare = welfare(pick)?;
            for &g in &candidates[1..] {
                let w = welfare(g)?;
                let better = if policy == GammaPolicy::Social {
                    w > pick_welfare
                } else {
                    w < pick_welfare
                };
                if better {
                    pick = g;
                    pick_welfare = w;
                }
            }
            pick
        }
    })
}

// ---------------------------------------------------------------------------
// Report choice for the single auction
// ---------------------------------------------------------------------------

pub struct ReportContext<'a> {
    pub econ: &'a EconSetup,
    pub agent_index: usize,
    pub report_max: u64,
    pub budget: u64,
}

/// Tracks enumeration spend; exceeding the budget aborts the search instead
/// of silently truncating it.
pub struct BudgetMeter {
    remaining: u64,
    budget: u64,
}

impl BudgetMeter {
    pub fn new(budget: u64) -> Self {
        BudgetMeter { remaining: budget, budget }
    }

    pub fn spend(&mut self, n: u64) -> Result<()> {
        if self.remaining < n {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        self.remaining -= n;
        Ok(())
    }
}

/// Utility this agent can secure by bidding `report` against the fixed peer
/// reports in `profile` (his own slot is overwritten): zero when losing,
/// otherwise the gamma-argmax of payment minus cost.
pub fn best_utility_static(
    true_theta: u64,
    report: u64,
    agent_index: usize,
    profile: &[u64],
    econ: &EconSetup,
    meter: &mut BudgetMeter,
) -> Result<Money> {
    // winner = argmin with lowest-id tie-break
    let mut w = 0usize;
    let mut w_report = if agent_index == 0 { report } else { profile[0] };
    for i in 1..profile.len() {
        let r = if i == agent_index { report } else { profile[i] };
        if r < w_report {
            w = i;
            w_report = r;
        }
    }
    if w != agent_index {
        return Ok(Money::zero());
    }
    let theta_bar = profile
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != agent_index)
        .map(|(_, &r)| r)
        .min()
        .ok_or(Error::InsufficientAgents(profile.len()))?;

    let mut best: Option<Money> = None;
    for gamma in 0..=true_theta.min(report) {
        meter.spend(1)?;
        let u = pay(&econ.payment, theta_bar, report, gamma, &econ.cost)?.amount
            - econ.cost.evaluate(true_theta, gamma)?;
        if best.as_ref().is_none_or(|b| u > *b) {
            best = Some(u);
        }
    }
    Ok(best.expect("gamma 0 is feasible"))
}

/// Resolves the agent's report for a single auction. `profile` carries the
/// peers' reports; the agent's own slot is ignored.
pub fn choose_report(
    strategy: &AgentStrategy,
    true_theta: u64,
    ctx: &ReportContext,
    profile: &[u64],
) -> Result<u64> {
    match strategy.kind {
        StrategyKind::Truthful => Ok(true_theta),
        StrategyKind::FixedMisreport { offset } => Ok(offset_report(true_theta, offset)),
        StrategyKind::BestResponse => {
            let mut meter = BudgetMeter::new(ctx.budget);
            let truthful_u = best_utility_static(
                true_theta,
                true_theta,
                ctx.agent_index,
                profile,
                ctx.econ,
                &mut meter,
            )?;
            let mut best_report = true_theta;
            let mut best_u = truthful_u;
            for report in 0..=ctx.report_max {
                let u = best_utility_static(
                    true_theta,
                    report,
                    ctx.agent_index,
                    profile,
                    ctx.econ,
                    &mut meter,
                )?;
                if u > best_u {
                    best_report = report;
                    best_u = u;
                }
            }
            Ok(best_report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econ::{CostFunction, Gating, PaymentFamily, PaymentRule, ProfitFunction};

    fn m(v: i64) -> Money {
        Money::from_int(v)
    }

    fn econ(rule: PaymentRule, slope: Money) -> EconSetup {
        EconSetup {
            payment: rule,
            cost: CostFunction::Linear,
            profit: ProfitFunction::affine(m(10), slope).unwrap(),
        }
    }

    fn auction_ctx(econ: &EconSetup, theta_bar: u64) -> GammaContext<'_> {
        GammaContext::auction(econ, theta_bar)
    }

    #[test]
    fn truthful_and_offset_reports() {
        let e = econ(PaymentRule::second_price_linear(), m(2));
        let ctx =
            ReportContext { econ: &e, agent_index: 0, report_max: 6, budget: DEFAULT_BUDGET };
        assert_eq!(choose_report(&AgentStrategy::truthful(), 3, &ctx, &[3, 5]).unwrap(), 3);
        let under = AgentStrategy {
            kind: StrategyKind::FixedMisreport { offset: -5 },
            gamma_policy: GammaPolicy::Social,
        };
        assert_eq!(choose_report(&under, 3, &ctx, &[3, 5]).unwrap(), 0);
    }

    #[test]
    fn best_response_keeps_truthful_under_sound_rule() {
        // theta = 3 against a peer reporting 5: truthful is in the argmax set.
        let e = econ(PaymentRule::second_price_linear(), m(2));
        let ctx =
            ReportContext { econ: &e, agent_index: 0, report_max: 8, budget: DEFAULT_BUDGET };
        let r = choose_report(&AgentStrategy::best_response(), 3, &ctx, &[3, 5]).unwrap();
        assert_eq!(r, 3);
    }

    #[test]
    fn best_response_misreports_under_flat_rule() {
        let e = econ(
            PaymentRule { family: PaymentFamily::FlatReport, gating: Gating::Forfeit },
            m(2),
        );
        let ctx =
            ReportContext { econ: &e, agent_index: 0, report_max: 5, budget: DEFAULT_BUDGET };
        let r = choose_report(&AgentStrategy::best_response(), 3, &ctx, &[3, 5]).unwrap();
        assert_eq!(r, 5); // paid the report itself, so bid the cap that still wins
    }

    #[test]
    fn gamma_policy_examples() {
        // Sound rule + linear cost: the winner is indifferent over gamma.
        // slope 2 > 1: welfare falls in gamma, social picks 0.
        let e2 = econ(PaymentRule::second_price_linear(), m(2));
        assert_eq!(choose_gamma(GammaPolicy::Social, 4, 4, &auction_ctx(&e2, 6)).unwrap(), 0);
        // slope 1/2 < 1: welfare rises in gamma, social picks theta.
        let eh = econ(PaymentRule::second_price_linear(), Money::ratio(1, 2));
        assert_eq!(choose_gamma(GammaPolicy::Social, 4, 4, &auction_ctx(&eh, 6)).unwrap(), 4);
        // adversarial with slope 2 picks the welfare-minimal end.
        assert_eq!(
            choose_gamma(GammaPolicy::Adversarial, 4, 4, &auction_ctx(&e2, 6)).unwrap(),
            4
        );
        assert_eq!(choose_gamma(GammaPolicy::MinGamma, 4, 4, &auction_ctx(&e2, 6)).unwrap(), 0);
        assert_eq!(choose_gamma(GammaPolicy::MaxGamma, 4, 4, &auction_ctx(&e2, 6)).unwrap(), 4);
    }

    #[test]
    fn gamma_respects_report_cap() {
        let e = econ(PaymentRule::second_price_linear(), m(2));
        for policy in
            [GammaPolicy::Social, GammaPolicy::MinGamma, GammaPolicy::MaxGamma, GammaPolicy::Adversarial]
        {
            let g = choose_gamma(policy, 5, 2, &auction_ctx(&e, 6)).unwrap();
            assert!(g <= 2);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let e = econ(PaymentRule::second_price_linear(), m(2));
        let ctx = ReportContext { econ: &e, agent_index: 0, report_max: 10, budget: 3 };
        let err = choose_report(&AgentStrategy::best_response(), 10, &ctx, &[10, 10]);
        assert!(matches!(err, Err(Error::BudgetExceeded { budget: 3 })));
    }

    #[test]
    fn strategy_config_shape() {
        let s: AgentStrategy =
            serde_json::from_str(r#"{"kind":"fixed_misreport","offset":-2,"gamma_policy":"max"}"#)
                .unwrap();
        assert_eq!(s.kind, StrategyKind::FixedMisreport { offset: -2 });
        assert_eq!(s.gamma_policy, GammaPolicy::MaxGamma);
        let s: AgentStrategy = serde_json::from_str(r#"{"kind":"truthful"}"#).unwrap();
        assert_eq!(s, AgentStrategy::truthful());
        let s: AgentStrategy =
            serde_json::from_str(r#"{"kind":"best_response","gamma_policy":"min_gamma"}"#).unwrap();
        assert_eq!(s.gamma_policy, GammaPolicy::MinGamma);
    }
}
