//! Single-winner mechanism for an indivisible array of tasks.
//!
//! The principal collects reported aggregate misalignments, awards all tasks
//! to the lowest bidder (ties to the lowest agent id), observes the winner's
//! realized misalignment, and pays according to the configured rule anchored
//! at the second-lowest bid. Settlement produces every party's exact payoff.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agents::{self, AgentStrategy, GammaContext};
use crate::econ::{pay, CostFunction, PaymentRule, ProfitFunction};
use crate::error::{Error, Result};
use crate::money::Money;

/// 1-based agent identifier (agent ids run 1..=I, matching report order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(usize);

impl AgentId {
    pub fn from_index(index: usize) -> Self {
        AgentId(index + 1)
    }

    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The payment rule, effort-cost family, and profit family a scenario runs
/// under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconSetup {
    pub payment: PaymentRule,
    pub cost: CostFunction,
    pub profit: ProfitFunction,
}

impl EconSetup {
    pub fn validate(&self) -> Result<()> {
        self.payment.validate()?;
        self.cost.validate()?;
        self.profit.validate()
    }
}

/// Reported aggregate misalignments, one per agent. At least two agents are
/// required so that a second-lowest bid exists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>")]
pub struct BidProfile {
    reports: Vec<u64>,
}

impl BidProfile {
    pub fn new(reports: Vec<u64>) -> Result<Self> {
        if reports.len() < 2 {
            return Err(Error::InsufficientAgents(reports.len()));
        }
        Ok(BidProfile { reports })
    }

    pub fn reports(&self) -> &[u64] {
        &self.reports
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<u64>> for BidProfile {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        BidProfile::new(v)
    }
}

/// Winner selection outcome. `theta_bar` is the lowest report among the
/// non-winners (equal to the winner's report on a tie); all reports are
/// retained for audit and gating.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuctionResult {
    pub winner: AgentId,
    pub theta_bar: u64,
    pub reports: Vec<u64>,
}

/// Awards all tasks to the agent with the minimum report, breaking ties by
/// the lowest agent id.
pub fn select_winner(bids: &BidProfile) -> AuctionResult {
    let reports = bids.reports();
    let mut w = 0usize;
    for (i, &r) in reports.iter().enumerate().skip(1) {
        if r < reports[w] {
            w = i;
        }
    }
    let theta_bar = reports
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != w)
        .map(|(_, &r)| r)
        .min()
        .expect("BidProfile guarantees at least two agents");
    AuctionResult { winner: AgentId::from_index(w), theta_bar, reports: reports.to_vec() }
}

/// Exact payoffs for one mechanism run (or one stage of a multi-stage run).
///
/// Non-winners are paid nothing and carry zero utility; welfare is the
/// principal's utility plus every agent's, which telescopes to
/// `S(gamma) - h(theta_w, gamma)` since payments cancel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settlement {
    pub winner: AgentId,
    pub theta_bar: u64,
    pub theta_true_w: u64,
    pub theta_reported_w: u64,
    pub gamma: u64,
    pub payments: Vec<Money>,
    pub agent_utilities: Vec<Money>,
    pub principal_utility: Money,
    pub welfare: Money,
    pub gating_violation: bool,
}

/// Settles an auction given the winner's true misalignment and realized
/// choice. `gamma_w` may not exceed the true misalignment; exceeding the
/// *reported* one triggers the rule's gating (forfeiture by default) rather
/// than an error, with the effort cost still incurred.
pub fn settle(
    auction: &AuctionResult,
    true_theta_w: u64,
    gamma_w: u64,
    econ: &EconSetup,
) -> Result<Settlement> {
    if gamma_w > true_theta_w {
        return Err(Error::RealizedExceedsInitial { theta: true_theta_w, gamma: gamma_w });
    }
    let w = auction.winner.index();
    let reported = auction.reports[w];
    let payment = pay(&econ.payment, auction.theta_bar, reported, gamma_w, &econ.cost)?;
    let cost = econ.cost.evaluate(true_theta_w, gamma_w)?;

    let n = auction.reports.len();
    let mut payments = vec![Money::zero(); n];
    let mut agent_utilities = vec![Money::zero(); n];
    payments[w] = payment.amount.clone();
    agent_utilities[w] = payment.amount.clone() - cost;

    let total_paid: Money = payments.iter().sum();
    let principal_utility = econ.profit.evaluate(gamma_w) - total_paid;
    let welfare = principal_utility.clone() + agent_utilities.iter().sum::<Money>();

    Ok(Settlement {
        winner: auction.winner,
        theta_bar: auction.theta_bar,
        theta_true_w: true_theta_w,
        theta_reported_w: reported,
        gamma: gamma_w,
        payments,
        agent_utilities,
        principal_utility,
        welfare,
        gating_violation: payment.gating_violation,
    })
}

/// A complete single-stage scenario: true types, one strategy per agent, and
/// the economic setup.
#[derive(Clone, Debug)]
pub struct IndivisibleInstance {
    pub true_thetas: Vec<u64>,
    pub strategies: Vec<AgentStrategy>,
    pub econ: EconSetup,
    /// Upper end of the report enumeration for best-response agents.
    pub report_max: u64,
    /// Evaluation budget for best-response enumeration.
    pub budget: u64,
}

impl IndivisibleInstance {
    pub fn truthful(true_thetas: Vec<u64>, econ: EconSetup) -> Self {
        let n = true_thetas.len();
        let report_max = true_thetas.iter().copied().max().unwrap_or(0);
        IndivisibleInstance {
            true_thetas,
            strategies: vec![AgentStrategy::default(); n],
            econ,
            report_max,
            budget: agents::DEFAULT_BUDGET,
        }
    }
}

/// Runs the full timeline: collect reports from the agent strategies, select
/// the winner, let the winner realize a misalignment under his gamma policy,
/// and settle.
///
/// Best-responding agents optimize against the reports the other agents would
/// submit non-strategically (strategic peers are taken at their truthful
/// value); the dominant-strategy quantifier over arbitrary peer reports lives
/// in the verifier.
pub fn run_indivisible(inst: &IndivisibleInstance) -> Result<Settlement> {
    let n = inst.true_thetas.len();
    if n < 2 {
        return Err(Error::InsufficientAgents(n));
    }
    if inst.strategies.len() != n {
        return Err(Error::InvalidScenario(format!(
            "{} agents but {} strategies",
            n,
            inst.strategies.len()
        )));
    }

    let provisional: Vec<u64> = inst
        .true_thetas
        .iter()
        .zip(&inst.strategies)
        .map(|(&theta, s)| agents::naive_report(&s.kind, theta))
        .collect();

    let mut reports = provisional.clone();
    for i in 0..n {
        if inst.strategies[i].is_best_response() {
            let ctx = agents::ReportContext {
                econ: &inst.econ,
                agent_index: i,
                report_max: inst.report_max,
                budget: inst.budget,
            };
            reports[i] =
                agents::choose_report(&inst.strategies[i], inst.true_thetas[i], &ctx, &provisional)?;
        }
    }

    let bids = BidProfile::new(reports)?;
    let auction = select_winner(&bids);
    let w = auction.winner.index();
    let gamma_ctx = GammaContext::auction(&inst.econ, auction.theta_bar);
    let gamma = agents::choose_gamma(
        inst.strategies[w].gamma_policy,
        inst.true_thetas[w],
        auction.reports[w],
        &gamma_ctx,
    )?;
    settle(&auction, inst.true_thetas[w], gamma, &inst.econ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{GammaPolicy, StrategyKind};
    use crate::econ::{Gating, PaymentFamily};

    fn m(v: i64) -> Money {
        Money::from_int(v)
    }

    fn linear_econ() -> EconSetup {
        EconSetup {
            payment: PaymentRule::second_price_linear(),
            cost: CostFunction::Linear,
            profit: ProfitFunction::affine(m(10), m(2)).unwrap(),
        }
    }

    #[test]
    fn winner_selection_examples() {
        let r = select_winner(&BidProfile::new(vec![3, 5, 7]).unwrap());
        assert_eq!(r.winner, AgentId::from_index(0));
        assert_eq!(r.winner.get(), 1);
        assert_eq!(r.theta_bar, 5);

        let tie = select_winner(&BidProfile::new(vec![3, 3]).unwrap());
        assert_eq!(tie.winner.get(), 1);
        assert_eq!(tie.theta_bar, 3);

        assert!(matches!(
            BidProfile::new(vec![9]),
            Err(Error::InsufficientAgents(1))
        ));
    }

    #[test]
    fn settle_hand_example() {
        // theta_w = 3, theta_bar = 5, gamma = 0, S = 10 - 2*gamma:
        // U_w = 2, V = 5, welfare = 7.
        let econ = linear_econ();
        let auction = select_winner(&BidProfile::new(vec![3, 5]).unwrap());
        let s = settle(&auction, 3, 0, &econ).unwrap();
        assert_eq!(s.agent_utilities, vec![m(2), m(0)]);
        assert_eq!(s.payments, vec![m(5), m(0)]);
        assert_eq!(s.principal_utility, m(5));
        assert_eq!(s.welfare, m(7));
        assert!(!s.gating_violation);
    }

    #[test]
    fn settle_no_effort_case() {
        // theta_w = 4, gamma = 4 (no effort), theta_bar = 6: U = (6-4) - 0.
        let econ = linear_econ();
        let auction = select_winner(&BidProfile::new(vec![4, 6]).unwrap());
        let s = settle(&auction, 4, 4, &econ).unwrap();
        assert_eq!(s.agent_utilities[0], m(2));
    }

    #[test]
    fn settle_rejects_gamma_above_truth_and_forfeits_above_report() {
        let econ = linear_econ();
        let auction = select_winner(&BidProfile::new(vec![2, 6]).unwrap());
        assert!(matches!(
            settle(&auction, 2, 3, &econ),
            Err(Error::RealizedExceedsInitial { theta: 2, gamma: 3 })
        ));
        // true theta 5, reported 2: gamma = 4 > report triggers forfeiture,
        // the cost is still incurred.
        let s = settle(&auction, 5, 4, &econ).unwrap();
        assert!(s.gating_violation);
        assert!(s.payments[0].is_zero());
        assert_eq!(s.agent_utilities[0], m(-1));
        // welfare still telescopes to S - h
        assert_eq!(s.welfare, econ.profit.evaluate(4) - m(1));
    }

    #[test]
    fn welfare_is_principal_plus_agents() {
        let econ = linear_econ();
        for reports in [vec![3, 5], vec![0, 0, 6], vec![4, 4, 4]] {
            let auction = select_winner(&BidProfile::new(reports).unwrap());
            let theta = auction.reports[auction.winner.index()];
            for gamma in 0..=theta {
                let s = settle(&auction, theta, gamma, &econ).unwrap();
                let sum: Money =
                    s.principal_utility.clone() + s.agent_utilities.iter().sum::<Money>();
                assert_eq!(s.welfare, sum);
                let direct = econ.profit.evaluate(gamma)
                    - econ.cost.evaluate(theta, gamma).unwrap();
                assert_eq!(s.welfare, direct);
            }
        }
    }

    #[test]
    fn run_truthful_two_agents() {
        let inst = IndivisibleInstance::truthful(vec![3, 5], linear_econ());
        let s = run_indivisible(&inst).unwrap();
        assert_eq!(s.winner.get(), 1);
        assert_eq!(s.gamma, 0); // social policy, slope 2 > 1
        assert_eq!(s.agent_utilities, vec![m(2), m(0)]);
        assert_eq!(s.welfare, m(7));
    }

    #[test]
    fn best_response_matches_truthful_under_sound_rule() {
        let mut inst = IndivisibleInstance::truthful(vec![3, 5], linear_econ());
        for s in &mut inst.strategies {
            s.kind = StrategyKind::BestResponse;
        }
        let s = run_indivisible(&inst).unwrap();
        assert_eq!(s.theta_reported_w, 3);
        assert_eq!(s.agent_utilities, vec![m(2), m(0)]);
        assert_eq!(s.welfare, m(7));
    }

    #[test]
    fn best_response_exploits_flat_report_rule() {
        let mut inst = IndivisibleInstance::truthful(vec![3, 5], linear_econ());
        inst.econ.payment =
            PaymentRule { family: PaymentFamily::FlatReport, gating: Gating::Forfeit };
        let truthful = run_indivisible(&inst).unwrap();
        for s in &mut inst.strategies {
            s.kind = StrategyKind::BestResponse;
        }
        inst.report_max = 5;
        let strategic = run_indivisible(&inst).unwrap();
        let w = strategic.winner.index();
        assert_ne!(strategic.theta_reported_w, inst.true_thetas[w]);
        assert!(strategic.agent_utilities[w] > truthful.agent_utilities[w]);
    }

    #[test]
    fn gamma_policy_modes() {
        // Under the sound rule the winner is indifferent over gamma; the
        // policy resolves the indifference set.
        let mut inst = IndivisibleInstance::truthful(vec![3, 5], linear_econ());
        inst.strategies[0].gamma_policy = GammaPolicy::Adversarial;
        assert_eq!(run_indivisible(&inst).unwrap().gamma, 3);
        inst.strategies[0].gamma_policy = GammaPolicy::MaxGamma;
        assert_eq!(run_indivisible(&inst).unwrap().gamma, 3);
        inst.strategies[0].gamma_policy = GammaPolicy::MinGamma;
        assert_eq!(run_indivisible(&inst).unwrap().gamma, 0);
        // with slope 1/2 < 1 welfare increases in gamma, so social picks theta
        inst.strategies[0].gamma_policy = GammaPolicy::Social;
        inst.econ.profit = ProfitFunction::affine(m(10), Money::ratio(1, 2)).unwrap();
        assert_eq!(run_indivisible(&inst).unwrap().gamma, 3);
    }
}
