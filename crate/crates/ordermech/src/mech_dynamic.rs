//! Multi-stage mechanisms for a divisible array of tasks.
//!
//! Two allocation regimes are implemented. The repeated regime runs the
//! single-winner auction independently per stage and is sound when each
//! agent's private misalignment is fixed across stages. The lookahead regime
//! handles one-step (Markov) type dynamics — an agent who wins stage `k-1`
//! faces a strictly lower misalignment at stage `k` — by choosing the whole
//! allocation path that minimizes the total effective reported misalignment,
//! and paying each stage winner the runner-up bid adjusted by his own
//! next-stage conditional reports.
//!
//! The adjusted stage payment carries a `-gamma` term so the winner's utility
//! is independent of the realized misalignment, mirroring the single-auction
//! rule; a literal mode without the term is kept for comparison and is
//! expected to fail the gamma-independence property.

use serde::{Deserialize, Serialize};

use crate::agents::{
    self, AgentStrategy, BudgetMeter, GammaContext, GammaPolicy, StagePayment, StrategyKind,
};
use crate::econ::{CostFunction, ProfitFunction};
use crate::error::{Error, Result};
use crate::mech_static::{
    select_winner, settle, AgentId, BidProfile, EconSetup, Settlement,
};
use crate::money::Money;

// ---------------------------------------------------------------------------
// Type tables
// ---------------------------------------------------------------------------

/// Per-agent, per-stage conditional misalignments for Markov type dynamics.
///
/// `hat[i][k]` applies at stage `k` when agent `i` did not win stage `k-1`
/// (and always at the first stage); `tilde[i][k-1]` applies when he did, and
/// must be strictly lower. The same shape carries either true types or the
/// contingent values agents report up front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct TypeTable {
    hat: Vec<Vec<u64>>,
    tilde: Vec<Vec<u64>>,
}

#[derive(Deserialize)]
struct RawTable {
    hat: Vec<Vec<u64>>,
    tilde: Vec<Vec<u64>>,
}

impl TryFrom<RawTable> for TypeTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        TypeTable::new(raw.hat, raw.tilde)
    }
}

impl TypeTable {
    /// `hat` is `I x K`; `tilde` is `I x (K-1)` covering stages `2..=K`.
    pub fn new(hat: Vec<Vec<u64>>, tilde: Vec<Vec<u64>>) -> Result<Self> {
        if hat.is_empty() {
            return Err(Error::MalformedTypeTable("no agents".into()));
        }
        let stages = hat[0].len();
        if stages == 0 {
            return Err(Error::MalformedTypeTable("no stages".into()));
        }
        if tilde.len() != hat.len() {
            return Err(Error::MalformedTypeTable(format!(
                "{} hat rows but {} tilde rows",
                hat.len(),
                tilde.len()
            )));
        }
        for (i, (h, t)) in hat.iter().zip(&tilde).enumerate() {
            if h.len() != stages {
                return Err(Error::MalformedTypeTable(format!(
                    "agent {} has {} stages, expected {stages}",
                    i + 1,
                    h.len()
                )));
            }
            if t.len() + 1 != stages {
                return Err(Error::MalformedTypeTable(format!(
                    "agent {} has {} conditional entries, expected {}",
                    i + 1,
                    t.len(),
                    stages - 1
                )));
            }
            for (j, &tl) in t.iter().enumerate() {
                if tl >= h[j + 1] {
                    return Err(Error::ConditionalNotLower {
                        agent: i + 1,
                        stage: j + 2,
                        tilde: tl,
                        hat: h[j + 1],
                    });
                }
            }
        }
        Ok(TypeTable { hat, tilde })
    }

    pub fn agents(&self) -> usize {
        self.hat.len()
    }

    pub fn stages(&self) -> usize {
        self.hat[0].len()
    }

    /// Misalignment of agent `i` at stage `k` given who won stage `k-1`.
    pub fn effective(&self, agent: usize, stage: usize, prev_winner: Option<usize>) -> u64 {
        if stage > 0 && prev_winner == Some(agent) {
            self.tilde[agent][stage - 1]
        } else {
            self.hat[agent][stage]
        }
    }

    pub fn hat_rows(&self) -> &[Vec<u64>] {
        &self.hat
    }

    pub fn tilde_rows(&self) -> &[Vec<u64>] {
        &self.tilde
    }

    pub fn agent_rows(&self, agent: usize) -> (&[u64], &[u64]) {
        (&self.hat[agent], &self.tilde[agent])
    }

    /// A copy with one agent's rows replaced (used for unilateral report
    /// deviations); the validity constraints are re-checked.
    pub fn with_agent_rows(&self, agent: usize, hat: Vec<u64>, tilde: Vec<u64>) -> Result<Self> {
        let mut h = self.hat.clone();
        let mut t = self.tilde.clone();
        h[agent] = hat;
        t[agent] = tilde;
        TypeTable::new(h, t)
    }

    pub fn max_entry(&self) -> u64 {
        self.hat
            .iter()
            .chain(self.tilde.iter())
            .flat_map(|row| row.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

/// True-type model for the repeated per-stage mechanism: either fixed per
/// stage or Markov in the previous allocation.
#[derive(Clone, Debug, PartialEq)]
pub enum TypeModel {
    Fixed(Vec<Vec<u64>>),
    Markov(TypeTable),
}

impl TypeModel {
    /// `rows[i][k]` is agent `i`'s misalignment at stage `k`, independent of
    /// history.
    pub fn fixed(rows: Vec<Vec<u64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::MalformedTypeTable("no agents".into()));
        }
        let stages = rows[0].len();
        if stages == 0 {
            return Err(Error::MalformedTypeTable("no stages".into()));
        }
        if rows.iter().any(|r| r.len() != stages) {
            return Err(Error::MalformedTypeTable("ragged stage rows".into()));
        }
        Ok(TypeModel::Fixed(rows))
    }

    pub fn agents(&self) -> usize {
        match self {
            TypeModel::Fixed(rows) => rows.len(),
            TypeModel::Markov(t) => t.agents(),
        }
    }

    pub fn stages(&self) -> usize {
        match self {
            TypeModel::Fixed(rows) => rows[0].len(),
            TypeModel::Markov(t) => t.stages(),
        }
    }

    pub fn effective(&self, agent: usize, stage: usize, prev_winner: Option<usize>) -> u64 {
        match self {
            TypeModel::Fixed(rows) => rows[agent][stage],
            TypeModel::Markov(t) => t.effective(agent, stage, prev_winner),
        }
    }

    pub fn max_entry(&self) -> u64 {
        match self {
            TypeModel::Fixed(rows) => {
                rows.iter().flat_map(|r| r.iter().copied()).max().unwrap_or(0)
            }
            TypeModel::Markov(t) => t.max_entry(),
        }
    }
}

// ---------------------------------------------------------------------------
// Repeated per-stage mechanism
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct M1Instance {
    pub types: TypeModel,
    pub strategies: Vec<AgentStrategy>,
    pub econ: EconSetup,
    pub report_max: u64,
    pub budget: u64,
}

impl M1Instance {
    pub fn truthful(types: TypeModel, econ: EconSetup) -> Self {
        let n = types.agents();
        let report_max = types.max_entry();
        M1Instance {
            types,
            strategies: vec![AgentStrategy::default(); n],
            econ,
            report_max,
            budget: agents::DEFAULT_BUDGET,
        }
    }
}

enum M1Reporter<'a> {
    Strategy(&'a StrategyKind),
    Sequence(&'a [u64]),
}

struct M1Run {
    settlements: Vec<Settlement>,
    /// `reports[k][i]`
    reports: Vec<Vec<u64>>,
}

/// Plays the per-stage auctions forward. Strategic kinds are taken at their
/// truthful value here; `run_m1` resolves them to explicit sequences first.
fn simulate_m1(
    types: &TypeModel,
    econ: &EconSetup,
    policies: &[GammaPolicy],
    reporters: &[M1Reporter],
) -> Result<M1Run> {
    let stages = types.stages();
    let mut prev: Option<usize> = None;
    let mut settlements = Vec::with_capacity(stages);
    let mut all_reports = Vec::with_capacity(stages);
    for k in 0..stages {
        let reports: Vec<u64> = (0..types.agents())
            .map(|i| {
                let eff = types.effective(i, k, prev);
                match &reporters[i] {
                    M1Reporter::Strategy(kind) => agents::naive_report(kind, eff),
                    M1Reporter::Sequence(seq) => seq[k],
                }
            })
            .collect();
        let auction = select_winner(&BidProfile::new(reports.clone())?);
        let w = auction.winner.index();
        let true_eff = types.effective(w, k, prev);
        let ctx = GammaContext::auction(econ, auction.theta_bar);
        let gamma = agents::choose_gamma(policies[w], true_eff, auction.reports[w], &ctx)?;
        settlements.push(settle(&auction, true_eff, gamma, econ)?);
        all_reports.push(reports);
        prev = Some(w);
    }
    Ok(M1Run { settlements, reports: all_reports })
}

/// Best full report sequence for one agent against the other agents'
/// non-strategic play, by exhaustive enumeration over `[0, report_max]^K`.
/// Ties go to the truthful sequence, then to the lexicographically smallest.
pub(crate) fn best_sequence_m1(inst: &M1Instance, agent: usize) -> Result<Vec<u64>> {
    let stages = inst.types.stages();
    let policies: Vec<GammaPolicy> = inst.strategies.iter().map(|s| s.gamma_policy).collect();
    let base_reporters: Vec<M1Reporter> =
        inst.strategies.iter().map(|s| M1Reporter::Strategy(&s.kind)).collect();

    let truthful_kind = StrategyKind::Truthful;
    let mut reporters: Vec<M1Reporter> = base_reporters;
    reporters[agent] = M1Reporter::Strategy(&truthful_kind);
    let baseline = simulate_m1(&inst.types, &inst.econ, &policies, &reporters)?;
    let truthful_total: Money =
        baseline.settlements.iter().map(|s| s.agent_utilities[agent].clone()).sum();
    let truthful_seq: Vec<u64> = baseline.reports.iter().map(|r| r[agent]).collect();

    let mut meter = BudgetMeter::new(inst.budget);
    let mut best_total = truthful_total;
    let mut best_seq = truthful_seq;
    let mut seq = vec![0u64; stages];
    loop {
        meter.spend(stages as u64)?;
        let mut reporters: Vec<M1Reporter> =
            inst.strategies.iter().map(|s| M1Reporter::Strategy(&s.kind)).collect();
        reporters[agent] = M1Reporter::Sequence(&seq);
        let run = simulate_m1(&inst.types, &inst.econ, &policies, &reporters)?;
        let total: Money = run.settlements.iter().map(|s| s.agent_utilities[agent].clone()).sum();
        if total > best_total {
            best_total = total;
            best_seq = seq.clone();
        }
        // next sequence in lexicographic order
        let mut pos = stages;
        while pos > 0 {
            pos -= 1;
            if seq[pos] < inst.report_max {
                seq[pos] += 1;
                break;
            }
            seq[pos] = 0;
            if pos == 0 {
                return Ok(best_seq);
            }
        }
    }
}

/// Total utility one agent obtains under the repeated mechanism when he
/// commits to `sequence` (or reports truthfully when `None`) while every
/// other agent reports truthfully. The utility is invariant to the winner's
/// gamma policy, which only selects within the argmax set.
pub fn m1_unilateral_total(
    types: &TypeModel,
    econ: &EconSetup,
    agent: usize,
    sequence: Option<&[u64]>,
) -> Result<Money> {
    let n = types.agents();
    let policies = vec![GammaPolicy::Social; n];
    let truthful = StrategyKind::Truthful;
    let reporters: Vec<M1Reporter> = (0..n)
        .map(|i| match sequence {
            Some(seq) if i == agent => M1Reporter::Sequence(seq),
            _ => M1Reporter::Strategy(&truthful),
        })
        .collect();
    let run = simulate_m1(types, econ, &policies, &reporters)?;
    Ok(run.settlements.iter().map(|s| s.agent_utilities[agent].clone()).sum())
}

/// Runs the repeated mechanism: one independent auction per task, each
/// settled as in the single-stage mechanism. On Markov types each agent's
/// effective misalignment tracks his own allocation history.
pub fn run_m1(inst: &M1Instance) -> Result<Vec<Settlement>> {
    let n = inst.types.agents();
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
    let policies: Vec<GammaPolicy> = inst.strategies.iter().map(|s| s.gamma_policy).collect();
    let mut sequences: Vec<Option<Vec<u64>>> = vec![None; n];
    for i in 0..n {
        if inst.strategies[i].is_best_response() {
            sequences[i] = Some(best_sequence_m1(inst, i)?);
        }
    }
    let reporters: Vec<M1Reporter> = inst
        .strategies
        .iter()
        .zip(&sequences)
        .map(|(s, seq)| match seq {
            Some(v) => M1Reporter::Sequence(v),
            None => M1Reporter::Strategy(&s.kind),
        })
        .collect();
    Ok(simulate_m1(&inst.types, &inst.econ, &policies, &reporters)?.settlements)
}

// ---------------------------------------------------------------------------
// Lookahead mechanism for Markov dynamic types
// ---------------------------------------------------------------------------

/// Whether stage payments carry the `-gamma` term that makes the winner's
/// utility independent of the realized misalignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum M2PaymentMode {
    #[default]
    Corrected,
    Literal,
}

/// Allocation over the whole horizon, with the per-stage data settlement
/// needs: the winner's effective reported misalignment and the runner-up
/// effective report at each stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllocationPath {
    pub winners: Vec<AgentId>,
    pub effective_reports: Vec<u64>,
    pub theta_bars: Vec<u64>,
    pub total_reported: u64,
}

/// Chooses the allocation path minimizing the total effective reported
/// misalignment over all `I^K` paths, by dynamic programming over
/// (stage, previous winner) in `O(K * I^2)`. Ties break to the
/// lexicographically smallest winner sequence. The final stage is always an
/// argmin of the effective final-stage reports.
pub fn allocate_m2(reports: &TypeTable) -> Result<AllocationPath> {
    let agents_n = reports.agents();
    if agents_n < 2 {
        return Err(Error::InsufficientAgents(agents_n));
    }
    let stages = reports.stages();
    // prev-winner index `agents_n` encodes "no previous stage".
    let eff = |i: usize, k: usize, p: usize| -> u64 {
        reports.effective(i, k, if p == agents_n { None } else { Some(p) })
    };

    // cost-to-go per (stage, previous winner)
    let mut togo = vec![vec![0u64; agents_n + 1]; stages + 1];
    for k in (0..stages).rev() {
        for p in 0..=agents_n {
            togo[k][p] = (0..agents_n)
                .map(|i| eff(i, k, p) + togo[k + 1][i])
                .min()
                .expect("at least two agents");
        }
    }

    let mut winners = Vec::with_capacity(stages);
    let mut effective_reports = Vec::with_capacity(stages);
    let mut theta_bars = Vec::with_capacity(stages);
    let mut prev = agents_n;
    for k in 0..stages {
        let w = (0..agents_n)
            .find(|&i| eff(i, k, prev) + togo[k + 1][i] == togo[k][prev])
            .expect("cost-to-go is attained by some winner");
        let runner_up = (0..agents_n)
            .filter(|&i| i != w)
            .map(|i| eff(i, k, prev))
            .min()
            .expect("at least two agents");
        winners.push(AgentId::from_index(w));
        effective_reports.push(eff(w, k, prev));
        theta_bars.push(runner_up);
        prev = w;
    }
    Ok(AllocationPath {
        winners,
        effective_reports,
        theta_bars,
        total_reported: togo[0][agents_n],
    })
}

/// The gamma-free part of the stage-`k` payment: the runner-up bid, plus the
/// winner's next-stage conditional spread when he also wins stage `k+1`.
///
/// The spread comes from the winner's *true* conditional values, not his
/// reported ones: anchoring it to reports would let a winner inflate his own
/// payment by overstating the unconditional next-stage entry without ever
/// affecting the chosen path.
pub fn stage_payment_base(path: &AllocationPath, truth: &TypeTable, stage: usize) -> Money {
    let w = path.winners[stage].index();
    let mut base = Money::from_u64(path.theta_bars[stage]);
    if stage + 1 < path.winners.len() && path.winners[stage + 1].index() == w {
        let (hat, tilde) = truth.agent_rows(w);
        base = base + Money::from_u64(hat[stage + 1]) - Money::from_u64(tilde[stage]);
    }
    base
}

/// Settles every stage of an allocation path against the true type table.
/// Requires linear effort cost; each stage's realized misalignment may not
/// exceed the winner's effective reported value, nor his true effective one.
pub fn settle_m2(
    path: &AllocationPath,
    truth: &TypeTable,
    gammas: &[u64],
    cost: &CostFunction,
    profit: &ProfitFunction,
    mode: M2PaymentMode,
) -> Result<Vec<Settlement>> {
    if !cost.is_linear() {
        return Err(Error::NonlinearCostUnsupported);
    }
    let stages = path.winners.len();
    let agents_n = truth.agents();
    if stages != truth.stages() {
        return Err(Error::MalformedTypeTable(format!(
            "allocation covers {stages} stages but the type table has {}",
            truth.stages()
        )));
    }
    if gammas.len() != stages {
        return Err(Error::InvalidScenario(format!(
            "{} gammas for {} stages",
            gammas.len(),
            stages
        )));
    }

    let mut out = Vec::with_capacity(stages);
    let mut prev: Option<usize> = None;
    for k in 0..stages {
        let w = path.winners[k].index();
        let gamma = gammas[k];
        let reported_eff = path.effective_reports[k];
        if gamma > reported_eff {
            return Err(Error::RealizedExceedsReport { gamma, reported: reported_eff });
        }
        let true_eff = truth.effective(w, k, prev);
        if gamma > true_eff {
            return Err(Error::RealizedExceedsInitial { theta: true_eff, gamma });
        }

        let base = stage_payment_base(path, truth, k);
        let amount = match mode {
            M2PaymentMode::Corrected => base - Money::from_u64(gamma),
            M2PaymentMode::Literal => base,
        };
        let effort = cost.evaluate(true_eff, gamma)?;

        let mut payments = vec![Money::zero(); agents_n];
        let mut agent_utilities = vec![Money::zero(); agents_n];
        payments[w] = amount.clone();
        agent_utilities[w] = amount.clone() - effort;
        let principal_utility = profit.evaluate(gamma) - amount;
        let welfare = principal_utility.clone() + agent_utilities.iter().sum::<Money>();

        out.push(Settlement {
            winner: path.winners[k],
            theta_bar: path.theta_bars[k],
            theta_true_w: true_eff,
            theta_reported_w: reported_eff,
            gamma,
            payments,
            agent_utilities,
            principal_utility,
            welfare,
            gating_violation: false,
        });
        prev = Some(w);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct M2Instance {
    pub truth: TypeTable,
    pub strategies: Vec<AgentStrategy>,
    pub econ: EconSetup,
    pub payment_mode: M2PaymentMode,
    pub report_max: u64,
    pub budget: u64,
}

impl M2Instance {
    pub fn truthful(truth: TypeTable, econ: EconSetup) -> Self {
        let n = truth.agents();
        let report_max = truth.max_entry();
        M2Instance {
            truth,
            strategies: vec![AgentStrategy::default(); n],
            econ,
            payment_mode: M2PaymentMode::Corrected,
            report_max,
            budget: agents::DEFAULT_BUDGET,
        }
    }
}

/// All valid contingent report rows for one agent over `stages` stages with
/// entries bounded by `max`: the unconditional entry ranges freely, every
/// later stage pairs an unconditional entry with a strictly lower conditional
/// one. Lexicographic order.
pub fn enumerate_report_rows(stages: usize, max: u64) -> Vec<(Vec<u64>, Vec<u64>)> {
    fn extend(
        stages: usize,
        max: u64,
        hat: &mut Vec<u64>,
        tilde: &mut Vec<u64>,
        out: &mut Vec<(Vec<u64>, Vec<u64>)>,
    ) {
        if hat.len() == stages {
            out.push((hat.clone(), tilde.clone()));
            return;
        }
        for h in 1..=max {
            for t in 0..h {
                hat.push(h);
                tilde.push(t);
                extend(stages, max, hat, tilde, out);
                tilde.pop();
                hat.pop();
            }
        }
    }
    let mut out = Vec::new();
    if stages == 0 {
        return out;
    }
    for h0 in 0..=max {
        let mut hat = vec![h0];
        let mut tilde = Vec::new();
        extend(stages, max, &mut hat, &mut tilde, &mut out);
    }
    out
}

/// Total utility the agent can secure across his winning stages of the path
/// induced by `reports`, maximizing over the feasible realized misalignment
/// at each stage. Evaluated against his true types.
pub fn m2_agent_best_total(
    truth: &TypeTable,
    reports: &TypeTable,
    agent: usize,
    cost: &CostFunction,
    mode: M2PaymentMode,
) -> Result<Money> {
    if !cost.is_linear() {
        return Err(Error::NonlinearCostUnsupported);
    }
    let path = allocate_m2(reports)?;
    let mut total = Money::zero();
    let mut prev: Option<usize> = None;
    for k in 0..path.winners.len() {
        let w = path.winners[k].index();
        if w == agent {
            let true_eff = truth.effective(agent, k, prev);
            let reported_eff = path.effective_reports[k];
            let base = stage_payment_base(&path, truth, k);
            let hi = true_eff.min(reported_eff);
            let mut best: Option<Money> = None;
            for gamma in 0..=hi {
                let amount = match mode {
                    M2PaymentMode::Corrected => base.clone() - Money::from_u64(gamma),
                    M2PaymentMode::Literal => base.clone(),
                };
                let u = amount - cost.evaluate(true_eff, gamma)?;
                if best.as_ref().is_none_or(|b| u > *b) {
                    best = Some(u);
                }
            }
            total += &best.expect("gamma 0 is feasible");
        }
        prev = Some(w);
    }
    Ok(total)
}

fn offset_rows(hat: &[u64], tilde: &[u64], offset: i64) -> (Vec<u64>, Vec<u64>) {
    let hat_out: Vec<u64> = hat
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            let v = agents::offset_report(h, offset);
            if k == 0 {
                v
            } else {
                v.max(1) // a strictly lower conditional entry must exist
            }
        })
        .collect();
    let tilde_out: Vec<u64> = tilde
        .iter()
        .enumerate()
        .map(|(j, &t)| agents::offset_report(t, offset).min(hat_out[j + 1] - 1))
        .collect();
    (hat_out, tilde_out)
}

/// Best full contingent report row for one agent against the others' fixed
/// rows, by exhaustive enumeration. Ties go to the truthful row, then to the
/// lexicographically smallest.
pub(crate) fn best_table_m2(
    inst: &M2Instance,
    base_reports: &TypeTable,
    agent: usize,
) -> Result<(Vec<u64>, Vec<u64>)> {
    let stages = inst.truth.stages();
    let (true_hat, true_tilde) = inst.truth.agent_rows(agent);
    let truthful_reports =
        base_reports.with_agent_rows(agent, true_hat.to_vec(), true_tilde.to_vec())?;
    let mut best_total = m2_agent_best_total(
        &inst.truth,
        &truthful_reports,
        agent,
        &inst.econ.cost,
        inst.payment_mode,
    )?;
    let mut best_rows = (true_hat.to_vec(), true_tilde.to_vec());

    let mut meter = BudgetMeter::new(inst.budget);
    for (hat, tilde) in enumerate_report_rows(stages, inst.report_max) {
        meter.spend(stages as u64)?;
        let candidate = base_reports.with_agent_rows(agent, hat.clone(), tilde.clone())?;
        let total =
            m2_agent_best_total(&inst.truth, &candidate, agent, &inst.econ.cost, inst.payment_mode)?;
        if total > best_total {
            best_total = total;
            best_rows = (hat, tilde);
        }
    }
    Ok(best_rows)
}

/// Runs the lookahead mechanism end to end: collect full contingent report
/// tables up front, allocate by the path-total rule, let each stage winner
/// realize a misalignment under his gamma policy, settle.
pub fn run_m2(inst: &M2Instance) -> Result<Vec<Settlement>> {
    let n = inst.truth.agents();
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
    if !inst.econ.cost.is_linear() {
        return Err(Error::NonlinearCostUnsupported);
    }

    // pass 1: non-strategic tables, strategic agents provisionally truthful
    let mut hat_rows = Vec::with_capacity(n);
    let mut tilde_rows = Vec::with_capacity(n);
    for i in 0..n {
        let (h, t) = inst.truth.agent_rows(i);
        let (h, t) = match inst.strategies[i].kind {
            StrategyKind::Truthful | StrategyKind::BestResponse => (h.to_vec(), t.to_vec()),
            StrategyKind::FixedMisreport { offset } => offset_rows(h, t, offset),
        };
        hat_rows.push(h);
        tilde_rows.push(t);
    }
    let mut reports = TypeTable::new(hat_rows, tilde_rows)?;

    // pass 2: best responders optimize against the provisional tables
    for i in 0..n {
        if inst.strategies[i].is_best_response() {
            let (hat, tilde) = best_table_m2(inst, &reports, i)?;
            reports = reports.with_agent_rows(i, hat, tilde)?;
        }
    }

    let path = allocate_m2(&reports)?;
    let mut gammas = Vec::with_capacity(path.winners.len());
    let mut prev: Option<usize> = None;
    for k in 0..path.winners.len() {
        let w = path.winners[k].index();
        let true_eff = inst.truth.effective(w, k, prev);
        let ctx = GammaContext {
            cost: &inst.econ.cost,
            profit: &inst.econ.profit,
            payment: StagePayment::PathStage {
                base: stage_payment_base(&path, &inst.truth, k),
                deduct_gamma: inst.payment_mode == M2PaymentMode::Corrected,
            },
        };
        gammas.push(agents::choose_gamma(
            inst.strategies[w].gamma_policy,
            true_eff,
            path.effective_reports[k],
            &ctx,
        )?);
        prev = Some(w);
    }
    settle_m2(
        &path,
        &inst.truth,
        &gammas,
        &inst.econ.cost,
        &inst.econ.profit,
        inst.payment_mode,
    )
}
