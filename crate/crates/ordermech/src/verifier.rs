//! Brute-force oracles that certify or refute incentive compatibility (IC),
//! individual rationality (IR), social optimality (SO), and the defining
//! payment properties on small instances.
//!
//! Every check enumerates its whole quantifier space exactly — reports,
//! realized misalignments, peer profiles, allocation paths — and compares
//! exact rational payoffs, so a pass is a proof at desk scale and a fail
//! carries replayable counterexamples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    self, best_utility_static, AgentStrategy, BudgetMeter, GammaContext, GammaPolicy,
};
use crate::econ::{pay, CostFunction, Gating, PaymentRule, ProfitFunction};
use crate::error::{Error, Result};
use crate::mech_dynamic::{
    allocate_m2, enumerate_report_rows, m1_unilateral_total, m2_agent_best_total,
    stage_payment_base, AllocationPath, M2PaymentMode, TypeModel, TypeTable,
};
use crate::mech_static::{select_winner, settle, AgentId, BidProfile, EconSetup};
use crate::money::Money;

// ---------------------------------------------------------------------------
// Reports and witnesses
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    #[serde(rename = "IC")]
    Ic,
    #[serde(rename = "IR")]
    Ir,
    #[serde(rename = "SO")]
    So,
    #[serde(rename = "payment_props")]
    PaymentProps,
    #[serde(rename = "gamma_independence")]
    GammaIndependence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NonExhaustive,
}

/// Which feasibility restriction the lower payment property's existential
/// realized misalignment obeys: bounded by the winner's true type, or the
/// plain formula comparison over the whole grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaReading {
    Feasible,
    Formula,
}

/// The instance a witness refers to.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum InstanceDesc {
    Scalar { true_thetas: Vec<u64> },
    Fixed { rows: Vec<Vec<u64>> },
    Markov { hat: Vec<Vec<u64>>, tilde: Vec<Vec<u64>> },
}

impl InstanceDesc {
    pub fn markov(t: &TypeTable) -> Self {
        InstanceDesc::Markov { hat: t.hat_rows().to_vec(), tilde: t.tilde_rows().to_vec() }
    }

    pub fn from_model(types: &TypeModel) -> Self {
        match types {
            TypeModel::Fixed(rows) => InstanceDesc::Fixed { rows: rows.clone() },
            TypeModel::Markov(t) => InstanceDesc::markov(t),
        }
    }

    fn to_model(&self) -> Result<TypeModel> {
        match self {
            InstanceDesc::Scalar { true_thetas } => {
                TypeModel::fixed(true_thetas.iter().map(|&t| vec![t]).collect())
            }
            InstanceDesc::Fixed { rows } => TypeModel::fixed(rows.clone()),
            InstanceDesc::Markov { hat, tilde } => {
                Ok(TypeModel::Markov(TypeTable::new(hat.clone(), tilde.clone())?))
            }
        }
    }
}

/// A counterexample. Each variant carries everything needed to replay the
/// recorded payoffs exactly through the mechanism itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A winner whose true misalignment reaches the runner-up bid is paid
    /// more than his cost.
    PaymentUpperBound {
        theta: u64,
        theta_bar: u64,
        theta_reported: u64,
        gamma: u64,
        payment: Money,
        cost: Money,
    },
    /// No profitable realized misalignment exists for a winner strictly below
    /// the runner-up bid.
    PaymentLowerBound { theta: u64, theta_bar: u64, reading: GammaReading },
    IcStatic {
        agent: AgentId,
        true_theta: u64,
        /// Full report profile with the agent's slot holding his truthful
        /// report.
        reports_truthful: Vec<u64>,
        deviation_report: u64,
        /// Present for deviations that overshoot the report and trigger
        /// gating; absent when the deviation utility is the gamma-argmax.
        deviation_gamma: Option<u64>,
        truthful_utility: Money,
        deviation_utility: Money,
    },
    IcSequence {
        agent: AgentId,
        instance: InstanceDesc,
        deviation_reports: Vec<u64>,
        truthful_utility: Money,
        deviation_utility: Money,
    },
    IcTable {
        agent: AgentId,
        instance: InstanceDesc,
        deviation_hat: Vec<u64>,
        deviation_tilde: Vec<u64>,
        truthful_utility: Money,
        deviation_utility: Money,
    },
    IrViolation {
        agent: AgentId,
        /// 1-based stage.
        stage: usize,
        instance: InstanceDesc,
        utility: Money,
    },
    SoGap {
        instance: InstanceDesc,
        mechanism_welfare: Money,
        oracle_welfare: Money,
    },
    GammaDependence {
        instance: InstanceDesc,
        /// 1-based stage.
        stage: usize,
        gamma_low: u64,
        gamma_high: u64,
        utility_low: Money,
        utility_high: Money,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub property: Property,
    pub status: CheckStatus,
    pub witnesses: Vec<Witness>,
    pub instances_checked: u64,
}

impl VerificationReport {
    fn conclude(
        property: Property,
        witnesses: Vec<Witness>,
        instances_checked: u64,
        exhausted: bool,
    ) -> Self {
        let status = if !witnesses.is_empty() {
            CheckStatus::Fail
        } else if !exhausted {
            CheckStatus::NonExhaustive
        } else {
            CheckStatus::Pass
        };
        VerificationReport { property, status, witnesses, instances_checked }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Scalar-type grid for the single-auction and per-stage checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticGrid {
    pub agent_counts: Vec<usize>,
    pub theta_max: u64,
}

impl Default for StaticGrid {
    fn default() -> Self {
        StaticGrid { agent_counts: vec![2, 3], theta_max: 6 }
    }
}

/// Markov-table grid for the lookahead-mechanism checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovGrid {
    pub agents: usize,
    pub stages: usize,
    pub entry_max: u64,
}

impl Default for MarkovGrid {
    fn default() -> Self {
        MarkovGrid { agents: 2, stages: 2, entry_max: 4 }
    }
}

/// Advance `profile` to the next point of `[0, max]^len` in lexicographic
/// order; false once exhausted.
fn next_profile(profile: &mut [u64], max: u64) -> bool {
    let mut pos = profile.len();
    while pos > 0 {
        pos -= 1;
        if profile[pos] < max {
            profile[pos] += 1;
            return true;
        }
        profile[pos] = 0;
    }
    false
}

/// Every Markov type table over the grid: per agent, each unconditional
/// first-stage entry in `[0, entry_max]` and each later stage an
/// (unconditional, strictly lower conditional) pair.
pub fn enumerate_markov_tables(grid: &MarkovGrid) -> Vec<TypeTable> {
    let rows = enumerate_report_rows(grid.stages, grid.entry_max);
    let mut out = Vec::new();
    let mut idx = vec![0usize; grid.agents];
    loop {
        let hat: Vec<Vec<u64>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let tilde: Vec<Vec<u64>> = idx.iter().map(|&i| rows[i].1.clone()).collect();
        out.push(TypeTable::new(hat, tilde).expect("enumerated rows are valid"));
        let mut pos = grid.agents;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] + 1 < rows.len() {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Seeded random Markov tables (uniform per entry, conditional entries
/// uniform below their unconditional partner).
pub fn sample_markov_tables(
    seed: u64,
    count: usize,
    agents: usize,
    stages: usize,
    entry_max: u64,
) -> Vec<TypeTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut hat = Vec::with_capacity(agents);
            let mut tilde = Vec::with_capacity(agents);
            for _ in 0..agents {
                let mut h = Vec::with_capacity(stages);
                let mut t = Vec::with_capacity(stages.saturating_sub(1));
                h.push(rng.gen_range(0..=entry_max));
                for _ in 1..stages {
                    let hk = rng.gen_range(1..=entry_max.max(1));
                    t.push(rng.gen_range(0..hk));
                    h.push(hk);
                }
                hat.push(h);
                tilde.push(t);
            }
            TypeTable::new(hat, tilde).expect("sampled rows are valid")
        })
        .collect()
}

/// Seeded random fixed-type matrices (`rows[i][k]` uniform in
/// `[0, theta_max]`).
pub fn sample_fixed_matrices(
    seed: u64,
    count: usize,
    agents: usize,
    stages: usize,
    theta_max: u64,
) -> Vec<Vec<Vec<u64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..agents)
                .map(|_| (0..stages).map(|_| rng.gen_range(0..=theta_max)).collect())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Payment properties
// ---------------------------------------------------------------------------

/// Checks the two defining payment properties over the integer grid
/// `[0, grid_max]`, quantifying the winner's report over the whole grid:
///
/// - upper: a winner with `theta >= theta_bar` is never paid more than his
///   cost, for any report and any feasible realized misalignment;
/// - lower: a winner with `theta < theta_bar` has some profitable choice.
///   The existential is evaluated under both feasibility readings and any
///   failing pair is reported per reading.
pub fn check_payment_properties(
    rule: &PaymentRule,
    cost: &CostFunction,
    grid_max: u64,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;

    'upper: for theta_bar in 0..=grid_max {
        for theta in theta_bar..=grid_max {
            for reported in 0..=grid_max {
                let gamma_cap = match rule.gating {
                    Gating::Off => theta,
                    _ => theta.min(reported),
                };
                for gamma in 0..=gamma_cap {
                    checked += 1;
                    let p = pay(rule, theta_bar, reported, gamma, cost)?;
                    let h = cost.evaluate(theta, gamma)?;
                    if p.amount > h {
                        witnesses.push(Witness::PaymentUpperBound {
                            theta,
                            theta_bar,
                            theta_reported: reported,
                            gamma,
                            payment: p.amount,
                            cost: h,
                        });
                        break 'upper;
                    }
                }
            }
        }
    }

    for reading in [GammaReading::Feasible, GammaReading::Formula] {
        for theta_bar in 1..=grid_max {
            for theta in 0..theta_bar {
                checked += 1;
                let mut profitable = false;
                'search: for reported in 0..=grid_max {
                    let gamma_cap = match reading {
                        GammaReading::Feasible => match rule.gating {
                            Gating::Off => theta,
                            _ => theta.min(reported),
                        },
                        GammaReading::Formula => grid_max,
                    };
                    for gamma in 0..=gamma_cap {
                        let p = pay(rule, theta_bar, reported, gamma, cost)?;
                        let h = match reading {
                            GammaReading::Feasible => cost.evaluate(theta, gamma)?,
                            GammaReading::Formula => cost.formula(theta, gamma),
                        };
                        if p.amount > h {
                            profitable = true;
                            break 'search;
                        }
                    }
                }
                if !profitable {
                    witnesses.push(Witness::PaymentLowerBound { theta, theta_bar, reading });
                }
            }
        }
    }

    Ok(VerificationReport::conclude(Property::PaymentProps, witnesses, checked, true))
}

// ---------------------------------------------------------------------------
// Single-auction checks
// ---------------------------------------------------------------------------

fn insert_at(peers: &[u64], index: usize, value: u64) -> Vec<u64> {
    let mut profile = Vec::with_capacity(peers.len() + 1);
    profile.extend_from_slice(&peers[..index]);
    profile.push(value);
    profile.extend_from_slice(&peers[index..]);
    profile
}

fn wins_with(profile: &[u64], agent: usize) -> bool {
    let r = profile[agent];
    profile.iter().enumerate().all(|(i, &other)| {
        if i == agent {
            true
        } else if i < agent {
            other > r // an earlier agent at the same bid would take the tie
        } else {
            other >= r
        }
    })
}

/// Dominant-strategy incentive compatibility of the single auction: for every
/// agent position, true type, and profile of peer reports over the grid, no
/// unilateral deviation — any report, any feasible realized misalignment,
/// including overshoots that trigger gating — beats truthful reporting with
/// an optimal realization.
pub fn check_ic_static(
    econ: &EconSetup,
    grid: &StaticGrid,
    budget: u64,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    let mut exhausted = true;
    let mut meter = BudgetMeter::new(budget);

    'outer: for &n in &grid.agent_counts {
        if n < 2 {
            return Err(Error::InsufficientAgents(n));
        }
        for agent in 0..n {
            for theta in 0..=grid.theta_max {
                let mut peers = vec![0u64; n - 1];
                loop {
                    checked += 1;
                    let truthful_profile = insert_at(&peers, agent, theta);
                    let truthful_u = match best_utility_static(
                        theta,
                        theta,
                        agent,
                        &truthful_profile,
                        econ,
                        &mut meter,
                    ) {
                        Ok(u) => u,
                        Err(Error::BudgetExceeded { .. }) => {
                            exhausted = false;
                            break 'outer;
                        }
                        Err(e) => return Err(e),
                    };

                    for report in 0..=grid.theta_max {
                        let profile = insert_at(&peers, agent, report);
                        let dev_u = match best_utility_static(
                            theta,
                            report,
                            agent,
                            &profile,
                            econ,
                            &mut meter,
                        ) {
                            Ok(u) => u,
                            Err(Error::BudgetExceeded { .. }) => {
                                exhausted = false;
                                break 'outer;
                            }
                            Err(e) => return Err(e),
                        };
                        if dev_u > truthful_u {
                            witnesses.push(Witness::IcStatic {
                                agent: AgentId::from_index(agent),
                                true_theta: theta,
                                reports_truthful: truthful_profile.clone(),
                                deviation_report: report,
                                deviation_gamma: None,
                                truthful_utility: truthful_u.clone(),
                                deviation_utility: dev_u,
                            });
                        }
                        // overshoot sweep: realizes more than reported,
                        // triggering the rule's gating response
                        if report < theta && wins_with(&profile, agent) {
                            let theta_bar = profile
                                .iter()
                                .enumerate()
                                .filter(|&(i, _)| i != agent)
                                .map(|(_, &r)| r)
                                .min()
                                .expect("n >= 2");
                            for gamma in report + 1..=theta {
                                if meter.spend(1).is_err() {
                                    exhausted = false;
                                    break 'outer;
                                }
                                let u = pay(&econ.payment, theta_bar, report, gamma, &econ.cost)?
                                    .amount
                                    - econ.cost.evaluate(theta, gamma)?;
                                if u > truthful_u {
                                    witnesses.push(Witness::IcStatic {
                                        agent: AgentId::from_index(agent),
                                        true_theta: theta,
                                        reports_truthful: truthful_profile.clone(),
                                        deviation_report: report,
                                        deviation_gamma: Some(gamma),
                                        truthful_utility: truthful_u.clone(),
                                        deviation_utility: u,
                                    });
                                }
                            }
                        }
                    }

                    if !next_profile(&mut peers, grid.theta_max) {
                        break;
                    }
                }
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ic, witnesses, checked, exhausted))
}

/// Individual rationality on the truthful equilibrium path: every agent's
/// settled utility is non-negative on every grid instance (non-winners are
/// structurally at zero).
pub fn check_ir_static(
    econ: &EconSetup,
    grid: &StaticGrid,
    policy: GammaPolicy,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for &n in &grid.agent_counts {
        if n < 2 {
            return Err(Error::InsufficientAgents(n));
        }
        let mut thetas = vec![0u64; n];
        loop {
            checked += 1;
            let settlement = truthful_static_run(&thetas, econ, policy)?;
            for (i, u) in settlement.agent_utilities.iter().enumerate() {
                if u.is_negative() {
                    witnesses.push(Witness::IrViolation {
                        agent: AgentId::from_index(i),
                        stage: 1,
                        instance: InstanceDesc::Scalar { true_thetas: thetas.clone() },
                        utility: u.clone(),
                    });
                }
            }
            if !next_profile(&mut thetas, grid.theta_max) {
                break;
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ir, witnesses, checked, true))
}

fn truthful_static_run(
    thetas: &[u64],
    econ: &EconSetup,
    policy: GammaPolicy,
) -> Result<crate::mech_static::Settlement> {
    let auction = select_winner(&BidProfile::new(thetas.to_vec())?);
    let w = auction.winner.index();
    let ctx = GammaContext::auction(econ, auction.theta_bar);
    let gamma = agents::choose_gamma(policy, thetas[w], auction.reports[w], &ctx)?;
    settle(&auction, thetas[w], gamma, econ)
}

/// How reports are formed when measuring realized welfare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportBehavior {
    Truthful,
    BestResponse,
}

/// Exhaustive welfare maximum for a single auction: over every winner and
/// every feasible realized misalignment. Ties resolve to the smallest winner
/// id, then the smallest realization.
pub fn social_optimum_static(
    true_thetas: &[u64],
    cost: &CostFunction,
    profit: &ProfitFunction,
) -> Result<SocialOptimum> {
    let mut best: Option<(usize, u64, Money)> = None;
    for (w, &theta) in true_thetas.iter().enumerate() {
        for gamma in 0..=theta {
            let welfare = profit.evaluate(gamma) - cost.evaluate(theta, gamma)?;
            if best.as_ref().is_none_or(|(_, _, b)| welfare > *b) {
                best = Some((w, gamma, welfare));
            }
        }
    }
    let (w, gamma, welfare) = best.ok_or(Error::InsufficientAgents(0))?;
    Ok(SocialOptimum {
        winners: vec![AgentId::from_index(w)],
        gammas: vec![gamma],
        welfare,
    })
}

/// An exhaustive welfare optimum: the winner (per stage), the realized
/// misalignments, and the exact welfare value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SocialOptimum {
    pub winners: Vec<AgentId>,
    pub gammas: Vec<u64>,
    pub welfare: Money,
}

/// Exhaustive welfare maximum over all winner paths and per-stage feasible
/// realizations for a multi-stage instance (effective types track the path).
/// Ties resolve to the lexicographically smallest path, then smallest
/// realizations.
pub fn social_optimum_path(
    types: &TypeModel,
    cost: &CostFunction,
    profit: &ProfitFunction,
) -> Result<SocialOptimum> {
    let n = types.agents();
    let stages = types.stages();
    let mut path = vec![0usize; stages];
    let mut best: Option<SocialOptimum> = None;
    loop {
        let mut welfare = Money::zero();
        let mut gammas = Vec::with_capacity(stages);
        let mut prev: Option<usize> = None;
        for (k, &w) in path.iter().enumerate() {
            let eff = types.effective(w, k, prev);
            let mut stage_best: Option<(u64, Money)> = None;
            for gamma in 0..=eff {
                let v = profit.evaluate(gamma) - cost.evaluate(eff, gamma)?;
                if stage_best.as_ref().is_none_or(|(_, b)| v > *b) {
                    stage_best = Some((gamma, v));
                }
            }
            let (gamma, v) = stage_best.expect("gamma 0 is feasible");
            gammas.push(gamma);
            welfare += &v;
            prev = Some(w);
        }
        if best.as_ref().is_none_or(|b| welfare > b.welfare) {
            best = Some(SocialOptimum {
                winners: path.iter().map(|&w| AgentId::from_index(w)).collect(),
                gammas,
                welfare,
            });
        }
        // next path in lexicographic order
        let mut pos = stages;
        loop {
            if pos == 0 {
                return best.ok_or(Error::InsufficientAgents(n));
            }
            pos -= 1;
            if path[pos] + 1 < n {
                path[pos] += 1;
                break;
            }
            path[pos] = 0;
        }
    }
}

/// Social optimality of the single auction: realized welfare (under the given
/// report behavior and gamma policy) equals the exhaustive optimum exactly,
/// on every grid instance.
pub fn check_so_static(
    econ: &EconSetup,
    grid: &StaticGrid,
    behavior: ReportBehavior,
    policy: GammaPolicy,
    budget: u64,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for &n in &grid.agent_counts {
        if n < 2 {
            return Err(Error::InsufficientAgents(n));
        }
        let mut thetas = vec![0u64; n];
        loop {
            checked += 1;
            let welfare = realized_static_welfare(&thetas, econ, behavior, policy, grid, budget)?;
            let optimum = social_optimum_static(&thetas, &econ.cost, &econ.profit)?;
            if welfare != optimum.welfare {
                witnesses.push(Witness::SoGap {
                    instance: InstanceDesc::Scalar { true_thetas: thetas.clone() },
                    mechanism_welfare: welfare,
                    oracle_welfare: optimum.welfare,
                });
            }
            if !next_profile(&mut thetas, grid.theta_max) {
                break;
            }
        }
    }
    Ok(VerificationReport::conclude(Property::So, witnesses, checked, true))
}

fn realized_static_welfare(
    thetas: &[u64],
    econ: &EconSetup,
    behavior: ReportBehavior,
    policy: GammaPolicy,
    grid: &StaticGrid,
    budget: u64,
) -> Result<Money> {
    let reports = match behavior {
        ReportBehavior::Truthful => thetas.to_vec(),
        ReportBehavior::BestResponse => {
            let strategy = AgentStrategy::best_response();
            let mut reports = thetas.to_vec();
            for i in 0..thetas.len() {
                let ctx = agents::ReportContext {
                    econ,
                    agent_index: i,
                    report_max: grid.theta_max,
                    budget,
                };
                reports[i] = agents::choose_report(&strategy, thetas[i], &ctx, thetas)?;
            }
            reports
        }
    };
    let auction = select_winner(&BidProfile::new(reports)?);
    let w = auction.winner.index();
    let ctx = GammaContext::auction(econ, auction.theta_bar);
    let gamma = agents::choose_gamma(policy, thetas[w], auction.reports[w], &ctx)?;
    Ok(settle(&auction, thetas[w], gamma, econ)?.welfare)
}

/// Closed-form utility sweep for the linear second-price rule: the truthful
/// winner's settled utility equals `theta_bar - theta_w` at every feasible
/// realized misalignment, on every grid instance.
pub fn check_gamma_independence_static(
    econ: &EconSetup,
    grid: &StaticGrid,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for &n in &grid.agent_counts {
        let mut thetas = vec![0u64; n];
        loop {
            checked += 1;
            let auction = select_winner(&BidProfile::new(thetas.to_vec())?);
            let w = auction.winner.index();
            let expected =
                Money::from_int(auction.theta_bar as i64 - thetas[w] as i64);
            for gamma in 0..=thetas[w] {
                let s = settle(&auction, thetas[w], gamma, econ)?;
                if s.agent_utilities[w] != expected {
                    witnesses.push(Witness::GammaDependence {
                        instance: InstanceDesc::Scalar { true_thetas: thetas.clone() },
                        stage: 1,
                        gamma_low: 0,
                        gamma_high: gamma,
                        utility_low: expected.clone(),
                        utility_high: s.agent_utilities[w].clone(),
                    });
                    break;
                }
            }
            if !next_profile(&mut thetas, grid.theta_max) {
                break;
            }
        }
    }
    Ok(VerificationReport::conclude(Property::GammaIndependence, witnesses, checked, true))
}

// ---------------------------------------------------------------------------
// Repeated-mechanism checks (fixed types)
// ---------------------------------------------------------------------------

/// IC of the repeated mechanism on fixed types. Stage games are independent,
/// so the exhaustive dominant-strategy scan of the single auction covers
/// every stage's marginal game; on top of that, seeded multi-stage instances
/// are checked against exhaustive whole-sequence deviations (peers truthful).
pub fn check_ic_m1_fixed(
    econ: &EconSetup,
    grid: &StaticGrid,
    stages: usize,
    samples: usize,
    seed: u64,
    budget: u64,
) -> Result<VerificationReport> {
    let static_report = check_ic_static(econ, grid, budget)?;
    let mut witnesses = static_report.witnesses;
    let mut checked = static_report.instances_checked;
    let mut exhausted = static_report.status != CheckStatus::NonExhaustive;

    for &n in &grid.agent_counts {
        let matrices = sample_fixed_matrices(
            seed.wrapping_add(n as u64),
            samples,
            n,
            stages,
            grid.theta_max,
        );
        let mut meter = BudgetMeter::new(budget);
        'matrices: for rows in matrices {
            checked += 1;
            let types = TypeModel::fixed(rows.clone())?;
            for agent in 0..n {
                let truthful_u = m1_unilateral_total(&types, econ, agent, None)?;
                let mut seq = vec![0u64; stages];
                loop {
                    if meter.spend(stages as u64).is_err() {
                        exhausted = false;
                        break 'matrices;
                    }
                    let dev_u = m1_unilateral_total(&types, econ, agent, Some(&seq))?;
                    if dev_u > truthful_u {
                        witnesses.push(Witness::IcSequence {
                            agent: AgentId::from_index(agent),
                            instance: InstanceDesc::Fixed { rows: rows.clone() },
                            deviation_reports: seq.clone(),
                            truthful_utility: truthful_u.clone(),
                            deviation_utility: dev_u,
                        });
                    }
                    if !next_profile(&mut seq, grid.theta_max) {
                        break;
                    }
                }
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ic, witnesses, checked, exhausted))
}

/// IR of the repeated mechanism on fixed types: the single-auction check per
/// stage plus truthful multi-stage runs on seeded instances.
pub fn check_ir_m1_fixed(
    econ: &EconSetup,
    grid: &StaticGrid,
    stages: usize,
    samples: usize,
    seed: u64,
    policy: GammaPolicy,
) -> Result<VerificationReport> {
    let static_report = check_ir_static(econ, grid, policy)?;
    let mut witnesses = static_report.witnesses;
    let mut checked = static_report.instances_checked;

    for &n in &grid.agent_counts {
        for rows in sample_fixed_matrices(
            seed.wrapping_add(n as u64),
            samples,
            n,
            stages,
            grid.theta_max,
        ) {
            checked += 1;
            let types = TypeModel::fixed(rows.clone())?;
            let inst = crate::mech_dynamic::M1Instance {
                types,
                strategies: vec![AgentStrategy { gamma_policy: policy, ..Default::default() }; n],
                econ: econ.clone(),
                report_max: grid.theta_max,
                budget: agents::DEFAULT_BUDGET,
            };
            for (k, s) in crate::mech_dynamic::run_m1(&inst)?.iter().enumerate() {
                for (i, u) in s.agent_utilities.iter().enumerate() {
                    if u.is_negative() {
                        witnesses.push(Witness::IrViolation {
                            agent: AgentId::from_index(i),
                            stage: k + 1,
                            instance: InstanceDesc::Fixed { rows: rows.clone() },
                            utility: u.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ir, witnesses, checked, true))
}

/// SO of the repeated mechanism on fixed types: the single-auction check per
/// stage plus truthful multi-stage runs compared to the exhaustive path
/// optimum on seeded instances.
pub fn check_so_m1_fixed(
    econ: &EconSetup,
    grid: &StaticGrid,
    stages: usize,
    samples: usize,
    seed: u64,
    policy: GammaPolicy,
) -> Result<VerificationReport> {
    let static_report = check_so_static(econ, grid, ReportBehavior::Truthful, policy, agents::DEFAULT_BUDGET)?;
    let mut witnesses = static_report.witnesses;
    let mut checked = static_report.instances_checked;

    for &n in &grid.agent_counts {
        for rows in sample_fixed_matrices(
            seed.wrapping_add(n as u64),
            samples,
            n,
            stages,
            grid.theta_max,
        ) {
            checked += 1;
            let types = TypeModel::fixed(rows.clone())?;
            let inst = crate::mech_dynamic::M1Instance {
                types: types.clone(),
                strategies: vec![AgentStrategy { gamma_policy: policy, ..Default::default() }; n],
                econ: econ.clone(),
                report_max: grid.theta_max,
                budget: agents::DEFAULT_BUDGET,
            };
            let welfare: Money =
                crate::mech_dynamic::run_m1(&inst)?.iter().map(|s| s.welfare.clone()).sum();
            let optimum = social_optimum_path(&types, &econ.cost, &econ.profit)?;
            if welfare != optimum.welfare {
                witnesses.push(Witness::SoGap {
                    instance: InstanceDesc::Fixed { rows: rows.clone() },
                    mechanism_welfare: welfare,
                    oracle_welfare: optimum.welfare,
                });
            }
        }
    }
    Ok(VerificationReport::conclude(Property::So, witnesses, checked, true))
}

/// IC of the repeated mechanism on a single Markov-type instance: exhaustive
/// whole-sequence deviations for each agent against truthful peers. This is
/// where one-step type dynamics break the per-stage mechanism.
pub fn check_ic_m1_dynamic(
    truth: &TypeTable,
    econ: &EconSetup,
    report_max: u64,
    budget: u64,
) -> Result<VerificationReport> {
    let types = TypeModel::Markov(truth.clone());
    let n = truth.agents();
    let stages = truth.stages();
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    let mut exhausted = true;
    let mut meter = BudgetMeter::new(budget);

    'agents: for agent in 0..n {
        checked += 1;
        let truthful_u = m1_unilateral_total(&types, econ, agent, None)?;
        let mut seq = vec![0u64; stages];
        loop {
            if meter.spend(stages as u64).is_err() {
                exhausted = false;
                break 'agents;
            }
            let dev_u = m1_unilateral_total(&types, econ, agent, Some(&seq))?;
            if dev_u > truthful_u {
                witnesses.push(Witness::IcSequence {
                    agent: AgentId::from_index(agent),
                    instance: InstanceDesc::markov(truth),
                    deviation_reports: seq.clone(),
                    truthful_utility: truthful_u.clone(),
                    deviation_utility: dev_u,
                });
            }
            if !next_profile(&mut seq, report_max) {
                break;
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ic, witnesses, checked, exhausted))
}

// ---------------------------------------------------------------------------
// Lookahead-mechanism checks (Markov types)
// ---------------------------------------------------------------------------

/// IC of the lookahead mechanism: over every Markov table in the grid and
/// every unilateral contingent-report deviation (peers truthful), the
/// deviator's achievable total utility never exceeds the truthful one.
pub fn check_ic_m2(
    cost: &CostFunction,
    grid: &MarkovGrid,
    mode: M2PaymentMode,
    budget: u64,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    let mut exhausted = true;
    let mut meter = BudgetMeter::new(budget);
    let deviations = enumerate_report_rows(grid.stages, grid.entry_max);

    'tables: for truth in enumerate_markov_tables(grid) {
        for agent in 0..grid.agents {
            checked += 1;
            let truthful_u = m2_agent_best_total(&truth, &truth, agent, cost, mode)?;
            for (hat, tilde) in &deviations {
                if meter.spend(grid.stages as u64).is_err() {
                    exhausted = false;
                    break 'tables;
                }
                let reports = truth.with_agent_rows(agent, hat.clone(), tilde.clone())?;
                let dev_u = m2_agent_best_total(&truth, &reports, agent, cost, mode)?;
                if dev_u > truthful_u {
                    witnesses.push(Witness::IcTable {
                        agent: AgentId::from_index(agent),
                        instance: InstanceDesc::markov(&truth),
                        deviation_hat: hat.clone(),
                        deviation_tilde: tilde.clone(),
                        truthful_utility: truthful_u.clone(),
                        deviation_utility: dev_u,
                    });
                }
            }
        }
    }
    Ok(VerificationReport::conclude(Property::Ic, witnesses, checked, exhausted))
}

/// IR of the lookahead mechanism: on truthful reports, every stage winner's
/// utility is non-negative on every grid table.
pub fn check_ir_m2(
    cost: &CostFunction,
    grid: &MarkovGrid,
    mode: M2PaymentMode,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for truth in enumerate_markov_tables(grid) {
        checked += 1;
        let path = allocate_m2(&truth)?;
        let mut prev: Option<usize> = None;
        for k in 0..path.winners.len() {
            let w = path.winners[k].index();
            let true_eff = truth.effective(w, k, prev);
            let base = stage_payment_base(&path, &truth, k);
            let hi = true_eff.min(path.effective_reports[k]);
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
            let u = best.expect("gamma 0 is feasible");
            if u.is_negative() {
                witnesses.push(Witness::IrViolation {
                    agent: path.winners[k],
                    stage: k + 1,
                    instance: InstanceDesc::markov(&truth),
                    utility: u,
                });
            }
            prev = Some(w);
        }
    }
    Ok(VerificationReport::conclude(Property::Ir, witnesses, checked, true))
}

/// SO of the lookahead mechanism: truthful reports, welfare-respecting
/// realization choices, welfare equal to the exhaustive path optimum on
/// every grid table.
pub fn check_so_m2(
    cost: &CostFunction,
    profit: &ProfitFunction,
    grid: &MarkovGrid,
    mode: M2PaymentMode,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for truth in enumerate_markov_tables(grid) {
        checked += 1;
        let welfare = truthful_m2_welfare(&truth, cost, profit, mode)?;
        let optimum = social_optimum_path(&TypeModel::Markov(truth.clone()), cost, profit)?;
        if welfare != optimum.welfare {
            witnesses.push(Witness::SoGap {
                instance: InstanceDesc::markov(&truth),
                mechanism_welfare: welfare,
                oracle_welfare: optimum.welfare,
            });
        }
    }
    Ok(VerificationReport::conclude(Property::So, witnesses, checked, true))
}

fn truthful_m2_welfare(
    truth: &TypeTable,
    cost: &CostFunction,
    profit: &ProfitFunction,
    mode: M2PaymentMode,
) -> Result<Money> {
    let path = allocate_m2(truth)?;
    let mut gammas = Vec::with_capacity(path.winners.len());
    let mut prev: Option<usize> = None;
    for k in 0..path.winners.len() {
        let w = path.winners[k].index();
        let true_eff = truth.effective(w, k, prev);
        let ctx = GammaContext {
            cost,
            profit,
            payment: agents::StagePayment::PathStage {
                base: stage_payment_base(&path, truth, k),
                deduct_gamma: mode == M2PaymentMode::Corrected,
            },
        };
        gammas.push(agents::choose_gamma(
            GammaPolicy::Social,
            true_eff,
            path.effective_reports[k],
            &ctx,
        )?);
        prev = Some(w);
    }
    let runs =
        crate::mech_dynamic::settle_m2(&path, truth, &gammas, cost, profit, mode)?;
    Ok(runs.iter().map(|s| s.welfare.clone()).sum())
}

/// Gamma-independence of the lookahead stage utilities: on truthful reports,
/// a stage winner's utility is the same at every feasible realized
/// misalignment. Holds with the corrected payment; the literal payment mode
/// produces witnesses.
pub fn check_gamma_independence_m2(
    cost: &CostFunction,
    grid: &MarkovGrid,
    mode: M2PaymentMode,
) -> Result<VerificationReport> {
    let mut witnesses = Vec::new();
    let mut checked = 0u64;
    for truth in enumerate_markov_tables(grid) {
        checked += 1;
        let path = allocate_m2(&truth)?;
        let mut prev: Option<usize> = None;
        for k in 0..path.winners.len() {
            let w = path.winners[k].index();
            let true_eff = truth.effective(w, k, prev);
            let hi = true_eff.min(path.effective_reports[k]);
            let base = stage_payment_base(&path, &truth, k);
            let utility = |gamma: u64| -> Result<Money> {
                let amount = match mode {
                    M2PaymentMode::Corrected => base.clone() - Money::from_u64(gamma),
                    M2PaymentMode::Literal => base.clone(),
                };
                Ok(amount - cost.evaluate(true_eff, gamma)?)
            };
            let low = utility(0)?;
            let high = utility(hi)?;
            if low != high {
                witnesses.push(Witness::GammaDependence {
                    instance: InstanceDesc::markov(&truth),
                    stage: k + 1,
                    gamma_low: 0,
                    gamma_high: hi,
                    utility_low: low,
                    utility_high: high,
                });
                prev = Some(w);
                continue;
            }
            prev = Some(w);
        }
    }
    Ok(VerificationReport::conclude(Property::GammaIndependence, witnesses, checked, true))
}

// ---------------------------------------------------------------------------
// Allocation cross-checks
// ---------------------------------------------------------------------------

/// Independent argmin over all winner paths by plain enumeration, with the
/// same lexicographic tie-break the dynamic program uses. Cross-checks the
/// DP without sharing any of its code path.
pub fn min_total_path_bruteforce(reports: &TypeTable) -> (Vec<AgentId>, u64) {
    let n = reports.agents();
    let stages = reports.stages();
    let mut path = vec![0usize; stages];
    let mut best: Option<(Vec<usize>, u64)> = None;
    loop {
        let mut total = 0u64;
        let mut prev: Option<usize> = None;
        for (k, &w) in path.iter().enumerate() {
            total += reports.effective(w, k, prev);
            prev = Some(w);
        }
        if best.as_ref().is_none_or(|(_, b)| total < *b) {
            best = Some((path.clone(), total));
        }
        let mut pos = stages;
        loop {
            if pos == 0 {
                let (p, t) = best.expect("at least one path");
                return (p.into_iter().map(AgentId::from_index).collect(), t);
            }
            pos -= 1;
            if path[pos] + 1 < n {
                path[pos] += 1;
                break;
            }
            path[pos] = 0;
        }
    }
}

/// Structural conditions the chosen path must satisfy: the final stage is an
/// argmin of effective final-stage reports, and on two-stage instances the
/// first-stage winner weakly beats handing the stage to the runner-up
/// (accounting for his own conditional drop when he also takes stage two).
pub fn allocation_case_conditions_hold(reports: &TypeTable, path: &AllocationPath) -> bool {
    let stages = reports.stages();
    let last = stages - 1;
    let prev = if stages >= 2 { Some(path.winners[last - 1].index()) } else { None };
    let min_last = (0..reports.agents())
        .map(|i| reports.effective(i, last, prev))
        .min()
        .expect("non-empty");
    if path.effective_reports[last] != min_last {
        return false;
    }
    if stages == 2 {
        let w = path.winners[0].index();
        let (hat, tilde) = reports.agent_rows(w);
        let own = reports.effective(w, 0, None);
        if path.winners[1].index() == w {
            if own + tilde[0] > path.theta_bars[0] + hat[1] {
                return false;
            }
        } else if own > path.theta_bars[0] {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Witness replay
// ---------------------------------------------------------------------------

/// Context a witness is replayed under: the same economic setup and policies
/// the original check ran with.
pub struct ReplayContext<'a> {
    pub econ: &'a EconSetup,
    pub payment_mode: M2PaymentMode,
    pub gamma_policy: GammaPolicy,
    pub report_behavior: ReportBehavior,
    pub grid: StaticGrid,
    pub budget: u64,
}

impl<'a> ReplayContext<'a> {
    pub fn new(econ: &'a EconSetup) -> Self {
        ReplayContext {
            econ,
            payment_mode: M2PaymentMode::Corrected,
            gamma_policy: GammaPolicy::Social,
            report_behavior: ReportBehavior::Truthful,
            grid: StaticGrid::default(),
            budget: agents::DEFAULT_BUDGET,
        }
    }
}

/// Re-derives a witness's recorded quantities by re-running the mechanism;
/// true iff everything reproduces exactly.
pub fn replay_witness(witness: &Witness, ctx: &ReplayContext) -> Result<bool> {
    match witness {
        Witness::PaymentUpperBound { theta, theta_bar, theta_reported, gamma, payment, cost } => {
            let p = pay(&ctx.econ.payment, *theta_bar, *theta_reported, *gamma, &ctx.econ.cost)?;
            let h = ctx.econ.cost.evaluate(*theta, *gamma)?;
            Ok(p.amount == *payment && h == *cost && p.amount > h)
        }
        Witness::PaymentLowerBound { theta, theta_bar, reading } => {
            let g = ctx.grid.theta_max;
            for reported in 0..=g {
                let cap = match reading {
                    GammaReading::Feasible => match ctx.econ.payment.gating {
                        Gating::Off => *theta,
                        _ => (*theta).min(reported),
                    },
                    GammaReading::Formula => g,
                };
                for gamma in 0..=cap {
                    let p = pay(&ctx.econ.payment, *theta_bar, reported, gamma, &ctx.econ.cost)?;
                    let h = match reading {
                        GammaReading::Feasible => ctx.econ.cost.evaluate(*theta, gamma)?,
                        GammaReading::Formula => ctx.econ.cost.formula(*theta, gamma),
                    };
                    if p.amount > h {
                        return Ok(false); // a profitable choice exists after all
                    }
                }
            }
            Ok(true)
        }
        Witness::IcStatic {
            agent,
            true_theta,
            reports_truthful,
            deviation_report,
            deviation_gamma,
            truthful_utility,
            deviation_utility,
        } => {
            let idx = agent.index();
            let mut meter = BudgetMeter::new(ctx.budget);
            let truthful = best_utility_static(
                *true_theta,
                *true_theta,
                idx,
                reports_truthful,
                ctx.econ,
                &mut meter,
            )?;
            let mut profile = reports_truthful.clone();
            profile[idx] = *deviation_report;
            let dev = match deviation_gamma {
                None => best_utility_static(
                    *true_theta,
                    *deviation_report,
                    idx,
                    &profile,
                    ctx.econ,
                    &mut meter,
                )?,
                Some(gamma) => {
                    let theta_bar = profile
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != idx)
                        .map(|(_, &r)| r)
                        .min()
                        .ok_or(Error::InsufficientAgents(profile.len()))?;
                    pay(&ctx.econ.payment, theta_bar, *deviation_report, *gamma, &ctx.econ.cost)?
                        .amount
                        - ctx.econ.cost.evaluate(*true_theta, *gamma)?
                }
            };
            Ok(truthful == *truthful_utility
                && dev == *deviation_utility
                && dev > truthful)
        }
        Witness::IcSequence {
            agent,
            instance,
            deviation_reports,
            truthful_utility,
            deviation_utility,
        } => {
            let types = instance.to_model()?;
            let truthful = m1_unilateral_total(&types, ctx.econ, agent.index(), None)?;
            let dev =
                m1_unilateral_total(&types, ctx.econ, agent.index(), Some(deviation_reports))?;
            Ok(truthful == *truthful_utility && dev == *deviation_utility && dev > truthful)
        }
        Witness::IcTable {
            agent,
            instance,
            deviation_hat,
            deviation_tilde,
            truthful_utility,
            deviation_utility,
        } => {
            let truth = match instance.to_model()? {
                TypeModel::Markov(t) => t,
                _ => return Ok(false),
            };
            let idx = agent.index();
            let truthful =
                m2_agent_best_total(&truth, &truth, idx, &ctx.econ.cost, ctx.payment_mode)?;
            let reports =
                truth.with_agent_rows(idx, deviation_hat.clone(), deviation_tilde.clone())?;
            let dev =
                m2_agent_best_total(&truth, &reports, idx, &ctx.econ.cost, ctx.payment_mode)?;
            Ok(truthful == *truthful_utility && dev == *deviation_utility && dev > truthful)
        }
        Witness::IrViolation { agent, stage, instance, utility } => match instance {
            InstanceDesc::Scalar { true_thetas } => {
                let s = truthful_static_run(true_thetas, ctx.econ, ctx.gamma_policy)?;
                Ok(s.agent_utilities[agent.index()] == *utility && utility.is_negative())
            }
            InstanceDesc::Fixed { rows } => {
                let inst = crate::mech_dynamic::M1Instance {
                    types: TypeModel::fixed(rows.clone())?,
                    strategies: vec![
                        AgentStrategy {
                            gamma_policy: ctx.gamma_policy,
                            ..Default::default()
                        };
                        rows.len()
                    ],
                    econ: ctx.econ.clone(),
                    report_max: ctx.grid.theta_max,
                    budget: ctx.budget,
                };
                let runs = crate::mech_dynamic::run_m1(&inst)?;
                Ok(runs[stage - 1].agent_utilities[agent.index()] == *utility
                    && utility.is_negative())
            }
            InstanceDesc::Markov { hat, tilde } => {
                let truth = TypeTable::new(hat.clone(), tilde.clone())?;
                let path = allocate_m2(&truth)?;
                let k = stage - 1;
                let prev = if k > 0 { Some(path.winners[k - 1].index()) } else { None };
                let w = path.winners[k].index();
                let true_eff = truth.effective(w, k, prev);
                let base = stage_payment_base(&path, &truth, k);
                let hi = true_eff.min(path.effective_reports[k]);
                let mut best: Option<Money> = None;
                for gamma in 0..=hi {
                    let amount = match ctx.payment_mode {
                        M2PaymentMode::Corrected => base.clone() - Money::from_u64(gamma),
                        M2PaymentMode::Literal => base.clone(),
                    };
                    let u = amount - ctx.econ.cost.evaluate(true_eff, gamma)?;
                    if best.as_ref().is_none_or(|b| u > *b) {
                        best = Some(u);
                    }
                }
                Ok(best.expect("gamma 0 feasible") == *utility && utility.is_negative())
            }
        },
        Witness::SoGap { instance, mechanism_welfare, oracle_welfare } => match instance {
            InstanceDesc::Scalar { true_thetas } => {
                let welfare = realized_static_welfare(
                    true_thetas,
                    ctx.econ,
                    ctx.report_behavior,
                    ctx.gamma_policy,
                    &ctx.grid,
                    ctx.budget,
                )?;
                let optimum =
                    social_optimum_static(true_thetas, &ctx.econ.cost, &ctx.econ.profit)?;
                Ok(welfare == *mechanism_welfare
                    && optimum.welfare == *oracle_welfare
                    && welfare != optimum.welfare)
            }
            InstanceDesc::Markov { hat, tilde } => {
                let truth = TypeTable::new(hat.clone(), tilde.clone())?;
                let welfare = truthful_m2_welfare(
                    &truth,
                    &ctx.econ.cost,
                    &ctx.econ.profit,
                    ctx.payment_mode,
                )?;
                let optimum = social_optimum_path(
                    &TypeModel::Markov(truth),
                    &ctx.econ.cost,
                    &ctx.econ.profit,
                )?;
                Ok(welfare == *mechanism_welfare
                    && optimum.welfare == *oracle_welfare
                    && welfare != optimum.welfare)
            }
            InstanceDesc::Fixed { rows } => {
                let types = TypeModel::fixed(rows.clone())?;
                let inst = crate::mech_dynamic::M1Instance {
                    types: types.clone(),
                    strategies: vec![
                        AgentStrategy {
                            gamma_policy: ctx.gamma_policy,
                            ..Default::default()
                        };
                        rows.len()
                    ],
                    econ: ctx.econ.clone(),
                    report_max: ctx.grid.theta_max,
                    budget: ctx.budget,
                };
                let welfare: Money = crate::mech_dynamic::run_m1(&inst)?
                    .iter()
                    .map(|s| s.welfare.clone())
                    .sum();
                let optimum = social_optimum_path(&types, &ctx.econ.cost, &ctx.econ.profit)?;
                Ok(welfare == *mechanism_welfare
                    && optimum.welfare == *oracle_welfare
                    && welfare != optimum.welfare)
            }
        },
        Witness::GammaDependence {
            instance,
            stage,
            gamma_low,
            gamma_high,
            utility_low,
            utility_high,
        } => match instance {
            InstanceDesc::Markov { hat, tilde } => {
                let truth = TypeTable::new(hat.clone(), tilde.clone())?;
                let path = allocate_m2(&truth)?;
                let k = stage - 1;
                let prev = if k > 0 { Some(path.winners[k - 1].index()) } else { None };
                let w = path.winners[k].index();
                let true_eff = truth.effective(w, k, prev);
                let base = stage_payment_base(&path, &truth, k);
                let utility = |gamma: u64| -> Result<Money> {
                    let amount = match ctx.payment_mode {
                        M2PaymentMode::Corrected => base.clone() - Money::from_u64(gamma),
                        M2PaymentMode::Literal => base.clone(),
                    };
                    Ok(amount - ctx.econ.cost.evaluate(true_eff, gamma)?)
                };
                Ok(utility(*gamma_low)? == *utility_low
                    && utility(*gamma_high)? == *utility_high
                    && utility_low != utility_high)
            }
            InstanceDesc::Scalar { true_thetas } => {
                let auction = select_winner(&BidProfile::new(true_thetas.clone())?);
                let w = auction.winner.index();
                let low = settle(&auction, true_thetas[w], *gamma_low, ctx.econ)?;
                let high = settle(&auction, true_thetas[w], *gamma_high, ctx.econ)?;
                Ok(low.agent_utilities[w] == *utility_low
                    && high.agent_utilities[w] == *utility_high)
            }
            InstanceDesc::Fixed { .. } => Ok(false),
        },
    }
}
