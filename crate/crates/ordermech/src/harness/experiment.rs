//! Experiment execution: mechanism runs, verification dispatch, oracle
//! queries, parameter sweeps, and CSV/JSON emission.
//!
//! Emission is deterministic: rows are ordered by (instance, stage), maps are
//! never iterated, and payoffs render as exact decimals when terminating and
//! `p/q` otherwise.

use serde::Serialize;
use serde_json::json;

use crate::econ::PaymentFamily;
use crate::error::{Error, Result};
use crate::harness::generate::generate_instances;
use crate::harness::scenario::{InstanceSpec, Mode, PropertyName, Scenario};
use crate::mech_dynamic::{run_m1, run_m2, M1Instance, M2Instance, TypeModel, TypeTable};
use crate::mech_static::{run_indivisible, EconSetup, IndivisibleInstance, Settlement};
use crate::money::Money;
use crate::rank::{footrule, PriorityOrder};
use crate::verifier::{
    check_gamma_independence_m2, check_gamma_independence_static, check_ic_m1_dynamic,
    check_ic_m1_fixed, check_ic_m2, check_ic_static, check_ir_m1_fixed, check_ir_m2,
    check_ir_static, check_payment_properties, check_so_m1_fixed, check_so_m2, check_so_static,
    social_optimum_path, social_optimum_static, CheckStatus, InstanceDesc, ReportBehavior,
    SocialOptimum, VerificationReport, Witness,
};

/// Worst-of verification outcome, mirrored into the process exit code:
/// 0 pass, 1 fail, 2 non-exhaustive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    Fail,
    NonExhaustive,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::Fail => 1,
            ExitStatus::NonExhaustive => 2,
        }
    }

    fn absorb(self, status: CheckStatus) -> ExitStatus {
        match (self, status) {
            (ExitStatus::Fail, _) | (_, CheckStatus::Fail) => ExitStatus::Fail,
            (ExitStatus::NonExhaustive, _) | (_, CheckStatus::NonExhaustive) => {
                ExitStatus::NonExhaustive
            }
            _ => ExitStatus::Pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub scenario_id: String,
    pub mode: Mode,
    pub instances: u64,
    pub rows: u64,
    pub welfare_mechanism: Money,
    pub welfare_oracle: Money,
    pub ic_status: String,
    pub ir_status: String,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub csv: String,
    pub summary: Summary,
    pub verification: Vec<(PropertyName, VerificationReport)>,
    pub exit: ExitStatus,
}

fn header(n_agents: usize) -> Vec<String> {
    let mut cols = vec![
        "scenario_id".to_string(),
        "instance_id".to_string(),
        "stage".to_string(),
        "winner".to_string(),
        "theta_true_w".to_string(),
        "theta_reported_w".to_string(),
        "theta_bar".to_string(),
        "gamma".to_string(),
        "payment".to_string(),
    ];
    for i in 1..=n_agents {
        cols.push(format!("U_{i}"));
    }
    cols.extend(["V".to_string(), "Pi".to_string(), "Pi_star".to_string(), "flags".to_string()]);
    cols
}

fn row(
    scenario_id: &str,
    instance_id: usize,
    stage: usize,
    s: &Settlement,
    pi_star: &Money,
) -> Vec<String> {
    let mut cells = vec![
        scenario_id.to_string(),
        instance_id.to_string(),
        stage.to_string(),
        s.winner.get().to_string(),
        s.theta_true_w.to_string(),
        s.theta_reported_w.to_string(),
        s.theta_bar.to_string(),
        s.gamma.to_string(),
        s.payments[s.winner.index()].to_csv_string(),
    ];
    for u in &s.agent_utilities {
        cells.push(u.to_csv_string());
    }
    cells.push(s.principal_utility.to_csv_string());
    cells.push(s.welfare.to_csv_string());
    cells.push(pi_star.to_csv_string());
    cells.push(if s.gating_violation { "gating_violation".to_string() } else { String::new() });
    cells
}

/// Per-stage welfare of an exhaustive path optimum (stages decompose).
fn optimum_stage_welfares(
    types: &TypeModel,
    opt: &SocialOptimum,
    econ: &EconSetup,
) -> Result<Vec<Money>> {
    let mut out = Vec::with_capacity(opt.winners.len());
    let mut prev: Option<usize> = None;
    for (k, w) in opt.winners.iter().enumerate() {
        let eff = types.effective(w.index(), k, prev);
        out.push(econ.profit.evaluate(opt.gammas[k]) - econ.cost.evaluate(eff, opt.gammas[k])?);
        prev = Some(w.index());
    }
    Ok(out)
}

fn status_text(prop: PropertyName, verification: &[(PropertyName, VerificationReport)]) -> String {
    verification
        .iter()
        .find(|(p, _)| *p == prop)
        .map(|(_, r)| match r.status {
            CheckStatus::Pass => "pass".to_string(),
            CheckStatus::Fail => "fail".to_string(),
            CheckStatus::NonExhaustive => "non_exhaustive".to_string(),
        })
        .unwrap_or_else(|| "skipped".to_string())
}

/// Runs the scenario's mechanism over its instances, plus any configured
/// verification, and renders the CSV rows and JSON summary.
pub fn run_experiment(sc: &Scenario) -> Result<ExperimentOutput> {
    sc.validate()?;
    let econ = sc.econ();
    let budget = sc.effective_budget();

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut welfare_mechanism = Money::zero();
    let mut welfare_oracle = Money::zero();
    let mut rows = 0u64;
    let instances;

    match sc.mode {
        Mode::Indivisible => {
            let profiles: Vec<Vec<u64>> = match &sc.instances {
                Some(spec) => generate_instances(sc.seed, spec)?,
                None => vec![sc.agents.iter().map(|a| a.theta.unwrap_or(0)).collect()],
            };
            let n = profiles.first().map(|p| p.len()).unwrap_or(0);
            if n < 2 {
                return Err(Error::InsufficientAgents(n));
            }
            wtr.write_record(header(n))?;
            instances = profiles.len() as u64;
            for (id, thetas) in profiles.iter().enumerate() {
                let inst = IndivisibleInstance {
                    true_thetas: thetas.clone(),
                    strategies: sc.strategies(n)?,
                    econ: econ.clone(),
                    report_max: sc.report_cap(thetas.iter().copied().max().unwrap_or(0)),
                    budget,
                };
                let s = run_indivisible(&inst)?;
                let opt = social_optimum_static(thetas, &econ.cost, &econ.profit)?;
                wtr.write_record(row(&sc.scenario_id, id, 1, &s, &opt.welfare))?;
                welfare_mechanism += &s.welfare;
                welfare_oracle += &opt.welfare;
                rows += 1;
            }
        }
        Mode::M1 => {
            let types = sc.types_model()?.expect("validated");
            let n = types.agents();
            wtr.write_record(header(n))?;
            instances = 1;
            let inst = M1Instance {
                types: types.clone(),
                strategies: sc.strategies(n)?,
                econ: econ.clone(),
                report_max: sc.report_cap(types.max_entry()),
                budget,
            };
            let settlements = run_m1(&inst)?;
            let opt = social_optimum_path(&types, &econ.cost, &econ.profit)?;
            let stage_opts = optimum_stage_welfares(&types, &opt, &econ)?;
            for (k, s) in settlements.iter().enumerate() {
                wtr.write_record(row(&sc.scenario_id, 0, k + 1, s, &stage_opts[k]))?;
                welfare_mechanism += &s.welfare;
                welfare_oracle += &stage_opts[k];
                rows += 1;
            }
        }
        Mode::M2 => {
            let types = sc.types_model()?.expect("validated");
            let truth = match &types {
                TypeModel::Markov(t) => t.clone(),
                TypeModel::Fixed(_) => unreachable!("validated"),
            };
            let n = truth.agents();
            wtr.write_record(header(n))?;
            instances = 1;
            let inst = M2Instance {
                truth: truth.clone(),
                strategies: sc.strategies(n)?,
                econ: econ.clone(),
                payment_mode: sc.m2_payment,
                report_max: sc.report_cap(truth.max_entry()),
                budget,
            };
            let settlements = run_m2(&inst)?;
            let opt = social_optimum_path(&types, &econ.cost, &econ.profit)?;
            let stage_opts = optimum_stage_welfares(&types, &opt, &econ)?;
            for (k, s) in settlements.iter().enumerate() {
                wtr.write_record(row(&sc.scenario_id, 0, k + 1, s, &stage_opts[k]))?;
                welfare_mechanism += &s.welfare;
                welfare_oracle += &stage_opts[k];
                rows += 1;
            }
        }
    }

    let verification = run_verification(sc)?;
    let mut exit = ExitStatus::Pass;
    for (_, report) in &verification {
        exit = exit.absorb(report.status);
    }

    let csv = String::from_utf8(wtr.into_inner().map_err(|e| Error::InvalidScenario(e.to_string()))?)
        .expect("csv output is utf-8");
    let summary = Summary {
        scenario_id: sc.scenario_id.clone(),
        mode: sc.mode,
        instances,
        rows,
        welfare_mechanism,
        welfare_oracle,
        ic_status: status_text(PropertyName::Ic, &verification),
        ir_status: status_text(PropertyName::Ir, &verification),
    };
    Ok(ExperimentOutput { csv, summary, verification, exit })
}

/// Dispatches the configured property checks for the scenario's mechanism.
pub fn run_verification(sc: &Scenario) -> Result<Vec<(PropertyName, VerificationReport)>> {
    let Some(spec) = &sc.verify else {
        return Ok(Vec::new());
    };
    let econ = sc.econ();
    let budget = sc.effective_budget();
    let policy = spec.so_gamma_policy.unwrap_or(sc.tie_break);
    let behavior = spec.so_behavior.unwrap_or(ReportBehavior::Truthful);
    let samples = spec.samples.unwrap_or(100);
    let grid = spec.grid.static_grid();

    let mut out = Vec::with_capacity(spec.properties.len());
    for &prop in &spec.properties {
        let report = match sc.mode {
            Mode::Indivisible => match prop {
                PropertyName::Ic => check_ic_static(&econ, &grid, budget)?,
                PropertyName::Ir => check_ir_static(&econ, &grid, policy)?,
                PropertyName::So => check_so_static(&econ, &grid, behavior, policy, budget)?,
                PropertyName::Payment => {
                    check_payment_properties(&econ.payment, &econ.cost, grid.theta_max)?
                }
                PropertyName::Gamma => check_gamma_independence_static(&econ, &grid)?,
            },
            Mode::M1 => {
                let types = sc.types_model()?.expect("validated");
                match &types {
                    TypeModel::Fixed(rows) => {
                        let stages = rows[0].len();
                        match prop {
                            PropertyName::Ic => check_ic_m1_fixed(
                                &econ, &grid, stages, samples, sc.seed, budget,
                            )?,
                            PropertyName::Ir => check_ir_m1_fixed(
                                &econ, &grid, stages, samples, sc.seed, policy,
                            )?,
                            PropertyName::So => check_so_m1_fixed(
                                &econ, &grid, stages, samples, sc.seed, policy,
                            )?,
                            PropertyName::Payment => check_payment_properties(
                                &econ.payment,
                                &econ.cost,
                                grid.theta_max,
                            )?,
                            PropertyName::Gamma => {
                                check_gamma_independence_static(&econ, &grid)?
                            }
                        }
                    }
                    TypeModel::Markov(truth) => match prop {
                        PropertyName::Ic => check_ic_m1_dynamic(
                            truth,
                            &econ,
                            sc.report_cap(truth.max_entry()),
                            budget,
                        )?,
                        PropertyName::Ir => check_ir_m1_instance(truth, sc)?,
                        PropertyName::So => check_so_m1_instance(truth, sc)?,
                        PropertyName::Payment => check_payment_properties(
                            &econ.payment,
                            &econ.cost,
                            grid.theta_max,
                        )?,
                        PropertyName::Gamma => check_gamma_independence_static(&econ, &grid)?,
                    },
                }
            }
            Mode::M2 => {
                let types = sc.types_model()?.expect("validated");
                let (agents, stages) = (types.agents(), types.stages());
                let mgrid = spec.grid.markov_grid(Some(agents), Some(stages));
                match prop {
                    PropertyName::Ic => {
                        check_ic_m2(&econ.cost, &mgrid, sc.m2_payment, budget)?
                    }
                    PropertyName::Ir => check_ir_m2(&econ.cost, &mgrid, sc.m2_payment)?,
                    PropertyName::So => {
                        check_so_m2(&econ.cost, &econ.profit, &mgrid, sc.m2_payment)?
                    }
                    PropertyName::Gamma => {
                        check_gamma_independence_m2(&econ.cost, &mgrid, sc.m2_payment)?
                    }
                    PropertyName::Payment => {
                        return Err(Error::InvalidScenario(
                            "the payment property check applies to auction rules, \
                             not the lookahead mechanism"
                                .into(),
                        ))
                    }
                }
            }
        };
        out.push((prop, report));
    }
    Ok(out)
}

/// Single-instance IR check for the repeated mechanism on Markov types.
fn check_ir_m1_instance(truth: &TypeTable, sc: &Scenario) -> Result<VerificationReport> {
    let econ = sc.econ();
    let types = TypeModel::Markov(truth.clone());
    let n = types.agents();
    let inst = M1Instance {
        types,
        strategies: sc.strategies(n)?,
        econ,
        report_max: sc.report_cap(truth.max_entry()),
        budget: sc.effective_budget(),
    };
    let mut witnesses = Vec::new();
    for (k, s) in run_m1(&inst)?.iter().enumerate() {
        for (i, u) in s.agent_utilities.iter().enumerate() {
            if u.is_negative() {
                witnesses.push(Witness::IrViolation {
                    agent: crate::mech_static::AgentId::from_index(i),
                    stage: k + 1,
                    instance: InstanceDesc::markov(truth),
                    utility: u.clone(),
                });
            }
        }
    }
    Ok(conclude_single(crate::verifier::Property::Ir, witnesses))
}

/// Single-instance SO check for the repeated mechanism on Markov types.
fn check_so_m1_instance(truth: &TypeTable, sc: &Scenario) -> Result<VerificationReport> {
    let econ = sc.econ();
    let types = TypeModel::Markov(truth.clone());
    let n = types.agents();
    let inst = M1Instance {
        types: types.clone(),
        strategies: sc.strategies(n)?,
        econ: econ.clone(),
        report_max: sc.report_cap(truth.max_entry()),
        budget: sc.effective_budget(),
    };
    let welfare: Money = run_m1(&inst)?.iter().map(|s| s.welfare.clone()).sum();
    let optimum = social_optimum_path(&types, &econ.cost, &econ.profit)?;
    let mut witnesses = Vec::new();
    if welfare != optimum.welfare {
        witnesses.push(Witness::SoGap {
            instance: InstanceDesc::markov(truth),
            mechanism_welfare: welfare,
            oracle_welfare: optimum.welfare,
        });
    }
    Ok(conclude_single(crate::verifier::Property::So, witnesses))
}

fn conclude_single(
    property: crate::verifier::Property,
    witnesses: Vec<Witness>,
) -> VerificationReport {
    VerificationReport {
        property,
        status: if witnesses.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail },
        witnesses,
        instances_checked: 1,
    }
}

/// Exhaustive welfare optimum for the scenario's instances, as JSON.
pub fn run_oracle(sc: &Scenario) -> Result<serde_json::Value> {
    sc.validate()?;
    let econ = sc.econ();
    match sc.mode {
        Mode::Indivisible => {
            let profiles: Vec<Vec<u64>> = match &sc.instances {
                Some(spec) => generate_instances(sc.seed, spec)?,
                None => vec![sc.agents.iter().map(|a| a.theta.unwrap_or(0)).collect()],
            };
            let entries: Result<Vec<_>> = profiles
                .iter()
                .enumerate()
                .map(|(id, thetas)| {
                    let opt = social_optimum_static(thetas, &econ.cost, &econ.profit)?;
                    Ok(json!({
                        "instance_id": id,
                        "true_thetas": thetas,
                        "winners": opt.winners,
                        "gammas": opt.gammas,
                        "welfare": opt.welfare,
                    }))
                })
                .collect();
            Ok(serde_json::Value::Array(entries?))
        }
        Mode::M1 | Mode::M2 => {
            let types = sc.types_model()?.expect("validated");
            let opt = social_optimum_path(&types, &econ.cost, &econ.profit)?;
            Ok(json!([{
                "instance_id": 0,
                "winners": opt.winners,
                "gammas": opt.gammas,
                "welfare": opt.welfare,
            }]))
        }
    }
}

#[derive(Debug)]
pub struct SweepOutput {
    pub csv: String,
    pub summaries: Vec<Summary>,
    pub exit: ExitStatus,
}

/// Runs the scenario once per integer value of `param` in `[lo, hi]`,
/// concatenating rows under a single header.
pub fn run_sweep(sc: &Scenario, param: &str, lo: i64, hi: i64) -> Result<SweepOutput> {
    if lo > hi {
        return Err(Error::EmptyRange(format!("{lo}..{hi}")));
    }
    let mut csv = String::new();
    let mut summaries = Vec::new();
    let mut exit = ExitStatus::Pass;
    for value in lo..=hi {
        let derived = apply_sweep_param(sc, param, value)?;
        let out = run_experiment(&derived)?;
        if csv.is_empty() {
            csv.push_str(&out.csv);
        } else {
            for line in out.csv.lines().skip(1) {
                csv.push_str(line);
                csv.push('\n');
            }
        }
        exit = match out.exit {
            ExitStatus::Fail => ExitStatus::Fail,
            ExitStatus::NonExhaustive if exit != ExitStatus::Fail => ExitStatus::NonExhaustive,
            _ => exit,
        };
        summaries.push(out.summary);
    }
    Ok(SweepOutput { csv, summaries, exit })
}

/// Derives a scenario with one named integer parameter replaced.
pub fn apply_sweep_param(sc: &Scenario, param: &str, value: i64) -> Result<Scenario> {
    let mut out = sc.clone();
    let nonneg = |v: i64| -> Result<u64> {
        u64::try_from(v).map_err(|_| Error::EmptyRange(format!("{param} cannot be {v}")))
    };
    match param {
        "seed" => out.seed = nonneg(value)?,
        "theta_max" => match &mut out.instances {
            Some(InstanceSpec::Exhaustive { theta_max, .. })
            | Some(InstanceSpec::Sample { theta_max, .. }) => *theta_max = nonneg(value)?,
            _ => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} needs an exhaustive or sample instance generator"
                )))
            }
        },
        "agents" => match &mut out.instances {
            Some(spec) => {
                let n = usize::try_from(value)
                    .map_err(|_| Error::EmptyRange(format!("{param} cannot be {value}")))?;
                match spec {
                    InstanceSpec::Exhaustive { agents, .. }
                    | InstanceSpec::Sample { agents, .. }
                    | InstanceSpec::Permutation { agents, .. } => *agents = n,
                }
            }
            None => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} needs an instance generator"
                )))
            }
        },
        "tasks" => match &mut out.instances {
            Some(InstanceSpec::Permutation { tasks, .. }) => {
                *tasks = usize::try_from(value)
                    .map_err(|_| Error::EmptyRange(format!("{param} cannot be {value}")))?
            }
            _ => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} needs a permutation instance generator"
                )))
            }
        },
        "profit.intercept" => match &mut out.profit {
            crate::econ::ProfitFunction::Affine { intercept, .. } => {
                *intercept = Money::from_int(value)
            }
            _ => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} applies to the affine profit family"
                )))
            }
        },
        "profit.slope" => match &mut out.profit {
            crate::econ::ProfitFunction::Affine { slope, .. } => *slope = Money::from_int(value),
            _ => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} applies to the affine profit family"
                )))
            }
        },
        "payment.scale" => match &mut out.payment.family {
            PaymentFamily::ScaledLinear { scale } => *scale = Money::from_int(value),
            _ => {
                return Err(Error::UnknownSweepParameter(format!(
                    "{param} applies to the scaled_linear payment family"
                )))
            }
        },
        other => return Err(Error::UnknownSweepParameter(other.to_string())),
    }
    out.scenario_id = format!("{}-{}-{}", sc.scenario_id, param.replace('.', "_"), value);
    out.validate()?;
    Ok(out)
}

/// The worked four-task walkthrough: the principal's order, an agent's
/// preferred order, their misalignment, and a realized order that halves it.
pub fn demo_example1() -> serde_json::Value {
    let principal = PriorityOrder::new(vec![1, 2, 3, 4]).expect("valid");
    let preferred = PriorityOrder::new(vec![2, 1, 4, 3]).expect("valid");
    let realized = PriorityOrder::new(vec![1, 2, 4, 3]).expect("valid");
    let theta = footrule(&principal, &preferred).expect("equal length");
    let gamma = footrule(&principal, &realized).expect("equal length");
    json!({
        "demo": "example1",
        "principal_order": principal,
        "agent_preferred_order": preferred,
        "initial_misalignment": theta,
        "realized_order": realized,
        "realized_misalignment": gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indivisible_config() -> Scenario {
        serde_json::from_str(
            r#"{
                "scenario_id": "t",
                "mode": "indivisible",
                "agents": [{"theta": 3}, {"theta": 5}]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn run_emits_rows_and_consistent_summary() {
        let out = run_experiment(&indivisible_config()).unwrap();
        assert_eq!(out.summary.rows, 1);
        assert_eq!(out.summary.welfare_mechanism, Money::from_int(7));
        assert_eq!(out.summary.welfare_oracle, Money::from_int(7));
        assert_eq!(out.summary.ic_status, "skipped");
        assert_eq!(out.exit, ExitStatus::Pass);
        let mut lines = out.csv.lines();
        let head = lines.next().unwrap();
        assert_eq!(
            head,
            "scenario_id,instance_id,stage,winner,theta_true_w,theta_reported_w,theta_bar,\
             gamma,payment,U_1,U_2,V,Pi,Pi_star,flags"
        );
        assert_eq!(lines.next().unwrap(), "t,0,1,1,3,3,5,0,5,2,0,5,7,7,");
    }

    #[test]
    fn run_is_deterministic() {
        let sc = indivisible_config();
        let a = run_experiment(&sc).unwrap();
        let b = run_experiment(&sc).unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(
            serde_json::to_string(&a.summary).unwrap(),
            serde_json::to_string(&b.summary).unwrap()
        );
    }

    #[test]
    fn grid_run_row_count_matches_instances() {
        let sc: Scenario = serde_json::from_str(
            r#"{
                "mode": "indivisible",
                "instances": {"kind": "exhaustive", "agents": 2, "theta_max": 3}
            }"#,
        )
        .unwrap();
        let out = run_experiment(&sc).unwrap();
        assert_eq!(out.summary.instances, 16);
        assert_eq!(out.summary.rows, 16);
        assert_eq!(out.csv.lines().count(), 17);
    }

    #[test]
    fn verification_statuses_flow_into_summary() {
        let sc: Scenario = serde_json::from_str(
            r#"{
                "mode": "indivisible",
                "agents": [{"theta": 3}, {"theta": 5}],
                "verify": {
                    "properties": ["ic", "ir"],
                    "grid": {"agent_counts": [2], "theta_max": 3}
                }
            }"#,
        )
        .unwrap();
        let out = run_experiment(&sc).unwrap();
        assert_eq!(out.summary.ic_status, "pass");
        assert_eq!(out.summary.ir_status, "pass");
        assert_eq!(out.exit, ExitStatus::Pass);
    }

    #[test]
    fn oracle_reports_exact_optimum() {
        let v = run_oracle(&indivisible_config()).unwrap();
        assert_eq!(v[0]["welfare"], "7");
        assert_eq!(v[0]["winners"][0], 1);
        assert_eq!(v[0]["gammas"][0], 0);
    }

    #[test]
    fn sweep_varies_profit_slope() {
        let sc = indivisible_config();
        let out = run_sweep(&sc, "profit.intercept", 8, 10).unwrap();
        assert_eq!(out.summaries.len(), 3);
        assert_eq!(out.summaries[0].scenario_id, "t-profit_intercept-8");
        assert_eq!(out.summaries[0].welfare_mechanism, Money::from_int(5));
        assert_eq!(out.summaries[2].welfare_mechanism, Money::from_int(7));
        assert_eq!(out.csv.lines().count(), 4); // one header + three rows
    }

    #[test]
    fn demo_walkthrough_values() {
        let v = demo_example1();
        assert_eq!(v["initial_misalignment"]["total"], 4);
        assert_eq!(v["realized_misalignment"]["total"], 2);
        assert_eq!(v["realized_order"], json!([1, 2, 4, 3]));
    }
}
