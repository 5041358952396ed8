//! Acceptance suite: one test per shipped verification criterion, each
//! printing a PASS/FAIL line (run with `--nocapture` to see them live).
//!
//! Every assertion is exact — integer and rational arithmetic throughout, no
//! tolerances. Criterion 7's truth-telling clause is asserted as stated and
//! is expected to fail: the lookahead payment listing overpays consecutive
//! winners (see the failure message for a minimal counterexample); its
//! rationality and welfare clauses hold.

use std::path::Path;
use std::process::Command;

use ordermech::agents::GammaPolicy;
use ordermech::econ::{CostFunction, Gating, PaymentFamily, PaymentRule, ProfitFunction};
use ordermech::mech_dynamic::{
    allocate_m2, run_m1, M1Instance, M2PaymentMode, TypeModel, TypeTable,
};
use ordermech::mech_static::EconSetup;
use ordermech::money::Money;
use ordermech::rank::{all_priority_orders, footrule, footrule_upper_bound, PriorityOrder};
use ordermech::verifier::{
    allocation_case_conditions_hold, check_gamma_independence_m2,
    check_gamma_independence_static, check_ic_m1_dynamic, check_ic_m1_fixed, check_ic_m2,
    check_ic_static, check_ir_m1_fixed, check_ir_m2, check_ir_static, check_payment_properties,
    check_so_m1_fixed, check_so_m2, check_so_static, min_total_path_bruteforce, replay_witness,
    sample_fixed_matrices, sample_markov_tables, social_optimum_static, CheckStatus, MarkovGrid,
    ReplayContext, ReportBehavior, StaticGrid, VerificationReport, Witness,
};

const BUDGET: u64 = 50_000_000;

fn criterion(name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("acceptance {name}: PASS"),
        Err(msg) => {
            println!("acceptance {name}: FAIL - {msg}");
            panic!("{name}: {msg}");
        }
    }
}

fn err(e: ordermech::Error) -> String {
    e.to_string()
}

fn m(v: i64) -> Money {
    Money::from_int(v)
}

fn sound_econ(slope: Money) -> EconSetup {
    EconSetup {
        payment: PaymentRule::second_price_linear(),
        cost: CostFunction::Linear,
        profit: ProfitFunction::affine(m(10), slope).expect("positive slope"),
    }
}

fn full_grid() -> StaticGrid {
    StaticGrid { agent_counts: vec![2, 3], theta_max: 6 }
}

fn profiles(n: usize, max: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut p = vec![0u64; n];
    loop {
        out.push(p.clone());
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if p[pos] < max {
                p[pos] += 1;
                break;
            }
            p[pos] = 0;
        }
    }
}

fn must_pass(label: &str, report: &VerificationReport) -> Result<(), String> {
    if report.passed() {
        Ok(())
    } else {
        Err(format!(
            "{label}: status {:?} with {} witnesses over {} instances; first: {}",
            report.status,
            report.witnesses.len(),
            report.instances_checked,
            report
                .witnesses
                .first()
                .map(|w| serde_json::to_string(w).unwrap_or_default())
                .unwrap_or_default()
        ))
    }
}

// Criterion 1: exhaustive dominant-strategy truthfulness and non-negative
// equilibrium utilities for the single auction under the sound rule.
#[test]
fn c01_auction_truthfulness_and_rationality() {
    criterion("criterion 1 (auction IC + IR, exhaustive grid)", || {
        let econ = sound_econ(m(2));
        let grid = full_grid();
        let ic = check_ic_static(&econ, &grid, BUDGET).map_err(err)?;
        must_pass("IC", &ic)?;
        if ic.status == CheckStatus::NonExhaustive {
            return Err("IC scan was not exhaustive".into());
        }
        let ir = check_ir_static(&econ, &grid, GammaPolicy::Social).map_err(err)?;
        must_pass("IR", &ir)
    });
}

// Criterion 2: realized welfare equals the exhaustive optimum on every grid
// instance for both profit slopes, and the closed form S(0) - min theta
// matches the oracle when the slope exceeds one.
#[test]
fn c02_social_optimality_linear_cost() {
    criterion("criterion 2 (welfare optimality, slopes 2 and 1/2)", || {
        let grid = full_grid();
        for slope in [m(2), Money::ratio(1, 2)] {
            let econ = sound_econ(slope.clone());
            let so = check_so_static(
                &econ,
                &grid,
                ReportBehavior::Truthful,
                GammaPolicy::Social,
                BUDGET,
            )
            .map_err(err)?;
            must_pass(&format!("SO at slope {slope}"), &so)?;
        }
        let profit = ProfitFunction::affine(m(10), m(2)).expect("positive slope");
        for &n in &grid.agent_counts {
            for thetas in profiles(n, grid.theta_max) {
                let opt = social_optimum_static(&thetas, &CostFunction::Linear, &profit)
                    .map_err(err)?;
                let closed =
                    profit.evaluate(0) - Money::from_u64(*thetas.iter().min().expect("n >= 2"));
                if opt.welfare != closed {
                    return Err(format!(
                        "closed form mismatch at {thetas:?}: oracle {} vs {}",
                        opt.welfare, closed
                    ));
                }
            }
        }
        Ok(())
    });
}

// Criterion 3: the truthful winner's settled utility is exactly
// theta_bar - theta_w at every feasible realized misalignment.
#[test]
fn c03_winner_utility_gamma_independent() {
    criterion("criterion 3 (winner utility = theta_bar - theta_w for every gamma)", || {
        let econ = sound_econ(m(2));
        let report = check_gamma_independence_static(&econ, &full_grid()).map_err(err)?;
        must_pass("gamma sweep", &report)
    });
}

// Criterion 4: every deliberately broken payment scheme is caught — by the
// payment-property checker and by at least one of the IC/IR/SO scans — and
// every recorded witness replays exactly.
#[test]
fn c04_negative_payment_suite() {
    criterion("criterion 4 (broken payment schemes produce replayable witnesses)", || {
        let profit = ProfitFunction::affine(m(10), m(2)).expect("positive slope");
        let rules: Vec<(&str, PaymentRule)> = vec![
            (
                "flat_report",
                PaymentRule { family: PaymentFamily::FlatReport, gating: Gating::Forfeit },
            ),
            (
                "realized_only",
                PaymentRule {
                    family: PaymentFamily::RealizedOnly { base: m(0), slope: m(1) },
                    gating: Gating::Forfeit,
                },
            ),
            (
                "claimed_cost",
                PaymentRule { family: PaymentFamily::ClaimedCost, gating: Gating::Forfeit },
            ),
            (
                "vcg_residual",
                PaymentRule {
                    family: PaymentFamily::VcgResidual {
                        profit: profit.clone(),
                        baseline: Some(m(7)),
                    },
                    gating: Gating::Forfeit,
                },
            ),
            (
                "scaled_linear",
                PaymentRule {
                    family: PaymentFamily::ScaledLinear { scale: m(2) },
                    gating: Gating::Forfeit,
                },
            ),
        ];
        let grid = full_grid();
        for (name, rule) in rules {
            let econ = EconSetup {
                payment: rule,
                cost: CostFunction::Linear,
                profit: profit.clone(),
            };
            let props =
                check_payment_properties(&econ.payment, &econ.cost, 10).map_err(err)?;
            if props.passed() {
                return Err(format!("{name}: payment properties unexpectedly hold"));
            }
            let ic = check_ic_static(&econ, &grid, BUDGET).map_err(err)?;
            let ir = check_ir_static(&econ, &grid, GammaPolicy::Social).map_err(err)?;
            let so = check_so_static(
                &econ,
                &grid,
                ReportBehavior::BestResponse,
                GammaPolicy::Adversarial,
                BUDGET,
            )
            .map_err(err)?;
            let total = ic.witnesses.len() + ir.witnesses.len() + so.witnesses.len();
            if total == 0 {
                return Err(format!("{name}: no IC/IR/SO witness found"));
            }

            let base_ctx = ReplayContext {
                grid: StaticGrid { agent_counts: grid.agent_counts.clone(), theta_max: 10 },
                ..ReplayContext::new(&econ)
            };
            for w in props.witnesses.iter().chain(&ic.witnesses).chain(&ir.witnesses) {
                if !replay_witness(w, &base_ctx).map_err(err)? {
                    return Err(format!(
                        "{name}: witness failed to replay: {}",
                        serde_json::to_string(w).unwrap_or_default()
                    ));
                }
            }
            let so_ctx = ReplayContext {
                report_behavior: ReportBehavior::BestResponse,
                gamma_policy: GammaPolicy::Adversarial,
                grid: grid.clone(),
                ..ReplayContext::new(&econ)
            };
            for w in &so.witnesses {
                if !replay_witness(w, &so_ctx).map_err(err)? {
                    return Err(format!(
                        "{name}: welfare witness failed to replay: {}",
                        serde_json::to_string(w).unwrap_or_default()
                    ));
                }
            }
        }
        Ok(())
    });
}

// Criterion 5: the repeated mechanism on fixed types passes per-stage IC, IR,
// and SO over one-, two-, and three-stage grids, and permuting the stage
// order permutes the settlements identically.
#[test]
fn c05_repeated_mechanism_fixed_types() {
    criterion("criterion 5 (repeated mechanism on fixed types)", || {
        let econ = sound_econ(m(2));
        let grid = full_grid();
        for stages in [1usize, 2, 3] {
            let ic =
                check_ic_m1_fixed(&econ, &grid, stages, 30, 1000 + stages as u64, BUDGET)
                    .map_err(err)?;
            must_pass(&format!("IC at {stages} stages"), &ic)?;
            let ir = check_ir_m1_fixed(
                &econ,
                &grid,
                stages,
                30,
                2000 + stages as u64,
                GammaPolicy::Social,
            )
            .map_err(err)?;
            must_pass(&format!("IR at {stages} stages"), &ir)?;
            let so = check_so_m1_fixed(
                &econ,
                &grid,
                stages,
                30,
                3000 + stages as u64,
                GammaPolicy::Social,
            )
            .map_err(err)?;
            must_pass(&format!("SO at {stages} stages"), &so)?;
        }

        for (n, stages, perm) in
            [(2usize, 2usize, vec![1usize, 0]), (3, 3, vec![2, 0, 1]), (2, 3, vec![2, 1, 0])]
        {
            for rows in sample_fixed_matrices(77, 40, n, stages, grid.theta_max) {
                let base = run_m1(&M1Instance::truthful(
                    TypeModel::fixed(rows.clone()).map_err(err)?,
                    econ.clone(),
                ))
                .map_err(err)?;
                let permuted_rows: Vec<Vec<u64>> = rows
                    .iter()
                    .map(|r| perm.iter().map(|&k| r[k]).collect())
                    .collect();
                let permuted = run_m1(&M1Instance::truthful(
                    TypeModel::fixed(permuted_rows).map_err(err)?,
                    econ.clone(),
                ))
                .map_err(err)?;
                for (k, &src) in perm.iter().enumerate() {
                    if permuted[k] != base[src] {
                        return Err(format!(
                            "stage permutation changed a settlement on {rows:?} (perm {perm:?})"
                        ));
                    }
                }
            }
        }
        Ok(())
    });
}

// Criterion 6: on the two-stage falsification instance, the per-stage
// mechanism admits a whole-sequence deviation that gains exactly 3 against a
// truthful total of 0.
#[test]
fn c06_repeated_mechanism_fails_on_markov_types() {
    criterion("criterion 6 (lookahead deviation gains exactly 3)", || {
        let truth = TypeTable::new(vec![vec![5, 6], vec![4, 5]], vec![vec![1], vec![4]])
            .map_err(err)?;
        let econ = sound_econ(m(2));
        let report = check_ic_m1_dynamic(&truth, &econ, 6, BUDGET).map_err(err)?;
        if report.status != CheckStatus::Fail {
            return Err("no deviation found on the falsification instance".into());
        }
        let ctx = ReplayContext::new(&econ);
        let mut best_gain = m(0);
        for w in &report.witnesses {
            if !replay_witness(w, &ctx).map_err(err)? {
                return Err("a deviation witness failed to replay".into());
            }
            if let Witness::IcSequence { truthful_utility, deviation_utility, .. } = w {
                if !truthful_utility.is_zero() {
                    return Err(format!("truthful utility should be 0, got {truthful_utility}"));
                }
                let gain = deviation_utility.clone() - truthful_utility;
                if gain > best_gain {
                    best_gain = gain;
                }
            }
        }
        if best_gain != m(3) {
            return Err(format!("maximal deviation gain is {best_gain}, expected exactly 3"));
        }
        Ok(())
    });
}

// Criterion 7: the lookahead mechanism on the exhaustive two-agent two-stage
// grid. Per-stage rationality and welfare optimality hold; the zero-deviation
// (truth-telling) clause is asserted as stated and fails: the stage payment
// overpays consecutive winners. Minimal counterexample: truth hat=[[1,3],
// [3,2]], tilde=[[0],[1]] — agent 2 truthfully wins nothing, but reporting
// hat=[0,1], tilde=[0] seizes both stages for a net gain of 1 (stage-1 loss
// -1, stage-2 gain +2 because the runner-up anchor stays at the rival's
// unconditional value 3 once the rival has lost stage 1).
#[test]
fn c07_lookahead_mechanism_grid() {
    criterion("criterion 7 (lookahead mechanism IC + IR + SO, exhaustive grid)", || {
        let grid = MarkovGrid { agents: 2, stages: 2, entry_max: 4 };
        let cost = CostFunction::Linear;
        let profit = ProfitFunction::affine(m(10), m(2)).expect("positive slope");

        let ir = check_ir_m2(&cost, &grid, M2PaymentMode::Corrected).map_err(err)?;
        must_pass("IR", &ir)?;
        let so = check_so_m2(&cost, &profit, &grid, M2PaymentMode::Corrected).map_err(err)?;
        must_pass("SO", &so)?;

        let ic = check_ic_m2(&cost, &grid, M2PaymentMode::Corrected, BUDGET).map_err(err)?;
        if ic.status == CheckStatus::NonExhaustive {
            return Err("IC scan was not exhaustive".into());
        }
        must_pass("IC (truth-telling clause)", &ic)
    });
}

// Criterion 8: stage utilities are gamma-independent under the corrected
// payment and gamma-dependent under the literal one, with replayable
// witnesses.
#[test]
fn c08_literal_vs_corrected_payments() {
    criterion("criterion 8 (literal payment mode leaks gamma dependence)", || {
        let grid = MarkovGrid { agents: 2, stages: 2, entry_max: 4 };
        let cost = CostFunction::Linear;
        let corrected =
            check_gamma_independence_m2(&cost, &grid, M2PaymentMode::Corrected).map_err(err)?;
        must_pass("corrected mode", &corrected)?;

        let literal =
            check_gamma_independence_m2(&cost, &grid, M2PaymentMode::Literal).map_err(err)?;
        if literal.status != CheckStatus::Fail {
            return Err("literal mode produced no gamma-dependence witness".into());
        }
        let econ = sound_econ(m(2));
        let ctx = ReplayContext {
            payment_mode: M2PaymentMode::Literal,
            ..ReplayContext::new(&econ)
        };
        for w in &literal.witnesses {
            if !replay_witness(w, &ctx).map_err(err)? {
                return Err("a gamma-dependence witness failed to replay".into());
            }
        }
        Ok(())
    });
}

// Criterion 9: the allocation dynamic program agrees with plain path
// enumeration on 1000 seeded instances and satisfies the structural case
// conditions on every exhaustive grid instance.
#[test]
fn c09_allocation_dp_consistency() {
    criterion("criterion 9 (allocation DP vs brute force + case conditions)", || {
        let grid = MarkovGrid { agents: 2, stages: 2, entry_max: 4 };
        for truth in ordermech::verifier::enumerate_markov_tables(&grid) {
            let path = allocate_m2(&truth).map_err(err)?;
            if !allocation_case_conditions_hold(&truth, &path) {
                return Err(format!("case conditions violated on {truth:?}"));
            }
        }
        let mut checked = 0usize;
        for (agents, stages) in [(2usize, 2usize), (2, 3), (3, 2), (3, 3)] {
            let seed = 9000 + agents as u64 * 10 + stages as u64;
            for table in sample_markov_tables(seed, 250, agents, stages, 6) {
                let dp = allocate_m2(&table).map_err(err)?;
                let (winners, total) = min_total_path_bruteforce(&table);
                if dp.winners != winners || dp.total_reported != total {
                    return Err(format!(
                        "DP disagrees with enumeration on {table:?}: {:?}/{} vs {:?}/{}",
                        dp.winners, dp.total_reported, winners, total
                    ));
                }
                checked += 1;
            }
        }
        if checked != 1000 {
            return Err(format!("expected 1000 sampled instances, checked {checked}"));
        }
        Ok(())
    });
}

// Criterion 10: the misalignment layer is a bounded, even, symmetric metric,
// exhaustively for up to five tasks.
#[test]
fn c10_misalignment_metric_suite() {
    criterion("criterion 10 (footrule metric suite, exhaustive K <= 5)", || {
        for k in 1..=5usize {
            let all = all_priority_orders(k);
            let bound = footrule_upper_bound(k);
            let n = all.len();
            let mut totals = vec![vec![0u64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let d = footrule(&all[i], &all[j]).map_err(err)?;
                    totals[i][j] = d.total;
                    if d.per_task.iter().any(|&p| p as usize > k - 1) {
                        return Err(format!("per-task bound violated at K={k}"));
                    }
                }
            }
            for i in 0..n {
                if totals[i][i] != 0 {
                    return Err(format!("nonzero self-distance at K={k}"));
                }
                for j in 0..n {
                    if totals[i][j] != totals[j][i] {
                        return Err(format!("asymmetry at K={k}"));
                    }
                    if totals[i][j] % 2 != 0 {
                        return Err(format!("odd total at K={k}"));
                    }
                    if totals[i][j] > bound {
                        return Err(format!("bound exceeded at K={k}"));
                    }
                    for l in 0..n {
                        if totals[i][l] > totals[i][j] + totals[j][l] {
                            return Err(format!("triangle inequality violated at K={k}"));
                        }
                    }
                }
            }
            let rev = footrule(&PriorityOrder::identity(k), &PriorityOrder::reversal(k))
                .map_err(err)?;
            if rev.total != bound {
                return Err(format!("reversal does not attain the bound at K={k}"));
            }
        }
        Ok(())
    });
}

// Criterion 11: running any shipped fixture twice produces byte-identical
// CSV and JSON outputs.
#[test]
fn c11_run_outputs_are_byte_identical() {
    criterion("criterion 11 (byte-identical reruns on shipped fixtures)", || {
        let fixtures_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
        let fixtures = [
            "indivisible_basic",
            "grid_sound_rule",
            "m1_fixed",
            "m1_dynamic_falsification",
            "m2_lookahead",
            "permutation_demo",
            "negative_flat_report",
        ];
        for name in fixtures {
            let config = fixtures_dir.join(format!("{name}.json"));
            let run = |dir: &Path| -> Result<(Vec<u8>, Vec<u8>, Option<i32>), String> {
                let status = Command::new(env!("CARGO_BIN_EXE_ordermech"))
                    .arg("run")
                    .arg(&config)
                    .arg("--out-dir")
                    .arg(dir)
                    .output()
                    .map_err(|e| e.to_string())?;
                let csv = std::fs::read(dir.join(format!("{name}.csv")))
                    .map_err(|e| format!("{name}.csv: {e}"))?;
                let json = std::fs::read(dir.join(format!("{name}.json")))
                    .map_err(|e| format!("{name}.json: {e}"))?;
                Ok((csv, json, status.status.code()))
            };
            let dir_a = tempfile::tempdir().map_err(|e| e.to_string())?;
            let dir_b = tempfile::tempdir().map_err(|e| e.to_string())?;
            let (csv_a, json_a, code_a) = run(dir_a.path())?;
            let (csv_b, json_b, code_b) = run(dir_b.path())?;
            if csv_a != csv_b {
                return Err(format!("{name}: CSV outputs differ between runs"));
            }
            if json_a != json_b {
                return Err(format!("{name}: JSON outputs differ between runs"));
            }
            if code_a != code_b {
                return Err(format!("{name}: exit codes differ between runs"));
            }
        }
        Ok(())
    });
}
