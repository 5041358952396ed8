//! Cost-of-priority-modification and principal-profit families, plus the
//! payment rules used by the mechanisms.
//!
//! Conventions: `theta` is an agent's initial misalignment, `theta_reported`
//! the value he declared, `gamma` the realized misalignment, and `theta_bar`
//! the second-lowest report in the auction. All payoffs are exact rationals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

// ---------------------------------------------------------------------------
// Cost of shifting the realized order away from the preferred one
// ---------------------------------------------------------------------------

/// Effort-cost family `h(theta, gamma)`.
///
/// Every family satisfies `h(theta, theta) = 0`, `h >= 0` on the feasible
/// domain `gamma <= theta`, and is non-decreasing in `theta` for fixed
/// `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostFunction {
    /// `h = theta - gamma`.
    Linear,
    /// `h = scale * (theta - gamma)`, `scale > 0`.
    AffineScaled { scale: Money },
    /// `h = scale * (theta - gamma)^2`, `scale > 0`.
    ConvexQuadratic { scale: Money },
}

impl CostFunction {
    /// Exact cost of realizing `gamma` from an initial misalignment `theta`.
    /// Realizing more misalignment than the initial one is out of the model.
    pub fn evaluate(&self, theta: u64, gamma: u64) -> Result<Money> {
        if gamma > theta {
            return Err(Error::RealizedExceedsInitial { theta, gamma });
        }
        Ok(self.formula(theta, gamma))
    }

    /// The family formula extended over all non-negative arguments, without
    /// the feasibility restriction. Used where a payment or property check
    /// needs the algebraic extension.
    pub(crate) fn formula(&self, theta: u64, gamma: u64) -> Money {
        let diff = Money::from_int(theta as i64 - gamma as i64);
        match self {
            CostFunction::Linear => diff,
            CostFunction::AffineScaled { scale } => scale * &diff,
            CostFunction::ConvexQuadratic { scale } => scale * &(&diff * &diff),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CostFunction::Linear)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CostFunction::Linear => Ok(()),
            CostFunction::AffineScaled { scale } | CostFunction::ConvexQuadratic { scale } => {
                if scale.is_positive() {
                    Ok(())
                } else {
                    Err(Error::NonPositiveScale(scale.to_string()))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Principal profit from the realized order
// ---------------------------------------------------------------------------

/// Profit family `S(gamma)`, non-increasing in the realized misalignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfitFunction {
    /// `S = intercept - slope * gamma`, `slope > 0`.
    Affine { intercept: Money, slope: Money },
    /// Explicit values indexed by `gamma`; misalignments beyond the table
    /// take the last value. Must be non-increasing (covers geometric decay
    /// and other non-affine shapes with exact rational entries).
    Table { values: Vec<Money> },
}

impl ProfitFunction {
    pub fn affine(intercept: Money, slope: Money) -> Result<Self> {
        let s = ProfitFunction::Affine { intercept, slope };
        s.validate()?;
        Ok(s)
    }

    pub fn evaluate(&self, gamma: u64) -> Money {
        match self {
            ProfitFunction::Affine { intercept, slope } => {
                intercept.clone() - slope * &Money::from_u64(gamma)
            }
            ProfitFunction::Table { values } => {
                let idx = (gamma as usize).min(values.len() - 1);
                values[idx].clone()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProfitFunction::Affine { slope, .. } => {
                if slope.is_positive() {
                    Ok(())
                } else {
                    Err(Error::ProfitNotMonotone(format!(
                        "affine slope {slope} must be positive"
                    )))
                }
            }
            ProfitFunction::Table { values } => {
                if values.is_empty() {
                    return Err(Error::ProfitNotMonotone("empty table".into()));
                }
                for w in values.windows(2) {
                    if w[1] > w[0] {
                        return Err(Error::ProfitNotMonotone(format!(
                            "table increases from {} to {}",
                            w[0], w[1]
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Payment rules
// ---------------------------------------------------------------------------

/// How the principal reacts when the realized misalignment exceeds the
/// winner's declared one. Default is forfeiture: the payment is withheld and
/// the violation recorded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gating {
    #[default]
    Forfeit,
    Penalty(Money),
    Off,
}

/// Payment-to-the-winner families. Only `second_price_linear` (and its
/// rescalings with `scale = 1`) is sound; the others are deliberately broken
/// schemes kept as negative fixtures for the verifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PaymentFamily {
    /// `P = theta_bar - gamma`.
    SecondPriceLinear,
    /// `P = theta_reported`, ignoring the realized order.
    FlatReport,
    /// `P = base + slope * gamma`, ignoring the reports.
    RealizedOnly { base: Money, slope: Money },
    /// `P = h(theta_reported, gamma)`: reimburses the effort cost the winner
    /// claims to have incurred.
    ClaimedCost,
    /// `P = S(gamma) - baseline`, the classic welfare-residual transfer with
    /// `baseline` a precomputed optimal welfare.
    VcgResidual {
        profit: ProfitFunction,
        #[serde(default)]
        baseline: Option<Money>,
    },
    /// `P = scale * (theta_bar - gamma)`.
    ScaledLinear { scale: Money },
    /// Explicit `(theta_bar, gamma) -> amount` table with a default.
    CustomTable {
        entries: Vec<PaymentEntry>,
        default: Money,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaymentEntry {
    pub theta_bar: u64,
    pub gamma: u64,
    pub amount: Money,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaymentRule {
    #[serde(flatten)]
    pub family: PaymentFamily,
    #[serde(default)]
    pub gating: Gating,
}

impl PaymentRule {
    pub fn second_price_linear() -> Self {
        PaymentRule { family: PaymentFamily::SecondPriceLinear, gating: Gating::Forfeit }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.family {
            PaymentFamily::ScaledLinear { scale } => {
                if scale.is_positive() {
                    Ok(())
                } else {
                    Err(Error::NonPositiveScale(scale.to_string()))
                }
            }
            PaymentFamily::VcgResidual { profit, baseline } => {
                profit.validate()?;
                if baseline.is_none() {
                    return Err(Error::MissingWelfareBaseline);
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Outcome of evaluating a payment rule for the winner.
#[derive(Clone, Debug, PartialEq)]
pub struct Payment {
    pub amount: Money,
    /// Set when `gamma > theta_reported`; under forfeiture or penalty gating
    /// the amount already reflects the sanction.
    pub gating_violation: bool,
}

/// Evaluates the winner's payment. `cost` is consulted by the claimed-cost
/// family only.
pub fn pay(
    rule: &PaymentRule,
    theta_bar: u64,
    theta_reported: u64,
    gamma: u64,
    cost: &CostFunction,
) -> Result<Payment> {
    let violated = gamma > theta_reported;
    if violated {
        match &rule.gating {
            Gating::Forfeit => {
                return Ok(Payment { amount: Money::zero(), gating_violation: true })
            }
            Gating::Penalty(p) => {
                return Ok(Payment { amount: -p.clone(), gating_violation: true })
            }
            Gating::Off => {}
        }
    }
    let amount = match &rule.family {
        PaymentFamily::SecondPriceLinear => {
            Money::from_int(theta_bar as i64 - gamma as i64)
        }
        PaymentFamily::FlatReport => Money::from_u64(theta_reported),
        PaymentFamily::RealizedOnly { base, slope } => {
            base.clone() + slope * &Money::from_u64(gamma)
        }
        PaymentFamily::ClaimedCost => cost.formula(theta_reported, gamma),
        PaymentFamily::VcgResidual { profit, baseline } => {
            let baseline = baseline.as_ref().ok_or(Error::MissingWelfareBaseline)?;
            profit.evaluate(gamma) - baseline
        }
        PaymentFamily::ScaledLinear { scale } => {
            scale * &Money::from_int(theta_bar as i64 - gamma as i64)
        }
        PaymentFamily::CustomTable { entries, default } => entries
            .iter()
            .find(|e| e.theta_bar == theta_bar && e.gamma == gamma)
            .map(|e| e.amount.clone())
            .unwrap_or_else(|| default.clone()),
    };
    Ok(Payment { amount, gating_violation: violated })
}
