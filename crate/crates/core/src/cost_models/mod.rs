//! Abatement cost curve, endogenous learning, marginal abatement cost (MAC),
//! damage fractions and warming from cumulative emissions.
//!
//! Costs are in trillion $ per Gton CO2, which is numerically the same as
//! thousands of $ per ton; multiply by [`USD_PER_TON_PER_TRILLION_PER_GTON`]
//! to get $/ton.

mod curve;
mod damage;
mod learning;

pub use curve::{
    average_cost, marginal_cost, AbatementCostCurve, DEFAULT_C2, DEFAULT_MAX_MARGINAL_COST,
};
pub use damage::{
    calibrate_damage, damage_fraction, damage_fraction_dm, warming, CalibrationPoint, DamageModel,
    DamageVariant, DamageVariantKind, DEFAULT_T0,
};
pub use learning::{
    learning_terms, LearningModel, LearningTerms, DEFAULT_B, DEFAULT_C_F, DEFAULT_M0, DEFAULT_M_H,
};

/// Mass ratio of CO2 to carbon (44/12, rounded as conventionally quoted).
pub const CO2_PER_CARBON: f64 = 3.664;

/// Mean transient climate response to cumulative emissions, K per Tton C.
pub const DEFAULT_TCRE_K_PER_TTONC: f64 = 1.65;

/// [`DEFAULT_TCRE_K_PER_TTONC`] expressed in K per Gton CO2.
pub const DEFAULT_ALPHA: f64 = DEFAULT_TCRE_K_PER_TTONC / (1000.0 * CO2_PER_CARBON);

pub const USD_PER_TON_PER_TRILLION_PER_GTON: f64 = 1000.0;

/// Converts a TCRE in K per Tton C into K per Gton CO2.
pub fn alpha_from_tcre(k_per_ttonc: f64) -> f64 {
    k_per_ttonc / (1000.0 * CO2_PER_CARBON)
}
