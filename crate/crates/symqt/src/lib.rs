//! Symmetry-based reconstruction of quantum theory for finite groups.
//!
//! A finite group `G` acts on a finite hyperparameter set `Φ`. Parametric
//! functions on `Φ` (labelings, i.e. partitions into level sets) are analysed
//! for permissibility: whether the group descends to an action on the label
//! space. Permissible functions correspond to invariant subspaces of the
//! function space over `Φ` under the regular representation, and every
//! parametric function can be associated with a unique Hermitian operator on
//! a chosen irreducible state space. From those operators the usual quantum
//! formalism follows: spectra, Born-rule transition probabilities, density
//! operators and expectations.
//!
//! Two worked systems ship as executable fixtures: the `S₃` triangle-in-a-
//! sphere experiment ([`triangle`]) and the spin-1/2 / EPR system ([`spin`]).

pub mod error;
pub mod group;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod operators;
pub mod parametric;
pub mod repr;
pub mod space;
pub mod spectrum;
pub mod spin;
pub mod triangle;

pub use error::{Error, Result};
pub use group::{FiniteGroup, GroupAction, Subgroup};
pub use parametric::{InducedGroup, ParamOrder, ParametricFunction};
pub use repr::{InvariantSubspace, Representation};

/// Default tolerance for homomorphism / unitarity / idempotence checks.
pub const TOL: f64 = 1e-9;
/// Eigenvalue clustering tolerance.
pub const EIG_CLUSTER_TOL: f64 = 1e-7;
/// Acceptance tolerance for linear-solve residuals.
pub const SOLVE_TOL: f64 = 1e-8;

/// Formats a float like C's `%.12g`: 12 significant digits, trailing zeros
/// trimmed, scientific notation outside the fixed-point range.
pub fn format_g(x: f64) -> String {
    format_g_prec(x, 12)
}

/// `%.{prec}g` formatting.
pub fn format_g_prec(x: f64, prec: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= prec as i32 {
        let mut s = format!("{:.*e}", prec.saturating_sub(1), x);
        // trim trailing zeros in the mantissa, keep the exponent
        if let Some(epos) = s.find('e') {
            let (mant, ex) = s.split_at(epos);
            let mant = mant.trim_end_matches('0').trim_end_matches('.');
            let ex: i32 = ex[1..].parse().unwrap_or(0);
            s = format!("{mant}e{ex:+03}");
        }
        s
    } else {
        let decimals = (prec as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}
