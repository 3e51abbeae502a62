//! The measurement layer: statistical states over the hyperparameter set,
//! ideal measurement with collapse, Born-rule transition probabilities for
//! vector states, the Bayes estimator under Haar prior and the invariant
//! risk identity.
//!
//! A state in the sense of the statistical reconstruction is a focus
//! parameter together with a value (pure) or a probability vector over its
//! range (mixed); its operational content is a distribution over `Φ`. An
//! ideal measurement of a new parameter resamples within the observed level
//! set: information about the previous focus survives exactly when the old
//! focus is permissible with respect to the new parameter's maximal group.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{orbits, GroupAction, Subgroup};
use crate::linalg::CVec;
use crate::operators::{BasisTag, SpectralOperator};
use crate::parametric::{
    induced_group, is_permissible, maximal_permissible_subgroup, ParametricFunction,
};

/// Value assignment of a state: a point value in the focus's range or a
/// probability vector over it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Assignment {
    Pure(String),
    Mixed(Vec<(String, f64)>),
}

/// A statistical state: focus parameter, assignment, and the realized
/// distribution over `Φ`.
#[derive(Debug, Clone, Serialize)]
pub struct State {
    pub focus: ParametricFunction,
    pub assignment: Assignment,
    pub distribution: Vec<f64>,
}

impl State {
    /// Total ignorance: Haar (uniform) distribution, constant focus.
    pub fn haar(m: usize) -> State {
        State {
            focus: ParametricFunction::constant("none", m),
            assignment: Assignment::Pure("*".into()),
            distribution: vec![1.0 / m as f64; m],
        }
    }

    /// Pure state at a parameter value: uniform on the level set.
    pub fn pure(theta: &ParametricFunction, value: &str) -> Result<State> {
        let level = theta.level_set_of_value(value)?;
        let mut distribution = vec![0.0; theta.len()];
        for &phi in &level {
            distribution[phi] = 1.0 / level.len() as f64;
        }
        Ok(State {
            focus: theta.clone(),
            assignment: Assignment::Pure(value.to_string()),
            distribution,
        })
    }

    /// Mixed state over the parameter's range.
    pub fn mixed(theta: &ParametricFunction, prior: &[(String, f64)]) -> Result<State> {
        let total: f64 = prior.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-9 || prior.iter().any(|(_, p)| *p < -1e-12) {
            return Err(Error::BadPrior(format!("weights sum to {total}")));
        }
        let mut distribution = vec![0.0; theta.len()];
        for (value, p) in prior {
            let level = theta.level_set_of_value(value)?;
            for &phi in &level {
                distribution[phi] += p / level.len() as f64;
            }
        }
        Ok(State {
            focus: theta.clone(),
            assignment: Assignment::Mixed(prior.to_vec()),
            distribution,
        })
    }

    /// Outcome distribution of measuring `theta` in this state.
    pub fn outcome_distribution(&self, theta: &ParametricFunction) -> Vec<(String, f64)> {
        theta
            .values()
            .into_iter()
            .map(|v| {
                let p: f64 = (0..theta.len())
                    .filter(|&phi| theta.value(phi) == v)
                    .map(|phi| self.distribution[phi])
                    .sum();
                (v, p)
            })
            .collect()
    }
}

/// One measurement record: parameter, outcome, and the outcome
/// probabilities it was drawn from.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub parameter: String,
    pub outcome: String,
    pub probabilities: Vec<(String, f64)>,
}

/// Ideal measurement of `theta` in `state`.
///
/// The outcome is sampled from the state's distribution; the new state is
/// pure at the outcome. Information carried by the old focus is kept (the
/// distribution is conditioned) when the old focus is permissible with
/// respect to the measured parameter's maximal subgroup; otherwise the
/// system is re-randomized over the observed level set, which is the ideal-
/// experiment rule for a disturbing measurement.
pub fn measure(
    state: &State,
    theta: &ParametricFunction,
    action: &GroupAction,
    rng: &mut ChaCha8Rng,
) -> Result<(MeasurementRecord, State)> {
    if theta.len() != state.distribution.len() {
        return Err(Error::DimensionMismatch(
            "state and parameter live on different point sets".into(),
        ));
    }
    let probabilities = state.outcome_distribution(theta);
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    let mut outcome = probabilities.last().unwrap().0.clone();
    for (v, p) in &probabilities {
        acc += p;
        if draw < acc {
            outcome = v.clone();
            break;
        }
    }

    let g_new = maximal_permissible_subgroup(theta, action);
    let compatible = is_permissible(&state.focus, action, &g_new).permissible;
    let uninformative_focus = state.focus.values().len() <= 1;
    let new_state = if compatible && !uninformative_focus {
        if crate::parametric::refines(&state.focus, theta) {
            // the outcome is a function of what is already known; nothing
            // to update
            state.clone()
        } else {
            // condition the current distribution on the observed level set
            let level = theta.level_set_of_value(&outcome)?;
            let mut dist = vec![0.0; theta.len()];
            let mut norm = 0.0;
            for &phi in &level {
                dist[phi] = state.distribution[phi];
                norm += state.distribution[phi];
            }
            if norm <= 0.0 {
                // the outcome had mass zero up to rounding; fall back to
                // the fresh level-set state
                State::pure(theta, &outcome)?
            } else {
                for d in dist.iter_mut() {
                    *d /= norm;
                }
                let compound = state.focus.compound(theta);
                let label = format!(
                    "({},{})",
                    match &state.assignment {
                        Assignment::Pure(v) => v.clone(),
                        Assignment::Mixed(_) => "mixed".into(),
                    },
                    outcome
                );
                State {
                    focus: compound,
                    assignment: Assignment::Pure(label),
                    distribution: dist,
                }
            }
        }
    } else {
        State::pure(theta, &outcome)?
    };
    Ok((
        MeasurementRecord {
            parameter: theta.name.clone(),
            outcome,
            probabilities,
        },
        new_state,
    ))
}

/// Convenience: a fresh deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Born-rule transition probability between unit vectors:
/// the squared modulus of the inner product.
///
/// The reconstruction's transition formula is stated as an unadorned square
/// of the inner product; for complex vectors the squared modulus is the
/// only reading that yields real probabilities, and it is what makes the
/// probability symmetric in its arguments (reversibility).
pub fn transition_probability(
    f_a: &CVec,
    f_b: &CVec,
    tag_a: &BasisTag,
    tag_b: &BasisTag,
) -> Result<f64> {
    if tag_a != tag_b {
        return Err(Error::BasisMismatch {
            left: tag_a.0.clone(),
            right: tag_b.0.clone(),
        });
    }
    for f in [f_a, f_b] {
        let dev = (f.norm() - 1.0).abs();
        if dev > 1e-6 {
            return Err(Error::NotUnitNorm(dev));
        }
    }
    Ok(f_a.dotc(f_b).norm_sqr())
}

/// Conditional expectation of `θ_b` in a pure vector state:
/// `f† A_b f`, which equals the spectrum-weighted sum of transition
/// probabilities.
pub fn conditional_expectation_qt(
    state_vector: &CVec,
    state_tag: &BasisTag,
    spectral_b: &SpectralOperator,
) -> Result<f64> {
    if state_tag != &spectral_b.tag {
        return Err(Error::BasisMismatch {
            left: state_tag.0.clone(),
            right: spectral_b.tag.0.clone(),
        });
    }
    let a = spectral_b.operator();
    Ok((state_vector.adjoint() * &a.matrix * state_vector)[(0, 0)].re)
}

/// Bayes estimator under Haar prior for a finite likelihood table:
/// `θ̂(x) = Σ_θ θ q^θ(x) ν̃(θ)` with uniform `ν̃`, after normalizing each
/// column so `Σ_θ q^θ(x) ν̃(θ) = 1`.
pub fn bayes_estimator_haar(
    theta_values: &[f64],
    likelihood: &[Vec<f64>],
    x: usize,
) -> Result<f64> {
    let k = theta_values.len();
    if likelihood.len() != k {
        return Err(Error::BadLikelihood(format!(
            "{} rows for {} parameter values",
            likelihood.len(),
            k
        )));
    }
    let cols = likelihood[0].len();
    if x >= cols {
        return Err(Error::OutOfRange(format!("x = {x} beyond {cols} outcomes")));
    }
    let weight = 1.0 / k as f64;
    let norm: f64 = likelihood.iter().map(|row| row[x] * weight).sum();
    if norm <= 1e-300 {
        return Err(Error::BadLikelihood(format!(
            "column {x} integrates to zero"
        )));
    }
    Ok(theta_values
        .iter()
        .zip(likelihood)
        .map(|(&t, row)| t * (row[x] / norm) * weight)
        .sum())
}

/// Outcome of the invariant-risk verification.
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub loss_invariant: bool,
    pub constant_per_orbit: bool,
    pub max_spread: f64,
    pub risks: Vec<f64>,
    pub violating_pair: Option<(usize, usize)>,
}

/// Verifies the invariant-risk identity: for an invariant loss and a
/// permissible target, the expected loss of an equivariant estimator is
/// constant in the hyperparameter, conditionally on each orbit.
pub fn invariant_risk_check(
    theta: &ParametricFunction,
    action: &GroupAction,
    subgroup: &Subgroup,
    likelihood_per_point: &[Vec<f64>],
    estimator: &dyn Fn(usize) -> String,
    loss: &dyn Fn(&str, &str) -> f64,
    tol: f64,
) -> Result<RiskReport> {
    let m = action.set_size();
    if likelihood_per_point.len() != m {
        return Err(Error::BadLikelihood(format!(
            "{} likelihood rows for {} points",
            likelihood_per_point.len(),
            m
        )));
    }
    // loss invariance under the induced group
    let mut loss_invariant = true;
    if let Ok(ind) = induced_group(theta, action, subgroup) {
        for map in &ind.value_action {
            for (a, va) in ind.values.iter().enumerate() {
                for (b, vb) in ind.values.iter().enumerate() {
                    let la = &ind.values[map[a]];
                    let lb = &ind.values[map[b]];
                    if (loss(la, lb) - loss(va, vb)).abs() > tol {
                        loss_invariant = false;
                    }
                }
            }
        }
    }
    let risks: Vec<f64> = (0..m)
        .map(|phi| {
            likelihood_per_point[phi]
                .iter()
                .enumerate()
                .map(|(x, &p)| p * loss(&estimator(x), theta.value(phi)))
                .sum()
        })
        .collect();
    let mut max_spread: f64 = 0.0;
    let mut violating_pair = None;
    for block in orbits(action, subgroup) {
        for window in block.windows(2) {
            let spread = (risks[window[0]] - risks[window[1]]).abs();
            if spread > max_spread {
                max_spread = spread;
                if spread > tol {
                    violating_pair = Some((window[0], window[1]));
                }
            }
        }
    }
    Ok(RiskReport {
        loss_invariant,
        constant_per_orbit: violating_pair.is_none(),
        max_spread,
        risks,
        violating_pair,
    })
}
