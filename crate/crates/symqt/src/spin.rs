//! The spin-1/2 system and the EPR pair.
//!
//! The hyperparameter is a unit spin vector; the measurable quantity along
//! an axis `a` is its component `θ_a = cos α`. An ideal two-valued
//! measurement has outcome distribution `P(x = ∓1) = (1 ∓ θ_a)/2`. The
//! rotation group is handled by closed-form spinor formulas rather than the
//! finite machinery; operators are recovered numerically from sampled
//! coherent families and cross-checked against the Pauli algebra.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, cr, CMat, CVec};
use crate::measurement::rng_from_seed;
use crate::operators::{solve_parameter_operator, BasisTag, QOperator};

/// The Pauli matrices `(σ_x, σ_y, σ_z)`.
pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]),
        CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
    ]
}

/// A real unit 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis(pub [f64; 3]);

impl Axis {
    pub fn new(v: [f64; 3]) -> Result<Axis> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitNorm((n - 1.0).abs()));
        }
        Ok(Axis(v))
    }

    pub fn normalized(v: [f64; 3]) -> Result<Axis> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-12 {
            return Err(Error::OutOfRange("zero direction".into()));
        }
        Ok(Axis([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn dot(&self, other: &Axis) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn negated(&self) -> Axis {
        Axis([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// Uniform direction on the sphere.
    pub fn random(rng: &mut ChaCha8Rng) -> Axis {
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let r = (1.0 - z * z).max(0.0).sqrt();
        Axis([r * phi.cos(), r * phi.sin(), z])
    }
}

/// The spin operator along an axis: `a · σ`.
pub fn spin_operator(axis: &Axis) -> QOperator {
    let [sx, sy, sz] = pauli();
    let m = sx.scale(axis.0[0]) + sy.scale(axis.0[1]) + sz.scale(axis.0[2]);
    QOperator::new(m, BasisTag("spin".into()))
}

/// The `+1` eigenvector of `a · σ` (spinor pointing along the axis).
pub fn spinor_plus(axis: &Axis) -> CVec {
    let [x, y, z] = axis.0;
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    CVec::from_row_slice(&[
        cr((theta / 2.0).cos()),
        c(phi.cos(), phi.sin()) * (theta / 2.0).sin(),
    ])
}

/// Ideal measurement distribution along the axis when the spin component is
/// `θ_a`: returns `(P(x = -1), P(x = +1))`.
pub fn spin_probability(theta_a: f64) -> Result<(f64, f64)> {
    if theta_a.abs() > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!(
            "spin component {theta_a} outside [-1, 1]"
        )));
    }
    let t = theta_a.clamp(-1.0, 1.0);
    Ok(((1.0 - t) / 2.0, (1.0 + t) / 2.0))
}

/// Conditional expectation of the outcome given the hyperparameter:
/// `E(x | φ) = θ_a`, directly from the two-point distribution.
pub fn spin_outcome_expectation(theta_a: f64) -> Result<f64> {
    let (pm, pp) = spin_probability(theta_a)?;
    Ok(pp - pm)
}

/// Exact EPR correlation between spin measurements along axes at angle `u`:
/// observer A's conditional prior puts mass 1/2 on `ψ = ±a`, which makes
/// `θ_a = ±1` equiprobable, and the component of `-ψ` along `b` is
/// `-θ_a cos u`; the correlation is the prior average of
/// `E(x_a | ψ) · E(x_b | -ψ)`.
pub fn epr_correlation_exact(u: f64) -> f64 {
    let mut total = 0.0;
    for theta_a in [-1.0, 1.0] {
        let e_a = spin_outcome_expectation(theta_a).unwrap();
        let e_b = spin_outcome_expectation(-theta_a * u.cos()).unwrap();
        total += 0.5 * e_a * e_b;
    }
    total
}

/// Which observer's conditional prior drives the Monte Carlo sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observer {
    A,
    B,
}

/// Monte Carlo estimate of the EPR correlation at angle `u`: samples the
/// observer's two-point prior, draws both ideal outcomes from the two-point
/// distribution, and averages the product. Returns
/// `(estimate, standard_error, mean_x_a, mean_x_b)`.
pub fn epr_correlation_mc(
    u: f64,
    n_samples: usize,
    seed: u64,
    observer: Observer,
) -> Result<(f64, f64, f64, f64)> {
    if n_samples == 0 {
        return Err(Error::OutOfRange("n_samples must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let draw = |rng: &mut ChaCha8Rng, theta: f64| -> f64 {
        let (p_minus, _) = spin_probability(theta).unwrap();
        if rng.random::<f64>() < p_minus {
            -1.0
        } else {
            1.0
        }
    };
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut sum_a = 0.0;
    let mut sum_b = 0.0;
    for _ in 0..n_samples {
        // the prior concentrates on the two orientations of the measured
        // axis; the partner spin is the opposite vector
        let own: f64 = if rng.random::<f64>() < 0.5 { 1.0 } else { -1.0 };
        let (theta_a, theta_b) = match observer {
            Observer::A => (own, -own * u.cos()),
            Observer::B => (-own * u.cos(), own),
        };
        let x_a = draw(&mut rng, theta_a);
        let x_b = draw(&mut rng, theta_b);
        let prod = x_a * x_b;
        sum += prod;
        sum_sq += prod * prod;
        sum_a += x_a;
        sum_b += x_b;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    let se = (var / n).sqrt();
    Ok((mean, se, sum_a / n, sum_b / n))
}

/// Recovers the spin operator along `axis` from a sampled coherent family:
/// solves `f_ψ† A f_ψ = ψ · a` over spinors pointing in sampled directions.
pub fn operator_from_sampled_family(axis: &Axis, n_samples: usize, seed: u64) -> Result<QOperator> {
    let mut rng = rng_from_seed(seed);
    let mut vectors = Vec::with_capacity(n_samples);
    let mut targets = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let psi = Axis::random(&mut rng);
        vectors.push(spinor_plus(&psi));
        targets.push(psi.dot(axis));
    }
    let family = crate::operators::CoherentFamily {
        vectors,
        carriers: (0..n_samples).collect(),
        base_point: 0,
        periodic: false,
        tag: BasisTag("spin".into()),
    };
    let points: Vec<usize> = (0..n_samples).collect();
    let solved = solve_parameter_operator(&family, &points, &targets)?;
    if solved.residual > crate::SOLVE_TOL {
        return Err(Error::ContainmentFailed {
            name: format!("spin along {:?}", axis.0),
            residual: solved.residual,
            tol: crate::SOLVE_TOL,
        });
    }
    Ok(solved.operator)
}

/// A configured spin measurement pair: two axes and the EPR pairing flag
/// (opposite spin vectors from a total-spin-zero history).
#[derive(Debug, Clone)]
pub struct SpinModel {
    pub axis_a: Axis,
    pub axis_b: Axis,
    pub epr_paired: bool,
}

impl SpinModel {
    pub fn new(axis_a: Axis, axis_b: Axis, epr_paired: bool) -> SpinModel {
        SpinModel {
            axis_a,
            axis_b,
            epr_paired,
        }
    }

    /// Angle between the two measurement axes.
    pub fn angle(&self) -> f64 {
        self.axis_a.dot(&self.axis_b).clamp(-1.0, 1.0).acos()
    }

    /// The spin operators along the two axes.
    pub fn operators(&self) -> (QOperator, QOperator) {
        (spin_operator(&self.axis_a), spin_operator(&self.axis_b))
    }

    /// Exact correlation of the paired measurements; only defined for the
    /// EPR-paired configuration.
    pub fn correlation_exact(&self) -> Result<f64> {
        if !self.epr_paired {
            return Err(Error::OutOfRange(
                "correlation formula applies to the EPR-paired configuration".into(),
            ));
        }
        Ok(epr_correlation_exact(self.angle()))
    }

    /// Monte Carlo correlation estimate from an observer's conditional
    /// prior.
    pub fn correlation_mc(
        &self,
        n_samples: usize,
        seed: u64,
        observer: Observer,
    ) -> Result<(f64, f64, f64, f64)> {
        if !self.epr_paired {
            return Err(Error::OutOfRange(
                "correlation sampling applies to the EPR-paired configuration".into(),
            ));
        }
        epr_correlation_mc(self.angle(), n_samples, seed, observer)
    }
}

/// One row of an EPR sweep.
#[derive(Debug, Clone)]
pub struct EprRow {
    pub u: f64,
    pub exact: f64,
    pub mc_estimate: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Runs the sweep and renders the CSV (`u,exact,mc_estimate,std_error,n`).
pub fn epr_sweep_csv(angles: &[f64], n_samples: usize, seed: u64) -> Result<(Vec<EprRow>, String)> {
    let mut rows = Vec::new();
    let mut csv = String::from("u,exact,mc_estimate,std_error,n\n");
    for (k, &u) in angles.iter().enumerate() {
        let exact = epr_correlation_exact(u);
        let (mc, se, _, _) =
            epr_correlation_mc(u, n_samples, seed.wrapping_add(k as u64), Observer::A)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::format_g(u),
            crate::format_g(exact),
            crate::format_g(mc),
            crate::format_g(se),
            n_samples
        ));
        rows.push(EprRow {
            u,
            exact,
            mc_estimate: mc,
            std_error: se,
            n: n_samples,
        });
    }
    Ok((rows, csv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, max_norm};
    use crate::measurement::transition_probability;

    #[test]
    fn probability_endpoints() {
        assert_eq!(spin_probability(0.0).unwrap(), (0.5, 0.5));
        assert_eq!(spin_probability(1.0).unwrap(), (0.0, 1.0));
        assert_eq!(spin_probability(0.5).unwrap(), (0.25, 0.75));
        assert!(spin_probability(1.5).is_err());
    }

    #[test]
    fn outcome_expectation_is_theta() {
        for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((spin_outcome_expectation(t).unwrap() - t).abs() < 1e-12);
        }
    }

    #[test]
    fn spinors_match_born_rule() {
        let tag = BasisTag("spin".into());
        let mut rng = rng_from_seed(11);
        for _ in 0..200 {
            let a = Axis::random(&mut rng);
            let b = Axis::random(&mut rng);
            let cos_u = a.dot(&b);
            let p = transition_probability(&spinor_plus(&a), &spinor_plus(&b), &tag, &tag).unwrap();
            assert!((p - (1.0 + cos_u) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spin_operator_spectrum() {
        let axis = Axis::normalized([0.3, -0.2, 0.9]).unwrap();
        let op = spin_operator(&axis);
        let (vals, _) = hermitian_eigen(&op.matrix);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // the +1 spinor is the +1 eigenvector
        let f = spinor_plus(&axis);
        assert!(((&op.matrix * &f) - &f).norm() < 1e-10);
    }

    #[test]
    fn epr_exact_matches_formula() {
        for k in 0..=6 {
            let u = k as f64 * std::f64::consts::PI / 6.0;
            assert!((epr_correlation_exact(u) + u.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn sampled_family_recovers_pauli_operator() {
        let axis = Axis::normalized([1.0, 2.0, -0.5]).unwrap();
        let recovered = operator_from_sampled_family(&axis, 40, 5).unwrap();
        let direct = spin_operator(&axis);
        assert!(max_norm(&(&recovered.matrix - &direct.matrix)) < 1e-8);
    }
}
