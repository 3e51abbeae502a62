//! Group-theoretic spectra of parametric functions.
//!
//! A 0-prespectrum of `θ` is a maximal subset of `Φ` on which every
//! function of `θ` coincides with the restriction of a state-space member.
//! The spectrum is selected among 0-prespectra by variance minimization,
//! and coincides with the eigenvalue set of the operator associated with
//! `θ` (the A-spectrum). Both routes are implemented and cross-checked.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::MAX_BRUTE_FORCE_POINTS;
use crate::linalg::{cluster_eigenvalues, hermitian_eigen, rank, spans, CMat};
use crate::operators::{solve_parameter_operator, SpectralOperator};
use crate::parametric::{maximal_permissible_subgroup, ParametricFunction};
use crate::space::StateSpace;
use crate::{EIG_CLUSTER_TOL, SOLVE_TOL};

/// Basis of the parametric function space: normalized level-set indicator
/// columns in the ambient coordinates.
pub fn parametric_basis(theta: &ParametricFunction) -> CMat {
    let m = theta.len();
    let levels = theta.level_sets();
    let mut basis = CMat::zeros(m, levels.len());
    for (j, (_, level)) in levels.iter().enumerate() {
        let w = 1.0 / (level.len() as f64).sqrt();
        for &phi in level {
            basis[(phi, j)] = crate::linalg::cr(w);
        }
    }
    basis
}

/// One examined subset in a spectrum search.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumCandidate {
    pub subset: Vec<usize>,
    /// Distinct parameter values on the subset, in label-sorted order.
    pub values: Vec<String>,
    /// Summed conditional variance of the probe over the subset's level
    /// slices (filled by the variance route).
    pub score: Option<f64>,
    /// Restricted-solve residual.
    pub residual: f64,
    /// Whether every family vector over the subset is an eigenvector of the
    /// restricted solve with the encoded value as eigenvalue.
    pub aligned: bool,
}

/// Selection route of a [`SpectrumReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumMethod {
    BruteForce,
    Eigen,
}

/// Result of a spectrum computation.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub parameter: String,
    pub method: SpectrumMethod,
    pub prespectrum: Vec<usize>,
    pub prespectrum_names: Vec<String>,
    /// Spectrum values: `(label, numeric value)` pairs.
    pub spectrum: Vec<(String, f64)>,
    pub variance_score: Option<f64>,
    pub candidates: Vec<SpectrumCandidate>,
    /// Eigenvalues of the associated operator (eigen route only).
    pub eigenvalues: Option<Vec<f64>>,
    /// Matching eigenvectors in state-space coordinates, one row per
    /// eigenvalue, entries as `[re, im]` pairs (eigen route only).
    pub eigenvectors: Option<Vec<Vec<(f64, f64)>>>,
    /// Deviation of the spectral projectors from a complete family.
    pub completeness_defect: f64,
}

/// All 0-prespectra of the subspace `v` against the state space: maximal
/// subsets `Φ₀` with `span(V|Φ₀) ⊆ span(M|Φ₀)`.
///
/// Exhaustive over subsets; capped at 12 points.
pub fn zero_prespectra(v_basis: &CMat, space: &StateSpace) -> Result<Vec<Vec<usize>>> {
    let m = space.action.set_size();
    if m > MAX_BRUTE_FORCE_POINTS {
        return Err(Error::SizeLimit {
            what: "prespectrum subset search",
            got: m,
            limit: MAX_BRUTE_FORCE_POINTS,
        });
    }
    let qualifies = |subset: &[usize]| -> bool {
        if subset.is_empty() {
            return false;
        }
        let v_restricted = restrict_rows(v_basis, subset);
        let m_restricted = space.restriction_to(subset);
        spans(&m_restricted, &v_restricted, 1e-9)
    };
    let mut qualifying: Vec<u32> = Vec::new();
    for mask in 1u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|&p| mask & (1 << p) != 0).collect();
        if qualifies(&subset) {
            qualifying.push(mask);
        }
    }
    let maximal: Vec<Vec<usize>> = qualifying
        .iter()
        .filter(|&&mask| {
            !qualifying
                .iter()
                .any(|&other| other != mask && other & mask == mask)
        })
        .map(|&mask| (0..m).filter(|&p| mask & (1 << p) != 0).collect())
        .collect();
    Ok(maximal)
}

fn restrict_rows(basis: &CMat, subset: &[usize]) -> CMat {
    CMat::from_fn(subset.len(), basis.ncols(), |r, c| basis[(subset[r], c)])
}

/// Summed conditional variance of a probe over the level slices of a
/// candidate subset, with the uniform conditional measure.
pub fn variance_score(theta: &ParametricFunction, subset: &[usize], probe: &[f64]) -> f64 {
    let values: BTreeSet<&str> = subset.iter().map(|&p| theta.value(p)).collect();
    let mut total = 0.0;
    for v in values {
        let slice: Vec<usize> = subset
            .iter()
            .copied()
            .filter(|&p| theta.value(p) == v)
            .collect();
        let mean: f64 = slice.iter().map(|&p| probe[p]).sum::<f64>() / slice.len() as f64;
        let var: f64 = slice
            .iter()
            .map(|&p| (probe[p] - mean).powi(2))
            .sum::<f64>()
            / slice.len() as f64;
        total += var;
    }
    total
}

fn distinct_values(theta: &ParametricFunction, subset: &[usize]) -> Vec<String> {
    let set: BTreeSet<String> = subset.iter().map(|&p| theta.value(p).to_string()).collect();
    set.into_iter().collect()
}

/// Examines one candidate: restricted operator solve and eigen-alignment.
fn examine_candidate(
    theta: &ParametricFunction,
    space: &StateSpace,
    encoding: &[(String, f64)],
    subset: &[usize],
) -> Result<(SpectrumCandidate, CMat)> {
    let enc = |label: &str| -> f64 {
        encoding
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    };
    let targets: Vec<f64> = subset.iter().map(|&p| enc(theta.value(p))).collect();
    let solved = solve_parameter_operator(&space.family, subset, &targets)?;
    let a = &solved.operator.matrix;
    let mut aligned = solved.residual <= SOLVE_TOL;
    if aligned {
        for (&phi, &target) in subset.iter().zip(&targets) {
            let f = &space.family.vectors[phi];
            if (a * f - f.scale(target)).norm() > 1e-6 {
                aligned = false;
                break;
            }
        }
    }
    Ok((
        SpectrumCandidate {
            subset: subset.to_vec(),
            values: distinct_values(theta, subset),
            score: None,
            residual: solved.residual,
            aligned,
        },
        a.clone(),
    ))
}

/// The A-spectrum: eigenvalues of the operator uniquely associated with the
/// parameter, realized on the 0-prespectrum whose restricted solve is
/// eigen-aligned. Returns both the report and the spectral form.
pub fn a_spectrum(
    theta: &ParametricFunction,
    space: &StateSpace,
    encoding: &[(String, f64)],
) -> Result<(SpectrumReport, SpectralOperator)> {
    let v_basis = parametric_basis(theta);
    let prespectra = zero_prespectra(&v_basis, space)?;
    let mut best: Option<(SpectrumCandidate, CMat)> = None;
    let mut candidates = Vec::new();
    for subset in &prespectra {
        let (cand, a) = examine_candidate(theta, space, encoding, subset)?;
        let better = cand.aligned
            && match &best {
                None => true,
                Some((b, _)) => {
                    cand.values.len() > b.values.len()
                        || (cand.values.len() == b.values.len() && cand.subset < b.subset)
                }
            };
        if better {
            best = Some((cand.clone(), a));
        }
        candidates.push(cand);
    }
    let Some((winner, a)) = best else {
        return Err(Error::NoAlignedSpectrum(theta.name.clone()));
    };

    // spectral projectors from the eigen-clusters matched to encoded values
    let (vals, vecs) = hermitian_eigen(&a);
    let clusters = cluster_eigenvalues(&vals, EIG_CLUSTER_TOL);
    let enc = |label: &str| -> f64 {
        encoding
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    };
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut projectors = Vec::new();
    for label in &winner.values {
        let value = enc(label);
        let Some((_, idxs)) = clusters.iter().find(|(rep, _)| (rep - value).abs() <= 1e-6) else {
            return Err(Error::NoAlignedSpectrum(theta.name.clone()));
        };
        let d = a.nrows();
        let mut p = CMat::zeros(d, d);
        for &i in idxs {
            let col = vecs.column(i);
            p += col * col.adjoint();
        }
        labels.push(label.clone());
        values.push(value);
        projectors.push(p);
    }
    let spectral = SpectralOperator {
        parameter: theta.name.clone(),
        labels: labels.clone(),
        values: values.clone(),
        projectors,
        tag: space.family.tag.clone(),
    };
    let report = SpectrumReport {
        parameter: theta.name.clone(),
        method: SpectrumMethod::Eigen,
        prespectrum: winner.subset.clone(),
        prespectrum_names: winner
            .subset
            .iter()
            .map(|&p| space.action.point_name(p).to_string())
            .collect(),
        spectrum: labels.into_iter().zip(values).collect(),
        variance_score: None,
        candidates,
        eigenvalues: Some(vals),
        eigenvectors: Some(
            (0..vecs.ncols())
                .map(|k| vecs.column(k).iter().map(|z| (z.re, z.im)).collect())
                .collect(),
        ),
        completeness_defect: spectral.completeness_defect(),
    };
    Ok((report, spectral))
}

/// The variance-minimizing 0-prespectrum for a probe function.
///
/// Ties at the minimal score are broken toward eigen-aligned candidates,
/// then larger value sets, then lexicographically.
pub fn spectrum_by_variance(
    theta: &ParametricFunction,
    space: &StateSpace,
    encoding: &[(String, f64)],
    probe: &[f64],
) -> Result<SpectrumReport> {
    if probe.len() != space.action.set_size() {
        return Err(Error::DimensionMismatch(
            "probe must be defined on all of Φ".into(),
        ));
    }
    let v_basis = parametric_basis(theta);
    let prespectra = zero_prespectra(&v_basis, space)?;
    if prespectra.is_empty() {
        return Err(Error::NoAlignedSpectrum(theta.name.clone()));
    }
    let mut candidates = Vec::new();
    for subset in &prespectra {
        let (mut cand, _) = examine_candidate(theta, space, encoding, subset)?;
        cand.score = Some(variance_score(theta, subset, probe));
        candidates.push(cand);
    }
    let winner = candidates
        .iter()
        .min_by(|a, b| {
            let sa = a.score.unwrap();
            let sb = b.score.unwrap();
            sa.partial_cmp(&sb)
                .unwrap()
                .then(b.aligned.cmp(&a.aligned))
                .then(b.values.len().cmp(&a.values.len()))
                .then(a.subset.cmp(&b.subset))
        })
        .unwrap()
        .clone();
    let enc = |label: &str| -> f64 {
        encoding
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN)
    };
    Ok(SpectrumReport {
        parameter: theta.name.clone(),
        method: SpectrumMethod::BruteForce,
        prespectrum: winner.subset.clone(),
        prespectrum_names: winner
            .subset
            .iter()
            .map(|&p| space.action.point_name(p).to_string())
            .collect(),
        spectrum: winner.values.iter().map(|l| (l.clone(), enc(l))).collect(),
        variance_score: winner.score,
        candidates,
        eigenvalues: None,
        eigenvectors: None,
        completeness_defect: f64::NAN,
    })
}

/// Detailed outcome of the two-route spectrum comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumEquivalenceReport {
    pub parameter: String,
    pub ok: bool,
    /// A-spectrum value set.
    pub a_spectrum_values: Vec<String>,
    /// Per-probe variance winners' value sets.
    pub variance_values: Vec<Vec<String>>,
    /// The A-spectrum's prespectrum attains the minimal variance score for
    /// every probe.
    pub variance_minimal: bool,
    /// Images of 0-prespectra under the reduced group are 0-prespectra, and
    /// value sets are unions of induced-group orbits.
    pub prespectra_closed: bool,
    /// The state space restricted to the chosen prespectrum is an invariant
    /// parametric subspace of the restricted function space.
    pub restriction_parametric: bool,
    pub mismatches: Vec<String>,
}

/// Cross-checks the operator route against the variance route over a set of
/// probe functions, together with the closure and restriction claims.
pub fn verify_spectrum_equivalence(
    theta: &ParametricFunction,
    space: &StateSpace,
    encoding: &[(String, f64)],
    probes: &[Vec<f64>],
) -> Result<SpectrumEquivalenceReport> {
    let mut mismatches = Vec::new();
    let (a_report, spectral) = a_spectrum(theta, space, encoding)?;
    let a_values: Vec<String> = a_report.spectrum.iter().map(|(l, _)| l.clone()).collect();

    if spectral.completeness_defect() > 1e-7 {
        mismatches.push(format!(
            "spectral projectors incomplete (defect {:.3e})",
            spectral.completeness_defect()
        ));
    }

    // variance route per probe
    let mut variance_values = Vec::new();
    let mut variance_minimal = true;
    for probe in probes {
        let v_report = spectrum_by_variance(theta, space, encoding, probe)?;
        let vals: Vec<String> = v_report.spectrum.iter().map(|(l, _)| l.clone()).collect();
        if vals != a_values {
            mismatches.push(format!(
                "variance winner {:?} differs from A-spectrum {:?}",
                vals, a_values
            ));
        }
        let min_score = v_report
            .candidates
            .iter()
            .filter_map(|c| c.score)
            .fold(f64::INFINITY, f64::min);
        let a_score = variance_score(theta, &a_report.prespectrum, probe);
        if a_score > min_score + 1e-10 {
            variance_minimal = false;
            mismatches.push(format!(
                "A-spectrum prespectrum score {a_score:.6} exceeds minimum {min_score:.6}"
            ));
        }
        variance_values.push(vals);
    }

    // the family of 0-prespectra must be closed under the reduced group,
    // and each value set must be a union of induced orbits
    let g_a = maximal_permissible_subgroup(theta, &space.action);
    let v_basis = parametric_basis(theta);
    let prespectra = zero_prespectra(&v_basis, space)?;
    let as_sets: BTreeSet<Vec<usize>> = prespectra.iter().cloned().collect();
    let mut prespectra_closed = true;
    for subset in &prespectra {
        for &g in g_a.members() {
            let image: BTreeSet<usize> = subset.iter().map(|&p| space.action.apply(g, p)).collect();
            let image: Vec<usize> = image.into_iter().collect();
            if !as_sets.contains(&image) {
                prespectra_closed = false;
                mismatches.push(format!(
                    "image of prespectrum {subset:?} under g={g} is not a prespectrum"
                ));
            }
        }
    }
    if let Ok(ind) = crate::parametric::induced_group(theta, &space.action, &g_a) {
        let value_set: BTreeSet<String> = a_values.iter().cloned().collect();
        for orbit in ind.value_orbits() {
            let orbit_labels: BTreeSet<String> =
                orbit.iter().map(|&v| ind.values[v].clone()).collect();
            let touched = orbit_labels.intersection(&value_set).count();
            if touched != 0 && touched != orbit_labels.len() {
                prespectra_closed = false;
                mismatches.push(format!("spectrum cuts induced orbit {orbit_labels:?}"));
            }
        }
    }

    // the state space restricted to the chosen prespectrum must be an
    // invariant parametric subspace of the restricted function space
    let restriction_parametric =
        restriction_is_parametric(space, &a_report.prespectrum, &g_a, &mut mismatches);

    let ok = mismatches.is_empty();
    Ok(SpectrumEquivalenceReport {
        parameter: theta.name.clone(),
        ok,
        a_spectrum_values: a_values,
        variance_values,
        variance_minimal,
        prespectra_closed,
        restriction_parametric,
        mismatches,
    })
}

fn restriction_is_parametric(
    space: &StateSpace,
    subset: &[usize],
    g_a: &crate::group::Subgroup,
    mismatches: &mut Vec<String>,
) -> bool {
    let restricted = space.restriction_to(subset);
    let mut ok = true;
    // invariance under the subset-preserving part of the reduced group
    for &g in g_a.members() {
        let image: BTreeSet<usize> = subset.iter().map(|&p| space.action.apply(g, p)).collect();
        if image != subset.iter().copied().collect::<BTreeSet<usize>>() {
            continue;
        }
        let permuted = CMat::from_fn(subset.len(), restricted.ncols(), |r, c| {
            let target = space.action.apply(g, subset[r]);
            let row = subset.iter().position(|&p| p == target).unwrap();
            restricted[(row, c)]
        });
        if !spans(&restricted, &permuted, 1e-8) {
            ok = false;
            mismatches.push(format!("restricted space not invariant under g={g}"));
        }
    }
    // parametric: the restriction equals the indicator span of the
    // partition it induces
    let k = subset.len();
    let dim = rank(&restricted, 1e-9);
    let mut partition: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in 0..i {
            let equal = (0..restricted.ncols())
                .all(|c| (restricted[(i, c)] - restricted[(j, c)]).norm() < 1e-9);
            if equal {
                partition[i] = partition[j];
                break;
            }
        }
    }
    let blocks: BTreeSet<usize> = partition.iter().copied().collect();
    if blocks.len() != dim {
        ok = false;
        mismatches.push(format!(
            "restricted space has dimension {dim} but induces {} point classes",
            blocks.len()
        ));
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FiniteGroup, GroupAction};
    use crate::space::{StateSpace, StateSpaceSelector};
    use std::sync::Arc;

    fn c3_space() -> StateSpace {
        let g = Arc::new(FiniteGroup::cyclic(3).unwrap());
        let act = GroupAction::regular(g);
        StateSpace::build(act, 7, StateSpaceSelector::Index(1), 0).unwrap()
    }

    #[test]
    fn full_set_when_v_inside_m() {
        // V = M: the whole point set is the unique 0-prespectrum
        let space = c3_space();
        let v = space.m_basis().clone();
        let pres = zero_prespectra(&v, &space).unwrap();
        assert_eq!(pres, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn variance_score_zero_on_singleton_slices() {
        let theta = ParametricFunction::from_strs("t", &["a", "b", "c"]);
        let probe = vec![0.3, -1.0, 2.0];
        assert_eq!(variance_score(&theta, &[0, 1], &probe), 0.0);
        // two points in one slice
        let theta2 = ParametricFunction::from_strs("t2", &["a", "a", "c"]);
        let s = variance_score(&theta2, &[0, 1], &probe);
        let mean: f64 = (0.3 - 1.0) / 2.0;
        let expected = ((0.3f64 - mean).powi(2) + (-1.0f64 - mean).powi(2)) / 2.0;
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn identity_parameter_on_cyclic() {
        // M is 1-dimensional here: prespectra are singletons, spectrum is a
        // single label, and the variance route agrees trivially
        let space = c3_space();
        let theta = ParametricFunction::identity("id", space.action.point_names());
        let encoding = theta.numeric_encoding(None);
        let (report, spectral) = a_spectrum(&theta, &space, &encoding).unwrap();
        assert_eq!(report.prespectrum.len(), 1);
        assert_eq!(spectral.labels.len(), 1);
        let probe = vec![0.1, 0.9, -0.4];
        let v = spectrum_by_variance(&theta, &space, &encoding, &probe).unwrap();
        assert_eq!(v.spectrum.len(), 1);
    }
}
