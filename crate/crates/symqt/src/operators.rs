//! Operator construction: the Fourier-component linear solve on an
//! irreducible block, block-diagonal assembly for reducible ambients,
//! parameter operators over coherent families, conditional-expectation
//! projections, density operators and expectation/probability formulas.
//!
//! Every solver reports its residual; no existence or uniqueness claim is
//! assumed silently.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupAction;
use crate::linalg::{cr, hermitian_eigen, lstsq, lstsq_real, CMat, CVec, LstsqMethod, C64};
use crate::parametric::{is_permissible, ParametricFunction};
use crate::repr::{InvariantSubspace, Representation};
use crate::{SOLVE_TOL, TOL};

/// Identifies the basis/family an operator was constructed in. Mixing
/// operators across tags is rejected: the reference vector of a
/// construction must be held fixed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTag(pub String);

impl BasisTag {
    pub fn ambient(dim: usize) -> Self {
        BasisTag(format!("ambient[{dim}]"))
    }
}

/// A complex operator on a tagged basis.
#[derive(Debug, Clone)]
pub struct QOperator {
    pub matrix: CMat,
    pub hermitian: bool,
    pub tag: BasisTag,
}

impl QOperator {
    pub fn new(matrix: CMat, tag: BasisTag) -> Self {
        let hermitian =
            (&matrix - matrix.adjoint()).norm() <= TOL * (matrix.nrows() as f64).max(1.0);
        QOperator {
            matrix,
            hermitian,
            tag,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Clustered eigenvalues (Hermitian operators only).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = hermitian_eigen(&self.matrix);
        vals
    }
}

fn check_tags(a: &BasisTag, b: &BasisTag) -> Result<()> {
    if a != b {
        return Err(Error::BasisMismatch {
            left: a.0.clone(),
            right: b.0.clone(),
        });
    }
    Ok(())
}

/// The orbit `{U(g) f₀}` of a unit vector under an exact transitive action,
/// indexed by the points of `Φ` through `φ = g φ₀`.
#[derive(Debug, Clone)]
pub struct CoherentFamily {
    /// Coordinates of `f_φ` in the state-space basis, one per point.
    pub vectors: Vec<CVec>,
    /// The group element carrying the base point to each `φ`.
    pub carriers: Vec<usize>,
    pub base_point: usize,
    /// Distinct points whose vectors coincide up to phase (strict
    /// periodicity of `f₀`); the homomorphy is then not an isomorphy.
    pub periodic: bool,
    pub tag: BasisTag,
}

impl CoherentFamily {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Builds the coherent family `f_φ = U(g) f₀` for `φ = g φ₀`.
///
/// Requires the action to be transitive and exact so the carrier `g` is
/// unique for every point.
pub fn coherent_family(
    rep_on_m: &Representation,
    f0: &CVec,
    action: &GroupAction,
    base_point: usize,
    tag: BasisTag,
) -> Result<CoherentFamily> {
    let norm = f0.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::NotUnitNorm((norm - 1.0).abs()));
    }
    let m = action.set_size();
    let full = crate::group::Subgroup::full(action.group().clone());
    if !crate::group::is_transitive(action, &full) || !crate::group::is_exact(action, &full) {
        return Err(Error::NotTransitiveExact);
    }
    let mut carriers = vec![usize::MAX; m];
    for g in action.group().elements() {
        let target = action.apply(g, base_point);
        if carriers[target] != usize::MAX {
            return Err(Error::NotTransitiveExact);
        }
        carriers[target] = g;
    }
    let vectors: Vec<CVec> = carriers.iter().map(|&g| rep_on_m.matrix(g) * f0).collect();
    let mut periodic = false;
    for i in 0..m {
        for j in i + 1..m {
            if (vectors[i].dotc(&vectors[j]).norm() - 1.0).abs() < 1e-9 {
                periodic = true;
            }
        }
    }
    Ok(CoherentFamily {
        vectors,
        carriers,
        base_point,
        periodic,
        tag,
    })
}

/// Result of a linear operator solve, with its residuals.
#[derive(Debug, Clone)]
pub struct SolvedOperator {
    pub operator: QOperator,
    /// Residual of the defining (pointwise) equations.
    pub residual: f64,
    /// Mismatch of the Fourier components `Σ_ij Q_ij D_ij - ĉ(U)`; zero
    /// whenever the pointwise equations are satisfied. Absent for solves
    /// that are not indexed by group elements.
    pub fourier_residual: Option<f64>,
}

/// Unique-operator solve on an irreducible block: find `Q` with
/// `q(g) = v† U(g)† Q U(g) v = c(g)`.
///
/// The system is solved pointwise over the group, which is the strong form
/// of the Fourier-component identity `Σ_ij Q_ij D_ij = ĉ(U)` with
/// `D_ij = (1/|G|) Σ_g (U(g)v)_i* (U(g)v)_j U(g)`: averaging the pointwise
/// rows against `U(g)` recovers exactly that matrix equation. The
/// Fourier-component system alone does not determine `Q` (products of
/// matrix elements of one block spread their Fourier mass over the block's
/// tensor square), so uniqueness lives in the pointwise system; both
/// residuals are reported.
pub fn solve_operator_irreducible(
    irrep: &Representation,
    v: &CVec,
    c_fn: &[C64],
    method: LstsqMethod,
) -> Result<SolvedOperator> {
    if !irrep.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let d = irrep.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} vs block dimension {d}",
            v.len()
        )));
    }
    if v.norm() < 1e-12 {
        return Err(Error::ZeroProjectionBlock { block: 0, dim: d });
    }
    let n = irrep.group().order();
    if c_fn.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "c has {} values for group of order {n}",
            c_fn.len()
        )));
    }
    // pointwise rows: Σ_ij Q_ij (U(g)v)_i* (U(g)v)_j = c(g)
    let mut sys = CMat::zeros(n, d * d);
    let rhs = CVec::from_fn(n, |g, _| c_fn[g]);
    for g in irrep.group().elements() {
        let uv = irrep.matrix(g) * v;
        for i in 0..d {
            for j in 0..d {
                sys[(g, i * d + j)] = uv[i].conj() * uv[j];
            }
        }
    }
    let (x, residual) = lstsq(&sys, &rhs, method, 1e-10)?;
    let q = CMat::from_fn(d, d, |i, j| x[i * d + j]);

    // mismatch of the Fourier-component form of the defining equation
    let w = irrep.group().haar_weight();
    let mut mismatch = CMat::zeros(d, d);
    for g in irrep.group().elements() {
        let uv = irrep.matrix(g) * v;
        let q_val = (uv.adjoint() * &q * &uv)[(0, 0)];
        mismatch += irrep.matrix(g).scale(w) * (q_val - c_fn[g]);
    }
    Ok(SolvedOperator {
        operator: QOperator::new(q, BasisTag(format!("irrep[{d}]"))),
        residual,
        fourier_residual: Some(mismatch.norm()),
    })
}

/// Report from [`build_operator`].
#[derive(Debug, Clone)]
pub struct BuiltOperator {
    /// Operator in the ambient basis, assembled block-diagonally.
    pub operator: QOperator,
    /// Per-block operators in their own bases.
    pub blocks: Vec<CMat>,
    /// Blocks skipped because `f_r = 0`; the operator is set to zero there.
    pub zero_blocks: Vec<usize>,
    /// Pointwise residual `max_g |(U(g)f₀)† A U(g)f₀ - c(g)|`.
    pub residual: f64,
}

/// Builds a block-diagonal operator `A` with
/// `(U_R(g) f₀)† A U_R(g) f₀ = c(g)` for all `g`, given an irreducible
/// decomposition of the ambient representation.
///
/// Blocks where `f₀` projects to zero cannot carry information: they are
/// forced to zero and flagged, and the solve fails when `c` has a Fourier
/// component there. The per-block unknowns are solved jointly against the
/// pointwise identity (a product of matrix elements of one block spreads
/// over several Fourier components, so blocks couple through `c`).
pub fn build_operator(
    ambient: &Representation,
    blocks: &[InvariantSubspace],
    f0: &CVec,
    c_fn: &[C64],
) -> Result<BuiltOperator> {
    let n = ambient.group().order();
    if c_fn.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "c has {} values for group of order {n}",
            c_fn.len()
        )));
    }
    let real_target = c_fn.iter().all(|x| x.im.abs() < 1e-12);
    let w = ambient.group().haar_weight();

    struct BlockData {
        restricted: Representation,
        f_r: CVec,
        active: bool,
    }
    let mut data = Vec::new();
    let mut zero_blocks = Vec::new();
    for (r, blk) in blocks.iter().enumerate() {
        let restricted = ambient.restrict(&blk.basis)?;
        let f_r = blk.basis.adjoint() * f0;
        let active = f_r.norm() > 1e-9;
        if !active {
            // a block the reference vector misses cannot carry any
            // Fourier component of the target
            let mut chat = CMat::zeros(blk.dim(), blk.dim());
            for g in ambient.group().elements() {
                chat += restricted.matrix(g).scale(w) * c_fn[g];
            }
            zero_blocks.push(r);
            if chat.norm() > SOLVE_TOL {
                return Err(Error::ZeroProjectionBlock {
                    block: r,
                    dim: blk.dim(),
                });
            }
        }
        data.push(BlockData {
            restricted,
            f_r,
            active,
        });
    }

    // joint pointwise system over the active blocks
    let active: Vec<usize> = (0..blocks.len()).filter(|&r| data[r].active).collect();
    let block_mats: Vec<CMat> = if real_target {
        // Hermitian parametrization: per block, d real diagonal entries then
        // (re, im) pairs for the upper triangle
        let param_count: usize = active.iter().map(|&r| blocks[r].dim().pow(2)).sum();
        let mut sys = nalgebra::DMatrix::<f64>::zeros(n, param_count);
        let mut rhs = nalgebra::DVector::<f64>::zeros(n);
        let s2 = std::f64::consts::SQRT_2;
        for g in 0..n {
            rhs[g] = c_fn[g].re;
            let mut col = 0usize;
            for &r in &active {
                let d = blocks[r].dim();
                let fg = data[r].restricted.matrix(g) * &data[r].f_r;
                for k in 0..d {
                    sys[(g, col)] = fg[k].norm_sqr();
                    col += 1;
                }
                for k in 0..d {
                    for l in k + 1..d {
                        let z = fg[k].conj() * fg[l];
                        sys[(g, col)] = s2 * z.re;
                        sys[(g, col + 1)] = -s2 * z.im;
                        col += 2;
                    }
                }
            }
        }
        let (x, _res) = lstsq_real(&sys, &rhs, 1e-10)?;
        let mut out = Vec::new();
        let mut col = 0usize;
        for &r in &active {
            let d = blocks[r].dim();
            let mut a = CMat::zeros(d, d);
            for k in 0..d {
                a[(k, k)] = cr(x[col]);
                col += 1;
            }
            for k in 0..d {
                for l in k + 1..d {
                    a[(k, l)] = Complex64::new(x[col], x[col + 1]).unscale(s2);
                    a[(l, k)] = a[(k, l)].conj();
                    col += 2;
                }
            }
            out.push(a);
        }
        out
    } else {
        let param_count: usize = active.iter().map(|&r| blocks[r].dim().pow(2)).sum();
        let mut sys = CMat::zeros(n, param_count);
        let rhs = CVec::from_fn(n, |g, _| c_fn[g]);
        for g in 0..n {
            let mut col = 0usize;
            for &r in &active {
                let d = blocks[r].dim();
                let fg = data[r].restricted.matrix(g) * &data[r].f_r;
                for k in 0..d {
                    for l in 0..d {
                        sys[(g, col)] = fg[k].conj() * fg[l];
                        col += 1;
                    }
                }
            }
        }
        let (x, _res) = lstsq(&sys, &rhs, LstsqMethod::NormalEquations, 1e-10)?;
        let mut out = Vec::new();
        let mut col = 0usize;
        for &r in &active {
            let d = blocks[r].dim();
            let a = CMat::from_fn(d, d, |k, l| x[col + k * d + l]);
            col += d * d;
            out.push(a);
        }
        out
    };

    // assemble into the ambient basis
    let dim = ambient.dim();
    let mut a_full = CMat::zeros(dim, dim);
    let mut per_block = vec![CMat::zeros(0, 0); blocks.len()];
    for (idx, &r) in active.iter().enumerate() {
        a_full += &blocks[r].basis * &block_mats[idx] * blocks[r].basis.adjoint();
        per_block[r] = block_mats[idx].clone();
    }
    for &r in &zero_blocks {
        per_block[r] = CMat::zeros(blocks[r].dim(), blocks[r].dim());
    }

    // exhaustive verification of the defining identity
    let mut residual: f64 = 0.0;
    for g in 0..n {
        let fg = ambient.matrix(g) * f0;
        let got = (fg.adjoint() * &a_full * &fg)[(0, 0)];
        residual = residual.max((got - c_fn[g]).norm());
    }
    if residual > SOLVE_TOL {
        return Err(Error::UnreachableComponents {
            residual,
            tol: SOLVE_TOL,
        });
    }
    Ok(BuiltOperator {
        operator: QOperator::new(a_full, BasisTag::ambient(dim)),
        blocks: per_block,
        zero_blocks,
        residual,
    })
}

/// Least-squares solve for a Hermitian operator `A` on the state space with
/// `f_φ† A f_φ = targets[φ]` over the listed points (all of `Φ` by
/// default). The residual operationalizes the containment assumption that
/// the parameter is large enough for the state space.
pub fn solve_parameter_operator(
    family: &CoherentFamily,
    points: &[usize],
    targets: &[f64],
) -> Result<SolvedOperator> {
    let d = family.dim();
    if points.len() != targets.len() {
        return Err(Error::DimensionMismatch(
            "one target per sample point required".into(),
        ));
    }
    let rows = points.len();
    // coordinates over an orthonormal Hermitian basis, so the minimum-norm
    // solution is the minimum-Frobenius operator (the spectral form when
    // the sample vectors are orthogonal)
    let mut sys = nalgebra::DMatrix::<f64>::zeros(rows, d * d);
    let mut rhs = nalgebra::DVector::<f64>::zeros(rows);
    for (row, (&phi, &target)) in points.iter().zip(targets).enumerate() {
        rhs[row] = target;
        let f = &family.vectors[phi];
        let mut col = 0usize;
        for k in 0..d {
            sys[(row, col)] = f[k].norm_sqr();
            col += 1;
        }
        let s2 = std::f64::consts::SQRT_2;
        for k in 0..d {
            for l in k + 1..d {
                let z = f[k].conj() * f[l];
                sys[(row, col)] = s2 * z.re;
                sys[(row, col + 1)] = -s2 * z.im;
                col += 2;
            }
        }
    }
    let (x, residual) = lstsq_real(&sys, &rhs, 1e-10)?;
    let mut a = CMat::zeros(d, d);
    let mut col = 0usize;
    for k in 0..d {
        a[(k, k)] = cr(x[col]);
        col += 1;
    }
    for k in 0..d {
        for l in k + 1..d {
            a[(k, l)] = Complex64::new(x[col], x[col + 1]).unscale(std::f64::consts::SQRT_2);
            a[(l, k)] = a[(k, l)].conj();
            col += 2;
        }
    }
    Ok(SolvedOperator {
        operator: QOperator::new(a, family.tag.clone()),
        residual,
        fourier_residual: None,
    })
}

/// Unique operator for a parametric function: `f_φ† A f_φ = q(θ(φ))` for
/// every `φ ∈ Φ`, solved over Hermitian unknowns.
///
/// Errors with [`Error::ContainmentFailed`] when the residual exceeds the
/// tolerance: the parameter's function space does not contain the state
/// space.
pub fn operator_for_parameter(
    family: &CoherentFamily,
    theta: &ParametricFunction,
    q_of_label: &dyn Fn(&str) -> f64,
) -> Result<SolvedOperator> {
    let m = family.len();
    if theta.len() != m {
        return Err(Error::DimensionMismatch(
            "parameter and family sizes differ".into(),
        ));
    }
    let points: Vec<usize> = (0..m).collect();
    let targets: Vec<f64> = (0..m).map(|phi| q_of_label(theta.value(phi))).collect();
    let solved = solve_parameter_operator(family, &points, &targets)?;
    if solved.residual > SOLVE_TOL {
        return Err(Error::ContainmentFailed {
            name: theta.name.clone(),
            residual: solved.residual,
            tol: SOLVE_TOL,
        });
    }
    Ok(solved)
}

/// Conditional expectation given a permissible parameter: averages a
/// function over each level set. A projection onto the parametric invariant
/// subspace (idempotent, self-adjoint).
pub fn conditional_expectation_projection(
    theta: &ParametricFunction,
    action: &GroupAction,
    subgroup: &crate::group::Subgroup,
) -> Result<QOperator> {
    let report = is_permissible(theta, action, subgroup);
    if !report.permissible {
        let &(phi1, phi2, g) = report.witnesses.first().unwrap();
        return Err(Error::NotPermissible {
            name: theta.name.clone(),
            phi1,
            phi2,
            g,
        });
    }
    let m = theta.len();
    let mut p = CMat::zeros(m, m);
    for (_, level) in theta.level_sets() {
        let w = 1.0 / level.len() as f64;
        for &i in &level {
            for &j in &level {
                p[(i, j)] = cr(w);
            }
        }
    }
    Ok(QOperator::new(p, BasisTag::ambient(m)))
}

/// A density operator with provenance checks: trace one, positive
/// semidefinite within tolerance.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    pub op: QOperator,
    /// True when the prior needed renormalizing (within 1e-6).
    pub renormalized: bool,
}

impl DensityOperator {
    pub fn matrix(&self) -> &CMat {
        &self.op.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.op.matrix);
        vals.first().copied().unwrap_or(0.0)
    }
}

/// `ρ = Σ π̃(k) f_k f_k†` for a family of unit vectors and a prior.
pub fn density_operator(vectors: &[CVec], prior: &[f64], tag: BasisTag) -> Result<DensityOperator> {
    if vectors.is_empty() || vectors.len() != prior.len() {
        return Err(Error::BadPrior(format!(
            "{} weights for {} vectors",
            prior.len(),
            vectors.len()
        )));
    }
    if prior.iter().any(|&p| p < -1e-12) {
        return Err(Error::BadPrior("negative weight".into()));
    }
    let total: f64 = prior.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::BadPrior(format!("weights sum to {total}")));
    }
    let renormalized = (total - 1.0).abs() > 1e-12;
    let d = vectors[0].len();
    let mut rho = CMat::zeros(d, d);
    for (f, &p) in vectors.iter().zip(prior) {
        rho += (f * f.adjoint()).scale(p / total);
    }
    let trace_err = (rho.trace().re - 1.0).abs();
    if trace_err > 1e-10 {
        return Err(Error::BadPrior(format!(
            "trace deviates by {trace_err:.3e}"
        )));
    }
    let op = QOperator::new(rho, tag);
    let density = DensityOperator { op, renormalized };
    if density.min_eigenvalue() < -1e-10 {
        return Err(Error::BadPrior(format!(
            "negative eigenvalue {:.3e}",
            density.min_eigenvalue()
        )));
    }
    Ok(density)
}

/// `tr(A ρ)`; real within tolerance for Hermitian `A`.
pub fn expectation(rho: &DensityOperator, a: &QOperator) -> Result<C64> {
    check_tags(&rho.op.tag, &a.tag)?;
    if rho.op.dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "density {}x{} vs operator {}x{}",
            rho.op.dim(),
            rho.op.dim(),
            a.dim(),
            a.dim()
        )));
    }
    Ok((&a.matrix * rho.matrix()).trace())
}

/// A Hermitian operator with labeled spectral projectors, the spectral form
/// `A = Σ_v value(v) · P_v` used by the probability formula.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    pub parameter: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    pub projectors: Vec<CMat>,
    pub tag: BasisTag,
}

/// One row of a transition table.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeProbability {
    pub label: String,
    pub value: f64,
    pub probability: f64,
}

impl SpectralOperator {
    pub fn dim(&self) -> usize {
        self.projectors.first().map(|p| p.nrows()).unwrap_or(0)
    }

    pub fn operator(&self) -> QOperator {
        let d = self.dim();
        let mut a = CMat::zeros(d, d);
        for (p, &v) in self.projectors.iter().zip(&self.values) {
            a += p.scale(v);
        }
        QOperator::new(a, self.tag.clone())
    }

    /// Completeness defect `‖Σ P_v − I‖`.
    pub fn completeness_defect(&self) -> f64 {
        let d = self.dim();
        let mut total = CMat::zeros(d, d);
        for p in &self.projectors {
            total += p;
        }
        (total - CMat::identity(d, d)).norm()
    }

    /// Unit eigenvector for a spectrum label (any vector of the eigenspace,
    /// deterministic orientation). Errors when the label is not in the
    /// spectrum.
    pub fn eigenvector(&self, label: &str) -> Result<CVec> {
        let k =
            self.labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::OutsideSpectrum {
                    name: self.parameter.clone(),
                    value: label.to_string(),
                })?;
        let p = &self.projectors[k];
        let (vals, vecs) = hermitian_eigen(p);
        // eigenvector of the projector with eigenvalue 1
        let idx = vals
            .iter()
            .position(|&v| (v - 1.0).abs() < 1e-6)
            .ok_or_else(|| Error::DimensionMismatch("projector has empty range".into()))?;
        Ok(vecs.column(idx).into_owned())
    }

    /// `P[θ ∈ C] = tr(ρ P_θ^C)`, clamped to `[0, 1]`.
    pub fn probability(&self, rho: &DensityOperator, c_labels: &[&str]) -> Result<f64> {
        check_tags(&self.tag, &rho.op.tag)?;
        let mut total = 0.0;
        for label in c_labels {
            let k = self.labels.iter().position(|l| l == label).ok_or_else(|| {
                Error::OutsideSpectrum {
                    name: self.parameter.clone(),
                    value: label.to_string(),
                }
            })?;
            total += (&self.projectors[k] * rho.matrix()).trace().re;
        }
        Ok(total.clamp(0.0, 1.0))
    }

    /// Born-rule table for a pure state vector.
    pub fn transition_table(&self, state: &CVec) -> Vec<OutcomeProbability> {
        self.labels
            .iter()
            .zip(&self.values)
            .zip(&self.projectors)
            .map(|((label, &value), p)| OutcomeProbability {
                label: label.clone(),
                value,
                probability: (state.adjoint() * p * state)[(0, 0)].re.clamp(0.0, 1.0),
            })
            .collect()
    }

    /// `A_f = Σ f(θ) dP_θ`: Hermitian for real `f`, unitary when `|f| = 1`.
    pub fn function_operator(&self, f: &dyn Fn(f64) -> C64) -> QOperator {
        let d = self.dim();
        let mut a = CMat::zeros(d, d);
        for (p, &v) in self.projectors.iter().zip(&self.values) {
            a += p * f(v);
        }
        QOperator::new(a, self.tag.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::linalg::c;
    use crate::repr::{decompose, Representation, DEFAULT_DECOMPOSE_SEED};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn s3_setup() -> (GroupAction, Representation, Vec<InvariantSubspace>) {
        let g = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let act = GroupAction::regular(g);
        let rep = Representation::regular(&act);
        let blocks = decompose(&rep, DEFAULT_DECOMPOSE_SEED).unwrap();
        (act, rep, blocks)
    }

    fn random_unit(d: usize, seed: u64) -> CVec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = CVec::from_fn(d, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        v.clone().unscale(v.norm())
    }

    #[test]
    fn solve_identity_case() {
        // c(g) = ||v||² is produced by Q = I, and the pointwise system
        // pins it down
        let (_, rep, blocks) = s3_setup();
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        let v = random_unit(2, 9);
        let c_fn = vec![cr(1.0); 6];
        let solved =
            solve_operator_irreducible(&irrep, &v, &c_fn, LstsqMethod::NormalEquations).unwrap();
        assert!(solved.residual < 1e-9);
        assert!(solved.fourier_residual.unwrap() < 1e-9);
        assert!(crate::linalg::max_norm(&(&solved.operator.matrix - CMat::identity(2, 2))) < 1e-8);
    }

    #[test]
    fn solve_round_trip_recovers_hermitian() {
        let (_, rep, blocks) = s3_setup();
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..20 {
            let h = CMat::from_fn(2, 2, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let q_star = (&h + h.adjoint()).scale(0.5);
            let v = random_unit(2, 1000 + trial);
            let c_fn: Vec<C64> = irrep
                .group()
                .elements()
                .map(|g| {
                    let uv = irrep.matrix(g) * &v;
                    (uv.adjoint() * &q_star * &uv)[(0, 0)]
                })
                .collect();
            let ne = solve_operator_irreducible(&irrep, &v, &c_fn, LstsqMethod::NormalEquations)
                .unwrap();
            let svd = solve_operator_irreducible(&irrep, &v, &c_fn, LstsqMethod::Svd).unwrap();
            assert!(ne.residual < 1e-9);
            assert!(
                crate::linalg::max_norm(&(&ne.operator.matrix - &q_star)) < 1e-8,
                "trial {trial}"
            );
            assert!(crate::linalg::max_norm(&(&ne.operator.matrix - &svd.operator.matrix)) < 1e-8);
        }
    }

    #[test]
    fn character_solve_reports_projection_distance() {
        // oracle: the functions reachable as v†U(g)†QU(g)v span
        // {products of (U(g)v) coordinates}; the character need not lie in
        // that slice, and the solver then reports the projection distance
        // rather than a spurious zero
        let (_, rep, blocks) = s3_setup();
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        let chi = irrep.character();
        let v = random_unit(2, 77);
        // oracle: distance of chi to the reachable span, via an explicit
        // basis of product functions
        let n = 6;
        let mut span = CMat::zeros(n, 4);
        for g in irrep.group().elements() {
            let uv = irrep.matrix(g) * &v;
            for i in 0..2 {
                for j in 0..2 {
                    span[(g, i * 2 + j)] = uv[i].conj() * uv[j];
                }
            }
        }
        let chi_vec = CVec::from_fn(n, |g, _| chi[g]);
        let (_, oracle_dist) =
            crate::linalg::lstsq(&span, &chi_vec, LstsqMethod::Svd, 1e-10).unwrap();
        let ne =
            solve_operator_irreducible(&irrep, &v, &chi, LstsqMethod::NormalEquations).unwrap();
        let sv = solve_operator_irreducible(&irrep, &v, &chi, LstsqMethod::Svd).unwrap();
        assert!((ne.residual - oracle_dist).abs() < 1e-8);
        assert!((sv.residual - oracle_dist).abs() < 1e-8);
        // both solve routes agree on the minimizer
        assert!(crate::linalg::max_norm(&(&ne.operator.matrix - &sv.operator.matrix)) < 1e-7);
    }

    #[test]
    fn build_operator_constant() {
        let (_, rep, blocks) = s3_setup();
        let f0 = random_unit(6, 5);
        let c_fn = vec![cr(1.0); 6];
        let built = build_operator(&rep, &blocks, &f0, &c_fn).unwrap();
        assert!(built.residual < 1e-9);
        // identity satisfies the same defining identity
        for g in rep.group().elements() {
            let fg = rep.matrix(g) * &f0;
            let got = (fg.adjoint() * &built.operator.matrix * &fg)[(0, 0)];
            assert!((got - cr(1.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn build_operator_color_expectation() {
        // c(g) = ±1 by the sign of the permutation: reachable through the
        // 2-dim blocks although the sign block itself only contributes
        // constants
        let (_, rep, blocks) = s3_setup();
        let f0 = random_unit(6, 11);
        let g = rep.group();
        let c_fn: Vec<C64> = g
            .elements()
            .map(|el| {
                let ord = if g.mul(el, el) == g.identity() && el != g.identity() {
                    -1.0
                } else {
                    1.0
                };
                cr(ord)
            })
            .collect();
        let built = build_operator(&rep, &blocks, &f0, &c_fn).unwrap();
        assert!(built.residual < 1e-8);
        for el in g.elements() {
            let fg = rep.matrix(el) * &f0;
            let got = (fg.adjoint() * &built.operator.matrix * &fg)[(0, 0)];
            assert!((got - c_fn[el]).norm() < 1e-8, "element {el}");
        }
    }

    #[test]
    fn build_operator_flags_zero_projection() {
        let (_, rep, blocks) = s3_setup();
        // f0 supported only on the trivial + sign blocks
        let one_dim: Vec<&InvariantSubspace> = blocks.iter().filter(|b| b.dim() == 1).collect();
        let mut f0 = CVec::zeros(6);
        for b in &one_dim {
            f0 += b.basis.column(0).into_owned();
        }
        let f0 = f0.clone().unscale(f0.norm());
        // c supported on the 2-dim isotypic part: a matrix element of the
        // 2-dim irrep
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        let c_fn: Vec<C64> = rep
            .group()
            .elements()
            .map(|g| irrep.matrix(g)[(0, 0)])
            .collect();
        let err = build_operator(&rep, &blocks, &f0, &c_fn).unwrap_err();
        match err {
            Error::ZeroProjectionBlock { block, .. } => {
                assert!(blocks[block].dim() == 2);
            }
            other => panic!("expected zero-projection error, got {other}"),
        }
    }

    #[test]
    fn density_operator_cases() {
        let tag = BasisTag("M".into());
        // point mass -> rank 1
        let f = random_unit(2, 21);
        let rho = density_operator(&[f.clone()], &[1.0], tag.clone()).unwrap();
        assert!((rho.matrix() - (&f * f.adjoint())).norm() < 1e-12);
        // uniform prior over an orthonormal family -> I/d
        let e0 = CVec::from_row_slice(&[cr(1.0), cr(0.0)]);
        let e1 = CVec::from_row_slice(&[cr(0.0), cr(1.0)]);
        let rho2 = density_operator(&[e0, e1], &[0.5, 0.5], tag.clone()).unwrap();
        assert!((rho2.matrix() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-12);
        assert!((rho2.matrix().trace().re - 1.0).abs() < 1e-12);
        assert!(rho2.min_eigenvalue() > -1e-10);
        // bad prior
        assert!(density_operator(&[f], &[0.7], tag).is_err());
    }

    #[test]
    fn coherent_family_group_average_is_scalar() {
        // uniform mixture of the whole coherent family in an irreducible
        // block is I/d by Schur
        let (act, rep, blocks) = s3_setup();
        let two = blocks.iter().find(|b| b.dim() == 2).unwrap();
        let irrep = rep.restrict(&two.basis).unwrap();
        let f0 = random_unit(2, 3);
        let fam = coherent_family(&irrep, &f0, &act, 0, BasisTag("M".into())).unwrap();
        assert!(!fam.periodic);
        let prior = vec![1.0 / 6.0; 6];
        let rho = density_operator(&fam.vectors, &prior, fam.tag.clone()).unwrap();
        assert!((rho.matrix() - CMat::identity(2, 2).scale(0.5)).norm() < 1e-9);
        // the family consists of unit vectors spanning the block
        assert!(fam.vectors.iter().all(|v| (v.norm() - 1.0).abs() < 1e-9));
        let mut basis = CMat::zeros(2, 6);
        for (j, v) in fam.vectors.iter().enumerate() {
            basis.set_column(j, v);
        }
        assert_eq!(crate::linalg::rank(&basis, 1e-9), 2);
    }

    #[test]
    fn coherent_family_periodicity_flag() {
        // f0 invariant under a nontrivial subgroup collapses family members
        let (act, rep, blocks) = s3_setup();
        let one = blocks
            .iter()
            .find(|b| {
                b.dim() == 1 && {
                    let chi = rep.restrict(&b.basis).unwrap().character();
                    chi.iter().all(|x| (x - cr(1.0)).norm() < 1e-9)
                }
            })
            .unwrap();
        let irrep = rep.restrict(&one.basis).unwrap();
        let f0 = CVec::from_row_slice(&[cr(1.0)]);
        let fam = coherent_family(&irrep, &f0, &act, 0, BasisTag("triv".into())).unwrap();
        assert!(fam.periodic);
    }

    #[test]
    fn expectation_basics() {
        let tag = BasisTag("M".into());
        let e0 = CVec::from_row_slice(&[cr(1.0), cr(0.0)]);
        let e1 = CVec::from_row_slice(&[cr(0.0), cr(1.0)]);
        let rho = density_operator(&[e0.clone(), e1], &[0.5, 0.5], tag.clone()).unwrap();
        let ident = QOperator::new(CMat::identity(2, 2), tag.clone());
        assert!((expectation(&rho, &ident).unwrap() - cr(1.0)).norm() < 1e-12);
        let sz = QOperator::new(
            CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
            tag.clone(),
        );
        assert!(expectation(&rho, &sz).unwrap().norm() < 1e-12);
        // basis mismatch rejected
        let other = QOperator::new(CMat::identity(2, 2), BasisTag("other".into()));
        assert!(expectation(&rho, &other).is_err());
    }

    #[test]
    fn conditional_expectation_is_projection() {
        let g = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let act = GroupAction::regular(g.clone());
        let full = crate::group::Subgroup::full(g);
        // the sign partition of S3 (rotations vs transpositions) is
        // permissible under the regular action
        let labels: Vec<String> = act
            .group()
            .elements()
            .map(|el| {
                let grp = act.group();
                if el == grp.identity() || grp.mul(el, el) != grp.identity() {
                    "even".to_string()
                } else {
                    "odd".to_string()
                }
            })
            .collect();
        let theta = ParametricFunction::new("sign", labels);
        let p = conditional_expectation_projection(&theta, &act, &full).unwrap();
        let m = &p.matrix;
        assert!((m * m - m).norm() < 1e-12);
        assert!((m - m.adjoint()).norm() < 1e-12);
        // averaging: indicator of one even element spreads to 1/3 over evens
        let mut f = CVec::zeros(6);
        f[act.group().identity()] = cr(1.0);
        let pf = m * f;
        for el in act.group().elements() {
            let expected = if theta.value(el) == "even" {
                1.0 / 3.0
            } else {
                0.0
            };
            assert!((pf[el] - cr(expected)).norm() < 1e-12);
        }
        // f already in V stays fixed
        let v: CVec = CVec::from_fn(6, |el, _| {
            if theta.value(el) == "even" {
                cr(2.0)
            } else {
                cr(-1.0)
            }
        });
        assert!(((m * &v) - &v).norm() < 1e-12);
        // non-permissible parameter is rejected
        let bad = ParametricFunction::from_strs("bad", &["x", "x", "y", "y", "y", "y"]);
        assert!(conditional_expectation_projection(&bad, &act, &full).is_err());
    }
}
