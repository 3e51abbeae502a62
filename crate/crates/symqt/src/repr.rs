//! Matrix representations of finite groups: the regular representation,
//! characters, numerical irreducible decomposition, isotypic projections and
//! the group Fourier transform.
//!
//! Decomposition is purely numerical: average a seeded random Hermitian over
//! the group to get an operator commuting with the representation, split
//! along its eigenspaces, and recurse until every block has scalar
//! commutant. No character table is assumed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{GroupAction, Subgroup};
use crate::linalg::{
    c, cluster_eigenvalues, cr, hermitian_eigen, nullspace_dim, orient, orthonormal_span, spans,
    CMat, CVec, C64,
};
use crate::{EIG_CLUSTER_TOL, TOL};

/// Default seed for the random Hermitian used by [`decompose`].
pub const DEFAULT_DECOMPOSE_SEED: u64 = 0x5138_71ab;

/// A unitary matrix representation: one matrix per group element.
#[derive(Debug, Clone)]
pub struct Representation {
    group: std::sync::Arc<crate::group::FiniteGroup>,
    dim: usize,
    matrices: Vec<CMat>,
    tolerance: f64,
}

impl Representation {
    /// Validates the homomorphism and unitarity laws within `tolerance`.
    pub fn new(
        group: std::sync::Arc<crate::group::FiniteGroup>,
        matrices: Vec<CMat>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = group.order();
        if matrices.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices for group of order {n}",
                matrices.len()
            )));
        }
        let dim = matrices[0].nrows();
        for (g, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {g} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let dev = (m.adjoint() * m - CMat::identity(dim, dim)).norm();
            if dev > tolerance {
                return Err(Error::NotUnitary { g, deviation: dev });
            }
        }
        for g in 0..n {
            for h in 0..n {
                let gh = group.mul(g, h);
                let dev = (&matrices[g] * &matrices[h] - &matrices[gh]).norm();
                if dev > tolerance * (dim as f64).sqrt().max(1.0) {
                    return Err(Error::NotHomomorphism {
                        g,
                        h,
                        deviation: dev,
                    });
                }
            }
        }
        Ok(Representation {
            group,
            dim,
            matrices,
            tolerance,
        })
    }

    /// The regular representation of an action: `(U(g) f)(φ) = f(g⁻¹ φ)`,
    /// i.e. the permutation matrix sending the basis vector at `φ` to the
    /// one at `gφ`.
    pub fn regular(action: &GroupAction) -> Self {
        let group = action.group().clone();
        let m = action.set_size();
        let matrices = group
            .elements()
            .map(|g| {
                let mut u = CMat::zeros(m, m);
                for p in 0..m {
                    u[(action.apply(g, p), p)] = cr(1.0);
                }
                u
            })
            .collect();
        Representation::new(group, matrices, TOL)
            .expect("permutation matrices form a representation")
    }

    pub fn group(&self) -> &std::sync::Arc<crate::group::FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Character `χ(g) = tr U(g)`.
    pub fn character(&self) -> Vec<C64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    /// Restriction to an invariant subspace with orthonormal basis columns
    /// `b`: the `k×k` matrices `B† U(g) B`.
    pub fn restrict(&self, basis: &CMat) -> Result<Representation> {
        let mats: Vec<CMat> = self
            .matrices
            .iter()
            .map(|u| basis.adjoint() * u * basis)
            .collect();
        Representation::new(self.group.clone(), mats, self.tolerance.max(1e-8))
    }

    /// Norm of the character: `(1/|G|) Σ |χ(g)|²`; equals 1 exactly for
    /// irreducible representations.
    pub fn character_norm(&self) -> f64 {
        let w = self.group.haar_weight();
        self.character().iter().map(|x| x.norm_sqr() * w).sum()
    }

    pub fn is_irreducible(&self) -> bool {
        (self.character_norm() - 1.0).abs() < 1e-6
    }
}

/// An invariant subspace of an ambient representation, carried as
/// orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    pub basis: CMat,
    pub irreducible: bool,
    /// Index of the isotypic component (blocks with matching characters
    /// share a tag).
    pub multiplicity_tag: usize,
}

impl InvariantSubspace {
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// Splits a representation into irreducible invariant subspaces.
///
/// Seeding is deterministic: the same `seed` always yields the same
/// decomposition, including the basis orientation inside degenerate
/// eigenspaces.
pub fn decompose(rep: &Representation, seed: u64) -> Result<Vec<InvariantSubspace>> {
    let d = rep.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ambient_basis = CMat::identity(d, d);
    let mut blocks: Vec<CMat> = Vec::new();
    split_recursive(rep, &ambient_basis, &mut rng, &mut blocks, 0)?;
    // verify and tag
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    if total != d {
        return Err(Error::DimensionMismatch(format!(
            "decomposition covers {total} of {d} dimensions"
        )));
    }
    let mut characters: Vec<Vec<C64>> = Vec::new();
    let mut out = Vec::new();
    for basis in blocks {
        let sub = rep.restrict(&basis)?;
        let chi = sub.character();
        let tag = match characters
            .iter()
            .position(|c| char_distance(c, &chi) < 1e-6)
        {
            Some(t) => t,
            None => {
                characters.push(chi.clone());
                characters.len() - 1
            }
        };
        out.push(InvariantSubspace {
            basis,
            irreducible: true,
            multiplicity_tag: tag,
        });
    }
    // deterministic order: by dimension, then by tag, then by first basis entry
    out.sort_by(|a, b| {
        a.dim()
            .cmp(&b.dim())
            .then(a.multiplicity_tag.cmp(&b.multiplicity_tag))
    });
    Ok(out)
}

fn char_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn split_recursive(
    rep: &Representation,
    basis: &CMat,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<CMat>,
    depth: usize,
) -> Result<()> {
    if depth > 32 {
        return Err(Error::GroupAxiom(
            "decomposition did not converge within tolerance".into(),
        ));
    }
    let k = basis.ncols();
    let sub = rep.restrict(basis)?;
    if k == 1 || sub.is_irreducible() {
        out.push(basis.clone());
        return Ok(());
    }
    // randomized commutant element: T = avg_g U(g) H U(g)†
    let mut h = CMat::from_fn(k, k, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    h = (&h + h.adjoint()).scale(0.5);
    let w = rep.group().haar_weight();
    let mut t = CMat::zeros(k, k);
    for g in rep.group().elements() {
        let u = sub.matrix(g);
        t += (u * &h * u.adjoint()).scale(w);
    }
    let (vals, vecs) = hermitian_eigen(&t);
    let clusters = cluster_eigenvalues(&vals, EIG_CLUSTER_TOL);
    if clusters.len() <= 1 {
        // commutant element came out scalar; retry with a fresh draw
        return split_recursive(rep, basis, rng, out, depth + 1);
    }
    for (_, idxs) in clusters {
        let mut sub_basis = CMat::zeros(k, idxs.len());
        for (j, &i) in idxs.iter().enumerate() {
            sub_basis.set_column(j, &vecs.column(i).into_owned());
        }
        // lift the eigenspace back to the ambient space
        let lifted_raw = basis * sub_basis;
        let mut lifted = CMat::zeros(lifted_raw.nrows(), lifted_raw.ncols());
        for j in 0..lifted_raw.ncols() {
            let col = lifted_raw.column(j).into_owned();
            lifted.set_column(j, &orient(&col.unscale(col.norm())));
        }
        // invariance of the eigenspace under the representation
        for g in rep.group().elements() {
            let moved = rep.matrix(g) * &lifted;
            if !spans(&lifted, &moved, 1e-7) {
                return Err(Error::GroupAxiom(format!(
                    "eigenspace not invariant under element {g} (splitting tolerance too loose)"
                )));
            }
        }
        split_recursive(rep, &lifted, rng, out, depth + 1)?;
    }
    Ok(())
}

/// Isotypic projection `P_r = d_r (1/|G|) Σ_g χ_r(g)* U(g)`.
///
/// Errors when the result is not an orthogonal projection, which signals a
/// non-character input.
pub fn isotypic_projection(rep: &Representation, irr_character: &[C64]) -> Result<CMat> {
    let n = rep.group().order();
    if irr_character.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "character has {} entries for group of order {n}",
            irr_character.len()
        )));
    }
    let d_r = irr_character[rep.group().identity()].re;
    let w = rep.group().haar_weight();
    let mut p = CMat::zeros(rep.dim(), rep.dim());
    for g in rep.group().elements() {
        p += rep.matrix(g).scale(w) * irr_character[g].conj();
    }
    p *= cr(d_r);
    let idem = (&p * &p - &p).norm();
    let herm = (&p - p.adjoint()).norm();
    if idem > 1e-7 || herm > 1e-7 {
        return Err(Error::NotIdempotent(idem.max(herm)));
    }
    Ok(p)
}

/// Group Fourier transform at one irreducible block:
/// `f̂(U_r) = (1/|G|) Σ_g f(g) U_r(g)`.
pub fn fourier_transform(f: &[C64], irrep: &Representation) -> Result<CMat> {
    let n = irrep.group().order();
    if f.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "function has {} values for group of order {n}",
            f.len()
        )));
    }
    let w = irrep.group().haar_weight();
    let mut out = CMat::zeros(irrep.dim(), irrep.dim());
    for g in irrep.group().elements() {
        out += irrep.matrix(g).scale(w) * f[g];
    }
    Ok(out)
}

/// Inverse Fourier transform from a complete list of irreducibles:
/// `f(g) = Σ_r d_r tr(U_r(g⁻¹) f̂(U_r))`.
pub fn inverse_fourier(irreps: &[&Representation], fhat: &[CMat]) -> Result<Vec<C64>> {
    let Some(first) = irreps.first() else {
        return Err(Error::IncompleteIrreps {
            got: 0,
            expected: 0,
        });
    };
    let n = first.group().order();
    let got: usize = irreps.iter().map(|r| r.dim() * r.dim()).sum();
    if got != n {
        return Err(Error::IncompleteIrreps { got, expected: n });
    }
    if fhat.len() != irreps.len() {
        return Err(Error::DimensionMismatch(
            "one Fourier coefficient per irrep required".into(),
        ));
    }
    let mut f = vec![cr(0.0); n];
    for (r, irrep) in irreps.iter().enumerate() {
        let d_r = irrep.dim() as f64;
        for g in irrep.group().elements() {
            let gi = irrep.group().inv(g);
            f[g] += (irrep.matrix(gi) * &fhat[r]).trace() * cr(d_r);
        }
    }
    Ok(f)
}

/// The set `{g : U(g) v ∈ span(basis) for all basis vectors v}` is a
/// subgroup; returns it after verifying closure.
pub fn subspace_stabilizer_group(rep: &Representation, basis: &CMat) -> Result<Subgroup> {
    let q = orthonormal_span(basis, 1e-10);
    let members: std::collections::BTreeSet<usize> = rep
        .group()
        .elements()
        .filter(|&g| {
            let moved = rep.matrix(g) * &q;
            spans(&q, &moved, 1e-8)
        })
        .collect();
    Subgroup::new(rep.group().clone(), members)
}

/// Dimension of the intertwiner space `{A : U₁(g) A = A U₂(g) for all g}`,
/// computed from the nullspace of the stacked joint linear system.
pub fn intertwiner_dimension(rep1: &Representation, rep2: &Representation) -> Result<usize> {
    if !std::sync::Arc::ptr_eq(rep1.group(), rep2.group())
        && rep1.group().cayley() != rep2.group().cayley()
    {
        return Err(Error::DimensionMismatch(
            "intertwiner dimension requires representations of the same group".into(),
        ));
    }
    let (d1, d2) = (rep1.dim(), rep2.dim());
    let n = rep1.group().order();
    // unknown A is d1 x d2, flattened row-major: A[(i,j)] -> i*d2 + j
    let mut system = CMat::zeros(n * d1 * d2, d1 * d2);
    for g in rep1.group().elements() {
        let u1 = rep1.matrix(g);
        let u2 = rep2.matrix(g);
        for i in 0..d1 {
            for j in 0..d2 {
                let row = g * d1 * d2 + i * d2 + j;
                // (U1 A)_{ij} = Σ_k U1[i,k] A[k,j]
                for k in 0..d1 {
                    system[(row, k * d2 + j)] += u1[(i, k)];
                }
                // (A U2)_{ij} = Σ_k A[i,k] U2[k,j]
                for k in 0..d2 {
                    system[(row, i * d2 + k)] -= u2[(k, j)];
                }
            }
        }
    }
    Ok(nullspace_dim(&system, 1e-7))
}

/// A coherent-state style vector in the ambient space: the normalized
/// projection of the delta function at `point` onto the span of `basis`.
pub fn projected_delta(basis: &CMat, point: usize) -> Result<CVec> {
    let d = basis.nrows();
    if point >= d {
        return Err(Error::IndexOutOfRange {
            index: point,
            order: d,
        });
    }
    let mut delta = CVec::zeros(d);
    delta[point] = cr(1.0);
    let coords = basis.adjoint() * &delta;
    let norm = coords.norm();
    if norm < 1e-12 {
        return Err(Error::DimensionMismatch(
            "delta function has no component in the subspace".into(),
        ));
    }
    Ok(orient(&coords.unscale(norm)))
}
