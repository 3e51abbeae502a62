//! Parametric functions on the hyperparameter set and their permissibility.
//!
//! A parametric function is a labeling of `Φ`, equivalently a partition of
//! `Φ` into level sets. It is permissible with respect to a subgroup when
//! every member maps level sets onto level sets, so the group descends to an
//! induced group on the label space.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{orbits, subgroup_generated, GroupAction, Subgroup, MAX_BRUTE_FORCE_POINTS};

/// A labeling of the point set: `labels[φ]` is the value of the function at
/// `φ`. Level sets with equal labels partition `Φ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParametricFunction {
    pub name: String,
    pub labels: Vec<String>,
}

impl ParametricFunction {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Self {
        ParametricFunction {
            name: name.into(),
            labels,
        }
    }

    pub fn from_strs(name: &str, labels: &[&str]) -> Self {
        ParametricFunction::new(name, labels.iter().map(|s| s.to_string()).collect())
    }

    /// Constant function.
    pub fn constant(name: &str, m: usize) -> Self {
        ParametricFunction::new(name, vec!["*".to_string(); m])
    }

    /// The identity labeling, one level set per point.
    pub fn identity(name: &str, point_names: &[String]) -> Self {
        ParametricFunction::new(name, point_names.to_vec())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn value(&self, phi: usize) -> &str {
        &self.labels[phi]
    }

    /// Distinct values in first-occurrence order.
    pub fn values(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for l in &self.labels {
            if seen.insert(l.clone()) {
                out.push(l.clone());
            }
        }
        out
    }

    /// Level sets in first-occurrence order of their values.
    pub fn level_sets(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        for (phi, l) in self.labels.iter().enumerate() {
            match out.iter_mut().find(|(v, _)| v == l) {
                Some((_, set)) => set.push(phi),
                None => out.push((l.clone(), vec![phi])),
            }
        }
        out
    }

    pub fn level_set_of_value(&self, value: &str) -> Result<Vec<usize>> {
        let set: Vec<usize> = (0..self.len())
            .filter(|&phi| self.labels[phi] == value)
            .collect();
        if set.is_empty() {
            return Err(Error::UnknownLabel {
                name: self.name.clone(),
                label: value.to_string(),
            });
        }
        Ok(set)
    }

    /// Canonical level-set index: `partition[φ]` numbers level sets by first
    /// occurrence, so equivalent labelings share one canonical form.
    pub fn partition(&self) -> Vec<usize> {
        let mut map: BTreeMap<&str, usize> = BTreeMap::new();
        let mut next = 0usize;
        self.labels
            .iter()
            .map(|l| {
                *map.entry(l.as_str()).or_insert_with(|| {
                    let k = next;
                    next += 1;
                    k
                })
            })
            .collect()
    }

    /// Numeric encoding per point. Defaults: labels parse as numbers when
    /// they all do, otherwise the index of the label in sorted order.
    /// Explicit overrides win.
    pub fn numeric_encoding(
        &self,
        overrides: Option<&BTreeMap<String, f64>>,
    ) -> Vec<(String, f64)> {
        let values = {
            let mut v = self.values();
            v.sort();
            v
        };
        if let Some(ov) = overrides {
            return values
                .iter()
                .map(|l| (l.clone(), ov.get(l).copied().unwrap_or(f64::NAN)))
                .collect();
        }
        let parsed: Option<Vec<f64>> = values.iter().map(|l| l.parse::<f64>().ok()).collect();
        match parsed {
            Some(nums) => values.into_iter().zip(nums).collect(),
            None => values
                .into_iter()
                .enumerate()
                .map(|(i, l)| (l, i as f64))
                .collect(),
        }
    }

    /// The compound parameter `(θ₁, θ₂)`, labeling each point by the pair.
    pub fn compound(&self, other: &ParametricFunction) -> ParametricFunction {
        let labels = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        ParametricFunction::new(format!("({},{})", self.name, other.name), labels)
    }
}

/// Outcome of a permissibility check; a false verdict always carries
/// counterexample witnesses `(φ₁, φ₂, g)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PermissibilityReport {
    pub permissible: bool,
    pub witnesses: Vec<(usize, usize, usize)>,
}

/// Permissibility check: `θ(φ₁) = θ(φ₂)` implies `θ(gφ₁) = θ(gφ₂)` for
/// all members.
/// All witnesses are collected for diagnostics.
pub fn is_permissible(
    theta: &ParametricFunction,
    action: &GroupAction,
    subgroup: &Subgroup,
) -> PermissibilityReport {
    let m = action.set_size();
    let mut witnesses = Vec::new();
    for phi1 in 0..m {
        for phi2 in phi1 + 1..m {
            if theta.value(phi1) != theta.value(phi2) {
                continue;
            }
            for &g in subgroup.members() {
                if theta.value(action.apply(g, phi1)) != theta.value(action.apply(g, phi2)) {
                    witnesses.push((phi1, phi2, g));
                }
            }
        }
    }
    PermissibilityReport {
        permissible: witnesses.is_empty(),
        witnesses,
    }
}

/// The maximal subgroup `G_a` such that `θ` is permissible with
/// respect to it, via the two-sided condition
/// `θ(φ₁) = θ(φ₂) ⇔ θ(gφ₁) = θ(gφ₂)`.
pub fn maximal_permissible_subgroup(theta: &ParametricFunction, action: &GroupAction) -> Subgroup {
    let m = action.set_size();
    let group = action.group();
    let members: BTreeSet<usize> = group
        .elements()
        .filter(|&g| {
            (0..m).all(|p1| {
                (0..m).all(|p2| {
                    (theta.value(p1) == theta.value(p2))
                        == (theta.value(action.apply(g, p1)) == theta.value(action.apply(g, p2)))
                })
            })
        })
        .collect();
    Subgroup::new(group.clone(), members).expect("the two-sided condition always yields a subgroup")
}

/// The stabilizer `G_θ = {g : θ(gφ) = θ(φ) for all φ in the level set}` of
/// one parameter value.
pub fn level_set_stabilizer(
    action: &GroupAction,
    theta: &ParametricFunction,
    value: &str,
) -> Result<Subgroup> {
    let level = theta.level_set_of_value(value)?;
    let group = action.group();
    let members: BTreeSet<usize> = group
        .elements()
        .filter(|&g| {
            level
                .iter()
                .all(|&phi| theta.value(action.apply(g, phi)) == theta.value(phi))
        })
        .collect();
    Subgroup::new(group.clone(), members)
}

/// The induced group on the label space of a permissible parameter:
/// `g̃(θ(φ)) = θ(gφ)`, stored as a table over the distinct values, together
/// with the homomorphism witness `g → g̃`.
#[derive(Debug, Clone)]
pub struct InducedGroup {
    pub base: Subgroup,
    pub values: Vec<String>,
    /// `value_action[k][v]` is the image of value `v` under the `k`-th
    /// distinct induced map.
    pub value_action: Vec<Vec<usize>>,
    /// `homomorphism[i]` maps `base.members()[i]` to its induced-map index.
    pub homomorphism: Vec<usize>,
}

impl InducedGroup {
    /// Order of the induced group (number of distinct maps `g̃`).
    pub fn order(&self) -> usize {
        self.value_action.len()
    }

    /// Orbits of the induced group on the value set.
    pub fn value_orbits(&self) -> Vec<Vec<usize>> {
        let k = self.values.len();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut block = BTreeSet::new();
            let mut stack = vec![start];
            seen[start] = true;
            block.insert(start);
            while let Some(v) = stack.pop() {
                for map in &self.value_action {
                    let w = map[v];
                    if !seen[w] {
                        seen[w] = true;
                        block.insert(w);
                        stack.push(w);
                    }
                }
            }
            out.push(block.into_iter().collect());
        }
        out
    }
}

/// Builds the induced group of a permissible parameter; errors when the
/// induced maps would be ill-defined.
pub fn induced_group(
    theta: &ParametricFunction,
    action: &GroupAction,
    subgroup: &Subgroup,
) -> Result<InducedGroup> {
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
    let values = theta.values();
    let index_of = |v: &str| values.iter().position(|x| x == v).unwrap();
    let mut value_action: Vec<Vec<usize>> = Vec::new();
    let mut homomorphism = Vec::new();
    for &g in subgroup.members() {
        let mut map = vec![usize::MAX; values.len()];
        for phi in 0..action.set_size() {
            let from = index_of(theta.value(phi));
            let to = index_of(theta.value(action.apply(g, phi)));
            debug_assert!(map[from] == usize::MAX || map[from] == to);
            map[from] = to;
        }
        let idx = match value_action.iter().position(|m| *m == map) {
            Some(i) => i,
            None => {
                value_action.push(map);
                value_action.len() - 1
            }
        };
        homomorphism.push(idx);
    }
    Ok(InducedGroup {
        base: subgroup.clone(),
        values,
        value_action,
        homomorphism,
    })
}

/// Verifies that `g → g̃` is a homomorphism (exhaustive over the base).
pub fn induced_is_homomorphism(ind: &InducedGroup) -> bool {
    let group = ind.base.parent();
    let members = ind.base.members();
    let pos = |g: usize| members.binary_search(&g).unwrap();
    for (i, &g) in members.iter().enumerate() {
        for (j, &h) in members.iter().enumerate() {
            let gh = group.mul(g, h);
            let map_g = &ind.value_action[ind.homomorphism[i]];
            let map_h = &ind.value_action[ind.homomorphism[j]];
            let map_gh = &ind.value_action[ind.homomorphism[pos(gh)]];
            let composed: Vec<usize> = (0..ind.values.len()).map(|v| map_g[map_h[v]]).collect();
            if &composed != map_gh {
                return false;
            }
        }
    }
    true
}

/// Comparison of parametric functions under the factoring order `⪯`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamOrder {
    /// `θ₁ ⪯ θ₂`: `θ₁` factors through `θ₂`.
    Precedes,
    /// `θ₁ ⪰ θ₂`.
    Succeeds,
    Equivalent,
    Incomparable,
}

/// Partition refinement test: does `fine` refine `coarse`, i.e. is
/// `coarse = ψ ∘ fine` for some `ψ`?
pub fn refines(fine: &ParametricFunction, coarse: &ParametricFunction) -> bool {
    let mut image: BTreeMap<&str, &str> = BTreeMap::new();
    for phi in 0..fine.len() {
        match image.get(fine.value(phi)) {
            Some(&v) if v != coarse.value(phi) => return false,
            None => {
                image.insert(fine.value(phi), coarse.value(phi));
            }
            _ => {}
        }
    }
    true
}

pub fn compare(theta1: &ParametricFunction, theta2: &ParametricFunction) -> ParamOrder {
    let le = refines(theta2, theta1); // θ₁ = ψ∘θ₂
    let ge = refines(theta1, theta2);
    match (le, ge) {
        (true, true) => ParamOrder::Equivalent,
        (true, false) => ParamOrder::Precedes,
        (false, true) => ParamOrder::Succeeds,
        (false, false) => ParamOrder::Incomparable,
    }
}

/// A family is a frame when the joint label vector separates the
/// points of `Φ`.
pub fn is_frame(thetas: &[ParametricFunction]) -> bool {
    let Some(first) = thetas.first() else {
        return false;
    };
    let m = first.len();
    let mut seen = BTreeSet::new();
    for phi in 0..m {
        let joint: Vec<&str> = thetas.iter().map(|t| t.value(phi)).collect();
        if !seen.insert(joint) {
            return false;
        }
    }
    true
}

/// A frame is consistent when the subgroups `G_a` together
/// generate (at least) the whole group.
pub fn is_consistent(thetas: &[ParametricFunction], action: &GroupAction) -> bool {
    let mut gens: Vec<usize> = Vec::new();
    for t in thetas {
        gens.extend(maximal_permissible_subgroup(t, action).members());
    }
    match subgroup_generated(action.group(), &gens) {
        Ok(sg) => sg.is_full(),
        Err(_) => false,
    }
}

/// A coarsest partition `ψ`, permissible with respect to the full
/// group, such that every `θ_a` factors through `ψ`. Exact brute force over
/// set partitions; ties broken by lexicographic canonical form.
pub fn minimal_hyperparameter(
    thetas: &[ParametricFunction],
    action: &GroupAction,
) -> Result<ParametricFunction> {
    let m = action.set_size();
    if m > MAX_BRUTE_FORCE_POINTS {
        return Err(Error::SizeLimit {
            what: "brute-force partition search",
            got: m,
            limit: MAX_BRUTE_FORCE_POINTS,
        });
    }
    let full = Subgroup::full(action.group().clone());
    let mut best: Option<ParametricFunction> = None;
    let mut assignment = vec![0usize; m];
    // enumerate partitions in restricted-growth form
    fn walk(
        assignment: &mut Vec<usize>,
        pos: usize,
        max_used: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if pos == assignment.len() {
            visit(assignment);
            return;
        }
        for b in 0..=max_used + 1 {
            assignment[pos] = b;
            walk(assignment, pos + 1, max_used.max(b), visit);
        }
    }
    {
        let mut visit = |blocks: &[usize]| {
            let candidate = ParametricFunction::new(
                "psi",
                blocks.iter().map(|b| format!("p{b}")).collect::<Vec<_>>(),
            );
            // every θ_a must factor through ψ
            if !thetas.iter().all(|t| refines(&candidate, t)) {
                return;
            }
            if !is_permissible(&candidate, action, &full).permissible {
                return;
            }
            let better = match &best {
                None => true,
                Some(b) => {
                    let nb = b.values().len();
                    let nc = candidate.values().len();
                    nc < nb || (nc == nb && candidate.partition() < b.partition())
                }
            };
            if better {
                best = Some(candidate);
            }
        };
        let mut a0 = std::mem::take(&mut assignment);
        a0[0] = 0;
        walk(&mut a0, 1, 0, &mut visit);
    }
    best.ok_or_else(|| Error::GroupAxiom("no permissible coarsening exists".into()))
}

/// Haar-measure splitting data for a permissible parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HaarSplitReport {
    pub parameter: String,
    /// Distinct values grouped into induced-group orbits.
    pub value_orbits: Vec<Vec<String>>,
    /// Level-set sizes per value.
    pub level_sizes: BTreeMap<String, usize>,
    /// `|Φ| = Σ_orbit (orbit size × common level size)`.
    pub factorization_ok: bool,
    /// The conditional measure is the normalized Haar measure of the
    /// stabilizer action on each level set, identical across an orbit.
    pub conditional_uniform_ok: bool,
    pub offending_value: Option<String>,
}

/// With uniform Haar measure on `Φ`, the measure splits as
/// `ν(dφ) = ν̃(dθ) ν′(dφ′)`. Level sets within one induced-group orbit must
/// share cardinality, and the conditional measure on each is the uniform
/// (Haar) one for the value's stabilizer subgroup.
pub fn haar_split_check(
    theta: &ParametricFunction,
    action: &GroupAction,
    subgroup: &Subgroup,
) -> Result<HaarSplitReport> {
    let ind = induced_group(theta, action, subgroup)?;
    let level_sets = theta.level_sets();
    let size_of = |v: &str| -> usize {
        level_sets
            .iter()
            .find(|(val, _)| val == v)
            .map(|(_, s)| s.len())
            .unwrap_or(0)
    };
    let mut factorization_ok = true;
    let mut conditional_uniform_ok = true;
    let mut offending_value = None;
    let mut value_orbits = Vec::new();
    for orbit in ind.value_orbits() {
        let names: Vec<String> = orbit.iter().map(|&v| ind.values[v].clone()).collect();
        let sizes: Vec<usize> = names.iter().map(|v| size_of(v)).collect();
        if sizes.windows(2).any(|w| w[0] != w[1]) {
            factorization_ok = false;
            offending_value = Some(names[0].clone());
        }
        for v in &names {
            // the stabilizer acts transitively on the level set
            // exactly when the uniform conditional measure is its Haar
            // measure pushed to the orbit; otherwise each stabilizer orbit
            // inside the level set carries its own weight. Uniformity holds
            // when all stabilizer orbits within the level set share size.
            let stab = level_set_stabilizer(action, theta, v)?;
            let level = theta.level_set_of_value(v)?;
            let level_set: BTreeSet<usize> = level.iter().copied().collect();
            let blocks = orbits(action, &stab);
            let inner: Vec<usize> = blocks
                .iter()
                .filter(|b| b.iter().any(|p| level_set.contains(p)))
                .map(|b| b.iter().filter(|p| level_set.contains(p)).count())
                .collect();
            if inner.windows(2).any(|w| w[0] != w[1]) {
                conditional_uniform_ok = false;
                offending_value = Some(v.clone());
            }
        }
        value_orbits.push(names);
    }
    Ok(HaarSplitReport {
        parameter: theta.name.clone(),
        value_orbits,
        level_sizes: level_sets
            .iter()
            .map(|(v, s)| (v.clone(), s.len()))
            .collect(),
        factorization_ok,
        conditional_uniform_ok,
        offending_value,
    })
}

/// Checks `G_{g̃θ} = g G_θ g⁻¹` (conjugate stabilizers) for every value and
/// group element; used as an exhaustive property test.
pub fn conjugate_stabilizers_hold(
    theta: &ParametricFunction,
    action: &GroupAction,
) -> Result<bool> {
    let group = action.group();
    for (value, level) in theta.level_sets() {
        let stab = level_set_stabilizer(action, theta, &value)?;
        for g in group.elements() {
            let image_value = theta.value(action.apply(g, level[0])).to_string();
            let stab_image = level_set_stabilizer(action, theta, &image_value)?;
            if stab.conjugate(g).members() != stab_image.members() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Is the subgroup's action on the level set transitive? Used by fixtures
/// to confirm the `G_a` structure of the worked examples.
pub fn stabilizer_transitive_on_level(
    action: &GroupAction,
    subgroup: &Subgroup,
    level: &[usize],
) -> bool {
    if level.is_empty() {
        return false;
    }
    let target: BTreeSet<usize> = level.iter().copied().collect();
    let reached: BTreeSet<usize> = subgroup
        .members()
        .iter()
        .map(|&g| action.apply(g, level[0]))
        .collect();
    is_transitive_on(&reached, &target)
}

fn is_transitive_on(reached: &BTreeSet<usize>, target: &BTreeSet<usize>) -> bool {
    reached == target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use std::sync::Arc;

    fn c3_regular() -> GroupAction {
        GroupAction::regular(Arc::new(FiniteGroup::cyclic(3).unwrap()))
    }

    #[test]
    fn constant_function_always_permissible() {
        let act = c3_regular();
        let theta = ParametricFunction::constant("c", 3);
        let full = Subgroup::full(act.group().clone());
        assert!(is_permissible(&theta, &act, &full).permissible);
        assert!(maximal_permissible_subgroup(&theta, &act).is_full());
        let ind = induced_group(&theta, &act, &full).unwrap();
        assert_eq!(ind.order(), 1); // trivial induced group
    }

    #[test]
    fn identity_labeling_induces_isomorphic_group() {
        let act = c3_regular();
        let theta = ParametricFunction::identity("id", act.point_names());
        let full = Subgroup::full(act.group().clone());
        let ind = induced_group(&theta, &act, &full).unwrap();
        assert_eq!(ind.order(), 3);
        assert!(induced_is_homomorphism(&ind));
    }

    #[test]
    fn trivial_subgroup_always_permissible() {
        let act = c3_regular();
        let theta = ParametricFunction::from_strs("t", &["x", "y", "x"]);
        let triv = Subgroup::trivial(act.group().clone());
        assert!(is_permissible(&theta, &act, &triv).permissible);
    }

    #[test]
    fn ordering_and_equivalence() {
        let fine = ParametricFunction::from_strs("f", &["a", "b", "c", "d"]);
        let coarse = ParametricFunction::from_strs("c", &["x", "x", "y", "y"]);
        let relabeled = ParametricFunction::from_strs("r", &["1", "1", "2", "2"]);
        assert_eq!(compare(&coarse, &fine), ParamOrder::Precedes);
        assert_eq!(compare(&fine, &coarse), ParamOrder::Succeeds);
        assert_eq!(compare(&coarse, &relabeled), ParamOrder::Equivalent);
        let other = ParametricFunction::from_strs("o", &["x", "y", "x", "y"]);
        assert_eq!(compare(&coarse, &other), ParamOrder::Incomparable);
    }

    #[test]
    fn frame_needs_separation() {
        let t1 = ParametricFunction::from_strs("t1", &["a", "a", "b", "b"]);
        let t2 = ParametricFunction::from_strs("t2", &["x", "y", "x", "y"]);
        assert!(is_frame(&[t1.clone(), t2.clone()]));
        assert!(!is_frame(&[t1]));
    }

    #[test]
    fn minimal_hyperparameter_single_theta() {
        let act = c3_regular();
        // a permissible 3-level labeling on C3 regular action: identity
        let theta = ParametricFunction::identity("id", act.point_names());
        let psi = minimal_hyperparameter(&[theta.clone()], &act).unwrap();
        assert_eq!(compare(&psi, &theta), ParamOrder::Equivalent);
        // constant target allows the constant coarsening
        let con = ParametricFunction::constant("c", 3);
        let psi2 = minimal_hyperparameter(&[con.clone()], &act).unwrap();
        assert_eq!(compare(&psi2, &con), ParamOrder::Equivalent);
    }

    #[test]
    fn compound_of_permissibles_is_permissible() {
        let act = c3_regular();
        let full = Subgroup::full(act.group().clone());
        let t1 = ParametricFunction::identity("id", act.point_names());
        let t2 = ParametricFunction::constant("c", 3);
        let compound = t1.compound(&t2);
        assert!(is_permissible(&compound, &act, &full).permissible);
    }

    #[test]
    fn haar_split_on_cyclic() {
        let act = c3_regular();
        let full = Subgroup::full(act.group().clone());
        let theta = ParametricFunction::identity("id", act.point_names());
        let report = haar_split_check(&theta, &act, &full).unwrap();
        assert!(report.factorization_ok);
        assert!(report.conditional_uniform_ok); // point-mass conditionals
        let con = ParametricFunction::constant("c", 3);
        let report2 = haar_split_check(&con, &act, &full).unwrap();
        assert!(report2.factorization_ok); // trivial factorization
    }
}
