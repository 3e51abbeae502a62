//! Exact finite-group arithmetic: Cayley tables, actions on finite sets,
//! subgroups, orbits, cosets and the normalized counting (Haar) measure.
//!
//! Groups are stored extensionally. The Haar integral of a function on a
//! group of order `n` is the uniform average with weight `1/n`.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Hard cap for exact operations on a single group.
pub const MAX_GROUP_ORDER: usize = 5040;
/// Hard cap for brute-force subset searches over the hyperparameter set.
pub const MAX_BRUTE_FORCE_POINTS: usize = 12;

/// A finite group given by its full multiplication table.
///
/// Element indices are 0-based internally; display names default to the
/// 1-based convention `g1..gn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    cayley: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
    names: Vec<String>,
}

impl FiniteGroup {
    /// Builds a group from a Cayley table, verifying the group axioms.
    ///
    /// Associativity is checked exhaustively up to order 128 and on a
    /// deterministic sample of triples beyond that.
    pub fn from_cayley(cayley: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self> {
        let n = cayley.len();
        if n == 0 {
            return Err(Error::GroupAxiom("empty Cayley table".into()));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::SizeLimit {
                what: "group order",
                got: n,
                limit: MAX_GROUP_ORDER,
            });
        }
        for (i, row) in cayley.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidCayley {
                    row: i,
                    col: row.len(),
                    reason: format!("row has {} entries, expected {}", row.len(), n),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidCayley {
                        row: i,
                        col: j,
                        reason: format!("entry {v} out of range"),
                    });
                }
            }
        }
        // Latin square property: rows and columns are permutations.
        for i in 0..n {
            let row: BTreeSet<usize> = cayley[i].iter().copied().collect();
            if row.len() != n {
                return Err(Error::InvalidCayley {
                    row: i,
                    col: 0,
                    reason: "row is not a permutation".into(),
                });
            }
            let col: BTreeSet<usize> = (0..n).map(|r| cayley[r][i]).collect();
            if col.len() != n {
                return Err(Error::InvalidCayley {
                    row: 0,
                    col: i,
                    reason: "column is not a permutation".into(),
                });
            }
        }
        // identity
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| cayley[e][g] == g && cayley[g][e] == g))
            .ok_or_else(|| Error::GroupAxiom("no identity element".into()))?;
        // inverses
        let mut inverses = vec![0usize; n];
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| cayley[g][h] == identity && cayley[h][g] == identity)
                .ok_or_else(|| Error::GroupAxiom(format!("element {g} has no inverse")))?;
            inverses[g] = inv;
        }
        // associativity
        if n <= 128 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                            return Err(Error::GroupAxiom(format!(
                                "associativity fails at ({a}, {b}, {c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..1_000_000 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                let a = (state >> 33) as usize % n;
                let b = (state >> 17) as usize % n;
                let c = (state >> 5) as usize % n;
                if cayley[cayley[a][b]][c] != cayley[a][cayley[b][c]] {
                    return Err(Error::GroupAxiom(format!(
                        "associativity fails at ({a}, {b}, {c})"
                    )));
                }
            }
        }
        let names = names.unwrap_or_else(|| (0..n).map(|i| format!("g{}", i + 1)).collect());
        if names.len() != n {
            return Err(Error::GroupAxiom(format!(
                "{} names for {} elements",
                names.len(),
                n
            )));
        }
        Ok(FiniteGroup {
            order: n,
            cayley,
            identity,
            inverses,
            names,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.cayley[a][b]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn name(&self, g: usize) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Uniform Haar weight `1/n`.
    pub fn haar_weight(&self) -> f64 {
        1.0 / self.order as f64
    }

    /// The trivial group.
    pub fn trivial() -> Self {
        FiniteGroup::from_cayley(vec![vec![0]], Some(vec!["e".into()])).unwrap()
    }

    /// Cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::GroupAxiom("cyclic group needs n >= 1".into()));
        }
        let cayley = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::from_cayley(cayley, None)
    }

    /// Symmetric group on `n` letters (n <= 7), elements in lexicographic
    /// order of their one-line notation. Product `p * q` acts as `p ∘ q`
    /// (apply `q` first).
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 || n > 7 {
            return Err(Error::SizeLimit {
                what: "symmetric group degree",
                got: n,
                limit: 7,
            });
        }
        let perms = permutations_lex(n);
        let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
        let order = perms.len();
        let mut cayley = vec![vec![0usize; order]; order];
        for (i, p) in perms.iter().enumerate() {
            for (j, q) in perms.iter().enumerate() {
                let composed: Vec<usize> = (0..n).map(|x| p[q[x]]).collect();
                cayley[i][j] = index(&composed);
            }
        }
        let names = perms
            .iter()
            .map(|p| {
                p.iter()
                    .map(|x| (b'1' + *x as u8) as char)
                    .collect::<String>()
            })
            .collect();
        FiniteGroup::from_cayley(cayley, Some(names))
    }

    /// Dihedral group of order `2n`: rotations `r^k` then reflections
    /// `s r^k`, acting on the vertices of a regular n-gon. Needs `n >= 3`:
    /// the vertex maps are only faithful from the triangle up.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::GroupAxiom("dihedral group needs n >= 3".into()));
        }
        let order = 2 * n;
        // element (flip, k): the map x -> k + x or k - x mod n
        let apply = |e: usize, x: usize| -> usize {
            let (flip, k) = (e >= n, e % n);
            if flip {
                (k + n - x % n) % n
            } else {
                (k + x) % n
            }
        };
        let encode = |flip: bool, k: usize| if flip { n + k } else { k };
        let mut cayley = vec![vec![0usize; order]; order];
        for a in 0..order {
            for b in 0..order {
                // compose as maps: (a*b)(x) = a(b(x))
                let img0 = apply(a, apply(b, 0));
                let img1 = apply(a, apply(b, 1));
                let flip = img1 != (img0 + 1) % n;
                cayley[a][b] = encode(flip, img0);
            }
        }
        let names = (0..order)
            .map(|e| {
                if e < n {
                    format!("r{e}")
                } else {
                    format!("s{}", e - n)
                }
            })
            .collect();
        FiniteGroup::from_cayley(cayley, Some(names))
    }
}

fn permutations_lex(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| current[i] < current[i + 1])
        else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

/// A left action of a [`FiniteGroup`] on a finite set `Φ`.
#[derive(Debug, Clone)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    set_size: usize,
    table: Vec<Vec<usize>>,
    point_names: Vec<String>,
}

impl GroupAction {
    /// Builds an action from its table `table[g][φ] = gφ`, verifying the
    /// identity and left-action laws.
    pub fn new(
        group: Arc<FiniteGroup>,
        table: Vec<Vec<usize>>,
        point_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = group.order();
        if table.len() != n {
            return Err(Error::InvalidAction(format!(
                "table has {} rows, expected {}",
                table.len(),
                n
            )));
        }
        let m = table[0].len();
        if m == 0 {
            return Err(Error::InvalidAction("empty point set".into()));
        }
        for (g, row) in table.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidAction(format!("row {g} has wrong length")));
            }
            if row.iter().any(|&p| p >= m) {
                return Err(Error::InvalidAction(format!(
                    "row {g} has out-of-range point"
                )));
            }
        }
        let e = group.identity();
        if (0..m).any(|p| table[e][p] != p) {
            return Err(Error::InvalidAction(
                "identity does not act trivially".into(),
            ));
        }
        for g in 0..n {
            for h in 0..n {
                let gh = group.mul(g, h);
                for p in 0..m {
                    if table[gh][p] != table[g][table[h][p]] {
                        return Err(Error::InvalidAction(format!(
                            "left-action law fails at (g={g}, h={h}, p={p})"
                        )));
                    }
                }
            }
        }
        let point_names =
            point_names.unwrap_or_else(|| (0..m).map(|i| format!("{}", i + 1)).collect());
        if point_names.len() != m {
            return Err(Error::InvalidAction("point name count mismatch".into()));
        }
        Ok(GroupAction {
            group,
            set_size: m,
            table,
            point_names,
        })
    }

    /// The regular action of a group on itself by left multiplication.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        let table = (0..n)
            .map(|g| (0..n).map(|p| group.mul(g, p)).collect())
            .collect();
        let names = group.names().to_vec();
        GroupAction::new(group, table, Some(names)).expect("regular action is valid")
    }

    /// Natural action of `symmetric(n)` on the `n` letters.
    pub fn natural_symmetric(n: usize) -> Result<Self> {
        let group = Arc::new(FiniteGroup::symmetric(n)?);
        let perms = permutations_lex(n);
        let table = perms.iter().cloned().collect();
        let names = (0..n)
            .map(|i| ((b'a' + i as u8) as char).to_string())
            .collect();
        GroupAction::new(group, table, Some(names))
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn apply(&self, g: usize, p: usize) -> usize {
        self.table[g][p]
    }

    pub fn point_name(&self, p: usize) -> &str {
        &self.point_names[p]
    }

    pub fn point_names(&self) -> &[String] {
        &self.point_names
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// A subgroup, stored as a sorted member list of a parent [`FiniteGroup`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    parent: Arc<FiniteGroup>,
    members: Vec<usize>,
}

impl Subgroup {
    /// Wraps a member set after verifying closure, identity and inverses.
    pub fn new(parent: Arc<FiniteGroup>, members: BTreeSet<usize>) -> Result<Self> {
        let n = parent.order();
        for &g in &members {
            if g >= n {
                return Err(Error::IndexOutOfRange { index: g, order: n });
            }
        }
        if !members.contains(&parent.identity()) {
            return Err(Error::GroupAxiom("subgroup misses the identity".into()));
        }
        for &a in &members {
            if !members.contains(&parent.inv(a)) {
                return Err(Error::GroupAxiom(format!("subgroup misses inverse of {a}")));
            }
            for &b in &members {
                if !members.contains(&parent.mul(a, b)) {
                    return Err(Error::GroupAxiom(format!(
                        "subgroup not closed: {a} * {b} escapes"
                    )));
                }
            }
        }
        Ok(Subgroup {
            parent,
            members: members.into_iter().collect(),
        })
    }

    pub fn full(parent: Arc<FiniteGroup>) -> Self {
        let members = parent.elements().collect();
        Subgroup::new(parent, members).unwrap()
    }

    pub fn trivial(parent: Arc<FiniteGroup>) -> Self {
        let members = std::iter::once(parent.identity()).collect();
        Subgroup::new(parent, members).unwrap()
    }

    pub fn parent(&self) -> &Arc<FiniteGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.parent.order()
    }

    /// Member names for reports.
    pub fn member_names(&self) -> Vec<String> {
        self.members
            .iter()
            .map(|&g| self.parent.name(g).to_string())
            .collect()
    }

    /// The conjugate subgroup `g H g⁻¹`.
    pub fn conjugate(&self, g: usize) -> Subgroup {
        let gi = self.parent.inv(g);
        let members = self
            .members
            .iter()
            .map(|&h| self.parent.mul(self.parent.mul(g, h), gi))
            .collect();
        Subgroup::new(self.parent.clone(), members).expect("conjugate of a subgroup")
    }

    /// Is this subgroup normal in its parent?
    pub fn is_normal(&self) -> bool {
        self.parent
            .elements()
            .all(|g| self.conjugate(g).members == self.members)
    }
}

/// Smallest subgroup containing the given generators (closure by product
/// saturation).
pub fn subgroup_generated(parent: &Arc<FiniteGroup>, generators: &[usize]) -> Result<Subgroup> {
    let n = parent.order();
    for &g in generators {
        if g >= n {
            return Err(Error::IndexOutOfRange { index: g, order: n });
        }
    }
    let mut members: BTreeSet<usize> = std::iter::once(parent.identity()).collect();
    members.extend(generators.iter().copied());
    loop {
        let mut grew = false;
        let snapshot: Vec<usize> = members.iter().copied().collect();
        for &a in &snapshot {
            if members.insert(parent.inv(a)) {
                grew = true;
            }
            for &b in &snapshot {
                if members.insert(parent.mul(a, b)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    Subgroup::new(parent.clone(), members)
}

/// Orbit partition of `Φ` under a subgroup. Blocks are sorted internally and
/// ordered by their least point.
pub fn orbits(action: &GroupAction, subgroup: &Subgroup) -> Vec<Vec<usize>> {
    let m = action.set_size();
    let mut seen = vec![false; m];
    let mut blocks = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut block = BTreeSet::new();
        let mut stack = vec![start];
        seen[start] = true;
        block.insert(start);
        while let Some(p) = stack.pop() {
            for &g in subgroup.members() {
                let q = action.apply(g, p);
                if !seen[q] {
                    seen[q] = true;
                    block.insert(q);
                    stack.push(q);
                }
            }
        }
        blocks.push(block.into_iter().collect());
    }
    blocks
}

/// One orbit under the given subgroup.
pub fn orbit_of(action: &GroupAction, subgroup: &Subgroup, point: usize) -> Vec<usize> {
    let mut block = BTreeSet::new();
    let mut stack = vec![point];
    block.insert(point);
    while let Some(p) = stack.pop() {
        for &g in subgroup.members() {
            let q = action.apply(g, p);
            if block.insert(q) {
                stack.push(q);
            }
        }
    }
    block.into_iter().collect()
}

/// Transitive: a single orbit.
pub fn is_transitive(action: &GroupAction, subgroup: &Subgroup) -> bool {
    orbits(action, subgroup).len() == 1
}

/// Exact: at most one member maps any point to any other (equivalently only
/// the identity fixes a point).
pub fn is_exact(action: &GroupAction, subgroup: &Subgroup) -> bool {
    let e = action.group().identity();
    for &g in subgroup.members() {
        if g == e {
            continue;
        }
        if (0..action.set_size()).any(|p| action.apply(g, p) == p) {
            return false;
        }
    }
    true
}

/// Restriction of the group to a subset `Φ₀`: the maximal subgroup that is
/// a transformation group on `Φ₀`, i.e. the elements mapping `Φ₀` into
/// itself in both directions.
pub fn restrict_group_to_subset(action: &GroupAction, subset: &[usize]) -> Result<Subgroup> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let set: BTreeSet<usize> = subset.iter().copied().collect();
    let group = action.group();
    let members = group
        .elements()
        .filter(|&g| {
            let gi = group.inv(g);
            set.iter()
                .all(|&p| set.contains(&action.apply(g, p)) && set.contains(&action.apply(gi, p)))
        })
        .collect();
    Subgroup::new(group.clone(), members)
}

/// Intersection of subgroups, with a normality assertion against the parent.
pub fn normal_core(subgroups: &[Subgroup]) -> Result<Subgroup> {
    let first = subgroups
        .first()
        .ok_or_else(|| Error::GroupAxiom("normal_core of empty list".into()))?;
    let parent = first.parent().clone();
    let mut members: BTreeSet<usize> = first.members().iter().copied().collect();
    for sg in &subgroups[1..] {
        members.retain(|g| sg.contains(*g));
    }
    let core = Subgroup::new(parent, members)?;
    if !core.is_normal() {
        return Err(Error::NotNormal(format!("{:?}", core.member_names())));
    }
    Ok(core)
}
