//! The dual graph of the minimal log resolution and the vertex weight that
//! locates the divisor computing the log-canonical threshold.
//!
//! Vertices are the (strict transforms of the) exceptional divisors on the
//! final surface. Two divisors meet exactly when one point is proximate to
//! the other and no later point is proximate to both: a later satellite in
//! between separates them. Branches attach as arrows at the vertex of
//! their maximal point. Rooting the tree at the first divisor orders the
//! vertices, and the weight of a vertex compares the branches attached
//! beyond it with the ones split off below it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::constellation::{CurveSpec, PointId};
use crate::error::{Error, Result};
use crate::invariants::{BranchInvariants, PointSets};

pub type Rat = BigRational;

#[derive(Debug, Clone)]
pub struct DualGraph {
    adjacency: Vec<Vec<PointId>>,
    tree_parent: Vec<Option<PointId>>,
    depth: Vec<usize>,
    /// Arrow of branch `i` sits at `arrows[i]`.
    arrows: Vec<PointId>,
}

/// Builds the dual graph on the final surface.
///
/// Edge rule: `{v_j, v_k}` with `j < k` is present iff `P_k` is proximate
/// to `P_j` and no later point is proximate to both.
pub fn build_dual_graph(spec: &CurveSpec) -> Result<DualGraph> {
    let c = &spec.constellation;
    let m = c.len();

    let mut killed: BTreeSet<(PointId, PointId)> = BTreeSet::new();
    for p in c.ids() {
        if let (Some(parent), Some(second)) = (c.parent(p), c.satellite_of(p)) {
            killed.insert((second, parent));
        }
    }

    let mut adjacency: Vec<Vec<PointId>> = vec![Vec::new(); m];
    let mut edge_count = 0usize;
    for k in c.ids() {
        for q in c.proximities(k) {
            if !killed.contains(&(q, k)) {
                adjacency[k.pos()].push(q);
                adjacency[q.pos()].push(k);
                edge_count += 1;
            }
        }
    }
    for list in &mut adjacency {
        list.sort();
    }
    assert_eq!(
        edge_count,
        m - 1,
        "dual graph of {m} vertices must be a tree"
    );

    // root the tree at v1
    let root = PointId::new(1);
    let mut tree_parent: Vec<Option<PointId>> = vec![None; m];
    let mut depth = vec![usize::MAX; m];
    let mut queue = VecDeque::new();
    depth[root.pos()] = 0;
    queue.push_back(root);
    let mut seen = 1usize;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v.pos()] {
            if depth[w.pos()] == usize::MAX {
                depth[w.pos()] = depth[v.pos()] + 1;
                tree_parent[w.pos()] = Some(v);
                queue.push_back(w);
                seen += 1;
            }
        }
    }
    assert_eq!(seen, m, "dual graph must be connected");

    let arrows = spec.branches.iter().map(|b| b.at).collect();
    Ok(DualGraph {
        adjacency,
        tree_parent,
        depth,
        arrows,
    })
}

impl DualGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: PointId) -> &[PointId] {
        &self.adjacency[v.pos()]
    }

    pub fn degree(&self, v: PointId) -> usize {
        self.adjacency[v.pos()].len()
    }

    pub fn arrows(&self) -> &[PointId] {
        &self.arrows
    }

    pub fn arrow_vertex(&self, i: usize) -> PointId {
        self.arrows[i]
    }

    pub fn arrows_at(&self, v: PointId) -> usize {
        self.arrows.iter().filter(|&&a| a == v).count()
    }

    /// Degree plus attached arrows, plus one at the root.
    pub fn adapted_degree(&self, v: PointId) -> usize {
        let root_bonus = if v.index() == 1 { 1 } else { 0 };
        self.degree(v) + self.arrows_at(v) + root_bonus
    }

    pub fn depth(&self, v: PointId) -> usize {
        self.depth[v.pos()]
    }

    /// Tree order: `u <= v` iff `u` lies on the path from the root to `v`.
    pub fn le(&self, u: PointId, v: PointId) -> bool {
        let mut cur = v;
        loop {
            if cur == u {
                return true;
            }
            match self.tree_parent[cur.pos()] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// The path `[v_1, v]` in root-to-vertex order.
    pub fn root_path(&self, v: PointId) -> Vec<PointId> {
        let mut path = Vec::new();
        let mut cur = Some(v);
        while let Some(p) = cur {
            path.push(p);
            cur = self.tree_parent[p.pos()];
        }
        path.reverse();
        path
    }

    /// Deepest common vertex of the two root paths.
    pub fn meet(&self, u: PointId, v: PointId) -> PointId {
        let (mut a, mut b) = (u, v);
        while self.depth(a) > self.depth(b) {
            a = self.tree_parent[a.pos()].expect("deeper vertex has a parent");
        }
        while self.depth(b) > self.depth(a) {
            b = self.tree_parent[b.pos()].expect("deeper vertex has a parent");
        }
        while a != b {
            a = self.tree_parent[a.pos()].expect("meet exists in a tree");
            b = self.tree_parent[b.pos()].expect("meet exists in a tree");
        }
        a
    }

    /// Path between two comparable vertices `u <= v`, in order from `u`.
    pub fn path_between(&self, u: PointId, v: PointId) -> Vec<PointId> {
        debug_assert!(self.le(u, v));
        let mut path = Vec::new();
        let mut cur = v;
        loop {
            path.push(cur);
            if cur == u {
                break;
            }
            cur = self.tree_parent[cur.pos()].expect("u is an ancestor of v");
        }
        path.reverse();
        path
    }

    /// Splits all arrows into those not above `v_j` and those above it.
    pub fn arrow_split(&self, j: PointId) -> (Vec<usize>, Vec<usize>) {
        let mut less = Vec::new();
        let mut geq = Vec::new();
        for (i, &at) in self.arrows.iter().enumerate() {
            if self.le(j, at) {
                geq.push(i);
            } else {
                less.push(i);
            }
        }
        (less, geq)
    }
}

/// The vertex families the distinguished-vertex search works with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexFamilies {
    pub v_f: BTreeSet<PointId>,
    pub v_t: BTreeSet<PointId>,
    pub v_s: BTreeSet<PointId>,
    pub v_free: BTreeSet<PointId>,
    pub v_end: BTreeSet<PointId>,
    /// `v_t` union `v_s`; equals the vertices of `v_f` with adapted degree
    /// at least 3.
    pub v: BTreeSet<PointId>,
}

pub fn vertex_families(spec: &CurveSpec, g: &DualGraph, sets: &PointSets) -> VertexFamilies {
    let c = &spec.constellation;
    let v_f = sets.f.clone();
    let v_free: BTreeSet<PointId> = v_f.iter().copied().filter(|&p| c.is_free(p)).collect();
    let v_end: BTreeSet<PointId> = v_f.iter().copied().filter(|&p| g.degree(p) == 1).collect();
    let v: BTreeSet<PointId> = sets.t.union(&sets.s).copied().collect();
    VertexFamilies {
        v_f,
        v_t: sets.t.clone(),
        v_s: sets.s.clone(),
        v_free,
        v_end,
        v,
    }
}

/// Exact values of the weight map on the vertices of `v_f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaTable {
    pub values: BTreeMap<PointId, Rat>,
}

impl SigmaTable {
    pub fn get(&self, v: PointId) -> &Rat {
        &self.values[&v]
    }
}

/// Coefficient of branch `i` in the weight of `v_j`, defined for arrows
/// strictly below the vertex. When the two root paths part at an initial
/// separating point the coefficient counts the free vertices up to the
/// meet (a curvette at `P_j` and the branch are freely separated there);
/// otherwise it is the contact ratio `beta1/beta0` of the branch.
pub fn c_coefficient(
    spec: &CurveSpec,
    g: &DualGraph,
    fam: &VertexFamilies,
    invs: &[BranchInvariants],
    j: PointId,
    i: usize,
) -> Result<Rat> {
    if g.le(j, g.arrow_vertex(i)) {
        return Err(Error::NotInVLess {
            arrow: i,
            vertex: j.index(),
        });
    }
    let meet = g.meet(g.arrow_vertex(i), j);
    if fam.v_s.contains(&meet) {
        let count = g
            .root_path(meet)
            .into_iter()
            .filter(|p| fam.v_free.contains(p))
            .count();
        Ok(Rat::from(BigInt::from(count)))
    } else {
        let _ = spec;
        Ok(Rat::new(invs[i].beta1.clone(), invs[i].beta0.clone()))
    }
}

/// Weight of the vertex `v_j`: the coefficient-weighted multiplicities of
/// the branches split off below `v_j` minus the multiplicities of the
/// branches at or above it. Always an integer in value.
pub fn sigma(
    spec: &CurveSpec,
    g: &DualGraph,
    fam: &VertexFamilies,
    invs: &[BranchInvariants],
    j: PointId,
) -> Result<Rat> {
    if !fam.v_f.contains(&j) {
        return Err(Error::PointNotInF(j.index()));
    }
    let (less, geq) = g.arrow_split(j);
    let mut value = Rat::zero();
    for i in less {
        let c = c_coefficient(spec, g, fam, invs, j, i)?;
        value += c * Rat::from(invs[i].beta0.clone());
    }
    for i in geq {
        value -= Rat::from(invs[i].beta0.clone());
    }
    assert!(value.is_integer(), "weight at {j} must be an integer");
    Ok(value)
}

pub fn sigma_table(
    spec: &CurveSpec,
    g: &DualGraph,
    fam: &VertexFamilies,
    invs: &[BranchInvariants],
) -> Result<SigmaTable> {
    let mut values = BTreeMap::new();
    for &j in &fam.v_f {
        values.insert(j, sigma(spec, g, fam, invs, j)?);
    }
    Ok(SigmaTable { values })
}

/// The vertex of `V` whose weight is negative together with all `V`
/// vertices below it, while every `V` vertex elsewhere has non-negative
/// weight. The negative set is a chain from the root, so the vertex is
/// its maximum.
pub fn distinguished_vertex(
    g: &DualGraph,
    fam: &VertexFamilies,
    sigma: &SigmaTable,
) -> Result<PointId> {
    let mut negatives: Vec<PointId> = fam
        .v
        .iter()
        .copied()
        .filter(|v| sigma.get(*v) < &Rat::zero())
        .collect();
    if negatives.is_empty() {
        return Err(Error::NoDistinguishedVertex(
            "no vertex of V has negative weight".into(),
        ));
    }
    negatives.sort_by_key(|v| g.depth(*v));
    for pair in negatives.windows(2) {
        if !g.le(pair[0], pair[1]) {
            return Err(Error::NoDistinguishedVertex(format!(
                "negative-weight vertices {} and {} are incomparable",
                pair[0], pair[1]
            )));
        }
    }
    let v_k = *negatives.last().expect("nonempty");
    for &u in &fam.v {
        if g.le(u, v_k) && sigma.get(u) >= &Rat::zero() {
            return Err(Error::NoDistinguishedVertex(format!(
                "vertex {u} below {v_k} has non-negative weight"
            )));
        }
    }
    Ok(v_k)
}

/// Optional decorations for the DOT export.
#[derive(Debug, Clone, Default)]
pub struct DotAnnotations {
    pub sigma: BTreeMap<PointId, Rat>,
    pub t: BTreeSet<PointId>,
    pub s: BTreeSet<PointId>,
    pub v: BTreeSet<PointId>,
}

/// Deterministic DOT text for the dual graph. Vertices are named `v<j>`,
/// arrows render as labeled leaf nodes `a<i>`.
pub fn dot_export(g: &DualGraph, ann: &DotAnnotations) -> String {
    let mut out = String::from("graph dual {\n");
    for pos in 0..g.len() {
        let v = PointId::new(pos + 1);
        let mut label = format!("v{}", v.index());
        if let Some(s) = ann.sigma.get(&v) {
            label.push_str(&format!(" sigma={s}"));
        }
        let mut marks = Vec::new();
        if ann.t.contains(&v) {
            marks.push("T");
        }
        if ann.s.contains(&v) {
            marks.push("S");
        }
        if ann.v.contains(&v) {
            marks.push("V");
        }
        if !marks.is_empty() {
            label.push_str(&format!(" [{}]", marks.join(",")));
        }
        let shape = if ann.t.contains(&v) {
            ", shape=box"
        } else if ann.s.contains(&v) {
            ", shape=diamond"
        } else {
            ""
        };
        out.push_str(&format!(
            "  v{} [label=\"{}\"{}];\n",
            v.index(),
            label,
            shape
        ));
    }
    for (i, at) in g.arrows().iter().enumerate() {
        out.push_str(&format!(
            "  a{} [label=\"a{}\", shape=plaintext];\n",
            i + 1,
            i + 1
        ));
        let _ = at;
    }
    for pos in 1..g.len() {
        let v = PointId::new(pos + 1);
        let p = g.tree_parent[v.pos()].expect("non-root vertex has a tree parent");
        out.push_str(&format!("  v{} -- v{};\n", p.index(), v.index()));
    }
    for (i, at) in g.arrows().iter().enumerate() {
        out.push_str(&format!(
            "  v{} -- a{} [style=dashed];\n",
            at.index(),
            i + 1
        ));
    }
    out.push_str("}\n");
    out
}

/// Deterministic DOT text for the proximity graph: solid edges to parents,
/// dashed edges to second proximities, arrows at branch maxima.
pub fn proximity_dot_export(spec: &CurveSpec) -> String {
    let c = &spec.constellation;
    let mut out = String::from("digraph proximity {\n");
    for j in c.ids() {
        let kind = if c.is_satellite(j) {
            "satellite"
        } else {
            "free"
        };
        out.push_str(&format!(
            "  p{} [label=\"P{} ({})\"];\n",
            j.index(),
            j.index(),
            kind
        ));
    }
    for (i, b) in spec.branches.iter().enumerate() {
        out.push_str(&format!(
            "  a{} [label=\"a{}\", shape=plaintext];\n",
            i + 1,
            i + 1
        ));
        let _ = b;
    }
    for j in c.ids() {
        if let Some(p) = c.parent(j) {
            out.push_str(&format!("  p{} -> p{};\n", j.index(), p.index()));
        }
        if let Some(q) = c.satellite_of(j) {
            out.push_str(&format!(
                "  p{} -> p{} [style=dashed];\n",
                j.index(),
                q.index()
            ));
        }
    }
    for (i, b) in spec.branches.iter().enumerate() {
        out.push_str(&format!(
            "  a{} -> p{} [style=dotted, arrowhead=none];\n",
            i + 1,
            b.at.index()
        ));
    }
    out.push_str("}\n");
    out
}
