//! PC-trees whose P-nodes carry color constraints and whose C-nodes may be
//! fixed against reversal.

use rustc_hash::FxHashMap;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::cyclic::{CyclicOrder, Elem};
use crate::error::{invalid, Error, Result};
use crate::pctree::{NodeRef, PCTree, SplitInfo, Tree};
use crate::tree::{Color, Forest, Kind, NodeId, Orient, Status, NIL};

/// Default leaf bound of [`cc_enumerate`].
pub const CC_ENUM_BOUND: usize = 9;

/// Allowed arrangements of the edges around one vertex.
///
/// `rho` lists the fixed edges counter-clockwise. `color` maps a fixed edge
/// to the color of the angle that follows it and a restricted edge to the
/// color of the angle it must lie in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorConstraint {
    pub rho: CyclicOrder,
    pub restricted: Vec<Elem>,
    pub unrestricted: Vec<Elem>,
    pub color: BTreeMap<Elem, Color>,
}

impl ColorConstraint {
    /// Checks that the three edge classes are disjoint and colored.
    pub fn new(rho: Vec<Elem>, restricted: Vec<Elem>, unrestricted: Vec<Elem>, color: BTreeMap<Elem, Color>) -> Result<Self> {
        let rho = CyclicOrder::new(rho)?;
        let mut seen = HashSet::new();
        for &e in rho.as_slice().iter().chain(&restricted).chain(&unrestricted) {
            if !seen.insert(e) {
                return Err(invalid(format!("element {e} appears twice")));
            }
        }
        for &e in rho.as_slice().iter().chain(&restricted) {
            if !color.contains_key(&e) {
                return Err(invalid(format!("element {e} has no color")));
            }
        }
        Ok(ColorConstraint { rho, restricted, unrestricted, color })
    }

    /// The unconstrained case over `elems`.
    pub fn free(elems: &[Elem]) -> Self {
        ColorConstraint {
            rho: CyclicOrder::from_vec_unchecked(Vec::new()),
            restricted: Vec::new(),
            unrestricted: elems.to_vec(),
            color: BTreeMap::new(),
        }
    }

    pub fn fixed(&self) -> &[Elem] {
        self.rho.as_slice()
    }

    pub fn elements(&self) -> Vec<Elem> {
        let mut v = self.rho.as_slice().to_vec();
        v.extend(&self.restricted);
        v.extend(&self.unrestricted);
        v
    }

    pub fn status(&self, e: Elem) -> Status {
        if self.rho.contains(e) {
            Status::Fixed(self.color[&e])
        } else if self.restricted.contains(&e) {
            Status::Restricted(self.color[&e])
        } else {
            Status::Unrestricted
        }
    }
}

/// Whether a counter-clockwise order of the elements is valid for `c`.
pub fn satisfies_constraint(order: &CyclicOrder, c: &ColorConstraint) -> bool {
    let mut want: Vec<Elem> = c.elements();
    let mut have: Vec<Elem> = order.as_slice().to_vec();
    want.sort_unstable();
    have.sort_unstable();
    if want != have {
        return false;
    }
    if c.rho.is_empty() {
        return true;
    }
    let v = order.as_slice();
    let fixed: HashSet<Elem> = c.fixed().iter().copied().collect();
    let proj: Vec<Elem> = v.iter().copied().filter(|e| fixed.contains(e)).collect();
    if CyclicOrder::from_vec_unchecked(proj) != c.rho {
        return false;
    }
    let start = v.iter().position(|e| fixed.contains(e)).unwrap();
    let restricted: HashSet<Elem> = c.restricted.iter().copied().collect();
    let mut cur = 0;
    for i in 0..v.len() {
        let e = v[(start + i) % v.len()];
        if fixed.contains(&e) {
            cur = c.color[&e];
        } else if restricted.contains(&e) && c.color[&e] != cur {
            return false;
        }
    }
    true
}

/// Orientation of a C-node relative to how it is currently stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    AsIs,
    Reversed,
}

impl From<Orientation> for Orient {
    fn from(o: Orientation) -> Orient {
        match o {
            Orientation::AsIs => Orient::AsIs,
            Orientation::Reversed => Orient::Reversed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipVerdict {
    Empty,
    Free,
    Fixed(Orientation),
}

/// A color-constrained PC-tree over `u32` leaf labels.
#[derive(Clone, Debug)]
pub struct CCPCTree(pub(crate) Tree);

impl CCPCTree {
    pub fn null() -> Self {
        CCPCTree(Tree::null())
    }

    pub fn is_null(&self) -> bool {
        self.0.is_null()
    }

    pub fn leaves(&self) -> BTreeSet<Elem> {
        self.0.clone().labels()
    }

    pub fn to_dot(&self) -> String {
        self.0.clone().to_dot()
    }

    /// The root node, or `None` for a null tree or a root leaf.
    pub fn root(&self) -> Option<NodeRef> {
        if self.is_null() || self.0.f.kind(self.0.root) == Kind::Leaf {
            None
        } else {
            Some(NodeRef(self.0.root))
        }
    }

    /// Inner nodes with their kind: `'P'`, `'C'` or `'F'` for a fixed C-node.
    pub fn inner_nodes(&self) -> Vec<(NodeRef, char)> {
        let mut t = self.0.clone();
        inner_nodes(&mut t.f, t.root).into_iter().map(|(x, k)| (NodeRef(x), k)).collect()
    }

    /// Every per-color counter agrees with a recount.
    pub fn counters_consistent(&self) -> bool {
        let mut t = self.0.clone();
        let nodes = inner_nodes(&mut t.f, t.root);
        nodes.into_iter().all(|(x, _)| t.f.counters_consistent(x))
    }
}

pub(crate) fn inner_nodes(f: &mut Forest, root: NodeId) -> Vec<(NodeId, char)> {
    let mut out = Vec::new();
    if root == NIL {
        return out;
    }
    let mut stack = vec![(root, NIL)];
    while let Some((x, from)) = stack.pop() {
        let x = f.find(x);
        match f.kind(x) {
            Kind::P => out.push((x, 'P')),
            Kind::C => out.push((x, if f.nodes[x as usize].fixed { 'F' } else { 'C' })),
            _ => {}
        }
        for a in f.arcs_of(x) {
            if a != from {
                let t = f.twin(a);
                let c = f.node_of(t);
                stack.push((c, t));
            }
        }
    }
    out
}

/// Tree with a single constrained P-node (a fixed C-node when every edge is fixed).
pub fn cc_from_constraint(c: &ColorConstraint) -> Result<CCPCTree> {
    let elems = c.elements();
    if elems.is_empty() {
        return Err(invalid("empty constraint"));
    }
    if elems.iter().collect::<HashSet<_>>().len() != elems.len() {
        return Err(invalid("duplicate element"));
    }
    if elems.len() == 2 && !satisfies_constraint(&CyclicOrder::from_vec_unchecked(elems.clone()), c) {
        return Ok(CCPCTree::null());
    }
    let st: Vec<Status> = elems.iter().map(|&e| c.status(e)).collect();
    let mut f = Forest::new();
    let (root, _) = f.star(&elems, &st);
    if elems.len() >= 3 && c.restricted.is_empty() && c.unrestricted.is_empty() {
        let arcs = f.fixed_list(root);
        f.make_c(root, &arcs, true);
    }
    Ok(CCPCTree(Tree { f, root }))
}

/// Restricts the tree to the orders in which `a` is consecutive.
pub fn cc_update(t: CCPCTree, a: &[Elem]) -> CCPCTree {
    CCPCTree(t.0.update(a))
}

/// Moves the edges of a P-node leading towards the leaves `s` to a new
/// P-node. Returns the tree, the old node and the new node.
pub fn cc_split_node(t: CCPCTree, node: NodeRef, s: &[Elem]) -> Result<(CCPCTree, NodeRef, NodeRef)> {
    let mut tr = t.0;
    if tr.is_null() {
        return Err(invalid("null tree"));
    }
    let x = tr.f.find(node.0);
    if tr.f.kind(x) != Kind::P {
        return Err(invalid("not a P-node"));
    }
    let want: HashSet<Elem> = s.iter().copied().collect();
    let mut moved = Vec::new();
    for a in tr.f.arcs_of(x) {
        let behind = crate::pctree::behind(&mut tr.f, a);
        if behind.iter().any(|e| want.contains(e)) {
            moved.push(a);
        }
    }
    if moved.is_empty() || moved.len() == tr.f.deg(x) as usize {
        return Err(invalid("S must be a nonempty proper subset of the incident edges"));
    }
    let fixed = tr.f.fixed_list(x);
    let mset: HashSet<_> = moved.iter().copied().collect();
    let starts =
        (0..fixed.len()).filter(|&i| mset.contains(&fixed[i]) && !mset.contains(&fixed[(i + fixed.len() - 1) % fixed.len()])).count();
    if starts > 1 {
        return Err(invalid("fixed edges of S are not consecutive"));
    }
    match tr.f.split_p(x, &moved) {
        Some((y, _, _)) => {
            if tr.f.nodes[tr.root as usize].parent_arc != NIL {
                tr.root = y;
            }
            Ok((CCPCTree(tr), NodeRef(x), NodeRef(y)))
        }
        None => Err(Error::ImpossibleRestriction),
    }
}

pub fn cc_split(t: CCPCTree, a: &[Elem], ell: Elem) -> Result<(CCPCTree, CCPCTree, SplitInfo)> {
    let (k, o, i) = t.0.split(a, ell)?;
    Ok((CCPCTree(k), CCPCTree(o), i))
}

pub fn cc_merge(t1: CCPCTree, t2: CCPCTree, ell: Elem) -> Result<CCPCTree> {
    Ok(CCPCTree(t1.0.merge(t2.0, ell)?))
}

/// Reversed order of the fixed leaves around the single inner node of `s`,
/// and for each restricted leaf the positions in that order it may precede.
fn reversed_fixed_order(s: &mut Tree) -> Result<(Vec<Elem>, Vec<(Elem, Vec<u32>)>)> {
    let leaves = s.f.leaves(s.root);
    if leaves.len() <= 2 {
        return Ok((Vec::new(), Vec::new()));
    }
    let la = s.f.nodes[leaves[0] as usize].head;
    let t = s.f.twin(la);
    let x = s.f.node_of(t);
    if s.f.deg(x) as usize != leaves.len() {
        return Err(invalid("second tree must have a single inner node"));
    }
    let mut arcs = match s.f.kind(x) {
        Kind::P => s.f.fixed_list(x),
        Kind::C if s.f.nodes[x as usize].fixed => s.f.arcs_of(x),
        _ => Vec::new(),
    };
    arcs.reverse();
    let mut pinned = Vec::new();
    if s.f.kind(x) == Kind::P && !arcs.is_empty() {
        for a in s.f.arcs_of(x) {
            if let Status::Restricted(c) = s.f.status(a) {
                let ok: Vec<u32> = (0..arcs.len() as u32).filter(|&j| s.f.status(arcs[j as usize]).color() == Some(c)).collect();
                let l = s.f.node_of(s.f.twin(a));
                pinned.push((s.f.label(l), ok));
            }
        }
    }
    let out = arcs
        .into_iter()
        .map(|a| {
            let t = s.f.twin(a);
            let l = s.f.node_of(t);
            s.f.label(l)
        })
        .collect();
    Ok((out, pinned))
}

fn admits_with(tf: &CCPCTree, sf: &CCPCTree, forced: &[(NodeId, Orient)]) -> Result<bool> {
    let mut t = tf.0.clone();
    let mut s = sf.0.clone();
    if t.is_null() || s.is_null() {
        return Ok(false);
    }
    if t.labels() != s.labels() {
        return Err(invalid("leaf sets differ"));
    }
    let (sigma, pinned) = reversed_fixed_order(&mut s)?;
    let map = t.leaf_map();
    let sigma: Vec<NodeId> = sigma.iter().map(|e| map[e]).collect();
    let gaps: FxHashMap<NodeId, Vec<u32>> = pinned.into_iter().map(|(e, g)| (map[&e], g)).collect();
    let r = match sigma.first() {
        Some(&r) => r,
        None => *map.values().min().unwrap(),
    };
    Ok(t.f.admits_placed(r, &sigma, &gaps, forced))
}

/// Whether some order of `tf` is the reversal of some order of `sf`, where
/// `sf` has a single inner node.
pub fn cc_restricted_intersect_nonempty(tf: &CCPCTree, sf: &CCPCTree) -> Result<bool> {
    admits_with(tf, sf, &[])
}

/// Which orientations of the C-node `half` of `tf` survive the intersection.
pub fn cc_probe_flip(tf: &CCPCTree, sf: &CCPCTree, half: NodeRef) -> Result<FlipVerdict> {
    if tf.is_null() {
        return Ok(FlipVerdict::Empty);
    }
    let mut f = tf.0.f.clone();
    let x = f.find(half.0);
    if f.kind(x) != Kind::C {
        return Err(invalid("probed node is not a C-node"));
    }
    let fixed = f.nodes[x as usize].fixed;
    let asis = admits_with(tf, sf, &[(x, Orient::AsIs)])?;
    let rev = !fixed && admits_with(tf, sf, &[(x, Orient::Reversed)])?;
    Ok(match (asis, rev) {
        (false, false) => FlipVerdict::Empty,
        (true, true) => FlipVerdict::Free,
        (true, false) => FlipVerdict::Fixed(Orientation::AsIs),
        (false, true) => FlipVerdict::Fixed(Orientation::Reversed),
    })
}

/// Makes an ordinary C-node fixed in the given orientation.
pub fn cc_fix_cnode(t: CCPCTree, node: NodeRef, o: Orientation) -> Result<CCPCTree> {
    let mut tr = t.0;
    if tr.is_null() {
        return Err(invalid("null tree"));
    }
    let x = tr.f.find(node.0);
    if tr.f.kind(x) != Kind::C || tr.f.nodes[x as usize].fixed {
        return Err(invalid("not an ordinary C-node"));
    }
    if o == Orientation::Reversed {
        tr.f.flip(x);
    }
    tr.f.nodes[x as usize].fixed = true;
    Ok(CCPCTree(tr))
}

/// Drops every color constraint and every C-node fixing.
pub fn cc_project(t: CCPCTree) -> PCTree {
    let mut tr = t.0;
    for (x, _) in inner_nodes(&mut tr.f, tr.root) {
        tr.f.erase_constraint(x);
    }
    PCTree(tr)
}

pub fn cc_enumerate(t: &CCPCTree) -> Result<BTreeSet<CyclicOrder>> {
    cc_enumerate_bounded(t, CC_ENUM_BOUND)
}

pub fn cc_enumerate_bounded(t: &CCPCTree, bound: usize) -> Result<BTreeSet<CyclicOrder>> {
    t.0.clone().enumerate(bound)
}
