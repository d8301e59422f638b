//! PC-trees: a compact representation of sets of cyclic leaf orders.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rustc_hash::FxHashMap;

use crate::cyclic::{CyclicOrder, Elem};
use crate::error::{invalid, Error, Result};
use crate::tree::{ArcId, EtaRaw, Forest, Kind, NodeId, Site, Status, NIL};

/// Default leaf bound of [`pc_enumerate`].
pub const PC_ENUM_BOUND: usize = 10;

/// Opaque handle of an inner node inside one tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef(pub(crate) u32);

/// How the full part of a split was attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitInfo {
    SingleEdge,
    /// A C-node was cut into halves; `keep` is `None` when its half in the
    /// kept tree had degree two and was smoothed away.
    CNode {
        keep: Option<NodeRef>,
        off: NodeRef,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EtaClass {
    SingleEdge,
    AroundCNode { node: NodeRef, arc: usize },
    NotConsecutive,
}

/// Maximal edges whose far side holds only leaves of `A`, each given by the
/// leaves on that side, plus the consecutivity class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaResult {
    pub edges: Vec<BTreeSet<Elem>>,
    pub class: EtaClass,
}

/// Tree storage shared by [`PCTree`] and [`crate::cctree::CCPCTree`].
#[derive(Clone, Debug)]
pub(crate) struct Tree {
    pub f: Forest,
    pub root: NodeId,
}

impl Tree {
    pub fn null() -> Self {
        Tree { f: Forest::new(), root: NIL }
    }

    pub fn is_null(&self) -> bool {
        self.root == NIL
    }

    pub fn leaf_map(&mut self) -> FxHashMap<Elem, NodeId> {
        if self.is_null() {
            return FxHashMap::default();
        }
        let root = self.root;
        self.f.leaves(root).into_iter().map(|l| (self.f.label(l), l)).collect()
    }

    pub fn labels(&mut self) -> BTreeSet<Elem> {
        self.leaf_map().into_keys().collect()
    }

    fn resolve(&mut self, a: &[Elem]) -> Vec<NodeId> {
        let map = self.leaf_map();
        let mut seen = HashSet::new();
        a.iter().filter(|e| seen.insert(**e)).filter_map(|e| map.get(e).copied()).collect()
    }

    pub fn update(mut self, a: &[Elem]) -> Self {
        if self.is_null() {
            return self;
        }
        let n = self.leaf_map().len();
        let leaves = self.resolve(a);
        if leaves.is_empty() || leaves.len() >= n {
            return self;
        }
        let mut root = self.root;
        match self.f.update(&mut root, &leaves) {
            Some(_) => {
                self.root = root;
                self
            }
            None => Tree::null(),
        }
    }

    pub fn eta(&mut self, a: &[Elem]) -> Result<EtaResult> {
        let n = self.leaf_map().len();
        let leaves = self.resolve(a);
        if self.is_null() || leaves.is_empty() || leaves.len() >= n || leaves.len() != a.iter().collect::<HashSet<_>>().len() {
            return Err(invalid("A must be a nonempty proper subset of the leaves"));
        }
        let raw = self.f.eta(&leaves);
        let side = |f: &mut Forest, arc: ArcId| -> BTreeSet<Elem> { behind(f, arc) };
        Ok(match raw {
            EtaRaw::Edge(arc) => EtaResult { edges: vec![side(&mut self.f, arc)], class: EtaClass::SingleEdge },
            EtaRaw::Block(x, arcs) => EtaResult {
                edges: arcs.iter().map(|&a| side(&mut self.f, a)).collect(),
                class: EtaClass::AroundCNode { node: NodeRef(x), arc: arcs.len() },
            },
            EtaRaw::NotConsecutive => {
                let edges = self.maximal_edges(&leaves);
                EtaResult { edges, class: EtaClass::NotConsecutive }
            }
        })
    }

    /// Leaf sets behind every maximal full edge.
    fn maximal_edges(&mut self, leaves: &[NodeId]) -> Vec<BTreeSet<Elem>> {
        let inside: HashSet<Elem> = leaves.iter().map(|&l| self.f.label(l)).collect();
        let mut arcs = Vec::new();
        let mut stack = vec![(self.root, NIL)];
        while let Some((x, from)) = stack.pop() {
            for a in self.f.arcs_of(x) {
                arcs.push(a);
                if a != from {
                    let t = self.f.twin(a);
                    let c = self.f.node_of(t);
                    stack.push((c, t));
                }
            }
        }
        let mut full: FxHashMap<ArcId, bool> = FxHashMap::default();
        let mut sides: FxHashMap<ArcId, BTreeSet<Elem>> = FxHashMap::default();
        for &a in &arcs {
            let s = behind(&mut self.f, a);
            full.insert(a, s.iter().all(|e| inside.contains(e)));
            sides.insert(a, s);
        }
        let mut out = Vec::new();
        for &a in &arcs {
            if !full[&a] {
                continue;
            }
            let x = self.f.node_of(a);
            let non_full = self.f.arcs_of(x).into_iter().filter(|b| !full[b]).count();
            if non_full >= 2 || self.f.kind(x) == Kind::Leaf {
                out.push(sides[&a].clone());
            }
        }
        out.sort();
        out
    }

    /// Splits off the leaves `a`, which must be consecutive.
    pub fn split(mut self, a: &[Elem], ell: Elem) -> Result<(Tree, Tree, SplitInfo)> {
        if self.is_null() {
            return Err(invalid("null tree"));
        }
        let map = self.leaf_map();
        if map.contains_key(&ell) {
            return Err(invalid("split leaf is not fresh"));
        }
        let leaves = self.resolve(a);
        if leaves.is_empty() || leaves.len() >= map.len() {
            return Err(invalid("A must be a nonempty proper subset of the leaves"));
        }
        let site = match self.f.eta(&leaves) {
            EtaRaw::Edge(arc) => Site::Edge(arc),
            EtaRaw::Block(x, arcs) => Site::Block { node: x, first: arcs[0], last: *arcs.last().unwrap() },
            EtaRaw::NotConsecutive => return Err(Error::NotConsecutive),
        };
        let out = self.f.split(self.root, site, ell).ok_or(Error::ImpossibleRestriction)?;
        let info = match out.cnode {
            None => SplitInfo::SingleEdge,
            Some((k, o)) => SplitInfo::CNode { keep: (k != NIL).then_some(NodeRef(k)), off: NodeRef(o) },
        };
        let keep = Tree { f: self.f.clone(), root: out.keep_root };
        let off = Tree { f: self.f, root: out.off_root };
        Ok((keep, off, info))
    }

    pub fn merge(mut self, mut other: Tree, ell: Elem) -> Result<Tree> {
        if self.is_null() || other.is_null() {
            return Ok(Tree::null());
        }
        let m1 = self.leaf_map();
        let m2 = other.leaf_map();
        let common: Vec<&Elem> = m1.keys().filter(|k| m2.contains_key(k)).collect();
        if common != [&ell] {
            return Err(Error::InvalidMerge);
        }
        let r2 = self.f.import(&mut other.f, other.root);
        let l2 = self.f.leaves(r2).into_iter().find(|&l| self.f.label(l) == ell).unwrap();
        let l1 = m1[&ell];
        match self.f.merge(self.root, l1, r2, l2) {
            Some(r) => {
                self.root = r;
                Ok(self)
            }
            None => Ok(Tree::null()),
        }
    }

    pub fn enumerate(&mut self, bound: usize) -> Result<BTreeSet<CyclicOrder>> {
        if self.is_null() {
            return Ok(BTreeSet::new());
        }
        let root = self.root;
        let leaves = self.f.leaves(root);
        if leaves.len() > bound {
            return Err(Error::TooLarge(leaves.len() as u64));
        }
        let first = *leaves.iter().min_by_key(|&&l| self.f.label(l)).unwrap();
        Ok(self.f.enumerate(first).into_iter().map(CyclicOrder::from_vec_unchecked).collect())
    }

    pub fn to_dot(&mut self) -> String {
        let mut s = String::from("graph T {\n");
        if self.is_null() {
            s.push_str("  null [shape=plaintext];\n}\n");
            return s;
        }
        let mut stack = vec![(self.root, NIL)];
        while let Some((x, from)) = stack.pop() {
            let x = self.f.find(x);
            let (shape, text) = match self.f.kind(x) {
                Kind::Leaf => ("plaintext", format!("{}", self.f.label(x))),
                Kind::P => ("circle", "P".to_string()),
                Kind::C => {
                    let ring: Vec<String> = self.f.arcs_of(x).into_iter().map(|a| self.f.twin(a).to_string()).collect();
                    let tag = if self.f.nodes[x as usize].fixed { "C fixed" } else { "C" };
                    ("box", format!("{tag} [{}]", ring.join(" ")))
                }
                Kind::Dead => continue,
            };
            let _ = writeln!(s, "  n{x} [shape={shape}, label=\"{text}\"];");
            for a in self.f.arcs_of(x) {
                if a == from {
                    continue;
                }
                let t = self.f.twin(a);
                let c = self.f.node_of(t);
                let lab = match self.f.status(a) {
                    Status::Unrestricted => String::new(),
                    Status::Restricted(c) => format!(" [taillabel=\"r{c}\"]"),
                    Status::Fixed(c) => format!(" [taillabel=\"f{c}\", style=bold]"),
                };
                let _ = writeln!(s, "  n{x} -- n{c}{lab};");
                stack.push((c, t));
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Labels of the leaves reached by leaving a node through `a`.
pub(crate) fn behind(f: &mut Forest, a: ArcId) -> BTreeSet<Elem> {
    let mut out = BTreeSet::new();
    let mut stack = vec![f.twin(a)];
    while let Some(e) = stack.pop() {
        let x = f.node_of(e);
        if f.kind(x) == Kind::Leaf {
            out.insert(f.label(x));
            continue;
        }
        for b in f.arcs_from(e).into_iter().skip(1) {
            stack.push(f.twin(b));
        }
    }
    out
}

impl Forest {
    /// Copies a tree of another arena into this one; returns the new root.
    pub(crate) fn import(&mut self, src: &mut Forest, root: NodeId) -> NodeId {
        let mut pending: FxHashMap<ArcId, ArcId> = FxHashMap::default();
        let mut stack = vec![(src.find(root), NIL)];
        let mut new_root = NIL;
        while let Some((x, entry)) = stack.pop() {
            let kind = src.kind(x);
            let y = self.new_node(kind);
            self.nodes[y as usize].fixed = src.nodes[x as usize].fixed;
            self.nodes[y as usize].label = src.nodes[x as usize].label;
            if new_root == NIL {
                new_root = y;
            }
            let arcs = if entry == NIL { src.arcs_of(x) } else { src.arcs_from(entry) };
            let mut mapped = Vec::with_capacity(arcs.len());
            for &a in &arcs {
                let b = if a == entry {
                    pending[&a]
                } else {
                    let (b, bt) = self.new_arc_pair();
                    let t = src.twin(a);
                    pending.insert(t, bt);
                    let c = src.node_of(t);
                    stack.push((c, t));
                    b
                };
                mapped.push((a, b));
            }
            match kind {
                Kind::C => {
                    let ring: Vec<ArcId> = mapped.iter().map(|p| p.1).collect();
                    for &b in &ring {
                        self.arcs[b as usize].owner = y;
                    }
                    for i in 0..ring.len() {
                        let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                        self.arcs[a as usize].link[1] = b;
                        self.arcs[b as usize].link[0] = a;
                    }
                    self.nodes[y as usize].head = ring[0];
                    self.nodes[y as usize].deg = ring.len() as u32;
                }
                _ => {
                    for &(a, b) in &mapped {
                        self.p_add(y, b, src.status(a));
                    }
                    if kind == Kind::P {
                        for fa in src.fixed_list(x) {
                            let b = mapped.iter().find(|p| p.0 == fa).unwrap().1;
                            self.f_push(y, b);
                        }
                    }
                }
            }
        }
        // parent arcs of the copy follow the traversal from the copied root
        self.reroot_from(new_root);
        new_root
    }

    /// Sets parent arcs so that `r` is the root.
    pub(crate) fn reroot_from(&mut self, r: NodeId) {
        self.nodes[r as usize].parent_arc = NIL;
        let mut stack = vec![(r, NIL)];
        while let Some((x, from)) = stack.pop() {
            for a in self.arcs_of(x) {
                if a == from {
                    continue;
                }
                let t = self.twin(a);
                let c = self.node_of(t);
                self.nodes[c as usize].parent_arc = t;
                stack.push((c, t));
            }
        }
    }
}

/// An ordinary PC-tree over `u32` leaf labels.
#[derive(Clone, Debug)]
pub struct PCTree(pub(crate) Tree);

impl PCTree {
    pub fn is_null(&self) -> bool {
        self.0.is_null()
    }

    pub fn leaves(&self) -> BTreeSet<Elem> {
        self.0.clone().labels()
    }

    pub fn to_dot(&self) -> String {
        self.0.clone().to_dot()
    }

    pub fn null() -> Self {
        PCTree(Tree::null())
    }
}

/// Tree whose only inner node is a P-node adjacent to every leaf.
pub fn pc_new(leaves: &[Elem]) -> Result<PCTree> {
    if leaves.is_empty() {
        return Err(invalid("empty leaf set"));
    }
    if leaves.iter().collect::<HashSet<_>>().len() != leaves.len() {
        return Err(invalid("duplicate leaf"));
    }
    let mut f = Forest::new();
    let st = vec![Status::Unrestricted; leaves.len()];
    let (root, _) = f.star(leaves, &st);
    Ok(PCTree(Tree { f, root }))
}

/// Tree with one C-node whose leaves appear in the given counter-clockwise order.
pub fn pc_cnode(order: &[Elem]) -> Result<PCTree> {
    let mut t = pc_new(order)?;
    if order.len() >= 3 {
        let f = &mut t.0.f;
        let x = t.0.root;
        let arcs = f.arcs_of(x);
        f.make_c(x, &arcs, false);
        t.0.f.reroot_from(x);
    }
    Ok(t)
}

pub fn pc_eta(t: &PCTree, a: &[Elem]) -> Result<EtaResult> {
    t.0.clone().eta(a)
}

/// Restricts the tree to the orders in which `a` is consecutive.
pub fn pc_update(t: PCTree, a: &[Elem]) -> PCTree {
    PCTree(t.0.update(a))
}

pub fn pc_split(t: PCTree, a: &[Elem], ell: Elem) -> Result<(PCTree, PCTree, SplitInfo)> {
    let (k, o, i) = t.0.split(a, ell)?;
    Ok((PCTree(k), PCTree(o), i))
}

pub fn pc_merge(t1: PCTree, t2: PCTree, ell: Elem) -> Result<PCTree> {
    Ok(PCTree(t1.0.merge(t2.0, ell)?))
}

pub fn pc_enumerate(t: &PCTree) -> Result<BTreeSet<CyclicOrder>> {
    pc_enumerate_bounded(t, PC_ENUM_BOUND)
}

pub fn pc_enumerate_bounded(t: &PCTree, bound: usize) -> Result<BTreeSet<CyclicOrder>> {
    t.0.clone().enumerate(bound)
}

/// Leaf sets that must stay consecutive for the orders of a tree: one per
/// edge and one per pair of neighbouring C-node arcs.
pub(crate) fn consecutivity_sets(t: &mut Tree) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    if t.is_null() {
        return out;
    }
    let mut stack = vec![(t.root, NIL)];
    while let Some((x, from)) = stack.pop() {
        let x = t.f.find(x);
        let arcs = t.f.arcs_of(x);
        if t.f.kind(x) == Kind::C {
            for i in 0..arcs.len() {
                let mut s: Vec<Elem> = behind(&mut t.f, arcs[i]).into_iter().collect();
                s.extend(behind(&mut t.f, arcs[(i + 1) % arcs.len()]));
                out.push(s);
            }
        }
        for a in arcs {
            if a == from {
                continue;
            }
            out.push(behind(&mut t.f, a).into_iter().collect());
            let tw = t.f.twin(a);
            let c = t.f.node_of(tw);
            stack.push((c, tw));
        }
    }
    out
}

/// Intersection of two trees over the same leaves.
pub fn pc_intersect(t1: PCTree, t2: PCTree) -> Result<PCTree> {
    let mut a = t1.0;
    let mut b = t2.0;
    if a.is_null() || b.is_null() {
        return Ok(PCTree::null());
    }
    if a.labels() != b.labels() {
        return Err(invalid("leaf sets differ"));
    }
    for s in consecutivity_sets(&mut a) {
        b = b.update(&s);
        if b.is_null() {
            break;
        }
    }
    Ok(PCTree(b))
}
