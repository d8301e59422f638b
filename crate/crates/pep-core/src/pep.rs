//! The planarity tests: plain vertex addition, the biconnected partially
//! embedded test and the general test that merges components at cut vertices.

use petgraph::unionfind::UnionFind;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::cctree::{satisfies_constraint, CCPCTree, ColorConstraint};
use crate::cyclic::{CyclicOrder, Elem};
use crate::error::{invalid, Result};
use crate::graph::{connected_components, dfs_postorder, st_ordering, EdgeId, Graph, Vertex};
use crate::pctree::Tree;
use crate::prep::{prepare, Infeasible, PEPInstance};
use crate::tree::{Forest, Kind, NodeId, Orient, Status, NIL};

/// Label of the leaf created by a split.
const ELL: u32 = u32::MAX - 1;

/// Where a run gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "stage", content = "at")]
pub enum RejectStage {
    /// Preprocessing found a bridge without a common face.
    Bridge(u32),
    /// A restricted edge has no angle of its color.
    Angle(Vertex),
    /// A vertex with two edges cannot meet its own constraint.
    Constraint(Vertex),
    /// The fixed edges of two blocks at this vertex alternate.
    BlockOrder(Vertex),
    UpdateComponent(Vertex),
    UpdateVertex(Vertex),
    Split(Vertex),
    Intersect(Vertex),
    Probe(Vertex),
    Remove(Vertex),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub updates: u64,
    pub splits: u64,
    pub terminal_path_edges: u64,
}

impl Stats {
    fn of(f: &Forest) -> Stats {
        Stats { updates: f.updates, splits: f.splits, terminal_path_edges: f.tp_edges }
    }

    fn add(&mut self, o: Stats) {
        self.updates += o.updates;
        self.splits += o.splits;
        self.terminal_path_edges += o.terminal_path_edges;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PepResult {
    pub answer: bool,
    pub reject: Option<RejectStage>,
    pub stats: Stats,
}

impl PepResult {
    fn yes(stats: Stats) -> Self {
        PepResult { answer: true, reject: None, stats }
    }

    fn no(stage: RejectStage, stats: Stats) -> Self {
        PepResult { answer: false, reject: Some(stage), stats }
    }
}

/// One side of an insertion step: a tree and its leaves for the edges `F`.
struct Half {
    root: NodeId,
    full: Vec<NodeId>,
    all: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fail {
    UpdateT,
    UpdateS,
    Split,
    Intersect,
    Probe,
    Remove,
}

impl Fail {
    fn at(self, v: Vertex) -> RejectStage {
        match self {
            Fail::UpdateT => RejectStage::UpdateComponent(v),
            Fail::UpdateS => RejectStage::UpdateVertex(v),
            Fail::Split => RejectStage::Split(v),
            Fail::Intersect => RejectStage::Intersect(v),
            Fail::Probe => RejectStage::Probe(v),
            Fail::Remove => RejectStage::Remove(v),
        }
    }
}

/// Leaves around the single inner node next to `leaf`, reversed.
fn reversed_fixed_leaves(f: &mut Forest, leaf: NodeId) -> Vec<NodeId> {
    let la = f.nodes[leaf as usize].head;
    if la == NIL {
        return Vec::new();
    }
    let t = f.twin(la);
    let x = f.node_of(t);
    let arcs = match f.kind(x) {
        Kind::P => f.fixed_list(x),
        Kind::C if f.nodes[x as usize].fixed => f.arcs_of(x),
        _ => Vec::new(),
    };
    let mut out: Vec<NodeId> = arcs
        .into_iter()
        .map(|a| {
            let t = f.twin(a);
            f.node_of(t)
        })
        .collect();
    out.reverse();
    out
}

/// Combines the tree `t` of a component with the tree `s` holding the vertex
/// being inserted, where `t.full` and `s.full` are the two ends of the same
/// edges in the same order. Returns the combined tree, `NIL` when nothing is
/// left.
fn step(f: &mut Forest, t: Half, s: Half) -> std::result::Result<NodeId, Fail> {
    let (mut troot, mut sroot) = (t.root, s.root);
    let tsite = if t.all { None } else { Some(f.update(&mut troot, &t.full).ok_or(Fail::UpdateT)?) };
    let ssite = if s.all { None } else { Some(f.update(&mut sroot, &s.full).ok_or(Fail::UpdateS)?) };
    let tout = match tsite {
        Some(site) => Some(f.split(troot, site, ELL).ok_or(Fail::Split)?),
        None => None,
    };
    let sout = match ssite {
        Some(site) => Some(f.split(sroot, site, ELL).ok_or(Fail::Split)?),
        None => None,
    };

    let by_label: FxHashMap<u32, NodeId> = t.full.iter().map(|&l| (f.label(l), l)).collect();
    let s_any = sout.map_or(s.full[0], |o| o.off_leaf);
    let sigma: Vec<NodeId> = reversed_fixed_leaves(f, s_any)
        .into_iter()
        .filter_map(|l| match f.label(l) {
            ELL => tout.map(|o| o.off_leaf),
            e => Some(by_label[&e]),
        })
        .collect();
    let r = sigma.first().copied().unwrap_or_else(|| tout.map_or(t.full[0], |o| o.off_leaf));

    let probe = match tout.and_then(|o| o.cnode) {
        Some((keep, off)) if keep != NIL => {
            let k = f.find(keep);
            (!f.nodes[k as usize].fixed).then_some((k, off))
        }
        _ => None,
    };
    match probe {
        Some((keep, off)) => {
            let asis = f.admits(r, &sigma, &[(off, Orient::AsIs)]);
            let rev = f.admits(r, &sigma, &[(off, Orient::Reversed)]);
            match (asis, rev) {
                (false, false) => return Err(Fail::Probe),
                (true, false) => f.nodes[keep as usize].fixed = true,
                (false, true) => {
                    f.flip(keep);
                    f.nodes[keep as usize].fixed = true;
                }
                (true, true) => {}
            }
        }
        None => {
            if !f.admits(r, &sigma, &[]) {
                return Err(Fail::Intersect);
            }
        }
    }

    f.discard(tout.map_or(troot, |o| o.off_root));
    f.discard(sout.map_or(sroot, |o| o.off_root));
    match (tout, sout) {
        (None, None) => Ok(NIL),
        (None, Some(so)) => f.remove_leaf(so.keep_root, so.keep_leaf).ok_or(Fail::Remove),
        (Some(to), None) => f.remove_leaf(to.keep_root, to.keep_leaf).ok_or(Fail::Remove),
        (Some(to), Some(so)) => f.merge(so.keep_root, so.keep_leaf, to.keep_root, to.keep_leaf).ok_or(Fail::Remove),
    }
}

/// Star for the constraint of one vertex, rooted at the leaf of `root_edge`
/// when given. Returns the root and the leaf of every edge.
fn vertex_star(f: &mut Forest, c: &ColorConstraint, root_edge: Option<Elem>) -> (NodeId, Vec<(Elem, NodeId)>) {
    let labels = c.elements();
    let status: Vec<Status> = labels.iter().map(|&e| c.status(e)).collect();
    let ri = root_edge.and_then(|e| labels.iter().position(|&x| x == e)).unwrap_or(0);
    let (root, leaves) = f.star_rooted(&labels, &status, ri);
    if labels.len() >= 3 && c.restricted.is_empty() && c.unrestricted.is_empty() {
        let la = f.nodes[leaves[0] as usize].head;
        let t = f.twin(la);
        let x = f.node_of(t);
        let ring = f.fixed_list(x);
        f.make_c(x, &ring, true);
    }
    (root, labels.into_iter().zip(leaves).collect())
}

/// A vertex whose constraint cannot hold even on its own.
fn hopeless(c: &ColorConstraint) -> bool {
    let e = c.elements();
    e.len() == 2 && !satisfies_constraint(&CyclicOrder::from_vec_unchecked(e), c)
}

/// A block incident to the vertex being inserted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidentBlock {
    pub edges: Vec<Elem>,
    /// Whether the edges are all remaining half-edges of the component.
    pub finished: bool,
}

/// Order in which to attach the incident components so that every block
/// nested inside another comes first and the part that stays open comes last.
/// Returns indices into `incident`, or `None` when the fixed edges of two
/// blocks alternate.
pub fn block_order(c: &ColorConstraint, incident: &[IncidentBlock]) -> Option<Vec<usize>> {
    let k = incident.len();
    let open = k;
    let mut block: FxHashMap<Elem, usize> = FxHashMap::default();
    for (i, b) in incident.iter().enumerate() {
        if b.finished {
            for &e in &b.edges {
                block.insert(e, i);
            }
        }
    }
    let of = |e: Elem| block.get(&e).copied().unwrap_or(open);
    let rho = c.fixed();
    let mut left = vec![0usize; k + 1];
    for &e in rho {
        left[of(e)] += 1;
    }
    let mut out: Vec<usize> = (0..k).filter(|&i| incident[i].finished && left[i] == 0).collect();
    let n = rho.len();
    let mut stack = Vec::new();
    let start = if let Some(p) = rho.iter().position(|&e| of(e) == open) {
        stack.push(open);
        (p + 1) % n.max(1)
    } else if let Some(&r) = c.restricted.iter().find(|&&e| of(e) == open) {
        let want = c.color[&r];
        (0..n).find(|&i| c.color[&rho[(i + n - 1) % n]] == want).unwrap_or(0)
    } else {
        0
    };
    for i in 0..n {
        let b = of(rho[(start + i) % n]);
        match stack.last() {
            Some(&top) if top == b => {}
            _ if stack.contains(&b) => return None,
            _ => stack.push(b),
        }
        left[b] -= 1;
        if left[b] == 0 {
            stack.pop();
            if b != open {
                out.push(b);
            }
        }
    }
    out.extend((0..k).filter(|&i| !incident[i].finished));
    Some(out)
}

fn finish(f: &Forest, r: std::result::Result<(), RejectStage>) -> PepResult {
    match r {
        Ok(()) => PepResult::yes(Stats::of(f)),
        Err(s) => PepResult::no(s, Stats::of(f)),
    }
}

/// Tests a connected graph whose vertices carry color constraints over their
/// incident edge ids, inserting vertices in DFS postorder.
pub fn test_pep_general(g: &Graph, cons: &[ColorConstraint]) -> PepResult {
    let mut f = Forest::new();
    let r = general(&mut f, g, cons, usize::MAX).map(|_| ());
    finish(&f, r)
}

/// The tree of the component holding the `k`-th inserted vertex (counting
/// from 1 in DFS postorder) right after its insertion, or `None` when no
/// leaves remain. Fails with the stage that rejected an earlier step.
pub fn tree_after(g: &Graph, cons: &[ColorConstraint], k: usize) -> std::result::Result<Option<(Vertex, CCPCTree)>, RejectStage> {
    if k == 0 || k > g.n() as usize {
        return Ok(None);
    }
    let mut f = Forest::new();
    let root = general(&mut f, g, cons, k)?;
    let v = dfs_postorder(g).0[k - 1];
    if root == NIL {
        return Ok(None);
    }
    let mut t = Tree::null();
    t.root = t.f.import(&mut f, root);
    Ok(Some((v, CCPCTree(t))))
}

fn general(f: &mut Forest, g: &Graph, cons: &[ColorConstraint], stop: usize) -> std::result::Result<NodeId, RejectStage> {
    let n = g.n() as usize;
    let (order, parent, _) = dfs_postorder(g);
    let mut done = vec![false; n];
    let mut uf = UnionFind::<u32>::new(n);
    let mut top: Vec<Vertex> = (0..g.n()).collect();
    let mut comp_root = vec![NIL; n];
    let mut comp_leaves = vec![0usize; n];
    let mut tleaf = vec![NIL; g.m() as usize];
    let mut sleaf = vec![NIL; g.m() as usize];
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        let c = &cons[v as usize];
        let deg = g.degree(v);
        if hopeless(c) {
            return Err(RejectStage::Constraint(v));
        }
        let mut children: Vec<Vertex> = Vec::new();
        let mut groups: Vec<Vec<EdgeId>> = Vec::new();
        for &e in g.incident(v) {
            let w = g.other(e, v);
            if done[w as usize] {
                let ch = top[uf.find(w) as usize];
                if slot[ch as usize] == usize::MAX {
                    slot[ch as usize] = groups.len();
                    children.push(ch);
                    groups.push(Vec::new());
                }
                groups[slot[ch as usize]].push(e);
            }
        }
        let incident: Vec<IncidentBlock> = groups
            .iter()
            .zip(&children)
            .map(|(es, &ch)| IncidentBlock { edges: es.clone(), finished: es.len() == comp_leaves[ch as usize] })
            .collect();
        let seq = block_order(c, &incident).ok_or(RejectStage::BlockOrder(v))?;
        let pe = parent[v as usize].map(|p| g.find_edge(v, p).unwrap());
        let mut cur_root = NIL;
        if deg > 0 {
            let (root, leaves) = vertex_star(f, c, pe);
            cur_root = root;
            for (e, l) in leaves {
                sleaf[e as usize] = l;
            }
        }
        let mut cur = deg;
        for j in seq {
            let es = &groups[j];
            let ch = children[j] as usize;
            let th = Half { root: comp_root[ch], full: es.iter().map(|&e| tleaf[e as usize]).collect(), all: incident[j].finished };
            let sh = Half { root: cur_root, full: es.iter().map(|&e| sleaf[e as usize]).collect(), all: es.len() == cur };
            cur_root = step(f, th, sh).map_err(|x| x.at(v))?;
            cur = cur + comp_leaves[ch] - 2 * es.len();
        }
        for &e in g.incident(v) {
            tleaf[e as usize] = sleaf[e as usize];
        }
        done[v as usize] = true;
        for &ch in &children {
            slot[ch as usize] = usize::MAX;
            uf.union(v, ch);
        }
        top[uf.find(v) as usize] = v;
        comp_root[v as usize] = cur_root;
        comp_leaves[v as usize] = cur;
        if i + 1 == stop {
            return Ok(cur_root);
        }
    }
    Ok(NIL)
}

/// Tests a biconnected graph inserting vertices in st-order.
pub fn test_pep_biconnected(g: &Graph, cons: &[ColorConstraint]) -> Result<PepResult> {
    if g.m() == 0 {
        return Err(invalid("graph has no edges"));
    }
    let (s, t) = g.endpoints(0);
    let order = st_ordering(g, s, t)?;
    let mut f = Forest::new();
    let r = biconnected(&mut f, g, cons, &order);
    Ok(finish(&f, r))
}

fn biconnected(f: &mut Forest, g: &Graph, cons: &[ColorConstraint], order: &[Vertex]) -> std::result::Result<(), RejectStage> {
    let mut pos = vec![usize::MAX; g.n() as usize];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i;
    }
    let mut tleaf = vec![NIL; g.m() as usize];
    let mut troot = NIL;
    let mut tcount = 0;
    for (i, &v) in order.iter().enumerate() {
        let c = &cons[v as usize];
        if hopeless(c) {
            return Err(RejectStage::Constraint(v));
        }
        let (sroot, leaves) = vertex_star(f, c, None);
        let sl: FxHashMap<Elem, NodeId> = leaves.iter().copied().collect();
        let fe: Vec<EdgeId> = g.incident(v).iter().copied().filter(|&e| pos[g.other(e, v) as usize] < i).collect();
        if i == 0 {
            troot = sroot;
        } else {
            let th = Half { root: troot, full: fe.iter().map(|&e| tleaf[e as usize]).collect(), all: fe.len() == tcount };
            let sh = Half { root: sroot, full: fe.iter().map(|e| sl[e]).collect(), all: fe.len() == g.degree(v) };
            troot = step(f, th, sh).map_err(|x| x.at(v))?;
            tcount -= fe.len();
        }
        for (e, l) in leaves {
            if pos[g.other(e, v) as usize] > i {
                tleaf[e as usize] = l;
                tcount += 1;
            }
        }
    }
    Ok(())
}

/// Tests every connected component of a graph with free constraints.
pub fn test_planarity(g: &Graph) -> bool {
    test_planarity_detailed(g).answer
}

pub fn test_planarity_detailed(g: &Graph) -> PepResult {
    let free: Vec<ColorConstraint> = (0..g.n()).map(|v| ColorConstraint::free(g.incident(v))).collect();
    let mut f = Forest::new();
    let r = general(&mut f, g, &free, usize::MAX).map(|_| ());
    finish(&f, r)
}

/// Outcome for one connected component of `G`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentResult {
    pub vertices: usize,
    pub edges: usize,
    #[serde(flatten)]
    pub result: PepResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PepReport {
    pub answer: bool,
    pub reject: Option<RejectStage>,
    pub component_results: Vec<ComponentResult>,
    pub stats: Stats,
}

/// Preprocesses a valid instance and tests each component of `G`.
pub fn test_pep(inst: &PEPInstance) -> Result<PepReport> {
    let prep = match prepare(inst)? {
        Ok(p) => p,
        Err(x) => {
            let stage = match x {
                Infeasible::Bridge(b) => RejectStage::Bridge(b),
                Infeasible::Vertex(v) => RejectStage::Angle(v),
            };
            return Ok(PepReport { answer: false, reject: Some(stage), component_results: Vec::new(), stats: Stats::default() });
        }
    };
    let mut report = PepReport { answer: true, reject: None, component_results: Vec::new(), stats: Stats::default() };
    for sub in &prep.components {
        let mut r = test_pep_general(&sub.g, &sub.constraints);
        if let Some(
            RejectStage::Constraint(v)
            | RejectStage::BlockOrder(v)
            | RejectStage::UpdateComponent(v)
            | RejectStage::UpdateVertex(v)
            | RejectStage::Split(v)
            | RejectStage::Intersect(v)
            | RejectStage::Probe(v)
            | RejectStage::Remove(v),
        ) = r.reject.as_mut()
        {
            *v = sub.vertices[*v as usize];
        }
        report.stats.add(r.stats);
        if !r.answer && report.answer {
            report.answer = false;
            report.reject = r.reject;
        }
        report.component_results.push(ComponentResult { vertices: sub.vertices.len(), edges: sub.edges.len(), result: r });
    }
    Ok(report)
}

/// Splits `g` into connected components with local ids.
pub fn components_of(g: &Graph) -> Vec<(Graph, Vec<Vertex>)> {
    let cc = connected_components(g);
    let k = cc.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut verts = vec![Vec::new(); k];
    let mut local = vec![0u32; g.n() as usize];
    for v in 0..g.n() {
        local[v as usize] = verts[cc[v as usize] as usize].len() as u32;
        verts[cc[v as usize] as usize].push(v);
    }
    let mut edges = vec![Vec::new(); k];
    for &(a, b) in g.edges() {
        edges[cc[a as usize] as usize].push((local[a as usize], local[b as usize]));
    }
    verts.into_iter().zip(edges).map(|(vs, es)| (Graph::new(vs.len() as u32, es).expect("component of a simple graph"), vs)).collect()
}

/// Outcome of [`insert_step`].
#[derive(Clone, Debug)]
pub enum StepOutcome {
    Tree(CCPCTree),
    /// Both trees consisted of `F` only.
    Empty,
    Reject(&'static str),
}

/// One insertion step on stand-alone trees: `t` represents a component,
/// `s` holds the vertex being inserted with the leaves `f` on a single
/// P-node (or fixed C-node).
pub fn insert_step(t: &CCPCTree, s: &CCPCTree, f: &[Elem]) -> Result<StepOutcome> {
    if t.is_null() || s.is_null() {
        return Ok(StepOutcome::Reject("null tree"));
    }
    let (tl, sl) = (t.leaves(), s.leaves());
    if f.is_empty() || f.iter().any(|e| !tl.contains(e) || !sl.contains(e)) || tl.contains(&ELL) || sl.contains(&ELL) {
        return Err(invalid("F must be a nonempty set of common leaves"));
    }
    if tl.intersection(&sl).count() != f.len() {
        return Err(invalid("the trees share leaves outside F"));
    }
    let mut a: Tree = t.0.clone();
    let mut b: Tree = s.0.clone();
    let sroot = a.f.import(&mut b.f, b.root);
    let mut tmap: FxHashMap<Elem, NodeId> = FxHashMap::default();
    let mut smap: FxHashMap<Elem, NodeId> = FxHashMap::default();
    let troot = a.root;
    for l in a.f.leaves(troot) {
        tmap.insert(a.f.label(l), l);
    }
    for l in a.f.leaves(sroot) {
        smap.insert(a.f.label(l), l);
    }
    let th = Half { root: troot, full: f.iter().map(|e| tmap[e]).collect(), all: f.len() == tl.len() };
    let sh = Half { root: sroot, full: f.iter().map(|e| smap[e]).collect(), all: f.len() == sl.len() };
    Ok(match step(&mut a.f, th, sh) {
        Ok(NIL) => StepOutcome::Empty,
        Ok(root) => StepOutcome::Tree(CCPCTree(Tree { f: a.f, root })),
        Err(x) => StepOutcome::Reject(match x {
            Fail::UpdateT => "update of the component tree",
            Fail::UpdateS => "update of the vertex tree",
            Fail::Split => "split",
            Fail::Intersect => "intersection",
            Fail::Probe => "flip probe",
            Fail::Remove => "leaf removal",
        }),
    })
}
