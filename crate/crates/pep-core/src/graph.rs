//! Simple graphs, rotation systems, face tracing and vertex orderings.

use petgraph::unionfind::UnionFind;
use rustc_hash::FxHashSet;

use crate::cyclic::CyclicOrder;
use crate::error::{invalid, Result};

pub type Vertex = u32;
pub type EdgeId = u32;

/// Undirected simple graph. Edge ids are indices into `edges`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: u32,
    edges: Vec<(Vertex, Vertex)>,
    inc: Vec<Vec<EdgeId>>,
}

impl Graph {
    pub fn new(n: u32, edges: Vec<(Vertex, Vertex)>) -> Result<Graph> {
        let mut inc = vec![Vec::new(); n as usize];
        let mut seen = FxHashSet::default();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(invalid(format!("edge {i} has an endpoint outside 0..{n}")));
            }
            if u == v {
                return Err(invalid(format!("edge {i} is a self-loop")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(invalid(format!("edge {i} is a parallel edge")));
            }
            inc[u as usize].push(i as EdgeId);
            inc[v as usize].push(i as EdgeId);
        }
        Ok(Graph { n, edges, inc })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.edges.len() as u32
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e as usize]
    }

    pub fn other(&self, e: EdgeId, v: Vertex) -> Vertex {
        let (a, b) = self.edges[e as usize];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Incident edges of `v` in insertion order.
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.inc[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.inc[v as usize].len()
    }

    /// Dart index of edge `e` seen from endpoint `v`.
    pub fn dart(&self, e: EdgeId, v: Vertex) -> usize {
        let (a, _) = self.edges[e as usize];
        2 * e as usize + usize::from(a != v)
    }

    pub fn find_edge(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        let (x, y) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.inc[x as usize].iter().copied().find(|&e| self.other(e, x) == y)
    }

    /// Subgraph on the same vertex set keeping the listed edges, renumbered in
    /// list order.
    pub fn edge_subgraph(&self, keep: &[EdgeId]) -> Graph {
        let edges = keep.iter().map(|&e| self.edges[e as usize]).collect();
        Graph::new(self.n, edges).expect("subgraph of a simple graph is simple")
    }
}

/// Counter-clockwise rotation of incident edges at every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationSystem {
    rot: Vec<Vec<EdgeId>>,
    pos: Vec<[u32; 2]>,
}

impl RotationSystem {
    pub fn new(g: &Graph, rot: Vec<Vec<EdgeId>>) -> Result<RotationSystem> {
        if rot.len() != g.n() as usize {
            return Err(invalid("rotation system must list every vertex"));
        }
        let mut pos = vec![[u32::MAX; 2]; g.m() as usize];
        for (v, r) in rot.iter().enumerate() {
            if r.len() != g.degree(v as Vertex) {
                return Err(invalid(format!("rotation at {v} is not a permutation of its edges")));
            }
            for (i, &e) in r.iter().enumerate() {
                if e >= g.m() {
                    return Err(invalid(format!("rotation at {v} names unknown edge {e}")));
                }
                let (a, b) = g.endpoints(e);
                let side = if a == v as Vertex {
                    0
                } else if b == v as Vertex {
                    1
                } else {
                    return Err(invalid(format!("edge {e} is not incident to {v}")));
                };
                if pos[e as usize][side] != u32::MAX {
                    return Err(invalid(format!("rotation at {v} repeats edge {e}")));
                }
                pos[e as usize][side] = i as u32;
            }
        }
        Ok(RotationSystem { rot, pos })
    }

    /// Rotation taking incident edges in incidence order.
    pub fn identity(g: &Graph) -> RotationSystem {
        let rot = (0..g.n()).map(|v| g.incident(v).to_vec()).collect();
        RotationSystem::new(g, rot).unwrap()
    }

    pub fn at(&self, v: Vertex) -> &[EdgeId] {
        &self.rot[v as usize]
    }

    pub fn order(&self, v: Vertex) -> CyclicOrder {
        CyclicOrder::from_vec_unchecked(self.rot[v as usize].clone())
    }

    fn index(&self, g: &Graph, v: Vertex, e: EdgeId) -> usize {
        let side = usize::from(g.endpoints(e).0 != v);
        self.pos[e as usize][side] as usize
    }

    /// Counter-clockwise successor of `e` around `v`.
    pub fn succ(&self, g: &Graph, v: Vertex, e: EdgeId) -> EdgeId {
        let r = &self.rot[v as usize];
        r[(self.index(g, v, e) + 1) % r.len()]
    }

    /// Counter-clockwise predecessor of `e` around `v`.
    pub fn pred(&self, g: &Graph, v: Vertex, e: EdgeId) -> EdgeId {
        let r = &self.rot[v as usize];
        r[(self.index(g, v, e) + r.len() - 1) % r.len()]
    }
}

/// Angle at `v` between `e_in` and its counter-clockwise successor `e_out`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Corner {
    pub v: Vertex,
    pub e_in: EdgeId,
    pub e_out: EdgeId,
}

/// Face identifier: the least corner on the boundary.
pub type FaceId = Corner;

#[derive(Clone, Debug)]
pub struct FaceSet {
    /// Corners of every face in walk order.
    pub faces: Vec<Vec<Corner>>,
    pub ids: Vec<FaceId>,
    /// Face index per dart, the dart naming the corner's `e_in`.
    pub face_of_dart: Vec<u32>,
}

impl FaceSet {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Face owning corner `(v, e_in, succ(e_in))`.
    pub fn face_of(&self, g: &Graph, v: Vertex, e_in: EdgeId) -> usize {
        self.face_of_dart[g.dart(e_in, v)] as usize
    }
}

/// Traces faces: after `u→v` comes `v→w` with `vw` the counter-clockwise
/// predecessor of `vu` at `v`.
pub fn trace_faces(g: &Graph, rot: &RotationSystem) -> FaceSet {
    let m = g.m() as usize;
    let mut face_of_dart = vec![u32::MAX; 2 * m];
    let mut faces = Vec::new();
    let mut ids = Vec::new();
    for start in 0..2 * m {
        if face_of_dart[start] != u32::MAX {
            continue;
        }
        let fid = faces.len() as u32;
        let mut corners = Vec::new();
        // dart d = (e, side) names the corner at that endpoint with e_in = e
        let mut d = start;
        loop {
            face_of_dart[d] = fid;
            let e = (d / 2) as EdgeId;
            let (a, b) = g.endpoints(e);
            let v = if d % 2 == 0 { a } else { b };
            let e_out = rot.succ(g, v, e);
            corners.push(Corner { v, e_in: e, e_out });
            // the walk leaves v along e_in and the next corner is (u, pred_u(e_in), e_in)
            let u = g.other(e, v);
            let e_next = rot.pred(g, u, e);
            d = g.dart(e_next, u);
            if d == start {
                break;
            }
        }
        ids.push(*corners.iter().min().unwrap());
        faces.push(corners);
    }
    FaceSet { faces, ids, face_of_dart }
}

/// Connected component index per vertex, numbered by least vertex.
pub fn connected_components(g: &Graph) -> Vec<u32> {
    let mut uf = UnionFind::<u32>::new(g.n() as usize);
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut label = vec![u32::MAX; g.n() as usize];
    let mut comp = vec![0; g.n() as usize];
    let mut next = 0;
    for v in 0..g.n() {
        let r = uf.find(v) as usize;
        if label[r] == u32::MAX {
            label[r] = next;
            next += 1;
        }
        comp[v as usize] = label[r];
    }
    comp
}

/// Euler's formula holds in every connected component.
pub fn euler_planar(g: &Graph, rot: &RotationSystem) -> bool {
    let comp = connected_components(g);
    let k = comp.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut nv = vec![0i64; k];
    let mut ne = vec![0i64; k];
    let mut nf = vec![0i64; k];
    for v in 0..g.n() {
        nv[comp[v as usize] as usize] += 1;
        if g.degree(v) == 0 {
            nf[comp[v as usize] as usize] += 1;
        }
    }
    for &(u, _) in g.edges() {
        ne[comp[u as usize] as usize] += 1;
    }
    let faces = trace_faces(g, rot);
    for f in &faces.faces {
        nf[comp[f[0].v as usize] as usize] += 1;
    }
    (0..k).all(|c| nv[c] - ne[c] + nf[c] == 2)
}

fn sorted_neighbors(g: &Graph) -> Vec<Vec<(Vertex, EdgeId)>> {
    (0..g.n())
        .map(|v| {
            let mut nb: Vec<(Vertex, EdgeId)> = g.incident(v).iter().map(|&e| (g.other(e, v), e)).collect();
            nb.sort_unstable();
            nb
        })
        .collect()
}

/// Depth-first forest in postorder, exploring lowest ids first.
/// Returns `(order, parent, roots)`.
pub fn dfs_postorder(g: &Graph) -> (Vec<Vertex>, Vec<Option<Vertex>>, Vec<Vertex>) {
    let n = g.n() as usize;
    let nb = sorted_neighbors(g);
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut roots = Vec::new();
    let mut stack: Vec<(Vertex, usize)> = Vec::new();
    for r in 0..g.n() {
        if seen[r as usize] {
            continue;
        }
        roots.push(r);
        seen[r as usize] = true;
        stack.push((r, 0));
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i < nb[v as usize].len() {
                top.1 += 1;
                let (w, _) = nb[v as usize][i];
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = Some(v);
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }
    (order, parent, roots)
}

/// Biconnected decomposition.
#[derive(Clone, Debug)]
pub struct Blocks {
    /// Block index of every edge.
    pub edge_block: Vec<u32>,
    pub cut: Vec<bool>,
    pub count: u32,
    /// Vertex of each block closest to its search root.
    pub top: Vec<Vertex>,
    /// Block containing the tree edge to the parent, or the own block of an
    /// isolated vertex.
    pub parent_block: Vec<Option<u32>>,
}

impl Blocks {
    pub fn contains(&self, b: u32, v: Vertex) -> bool {
        self.top[b as usize] == v || self.parent_block[v as usize] == Some(b)
    }

    /// The block containing both vertices, if any.
    pub fn common(&self, u: Vertex, v: Vertex) -> Option<u32> {
        [self.parent_block[u as usize], self.parent_block[v as usize]]
            .into_iter()
            .flatten()
            .find(|&b| self.contains(b, u) && self.contains(b, v))
    }
}

/// Blocks and cut vertices; isolated vertices form edgeless blocks.
pub fn blocks_and_cutvertices(g: &Graph) -> Blocks {
    let n = g.n() as usize;
    let m = g.m() as usize;
    let nb = sorted_neighbors(g);
    let mut pre = vec![u32::MAX; n];
    let mut low = vec![0u32; n];
    let mut edge_block = vec![u32::MAX; m];
    let mut cut = vec![false; n];
    let mut top = Vec::new();
    let mut parent_block = vec![None; n];
    let mut pedge: Vec<Option<EdgeId>> = vec![None; n];
    let mut estack: Vec<EdgeId> = Vec::new();
    let mut counter = 0u32;
    // frame: vertex, parent edge, next neighbor index
    let mut stack: Vec<(Vertex, Option<EdgeId>, usize)> = Vec::new();
    for r in 0..g.n() {
        if pre[r as usize] != u32::MAX {
            continue;
        }
        pre[r as usize] = counter;
        low[r as usize] = counter;
        counter += 1;
        if g.degree(r) == 0 {
            parent_block[r as usize] = Some(top.len() as u32);
            top.push(r);
            continue;
        }
        let mut root_children = 0;
        stack.push((r, None, 0));
        while let Some(frame) = stack.last_mut() {
            let (v, pe, i) = *frame;
            if i < nb[v as usize].len() {
                frame.2 += 1;
                let (w, e) = nb[v as usize][i];
                if Some(e) == pe {
                    continue;
                }
                if pre[w as usize] == u32::MAX {
                    estack.push(e);
                    pre[w as usize] = counter;
                    low[w as usize] = counter;
                    counter += 1;
                    if v == r {
                        root_children += 1;
                    }
                    pedge[w as usize] = Some(e);
                    stack.push((w, Some(e), 0));
                } else if pre[w as usize] < pre[v as usize] {
                    estack.push(e);
                    low[v as usize] = low[v as usize].min(pre[w as usize]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u as usize] = low[u as usize].min(low[v as usize]);
                    if low[v as usize] >= pre[u as usize] {
                        if u != r {
                            cut[u as usize] = true;
                        }
                        let b = top.len() as u32;
                        top.push(u);
                        let pe = pe.unwrap();
                        loop {
                            let f = estack.pop().unwrap();
                            edge_block[f as usize] = b;
                            if f == pe {
                                break;
                            }
                        }
                    }
                }
            }
        }
        if root_children > 1 {
            cut[r as usize] = true;
        }
    }
    for v in 0..n {
        if let Some(e) = pedge[v] {
            parent_block[v] = Some(edge_block[e as usize]);
        }
    }
    Blocks { count: top.len() as u32, edge_block, cut, top, parent_block }
}

/// Order `s = v1, ..., vn = t` in which every inner vertex has an earlier
/// and a later neighbor.
pub fn st_ordering(g: &Graph, s: Vertex, t: Vertex) -> Result<Vec<Vertex>> {
    let n = g.n() as usize;
    if s >= g.n() || t >= g.n() || g.find_edge(s, t).is_none() {
        return Err(invalid("st-ordering needs the edge st"));
    }
    let blocks = blocks_and_cutvertices(g);
    if blocks.count != 1 || blocks.cut.iter().any(|&c| c) {
        return Err(invalid("st-ordering needs a biconnected graph"));
    }
    // search from s taking t first, recording preorder and low vertices
    let mut nb = sorted_neighbors(g);
    let ts = nb[s as usize].iter().position(|&(w, _)| w == t).unwrap();
    nb[s as usize].swap(0, ts);
    let mut pre = vec![u32::MAX; n];
    let mut low = vec![0 as Vertex; n];
    let mut parent = vec![u32::MAX; n];
    let mut preorder = Vec::with_capacity(n);
    let mut stack: Vec<(Vertex, usize)> = vec![(s, 0)];
    pre[s as usize] = 0;
    low[s as usize] = s;
    preorder.push(s);
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        if i < nb[v as usize].len() {
            top.1 += 1;
            let (w, _) = nb[v as usize][i];
            if pre[w as usize] == u32::MAX {
                pre[w as usize] = preorder.len() as u32;
                low[w as usize] = w;
                parent[w as usize] = v;
                preorder.push(w);
                stack.push((w, 0));
            } else if w != parent[v as usize] && pre[w as usize] < pre[low[v as usize] as usize] {
                low[v as usize] = w;
            }
        } else {
            stack.pop();
            if let Some(&(u, _)) = stack.last() {
                if pre[low[v as usize] as usize] < pre[low[u as usize] as usize] {
                    low[u as usize] = low[v as usize];
                }
            }
        }
    }
    if preorder.len() != n {
        return Err(invalid("st-ordering needs a connected graph"));
    }
    // list insertion with signs
    const NIL: u32 = u32::MAX;
    let mut next = vec![NIL; n];
    let mut prev = vec![NIL; n];
    let mut minus = vec![false; n];
    next[s as usize] = t;
    prev[t as usize] = s;
    minus[s as usize] = true;
    for &v in preorder.iter().skip(2) {
        let p = parent[v as usize];
        if minus[low[v as usize] as usize] {
            // before p
            let q = prev[p as usize];
            prev[v as usize] = q;
            next[v as usize] = p;
            prev[p as usize] = v;
            if q != NIL {
                next[q as usize] = v;
            }
            minus[p as usize] = false;
        } else {
            let q = next[p as usize];
            next[v as usize] = q;
            prev[v as usize] = p;
            next[p as usize] = v;
            if q != NIL {
                prev[q as usize] = v;
            }
            minus[p as usize] = true;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut head = s;
    while prev[head as usize] != NIL {
        head = prev[head as usize];
    }
    let mut cur = head;
    while cur != NIL {
        order.push(cur);
        cur = next[cur as usize];
    }
    Ok(order)
}
