//! Random instances: planar graphs with a known embedding, a random subgraph
//! `H`, and the embedding of `H` they induce. Every generated instance is
//! positive. Mutations perturb instances without promising an outcome.

use std::collections::{BTreeMap, VecDeque};

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::{trace_faces, EdgeId, Graph, RotationSystem, Vertex};
use crate::prep::{CompRep, FaceRef, HComponent, PEPInstance, Placement};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub n: u32,
    /// Probability that an edge belongs to `H`.
    pub h_ratio: f64,
    /// Probability that an edge outside a random spanning tree is deleted.
    pub delete_ratio: f64,
    /// Probability that a vertex without H-edges becomes an isolated H-vertex.
    pub isolated_ratio: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn new(n: u32, h_ratio: f64, seed: u64) -> Self {
        GenParams { n, h_ratio, delete_ratio: 0.3, isolated_ratio: 0.3, seed }
    }
}

/// A random planar triangulation on `n >= 3` vertices with its rotation
/// system, built by repeatedly stacking a vertex into a random face.
pub fn random_triangulation(n: u32, rng: &mut impl Rng) -> (Graph, RotationSystem) {
    assert!(n >= 3);
    let mut edges: Vec<(Vertex, Vertex)> = vec![(0, 1), (1, 2), (2, 0)];
    // ccw successor of every dart around its vertex
    let mut nxt: Vec<usize> = vec![0; 6];
    let mut first: Vec<usize> = vec![0, 1, 3];
    // dart 2e sits at edges[e].0, dart 2e+1 at edges[e].1
    for (a, b) in [(0usize, 5usize), (1, 2), (3, 4)] {
        nxt[a] = b;
        nxt[b] = a;
    }
    // faces as darts (at a of ab, at b of bc, at c of ca), ccw
    let mut faces: Vec<[usize; 3]> = vec![[0, 2, 4], [5, 3, 1]];
    for x in 3..n {
        let i = rng.gen_range(0..faces.len());
        let [dab, dbc, dca] = faces[i];
        let a = dart_vertex(&edges, dab);
        let b = dart_vertex(&edges, dbc);
        let c = dart_vertex(&edges, dca);
        let add = |edges: &mut Vec<(Vertex, Vertex)>, nxt: &mut Vec<usize>, v: Vertex, after: usize| {
            let e = edges.len();
            edges.push((v, x));
            nxt.push(nxt[after]);
            nxt[after] = 2 * e;
            nxt.push(0);
            2 * e
        };
        let dax = add(&mut edges, &mut nxt, a, dab);
        let dbx = add(&mut edges, &mut nxt, b, dbc);
        let dcx = add(&mut edges, &mut nxt, c, dca);
        let (dxa, dxb, dxc) = (dax + 1, dbx + 1, dcx + 1);
        nxt[dxa] = dxb;
        nxt[dxb] = dxc;
        nxt[dxc] = dxa;
        first.push(dxa);
        faces[i] = [dab, dbx, dxa];
        faces.push([dbc, dcx, dxb]);
        faces.push([dca, dax, dxc]);
    }
    let g = Graph::new(n, edges.clone()).expect("triangulation is simple");
    let rot = (0..n as usize)
        .map(|v| {
            let mut r = vec![(first[v] / 2) as EdgeId];
            let mut d = nxt[first[v]];
            while d != first[v] {
                r.push((d / 2) as EdgeId);
                d = nxt[d];
            }
            r
        })
        .collect();
    (g.clone(), RotationSystem::new(&g, rot).expect("triangulation rotation is valid"))
}

fn dart_vertex(edges: &[(Vertex, Vertex)], d: usize) -> Vertex {
    let (a, b) = edges[d / 2];
    if d % 2 == 0 {
        a
    } else {
        b
    }
}

/// Deletes each edge outside a random spanning tree with probability `p`,
/// keeping the rotation of the remaining edges.
pub fn thin_out(g: &Graph, rot: &RotationSystem, p: f64, rng: &mut impl Rng) -> (Graph, RotationSystem) {
    let n = g.n() as usize;
    let mut keep = vec![false; g.m() as usize];
    let mut seen = vec![false; n];
    let root = rng.gen_range(0..g.n());
    seen[root as usize] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let mut inc = g.incident(v).to_vec();
        inc.shuffle(rng);
        for e in inc {
            let w = g.other(e, v);
            if !seen[w as usize] {
                seen[w as usize] = true;
                keep[e as usize] = true;
                queue.push_back(w);
            }
        }
    }
    for k in keep.iter_mut() {
        if !*k && !rng.gen_bool(p) {
            *k = true;
        }
    }
    let mut new_id = vec![u32::MAX; g.m() as usize];
    let mut edges = Vec::new();
    for e in 0..g.m() {
        if keep[e as usize] {
            new_id[e as usize] = edges.len() as u32;
            edges.push(g.endpoints(e));
        }
    }
    let h = Graph::new(g.n(), edges).expect("subgraph of a simple graph");
    let r = (0..g.n()).map(|v| rot.at(v).iter().filter(|&&e| keep[e as usize]).map(|&e| new_id[e as usize]).collect()).collect();
    let r = RotationSystem::new(&h, r).expect("restricted rotation is valid");
    (h, r)
}

/// The instance induced by an embedded connected graph and a choice of
/// H-edges and isolated H-vertices, with `outer` naming the outer face by
/// one of its darts.
pub fn induced_instance(g: &Graph, rot: &RotationSystem, h_edges: Vec<EdgeId>, h_isolated: Vec<Vertex>, outer_dart: usize) -> PEPInstance {
    let n = g.n() as usize;
    let mut in_h_edge = vec![false; g.m() as usize];
    for &e in &h_edges {
        in_h_edge[e as usize] = true;
    }
    let hg = g.edge_subgraph(&h_edges);
    let mut rotations = BTreeMap::new();
    let mut hrot = vec![Vec::new(); n];
    let mut hid = vec![u32::MAX; g.m() as usize];
    for (i, &e) in h_edges.iter().enumerate() {
        hid[e as usize] = i as u32;
    }
    for v in 0..g.n() {
        let r: Vec<EdgeId> = rot.at(v).iter().copied().filter(|&e| in_h_edge[e as usize]).collect();
        if !r.is_empty() {
            hrot[v as usize] = r.iter().map(|&e| hid[e as usize]).collect();
            rotations.insert(v, r);
        }
    }
    let hrs = RotationSystem::new(&hg, hrot).expect("restricted rotation is valid");
    let gf = trace_faces(g, rot);
    let hf = trace_faces(&hg, &hrs);
    // regions: faces of G glued across edges outside H
    let mut uf = UnionFind::<usize>::new(gf.len());
    for e in 0..g.m() as usize {
        if !in_h_edge[e] {
            uf.union(gf.face_of_dart[2 * e] as usize, gf.face_of_dart[2 * e + 1] as usize);
        }
    }
    let region_outer = uf.find(gf.face_of_dart[outer_dart] as usize);
    // components of H by least vertex
    let comp = crate::graph::connected_components(&hg);
    let mut comp_index: BTreeMap<u32, usize> = BTreeMap::new();
    let mut reps: Vec<CompRep> = Vec::new();
    let mut is_iso = vec![false; n];
    for &v in &h_isolated {
        is_iso[v as usize] = true;
    }
    for v in 0..g.n() {
        if hg.degree(v) > 0 || is_iso[v as usize] {
            comp_index.entry(comp[v as usize]).or_insert_with(|| {
                reps.push(if hg.degree(v) > 0 { CompRep::Vertex(v) } else { CompRep::Isolated(v) });
                reps.len() - 1
            });
        }
    }
    let k = reps.len();
    // incidences between components and regions, each with a corner of the component
    let mut adj_c: Vec<Vec<(usize, FaceRef)>> = vec![Vec::new(); k];
    let mut adj_r: BTreeMap<usize, Vec<(usize, Option<FaceRef>)>> = BTreeMap::new();
    for cs in &hf.faces {
        let c0 = cs[0];
        let e_in = h_edges[c0.e_in as usize];
        let fr = FaceRef { v: c0.v, e_in };
        let region = uf.find(gf.face_of(g, c0.v, e_in));
        let ci = comp_index[&comp[c0.v as usize]];
        adj_c[ci].push((region, fr));
        adj_r.entry(region).or_default().push((ci, Some(fr)));
    }
    for &w in &h_isolated {
        let e = g.incident(w)[0];
        let region = uf.find(gf.face_of(g, w, e));
        let ci = comp_index[&comp[w as usize]];
        adj_c[ci].push((region, FaceRef { v: w, e_in: u32::MAX }));
        adj_r.entry(region).or_default().push((ci, None));
    }
    // walk the nesting tree from the outer region
    let mut components: Vec<Option<HComponent>> = vec![None; k];
    let mut region_parent: BTreeMap<usize, (usize, FaceRef)> = BTreeMap::new();
    let mut queue = VecDeque::from([region_outer]);
    let mut visited_r = std::collections::BTreeSet::from([region_outer]);
    while let Some(r) = queue.pop_front() {
        let placement = match region_parent.get(&r) {
            None => Placement::Outer,
            Some(&(p, face)) => Placement::Inside { component: p, face },
        };
        for &(ci, own) in adj_r.get(&r).map(Vec::as_slice).unwrap_or(&[]) {
            if components[ci].is_some() || region_parent.get(&r).is_some_and(|&(p, _)| p == ci) {
                continue;
            }
            components[ci] = Some(HComponent { rep: reps[ci], outer_local_face: own, placement });
            for &(r2, fr) in &adj_c[ci] {
                if r2 != r && visited_r.insert(r2) {
                    region_parent.insert(r2, (ci, fr));
                    queue.push_back(r2);
                }
            }
        }
    }
    let components = components.into_iter().map(|c| c.expect("every component is reached")).collect();
    PEPInstance { g: g.clone(), h_edges, h_isolated, rotations, components }
}

/// A positive instance drawn from `params`.
pub fn generate(params: &GenParams) -> Result<PEPInstance> {
    generate_with_witness(params).map(|(inst, _)| inst)
}

/// Same as [`generate`], also returning the rotation system of `G` it was
/// cut from, which extends the given drawing.
pub fn generate_with_witness(params: &GenParams) -> Result<(PEPInstance, RotationSystem)> {
    if params.n < 3 {
        return Err(invalid("n must be at least 3"));
    }
    for (name, p) in [("h_ratio", params.h_ratio), ("delete_ratio", params.delete_ratio), ("isolated_ratio", params.isolated_ratio)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("{name} must lie in [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (g, rot) = random_triangulation(params.n, &mut rng);
    let (g, rot) = thin_out(&g, &rot, params.delete_ratio, &mut rng);
    let h_edges: Vec<EdgeId> = (0..g.m()).filter(|_| rng.gen_bool(params.h_ratio)).collect();
    let mut has_h = vec![false; g.n() as usize];
    for &e in &h_edges {
        let (a, b) = g.endpoints(e);
        has_h[a as usize] = true;
        has_h[b as usize] = true;
    }
    let h_isolated: Vec<Vertex> = (0..g.n()).filter(|&v| !has_h[v as usize] && rng.gen_bool(params.isolated_ratio)).collect();
    let outer = rng.gen_range(0..2 * g.m() as usize);
    let inst = induced_instance(&g, &rot, h_edges, h_isolated, outer);
    Ok((inst, rot))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationKind {
    RotationSwap,
    PlacementMove,
    EdgeAdd,
}

impl std::str::FromStr for MutationKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rotation-swap" => Ok(MutationKind::RotationSwap),
            "placement-move" => Ok(MutationKind::PlacementMove),
            "edge-add" => Ok(MutationKind::EdgeAdd),
            _ => Err(invalid(format!("unknown mutation kind {s}"))),
        }
    }
}

enum Edit {
    Swap(Vertex, usize),
    Place(usize, Placement),
    Add(Vertex, Vertex),
}

/// Applies one random perturbation of the given kind that keeps the instance
/// valid. Returns `None` when no such perturbation exists.
pub fn mutate(inst: &PEPInstance, kind: MutationKind, seed: u64) -> Option<PEPInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &inst.g;
    let mut edits: Vec<Edit> = Vec::new();
    match kind {
        MutationKind::RotationSwap => {
            for (&v, r) in &inst.rotations {
                if r.len() >= 3 {
                    edits.extend((0..r.len()).map(|i| Edit::Swap(v, i)));
                }
            }
        }
        MutationKind::PlacementMove => {
            let h = inst.structure().ok()?;
            let mut targets: Vec<(usize, FaceRef)> = Vec::new();
            for cs in &h.faces.faces {
                let c = cs[0];
                targets.push((h.comp_of[c.v as usize] as usize, FaceRef { v: c.v, e_in: inst.h_edges[c.e_in as usize] }));
            }
            for (ci, c) in inst.components.iter().enumerate() {
                let options = std::iter::once(Placement::Outer)
                    .chain(targets.iter().filter(|(t, _)| *t != ci).map(|&(t, f)| Placement::Inside { component: t, face: f }));
                edits.extend(options.filter(|p| *p != c.placement).map(|p| Edit::Place(ci, p)));
            }
        }
        MutationKind::EdgeAdd => {
            let n = g.n() as u64;
            if n * n.saturating_sub(1) / 2 <= 1_000_000 {
                for u in 0..g.n() {
                    edits.extend((u + 1..g.n()).filter(|&v| g.find_edge(u, v).is_none()).map(|v| Edit::Add(u, v)));
                }
            } else {
                for _ in 0..1000 {
                    let (u, v) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
                    if u != v && g.find_edge(u, v).is_none() {
                        return Some(apply(inst, &Edit::Add(u.min(v), u.max(v))));
                    }
                }
            }
        }
    }
    edits.shuffle(&mut rng);
    edits.iter().map(|e| apply(inst, e)).find(|x| x.validate().is_ok())
}

fn apply(inst: &PEPInstance, edit: &Edit) -> PEPInstance {
    let mut x = inst.clone();
    match *edit {
        Edit::Swap(v, i) => {
            let r = x.rotations.get_mut(&v).unwrap();
            let j = (i + 1) % r.len();
            r.swap(i, j);
        }
        Edit::Place(ci, p) => x.components[ci].placement = p,
        Edit::Add(u, v) => {
            let mut edges = x.g.edges().to_vec();
            edges.push((u, v));
            x.g = Graph::new(x.g.n(), edges).expect("new edge keeps the graph simple");
        }
    }
    x
}
