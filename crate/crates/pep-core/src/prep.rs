//! Instances `(G, H, 𝓗)`, their JSON form, and the preprocessing that turns
//! an instance into per-vertex color constraints.

use std::collections::{BTreeMap, HashSet};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::cctree::ColorConstraint;
use crate::cyclic::CyclicOrder;
use crate::error::{at, Result};
use crate::graph::{
    blocks_and_cutvertices, connected_components, euler_planar, trace_faces, Corner, EdgeId, FaceSet, Graph, RotationSystem, Vertex,
};
use crate::tree::Color;

/// A corner `(v, e_in, ccw-successor of e_in)` naming the face that owns it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceRef {
    pub v: Vertex,
    pub e_in: EdgeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompRep {
    Vertex(Vertex),
    Isolated(Vertex),
}

impl CompRep {
    pub fn vertex(self) -> Vertex {
        match self {
            CompRep::Vertex(v) | CompRep::Isolated(v) => v,
        }
    }
}

/// Where a component of `H` lies relative to the others.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Outer,
    Inside { component: usize, face: FaceRef },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HComponent {
    pub rep: CompRep,
    /// `None` exactly for isolated vertices.
    pub outer_local_face: Option<FaceRef>,
    pub placement: Placement,
}

/// A graph `G` with a subgraph `H` and a planar embedding `𝓗` of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PEPInstance {
    pub g: Graph,
    pub h_edges: Vec<EdgeId>,
    pub h_isolated: Vec<Vertex>,
    /// Counter-clockwise H-edges around every vertex of positive H-degree.
    pub rotations: BTreeMap<Vertex, Vec<EdgeId>>,
    pub components: Vec<HComponent>,
}

// ------------------------------------------------------------------ JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: u32,
    edges: Vec<[u32; 2]>,
    h_edges: Vec<u32>,
    h_isolated: Vec<u32>,
    rotations: BTreeMap<String, Vec<u32>>,
    components: Vec<RawComponent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    rep: RawRep,
    outer_local_face: Option<FaceRef>,
    placement: RawPlacement,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawRep {
    Vertex(u32),
    Tagged(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawPlacement {
    Word(String),
    Inside(RawInside),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInside {
    component: usize,
    face: FaceRef,
}

/// Parses and validates an instance.
pub fn parse_instance(bytes: &[u8]) -> Result<PEPInstance> {
    let raw: RawInstance = serde_json::from_slice(bytes).map_err(|e| at("$", e.to_string()))?;
    let edges = raw.edges.iter().map(|e| (e[0], e[1])).collect();
    let g = Graph::new(raw.n, edges).map_err(|e| at("edges", e.to_string()))?;
    let mut rotations = BTreeMap::new();
    for (k, v) in raw.rotations {
        let vx: Vertex = k.parse().map_err(|_| at(format!("rotations.{k}"), "key is not a vertex"))?;
        rotations.insert(vx, v);
    }
    let mut components = Vec::with_capacity(raw.components.len());
    for (i, c) in raw.components.into_iter().enumerate() {
        let rep = match c.rep {
            RawRep::Vertex(v) => CompRep::Vertex(v),
            RawRep::Tagged(s) => {
                let v = s.strip_prefix("iso:").and_then(|t| t.parse().ok());
                CompRep::Isolated(v.ok_or_else(|| at(format!("components[{i}].rep"), "expected a vertex or \"iso:<v>\""))?)
            }
        };
        let placement = match c.placement {
            RawPlacement::Word(w) if w == "outer" => Placement::Outer,
            RawPlacement::Word(_) => return Err(at(format!("components[{i}].placement"), "expected \"outer\" or an object")),
            RawPlacement::Inside(p) => Placement::Inside { component: p.component, face: p.face },
        };
        components.push(HComponent { rep, outer_local_face: c.outer_local_face, placement });
    }
    let inst = PEPInstance { g, h_edges: raw.h_edges, h_isolated: raw.h_isolated, rotations, components };
    inst.validate()?;
    Ok(inst)
}

/// Compact JSON with a trailing newline.
pub fn serialize_instance(inst: &PEPInstance) -> Vec<u8> {
    let raw = RawInstance {
        n: inst.g.n(),
        edges: inst.g.edges().iter().map(|&(u, v)| [u, v]).collect(),
        h_edges: inst.h_edges.clone(),
        h_isolated: inst.h_isolated.clone(),
        rotations: inst.rotations.iter().map(|(v, r)| (v.to_string(), r.clone())).collect(),
        components: inst
            .components
            .iter()
            .map(|c| RawComponent {
                rep: match c.rep {
                    CompRep::Vertex(v) => RawRep::Vertex(v),
                    CompRep::Isolated(v) => RawRep::Tagged(format!("iso:{v}")),
                },
                outer_local_face: c.outer_local_face,
                placement: match c.placement {
                    Placement::Outer => RawPlacement::Word("outer".into()),
                    Placement::Inside { component, face } => RawPlacement::Inside(RawInside { component, face }),
                },
            })
            .collect(),
    };
    let mut out = serde_json::to_vec(&raw).expect("instance serializes");
    out.push(b'\n');
    out
}

// ------------------------------------------------------------- structure

/// `H` as a graph of its own together with its embedding.
#[derive(Clone, Debug)]
pub struct HStructure {
    /// `H` on the vertex set of `G`; edge `i` is `h_edges[i]` of the instance.
    pub hg: Graph,
    /// Local id of every edge of `G` in `hg`, `u32::MAX` outside `H`.
    pub hid: Vec<u32>,
    pub in_h: Vec<bool>,
    /// Instance component index of every vertex, `u32::MAX` outside `H`.
    pub comp_of: Vec<u32>,
    pub rot: RotationSystem,
    pub faces: FaceSet,
}

impl HStructure {
    pub fn is_h_edge(&self, e: EdgeId) -> bool {
        self.hid[e as usize] != u32::MAX
    }

    /// Local face owning the corner named by `f`.
    pub fn local_face(&self, f: FaceRef) -> usize {
        self.faces.face_of(&self.hg, f.v, self.hid[f.e_in as usize])
    }
}

impl PEPInstance {
    /// Checks every structural requirement of an instance.
    pub fn validate(&self) -> Result<()> {
        self.structure().map(|_| ())
    }

    /// Validates and builds the embedded subgraph `H`.
    pub fn structure(&self) -> Result<HStructure> {
        let g = &self.g;
        let n = g.n() as usize;
        let mut hid = vec![u32::MAX; g.m() as usize];
        for (i, &e) in self.h_edges.iter().enumerate() {
            if e >= g.m() {
                return Err(at(format!("h_edges[{i}]"), format!("unknown edge {e}")));
            }
            if hid[e as usize] != u32::MAX {
                return Err(at(format!("h_edges[{i}]"), format!("edge {e} listed twice")));
            }
            hid[e as usize] = i as u32;
        }
        let hg = g.edge_subgraph(&self.h_edges);
        let mut in_h = vec![false; n];
        for v in 0..g.n() {
            in_h[v as usize] = hg.degree(v) > 0;
        }
        for (i, &v) in self.h_isolated.iter().enumerate() {
            let path = format!("h_isolated[{i}]");
            if v >= g.n() {
                return Err(at(path, format!("unknown vertex {v}")));
            }
            if in_h[v as usize] {
                return Err(at(path, format!("vertex {v} is already in H")));
            }
            in_h[v as usize] = true;
        }
        let mut rot = vec![Vec::new(); n];
        for (&v, r) in &self.rotations {
            let path = format!("rotations.{v}");
            if v >= g.n() || hg.degree(v) == 0 {
                return Err(at(path, "vertex has no H-edge"));
            }
            let mut local = Vec::with_capacity(r.len());
            for &e in r {
                if e >= g.m() || hid[e as usize] == u32::MAX {
                    return Err(at(path, format!("edge {e} is not an H-edge")));
                }
                let (a, b) = g.endpoints(e);
                if a != v && b != v {
                    return Err(at(path, format!("edge {e} is not incident to {v}")));
                }
                local.push(hid[e as usize]);
            }
            if local.len() != hg.degree(v) || local.iter().collect::<HashSet<_>>().len() != local.len() {
                return Err(at(path, "not a permutation of the incident H-edges"));
            }
            rot[v as usize] = local;
        }
        for v in 0..g.n() {
            if hg.degree(v) > 0 && !self.rotations.contains_key(&v) {
                return Err(at(format!("rotations.{v}"), "missing"));
            }
        }
        let rot = RotationSystem::new(&hg, rot).map_err(|e| at("rotations", e.to_string()))?;
        if !euler_planar(&hg, &rot) {
            return Err(at("rotations", "the embedding of H is not planar"));
        }
        // components: connected pieces of H with at least one edge, plus isolated vertices
        let cc = connected_components(&hg);
        let mut comp_of = vec![u32::MAX; n];
        let mut owner: BTreeMap<u32, usize> = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            let path = format!("components[{i}].rep");
            let v = c.rep.vertex();
            if v >= g.n() {
                return Err(at(path, format!("unknown vertex {v}")));
            }
            let ok = match c.rep {
                CompRep::Vertex(v) => hg.degree(v) > 0,
                CompRep::Isolated(v) => in_h[v as usize] && hg.degree(v) == 0,
            };
            if !ok {
                return Err(at(path, format!("vertex {v} does not represent a component of this kind")));
            }
            if owner.insert(cc[v as usize], i).is_some() {
                return Err(at(path, "component listed twice"));
            }
        }
        for v in 0..g.n() {
            if in_h[v as usize] {
                match owner.get(&cc[v as usize]) {
                    Some(&i) => comp_of[v as usize] = i as u32,
                    None => return Err(at("components", format!("no entry for the component of vertex {v}"))),
                }
            }
        }
        let faces = trace_faces(&hg, &rot);
        let corner_ok = |f: FaceRef, comp: usize| -> bool {
            f.v < g.n() && comp_of[f.v as usize] == comp as u32 && f.e_in < g.m() && hid[f.e_in as usize] != u32::MAX && {
                let (a, b) = g.endpoints(f.e_in);
                a == f.v || b == f.v
            }
        };
        for (i, c) in self.components.iter().enumerate() {
            let iso = matches!(c.rep, CompRep::Isolated(_));
            match (iso, c.outer_local_face) {
                (true, Some(_)) => return Err(at(format!("components[{i}].outer_local_face"), "must be null for an isolated vertex")),
                (false, None) => return Err(at(format!("components[{i}].outer_local_face"), "missing")),
                (false, Some(f)) if !corner_ok(f, i) => {
                    return Err(at(format!("components[{i}].outer_local_face"), "not a corner of this component"))
                }
                _ => {}
            }
            if let Placement::Inside { component, face } = c.placement {
                let path = format!("components[{i}].placement");
                if component >= self.components.len() || component == i {
                    return Err(at(path, "invalid parent component"));
                }
                if matches!(self.components[component].rep, CompRep::Isolated(_)) {
                    return Err(at(path, "an isolated vertex has no faces to place into"));
                }
                if !corner_ok(face, component) {
                    return Err(at(path, "face is not a corner of the parent component"));
                }
            }
        }
        // placements must form a forest
        let k = self.components.len();
        let mut state = vec![0u8; k];
        for s in 0..k {
            let mut chain = Vec::new();
            let mut c = s;
            while state[c] == 0 {
                state[c] = 1;
                chain.push(c);
                match self.components[c].placement {
                    Placement::Inside { component, .. } => c = component,
                    Placement::Outer => break,
                }
            }
            if state[c] == 1 && matches!(self.components[c].placement, Placement::Inside { .. }) && chain.contains(&c) {
                return Err(at(format!("components[{c}].placement"), "placements form a cycle"));
            }
            for x in chain {
                state[x] = 2;
            }
        }
        Ok(HStructure { hg, hid, in_h, comp_of, rot, faces })
    }
}

// ----------------------------------------------------------------- faces

/// The faces of `𝓗` as a whole.
#[derive(Clone, Debug)]
pub struct HFaceMap {
    pub count: u32,
    /// Global face of every local face of the components.
    pub global_of_local: Vec<u32>,
    /// Global face around every isolated H-vertex (`u32::MAX` elsewhere).
    pub global_of_isolated: Vec<u32>,
    pub outer: u32,
    /// Boundary vertices of every global face, sorted.
    pub boundary: Vec<Vec<Vertex>>,
    /// Corners of every global face in `G` edge ids.
    pub corners: Vec<Vec<Corner>>,
    /// Global faces incident to every vertex, sorted.
    pub faces_at: Vec<Vec<u32>>,
}

impl HFaceMap {
    /// Global face owning the corner `(v, e_in)` of an H-edge.
    pub fn face_of(&self, h: &HStructure, v: Vertex, e_in: EdgeId) -> u32 {
        self.global_of_local[h.faces.face_of(&h.hg, v, h.hid[e_in as usize])]
    }
}

pub fn h_faces(inst: &PEPInstance, h: &HStructure) -> HFaceMap {
    let nl = h.faces.len();
    let n = inst.g.n() as usize;
    let iso_index: BTreeMap<Vertex, usize> = inst.h_isolated.iter().enumerate().map(|(i, &v)| (v, nl + i)).collect();
    let outer_node = nl + inst.h_isolated.len();
    let mut uf = UnionFind::<usize>::new(outer_node + 1);
    for c in &inst.components {
        let own = match (c.rep, c.outer_local_face) {
            (CompRep::Isolated(v), _) => iso_index[&v],
            (_, Some(f)) => h.local_face(f),
            _ => unreachable!("validated"),
        };
        let target = match c.placement {
            Placement::Outer => outer_node,
            Placement::Inside { face, .. } => h.local_face(face),
        };
        uf.union(own, target);
    }
    let mut id = vec![u32::MAX; outer_node + 1];
    let mut count = 0;
    let mut global = vec![0u32; outer_node + 1];
    for (x, slot) in global.iter_mut().enumerate() {
        let r = uf.find(x);
        if id[r] == u32::MAX {
            id[r] = count;
            count += 1;
        }
        *slot = id[r];
    }
    let global_of_local = global[..nl].to_vec();
    let mut global_of_isolated = vec![u32::MAX; n];
    for (&v, &i) in &iso_index {
        global_of_isolated[v as usize] = global[i];
    }
    let outer = global[outer_node];
    let mut boundary = vec![Vec::new(); count as usize];
    let mut corners = vec![Vec::new(); count as usize];
    let mut faces_at = vec![Vec::new(); n];
    for (lf, cs) in h.faces.faces.iter().enumerate() {
        let gf = global_of_local[lf];
        for c in cs {
            let e_in = inst.h_edges[c.e_in as usize];
            let e_out = inst.h_edges[c.e_out as usize];
            corners[gf as usize].push(Corner { v: c.v, e_in, e_out });
            boundary[gf as usize].push(c.v);
            faces_at[c.v as usize].push(gf);
        }
    }
    for &v in &inst.h_isolated {
        let gf = global_of_isolated[v as usize];
        boundary[gf as usize].push(v);
        faces_at[v as usize].push(gf);
    }
    for b in boundary.iter_mut().chain(faces_at.iter_mut()) {
        b.sort_unstable();
        b.dedup();
    }
    HFaceMap { count, global_of_local, global_of_isolated, outer, boundary, corners, faces_at }
}

// --------------------------------------------------------------- bridges

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BridgeKind {
    SingleEdge,
    Component,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub id: u32,
    pub kind: BridgeKind,
    pub edges: Vec<EdgeId>,
    /// Vertices of `G - V(H)` inside the bridge.
    pub inner: Vec<Vertex>,
    pub attachments: Vec<Vertex>,
}

/// Bridges numbered by their least edge.
pub fn h_bridges(inst: &PEPInstance, h: &HStructure) -> Vec<Bridge> {
    let g = &inst.g;
    let n = g.n() as usize;
    let mut comp = vec![u32::MAX; n];
    let mut bridges: Vec<Bridge> = Vec::new();
    for e in 0..g.m() {
        if h.is_h_edge(e) {
            continue;
        }
        let (a, b) = g.endpoints(e);
        if h.in_h[a as usize] && h.in_h[b as usize] {
            let id = bridges.len() as u32;
            let mut att = vec![a, b];
            att.sort_unstable();
            bridges.push(Bridge { id, kind: BridgeKind::SingleEdge, edges: vec![e], inner: Vec::new(), attachments: att });
            continue;
        }
        let s = if h.in_h[a as usize] { b } else { a };
        if comp[s as usize] != u32::MAX {
            continue;
        }
        let id = bridges.len() as u32;
        let mut inner = vec![s];
        comp[s as usize] = id;
        let mut edges = Vec::new();
        let mut att = Vec::new();
        let mut i = 0;
        while i < inner.len() {
            let x = inner[i];
            i += 1;
            for &f in g.incident(x) {
                let y = g.other(f, x);
                if h.in_h[y as usize] {
                    edges.push(f);
                    att.push(y);
                } else {
                    if x < y {
                        edges.push(f);
                    }
                    if comp[y as usize] == u32::MAX {
                        comp[y as usize] = id;
                        inner.push(y);
                    }
                }
            }
        }
        edges.sort_unstable();
        att.sort_unstable();
        att.dedup();
        inner.sort_unstable();
        bridges.push(Bridge { id, kind: BridgeKind::Component, edges, inner, attachments: att });
    }
    bridges
}

/// The face every edge must be embedded in, `None` where unrestricted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub color: Vec<Option<Color>>,
}

/// Reasons why preprocessing alone shows an instance to be negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Infeasible {
    /// No face of `𝓗` contains all attachments of this bridge.
    Bridge(u32),
    /// A restricted edge at this vertex has no angle of its color.
    Vertex(Vertex),
}

pub fn color_bridges(
    inst: &PEPInstance,
    h: &HStructure,
    faces: &HFaceMap,
    bridges: &[Bridge],
) -> std::result::Result<Coloring, Infeasible> {
    let blocks = blocks_and_cutvertices(&h.hg);
    let mut color = vec![None; inst.g.m() as usize];
    for b in bridges {
        let att = &b.attachments;
        if att.len() <= 1 {
            continue;
        }
        let one_block = match blocks.common(att[0], att[1]) {
            Some(k) => att.iter().all(|&v| blocks.contains(k, v)),
            None => false,
        };
        if one_block {
            continue;
        }
        let pivot = *att.iter().min_by_key(|&&v| faces.faces_at[v as usize].len()).unwrap();
        let found: Vec<u32> = faces.faces_at[pivot as usize]
            .iter()
            .copied()
            .filter(|f| att.iter().all(|&v| faces.faces_at[v as usize].binary_search(f).is_ok()))
            .collect();
        match found.as_slice() {
            [] => return Err(Infeasible::Bridge(b.id)),
            [f] => {
                for &e in &b.edges {
                    color[e as usize] = Some(*f);
                }
            }
            _ => panic!("bridge {} fits more than one face of H", b.id),
        }
    }
    Ok(Coloring { color })
}

/// The color constraint of every vertex of `G`, over `G` edge ids.
pub fn vertex_constraints(
    inst: &PEPInstance,
    h: &HStructure,
    faces: &HFaceMap,
    coloring: &Coloring,
) -> std::result::Result<Vec<ColorConstraint>, Infeasible> {
    let g = &inst.g;
    let mut out = Vec::with_capacity(g.n() as usize);
    for v in 0..g.n() {
        let rho: Vec<EdgeId> = inst.rotations.get(&v).cloned().unwrap_or_default();
        let mut color = BTreeMap::new();
        for &e in &rho {
            color.insert(e, faces.face_of(h, v, e));
        }
        let (mut r, mut u) = (Vec::new(), Vec::new());
        for &e in g.incident(v) {
            if h.is_h_edge(e) {
                continue;
            }
            match coloring.color[e as usize] {
                Some(c) => {
                    r.push(e);
                    color.insert(e, c);
                }
                None => u.push(e),
            }
        }
        if !rho.is_empty() {
            let angles: HashSet<Color> = rho.iter().map(|e| color[e]).collect();
            if r.iter().any(|e| !angles.contains(&color[e])) {
                return Err(Infeasible::Vertex(v));
            }
        }
        out.push(ColorConstraint { rho: CyclicOrder::from_vec_unchecked(rho), restricted: r, unrestricted: u, color });
    }
    Ok(out)
}

/// One connected component of `G` with local vertex and edge ids.
#[derive(Clone, Debug)]
pub struct SubInstance {
    pub g: Graph,
    /// Instance vertex of every local vertex.
    pub vertices: Vec<Vertex>,
    /// Instance edge of every local edge.
    pub edges: Vec<EdgeId>,
    /// Constraints over local edge ids; colors stay global.
    pub constraints: Vec<ColorConstraint>,
}

pub fn split_components(inst: &PEPInstance, constraints: &[ColorConstraint]) -> Vec<SubInstance> {
    let g = &inst.g;
    let cc = connected_components(g);
    let k = cc.iter().copied().max().map_or(0, |c| c as usize + 1);
    let mut vertices = vec![Vec::new(); k];
    let mut local_v = vec![0u32; g.n() as usize];
    for v in 0..g.n() {
        let c = cc[v as usize] as usize;
        local_v[v as usize] = vertices[c].len() as u32;
        vertices[c].push(v);
    }
    let mut edges = vec![Vec::new(); k];
    let mut local_e = vec![0u32; g.m() as usize];
    for e in 0..g.m() {
        let c = cc[g.endpoints(e).0 as usize] as usize;
        local_e[e as usize] = edges[c].len() as u32;
        edges[c].push(e);
    }
    (0..k)
        .map(|c| {
            let le: Vec<(Vertex, Vertex)> = edges[c]
                .iter()
                .map(|&e| {
                    let (a, b) = g.endpoints(e);
                    (local_v[a as usize], local_v[b as usize])
                })
                .collect();
            let sg = Graph::new(vertices[c].len() as u32, le).expect("component of a simple graph");
            let map = |e: &EdgeId| local_e[*e as usize];
            let cons = vertices[c]
                .iter()
                .map(|&v| {
                    let k = &constraints[v as usize];
                    ColorConstraint {
                        rho: CyclicOrder::from_vec_unchecked(k.fixed().iter().map(map).collect()),
                        restricted: k.restricted.iter().map(map).collect(),
                        unrestricted: k.unrestricted.iter().map(map).collect(),
                        color: k.color.iter().map(|(e, &c)| (map(e), c)).collect(),
                    }
                })
                .collect();
            SubInstance { g: sg, vertices: vertices[c].clone(), edges: edges[c].clone(), constraints: cons }
        })
        .collect()
}

/// Everything preprocessing derives from a valid instance.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub h: HStructure,
    pub faces: HFaceMap,
    pub bridges: Vec<Bridge>,
    pub coloring: Coloring,
    pub constraints: Vec<ColorConstraint>,
    pub components: Vec<SubInstance>,
}

pub fn prepare(inst: &PEPInstance) -> Result<std::result::Result<Prepared, Infeasible>> {
    let h = inst.structure()?;
    let faces = h_faces(inst, &h);
    let bridges = h_bridges(inst, &h);
    let coloring = match color_bridges(inst, &h, &faces, &bridges) {
        Ok(c) => c,
        Err(x) => return Ok(Err(x)),
    };
    let constraints = match vertex_constraints(inst, &h, &faces, &coloring) {
        Ok(c) => c,
        Err(x) => return Ok(Err(x)),
    };
    let components = split_components(inst, &constraints);
    Ok(Ok(Prepared { h, faces, bridges, coloring, constraints, components }))
}
