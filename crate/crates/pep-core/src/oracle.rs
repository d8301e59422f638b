//! Brute-force ground truth by enumerating rotation systems.

use std::collections::BTreeSet;

use petgraph::unionfind::UnionFind;

use crate::cctree::satisfies_constraint;
use crate::error::{invalid, Error, Result};
use crate::graph::{connected_components, trace_faces, EdgeId, Graph, RotationSystem, Vertex};
use crate::prep::{prepare, CompRep, HStructure, PEPInstance, Placement};

/// Default bound on the number of rotation systems for [`oracle_planarity`].
pub const PLANARITY_ORACLE_LIMIT: u64 = 10_000_000;
/// Default bound on the number of rotation systems for [`oracle_pep`].
pub const PEP_ORACLE_LIMIT: u64 = 1_000_000;

/// The bound for [`oracle_pep`], overridden by `PEP_ORACLE_LIMIT`.
pub fn pep_oracle_limit() -> u64 {
    std::env::var("PEP_ORACLE_LIMIT").ok().and_then(|s| s.parse().ok()).unwrap_or(PEP_ORACLE_LIMIT)
}

/// `Π (deg(v) - 1)!`, saturating.
pub fn rotation_count(g: &Graph) -> u64 {
    let mut total: u64 = 1;
    for v in 0..g.n() {
        for k in 2..g.degree(v) as u64 {
            total = total.saturating_mul(k);
        }
    }
    total
}

/// Every cyclic order (first element fixed) that restricts to `base` on its
/// elements, with `extra` inserted anywhere.
fn insertions(base: &[EdgeId], extra: &[EdgeId]) -> Vec<Vec<EdgeId>> {
    let mut out = vec![base.to_vec()];
    for &x in extra {
        let mut next = Vec::new();
        for r in &out {
            for i in 1..=r.len() {
                let mut s = r.clone();
                s.insert(i, x);
                next.push(s);
            }
        }
        out = next;
    }
    out
}

/// Counts faces for rotation choices without allocating per candidate.
struct FaceCounter<'a> {
    g: &'a Graph,
    /// Position of every dart in the rotation of its endpoint.
    pos: Vec<u32>,
    seen: Vec<u32>,
    stamp: u32,
    target: i64,
}

impl<'a> FaceCounter<'a> {
    fn new(g: &'a Graph) -> Self {
        let comp = connected_components(g);
        let k = comp.iter().map(|&c| c as i64 + 1).max().unwrap_or(0);
        let isolated = (0..g.n()).filter(|&v| g.degree(v) == 0).count() as i64;
        // planar iff the traced faces number 2k - n + m minus one per isolated vertex
        let target = 2 * k - g.n() as i64 + g.m() as i64 - isolated;
        FaceCounter { g, pos: vec![0; 2 * g.m() as usize], seen: vec![0; 2 * g.m() as usize], stamp: 0, target }
    }

    fn set(&mut self, v: Vertex, r: &[EdgeId]) {
        for (i, &e) in r.iter().enumerate() {
            self.pos[self.g.dart(e, v)] = i as u32;
        }
    }

    fn planar(&mut self, rot: &[&[EdgeId]]) -> bool {
        let g = self.g;
        self.stamp += 1;
        let mut faces = 0i64;
        for start in 0..2 * g.m() as usize {
            if self.seen[start] == self.stamp {
                continue;
            }
            faces += 1;
            if faces > self.target {
                return false;
            }
            let mut d = start;
            loop {
                self.seen[d] = self.stamp;
                let e = (d / 2) as EdgeId;
                let (a, b) = g.endpoints(e);
                let u = if d % 2 == 0 { b } else { a };
                let r = rot[u as usize];
                let i = self.pos[g.dart(e, u)] as usize;
                let e_next = r[(i + r.len() - 1) % r.len()];
                d = g.dart(e_next, u);
                if d == start {
                    break;
                }
            }
        }
        faces == self.target
    }
}

/// Walks every combination of per-vertex choices; stops when `f` says so.
fn odometer(choices: &[Vec<Vec<EdgeId>>], mut f: impl FnMut(&[&[EdgeId]]) -> bool) -> bool {
    let n = choices.len();
    let mut idx = vec![0usize; n];
    let mut cur: Vec<&[EdgeId]> = choices.iter().map(|c| c[0].as_slice()).collect();
    loop {
        if f(&cur) {
            return true;
        }
        let mut v = 0;
        loop {
            if v == n {
                return false;
            }
            idx[v] += 1;
            if idx[v] < choices[v].len() {
                cur[v] = &choices[v][idx[v]];
                break;
            }
            idx[v] = 0;
            cur[v] = &choices[v][0];
            v += 1;
        }
    }
}

fn free_choices(g: &Graph) -> Vec<Vec<Vec<EdgeId>>> {
    (0..g.n())
        .map(|v| {
            let inc = g.incident(v);
            if inc.is_empty() {
                vec![Vec::new()]
            } else {
                insertions(&inc[..1], &inc[1..])
            }
        })
        .collect()
}

/// Whether some rotation system of `g` is planar.
pub fn oracle_planarity(g: &Graph) -> Result<bool> {
    oracle_planarity_with_limit(g, PLANARITY_ORACLE_LIMIT)
}

pub fn oracle_planarity_with_limit(g: &Graph, limit: u64) -> Result<bool> {
    let count = rotation_count(g);
    if count > limit {
        return Err(Error::TooLarge(count));
    }
    let choices = free_choices(g);
    let mut fc = FaceCounter::new(g);
    Ok(odometer(&choices, |rot| {
        for (v, r) in rot.iter().enumerate() {
            fc.set(v as Vertex, r);
        }
        fc.planar(rot)
    }))
}

/// The vertices on either side of the closed walk `cycle` (consecutive
/// vertices joined by edges) in a planar rotation system of a connected
/// graph. The left side holds the face of the corner following the edge into
/// each cycle vertex.
pub fn oracle_sides(g: &Graph, rot: &RotationSystem, cycle: &[Vertex]) -> Result<(BTreeSet<Vertex>, BTreeSet<Vertex>)> {
    let k = cycle.len();
    if k < 3 {
        return Err(Error::InvalidCycle);
    }
    let mut cyc_edges = Vec::with_capacity(k);
    for i in 0..k {
        let e = g.find_edge(cycle[i], cycle[(i + 1) % k]).ok_or(Error::InvalidCycle)?;
        cyc_edges.push(e);
    }
    let mut on = vec![false; g.m() as usize];
    for &e in &cyc_edges {
        on[e as usize] = true;
    }
    let faces = trace_faces(g, rot);
    let mut uf = UnionFind::<usize>::new(faces.len());
    for e in 0..g.m() as usize {
        if !on[e] {
            uf.union(faces.face_of_dart[2 * e] as usize, faces.face_of_dart[2 * e + 1] as usize);
        }
    }
    let groups: BTreeSet<usize> = (0..faces.len()).map(|f| uf.find(f)).collect();
    if groups.len() != 2 {
        return Err(Error::InvalidCycle);
    }
    let left = uf.find(faces.face_of(g, cycle[1], cyc_edges[0]));
    let mut on_cycle = vec![false; g.n() as usize];
    for &v in cycle {
        on_cycle[v as usize] = true;
    }
    let (mut l, mut r) = (BTreeSet::new(), BTreeSet::new());
    for v in 0..g.n() {
        if on_cycle[v as usize] || g.degree(v) == 0 {
            continue;
        }
        let sides: BTreeSet<bool> = g.incident(v).iter().map(|&e| uf.find(faces.face_of(g, v, e)) == left).collect();
        match sides.into_iter().collect::<Vec<_>>().as_slice() {
            [true] => l.insert(v),
            [false] => r.insert(v),
            _ => return Err(Error::InvalidCycle),
        };
    }
    Ok((l, r))
}

/// Instance data needed to check one rotation system of `G` against `𝓗`.
struct Conditions<'a> {
    inst: &'a PEPInstance,
    h: HStructure,
    /// For every non-isolated component `K` and every component `C`: the local
    /// face of `K` that contains `C`.
    expected: Vec<Vec<usize>>,
    h_vertices: Vec<Vertex>,
}

impl<'a> Conditions<'a> {
    fn new(inst: &'a PEPInstance) -> Result<Self> {
        let h = inst.structure()?;
        let k = inst.components.len();
        let mut expected = vec![vec![usize::MAX; k]; k];
        for (a, ca) in inst.components.iter().enumerate() {
            let Some(outer) = ca.outer_local_face else { continue };
            let outer = h.local_face(outer);
            for (c, row) in expected[a].iter_mut().enumerate() {
                let mut x = c;
                *row = loop {
                    match inst.components[x].placement {
                        Placement::Outer => break outer,
                        Placement::Inside { component, face } if component == a => break h.local_face(face),
                        Placement::Inside { component, .. } => x = component,
                    }
                };
            }
        }
        let h_vertices = (0..inst.g.n()).filter(|&v| h.in_h[v as usize]).collect();
        Ok(Conditions { inst, h, expected, h_vertices })
    }

    /// The rotation of every H-vertex restricts to its prescribed order.
    fn rotations_agree(&self, rot: &RotationSystem) -> bool {
        self.inst.rotations.iter().all(|(&v, want)| {
            let got: Vec<EdgeId> = rot.at(v).iter().copied().filter(|&e| self.h.is_h_edge(e)).collect();
            crate::tree::cyclic_eq(&got, want)
        })
    }

    /// Every H-vertex lies in the prescribed face of every other component.
    fn positions_agree(&self, rot: &RotationSystem) -> bool {
        let g = &self.inst.g;
        let faces = trace_faces(g, rot);
        for (a, ca) in self.inst.components.iter().enumerate() {
            if matches!(ca.rep, CompRep::Isolated(_)) {
                continue;
            }
            let mut uf = UnionFind::<usize>::new(faces.len());
            for e in 0..g.m() {
                let (x, _) = g.endpoints(e);
                if !(self.h.is_h_edge(e) && self.h.comp_of[x as usize] == a as u32) {
                    uf.union(faces.face_of_dart[2 * e as usize] as usize, faces.face_of_dart[2 * e as usize + 1] as usize);
                }
            }
            let mut local_of_region = vec![usize::MAX; faces.len()];
            for (lf, cs) in self.h.faces.faces.iter().enumerate() {
                let c = cs[0];
                if self.h.comp_of[c.v as usize] != a as u32 {
                    continue;
                }
                let e_in = self.inst.h_edges[c.e_in as usize];
                let region = uf.find(faces.face_of(g, c.v, e_in));
                if local_of_region[region] != usize::MAX {
                    return false;
                }
                local_of_region[region] = lf;
            }
            for &w in &self.h_vertices {
                let cw = self.h.comp_of[w as usize] as usize;
                if cw == a {
                    continue;
                }
                let e = g.incident(w)[0];
                let got = local_of_region[uf.find(faces.face_of(g, w, e))];
                if got != self.expected[a][cw] {
                    return false;
                }
            }
        }
        true
    }
}

/// Whether some planar rotation system of a connected `G` extends `𝓗`.
pub fn oracle_pep(inst: &PEPInstance) -> Result<bool> {
    oracle_pep_with_limit(inst, pep_oracle_limit())
}

pub fn oracle_pep_with_limit(inst: &PEPInstance, limit: u64) -> Result<bool> {
    let g = &inst.g;
    if connected_components(g).iter().any(|&c| c != 0) {
        return Err(invalid("the oracle handles connected graphs only"));
    }
    let count = rotation_count(g);
    if count > limit {
        return Err(Error::TooLarge(count));
    }
    let cond = Conditions::new(inst)?;
    if g.m() == 0 {
        return Ok(true);
    }
    let choices: Vec<Vec<Vec<EdgeId>>> = (0..g.n())
        .map(|v| {
            let inc = g.incident(v);
            match inst.rotations.get(&v) {
                Some(r) => {
                    let extra: Vec<EdgeId> = inc.iter().copied().filter(|&e| !cond.h.is_h_edge(e)).collect();
                    insertions(r, &extra)
                }
                None if inc.is_empty() => vec![Vec::new()],
                None => insertions(&inc[..1], &inc[1..]),
            }
        })
        .collect();
    let mut fc = FaceCounter::new(g);
    Ok(odometer(&choices, |rot| {
        for (v, r) in rot.iter().enumerate() {
            fc.set(v as Vertex, r);
        }
        if !fc.planar(rot) {
            return false;
        }
        let rs = RotationSystem::new(g, rot.iter().map(|r| r.to_vec()).collect()).expect("enumerated rotations are valid");
        cond.positions_agree(&rs)
    }))
}

/// Both sides of the claim that meeting every color constraint implies the
/// two extension conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImplicationReport {
    pub planar: bool,
    pub constraints_hold: bool,
    pub conditions_hold: bool,
}

impl ImplicationReport {
    /// Meeting the constraints in a planar rotation system implies the conditions.
    pub fn consistent(&self) -> bool {
        !(self.planar && self.constraints_hold) || self.conditions_hold
    }
}

pub fn oracle_constraint_implication_check(inst: &PEPInstance, rot: &RotationSystem) -> Result<ImplicationReport> {
    let cond = Conditions::new(inst)?;
    let g = &inst.g;
    let planar = crate::graph::euler_planar(g, rot);
    let constraints_hold = match prepare(inst)? {
        Ok(p) => (0..g.n()).all(|v| satisfies_constraint(&rot.order(v), &p.constraints[v as usize])),
        Err(_) => false,
    };
    let conditions_hold = planar && cond.rotations_agree(rot) && cond.positions_agree(rot);
    Ok(ImplicationReport { planar, constraints_hold, conditions_hold })
}
