mod common;

use pep_core::cctree::satisfies_constraint;
use pep_core::prep::*;
use pep_core::Error;
use serde_json::{json, Value};

use common::all_cyclic;

fn parse(v: Value) -> Result<PEPInstance, Error> {
    parse_instance(v.to_string().as_bytes())
}

fn triangle() -> Value {
    json!({
        "n": 3,
        "edges": [[0, 1], [1, 2], [2, 0]],
        "h_edges": [0, 1, 2],
        "h_isolated": [],
        "rotations": {"0": [0, 2], "1": [1, 0], "2": [2, 1]},
        "components": [{"rep": 0, "outer_local_face": {"v": 0, "e_in": 2}, "placement": "outer"}]
    })
}

fn two_triangles(nested: bool) -> Value {
    let inner = if nested { json!({"component": 0, "face": {"v": 0, "e_in": 0}}) } else { json!("outer") };
    json!({
        "n": 6,
        "edges": [[0, 1], [1, 2], [2, 0], [3, 4], [4, 5], [5, 3]],
        "h_edges": [0, 1, 2, 3, 4, 5],
        "h_isolated": [],
        "rotations": {"0": [0, 2], "1": [1, 0], "2": [2, 1], "3": [3, 5], "4": [4, 3], "5": [5, 4]},
        "components": [
            {"rep": 0, "outer_local_face": {"v": 0, "e_in": 2}, "placement": "outer"},
            {"rep": 3, "outer_local_face": {"v": 3, "e_in": 5}, "placement": inner}
        ]
    })
}

/// K4 on 0..3 with outer face (0,1,2) and 3 inside; vertex 4 is an isolated
/// H-vertex in face (0,1,3), joined to `other` by one extra edge.
fn k4_with_isolated(other: u32) -> Value {
    json!({
        "n": 5,
        "edges": [[0, 1], [1, 2], [2, 0], [0, 3], [1, 3], [2, 3], [4, other]],
        "h_edges": [0, 1, 2, 3, 4, 5],
        "h_isolated": [4],
        "rotations": {"0": [0, 3, 2], "1": [1, 4, 0], "2": [2, 5, 1], "3": [5, 3, 4]},
        "components": [
            {"rep": 0, "outer_local_face": {"v": 0, "e_in": 2}, "placement": "outer"},
            {"rep": "iso:4", "outer_local_face": null, "placement": {"component": 0, "face": {"v": 0, "e_in": 0}}}
        ]
    })
}

fn faces_of(v: Value) -> (PEPInstance, HStructure, HFaceMap) {
    let inst = parse(v).unwrap();
    let h = inst.structure().unwrap();
    let f = h_faces(&inst, &h);
    (inst, h, f)
}

#[test]
fn triangle_is_valid_with_two_faces() {
    let (_, h, f) = faces_of(triangle());
    assert_eq!(f.count, 2);
    assert_eq!(h.faces.len(), 2);
    assert_eq!(f.boundary[0], vec![0, 1, 2]);
}

#[test]
fn nested_and_sibling_triangles_have_three_faces() {
    for nested in [true, false] {
        let (inst, h, f) = faces_of(two_triangles(nested));
        assert_eq!(f.count, 3);
        let merges = inst.components.len() as u32;
        assert_eq!(h.faces.len() as u32 + inst.h_isolated.len() as u32 + 1 - merges, f.count);
        let inner_outer = f.face_of(&h, 3, 5);
        if nested {
            assert_eq!(inner_outer, f.face_of(&h, 0, 0));
            assert_ne!(inner_outer, f.outer);
            assert_eq!(f.boundary[inner_outer as usize], vec![0, 1, 2, 3, 4, 5]);
        } else {
            assert_eq!(inner_outer, f.outer);
        }
    }
}

#[test]
fn every_corner_lands_in_one_global_face() {
    let (_, _, f) = faces_of(k4_with_isolated(0));
    let total: usize = f.corners.iter().map(Vec::len).sum();
    assert_eq!(total, 12);
    assert_eq!(f.count, 4);
    let mut seen = std::collections::HashSet::new();
    for c in f.corners.iter().flatten() {
        assert!(seen.insert(*c));
    }
}

#[test]
fn rejects_non_incident_rotation_edge() {
    let mut v = triangle();
    v["rotations"]["0"] = json!([0, 1]);
    let e = parse(v).unwrap_err();
    assert!(matches!(e, Error::Validation { ref path, .. } if path == "rotations.0"), "{e}");
}

#[test]
fn rejects_cyclic_placement() {
    let mut v = two_triangles(true);
    v["components"][0]["placement"] = json!({"component": 1, "face": {"v": 3, "e_in": 3}});
    let e = parse(v).unwrap_err();
    assert!(e.to_string().contains("cycle"), "{e}");
}

#[test]
fn rejects_bad_shapes() {
    let mut v = triangle();
    v["extra"] = json!(1);
    assert!(parse(v).is_err());
    let mut v = triangle();
    v["rotations"]["0"] = json!([0, 0]);
    assert!(parse(v).is_err());
    let mut v = triangle();
    v["rotations"]["0"] = json!([2, 0]);
    v["rotations"]["1"] = json!([0, 1]);
    v["rotations"]["2"] = json!([1, 2]);
    assert!(parse(v).is_ok());
    let mut v = triangle();
    v["components"][0]["outer_local_face"] = Value::Null;
    assert!(parse(v).is_err());
    let mut v = k4_with_isolated(0);
    v["components"][1]["outer_local_face"] = json!({"v": 4, "e_in": 6});
    assert!(parse(v).is_err());
    let mut v = k4_with_isolated(0);
    v["h_edges"] = json!([0, 1, 2, 3, 4, 5, 6]);
    assert!(parse(v).is_err());
    assert!(parse_instance(b"{not json").is_err());
}

#[test]
fn rejects_non_planar_rotation() {
    // K4 with the rotation at 3 reversed has genus one.
    let mut v = k4_with_isolated(0);
    v["rotations"]["3"] = json!([4, 3, 5]);
    let e = parse(v).unwrap_err();
    assert!(e.to_string().contains("planar"), "{e}");
}

#[test]
fn round_trip_is_byte_exact() {
    for v in [triangle(), two_triangles(true), two_triangles(false), k4_with_isolated(2)] {
        let inst = parse(v).unwrap();
        let bytes = serialize_instance(&inst);
        let again = parse_instance(&bytes).unwrap();
        assert_eq!(inst, again);
        assert_eq!(bytes, serialize_instance(&again));
    }
}

#[test]
fn bridge_shapes() {
    let (inst, h, _) = faces_of(triangle());
    assert!(h_bridges(&inst, &h).is_empty());

    let (inst, h, _) = faces_of(k4_with_isolated(0));
    let b = h_bridges(&inst, &h);
    assert_eq!(b.len(), 1);
    assert_eq!(b[0].kind, BridgeKind::SingleEdge);
    assert_eq!(b[0].attachments, vec![0, 4]);

    let mut v = triangle();
    v["n"] = json!(4);
    v["edges"] = json!([[0, 1], [1, 2], [2, 0], [0, 3], [3, 1]]);
    let (inst, h, _) = faces_of(v);
    let b = h_bridges(&inst, &h);
    assert_eq!(b.len(), 1);
    assert_eq!(b[0].kind, BridgeKind::Component);
    assert_eq!(b[0].inner, vec![3]);
    assert_eq!(b[0].edges, vec![3, 4]);
    assert_eq!(b[0].attachments, vec![0, 1]);
}

fn colors(v: Value) -> Result<Coloring, Infeasible> {
    let (inst, h, f) = faces_of(v);
    let b = h_bridges(&inst, &h);
    color_bridges(&inst, &h, &f, &b)
}

#[test]
fn isolated_vertex_in_wrong_face_is_infeasible() {
    assert_eq!(colors(k4_with_isolated(2)), Err(Infeasible::Bridge(0)));
}

#[test]
fn isolated_vertex_edge_gets_its_face() {
    let (inst, h, f) = faces_of(k4_with_isolated(0));
    let c = colors(k4_with_isolated(0)).unwrap();
    assert_eq!(c.color[6], Some(f.face_of(&h, 0, 0)));
    assert_eq!(f.boundary[c.color[6].unwrap() as usize], vec![0, 1, 3, 4]);
    assert!(c.color[..6].iter().all(Option::is_none));
    assert_eq!(inst.g.m(), 7);
}

#[test]
fn bridge_inside_one_block_is_unrestricted() {
    // A 4-cycle with the chord 0-2 outside H.
    let v = json!({
        "n": 4,
        "edges": [[0, 1], [1, 2], [2, 3], [3, 0], [0, 2]],
        "h_edges": [0, 1, 2, 3],
        "h_isolated": [],
        "rotations": {"0": [0, 3], "1": [1, 0], "2": [2, 1], "3": [3, 2]},
        "components": [{"rep": 0, "outer_local_face": {"v": 0, "e_in": 3}, "placement": "outer"}]
    });
    let c = colors(v).unwrap();
    assert_eq!(c.color[4], None);
}

#[test]
fn constraint_places_restricted_edge_in_its_angle() {
    // Triangle with an isolated H-vertex 3 inside and a pendant vertex 4 at 0.
    let v = json!({
        "n": 5,
        "edges": [[0, 1], [1, 2], [2, 0], [0, 3], [0, 4]],
        "h_edges": [0, 1, 2],
        "h_isolated": [3],
        "rotations": {"0": [0, 2], "1": [1, 0], "2": [2, 1]},
        "components": [
            {"rep": 0, "outer_local_face": {"v": 0, "e_in": 2}, "placement": "outer"},
            {"rep": "iso:3", "outer_local_face": null, "placement": {"component": 0, "face": {"v": 0, "e_in": 0}}}
        ]
    });
    let (inst, h, f) = faces_of(v);
    let b = h_bridges(&inst, &h);
    let col = color_bridges(&inst, &h, &f, &b).unwrap();
    let cons = vertex_constraints(&inst, &h, &f, &col).unwrap();
    let c0 = &cons[0];
    assert_eq!(c0.fixed(), &[0, 2]);
    assert_eq!(c0.restricted, vec![3]);
    assert_eq!(c0.unrestricted, vec![4]);
    let valid: Vec<_> = all_cyclic(&[0, 2, 3, 4]).into_iter().filter(|o| satisfies_constraint(o, c0)).collect();
    // r must follow h1 = 0 before h2 = 2; u goes anywhere.
    for o in all_cyclic(&[0, 2, 3, 4]) {
        let r = o.rotated_to(0).unwrap();
        let pos = |x| r.iter().position(|&y| y == x).unwrap();
        let ok = pos(3) < pos(2);
        assert_eq!(valid.contains(&o), ok, "{:?}", r);
    }
    assert_eq!(valid.len(), 3);
    // vertex 4 is outside H and unconstrained
    assert!(cons[4].fixed().is_empty() && cons[4].restricted.is_empty());
    // vertex 1 has all its edges in H: exactly its rotation
    let ones: Vec<_> = all_cyclic(&[0, 1]).into_iter().filter(|o| satisfies_constraint(o, &cons[1])).collect();
    assert_eq!(ones.len(), 1);
    // the isolated vertex keeps no fixed edges but its edge stays colored
    assert!(cons[3].fixed().is_empty());
    assert_eq!(cons[3].restricted, vec![3]);
}

#[test]
fn edge_between_nested_triangles_lies_in_the_annulus() {
    let mut v = two_triangles(true);
    v["edges"] = json!([[0, 1], [1, 2], [2, 0], [3, 4], [4, 5], [5, 3], [0, 3]]);
    let (inst, h, f) = faces_of(v);
    let b = h_bridges(&inst, &h);
    let col = color_bridges(&inst, &h, &f, &b).unwrap();
    let annulus = f.face_of(&h, 0, 0);
    assert_eq!(col.color[6], Some(annulus));
    assert_eq!(f.face_of(&h, 3, 5), annulus);
    let cons = vertex_constraints(&inst, &h, &f, &col).unwrap();
    assert_eq!(cons[3].restricted, vec![6]);
    assert_eq!(cons[3].color[&6], annulus);
}

#[test]
fn split_into_components() {
    let inst = parse(two_triangles(false)).unwrap();
    let p = prepare(&inst).unwrap().unwrap();
    assert_eq!(p.components.len(), 2);
    assert_eq!(p.components[1].vertices, vec![3, 4, 5]);
    assert_eq!(p.components[1].edges, vec![3, 4, 5]);
    assert_eq!(p.components[1].constraints[0].fixed(), &[0, 2]);

    let inst = parse(triangle()).unwrap();
    assert_eq!(prepare(&inst).unwrap().unwrap().components.len(), 1);
}
