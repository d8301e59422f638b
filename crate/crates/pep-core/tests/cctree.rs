mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::random::*;
use common::*;
use pep_core::cctree::*;
use pep_core::cyclic::CyclicOrder;
use pep_core::pctree::{pc_enumerate, pc_update, NodeRef, SplitInfo};
use pep_core::Error;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CUT: u32 = 99;

fn co(v: &[u32]) -> CyclicOrder {
    CyclicOrder::new(v.to_vec()).unwrap()
}

fn set(v: &[u32]) -> BTreeSet<u32> {
    v.iter().copied().collect()
}

fn cons(rho: &[u32], r: &[(u32, u32)], u: &[u32], fcol: &[u32]) -> ColorConstraint {
    let mut color = BTreeMap::new();
    for (i, &h) in rho.iter().enumerate() {
        color.insert(h, fcol[i]);
    }
    for &(e, c) in r {
        color.insert(e, c);
    }
    let r: Vec<u32> = r.iter().map(|p| p.0).collect();
    ColorConstraint::new(rho.to_vec(), r, u.to_vec(), color).unwrap()
}

#[test]
fn free_constraint_allows_everything() {
    let t = cc_from_constraint(&ColorConstraint::free(&[1, 2, 3])).unwrap();
    assert_eq!(enumerate(&t), all_cyclic(&[1, 2, 3]));
}

#[test]
fn restricted_edge_stays_in_its_angle() {
    let (h1, h2, r, u) = (1, 2, 3, 4);
    let c = cons(&[h1, h2], &[(r, 0)], &[u], &[0, 1]);
    let got = enumerate(&cc_from_constraint(&c).unwrap());
    assert!(got.contains(&co(&[h1, r, h2, u])));
    assert!(!got.contains(&co(&[h1, h2, r, u])));
    assert_eq!(got, brute(&c));
    assert!(got.iter().all(|o| satisfies_constraint(o, &c)));
}

#[test]
fn all_fixed_is_one_order() {
    let c = cons(&[1, 2, 3], &[], &[], &[0, 0, 0]);
    let t = cc_from_constraint(&c).unwrap();
    assert_eq!(enumerate(&t), BTreeSet::from([co(&[1, 2, 3])]));
    assert!(t.inner_nodes().iter().any(|p| p.1 == 'F'));
}

#[test]
fn missing_angle_color_surfaces_late() {
    let c = cons(&[1, 2], &[(3, 7)], &[], &[0, 1]);
    let t = cc_from_constraint(&c).unwrap();
    assert!(!t.is_null());
    assert!(enumerate(&t).is_empty());
}

#[test]
fn fixed_cnode_rejects_far_pair() {
    let t = cc_from_constraint(&cons(&[1, 2, 3, 4], &[], &[], &[0; 4])).unwrap();
    assert!(cc_update(t, &[1, 3]).is_null());
}

#[test]
fn colors_block_consecutive_pair() {
    let c = cons(&[1, 2], &[(3, 0), (4, 1)], &[], &[0, 1]);
    let t = cc_from_constraint(&c).unwrap();
    assert_eq!(enumerate(&t), BTreeSet::from([co(&[1, 3, 2, 4])]));
    assert!(cc_update(t, &[3, 4]).is_null());
}

#[test]
fn ordinary_tree_updates_like_pc() {
    let t = cc_from_constraint(&ColorConstraint::free(&[0, 1, 2, 3, 4])).unwrap();
    let u = cc_update(t.clone(), &[1, 2]);
    let p = pc_update(cc_project(t), &[1, 2]);
    assert_eq!(enumerate(&u), pc_enumerate(&p).unwrap());
}

#[test]
fn split_node_cases() {
    // one fixed edge on each side
    let c = cons(&[1, 2], &[], &[3, 4], &[5, 6]);
    let t = cc_from_constraint(&c).unwrap();
    let root = t.root().unwrap();
    let (t2, _, _) = cc_split_node(t, root, &[1, 3]).unwrap();
    assert_eq!(enumerate(&t2), filter_consecutive(&brute(&c), &set(&[1, 3])));
    assert!(t2.counters_consistent());

    // only unrestricted edges split off
    let c = cons(&[1, 2], &[(3, 5)], &[4, 7], &[5, 6]);
    let t = cc_from_constraint(&c).unwrap();
    let root = t.root().unwrap();
    let (t2, _, _) = cc_split_node(t, root, &[4, 7]).unwrap();
    assert_eq!(enumerate(&t2), filter_consecutive(&brute(&c), &set(&[4, 7])));

    // restricted edges of two colors without a fixed edge
    let c = cons(&[1, 2], &[(3, 5), (4, 6)], &[], &[5, 6]);
    let t = cc_from_constraint(&c).unwrap();
    let root = t.root().unwrap();
    assert!(matches!(cc_split_node(t, root, &[3, 4]), Err(Error::ImpossibleRestriction)));

    // fixed edges of the moved side must be consecutive in the fixed order
    let c = cons(&[1, 2, 3, 4], &[], &[5], &[0; 4]);
    let t = cc_from_constraint(&c).unwrap();
    let root = t.root().unwrap();
    assert!(matches!(cc_split_node(t, root, &[1, 3]), Err(Error::InvalidInput(_))));
}

#[test]
fn split_and_merge_keep_fixed_orientation() {
    let c = cons(&[1, 2, 3, 4, 5], &[], &[], &[0; 5]);
    let t = cc_from_constraint(&c).unwrap();
    let (keep, off, info) = cc_split(t, &[2, 3], CUT).unwrap();
    assert!(matches!(info, SplitInfo::CNode { .. }));
    assert_eq!(enumerate(&keep), BTreeSet::from([co(&[1, CUT, 4, 5])]));
    assert_eq!(enumerate(&off), BTreeSet::from([co(&[2, 3, CUT])]));
    let m = cc_merge(keep, off, CUT).unwrap();
    assert_eq!(enumerate(&m), BTreeSet::from([co(&[1, 2, 3, 4, 5])]));
}

#[test]
fn split_all_but_one_leaves_two() {
    let t = cc_from_constraint(&ColorConstraint::free(&[1, 2, 3, 4])).unwrap();
    let (keep, _, _) = cc_split(t, &[2, 3, 4], CUT).unwrap();
    assert_eq!(keep.leaves(), set(&[1, CUT]));
}

#[test]
fn intersect_examples() {
    let t = cc_from_constraint(&cons(&[1, 2, 3, 4], &[], &[], &[0; 4])).unwrap();
    let free = cc_from_constraint(&ColorConstraint::free(&[1, 2, 3, 4])).unwrap();
    assert!(cc_restricted_intersect_nonempty(&t, &free).unwrap());
    let s = cc_from_constraint(&cons(&[3, 2, 1], &[], &[4], &[0; 3])).unwrap();
    assert!(cc_restricted_intersect_nonempty(&t, &s).unwrap());
    let s = cc_from_constraint(&cons(&[1, 2, 3], &[], &[4], &[0; 3])).unwrap();
    assert!(!cc_restricted_intersect_nonempty(&t, &s).unwrap());
    assert!(!cc_restricted_intersect_nonempty(&CCPCTree::null(), &s).unwrap());
    let other = cc_from_constraint(&ColorConstraint::free(&[1, 2, 3, 5])).unwrap();
    assert!(cc_restricted_intersect_nonempty(&t, &other).is_err());
}

#[test]
fn probe_and_fix_examples() {
    let t = cc_update(cc_from_constraint(&ColorConstraint::free(&[1, 2, 3, 4])).unwrap(), &[1, 2]);
    let t = cc_update(t, &[2, 3]);
    let t = cc_update(t, &[3, 4]);
    let (node, kind) = t.inner_nodes()[0];
    assert_eq!(kind, 'C');
    assert_eq!(enumerate(&t).len(), 2);
    let free = cc_from_constraint(&ColorConstraint::free(&[1, 2, 3, 4])).unwrap();
    assert_eq!(cc_probe_flip(&t, &free, node).unwrap(), FlipVerdict::Free);
    let s = cc_from_constraint(&cons(&[4, 3, 2, 1], &[], &[], &[0; 4])).unwrap();
    let v = cc_probe_flip(&t, &s, node).unwrap();
    let FlipVerdict::Fixed(o) = v else { panic!("{v:?}") };
    let fixed = cc_fix_cnode(t.clone(), node, o).unwrap();
    assert_eq!(enumerate(&fixed), BTreeSet::from([co(&[1, 2, 3, 4])]));
    let s = cc_from_constraint(&cons(&[1, 3, 2, 4], &[], &[], &[0; 4])).unwrap();
    assert_eq!(cc_probe_flip(&t, &s, node).unwrap(), FlipVerdict::Empty);
    assert!(cc_fix_cnode(fixed, node, o).is_err());
}

#[test]
fn project_drops_constraints() {
    let t = cc_from_constraint(&cons(&[1, 2, 3], &[], &[], &[0; 3])).unwrap();
    assert_eq!(pc_enumerate(&cc_project(t)).unwrap().len(), 2);
    let c = cons(&[1, 2], &[(3, 0)], &[4], &[0, 1]);
    let t = cc_from_constraint(&c).unwrap();
    assert_eq!(pc_enumerate(&cc_project(t)).unwrap(), all_cyclic(&[1, 2, 3, 4]));
}

#[test]
fn enumerate_null_and_bound() {
    assert!(enumerate(&CCPCTree::null()).is_empty());
    let big: Vec<u32> = (0..10).collect();
    let t = cc_from_constraint(&ColorConstraint::free(&big)).unwrap();
    assert!(matches!(cc_enumerate(&t), Err(Error::TooLarge(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn update_is_a_filter(seed in any::<u64>(), n in 3u32..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, om) = random_cc(&mut rng, n);
        prop_assert_eq!(&enumerate(&t), &om);
        prop_assert!(t.counters_consistent());
        let a: Vec<u32> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let u = cc_update(t.clone(), &a);
        prop_assert_eq!(enumerate(&u), filter_consecutive(&om, &set(&a)));
        prop_assert!(u.counters_consistent());
        if !u.is_null() {
            let lhs = pc_enumerate(&cc_project(u)).unwrap();
            let rhs = pc_enumerate(&pc_update(cc_project(t), &a)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn split_projects_and_merge_restores(seed in any::<u64>(), n in 3u32..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, om) = random_cc(&mut rng, n);
        let Some(tau) = om.iter().nth(rng.gen_range(0..om.len().max(1))) else { return Ok(()) };
        let v = tau.as_slice();
        let k = rng.gen_range(1..v.len());
        let s = rng.gen_range(0..v.len());
        let a: Vec<u32> = (0..k).map(|i| v[(s + i) % v.len()]).collect();
        let a_set = set(&a);
        let rest: BTreeSet<u32> = v.iter().copied().filter(|x| !a_set.contains(x)).collect();
        let t = cc_update(t, &a);
        let om = filter_consecutive(&om, &a_set);
        let (keep, off, info) = cc_split(t, &a, CUT).unwrap();
        let want_keep: BTreeSet<CyclicOrder> = om.iter().map(|o| contract_to(o.as_slice(), &a_set, CUT)).collect();
        let want_off: BTreeSet<CyclicOrder> = om.iter().map(|o| contract_to(o.as_slice(), &rest, CUT)).collect();
        prop_assert_eq!(enumerate(&keep), want_keep);
        prop_assert_eq!(enumerate(&off), want_off);
        prop_assert!(keep.counters_consistent() && off.counters_consistent());
        let (wk, wo) = (enumerate(&keep), enumerate(&off));
        let glued: BTreeSet<CyclicOrder> = wk.iter().flat_map(|x| wo.iter().map(move |y| glue(x, y, CUT))).collect();
        prop_assert!(glued.is_superset(&om));
        if let SplitInfo::CNode { keep: Some(k), off: o } = info {
            let kind = |t: &CCPCTree, x| t.inner_nodes().into_iter().find(|p| p.0 == x).unwrap().1;
            if kind(&keep, k) == 'C' {
                let mut paired = BTreeSet::new();
                for orient in [Orientation::AsIs, Orientation::Reversed] {
                    let a = enumerate(&cc_fix_cnode(keep.clone(), k, orient).unwrap());
                    let b = enumerate(&cc_fix_cnode(off.clone(), o, orient).unwrap());
                    paired.extend(a.iter().flat_map(|x| b.iter().map(move |y| glue(x, y, CUT))));
                }
                prop_assert_eq!(&paired, &om);
            } else {
                prop_assert_eq!(&glued, &om);
            }
        }
        let m = cc_merge(keep, off, CUT).unwrap();
        let wm = enumerate(&m);
        if info == SplitInfo::SingleEdge {
            prop_assert_eq!(&wm, &om);
        }
        prop_assert_eq!(wm, glued);
    }

    #[test]
    fn intersect_and_probe_match_enumeration(seed in any::<u64>(), n in 3u32..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, om) = random_cc(&mut rng, n);
        let mut leaves: Vec<u32> = (0..n).collect();
        if t.leaves().contains(&ELL) {
            leaves.push(ELL);
        }
        leaves.shuffle(&mut rng);
        let f = rng.gen_range(0..=leaves.len());
        let fcol = vec![0; f];
        let c = cons(&leaves[..f], &[], &leaves[f..], &fcol);
        let s = cc_from_constraint(&c).unwrap();
        let rev: BTreeSet<CyclicOrder> = brute(&c).iter().map(reversed).collect();
        let hit = |w: &BTreeSet<CyclicOrder>| w.iter().any(|o| rev.contains(o));
        prop_assert_eq!(cc_restricted_intersect_nonempty(&t, &s).unwrap(), hit(&om));
        for (node, kind) in t.inner_nodes() {
            if kind != 'C' {
                continue;
            }
            let w0 = enumerate(&cc_fix_cnode(t.clone(), node, Orientation::AsIs).unwrap());
            let w1 = enumerate(&cc_fix_cnode(t.clone(), node, Orientation::Reversed).unwrap());
            prop_assert!(w0.is_disjoint(&w1));
            prop_assert_eq!(w0.union(&w1).cloned().collect::<BTreeSet<_>>(), om.clone());
            let want = match (hit(&w0), hit(&w1)) {
                (false, false) => FlipVerdict::Empty,
                (true, true) => FlipVerdict::Free,
                (true, false) => FlipVerdict::Fixed(Orientation::AsIs),
                (false, true) => FlipVerdict::Fixed(Orientation::Reversed),
            };
            prop_assert_eq!(cc_probe_flip(&t, &s, node).unwrap(), want);
        }
    }

    #[test]
    fn restricted_leaves_of_the_star_are_placed(seed in any::<u64>(), n in 3u32..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let leaves: Vec<u32> = (0..n).collect();
        let mut t = cc_from_constraint(&ColorConstraint::free(&leaves)).unwrap();
        for _ in 0..rng.gen_range(0..4) {
            let mut l = leaves.clone();
            l.shuffle(&mut rng);
            let next = cc_update(t.clone(), &l[..rng.gen_range(2..n) as usize]);
            if !next.is_null() {
                t = next;
            }
        }
        let cnodes: Vec<NodeRef> = t.inner_nodes().into_iter().filter(|p| p.1 == 'C').map(|p| p.0).collect();
        if let Some(&x) = cnodes.first() {
            if rng.gen_bool(0.5) {
                t = cc_fix_cnode(t, x, Orientation::AsIs).unwrap();
            }
        }
        let om = enumerate(&t);
        let mut l = leaves.clone();
        l.shuffle(&mut rng);
        let f = rng.gen_range(0..=l.len());
        let fcol: Vec<u32> = (0..f).map(|_| rng.gen_range(0..2)).collect();
        let q = rng.gen_range(f..=l.len());
        let restricted: Vec<(u32, u32)> = l[f..q].iter().map(|&e| (e, rng.gen_range(0..2))).collect();
        let c = cons(&l[..f], &restricted, &l[q..], &fcol);
        let s = cc_from_constraint(&c).unwrap();
        prop_assume!(!s.is_null());
        let rev: BTreeSet<CyclicOrder> = brute(&c).iter().map(reversed).collect();
        let hit = |w: &BTreeSet<CyclicOrder>| w.iter().any(|o| rev.contains(o));
        prop_assert_eq!(cc_restricted_intersect_nonempty(&t, &s).unwrap(), hit(&om));
        for (node, kind) in t.inner_nodes() {
            if kind != 'C' || cc_fix_cnode(t.clone(), node, Orientation::AsIs).is_err() {
                continue;
            }
            let w0 = enumerate(&cc_fix_cnode(t.clone(), node, Orientation::AsIs).unwrap());
            let w1 = enumerate(&cc_fix_cnode(t.clone(), node, Orientation::Reversed).unwrap());
            let want = match (hit(&w0), hit(&w1)) {
                (false, false) => FlipVerdict::Empty,
                (true, true) => FlipVerdict::Free,
                (true, false) => FlipVerdict::Fixed(Orientation::AsIs),
                (false, true) => FlipVerdict::Fixed(Orientation::Reversed),
            };
            prop_assert_eq!(cc_probe_flip(&t, &s, node).unwrap(), want);
        }
    }
}
