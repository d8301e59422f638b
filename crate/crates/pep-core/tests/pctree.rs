mod common;

use std::collections::BTreeSet;

use common::random::*;
use common::*;
use pep_core::cyclic::CyclicOrder;
use pep_core::pctree::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn set(v: &[u32]) -> BTreeSet<u32> {
    v.iter().copied().collect()
}

fn co(v: &[u32]) -> CyclicOrder {
    CyclicOrder::new(v.to_vec()).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, n: u32) -> Vec<u32> {
    (0..n).filter(|_| rng.gen_bool(0.5)).collect()
}

#[test]
fn new_tree_holds_all_orders() {
    for n in 1..=6 {
        let leaves: Vec<u32> = (0..n).collect();
        let t = pc_new(&leaves).unwrap();
        assert_eq!(pc_enumerate(&t).unwrap(), all_cyclic(&leaves));
    }
    assert!(pc_new(&[]).is_err());
}

#[test]
fn update_keeps_adjacent_orders() {
    let t = pc_new(&[1, 2, 3, 4]).unwrap();
    let u = pc_update(t, &[1, 2]);
    let got = pc_enumerate(&u).unwrap();
    assert_eq!(got.len(), 4);
    assert_eq!(got, filter_consecutive(&all_cyclic(&[1, 2, 3, 4]), &set(&[1, 2])));
}

#[test]
fn cnode_rejects_far_pair() {
    let t = pc_cnode(&[1, 2, 3, 4]).unwrap();
    assert!(pc_update(t, &[1, 3]).is_null());
}

#[test]
fn eta_examples() {
    let t = pc_new(&[1, 2, 3, 4]).unwrap();
    assert_eq!(pc_eta(&t, &[1, 2]).unwrap().class, EtaClass::NotConsecutive);
    let t = pc_update(pc_new(&[1, 2, 3, 4]).unwrap(), &[1, 2]);
    let e = pc_eta(&t, &[1, 2]).unwrap();
    assert_eq!(e.class, EtaClass::SingleEdge);
    assert_eq!(e.edges, vec![set(&[1, 2])]);
    let t = pc_cnode(&[1, 2, 3, 4, 5]).unwrap();
    let e = pc_eta(&t, &[2, 3]).unwrap();
    assert!(matches!(e.class, EtaClass::AroundCNode { arc: 2, .. }));
    assert!(pc_eta(&t, &[]).is_err());
}

#[test]
fn split_cnode_example() {
    let t = pc_cnode(&[1, 2, 3, 4, 5]).unwrap();
    let (k, o, info) = pc_split(t, &[2, 3], 9).unwrap();
    assert!(matches!(info, SplitInfo::CNode { keep: Some(_), .. }));
    let ek = pc_enumerate(&k).unwrap();
    assert_eq!(ek, [co(&[1, 9, 4, 5]), co(&[1, 5, 4, 9])].into_iter().collect());
    assert_eq!(pc_enumerate(&o).unwrap(), [co(&[9, 2, 3]), co(&[9, 3, 2])].into_iter().collect());
}

#[test]
fn split_all_but_one() {
    let t = pc_new(&[1, 2, 3, 4]).unwrap();
    let (k, o, info) = pc_split(t, &[1, 2, 3], 9).unwrap();
    assert_eq!(info, SplitInfo::SingleEdge);
    assert_eq!(k.leaves(), set(&[4, 9]));
    assert_eq!(o.leaves(), set(&[1, 2, 3, 9]));
}

#[test]
fn split_requires_consecutive() {
    let t = pc_new(&[1, 2, 3, 4]).unwrap();
    assert!(matches!(pc_split(t, &[1, 2], 9), Err(pep_core::Error::NotConsecutive)));
}

#[test]
fn merge_examples() {
    let a = pc_new(&[1, 2, 9]).unwrap();
    let b = pc_new(&[9, 3, 4]).unwrap();
    let m = pc_merge(a, b, 9).unwrap();
    let want: BTreeSet<_> = all_cyclic(&[1, 2, 3, 4])
        .into_iter()
        .filter(|o| consecutive(o.as_slice(), &set(&[1, 2])) && consecutive(o.as_slice(), &set(&[3, 4])))
        .collect();
    assert_eq!(pc_enumerate(&m).unwrap(), want);
    let a = pc_new(&[1, 2, 3, 9]).unwrap();
    let m = pc_merge(a, pc_new(&[9]).unwrap(), 9).unwrap();
    assert_eq!(m.leaves(), set(&[1, 2, 3]));
    let a = pc_new(&[1, 2, 9]).unwrap();
    let b = pc_new(&[9, 2, 4]).unwrap();
    assert!(matches!(pc_merge(a, b, 9), Err(pep_core::Error::InvalidMerge)));
}

#[test]
fn enumerate_bound_and_null() {
    let leaves: Vec<u32> = (0..11).collect();
    assert!(matches!(pc_enumerate(&pc_new(&leaves).unwrap()), Err(pep_core::Error::TooLarge(_))));
    assert!(pc_enumerate(&PCTree::null()).unwrap().is_empty());
    assert_eq!(pc_enumerate(&pc_cnode(&[1, 2, 3]).unwrap()).unwrap().len(), 2);
}

#[test]
fn intersect_examples() {
    let a = pc_cnode(&[1, 2, 3, 4]).unwrap();
    let b = pc_cnode(&[1, 3, 2, 4]).unwrap();
    let want: BTreeSet<_> = pc_enumerate(&a).unwrap().intersection(&pc_enumerate(&b).unwrap()).cloned().collect();
    let got = pc_intersect(a.clone(), b).unwrap();
    assert_eq!(pc_enumerate(&got).unwrap(), want);
    let free = pc_new(&[1, 2, 3, 4]).unwrap();
    assert_eq!(pc_enumerate(&pc_intersect(free, a.clone()).unwrap()).unwrap(), pc_enumerate(&a).unwrap());
    assert_eq!(pc_enumerate(&pc_intersect(a.clone(), a.clone()).unwrap()).unwrap(), pc_enumerate(&a).unwrap());
}

#[test]
fn dot_mentions_every_leaf() {
    let t = pc_update(pc_new(&[1, 2, 3, 4, 5]).unwrap(), &[1, 2]);
    let d = t.to_dot();
    for l in 1..=5 {
        assert!(d.contains(&format!("label=\"{l}\"")));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn update_is_a_filter(seed in any::<u64>(), n in 3u32..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, n);
        let a = random_subset(&mut rng, n);
        let before = pc_enumerate(&t).unwrap();
        let after = pc_enumerate(&pc_update(t, &a)).unwrap();
        prop_assert_eq!(after, filter_consecutive(&before, &a.iter().copied().collect()));
    }

    #[test]
    fn split_projects_and_merge_restores(seed in any::<u64>(), n in 3u32..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(&mut rng, n);
        let mut a = random_subset(&mut rng, n);
        if a.is_empty() || a.len() as u32 == n { a = vec![0]; }
        let t = pc_update(t, &a);
        if t.is_null() { return Ok(()); }
        let aset: BTreeSet<u32> = a.iter().copied().collect();
        let rest: BTreeSet<u32> = (0..n).filter(|x| !aset.contains(x)).collect();
        let ell = 100;
        let omega = pc_enumerate(&t).unwrap();
        let (k, o, info) = pc_split(t, &a, ell).unwrap();
        let ok = pc_enumerate(&k).unwrap();
        let oo = pc_enumerate(&o).unwrap();
        let want_k: BTreeSet<_> = omega.iter().map(|s| contract_to(s.as_slice(), &aset, ell)).collect();
        let want_o: BTreeSet<_> = omega.iter().map(|s| contract_to(s.as_slice(), &rest, ell)).collect();
        prop_assert_eq!(&ok, &want_k);
        prop_assert_eq!(&oo, &want_o);
        let merged = pc_enumerate(&pc_merge(k, o, ell).unwrap()).unwrap();
        let glued: BTreeSet<_> = ok.iter().flat_map(|s| oo.iter().map(move |u| glue(s, u, ell))).collect();
        prop_assert_eq!(&merged, &glued);
        if info == SplitInfo::SingleEdge {
            prop_assert_eq!(&merged, &omega);
        } else {
            prop_assert!(omega.is_subset(&merged) && omega.len() < merged.len());
        }
    }

    #[test]
    fn intersect_is_set_intersection(seed in any::<u64>(), n in 3u32..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_tree(&mut rng, n);
        let b = random_tree(&mut rng, n);
        let want: BTreeSet<_> = pc_enumerate(&a).unwrap().intersection(&pc_enumerate(&b).unwrap()).cloned().collect();
        prop_assert_eq!(pc_enumerate(&pc_intersect(a, b).unwrap()).unwrap(), want);
    }
}
