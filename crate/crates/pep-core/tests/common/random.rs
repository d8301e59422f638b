//! Random trees and constraints shared by the tree tests and acceptance.

use std::collections::{BTreeMap, BTreeSet};

use pep_core::cctree::*;
use pep_core::cyclic::CyclicOrder;
use pep_core::pctree::{pc_new, pc_update, PCTree};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{all_cyclic, colored_ok, filter_consecutive, glue};

/// Label of the glue leaf in merged random trees.
pub const ELL: u32 = 100;

fn set(v: &[u32]) -> BTreeSet<u32> {
    v.iter().copied().collect()
}

/// A tree built by restricting a fresh P-node with random consecutive sets.
pub fn random_tree(rng: &mut ChaCha8Rng, n: u32) -> PCTree {
    let leaves: Vec<u32> = (0..n).collect();
    let mut t = pc_new(&leaves).unwrap();
    for _ in 0..rng.gen_range(0..5) {
        let k = rng.gen_range(2..n.max(3));
        let mut l = leaves.clone();
        l.shuffle(rng);
        let next = pc_update(t.clone(), &l[..k as usize]);
        if !next.is_null() {
            t = next;
        }
    }
    t
}

/// Orders of a constraint computed by brute force.
pub fn brute(c: &ColorConstraint) -> BTreeSet<CyclicOrder> {
    all_cyclic(&c.elements()).into_iter().filter(|o| colored_ok(o.as_slice(), c.fixed(), &c.restricted, &c.color)).collect()
}

pub fn random_constraint(rng: &mut ChaCha8Rng, elems: &[u32]) -> ColorConstraint {
    let ncol = rng.gen_range(1..=3);
    let mut v = elems.to_vec();
    v.shuffle(rng);
    let (mut rho, mut r, mut u) = (Vec::new(), Vec::new(), Vec::new());
    let mut color = BTreeMap::new();
    let pf = rng.gen_range(0.0..1.0);
    for e in v {
        let x: f64 = rng.gen();
        if x < pf {
            rho.push(e);
            color.insert(e, rng.gen_range(0..ncol));
        } else if x < pf + (1.0 - pf) / 2.0 {
            r.push(e);
            color.insert(e, rng.gen_range(0..ncol));
        } else {
            u.push(e);
        }
    }
    ColorConstraint::new(rho, r, u, color).unwrap()
}

/// A random tree over `0..n` with its orders computed by brute force.
pub fn random_cc(rng: &mut ChaCha8Rng, n: u32) -> (CCPCTree, BTreeSet<CyclicOrder>) {
    let leaves: Vec<u32> = (0..n).collect();
    let (mut t, mut om) = if n >= 4 && rng.gen_bool(0.5) {
        let k = rng.gen_range(1..n) as usize;
        let mut a = leaves[..k].to_vec();
        let mut b = leaves[k..].to_vec();
        a.push(ELL);
        b.push(ELL);
        let ca = random_constraint(rng, &a);
        let cb = random_constraint(rng, &b);
        let ta = cc_from_constraint(&ca).unwrap();
        let tb = cc_from_constraint(&cb).unwrap();
        let (oa, ob) = (brute(&ca), brute(&cb));
        let om: BTreeSet<CyclicOrder> = oa.iter().flat_map(|x| ob.iter().map(move |y| glue(x, y, ELL))).collect();
        if ta.is_null() || tb.is_null() {
            assert!(om.is_empty());
            let c = random_constraint(rng, &leaves);
            (cc_from_constraint(&c).unwrap(), brute(&c))
        } else {
            (cc_merge(ta, tb, ELL).unwrap(), om)
        }
    } else {
        let c = random_constraint(rng, &leaves);
        (cc_from_constraint(&c).unwrap(), brute(&c))
    };
    for _ in 0..rng.gen_range(0..4) {
        let mut l = leaves.clone();
        l.shuffle(rng);
        let a = &l[..rng.gen_range(2..n.max(3)) as usize];
        let next = cc_update(t.clone(), a);
        if !next.is_null() {
            om = filter_consecutive(&om, &set(a));
            t = next;
        }
    }
    (t, om)
}

pub fn enumerate(t: &CCPCTree) -> BTreeSet<CyclicOrder> {
    cc_enumerate(t).unwrap()
}
