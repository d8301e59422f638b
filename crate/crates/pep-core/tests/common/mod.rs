#![allow(dead_code)]

use std::collections::BTreeSet;

pub mod random;

use pep_core::cyclic::CyclicOrder;

/// Every cyclic order of `elems`, written from scratch by fixing the first element.
pub fn all_cyclic(elems: &[u32]) -> BTreeSet<CyclicOrder> {
    let mut out = BTreeSet::new();
    if elems.is_empty() {
        return out;
    }
    let mut rest = elems[1..].to_vec();
    let k = rest.len();
    heap_permute(&mut rest, k, &mut |p| {
        let mut v = vec![elems[0]];
        v.extend_from_slice(p);
        out.insert(CyclicOrder::new(v).unwrap());
    });
    out
}

fn heap_permute(v: &mut Vec<u32>, k: usize, f: &mut impl FnMut(&[u32])) {
    if k <= 1 {
        f(v);
        return;
    }
    for i in 0..k {
        heap_permute(v, k - 1, f);
        if k % 2 == 0 {
            v.swap(i, k - 1);
        } else {
            v.swap(0, k - 1);
        }
    }
}

/// Whether the members of `a` occupy one contiguous stretch of the cycle.
pub fn consecutive(order: &[u32], a: &BTreeSet<u32>) -> bool {
    let n = order.len();
    if a.is_empty() || a.len() >= n {
        return true;
    }
    let starts = (0..n).filter(|&i| a.contains(&order[i]) && !a.contains(&order[(i + n - 1) % n])).count();
    starts == 1
}

pub fn filter_consecutive(orders: &BTreeSet<CyclicOrder>, a: &BTreeSet<u32>) -> BTreeSet<CyclicOrder> {
    orders.iter().filter(|o| consecutive(o.as_slice(), a)).cloned().collect()
}

/// Replaces the elements of `a` by `ell`, keeping one copy.
pub fn contract_to(order: &[u32], a: &BTreeSet<u32>, ell: u32) -> CyclicOrder {
    let n = order.len();
    let start = (0..n).find(|&i| a.contains(&order[i]) && !a.contains(&order[(i + n - 1) % n])).unwrap_or(0);
    let mut v = Vec::new();
    let mut placed = false;
    for k in 0..n {
        let x = order[(start + k) % n];
        if a.contains(&x) {
            if !placed {
                v.push(ell);
                placed = true;
            }
        } else {
            v.push(x);
        }
    }
    CyclicOrder::new(v).unwrap()
}

pub fn reversed(o: &CyclicOrder) -> CyclicOrder {
    let mut v = o.as_slice().to_vec();
    v.reverse();
    CyclicOrder::new(v).unwrap()
}

/// Glues two orders at the shared element `ell`.
pub fn glue(s: &CyclicOrder, t: &CyclicOrder, ell: u32) -> CyclicOrder {
    let a = s.rotated_to(ell).unwrap();
    let b = t.rotated_to(ell).unwrap();
    let mut v: Vec<u32> = a[1..].to_vec();
    v.extend_from_slice(&b[1..]);
    CyclicOrder::new(v).unwrap()
}

/// Independent check of a colored rotation: the fixed elements appear in the
/// cyclic order `rho` and every restricted element sits in an angle whose
/// opening fixed element carries its color.
pub fn colored_ok(order: &[u32], rho: &[u32], restricted: &[u32], color: &std::collections::BTreeMap<u32, u32>) -> bool {
    if rho.is_empty() {
        return true;
    }
    let n = order.len();
    let at = |e: u32| order.iter().position(|&x| x == e).unwrap();
    for i in 0..rho.len() {
        let (a, b) = (rho[i], rho[(i + 1) % rho.len()]);
        let mut k = (at(a) + 1) % n;
        while !rho.contains(&order[k]) {
            k = (k + 1) % n;
        }
        if order[k] != b {
            return false;
        }
    }
    restricted.iter().all(|&r| {
        let mut k = at(r);
        while !rho.contains(&order[k]) {
            k = (k + n - 1) % n;
        }
        color[&order[k]] == color[&r]
    })
}

/// Calls `f` on every rotation system of `g` whose order at each vertex
/// passes `keep`, stopping early when `f` returns true. Returns whether it
/// stopped early.
pub fn any_rotation(
    g: &pep_core::graph::Graph,
    keep: impl Fn(u32, &CyclicOrder) -> bool,
    mut f: impl FnMut(&pep_core::graph::RotationSystem) -> bool,
) -> bool {
    let choices: Vec<Vec<Vec<u32>>> = (0..g.n())
        .map(|v| {
            let inc = g.incident(v);
            if inc.is_empty() {
                return vec![vec![]];
            }
            all_cyclic(inc).into_iter().filter(|o| keep(v, o)).map(|o| o.as_slice().to_vec()).collect()
        })
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return false;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let rot: Vec<Vec<u32>> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        if f(&pep_core::graph::RotationSystem::new(g, rot).unwrap()) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Whether `g` has a planar rotation system meeting every vertex constraint.
pub fn brute_constrained(g: &pep_core::graph::Graph, cons: &[pep_core::cctree::ColorConstraint]) -> bool {
    any_rotation(
        g,
        |v, o| {
            let c = &cons[v as usize];
            colored_ok(o.as_slice(), c.rho.as_slice(), &c.restricted, &c.color)
        },
        |rs| pep_core::graph::euler_planar(g, rs),
    )
}
