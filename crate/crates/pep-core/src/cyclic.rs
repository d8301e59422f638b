//! Cyclic orders over opaque integer elements.
//!
//! Two orders are equal when one is a rotation of the other. A reversed
//! order is a different order.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

pub type Elem = u32;

/// One representative rotation of a cyclic order.
#[derive(Clone, Default)]
pub struct CyclicOrder {
    elems: Vec<Elem>,
}

impl CyclicOrder {
    /// Builds an order from a representative. Fails on repeated elements.
    pub fn new(elems: Vec<Elem>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(elems.len());
        for &e in &elems {
            if !seen.insert(e) {
                return Err(Error::InvalidElement);
            }
        }
        Ok(CyclicOrder { elems })
    }

    pub(crate) fn from_vec_unchecked(elems: Vec<Elem>) -> Self {
        debug_assert!(CyclicOrder::new(elems.clone()).is_ok());
        CyclicOrder { elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// The stored representative.
    pub fn as_slice(&self) -> &[Elem] {
        &self.elems
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.elems.contains(&e)
    }

    fn position(&self, e: Elem) -> Option<usize> {
        self.elems.iter().position(|&x| x == e)
    }

    /// The representative starting at `e`.
    pub fn rotated_to(&self, e: Elem) -> Option<Vec<Elem>> {
        let p = self.position(e)?;
        let mut v = Vec::with_capacity(self.elems.len());
        v.extend_from_slice(&self.elems[p..]);
        v.extend_from_slice(&self.elems[..p]);
        Some(v)
    }

    /// Element following `e`.
    pub fn succ(&self, e: Elem) -> Option<Elem> {
        let p = self.position(e)?;
        Some(self.elems[(p + 1) % self.elems.len()])
    }

    /// Element preceding `e`.
    pub fn pred(&self, e: Elem) -> Option<Elem> {
        let p = self.position(e)?;
        let n = self.elems.len();
        Some(self.elems[(p + n - 1) % n])
    }
}

/// Rotation starting at the least element.
pub fn canonical(order: &CyclicOrder) -> CyclicOrder {
    match order.elems.iter().min() {
        None => CyclicOrder::default(),
        Some(&m) => CyclicOrder { elems: order.rotated_to(m).unwrap() },
    }
}

pub fn reverse(order: &CyclicOrder) -> CyclicOrder {
    let mut elems = order.elems.clone();
    elems.reverse();
    CyclicOrder { elems }
}

/// Merges `[α ℓ]` and `[ℓ β]` into `[α β]`.
pub fn merge_orders(sigma: &CyclicOrder, tau: &CyclicOrder, ell: Elem) -> Result<CyclicOrder> {
    let left: HashSet<Elem> = sigma.elems.iter().copied().collect();
    let shared: Vec<Elem> = tau.elems.iter().copied().filter(|e| left.contains(e)).collect();
    if shared != [ell] {
        return Err(Error::InvalidMerge);
    }
    let s = sigma.rotated_to(ell).unwrap();
    let t = tau.rotated_to(ell).unwrap();
    let mut out = Vec::with_capacity(s.len() + t.len() - 2);
    out.extend_from_slice(&s[1..]);
    out.extend_from_slice(&t[1..]);
    Ok(CyclicOrder { elems: out })
}

/// True iff the members of `subset` occupy one cyclic arc.
pub fn is_consecutive(order: &CyclicOrder, subset: &HashSet<Elem>) -> bool {
    let n = order.elems.len();
    let k = order.elems.iter().filter(|e| subset.contains(e)).count();
    if k <= 1 || k + 1 >= n {
        return true;
    }
    // count arc starts: members whose predecessor is not a member
    let starts = (0..n).filter(|&i| subset.contains(&order.elems[i]) && !subset.contains(&order.elems[(i + n - 1) % n])).count();
    starts == 1
}

/// Subsequence of the members of `subset`.
pub fn project(order: &CyclicOrder, subset: &HashSet<Elem>) -> CyclicOrder {
    CyclicOrder { elems: order.elems.iter().copied().filter(|e| subset.contains(e)).collect() }
}

/// Replaces the consecutive set `subset` by the single element `a`.
pub fn contract(order: &CyclicOrder, subset: &HashSet<Elem>, a: Elem) -> Result<CyclicOrder> {
    if order.contains(a) {
        return Err(Error::InvalidElement);
    }
    let n = order.elems.len();
    let k = order.elems.iter().filter(|e| subset.contains(e)).count();
    if k == 0 {
        return Err(Error::NotConsecutive);
    }
    if k == n {
        return Ok(CyclicOrder { elems: vec![a] });
    }
    if !is_consecutive(order, subset) {
        return Err(Error::NotConsecutive);
    }
    let start = (0..n).find(|&i| subset.contains(&order.elems[i]) && !subset.contains(&order.elems[(i + n - 1) % n])).unwrap();
    let mut out = vec![a];
    for j in 0..n {
        let e = order.elems[(start + j) % n];
        if !subset.contains(&e) {
            out.push(e);
        }
    }
    Ok(CyclicOrder { elems: out })
}

impl PartialEq for CyclicOrder {
    fn eq(&self, other: &Self) -> bool {
        self.elems.len() == other.elems.len() && canonical(self).elems == canonical(other).elems
    }
}

impl Eq for CyclicOrder {}

impl Hash for CyclicOrder {
    fn hash<H: Hasher>(&self, state: &mut H) {
        canonical(self).elems.hash(state);
    }
}

impl PartialOrd for CyclicOrder {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CyclicOrder {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        canonical(self).elems.cmp(&canonical(other).elems)
    }
}

impl fmt::Debug for CyclicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", canonical(self).elems)
    }
}

impl fmt::Display for CyclicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
