//! Arena shared by PC-trees and constrained PC-trees.
//!
//! Every tree edge is a pair of arcs. P-node arcs form a doubly linked list
//! with `link = [prev, next]`. C-node arcs form a ring whose links are read
//! through a parity frame: the owner of an arc is an element of a union-find
//! structure and the XOR of the parity bits on its path decides whether
//! `link[1]` or `link[0]` is the counter-clockwise successor. Flipping a
//! C-node toggles one bit and contracting two C-nodes is a union.

use rustc_hash::FxHashMap;

pub type Color = u32;
pub(crate) type NodeId = u32;
pub(crate) type ArcId = u32;
pub(crate) const NIL: u32 = u32::MAX;

/// Constraint status of one arc at a P-node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Unrestricted,
    /// Edge must lie in an angle of this color.
    Restricted(Color),
    /// Fixed edge; the color is that of the angle following it.
    Fixed(Color),
}

impl Status {
    pub fn is_fixed(self) -> bool {
        matches!(self, Status::Fixed(_))
    }
    pub fn color(self) -> Option<Color> {
        match self {
            Status::Unrestricted => None,
            Status::Restricted(c) | Status::Fixed(c) => Some(c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    Leaf,
    P,
    C,
    Dead,
}

#[derive(Clone, Debug)]
pub(crate) struct Arc {
    pub owner: NodeId,
    pub twin: ArcId,
    pub link: [ArcId; 2],
    pub fl: [ArcId; 2],
    pub status: Status,
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub kind: Kind,
    pub fixed: bool,
    pub parent_arc: ArcId,
    pub deg: u32,
    pub head: ArcId,
    pub uf: NodeId,
    pub bit: bool,
    pub size: u32,
    pub fhead: ArcId,
    pub nfixed: u32,
    pub nbad: u32,
    pub nrcol: u32,
    pub rsum: u64,
    pub label: u32,
}

#[derive(Clone, Default, Debug)]
struct Scratch {
    stamp: u32,
    count: u32,
    full: bool,
    parent_full: bool,
    full_head: ArcId,
    nfull: u32,
    vstamp: u32,
    nclimbed: u8,
    climbed: [ArcId; 2],
}

/// Where the full leaves hang off after a successful update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Site {
    /// A single tree edge; the arc sits on the non-full side.
    Edge(ArcId),
    /// Consecutive arcs `first..=last` (counter-clockwise) of a C-node.
    Block { node: NodeId, first: ArcId, last: ArcId },
}

/// Result of splitting a tree at a site.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SplitOut {
    pub keep_root: NodeId,
    pub off_root: NodeId,
    pub keep_leaf: NodeId,
    pub off_leaf: NodeId,
    /// `Some((keep, off))` when a C-node was divided; `keep` is `NIL` if it was smoothed away.
    pub cnode: Option<(NodeId, NodeId)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug)]
struct PathEntry {
    node: NodeId,
    ta: ArcId,
    tb: ArcId,
    fa: ArcId,
    fb: ArcId,
    side: Side,
    fixed: bool,
}

/// Forced orientation of one C-node during an admissibility check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Orient {
    AsIs,
    Reversed,
}

#[derive(Clone, Default, Debug)]
pub(crate) struct Forest {
    pub nodes: Vec<Node>,
    pub arcs: Vec<Arc>,
    sc: Vec<Scratch>,
    arc_next_full: Vec<ArcId>,
    arc_mark: Vec<u32>,
    arc_mark2: Vec<u32>,
    stamp2: u32,
    counters: FxHashMap<(NodeId, Color), (u32, u32)>,
    free_arcs: Vec<ArcId>,
    free_nodes: Vec<NodeId>,
    stamp: u32,
    pub tp_edges: u64,
    pub updates: u64,
    pub splits: u64,
}

macro_rules! tryo {
    ($e:expr) => {
        match $e {
            Some(v) => v,
            None => return None,
        }
    };
}

impl Forest {
    pub fn new() -> Self {
        Self::default()
    }

    // ---------------------------------------------------------------- alloc

    pub fn new_node(&mut self, kind: Kind) -> NodeId {
        let node = Node {
            kind,
            fixed: false,
            parent_arc: NIL,
            deg: 0,
            head: NIL,
            uf: NIL,
            bit: false,
            size: 1,
            fhead: NIL,
            nfixed: 0,
            nbad: 0,
            nrcol: 0,
            rsum: 0,
            label: NIL,
        };
        let id = if let Some(id) = self.free_nodes.pop() {
            self.nodes[id as usize] = node;
            self.sc[id as usize] = Scratch::default();
            id
        } else {
            self.nodes.push(node);
            self.sc.push(Scratch::default());
            (self.nodes.len() - 1) as NodeId
        };
        self.nodes[id as usize].uf = id;
        id
    }

    pub fn new_leaf(&mut self, label: u32) -> NodeId {
        let x = self.new_node(Kind::Leaf);
        self.nodes[x as usize].label = label;
        x
    }

    fn new_arc(&mut self) -> ArcId {
        let arc = Arc { owner: NIL, twin: NIL, link: [NIL; 2], fl: [NIL; 2], status: Status::Unrestricted };
        if let Some(a) = self.free_arcs.pop() {
            self.arcs[a as usize] = arc;
            self.arc_mark[a as usize] = 0;
            self.arc_mark2[a as usize] = 0;
            a
        } else {
            self.arcs.push(arc);
            self.arc_next_full.push(NIL);
            self.arc_mark.push(0);
            self.arc_mark2.push(0);
            (self.arcs.len() - 1) as ArcId
        }
    }

    pub(crate) fn new_arc_pair(&mut self) -> (ArcId, ArcId) {
        let a = self.new_arc();
        let b = self.new_arc();
        self.arcs[a as usize].twin = b;
        self.arcs[b as usize].twin = a;
        (a, b)
    }

    fn free_arc(&mut self, a: ArcId) {
        self.arcs[a as usize].owner = NIL;
        self.free_arcs.push(a);
    }

    fn free_node(&mut self, x: NodeId) {
        self.nodes[x as usize].kind = Kind::Dead;
        self.free_nodes.push(x);
    }

    // ------------------------------------------------------------ accessors

    #[inline]
    pub fn twin(&self, a: ArcId) -> ArcId {
        self.arcs[a as usize].twin
    }

    #[inline]
    pub fn status(&self, a: ArcId) -> Status {
        self.arcs[a as usize].status
    }

    #[inline]
    pub fn kind(&self, x: NodeId) -> Kind {
        self.nodes[x as usize].kind
    }

    #[inline]
    pub fn deg(&self, x: NodeId) -> u32 {
        self.nodes[x as usize].deg
    }

    #[inline]
    pub fn label(&self, x: NodeId) -> u32 {
        self.nodes[x as usize].label
    }

    pub fn find_bit(&mut self, x: NodeId) -> (NodeId, bool) {
        let mut root = x;
        let mut rel = false;
        while self.nodes[root as usize].uf != root {
            rel ^= self.nodes[root as usize].bit;
            root = self.nodes[root as usize].uf;
        }
        let abs = rel ^ self.nodes[root as usize].bit;
        let mut cur = x;
        let mut r = rel;
        while self.nodes[cur as usize].uf != root && cur != root {
            let next = self.nodes[cur as usize].uf;
            let ob = self.nodes[cur as usize].bit;
            self.nodes[cur as usize].bit = r;
            self.nodes[cur as usize].uf = root;
            r ^= ob;
            cur = next;
        }
        (root, abs)
    }

    #[inline]
    pub fn find(&mut self, x: NodeId) -> NodeId {
        if self.nodes[x as usize].uf == x {
            return x;
        }
        self.find_bit(x).0
    }

    #[inline]
    pub fn node_of(&mut self, a: ArcId) -> NodeId {
        let o = self.arcs[a as usize].owner;
        self.find(o)
    }

    #[inline]
    fn frame(&mut self, a: ArcId) -> usize {
        let o = self.arcs[a as usize].owner;
        if self.nodes[o as usize].uf == o {
            return self.nodes[o as usize].bit as usize;
        }
        self.find_bit(o).1 as usize
    }

    /// Counter-clockwise successor of an arc around its node.
    #[inline]
    pub fn succ(&mut self, a: ArcId) -> ArcId {
        let b = self.frame(a);
        self.arcs[a as usize].link[1 ^ b]
    }

    #[inline]
    pub fn pred(&mut self, a: ArcId) -> ArcId {
        let b = self.frame(a);
        self.arcs[a as usize].link[b]
    }

    fn set_succ(&mut self, a: ArcId, s: ArcId) {
        let fa = self.frame(a);
        let fs = self.frame(s);
        self.arcs[a as usize].link[1 ^ fa] = s;
        self.arcs[s as usize].link[fs] = a;
    }

    /// Node on the other side of the parent arc.
    pub fn parent(&mut self, x: NodeId) -> Option<NodeId> {
        let p = self.nodes[x as usize].parent_arc;
        if p == NIL {
            None
        } else {
            let t = self.twin(p);
            Some(self.node_of(t))
        }
    }

    /// Arcs of a node in counter-clockwise order starting at its head.
    pub fn arcs_of(&mut self, x: NodeId) -> Vec<ArcId> {
        let h = self.nodes[x as usize].head;
        let mut out = Vec::with_capacity(self.nodes[x as usize].deg as usize);
        if h == NIL {
            return out;
        }
        let mut a = h;
        loop {
            out.push(a);
            a = self.succ(a);
            if a == h {
                break;
            }
        }
        out
    }

    /// Arcs counter-clockwise starting at `a`.
    pub fn arcs_from(&mut self, a: ArcId) -> Vec<ArcId> {
        let mut out = vec![a];
        let mut b = self.succ(a);
        while b != a {
            out.push(b);
            b = self.succ(b);
        }
        out
    }

    /// Fixed arcs of a P-node in their prescribed order.
    pub fn fixed_list(&self, x: NodeId) -> Vec<ArcId> {
        let h = self.nodes[x as usize].fhead;
        let mut out = Vec::new();
        if h == NIL {
            return out;
        }
        let mut a = h;
        loop {
            out.push(a);
            a = self.arcs[a as usize].fl[1];
            if a == h {
                break;
            }
        }
        out
    }

    // --------------------------------------------------------- counters

    fn cnt_change(&mut self, x: NodeId, st: Status, delta: i32) {
        let (c, angle) = match st {
            Status::Fixed(c) => (c, true),
            Status::Restricted(c) => (c, false),
            Status::Unrestricted => return,
        };
        let e = self.counters.entry((x, c)).or_insert((0, 0));
        let (a0, e0) = *e;
        if angle {
            e.0 = (e.0 as i64 + delta as i64) as u32;
        } else {
            e.1 = (e.1 as i64 + delta as i64) as u32;
        }
        let (a1, e1) = *e;
        if a1 == 0 && e1 == 0 {
            self.counters.remove(&(x, c));
        }
        let n = &mut self.nodes[x as usize];
        let bad0 = e0 > 0 && a0 == 0;
        let bad1 = e1 > 0 && a1 == 0;
        n.nbad = (n.nbad as i64 + bad1 as i64 - bad0 as i64) as u32;
        let r0 = e0 > 0;
        let r1 = e1 > 0;
        if r0 != r1 {
            if r1 {
                n.nrcol += 1;
                n.rsum += c as u64;
            } else {
                n.nrcol -= 1;
                n.rsum -= c as u64;
            }
        }
    }

    fn violated(&self, x: NodeId) -> bool {
        let n = &self.nodes[x as usize];
        n.nfixed > 0 && n.nbad > 0
    }

    /// Counter values recomputed from scratch agree with the stored ones.
    pub fn counters_consistent(&mut self, x: NodeId) -> bool {
        if self.kind(x) != Kind::P {
            return true;
        }
        let mut m: FxHashMap<Color, (u32, u32)> = FxHashMap::default();
        for a in self.arcs_of(x) {
            match self.status(a) {
                Status::Fixed(c) => m.entry(c).or_default().0 += 1,
                Status::Restricted(c) => m.entry(c).or_default().1 += 1,
                Status::Unrestricted => {}
            }
        }
        let nbad = m.values().filter(|&&(a, e)| e > 0 && a == 0).count() as u32;
        let nrcol = m.values().filter(|&&(_, e)| e > 0).count() as u32;
        let stored_ok = m.iter().all(|(&c, &v)| self.counters.get(&(x, c)) == Some(&v));
        let nf = self.fixed_list(x).len() as u32;
        stored_ok && nbad == self.nodes[x as usize].nbad && nrcol == self.nodes[x as usize].nrcol && nf == self.nodes[x as usize].nfixed
    }

    // ------------------------------------------------------------ P lists

    /// Appends an arc to a P-node (or leaf) arc list.
    pub fn p_add(&mut self, x: NodeId, a: ArcId, st: Status) {
        self.arcs[a as usize].owner = x;
        self.arcs[a as usize].status = st;
        let h = self.nodes[x as usize].head;
        if h == NIL {
            self.arcs[a as usize].link = [a, a];
            self.nodes[x as usize].head = a;
        } else {
            let last = self.arcs[h as usize].link[0];
            self.arcs[last as usize].link[1] = a;
            self.arcs[a as usize].link = [last, h];
            self.arcs[h as usize].link[0] = a;
        }
        self.nodes[x as usize].deg += 1;
        if self.kind(x) == Kind::P {
            self.cnt_change(x, st, 1);
        }
    }

    fn p_remove(&mut self, x: NodeId, a: ArcId) {
        let [p, n] = self.arcs[a as usize].link;
        if p == a {
            self.nodes[x as usize].head = NIL;
        } else {
            self.arcs[p as usize].link[1] = n;
            self.arcs[n as usize].link[0] = p;
            if self.nodes[x as usize].head == a {
                self.nodes[x as usize].head = n;
            }
        }
        self.nodes[x as usize].deg -= 1;
        let st = self.status(a);
        if self.kind(x) == Kind::P {
            if st.is_fixed() {
                self.f_remove(x, a);
            }
            self.cnt_change(x, st, -1);
        }
    }

    fn f_remove(&mut self, x: NodeId, a: ArcId) {
        let [p, n] = self.arcs[a as usize].fl;
        if p == a {
            self.nodes[x as usize].fhead = NIL;
        } else {
            self.arcs[p as usize].fl[1] = n;
            self.arcs[n as usize].fl[0] = p;
            if self.nodes[x as usize].fhead == a {
                self.nodes[x as usize].fhead = n;
            }
        }
        self.nodes[x as usize].nfixed -= 1;
    }

    /// Inserts a fixed arc after `after` in the fixed list (or as the only one).
    fn f_insert_after(&mut self, x: NodeId, after: ArcId, a: ArcId) {
        if after == NIL {
            let h = self.nodes[x as usize].fhead;
            if h == NIL {
                self.arcs[a as usize].fl = [a, a];
                self.nodes[x as usize].fhead = a;
            } else {
                let last = self.arcs[h as usize].fl[0];
                self.f_link_after(last, a);
            }
        } else {
            self.f_link_after(after, a);
        }
        self.nodes[x as usize].nfixed += 1;
    }

    fn f_link_after(&mut self, after: ArcId, a: ArcId) {
        let n = self.arcs[after as usize].fl[1];
        self.arcs[after as usize].fl[1] = a;
        self.arcs[a as usize].fl = [after, n];
        self.arcs[n as usize].fl[0] = a;
    }

    /// Appends a fixed arc at the end of the prescribed order.
    pub fn f_push(&mut self, x: NodeId, a: ArcId) {
        self.f_insert_after(x, NIL, a);
    }

    /// Connects a new child `c` below `x` through a fresh edge.
    pub fn attach_child(&mut self, x: NodeId, c: NodeId, st_at_x: Status) -> ArcId {
        let (ax, ac) = self.new_arc_pair();
        self.p_add(x, ax, st_at_x);
        if st_at_x.is_fixed() {
            self.f_push(x, ax);
        }
        self.p_add(c, ac, Status::Unrestricted);
        self.nodes[c as usize].parent_arc = ac;
        ax
    }

    /// Tree with a single P-node (or a lone edge / leaf for tiny inputs).
    /// Returns the root and the leaves in input order.
    pub fn star(&mut self, labels: &[u32], status: &[Status]) -> (NodeId, Vec<NodeId>) {
        debug_assert!(!labels.is_empty());
        let leaves: Vec<NodeId> = labels.iter().map(|&l| self.new_leaf(l)).collect();
        if leaves.len() == 1 {
            return (leaves[0], leaves);
        }
        if leaves.len() == 2 {
            let (a, b) = self.new_arc_pair();
            self.p_add(leaves[0], a, Status::Unrestricted);
            self.p_add(leaves[1], b, Status::Unrestricted);
            self.nodes[leaves[1] as usize].parent_arc = b;
            return (leaves[0], leaves);
        }
        let x = self.new_node(Kind::P);
        for (i, &l) in leaves.iter().enumerate() {
            self.attach_child(x, l, status[i]);
        }
        (x, leaves)
    }

    /// Same as [`Forest::star`] but rooted at the leaf with index `root_idx`.
    pub fn star_rooted(&mut self, labels: &[u32], status: &[Status], root_idx: usize) -> (NodeId, Vec<NodeId>) {
        let (r, leaves) = self.star(labels, status);
        if leaves.len() <= 2 {
            if leaves.len() == 2 && root_idx == 1 {
                let a0 = self.nodes[leaves[0] as usize].head;
                self.nodes[leaves[1] as usize].parent_arc = NIL;
                self.nodes[leaves[0] as usize].parent_arc = a0;
                return (leaves[1], leaves);
            }
            return (r, leaves);
        }
        let l = leaves[root_idx];
        let la = self.nodes[l as usize].parent_arc;
        self.nodes[l as usize].parent_arc = NIL;
        self.nodes[r as usize].parent_arc = self.twin(la);
        (l, leaves)
    }

    /// Whether the arc order around P-node `x` satisfies its constraint.
    pub fn order_ok(&self, x: NodeId, order: &[ArcId]) -> bool {
        let nf = self.nodes[x as usize].nfixed;
        if nf == 0 {
            return true;
        }
        let fixed: Vec<ArcId> = order.iter().copied().filter(|&a| self.status(a).is_fixed()).collect();
        if fixed.len() != nf as usize {
            return false;
        }
        let mut a = fixed[0];
        for &f in &fixed {
            if f != a {
                return false;
            }
            a = self.arcs[a as usize].fl[1];
        }
        let start = order.iter().position(|&a| self.status(a).is_fixed()).unwrap();
        let mut cur = None;
        for i in 0..order.len() {
            let a = order[(start + i) % order.len()];
            match self.status(a) {
                Status::Fixed(c) => cur = Some(c),
                Status::Restricted(c) => {
                    if cur != Some(c) {
                        return false;
                    }
                }
                Status::Unrestricted => {}
            }
        }
        true
    }

    // ------------------------------------------------------------ P split

    /// Moves `moved` arcs of P-node `x` to a new P-node joined to `x` by a
    /// fresh edge, distributing the constraint. Returns the new node and the
    /// arcs of the fresh edge at `x` and at the new node.
    pub(crate) fn split_p(&mut self, x: NodeId, moved: &[ArcId]) -> Option<(NodeId, ArcId, ArcId)> {
        self.stamp2 += 1;
        let mk = self.stamp2;
        let mut mf = 0u32;
        for &a in moved {
            self.arc_mark2[a as usize] = mk;
            if self.status(a).is_fixed() {
                mf += 1;
            }
        }
        let rf = self.nodes[x as usize].nfixed - mf;
        let mut chain = Vec::new();
        let mut pm = NIL;
        let mut pm_color = 0;
        let mut last_color = 0;
        if mf > 0 && rf > 0 {
            let mut first = NIL;
            for &a in moved {
                if self.status(a).is_fixed() {
                    let p = self.arcs[a as usize].fl[0];
                    if self.arc_mark2[p as usize] != mk {
                        if first != NIL {
                            return None;
                        }
                        first = a;
                    }
                }
            }
            let mut a = first;
            while self.arc_mark2[a as usize] == mk {
                chain.push(a);
                a = self.arcs[a as usize].fl[1];
            }
            if chain.len() != mf as usize {
                return None;
            }
            pm = self.arcs[first as usize].fl[0];
            pm_color = self.status(pm).color().unwrap();
            last_color = self.status(*chain.last().unwrap()).color().unwrap();
        } else if mf > 0 {
            chain = self.fixed_list(x);
        }
        let mut moved_rcol = None;
        if mf == 0 && rf > 0 {
            for &a in moved {
                if let Status::Restricted(c) = self.status(a) {
                    match moved_rcol {
                        None => moved_rcol = Some(c),
                        Some(d) if d != c => return None,
                        _ => {}
                    }
                }
            }
        }
        let y = self.new_node(Kind::P);
        let parent_moved = {
            let pa = self.nodes[x as usize].parent_arc;
            pa != NIL && self.arc_mark2[pa as usize] == mk
        };
        for &a in moved {
            let st = self.status(a);
            self.p_remove(x, a);
            self.p_add(y, a, st);
        }
        for &a in &chain {
            self.f_push(y, a);
        }
        let (ax, ay) = self.new_arc_pair();
        let (sx, sy) = if mf > 0 && rf > 0 {
            (Status::Fixed(last_color), Status::Fixed(pm_color))
        } else if mf == 0 && rf > 0 {
            (moved_rcol.map_or(Status::Unrestricted, Status::Restricted), Status::Unrestricted)
        } else if mf > 0 {
            let n = &self.nodes[x as usize];
            let sy = match n.nrcol {
                0 => Status::Unrestricted,
                1 => Status::Restricted(n.rsum as Color),
                _ => return None,
            };
            (Status::Unrestricted, sy)
        } else {
            (Status::Unrestricted, Status::Unrestricted)
        };
        self.p_add(x, ax, sx);
        if sx.is_fixed() {
            self.f_insert_after(x, pm, ax);
        }
        self.p_add(y, ay, sy);
        if sy.is_fixed() {
            self.f_push(y, ay);
        }
        if parent_moved {
            self.nodes[y as usize].parent_arc = self.nodes[x as usize].parent_arc;
            self.nodes[x as usize].parent_arc = ax;
        } else {
            self.nodes[y as usize].parent_arc = ay;
        }
        if self.violated(x) || self.violated(y) {
            return None;
        }
        Some((y, ax, ay))
    }

    /// Turns a P-node into a C-node with the given counter-clockwise ring.
    pub(crate) fn make_c(&mut self, x: NodeId, order: &[ArcId], fixed: bool) {
        for &a in order {
            let st = self.status(a);
            self.cnt_change(x, st, -1);
            self.arcs[a as usize].status = Status::Unrestricted;
        }
        let n = &mut self.nodes[x as usize];
        n.fhead = NIL;
        n.nfixed = 0;
        n.kind = Kind::C;
        n.fixed = fixed;
        n.bit = false;
        n.head = order[0];
        for i in 0..order.len() {
            let a = order[i];
            let b = order[(i + 1) % order.len()];
            self.arcs[a as usize].link[1] = b;
            self.arcs[b as usize].link[0] = a;
        }
    }

    /// Turns a constrained P-node into an ordinary one and a fixed C-node into an ordinary one.
    pub(crate) fn erase_constraint(&mut self, x: NodeId) {
        match self.kind(x) {
            Kind::P => {
                for a in self.arcs_of(x) {
                    let st = self.status(a);
                    self.cnt_change(x, st, -1);
                    self.arcs[a as usize].status = Status::Unrestricted;
                    self.arcs[a as usize].fl = [NIL, NIL];
                }
                self.nodes[x as usize].fhead = NIL;
                self.nodes[x as usize].nfixed = 0;
            }
            Kind::C => self.nodes[x as usize].fixed = false,
            _ => {}
        }
    }

    /// Reverses the orientation of a C-node.
    pub fn flip(&mut self, x: NodeId) {
        let r = self.find(x);
        self.nodes[r as usize].bit ^= true;
    }

    fn union_c(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let (big, small) = if self.nodes[a as usize].size >= self.nodes[b as usize].size { (a, b) } else { (b, a) };
        let bb = self.nodes[big as usize].bit;
        let s = &mut self.nodes[small as usize];
        s.uf = big;
        s.bit ^= bb;
        s.kind = Kind::Dead;
        let ss = s.size;
        self.nodes[big as usize].size += ss;
        big
    }

    // ------------------------------------------------------------ labeling

    fn fresh(&mut self, x: NodeId) {
        let st = self.stamp;
        let s = &mut self.sc[x as usize];
        if s.stamp != st {
            s.stamp = st;
            s.count = 0;
            s.full = false;
            s.parent_full = false;
            s.full_head = NIL;
            s.nfull = 0;
        }
    }

    fn is_full(&self, x: NodeId) -> bool {
        let s = &self.sc[x as usize];
        s.stamp == self.stamp && s.full
    }

    fn is_partial(&self, x: NodeId) -> bool {
        let s = &self.sc[x as usize];
        s.stamp == self.stamp && !s.full && s.count > 0
    }

    fn arc_full(&self, a: ArcId) -> bool {
        self.arc_mark[a as usize] == self.stamp
    }

    fn full_arcs(&self, x: NodeId) -> Vec<ArcId> {
        let mut out = Vec::new();
        if self.sc[x as usize].stamp != self.stamp {
            return out;
        }
        let mut a = self.sc[x as usize].full_head;
        while a != NIL {
            out.push(a);
            a = self.arc_next_full[a as usize];
        }
        out
    }

    /// Marks full and partial nodes; returns the partial ones.
    fn mark_full(&mut self, full_leaves: &[NodeId]) -> Vec<NodeId> {
        self.stamp += 1;
        let st = self.stamp;
        let mut queue: Vec<NodeId> = Vec::with_capacity(full_leaves.len());
        let mut touched = Vec::new();
        for &l in full_leaves {
            self.fresh(l);
            self.sc[l as usize].full = true;
            queue.push(l);
        }
        while let Some(x) = queue.pop() {
            let pa = self.nodes[x as usize].parent_arc;
            let toward = if pa != NIL && !self.sc[x as usize].parent_full {
                pa
            } else {
                let mut t = NIL;
                for a in self.arcs_of(x) {
                    if a == pa {
                        continue;
                    }
                    let tw = self.twin(a);
                    let c = self.node_of(tw);
                    if !self.is_full(c) {
                        t = a;
                        break;
                    }
                }
                t
            };
            if toward == NIL {
                continue;
            }
            let ay = self.twin(toward);
            let y = self.node_of(ay);
            self.fresh(y);
            if self.sc[y as usize].count == 0 && !self.sc[y as usize].full {
                touched.push(y);
            }
            if toward != pa {
                self.sc[y as usize].parent_full = true;
            }
            let s = &mut self.sc[y as usize];
            s.count += 1;
            s.nfull += 1;
            self.arc_next_full[ay as usize] = s.full_head;
            s.full_head = ay;
            self.arc_mark[ay as usize] = st;
            let deg = self.nodes[y as usize].deg;
            if self.sc[y as usize].count + 1 == deg {
                self.sc[y as usize].full = true;
                queue.push(y);
            }
        }
        touched.into_iter().filter(|&x| !self.sc[x as usize].full).collect()
    }

    fn climb_into(&mut self, y: NodeId, a: ArcId) -> bool {
        let s = &mut self.sc[y as usize];
        if s.nclimbed == 2 {
            return false;
        }
        s.climbed[s.nclimbed as usize] = a;
        s.nclimbed += 1;
        true
    }

    fn visit(&mut self, y: NodeId) -> bool {
        let st = self.stamp;
        let s = &mut self.sc[y as usize];
        if s.vstamp == st {
            return false;
        }
        s.vstamp = st;
        s.nclimbed = 0;
        true
    }

    /// Terminal path as (node, arc toward the A end, arc toward the B end).
    fn terminal_path(&mut self, partial: &[NodeId]) -> Option<(Vec<(NodeId, ArcId, ArcId)>, usize)> {
        for &p in partial {
            self.visit(p);
        }
        if partial.len() == 1 {
            return Some((vec![(partial[0], NIL, NIL)], 0));
        }
        let mut active: Vec<NodeId> = partial.to_vec();
        let mut reached_root = NIL;
        let mut next = Vec::new();
        while active.len() >= 2 {
            next.clear();
            for &x in &active {
                let pa = self.nodes[x as usize].parent_arc;
                if pa == NIL {
                    reached_root = x;
                    continue;
                }
                let a = self.twin(pa);
                let y = self.node_of(a);
                let fresh = self.visit(y);
                if !self.climb_into(y, a) {
                    return None;
                }
                if fresh {
                    next.push(y);
                }
            }
            std::mem::swap(&mut active, &mut next);
        }
        let mut top = if active.len() == 1 && reached_root != NIL {
            let mut x = active[0];
            loop {
                let pa = self.nodes[x as usize].parent_arc;
                if pa == NIL {
                    break;
                }
                let a = self.twin(pa);
                let y = self.node_of(a);
                let fresh = self.visit(y);
                if !self.climb_into(y, a) {
                    return None;
                }
                if !fresh {
                    break;
                }
                x = y;
            }
            reached_root
        } else if active.len() == 1 {
            active[0]
        } else {
            reached_root
        };
        if top == NIL {
            return None;
        }
        while !self.is_partial(top) && self.sc[top as usize].nclimbed == 1 {
            let a = self.sc[top as usize].climbed[0];
            let t = self.twin(a);
            top = self.node_of(t);
        }
        let apex = top;
        let nc = self.sc[apex as usize].nclimbed;
        let mut legs: [Vec<NodeId>; 2] = [Vec::new(), Vec::new()];
        for (i, leg) in legs.iter_mut().enumerate().take(nc as usize) {
            let mut a = self.sc[apex as usize].climbed[i];
            loop {
                let t = self.twin(a);
                let x = self.node_of(t);
                leg.push(x);
                match self.sc[x as usize].nclimbed {
                    0 => break,
                    1 => a = self.sc[x as usize].climbed[0],
                    _ => return None,
                }
            }
        }
        let mut path = Vec::with_capacity(legs[0].len() + legs[1].len() + 1);
        for &x in legs[0].iter().rev() {
            let ta = if self.sc[x as usize].nclimbed == 1 { self.sc[x as usize].climbed[0] } else { NIL };
            path.push((x, ta, self.nodes[x as usize].parent_arc));
        }
        let c = self.sc[apex as usize].climbed;
        path.push((apex, if nc >= 1 { c[0] } else { NIL }, if nc >= 2 { c[1] } else { NIL }));
        for &x in &legs[1] {
            let tb = if self.sc[x as usize].nclimbed == 1 { self.sc[x as usize].climbed[0] } else { NIL };
            path.push((x, self.nodes[x as usize].parent_arc, tb));
        }
        let npart = path.iter().filter(|&&(x, _, _)| self.is_partial(x)).count();
        if npart != partial.len() {
            return None;
        }
        if !self.is_partial(path[0].0) || !self.is_partial(path[path.len() - 1].0) {
            return None;
        }
        let apex_idx = legs[0].len();
        Some((path, apex_idx))
    }

    /// Boundary pairs (full arc, non-full neighbour) of the full arcs in a ring.
    fn ring_bounds(&mut self, full: &[ArcId]) -> Vec<(ArcId, ArcId, bool)> {
        let mut out = Vec::new();
        for &f in full {
            let s = self.succ(f);
            if !self.arc_full(s) {
                out.push((f, s, true));
            }
            let p = self.pred(f);
            if !self.arc_full(p) {
                out.push((f, p, false));
            }
            if out.len() > 2 {
                break;
            }
        }
        out
    }

    /// Local consistency of a C-node on the terminal path.
    fn check_c(&mut self, x: NodeId, ta: ArcId, tb: ArcId) -> Option<PathEntry> {
        let full = self.full_arcs(x);
        let fixed = self.nodes[x as usize].fixed;
        if full.is_empty() {
            if ta == NIL || tb == NIL {
                return None;
            }
            let s = self.succ(ta);
            let p = self.pred(ta);
            if s != tb && p != tb {
                return None;
            }
            let side = if s == tb { Side::Left } else { Side::Right };
            return Some(PathEntry { node: x, ta, tb, fa: NIL, fb: NIL, side, fixed });
        }
        let b = self.ring_bounds(&full);
        if b.len() != 2 {
            return None;
        }
        let gs = [b[0].1, b[1].1];
        for t in [ta, tb] {
            if t != NIL && !gs.contains(&t) {
                return None;
            }
        }
        let (fa, fb) = if ta != NIL {
            if b[0].1 == ta {
                (b[0].0, b[1].0)
            } else {
                (b[1].0, b[0].0)
            }
        } else if b[0].1 == tb {
            (b[1].0, b[0].0)
        } else {
            (b[0].0, b[1].0)
        };
        let side = if ta != NIL {
            let s = self.succ(ta);
            if self.arc_full(s) {
                Side::Left
            } else {
                Side::Right
            }
        } else {
            let p = self.pred(tb);
            if self.arc_full(p) {
                Side::Left
            } else {
                Side::Right
            }
        };
        Some(PathEntry { node: x, ta, tb, fa, fb, side, fixed })
    }

    /// Contiguity of full fixed arcs in a P-node's prescribed order.
    fn check_p_fixed(&mut self, x: NodeId, ta: ArcId, tb: ArcId) -> bool {
        if self.nodes[x as usize].nfixed == 0 {
            return true;
        }
        let ffull: Vec<ArcId> = self.full_arcs(x).into_iter().filter(|&a| self.status(a).is_fixed()).collect();
        let tfix: Vec<ArcId> = [ta, tb].into_iter().filter(|&t| t != NIL && self.status(t).is_fixed()).collect();
        if ffull.is_empty() {
            if tfix.len() == 2 {
                let fl = self.arcs[ta as usize].fl;
                return fl[0] == tb || fl[1] == tb;
            }
            return true;
        }
        let mut gs = Vec::new();
        for &f in &ffull {
            for g in self.arcs[f as usize].fl {
                if !self.arc_full(g) {
                    gs.push(g);
                }
            }
            if gs.len() > 2 {
                return false;
            }
        }
        if gs.is_empty() {
            return tfix.is_empty();
        }
        if gs.len() != 2 {
            return false;
        }
        tfix.iter().all(|t| gs.contains(t))
    }

    /// Reduces the tree so that `full_leaves` become consecutive. Returns the
    /// site of the full part, or `None` if the tree becomes the null-tree (in
    /// which case the tree may be left in an inconsistent state).
    ///
    /// Requires `1 <= |full_leaves| < |leaves|`.
    pub fn update(&mut self, root: &mut NodeId, full_leaves: &[NodeId]) -> Option<Site> {
        self.updates += 1;
        let partial = self.mark_full(full_leaves);
        if partial.is_empty() {
            return None;
        }
        let (path, apex_idx) = tryo!(self.terminal_path(&partial));
        self.tp_edges += (path.len() - 1) as u64;
        if path.len() == 1 {
            let x = path[0].0;
            return match self.kind(x) {
                Kind::Leaf => Some(Site::Edge(self.nodes[x as usize].head)),
                Kind::C => {
                    let full = self.full_arcs(x);
                    if full.len() == 1 {
                        return Some(Site::Edge(full[0]));
                    }
                    let b = self.ring_bounds(&full);
                    if b.len() != 2 {
                        return None;
                    }
                    let first = if b[0].2 { b[1].0 } else { b[0].0 };
                    let last = if b[0].2 { b[0].0 } else { b[1].0 };
                    Some(Site::Block { node: x, first, last })
                }
                Kind::P => {
                    if !self.check_p_fixed(x, NIL, NIL) {
                        return None;
                    }
                    let full = self.full_arcs(x);
                    if full.len() == 1 {
                        return Some(Site::Edge(full[0]));
                    }
                    let (_, ax, _) = tryo!(self.split_p(x, &full));
                    Some(Site::Edge(ax))
                }
                Kind::Dead => None,
            };
        }
        // local checks before any modification
        let mut entries: Vec<Option<PathEntry>> = Vec::with_capacity(path.len());
        for &(x, ta, tb) in &path {
            match self.kind(x) {
                Kind::C => entries.push(Some(tryo!(self.check_c(x, ta, tb)))),
                Kind::P => {
                    if !self.check_p_fixed(x, ta, tb) {
                        return None;
                    }
                    entries.push(None);
                }
                _ => return None,
            }
        }
        // P-node splits
        let mut done = Vec::with_capacity(path.len());
        for (i, &(x, ta, tb)) in path.iter().enumerate() {
            if let Some(e) = entries[i] {
                done.push(e);
                continue;
            }
            let full = self.full_arcs(x);
            let af = match full.len() {
                0 => NIL,
                1 => full[0],
                _ => tryo!(self.split_p(x, &full)).1,
            };
            let mut non_e = Vec::with_capacity(3);
            for a in [ta, af, tb] {
                if a != NIL {
                    non_e.push(a);
                }
            }
            let ne = self.nodes[x as usize].deg as usize - non_e.len();
            let (m, ae) = if ne >= 2 {
                let (y, _, ay) = tryo!(self.split_p(x, &non_e));
                (y, ay)
            } else if ne == 1 {
                let e = self.arcs_of(x).into_iter().find(|a| !non_e.contains(a)).unwrap();
                (x, e)
            } else {
                (x, NIL)
            };
            let mut ol = Vec::with_capacity(4);
            for a in [ta, af, tb, ae] {
                if a != NIL {
                    ol.push(a);
                }
            }
            let or: Vec<ArcId> = ol.iter().rev().copied().collect();
            let okl = self.order_ok(m, &ol);
            let okr = self.order_ok(m, &or);
            let (side, fixed) = match (okl, okr) {
                (true, true) => {
                    self.make_c(m, &ol, false);
                    (Side::Left, false)
                }
                (true, false) => {
                    self.make_c(m, &ol, true);
                    (Side::Left, true)
                }
                (false, true) => {
                    self.make_c(m, &or, true);
                    (Side::Right, true)
                }
                (false, false) => return None,
            };
            done.push(PathEntry { node: m, ta, tb, fa: af, fb: af, side, fixed });
        }
        // orientation
        let target = done.iter().find(|e| e.fixed).map_or(Side::Left, |e| e.side);
        if done.iter().any(|e| e.fixed && e.side != target) {
            return None;
        }
        for e in &done {
            if !e.fixed && e.side != target {
                self.flip(e.node);
            }
        }
        let apex_parent = self.nodes[done[apex_idx].node as usize].parent_arc;
        let mut m = done[0].node;
        let mut any_fixed = done[0].fixed;
        for i in 1..done.len() {
            let nu = done[i].node;
            let tbm = done[i - 1].tb;
            let tan = done[i].ta;
            let p = self.pred(tbm);
            let q = self.succ(tbm);
            let r = self.pred(tan);
            let s = self.succ(tan);
            self.set_succ(p, s);
            self.set_succ(r, q);
            let deg = self.nodes[m as usize].deg + self.nodes[nu as usize].deg - 2;
            any_fixed |= done[i].fixed;
            self.free_arc(tbm);
            self.free_arc(tan);
            m = self.union_c(m, nu);
            let n = &mut self.nodes[m as usize];
            n.deg = deg;
            n.head = p;
            n.kind = Kind::C;
        }
        {
            let n = &mut self.nodes[m as usize];
            n.fixed = any_fixed;
            n.parent_arc = apex_parent;
        }
        if apex_parent == NIL {
            *root = m;
        }
        let first_a = done.iter().find(|e| e.fa != NIL).unwrap().fa;
        let last_b = done.iter().rev().find(|e| e.fb != NIL).unwrap().fb;
        let (first, last) = if target == Side::Left { (first_a, last_b) } else { (last_b, first_a) };
        Some(Site::Block { node: m, first, last })
    }

    /// Classification of the full part without modifying the tree.
    pub fn eta(&mut self, full_leaves: &[NodeId]) -> EtaRaw {
        let partial = self.mark_full(full_leaves);
        if partial.len() != 1 {
            return EtaRaw::NotConsecutive;
        }
        let x = partial[0];
        match self.kind(x) {
            Kind::Leaf => EtaRaw::Edge(self.nodes[x as usize].head),
            Kind::P => {
                let full = self.full_arcs(x);
                if full.len() == 1 {
                    EtaRaw::Edge(full[0])
                } else {
                    EtaRaw::NotConsecutive
                }
            }
            Kind::C => {
                let full = self.full_arcs(x);
                if full.len() == 1 {
                    return EtaRaw::Edge(full[0]);
                }
                let b = self.ring_bounds(&full);
                if b.len() != 2 {
                    return EtaRaw::NotConsecutive;
                }
                let first = if b[0].2 { b[1].0 } else { b[0].0 };
                EtaRaw::Block(x, self.arcs_from(first)[..full.len()].to_vec())
            }
            Kind::Dead => EtaRaw::NotConsecutive,
        }
    }

    // --------------------------------------------------------------- split

    fn new_leaf_on(&mut self, label: u32, twin_of: ArcId) -> (NodeId, ArcId) {
        let l = self.new_leaf(label);
        let a = self.new_arc();
        self.arcs[a as usize].twin = twin_of;
        self.arcs[twin_of as usize].twin = a;
        self.p_add(l, a, Status::Unrestricted);
        (l, a)
    }

    /// Splits the tree at `site` into the part without the full leaves
    /// (`keep`) and the full part (`off`), each gaining a leaf with `label`.
    pub fn split(&mut self, root: NodeId, site: Site, label: u32) -> Option<SplitOut> {
        self.splits += 1;
        match site {
            Site::Edge(a) => {
                let a2 = self.twin(a);
                let y = self.node_of(a2);
                let (lk, lka) = self.new_leaf_on(label, a);
                let (lo, loa) = self.new_leaf_on(label, a2);
                let (keep_root, off_root);
                if self.nodes[y as usize].parent_arc == a2 {
                    self.nodes[lk as usize].parent_arc = lka;
                    keep_root = root;
                    off_root = lo;
                } else {
                    self.nodes[lo as usize].parent_arc = loa;
                    keep_root = lk;
                    off_root = root;
                }
                Some(SplitOut { keep_root, off_root, keep_leaf: lk, off_leaf: lo, cnode: None })
            }
            Site::Block { node, first, last } => {
                let mu = self.find(node);
                let p = self.pred(first);
                let q = self.succ(last);
                let mut block = Vec::new();
                let mut a = first;
                loop {
                    block.push(a);
                    if a == last {
                        break;
                    }
                    a = self.succ(a);
                }
                let mu2 = self.new_node(Kind::C);
                self.nodes[mu2 as usize].fixed = self.nodes[mu as usize].fixed;
                let pa = self.nodes[mu as usize].parent_arc;
                let mut parent_in_block = false;
                for &b in &block {
                    let s = self.succ(b);
                    let pr = self.pred(b);
                    self.arcs[b as usize].owner = mu2;
                    self.arcs[b as usize].link = [pr, s];
                    if b == pa {
                        parent_in_block = true;
                    }
                }
                let (lk, lka) = {
                    let l = self.new_leaf(label);
                    let (a1, a2) = self.new_arc_pair();
                    self.p_add(l, a2, Status::Unrestricted);
                    self.arcs[a1 as usize].owner = mu;
                    (l, a1)
                };
                let (lo, loa) = {
                    let l = self.new_leaf(label);
                    let (a1, a2) = self.new_arc_pair();
                    self.p_add(l, a2, Status::Unrestricted);
                    self.arcs[a1 as usize].owner = mu2;
                    (l, a1)
                };
                // a' = lka in mu between p and q, a'' = loa closes mu2's ring
                self.set_succ(p, lka);
                self.set_succ(lka, q);
                self.set_succ(last, loa);
                self.set_succ(loa, first);
                let k = block.len() as u32;
                let d = self.nodes[mu as usize].deg;
                self.nodes[mu as usize].deg = d - k + 1;
                self.nodes[mu as usize].head = lka;
                self.nodes[mu2 as usize].deg = k + 1;
                self.nodes[mu2 as usize].head = loa;
                let lk_arc = self.twin(lka);
                let (mut keep_root, off_root);
                if parent_in_block {
                    self.nodes[mu2 as usize].parent_arc = pa;
                    self.nodes[mu as usize].parent_arc = lka;
                    keep_root = lk;
                    off_root = root;
                } else {
                    self.nodes[mu2 as usize].parent_arc = loa;
                    self.nodes[lk as usize].parent_arc = lk_arc;
                    keep_root = root;
                    off_root = lo;
                }
                if parent_in_block {
                    self.nodes[lo as usize].parent_arc = self.twin(loa);
                }
                let mut keep_c = mu;
                if self.nodes[mu as usize].deg == 2 {
                    keep_root = tryo!(self.smooth(keep_root, mu));
                    keep_c = NIL;
                }
                Some(SplitOut { keep_root, off_root, keep_leaf: lk, off_leaf: lo, cnode: Some((keep_c, mu2)) })
            }
        }
    }

    /// Removes a degree-2 inner node. Returns the new root.
    fn smooth(&mut self, root: NodeId, x: NodeId) -> Option<NodeId> {
        let h = self.nodes[x as usize].head;
        let u = h;
        let w = self.succ(h);
        if self.kind(x) == Kind::P && !self.order_ok(x, &[u, w]) {
            return None;
        }
        let u2 = self.twin(u);
        let w2 = self.twin(w);
        self.arcs[u2 as usize].twin = w2;
        self.arcs[w2 as usize].twin = u2;
        let pa = self.nodes[x as usize].parent_arc;
        let mut new_root = root;
        let un = self.node_of(u2);
        let wn = self.node_of(w2);
        if pa == NIL {
            self.nodes[un as usize].parent_arc = NIL;
            new_root = un;
            self.nodes[wn as usize].parent_arc = w2;
        }
        if self.kind(x) == Kind::P {
            for a in [u, w] {
                let st = self.status(a);
                self.cnt_change(x, st, -1);
            }
        }
        self.free_arc(u);
        self.free_arc(w);
        if self.kind(x) == Kind::P {
            self.free_node(x);
        } else {
            self.nodes[x as usize].kind = Kind::Dead;
        }
        Some(new_root)
    }

    /// Removes a leaf. Returns the new root, or `None` when the constraint of
    /// a smoothed node cannot be met. Removing the last leaf is not allowed.
    pub fn remove_leaf(&mut self, root: NodeId, leaf: NodeId) -> Option<NodeId> {
        let la = self.nodes[leaf as usize].head;
        let a = self.twin(la);
        let x = self.node_of(a);
        let mut new_root = root;
        if root == leaf {
            self.nodes[x as usize].parent_arc = NIL;
            new_root = x;
        }
        match self.kind(x) {
            Kind::P | Kind::Leaf => self.p_remove(x, a),
            Kind::C => {
                let p = self.pred(a);
                let s = self.succ(a);
                self.set_succ(p, s);
                let n = &mut self.nodes[x as usize];
                n.deg -= 1;
                if n.head == a {
                    n.head = s;
                }
            }
            Kind::Dead => unreachable!(),
        }
        self.free_arc(a);
        self.free_arc(la);
        self.free_node(leaf);
        if self.kind(x) != Kind::Leaf && self.nodes[x as usize].deg == 2 {
            new_root = self.smooth(new_root, x)?;
        }
        Some(new_root)
    }

    fn reroot(&mut self, y: NodeId) {
        let mut path = vec![y];
        let mut cur = y;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        for i in (1..path.len()).rev() {
            let below = path[i - 1];
            let a = self.twin(self.nodes[below as usize].parent_arc);
            self.nodes[path[i] as usize].parent_arc = a;
        }
        self.nodes[y as usize].parent_arc = NIL;
    }

    /// Glues two trees at the leaves `l1` and `l2`, which disappear.
    pub fn merge(&mut self, r1: NodeId, l1: NodeId, r2: NodeId, l2: NodeId) -> Option<NodeId> {
        if self.nodes[l2 as usize].deg == 0 {
            self.free_node(l2);
            return self.remove_leaf(r1, l1);
        }
        if self.nodes[l1 as usize].deg == 0 {
            self.free_node(l1);
            return self.remove_leaf(r2, l2);
        }
        let a1 = self.nodes[l1 as usize].head;
        let a2 = self.nodes[l2 as usize].head;
        let ax = self.twin(a1);
        let ay = self.twin(a2);
        let x = self.node_of(ax);
        let y = self.node_of(ay);
        self.arcs[ax as usize].twin = ay;
        self.arcs[ay as usize].twin = ax;
        let root;
        if r2 == l2 {
            self.nodes[y as usize].parent_arc = ay;
            if r1 == l1 {
                self.nodes[x as usize].parent_arc = NIL;
                root = x;
            } else {
                root = r1;
            }
        } else if r1 == l1 {
            self.nodes[x as usize].parent_arc = ax;
            root = r2;
        } else if r2 == y {
            self.nodes[y as usize].parent_arc = ay;
            root = r1;
        } else if r1 == x {
            self.nodes[x as usize].parent_arc = ax;
            root = r2;
        } else {
            self.reroot(y);
            self.nodes[y as usize].parent_arc = ay;
            root = r1;
        }
        self.free_arc(a1);
        self.free_arc(a2);
        self.free_node(l1);
        self.free_node(l2);
        Some(root)
    }

    /// Releases every node and arc of a tree that is no longer needed.
    pub fn discard(&mut self, root: NodeId) {
        let mut stack = vec![(root, NIL)];
        while let Some((x, from)) = stack.pop() {
            let x = self.find(x);
            for a in self.arcs_of(x) {
                if a == from {
                    continue;
                }
                let t = self.twin(a);
                let c = self.node_of(t);
                stack.push((c, t));
            }
            let arcs = self.arcs_of(x);
            if self.kind(x) == Kind::P {
                for &a in &arcs {
                    let st = self.status(a);
                    self.cnt_change(x, st, -1);
                }
            }
            for a in arcs {
                self.free_arc(a);
            }
            match self.kind(x) {
                Kind::Leaf | Kind::P => self.free_node(x),
                _ => self.nodes[x as usize].kind = Kind::Dead,
            }
        }
    }

    /// All leaves of the tree in counter-clockwise boundary order starting at
    /// the root side.
    pub fn leaves(&mut self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let root = self.find(root);
        if self.kind(root) == Kind::Leaf {
            out.push(root);
            if self.nodes[root as usize].deg == 0 {
                return out;
            }
        }
        let start = self.nodes[root as usize].head;
        let mut stack: Vec<ArcId> = Vec::new();
        if self.kind(root) == Kind::Leaf {
            stack.push(start);
        } else {
            for a in self.arcs_from(start).into_iter().rev() {
                stack.push(a);
            }
        }
        while let Some(a) = stack.pop() {
            let t = self.twin(a);
            let c = self.node_of(t);
            if self.kind(c) == Kind::Leaf {
                out.push(c);
                continue;
            }
            let arcs = self.arcs_from(t);
            for &b in arcs[1..].iter().rev() {
                stack.push(b);
            }
        }
        out
    }

    // -------------------------------------------------------- enumeration

    /// Valid counter-clockwise orders of the arcs at `x` starting with `entry`.
    fn local_orders(&mut self, x: NodeId, entry: ArcId) -> Vec<Vec<ArcId>> {
        match self.kind(x) {
            Kind::Leaf => vec![vec![entry]],
            Kind::C => {
                let ring = self.arcs_from(entry);
                let mut out = vec![ring.clone()];
                if !self.nodes[x as usize].fixed && ring.len() > 2 {
                    let mut rev = vec![entry];
                    rev.extend(ring[1..].iter().rev());
                    out.push(rev);
                }
                out
            }
            Kind::P => {
                let arcs = self.arcs_from(entry);
                let mut rest = arcs[1..].to_vec();
                let mut out = Vec::new();
                permute(&mut rest, 0, &mut |p| {
                    let mut o = Vec::with_capacity(p.len() + 1);
                    o.push(entry);
                    o.extend_from_slice(p);
                    if self.order_ok(x, &o) {
                        out.push(o);
                    }
                });
                out
            }
            Kind::Dead => Vec::new(),
        }
    }

    /// Leaf sequences of the subtree entered through `arc` (an arc at the
    /// child), one per admissible arrangement.
    fn subtree_orders(&mut self, entry: ArcId) -> Vec<Vec<u32>> {
        let x = self.node_of(entry);
        if self.kind(x) == Kind::Leaf {
            return vec![vec![self.label(x)]];
        }
        let mut out = Vec::new();
        for ord in self.local_orders(x, entry) {
            let mut acc: Vec<Vec<u32>> = vec![Vec::new()];
            for &a in &ord[1..] {
                let t = self.twin(a);
                let subs = self.subtree_orders(t);
                let mut next = Vec::with_capacity(acc.len() * subs.len());
                for pre in &acc {
                    for s in &subs {
                        let mut v = pre.clone();
                        v.extend_from_slice(s);
                        next.push(v);
                    }
                }
                acc = next;
            }
            out.extend(acc);
        }
        out
    }

    /// Every admissible cyclic leaf order as label sequences starting at `first_leaf`.
    pub fn enumerate(&mut self, first_leaf: NodeId) -> Vec<Vec<u32>> {
        let lab = self.label(first_leaf);
        if self.nodes[first_leaf as usize].deg == 0 {
            return vec![vec![lab]];
        }
        let a = self.nodes[first_leaf as usize].head;
        let t = self.twin(a);
        self.subtree_orders(t)
            .into_iter()
            .map(|mut s| {
                s.insert(0, lab);
                s
            })
            .collect()
    }

    // ------------------------------------------------------ admissibility

    /// Whether the tree rooted at leaf `r` admits an order whose restriction
    /// to `sigma` (leaf nodes, `sigma[0] == r`) is the cyclic order `sigma`,
    /// while every P-node meets the projection of its own fixed order. The
    /// C-nodes in `forced` only allow the given orientation.
    pub fn admits(&mut self, r: NodeId, sigma: &[NodeId], forced: &[(NodeId, Orient)]) -> bool {
        self.admits_placed(r, sigma, &FxHashMap::default(), forced)
    }

    /// Like `admits`, but every leaf in `gaps` must also land in one of the
    /// listed gaps of `sigma`, gap `j` being the one just before `sigma[j]`.
    pub fn admits_placed(&mut self, r: NodeId, sigma: &[NodeId], gaps: &FxHashMap<NodeId, Vec<u32>>, forced: &[(NodeId, Orient)]) -> bool {
        let mut pos: FxHashMap<NodeId, u32> = FxHashMap::default();
        for (i, &l) in sigma.iter().enumerate() {
            pos.insert(l, i as u32);
        }
        let forced: FxHashMap<NodeId, Orient> = forced.iter().map(|&(x, o)| (self.find(x), o)).collect();
        debug_assert!(sigma.is_empty() || sigma[0] == r);
        if self.nodes[r as usize].deg == 0 {
            return true;
        }
        // iterative post-order over arcs entering each node
        let ra = self.nodes[r as usize].head;
        let start = self.twin(ra);
        // (entry arc, phase)
        let mut stack: Vec<(ArcId, bool)> = vec![(start, false)];
        // per entry arc: (count, min, max)
        let mut info: FxHashMap<ArcId, (u32, u32, u32)> = FxHashMap::default();
        // per entry arc of a subtree without sigma leaves: gaps it may use, None for any
        let mut float: FxHashMap<ArcId, Option<Vec<u32>>> = FxHashMap::default();
        let k = sigma.len() as u32;
        while let Some((entry, expanded)) = stack.pop() {
            let x = self.node_of(entry);
            if self.kind(x) == Kind::Leaf {
                let v = match pos.get(&x) {
                    Some(&p) => (1, p, p),
                    None => {
                        float.insert(entry, gaps.get(&x).cloned());
                        (0, u32::MAX, 0)
                    }
                };
                info.insert(entry, v);
                continue;
            }
            let ring = self.arcs_from(entry);
            if !expanded {
                stack.push((entry, true));
                for &a in &ring[1..] {
                    let t = self.twin(a);
                    stack.push((t, false));
                }
                continue;
            }
            let mut kids: Vec<(u32, u32, u32, ArcId)> = Vec::new();
            let mut tot = 0;
            let mut mn = u32::MAX;
            let mut mx = 0;
            let mut loose: Option<Vec<u32>> = None;
            for &a in &ring[1..] {
                let t = self.twin(a);
                let (c, lo, hi) = info[&t];
                if c == 0 {
                    if let Some(Some(g)) = float.get(&t) {
                        loose = Some(match loose {
                            None => g.clone(),
                            Some(h) => h.into_iter().filter(|j| g.binary_search(j).is_ok()).collect(),
                        });
                    }
                } else {
                    if hi - lo + 1 != c {
                        return false;
                    }
                    kids.push((lo, hi, c, a));
                    tot += c;
                    mn = mn.min(lo);
                    mx = mx.max(hi);
                }
            }
            if tot > 0 && mx - mn + 1 != tot {
                return false;
            }
            kids.sort_unstable();
            // derived counter-clockwise order: entry then children by position
            let mut derived = Vec::with_capacity(kids.len() + 1);
            derived.push(entry);
            derived.extend(kids.iter().map(|k| k.3));
            // the entry side always contains position 0 (the root leaf)
            let set: rustc_hash::FxHashSet<ArcId> = derived.iter().copied().collect();
            let nonempty: Vec<ArcId> = ring.iter().copied().filter(|a| set.contains(a)).collect();
            let ok = match self.kind(x) {
                Kind::P => {
                    let fl = self.fixed_list(x);
                    let rho: Vec<ArcId> = fl.into_iter().filter(|a| set.contains(a)).collect();
                    let der: Vec<ArcId> = derived.iter().copied().filter(|&a| self.status(a).is_fixed()).collect();
                    cyclic_eq(&rho, &der) && !self.violated(x) && self.angles_fit(x, &derived)
                }
                Kind::C => {
                    let orient = forced.get(&x).copied();
                    let fixed = self.nodes[x as usize].fixed;
                    let asis = cyclic_eq(&nonempty, &derived);
                    let mut rev = nonempty.clone();
                    rev.reverse();
                    let revd = cyclic_eq(&rev, &derived);
                    let (try_asis, try_rev) = match orient {
                        Some(Orient::AsIs) => (asis, false),
                        Some(Orient::Reversed) => (false, revd),
                        None if fixed => (asis, false),
                        None => (asis, revd),
                    };
                    if tot == 0 || loose.is_none() {
                        try_asis || try_rev
                    } else {
                        let mut rev_ring = vec![entry];
                        rev_ring.extend(ring[1..].iter().rev().copied());
                        (try_asis && self.ring_fits(&ring, mn, k, &info, &float))
                            || (try_rev && self.ring_fits(&rev_ring, mn, k, &info, &float))
                    }
                }
                _ => true,
            };
            if !ok {
                return false;
            }
            if tot == 0 {
                if loose.as_ref().is_some_and(|g| g.is_empty()) {
                    return false;
                }
                float.insert(entry, loose);
            } else if loose.is_some() && self.kind(x) == Kind::P {
                let mut open: Vec<u32> = kids.iter().map(|kd| kd.0).collect();
                open.push((mx + 1) % k);
                for &a in &ring[1..] {
                    if let Some(Some(g)) = float.get(&self.twin(a)) {
                        if !g.iter().any(|j| open.contains(j)) {
                            return false;
                        }
                    }
                }
            }
            info.insert(entry, (tot, mn, mx));
        }
        true
    }

    /// Walks a C-node ring from its entry arc and checks that every subtree
    /// without sigma leaves sits in one of its gaps.
    fn ring_fits(
        &self,
        ring: &[ArcId],
        mn: u32,
        k: u32,
        info: &FxHashMap<ArcId, (u32, u32, u32)>,
        float: &FxHashMap<ArcId, Option<Vec<u32>>>,
    ) -> bool {
        let mut gap = mn % k;
        for &a in &ring[1..] {
            let t = self.twin(a);
            let (c, _, hi) = info[&t];
            if c > 0 {
                gap = (hi + 1) % k;
            } else if let Some(Some(g)) = float.get(&t) {
                if g.binary_search(&gap).is_err() {
                    return false;
                }
            }
        }
        true
    }
}

impl Forest {
    /// Whether the restricted arcs of `order` (a cyclic order of some arcs of
    /// P-node `x` whose fixed arcs already follow the fixed list) can be put
    /// into angles of their colors.
    fn angles_fit(&self, x: NodeId, order: &[ArcId]) -> bool {
        if self.nodes[x as usize].nfixed == 0 {
            return true;
        }
        let color = |a: ArcId| self.status(a).color().unwrap();
        let next = |a: ArcId| self.arcs[a as usize].fl[1];
        match order.iter().position(|&a| self.status(a).is_fixed()) {
            Some(start) => {
                let n = order.len();
                let rot: Vec<ArcId> = (0..=n).map(|i| order[(start + i) % n]).collect();
                let mut i = 0;
                while i < n {
                    let g = rot[i];
                    let mut j = i + 1;
                    while !self.status(rot[j]).is_fixed() {
                        j += 1;
                    }
                    let stop = rot[j];
                    let mut p = g;
                    for &a in &rot[i + 1..j] {
                        if let Status::Restricted(c) = self.status(a) {
                            while color(p) != c {
                                p = next(p);
                                if p == stop {
                                    return false;
                                }
                            }
                        }
                    }
                    i = j;
                }
                true
            }
            None => {
                let mut seq: Vec<Color> = Vec::new();
                for &a in order {
                    if let Status::Restricted(c) = self.status(a) {
                        if seq.last() != Some(&c) {
                            seq.push(c);
                        }
                    }
                }
                while seq.len() > 1 && seq.first() == seq.last() {
                    seq.pop();
                }
                if seq.len() <= 1 {
                    return true;
                }
                let k = self.nodes[x as usize].nfixed as usize;
                let fl = self.fixed_list(x);
                fl.iter().filter(|&&f| color(f) == seq[0]).any(|&f| {
                    let mut p = f;
                    let mut steps = 0;
                    for &c in &seq[1..] {
                        while color(p) != c {
                            p = next(p);
                            steps += 1;
                            if steps >= k {
                                return false;
                            }
                        }
                    }
                    true
                })
            }
        }
    }
}

/// Raw result of [`Forest::eta`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum EtaRaw {
    Edge(ArcId),
    Block(NodeId, Vec<ArcId>),
    NotConsecutive,
}

pub(crate) fn cyclic_eq<T: PartialEq + Copy>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let Some(off) = a.iter().position(|&x| x == b[0]) else {
        return false;
    };
    (0..a.len()).all(|i| a[(off + i) % a.len()] == b[i])
}

fn permute<T: Copy>(v: &mut [T], k: usize, f: &mut impl FnMut(&[T])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}
