//! Binding Domains Principle: LIST-A, LIST-Z, LIST-U and LIST-LU for every
//! node of a discourse.
//!
//! Two passes. Bottom-up, each predicator gets its lexical LIST-A and each
//! node its LIST-LU. Top-down, LIST-Z is assembled along selection chains and
//! LIST-U percolates from the root with the i-within-i removals inside NPs.
//!
//! Lists that the grammar declares token-identical are the same `Arc`, and
//! carry the same [`Provenance`].

use std::collections::HashSet;
use std::sync::Arc;

use crate::model::{LangParams, LocalityMode, MarkerId, NodeId, PredId, ValidDiscourse};
use crate::obliqueness::{closes_domain, effective_mode};

/// One marker in an obliqueness-ordered list, with enough position data to
/// decide o-command between two entries of the same list.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub marker: MarkerId,
    /// The NP contributing the marker.
    pub node: NodeId,
    /// Embedding depth of the predicator the entry comes from (0 = topmost).
    pub depth: u32,
    pub rank: u32,
    pub slot: u32,
    /// 0 for a var, 1 for an r-mark.
    pub sub: u8,
}

impl Entry {
    /// Whether `self` o-commands `other`, both taken from one list.
    pub fn commands(&self, other: &Entry) -> bool {
        if self.depth != other.depth {
            return self.depth < other.depth;
        }
        if self.slot == other.slot {
            return self.sub < other.sub;
        }
        self.rank < other.rank
    }
}

/// Where a list came from. Equal provenance means token identity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Empty,
    /// Lexical LIST-A of a predicator.
    Lexical(PredId),
    /// Extended local list of a predicator reaching up to the first clause
    /// satisfying the mode.
    Extended(PredId, LocalityMode),
    /// Upstairs domain of a given argument node.
    Upstairs(NodeId),
    /// LIST-Z of a predicator.
    Chain(PredId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OList {
    pub provenance: Provenance,
    pub entries: Vec<Entry>,
}

impl OList {
    pub fn empty() -> Self {
        OList {
            provenance: Provenance::Empty,
            entries: Vec::new(),
        }
    }

    pub fn markers(&self) -> Vec<MarkerId> {
        self.entries.iter().map(|e| e.marker).collect()
    }

    pub fn position(&self, m: MarkerId) -> Option<usize> {
        self.entries.iter().position(|e| e.marker == m)
    }

    pub fn contains(&self, m: MarkerId) -> bool {
        self.position(m).is_some()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct BindLists {
    pub list_a: Arc<OList>,
    pub list_z: Arc<OList>,
    pub list_u: Arc<Vec<MarkerId>>,
    pub list_lu: Arc<Vec<MarkerId>>,
}

impl BindLists {
    pub fn same_list_a(&self, other: &BindLists) -> bool {
        Arc::ptr_eq(&self.list_a, &other.list_a)
    }
}

/// Lexical LIST-A of a predicator: NP arguments in binding order, a
/// quantificational argument contributing its var right before its r-mark.
/// Clausal arguments contribute nothing.
pub fn lexical_arg_lists(d: &ValidDiscourse, pred: PredId) -> OList {
    lexical_entries(d, pred, 0)
}

fn lexical_entries(d: &ValidDiscourse, pred: PredId, depth: u32) -> OList {
    let p = d.predicator(pred);
    let mut entries = Vec::new();
    for (i, s) in p.slots.iter().enumerate() {
        if let Some(np) = d.np_data(s.node) {
            for (sub, m) in np.markers().enumerate() {
                let sub = if np.var.is_some() { sub as u8 } else { 1 };
                entries.push(Entry {
                    marker: m,
                    node: s.node,
                    depth,
                    rank: p.rank(i),
                    slot: i as u32,
                    sub,
                });
            }
        }
    }
    OList {
        provenance: Provenance::Lexical(pred),
        entries,
    }
}

/// Result of [`propagate`].
#[derive(Clone, Debug)]
pub struct Propagation {
    lists: Vec<BindLists>,
    /// Lexical LIST-A per predicator, entries at the predicator's depth.
    own: Vec<Arc<OList>>,
    /// Commanders contributed by the predicators above, outermost first.
    prefix: Vec<Arc<Vec<Entry>>>,
    chain: Vec<Arc<OList>>,
    depth: Vec<u32>,
}

impl Propagation {
    pub fn get(&self, n: NodeId) -> &BindLists {
        &self.lists[n.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &BindLists)> {
        self.lists.iter().enumerate().map(|(i, l)| (NodeId(i), l))
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Lexical LIST-A of `p`.
    pub fn own_a(&self, p: PredId) -> &Arc<OList> {
        &self.own[p.0]
    }

    /// LIST-Z of the domain of `p`.
    pub fn chain(&self, p: PredId) -> &Arc<OList> {
        &self.chain[p.0]
    }

    pub fn depth(&self, p: PredId) -> u32 {
        self.depth[p.0]
    }

    /// Entries of `p`'s lexical list that command its `slot`-th argument
    /// position.
    pub fn commanders_of_slot(&self, d: &ValidDiscourse, p: PredId, slot: usize) -> Vec<Entry> {
        let pred = d.predicator(p);
        self.own[p.0]
            .entries
            .iter()
            .filter(|e| pred.less_oblique(e.slot as usize, slot))
            .copied()
            .collect()
    }
}

fn compute_depths(d: &ValidDiscourse) -> Vec<u32> {
    let mut depth: Vec<Option<u32>> = vec![None; d.predicators.len()];
    for start in 0..d.predicators.len() {
        let mut path = Vec::new();
        let mut cur = PredId(start);
        let base = loop {
            if let Some(k) = depth[cur.0] {
                break k;
            }
            path.push(cur);
            match d.predicator(cur).selected_by {
                Some((up, _)) => cur = up,
                None => break u32::MAX,
            }
        };
        // MAX marks a path ending at a top predicator
        let mut k = if base == u32::MAX { 0 } else { base + 1 };
        for p in path.into_iter().rev() {
            depth[p.0] = Some(k);
            k += 1;
        }
    }
    depth.into_iter().map(|k| k.unwrap_or(0)).collect()
}

/// Predicators ordered so that every predicator comes after the one that
/// selects its host.
fn top_down_order(depth: &[u32]) -> Vec<PredId> {
    let mut order: Vec<PredId> = (0..depth.len()).map(PredId).collect();
    order.sort_by_key(|p| depth[p.0]);
    order
}

fn dedup_first(entries: Vec<Entry>) -> Vec<Entry> {
    let mut seen = HashSet::with_capacity(entries.len());
    entries.into_iter().filter(|e| seen.insert(e.marker)).collect()
}

/// Computes the four binding lists at every node.
pub fn propagate(d: &ValidDiscourse, params: &LangParams) -> Propagation {
    let depth = compute_depths(d);
    let own: Vec<Arc<OList>> = (0..d.predicators.len())
        .map(|p| Arc::new(lexical_entries(d, PredId(p), depth[p])))
        .collect();

    // Clause III: commanders of each embedded position, outer to inner
    let mut prefix: Vec<Arc<Vec<Entry>>> = vec![Arc::new(Vec::new()); d.predicators.len()];
    let mut chain: Vec<Arc<OList>> = vec![Arc::new(OList::empty()); d.predicators.len()];
    for p in top_down_order(&depth) {
        if let Some((up, slot)) = d.predicator(p).selected_by {
            let upper = d.predicator(up);
            let mut v: Vec<Entry> = prefix[up.0].as_ref().clone();
            v.extend(
                own[up.0]
                    .entries
                    .iter()
                    .filter(|e| upper.less_oblique(e.slot as usize, slot))
                    .copied(),
            );
            prefix[p.0] = Arc::new(v);
        }
        let mut entries = prefix[p.0].as_ref().clone();
        entries.extend(own[p.0].entries.iter().copied());
        chain[p.0] = Arc::new(OList {
            provenance: Provenance::Chain(p),
            entries: dedup_first(entries),
        });
    }

    let mut prop = Propagation {
        lists: Vec::new(),
        own,
        prefix,
        chain,
        depth,
    };

    let list_lu = compute_list_lu(d);
    let list_u = compute_list_u(d, &list_lu[d.root.0]);

    let empty = Arc::new(OList::empty());
    let mut extended: std::collections::HashMap<(PredId, LocalityMode), Arc<OList>> =
        std::collections::HashMap::new();
    let doms = compute_domains(d);
    let mut lists = Vec::with_capacity(d.nodes.len());
    for (i, node) in d.nodes.iter().enumerate() {
        let n = NodeId(i);
        let (list_a, list_z) = match doms[i] {
            None => (empty.clone(), empty.clone()),
            Some(p) => {
                let list_z = prop.chain[p.0].clone();
                let list_a = if node.np.is_some() && node.selected_by.is_some() {
                    let mode = effective_mode(d, n, params);
                    prop.local_list(d, p, n, mode, &mut extended)
                } else {
                    prop.own[p.0].clone()
                };
                (list_a, list_z)
            }
        };
        lists.push(BindLists {
            list_a,
            list_z,
            list_u: list_u[i].clone(),
            list_lu: list_lu[i].clone(),
        });
    }
    prop.lists = lists;
    prop
}

impl Propagation {
    /// LIST-A at argument NP `n` of `p` under a locality mode.
    fn local_list(
        &self,
        d: &ValidDiscourse,
        p: PredId,
        n: NodeId,
        mode: LocalityMode,
        cache: &mut std::collections::HashMap<(PredId, LocalityMode), Arc<OList>>,
    ) -> Arc<OList> {
        match mode {
            LocalityMode::Immediate => self.own[p.0].clone(),
            LocalityMode::FirstFinite | LocalityMode::FirstIndicative => {
                if let Some(l) = cache.get(&(p, mode)) {
                    return l.clone();
                }
                let stop = extended_top(d, p, mode);
                let floor = self.depth[stop.0];
                let mut entries: Vec<Entry> = self.prefix[p.0]
                    .iter()
                    .filter(|e| e.depth >= floor)
                    .copied()
                    .collect();
                entries.extend(self.own[p.0].entries.iter().copied());
                let l = if stop == p {
                    self.own[p.0].clone()
                } else {
                    Arc::new(OList {
                        provenance: Provenance::Extended(p, mode),
                        entries: dedup_first(entries),
                    })
                };
                cache.insert((p, mode), l.clone());
                l
            }
            LocalityMode::Upstairs => Arc::new(self.upstairs_list(d, p, n)),
        }
    }

    /// Commanders of `p`'s host in the immediately upwards predicator,
    /// followed by `n`'s own entries.
    pub fn upstairs_list(&self, d: &ValidDiscourse, p: PredId, n: NodeId) -> OList {
        let mut entries = match d.predicator(p).selected_by {
            Some((up, slot)) => self.commanders_of_slot(d, up, slot),
            None => Vec::new(),
        };
        entries.extend(self.own[p.0].entries.iter().filter(|e| e.node == n).copied());
        OList {
            provenance: Provenance::Upstairs(n),
            entries,
        }
    }
}

/// Topmost predicator of the extended domain starting at `p`.
pub fn extended_top(d: &ValidDiscourse, p: PredId, mode: LocalityMode) -> PredId {
    let mut cur = p;
    loop {
        if closes_domain(d, cur, mode) {
            return cur;
        }
        match d.predicator(cur).selected_by {
            Some((up, _)) => cur = up,
            None => return cur,
        }
    }
}

/// Predicator whose LIST-A a node shares (Clause II), if any.
fn compute_domains(d: &ValidDiscourse) -> Vec<Option<PredId>> {
    let mut dom: Vec<Option<PredId>> = vec![None; d.nodes.len()];
    // preorder: parents are visited before daughters
    let mut stack = vec![d.root];
    while let Some(n) = stack.pop() {
        let node = d.node(n);
        dom[n.0] = if let (Some(p), None) = (node.predicator, &node.np) {
            // clauses share their head's list even when selected
            Some(p)
        } else if let Some((p, _)) = node.selected_by {
            Some(p)
        } else if node.np.is_some() {
            None
        } else {
            match node.parent {
                Some(parent) => d.node(parent).predicator.or(dom[parent.0]),
                None => None,
            }
        };
        stack.extend(node.daughters.iter().rev().copied());
    }
    dom
}

fn compute_list_lu(d: &ValidDiscourse) -> Vec<Arc<Vec<MarkerId>>> {
    let mut out: Vec<Option<Arc<Vec<MarkerId>>>> = vec![None; d.nodes.len()];
    // postorder via explicit stack
    let mut stack = vec![(d.root, false)];
    while let Some((n, done)) = stack.pop() {
        let node = d.node(n);
        if !done {
            stack.push((n, true));
            stack.extend(node.daughters.iter().rev().map(|c| (*c, false)));
            continue;
        }
        let mut v: Vec<MarkerId> = Vec::new();
        if n == d.ctx {
            v.extend(d.context_markers());
        }
        if let Some(np) = &node.np {
            v.extend(np.markers());
        }
        if v.is_empty() && node.daughters.len() == 1 {
            out[n.0] = out[node.daughters[0].0].clone();
            continue;
        }
        for c in &node.daughters {
            v.extend(out[c.0].as_ref().expect("daughters first").iter().copied());
        }
        out[n.0] = Some(Arc::new(v));
    }
    out.into_iter().map(|l| l.expect("every node visited")).collect()
}

fn compute_list_u(d: &ValidDiscourse, root_lu: &Arc<Vec<MarkerId>>) -> Vec<Arc<Vec<MarkerId>>> {
    let mut out: Vec<Option<Arc<Vec<MarkerId>>>> = vec![None; d.nodes.len()];
    out[d.root.0] = Some(root_lu.clone());
    let mut stack = vec![d.root];
    while let Some(n) = stack.pop() {
        let node = d.node(n);
        let here = out[n.0].clone().expect("parent first");
        match &node.np {
            None => {
                for c in &node.daughters {
                    out[c.0] = Some(here.clone());
                }
            }
            Some(np) => {
                // i-within-i: no daughter of NP k can take k itself; a head-side
                // daughter also loses a Spec that is not k's own argument
                let own: HashSet<MarkerId> = np.markers().collect();
                let spec_extra: HashSet<MarkerId> = match node.spec {
                    Some(s) => {
                        let own_arg = matches!(
                            (d.node(s).selected_by, node.predicator),
                            (Some((p, _)), Some(q)) if p == q
                        );
                        match d.np_data(s) {
                            Some(snp) if !own_arg => snp.markers().collect(),
                            _ => HashSet::new(),
                        }
                    }
                    None => HashSet::new(),
                };
                let spec_side: Arc<Vec<MarkerId>> =
                    Arc::new(here.iter().copied().filter(|m| !own.contains(m)).collect());
                let head_side: Arc<Vec<MarkerId>> = if spec_extra.is_empty() {
                    spec_side.clone()
                } else {
                    Arc::new(
                        spec_side
                            .iter()
                            .copied()
                            .filter(|m| !spec_extra.contains(m))
                            .collect(),
                    )
                };
                for c in &node.daughters {
                    out[c.0] = Some(if Some(*c) == node.spec {
                        spec_side.clone()
                    } else {
                        head_side.clone()
                    });
                }
            }
        }
        stack.extend(node.daughters.iter().copied());
    }
    out.into_iter().map(|l| l.expect("every node visited")).collect()
}
