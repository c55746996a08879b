//! Obliqueness orders and the o-command relation, computed directly from the
//! tree by chasing argument slots. This is the reference definition; the list
//! machinery in [`crate::bdp`] is checked against it.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::model::{LangParams, LocalityMode, MarkerId, MarkerKind, NodeId, PredId, ValidDiscourse};

/// Strict order over the markers of one argument structure, as `(x, y)`
/// pairs meaning `x` is less oblique than `y`.
pub fn obliqueness_order(d: &ValidDiscourse, pred: PredId) -> Vec<(MarkerId, MarkerId)> {
    let p = d.predicator(pred);
    let slot_markers: Vec<Vec<MarkerId>> = p
        .slots
        .iter()
        .map(|s| d.np_data(s.node).map_or_else(Vec::new, |np| np.markers().collect()))
        .collect();
    let mut out = Vec::new();
    for (i, xs) in slot_markers.iter().enumerate() {
        // var before r-mark inside one slot
        for (a, x) in xs.iter().enumerate() {
            for y in &xs[a + 1..] {
                out.push((*x, *y));
            }
        }
        for (j, ys) in slot_markers.iter().enumerate() {
            if p.less_oblique(i, j) {
                for x in xs {
                    for y in ys {
                        out.push((*x, *y));
                    }
                }
            }
        }
    }
    out
}

/// Whether argument node `z` is `x` or is reachable from `x` through
/// predicators that `x` (transitively) hosts.
fn reaches(d: &ValidDiscourse, x: NodeId, z: NodeId, seen: &mut HashSet<NodeId>) -> bool {
    if x == z {
        return true;
    }
    if !seen.insert(x) {
        return false;
    }
    match d.node(x).predicator {
        Some(q) => d
            .predicator(q)
            .slots
            .iter()
            .any(|s| reaches(d, s.node, z, seen)),
        None => false,
    }
}

/// Node-level o-command: `y` is less oblique than some co-argument `x` that
/// is, or subcategorises (through any number of embeddings) for, `z`.
pub fn node_o_command(d: &ValidDiscourse, y: NodeId, z: NodeId) -> bool {
    let Some((p, i)) = d.node(y).selected_by else {
        return false;
    };
    let pred = d.predicator(p);
    pred.slots.iter().enumerate().any(|(j, x)| {
        pred.less_oblique(i, j) && reaches(d, x.node, z, &mut HashSet::new())
    })
}

/// Marker-level o-command. A quantificational NP's var commands its own
/// r-mark; context markers neither command nor are commanded.
pub fn o_command(d: &ValidDiscourse, x: MarkerId, y: MarkerId) -> bool {
    if x == y {
        return false;
    }
    let (Some(nx), Some(ny)) = (d.np_of(x), d.np_of(y)) else {
        return false;
    };
    if nx == ny {
        return d.marker(x).kind == MarkerKind::Var && d.marker(y).kind == MarkerKind::RMark;
    }
    node_o_command(d, nx, ny)
}

/// All o-commanders of `w` among the discourse markers, in document order.
pub fn o_commanders(d: &ValidDiscourse, w: MarkerId) -> Vec<MarkerId> {
    d.markers
        .iter()
        .map(|m| m.id)
        .filter(|m| o_command(d, *m, w))
        .collect()
}

/// The locality mode in force for an anaphor: the item override, else the
/// language default.
pub fn effective_mode(d: &ValidDiscourse, w: NodeId, params: &LangParams) -> LocalityMode {
    d.np_data(w)
        .and_then(|np| np.locality)
        .unwrap_or(params.locality_mode)
}

/// Chain of predicators from the one selecting `p`'s host upwards, each with
/// the slot index the lower host occupies.
pub fn upward_chain(d: &ValidDiscourse, p: PredId) -> Vec<(PredId, usize)> {
    let mut out = Vec::new();
    let mut cur = p;
    while let Some((up, slot)) = d.predicator(cur).selected_by {
        out.push((up, slot));
        cur = up;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    /// Predicators whose selectional domain is included, innermost first.
    pub predicators: Vec<PredId>,
    /// Argument nodes making up the domain.
    pub nodes: BTreeSet<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalDomain {
    Domain(Domain),
    /// The anaphor is not selected by any predicator.
    NoDomain,
}

impl LocalDomain {
    pub fn nodes(&self) -> Option<&BTreeSet<NodeId>> {
        match self {
            LocalDomain::Domain(dm) => Some(&dm.nodes),
            LocalDomain::NoDomain => None,
        }
    }
}

/// Whether a clause hosting predicator `p` closes a domain under `mode`.
/// Hosts lacking the relevant feature count as boundaries.
pub fn closes_domain(d: &ValidDiscourse, p: PredId, mode: LocalityMode) -> bool {
    let host = d.node(d.predicator(p).host);
    match mode {
        LocalityMode::Immediate | LocalityMode::Upstairs => true,
        LocalityMode::FirstFinite => host.finiteness != Some(crate::model::Finiteness::Nonfinite),
        LocalityMode::FirstIndicative => !matches!(
            host.mood,
            Some(crate::model::Mood::Subjunctive) | Some(crate::model::Mood::Other)
        ),
    }
}

/// Local domain of the anaphoric NP `w` under the language parameters.
pub fn local_domain(d: &ValidDiscourse, w: NodeId, params: &LangParams) -> LocalDomain {
    let Some((p, _)) = d.node(w).selected_by else {
        return LocalDomain::NoDomain;
    };
    let mode = effective_mode(d, w, params);
    let slots = |q: PredId| d.predicator(q).slots.iter().map(|s| s.node).collect::<Vec<_>>();
    let mut predicators = Vec::new();
    let mut nodes = BTreeSet::new();
    match mode {
        LocalityMode::Immediate => {
            predicators.push(p);
            nodes.extend(slots(p));
        }
        LocalityMode::FirstFinite | LocalityMode::FirstIndicative => {
            let mut cur = p;
            loop {
                predicators.push(cur);
                nodes.extend(slots(cur));
                if closes_domain(d, cur, mode) {
                    break;
                }
                match d.predicator(cur).selected_by {
                    Some((up, _)) => cur = up,
                    None => break,
                }
            }
        }
        LocalityMode::Upstairs => {
            nodes.insert(w);
            if let Some((up, _)) = d.predicator(p).selected_by {
                predicators.push(up);
                nodes.extend(slots(up));
            }
        }
    }
    LocalDomain::Domain(Domain { predicators, nodes })
}

/// Local o-commanders of `w` by brute force: discourse markers that
/// o-command `w`'s r-mark and sit in its local domain.
pub fn local_o_commanders(d: &ValidDiscourse, w: NodeId, params: &LangParams) -> Vec<MarkerId> {
    let Some(np) = d.np_data(w) else {
        return Vec::new();
    };
    let dom = local_domain(d, w, params);
    let Some(nodes) = dom.nodes() else {
        return Vec::new();
    };
    d.markers
        .iter()
        .map(|m| m.id)
        .filter(|m| d.np_of(*m).map_or(false, |n| nodes.contains(&n)))
        .filter(|m| o_command(d, *m, np.r_mark))
        .collect()
}

/// True iff nothing in the obliqueness order of the predicator directly
/// selecting `w` commands `w`'s r-mark.
pub fn is_o_bottom(d: &ValidDiscourse, w: NodeId) -> bool {
    let Some(np) = d.np_data(w) else {
        return true;
    };
    match d.node(w).selected_by {
        None => true,
        Some((p, _)) => !obliqueness_order(d, p)
            .iter()
            .any(|(x, y)| *y == np.r_mark && d.np_of(*x) != Some(w)),
    }
}

/// The o-command relation materialised over all markers, with the local
/// restriction per anaphor.
#[derive(Clone, Debug, Default)]
pub struct OCommandGraph {
    pub edges: BTreeSet<(MarkerId, MarkerId)>,
    pub local_edges: BTreeSet<(MarkerId, MarkerId)>,
    pub domains: BTreeMap<MarkerId, BTreeSet<NodeId>>,
}

impl OCommandGraph {
    pub fn build(d: &ValidDiscourse, params: &LangParams) -> Self {
        let mut g = OCommandGraph::default();
        for x in &d.markers {
            for y in &d.markers {
                if o_command(d, x.id, y.id) {
                    g.edges.insert((x.id, y.id));
                }
            }
        }
        for w in d.anaphors() {
            let np = d.np_data(w).expect("anaphors are NPs");
            if let Some(nodes) = local_domain(d, w, params).nodes() {
                for x in local_o_commanders(d, w, params) {
                    g.local_edges.insert((x, np.r_mark));
                }
                g.domains.insert(np.r_mark, nodes.clone());
            }
        }
        g
    }

    pub fn commands(&self, x: MarkerId, y: MarkerId) -> bool {
        self.edges.contains(&(x, y))
    }
}
