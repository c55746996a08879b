//! Checking a proposed resolution: coreference transitivity, accidental
//! binding violations, interpretive loops, and the pluralisation hook for
//! split antecedents.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{MarkerId, Number, Principle, ValidDiscourse};
use crate::principles::{AntecReport, ReversePrinciple};
use crate::reverse::MarkerKindView;

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    Coreference,
    Bound,
    EType,
    Bridging,
    Split,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnaphoricLink {
    pub anaphor: MarkerId,
    pub antecedents: Vec<MarkerId>,
    pub kind: LinkKind,
}

impl AnaphoricLink {
    pub fn new(anaphor: MarkerId, antecedent: MarkerId, kind: LinkKind) -> Self {
        AnaphoricLink {
            anaphor,
            antecedents: vec![antecedent],
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("split link for {0:?} needs at least two antecedents")]
    SplitTooFew(MarkerId),
    #[error("link for {0:?} must have exactly one antecedent")]
    NotSingle(MarkerId),
    #[error("e-type link for {anaphor:?} must point at the r-mark of a quantificational NP")]
    ETypeNeedsEMarker { anaphor: MarkerId },
    #[error("bound link for {anaphor:?} points at an e-marker")]
    BoundToEMarker { anaphor: MarkerId },
}

/// Structural checks on a link.
pub fn validate_link(d: &ValidDiscourse, link: &AnaphoricLink) -> Result<(), LinkError> {
    match link.kind {
        LinkKind::Split if link.antecedents.len() < 2 => Err(LinkError::SplitTooFew(link.anaphor)),
        LinkKind::Split => Ok(()),
        _ if link.antecedents.len() != 1 => Err(LinkError::NotSingle(link.anaphor)),
        LinkKind::EType if !MarkerKindView::of(d, link.antecedents[0]).is_e_marker => {
            Err(LinkError::ETypeNeedsEMarker { anaphor: link.anaphor })
        }
        LinkKind::Bound if MarkerKindView::of(d, link.antecedents[0]).is_e_marker => {
            Err(LinkError::BoundToEMarker { anaphor: link.anaphor })
        }
        _ => Ok(()),
    }
}

/// Disjoint sets with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Equivalence classes over the discourse markers induced by coreference.
#[derive(Clone, Debug)]
pub struct CorefClasses {
    class_of: Vec<usize>,
}

impl CorefClasses {
    pub fn same(&self, a: MarkerId, b: MarkerId) -> bool {
        self.class_of[a.0] == self.class_of[b.0]
    }

    /// Members of `m`'s class other than `m`, ascending.
    pub fn mates(&self, m: MarkerId) -> Vec<MarkerId> {
        let c = self.class_of[m.0];
        (0..self.class_of.len())
            .filter(|i| *i != m.0 && self.class_of[*i] == c)
            .map(MarkerId)
            .collect()
    }

    /// All classes, each ascending, ordered by smallest member.
    pub fn classes(&self) -> Vec<Vec<MarkerId>> {
        let mut by: BTreeMap<usize, Vec<MarkerId>> = BTreeMap::new();
        for (i, c) in self.class_of.iter().enumerate() {
            by.entry(*c).or_default().push(MarkerId(i));
        }
        let mut out: Vec<Vec<MarkerId>> = by.into_values().collect();
        out.sort_by_key(|c| c[0]);
        out
    }
}

/// Only coreference links merge classes.
pub fn coref_closure(d: &ValidDiscourse, links: &[AnaphoricLink]) -> CorefClasses {
    let n = d.markers.len();
    let mut uf = UnionFind::new(n);
    for l in links.iter().filter(|l| l.kind == LinkKind::Coreference) {
        for a in &l.antecedents {
            uf.union(l.anaphor.0, a.0);
        }
    }
    CorefClasses {
        class_of: (0..n).map(|i| uf.find(i)).collect(),
    }
}

/// ANTEC extended with the anaphor's coreference class-mates.
pub fn augment_antec(report: &AntecReport, classes: &CorefClasses) -> Vec<MarkerId> {
    let mut out = report.antec.clone();
    let have: HashSet<MarkerId> = out.iter().copied().collect();
    out.extend(classes.mates(report.anaphor).into_iter().filter(|m| !have.contains(m)));
    out
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    PrincipleA,
    PrincipleZ,
    PrincipleB,
    PrincipleC,
    ReverseE,
    ReverseV,
    /// A reflexive outside exempt positions with a split antecedent.
    SplitReflexive,
    InterpretiveLoop,
}

impl ViolationKind {
    pub fn of_principle(p: Principle) -> Self {
        match p {
            Principle::A => ViolationKind::PrincipleA,
            Principle::Z => ViolationKind::PrincipleZ,
            Principle::B => ViolationKind::PrincipleB,
            Principle::C => ViolationKind::PrincipleC,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolutionViolation {
    pub kind: ViolationKind,
    pub anaphor: MarkerId,
    pub antecedent: MarkerId,
    /// True when the offending antecedent is only reached through
    /// coreference transitivity.
    pub via_closure: bool,
}

fn rejection_kind(r: &AntecReport, x: MarkerId) -> ViolationKind {
    match r.removed.iter().find(|rm| rm.marker == x) {
        Some(rm) if rm.by == ReversePrinciple::E => ViolationKind::ReverseE,
        Some(_) => ViolationKind::ReverseV,
        None => ViolationKind::of_principle(r.principle),
    }
}

/// Violations a resolution induces against the (filtered) reports.
pub fn check_resolution(
    d: &ValidDiscourse,
    links: &[AnaphoricLink],
    reports: &[AntecReport],
) -> Vec<ResolutionViolation> {
    let by_anaphor: HashMap<MarkerId, &AntecReport> = reports.iter().map(|r| (r.anaphor, r)).collect();
    let classes = coref_closure(d, links);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |v: ResolutionViolation, out: &mut Vec<ResolutionViolation>| {
        if seen.insert((v.kind, v.anaphor, v.antecedent)) {
            out.push(v);
        }
    };

    // the links themselves
    for l in links {
        let Some(r) = by_anaphor.get(&l.anaphor) else {
            continue;
        };
        if l.kind == LinkKind::Split && r.principle.is_reflexive() && !r.exempt {
            push(
                ResolutionViolation {
                    kind: ViolationKind::SplitReflexive,
                    anaphor: l.anaphor,
                    antecedent: l.antecedents[0],
                    via_closure: false,
                },
                &mut out,
            );
        }
        for &x in &l.antecedents {
            if !r.admits(x) {
                push(
                    ResolutionViolation {
                        kind: rejection_kind(r, x),
                        anaphor: l.anaphor,
                        antecedent: x,
                        via_closure: false,
                    },
                    &mut out,
                );
            }
        }
    }

    // transitivity: every coreferent marker must be an admissible antecedent
    for r in reports {
        for x in classes.mates(r.anaphor) {
            if !r.admits(x) {
                push(
                    ResolutionViolation {
                        kind: rejection_kind(r, x),
                        anaphor: r.anaphor,
                        antecedent: x,
                        via_closure: true,
                    },
                    &mut out,
                );
            }
        }
    }

    for (a, b) in interpretive_loops(links) {
        push(
            ResolutionViolation {
                kind: ViolationKind::InterpretiveLoop,
                anaphor: a,
                antecedent: b,
                via_closure: false,
            },
            &mut out,
        );
    }
    out
}

/// Non-coreference links `a -> b` such that `b` depends back on `a`: such
/// anaphors would be each other's only anchor.
pub fn interpretive_loops(links: &[AnaphoricLink]) -> Vec<(MarkerId, MarkerId)> {
    let mut adj: HashMap<MarkerId, Vec<MarkerId>> = HashMap::new();
    for l in links {
        adj.entry(l.anaphor).or_default().extend(l.antecedents.iter().copied());
    }
    let reaches = |from: MarkerId, to: MarkerId| {
        let mut stack = vec![from];
        let mut seen = HashSet::new();
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if seen.insert(x) {
                stack.extend(adj.get(&x).into_iter().flatten().copied());
            }
        }
        false
    };
    let mut out = Vec::new();
    for l in links.iter().filter(|l| l.kind != LinkKind::Coreference) {
        for &b in &l.antecedents {
            if reaches(b, l.anaphor) {
                out.push((l.anaphor, b));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PluralError {
    #[error("{len} candidates exceed the pluralisation cap of {cap}")]
    OverCap { len: usize, cap: usize },
}

pub const DEFAULT_ISUM_CAP: usize = 16;

/// An atomic candidate or an i-sum of several.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluralCandidate {
    pub members: Vec<MarkerId>,
    pub number: Number,
}

impl PluralCandidate {
    pub fn is_sum(&self) -> bool {
        self.members.len() > 1
    }

    pub fn label(&self, d: &ValidDiscourse) -> String {
        d.labels(&self.members).join("+")
    }
}

/// Closure of `antec` under i-sum: every non-empty subset, smaller sums
/// first, members in `antec` order.
pub fn pluralize_candidates(
    d: &ValidDiscourse,
    antec: &[MarkerId],
    cap: usize,
) -> Result<Vec<PluralCandidate>, PluralError> {
    let n = antec.len();
    if n > cap || n >= usize::BITS as usize {
        return Err(PluralError::OverCap { len: n, cap });
    }
    let mut masks: Vec<usize> = (1..(1usize << n)).collect();
    // by size, then by the members' positions in antec
    masks.sort_by_key(|m| {
        let positions: Vec<usize> = (0..n).filter(|i| m & (1 << i) != 0).collect();
        (m.count_ones(), positions)
    });
    Ok(masks
        .into_iter()
        .map(|m| {
            let members: Vec<MarkerId> = (0..n).filter(|i| m & (1 << i) != 0).map(|i| antec[i]).collect();
            let number = if members.len() > 1 {
                Number::Plural
            } else {
                d.marker(members[0]).number
            };
            PluralCandidate { members, number }
        })
        .collect())
}
