//! The four binding principles over the propagated lists, with reshuffling
//! and exemption for o-bottom reflexives.

use std::collections::HashSet;

use serde::Serialize;

use crate::bdp::{propagate, OList, Propagation};
use crate::model::{LangParams, MarkerId, NodeId, Principle, ValidDiscourse};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BindingError {
    #[error("marker {marker:?} does not occur in the {list} list it is checked against")]
    NotInList { list: &'static str, marker: MarkerId },
    #[error("node {0:?} is not an anaphoric NP")]
    NotAnAnaphor(NodeId),
}

/// Which reverse principle removed a candidate.
#[derive(Serialize, Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReversePrinciple {
    E,
    V,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub marker: MarkerId,
    pub by: ReversePrinciple,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntecReport {
    /// The anaphor's r-mark.
    pub anaphor: MarkerId,
    pub node: NodeId,
    pub principle: Principle,
    pub antec: Vec<MarkerId>,
    pub exempt: bool,
    pub reshuffled: bool,
    pub domain_nodes: Vec<NodeId>,
    /// A' for A and B, Z' for Z and C, before any reshuffling.
    pub commanders: Vec<MarkerId>,
    /// Candidates dropped by the reverse principles.
    pub removed: Vec<Removal>,
}

impl AntecReport {
    /// Whether binding admits `m` as antecedent. Exempt reflexives are left to
    /// the resolver and admit anything but themselves.
    pub fn admits(&self, m: MarkerId) -> bool {
        if m == self.anaphor {
            return false;
        }
        self.exempt || self.antec.contains(&m)
    }

    /// Per-member compliance of a split antecedent.
    pub fn split_compliance(&self, members: &[MarkerId]) -> Vec<(MarkerId, bool)> {
        members.iter().map(|m| (*m, self.admits(*m))).collect()
    }
}

fn commanders_in(list: &OList, w: MarkerId, name: &'static str) -> Result<Vec<MarkerId>, BindingError> {
    let pos = list
        .position(w)
        .ok_or(BindingError::NotInList { list: name, marker: w })?;
    let we = list.entries[pos];
    Ok(list
        .entries
        .iter()
        .filter(|e| e.commands(&we))
        .map(|e| e.marker)
        .collect())
}

/// A': the o-commanders of `w` within its LIST-A, in list order.
pub fn principle_a(list_a: &OList, w: MarkerId) -> Result<Vec<MarkerId>, BindingError> {
    commanders_in(list_a, w, "LIST-A")
}

/// Z': the o-commanders of `w` within its LIST-Z, in list order.
pub fn principle_z(list_z: &OList, w: MarkerId) -> Result<Vec<MarkerId>, BindingError> {
    commanders_in(list_z, w, "LIST-Z")
}

fn subtract(list_u: &[MarkerId], out: &[MarkerId], w: MarkerId) -> Result<Vec<MarkerId>, BindingError> {
    if !list_u.contains(&w) {
        return Err(BindingError::NotInList { list: "LIST-U", marker: w });
    }
    let out: HashSet<MarkerId> = out.iter().copied().chain(std::iter::once(w)).collect();
    Ok(list_u.iter().copied().filter(|m| !out.contains(m)).collect())
}

/// B = U \ (A' ∪ {w}), in the order of `list_u`. A marker absent from
/// `list_a` has no local o-commanders.
pub fn principle_b(list_u: &[MarkerId], list_a: &OList, w: MarkerId) -> Result<Vec<MarkerId>, BindingError> {
    let a = principle_a(list_a, w).unwrap_or_default();
    subtract(list_u, &a, w)
}

/// C = U \ (Z' ∪ {w}), in the order of `list_u`.
pub fn principle_c(list_u: &[MarkerId], list_z: &OList, w: MarkerId) -> Result<Vec<MarkerId>, BindingError> {
    let z = principle_z(list_z, w).unwrap_or_default();
    subtract(list_u, &z, w)
}

/// O-commanders of `w`'s position in the domain of the immediately upwards
/// predicator. Empty when there is none.
pub fn reshuffle(d: &ValidDiscourse, prop: &Propagation, w: NodeId) -> Vec<MarkerId> {
    let Some((p, _)) = d.node(w).selected_by else {
        return Vec::new();
    };
    match d.predicator(p).selected_by {
        Some((up, slot)) => prop
            .commanders_of_slot(d, up, slot)
            .iter()
            .map(|e| e.marker)
            .collect(),
        None => Vec::new(),
    }
}

fn nodes_of(list: &OList) -> Vec<NodeId> {
    let mut seen = HashSet::new();
    list.entries
        .iter()
        .map(|e| e.node)
        .filter(|n| seen.insert(*n))
        .collect()
}

/// Binding report for one anaphoric NP.
pub fn bind_one(d: &ValidDiscourse, prop: &Propagation, w: NodeId) -> Result<AntecReport, BindingError> {
    let np = d.np_data(w).ok_or(BindingError::NotAnAnaphor(w))?;
    let principle = np.anaphor_type.principle().ok_or(BindingError::NotAnAnaphor(w))?;
    let m = np.r_mark;
    let lists = prop.get(w);
    let selected = d.node(w).selected_by.is_some();
    let local = principle == Principle::A || principle == Principle::B;
    let commanders = match (selected, local) {
        (false, _) => Vec::new(),
        (true, true) => principle_a(&lists.list_a, m)?,
        (true, false) => principle_z(&lists.list_z, m)?,
    };
    let mut domain_nodes = if !selected {
        Vec::new()
    } else if local {
        nodes_of(&lists.list_a)
    } else {
        nodes_of(&lists.list_z)
    };
    let (mut exempt, mut reshuffled) = (false, false);
    let antec = match principle {
        Principle::A | Principle::Z if !commanders.is_empty() => commanders.clone(),
        Principle::A | Principle::Z => {
            let upstairs = reshuffle(d, prop, w);
            if upstairs.is_empty() {
                exempt = true;
            } else {
                reshuffled = true;
                let (p, _) = d.node(w).selected_by.expect("reshuffle needs a selector");
                let (up, _) = d.predicator(p).selected_by.expect("reshuffle needs an upper predicator");
                domain_nodes = d.predicator(up).slots.iter().map(|s| s.node).collect();
            }
            upstairs
        }
        Principle::B | Principle::C => subtract(&lists.list_u, &commanders, m)?,
    };
    Ok(AntecReport {
        anaphor: m,
        node: w,
        principle,
        antec,
        exempt,
        reshuffled,
        domain_nodes,
        commanders,
        removed: Vec::new(),
    })
}

/// One report per anaphoric NP, in document order.
pub fn apply_binding(d: &ValidDiscourse, params: &LangParams) -> Result<Vec<AntecReport>, BindingError> {
    let prop = propagate(d, params);
    apply_binding_with(d, &prop)
}

pub fn apply_binding_with(d: &ValidDiscourse, prop: &Propagation) -> Result<Vec<AntecReport>, BindingError> {
    d.anaphors().map(|w| bind_one(d, prop, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdp::{Entry, Provenance};
    use crate::model::*;

    fn list(ms: &[usize]) -> OList {
        OList {
            provenance: Provenance::Empty,
            entries: ms
                .iter()
                .enumerate()
                .map(|(i, m)| Entry {
                    marker: MarkerId(*m),
                    node: NodeId(*m),
                    depth: 0,
                    rank: i as u32,
                    slot: i as u32,
                    sub: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn principle_a_on_a_lexical_list() {
        assert_eq!(principle_a(&list(&[24, 392]), MarkerId(392)).unwrap(), [MarkerId(24)]);
        assert!(principle_a(&list(&[24, 392]), MarkerId(24)).unwrap().is_empty());
        assert!(principle_a(&list(&[24]), MarkerId(7)).is_err());
    }

    #[test]
    fn principle_b_subtracts_in_list_u_order() {
        let u: Vec<MarkerId> = [415, 54, 247, 24, 392].iter().map(|m| MarkerId(*m)).collect();
        let b = principle_b(&u, &list(&[24, 392]), MarkerId(24)).unwrap();
        assert_eq!(b, [MarkerId(415), MarkerId(54), MarkerId(247), MarkerId(392)]);
        assert!(principle_b(&[MarkerId(1)], &list(&[]), MarkerId(1)).unwrap().is_empty());
        assert!(principle_b(&[MarkerId(1)], &list(&[]), MarkerId(2)).is_err());
    }

    #[test]
    fn principle_c_with_empty_z() {
        let u: Vec<MarkerId> = (0..4).map(MarkerId).collect();
        let c = principle_c(&u, &list(&[2]), MarkerId(2)).unwrap();
        assert_eq!(c, [MarkerId(0), MarkerId(1), MarkerId(3)]);
    }

    #[test]
    fn lone_pronoun_takes_context() {
        let frag = Node::clause(
            "s",
            ArgStructure::linear(&[("he", "subj")]),
            vec![Node::np("he", NpInfo::new(AnaphorType::Pronoun, "he"))],
        );
        let d = Discourse::from_parts(
            vec![ContextMarker {
                id: "c".into(),
                number: Number::Unspecified,
            }],
            vec![frag],
        )
        .validate()
        .unwrap();
        let r = apply_binding(&d, &LangParams::english()).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(d.labels(&r[0].antec), ["c"]);
        assert!(!r[0].exempt);
    }

    #[test]
    fn root_subject_reflexive_is_exempt() {
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("r", "subj"), ("o", "obj")]),
            vec![
                Node::np("r", NpInfo::new(AnaphorType::ShortReflexive, "r")),
                Node::np("o", NpInfo::new(AnaphorType::NonPronoun, "o")),
            ],
        );
        let d = Discourse::from_parts(vec![], vec![s]).validate().unwrap();
        let r = apply_binding(&d, &LangParams::english()).unwrap();
        assert!(r[0].exempt && r[0].antec.is_empty() && !r[0].reshuffled);
        assert!(r[0].admits(d.marker_id("o").unwrap()));
        assert!(!r[0].admits(r[0].anaphor));
    }
}
