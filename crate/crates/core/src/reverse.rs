//! Antecedent-side constraints for quantificational NPs.
//!
//! The r-mark of a quantificational NP (its e-marker) may only antecede
//! anaphors it does not o-command; its var (v-marker) only anaphors it does
//! o-command. Weak crossover is the v-marker case.

use crate::model::{MarkerId, MarkerKind, ValidDiscourse};
use crate::obliqueness::o_command;
use crate::principles::{AntecReport, Removal, ReversePrinciple};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct MarkerKindView {
    pub marker: MarkerId,
    pub is_e_marker: bool,
    pub is_v_marker: bool,
}

impl MarkerKindView {
    pub fn of(d: &ValidDiscourse, m: MarkerId) -> Self {
        let marker = d.marker(m);
        let quantified = marker
            .source
            .and_then(|n| d.np_data(n))
            .map_or(false, |np| np.var.is_some());
        MarkerKindView {
            marker: m,
            is_e_marker: quantified && marker.kind == MarkerKind::RMark,
            is_v_marker: marker.kind == MarkerKind::Var,
        }
    }
}

/// Which reverse principles are in force.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ReverseOptions {
    pub e: bool,
    pub v: bool,
}

impl Default for ReverseOptions {
    fn default() -> Self {
        ReverseOptions { e: true, v: true }
    }
}

impl ReverseOptions {
    pub fn disabled() -> Self {
        ReverseOptions { e: false, v: false }
    }
}

/// The reverse principle that rejects `antecedent` for `anaphor`, if any.
pub fn reverse_violation(
    d: &ValidDiscourse,
    antecedent: MarkerId,
    anaphor: MarkerId,
) -> Option<ReversePrinciple> {
    let view = MarkerKindView::of(d, antecedent);
    if view.is_e_marker && o_command(d, antecedent, anaphor) {
        Some(ReversePrinciple::E)
    } else if view.is_v_marker && !o_command(d, antecedent, anaphor) {
        Some(ReversePrinciple::V)
    } else {
        None
    }
}

pub fn reverse_admissible(d: &ValidDiscourse, antecedent: MarkerId, anaphor: MarkerId) -> bool {
    reverse_violation(d, antecedent, anaphor).is_none()
}

/// Drops the candidates each enabled reverse principle rejects, recording
/// every removal with its cause.
pub fn filter_reports(reports: &[AntecReport], d: &ValidDiscourse, opts: ReverseOptions) -> Vec<AntecReport> {
    reports
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out.antec.clear();
            for &m in &r.antec {
                match reverse_violation(d, m, r.anaphor) {
                    Some(by @ ReversePrinciple::E) if opts.e => out.removed.push(Removal { marker: m, by }),
                    Some(by @ ReversePrinciple::V) if opts.v => out.removed.push(Removal { marker: m, by }),
                    _ => out.antec.push(m),
                }
            }
            out
        })
        .collect()
}
