mod common;

use std::collections::HashSet;

use binder::bdp::propagate;
use binder::io::{parse_document_str, render_report, run_check, CheckOptions, Document, Format, LangRef};
use binder::model::*;
use binder::obliqueness::o_command;
use binder::principles::apply_binding_with;
use binder::reverse::{filter_reports, ReverseOptions};
use binder::transitivity::{
    check_resolution, coref_closure, pluralize_candidates, AnaphoricLink, LinkKind, PluralError,
};
use proptest::prelude::*;

use common::{random_discourse, set};

fn is_subsequence(sub: &[MarkerId], of: &[MarkerId]) -> bool {
    let mut it = of.iter();
    sub.iter().all(|m| it.any(|x| x == m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn validation_is_idempotent(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let a = g.discourse.validate().expect("generated discourses are valid");
        let b = g.discourse.validate().expect("generated discourses are valid");
        prop_assert_eq!(a.labels(&all_markers(&a)), b.labels(&all_markers(&b)));
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let root = g.discourse.root.clone();
        let ctx = root.daughters[0].markers.clone();
        let doc = Document::new(LangRef::Inline(g.lang.clone()), ctx, root.daughters[1..].to_vec());
        let back = parse_document_str(&doc.to_json()).unwrap();
        prop_assert_eq!(back, doc);
    }

    #[test]
    fn lists_nest_in_list_u(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let d = g.valid();
        let prop = propagate(&d, &g.lang);
        for (n, l) in prop.iter() {
            let u = set(&l.list_u);
            for m in l.list_a.markers().iter().chain(l.list_z.markers().iter()) {
                prop_assert!(u.contains(m), "node {}: {} outside LIST-U", d.node_label(n), d.marker_label(*m));
            }
            // LIST-U is a reordering-free restriction of the root's LIST-LU
            prop_assert!(is_subsequence(&l.list_u, &prop.get(d.root).list_lu));
        }
        prop_assert_eq!(&prop.get(d.root).list_u, &prop.get(d.root).list_lu);
    }

    #[test]
    fn o_command_is_a_strict_order(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let d = g.valid();
        let ms = all_markers(&d);
        for &x in &ms {
            prop_assert!(!o_command(&d, x, x));
            for &y in &ms {
                if o_command(&d, x, y) {
                    prop_assert!(!o_command(&d, y, x));
                    for &z in &ms {
                        if o_command(&d, y, z) {
                            prop_assert!(o_command(&d, x, z));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn binding_results_are_well_formed(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let d = g.valid();
        let prop = propagate(&d, &g.lang);
        let reports = apply_binding_with(&d, &prop).unwrap();
        prop_assert_eq!(reports.len(), d.anaphors().count());
        for r in &reports {
            prop_assert!(!r.antec.contains(&r.anaphor));
            prop_assert!(!(r.exempt && r.reshuffled));
            if r.exempt {
                prop_assert!(r.antec.is_empty() && r.principle.is_reflexive());
            }
            if !r.principle.is_reflexive() {
                prop_assert!(is_subsequence(&r.antec, &prop.get(r.node).list_u));
            }
        }
    }

    #[test]
    fn reverse_filter_only_removes(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let d = g.valid();
        let reports = apply_binding_with(&d, &propagate(&d, &g.lang)).unwrap();
        prop_assert_eq!(&filter_reports(&reports, &d, ReverseOptions::disabled()), &reports);
        let filtered = filter_reports(&reports, &d, ReverseOptions::default());
        for (f, r) in filtered.iter().zip(&reports) {
            prop_assert!(is_subsequence(&f.antec, &r.antec));
            let mut back: HashSet<MarkerId> = set(&f.antec);
            back.extend(f.removed.iter().map(|x| x.marker));
            prop_assert_eq!(back, set(&r.antec));
        }
    }

    #[test]
    fn admitted_resolutions_raise_no_direct_violations(seed in any::<u64>(), pick in any::<u64>()) {
        let g = random_discourse(seed);
        let d = g.valid();
        let reports = filter_reports(
            &apply_binding_with(&d, &propagate(&d, &g.lang)).unwrap(),
            &d,
            ReverseOptions::default(),
        );
        // one bound-free coreference link per anaphor, to an admitted
        // non-quantificational candidate
        let links: Vec<AnaphoricLink> = reports
            .iter()
            .filter_map(|r| {
                let ok: Vec<MarkerId> = r
                    .antec
                    .iter()
                    .copied()
                    .filter(|m| d.marker(*m).kind == MarkerKind::RMark)
                    .filter(|m| d.marker(*m).source.and_then(|n| d.np_data(n)).map_or(true, |np| np.var.is_none()))
                    .collect();
                (!ok.is_empty()).then(|| {
                    AnaphoricLink::new(r.anaphor, ok[(pick as usize) % ok.len()], LinkKind::Coreference)
                })
            })
            .collect();
        for v in check_resolution(&d, &links, &reports) {
            prop_assert!(v.via_closure, "direct link flagged: {:?}", v);
        }
        // coreference classes partition the linked markers
        let classes = coref_closure(&d, &links).classes();
        let mut seen = HashSet::new();
        for c in &classes {
            for m in c {
                prop_assert!(seen.insert(*m));
            }
        }
    }

    #[test]
    fn reports_render_deterministically(seed in any::<u64>()) {
        let g = random_discourse(seed);
        let root = g.discourse.root.clone();
        let doc = Document::new(
            LangRef::Inline(g.lang.clone()),
            root.daughters[0].markers.clone(),
            root.daughters[1..].to_vec(),
        );
        let opts = CheckOptions { dump_lists: true, ..CheckOptions::default() };
        let a = run_check(&doc, &opts).unwrap();
        let b = run_check(&doc, &opts).unwrap();
        prop_assert_eq!(render_report(&a, Format::Json), render_report(&b, Format::Json));
        prop_assert_eq!(render_report(&a, Format::Text), render_report(&b, Format::Text));
    }

    #[test]
    fn pluralisation_counts_subsets(n in 1usize..=6, cap in 1usize..=8) {
        let ctx: Vec<ContextMarker> = (0..n)
            .map(|i| ContextMarker { id: format!("c{i}"), number: Number::Unspecified })
            .collect();
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("np", "subj")]),
            vec![Node::np("np", NpInfo::new(AnaphorType::Pronoun, "they"))],
        );
        let d = Discourse::from_parts(ctx, vec![s]).validate().unwrap();
        let antec: Vec<MarkerId> = d.context_markers().collect();
        match pluralize_candidates(&d, &antec, cap) {
            Ok(c) => {
                prop_assert!(n <= cap);
                prop_assert_eq!(c.len(), (1 << n) - 1);
                prop_assert!(c.windows(2).all(|w| w[0].members.len() <= w[1].members.len()));
            }
            Err(PluralError::OverCap { .. }) => prop_assert!(n > cap),
        }
    }
}
