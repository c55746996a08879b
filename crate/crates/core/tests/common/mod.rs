//! Shared test support: a seeded random discourse generator and a naive
//! o-command oracle computed from the generator's own record of the
//! argument structure, independently of the library's validated arena.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::PathBuf;

use binder::model::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// One argument structure as the generator built it.
#[derive(Clone, Debug)]
pub struct PredShape {
    /// Argument labels in obliqueness order: an NP node or a clause node.
    pub args: Vec<String>,
    pub subject_only: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Shape {
    pub preds: Vec<PredShape>,
    /// Argument label → predicator it hosts (clauses, possessed NPs).
    pub hosts: HashMap<String, usize>,
    /// NP node label → (r-mark, var).
    pub np_markers: HashMap<String, (String, Option<String>)>,
    pub nps: Vec<String>,
}

impl Shape {
    fn less_oblique(&self, p: usize, i: usize, j: usize) -> bool {
        if self.preds[p].subject_only {
            i == 0 && j > 0
        } else {
            i < j
        }
    }

    fn arg_pos(&self, label: &str) -> Option<(usize, usize)> {
        self.preds
            .iter()
            .enumerate()
            .find_map(|(p, s)| s.args.iter().position(|a| a == label).map(|i| (p, i)))
    }

    /// `x` is `z`, or hosts a predicator one of whose arguments reaches `z`.
    fn reaches(&self, x: &str, z: &str) -> bool {
        if x == z {
            return true;
        }
        match self.hosts.get(x) {
            Some(&q) => self.preds[q].args.iter().any(|a| self.reaches(a, z)),
            None => false,
        }
    }

    /// Y o-commands Z iff Y is less oblique than a co-argument X that is Z
    /// or subcategorises, directly or through embedding, for Z.
    pub fn node_commands(&self, y: &str, z: &str) -> bool {
        let Some((p, i)) = self.arg_pos(y) else {
            return false;
        };
        self.preds[p]
            .args
            .iter()
            .enumerate()
            .any(|(j, x)| self.less_oblique(p, i, j) && self.reaches(x, z))
    }

    /// Marker-level o-command over marker labels.
    pub fn marker_commands(&self, x: &str, y: &str) -> bool {
        if x == y {
            return false;
        }
        let owner = |m: &str| {
            self.np_markers.iter().find_map(|(n, (r, v))| {
                if r == m {
                    Some((n.clone(), false))
                } else if v.as_deref() == Some(m) {
                    Some((n.clone(), true))
                } else {
                    None
                }
            })
        };
        let (Some((nx, x_is_var)), Some((ny, y_is_var))) = (owner(x), owner(y)) else {
            return false;
        };
        if nx == ny {
            return x_is_var && !y_is_var;
        }
        self.node_commands(&nx, &ny)
    }
}

pub struct Generated {
    pub discourse: Discourse,
    pub lang: LangParams,
    pub shape: Shape,
}

impl Generated {
    pub fn valid(&self) -> ValidDiscourse {
        self.discourse
            .validate()
            .unwrap_or_else(|r| panic!("generator produced an invalid discourse:\n{r}"))
    }
}

struct Gen {
    rng: ChaCha8Rng,
    clauses_left: usize,
    nps_left: usize,
    next: usize,
    shape: Shape,
}

const TYPES: [AnaphorType; 5] = [
    AnaphorType::ShortReflexive,
    AnaphorType::LongReflexive,
    AnaphorType::Pronoun,
    AnaphorType::NonPronoun,
    AnaphorType::None,
];

const MODES: [LocalityMode; 4] = [
    LocalityMode::Immediate,
    LocalityMode::FirstFinite,
    LocalityMode::FirstIndicative,
    LocalityMode::Upstairs,
];

impl Gen {
    fn fresh(&mut self, prefix: &str) -> String {
        self.next += 1;
        format!("{prefix}{}", self.next)
    }

    fn np(&mut self) -> Node {
        self.nps_left -= 1;
        let id = self.fresh("np");
        let r = self.fresh("m");
        let t = *TYPES.choose(&mut self.rng).unwrap();
        let mut info = if self.rng.gen_bool(0.2) {
            let v = self.fresh("v");
            NpInfo::universal(t, r.clone(), v)
        } else {
            NpInfo::new(t, r.clone())
        };
        if self.rng.gen_bool(0.1) {
            info.locality = Some(*MODES.choose(&mut self.rng).unwrap());
        }
        self.shape
            .np_markers
            .insert(id.clone(), (r, info.var.clone()));
        self.shape.nps.push(id.clone());
        let mut node = Node::np(id.clone(), info);
        if self.nps_left > 0 && self.rng.gen_bool(0.2) {
            let poss = self.np();
            let p = self.shape.preds.len();
            self.shape.preds.push(PredShape {
                args: vec![poss.id.clone()],
                subject_only: false,
            });
            self.shape.hosts.insert(id.clone(), p);
            node.pred = Some(ArgStructure::linear(&[(poss.id.clone(), "poss")]));
            node.daughters = vec![poss, Node::word(self.fresh("w"), "n")];
        }
        node
    }

    /// An argument NP, possibly inside a PP; returns (daughter, slot label).
    fn np_arg(&mut self) -> (Node, String) {
        let np = self.np();
        let label = np.id.clone();
        if self.rng.gen_bool(0.25) {
            let pp = Node::new(self.fresh("pp"), Category::Phrase)
                .with_daughters(vec![Node::word(self.fresh("w"), "p"), np]);
            (pp, label)
        } else {
            (np, label)
        }
    }

    fn clause(&mut self) -> Node {
        self.clauses_left -= 1;
        let id = self.fresh("s");
        let p = self.shape.preds.len();
        self.shape.preds.push(PredShape {
            args: Vec::new(),
            subject_only: self.rng.gen_bool(0.2),
        });
        let mut daughters = Vec::new();
        let mut slots: Vec<(String, String)> = Vec::new();
        let mut args = Vec::new();
        let n_args = self.rng.gen_range(1..=3usize);
        for k in 0..n_args {
            if self.nps_left == 0 {
                break;
            }
            let (d, label) = self.np_arg();
            // slot references name the daughter (a PP resolves to its NP)
            slots.push((d.id.clone(), if k == 0 { "subj".into() } else { format!("arg{k}") }));
            args.push(label);
            daughters.push(d);
            if k == 0 {
                daughters.push(Node::word(self.fresh("w"), "v"));
            }
        }
        if self.clauses_left > 0 && self.nps_left > 0 && self.rng.gen_bool(0.6) {
            let c = self.clause();
            slots.push((c.id.clone(), "comp".into()));
            args.push(c.id.clone());
            daughters.push(c);
        }
        if self.clauses_left > 0 && self.nps_left > 0 && self.rng.gen_bool(0.2) {
            // an unselected adjunct clause
            daughters.push(self.clause());
        }
        assert!(!slots.is_empty(), "clauses are only opened while NPs remain");
        self.shape.preds[p].args = args;
        self.shape.hosts.insert(id.clone(), p);
        let mut pred = ArgStructure::linear(
            &slots
                .iter()
                .map(|(n, f)| (n.clone(), f.as_str()))
                .collect::<Vec<_>>(),
        );
        if self.shape.preds[p].subject_only {
            pred.order = OrderKind::SubjectOnly;
        }
        let mut n = Node::clause(id, pred, daughters);
        n.finiteness = match self.rng.gen_range(0..3) {
            0 => Some(Finiteness::Finite),
            1 => Some(Finiteness::Nonfinite),
            _ => None,
        };
        n.mood = match self.rng.gen_range(0..4) {
            0 => Some(Mood::Indicative),
            1 => Some(Mood::Subjunctive),
            2 => Some(Mood::Other),
            _ => None,
        };
        n
    }
}

const LANGS: [&str; 7] = [
    "english",
    "portuguese",
    "german",
    "norwegian",
    "toba-batak",
    "icelandic",
    "greek",
];

/// A random discourse with at most four clauses and ten NPs.
pub fn random_discourse(seed: u64) -> Generated {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        clauses_left: 4,
        nps_left: 10,
        next: 0,
        shape: Shape::default(),
    };
    g.clauses_left = g.rng.gen_range(1..=4);
    g.nps_left = g.rng.gen_range(1..=10);
    let ctx: Vec<ContextMarker> = (0..g.rng.gen_range(0..=2))
        .map(|i| ContextMarker {
            id: format!("c{i}"),
            number: Number::Unspecified,
        })
        .collect();
    let mut sentences = Vec::new();
    while g.clauses_left > 0 && g.nps_left > 0 {
        sentences.push(g.clause());
        if !g.rng.gen_bool(0.4) {
            break;
        }
    }
    let lang = LangParams::builtin(LANGS.choose(&mut g.rng).unwrap()).unwrap();
    Generated {
        discourse: Discourse::from_parts(ctx, sentences),
        lang,
        shape: g.shape,
    }
}

/// A single chain of `n` anaphoric NPs: each clause has an anaphoric
/// subject and object and selects the next clause as its complement.
pub fn anaphor_chain(n: usize) -> Discourse {
    let types = [
        AnaphorType::Pronoun,
        AnaphorType::ShortReflexive,
        AnaphorType::NonPronoun,
        AnaphorType::LongReflexive,
    ];
    let clauses = n.div_ceil(2);
    let mut inner: Option<Node> = None;
    let mut made = 0;
    for c in (0..clauses).rev() {
        let mut slots = Vec::new();
        let mut daughters = Vec::new();
        for k in 0..2 {
            let idx = 2 * c + k;
            if idx >= n {
                continue;
            }
            let id = format!("np{idx}");
            slots.push((id.clone(), if k == 0 { "subj" } else { "obj" }));
            daughters.push(Node::np(id, NpInfo::new(types[idx % 4], format!("m{idx}"))));
            made += 1;
        }
        let comp = format!("s{}", c + 1);
        if let Some(i) = inner.take() {
            slots.push((comp.clone(), "comp"));
            daughters.push(i);
        }
        let slots: Vec<(String, &str)> = slots.into_iter().map(|(a, b)| (a, b)).collect();
        inner = Some(Node::clause(format!("s{c}"), ArgStructure::linear(&slots), daughters));
    }
    assert_eq!(made, n);
    Discourse::from_parts(
        vec![ContextMarker {
            id: "ctx".into(),
            number: Number::Unspecified,
        }],
        vec![inner.expect("n > 0")],
    )
}

pub fn set<T: Clone + Eq + std::hash::Hash>(xs: &[T]) -> HashSet<T> {
    xs.iter().cloned().collect()
}
