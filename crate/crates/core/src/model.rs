//! Annotated discourse representation.
//!
//! A [`Discourse`] is the raw tree as authored (and as read from JSON). It is
//! turned into a [`ValidDiscourse`] by [`Discourse::validate`], which checks the
//! structural invariants, resolves every string reference into an arena index
//! and enumerates the reference markers. Every other module works on a
//! [`ValidDiscourse`].

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Label of the synthetic discourse root built by [`Discourse::from_parts`].
pub const ROOT_LABEL: &str = "#discourse";
/// Label of the synthetic context node built by [`Discourse::from_parts`].
pub const CTX_LABEL: &str = "#ctx";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarkerId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub usize);

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerKind {
    RMark,
    Var,
    Context,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Number {
    Singular,
    Plural,
    #[default]
    Unspecified,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum AnaphorType {
    ShortReflexive,
    LongReflexive,
    Pronoun,
    NonPronoun,
    None,
}

impl AnaphorType {
    /// The binding principle governing this anaphoric type.
    pub fn principle(self) -> Option<Principle> {
        match self {
            AnaphorType::ShortReflexive => Some(Principle::A),
            AnaphorType::LongReflexive => Some(Principle::Z),
            AnaphorType::Pronoun => Some(Principle::B),
            AnaphorType::NonPronoun => Some(Principle::C),
            AnaphorType::None => None,
        }
    }
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Principle {
    A,
    Z,
    B,
    C,
}

impl Principle {
    pub fn is_reflexive(self) -> bool {
        matches!(self, Principle::A | Principle::Z)
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Principle::A => "A",
            Principle::Z => "Z",
            Principle::B => "B",
            Principle::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Discourse,
    Ctx,
    Sentence,
    Phrase,
    Word,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    #[default]
    Linear,
    SubjectOnly,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Finiteness {
    Finite,
    Nonfinite,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Mood {
    Indicative,
    Subjunctive,
    Other,
}

/// How far the local domain of an anaphor extends upwards.
#[derive(Serialize, Deserialize, Copy, Clone, Debug, Default, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum LocalityMode {
    /// Co-arguments of the directly selecting predicator.
    #[default]
    Immediate,
    /// Up to the first selecting clause that is finite.
    FirstFinite,
    /// Up to the first selecting clause in the indicative.
    FirstIndicative,
    /// The selectional domain of the immediately upwards predicator.
    Upstairs,
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Determiner {
    Universal,
    Other,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LangParams {
    pub name: String,
    #[serde(default)]
    pub locality_mode: LocalityMode,
}

impl LangParams {
    pub fn new(name: impl Into<String>, locality_mode: LocalityMode) -> Self {
        LangParams {
            name: name.into(),
            locality_mode,
        }
    }

    pub fn english() -> Self {
        LangParams::new("english", LocalityMode::Immediate)
    }

    /// Built-in parameter sets, looked up by language name.
    pub fn builtin(name: &str) -> Option<Self> {
        let mode = match name {
            "english" | "portuguese" | "german" | "norwegian" | "toba-batak" => {
                LocalityMode::Immediate
            }
            "icelandic" => LocalityMode::FirstIndicative,
            "greek" => LocalityMode::Upstairs,
            _ => return None,
        };
        Some(LangParams::new(name, mode))
    }
}

impl Default for LangParams {
    fn default() -> Self {
        LangParams::english()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ContextMarker {
    pub id: String,
    #[serde(default, skip_serializing_if = "is_unspecified")]
    pub number: Number,
}

fn is_unspecified(n: &Number) -> bool {
    *n == Number::Unspecified
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct NpInfo {
    pub anaphor_type: AnaphorType,
    pub r_mark: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub quantificational: bool,
    /// Number of the r-mark.
    #[serde(default, skip_serializing_if = "is_unspecified")]
    pub number: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_number: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determiner: Option<Determiner>,
    /// Item-level override of the language's locality mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality: Option<LocalityMode>,
}

impl NpInfo {
    pub fn new(anaphor_type: AnaphorType, r_mark: impl Into<String>) -> Self {
        NpInfo {
            anaphor_type,
            r_mark: r_mark.into(),
            var: None,
            quantificational: false,
            number: Number::Unspecified,
            var_number: None,
            determiner: None,
            locality: None,
        }
    }

    /// A universally quantified NP: plural r-mark, singular var.
    pub fn universal(
        anaphor_type: AnaphorType,
        r_mark: impl Into<String>,
        var: impl Into<String>,
    ) -> Self {
        NpInfo {
            var: Some(var.into()),
            quantificational: true,
            number: Number::Plural,
            var_number: Some(Number::Singular),
            determiner: Some(Determiner::Universal),
            ..NpInfo::new(anaphor_type, r_mark)
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Slot {
    pub node: String,
    #[serde(default, rename = "gf")]
    pub function: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ArgStructure {
    pub slots: Vec<Slot>,
    #[serde(default)]
    pub order: OrderKind,
    /// Alternate argument structure whose order governs binding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binding_base: Option<Box<ArgStructure>>,
}

impl ArgStructure {
    pub fn linear<S: AsRef<str>>(slots: &[(S, &str)]) -> Self {
        ArgStructure {
            slots: slots
                .iter()
                .map(|(n, f)| Slot {
                    node: n.as_ref().to_string(),
                    function: f.to_string(),
                })
                .collect(),
            order: OrderKind::Linear,
            binding_base: None,
        }
    }

    /// The structure binding computations use.
    pub fn binding_structure(&self) -> &ArgStructure {
        self.binding_base.as_deref().unwrap_or(self)
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Node {
    pub id: String,
    #[serde(rename = "cat")]
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub np: Option<NpInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred: Option<ArgStructure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finiteness: Option<Finiteness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mood: Option<Mood>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_of: Option<String>,
    /// Context markers; only meaningful on the ctx node.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub markers: Vec<ContextMarker>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub daughters: Vec<Node>,
}

impl Node {
    pub fn new(id: impl Into<String>, category: Category) -> Self {
        Node {
            id: id.into(),
            category,
            form: None,
            head: None,
            spec: None,
            np: None,
            pred: None,
            finiteness: None,
            mood: None,
            trace_of: None,
            markers: Vec::new(),
            daughters: Vec::new(),
        }
    }

    pub fn word(id: impl Into<String>, form: &str) -> Self {
        Node {
            form: Some(form.to_string()),
            ..Node::new(id, Category::Word)
        }
    }

    pub fn np(id: impl Into<String>, info: NpInfo) -> Self {
        Node {
            np: Some(info),
            ..Node::new(id, Category::Phrase)
        }
    }

    pub fn clause(id: impl Into<String>, pred: ArgStructure, daughters: Vec<Node>) -> Self {
        Node {
            pred: Some(pred),
            daughters,
            ..Node::new(id, Category::Sentence)
        }
    }

    pub fn with_daughters(mut self, daughters: Vec<Node>) -> Self {
        self.daughters = daughters;
        self
    }
}

/// A discourse as authored: a tree rooted in a node of category `discourse`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Discourse {
    pub root: Node,
}

impl Discourse {
    /// Builds the standard discourse shape: a root with one ctx daughter
    /// holding the context markers, followed by the sentences.
    pub fn from_parts(context_markers: Vec<ContextMarker>, sentences: Vec<Node>) -> Self {
        let ctx = Node {
            markers: context_markers,
            ..Node::new(CTX_LABEL, Category::Ctx)
        };
        let mut daughters = vec![ctx];
        daughters.extend(sentences);
        Discourse {
            root: Node {
                head: Some(CTX_LABEL.to_string()),
                daughters,
                ..Node::new(ROOT_LABEL, Category::Discourse)
            },
        }
    }

    pub fn validate(&self) -> Result<ValidDiscourse, ValidationReport> {
        let (valid, report) = build(self);
        match valid {
            Some(v) if report.is_pass() => Ok(v),
            _ => Err(report),
        }
    }
}

/// Checks every structural invariant of `d`. Pure; calling it twice yields
/// the same report.
pub fn validate_discourse(d: &Discourse) -> ValidationReport {
    build(d).1
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    RootNotDiscourse,
    ExtraDiscourseNode,
    MissingCtx,
    MultipleCtx,
    EmptyText,
    MisplacedCtx,
    DuplicateNodeId,
    DuplicateMarkerId,
    DanglingReference,
    NotADaughter,
    UnresolvableSlot,
    SlotNotDescendant,
    DoubleSelection,
    EmptySlots,
    BadBindingBase,
    NestedSlots,
    SelectionCycle,
    TraceCycle,
    VarMismatch,
    NumberMismatch,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
    /// Node or marker labels involved.
    pub subjects: Vec<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    fn push(&mut self, code: ViolationCode, message: String, subjects: &[&str]) {
        self.violations.push(Violation {
            code,
            message,
            subjects: subjects.iter().map(|s| s.to_string()).collect(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return f.write_str("pass");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{:?}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Marker {
    pub id: MarkerId,
    pub label: String,
    pub kind: MarkerKind,
    pub number: Number,
    /// The NP that introduced it; `None` for context markers.
    pub source: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpData {
    pub anaphor_type: AnaphorType,
    pub r_mark: MarkerId,
    pub var: Option<MarkerId>,
    pub determiner: Option<Determiner>,
    pub locality: Option<LocalityMode>,
}

impl NpData {
    /// The NP's markers in list order: var first when present.
    pub fn markers(&self) -> impl Iterator<Item = MarkerId> + '_ {
        self.var.into_iter().chain(std::iter::once(self.r_mark))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeData {
    pub label: String,
    pub category: Category,
    pub parent: Option<NodeId>,
    pub daughters: Vec<NodeId>,
    pub head: Option<NodeId>,
    pub spec: Option<NodeId>,
    pub np: Option<NpData>,
    pub predicator: Option<PredId>,
    pub finiteness: Option<Finiteness>,
    pub mood: Option<Mood>,
    pub trace_of: Option<NodeId>,
    /// Predicator selecting this node as an argument, with the slot index
    /// (in binding order).
    pub selected_by: Option<(PredId, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedSlot {
    /// The argument node after trace and head-chain resolution.
    pub node: NodeId,
    /// The node the slot names in the annotation.
    pub reference: NodeId,
    pub function: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicator {
    pub host: NodeId,
    /// Slots in the order that governs binding (the binding base when one is
    /// given, the surface order otherwise).
    pub slots: Vec<ResolvedSlot>,
    pub order: OrderKind,
    pub surface: Vec<ResolvedSlot>,
    pub selected_by: Option<(PredId, usize)>,
}

impl Predicator {
    /// Obliqueness rank of a slot: equal ranks on distinct slots are
    /// incomparable.
    pub fn rank(&self, slot: usize) -> u32 {
        match self.order {
            OrderKind::Linear => slot as u32,
            OrderKind::SubjectOnly => u32::from(slot > 0),
        }
    }

    /// Whether slot `a` is less oblique than slot `b`.
    pub fn less_oblique(&self, a: usize, b: usize) -> bool {
        match self.order {
            OrderKind::Linear => a < b,
            OrderKind::SubjectOnly => a == 0 && b > 0,
        }
    }
}

/// A discourse whose invariants have been checked. Immutable.
#[derive(Clone, Debug)]
pub struct ValidDiscourse {
    pub nodes: Vec<NodeData>,
    pub markers: Vec<Marker>,
    pub predicators: Vec<Predicator>,
    pub root: NodeId,
    pub ctx: NodeId,
    pub sentences: Vec<NodeId>,
    /// NP nodes in document (preorder) order.
    pub nps: Vec<NodeId>,
    node_index: HashMap<String, NodeId>,
    marker_index: HashMap<String, MarkerId>,
}

impl ValidDiscourse {
    pub fn node(&self, id: NodeId) -> &NodeData {
        &self.nodes[id.0]
    }

    pub fn marker(&self, id: MarkerId) -> &Marker {
        &self.markers[id.0]
    }

    pub fn predicator(&self, id: PredId) -> &Predicator {
        &self.predicators[id.0]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.node_index.get(label).copied()
    }

    pub fn marker_id(&self, label: &str) -> Option<MarkerId> {
        self.marker_index.get(label).copied()
    }

    pub fn marker_label(&self, id: MarkerId) -> &str {
        &self.markers[id.0].label
    }

    pub fn node_label(&self, id: NodeId) -> &str {
        &self.nodes[id.0].label
    }

    pub fn labels(&self, ids: &[MarkerId]) -> Vec<String> {
        ids.iter().map(|m| self.marker_label(*m).to_string()).collect()
    }

    pub fn context_markers(&self) -> impl Iterator<Item = MarkerId> + '_ {
        self.markers
            .iter()
            .filter(|m| m.kind == MarkerKind::Context)
            .map(|m| m.id)
    }

    /// The NP node a marker belongs to.
    pub fn np_of(&self, m: MarkerId) -> Option<NodeId> {
        self.markers[m.0].source
    }

    pub fn np_data(&self, n: NodeId) -> Option<&NpData> {
        self.nodes[n.0].np.as_ref()
    }

    /// NPs that carry an anaphoric type, in document order.
    pub fn anaphors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nps.iter().copied().filter(move |n| {
            self.np_data(*n)
                .map_or(false, |np| np.anaphor_type.principle().is_some())
        })
    }

    /// Whether `ancestor` dominates `n` (reflexively).
    pub fn dominates(&self, ancestor: NodeId, mut n: NodeId) -> bool {
        loop {
            if n == ancestor {
                return true;
            }
            match self.nodes[n.0].parent {
                Some(p) => n = p,
                None => return false,
            }
        }
    }
}

/// Every marker of the discourse: context markers first, then NP markers in
/// left-to-right order (var before r-mark).
pub fn all_markers(d: &ValidDiscourse) -> Vec<MarkerId> {
    // the arena is built in exactly this order
    d.markers.iter().map(|m| m.id).collect()
}

struct Builder<'a> {
    raw: Vec<&'a Node>,
    nodes: Vec<NodeData>,
    markers: Vec<Marker>,
    node_index: HashMap<String, NodeId>,
    marker_index: HashMap<String, MarkerId>,
    nps: Vec<NodeId>,
    report: ValidationReport,
}

impl<'a> Builder<'a> {
    fn add_marker(&mut self, label: &str, kind: MarkerKind, number: Number, source: Option<NodeId>) -> MarkerId {
        let id = MarkerId(self.markers.len());
        if self.marker_index.contains_key(label) {
            self.report.push(
                ViolationCode::DuplicateMarkerId,
                format!("marker `{label}` is declared more than once"),
                &[label],
            );
        } else {
            self.marker_index.insert(label.to_string(), id);
        }
        self.markers.push(Marker {
            id,
            label: label.to_string(),
            kind,
            number,
            source,
        });
        id
    }

    fn walk(&mut self, node: &'a Node, parent: Option<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.raw.push(node);
        if self.node_index.contains_key(&node.id) {
            self.report.push(
                ViolationCode::DuplicateNodeId,
                format!("node id `{}` is used more than once", node.id),
                &[&node.id],
            );
        } else {
            self.node_index.insert(node.id.clone(), id);
        }
        self.nodes.push(NodeData {
            label: node.id.clone(),
            category: node.category,
            parent,
            daughters: Vec::new(),
            head: None,
            spec: None,
            np: None,
            predicator: None,
            finiteness: node.finiteness,
            mood: node.mood,
            trace_of: None,
            selected_by: None,
        });

        if node.category == Category::Ctx {
            for cm in &node.markers {
                self.add_marker(&cm.id, MarkerKind::Context, cm.number, None);
            }
        }
        if let Some(info) = &node.np {
            self.nps.push(id);
            let np = self.np_data(id, info);
            self.nodes[id.0].np = Some(np);
        }
        let daughters: Vec<NodeId> = node
            .daughters
            .iter()
            .map(|d| self.walk(d, Some(id)))
            .collect();
        self.nodes[id.0].daughters = daughters;
        id
    }

    fn np_data(&mut self, id: NodeId, info: &NpInfo) -> NpData {
        let label = &self.raw[id.0].id;
        if info.var.is_some() != info.quantificational {
            self.report.push(
                ViolationCode::VarMismatch,
                format!("NP `{label}`: var must be present exactly when the NP is quantificational"),
                &[label],
            );
        }
        let universal = info.determiner == Some(Determiner::Universal);
        let r_number = match info.number {
            Number::Unspecified if universal && info.quantificational => Number::Plural,
            n => n,
        };
        let var_number = match info.var_number {
            None | Some(Number::Unspecified) if universal => Number::Singular,
            Some(n) => n,
            None => Number::Unspecified,
        };
        if universal
            && info.quantificational
            && (r_number != Number::Plural || var_number != Number::Singular)
        {
            self.report.push(
                ViolationCode::NumberMismatch,
                format!("NP `{label}`: a universal NP has a plural r-mark and a singular var"),
                &[label],
            );
        }
        // var precedes r-mark, matching the NP's LIST-LU contribution
        let var = info
            .var
            .as_ref()
            .map(|v| self.add_marker(v, MarkerKind::Var, var_number, Some(id)));
        let r_mark = self.add_marker(&info.r_mark, MarkerKind::RMark, r_number, Some(id));
        NpData {
            anaphor_type: info.anaphor_type,
            r_mark,
            var,
            determiner: info.determiner,
            locality: info.locality,
        }
    }

    fn lookup(&mut self, owner: &str, what: &str, label: &str) -> Option<NodeId> {
        let found = self.node_index.get(label).copied();
        if found.is_none() {
            self.report.push(
                ViolationCode::DanglingReference,
                format!("node `{owner}`: {what} refers to unknown node `{label}`"),
                &[owner, label],
            );
        }
        found
    }

    fn is_strict_descendant(&self, n: NodeId, ancestor: NodeId) -> bool {
        let mut cur = self.nodes[n.0].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.nodes[p.0].parent;
        }
        false
    }

    /// Trace, then projection (head chain), then the nominal complement of a
    /// prepositional phrase.
    fn resolve_slot(&self, n: NodeId, seen: &mut HashSet<NodeId>) -> Option<NodeId> {
        if !seen.insert(n) {
            return None;
        }
        let data = &self.nodes[n.0];
        if let Some(filler) = data.trace_of {
            return self.resolve_slot(filler, seen);
        }
        if data.np.is_some() || data.predicator.is_some() {
            return Some(n);
        }
        if let Some(h) = data.head {
            if let Some(r) = self.resolve_slot(h, seen) {
                return Some(r);
            }
        }
        let mut nominal = data
            .daughters
            .iter()
            .copied()
            .filter(|d| self.nodes[d.0].np.is_some());
        match (nominal.next(), nominal.next()) {
            (Some(only), None) => Some(only),
            _ => None,
        }
    }
}

fn build(d: &Discourse) -> (Option<ValidDiscourse>, ValidationReport) {
    let mut b = Builder {
        raw: Vec::new(),
        nodes: Vec::new(),
        markers: Vec::new(),
        node_index: HashMap::new(),
        marker_index: HashMap::new(),
        nps: Vec::new(),
        report: ValidationReport::default(),
    };
    let root = b.walk(&d.root, None);

    // discourse shape
    if b.nodes[root.0].category != Category::Discourse {
        b.report.push(
            ViolationCode::RootNotDiscourse,
            "the root node must have category `discourse`".into(),
            &[&d.root.id],
        );
    }
    for n in &b.nodes[1..] {
        if n.category == Category::Discourse {
            b.report.push(
                ViolationCode::ExtraDiscourseNode,
                format!("node `{}` has category `discourse` but is not the root", n.label),
                &[&n.label],
            );
        }
    }
    let root_daughters = b.nodes[root.0].daughters.clone();
    let ctxs: Vec<NodeId> = root_daughters
        .iter()
        .copied()
        .filter(|n| b.nodes[n.0].category == Category::Ctx)
        .collect();
    let ctx = match ctxs.as_slice() {
        [] => {
            b.report.push(
                ViolationCode::MissingCtx,
                "the discourse root has no ctx daughter".into(),
                &[&d.root.id],
            );
            None
        }
        [one] => Some(*one),
        [first, ..] => {
            b.report.push(
                ViolationCode::MultipleCtx,
                "the discourse root has more than one ctx daughter".into(),
                &[&d.root.id],
            );
            Some(*first)
        }
    };
    let all_ctx = b
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.category == Category::Ctx)
        .map(|(i, _)| NodeId(i))
        .collect::<Vec<_>>();
    for c in all_ctx {
        if b.nodes[c.0].parent != Some(root) {
            let l = b.nodes[c.0].label.clone();
            b.report.push(
                ViolationCode::MisplacedCtx,
                format!("ctx node `{l}` is not a daughter of the discourse root"),
                &[&l],
            );
        }
    }
    let sentences: Vec<NodeId> = root_daughters
        .iter()
        .copied()
        .filter(|n| b.nodes[n.0].category != Category::Ctx)
        .collect();
    if sentences.is_empty() {
        b.report.push(
            ViolationCode::EmptyText,
            "empty Text: the discourse has no sentence".into(),
            &[&d.root.id],
        );
    }

    // references: head, spec, trace
    for i in 0..b.nodes.len() {
        let raw = b.raw[i];
        let id = NodeId(i);
        for (what, target) in [("head", &raw.head), ("spec", &raw.spec)] {
            if let Some(label) = target {
                if let Some(t) = b.lookup(&raw.id, what, label) {
                    if b.nodes[t.0].parent != Some(id) {
                        b.report.push(
                            ViolationCode::NotADaughter,
                            format!("node `{}`: {what} `{label}` is not one of its daughters", raw.id),
                            &[&raw.id, label],
                        );
                    } else if what == "head" {
                        b.nodes[i].head = Some(t);
                    } else {
                        b.nodes[i].spec = Some(t);
                    }
                }
            }
        }
        if let Some(label) = &raw.trace_of {
            if let Some(t) = b.lookup(&raw.id, "trace-of", label) {
                b.nodes[i].trace_of = Some(t);
            }
        }
    }
    // trace chains must terminate
    for i in 0..b.nodes.len() {
        let mut seen = HashSet::new();
        let mut cur = NodeId(i);
        while let Some(next) = b.nodes[cur.0].trace_of {
            if !seen.insert(cur) {
                let l = b.nodes[i].label.clone();
                b.report.push(
                    ViolationCode::TraceCycle,
                    format!("trace chain from `{l}` is cyclic"),
                    &[&l],
                );
                b.nodes[i].trace_of = None;
                break;
            }
            cur = next;
        }
    }

    // predicators
    let mut predicators = Vec::new();
    for i in 0..b.nodes.len() {
        if b.raw[i].pred.is_some() {
            b.nodes[i].predicator = Some(PredId(predicators.len()));
            predicators.push(NodeId(i));
        }
    }
    let mut preds: Vec<Predicator> = Vec::new();
    for (p, host) in predicators.iter().copied().enumerate() {
        let raw = b.raw[host.0];
        let arg = raw.pred.as_ref().expect("host has a predicator");
        if arg.slots.is_empty() {
            b.report.push(
                ViolationCode::EmptySlots,
                format!("predicator on `{}` has no slots", raw.id),
                &[&raw.id],
            );
        }
        let surface = resolve_slots(&mut b, host, &arg.slots);
        let base = arg.binding_structure();
        let slots = if arg.binding_base.is_some() {
            let resolved = resolve_slots(&mut b, host, &base.slots);
            let mut a: Vec<NodeId> = surface.iter().map(|s| s.node).collect();
            let mut c: Vec<NodeId> = resolved.iter().map(|s| s.node).collect();
            a.sort();
            c.sort();
            if a != c || arg.slots.len() != base.slots.len() {
                b.report.push(
                    ViolationCode::BadBindingBase,
                    format!("predicator on `{}`: binding base is not a permutation of the surface slots", raw.id),
                    &[&raw.id],
                );
            }
            resolved
        } else {
            surface.clone()
        };
        for (k, x) in slots.iter().enumerate() {
            for y in &slots[k + 1..] {
                if b.is_strict_descendant(x.node, y.node) || b.is_strict_descendant(y.node, x.node) {
                    b.report.push(
                        ViolationCode::NestedSlots,
                        format!(
                            "predicator on `{}`: slot `{}` and slot `{}` dominate one another",
                            raw.id,
                            b.nodes[x.node.0].label,
                            b.nodes[y.node.0].label
                        ),
                        &[&raw.id],
                    );
                }
            }
        }
        for (k, s) in slots.iter().enumerate() {
            let selected = &mut b.nodes[s.node.0].selected_by;
            if let Some((other, _)) = *selected {
                if other.0 != p {
                    let l = b.nodes[s.node.0].label.clone();
                    b.report.push(
                        ViolationCode::DoubleSelection,
                        format!("node `{l}` is selected by more than one slot"),
                        &[&l],
                    );
                    continue;
                }
                let l = b.nodes[s.node.0].label.clone();
                b.report.push(
                    ViolationCode::DoubleSelection,
                    format!("node `{l}` fills two slots of the same predicator"),
                    &[&l],
                );
                continue;
            }
            *selected = Some((PredId(p), k));
        }
        preds.push(Predicator {
            host,
            slots,
            order: base.order,
            surface,
            selected_by: None,
        });
    }
    for p in preds.iter_mut() {
        p.selected_by = b.nodes[p.host.0].selected_by;
    }
    // selection chains must be acyclic
    for start in 0..preds.len() {
        let mut seen = HashSet::new();
        let mut cur = PredId(start);
        while let Some((up, _)) = preds[cur.0].selected_by {
            if !seen.insert(cur) {
                let l = b.nodes[preds[start].host.0].label.clone();
                b.report.push(
                    ViolationCode::SelectionCycle,
                    format!("predicator on `{l}` is (indirectly) selected by itself"),
                    &[&l],
                );
                break;
            }
            cur = up;
        }
    }

    let report = b.report;
    if !report.is_pass() {
        return (None, report);
    }
    let ctx = ctx.expect("checked above");
    (
        Some(ValidDiscourse {
            nodes: b.nodes,
            markers: b.markers,
            predicators: preds,
            root,
            ctx,
            sentences,
            nps: b.nps,
            node_index: b.node_index,
            marker_index: b.marker_index,
        }),
        report,
    )
}

fn resolve_slots(b: &mut Builder<'_>, host: NodeId, slots: &[Slot]) -> Vec<ResolvedSlot> {
    let host_label = b.nodes[host.0].label.clone();
    let mut out = Vec::new();
    for slot in slots {
        let Some(reference) = b.lookup(&host_label, "slot", &slot.node) else {
            continue;
        };
        if !b.is_strict_descendant(reference, host) {
            b.report.push(
                ViolationCode::SlotNotDescendant,
                format!(
                    "predicator on `{host_label}`: slot `{}` is not a descendant of the predicator's node",
                    slot.node
                ),
                &[&host_label, &slot.node],
            );
            continue;
        }
        match b.resolve_slot(reference, &mut HashSet::new()) {
            Some(node) if node == host || b.is_strict_descendant(host, node) => {
                b.report.push(
                    ViolationCode::SelectionCycle,
                    format!("predicator on `{host_label}`: slot `{}` resolves to the predicator's own node or an ancestor", slot.node),
                    &[&host_label, &slot.node],
                );
            }
            Some(node) => out.push(ResolvedSlot {
                node,
                reference,
                function: slot.function.clone(),
            }),
            None => b.report.push(
                ViolationCode::UnresolvableSlot,
                format!(
                    "predicator on `{host_label}`: slot `{}` resolves to neither an NP nor a clause",
                    slot.node
                ),
                &[&host_label, &slot.node],
            ),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn appendix() -> Discourse {
        let every_student = Node::np(
            "np_every_student",
            NpInfo::universal(AnaphorType::NonPronoun, "247", "54"),
        );
        let he = Node::np("np_he", NpInfo::new(AnaphorType::Pronoun, "24"));
        let himself = Node::np("np_himself", NpInfo::new(AnaphorType::ShortReflexive, "392"));
        let embedded = Node::clause(
            "s_embedded",
            ArgStructure::linear(&[("np_he", "subj"), ("np_himself", "obj")]),
            vec![he, Node::word("v_likes", "likes"), himself],
        );
        let matrix = Node::clause(
            "s_matrix",
            ArgStructure::linear(&[("np_every_student", "subj"), ("s_embedded", "comp")]),
            vec![every_student, Node::word("v_said", "said"), embedded],
        );
        Discourse::from_parts(
            vec![ContextMarker {
                id: "415".into(),
                number: Number::Unspecified,
            }],
            vec![matrix],
        )
    }

    #[test]
    fn appendix_passes_and_enumerates_markers() {
        let d = appendix();
        assert!(validate_discourse(&d).is_pass());
        let v = d.validate().unwrap();
        assert_eq!(v.labels(&all_markers(&v)), ["415", "54", "247", "24", "392"]);
        let q = v.marker_id("247").unwrap();
        assert_eq!(v.marker(q).number, Number::Plural);
        assert_eq!(v.marker(v.marker_id("54").unwrap()).kind, MarkerKind::Var);
    }

    #[test]
    fn validation_is_idempotent() {
        let d = appendix();
        assert_eq!(validate_discourse(&d), validate_discourse(&d));
    }

    #[test]
    fn empty_text() {
        let d = Discourse::from_parts(vec![], vec![]);
        let r = validate_discourse(&d);
        assert!(r.has(ViolationCode::EmptyText));
        assert!(r.to_string().contains("empty Text"));
    }

    #[test]
    fn var_without_quantification() {
        let mut info = NpInfo::new(AnaphorType::NonPronoun, "m");
        info.var = Some("v".into());
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("np", "subj")]),
            vec![Node::np("np", info)],
        );
        let r = validate_discourse(&Discourse::from_parts(vec![], vec![s]));
        assert!(r.has(ViolationCode::VarMismatch));
    }

    #[test]
    fn duplicate_markers_including_context() {
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("np", "subj")]),
            vec![Node::np("np", NpInfo::new(AnaphorType::Pronoun, "x"))],
        );
        let d = Discourse::from_parts(
            vec![ContextMarker {
                id: "x".into(),
                number: Number::Unspecified,
            }],
            vec![s],
        );
        let r = validate_discourse(&d);
        assert!(r.has(ViolationCode::DuplicateMarkerId));
        assert!(r.violations[0].subjects.contains(&"x".to_string()));
    }

    #[test]
    fn dangling_slot() {
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("nowhere", "subj")]),
            vec![Node::np("np", NpInfo::new(AnaphorType::Pronoun, "x"))],
        );
        let r = validate_discourse(&Discourse::from_parts(vec![], vec![s]));
        assert!(r.has(ViolationCode::DanglingReference));
    }

    #[test]
    fn missing_ctx() {
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("np", "subj")]),
            vec![Node::np("np", NpInfo::new(AnaphorType::Pronoun, "x"))],
        );
        let d = Discourse {
            root: Node::new("root", Category::Discourse).with_daughters(vec![s]),
        };
        assert!(validate_discourse(&d).has(ViolationCode::MissingCtx));
    }

    #[test]
    fn only_context_marker() {
        let s = Node::new("s", Category::Sentence);
        let d = Discourse::from_parts(
            vec![ContextMarker {
                id: "c".into(),
                number: Number::Unspecified,
            }],
            vec![s],
        );
        let v = d.validate().unwrap();
        assert_eq!(v.labels(&all_markers(&v)), ["c"]);
    }

    #[test]
    fn prepositional_slot_resolves_to_nominal_complement() {
        let pp = Node {
            head: Some("p".into()),
            ..Node::new("pp", Category::Phrase)
        }
        .with_daughters(vec![
            Node::word("p", "about"),
            Node::np("np_refl", NpInfo::new(AnaphorType::ShortReflexive, "r")),
        ]);
        let s = Node::clause(
            "s",
            ArgStructure::linear(&[("np_a", "subj"), ("pp", "obl")]),
            vec![Node::np("np_a", NpInfo::new(AnaphorType::NonPronoun, "a")), pp],
        );
        let v = Discourse::from_parts(vec![], vec![s]).validate().unwrap();
        let slot = &v.predicators[0].slots[1];
        assert_eq!(v.node_label(slot.node), "np_refl");
        assert_eq!(v.node_label(slot.reference), "pp");
    }

    #[test]
    fn binding_base_must_permute_surface() {
        let mut arg = ArgStructure::linear(&[("a", "subj"), ("b", "obj")]);
        arg.binding_base = Some(Box::new(ArgStructure::linear(&[("a", "agent")])));
        let s = Node::clause(
            "s",
            arg,
            vec![
                Node::np("a", NpInfo::new(AnaphorType::NonPronoun, "ma")),
                Node::np("b", NpInfo::new(AnaphorType::NonPronoun, "mb")),
            ],
        );
        let r = validate_discourse(&Discourse::from_parts(vec![], vec![s]));
        assert!(r.has(ViolationCode::BadBindingBase));
    }
}
