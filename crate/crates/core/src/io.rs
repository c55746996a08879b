//! Input documents, the check pipeline, report rendering and the corpus
//! runner.
//!
//! A document is a JSON object with `"binder-schema": 1`, a language, the
//! context markers, the annotated sentences and, optionally, a proposed
//! resolution (`links`) and an `expected` block used for golden testing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bdp::{propagate, Propagation};
use crate::model::{
    ContextMarker, Discourse, LangParams, MarkerId, Node, Number, Principle, ValidDiscourse,
};
use crate::obliqueness::o_command;
use crate::principles::{apply_binding_with, AntecReport};
use crate::reverse::{filter_reports, ReverseOptions};
use crate::transitivity::{
    augment_antec, check_resolution, coref_closure, pluralize_candidates, validate_link,
    AnaphoricLink, LinkKind, ResolutionViolation, ViolationKind, DEFAULT_ISUM_CAP,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_MISMATCH: u8 = 2;

#[derive(Serialize, Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorCode {
    #[serde(rename = "E-EMPTY")]
    Empty,
    #[serde(rename = "E-SYNTAX")]
    Syntax,
    #[serde(rename = "E-ENUM")]
    Enum,
    #[serde(rename = "E-FIELD")]
    Field,
    #[serde(rename = "E-TYPE")]
    Type,
    #[serde(rename = "E-SCHEMA")]
    Schema,
    #[serde(rename = "E-IO")]
    Io,
    #[serde(rename = "E-LANG")]
    Lang,
    #[serde(rename = "E-INVALID")]
    Invalid,
    #[serde(rename = "E-REF")]
    Ref,
    #[serde(rename = "E-LINK")]
    Link,
    #[serde(rename = "E-NOFILES")]
    NoFiles,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCode::Empty => "E-EMPTY",
            ErrorCode::Syntax => "E-SYNTAX",
            ErrorCode::Enum => "E-ENUM",
            ErrorCode::Field => "E-FIELD",
            ErrorCode::Type => "E-TYPE",
            ErrorCode::Schema => "E-SCHEMA",
            ErrorCode::Io => "E-IO",
            ErrorCode::Lang => "E-LANG",
            ErrorCode::Invalid => "E-INVALID",
            ErrorCode::Ref => "E-REF",
            ErrorCode::Link => "E-LINK",
            ErrorCode::NoFiles => "E-NOFILES",
        };
        f.write_str(s)
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct InputError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    /// Offending token or key, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
}

impl InputError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        InputError {
            code,
            message: message.into(),
            line: None,
            column: None,
            token: None,
        }
    }

    fn with_token(mut self, token: impl Into<String>) -> Self {
        self.token = Some(token.into());
        self
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " at {l}:{c}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Language reference: a built-in name or inline parameters.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum LangRef {
    Name(String),
    Inline(LangParams),
}

impl Default for LangRef {
    fn default() -> Self {
        LangRef::Name("english".into())
    }
}

impl LangRef {
    pub fn resolve(&self) -> Result<LangParams, InputError> {
        match self {
            LangRef::Inline(p) => Ok(p.clone()),
            LangRef::Name(n) => LangParams::builtin(n).ok_or_else(|| {
                InputError::new(ErrorCode::Lang, format!("unknown language `{n}`")).with_token(n.clone())
            }),
        }
    }
}

/// One antecedent or several (split antecedents).
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(untagged)]
pub enum Antecedent {
    One(String),
    Many(Vec<String>),
}

impl Antecedent {
    pub fn labels(&self) -> Vec<&str> {
        match self {
            Antecedent::One(s) => vec![s.as_str()],
            Antecedent::Many(v) => v.iter().map(String::as_str).collect(),
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, Antecedent::Many(v) if v.len() > 1)
    }
}

impl fmt::Display for Antecedent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labels().join("+"))
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct LinkSpec {
    pub anaphor: String,
    pub antecedent: Antecedent,
    #[serde(rename = "type")]
    pub kind: LinkKind,
}

/// A coindexation judgment: `ok: false` transcribes a starred index.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Judgment {
    pub anaphor: String,
    pub antecedent: Antecedent,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ViolationSpec {
    pub kind: ViolationKind,
    pub anaphor: String,
    pub antecedent: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct CommandSpec {
    pub commander: String,
    pub commanded: String,
    pub ok: bool,
}

#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ListsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_a: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_z: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_u: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_lu: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub judgments: Vec<Judgment>,
    /// Final candidate sets, keyed by anaphor marker (set comparison).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub antec: BTreeMap<String, Vec<String>>,
    /// Candidate sets before the reverse filter.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub antec_unfiltered: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exempt: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reshuffled: BTreeMap<String, bool>,
    /// Exact set of resolution violations; absent means unchecked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<ViolationSpec>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commands: Vec<CommandSpec>,
    /// Binding lists by node id (ordered comparison).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub lists: BTreeMap<String, ListsSpec>,
    /// Local domain node ids by anaphor marker (set comparison).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub domains: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Document {
    #[serde(rename = "binder-schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Citation key linking the fixture to the example it transcribes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default)]
    pub lang: LangRef,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context_markers: Vec<ContextMarker>,
    pub sentences: Vec<Node>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

impl Document {
    pub fn new(lang: LangRef, context_markers: Vec<ContextMarker>, sentences: Vec<Node>) -> Self {
        Document {
            schema: SCHEMA_VERSION,
            id: None,
            cite: None,
            text: None,
            lang,
            context_markers,
            sentences,
            links: Vec::new(),
            expected: None,
        }
    }

    pub fn discourse(&self) -> Discourse {
        Discourse::from_parts(self.context_markers.clone(), self.sentences.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }
}

fn backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn classify(e: &serde_json::Error) -> InputError {
    use serde_json::error::Category;
    let full = e.to_string();
    // serde_json appends " at line L column C"; keep the bare message
    let msg = full
        .rsplit_once(" at line ")
        .map_or(full.as_str(), |(m, _)| m)
        .to_string();
    let (code, token) = match e.classify() {
        Category::Io => (ErrorCode::Io, None),
        Category::Syntax | Category::Eof => (ErrorCode::Syntax, None),
        Category::Data => {
            let token = backticked(&msg);
            if msg.starts_with("unknown variant") {
                (ErrorCode::Enum, token)
            } else if token.as_deref() == Some("binder-schema") && !msg.starts_with("unknown field") {
                (ErrorCode::Schema, token)
            } else if msg.starts_with("unknown field") || msg.starts_with("missing field") {
                (ErrorCode::Field, token)
            } else {
                (ErrorCode::Type, token)
            }
        }
    };
    InputError {
        code,
        message: msg,
        line: Some(e.line()),
        column: Some(e.column()),
        token,
    }
}

/// Parses a document from text.
pub fn parse_document_str(text: &str) -> Result<Document, InputError> {
    if text.trim().is_empty() {
        return Err(InputError::new(ErrorCode::Empty, "empty document"));
    }
    let doc: Document = serde_json::from_str(text).map_err(|e| classify(&e))?;
    if doc.schema != SCHEMA_VERSION {
        return Err(InputError::new(
            ErrorCode::Schema,
            format!("unsupported binder-schema {} (expected {SCHEMA_VERSION})", doc.schema),
        )
        .with_token(doc.schema.to_string()));
    }
    Ok(doc)
}

pub fn parse_document(path: &Path) -> Result<Document, InputError> {
    let bytes = std::fs::read(path)
        .map_err(|e| InputError::new(ErrorCode::Io, format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes)
        .map_err(|_| InputError::new(ErrorCode::Io, format!("{}: not valid UTF-8", path.display())))?;
    parse_document_str(&text)
}

/// `--lang` argument: a built-in name, or a path to a JSON parameter file.
pub fn load_lang(arg: &str) -> Result<LangParams, InputError> {
    if let Some(p) = LangParams::builtin(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError::new(ErrorCode::Io, format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| classify(&e));
    }
    Err(InputError::new(ErrorCode::Lang, format!("unknown language `{arg}`")).with_token(arg))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub reverse: bool,
    pub transitivity: bool,
    pub dump_lists: bool,
    pub max_isum: usize,
    pub lang: Option<LangParams>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            reverse: true,
            transitivity: true,
            dump_lists: false,
            max_isum: DEFAULT_ISUM_CAP,
            lang: None,
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct ListDump {
    pub node: String,
    pub list_a: Vec<String>,
    pub list_z: Vec<String>,
    pub list_u: Vec<String>,
    pub list_lu: Vec<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct RemovalOut {
    pub marker: String,
    pub by: crate::principles::ReversePrinciple,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct AnaphorOut {
    pub anaphor: String,
    pub node: String,
    pub principle: Principle,
    pub antec: Vec<String>,
    pub exempt: bool,
    pub reshuffled: bool,
    pub domain: Vec<String>,
    pub commanders: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub removed: Vec<RemovalOut>,
    /// ANTEC extended with coreference class-mates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closure: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isums: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isum_error: Option<String>,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct ViolationOut {
    pub kind: ViolationKind,
    pub anaphor: String,
    pub antecedent: String,
    pub via_closure: bool,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct Mismatch {
    pub check: String,
    pub expected: String,
    pub actual: String,
    /// Principle of the anaphor a judgment concerns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub principle: Option<Principle>,
}

#[derive(Serialize, Copy, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Violation,
    Mismatch,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct Report {
    #[serde(rename = "binder-schema")]
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cite: Option<String>,
    pub lang: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lists: Option<Vec<ListDump>>,
    pub anaphors: Vec<AnaphorOut>,
    pub violations: Vec<ViolationOut>,
    pub mismatches: Vec<Mismatch>,
    /// Judgments evaluated per principle: (agreeing, disagreeing).
    #[serde(skip)]
    pub judgment_tally: BTreeMap<Principle, (usize, usize)>,
    pub status: Status,
}

impl Report {
    /// 0 on success, 2 on expectation mismatch or resolution violation.
    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Pass => EXIT_OK,
            Status::Violation | Status::Mismatch => EXIT_MISMATCH,
        }
    }

    /// Whether the document meets its own expectations (violations that are
    /// expected count as met).
    pub fn meets_expectations(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Everything the pipeline computes for one document.
pub struct Analysis {
    pub discourse: ValidDiscourse,
    pub lang: LangParams,
    pub propagation: Propagation,
    pub unfiltered: Vec<AntecReport>,
    pub reports: Vec<AntecReport>,
    pub links: Vec<AnaphoricLink>,
    pub violations: Vec<ResolutionViolation>,
}

fn marker_ref(d: &ValidDiscourse, label: &str, context: &str) -> Result<MarkerId, InputError> {
    d.marker_id(label).ok_or_else(|| {
        InputError::new(ErrorCode::Ref, format!("{context} refers to undeclared marker `{label}`"))
            .with_token(label)
    })
}

fn node_ref(d: &ValidDiscourse, label: &str, context: &str) -> Result<(), InputError> {
    d.node_id(label).map(|_| ()).ok_or_else(|| {
        InputError::new(ErrorCode::Ref, format!("{context} refers to unknown node `{label}`")).with_token(label)
    })
}

/// Validates the document, then propagates, binds, filters and checks the
/// resolution.
pub fn analyse(doc: &Document, opts: &CheckOptions) -> Result<Analysis, InputError> {
    let lang = match &opts.lang {
        Some(l) => l.clone(),
        None => doc.lang.resolve()?,
    };
    let discourse = doc
        .discourse()
        .validate()
        .map_err(|r| InputError::new(ErrorCode::Invalid, r.to_string()))?;
    let d = &discourse;
    let mut links = Vec::new();
    for l in &doc.links {
        let anaphor = marker_ref(d, &l.anaphor, "link")?;
        let antecedents = l
            .antecedent
            .labels()
            .iter()
            .map(|a| marker_ref(d, a, "link"))
            .collect::<Result<Vec<_>, _>>()?;
        let link = AnaphoricLink {
            anaphor,
            antecedents,
            kind: l.kind,
        };
        validate_link(d, &link).map_err(|e| InputError::new(ErrorCode::Link, e.to_string()))?;
        links.push(link);
    }
    if let Some(exp) = &doc.expected {
        check_expected_refs(d, exp)?;
    }
    let propagation = propagate(d, &lang);
    let unfiltered = apply_binding_with(d, &propagation)
        .map_err(|e| InputError::new(ErrorCode::Invalid, e.to_string()))?;
    let reverse = if opts.reverse {
        ReverseOptions::default()
    } else {
        ReverseOptions::disabled()
    };
    let reports = filter_reports(&unfiltered, d, reverse);
    let violations = if opts.transitivity {
        check_resolution(d, &links, &reports)
    } else {
        Vec::new()
    };
    Ok(Analysis {
        discourse,
        lang,
        propagation,
        unfiltered,
        reports,
        links,
        violations,
    })
}

fn check_expected_refs(d: &ValidDiscourse, exp: &Expected) -> Result<(), InputError> {
    for j in &exp.judgments {
        marker_ref(d, &j.anaphor, "judgment")?;
        for a in j.antecedent.labels() {
            marker_ref(d, a, "judgment")?;
        }
    }
    for (k, v) in exp.antec.iter().chain(&exp.antec_unfiltered) {
        marker_ref(d, k, "expected antec")?;
        for m in v {
            marker_ref(d, m, "expected antec")?;
        }
    }
    for k in exp.exempt.keys().chain(exp.reshuffled.keys()) {
        marker_ref(d, k, "expected flag")?;
    }
    for v in exp.violations.iter().flatten() {
        marker_ref(d, &v.anaphor, "expected violation")?;
        marker_ref(d, &v.antecedent, "expected violation")?;
    }
    for c in &exp.commands {
        marker_ref(d, &c.commander, "command assertion")?;
        marker_ref(d, &c.commanded, "command assertion")?;
    }
    for (node, lists) in &exp.lists {
        node_ref(d, node, "expected lists")?;
        for m in [&lists.list_a, &lists.list_z, &lists.list_u, &lists.list_lu]
            .into_iter()
            .flatten()
            .flatten()
        {
            marker_ref(d, m, "expected lists")?;
        }
    }
    for (k, nodes) in &exp.domains {
        marker_ref(d, k, "expected domain")?;
        for n in nodes {
            node_ref(d, n, "expected domain")?;
        }
    }
    Ok(())
}

/// Whether binding agrees with a judgment. An unstarred single antecedent
/// must be admitted; a starred one must not be among the candidates. A split
/// antecedent is admitted when every member is and the anaphor is not a
/// non-exempt reflexive.
pub fn judgment_holds(report: &AntecReport, antecedents: &[MarkerId], ok: bool) -> bool {
    if antecedents.len() > 1 {
        let admitted = (report.exempt || !report.principle.is_reflexive())
            && antecedents.iter().all(|m| report.admits(*m));
        admitted == ok
    } else if ok {
        report.admits(antecedents[0])
    } else {
        !report.antec.contains(&antecedents[0])
    }
}

fn labels_set(d: &ValidDiscourse, ms: &[MarkerId]) -> BTreeSet<String> {
    ms.iter().map(|m| d.marker_label(*m).to_string()).collect()
}

fn show_set<T: AsRef<str>>(xs: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = xs.into_iter().map(|x| x.as_ref().to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn show_list<T: AsRef<str>>(xs: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = xs.into_iter().map(|x| x.as_ref().to_string()).collect();
    format!("<{}>", v.join(", "))
}

fn evaluate(a: &Analysis, exp: &Expected, report_tally: &mut BTreeMap<Principle, (usize, usize)>) -> Vec<Mismatch> {
    let d = &a.discourse;
    let mut out = Vec::new();
    let find = |reports: &[AntecReport], m: MarkerId| reports.iter().find(|r| r.anaphor == m).cloned();

    for j in &exp.judgments {
        let m = d.marker_id(&j.anaphor).expect("checked");
        let ants: Vec<MarkerId> = j
            .antecedent
            .labels()
            .iter()
            .map(|l| d.marker_id(l).expect("checked"))
            .collect();
        let star = if j.ok { "" } else { "*" };
        let check = format!("judgment {} -> {star}{}", j.anaphor, j.antecedent);
        match find(&a.reports, m) {
            None => out.push(Mismatch {
                check,
                expected: "an anaphor report".into(),
                actual: "no report (not an anaphoric NP)".into(),
                principle: None,
            }),
            Some(r) => {
                let holds = judgment_holds(&r, &ants, j.ok);
                let tally = report_tally.entry(r.principle).or_default();
                if holds {
                    tally.0 += 1;
                } else {
                    tally.1 += 1;
                    out.push(Mismatch {
                        check,
                        expected: if j.ok { "admissible".into() } else { "excluded".into() },
                        actual: format!(
                            "antec {}{}",
                            show_list(d.labels(&r.antec)),
                            if r.exempt { " (exempt)" } else { "" }
                        ),
                        principle: Some(r.principle),
                    });
                }
            }
        }
    }

    for (which, map, reports) in [
        ("antec", &exp.antec, &a.reports),
        ("antec-unfiltered", &exp.antec_unfiltered, &a.unfiltered),
    ] {
        for (k, want) in map {
            let m = d.marker_id(k).expect("checked");
            let got = find(reports, m).map(|r| labels_set(d, &r.antec));
            let want: BTreeSet<String> = want.iter().cloned().collect();
            if got.as_ref() != Some(&want) {
                out.push(Mismatch {
                    check: format!("{which} {k}"),
                    expected: show_set(&want),
                    actual: got.map_or_else(|| "no report".into(), show_set),
                    principle: None,
                });
            }
        }
    }

    for (which, map) in [("exempt", &exp.exempt), ("reshuffled", &exp.reshuffled)] {
        for (k, want) in map {
            let m = d.marker_id(k).expect("checked");
            let got = find(&a.reports, m).map(|r| if which == "exempt" { r.exempt } else { r.reshuffled });
            if got != Some(*want) {
                out.push(Mismatch {
                    check: format!("{which} {k}"),
                    expected: want.to_string(),
                    actual: got.map_or_else(|| "no report".into(), |g| g.to_string()),
                    principle: None,
                });
            }
        }
    }

    if let Some(want) = &exp.violations {
        let want: BTreeSet<(ViolationKind, String, String)> = want
            .iter()
            .map(|v| (v.kind, v.anaphor.clone(), v.antecedent.clone()))
            .collect();
        let got: BTreeSet<(ViolationKind, String, String)> = a
            .violations
            .iter()
            .map(|v| {
                (
                    v.kind,
                    d.marker_label(v.anaphor).to_string(),
                    d.marker_label(v.antecedent).to_string(),
                )
            })
            .collect();
        if want != got {
            let show = |s: &BTreeSet<(ViolationKind, String, String)>| {
                show_set(s.iter().map(|(k, x, y)| format!("{k:?} {x}->{y}")))
            };
            out.push(Mismatch {
                check: "violations".into(),
                expected: show(&want),
                actual: show(&got),
                principle: None,
            });
        }
    }

    for c in &exp.commands {
        let x = d.marker_id(&c.commander).expect("checked");
        let y = d.marker_id(&c.commanded).expect("checked");
        let got = o_command(d, x, y);
        if got != c.ok {
            out.push(Mismatch {
                check: format!("o-command {} {}", c.commander, c.commanded),
                expected: c.ok.to_string(),
                actual: got.to_string(),
                principle: None,
            });
        }
    }

    for (node, spec) in &exp.lists {
        let n = d.node_id(node).expect("checked");
        let lists = a.propagation.get(n);
        let got = [
            ("list-a", &spec.list_a, d.labels(&lists.list_a.markers())),
            ("list-z", &spec.list_z, d.labels(&lists.list_z.markers())),
            ("list-u", &spec.list_u, d.labels(&lists.list_u)),
            ("list-lu", &spec.list_lu, d.labels(&lists.list_lu)),
        ];
        for (name, want, got) in got {
            if let Some(want) = want {
                if *want != got {
                    out.push(Mismatch {
                        check: format!("{name} at {node}"),
                        expected: show_list(want),
                        actual: show_list(&got),
                        principle: None,
                    });
                }
            }
        }
    }

    for (k, want) in &exp.domains {
        let m = d.marker_id(k).expect("checked");
        let got: Option<BTreeSet<String>> = find(&a.unfiltered, m)
            .map(|r| r.domain_nodes.iter().map(|n| d.node_label(*n).to_string()).collect());
        let want: BTreeSet<String> = want.iter().cloned().collect();
        if got.as_ref() != Some(&want) {
            out.push(Mismatch {
                check: format!("domain {k}"),
                expected: show_set(&want),
                actual: got.map_or_else(|| "no report".into(), show_set),
                principle: None,
            });
        }
    }
    out
}

/// Runs the full pipeline on a document and builds its report.
pub fn run_check(doc: &Document, opts: &CheckOptions) -> Result<Report, InputError> {
    let a = analyse(doc, opts)?;
    let d = &a.discourse;
    let classes = (!a.links.is_empty()).then(|| coref_closure(d, &a.links));
    let anaphors = a
        .reports
        .iter()
        .map(|r| {
            let plural = d.marker(r.anaphor).number == Number::Plural;
            let (isums, isum_error) = if plural && !r.exempt && !r.antec.is_empty() {
                match pluralize_candidates(d, &r.antec, opts.max_isum) {
                    Ok(c) => (Some(c.iter().map(|c| c.label(d)).collect()), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            } else {
                (None, None)
            };
            AnaphorOut {
                anaphor: d.marker_label(r.anaphor).to_string(),
                node: d.node_label(r.node).to_string(),
                principle: r.principle,
                antec: d.labels(&r.antec),
                exempt: r.exempt,
                reshuffled: r.reshuffled,
                domain: r.domain_nodes.iter().map(|n| d.node_label(*n).to_string()).collect(),
                commanders: d.labels(&r.commanders),
                removed: r
                    .removed
                    .iter()
                    .map(|rm| RemovalOut {
                        marker: d.marker_label(rm.marker).to_string(),
                        by: rm.by,
                    })
                    .collect(),
                closure: classes.as_ref().map(|c| d.labels(&augment_antec(r, c))),
                isums,
                isum_error,
            }
        })
        .collect();
    let lists = opts.dump_lists.then(|| {
        a.propagation
            .iter()
            .map(|(n, l)| ListDump {
                node: d.node_label(n).to_string(),
                list_a: d.labels(&l.list_a.markers()),
                list_z: d.labels(&l.list_z.markers()),
                list_u: d.labels(&l.list_u),
                list_lu: d.labels(&l.list_lu),
            })
            .collect()
    });
    let violations: Vec<ViolationOut> = a
        .violations
        .iter()
        .map(|v| ViolationOut {
            kind: v.kind,
            anaphor: d.marker_label(v.anaphor).to_string(),
            antecedent: d.marker_label(v.antecedent).to_string(),
            via_closure: v.via_closure,
        })
        .collect();
    let mut tally = BTreeMap::new();
    let mismatches = match &doc.expected {
        Some(exp) => evaluate(&a, exp, &mut tally),
        None => Vec::new(),
    };
    let status = if !mismatches.is_empty() {
        Status::Mismatch
    } else if !violations.is_empty() {
        Status::Violation
    } else {
        Status::Pass
    };
    Ok(Report {
        schema: SCHEMA_VERSION,
        document: doc.id.clone(),
        cite: doc.cite.clone(),
        lang: a.lang.name.clone(),
        lists,
        anaphors,
        violations,
        mismatches,
        judgment_tally: tally,
        status,
    })
}

#[derive(Serialize, Deserialize, Copy, Clone, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Text,
}

pub fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(r).expect("reports serialise") + "\n",
        Format::Text => render_report_text(r),
    }
}

fn render_report_text(r: &Report) -> String {
    let mut s = String::new();
    let name = r.document.as_deref().unwrap_or("<document>");
    let _ = writeln!(s, "document {name} ({})", r.lang);
    if let Some(lists) = &r.lists {
        for l in lists {
            let _ = writeln!(
                s,
                "  lists {}: A {} Z {} U {} LU {}",
                l.node,
                show_list(&l.list_a),
                show_list(&l.list_z),
                show_list(&l.list_u),
                show_list(&l.list_lu)
            );
        }
    }
    for a in &r.anaphors {
        let mut flags = Vec::new();
        if a.exempt {
            flags.push("exempt");
        }
        if a.reshuffled {
            flags.push("reshuffled");
        }
        let flags = if flags.is_empty() {
            String::new()
        } else {
            format!(" [{}]", flags.join(", "))
        };
        let _ = writeln!(
            s,
            "  {} ({}) principle {}: antec {}{flags}",
            a.anaphor,
            a.node,
            a.principle,
            show_list(&a.antec)
        );
        for rm in &a.removed {
            let _ = writeln!(s, "    removed {} by R-{:?}", rm.marker, rm.by);
        }
        if let Some(isums) = &a.isums {
            let _ = writeln!(s, "    i-sums {}", show_list(isums));
        }
        if let Some(e) = &a.isum_error {
            let _ = writeln!(s, "    i-sums unavailable: {e}");
        }
    }
    for v in &r.violations {
        let _ = writeln!(
            s,
            "  violation {:?}: {} -> {}{}",
            v.kind,
            v.anaphor,
            v.antecedent,
            if v.via_closure { " (via coreference)" } else { "" }
        );
    }
    for m in &r.mismatches {
        let _ = writeln!(s, "  mismatch {}: expected {}, got {}", m.check, m.expected, m.actual);
    }
    let status = match r.status {
        Status::Pass => "pass",
        Status::Violation => "violation",
        Status::Mismatch => "mismatch",
    };
    let _ = writeln!(s, "status {status}");
    s
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct FileResult {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<Mismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<InputError>,
}

#[derive(Serialize, Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct CorpusSummary {
    pub files: Vec<FileResult>,
    /// Judgments per principle of the judged anaphor.
    pub per_principle: BTreeMap<String, Tally>,
    /// Documents per language.
    pub per_language: BTreeMap<String, Tally>,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
}

impl CorpusSummary {
    /// 1 if any document could not be read, else 2 on any failure.
    pub fn exit_code(&self) -> u8 {
        if self.errors > 0 {
            EXIT_INPUT
        } else if self.failed > 0 {
            EXIT_MISMATCH
        } else {
            EXIT_OK
        }
    }
}

/// Paths matching a glob pattern; a directory stands for its `*.json`.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, InputError> {
    let pattern = if Path::new(pattern).is_dir() {
        format!("{}/*.json", pattern.trim_end_matches('/'))
    } else {
        pattern.to_string()
    };
    let paths = glob::glob(&pattern)
        .map_err(|e| InputError::new(ErrorCode::NoFiles, format!("bad pattern `{pattern}`: {e}")))?;
    let mut out: Vec<PathBuf> = paths.filter_map(Result::ok).filter(|p| p.is_file()).collect();
    out.sort();
    if out.is_empty() {
        return Err(InputError::new(ErrorCode::NoFiles, format!("no documents match `{pattern}`")).with_token(pattern));
    }
    Ok(out)
}

pub fn run_corpus(pattern: &str, opts: &CheckOptions) -> Result<CorpusSummary, InputError> {
    let paths = expand_glob(pattern)?;
    let mut summary = CorpusSummary {
        files: Vec::new(),
        per_principle: BTreeMap::new(),
        per_language: BTreeMap::new(),
        passed: 0,
        failed: 0,
        errors: 0,
    };
    for path in paths {
        let shown = path.display().to_string();
        let outcome = parse_document(&path).and_then(|doc| {
            let report = run_check(&doc, opts)?;
            Ok((doc, report))
        });
        match outcome {
            Ok((doc, report)) => {
                let passed = report.meets_expectations();
                for (p, (ok, bad)) in &report.judgment_tally {
                    let t = summary.per_principle.entry(p.to_string()).or_default();
                    t.pass += ok;
                    t.fail += bad;
                }
                let t = summary.per_language.entry(report.lang.clone()).or_default();
                if passed {
                    t.pass += 1;
                    summary.passed += 1;
                } else {
                    t.fail += 1;
                    summary.failed += 1;
                }
                summary.files.push(FileResult {
                    path: shown,
                    cite: doc.cite.clone(),
                    lang: Some(report.lang.clone()),
                    passed,
                    mismatches: report.mismatches,
                    error: None,
                });
            }
            Err(e) => {
                summary.errors += 1;
                summary.failed += 1;
                summary.files.push(FileResult {
                    path: shown,
                    cite: None,
                    lang: None,
                    passed: false,
                    mismatches: Vec::new(),
                    error: Some(e),
                });
            }
        }
    }
    Ok(summary)
}

pub fn render_summary(s: &CorpusSummary, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(s).expect("summaries serialise") + "\n",
        Format::Text => {
            let mut out = String::new();
            for f in &s.files {
                let label = f.cite.as_deref().unwrap_or("");
                let _ = writeln!(
                    out,
                    "{} {} {label}",
                    if f.passed { "PASS" } else { "FAIL" },
                    f.path
                );
                for m in &f.mismatches {
                    let _ = writeln!(out, "    {}: expected {}, got {}", m.check, m.expected, m.actual);
                }
                if let Some(e) = &f.error {
                    let _ = writeln!(out, "    {e}");
                }
            }
            for (p, t) in &s.per_principle {
                let _ = writeln!(out, "principle {p}: {} pass, {} fail", t.pass, t.fail);
            }
            for (l, t) in &s.per_language {
                let _ = writeln!(out, "language {l}: {} pass, {} fail", t.pass, t.fail);
            }
            let _ = writeln!(
                out,
                "documents: {} pass, {} fail ({} unreadable)",
                s.passed, s.failed, s.errors
            );
            out
        }
    }
}
