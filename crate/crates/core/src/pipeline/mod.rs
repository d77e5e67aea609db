//! The interactive session: staged generation with sampling, automatic
//! selection, symbolic refinement, pruning and user edits.
//!
//! ```text
//! BasicInfo -> TaskDescription -> ConceptList -> GraphDraft -> GraphRefine*
//!   -> GraphApproval -> ConstraintInput -> FolDraft -> ConstraintCompile* -> Done
//! ```
//!
//! A session only moves forward, except when the user edits an artifact of
//! an earlier stage: the session then rewinds to that stage and everything
//! downstream is discarded.

mod config;
mod edit;
#[cfg(feature = "archive")]
mod export;
pub mod prompts;
mod script;
mod session;
mod stage;

pub use config::PipelineConfig;
pub use edit::{Action, Edit};
#[cfg(feature = "archive")]
pub use export::{export_archive, ARCHIVE_FILES};
pub use script::{run_script, SessionScript};
pub use session::{BasicInfo, Candidate, Channel, Event, Origin, Session};
pub use stage::{Stage, UnknownStage};

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::constraint::Constraint;
use crate::diagnostic::{Code, Diagnostic};
use crate::dsl::concept_list::{emit_concept_list, parse_concept_list, ConceptEntry};
use crate::dsl::{emit_graph, parse_graph};
use crate::fol::{compile_fol_text, graph_predicates};
use crate::graph::{normalize_name, ConceptGraph, ConceptKind, Edge};
use crate::llm::{window_history, ChatMessage, CompletionRequest, LlmError, SharedBackend, TemplateError};
use crate::retrieval::{DemoStore, EmbedError, Embedder, NgramEmbedder};
use crate::span::SourceSpan;
use crate::validator::{lint_source, render_feedback, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid basic information: {0}")]
    InvalidInfo(String),
    #[error("{stage} needs {missing}")]
    StagePrecondition { stage: Stage, missing: String },
    #[error("{stage} does not sample the model")]
    NotGenerative { stage: Stage },
    #[error("edit targets {target} but the session is only at {current}")]
    StaleEdit { target: Stage, current: Stage },
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("still {} errors after {iterations} refinement rounds", best.error_count())]
    MaxIterationsExceeded { iterations: usize, best: Box<Candidate> },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Progress phases reported while a stage is worked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Started,
    Sampling,
    Validating,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Progress {
    pub stage: Stage,
    pub phase: Phase,
    pub detail: String,
}

pub type Observer = Arc<dyn Fn(&Progress) + Send + Sync>;

/// Outcome of the constraint flow.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFlow {
    /// FOL text of every surviving sample.
    pub samples: Vec<String>,
    /// Compiled constraints of the selected sample.
    pub constraints: Vec<Constraint>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Groups the graph and formula sub-stages so edits and generation can
/// reason about "the same step".
fn phase_of(stage: Stage) -> Stage {
    match stage {
        Stage::GraphDraft | Stage::GraphRefine | Stage::GraphApproval => Stage::GraphDraft,
        Stage::FolDraft | Stage::ConstraintCompile => Stage::FolDraft,
        s => s,
    }
}

/// Keeps only error-free candidates once the loop has run `threshold`
/// rounds and at least one such candidate exists.
pub fn prune(candidates: Vec<Candidate>, iteration: usize, threshold: usize) -> Vec<Candidate> {
    if iteration >= threshold && candidates.iter().any(Candidate::is_error_free) {
        candidates.into_iter().filter(Candidate::is_error_free).collect()
    } else {
        candidates
    }
}

/// Index of the candidate with the fewest errors, then the fewest warnings,
/// earliest on ties.
pub fn best_index(candidates: &[Candidate]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by_key(|(i, c)| (c.error_count(), c.report.as_ref().map_or(0, |r| r.warning_count), *i))
        .map(|(i, _)| i)
}

fn concept_list_report(text: &str) -> ValidationReport {
    let (entries, mut diags) = parse_concept_list(text);
    if entries.is_empty() {
        diags.push(Diagnostic::new(Code::Syn008, SourceSpan::origin(), "no concept entries found"));
    }
    ValidationReport::from_diagnostics(diags)
}

fn fol_report(text: &str, graph: Option<&ConceptGraph>) -> ValidationReport {
    let empty = ConceptGraph::new("");
    let (constraints, mut diags) = compile_fol_text(text, graph.unwrap_or(&empty));
    if constraints.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::new(Code::Syn004, SourceSpan::origin(), "no formula found"));
    }
    ValidationReport::from_diagnostics(diags)
}

/// Checks a sample of `stage`; prose stages have no report.
pub fn evaluate(stage: Stage, text: &str, graph: Option<&ConceptGraph>) -> Option<ValidationReport> {
    match phase_of(stage) {
        Stage::ConceptList => Some(concept_list_report(text)),
        Stage::GraphDraft => Some(lint_source(text)),
        Stage::FolDraft => Some(fol_report(text, graph)),
        _ => None,
    }
}

fn new_session_id() -> String {
    #[cfg(feature = "random-ids")]
    {
        uuid::Uuid::new_v4().simple().to_string()
    }
    #[cfg(not(feature = "random-ids"))]
    {
        use std::sync::atomic::{AtomicU64, Ordering};
        static NEXT: AtomicU64 = AtomicU64::new(1);
        format!("session-{}", NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

pub struct Pipeline {
    backend: SharedBackend,
    store: Arc<DemoStore>,
    embedder: NgramEmbedder,
    pub config: PipelineConfig,
    observer: Option<Observer>,
}

impl Pipeline {
    pub fn new(backend: SharedBackend, store: Arc<DemoStore>, config: PipelineConfig) -> Self {
        let embedder = NgramEmbedder::new(store.dimension);
        Pipeline {
            backend,
            store,
            embedder,
            config,
            observer: None,
        }
    }

    pub fn with_observer(mut self, observer: Observer) -> Self {
        self.observer = Some(observer);
        self
    }

    fn report(&self, stage: Stage, phase: Phase, detail: impl Into<String>) {
        if let Some(o) = &self.observer {
            o(&Progress {
                stage,
                phase,
                detail: detail.into(),
            });
        }
    }

    /// Session with a fresh random id and the current time.
    pub fn start_session(&self, info: BasicInfo) -> Result<Session, PipelineError> {
        let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Session::new(&new_session_id(), &now, info)
    }

    /// Runs one client action.
    pub fn apply(&self, s: &mut Session, action: Action) -> Result<(), PipelineError> {
        match action {
            Action::Generate { stage } => self.generate(s, stage).map(|_| ()),
            Action::Refine { until_clean: false } => self.refine_round(s).map(|_| ()),
            Action::Refine { until_clean: true } => self.refine_to_fixpoint(s).map(|_| ()),
            Action::Prune => self.prune_current(s),
            Action::Select { stage, index } => self.select(s, stage, index),
            Action::Edit { edit } => self.apply_edit(s, edit),
            Action::Approve => self.approve(s),
            Action::Constraints { text } => self.run_constraint_flow(s, &text).map(|_| ()),
        }
    }

    fn query_text(&self, s: &Session) -> String {
        let info = &s.basic_info;
        let mut text = format!("{} {} {}", info.task_name, info.domain, info.dataset);
        if let Some(d) = &s.task_description {
            text.push(' ');
            text.push_str(d);
        }
        text
    }

    fn demos(&self, s: &Session, stage: Stage) -> Result<String, PipelineError> {
        if self.store.stage_entries(stage).next().is_none() {
            return Ok(String::new());
        }
        let query = self.embedder.embed(&self.query_text(s))?;
        let hits = self.store.top_k(&query, self.config.retrieval.k(), stage);
        Ok(prompts::render_demos(&hits))
    }

    fn require(stage: Stage, present: bool, missing: &str) -> Result<(), PipelineError> {
        if present {
            Ok(())
        } else {
            Err(PipelineError::StagePrecondition {
                stage,
                missing: missing.to_string(),
            })
        }
    }

    fn predicate_listing(graph: &ConceptGraph) -> String {
        graph_predicates(graph)
            .iter()
            .map(|p| {
                let args: Vec<&str> = ["x", "y", "z"].iter().copied().take(p.arity).collect();
                format!("{}({})", p.name, args.join(", "))
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn bindings(&self, s: &Session, stage: Stage) -> Result<BTreeMap<String, String>, PipelineError> {
        let info = &s.basic_info;
        let mut b = BTreeMap::new();
        let mut bind = |k: &str, v: String| {
            b.insert(k.to_string(), v);
        };
        bind("demos", self.demos(s, stage)?);
        match stage {
            Stage::TaskDescription => {
                bind("name", info.task_name.clone());
                bind("domain", info.domain.clone());
                bind("dataset", info.dataset.clone());
            }
            Stage::ConceptList => {
                Self::require(stage, s.task_description.is_some(), "a task description")?;
                bind("name", info.task_name.clone());
                bind("description", s.task_description.clone().unwrap_or_default());
            }
            Stage::GraphDraft => {
                Self::require(stage, !s.concept_list.is_empty(), "a concept list")?;
                bind("name", info.task_name.clone());
                bind("description", s.task_description.clone().unwrap_or_default());
                bind("concepts", emit_concept_list(&s.concept_list));
            }
            Stage::FolDraft => {
                let graph = s.graph_source.as_deref().and_then(|t| parse_graph(t).graph);
                Self::require(stage, graph.is_some(), "an approved graph")?;
                Self::require(stage, s.constraint_text.is_some(), "constraint text")?;
                let graph = graph.expect("checked above");
                bind("graph", s.graph_source.clone().unwrap_or_default());
                bind("predicates", Self::predicate_listing(&graph));
                bind("constraints", s.constraint_text.clone().unwrap_or_default());
            }
            other => return Err(PipelineError::NotGenerative { stage: other }),
        }
        Ok(b)
    }

    fn template_id(stage: Stage) -> &'static str {
        match stage {
            Stage::TaskDescription => prompts::TASK_DESCRIPTION,
            Stage::ConceptList => prompts::CONCEPT_LIST,
            Stage::GraphDraft => prompts::GRAPH,
            _ => prompts::FOL,
        }
    }

    /// System message, as much carried history as fits, then the request.
    fn assemble(&self, rendered: Vec<ChatMessage>, history: &[ChatMessage]) -> Result<Vec<ChatMessage>, PipelineError> {
        let mut rendered = rendered.into_iter();
        let system = rendered.next().expect("templates render a system message");
        let user: Vec<ChatMessage> = rendered.collect();
        let user_cost: usize = user.iter().map(|m| crate::llm::estimate_tokens(&m.content)).sum();
        let budget = self.config.history_budget.saturating_sub(user_cost);
        let mut head = vec![system];
        head.extend(history.iter().cloned());
        let mut messages = window_history(&head, budget)?;
        messages.extend(user);
        Ok(messages)
    }

    fn graph_for(s: &Session, stage: Stage) -> Option<ConceptGraph> {
        if phase_of(stage) == Stage::FolDraft {
            s.graph_source.as_deref().and_then(|t| parse_graph(t).graph)
        } else {
            None
        }
    }

    /// Draws samples for `stage`, checks them and selects the best. Later
    /// artifacts are discarded.
    pub fn generate<'s>(&self, s: &'s mut Session, stage: Stage) -> Result<&'s [Candidate], PipelineError> {
        if !stage.is_generative() {
            return Err(PipelineError::NotGenerative { stage });
        }
        let (want, have) = (phase_of(stage), phase_of(s.stage));
        let reachable = want <= have
            || (have == Stage::BasicInfo && want == Stage::TaskDescription)
            || (have == Stage::ConstraintInput && want == Stage::FolDraft);
        if !reachable {
            return Err(PipelineError::StagePrecondition {
                stage,
                missing: format!("approval of {}", s.stage),
            });
        }
        let b = self.bindings(s, stage)?;
        if want < have {
            self.enter(s, stage)?;
        }
        let rendered = prompts::template(Self::template_id(stage)).render(&b)?;
        self.report(stage, Phase::Started, format!("{} samples", self.config.samples));
        s.stage = stage;
        self.clear_from(s, stage);
        let messages = self.assemble(rendered, &s.history)?;
        s.log(Channel::User, "generate", stage.as_str());
        self.report(stage, Phase::Sampling, "");
        let request = CompletionRequest {
            template: Self::template_id(stage).to_string(),
            messages,
            n: self.config.samples,
            params: self.config.params(stage),
        };
        let responses = self.backend.complete(&request)?;
        self.report(stage, Phase::Validating, format!("{} responses", responses.len()));
        let graph = Self::graph_for(s, stage);
        let candidates: Vec<Candidate> = responses
            .iter()
            .map(|r| {
                let text = if stage == Stage::TaskDescription {
                    r.trim().to_string()
                } else {
                    prompts::extract_artifact(r)
                };
                Candidate {
                    report: evaluate(stage, &text, graph.as_ref()),
                    text,
                    origin: Origin::Model,
                    attempt: 0,
                }
            })
            .collect();
        for c in &candidates {
            s.log(Channel::Model, "sample", c.text.clone());
        }
        s.candidates.insert(stage, candidates);
        self.after_change(s, stage);
        self.report(stage, Phase::Done, s.stage.as_str());
        Ok(s.candidates(stage))
    }

    fn code_stage(s: &Session) -> Result<Stage, PipelineError> {
        match phase_of(s.stage) {
            Stage::GraphDraft => Ok(Stage::GraphDraft),
            Stage::FolDraft => Ok(Stage::FolDraft),
            _ => Err(PipelineError::StagePrecondition {
                stage: s.stage,
                missing: "graph or formula samples".into(),
            }),
        }
    }

    /// Re-selects, re-derives artifacts and logs feedback after a candidate
    /// list changed, then settles the sub-stage.
    fn after_change(&self, s: &mut Session, stage: Stage) {
        if let Some(best) = best_index(s.candidates(stage)) {
            s.selected.insert(stage, best);
        }
        self.commit_selection(s, stage);
        if let Some(c) = s.selected_candidate(stage) {
            if let Some(report) = &c.report {
                let fb = render_feedback(&report.diagnostics, self.config.feedback_items);
                s.log(Channel::Feedback, "report", fb);
            }
        }
        Self::settle(s, stage);
    }

    /// Picks the sub-stage of a code loop: approvable once the selected
    /// sample is error-free, refining once a round has run.
    fn settle(s: &mut Session, stage: Stage) {
        let clean = s.selected_candidate(stage).is_some_and(Candidate::is_error_free);
        let refining = s.iteration_count > 0;
        s.stage = match phase_of(stage) {
            Stage::GraphDraft if clean => Stage::GraphApproval,
            Stage::GraphDraft if refining => Stage::GraphRefine,
            Stage::GraphDraft => Stage::GraphDraft,
            Stage::FolDraft if clean || refining => Stage::ConstraintCompile,
            Stage::FolDraft => Stage::FolDraft,
            _ => s.stage,
        };
    }

    /// Copies the selected candidate into the stage's artifact.
    fn commit_selection(&self, s: &mut Session, stage: Stage) {
        let Some(text) = s.selected_candidate(stage).map(|c| c.text.clone()) else {
            return;
        };
        match stage {
            Stage::TaskDescription => s.task_description = Some(text),
            Stage::ConceptList => s.concept_list = parse_concept_list(&text).0,
            _ => {}
        }
    }

    /// Discards artifacts of `stage` and everything after it.
    fn clear_from(&self, s: &mut Session, stage: Stage) {
        let from = phase_of(stage);
        for st in Stage::GENERATIVE {
            if st >= from {
                s.candidates.remove(&st);
                s.selected.remove(&st);
            }
        }
        if from <= Stage::TaskDescription {
            s.task_description = None;
        }
        if from <= Stage::ConceptList {
            s.concept_list.clear();
        }
        if from <= Stage::GraphDraft {
            s.graph_source = None;
        }
        if from <= Stage::ConstraintInput {
            s.constraint_text = None;
        }
        if from <= Stage::FolDraft {
            s.fol_text = None;
        }
        s.program = None;
        s.iteration_count = 0;
        Self::rebuild_history(s);
    }

    /// Carried conversation: one assistant turn per accepted artifact.
    fn rebuild_history(s: &mut Session) {
        let mut h = Vec::new();
        if s.stage > Stage::TaskDescription {
            if let Some(d) = &s.task_description {
                h.push(ChatMessage::assistant(format!("Task description:\n{d}")));
            }
        }
        if s.stage > Stage::ConceptList && !s.concept_list.is_empty() {
            h.push(ChatMessage::assistant(format!("Concepts:\n{}", emit_concept_list(&s.concept_list))));
        }
        if let Some(g) = &s.graph_source {
            h.push(ChatMessage::assistant(format!("Graph:\n{g}")));
        }
        s.history = h;
    }

    /// One feedback round over every erroneous sample of the current code
    /// stage, then pruning and re-selection. Returns whether any erroneous
    /// sample remains. At the iteration cap the clean samples are kept if
    /// there are any; otherwise the best sample is returned in the error.
    pub fn refine_round(&self, s: &mut Session) -> Result<bool, PipelineError> {
        let stage = Self::code_stage(s)?;
        if s.candidates(stage).iter().all(Candidate::is_error_free) {
            return Ok(false);
        }
        if s.iteration_count >= self.config.max_iterations {
            if !s.candidates(stage).iter().any(Candidate::is_error_free) {
                return Err(self.exceeded(s, stage));
            }
            // out of rounds but something is clean: keep only that
            let clean = prune(s.candidates(stage).to_vec(), 0, 0);
            s.candidates.insert(stage, clean);
            self.after_change(s, stage);
            return Ok(false);
        }
        let attempt = s.iteration_count + 1;
        self.report(s.stage, Phase::Started, format!("refinement round {attempt}"));
        let graph = Self::graph_for(s, stage);
        let template = if stage == Stage::GraphDraft {
            prompts::GRAPH_REFINE
        } else {
            prompts::FOL_REFINE
        };
        let mut next = Vec::new();
        let current = s.candidates(stage).to_vec();
        for (i, cand) in current.into_iter().enumerate() {
            if cand.is_error_free() {
                next.push(cand);
                continue;
            }
            let report = cand.report.as_ref().expect("code candidates carry reports");
            let feedback = render_feedback(&report.diagnostics, self.config.feedback_items);
            s.log(Channel::Feedback, "feedback", feedback.clone());
            let mut b = BTreeMap::new();
            b.insert("name".to_string(), s.basic_info.task_name.clone());
            b.insert("code".to_string(), cand.text.clone());
            b.insert("feedback".to_string(), feedback);
            b.insert("attempt".to_string(), attempt.to_string());
            b.insert("sample".to_string(), (i + 1).to_string());
            if stage == Stage::FolDraft {
                let g = graph.as_ref().expect("formula stages have an approved graph");
                b.insert("graph".to_string(), s.graph_source.clone().unwrap_or_default());
                b.insert("predicates".to_string(), Self::predicate_listing(g));
                b.insert("constraints".to_string(), s.constraint_text.clone().unwrap_or_default());
            }
            let messages = prompts::template(template).render(&b)?;
            self.report(s.stage, Phase::Sampling, format!("sample {}", i + 1));
            let request = CompletionRequest {
                template: template.to_string(),
                messages,
                n: 1,
                params: self.config.params(stage),
            };
            let response = self.backend.complete(&request)?.remove(0);
            let text = prompts::extract_artifact(&response);
            s.log(Channel::Model, "refined", text.clone());
            self.report(s.stage, Phase::Validating, format!("sample {}", i + 1));
            next.push(Candidate {
                report: evaluate(stage, &text, graph.as_ref()),
                text,
                origin: Origin::Model,
                attempt,
            });
        }
        s.iteration_count = attempt;
        let pruned = prune(next, s.iteration_count, self.config.prune_threshold);
        s.candidates.insert(stage, pruned);
        self.after_change(s, stage);
        self.report(s.stage, Phase::Done, format!("round {attempt}"));
        Ok(s.candidates(stage).iter().any(|c| !c.is_error_free()))
    }

    fn exceeded(&self, s: &Session, stage: Stage) -> PipelineError {
        let candidates = s.candidates(stage);
        let best = best_index(candidates).map(|i| candidates[i].clone()).expect("a loop has candidates");
        PipelineError::MaxIterationsExceeded {
            iterations: s.iteration_count,
            best: Box::new(best),
        }
    }

    /// Refines until no erroneous sample remains. Returns the number of
    /// rounds the loop has run.
    pub fn refine_to_fixpoint(&self, s: &mut Session) -> Result<usize, PipelineError> {
        while self.refine_round(s)? {}
        Ok(s.iteration_count)
    }

    fn prune_current(&self, s: &mut Session) -> Result<(), PipelineError> {
        let stage = Self::code_stage(s)?;
        let current = s.candidates(stage).to_vec();
        s.candidates
            .insert(stage, prune(current, s.iteration_count, self.config.prune_threshold));
        self.after_change(s, stage);
        Ok(())
    }

    /// Moves the session back to `target` when it is earlier, discarding
    /// later artifacts. Fails for stages not reached yet.
    fn enter(&self, s: &mut Session, target: Stage) -> Result<(), PipelineError> {
        let (want, have) = (phase_of(target), phase_of(s.stage));
        if want > have {
            return Err(PipelineError::StaleEdit {
                target,
                current: s.stage,
            });
        }
        if want < have {
            s.log(Channel::User, "rewind", format!("{} -> {}", s.stage, want));
            if let Some(next) = Stage::ALL.into_iter().find(|st| phase_of(*st) > want) {
                self.clear_from(s, next);
            }
            s.stage = want;
            if want == Stage::GraphDraft {
                s.graph_source = None;
                Self::settle(s, Stage::GraphDraft);
            }
            Self::rebuild_history(s);
        }
        Ok(())
    }

    pub fn select(&self, s: &mut Session, stage: Stage, index: usize) -> Result<(), PipelineError> {
        let stage = phase_of(stage);
        self.enter(s, stage)?;
        if index >= s.candidates(stage).len() {
            return Err(PipelineError::InvalidEdit(format!(
                "{stage} has {} candidates, no index {index}",
                s.candidates(stage).len()
            )));
        }
        s.selected.insert(stage, index);
        s.log(Channel::User, "select", format!("{stage} {index}"));
        self.commit_selection(s, stage);
        Ok(())
    }

    fn push_user_candidate(&self, s: &mut Session, stage: Stage, text: String) {
        let graph = Self::graph_for(s, stage);
        let cand = Candidate {
            report: evaluate(stage, &text, graph.as_ref()),
            text,
            origin: Origin::User,
            attempt: 0,
        };
        let list = s.candidates.entry(stage).or_default();
        list.push(cand);
        let index = list.len() - 1;
        s.selected.insert(stage, index);
        self.commit_selection(s, stage);
        Self::settle(s, stage);
    }

    fn selected_entries(s: &Session) -> Vec<ConceptEntry> {
        s.selected_candidate(Stage::ConceptList)
            .map(|c| parse_concept_list(&c.text).0)
            .unwrap_or_else(|| s.concept_list.clone())
    }

    fn selected_graph(s: &Session) -> Result<ConceptGraph, PipelineError> {
        s.selected_candidate(Stage::GraphDraft)
            .and_then(|c| parse_graph(&c.text).graph)
            .ok_or_else(|| PipelineError::InvalidEdit("the selected graph does not parse".into()))
    }

    pub fn apply_edit(&self, s: &mut Session, edit: Edit) -> Result<(), PipelineError> {
        let target = edit.target();
        self.enter(s, target)?;
        let detail = serde_json::to_string(&edit).expect("edit serializes");
        match edit {
            Edit::ReplaceDescription { text } => {
                if text.trim().is_empty() {
                    return Err(PipelineError::InvalidEdit("description is empty".into()));
                }
                self.push_user_candidate(s, Stage::TaskDescription, text.trim().to_string());
            }
            Edit::AddConcept { name, kind, labels } => {
                let mut entries = Self::selected_entries(s);
                let name = normalize_name(&name);
                if name.is_empty() || entries.iter().any(|e| e.name == name) {
                    return Err(PipelineError::InvalidEdit(format!("cannot add concept `{name}`")));
                }
                let labels = labels.map(|ls| ls.iter().map(|l| normalize_name(l)).collect());
                if kind == ConceptKind::Input && labels.is_some() {
                    return Err(PipelineError::InvalidEdit("input concepts have no labels".into()));
                }
                entries.push(ConceptEntry { name, kind, labels });
                self.push_user_candidate(s, Stage::ConceptList, emit_concept_list(&entries));
            }
            Edit::RemoveConcept { name } => {
                let mut entries = Self::selected_entries(s);
                let name = normalize_name(&name);
                let before = entries.len();
                entries.retain(|e| e.name != name);
                if entries.len() == before {
                    return Err(PipelineError::InvalidEdit(format!("no concept `{name}`")));
                }
                self.push_user_candidate(s, Stage::ConceptList, emit_concept_list(&entries));
            }
            Edit::RenameConcept { from, to } => {
                let mut entries = Self::selected_entries(s);
                let (from, to) = (normalize_name(&from), normalize_name(&to));
                if to.is_empty() || entries.iter().any(|e| e.name == to) {
                    return Err(PipelineError::InvalidEdit(format!("cannot rename to `{to}`")));
                }
                let entry = entries
                    .iter_mut()
                    .find(|e| e.name == from)
                    .ok_or_else(|| PipelineError::InvalidEdit(format!("no concept `{from}`")))?;
                entry.name = to;
                self.push_user_candidate(s, Stage::ConceptList, emit_concept_list(&entries));
            }
            Edit::SetLabels { name, labels } => {
                let mut entries = Self::selected_entries(s);
                let name = normalize_name(&name);
                let entry = entries
                    .iter_mut()
                    .find(|e| e.name == name && e.kind == ConceptKind::Decision)
                    .ok_or_else(|| PipelineError::InvalidEdit(format!("no decision concept `{name}`")))?;
                entry.labels = Some(labels.iter().map(|l| normalize_name(l)).collect());
                self.push_user_candidate(s, Stage::ConceptList, emit_concept_list(&entries));
            }
            Edit::AddEdge { relation } => {
                let graph = Self::selected_graph(s)?;
                let graph = graph
                    .add_edge(Edge::from(relation))
                    .map_err(|e| PipelineError::InvalidEdit(e.to_string()))?;
                self.push_user_candidate(s, Stage::GraphDraft, emit_graph(&graph));
            }
            Edit::RemoveEdge { descriptor } => {
                let graph = Self::selected_graph(s)?;
                let graph = graph
                    .remove_edge(&descriptor)
                    .ok_or_else(|| PipelineError::InvalidEdit(format!("no edge {descriptor}")))?;
                self.push_user_candidate(s, Stage::GraphDraft, emit_graph(&graph));
            }
            Edit::ReplaceConstraintText { text } => {
                s.constraint_text = Some(text);
            }
            Edit::ReplaceFormulas { text } => {
                self.push_user_candidate(s, Stage::FolDraft, text.trim().to_string() + "\n");
            }
        }
        s.log(Channel::User, "edit", detail);
        Ok(())
    }

    /// Accepts the current stage's artifact and moves on.
    pub fn approve(&self, s: &mut Session) -> Result<(), PipelineError> {
        let from = s.stage;
        match phase_of(s.stage) {
            Stage::BasicInfo => s.stage = Stage::TaskDescription,
            Stage::TaskDescription => {
                Self::require(from, s.task_description.is_some(), "a task description")?;
                s.stage = Stage::ConceptList;
            }
            Stage::ConceptList => {
                let ok = s.selected_candidate(Stage::ConceptList).is_some_and(Candidate::is_error_free);
                if !ok || s.concept_list.is_empty() {
                    return Err(PipelineError::InvalidEdit("the selected concept list has errors".into()));
                }
                s.stage = Stage::GraphDraft;
            }
            Stage::GraphDraft => {
                let cand = s
                    .selected_candidate(Stage::GraphDraft)
                    .ok_or_else(|| PipelineError::InvalidEdit("no graph is selected".into()))?;
                if !cand.is_error_free() {
                    return Err(PipelineError::InvalidEdit(format!(
                        "the selected graph has {} errors",
                        cand.error_count()
                    )));
                }
                let graph = Self::selected_graph(s)?;
                s.graph_source = Some(emit_graph(&graph));
                s.stage = Stage::ConstraintInput;
            }
            Stage::ConstraintInput => {
                Self::require(from, s.graph_source.is_some(), "an approved graph")?;
                s.program = s.graph_source.clone();
                s.stage = Stage::Done;
            }
            Stage::FolDraft => {
                let cand = s
                    .selected_candidate(Stage::FolDraft)
                    .ok_or_else(|| PipelineError::InvalidEdit("no formulas are selected".into()))?;
                if !cand.is_error_free() {
                    return Err(PipelineError::InvalidEdit(format!(
                        "the selected formulas have {} errors",
                        cand.error_count()
                    )));
                }
                let text = cand.text.clone();
                let mut graph = Self::graph_for(s, Stage::FolDraft).expect("formula stages have an approved graph");
                let (constraints, _) = compile_fol_text(&text, &graph);
                for c in constraints {
                    graph = graph.add_constraint(c);
                }
                s.fol_text = Some(text);
                s.program = Some(emit_graph(&graph));
                s.stage = Stage::Done;
            }
            _ => return Err(PipelineError::InvalidEdit("the session is finished".into())),
        }
        s.iteration_count = 0;
        Self::rebuild_history(s);
        s.log(Channel::User, "approve", format!("{from} -> {}", s.stage));
        Ok(())
    }

    /// Translates natural-language constraints into formulas, refines them
    /// against the approved graph and leaves them for user approval. Empty
    /// text finishes the session without constraints.
    pub fn run_constraint_flow(&self, s: &mut Session, text: &str) -> Result<ConstraintFlow, PipelineError> {
        self.enter(s, Stage::ConstraintInput)?;
        Self::require(Stage::ConstraintInput, s.graph_source.is_some(), "an approved graph")?;
        s.stage = Stage::ConstraintInput;
        s.log(Channel::User, "constraints", text);
        if text.trim().is_empty() {
            self.approve(s)?;
            return Ok(ConstraintFlow {
                samples: Vec::new(),
                constraints: Vec::new(),
                diagnostics: Vec::new(),
            });
        }
        s.constraint_text = Some(text.trim().to_string());
        self.generate(s, Stage::FolDraft)?;
        let refined = self.refine_to_fixpoint(s);
        let graph = Self::graph_for(s, Stage::FolDraft).expect("approved graph present");
        let samples = s.candidates(Stage::FolDraft).iter().map(|c| c.text.clone()).collect();
        refined?;
        let (constraints, diagnostics) = s
            .selected_candidate(Stage::FolDraft)
            .map(|c| compile_fol_text(&c.text, &graph))
            .unwrap_or_default();
        Ok(ConstraintFlow {
            samples,
            constraints,
            diagnostics,
        })
    }
}
