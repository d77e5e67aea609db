use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kdecl::eval::evaluate_dirs;
use kdecl::fol::compile_fol_text;
use kdecl::llm::{RecordingBackend, ReplayBackend, ScriptedBackend, SharedBackend, Transcript};
use kdecl::pipeline::{export_archive, run_script, Pipeline, PipelineConfig, PipelineError, Session, SessionScript};
use kdecl::retrieval::{DemoSource, DemoStore, Embedder, NgramEmbedder, DEFAULT_DIMENSION};
use kdecl::validator::MachineRecord;
use kdecl::viz::{to_dot, to_layout};
use kdecl::{lint_source, parse_graph};

use crate::{BackendKind, CliError, Outcome, RunOptions, VizFormat};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn say(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn findings_if(errors: bool) -> Outcome {
    if errors {
        Outcome::Findings
    } else {
        Outcome::Clean
    }
}

pub fn cmd_lint(files: &[PathBuf], json: bool, report: Option<&Path>, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut any_errors = false;
    let mut records = String::new();
    let mut reports = BTreeMap::new();
    for file in files {
        let r = lint_source(&read(file)?);
        any_errors |= !r.is_error_free();
        records.push_str(&r.to_jsonl());
        if json {
            reports.insert(file.display().to_string(), r);
        } else if r.diagnostics.is_empty() {
            say(out, &format!("{}: ok\n", file.display()))?;
        } else {
            for d in &r.diagnostics {
                say(out, &format!("{}: {d}\n", file.display()))?;
            }
        }
    }
    if json {
        let text = match (files.len(), reports.values().next()) {
            (1, Some(only)) => serde_json::to_string_pretty(only),
            _ => serde_json::to_string_pretty(&reports),
        };
        say(out, &(text.expect("reports serialize") + "\n"))?;
    }
    if let Some(path) = report {
        write(path, records.as_bytes())?;
    }
    Ok(findings_if(any_errors))
}

fn load_graph(path: &Path) -> Result<kdecl::ConceptGraph, CliError> {
    let parsed = parse_graph(&read(path)?);
    match parsed.graph {
        Some(g) if !parsed.has_syntax_errors() => Ok(g),
        _ => Err(CliError::Input {
            path: path.to_path_buf(),
            reason: "program has syntax errors; run `kdecl lint` for details".into(),
        }),
    }
}

pub fn cmd_compile_fol(file: &Path, graph: &Path, json: bool, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let graph = load_graph(graph)?;
    let (constraints, diagnostics) = compile_fol_text(&read(file)?, &graph);
    let statements: Vec<String> = constraints
        .iter()
        .map(|c| kdecl::fol::emit_constraint(c).expect("compiled constraints are closed"))
        .collect();
    let any_errors = diagnostics.iter().any(|d| d.is_error());
    if json {
        let records: Vec<MachineRecord> = diagnostics.iter().map(MachineRecord::from).collect();
        let doc = serde_json::json!({ "constraints": statements, "diagnostics": records });
        say(out, &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
    } else {
        for s in &statements {
            say(out, &format!("{s}\n"))?;
        }
        for d in &diagnostics {
            say(out, &format!("{}: {d}\n", file.display()))?;
        }
    }
    Ok(findings_if(any_errors))
}

pub fn cmd_eval(candidates: &Path, gold: &Path, json: bool, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let summary = evaluate_dirs(candidates, gold).map_err(|source| CliError::Io {
        path: candidates.to_path_buf(),
        source,
    })?;
    if json {
        say(out, &(serde_json::to_string_pretty(&summary).expect("json") + "\n"))?;
    } else {
        say(out, &summary.to_table())?;
    }
    Ok(Outcome::Clean)
}

fn load_store(path: Option<&Path>) -> Result<DemoStore, CliError> {
    match path {
        None => Ok(DemoStore::new(DEFAULT_DIMENSION, NgramEmbedder::new(DEFAULT_DIMENSION).id())),
        Some(p) => {
            let file = fs::File::open(p).map_err(|source| CliError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            Ok(DemoStore::read_from(BufReader::new(file))?)
        }
    }
}

fn config_for(script: &SessionScript, options: &RunOptions) -> PipelineConfig {
    let mut config = script.config.clone().unwrap_or_default();
    if let Some(n) = options.max_iter {
        config.max_iterations = n;
    }
    if let Some(n) = options.samples {
        config.samples = n;
    }
    config
}

/// Runs the script; a session that stopped on a pipeline error is still
/// returned so its best-so-far state can be saved.
fn run_session(
    backend: SharedBackend,
    script: &SessionScript,
    options: &RunOptions,
) -> Result<(Session, Option<PipelineError>), CliError> {
    let store = load_store(options.store.as_deref())?;
    let pipeline = Pipeline::new(backend, Arc::new(store), config_for(script, options));
    Ok(match run_script(&pipeline, script) {
        Ok(s) => (s, None),
        Err((s, e)) => (*s, Some(e)),
    })
}

fn session_summary(s: &Session, stopped: &Option<PipelineError>) -> String {
    let events = s.events.len();
    match stopped {
        None => format!("session {}: {} after {events} events\n", s.id, s.stage),
        Some(e) => format!("session {}: stopped at {} after {events} events: {e}\n", s.id, s.stage),
    }
}

pub fn cmd_record(
    script: &Path,
    responses: &Path,
    transcript_out: &Path,
    options: &RunOptions,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let script: SessionScript = parse_json(script)?;
    let responses: BTreeMap<String, Vec<String>> = parse_json(responses)?;
    let scripted = Arc::new(ScriptedBackend::from_map(&responses));
    let recorder = Arc::new(RecordingBackend::new(scripted.clone()));
    let (session, stopped) = run_session(recorder.clone(), &script, options)?;
    let transcript = recorder.transcript();
    write(transcript_out, transcript.to_jsonl().as_bytes())?;
    say(out, &session_summary(&session, &stopped))?;
    say(out, &format!("{} requests recorded to {}\n", transcript.len(), transcript_out.display()))?;
    for template in responses.keys() {
        let left = scripted.remaining(template);
        if left > 0 {
            say(out, &format!("warning: {left} unused `{template}` responses\n"))?;
        }
    }
    if let Some(PipelineError::Llm(e)) = stopped {
        return Err(e.into());
    }
    Ok(findings_if(stopped.is_some()))
}

fn backend(kind: BackendKind, transcript: Option<&Path>) -> Result<SharedBackend, CliError> {
    match kind {
        BackendKind::Replay => {
            let path = transcript.ok_or_else(|| CliError::Usage("replay needs --transcript".into()))?;
            let t = Transcript::from_jsonl(&read(path)?).map_err(|e| CliError::Input {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
            Ok(Arc::new(ReplayBackend::new(t)))
        }
        #[cfg(feature = "live")]
        BackendKind::Live => Ok(Arc::new(kdecl::llm::LiveBackend::from_env()?)),
        #[cfg(not(feature = "live"))]
        BackendKind::Live => Err(CliError::Usage("this build has no live backend; rebuild with --features live".into())),
    }
}

/// Replays a session and writes its archive, keeping the best-so-far state
/// when the session stops early.
pub fn cmd_replay(
    script: &Path,
    transcript: Option<&Path>,
    kind: BackendKind,
    archive_out: &Path,
    options: &RunOptions,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let script: SessionScript = parse_json(script)?;
    let (session, stopped) = run_session(backend(kind, transcript)?, &script, options)?;
    if let Some(PipelineError::Llm(e)) = stopped {
        return Err(e.into());
    }
    let archive = export_archive(&session).map_err(|source| CliError::Io {
        path: archive_out.to_path_buf(),
        source,
    })?;
    write(archive_out, &archive)?;
    say(out, &session_summary(&session, &stopped))?;
    say(out, &format!("archive written to {}\n", archive_out.display()))?;
    Ok(findings_if(stopped.is_some()))
}

pub fn cmd_viz(file: &Path, format: VizFormat, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let graph = load_graph(file)?;
    let text = match format {
        VizFormat::Dot => to_dot(&graph),
        VizFormat::Json => serde_json::to_string_pretty(&to_layout(&graph)).expect("layout serializes") + "\n",
    };
    say(out, &text)?;
    Ok(Outcome::Clean)
}

pub fn cmd_embed(demos: &Path, store_out: &Path, dimension: usize, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let sources: Vec<DemoSource> = parse_json(demos)?;
    let embedder = NgramEmbedder::new(dimension);
    let store = DemoStore::build(&embedder, &sources)?;
    let mut bytes = Vec::new();
    store.write_to(&mut bytes)?;
    write(store_out, &bytes)?;
    say(out, &format!("{} demonstrations embedded with {}\n", store.entries.len(), store.embedder))?;
    Ok(Outcome::Clean)
}
