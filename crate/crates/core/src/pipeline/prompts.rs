use std::sync::OnceLock;

use crate::llm::PromptTemplate;
use crate::retrieval::Demonstration;

pub const TASK_DESCRIPTION: &str = "task_description";
pub const CONCEPT_LIST: &str = "concept_list";
pub const GRAPH: &str = "graph";
pub const GRAPH_REFINE: &str = "graph_refine";
pub const FOL: &str = "fol";
pub const FOL_REFINE: &str = "fol_refine";

const GRAPH_SYNTAX: &str = "Graph syntax:
graph <name> {
  concept <name>;
  decision concept <name> labels { <label>, <label> };
  <child> is_a <parent>;
  <whole> contains <part>;
  <relation> has_a(<role>: <concept>, <role>: <concept>);
}
Every decision concept must reach an input concept through `is_a`.";

const FOL_SYNTAX: &str = "Write one formula per line using forall, exists, and, or, not, ->, <->, \
and the counting forms exactly_one(...), at_most(k, ...), at_least(k, ...). Guard every quantified \
variable with a concept, as in `forall x: pair(x) -> ...`. Only the listed predicates exist.";

struct Templates {
    task_description: PromptTemplate,
    concept_list: PromptTemplate,
    graph: PromptTemplate,
    graph_refine: PromptTemplate,
    fol: PromptTemplate,
    fol_refine: PromptTemplate,
}

fn build() -> Templates {
    let t = |id, slots: &[&'static str], system: &str, user: &str| {
        PromptTemplate::new(id, slots.iter().copied(), system, user).expect("built-in template is well-formed")
    };
    Templates {
        task_description: t(
            TASK_DESCRIPTION,
            &["name", "domain", "dataset", "demos"],
            "You help users declare machine learning tasks. Describe the task clearly: its input, its outputs \
             and the structure connecting them.",
            "{{demos}}\nTask: {{name}}\nDomain: {{domain}}\nDataset: {{dataset}}\nWrite the task description.",
        ),
        concept_list: t(
            CONCEPT_LIST,
            &["name", "description", "demos"],
            "You list the concepts of a learning task. Write one bullet per concept as `- name (input)` or \
             `- name (decision): label, label`. Enumerate every label; never write `etc`.",
            "{{demos}}\nTask: {{name}}\nDescription: {{description}}\nList the concepts.",
        ),
        graph: t(
            GRAPH,
            &["name", "description", "concepts", "demos"],
            &format!("You write concept graphs for learning tasks.\n{GRAPH_SYNTAX}"),
            "{{demos}}\nTask: {{name}}\nDescription: {{description}}\nConcepts:\n{{concepts}}\nWrite the graph.",
        ),
        graph_refine: t(
            GRAPH_REFINE,
            &["name", "code", "feedback", "attempt", "sample"],
            &format!("You fix concept graphs using checker feedback.\n{GRAPH_SYNTAX}"),
            "Task: {{name}}\nSample {{sample}}, attempt {{attempt}}.\nGraph:\n{{code}}\nChecker output:\n{{feedback}}\n\
             Return the corrected graph only.",
        ),
        fol: t(
            FOL,
            &["graph", "predicates", "constraints", "demos"],
            &format!("You translate constraints in plain language into first-order logic.\n{FOL_SYNTAX}"),
            "{{demos}}\nGraph:\n{{graph}}\nPredicates:\n{{predicates}}\nConstraints:\n{{constraints}}\n\
             Write the formulas.",
        ),
        fol_refine: t(
            FOL_REFINE,
            &["graph", "predicates", "constraints", "code", "feedback", "attempt", "sample"],
            &format!("You fix first-order logic formulas using compiler feedback.\n{FOL_SYNTAX}"),
            "Graph:\n{{graph}}\nPredicates:\n{{predicates}}\nConstraints:\n{{constraints}}\n\
             Sample {{sample}}, attempt {{attempt}}.\nFormulas:\n{{code}}\nCompiler output:\n{{feedback}}\n\
             Return the corrected formulas only.",
        ),
    }
}

fn templates() -> &'static Templates {
    static CELL: OnceLock<Templates> = OnceLock::new();
    CELL.get_or_init(build)
}

pub fn template(id: &str) -> &'static PromptTemplate {
    let t = templates();
    match id {
        TASK_DESCRIPTION => &t.task_description,
        CONCEPT_LIST => &t.concept_list,
        GRAPH => &t.graph,
        GRAPH_REFINE => &t.graph_refine,
        FOL => &t.fol,
        FOL_REFINE => &t.fol_refine,
        other => panic!("no built-in template `{other}`"),
    }
}

/// Demonstrations as prompt text; an empty list renders as an empty string.
pub fn render_demos(demos: &[&Demonstration]) -> String {
    demos
        .iter()
        .map(|d| format!("Example task: {}\nExample output:\n{}\n", d.task_text.trim(), d.payload.trim_end()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Takes the first fenced code block when the response has one; otherwise
/// the whole response.
pub fn extract_artifact(response: &str) -> String {
    let Some(open) = response.find("```") else {
        return response.trim().to_string() + "\n";
    };
    let after = &response[open + 3..];
    let body = after.split_once('\n').map_or("", |(_, rest)| rest);
    let body = body.find("```").map_or(body, |close| &body[..close]);
    body.trim().to_string() + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_templates_build() {
        for id in [TASK_DESCRIPTION, CONCEPT_LIST, GRAPH, GRAPH_REFINE, FOL, FOL_REFINE] {
            assert_eq!(template(id).id, id);
        }
    }

    #[test]
    fn fences() {
        assert_eq!(extract_artifact("Here:\n```dkg\ngraph g { }\n```\nDone"), "graph g { }\n");
        assert_eq!(extract_artifact("  graph g { }  "), "graph g { }\n");
    }
}
