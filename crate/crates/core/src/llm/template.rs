use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{ChatMessage, ChatRole};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("slot `{0}` is not bound")]
    UnboundSlot(String),
    #[error("template `{template}` uses undeclared slot `{slot}`")]
    UndeclaredSlot { template: String, slot: String },
    #[error("unterminated slot marker in template `{0}`")]
    Unterminated(String),
    #[error("the system message alone needs {needed} tokens, budget is {budget}")]
    BudgetTooSmall { needed: usize, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

fn pieces(template: &str, body: &str) -> Result<Vec<Piece>, TemplateError> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find("{{") {
        out.push(Piece::Text(rest[..open].to_string()));
        let after = &rest[open + 2..];
        let close = after.find("}}").ok_or_else(|| TemplateError::Unterminated(template.to_string()))?;
        out.push(Piece::Slot(after[..close].trim().to_string()));
        rest = &after[close + 2..];
    }
    out.push(Piece::Text(rest.to_string()));
    Ok(out)
}

/// A system body and a user body with `{{slot}}` markers. Substitution is a
/// single pass, so slot values are never re-expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: String,
    pub slots: BTreeSet<String>,
    system: Vec<Piece>,
    user: Vec<Piece>,
}

impl PromptTemplate {
    pub fn new<'a>(
        id: &str,
        slots: impl IntoIterator<Item = &'a str>,
        system: &str,
        user: &str,
    ) -> Result<Self, TemplateError> {
        let slots: BTreeSet<String> = slots.into_iter().map(str::to_string).collect();
        let system = pieces(id, system)?;
        let user = pieces(id, user)?;
        for piece in system.iter().chain(&user) {
            if let Piece::Slot(s) = piece {
                if !slots.contains(s) {
                    return Err(TemplateError::UndeclaredSlot {
                        template: id.to_string(),
                        slot: s.clone(),
                    });
                }
            }
        }
        Ok(PromptTemplate {
            id: id.to_string(),
            slots,
            system,
            user,
        })
    }

    /// `[system, user]`. Every declared slot must be bound, even if the
    /// bodies happen not to use it.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<Vec<ChatMessage>, TemplateError> {
        if let Some(missing) = self.slots.iter().find(|s| !bindings.contains_key(*s)) {
            return Err(TemplateError::UnboundSlot(missing.clone()));
        }
        let fill = |ps: &[Piece]| -> String {
            ps.iter()
                .map(|p| match p {
                    Piece::Text(t) => t.as_str(),
                    Piece::Slot(s) => bindings[s].as_str(),
                })
                .collect()
        };
        Ok(vec![ChatMessage::system(fill(&self.system)), ChatMessage::user(fill(&self.user))])
    }
}

/// Token estimate used for windowing: `ceil(chars / 4)`.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

/// Keeps the leading system message plus the newest messages that fit in
/// `budget` estimated tokens. Messages are never split or reordered, and the
/// kept suffix is contiguous.
pub fn window_history(history: &[ChatMessage], budget: usize) -> Result<Vec<ChatMessage>, TemplateError> {
    let (system, rest) = match history.split_first() {
        Some((first, rest)) if first.role == ChatRole::System => (Some(first), rest),
        _ => (None, history),
    };
    let mut used = system.map_or(0, |m| estimate_tokens(&m.content));
    if used > budget {
        return Err(TemplateError::BudgetTooSmall { needed: used, budget });
    }
    let mut keep = rest.len();
    for m in rest.iter().rev() {
        let cost = estimate_tokens(&m.content);
        if used + cost > budget {
            break;
        }
        used += cost;
        keep -= 1;
    }
    Ok(system.into_iter().chain(&rest[keep..]).cloned().collect())
}
