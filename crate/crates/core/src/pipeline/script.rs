use serde::{Deserialize, Serialize};

use super::{Action, BasicInfo, Pipeline, PipelineConfig, PipelineError, Session};

/// A headless session: fixed identity plus the actions a user would take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionScript {
    pub id: String,
    #[serde(default = "epoch")]
    pub created_at: String,
    pub basic_info: BasicInfo,
    #[serde(default)]
    pub config: Option<PipelineConfig>,
    pub actions: Vec<Action>,
}

fn epoch() -> String {
    "1970-01-01T00:00:00Z".to_string()
}

/// Runs every action in order and stops at the first failure. The session is
/// returned alongside the error so a failed run can still be inspected.
pub fn run_script(pipeline: &Pipeline, script: &SessionScript) -> Result<Session, (Box<Session>, PipelineError)> {
    let mut session = Session::new(&script.id, &script.created_at, script.basic_info.clone())
        .map_err(|e| (Box::new(Session::placeholder(&script.id)), e))?;
    for action in &script.actions {
        if let Err(e) = pipeline.apply(&mut session, action.clone()) {
            return Err((Box::new(session), e));
        }
    }
    Ok(session)
}
