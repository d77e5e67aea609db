use std::io;

use super::Session;
use crate::validator::lint_source;

/// Archive members, in archive order.
pub const ARCHIVE_FILES: [&str; 4] = ["program.dkg", "constraints.fol", "report.jsonl", "events.jsonl"];

/// Tar archive of the final program, accepted formulas, the program's
/// validation report and the event log. Headers carry no timestamps or
/// owners, so equal sessions give equal bytes.
pub fn export_archive(s: &Session) -> io::Result<Vec<u8>> {
    let program = s
        .program
        .clone()
        .or_else(|| s.graph_source.clone())
        .or_else(|| s.selected_candidate(super::Stage::GraphDraft).map(|c| c.text.clone()))
        .unwrap_or_default();
    let report = lint_source(&program).to_jsonl();
    let fol = s.fol_text.clone().unwrap_or_default();
    let contents = [program, fol, report, s.events_jsonl()];
    let mut builder = tar::Builder::new(Vec::new());
    builder.mode(tar::HeaderMode::Deterministic);
    for (name, body) in ARCHIVE_FILES.iter().zip(contents) {
        let mut header = tar::Header::new_gnu();
        header.set_size(body.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_uid(0);
        header.set_gid(0);
        header.set_cksum();
        builder.append_data(&mut header, name, body.as_bytes())?;
    }
    builder.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::BasicInfo;

    #[test]
    fn equal_sessions_equal_bytes() {
        let s = Session::new("fixed", "1970-01-01T00:00:00Z", BasicInfo::new("NLI", "NLP", "SNLI")).unwrap();
        let a = export_archive(&s).unwrap();
        assert_eq!(a, export_archive(&s).unwrap());
        let mut archive = tar::Archive::new(a.as_slice());
        let names: Vec<String> = archive
            .entries()
            .unwrap()
            .map(|e| e.unwrap().path().unwrap().display().to_string())
            .collect();
        assert_eq!(names, ARCHIVE_FILES);
    }
}
