use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).expect("bindings return json")
}

const NLI: &str = "graph nli {
  concept pair;
  concept sentence;
  decision concept pair_label labels { entailment, contradiction, neutral };
  pair_label is_a pair;
  pair has_a(premise: sentence, hypothesis: sentence);
}";

#[test]
fn lint_counts_errors() {
    assert_eq!(parse(kdecl_web::lint(NLI))["errorCount"], 0);
    let broken = parse(kdecl_web::lint("graph g { concept a; b is_a a; }"));
    assert!(broken["errorCount"].as_u64().unwrap() > 0);
}

#[test]
fn draw_gives_layout_dot_and_canonical_text() {
    let d = parse(kdecl_web::draw(NLI));
    assert_eq!(d["layout"]["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(d["layout"]["links"].as_array().unwrap().len(), 2);
    assert!(d["dot"].as_str().unwrap().starts_with("digraph"));
    let canonical = d["canonical"].as_str().unwrap();
    assert_eq!(parse(kdecl_web::draw(canonical))["canonical"], canonical);
}

#[test]
fn draw_of_unparseable_source_keeps_the_report() {
    let d = parse(kdecl_web::draw("graph g { concept"));
    assert!(d["layout"].is_null());
    assert!(d["report"]["errorCount"].as_u64().unwrap() > 0);
}

#[test]
fn compile_fol_emits_statements() {
    let c = parse(kdecl_web::compile_fol(
        "forall p: pair(p) -> exactly_one(entailment(p), contradiction(p), neutral(p))",
        NLI,
    ));
    assert_eq!(c["diagnostics"].as_array().unwrap().len(), 0, "{c}");
    assert_eq!(
        c["statements"][0],
        "constraint forall p: pair(p) -> exactly_one(entailment(p), contradiction(p), neutral(p));"
    );
    let bad = parse(kdecl_web::compile_fol("forall p: pair(p) -> unknown(p)", NLI));
    assert!(!bad["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn diff_against_itself_is_empty() {
    let d = parse(kdecl_web::diff(NLI, NLI));
    assert!(d.get("error").is_none(), "{d}");
    let smaller = "graph nli { concept pair; concept sentence; pair has_a(premise: sentence, hypothesis: sentence); }";
    let d2 = parse(kdecl_web::diff(smaller, NLI));
    assert_ne!(d, d2);
    assert!(parse(kdecl_web::diff("nope", NLI))["error"].is_string());
}
