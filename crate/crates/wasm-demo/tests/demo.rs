use crisis_mt_wasm_demo::{leaderboard_report, score_metrics_json, split_preview_json};
use serde_json::Value;

#[test]
fn identical_text_scores_perfectly() {
    let text = "stay at home today please\nwash your hands with soap";
    let report: Value = serde_json::from_str(&score_metrics_json(text, text).unwrap()).unwrap();
    assert_eq!(report["bleu"], 100.0);
    assert_eq!(report["ter"], 0.0);
    assert_eq!(report["chrf3"], 1.0);
}

#[test]
fn mismatched_line_counts_are_rejected() {
    let err = score_metrics_json("a b c d\ne f g h", "a b c d").unwrap_err();
    assert!(err.contains('2') && err.contains('1'), "{err}");
}

#[test]
fn leaderboard_includes_pasted_records() {
    let md = leaderboard_report("en-ga", "adaptNMT", "", "markdown").unwrap();
    assert!(md.contains("adaptMLLM") && md.contains("41.2"));

    let extra = r#"{"direction":"en-ga","system_name":"demo","bleu":50.0,"ter":0.3,"chrf3":0.7,"provenance":"local_run",
        "run_metadata":{"backend_config_hash":"ab","testset_fingerprint":"cd","timestamp":"2026-01-01T00:00:00Z",
        "segments_total":10,"segments_failed":0,"partial":false,"prompt_template":null}}"#;
    let json: Value = serde_json::from_str(&leaderboard_report("en-ga", "adaptNMT", extra, "json").unwrap()).unwrap();
    assert_eq!(json["rows"][0]["record"]["system_name"], "demo");
    let unsourced = r#"{"direction":"en-ga","system_name":"demo","bleu":50.0,"ter":0.3,"chrf3":0.7,"provenance":"local_run"}"#;
    assert!(leaderboard_report("en-ga", "adaptNMT", unsourced, "json").is_err());
    assert!(leaderboard_report("en-ga", "nobody", "", "json").is_err());
    assert!(leaderboard_report("english", "adaptNMT", "", "json").is_err());
}

#[test]
fn split_preview_is_deterministic_and_dedups() {
    let src: Vec<String> = (0..40).map(|i| format!("sentence number {i}")).collect();
    let tgt: Vec<String> = (0..40).map(|i| format!("abairt uimhir {i}")).collect();
    let (mut s, mut t) = (src.join("\n"), tgt.join("\n"));
    s.push_str("\nSENTENCE   number 3");
    t.push_str("\nabairt uimhir 3");

    let a = split_preview_json(&s, &t, "en-ga", "0.5,0.25,0.25", 9, true, 2).unwrap();
    assert_eq!(a, split_preview_json(&s, &t, "en-ga", "0.5,0.25,0.25", 9, true, 2).unwrap());
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["input"], 41);
    assert_eq!(v["duplicates_removed"], 1);
    let total: u64 = ["train", "validation", "test"].iter().map(|k| v["counts"][k].as_u64().unwrap()).sum();
    assert_eq!(total, 40);
    assert_eq!(v["counts"]["test"], 10);
    assert!(v["samples"]["train"].as_array().unwrap().len() <= 2);

    assert!(split_preview_json(&s, "one line", "en-ga", "0.8,0.1,0.1", 1, false, 1).is_err());
    assert!(split_preview_json(&s, &t, "en-ga", "0.8,0.1", 1, false, 1).is_err());
}
