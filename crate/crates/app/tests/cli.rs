mod common;

use common::{build_model, fixture, icepm};
use serde_json::json;

#[test]
fn pm_on_one_goal() {
    let run = icepm(&["pm", "--goals", fixture("one_goal.csv").to_str().unwrap()]).ok();
    let v = run.json();
    for (id, pm) in v["players"].as_object().unwrap() {
        let want = if id.starts_with("b_") { 1 } else { -1 };
        assert_eq!(pm, &json!(want), "{id}");
    }
    assert_eq!(v["players"].as_object().unwrap().len(), 12);
    assert_eq!(v["teams"], json!({ "BOS": 1, "MTL": -1 }));
}

#[test]
fn usage_errors_are_structured() {
    let run = icepm(&["pm", "--goals", "x.csv", "--frobnicate"]);
    assert_eq!(run.code, 2);
    assert_eq!(run.error()["code"], "usage");
    assert!(run.stdout.is_empty());

    let run = icepm(&["nosuchcommand"]);
    assert_eq!(run.code, 2);

    // Build switches only apply when fitting straight from goals.
    let run = icepm(&["fit", "--design", "d", "--teams", "off", "--out", "m"]);
    assert_eq!(run.code, 2);
}

#[test]
fn missing_inputs_fail_cleanly() {
    let run = icepm(&["pm", "--goals", "/nonexistent/goals.csv"]);
    assert_eq!(run.code, 4);
    let err = run.error();
    assert_eq!(err["code"], "not_found");
    assert!(err["error"].is_string() && err["detail"].is_string());

    let run = icepm(&["ratings-nope"]);
    assert_ne!(run.code, 0);
}

#[test]
fn model_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let model = build_model(tmp.path(), 3);
    let m = model.to_str().unwrap();

    let run = icepm(&["optimize", "--model", m, "--budget", "0"]);
    assert_eq!(run.code, 3);
    assert_eq!(run.error()["code"], "infeasible");

    let run = icepm(&["optimize", "--model", m, "--pin", "T00C1", "--exclude", "T00C1"]);
    assert_eq!(run.code, 2);
    assert_eq!(run.error()["code"], "invalid_query");

    let home = "T00G1,T00C1,T00L1,T00R1,T00D1,T00D2";
    let away = "T01G1,T01C1,T01L1,T01R1,T01D1,T01D2";
    let same = icepm(&["matchup", "--model", m, "--home", home, "--away", home, "--mode", "map"]).ok().json();
    assert_eq!(same["prob_mean"], json!(0.5));
    let ab = icepm(&["matchup", "--model", m, "--home", home, "--away", away]).ok().json();
    let ba = icepm(&["matchup", "--model", m, "--home", away, "--away", home]).ok().json();
    let (pa, pb) = (ab["prob_mean"].as_f64().unwrap(), ba["prob_mean"].as_f64().unwrap());
    assert!((pa + pb - 1.0).abs() < 1e-12);
    assert_eq!(ab["histogram"]["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum::<u64>(), 400);

    let cmp = icepm(&["compare", "--model", m, "--ids", "T00C1,T01C1,T02C1"]).ok().json();
    let pr = &cmp["probability"];
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(pr[i][j].as_f64().unwrap() + pr[j][i].as_f64().unwrap(), 1.0);
        }
    }

    let csv = tmp.path().join("sweep.csv");
    let sweep = icepm(&[
        "sweep", "--model", m, "--budgets", "3000000,6000000,12000000,inf", "--seed", "5", "--csv",
        csv.to_str().unwrap(),
    ])
    .ok()
    .json();
    let means: Vec<f64> = sweep["rows"].as_array().unwrap().iter().filter_map(|r| r["mean"].as_f64()).collect();
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("budget,mean,q05,q95,feasible\n"));
    assert!(text.trim_end().lines().last().unwrap().starts_with("inf,"));

    let path = icepm(&["path", "--design", tmp.path().join("design").to_str().unwrap(), "--grid", "2,8,30,120"])
        .ok()
        .json();
    let fr: Vec<f64> = path.as_array().unwrap().iter().map(|r| r["nonzero_fraction"].as_f64().unwrap()).collect();
    assert!(fr.windows(2).all(|w| w[1] <= w[0]), "{fr:?}");
}

#[test]
fn fit_straight_from_goals_with_switches() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let s = |p: &std::path::Path| p.to_str().unwrap().to_string();
    icepm(&["simulate", "--out", &s(&sim), "--goals", "1500", "--teams", "4", "--seed", "2"]).ok();
    let out = tmp.path().join("m");
    let fit = icepm(&[
        "fit", "--goals", &s(&sim.join("goals.csv")), "--teams", "off", "--elambda", "10", "--out", &s(&out),
    ])
    .ok()
    .json();
    assert_eq!(fit["converged"], json!(true));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("design/meta.json")).unwrap()).unwrap();
    assert!(meta["directory"]["teams"].as_array().unwrap().is_empty());
}
