//! simulate -> ingest -> fit -> sample -> optimize against frozen outputs.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files.

mod common;

use common::{check_golden, golden_pipeline, icepm};
use serde_json::json;

#[test]
fn pipeline_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let run = golden_pipeline(tmp.path());
    check_golden("pipeline.json", &run.summary);
    check_golden("fit.json", &run.fit);

    // The same seed reproduces the run.
    let model = tmp.path().join("model");
    let again =
        icepm(&["optimize", "--model", model.to_str().unwrap(), "--budget", "8000000", "--mode", "draws", "--seed", "7"])
            .ok();
    assert_eq!(again.json(), run.steps["optimize_draws"]);
    assert_eq!(run.steps["fit"]["converged"], json!(true));
}
