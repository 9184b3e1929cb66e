use std::fs;

use tndp::problem::{LambdaSpec, ProblemSpec};
use tndp::Error;
use tndp_core::Lambda;

#[test]
fn defaults_select_the_bundled_instance() {
    let spec = ProblemSpec::default();
    assert_eq!(spec.budget_km, 100.0);
    assert_eq!(spec.q, 0);
    assert_eq!(spec.lambda, LambdaSpec::Auto);
    let problem = spec.build().unwrap();
    assert_eq!(problem.candidates().len(), 401);
    assert!((problem.lambda() - problem.baseline().travel_time / 10.0).abs() < 1e-6);
}

#[test]
fn json_round_trip_and_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    fs::write(
        &path,
        r#"{"budget_km": 40, "q": 1, "lambda": 2.5, "assignment": {"fw_tolerance": 0.01},
            "nodes": "n.csv", "edges": "e.csv", "od": "o.csv"}"#,
    )
    .unwrap();
    let spec = ProblemSpec::from_json_file(&path).unwrap();
    assert_eq!(spec.budget_km, 40.0);
    assert_eq!(spec.q, 1);
    assert_eq!(spec.lambda, LambdaSpec::Value(2.5));
    assert_eq!(spec.assignment.fw_tolerance, 0.01);
    assert_eq!(spec.assignment.alpha, 0.15);
    assert_eq!(spec.nodes.as_deref(), Some(dir.path().join("n.csv").as_path()));
    let cfg = spec.design_config();
    assert!(cfg.penalize_crossings);
    assert_eq!(cfg.lambda, Lambda::Fixed(2.5));

    let text = serde_json::to_string(&spec).unwrap();
    let back: ProblemSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for body in [r#"{"budget": 10}"#, r#"{"assignment": {"tolerance": 0.1}}"#] {
        let path = dir.path().join("p.json");
        fs::write(&path, body).unwrap();
        let err = ProblemSpec::from_json_file(&path).unwrap_err();
        assert!(matches!(err, Error::Json { .. }), "{body}: {err}");
        assert!(err.to_string().contains("unknown field"), "{err}");
    }
}

#[test]
fn lambda_parsing() {
    assert_eq!("auto".parse::<LambdaSpec>(), Ok(LambdaSpec::Auto));
    assert_eq!("3".parse::<LambdaSpec>(), Ok(LambdaSpec::Value(3.0)));
    assert!("-1".parse::<LambdaSpec>().is_err());
    assert!("inf".parse::<LambdaSpec>().is_err());
    assert!("Auto".parse::<LambdaSpec>().is_err());
    assert_eq!(serde_json::from_str::<LambdaSpec>("\"auto\"").unwrap(), LambdaSpec::Auto);
    assert_eq!(serde_json::from_str::<LambdaSpec>("0.5").unwrap(), LambdaSpec::Value(0.5));
    assert!(serde_json::from_str::<LambdaSpec>("\"big\"").is_err());
    assert_eq!(serde_json::to_string(&LambdaSpec::Auto).unwrap(), "\"auto\"");
}

#[test]
fn invalid_values_fail_validation() {
    let bad = [
        ProblemSpec { budget_km: -1.0, ..ProblemSpec::default() },
        ProblemSpec { q: 2, ..ProblemSpec::default() },
        ProblemSpec { lambda: LambdaSpec::Value(f64::NAN), ..ProblemSpec::default() },
        ProblemSpec { nodes: Some("n.csv".into()), ..ProblemSpec::default() },
    ];
    for spec in bad {
        assert!(matches!(spec.validate(), Err(Error::Config(_))), "{spec:?}");
    }
    let mut spec = ProblemSpec::default();
    spec.assignment.fw_tolerance = 0.0;
    assert!(spec.validate().is_err());
}
