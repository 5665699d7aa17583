use std::collections::BTreeMap;
use std::path::Path;

use fpplab::{run, sweep, ExpError, ExperimentConfig, Kind};
use fpplab_core::convex::{hausdorff, ConvexShape};

fn cfg(text: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_json(text, None).unwrap();
    c.out = Some(out.to_path_buf());
    c
}

fn payload_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn deterministic_shape_is_close_to_l1_ball() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(
        r#"{"kind":"shape","master_seed":1,"trials":2,"params":{"dist":{"atoms":[[1.0,1.0]]},"directions":5,"n":50}}"#,
        tmp.path(),
    );
    let a = run(&c).unwrap();
    let shape: ConvexShape = serde_json::from_slice(&std::fs::read(a.out_dir.join("shape.json")).unwrap()).unwrap();
    assert!(hausdorff(&shape, &ConvexShape::l1_ball(1.0)) <= 0.05);
    assert!(a.figures[0].ends_with("shape.svg"));
}

#[test]
fn construct_writes_one_file_per_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let c = cfg(
        r#"{"kind":"construct","master_seed":2,"params":{"base":{"atoms":[[1.0,0.9],[3.0,0.1]]},
            "schedule":{"p0":0.9,"p_seq":[0.8,0.72],"y_seq":[2.5,2.0]}}}"#,
        tmp.path(),
    );
    let a = run(&c).unwrap();
    let names: Vec<String> = payload_bytes(&a.out_dir).into_keys().filter(|n| n.starts_with("mu_")).collect();
    assert_eq!(names, ["mu_0.json", "mu_1.json", "mu_2.json"]);
}

/// One small config per kind.
fn small_configs() -> Vec<(Kind, &'static str)> {
    vec![
        (Kind::Shape, r#"{"master_seed":3,"trials":3,"params":{"dist":{"atoms":[[1.0,0.8],[3.0,0.2]]},"directions":5,"n":30,"flat_edge":{"levels":60,"trials":30}}}"#),
        (Kind::Construct, r#"{"master_seed":3,"trials":20,"params":{"base":{"atoms":[[1.0,0.9],[3.0,0.1]]},"schedule":{"p0":0.9,"p_seq":[0.8],"y_seq":[2.0]},"alpha":{"levels":40}}}"#),
        (Kind::Oriented, r#"{"master_seed":3,"trials":30,"params":{"p":[0.7,0.9],"levels":60,"pc":{"grid":[0.5,0.6,0.7,0.8],"levels":30}}}"#),
        (Kind::Compete, r#"{"master_seed":3,"trials":6,"params":{"dist":{"pieces":[[1.0,2.0,1.0]]},"seeds":[[-5,0],[5,0],[0,6]],"half_width":20,"tie_policy":"random","survival_threshold":10}}"#),
        (Kind::Ends, r#"{"master_seed":3,"trials":4,"params":{"dist":{"pieces":[[1.0,2.0,1.0]]},"half_width":30,"export_edges":true}}"#),
        (Kind::Busemann, r#"{"master_seed":3,"trials":4,"params":{"dist":{"pieces":[[1.0,2.0,1.0]]},"half_width":25,"lines":[{"v":[1.0,0.0],"w":[0.0,1.0],"n":20},{"v":[-1.0,0.0],"w":[0.0,1.0],"n":20}],"seeds":[[5,0],[-5,0]],"ns":[15,20]}}"#),
        (Kind::Diagnose, r#"{"master_seed":3,"trials":4,"params":{"dist":{"atoms":[[1.0,0.85]],"pieces":[[1.1,1.3,0.15]]},"half_width":60,"m":5,"M":25,"targets":[{"v":[1.0,0.0],"arc":[-0.14,0.14],"n":40},{"v":[-1.0,0.0],"arc":[3.0,3.28],"n":40}]}}"#),
    ]
}

#[test]
fn payloads_do_not_depend_on_threads() {
    let tmp = tempfile::tempdir().unwrap();
    for (kind, text) in small_configs() {
        let base = ExperimentConfig::from_json(text, Some(kind)).unwrap();
        let mut outs = Vec::new();
        for threads in [1, 3] {
            let mut c = base.clone();
            c.threads = Some(threads);
            c.out = Some(tmp.path().join(format!("{kind}-{threads}")));
            outs.push(payload_bytes(&run(&c).unwrap().out_dir));
        }
        assert!(!outs[0].is_empty());
        assert_eq!(outs[0], outs[1], "{kind} payloads differ across thread counts");
    }
}

#[test]
fn rerun_reproduces_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{"kind":"compete","master_seed":8,"trials":3,"params":{"dist":{"atoms":[[1.0,0.85]],"pieces":[[1.1,1.3,0.15]]},"seeds":[[-4,0],[4,0]],"half_width":15}}"#;
    let c = cfg(text, tmp.path());
    let first = payload_bytes(&run(&c).unwrap().out_dir);
    let second = payload_bytes(&run(&c).unwrap().out_dir);
    assert_eq!(first, second);
}

#[test]
fn default_out_dir_uses_kind_and_hash() {
    let c = ExperimentConfig::from_json(r#"{"kind":"oriented","master_seed":1,"params":{"p":[0.8]}}"#, None).unwrap();
    let d = c.out_dir();
    let name = d.file_name().unwrap().to_string_lossy().into_owned();
    assert_eq!(name, format!("oriented-{}", &c.hash()[..12]));
}

#[test]
fn sweep_isolates_failures() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = |p: f64| {
        ExperimentConfig::from_json(
            &format!(r#"{{"kind":"oriented","master_seed":5,"trials":10,"params":{{"p":[{p}],"levels":30}}}}"#),
            None,
        )
    };
    // Parses, but the grid cannot bracket the critical point.
    let failing = ExperimentConfig::from_json(
        r#"{"kind":"oriented","master_seed":5,"trials":10,"params":{"p":[0.9],"levels":30,"pc":{"grid":[0.97,0.99]}}}"#,
        None,
    );
    let report = sweep(vec![ok(0.75), failing, ok(0.85)], tmp.path()).unwrap();
    assert_eq!(report.artifacts().count(), 2);
    assert_eq!(report.failures(), 1);
    let merged = std::fs::read_to_string(&report.merged).unwrap();
    let rows: Vec<&str> = merged.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("1,,") && rows[1].contains("error"));
    // The merged table carries (p, alpha) from each successful config.
    for (row, p) in [(rows[0], "0.75"), (rows[2], "0.85")] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[2], "ok");
        assert_eq!(cols[3], p);
        assert!(cols[7].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn sweep_rejects_empty_and_mixed() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(matches!(sweep(vec![], tmp.path()), Err(ExpError::Config(_))));
    let a = ExperimentConfig::from_json(r#"{"kind":"oriented","master_seed":1,"params":{"p":[0.8]}}"#, None);
    let b = ExperimentConfig::from_json(
        r#"{"kind":"ends","master_seed":1,"params":{"dist":{"atoms":[[1.0,1.0]]},"half_width":10}}"#,
        None,
    );
    assert!(matches!(sweep(vec![a, b], tmp.path()), Err(ExpError::Config(_))));
}

#[test]
fn example_configs_and_schemas_agree() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for kind in Kind::ALL {
        let text = std::fs::read_to_string(root.join(format!("configs/{kind}.json"))).unwrap();
        let c = ExperimentConfig::from_json(&text, Some(kind)).unwrap();
        let schema: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(root.join(format!("schemas/{kind}.json"))).unwrap()).unwrap();
        let props = schema["properties"]["params"]["properties"].as_object().unwrap();
        for key in c.params.as_object().unwrap().keys() {
            assert!(props.contains_key(key), "{kind}: {key} missing from schema");
        }
        for req in schema["properties"]["params"]["required"].as_array().unwrap() {
            assert!(c.params.get(req.as_str().unwrap()).is_some());
        }
    }
}
