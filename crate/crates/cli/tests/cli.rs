use std::fs;
use std::path::Path;
use std::process::Command;

use mechnet_cli::{CliError, Config};

const TINY: &str = r#"
seed = 11
[sim]
final_nodes = 30
[train]
n_train = 24
n_val = 8
max_epochs = 2
patience = 2
batch_size = 8
val_splits = 2
[validate]
n_rep = 3
n_draws = 40
n_pp = 3
abc_pool = 300
gammas = [50.0, 95.0]
"#;

fn mechnet(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mechnet"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn ok(args: &[&str]) {
    let (code, err) = mechnet(args);
    assert_eq!(code, 0, "{args:?}: {err}");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tiny_config(dir: &Path) -> String {
    let p = dir.join("tiny.toml");
    fs::write(&p, TINY).unwrap();
    p.to_str().unwrap().to_string()
}

fn edge_lines(p: &Path) -> usize {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count()
}

#[test]
fn zero_rates_reproduce_the_seed_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&[
        "simulate",
        "--set",
        "sim.theta={lambda_g=0.0,lambda_e=0.0,alpha=[0.2,0.3,0.5],beta=[0.1,0.1,0.8]}",
        "--n",
        "40",
        "--out",
        s(&out),
    ]);
    assert_eq!(edge_lines(&out.join("graph.edges")), 6);
}

#[test]
fn manifest_echoes_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("sim");
    ok(&[
        "simulate",
        "--config",
        &cfg,
        "--seed",
        "99",
        "--set",
        "sim.scenario=2",
        "--set",
        "validate.n_pp=7",
        "--out",
        s(&out),
    ]);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let from_manifest: Config = serde_json::from_value(manifest["config"].clone()).unwrap();
    let from_toml = Config::load(Some(&out.join("config.toml")), &[]).unwrap();
    assert_eq!(from_manifest, from_toml);
    assert_eq!(manifest["seed"], 99);
    assert_eq!(from_toml.seed, 99);
    assert_eq!(from_toml.sim.scenario, Some(2));
    assert_eq!(from_toml.validate.n_pp, 7);
    assert_eq!(from_toml.train.n_train, 24);

    // rerunning from the emitted config reproduces the graph
    let again = dir.path().join("again");
    ok(&[
        "simulate",
        "--config",
        s(&out.join("config.toml")),
        "--out",
        s(&again),
    ]);
    assert_eq!(
        fs::read(out.join("graph.edges")).unwrap(),
        fs::read(again.join("graph.edges")).unwrap()
    );
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((
                    p.strip_prefix(root).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn workflow_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let graph = dir.path().join("obs");
    ok(&[
        "simulate",
        "--config",
        &cfg,
        "--set",
        "sim.scenario=3",
        "--out",
        s(&graph),
    ]);
    let obs = graph.join("graph.edges");

    let run = |tag: &str| {
        let root = dir.path().join(tag);
        let ds = root.join("ds");
        let tr = root.join("tr");
        ok(&["make-dataset", "--config", &cfg, "--out", s(&ds)]);
        ok(&[
            "train",
            "--config",
            &cfg,
            "--input",
            s(&ds),
            "--out",
            s(&tr),
        ]);
        let ck = tr.join("checkpoint");
        ok(&[
            "infer",
            "--config",
            &cfg,
            "--input",
            s(&obs),
            "--checkpoint",
            s(&ck),
            "--out",
            s(&root.join("infer")),
        ]);
        ok(&[
            "coverage",
            "--config",
            &cfg,
            "--checkpoint",
            s(&ck),
            "--out",
            s(&root.join("coverage")),
        ]);
        ok(&[
            "ppc",
            "--config",
            &cfg,
            "--input",
            s(&obs),
            "--checkpoint",
            s(&ck),
            "--out",
            s(&root.join("ppc")),
        ]);
        ok(&[
            "abc",
            "--config",
            &cfg,
            "--input",
            s(&obs),
            "--out",
            s(&root.join("abc")),
        ]);
        ok(&[
            "summaries",
            "--input",
            s(&obs),
            "--out",
            s(&root.join("summaries")),
        ]);
        root
    };
    let a = run("a");
    let b = run("b");
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    let names: Vec<_> = ta.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, tb.iter().map(|f| f.0.as_str()).collect::<Vec<_>>());
    for ((name, x), (_, y)) in ta.iter().zip(&tb) {
        // manifests name their own input paths, which differ between the two roots
        if name.ends_with("manifest.json") && !name.contains("ds/") {
            let strip = |v: &[u8]| {
                let mut m: serde_json::Value = serde_json::from_slice(v).unwrap();
                m["input"] = serde_json::Value::Null;
                m["checkpoint"] = serde_json::Value::Null;
                m
            };
            assert_eq!(strip(x), strip(y), "{name}");
        } else {
            assert!(x == y, "{name} differs");
        }
    }

    let post = fs::read_to_string(a.join("infer/posterior.csv")).unwrap();
    let rows: Vec<&str> = post.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let v: Vec<f64> = r.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!(v[1] <= v[0] && v[0] <= v[2], "{r}");
    }
    // ceil(0.002 * 300) accepted draws plus a header
    assert_eq!(
        fs::read_to_string(a.join("abc/abc_accepted.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
    let cov = fs::read_to_string(a.join("coverage/coverage.csv")).unwrap();
    assert_eq!(cov.lines().count(), 1 + 8 * 2);
}

#[test]
fn abc_reuses_a_saved_pool() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let obs = dir.path().join("obs");
    ok(&[
        "simulate",
        "--config",
        &cfg,
        "--set",
        "sim.scenario=1",
        "--out",
        s(&obs),
    ]);
    let edges = obs.join("graph.edges");
    let first = dir.path().join("first");
    ok(&[
        "abc",
        "--config",
        &cfg,
        "--input",
        s(&edges),
        "--n",
        "1000",
        "--out",
        s(&first),
    ]);
    let second = dir.path().join("second");
    let pool = first.join("abc_pool.jsonl");
    ok(&[
        "abc",
        "--config",
        &cfg,
        "--input",
        s(&edges),
        "--pool",
        s(&pool),
        "--out",
        s(&second),
    ]);
    let a = fs::read_to_string(first.join("abc_accepted.csv")).unwrap();
    assert_eq!(a.lines().count(), 3);
    assert_eq!(
        a,
        fs::read_to_string(second.join("abc_accepted.csv")).unwrap()
    );
    assert!(!second.join("abc_pool.jsonl").exists());
}

#[test]
fn exit_codes_are_categorized() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = s(&out);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[sim]\nfinal_nodes = 50\nbogus = 1\n").unwrap();

    assert_eq!(mechnet(&["simulate", "--config", s(&bad), "--out", o]).0, 2);
    assert_eq!(mechnet(&["simulate", "--out", o]).0, 2, "no theta");
    assert_eq!(
        mechnet(&["simulate", "--set", "sim.scenario=4", "--out", o]).0,
        2
    );
    assert_eq!(mechnet(&["train", "--set", "train.lr=-1", "--out", o]).0, 2);
    assert_eq!(mechnet(&["summaries", "--out", o]).0, 2, "missing --input");
    assert_eq!(
        mechnet(&[
            "simulate",
            "--config",
            s(&dir.path().join("none.toml")),
            "--out",
            o
        ])
        .0,
        3
    );
    assert_eq!(
        mechnet(&[
            "summaries",
            "--input",
            s(&dir.path().join("none.edges")),
            "--out",
            o
        ])
        .0,
        3
    );

    let garbled = dir.path().join("g.edges");
    fs::write(&garbled, "0 1\n1 2 3\n").unwrap();
    let (code, err) = mechnet(&["summaries", "--input", s(&garbled), "--out", o]);
    assert_eq!(code, 3, "{err}");

    assert_eq!(
        CliError::from(mechnet::Error::NonFinite("head".into())).exit_code(),
        4
    );
}

#[test]
fn overrides_parse_literals_and_reject_non_sections() {
    let c = Config::load(
        None,
        &[
            "train.lr=1e-3".into(),
            "model.variant=gin".into(),
            "validate.gammas=[90.0]".into(),
        ],
    )
    .unwrap();
    assert_eq!(c.train.lr, 1e-3);
    assert_eq!(c.model.variant, mechnet::model::LayerVariant::Gin);
    assert_eq!(c.validate.gammas, vec![90.0]);
    assert!(matches!(
        Config::load(None, &["seed.x=1".into()]),
        Err(CliError::Config(_))
    ));
    assert!(matches!(
        Config::load(None, &["seed".into()]),
        Err(CliError::Config(_))
    ));
    assert_eq!(Config::load(None, &[]).unwrap(), Config::default());
}
