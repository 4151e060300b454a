use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ontomod"))
}

fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/toy")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn pipeline(out: &Path, extra: &[&str]) -> Output {
    let conf = toy("toll.conf");
    let mut args = vec![
        "pipeline",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn pipeline_artifacts_follow_the_hand_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeline(dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = dir.path();
    for m in ["toll_from_go.obo", "toll_from_nci.obo", "toll_from_pw.obo"] {
        assert!(d.join(m).exists(), "{m}");
    }

    // round 1 sees terms added by earlier ontologies in the same round
    let trace: Vec<Vec<String>> = read(d, "toll_trace.tsv")
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect();
    let rows: Vec<[&str; 5]> = vec![
        ["1", "go", "2", "3", "2"],
        ["1", "nci", "8", "7", "6"],
        ["1", "pw", "19", "5", "4"],
        ["2", "go", "26", "3", "2"],
        ["2", "nci", "26", "7", "6"],
        ["2", "pw", "26", "5", "4"],
    ];
    assert_eq!(
        trace,
        rows.iter()
            .map(|r| r.map(String::from).to_vec())
            .collect::<Vec<_>>()
    );

    let maps = read(d, "toll_mappings.tsv");
    let pairs: Vec<(&str, &str, &str)> = maps
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[1], f[3], f[5])
        })
        .collect();
    assert_eq!(
        pairs,
        vec![
            ("GO:0000001", "NCI:C005", "NAME:NAME"),
            ("GO:0000002", "NCI:C010", "NAME:NAME"),
            ("GO:0000003", "NCI:C011", "NAME:NAME"),
            // "tlr4 signaling pathway" vs "tlr signaling pathway": 1 - 1/22
            ("GO:0000001", "PW:0001001", "SYNONYM:SYNONYM"),
            ("GO:0000002", "PW:0001002", "NAME:NAME"),
            ("NCI:C010", "PW:0001002", "NAME:NAME"),
        ]
    );
    assert!(maps.contains(&format!("{}", 1.0 - 1.0 / 22.0)));

    let unsat: Vec<&str> = read(d, "toll_unsat.tsv")
        .leak()
        .lines()
        .skip(2)
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(unsat, ["GO:0000001", "NCI:C005", "PW:0001001"]);
    assert!(read(d, "toll_pairs.tsv").contains("go\tnci\t2\ngo\tpw\t0\nnci\tpw\t0\n"));
    assert!(read(d, "toll_repair_plan.txt")
        .ends_with("REMOVE EquivalentClasses(GO:0000001 NCI:C005)\n"));
    assert!(!d.join("toll_repaired.obo").exists());
}

#[test]
fn pipeline_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&pipeline(a.path(), &[])), 0);
    assert_eq!(code(&pipeline(b.path(), &[])), 0);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 13);
    for n in names {
        assert_eq!(
            fs::read(a.path().join(&n)).unwrap(),
            fs::read(b.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn higher_threshold_never_adds_mappings() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&pipeline(a.path(), &[])), 0);
    assert_eq!(code(&pipeline(b.path(), &["--threshold", "1.0"])), 0);
    let rows = |d: &Path| -> Vec<String> {
        read(d, "toll_mappings.tsv")
            .lines()
            .skip(1)
            .map(|l| l.split('\t').take(4).collect::<Vec<_>>().join("\t"))
            .collect()
    };
    let (low, high) = (rows(a.path()), rows(b.path()));
    assert_eq!(high.len(), 5);
    assert!(high.iter().all(|m| low.contains(m)));
}

#[test]
fn auto_repair_and_order_audit() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeline(dir.path(), &["--auto-repair", "--order-audit"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let repaired = dir.path().join("toll_repaired.obo");
    let check = run(&["check", repaired.to_str().unwrap()]);
    assert_eq!(code(&check), 0);
    let audit = read(dir.path(), "toll_order_audit.tsv");
    assert!(
        audit.ends_with("# union signature equal: true\n"),
        "{audit}"
    );
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(
        &conf,
        format!("seeds =\nontology = go={}\n", toy("go.obo").display()),
    )
    .unwrap();
    let o = run(&[
        "pipeline",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let o = pipeline(dir.path(), &["--seed", "tl"]);
    assert_eq!(code(&o), 1);
    let o = pipeline(dir.path(), &["--threshold", "1.5"]);
    assert_eq!(code(&o), 1);

    fs::write(&conf, "seeds = toll\nthreshold: 0.9\n").unwrap();
    let o = run(&["pipeline", "--config", conf.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.conf:2:"), "{}", stderr(&o));
}

#[test]
fn parse_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.obo");
    fs::write(&bad, "format-version: 1.2\n\n[Term]\nname: no id here\n").unwrap();
    let o = run(&["parse", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bad.obo:3:"), "{}", stderr(&o));
}

#[test]
fn check_exit_codes_and_apply_repair() {
    let dir = tempfile::tempdir().unwrap();
    let merged = dir.path().join("clash.obo");
    fs::write(
        &merged,
        "format-version: 1.2\nontology: clash\n\n[Term]\nid: X:A\nis_a: X:C\nequivalent_to: Y:B\n\n\
         [Term]\nid: Y:B\nis_a: Y:D\n\n[Term]\nid: X:C\ndisjoint_from: Y:D\n\n[Term]\nid: Y:D\n",
    )
    .unwrap();
    let m = merged.to_str().unwrap();
    let o = run(&["check", m]);
    assert_eq!(code(&o), 2);
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.starts_with("# told-clash detection only\n"));
    assert_eq!(report.lines().count(), 4, "{report}");

    let plan = dir.path().join("plan.txt");
    assert_eq!(
        code(&run(&["repair", m, "--out", plan.to_str().unwrap()])),
        0
    );
    assert!(read(dir.path(), "plan.txt").contains("REMOVE EquivalentClasses(X:A Y:B)\n"));
    let fixed = dir.path().join("fixed.obo");
    let o = run(&[
        "apply-repair",
        m,
        plan.to_str().unwrap(),
        "--out",
        fixed.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(&["check", fixed.to_str().unwrap()])), 0);

    // an empty plan leaves the clash in place
    fs::write(&plan, "# nothing\n").unwrap();
    let o = run(&[
        "apply-repair",
        m,
        plan.to_str().unwrap(),
        "--out",
        fixed.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);

    let o = run(&["explain", m, "--class", "X:C"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn stages_compose_to_the_pipeline() {
    let (p, s) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(code(&pipeline(p.path(), &[])), 0);
    let sd = s.path().to_str().unwrap();
    let onto = |id: &str| format!("{id}={}", toy(&format!("{id}.obo")).display());
    let (go, nci, pw) = (onto("go"), onto("nci"), onto("pw"));
    let o = run(&[
        "fixpoint",
        "--seed",
        "toll",
        "--seed",
        "tlr",
        "--ontology",
        &go,
        "--ontology",
        &nci,
        "--ontology",
        &pw,
        "--out",
        sd,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let modules: Vec<String> = ["go", "nci", "pw"]
        .iter()
        .map(|id| {
            s.path()
                .join(format!("toll_from_{id}.obo"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let mut map = vec!["map"];
    map.extend(modules.iter().map(String::as_str));
    map.extend(["--label", "toll", "--out", sd]);
    assert_eq!(code(&run(&map)), 0);
    let first = read(s.path(), "toll_mappings.json");
    assert_eq!(code(&run(&map)), 0);
    assert_eq!(first, read(s.path(), "toll_mappings.json"));

    let mappings = s.path().join("toll_mappings.json");
    let mut bridge = vec!["bridge"];
    bridge.extend(modules.iter().map(String::as_str));
    bridge.extend([
        "--mappings",
        mappings.to_str().unwrap(),
        "--label",
        "toll",
        "--out",
        sd,
    ]);
    assert_eq!(code(&run(&bridge)), 0);
    let b = s.path().join("toll_bridge.obo");
    let b = b.to_str().unwrap();
    assert_eq!(code(&run(&["merge", b, "--out", sd])), 0);
    let file = |n: &str| s.path().join(n).to_str().unwrap().to_string();
    assert_eq!(
        code(&run(&[
            "check",
            b,
            "--out",
            &file("toll_unsat.tsv"),
            "--pairs",
            &file("toll_pairs.tsv")
        ])),
        2
    );
    assert_eq!(
        code(&run(&[
            "explain",
            b,
            "--out",
            &file("toll_explanations.json")
        ])),
        0
    );
    assert_eq!(
        code(&run(&["repair", b, "--out", &file("toll_repair_plan.txt")])),
        0
    );

    for entry in fs::read_dir(p.path()).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            fs::read(p.path().join(&name)).unwrap(),
            fs::read(s.path().join(&name)).unwrap_or_default(),
            "{name:?}"
        );
    }

    // the materialized merge gives the same report as the bridge
    let merged = file("toll_merged.obo");
    let o = run(&["check", &merged]);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        read(s.path(), "toll_unsat.tsv")
    );
}

#[test]
fn single_ontology_stages() {
    let go = toy("go.obo");
    let go = go.to_str().unwrap();
    let o = run(&["match", go, "--seed", "toll", "--seed", "tlr"]);
    assert_eq!(code(&o), 0);
    let hits = String::from_utf8(o.stdout).unwrap();
    assert!(hits.contains("GO:0000001\tNAME\ttoll"));
    assert!(!hits.contains("GO:0000099"));

    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "extract",
        go,
        "--seed",
        "toll",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let module = read(dir.path(), "toll_from_go.obo");
    assert!(module.contains("id: GO:0000003"));
    assert!(!module.contains("troll cave"));

    let o = run(&["parse", go]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("tag 'namespace' ignored (4 occurrences)"));
}
