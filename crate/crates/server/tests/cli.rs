mod common;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use common::{fixture, postedit};
use postedit_core::editlog::export_xml;
use postedit_core::RetrievalConfig;
use postedit_server::{PostEdit, Workbench};

fn run(args: &[&str], data: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_postedit"))
        .args(args)
        .env("POSTEDIT_DATA", data)
        .output()
        .unwrap();
    out
}

fn ok(args: &[&str], data: &Path) -> String {
    let out = run(args, data);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn offline_project_setup() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let p = fixture;
    assert_eq!(
        ok(&["create-project", "--name", "demo", "--source-lang", "en", "--target-lang", "de"], &data).trim(),
        "p1"
    );
    let dup = run(&["create-project", "--name", "demo", "--source-lang", "en", "--target-lang", "de"], &data);
    assert!(!dup.status.success());

    let segs = p("sample_segments.tsv");
    assert!(ok(&["add-segments", "--project", "p1", "--file", segs.to_str().unwrap()], &data).contains("added 10"));
    let tm = p("sample_tm.tsv");
    assert!(ok(&["import-tm", "--project", "p1", "--file", tm.to_str().unwrap()], &data).contains("added 12"));
    let again = run(&["import-tm", "--project", "p1", "--file", tm.to_str().unwrap()], &data);
    assert!(String::from_utf8_lossy(&again.stdout).contains("added 0"));
    assert!(String::from_utf8_lossy(&again.stderr).contains("duplicate entry"));
    let mt = p("sample_mt.tsv");
    assert!(ok(&["ingest", "--origin", "mt", "--project", "p1", "--file", mt.to_str().unwrap()], &data).contains("stored 10"));
    let bad_origin = run(&["ingest", "--origin", "tm", "--project", "p1", "--file", mt.to_str().unwrap()], &data);
    assert!(!bad_origin.status.success());
    let unknown = run(&["import-tm", "--project", "p7", "--file", tm.to_str().unwrap()], &data);
    assert!(!unknown.status.success());
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("p7"));

    let wb = Workbench::open(&data, RetrievalConfig::default()).unwrap();
    let summary = wb.project("p1").unwrap();
    assert_eq!((summary.segments, summary.tm_entries), (10, 12));
    assert_eq!(wb.suggestions("p1", "seg3").unwrap().mt.as_deref(), Some("Der Hund sitzt auf der Matte."));
}

fn write_log(dir: &Path, translator: &str, origins: &[&str]) -> std::path::PathBuf {
    let wb = Workbench::open(dir.join(translator), RetrievalConfig::default()).unwrap();
    wb.create_project("demo", "en", "de").unwrap();
    let rows: String = (0..origins.len()).map(|i| format!("g{i}\tsource {i}\n")).collect();
    let (rows, _) = postedit_core::suggestions::parse_external_table(&rows);
    wb.add_segments("p1", rows.into_iter().map(|(id, text)| postedit_server::SegmentRow { id, text }).collect())
        .unwrap();
    let sid = wb.create_session("p1", translator).unwrap();
    for (i, origin) in origins.iter().enumerate() {
        let initial = if *origin == "SCRATCH" { "" } else { "a b c" };
        let fin = "a b d".repeat(i % 3 + 1);
        let edit: PostEdit =
            serde_json::from_value(postedit(&format!("g{i}"), origin, initial, &fin, 60 * i as i64, 1000 * (i as i64 + 1)))
                .unwrap();
        wb.submit_postedit("p1", &sid, &edit).unwrap();
    }
    let path = dir.join(format!("{translator}.xml"));
    std::fs::write(&path, export_xml(&wb.session("p1", &sid).unwrap())).unwrap();
    path
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_log(dir.path(), "T1", &["MT", "MT", "TM", "SCRATCH", "MT"]);
    let b = write_log(dir.path(), "T2", &["MT", "TM", "TM", "SCRATCH", "SCRATCH"]);
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let out = |name: &str| dir.path().join(name);
    let read = |name: &str| -> Value { serde_json::from_slice(&std::fs::read(out(name)).unwrap()).unwrap() };
    let data = dir.path().join("unused");

    for report in ["selection", "kappa", "pearson", "edits", "series"] {
        let file = format!("{report}.json");
        ok(&["analyze", "--log", a, "--log", b, "--report", report, "--out", out(&file).to_str().unwrap()], &data);
    }

    let selection = read("selection.json");
    assert_eq!(selection["rows"][0]["translator"], "T1");
    assert_eq!(selection["rows"][0]["rates"]["MT"], 0.6);
    assert_eq!(selection["rows"][1]["counts"]["SCRATCH"], 2);

    let kappa = read("kappa.json");
    assert_eq!(kappa[0]["variable"], "selection");
    let k = kappa[0]["kappa"][0][1].as_f64().unwrap();
    assert!((k - 0.32 / 0.72).abs() < 1e-9, "{k}");
    assert!(kappa[0]["kappa"][0][0].is_null());

    let pearson = read("pearson.json");
    assert_eq!(pearson["n"], 10);
    assert!(pearson["rho"].as_f64().unwrap().abs() <= 1.0);

    let edits = read("edits.json");
    assert_eq!(edits["perRecord"].as_array().unwrap().len(), 10);

    let series = read("series.json");
    assert_eq!(series["points"].as_array().unwrap().len(), 10);
    let csv = std::fs::read_to_string(out("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("totalEdits,timeMs"));
    assert_eq!(lines.count(), 10);

    let bad = run(&["analyze", "--log", "/nonexistent.xml", "--report", "edits", "--out", "x.json"], &data);
    assert!(!bad.status.success());
}
