use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use romkit_core::io::{read_results, write_frames_jsonl, write_measurements_csv};
use romkit_core::landmark::{Recording, Side, Source};
use romkit_core::stats::Measurement;
use romkit_testkit::{fixtures, oracles, rng};

fn romkit(data_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romkit"))
        .env_remove("ROMKIT_DATA_DIR")
        .env_remove("RUST_LOG")
        .arg("--data-dir")
        .arg(data_dir)
        .args(args)
        .output()
        .expect("romkit runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_fixture(dir: &Path, name: &str, rec: &Recording) -> PathBuf {
    let path = dir.join(name);
    write_frames_jsonl(&path, rec).unwrap();
    path
}

fn shoulder(amplitude: f64) -> Recording {
    fixtures::rotation_recording(
        Source::WebcamPose,
        "Shoulder Flexion and Extension",
        Some(Side::Right),
        &fixtures::sine_profile(amplitude, 4.0, 15.0),
        15.0,
    )
}

#[test]
fn analyze_prints_and_persists_the_rom() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let file = write_fixture(dir.path(), "shoulder.jsonl", &shoulder(137.0));

    let out = romkit(&data, &["analyze", file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("ROM: 137.00°"), "{text}");
    assert!(text.contains("Peak time: 2.000 s"));
    assert!(text.contains("Needs review: no"));
    let stored = read_results(&data.join("results.jsonl")).unwrap();
    assert_eq!(stored.len(), 1);
    assert_eq!(stored[0].rater, "webcam-pose");
    assert_eq!(stored[0].side, Some(Side::Right));
    assert!((stored[0].rom_deg - 137.0).abs() < 1e-6);

    let series = dir.path().join("series.csv");
    let out = romkit(
        &data,
        &[
            "analyze",
            file.to_str().unwrap(),
            "--dry-run",
            "--json",
            "--series-csv",
            series.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["rom_deg"].as_f64().unwrap(), stored[0].rom_deg);
    assert_eq!(json["period"], 15);
    assert_eq!(json["frames"], 61);
    assert!(json.get("results_file").is_none());
    assert_eq!(read_results(&data.join("results.jsonl")).unwrap().len(), 1);
    let csv = fs::read_to_string(&series).unwrap();
    assert!(csv.starts_with("t,alpha_deg,trend,seasonal,residual,anomaly\n"));
    assert_eq!(csv.lines().count(), 62);
}

#[test]
fn analyze_failures_exit_one_and_name_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let short = fixtures::rotation_recording(
        Source::WebcamPose,
        "Trunk Rotation",
        None,
        &fixtures::sine_profile(30.0, 0.2, 15.0),
        15.0,
    );
    let file = write_fixture(dir.path(), "short.jsonl", &short);
    let out = romkit(dir.path(), &["analyze", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("visibility gating"), "{}", stderr(&out));

    let corrupt = dir.path().join("corrupt.jsonl");
    let mut text = fs::read_to_string(write_fixture(dir.path(), "ok.jsonl", &shoulder(40.0))).unwrap();
    text = text.replacen("\"t\":0.2", "\"t\":oops", 1);
    fs::write(&corrupt, text).unwrap();
    let out = romkit(dir.path(), &["analyze", corrupt.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("corrupt.jsonl:5"), "{}", stderr(&out));

    let out = romkit(dir.path(), &["analyze", "--period", "1", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = romkit(dir.path(), &["analyze"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("results.jsonl").exists());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_fixture(dir.path(), "shoulder.jsonl", &shoulder(60.0));
    let config = dir.path().join("romkit.toml");
    fs::write(&config, "[engine]\nanomaly_sd = 4.0\nnear_tie_fraction = 0.2\n").unwrap();
    let fingerprint = |args: &[&str]| {
        let mut all = vec!["analyze", file.to_str().unwrap(), "--dry-run", "--json"];
        all.extend_from_slice(args);
        let out = romkit(dir.path(), &all);
        assert!(out.status.success(), "{}", stderr(&out));
        let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
        json["config_fingerprint"].as_str().unwrap().to_string()
    };
    let from_file = fingerprint(&["--config", config.to_str().unwrap()]);
    let overridden = fingerprint(&[
        "--config",
        config.to_str().unwrap(),
        "--anomaly-sd",
        "3",
        "--near-tie",
        "0.05",
    ]);
    let defaults = fingerprint(&[]);
    assert_ne!(from_file, defaults);
    assert_eq!(overridden, defaults);

    fs::write(&config, "[engine]\nsmoothing = true\n").unwrap();
    let out = romkit(
        dir.path(),
        &["analyze", file.to_str().unwrap(), "--config", config.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("smoothing"));
}

#[test]
fn analyze_reads_vendor_marker_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rec = fixtures::rotation_recording(
        Source::Mocap,
        "Trunk Rotation",
        None,
        &fixtures::sine_profile(38.0, 4.0, 120.0),
        120.0,
    );
    let csv = dir.path().join("trial.csv");
    fs::write(&csv, fixtures::mocap_csv_text(&rec, &|name| format!("Skel:{name}_m"))).unwrap();
    let config = dir.path().join("markers.toml");
    fs::write(
        &config,
        "[mocap_markers]\n\"Skel:LSHO_m\" = \"LSHO\"\n\"Skel:RSHO_m\" = \"RSHO\"\n",
    )
    .unwrap();

    let out = romkit(
        dir.path(),
        &[
            "analyze",
            csv.to_str().unwrap(),
            "--movement",
            "Trunk Rotation",
            "--dry-run",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("subject"));

    let out = romkit(
        dir.path(),
        &[
            "analyze",
            csv.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--movement",
            "Trunk Rotation",
            "--subject",
            "s02",
            "--json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((json["rom_deg"].as_f64().unwrap() - 38.0).abs() < 1e-6);
    assert_eq!(json["source"], "mocap");
    assert_eq!(json["period"], 120);
    assert_eq!(
        read_results(&dir.path().join("results.jsonl")).unwrap()[0].rater,
        "mocap"
    );
}

fn manifest_fixture(dir: &Path) -> PathBuf {
    let mut rows = vec!["subject,movement,rater,repetition,side,path,rom_deg".to_string()];
    for (i, amp) in [40.0, 44.0, 42.0, 50.0, 47.0].into_iter().enumerate() {
        let name = format!("rep{i}.jsonl");
        write_fixture(dir, &name, &shoulder(amp));
        rows.push(format!(
            "s{:02},Shoulder Flexion,webcam-pose,{},right,{name},",
            i / 3 + 1,
            i % 3 + 1
        ));
    }
    fs::write(dir.join("broken.jsonl"), "{\"format_version\":1}\nnot json\n").unwrap();
    rows.push("s02,Shoulder Flexion,webcam-pose,3,right,broken.jsonl,".into());
    rows.push("s01,Shoulder Flexion,goniometer,1,right,,41.5".into());
    let path = dir.join("manifest.csv");
    fs::write(&path, rows.join("\n") + "\n").unwrap();
    path
}

#[test]
fn batch_reports_partial_failure_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = manifest_fixture(dir.path());
    let output = dir.path().join("out").join("results.jsonl");
    let run = || {
        romkit(
            dir.path(),
            &["batch", manifest.to_str().unwrap(), "-o", output.to_str().unwrap()],
        )
    };

    let out = run();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("ok")).count(), 6);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAILED")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("s02 Shoulder Flexion (right) webcam-pose rep 3") && failed[0].contains("broken.jsonl"));
    assert!(text.contains("6 of 7 entries succeeded"));

    let first = fs::read(&output).unwrap();
    let records = read_results(&output).unwrap();
    assert_eq!(records.len(), 6);
    assert_eq!(records[0].movement, "Shoulder Flexion");
    assert!((records[3].rom_deg - 50.0).abs() < 1e-6);
    assert_eq!((records[5].rom_deg, records[5].peak_t), (41.5, None));
    assert_eq!(records[5].config_fingerprint, "supplied");

    run();
    assert_eq!(fs::read(&output).unwrap(), first);
}

#[test]
fn batch_rejects_bad_manifests_before_processing() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "subject,movement,rater,repetition,side,path,rom_deg\n").unwrap();
    let out = romkit(dir.path(), &["batch", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("empty"), "{}", stderr(&out));

    let missing = dir.path().join("missing.csv");
    fs::write(
        &missing,
        "subject,movement,rater,repetition,side,path,rom_deg\ns01,Trunk Rotation,webcam-pose,1,,gone.jsonl,\n",
    )
    .unwrap();
    let out = romkit(dir.path(), &["batch", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("batch-results.jsonl").exists());
}

fn cohort() -> Vec<Measurement> {
    let mut rng = rng(11);
    let table = fixtures::random_table(&mut rng, 8, 3);
    let mut data = Vec::new();
    for (s, row) in table.iter().enumerate() {
        for (r, &v) in row.iter().enumerate() {
            for (rater, offset) in [("mocap", 0.0), ("webcam-pose", 1.5 + 0.1 * s as f64)] {
                data.push(Measurement {
                    subject: format!("s{s:02}"),
                    movement: "Neck Rotation".into(),
                    rater: rater.into(),
                    repetition: r as u32 + 1,
                    rom_deg: 60.0 + v + offset,
                });
            }
        }
    }
    data
}

#[test]
fn reliability_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort();
    let csv = dir.path().join("cohort.csv");
    write_measurements_csv(&csv, &data).unwrap();

    let out = romkit(dir.path(), &["reliability", csv.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["form"], "consistency-average");
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let rater = row["rater"].as_str().unwrap();
        let table: Vec<Vec<f64>> = (0..8)
            .map(|s| {
                (1..=3)
                    .map(|r| {
                        data.iter()
                            .find(|m| m.subject == format!("s{s:02}") && m.rater == rater && m.repetition == r)
                            .unwrap()
                            .rom_deg
                    })
                    .collect()
            })
            .collect();
        let expected = oracles::icc(&table, "consistency-average");
        assert!((row["icc"]["icc"].as_f64().unwrap() - expected).abs() < 1e-9);
        let sem = (oracles::pooled_variance(&table.concat()) * (1.0 - expected)).sqrt();
        assert!((row["sem_deg"].as_f64().unwrap() - sem).abs() < 1e-9);
    }

    let out = romkit(dir.path(), &["reliability", csv.to_str().unwrap()]);
    let text = stdout(&out);
    assert!(
        text.starts_with("test-retest reliability, ICC form consistency-average"),
        "{text}"
    );
    assert!(text.contains("Neck Rotation"));
    assert_eq!(
        stdout(&romkit(dir.path(), &["reliability", csv.to_str().unwrap()])),
        text
    );
}

#[test]
fn inter_rater_reliability_adds_regression() {
    let dir = tempfile::tempdir().unwrap();
    let data = cohort();
    let csv = dir.path().join("cohort.csv");
    write_measurements_csv(&csv, &data).unwrap();
    let pairs = dir.path().join("pairs.csv");
    let out = romkit(
        dir.path(),
        &[
            "reliability",
            csv.to_str().unwrap(),
            "--analysis",
            "inter-rater",
            "--form",
            "agreement-single",
            "--json",
            "--pairs-csv",
            pairs.to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["form"], "agreement-single");
    assert_eq!(report["layout"], "pooled");
    let row = &report["rows"][0];
    assert_eq!(row["rater"], "mocap vs webcam-pose");
    assert_eq!(row["n_rows"], 24);

    let pairs_text = fs::read_to_string(&pairs).unwrap();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs_text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[3].parse::<f64>().unwrap(), f[4].parse::<f64>().unwrap())
        })
        .unzip();
    assert_eq!(x.len(), 24);
    let (slope, intercept) = oracles::normal_equations(&x, &y);
    assert!((row["regression"]["slope"].as_f64().unwrap() - slope).abs() < 1e-9);
    assert!((row["regression"]["intercept"].as_f64().unwrap() - intercept).abs() < 1e-9);
}

#[test]
fn reliability_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let single: Vec<Measurement> = (1..=3)
        .map(|r| Measurement {
            subject: "s01".into(),
            movement: "Hip Abduction".into(),
            rater: "webcam-pose".into(),
            repetition: r,
            rom_deg: 30.0 + r as f64,
        })
        .collect();
    let csv = dir.path().join("single.csv");
    write_measurements_csv(&csv, &single).unwrap();
    let out = romkit(dir.path(), &["reliability", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("insufficient data") && err.contains("Hip Abduction"),
        "{err}"
    );

    let out = romkit(
        dir.path(),
        &["reliability", dir.path().join("none.jsonl").to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_results_feed_reliability() {
    let dir = tempfile::tempdir().unwrap();
    for (s, amps) in [[40.0, 41.0], [50.0, 52.0], [45.0, 45.5]].iter().enumerate() {
        for (r, amp) in amps.iter().enumerate() {
            let file = write_fixture(dir.path(), "rep.jsonl", &shoulder(*amp));
            let out = romkit(
                dir.path(),
                &[
                    "analyze",
                    file.to_str().unwrap(),
                    "--subject",
                    &format!("s{s}"),
                    "--repetition",
                    &(r + 1).to_string(),
                ],
            );
            assert!(out.status.success());
        }
    }
    let results = dir.path().join("results.jsonl");
    let out = romkit(dir.path(), &["reliability", results.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rows"][0]["movement"], "Shoulder Flexion and Extension (right)");
    let expected = oracles::icc(
        &[vec![40.0, 41.0], vec![50.0, 52.0], vec![45.0, 45.5]],
        "consistency-average",
    );
    assert!((report["rows"][0]["icc"]["icc"].as_f64().unwrap() - expected).abs() < 1e-6);
}

struct ServeProcess {
    child: std::process::Child,
    addr: String,
}

fn spawn_serve(data_dir: &Path, bind: &str) -> ServeProcess {
    let mut child = Command::new(env!("CARGO_BIN_EXE_romkit"))
        .env_remove("ROMKIT_DATA_DIR")
        .arg("--data-dir")
        .arg(data_dir)
        .args(["serve", "--bind", bind])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on http://")
        .expect("listening line")
        .to_string();
    ServeProcess { child, addr }
}

#[cfg(unix)]
#[test]
fn serve_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let mut server = spawn_serve(dir.path(), "127.0.0.1:0");
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let health: Value = runtime.block_on(async {
        reqwest::get(format!("http://{}/health", server.addr))
            .await
            .unwrap()
            .json()
            .await
            .unwrap()
    });
    assert_eq!(health["status"], "ok");

    let clash = romkit(dir.path(), &["serve", "--bind", &server.addr]);
    assert_eq!(clash.status.code(), Some(1));
    assert!(stderr(&clash).contains("binding"), "{}", stderr(&clash));

    let status = Command::new("kill")
        .args(["-TERM", &server.child.id().to_string()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(server.child.wait().unwrap().code(), Some(0));
    assert!(dir.path().join("sessions").is_dir());
}
