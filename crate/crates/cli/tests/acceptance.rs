//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any
//! criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use nalgebra::Point3;
use rand::Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use romkit_core::engine::{evaluate_movement, seasonal_decompose, EngineConfig, Evaluation};
use romkit_core::io::{read_results, FrameRecord};
use romkit_core::landmark::{LandmarkFrame, LandmarkSample, Recording, Side, Source};
use romkit_core::registry::{registry_lookup, Registry};
use romkit_core::stats::{f_cdf, f_quantile, icc, mdc, IccForm, MeasurementTable};
use romkit_testkit::fixtures::{self, Profile};
use romkit_testkit::{oracles, rng};

type Outcome = Result<String, String>;

fn data_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

fn evaluate(rec: &Recording) -> Evaluation {
    let meta = rec.meta();
    let def = registry_lookup(&meta.movement, meta.side).expect("registered movement");
    evaluate_movement(rec, &def, &EngineConfig::default()).expect("evaluation succeeds")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

#[derive(Deserialize)]
struct SemMdcRow {
    movement: String,
    block: String,
    sem_deg: f64,
    mdc_deg: f64,
}

fn mdc_reference() -> Outcome {
    let mut reader = csv::Reader::from_path(data_file("reference_sem_mdc.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<SemMdcRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst = (0.0_f64, String::new());
    let mut failures = Vec::new();
    for row in &rows {
        let dev = (mdc(row.sem_deg) - row.mdc_deg).abs();
        if dev > worst.0 {
            worst = (dev, format!("{} / {}", row.movement, row.block));
        }
        if dev > 0.1 {
            failures.push(format!(
                "{} / {}: {:.3} vs {}",
                row.movement,
                row.block,
                mdc(row.sem_deg),
                row.mdc_deg
            ));
        }
    }
    if rows.len() != 54 {
        return Err(format!("expected 54 rows, found {}", rows.len()));
    }
    check(
        failures.is_empty(),
        format!(
            "{} rows, max deviation {:.4}° ({}){}",
            rows.len(),
            worst.0,
            worst.1,
            if failures.is_empty() {
                String::new()
            } else {
                format!("; outside ±0.1°: {}", failures.join("; "))
            }
        ),
    )
}

fn icc_oracle() -> Outcome {
    let mut rng = rng(2024);
    let mut max_oracle = 0.0_f64;
    let mut max_shift = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(3..=10);
        let k = rng.random_range(2..=5);
        let rows = fixtures::random_table(&mut rng, n, k);
        let table = MeasurementTable::from_rows(rows.clone()).map_err(|e| e.to_string())?;
        let shifts: Vec<f64> = (0..k).map(|_| rng.random_range(-30.0..30.0)).collect();
        let shifted = table.map(|_, j, v| v + shifts[j]);
        for form in IccForm::ALL {
            let got = icc(&table, form).map_err(|e| e.to_string())?.icc;
            max_oracle = max_oracle.max((got - oracles::icc(&rows, form.as_str())).abs());
            if matches!(form, IccForm::ConsistencySingle | IccForm::ConsistencyAverage) {
                let moved = icc(&shifted, form).map_err(|e| e.to_string())?.icc;
                max_shift = max_shift.max((moved - got).abs());
            }
        }
    }
    check(
        max_oracle <= 1e-9 && max_shift <= 1e-12,
        format!("100 tables x 4 forms, max |Δ| vs oracle {max_oracle:.2e}, max column-shift |Δ| {max_shift:.2e}"),
    )
}

fn f_round_trip() -> Outcome {
    let dfs = [1.0, 5.0, 24.0, 48.0, 120.0];
    let mut max_cdf = 0.0_f64;
    let mut max_recip = 0.0_f64;
    let mut cases = 0;
    for p in [0.025, 0.5, 0.975] {
        for d1 in dfs {
            for d2 in dfs {
                let q = f_quantile(p, d1, d2).map_err(|e| e.to_string())?;
                let cdf = f_cdf(q, d1, d2).map_err(|e| e.to_string())?;
                max_cdf = max_cdf.max((cdf - p).abs());
                let mirror = f_quantile(1.0 - p, d2, d1).map_err(|e| e.to_string())?;
                max_recip = max_recip.max((q * mirror - 1.0).abs());
                cases += 1;
            }
        }
    }
    check(
        max_cdf <= 1e-8 && max_recip <= 1e-8,
        format!("{cases} cases, max |cdf(q) - p| {max_cdf:.2e}, max |q(p,a,b) q(1-p,b,a) - 1| {max_recip:.2e}"),
    )
}

const AMPLITUDES: [f64; 5] = [10.0, 45.0, 90.0, 137.0, 170.0];
const SEGMENT_LENGTH: f64 = 0.35;

fn trunk(amplitude: f64) -> Recording {
    fixtures::rotation_recording(
        Source::WebcamPose,
        "Trunk Rotation",
        None,
        &fixtures::sine_profile(amplitude, 4.0, 15.0),
        15.0,
    )
}

/// Largest displacement from the first frame's LSHO-RSHO direction, from raw positions.
fn oracle_rom(rec: &Recording) -> f64 {
    let vector = |f: &LandmarkFrame| {
        let by_name: BTreeMap<&str, Point3<f64>> =
            f.landmarks().iter().map(|(id, s)| (id.name(), s.position)).collect();
        by_name["LSHO"] - by_name["RSHO"]
    };
    let v0 = vector(&rec.frames()[0]);
    rec.frames()
        .iter()
        .map(|f| oracles::angle_deg(&vector(f), &v0))
        .fold(f64::MIN, f64::max)
}

fn angle_exactness() -> Outcome {
    let mut worst = 0.0_f64;
    for a in AMPLITUDES {
        worst = worst.max((evaluate(&trunk(a)).rom.rom_deg - a).abs());
    }
    if worst > 1e-6 {
        return Err(format!("noise-free max |rom - truth| {worst:.2e}"));
    }

    let sigma = 0.005 * SEGMENT_LENGTH;
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, a) in AMPLITUDES.into_iter().enumerate() {
        let clean = trunk(a);
        let mut oracle_rng = rng(10_000 + i as u64);
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for _ in 0..1000 {
            let err = oracle_rom(&fixtures::add_noise(&clean, sigma, &mut oracle_rng)) - a;
            lo = lo.min(err);
            hi = hi.max(err);
        }
        let mut engine_rng = rng(20_000 + i as u64);
        let outside = (0..20)
            .map(|_| {
                evaluate(&fixtures::add_noise(&clean, sigma, &mut engine_rng))
                    .rom
                    .rom_deg
                    - a
            })
            .filter(|e| *e < lo || *e > hi)
            .count();
        ok &= outside == 0;
        notes.push(format!("{a}°: band [{lo:+.3}, {hi:+.3}] {}/20 inside", 20 - outside));
    }
    check(ok, format!("noise-free max |Δ| {worst:.2e}; {}", notes.join(", ")))
}

fn invariance() -> Outcome {
    let mut rng = rng(77);
    let base = fixtures::rotation_recording(
        Source::Mocap,
        "Neck Flexion and Extension",
        None,
        &fixtures::sine_profile(55.0, 4.0, 15.0),
        15.0,
    );
    let base = fixtures::add_noise(&base, 0.002, &mut rng);
    let reference = evaluate(&base).series.alphas();
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        let (rot, trans, scale) = fixtures::random_similarity(&mut rng);
        let moved = evaluate(&fixtures::transform(&base, &rot, trans, scale))
            .series
            .alphas();
        if moved.len() != reference.len() {
            return Err("transform changed the number of samples".into());
        }
        for (a, b) in moved.iter().zip(&reference) {
            worst = worst.max((a - b).abs());
        }
    }
    check(
        worst <= 1e-9,
        format!("50 similarity transforms, max sample |Δ| {worst:.2e}°"),
    )
}

fn anomaly_rejection() -> Outcome {
    let spikes = [(20, 35.0), (37, 30.0), (70, 40.0)];
    let sets: [&[(usize, f64)]; 4] = [&spikes[..1], &spikes[1..], &spikes[..], &[spikes[0], spikes[2]]];
    let mut notes = Vec::new();
    let mut ok = true;
    for amplitude in [45.0, 90.0] {
        let clean_profile = fixtures::sine_profile(amplitude, 6.0, 15.0);
        let clean = evaluate(&fixtures::rotation_recording(
            Source::WebcamPose,
            "Hip Adduction and Abduction",
            Some(Side::Right),
            &clean_profile,
            15.0,
        ));
        ok &= clean.anomaly_indices.is_empty();
        for set in sets {
            let profile: Profile = fixtures::with_spikes(&clean_profile, set);
            let eval = evaluate(&fixtures::rotation_recording(
                Source::WebcamPose,
                "Hip Adduction and Abduction",
                Some(Side::Right),
                &profile,
                15.0,
            ));
            let injected: BTreeSet<usize> = set.iter().map(|s| s.0).collect();
            let flagged: BTreeSet<usize> = eval.anomaly_indices.iter().copied().collect();
            let rom_err = (eval.rom.rom_deg - clean.rom.rom_deg).abs();
            if flagged != injected || rom_err > 1e-6 {
                ok = false;
                notes.push(format!(
                    "A={amplitude} spikes {injected:?}: flagged {flagged:?}, |Δrom| {rom_err:.2e}"
                ));
            }
        }
    }
    check(
        ok,
        if notes.is_empty() {
            "2 clean profiles with no flags, 8 spiked profiles flagged exactly, rom unchanged".into()
        } else {
            notes.join("; ")
        },
    )
}

fn decomposition_reconstruction() -> Outcome {
    let mut rng = rng(5150);
    let mut worst = 0.0_f64;
    let mut defined = 0;
    for _ in 0..100 {
        let period = rng.random_range(2..=20);
        let len = rng.random_range(2 * period..=200.max(2 * period));
        let series = fixtures::random_series(&mut rng, len, period);
        let d = seasonal_decompose(&series, period).map_err(|e| e.to_string())?;
        for (i, x) in series.iter().enumerate() {
            if let (Some(t), Some(r)) = (d.trend[i], d.residual[i]) {
                worst = worst.max((t + d.seasonal[i] + r - x).abs());
                defined += 1;
            }
        }
    }
    check(
        worst <= 1e-9,
        format!("100 series, {defined} defined indices, max |Δ| {worst:.2e}"),
    )
}

/// Lowers visibility below the default threshold on every `every`-th frame.
fn with_faint_frames(rec: &Recording, every: usize) -> Recording {
    let frames = rec
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if i % every != every - 1 {
                return f.clone();
            }
            let lm = f
                .landmarks()
                .iter()
                .map(|(id, s)| (*id, LandmarkSample::new(s.position, 0.2)))
                .collect();
            LandmarkFrame::new(f.t(), lm).expect("valid frame")
        })
        .collect();
    Recording::new(rec.meta().clone(), frames).expect("valid recording")
}

fn dual_path_fixtures() -> Vec<(Recording, usize)> {
    let mut rng = rng(99);
    let sine = |a, t, fps| fixtures::sine_profile(a, t, fps);
    let mut out = Vec::new();
    let cases: Vec<(Source, &str, Option<Side>, Profile, f64)> = vec![
        (Source::WebcamPose, "Trunk Rotation", None, sine(42.0, 4.0, 15.0), 15.0),
        (
            Source::WebcamPose,
            "Shoulder Flexion and Extension",
            Some(Side::Left),
            sine(137.0, 5.0, 15.0),
            15.0,
        ),
        (
            Source::WebcamPose,
            "Elbow Flexion",
            Some(Side::Right),
            sine(120.0, 4.0, 15.0),
            15.0,
        ),
        (
            Source::WebcamPose,
            "Neck Rotation",
            None,
            fixtures::with_spikes(&sine(60.0, 6.0, 15.0), &[(20, 35.0), (70, 40.0)]),
            15.0,
        ),
        (
            Source::WebcamPose,
            "Neck Flexion and Extension",
            None,
            sine(48.0, 3.0, 15.0),
            15.0,
        ),
        (
            Source::WebcamPose,
            "Hip Adduction and Abduction",
            Some(Side::Left),
            fixtures::double_peak_profile(40.0, 39.0, 15.0),
            15.0,
        ),
        (
            Source::WebcamPose,
            "Back Lateral Flexion",
            None,
            sine(30.0, 1.2, 15.0),
            15.0,
        ),
        (
            Source::Mocap,
            "Hip Flexion and Extension",
            Some(Side::Right),
            sine(95.0, 3.0, 120.0),
            120.0,
        ),
        (Source::Mocap, "Neck Rotation", None, sine(70.0, 2.5, 120.0), 120.0),
        (
            Source::Mocap,
            "Back Flexion and Extension",
            None,
            sine(80.0, 4.0, 60.0),
            60.0,
        ),
    ];
    for (i, (source, movement, side, profile, fps)) in cases.into_iter().enumerate() {
        let rec = fixtures::rotation_recording(source, movement, side, &profile, fps);
        let rec = fixtures::add_noise(&rec, 0.001 * (i % 3) as f64 + 1e-4, &mut rng);
        let rec = if i % 2 == 0 { with_faint_frames(&rec, 6) } else { rec };
        out.push((rec, fps as usize));
    }
    out
}

struct ServeProcess(std::process::Child);

impl Drop for ServeProcess {
    fn drop(&mut self) {
        let _ = Command::new("kill").args(["-TERM", &self.0.id().to_string()]).status();
        let _ = self.0.wait();
    }
}

fn dual_path() -> Outcome {
    use std::io::{BufRead, BufReader};

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data");
    let mut child = Command::new(env!("CARGO_BIN_EXE_romkit"))
        .env_remove("ROMKIT_DATA_DIR")
        .arg("--data-dir")
        .arg(&data)
        .args(["serve", "--bind", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut line = String::new();
    BufReader::new(child.stdout.as_mut().expect("piped stdout"))
        .read_line(&mut line)
        .map_err(|e| e.to_string())?;
    let server = ServeProcess(child);
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .ok_or(format!("unexpected banner `{line}`"))?
        .to_string();

    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let client = reqwest::Client::new();
    let fixtures = dual_path_fixtures();
    let streamed: Vec<(String, Value)> = runtime.block_on(async {
        let post = |path: String, body: Value| {
            let client = client.clone();
            let url = format!("{base}{path}");
            async move {
                let resp = client.post(url).json(&body).send().await.map_err(|e| e.to_string())?;
                let status = resp.status();
                let body: Value = resp.json().await.map_err(|e| e.to_string())?;
                if status.is_success() {
                    Ok(body)
                } else {
                    Err(format!("{path}: {status} {body}"))
                }
            }
        };
        let session = post("/sessions".into(), json!({"subject": "s01"})).await?;
        let session_id = session["id"].as_str().unwrap_or_default().to_string();
        let mut out = Vec::new();
        for (rep, (rec, batch)) in fixtures.iter().enumerate() {
            let meta = rec.meta();
            let started = post(
                format!("/sessions/{session_id}/recordings"),
                json!({
                    "movement": meta.movement,
                    "side": meta.side,
                    "repetition": rep + 1,
                    "source": meta.source,
                    "nominal_rate": meta.nominal_rate,
                }),
            )
            .await?;
            let id = started["recording_id"].as_str().unwrap_or_default().to_string();
            let frames: Vec<FrameRecord> = rec.frames().iter().map(FrameRecord::from_frame).collect();
            for chunk in frames.chunks(*batch) {
                post(format!("/recordings/{id}/frames"), json!({ "frames": chunk })).await?;
            }
            let result = post(format!("/recordings/{id}/stop"), Value::Null).await?;
            out.push((id, result));
        }
        Ok::<_, String>(out)
    })?;
    drop(server);

    let stored = read_results(&data.join("results.jsonl")).map_err(|e| e.to_string())?;
    if stored.len() != fixtures.len() {
        return Err(format!(
            "{} results persisted for {} fixtures",
            stored.len(),
            fixtures.len()
        ));
    }
    let mut mismatches = Vec::new();
    for (i, ((id, response), record)) in streamed.iter().zip(&stored).enumerate() {
        let file = data.join("recordings").join(format!("{id}.jsonl"));
        let out = Command::new(env!("CARGO_BIN_EXE_romkit"))
            .arg("--data-dir")
            .arg(&data)
            .args(["analyze", "--dry-run", "--json"])
            .arg(&file)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "analyze {}: {}",
                file.display(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let offline: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
        let cli = offline["rom_deg"].as_f64().ok_or("analyze printed no rom_deg")?;
        let rounded = response["rom_deg"].as_f64().unwrap_or(f64::NAN);
        if cli.to_bits() != record.rom_deg.to_bits() || (cli * 100.0).round() / 100.0 != rounded {
            mismatches.push(format!("fixture {i}: service {} vs cli {cli}", record.rom_deg));
        }
    }
    check(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!(
                "{} fixtures streamed over HTTP, rom_deg bit-identical to offline analysis",
                fixtures.len()
            )
        } else {
            mismatches.join("; ")
        },
    )
}

#[derive(Deserialize)]
struct SegmentRow {
    movement: String,
    orientation: String,
    webcam_joint1: String,
    webcam_joint2: String,
    mocap_joint1: String,
    mocap_joint2: String,
}

/// `A, B` is the midpoint of two landmarks; `L/R` picks by side.
fn expected_endpoint(cell: &str, side: Option<Side>) -> String {
    let names: Vec<String> = cell
        .split(',')
        .map(|part| {
            let part = part.trim();
            match (part.split_once('/'), side) {
                (Some((left, _)), Some(Side::Left)) => left.to_string(),
                (Some((_, right)), Some(Side::Right)) => right.to_string(),
                _ => part.to_string(),
            }
        })
        .collect();
    match names.as_slice() {
        [single] => single.clone(),
        [a, b] => format!("mid({a},{b})"),
        _ => panic!("unexpected cell `{cell}`"),
    }
}

fn registry_fidelity() -> Outcome {
    let mut reader = csv::Reader::from_path(data_file("reference_segments.csv")).map_err(|e| e.to_string())?;
    let rows: Vec<SegmentRow> = reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let registry = Registry::builtin();
    let mut names: Vec<&str> = rows.iter().map(|r| r.movement.as_str()).collect();
    let mut builtin = Registry::movement_names();
    names.sort_unstable();
    builtin.sort_unstable();
    if names != builtin {
        return Err(format!(
            "registry movements {builtin:?} differ from reference {names:?}"
        ));
    }

    let mut problems = Vec::new();
    let mut checked = 0;
    for row in &rows {
        let cells = [
            &row.webcam_joint1,
            &row.webcam_joint2,
            &row.mocap_joint1,
            &row.mocap_joint2,
        ];
        let sided = cells.iter().any(|c| c.contains('/'));
        let sides: &[Option<Side>] = if sided {
            &[Some(Side::Left), Some(Side::Right)]
        } else {
            &[None]
        };
        if Registry::requires_side(&row.movement).map_err(|e| e.to_string())? != sided {
            problems.push(format!("{}: side requirement", row.movement));
        }
        for &side in sides {
            let def = registry.lookup(&row.movement, side).map_err(|e| e.to_string())?;
            let orientation = row.orientation.to_ascii_lowercase().replace(' ', "-");
            if def.orientation.as_str() != orientation {
                problems.push(format!(
                    "{}: orientation {} vs {orientation}",
                    row.movement, def.orientation
                ));
            }
            if def.side != side {
                problems.push(format!("{}: side {:?} vs {side:?}", row.movement, def.side));
            }
            for (source, j1, j2) in [
                (Source::WebcamPose, &row.webcam_joint1, &row.webcam_joint2),
                (Source::Mocap, &row.mocap_joint1, &row.mocap_joint2),
            ] {
                let spec = def.segment_for(source);
                let got = (spec.endpoint1.to_string(), spec.endpoint2.to_string());
                let want = (expected_endpoint(j1, side), expected_endpoint(j2, side));
                if got != want {
                    problems.push(format!("{} {side:?} {source}: {got:?} vs {want:?}", row.movement));
                }
                checked += 1;
            }
        }
    }
    check(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{} movements, {checked} segment specs match the reference transcription",
                rows.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("reference MDC consistency", mdc_reference),
        ("ICC oracle equivalence", icc_oracle),
        ("F-quantile round trip", f_round_trip),
        ("angle pipeline exactness", angle_exactness),
        ("invariance suite", invariance),
        ("anomaly rejection", anomaly_rejection),
        ("decomposition reconstruction", decomposition_reconstruction),
        ("dual-path equivalence", dual_path),
        ("registry fidelity", registry_fidelity),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        let elapsed = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} ({elapsed:.2} s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name} ({elapsed:.2} s): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
