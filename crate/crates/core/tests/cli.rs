//! End-to-end checks of the command-line interface: flag handling, file
//! formats, and the 0/1/2 exit-code contract.

use mvsim::synth::{linear_box_track, translated_pair, translated_sequence};
use mvsim::BoundingBox;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn mvsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvsim"))
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run_ok(cmd: &mut Command) -> Output {
    let output = cmd.output().expect("spawn mvsim");
    assert!(
        output.status.success(),
        "expected success, got {:?}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn mvsim").status.code().unwrap()
}

struct Scene {
    dir: TempDir,
}

impl Scene {
    fn create() -> Self {
        let dir = TempDir::new().unwrap();
        let seq = translated_sequence(55, 96, 64, 12, (2, 1));
        seq.save(&dir.path().join("frames")).unwrap();
        let truth =
            linear_box_track(BoundingBox::new(8, 8, 24, 24).unwrap(), (2, 1), 12, 96, 64).unwrap();
        truth.write_csv(&dir.path().join("truth.csv")).unwrap();
        Scene { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run_args(&self, out: &Path) -> Vec<String> {
        [
            "run",
            "--frames",
            self.path("frames").to_str().unwrap(),
            "--truth",
            self.path("truth.csv").to_str().unwrap(),
            "--ew",
            "1,2,4",
            "--network",
            data_dir().join("network.csv").to_str().unwrap(),
            "--energy-config",
            data_dir().join("energy.conf").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    }
}

#[test]
fn run_produces_the_sweep_table() {
    let scene = Scene::create();
    let out = scene.path("sweep.csv");
    run_ok(mvsim().args(scene.run_args(&out)));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "ew,inferences,mean_iou,accuracy_loss_pp,energy_total,saving_fraction"
    );
    assert_eq!(lines.len(), 4); // header + ew 1,2,4
    assert!(lines[1].starts_with("1,12,1.000000,0.000000,"));
    // Pure translation: no accuracy loss at ew=2, 42% saving on 12 frames.
    assert_eq!(lines[2], "2,6,1.000000,0.000000,696.000000,0.420000");
    assert!(lines[3].starts_with("4,3,"));
}

#[test]
fn run_defaults_oracle_to_truth_and_accepts_explicit_oracle() {
    let scene = Scene::create();
    let out_default = scene.path("default.csv");
    run_ok(mvsim().args(scene.run_args(&out_default)));

    // Passing the truth file explicitly as the oracle must be identical.
    let out_explicit = scene.path("explicit.csv");
    let mut args = scene.run_args(&out_explicit);
    args.push("--oracle".into());
    args.push(scene.path("truth.csv").to_str().unwrap().into());
    run_ok(mvsim().args(args));

    assert_eq!(
        std::fs::read(&out_default).unwrap(),
        std::fs::read(&out_explicit).unwrap()
    );
}

#[test]
fn mv_writes_the_motion_field() {
    let dir = TempDir::new().unwrap();
    let (prev, curr) = translated_pair(9, 64, 64, (4, 2));
    prev.write_pgm(&dir.path().join("prev.pgm")).unwrap();
    curr.write_pgm(&dir.path().join("curr.pgm")).unwrap();
    let out = dir.path().join("field.csv");
    run_ok(mvsim().args([
        "mv",
        "--prev",
        dir.path().join("prev.pgm").to_str().unwrap(),
        "--curr",
        dir.path().join("curr.pgm").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16); // 4x4 grid
    assert_eq!(lines[0], "0,0,4,2");
    assert_eq!(lines[5], "1,1,4,2");
}

#[test]
fn traffic_reports_totals_and_utilization() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traffic.csv");
    run_ok(mvsim().args([
        "traffic",
        "--network",
        data_dir().join("network.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("name,acp_bytes,dram_bytes\n"));
    assert!(text.contains("input,0,1048576\n"));
    assert!(text.contains("conv1,2097152,1048576\n"));
    assert!(text.contains("total,8388608,8388608\n"));
    // 8 MiB per frame at 60 fps over 20 GB/s.
    assert!(text.ends_with("#acp_utilization=0.025166\n"));
}

#[test]
fn traffic_flags_override_the_defaults() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traffic.csv");
    run_ok(mvsim().args([
        "traffic",
        "--network",
        data_dir().join("network.csv").to_str().unwrap(),
        "--l3",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&out).unwrap();
    // Nothing fits a 1-byte L3; all activations spill.
    assert!(text.contains("total,0,"));
    assert!(text.ends_with("#acp_utilization=0.000000\n"));
}

#[test]
fn validation_errors_exit_1() {
    let scene = Scene::create();
    // Degenerate box in the truth file.
    std::fs::write(scene.path("bad.csv"), "0,1,1,0,5\n").unwrap();
    let out = scene.path("out.csv");
    let mut args = scene.run_args(&out);
    args[4] = scene.path("bad.csv").to_str().unwrap().into();
    assert_eq!(exit_code(mvsim().args(args)), 1);

    // Zero extrapolation window.
    let mut args = scene.run_args(&out);
    args[6] = "0".into();
    assert_eq!(exit_code(mvsim().args(args)), 1);

    // Unknown flag is a usage error, not an I/O error.
    assert_eq!(exit_code(mvsim().args(["run", "--bogus"])), 1);
}

#[test]
fn io_errors_exit_2() {
    let scene = Scene::create();
    // Missing frames directory.
    let out = scene.path("out.csv");
    let mut args = scene.run_args(&out);
    args[2] = scene.path("no-such-dir").to_str().unwrap().into();
    assert_eq!(exit_code(mvsim().args(args)), 2);

    // Unwritable output path.
    let args = scene.run_args(Path::new("/nonexistent-dir/out.csv"));
    assert_eq!(exit_code(mvsim().args(args)), 2);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(exit_code(mvsim().arg("--help")), 0);
    assert_eq!(exit_code(mvsim().arg("--version")), 0);
    assert_eq!(exit_code(mvsim().args(["run", "--help"])), 0);
}
