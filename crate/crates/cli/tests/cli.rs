use std::path::PathBuf;
use std::process::{Command, Output};

use reachvox::store::read_map_set;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn reachvox(args: &[&str]) -> Output {
    reachvox_env(args, &[])
}

fn reachvox_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_reachvox"));
    cmd.args(args).env_remove("REACHVOX_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn compute_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.rvox");
    let scenario = data("planar.scenario.json");
    let o = reachvox(&["compute", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(), "--steps", "2,2", "--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("2 threads"), "{text}");
    assert!(text.contains("active") && text.contains("reachable") && text.contains("seconds"));
    let row = text.lines().find(|l| l.trim_start().starts_with("0 ")).unwrap();
    assert!(row.contains("1764"), "{row}");

    let set = read_map_set(&out).unwrap();
    assert_eq!(set.maps.len(), 1);

    let o = reachvox(&["stats", "--maps", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("42x42x1"), "{text}");
    assert!(text.contains("fraction"));
    let reachable = set.maps.values().next().unwrap().stats().reachable_count;
    assert!(text.contains(&format!("{reachable} reachable")), "{text}");
}

#[test]
fn grid_overrides_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.rvox");
    let scenario = data("planar.scenario.json");
    let o = reachvox(&["compute", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(), "--steps", "5,5", "--voxel-size", "0.1", "--band", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = read_map_set(&out).unwrap();
    assert_eq!(set.maps.values().next().unwrap().grid.cell_size, 0.1);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.rvox");
    let scenario = data("planar.scenario.json");
    let args = ["compute", "--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap(), "--steps", "10,10"];
    let o = reachvox_env(&args, &[("REACHVOX_THREADS", "3")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3 threads"));
}

#[test]
fn oracle_passes_and_fails_on_agreement() {
    let scenario = data("planar.scenario.json");
    let o = reachvox(&["oracle", "--scenario", scenario.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("dense 1764/1764 (100.00%)"), "{text}");
    assert!(text.contains("annulus"), "{text}");
    assert!(text.contains("pass"));

    // A 30° schedule leaves most of the annulus unvisited.
    let o = reachvox(&["oracle", "--scenario", scenario.to_str().unwrap(), "--steps", "30,30"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("fail"));

    let walled = data("walled.scenario.json");
    let o = reachvox(&["oracle", "--scenario", walled.to_str().unwrap(), "--steps", "4,4", "--rot", "0"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("annulus"));
}

#[test]
fn ik_check_prints_json() {
    let scenario = data("walled.scenario.json");
    let o = reachvox(&["ik-check", "--scenario", scenario.to_str().unwrap(), "--target", "0.8,0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["reachable"], true);
    assert_eq!(v["collides"], true);
    assert_eq!(v["joints"].as_array().unwrap().len(), 2);

    let o = reachvox(&["ik-check", "--scenario", scenario.to_str().unwrap(), "--target", "0.8,0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = reachvox(&["ik-check", "--scenario", scenario.to_str().unwrap(), "--target", "0.1,0,0", "--rot", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outside"));
}

#[test]
fn user_errors_exit_with_one() {
    let o = reachvox(&["compute", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));

    let o = reachvox(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));

    let o = reachvox(&["stats", "--maps", "/definitely/not/here.rvox"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("here.rvox"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rvox");
    std::fs::write(&bad, b"RVOXjunk").unwrap();
    let o = reachvox(&["stats", "--maps", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("offset"), "{}", stderr(&o));

    let scenario = data("planar.scenario.json");
    let o = reachvox(&["compute", "--scenario", scenario.to_str().unwrap(), "--out", "/tmp/x.rvox", "--steps", "1,1,1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = reachvox(&["compute", "--scenario", scenario.to_str().unwrap(), "--out", "/tmp/x.rvox", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = reachvox(&["serve", "--scenario", scenario.to_str().unwrap(), "--maps", "/nope.rvox"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    let o = reachvox(&["--help"]);
    assert!(o.status.success());
    for sub in ["compute", "stats", "oracle", "serve", "ik-check"] {
        assert!(stdout(&o).contains(sub), "{sub}");
    }
    let o = reachvox(&["compute", "--help"]);
    for flag in ["--scenario", "--out", "--threads", "--steps", "--voxel-size", "--band"] {
        assert!(stdout(&o).contains(flag), "{flag}");
    }
    assert!(reachvox(&["--version"]).status.success());
}

#[test]
fn serve_answers_over_tcp() {
    use std::io::{Read, Write};
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("p.rvox");
    let scenario = data("planar.scenario.json");
    let o = reachvox(&["compute", "--scenario", scenario.to_str().unwrap(), "--out", maps.to_str().unwrap(), "--steps", "10,10"]);
    assert!(o.status.success());
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_reachvox"))
        .args(["serve", "--scenario", scenario.to_str().unwrap(), "--maps", maps.to_str().unwrap(), "--port", &port.to_string()])
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    let mut response = String::new();
    for _ in 0..100 {
        if let Ok(mut s) = std::net::TcpStream::connect(("127.0.0.1", port)) {
            s.write_all(b"GET /api/scenario HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
            s.read_to_string(&mut response).unwrap();
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("planar-annulus"));
}
