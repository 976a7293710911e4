use std::path::Path;
use std::process::{Command, Output};

fn volpg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volpg")).args(args).current_dir(dir).env_remove("VOLPG_THREADS").output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn fails(out: &Output) -> String {
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(!msg.trim().is_empty());
    msg
}

const SMALL: &[&str] = &["--scene", "fogbox", "--resolution", "16x12"];

fn render(dir: &Path, extra: &[&str], out: &str) -> Output {
    let mut args = vec!["render"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out]);
    volpg(&args, dir)
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (mode, a, b) in [("pt", "a.pfm", "b.pfm"), ("pg", "c.pfm", "d.pfm")] {
        ok(&render(d, &["--mode", mode, "--seed", "7", "--cluster-size", "4", "--residual-csv", &format!("{a}.csv")], a));
        ok(&render(d, &["--mode", mode, "--seed", "7", "--cluster-size", "4", "--residual-csv", &format!("{b}.csv")], b));
        assert_eq!(std::fs::read(d.join(a)).unwrap(), std::fs::read(d.join(b)).unwrap());
        assert_eq!(std::fs::read(d.join(format!("{a}.csv"))).unwrap(), std::fs::read(d.join(format!("{b}.csv"))).unwrap());
    }
    ok(&render(d, &["--seed", "8"], "e.pfm"));
    assert_ne!(std::fs::read(d.join("a.pfm")).unwrap(), std::fs::read(d.join("e.pfm")).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["render", "--scene", "gridpuff", "--resolution", "16x12", "--mode", "pg", "--cluster-size", "8"];
    let mut outs = Vec::new();
    for t in ["1", "3"] {
        let name = format!("t{t}.pfm");
        let mut a = args.to_vec();
        a.extend_from_slice(&["--out", &name]);
        let out = Command::new(env!("CARGO_BIN_EXE_volpg")).args(&a).current_dir(d).env("VOLPG_THREADS", t).output().unwrap();
        ok(&out);
        outs.push(std::fs::read(d.join(&name)).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn mse_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&render(d, &["--seed", "1"], "a.pfm"));
    let same = volpg(&["mse", "a.pfm", "a.pfm"], d);
    ok(&same);
    assert_eq!(String::from_utf8_lossy(&same.stdout).trim().parse::<f64>().unwrap(), 0.0);
    ok(&render(d, &["--seed", "2"], "b.pfm"));
    let diff = volpg(&["mse", "a.pfm", "b.pfm"], d);
    ok(&diff);
    assert!(String::from_utf8_lossy(&diff.stdout).trim().parse::<f64>().unwrap() > 0.0);

    ok(&volpg(&["render", "--scene", "fogbox", "--resolution", "8x8", "--out", "c.pfm"], d));
    assert!(fails(&volpg(&["mse", "a.pfm", "c.pfm"], d)).contains("dimensions"));
}

#[test]
fn dumped_records_replay_to_the_same_image() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&render(d, &["--mode", "pg", "--extra-direct", "2", "--dump-records", "r.vpgr"], "live.pfm"));
    ok(&render(d, &["--mode", "pg", "--records", "r.vpgr"], "replay.pfm"));
    assert_eq!(std::fs::read(d.join("live.pfm")).unwrap(), std::fs::read(d.join("replay.pfm")).unwrap());
    assert!(fails(&render(d, &["--mode", "pt", "--records", "r.vpgr"], "x.pfm")).contains("--records"));
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fails(&volpg(&["render", "--scene", "missing.scene", "--out", "x.pfm"], d));
    fails(&render(d, &["--mode", "bdpt"], "x.pfm"));
    fails(&render(d, &["--spp", "0"], "x.pfm"));
    fails(&render(d, &["--cluster-size", "0", "--mode", "pg"], "x.pfm"));
    fails(&render(d, &[], "no/such/dir/x.pfm"));
    fails(&volpg(&["mse", "nope.pfm", "nope.pfm"], d));
    std::fs::write(d.join("bad.scene"), "camera\n fov 30\n bogus 1\nend\n").unwrap();
    assert!(fails(&volpg(&["render", "--scene", "bad.scene", "--out", "x.pfm"], d)).contains("line 3"));
    let out = Command::new(env!("CARGO_BIN_EXE_volpg"))
        .args(["render", "--scene", "fogbox", "--resolution", "4x4", "--out", "x.pfm"])
        .current_dir(d)
        .env("VOLPG_THREADS", "zero")
        .output()
        .unwrap();
    assert!(fails(&out).contains("VOLPG_THREADS"));
}

#[test]
fn convergence_and_iteration_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let reference = ["--reference-spp", "16", "--cache-dir", "cache"];
    let mut args = vec!["convergence", "--scene", "fogbox", "--resolution", "8x8", "--spp-list", "1", "--seeds", "0", "--out", "conv.csv"];
    args.extend_from_slice(&reference);
    ok(&volpg(&args, d));
    let csv = std::fs::read_to_string(d.join("conv.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "method,spp,seed,mse,wall_seconds");
    assert!(lines[1].starts_with("pt,1,0,") && lines[2].starts_with("pg,1,0,"));

    let mut args = vec!["iterations", "--scene", "fogbox", "--resolution", "8x8", "--iteration-list", "0,3", "--out-dir", "it"];
    args.extend_from_slice(&reference);
    ok(&volpg(&args, d));
    assert_eq!(std::fs::read_to_string(d.join("it/iterations.csv")).unwrap().lines().count(), 3);
    ok(&volpg(&["render", "--scene", "fogbox", "--resolution", "8x8", "--out", "pt.pfm"], d));
    assert_eq!(std::fs::read(d.join("it/iter-0.pfm")).unwrap(), std::fs::read(d.join("pt.pfm")).unwrap());
}
