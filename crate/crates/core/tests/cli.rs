use replicable::cli::run;
use replicable::harness::CSV_HEADER;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("replicable").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn help_and_bad_flags() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    for sub in ["learn", "replicate", "sweep", "mode", "spectrum", "expansion", "tail", "coupling", "step-verify", "balls", "lo-check"] {
        assert!(out.contains(sub), "{sub} missing from help");
    }
    let (code, _, err) = call(&["balls", "--d", "2", "--r", "2", "--frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("frobnicate"));
    assert_eq!(call(&[]).0, 1);
    assert_eq!(call(&["spectrum", "--d", "1", "--k", "3", "--help"]).0, 0);
}

#[test]
fn spectrum_and_balls_outputs() {
    let (code, out, err) = call(&["spectrum", "--d", "1", "--k", "3"]);
    assert_eq!(code, 0);
    let eig: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eig.len(), 3);
    assert!(eig[0].abs() < 1e-12 && eig[1].abs() < 1e-12 && (eig[2] - 3.0).abs() < 1e-12);
    assert!(err.contains("max deviation"));

    let (code, out, _) = call(&["balls", "--d", "2", "--r", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().last().unwrap(), "2,8,13");
}

#[test]
fn exit_codes_by_error_kind() {
    assert_eq!(call(&["learn", "--k", "28"]).0, 1);
    assert_eq!(call(&["learn", "--d", "12", "--k", "101", "--epsilon", "0.5"]).0, 2);
    assert_eq!(call(&["step-verify", "--d", "2", "--k", "11", "--n", "10", "--trials", "100", "--prepass", "5000"]).0, 3);
    assert_eq!(call(&["tail", "--d", "2", "--k", "5", "--r", "3"]).0, 1);
    assert_eq!(call(&["coupling", "--x", "1,0", "--y", "0,1"]).0, 1);
    assert_eq!(call(&["sweep"]).0, 1);
}

#[test]
fn json_switch() {
    let (code, out, _) = call(&["coupling", "--x", "1,1", "--y", "2,0", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["max_violation"], 0.0);
}

#[test]
fn deterministic_given_seed() {
    let a = call(&["learn", "--seed", "9", "--n", "60"]);
    let b = call(&["learn", "--seed", "9", "--n", "60"]);
    assert_eq!(a, b);
    let t1 = call(&["tail", "--d", "3", "--k", "11", "--trials", "2000", "--seed", "4", "--threads", "1"]);
    let t2 = call(&["tail", "--d", "3", "--k", "11", "--trials", "2000", "--seed", "4", "--threads", "3"]);
    assert_eq!(t1, t2);
}

#[test]
fn replicate_and_sweep_write_harness_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "d = 2\nk = 11\nepsilon = 0.3\nrho = 0.1\nn = 20\ntrials = 200\nmaster_seed = 3\n").unwrap();
    let rep = dir.path().join("rep.csv");
    let (code, _, _) = call(&["replicate", "--config", cfg.to_str().unwrap(), "--out", rep.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&rep).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), CSV_HEADER.split(',').count());
    assert_eq!(&row[..2], &["2", "11"]);

    std::fs::write(&cfg, "d = 2\nk = 11\nepsilon = 0.3\nrho = 0.1\nn = 10, 20, 40\ntrials = 200\nmaster_seed = 3\n").unwrap();
    let sweep = dir.path().join("sweep.csv");
    let args = ["sweep", "--config", cfg.to_str().unwrap(), "--out", sweep.to_str().unwrap()];
    assert_eq!(call(&args).0, 0);
    let full = std::fs::read_to_string(&sweep).unwrap();
    assert_eq!(full.lines().count(), 4);
    // one-point grid reproduces the replicate row
    assert_eq!(full.lines().nth(2).unwrap(), text.lines().nth(1).unwrap());

    // truncate to one row and resume
    let partial: String = full.lines().take(2).map(|l| format!("{l}\n")).collect();
    std::fs::write(&sweep, partial).unwrap();
    let (code, _, err) = call(&args);
    assert_eq!(code, 0);
    assert!(err.contains("1 resumed"), "{err}");
    assert_eq!(std::fs::read_to_string(&sweep).unwrap(), full);

    // a second identical sweep is byte-identical
    let again = dir.path().join("again.csv");
    assert_eq!(call(&["sweep", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()]).0, 0);
    assert_eq!(std::fs::read_to_string(&again).unwrap(), full);

    std::fs::write(&cfg, "d = 2\nwidth = 3\nn = 5\n").unwrap();
    let (code, _, err) = call(&["replicate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("width"));
}
