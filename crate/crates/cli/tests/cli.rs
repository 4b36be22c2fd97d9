use std::path::Path;
use std::process::{Command, Output};

fn mlsparse(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlsparse"))
        .args(args)
        .current_dir(dir)
        .env("MLSPARSE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = mlsparse(args, dir);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

// problem,solver,param,seconds,iterations,max_supp,supp,objective,converged,...
fn objective(r: &csv::StringRecord) -> f64 {
    r[7].parse().unwrap()
}

fn gen_covsel(dir: &Path, n: &str) {
    ok(&["gen", "covsel", "--n", n, "--m", "200", "--seed", "4", "--out", "d"], dir);
}

#[test]
fn covsel_solvers_agree() {
    let dir = tempfile::tempdir().unwrap();
    gen_covsel(dir.path(), "80");
    let a = ok(&["covsel", "--data", "d/samples.csv", "--lambda", "0.5", "--solver", "bcd", "--out", "a.mtx"], dir.path());
    let b = ok(&["covsel", "--data", "d/samples.csv", "--lambda", "0.5", "--solver", "ml-bcd"], dir.path());
    let (a, b) = (&rows(&a)[0], &rows(&b)[0]);
    assert_eq!(&a[8], "true");
    assert_eq!(&b[8], "true");
    assert!((objective(a) - objective(b)).abs() <= 1e-4 * objective(a).abs());
    let mtx = std::fs::read_to_string(dir.path().join("a.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
}

#[test]
fn large_lambda_gives_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    gen_covsel(dir.path(), "60");
    let out = ok(&["covsel", "--data", "d/samples.csv", "--lambda", "0.9"], dir.path());
    let r = &rows(&out)[0];
    let n: usize = std::fs::read_to_string(dir.path().join("d/samples.csv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    let supp: usize = r[6].parse().unwrap();
    assert!(supp <= n + n / 10, "support {supp} for {n} variables");
}

#[test]
fn missing_argument_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mlsparse(&["gen", "covsel"], dir.path()).status.code(), Some(2));
    assert_eq!(mlsparse(&["covsel", "--data", "x", "--lambda", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(mlsparse(&["logreg", "--data", "x", "--c", "1", "--algo", "sgd"], dir.path()).status.code(), Some(2));
}

#[test]
fn unreadable_input_fails_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlsparse(&["covsel", "--data", "missing.csv", "--lambda", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    std::fs::write(dir.path().join("empty.svm"), "").unwrap();
    assert_eq!(mlsparse(&["logreg", "--data", "empty.svm", "--c", "1"], dir.path()).status.code(), Some(1));
}

#[test]
fn logreg_round_trip_and_looser_eps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "logreg", "--n", "200", "--m", "400", "--seed", "2", "--out", "l.svm", "--planted", "p.txt"], dir.path());
    let mut iters = Vec::new();
    for eps in ["1e-3", "1e-2"] {
        let out = ok(&["logreg", "--data", "l.svm", "--c", "0.5", "--algo", "cdn", "--eps", eps, "--out", "w.txt"], dir.path());
        let r = &rows(&out)[0];
        assert_eq!(&r[8], "true");
        iters.push(r[4].parse::<usize>().unwrap());
    }
    assert!(iters[1] <= iters[0], "{iters:?}");
    let w = std::fs::read_to_string(dir.path().join("w.txt")).unwrap();
    assert!(w.starts_with("# dim=200"));
    let ml = ok(&["logreg", "--data", "l.svm", "--c", "0.5", "--algo", "ml-glmnet"], dir.path());
    let plain = ok(&["logreg", "--data", "l.svm", "--c", "0.5", "--algo", "glmnet"], dir.path());
    let (a, b) = (objective(&rows(&ml)[0]), objective(&rows(&plain)[0]));
    assert!((a - b).abs() <= 1e-3 * a.abs(), "{a} {b}");
}

#[test]
fn bench_rows_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("suite.toml"),
        "[[covsel]]\nname = \"planar\"\nn = 60\nm = 100\nseeds = [1]\nlambdas = [0.5, 0.6]\nsolvers = [\"bcd\", \"ml-bcd\"]\n\n\
         [[logreg]]\nname = \"synth\"\nn = 100\nm = 200\nseeds = [1]\nc = [0.5]\nalgos = [\"cdn\", \"nope\"]\n",
    )
    .unwrap();
    let strip = |text: &str| -> Vec<Vec<String>> {
        rows(text)
            .iter()
            .map(|r| r.iter().enumerate().filter(|(k, _)| *k != 3 && *k != 10).map(|(_, f)| f.to_string()).collect())
            .collect()
    };
    let first = ok(&["bench", "--suite", "suite.toml"], dir.path());
    let second = ok(&["bench", "--suite", "suite.toml", "--out", "t.csv"], dir.path());
    assert!(second.is_empty());
    let second = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let (a, b) = (strip(&first), strip(&second));
    assert_eq!(a.len(), 6);
    assert_eq!(a, b);
    let covsel: Vec<_> = a.iter().filter(|r| r[0] == "planar/seed1").collect();
    assert_eq!(covsel.len(), 4);
    assert!(covsel.iter().all(|r| r[9] == "true"), "{covsel:?}");
    let failed = a.iter().find(|r| r[1] == "nope").unwrap();
    assert!(!failed[11].is_empty());
}
