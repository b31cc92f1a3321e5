use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosprice")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn line_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn fmls_price_with_tuned_parameters() {
    let o = run(&[
        "price", "--model", "fmls", "--alpha", "1.5597", "--sigma", "0.1486", "--T", "1", "--S0", "100", "--K", "100",
        "--r", "0", "--payoff", "call", "--eps", "1e-2",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let price: f64 = line_value(&out, "price").parse().unwrap();
    assert!((price - 9.7433708).abs() < 1e-2);
    assert_eq!(line_value(&out, "M").parse::<f64>().unwrap().round(), 69.0);
    assert_eq!(line_value(&out, "L").parse::<f64>().unwrap().round(), 176.0);
    assert_eq!(line_value(&out, "N"), "5451");
    assert!(out.contains("certified eps = 1e-2"));
}

#[test]
fn tune_black_scholes() {
    let o = run(&["tune", "--model", "bs", "--sigma", "0.2", "--T", "1", "--K", "100", "--eps", "1e-8", "--n", "8", "--j", "40"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(line_value(&out, "N"), "179");
    assert!(out.contains("moment bound, n = 8"));
}

#[test]
fn manual_parameters_and_config_file() {
    let mut file = tempfile();
    writeln!(file.1, "# black-scholes\nmodel = bs\nsigma = 0.2\nT = 1").unwrap();
    let path = file.0.to_str().unwrap();
    let o = run(&["price", "--config", path, "--K", "100", "--L", "6", "--M", "6", "--N", "256"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let price: f64 = line_value(&stdout(&o), "price").parse().unwrap();
    assert!((price - 7.965567455405804).abs() < 1e-10);
    // flags override the file
    let o = run(&["price", "--config", path, "--sigma", "0.3", "--K", "100", "--L", "6", "--M", "6", "--N", "256"]);
    let price: f64 = line_value(&stdout(&o), "price").parse().unwrap();
    assert!(price > 11.0);
    std::fs::remove_file(&file.0).unwrap();
}

fn tempfile() -> (std::path::PathBuf, std::fs::File) {
    let path = std::env::temp_dir().join(format!("cosprice-{}-{:?}.cfg", std::process::id(), std::thread::current().id()));
    let f = std::fs::File::create(&path).unwrap();
    (path, f)
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["price", "--model", "bs", "--K", "100", "--eps", "1e-4"]), 2, "missing sigma");
    assert_eq!(code(&["price", "--model", "heston", "--K", "100"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["price", "--model", "bs", "--sigma", "0.2", "--K", "100", "--L", "6"]), 2);
    assert_eq!(code(&["experiment", "--id", "nope"]), 2);
    // the martingale correction needs alpha > 1
    assert_eq!(
        code(&["price", "--model", "nig", "--alpha", "1", "--delta", "1", "--K", "100", "--L", "2", "--M", "2", "--N", "64"]),
        3
    );
    // variance gamma at T = 0.25 has no forty derivatives
    assert_eq!(code(&["price", "--model", "vg", "--sigma", "0.1", "--nu", "0.2", "--T", "0.25", "--K", "100", "--eps", "1e-2"]), 4);
    assert_eq!(code(&["price", "--config", "/nonexistent/cos.cfg", "--K", "100", "--eps", "1e-2"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn table1_experiment_file() {
    let path = std::env::temp_dir().join(format!("table1-{}.csv", std::process::id()));
    let o = run(&["experiment", "--id", "table1", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "j,N,cpu_cos_ms,cpu_hj_ms");
    let js: Vec<&str> = data[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(js, ["10", "20", "30", "40", "50", "60", "70", "min"]);
    assert!(data[8].starts_with("min,120,"));
}
