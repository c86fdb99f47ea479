//! The installed binary: output formats, exit codes and `--output`.

use std::process::{Command, Output};

fn run(line: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caputo-approx"))
        .args(line.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn weights_csv_sums_to_zero() {
    let o = run("weights --scheme NS[9] --alpha 0.4 --n 12");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,weight"));
    let w: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(w.len(), 13);
    let scale = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(w.iter().sum::<f64>().abs() <= 1e-10 * scale);
}

#[test]
fn solve_json_carries_the_solution() {
    let o = run("--format json solve --equation eq2 --alpha 0.5 --scheme l1 --h 0.05");
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["u"].as_array().unwrap().len(), 21);
    assert_eq!(v["diverged"], false);
    let err = v["max_error"].as_f64().unwrap();
    assert!(err > 0.0 && err < 1e-2);
}

#[test]
fn table_ladder_reports_orders() {
    let o = run("table --equation eq3 --alpha 0.5 --scheme right3malpha --h0 0.05 --levels 4");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(text.lines().next(), Some("h,error,order"));
    assert_eq!(rows.len(), 4);
    assert!(rows[0][2].is_empty());
    let last: f64 = rows[3][2].parse().unwrap();
    assert!((last - 2.5).abs() < 0.1, "{last}");
}

#[test]
fn caputo_single_value_against_closed_form() {
    let o = run("caputo --scheme mid2 --function exp --alpha 0.3 --x 1 --h 0.01");
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // x, h, value, reference, error
    assert!((row[2] - row[3]).abs() < 1e-3 && row[4] < 1e-3);
}

#[test]
fn golden_exit_codes() {
    let o = run("golden --table 1");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("column,row,h,quantity,expected,computed,deviation,tolerance,status"));
    let o = run("golden --table 42");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_list_the_options() {
    let o = run("weights --scheme grunwald --alpha 0.5 --n 4");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("right3malpha"));
    let o = run("weights --scheme l1 --alpha 1.5 --n 4");
    assert_eq!(o.status.code(), Some(1));
    let o = run("solve --equation eq1");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_reports_violations_on_stderr() {
    let o = run("check --scheme right2malpha --alpha 0.5 --n 30");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sign_pattern,Fail"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("failed"));
}

#[test]
fn output_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("caputo-approx-cli-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let o = run(&format!("--output {p} --threads 2 coeffs --alpha-grid 0.1:0.9:0.2"));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
}
