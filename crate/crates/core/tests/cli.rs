use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use l2boost::simulation::{gen_dataset, ModelId, ModelSpec};

fn l2boost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l2boost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_model_csv(path: &Path, model: ModelId, n: usize, seed: u64) {
    let s = gen_dataset(&ModelSpec::new(model), n, seed).unwrap();
    let mut text = String::from("x,y\n");
    for (x, y) in s.x().iter().zip(s.y()) {
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(path, text).unwrap();
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn fit_writes_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_model_csv(&input, ModelId::Model1, 10, 3);
    let o = l2boost(&["fit", "--input", path_str(&input), "--h", "0.1", "--r", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,yhat,flag"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    assert!(rows[0].starts_with("0,") && rows[100].starts_with("1,"));
}

#[test]
fn fit_reports_the_bad_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "x,y\n0.1,1\n0.2,2\n0.3,oops\n0.4,1\n").unwrap();
    let o = l2boost(&["fit", "--input", path_str(&input), "--h", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 4"), "{}", stderr(&o));
}

#[test]
fn fit_of_constant_data_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let rows: String = (0..12).map(|i| format!("{},2.5\n", i as f64 / 11.0)).collect();
    fs::write(&input, rows).unwrap();
    let out = dir.path().join("fit.csv");
    let o = l2boost(&["fit", "--input", path_str(&input), "--h", "0.07", "--r", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "2.5", "{line}");
        assert_eq!(cols[2], "0");
    }
}

#[test]
fn fit_without_support_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "0.503,1\n0.505,2\n0.507,3\n").unwrap();
    let o = l2boost(&["fit", "--input", path_str(&input), "--h", "0.001", "--kernel", "epanechnikov"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn fit_picks_h_by_leave_one_out_when_absent() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_model_csv(&input, ModelId::Model1, 80, 9);
    let o = l2boost(&["fit", "--input", path_str(&input), "--h-steps", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("leave-one-out"));
}

#[test]
fn select_singleton_grid_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_model_csv(&input, ModelId::Model1, 60, 4);
    let single = l2boost(&["select", "--input", path_str(&input), "--h", "0.08", "--r", "3"]);
    assert_eq!(single.status.code(), Some(0), "{}", stderr(&single));
    let text = stdout(&single);
    assert!(text.starts_with("r,h_hat,sse\n"));
    for line in text.lines().skip(1).take(4) {
        assert_eq!(line.split(',').nth(1), Some("0.08"));
    }

    let args = ["select", "--input", path_str(&input), "--seed", "11", "--h-steps", "12"];
    assert_eq!(l2boost(&args).stdout, l2boost(&args).stdout);
}

#[test]
fn select_on_model_one_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_model_csv(&input, ModelId::Model1, 400, 42);
    let o = l2boost(&["select", "--input", path_str(&input)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 7 + 1);
    let summary = text.lines().last().unwrap();
    let r_hat: usize = summary.split("r_hat=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    let h_hat: f64 = summary.split("h_hat=").nth(1).unwrap().parse().unwrap();
    assert!(r_hat >= 1);
    assert!((0.02..=0.3).contains(&h_hat));
}

#[test]
fn table1_has_56_rows_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t1.csv");
    let args = ["table1", "--reps", "2", "--h-min", "0.03", "--h-max", "0.2", "--h-steps", "6", "--out", path_str(&out)];
    assert_eq!(l2boost(&args).status.code(), Some(0));
    let first = fs::read(&out).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("model,n,estimator,r,h_opt,mise_min\n"));
    assert_eq!(text.lines().count(), 1 + 56);
    assert_eq!(l2boost(&args).status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), first);
}

#[test]
fn table1_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("t1.csv");
    let o = l2boost(&["table1", "--reps", "2", "--model", "1", "--n", "100", "--r", "1", "--h-steps", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn figures_write_twelve_panels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("figs");
    let o = l2boost(&[
        "figures", "--reps", "2", "--n", "100", "--r", "2", "--h-min", "0.03", "--h-max", "0.2", "--h-steps", "7",
        "--out", path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut svgs = 0;
    for model in ["model1", "model2"] {
        for entry in fs::read_dir(out.join(model)).unwrap() {
            let p = entry.unwrap().path();
            match p.extension().and_then(|e| e.to_str()) {
                Some("svg") => svgs += 1,
                Some("csv") => {
                    let text = fs::read_to_string(&p).unwrap();
                    assert!(text.starts_with("log_h,value,r,estimator,metric\n"));
                    assert_eq!(text.lines().count(), 1 + 7);
                }
                _ => panic!("unexpected file {}", p.display()),
            }
        }
    }
    assert_eq!(svgs, 12);
    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("model,n,estimator,metric,r,log_h,value\n"));
    assert_eq!(curves.lines().count(), 1 + 2 * 2 * 3 * 3 * 7);
}

#[test]
fn rates_report_fits_well() {
    let o = l2boost(&["rates"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 6);
    for row in rows {
        let slope: f64 = row[3].parse().unwrap();
        let expected: f64 = row[4].parse().unwrap();
        let r2: f64 = row[5].parse().unwrap();
        assert!(r2 >= 0.95, "{row:?}");
        assert!((slope - expected).abs() < 0.5, "{row:?}");
    }
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("rates.conf");
    fs::write(&conf, "# rates manifest\nmodel = 2\nr = 1\nh-steps = 6\n").unwrap();
    let o = l2boost(&["rates", "--config", path_str(&conf), "--r", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("2,400,0,"));
    assert!(text.lines().nth(1).unwrap().contains(",6,"));
}
