use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use morphlat::experiment::CSV_COLUMNS;
use morphlat::image_io::{distinct_values, load_image, save_image_auto};
use morphlat::{lex_compare, VectorImage};
use serde_json::Value;

fn morphlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphlat"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_rows(out: &Path) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut r = csv::Reader::from_path(out.join("results.csv")).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    (header, r.records().map(|x| x.unwrap()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn points(doc: &Value) -> Vec<Vec<f64>> {
    doc["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            p.as_array()
                .unwrap()
                .iter()
                .map(|c| c.as_f64().unwrap())
                .collect()
        })
        .collect()
}

fn write_image(dir: &Path, name: &str, img: &VectorImage) -> PathBuf {
    let path = dir.join(name);
    save_image_auto(img, &path).unwrap();
    path
}

#[test]
fn synth_then_run_writes_schema() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.png");
    let out = dir.path().join("out");
    let o = morphlat(&[
        "synth",
        "--seed",
        "3",
        "--size",
        "16x16",
        "--palette",
        "32",
        "--out",
        s(&img),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let loaded = load_image(&img).unwrap();
    assert_eq!(loaded.shape(), (16, 16, 3));
    assert!(distinct_values(&loaded).len() <= 32);

    let o = morphlat(&[
        "run",
        "--input",
        s(&img),
        "--out",
        s(&out),
        "--orders",
        "tsp,lex,marginal",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("mean phi"), "{stdout}");

    let text = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(
        CSV_COLUMNS.join(","),
        "image,operator,order,phi_percent,d1,w1,path_length,tour_cost,heuristic,se,metric,wall_ms"
    );
    let (header, rows) = read_rows(&out);
    assert_eq!(rows.len(), 4 * 3);
    let phi = col(&header, "phi_percent");
    for row in &rows {
        let v: f64 = row[phi].parse().unwrap();
        assert!((0.0..=100.0).contains(&v));
        assert_eq!(&row[0], "img");
        assert_eq!(&row[col(&header, "se")], "square:3");
        assert_eq!(&row[col(&header, "metric")], "euclidean");
    }
    let keys: Vec<String> = rows.iter().map(|r| format!("{}/{}", &r[1], &r[2])).collect();
    let expected: Vec<String> = ["dilate", "erode", "open", "close"]
        .iter()
        .flat_map(|op| ["tsp", "lex", "marginal"].map(|o| format!("{op}/{o}")))
        .collect();
    assert_eq!(keys, expected);

    let json = read_json(out.join("results.json"));
    assert_eq!(json["rows"].as_array().unwrap().len(), 12);
    assert!(json["meta"]["conventions"]["phi_percent"].is_string());
    assert!(json["summary"]["per_order"].is_array());
}

#[test]
fn synth_is_deterministic_and_respects_palette() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<PathBuf> = ["a.ppm", "b.ppm"].iter().map(|n| dir.path().join(n)).collect();
    for p in &paths {
        assert!(
            morphlat(&["synth", "--seed", "11", "--size", "9x7", "--out", s(p)])
                .status
                .success()
        );
    }
    assert_eq!(
        std::fs::read(&paths[0]).unwrap(),
        std::fs::read(&paths[1]).unwrap()
    );

    let one = dir.path().join("one.png");
    assert!(morphlat(&["synth", "--palette", "1", "--out", s(&one)])
        .status
        .success());
    assert_eq!(distinct_values(&load_image(&one).unwrap()).len(), 1);

    assert_eq!(
        morphlat(&["synth", "--size", "16", "--out", s(&one)])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn constant_image_is_regular_with_zero_path() {
    let dir = tempfile::tempdir().unwrap();
    let img = write_image(
        dir.path(),
        "flat.ppm",
        &VectorImage::constant(6, 5, &[0.2, 0.4, 0.6]).unwrap(),
    );
    let out = dir.path().join("out");
    let o = morphlat(&[
        "run",
        "--input",
        s(&img),
        "--out",
        s(&out),
        "--orders",
        "tsp,lex,marginal",
    ]);
    assert!(o.status.success());
    let (header, rows) = read_rows(&out);
    assert_eq!(rows.len(), 12);
    let (phi, path, order) = (
        col(&header, "phi_percent"),
        col(&header, "path_length"),
        col(&header, "order"),
    );
    for row in &rows {
        assert_eq!(row[phi].parse::<f64>().unwrap(), 0.0);
        if &row[order] == "marginal" {
            assert_eq!(&row[path], "");
        } else {
            assert_eq!(row[path].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn two_color_dilation_has_no_false_colors() {
    let dir = tempfile::tempdir().unwrap();
    let (red, blue) = ([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
    let data: Vec<f64> = (0..8 * 8)
        .flat_map(|i| if i % 8 < 4 { red } else { blue })
        .collect();
    let img = write_image(
        dir.path(),
        "halves.png",
        &VectorImage::new(8, 8, 3, data).unwrap(),
    );
    let out = dir.path().join("out");
    let o = morphlat(&[
        "run",
        "--input",
        s(&img),
        "--out",
        s(&out),
        "--operators",
        "dilate",
        "--orders",
        "lex",
        "--emit-images",
    ]);
    assert!(o.status.success());
    let result = load_image(out.join("images").join("halves_dilate_lex.png")).unwrap();
    let values = distinct_values(&result);
    assert!(values
        .iter()
        .all(|v| v.components() == red || v.components() == blue));
    // Red is lexicographically larger, so it spreads one column into the blue half.
    assert_eq!(result.at(0, 4), red);
    assert_eq!(result.at(0, 5), blue);
}

#[test]
fn path_exports_follow_their_orders() {
    let dir = tempfile::tempdir().unwrap();
    // Five colinear gray values, shuffled across the image.
    let levels = [0.6, 0.0, 1.0, 0.2, 0.4];
    let data: Vec<f64> = (0..10).flat_map(|i| [levels[i % 5]; 3]).collect();
    let colinear = write_image(dir.path(), "line.ppm", &VectorImage::new(5, 2, 3, data).unwrap());
    let flat = write_image(
        dir.path(),
        "flat.ppm",
        &VectorImage::constant(3, 3, &[0.5, 0.5, 0.5]).unwrap(),
    );
    let synth = dir.path().join("synth.png");
    assert!(
        morphlat(&["synth", "--seed", "5", "--palette", "40", "--out", s(&synth)])
            .status
            .success()
    );
    let out = dir.path().join("out");
    let o = morphlat(&[
        "run",
        "--input",
        s(&colinear),
        s(&flat),
        s(&synth),
        "--out",
        s(&out),
        "--orders",
        "tsp,lex,marginal",
        "--emit-paths",
        "--operators",
        "dilate",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let paths = out.join("paths");
    assert!(!paths.join("line_marginal.json").exists());

    for name in [
        "line_tsp",
        "line_lex",
        "flat_tsp",
        "flat_lex",
        "synth_tsp",
        "synth_lex",
    ] {
        let doc = read_json(paths.join(format!("{name}.json")));
        let obj = doc.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort();
        assert_eq!(
            keys,
            ["metric", "order_name", "path_length", "points", "tour_cost"]
        );
        assert_eq!(doc["metric"], "euclidean");
        assert!(name.ends_with(doc["order_name"].as_str().unwrap()));
        let pts = points(&doc);
        assert!(pts.iter().all(|p| p.len() == 3));
        let length: f64 = pts
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        assert!((doc["path_length"].as_f64().unwrap() - length).abs() < 1e-9);
    }

    let flat = points(&read_json(paths.join("flat_tsp.json")));
    assert_eq!(flat.len(), 1);
    assert_eq!(read_json(paths.join("flat_tsp.json"))["path_length"], 0.0);

    let lex = points(&read_json(paths.join("synth_lex.json")));
    assert!(lex.windows(2).all(|w| lex_compare(&w[0], &w[1]).unwrap().is_lt()));
    assert_eq!(lex.len(), distinct_values(&load_image(&synth).unwrap()).len());

    let line: Vec<f64> = points(&read_json(paths.join("line_tsp.json")))
        .iter()
        .map(|p| p[0])
        .collect();
    let expect: Vec<f64> = [0.0, 0.2, 0.4, 0.6, 1.0]
        .iter()
        .map(|&v: &f64| (v * 255.0).round() / 255.0)
        .collect();
    assert_eq!(line, expect);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    let out = dir.path().join("out");
    std::fs::write(
        &config,
        format!(
            r#"{{"orders": ["lex"], "operators": ["open"], "se_shape": "cross", "se_size": 5,
                "synthetic": {{"count": 2, "width": 8, "height": 8, "palette": 10}}, "out": "{}"}}"#,
            s(&out)
        ),
    )
    .unwrap();
    let o = morphlat(&[
        "run",
        "--config",
        s(&config),
        "--orders",
        "tsp",
        "--metric",
        "manhattan",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_rows(&out);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(&row[col(&header, "order")], "tsp");
        assert_eq!(&row[col(&header, "operator")], "open");
        assert_eq!(&row[col(&header, "se")], "cross:5");
        assert_eq!(&row[col(&header, "metric")], "manhattan");
    }
    assert_eq!(&rows[0][0], "synth_0000");
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{ not json").unwrap();
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"colour": "red"}"#).unwrap();

    for args in [
        vec!["run", "--config", s(&bad_json), "--out", s(&out)],
        vec!["run", "--config", s(&unknown), "--out", s(&out)],
        vec!["run", "--config", "/nonexistent/config.json", "--out", s(&out)],
        vec!["run", "--orders", "lex,sorted", "--out", s(&out)],
        vec!["run", "--operators", "", "--out", s(&out)],
        vec!["run", "--se", "square:4", "--out", s(&out)],
        vec!["run", "--metric", "cosine", "--out", s(&out)],
        vec!["run", "--seed", "1"],
    ] {
        let o = morphlat(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
    }
}

#[test]
fn unloadable_input_is_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_image(
        dir.path(),
        "good.ppm",
        &VectorImage::constant(4, 4, &[0.0, 1.0, 0.0]).unwrap(),
    );
    let broken = dir.path().join("broken.ppm");
    std::fs::write(&broken, b"P6\n4 4\n255\n\x00").unwrap();
    let out = dir.path().join("out");
    let o = morphlat(&["run", "--input", s(&good), s(&broken), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken"));
    let (_, rows) = read_rows(&out);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| &r[0] == "good"));
    let json = read_json(out.join("results.json"));
    assert_eq!(json["errors"][0]["image"], "broken");
}
