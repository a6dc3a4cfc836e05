mod common;

use std::io::Cursor;
use std::process::Command;

use common::grid;
use tourplan::bench::{generate_grid_city, GridCitySpec};
use tourplan::cli::{Choice, Session, SessionOptions, DISCONNECTED_NOTICE};
use tourplan::{emit_gmaps_url, CityGraph, GeoPoint, GraphBuilder, VertexId};

fn url_for(graph: &CityGraph, k: usize) -> String {
    let pts: Vec<GeoPoint> = graph.vertices().step_by(3).take(k).map(|(_, p)| p).collect();
    assert_eq!(pts.len(), k);
    emit_gmaps_url(&pts).unwrap()
}

fn session_output(graph: &CityGraph, options: SessionOptions, script: &str) -> (i32, String) {
    let mut out = Vec::new();
    let code = Session::new(graph, options)
        .run(&mut Cursor::new(script.as_bytes().to_vec()), &mut out)
        .unwrap();
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn invalid_url_reprompts_then_exits() {
    let g = grid(6, 6, 0);
    let (code, text) = session_output(&g, SessionOptions::default(), "google.com\nhello\nx\n");
    assert_eq!(code, 0);
    assert_eq!(text.matches("Invalid URL! Try again:").count(), 2);
    assert!(text.starts_with("Paste here the Google Maps URL"));
}

#[test]
fn exact_option_visibility() {
    let g = grid(10, 10, 0);
    let mut out = Vec::new();
    let mut s = Session::new(&g, SessionOptions::default());
    s.set_url(&url_for(&g, 20), &mut out).unwrap().unwrap();
    assert!(s.menu_text().contains(" 5. Exact"));
    s.set_url(&url_for(&g, 21), &mut out).unwrap().unwrap();
    assert!(!s.menu_text().contains(" 5. Exact"));
    assert_eq!(s.show_menu(&mut Cursor::new(b"5\n3\n".to_vec()), &mut out).unwrap(), Choice::NearestNeighbor);
    s.enable_extreme();
    assert!(s.menu_text().contains(" 5. Exact"));
}

#[test]
fn extreme_mode_command_at_url_prompt() {
    let g = grid(10, 10, 0);
    let script = format!("extreme-mode\n{}\nx\n", url_for(&g, 21));
    let (code, text) = session_output(&g, SessionOptions::default(), &script);
    assert_eq!(code, 0);
    assert!(text.contains("extreme mode enabled"));
    assert!(text.contains(" 5. Exact"));
}

#[test]
fn closure_built_once_per_url() {
    let g = grid(8, 8, 3);
    let url = url_for(&g, 6);
    let script = format!("{url}\n2\n3\n4\n5\n5\nc\n{url}\n3\n1\nx\n");
    let (code, text) = session_output(&g, SessionOptions::default(), &script);
    assert_eq!(code, 0);
    assert_eq!(text.matches("Time required to build subgraph").count(), 2);
    assert_eq!(text.matches("Time required to compute route").count(), 7);
    assert!(text.contains("WARNING: The distance is computed using our graph of the city"));
}

#[test]
fn disconnected_points_fall_back() {
    let mut b = GraphBuilder::new(false);
    for (id, lon) in [(1, 0.0), (2, 0.001), (3, 0.002), (4, 0.5)] {
        b.add_vertex(VertexId(id), GeoPoint::new(0.0, lon).unwrap()).unwrap();
    }
    b.add_edge(VertexId(1), VertexId(2), 111.0).unwrap();
    b.add_edge(VertexId(2), VertexId(3), 111.0).unwrap();
    let g = b.build().unwrap();
    let script = "google.com/maps/dir/0,0/0,0.002/0,0.5/\n5\nx\n";
    let (code, text) = session_output(&g, SessionOptions::default(), script);
    assert_eq!(code, 0);
    assert!(text.contains(DISCONNECTED_NOTICE));
    assert!(!text.contains("Total distance"));
}

#[test]
fn end_of_input_exits_cleanly() {
    let g = grid(6, 6, 0);
    let url = url_for(&g, 4);
    for script in [String::new(), format!("{url}\n"), format!("{url}\n1\n")] {
        assert_eq!(session_output(&g, SessionOptions::default(), &script).0, 0);
    }
}

fn grid_files(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf, CityGraph) {
    let spec = GridCitySpec {
        rows: 8,
        cols: 8,
        spacing_m: 80.0,
        perturbation: 0.2,
        seed: 2,
    };
    let (v, e) = generate_grid_city(&spec, dir).unwrap();
    let (g, _) = tourplan::load_city_graph(&v, &e, false).unwrap();
    (v, e, g)
}

#[test]
fn binary_interactive_session() {
    let dir = tempfile::tempdir().unwrap();
    let (v, e, g) = grid_files(dir.path());
    let mut child = Command::new(env!("CARGO_BIN_EXE_tourplan"))
        .args([&v, &e])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    {
        use std::io::Write;
        let mut stdin = child.stdin.take().unwrap();
        writeln!(stdin, "nope\n{}\n4\nx", url_for(&g, 5)).unwrap();
    }
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("Initializing ...\nTime required to build graph: "));
    assert!(text.contains("Invalid URL! Try again:"));
    assert!(text.contains("Total distance:"));
    assert!(text.contains("https://www.google.com/maps/dir/"));
}

#[test]
fn binary_scripted_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (v, e, g) = grid_files(dir.path());
    let url = url_for(&g, 6);
    let run = |algo: &str, url: &str| {
        Command::new(env!("CARGO_BIN_EXE_tourplan"))
            .args([v.to_str().unwrap(), e.to_str().unwrap(), "--url", url, "--algo", algo])
            .output()
            .unwrap()
    };
    for algo in ["1", "2", "3", "4", "5"] {
        let out = run(algo, &url);
        assert!(out.status.success(), "algo {algo}");
    }
    assert_eq!(run("5", "not a url").status.code(), Some(2));
    assert!(!run("6", &url).status.success());

    let missing = Command::new(env!("CARGO_BIN_EXE_tourplan"))
        .args(["/nonexistent/v.txt", "/nonexistent/e.txt"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn binary_gen_grid_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_tourplan"))
        .args(["gen-grid", "--rows", "5", "--cols", "7", "--out-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("vertices.txt").exists());

    let csv = dir.path().join("bench.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_tourplan"))
        .args(["bench", "--rows", "15", "--cols", "15", "--ns", "4,6", "--trials", "2", "--quality-n", "6"])
        .args(["--quality-trials", "3", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = tourplan::bench::BenchReport::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r.algorithm == "exact" && r.n == 6 && r.dp_states == Some(6 << 6)));
}
