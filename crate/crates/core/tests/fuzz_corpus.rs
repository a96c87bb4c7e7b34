//! Replays the checked-in fuzz seeds on stable so parser regressions show up
//! in the normal test run.

use std::fs;
use std::path::PathBuf;

use gridohm::cli::{parse_index_list, parse_vertex};
use gridohm::graph::parse_edge_list;
use gridohm::TorusSpec;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert!(!files.is_empty(), "no seeds in {}", dir.display());
    files.into_iter().map(|p| fs::read(p).unwrap()).collect()
}

#[test]
fn edge_list_seeds() {
    let accepted = seeds("edge_list")
        .iter()
        .filter_map(|d| parse_edge_list(std::str::from_utf8(d).ok()?).ok())
        .inspect(|g| assert_eq!(g.edges().count(), g.num_edges()))
        .count();
    assert_eq!(accepted, 4);
}

#[test]
fn index_list_seeds() {
    let ok: Vec<bool> = seeds("index_list")
        .iter()
        .map(|d| parse_index_list(std::str::from_utf8(d).unwrap()).is_ok())
        .collect();
    // commas, descending, long_range, mixed, range, spaces
    assert_eq!(ok, [true, false, true, true, true, true]);
}

#[test]
fn vertex_seeds() {
    let ok: Vec<bool> = seeds("vertex")
        .iter()
        .map(|d| parse_vertex(std::str::from_utf8(d).unwrap()).is_ok())
        .collect();
    // coords_2d, coords_4d, empty_coord, index
    assert_eq!(ok, [true, true, false, true]);
}

#[test]
fn torus_codec_seeds() {
    for data in seeds("torus_codec") {
        let spec = TorusSpec::new(data[0] as usize, (data[1] % 16) as usize).unwrap();
        let raw = u64::from_le_bytes(data[2..10].try_into().unwrap()) as usize;
        match spec.decode(raw) {
            Ok(c) => assert_eq!(spec.encode(&c).unwrap(), raw),
            Err(_) => assert!(raw >= spec.num_vertices()),
        }
    }
}
