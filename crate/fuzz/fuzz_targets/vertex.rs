#![no_main]
use gridohm::cli::{parse_vertex, VertexRef};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse_vertex(text) {
        Ok(VertexRef::Coords(c)) => assert!(c.len() >= 2),
        Ok(VertexRef::Index(_)) => assert!(!text.contains(',')),
        Err(_) => {}
    }
});
