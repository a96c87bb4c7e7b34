#![no_main]
use gridohm::graph::parse_edge_list;
use libfuzzer_sys::fuzz_target;

// Any graph the parser accepts must satisfy the simple-graph invariants:
// sorted, symmetric adjacency with no loops and a consistent edge count.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_edge_list(text) {
        let mut degree_sum = 0;
        for u in 0..g.num_vertices() {
            let nbrs = g.neighbors(u);
            assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
            for &v in nbrs {
                assert_ne!(u, v);
                assert!(g.neighbors(v).binary_search(&u).is_ok());
            }
            degree_sum += nbrs.len();
        }
        assert_eq!(degree_sum, 2 * g.num_edges());
    }
});
