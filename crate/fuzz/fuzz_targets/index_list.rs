#![no_main]
use gridohm::cli::{parse_index_list, MAX_LIST_LEN};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_index_list(text) {
        assert!(!list.0.is_empty());
        assert!(list.0.len() <= MAX_LIST_LEN);
        // Rendering back as a plain comma list must parse to the same values.
        let joined: Vec<String> = list.0.iter().map(|v| v.to_string()).collect();
        assert_eq!(parse_index_list(&joined.join(",")).unwrap(), list);
    }
});
