#![no_main]
use gridohm::TorusSpec;
use libfuzzer_sys::fuzz_target;

// Input layout: side byte, dimension byte, then little-endian u64 index.
// Decoding a valid index and encoding the coordinates must round-trip.
fuzz_target!(|data: &[u8]| {
    if data.len() < 10 {
        return;
    }
    let side = data[0] as usize;
    let dim = (data[1] % 16) as usize;
    let Ok(spec) = TorusSpec::new(side, dim) else { return };
    let raw = u64::from_le_bytes(data[2..10].try_into().unwrap()) as usize;
    match spec.decode(raw) {
        Ok(coords) => {
            assert!(raw < spec.num_vertices());
            assert!(coords.iter().all(|&c| c < side));
            assert_eq!(spec.encode(&coords).unwrap(), raw);
        }
        Err(_) => assert!(raw >= spec.num_vertices()),
    }
});
