#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = walsh_carleson::io::parse_m_range(s);
        let _ = walsh_carleson::io::parse_set_override(s);
        if let Ok(seq) = walsh_carleson::io::parse_lacunary_list(s) {
            assert!(seq.ratio() > 1.0);
        }
    }
});
