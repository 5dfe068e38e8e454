#![no_main]
use libfuzzer_sys::fuzz_target;

// Round-trip property: anything the JSON parser accepts must re-serialize
// and re-parse to the same function.
fuzz_target!(|data: &[u8]| {
    if let Ok(f) = walsh_carleson::io::parse_function_json(data) {
        let json = walsh_carleson::io::function_to_json(&f);
        let back = walsh_carleson::io::parse_function_json(json.as_bytes())
            .expect("serializer output must parse");
        assert_eq!(f, back);
    }
});
