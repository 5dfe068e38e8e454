#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = walsh_carleson::io::parse_function_csv(data) {
        let csv = walsh_carleson::io::function_to_csv(&f);
        let back = walsh_carleson::io::parse_function_csv(csv.as_bytes())
            .expect("serializer output must parse");
        assert_eq!(f, back);
    }
});
