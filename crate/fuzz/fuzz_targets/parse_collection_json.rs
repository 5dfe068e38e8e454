#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(tiles) = walsh_carleson::io::parse_collection_json(data) {
        let json = walsh_carleson::io::collection_to_json(&tiles);
        let back = walsh_carleson::io::parse_collection_json(json.as_bytes())
            .expect("serializer output must parse");
        assert_eq!(tiles.bitiles(), back.bitiles());
    }
});
