#![no_main]
use libfuzzer_sys::fuzz_target;

use walsh_carleson::tiles::{BiTile, Tile, TreeTop};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(t) = s.parse::<Tile>() {
            assert_eq!(t, t.to_string().parse::<Tile>().unwrap());
        }
        if let Ok(b) = s.parse::<BiTile>() {
            assert_eq!(b, b.to_string().parse::<BiTile>().unwrap());
            // derived geometry must stay consistent on parsed input
            let lo = b.lower().freq();
            let hi = b.upper().freq();
            assert_eq!(lo.upper_edge(), hi.lower_edge());
        }
        if let Ok(top) = s.parse::<TreeTop>() {
            assert_eq!(top, top.to_string().parse::<TreeTop>().unwrap());
        }
    }
});
