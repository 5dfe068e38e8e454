#![no_main]
use libfuzzer_sys::fuzz_target;

// The verifier must never panic on parsed-but-bogus certificates; it either
// verifies, reports diffs, or errors cleanly.
fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = walsh_carleson::io::parse_certificate_json(data) {
        let _ = parsed.certificate.verify(
            parsed.f.as_ref(),
            parsed.g.as_ref(),
            parsed.choice.as_ref(),
        );
    }
});
