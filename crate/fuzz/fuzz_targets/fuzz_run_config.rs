//! Deserialize arbitrary bytes as a RunConfig document; anything that
//! parses must survive a serialize/deserialize round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ruinwalk::cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(config) = serde_json::from_slice::<RunConfig>(data) else {
        return;
    };
    let text = serde_json::to_string(&config).expect("config serializes");
    let again: RunConfig = serde_json::from_str(&text).expect("round trip parses");
    assert_eq!(serde_json::to_string(&again).unwrap(), text);
});
