//! Feed arbitrary bytes through parameter validation; whenever a valid
//! distribution comes out, the root machinery must uphold its invariants
//! without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;
use ruinwalk::walk_core::char_roots;
use ruinwalk::{absorption::absorb_interval, validate_params};

fuzz_target!(|data: &[u8]| {
    if data.len() < 32 {
        return;
    }
    let f = |i: usize| f64::from_le_bytes(data[i * 8..(i + 1) * 8].try_into().unwrap());
    let (p, q, r, s) = (f(0), f(1), f(2), f(3));
    let Ok(w) = validate_params(p, q, r, s) else {
        return;
    };
    let sum = w.p() + w.q() + w.r() + w.s();
    assert!((sum - 1.0).abs() < 1e-12);
    for z in [0.25, 0.75, 1.0] {
        let roots = char_roots(&w, z).expect("roots exist for valid params");
        assert!(roots.xi2 > 0.0 && roots.xi1 >= roots.xi2);
        let product = roots.xi1 * roots.xi2;
        assert!((product - w.p() / w.q()).abs() <= 1e-9 * product.max(1.0));
    }
    let probs = absorb_interval(&w, 0, 5, 2).expect("valid interval");
    let total = probs.at_lower + probs.at_upper + probs.interior_mass;
    assert!((0.0..=1.0 + 1e-9).contains(&probs.at_lower));
    assert!((0.0..=1.0 + 1e-9).contains(&probs.at_upper));
    assert!((total - 1.0).abs() <= 1e-9);
});
