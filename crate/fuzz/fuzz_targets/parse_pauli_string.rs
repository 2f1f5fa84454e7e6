#![no_main]

use cnosim::pauli::PauliString;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<PauliString>() {
        let printed = p.to_string();
        assert_eq!(printed.parse::<PauliString>().unwrap(), p);
    }
});
