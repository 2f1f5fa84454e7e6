#![no_main]

use cnosim::model::{CouplingSchedule, TabulatedSchedule};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(table) = TabulatedSchedule::from_csv_str(text) {
        let s = CouplingSchedule::Tabulated(table);
        let (start, end) = s.domain();
        for t in [start, 0.5 * (start + end), end] {
            if let Ok(mu) = s.mu_at(t) {
                assert!(mu >= 0.0);
            }
        }
    }
});
