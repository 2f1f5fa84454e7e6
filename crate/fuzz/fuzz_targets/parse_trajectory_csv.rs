#![no_main]

use cnosim::output::TrajectoryRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(record) = TrajectoryRecord::from_csv(text) else {
        return;
    };
    // the first emission normalizes; after that output must be stable
    let once = record.to_csv().unwrap();
    if let Ok(again) = TrajectoryRecord::from_csv(&once) {
        assert_eq!(again.to_csv().unwrap(), once);
    }
});
