#![no_main]

use cnosim::output::TrajectoryRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(record) = TrajectoryRecord::from_json(text) {
        let once = record.to_json().unwrap();
        let again = TrajectoryRecord::from_json(&once).unwrap();
        assert_eq!(again, record);
        assert_eq!(again.to_json().unwrap(), once);
    }
});
