#![no_main]

use libfuzzer_sys::fuzz_target;
use riskmp::cli::{Stamp, StampedCsv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = Stamp::parse_line(text.lines().next().unwrap_or(""));
    if let Ok(table) = StampedCsv::parse(text) {
        let again = StampedCsv::parse(&table.render()).expect("rendered tables parse");
        assert_eq!(again.stamp, table.stamp);
        assert_eq!(again.header, table.header);
        assert_eq!(again.rows, table.rows);
    }
});
