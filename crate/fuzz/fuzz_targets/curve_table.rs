#![no_main]

use libfuzzer_sys::fuzz_target;
use specklenoise::CurveTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = CurveTable::parse_csv(text) {
        let again = CurveTable::parse_csv(&table.to_csv_string()).unwrap();
        assert_eq!(again.columns, table.columns);
        assert_eq!(again.rows.len(), table.rows.len());
    }
});
