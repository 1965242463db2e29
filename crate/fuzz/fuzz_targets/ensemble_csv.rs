#![no_main]

use libfuzzer_sys::fuzz_target;
use specklenoise::ensemble::{parse_ensemble_csv, write_ensemble_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ens) = parse_ensemble_csv(text) {
        let mut out = Vec::new();
        write_ensemble_csv(&ens, &mut out).unwrap();
        let again = parse_ensemble_csv(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again.realizations(), ens.realizations());
        assert_eq!(again.grid(), ens.grid());
    }
});
