#![no_main]

use libfuzzer_sys::fuzz_target;
use riskmp::cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_json_str(text) {
        // Anything accepted must hash and build without panicking.
        let _ = cfg.hash();
        let _ = cfg.grid();
        let _ = cfg.model();
        let _ = cfg.feasibility_report();
    }
});
