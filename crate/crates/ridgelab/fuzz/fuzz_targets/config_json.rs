#![no_main]

use libfuzzer_sys::fuzz_target;
use ridgelab::io::config::FlagSet;
use ridgelab::pipeline::PipelineParams;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ridgelab::io::config::parse_config_json(text) {
            let mut params = PipelineParams::default();
            cfg.apply(&mut params, &FlagSet::default());
            // Validation must reject nonsense without panicking.
            let _ = params.validate(1.0);
        }
    }
});
