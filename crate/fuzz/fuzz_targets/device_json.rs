#![no_main]
use diabatic::device::DeviceParams;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(dev) = DeviceParams::from_json(s) {
            assert!(dev.validate().is_ok());
        }
    }
});
