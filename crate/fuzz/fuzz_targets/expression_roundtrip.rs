#![no_main]

use dirac_core::{parse_expression, print_expression, PhaseSpace};
use libfuzzer_sys::fuzz_target;

// Whatever parses must print to text that parses back to the same form.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let ps = PhaseSpace::with_parameters(3, ["r", "k"]).unwrap();
    let Ok(expr) = parse_expression(text, &ps) else {
        return;
    };
    let printed = print_expression(&expr, &ps);
    let back = parse_expression(&printed, &ps).expect("printed form parses");
    assert!(back.same_form(&expr), "{text:?} printed as {printed:?}");
});
