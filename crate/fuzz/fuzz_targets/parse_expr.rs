#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(expr) = fracexpand::expr::parse(src) else { return };
    // anything that parses must print reparseably and evaluate without
    // panicking (domain failures are Err values, not panics)
    let printed = expr.to_string();
    let reparsed = fracexpand::expr::parse(&printed).expect("printed form must reparse");
    assert_eq!(printed, reparsed.to_string());
    let _ = expr.eval(0.5, -0.25);
    let _ = expr.diff(fracexpand::expr::Var::X);
});
