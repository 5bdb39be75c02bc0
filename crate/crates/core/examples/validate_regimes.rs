//! Classifies a few exponent choices and shows the errors for invalid input.

use kirchhoff_choquard::model::{CriticalToken, Exponent};
use kirchhoff_choquard::ModelParams;

fn main() {
    let up = Exponent::Token(CriticalToken::UpperCritical);
    let down = Exponent::Token(CriticalToken::LowerCritical);
    let base = ModelParams::baseline();
    let cases = [
        ("p = q = 2", base),
        ("q upper-critical", base.with_exponents(2.0, up)),
        ("p lower-critical", base.with_exponents(down, 2.0)),
        ("p = q = 3 + alpha", base.with_exponents(up, up)),
        ("p = q = (3 + alpha)/3", base.with_exponents(down, down)),
        // a literal 4.0 is an exact match for alpha = 1, a near miss is not
        ("q = 4.0 literal", base.with_exponents(2.0, 4.0)),
        ("q = 3.9999999", base.with_exponents(2.0, 3.9999999)),
        ("p > q", base.with_exponents(3.0, 2.0)),
        ("lambda = sqrt(V1 V2)", base.with_lambda(1.0)),
    ];
    for (name, params) in cases {
        match params.validate() {
            Ok(regime) => println!("{name:>24}: {regime} (delta = {}, ground state: {})", params.delta(), regime.admits_ground_state()),
            Err(e) => println!("{name:>24}: rejected, {e}"),
        }
    }
}
