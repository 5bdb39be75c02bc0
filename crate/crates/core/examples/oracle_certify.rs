//! Every slow oracle against its fast path, as the `oracle-test` subcommand runs it.

use kirchhoff_choquard::oracle::certify;

fn main() -> kirchhoff_choquard::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(0);
    for c in certify(seed)? {
        println!("{} {:40} error {:.2e} bound {:.0e}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.error, c.bound);
    }
    Ok(())
}
