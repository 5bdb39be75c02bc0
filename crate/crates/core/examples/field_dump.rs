//! Writes a field with its JSON sidecar and reads it back.

use kirchhoff_choquard::spectral::dump::{read_field, write_field};
use kirchhoff_choquard::Grid;

fn main() -> kirchhoff_choquard::Result<()> {
    let grid = Grid::new(16, 4.0)?;
    let f = grid.sample(|x, y, z| (-(x * x + y * y + z * z)).exp());
    let dir = std::env::temp_dir().join("kc-field-dump");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("u.bin");
    write_field(&path, &f, 1.0)?;
    let (back, sidecar) = read_field(&path)?;
    println!("{}", std::fs::read_to_string(path.with_extension("json"))?);
    println!("round trip exact: {}, alpha {}", back.values() == f.values(), sidecar.alpha);
    Ok(())
}
