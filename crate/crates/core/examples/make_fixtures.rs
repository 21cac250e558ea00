//! Writes the seed-generated CSV fixtures used by the CLI tests.
//!
//! Usage: `cargo run -p circxi --example make_fixtures -- <dir>`

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use circxi::simulation::{generate, ModelKind, ModelSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    fs::create_dir_all(&dir)?;
    let fixtures = [
        ("independence_n200.csv", ModelKind::Independence, 0.0, 101),
        ("rotation_s05_n200.csv", ModelKind::Rotation, 0.5, 102),
        ("doubling_s0_n200.csv", ModelKind::Doubling, 0.0, 103),
        ("bump_s02_n200.csv", ModelKind::LocalizedBump, 0.2, 104),
    ];
    for (name, kind, sigma, seed) in fixtures {
        let sample = generate(&ModelSpec::new(kind, sigma), 200, seed)?;
        let mut f = fs::File::create(dir.join(name))?;
        writeln!(f, "x,y")?;
        for (x, y) in sample.x().iter().zip(sample.y()) {
            // radians, shortest round-trip representation
            writeln!(f, "{:?},{:?}", x.to_radians(), y.to_radians())?;
        }
    }
    Ok(())
}
