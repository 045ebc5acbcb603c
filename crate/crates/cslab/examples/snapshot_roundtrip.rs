//! The binary snapshot format: write a field, read it back bit-exactly,
//! and show the rejection of a corrupted header.
//!
//! Run with `cargo run --release --example snapshot_roundtrip`.

use cslab::grid::Grid;
use cslab::oracle::GaussianPacket;
use cslab::snapshot::{read_snapshot, snapshot_roundtrip, write_snapshot};

fn main() -> cslab::Result<()> {
    let dir = std::env::temp_dir().join("cslab_snapshot_example");
    std::fs::create_dir_all(&dir).ok();
    let path = dir.join("field.cslf");

    let grid = Grid::new(3, 10.0, 32)?;
    let field = GaussianPacket::centered(1.0).sample(grid);
    let back = snapshot_roundtrip(&field, &path)?;
    let exact = field
        .values
        .iter()
        .zip(back.values.iter())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    println!(
        "round trip of {} values at {}: bit-exact = {exact}",
        field.values.len(),
        path.display()
    );

    // corrupt the magic and watch the reader refuse
    write_snapshot(&field, &path)?;
    let mut bytes = std::fs::read(&path).expect("snapshot written above");
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).expect("write corrupted file");
    match read_snapshot(&path) {
        Err(err) => println!("corrupted header rejected: {err}"),
        Ok(_) => println!("unexpected: corrupted file accepted"),
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
