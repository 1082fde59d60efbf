//! Regenerate the committed dataset fixtures under `data/`.
//!
//! Run from anywhere in the workspace:
//! `cargo run -p cardiopipe-core --example make_fixtures`

use std::path::PathBuf;

use cardiopipe_core::ingest::{serialize_processed, serialize_raw, AttributeSchema};
use cardiopipe_core::synth;

fn main() -> std::io::Result<()> {
    let out_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    std::fs::create_dir_all(&out_dir)?;
    for dataset in synth::all_four() {
        let path = out_dir.join(format!("{}.data", dataset.name));
        std::fs::write(&path, serialize_raw(&dataset))?;
        println!("wrote {} ({} records)", path.display(), dataset.len());
    }
    // a processed-format sample projected from the Cleveland fixture
    let cleveland = synth::cleveland();
    let processed = serialize_processed(&cleveland, &AttributeSchema::processed14());
    let path = out_dir.join("processed.cleveland.data");
    std::fs::write(&path, processed)?;
    println!("wrote {} ({} records)", path.display(), cleveland.len());
    Ok(())
}
