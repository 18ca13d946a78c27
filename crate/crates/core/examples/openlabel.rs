//! Parse an OpenLABEL document, keep the 2D-3D pairs and write it back.
//!
//! `cargo run --example openlabel -- path/to/doc.json [camera]`; without
//! arguments a bundled test document is used.

use mff_core::class::ClassMap;
use mff_core::openlabel::{filter_paired, parse_openlabel, parse_openlabel_with, write_openlabel, ParseOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/openlabel/mixed.json").into());
    let camera = args.next().or_else(|| Some("rgb_left".into()));
    let text = std::fs::read_to_string(&path)?;
    let frames = parse_openlabel_with(&text, &ParseOptions { camera, ..Default::default() })?;
    for f in &frames {
        let paired = filter_paired(&f.labels);
        println!(
            "frame {}: {} labels, {} with both boxes, {} tilted cuboids",
            f.frame_id,
            f.labels.len(),
            paired.len(),
            f.warnings.non_yaw_rotations
        );
        for l in paired {
            println!("  {} {:?} at {:?}", l.object_id, l.class, l.box3d.unwrap().center);
        }
    }
    let written = write_openlabel(&frames, &ClassMap::default())?;
    let again = parse_openlabel(&written)?;
    println!("rewritten document: {} bytes, {} frames", written.len(), again.len());
    Ok(())
}
