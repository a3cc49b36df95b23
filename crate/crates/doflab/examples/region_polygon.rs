//! Achievable DoF region geometry.
//!
//! Prints the exact corner points and time-sharing hull for a few CSIT
//! quality pairs, and demonstrates the saturation effect: past
//! `beta = (2 + alpha) / 3` the region stops growing.
//!
//! Run with: `cargo run --example region_polygon`

use doflab::*;

fn show(alpha: &str, beta: &str) {
    let quality = CsitQuality::new(parse_rat(alpha).unwrap(), parse_rat(beta).unwrap()).unwrap();
    let r = region(&quality);
    println!("alpha = {alpha}, beta = {beta}");
    print!("  corners:");
    for p in &r.corners {
        print!(" {p}");
    }
    println!();
    print!("  hull  :");
    for p in &r.hull {
        print!(" {p}");
    }
    println!("\n");
}

fn main() {
    // The stale-CSIT region: mixed corners merge at (2/3, 2/3).
    show("0", "1");
    // Same region already at beta = 2/3: saturation.
    show("0", "2/3");
    // Below the threshold the mixed corners split.
    show("1/5", "1/2");
    // Equal qualities: the mixed corners join the ZF corners.
    show("1/2", "1/2");

    let a = region(&CsitQuality::new(rint(0), parse_rat("2/3").unwrap()).unwrap());
    let b = region(&CsitQuality::new(rint(0), rint(1)).unwrap());
    println!(
        "region(0, 2/3) == region(0, 1): {}",
        a.hull == b.hull && {
            use std::collections::BTreeSet;
            let x: BTreeSet<_> = a.corners.iter().collect();
            let y: BTreeSet<_> = b.corners.iter().collect();
            x == y
        }
    );

    // Exact containment queries, boundary inclusive.
    let r = region(&CsitQuality::new(parse_rat("1/10").unwrap(), rint(1)).unwrap());
    let e = DofPoint::new(parse_rat("7/10").unwrap(), parse_rat("7/10").unwrap());
    println!("(7/10, 7/10) in region(1/10, 1): {}", contains(&r, &e));
    let outside = DofPoint::new(rint(1), parse_rat("1/100").unwrap());
    let r01 = region(&CsitQuality::new(rint(0), rint(1)).unwrap());
    println!("(1, 1/100) in region(0, 1): {}", contains(&r01, &outside));
}
