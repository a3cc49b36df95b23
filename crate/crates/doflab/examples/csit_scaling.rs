//! CSIT error scaling law.
//!
//! The transmitter-side estimate of a quality-`q` channel has error variance
//! `P^(-q)`, so the zero-forcing leakage moment `E[|h^H h_hat_perp|^2]`
//! decays with the same exponent. This example estimates the moment by
//! Monte Carlo across an SNR sweep and fits the log-log slope.
//!
//! Run with: `cargo run --release --example csit_scaling`

use doflab::*;

fn main() {
    let sweep: Vec<SnrPoint> = [40.0, 60.0, 80.0]
        .iter()
        .map(|db| SnrPoint::from_db(*db).unwrap())
        .collect();
    println!("{:>6} {:>12} {:>12} {:>12} {:>9}", "beta", "40 dB", "60 dB", "80 dB", "slope");
    for b in ["0", "1/4", "1/2", "3/4", "1"] {
        let beta = parse_rat(b).unwrap();
        let quality = CsitQuality::new(rint(0), beta).unwrap();
        let mut row = Vec::new();
        for snr in &sweep {
            let est = leakage_moment(&quality, snr, 100_000, LeakageSide::BetaSide, 17).unwrap();
            row.push(est);
        }
        let slope = leakage_slope(&quality, &sweep, 100_000, LeakageSide::BetaSide, 17).unwrap();
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>9.4}",
            b, row[0], row[1], row[2], slope
        );
    }
    println!("\nslope tracks -beta; the constant offset is the conditional");
    println!("projection factor (sigma^2/2)/(1 + sigma^2/2) of the error model");
}
