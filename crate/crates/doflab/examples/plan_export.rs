//! Serializing a transmit plan and its SIC program to JSON.
//!
//! The document carries the full symbol table (exact power ledger, prelogs,
//! precoders) and both receivers' decode programs; golden-file tests and
//! external tools consume this format.
//!
//! Run with: `cargo run --example plan_export`

use doflab::*;

fn main() {
    let quality = CsitQuality::new(parse_rat("1/5").unwrap(), parse_rat("1/2").unwrap()).unwrap();
    let plan = build_hybrid_case_i(&quality, User::User1).unwrap();
    let doc = PlanDocument::new(plan).unwrap();
    println!("{}", doc.to_json().unwrap());
}
