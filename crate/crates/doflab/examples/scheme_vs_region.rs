//! Where each scheme's analytic DoF sits relative to the achievable region.
//!
//! Schemes that back their power off (plain ZFBF, reused MAT) are scored in
//! their own `P^S` accounting, which can exceed what any full-power region
//! admits; `SchemeDof::full_power_point` rescales by `S / n_subbands` so the
//! comparison is apples to apples. After that conversion every scheme point
//! lies inside the region, and the hybrid points sit on its boundary.
//!
//! Run with: `cargo run --example scheme_vs_region`

use doflab::*;

fn main() {
    let qualities = [("0", "1/3"), ("1/5", "1/2"), ("1/2", "3/4"), ("0", "3/4")];
    for (a, b) in qualities {
        let quality = CsitQuality::new(parse_rat(a).unwrap(), parse_rat(b).unwrap()).unwrap();
        let reg = region(&quality);
        println!("(alpha, beta) = ({a}, {b})");
        for scheme in [
            Scheme::Zfbf,
            Scheme::MatReuse,
            Scheme::HybridCaseI,
            Scheme::HybridCaseII,
            Scheme::ScZf,
        ] {
            match analytic_scheme_dof(scheme, &quality, User::User1) {
                Ok(dof) => {
                    let own = dof.point.clone();
                    let full = dof.full_power_point();
                    println!(
                        "  {:>9}: own-S {} (S = {}), full-power {} in region: {}",
                        scheme.label(),
                        own,
                        fmt_rat(&dof.charge),
                        full,
                        contains(&reg, &full)
                    );
                }
                Err(e) => println!("  {:>9}: n/a ({e})", scheme.label()),
            }
        }
        println!();
    }
}
