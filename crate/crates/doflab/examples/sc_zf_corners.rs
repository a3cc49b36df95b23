//! Superposition coding over a zero-forcing pair: the `(1, alpha)` and
//! `(alpha, 1)` region corners.
//!
//! Each subband spends `P - P^alpha` on a common message decoded by both
//! receivers and `P^alpha / 2` on each ZF'd private symbol. Handing the
//! common payload to user 1 lands on `(1, alpha)`; handing it to user 2
//! lands on `(alpha, 1)`.
//!
//! Run with: `cargo run --release --example sc_zf_corners`

use doflab::*;

fn main() {
    let sweep: Vec<SnrPoint> = [50.0, 65.0, 80.0]
        .iter()
        .map(|db| SnrPoint::from_db(*db).unwrap())
        .collect();
    let params = EvalParams {
        n_trials: 5_000,
        seed: 9,
        ..Default::default()
    };
    for a in ["0", "2/5", "1"] {
        let quality = CsitQuality::new(parse_rat(a).unwrap(), rint(1)).unwrap();
        for owner in [User::User1, User::User2] {
            let plan = build_sc_zf(&quality, owner);
            let report = evaluate_sweep(&plan, &sweep, &params).unwrap();
            let target = analytic_scheme_dof(Scheme::ScZf, &quality, owner).unwrap();
            let verdict = reconcile(&report, &target.point, 0.05).unwrap();
            println!("alpha = {a}, common to {owner}: target {} | {verdict}", target.point);
        }
    }
    println!("\nat alpha = 1 the common stream carries zero rate and the");
    println!("plan reduces to full-power ZF on both corners");
}
