//! Reusing the stale-CSIT retransmission scheme on two subbands.
//!
//! Each user's two-symbol vector goes out at power `P^beta` in its own
//! subband; a third subband resends the reconstructed sum of the overheard
//! interferences. Each receiver decodes the retransmission, subtracts its own
//! overheard observation and jointly zero-forces its two symbols, for 2/3
//! DoF per user over `3*beta` channel uses at any `beta > 0`.
//!
//! Run with: `cargo run --release --example mat_reuse`

use doflab::*;

fn main() {
    for b in ["1", "2/3", "1/2"] {
        let quality = CsitQuality::new(rint(0), parse_rat(b).unwrap()).unwrap();
        let plan = build_mat_reuse(&quality).unwrap();
        let sweep: Vec<SnrPoint> = [50.0, 65.0, 80.0]
            .iter()
            .map(|db| SnrPoint::from_db(*db).unwrap())
            .collect();
        let params = EvalParams {
            n_trials: 5_000,
            seed: 3,
            ..Default::default()
        };
        let report = evaluate_sweep(&plan, &sweep, &params).unwrap();
        let target = analytic_scheme_dof(Scheme::MatReuse, &quality, User::User1).unwrap();
        let verdict = reconcile(&report, &target.point, 0.05).unwrap();
        println!("beta = {b}: S = {}, {verdict}", fmt_rat(&plan.channel_use_charge));
    }
    println!();
    println!("the per-user DoF is 2/3 regardless of beta: the power backoff");
    println!("rescales the channel-use charge together with every symbol rate");

    let err = build_mat_reuse(&CsitQuality::new(rint(0), rint(0)).unwrap()).unwrap_err();
    println!("\nbeta = 0 is degenerate: {err}");
}
