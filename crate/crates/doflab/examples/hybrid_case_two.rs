//! Hybrid scheme, case II: `beta > (2 + alpha) / 3`.
//!
//! The interference pieces no longer fit beside a full-rate block, so the
//! block is repeated `L = (1 - alpha) / (3*beta - alpha - 2)` times and a
//! final subband stacks the third pieces `mu3_1 .. mu3_L` in descending
//! power layers over one last ZF pair. Both users reach `(2 + alpha) / 3`.
//!
//! Run with: `cargo run --release --example hybrid_case_two`

use doflab::*;

fn main() {
    // Block counts only exist for qualities where L is a positive integer.
    let bad = CsitQuality::new(rint(0), parse_rat("4/5").unwrap()).unwrap();
    match case_ii_block_count(&bad) {
        Err(e) => println!("(0, 4/5) rejected: {e}\n"),
        Ok(_) => unreachable!(),
    }

    let quality = CsitQuality::new(rint(0), parse_rat("3/4").unwrap()).unwrap();
    let l = case_ii_block_count(&quality).unwrap();
    let plan = build_hybrid_case_ii(&quality).unwrap();
    println!(
        "(0, 3/4): L = {l}, {} subbands, S = {}",
        plan.n_subbands,
        fmt_rat(&plan.channel_use_charge)
    );

    println!("\nsubband {} power layering:", plan.n_subbands);
    for sym in plan.symbols.iter().filter(|s| s.subband == plan.n_subbands) {
        let lo = sym.power.lo.as_ref();
        println!(
            "  {:>6}: {}*P^{}{}",
            sym.id.as_str(),
            fmt_rat(&sym.power.hi.scale),
            fmt_rat(&sym.power.hi.exponent),
            lo.map(|t| format!(" - {}*P^{}", fmt_rat(&t.scale), fmt_rat(&t.exponent)))
                .unwrap_or_default()
        );
    }
    println!(
        "layers are disjoint and telescope to P: {}",
        plan.subband_spends_full_power(plan.n_subbands)
    );

    let sweep: Vec<SnrPoint> = [50.0, 65.0, 80.0]
        .iter()
        .map(|db| SnrPoint::from_db(*db).unwrap())
        .collect();
    let params = EvalParams {
        n_trials: 5_000,
        seed: 6,
        ..Default::default()
    };
    let report = evaluate_sweep(&plan, &sweep, &params).unwrap();
    let target = analytic_scheme_dof(Scheme::HybridCaseII, &quality, User::User1).unwrap();
    println!("\nanalytic DoF: {}", target.point);
    let verdict = reconcile(&report, &target.point, 0.05).unwrap();
    println!("{verdict}");
}
