//! Hybrid scheme, case I: `beta <= (2 + alpha) / 3`.
//!
//! One block over two subbands. Each subband stacks, from the top of the
//! power budget down: a common message, one quantized overheard-interference
//! piece, a ZF'd private symbol, a matched private symbol (deliberately
//! overheard), and a cross-ZF'd symbol for the other user. The four-stage
//! SIC program decodes common, then the pieces, then own symbols, then uses
//! the reassembled interference to strip the remaining cross symbols.
//!
//! Run with: `cargo run --release --example hybrid_case_one`

use doflab::*;

fn main() {
    let quality = CsitQuality::new(parse_rat("1/5").unwrap(), parse_rat("1/2").unwrap()).unwrap();
    let plan = build_hybrid_case_i(&quality, User::User1).unwrap();

    println!("power/rate ledger at (alpha, beta) = (1/5, 1/2):");
    println!("{:>6} {:>8} {:>22} {:>8}", "symbol", "subband", "power", "prelog");
    for sym in &plan.symbols {
        let power = match &sym.power.lo {
            Some(lo) => format!(
                "{}*P^{} - {}*P^{}",
                fmt_rat(&sym.power.hi.scale),
                fmt_rat(&sym.power.hi.exponent),
                fmt_rat(&lo.scale),
                fmt_rat(&lo.exponent)
            ),
            None => format!(
                "{}*P^{}",
                fmt_rat(&sym.power.hi.scale),
                fmt_rat(&sym.power.hi.exponent)
            ),
        };
        println!(
            "{:>6} {:>8} {:>22} {:>8}",
            sym.id.as_str(),
            sym.subband,
            power,
            fmt_rat(&sym.rate_prelog)
        );
    }
    for s in 1..=2 {
        println!("subband {s} telescopes to exactly P: {}", plan.subband_spends_full_power(s));
    }

    let program = sic_program_for(&plan).unwrap();
    println!("\nreceiver 1 decode order:");
    for step in &program.receiver1 {
        match step {
            DecodeStep::Scalar { symbol, .. } => println!("  decode {symbol}"),
            DecodeStep::CombineMu { pieces, requires, yields } => println!(
                "  combine {:?} (knowing {:?}) -> {yields}",
                pieces.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
                requires.iter().map(|p| p.as_str()).collect::<Vec<_>>()
            ),
            DecodeStep::JointZf { symbols, .. } => println!("  joint ZF {symbols:?}"),
        }
    }

    let sweep: Vec<SnrPoint> = [50.0, 65.0, 80.0]
        .iter()
        .map(|db| SnrPoint::from_db(*db).unwrap())
        .collect();
    let params = EvalParams {
        n_trials: 10_000,
        seed: 5,
        ..Default::default()
    };
    let report = evaluate_sweep(&plan, &sweep, &params).unwrap();
    let target = analytic_scheme_dof(Scheme::HybridCaseI, &quality, User::User1).unwrap();
    println!("\nanalytic DoF (common to user 1): {}", target.point);
    let verdict = reconcile(&report, &target.point, 0.05).unwrap();
    println!("{verdict}");
}
