//! Monte-Carlo rate evaluation of a transmit plan.
//!
//! The evaluator walks each receiver's SIC program over independent channel
//! draws. Every scalar stage forms a signal-to-interference-plus-noise ratio
//! through the *true* channels (so imperfect-precoding residuals show up as
//! interference), converts it to a Gaussian-input achievable rate, and credits
//! the symbol with `min(encoding rate, stage rate)`.
//!
//! Finite-SNR outage handling is this module's construction; the underlying
//! scheme analysis is asymptotic. A symbol is treated as decoded (and is then
//! subtracted exactly from later stages) when its stage rate reaches its
//! encoding rate less a fixed slack of `gate_margin_bits`; the cross-subband
//! combine stages only release their symbol when every interference piece and
//! prerequisite cleared that same test. Slopes of mean rate against `log2 P`
//! are unaffected by the slack, which exists so that deep per-draw fades do
//! not cascade through the whole decode chain at desk-scale SNRs.
//!
//! Trials are batched; batches run in parallel and are reduced in index
//! order, so results are bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    orth_complement, ols_slope, subband_variances, Cvec2, SnrPoint, SubbandState,
};
use crate::error::{Error, Result};
use crate::rational::{rat_f64, rat_serde, Rat};
use crate::scheme::{
    sic_program_for, DecodeStep, Precoder, Scheme, SchemePlan, SicProgram, SymbolId, SymbolOwner,
    User,
};

const BATCH: usize = 512;

/// Signal, interference and noise powers entering one decoding stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSinr {
    /// Desired symbol power through the true channel.
    pub signal_power: f64,
    /// Summed power of every treat-as-noise symbol through the true channel,
    /// including imperfect-precoding residuals.
    pub interference_power: f64,
    /// AWGN power; unity throughout.
    pub noise_power: f64,
}

/// Gaussian-input achievable rate `log2(1 + S / (N + I))` in bits per
/// complex symbol.
pub fn stage_rate(sinr: &StageSinr) -> f64 {
    (1.0 + sinr.signal_power / (sinr.noise_power + sinr.interference_power)).log2()
}

/// Evaluation knobs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvalParams {
    pub n_trials: usize,
    /// Master seed; trial `t` uses ChaCha stream `t` of this seed, so sweeps
    /// sharing a seed are coupled draw-for-draw across SNR points.
    pub seed: u64,
    /// Decode/subtraction slack in bits; see the module notes.
    pub gate_margin_bits: f64,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            n_trials: 10_000,
            seed: 0,
            gate_margin_bits: 8.0,
        }
    }
}

/// Mean credited rate of one symbol at one receiver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolRateRow {
    pub symbol: SymbolId,
    /// 1 or 2.
    pub receiver: u8,
    /// Mean of `min(encoding rate, stage rate)` in bits per complex symbol.
    pub mean_rate: f64,
    pub stderr: f64,
    /// Mean raw stage rate before crediting, handy for diagnostics.
    pub mean_stage_rate: f64,
}

/// Rates at a single SNR point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnrSlice {
    pub snr_db: f64,
    pub log2_p: f64,
    pub per_symbol: Vec<SymbolRateRow>,
    /// Sum of each user's own-symbol credited rates at their own receiver.
    pub user_total: [f64; 2],
    pub user_total_stderr: [f64; 2],
}

fn schema_version_one() -> u32 {
    1
}

/// Monte-Carlo averaged rates for one plan over an SNR sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateReport {
    #[serde(default = "schema_version_one")]
    pub schema_version: u32,
    pub scheme: Scheme,
    #[serde(with = "rat_serde")]
    pub alpha: Rat,
    #[serde(with = "rat_serde")]
    pub beta: Rat,
    /// Channel-use charge `S` used to normalize fitted prelogs into DoF.
    #[serde(with = "rat_serde")]
    pub s_charge: Rat,
    pub n_subbands: usize,
    pub common_owner: User,
    pub n_trials: usize,
    pub seed: u64,
    pub slices: Vec<SnrSlice>,
}

// Compiled form of a plan: index-based lookups for the hot loop.
struct Compiled {
    n_syms: usize,
    subband: Vec<usize>,
    prelog: Vec<f64>,
    precoder: Vec<Precoder>,
    owner: Vec<SymbolOwner>,
    steps: [Vec<CompiledStep>; 2],
    /// (symbol, receiver) pairs that appear in the programs, in plan order.
    reported: Vec<(usize, usize)>,
}

enum CompiledStep {
    Scalar {
        sym: usize,
    },
    CombineMu {
        pieces: Vec<usize>,
        requires: Vec<usize>,
        yields: usize,
    },
    JointZf {
        retransmission: usize,
        direct_subband: usize,
        overheard_subband: usize,
        csit_row: User,
        symbols: [usize; 2],
    },
}

fn compile(plan: &SchemePlan, program: &SicProgram) -> Result<Compiled> {
    let index = |id: &SymbolId| -> Result<usize> {
        plan.symbols
            .iter()
            .position(|s| &s.id == id)
            .ok_or_else(|| Error::UnknownSymbol(id.as_str().to_string()))
    };
    let mut steps: [Vec<CompiledStep>; 2] = [Vec::new(), Vec::new()];
    let mut seen: [Vec<bool>; 2] = [vec![false; plan.symbols.len()], vec![false; plan.symbols.len()]];
    for (rx, src) in [(0usize, &program.receiver1), (1usize, &program.receiver2)] {
        for step in src {
            let compiled = match step {
                DecodeStep::Scalar { symbol, .. } => CompiledStep::Scalar { sym: index(symbol)? },
                DecodeStep::CombineMu {
                    pieces,
                    requires,
                    yields,
                } => CompiledStep::CombineMu {
                    pieces: pieces.iter().map(&index).collect::<Result<_>>()?,
                    requires: requires.iter().map(&index).collect::<Result<_>>()?,
                    yields: index(yields)?,
                },
                DecodeStep::JointZf {
                    retransmission,
                    direct_subband,
                    overheard_subband,
                    csit_row,
                    symbols,
                } => CompiledStep::JointZf {
                    retransmission: index(retransmission)?,
                    direct_subband: *direct_subband,
                    overheard_subband: *overheard_subband,
                    csit_row: *csit_row,
                    symbols: [index(&symbols[0])?, index(&symbols[1])?],
                },
            };
            for id in step.decoded_symbols() {
                seen[rx][index(id)?] = true;
            }
            steps[rx].push(compiled);
        }
    }
    let mut reported = Vec::new();
    for (i, _) in plan.symbols.iter().enumerate() {
        for rx in 0..2 {
            if seen[rx][i] {
                reported.push((i, rx));
            }
        }
    }
    Ok(Compiled {
        n_syms: plan.symbols.len(),
        subband: plan.symbols.iter().map(|s| s.subband).collect(),
        prelog: plan.symbols.iter().map(|s| rat_f64(&s.rate_prelog)).collect(),
        precoder: plan.symbols.iter().map(|s| s.precoder).collect(),
        owner: plan.symbols.iter().map(|s| s.owner).collect(),
        steps,
        reported,
    })
}

fn precoder_vector(p: Precoder, state: &SubbandState) -> Result<Cvec2> {
    use num_complex::Complex64;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Ok(match p {
        Precoder::Antenna1 => Cvec2::new(one, zero),
        Precoder::Antenna2 => Cvec2::new(zero, one),
        Precoder::OrthogonalTo(User::User1) => orth_complement(&state.h_hat)?,
        Precoder::OrthogonalTo(User::User2) => orth_complement(&state.g_hat)?,
        Precoder::MatchedTo(User::User1) => state.h_hat.unit()?,
        Precoder::MatchedTo(User::User2) => state.g_hat.unit()?,
    })
}

// Per-trial walk output.
struct TrialOutcome {
    credit: [Vec<f64>; 2],
    stage: [Vec<f64>; 2],
    passed: [Vec<bool>; 2],
}

fn walk_trial(
    plan: &SchemePlan,
    compiled: &Compiled,
    snr: &SnrPoint,
    margin: f64,
    powers: &[f64],
    trial: u64,
    seed: u64,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut states = Vec::with_capacity(plan.n_subbands);
    for s in 1..=plan.n_subbands {
        let (sh, sg) = subband_variances(&plan.quality, snr, s);
        states.push(crate::channel::draw_subband_state(&mut rng, sh, sg));
    }
    let log2p = snr.log2_p();

    // |c^H w|^2 per (receiver, symbol).
    let mut gain = [vec![0.0; compiled.n_syms], vec![0.0; compiled.n_syms]];
    for i in 0..compiled.n_syms {
        let state = &states[compiled.subband[i] - 1];
        let w = precoder_vector(compiled.precoder[i], state)?;
        gain[0][i] = state.h.inner(&w).norm_sqr();
        gain[1][i] = state.g.inner(&w).norm_sqr();
    }

    let mut out = TrialOutcome {
        credit: [vec![0.0; compiled.n_syms], vec![0.0; compiled.n_syms]],
        stage: [vec![0.0; compiled.n_syms], vec![0.0; compiled.n_syms]],
        passed: [vec![false; compiled.n_syms], vec![false; compiled.n_syms]],
    };

    for rx in 0..2 {
        let mut removed = vec![false; compiled.n_syms];
        for step in &compiled.steps[rx] {
            match step {
                CompiledStep::Scalar { sym } => {
                    let sb = compiled.subband[*sym];
                    let mut interference = 0.0;
                    for j in 0..compiled.n_syms {
                        if j != *sym && compiled.subband[j] == sb && !removed[j] {
                            interference += powers[j] * gain[rx][j];
                        }
                    }
                    let sinr = StageSinr {
                        signal_power: powers[*sym] * gain[rx][*sym],
                        interference_power: interference,
                        noise_power: 1.0,
                    };
                    let rate = stage_rate(&sinr);
                    let enc = compiled.prelog[*sym] * log2p;
                    out.stage[rx][*sym] = rate;
                    out.credit[rx][*sym] = enc.min(rate);
                    let ok = rate >= (enc - margin).max(0.0);
                    out.passed[rx][*sym] = ok;
                    if ok {
                        removed[*sym] = true;
                    }
                }
                CompiledStep::CombineMu {
                    pieces,
                    requires,
                    yields,
                } => {
                    let gate = pieces.iter().chain(requires).all(|i| out.passed[rx][*i]);
                    let enc = compiled.prelog[*yields] * log2p;
                    out.stage[rx][*yields] = if gate { enc } else { 0.0 };
                    out.credit[rx][*yields] = if gate { enc } else { 0.0 };
                    out.passed[rx][*yields] = gate;
                    if gate {
                        removed[*yields] = true;
                    }
                }
                CompiledStep::JointZf {
                    retransmission,
                    direct_subband,
                    overheard_subband,
                    csit_row,
                    symbols,
                } => {
                    let gate = out.passed[rx][*retransmission];
                    let direct = &states[*direct_subband - 1];
                    let overheard = &states[*overheard_subband - 1];
                    let rx_true = if rx == 0 { &direct.h } else { &direct.g };
                    let row2 = match csit_row {
                        User::User1 => &direct.h_hat,
                        User::User2 => &direct.g_hat,
                    };
                    // Residual noise in the rebuilt observation: the
                    // receiver's own estimation error applied to whatever
                    // was sent in the overheard subband.
                    let err = if rx == 0 { &overheard.h_err } else { &overheard.g_err };
                    let mut resid = 0.0;
                    for j in 0..compiled.n_syms {
                        if compiled.subband[j] == *overheard_subband {
                            let w = precoder_vector(compiled.precoder[j], overheard)?;
                            resid += err.inner(&w).norm_sqr() * powers[j];
                        }
                    }
                    // Leftover interference in the direct observation.
                    let mut direct_noise = 1.0;
                    for j in 0..compiled.n_syms {
                        if compiled.subband[j] == *direct_subband
                            && !symbols.contains(&j)
                            && !removed[j]
                        {
                            direct_noise += powers[j] * gain[rx][j];
                        }
                    }
                    let n = [direct_noise, 1.0 + resid];

                    // Rows act on the two antenna-mapped symbols.
                    let a = [
                        [rx_true.0[0].conj(), rx_true.0[1].conj()],
                        [row2.0[0].conj(), row2.0[1].conj()],
                    ];
                    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                    let b = if det.norm_sqr() > 0.0 {
                        Some([
                            [a[1][1] / det, -a[0][1] / det],
                            [-a[1][0] / det, a[0][0] / det],
                        ])
                    } else {
                        None
                    };
                    for (k, symc) in symbols.iter().enumerate() {
                        let enc = compiled.prelog[*symc] * log2p;
                        let rate = match (&b, gate) {
                            (Some(b), true) => {
                                let noise =
                                    b[k][0].norm_sqr() * n[0] + b[k][1].norm_sqr() * n[1];
                                (1.0 + powers[*symc] / noise).log2()
                            }
                            _ => 0.0,
                        };
                        out.stage[rx][*symc] = rate;
                        out.credit[rx][*symc] = enc.min(rate);
                        let ok = gate && rate >= (enc - margin).max(0.0);
                        out.passed[rx][*symc] = ok;
                        if ok {
                            removed[*symc] = true;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone)]
struct Accum {
    sym_sum: Vec<[f64; 2]>,
    sym_sumsq: Vec<[f64; 2]>,
    stage_sum: Vec<[f64; 2]>,
    tot_sum: [f64; 2],
    tot_sumsq: [f64; 2],
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            sym_sum: vec![[0.0; 2]; n],
            sym_sumsq: vec![[0.0; 2]; n],
            stage_sum: vec![[0.0; 2]; n],
            tot_sum: [0.0; 2],
            tot_sumsq: [0.0; 2],
        }
    }

    fn absorb(&mut self, compiled: &Compiled, owner_idx: &[Option<usize>], out: &TrialOutcome) {
        let mut totals = [0.0; 2];
        for i in 0..compiled.n_syms {
            for rx in 0..2 {
                let c = out.credit[rx][i];
                self.sym_sum[i][rx] += c;
                self.sym_sumsq[i][rx] += c * c;
                self.stage_sum[i][rx] += out.stage[rx][i];
            }
            if let Some(u) = owner_idx[i] {
                totals[u] += out.credit[u][i];
            }
        }
        for u in 0..2 {
            self.tot_sum[u] += totals[u];
            self.tot_sumsq[u] += totals[u] * totals[u];
        }
    }

    fn merge(&mut self, other: &Accum) {
        for i in 0..self.sym_sum.len() {
            for rx in 0..2 {
                self.sym_sum[i][rx] += other.sym_sum[i][rx];
                self.sym_sumsq[i][rx] += other.sym_sumsq[i][rx];
                self.stage_sum[i][rx] += other.stage_sum[i][rx];
            }
        }
        for u in 0..2 {
            self.tot_sum[u] += other.tot_sum[u];
            self.tot_sumsq[u] += other.tot_sumsq[u];
        }
    }
}

fn credited_user(plan: &SchemePlan, owner: SymbolOwner) -> Option<usize> {
    match owner {
        SymbolOwner::User1 => Some(0),
        SymbolOwner::User2 => Some(1),
        SymbolOwner::Common => Some(plan.common_owner.index()),
        SymbolOwner::InterferencePiece => None,
    }
}

fn run_trials(
    plan: &SchemePlan,
    compiled: &Compiled,
    snr: &SnrPoint,
    params: &EvalParams,
) -> Result<Accum> {
    if params.n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let powers: Vec<f64> = plan
        .symbols
        .iter()
        .map(|s| s.power.value(snr.p_linear))
        .collect();
    let owner_idx: Vec<Option<usize>> = compiled
        .owner
        .iter()
        .map(|o| credited_user(plan, *o))
        .collect();
    let n_batches = params.n_trials.div_ceil(BATCH);
    let partials: Vec<Result<Accum>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * BATCH;
            let hi = ((batch + 1) * BATCH).min(params.n_trials);
            let mut acc = Accum::new(compiled.n_syms);
            for trial in lo..hi {
                let out = walk_trial(
                    plan,
                    compiled,
                    snr,
                    params.gate_margin_bits,
                    &powers,
                    trial as u64,
                    params.seed,
                )?;
                acc.absorb(compiled, &owner_idx, &out);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Accum::new(compiled.n_syms);
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

fn slice_from_accum(
    plan: &SchemePlan,
    compiled: &Compiled,
    snr: &SnrPoint,
    n_trials: usize,
    acc: &Accum,
) -> SnrSlice {
    let n = n_trials as f64;
    let se = |sum: f64, sumsq: f64| {
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(0.0);
        (var / n).sqrt()
    };
    let per_symbol = compiled
        .reported
        .iter()
        .map(|(i, rx)| SymbolRateRow {
            symbol: plan.symbols[*i].id.clone(),
            receiver: (*rx + 1) as u8,
            mean_rate: acc.sym_sum[*i][*rx] / n,
            stderr: se(acc.sym_sum[*i][*rx], acc.sym_sumsq[*i][*rx]),
            mean_stage_rate: acc.stage_sum[*i][*rx] / n,
        })
        .collect();
    SnrSlice {
        snr_db: snr.p_db,
        log2_p: snr.log2_p(),
        per_symbol,
        user_total: [acc.tot_sum[0] / n, acc.tot_sum[1] / n],
        user_total_stderr: [
            se(acc.tot_sum[0], acc.tot_sumsq[0]),
            se(acc.tot_sum[1], acc.tot_sumsq[1]),
        ],
    }
}

/// Evaluates one plan at one SNR point with the plan's own SIC program.
pub fn evaluate_plan(plan: &SchemePlan, snr: &SnrPoint, params: &EvalParams) -> Result<SnrSlice> {
    let program = sic_program_for(plan)?;
    evaluate_with_program(plan, &program, snr, params)
}

/// Same as [`evaluate_plan`] but with a caller-supplied program.
pub fn evaluate_with_program(
    plan: &SchemePlan,
    program: &SicProgram,
    snr: &SnrPoint,
    params: &EvalParams,
) -> Result<SnrSlice> {
    plan.validate()?;
    let compiled = compile(plan, program)?;
    let acc = run_trials(plan, &compiled, snr, params)?;
    Ok(slice_from_accum(plan, &compiled, snr, params.n_trials, &acc))
}

/// Sweeps an increasing list of SNR points with common random numbers.
pub fn evaluate_sweep(plan: &SchemePlan, snrs: &[SnrPoint], params: &EvalParams) -> Result<RateReport> {
    let program = sic_program_for(plan)?;
    evaluate_sweep_with_program(plan, &program, snrs, params)
}

pub fn evaluate_sweep_with_program(
    plan: &SchemePlan,
    program: &SicProgram,
    snrs: &[SnrPoint],
    params: &EvalParams,
) -> Result<RateReport> {
    let slices = snrs
        .iter()
        .map(|snr| evaluate_with_program(plan, program, snr, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport {
        schema_version: 1,
        scheme: plan.scheme,
        alpha: plan.quality.alpha().clone(),
        beta: plan.quality.beta().clone(),
        s_charge: plan.channel_use_charge.clone(),
        n_subbands: plan.n_subbands,
        common_owner: plan.common_owner,
        n_trials: params.n_trials,
        seed: params.seed,
        slices,
    })
}

/// Fraction of draws in which `symbol`'s stage rate supports its encoding
/// rate at every receiver whose program decodes it. Unlike the internal
/// decode gate, no slack is applied here.
pub fn decode_success_rate(
    plan: &SchemePlan,
    snr: &SnrPoint,
    params: &EvalParams,
    symbol: &SymbolId,
) -> Result<f64> {
    let program = sic_program_for(plan)?;
    let compiled = compile(plan, &program)?;
    let target = plan
        .symbols
        .iter()
        .position(|s| &s.id == symbol)
        .ok_or_else(|| Error::UnknownSymbol(symbol.as_str().to_string()))?;
    let receivers: Vec<usize> = (0..2)
        .filter(|rx| compiled.reported.contains(&(target, *rx)))
        .collect();
    if receivers.is_empty() {
        return Err(Error::UnknownSymbol(symbol.as_str().to_string()));
    }
    let powers: Vec<f64> = plan
        .symbols
        .iter()
        .map(|s| s.power.value(snr.p_linear))
        .collect();
    let enc = rat_f64(&plan.symbols[target].rate_prelog) * snr.log2_p();
    let n_batches = params.n_trials.div_ceil(BATCH);
    let partials: Vec<Result<usize>> = (0..n_batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * BATCH;
            let hi = ((batch + 1) * BATCH).min(params.n_trials);
            let mut hits = 0usize;
            for trial in lo..hi {
                let out = walk_trial(
                    plan,
                    &compiled,
                    snr,
                    params.gate_margin_bits,
                    &powers,
                    trial as u64,
                    params.seed,
                )?;
                if receivers.iter().all(|rx| out.stage[*rx][target] >= enc) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let mut hits = 0usize;
    for p in partials {
        hits += p?;
    }
    Ok(hits as f64 / params.n_trials as f64)
}

/// OLS slopes of the per-user total rates against `log2 P`.
pub fn fit_user_slopes(report: &RateReport) -> Result<[f64; 2]> {
    if report.slices.len() < 2 {
        return Err(Error::TooFewSnrPoints(report.slices.len()));
    }
    let mut slopes = [0.0; 2];
    for (u, slope) in slopes.iter_mut().enumerate() {
        let pts: Vec<(f64, f64)> = report
            .slices
            .iter()
            .map(|s| (s.log2_p, s.user_total[u]))
            .collect();
        *slope = ols_slope(&pts);
    }
    Ok(slopes)
}

/// Writes the fixed-column rate CSV:
/// `scheme,alpha,beta,snr_db,symbol,receiver,mean_rate,stderr`.
pub fn write_rates_csv<W: std::io::Write>(report: &RateReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["scheme", "alpha", "beta", "snr_db", "symbol", "receiver", "mean_rate", "stderr"])?;
    let alpha = crate::rational::fmt_rat(&report.alpha);
    let beta = crate::rational::fmt_rat(&report.beta);
    for slice in &report.slices {
        for row in &slice.per_symbol {
            w.write_record([
                report.scheme.label(),
                &alpha,
                &beta,
                &format!("{}", slice.snr_db),
                row.symbol.as_str(),
                &row.receiver.to_string(),
                &format!("{:.9e}", row.mean_rate),
                &format!("{:.9e}", row.stderr),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
