//! Transmission plan construction.
//!
//! Each builder turns a CSIT quality pair into a complete transmit
//! specification: which symbols go into which subband, their exact power
//! ledger (held in rational arithmetic so telescoping budget identities stay
//! exact), their encoding pre-log rates and precoder recipes, plus the
//! matching successive-interference-cancellation program for both receivers.
//!
//! Five schemes are covered:
//! * `Zfbf`: zero-forcing pairs per subband at reduced power.
//! * `MatReuse`: per-user symbol vectors plus a retransmitted interference
//!   sum in a third subband, all backed off to `P^beta`.
//! * `HybridCaseI`: common message, two overheard-interference pieces and
//!   a ZF/matched private mix per subband (valid for `beta <= (2+alpha)/3`).
//! * `HybridCaseII`: `L` repetitions of the hybrid block plus one extra
//!   subband that stacks the third interference pieces in descending power
//!   layers (valid for `beta > (2+alpha)/3` with integer `L`).
//! * `ScZf`: superposition-coded common message over a ZF pair.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::CsitQuality;
use crate::error::{Error, Result};
use crate::rational::{fmt_rat, rat, rat_serde, rint, Rat};

/// Receiver identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    User1,
    User2,
}

impl User {
    pub fn index(self) -> usize {
        match self {
            User::User1 => 0,
            User::User2 => 1,
        }
    }

    pub fn other(self) -> User {
        match self {
            User::User1 => User::User2,
            User::User2 => User::User1,
        }
    }
}

impl fmt::Display for User {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            User::User1 => write!(f, "user1"),
            User::User2 => write!(f, "user2"),
        }
    }
}

/// Who a symbol's payload belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolOwner {
    User1,
    User2,
    /// Decoded by both receivers; credited to the plan's `common_owner`.
    Common,
    /// Quantized overheard-interference piece; pure overhead, credited to
    /// nobody, consumed by the cross-subband decode stages.
    InterferencePiece,
}

/// How a symbol is mapped onto the two transmit antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precoder {
    /// Sent on antenna 1 only.
    Antenna1,
    /// Sent on antenna 2 only.
    Antenna2,
    /// Unit vector orthogonal to the named user's CSIT in the symbol's
    /// subband (zero-forcing away from that user).
    OrthogonalTo(User),
    /// Unit vector along the named user's CSIT in the symbol's subband
    /// (deliberately aligned so that user overhears it).
    MatchedTo(User),
}

/// `scale * P^exponent` with exact rational scale and exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerTerm {
    #[serde(with = "rat_serde")]
    pub scale: Rat,
    #[serde(with = "rat_serde")]
    pub exponent: Rat,
}

impl PowerTerm {
    pub fn new(scale: Rat, exponent: Rat) -> Self {
        PowerTerm { scale, exponent }
    }

    pub fn value(&self, p_linear: f64) -> f64 {
        crate::rational::rat_f64(&self.scale) * p_linear.powf(crate::rational::rat_f64(&self.exponent))
    }
}

/// Symbol power `hi - lo` in the exponent ledger, e.g. `P - P^(r+beta)` or
/// `P^beta / 2`. Fractional scales are carried exactly so per-subband budgets
/// telescope symbolically instead of in floating point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolPower {
    pub hi: PowerTerm,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lo: Option<PowerTerm>,
}

impl SymbolPower {
    pub fn term(scale: Rat, exponent: Rat) -> Self {
        SymbolPower {
            hi: PowerTerm::new(scale, exponent),
            lo: None,
        }
    }

    pub fn band(hi: PowerTerm, lo: PowerTerm) -> Self {
        SymbolPower { hi, lo: Some(lo) }
    }

    pub fn value(&self, p_linear: f64) -> f64 {
        let v = self.hi.value(p_linear) - self.lo.as_ref().map_or(0.0, |t| t.value(p_linear));
        v.max(0.0)
    }

    /// True when the ledger cancels identically (degenerate symbol).
    pub fn is_zero(&self) -> bool {
        if self.hi.scale.is_zero() {
            return self.lo.as_ref().is_none_or(|t| t.scale.is_zero());
        }
        match &self.lo {
            Some(lo) => lo.scale == self.hi.scale && lo.exponent == self.hi.exponent,
            None => false,
        }
    }

    fn accumulate(&self, ledger: &mut BTreeMap<Rat, Rat>) {
        let e = ledger.entry(self.hi.exponent.clone()).or_insert_with(Rat::zero);
        *e += &self.hi.scale;
        if let Some(lo) = &self.lo {
            let e = ledger.entry(lo.exponent.clone()).or_insert_with(Rat::zero);
            *e -= &lo.scale;
        }
    }
}

/// Symbol name, unique within a plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolId(pub String);

impl SymbolId {
    pub fn new(s: impl Into<String>) -> Self {
        SymbolId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One transmitted symbol: placement, power, encoding rate, precoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub id: SymbolId,
    pub owner: SymbolOwner,
    /// 1-based subband index.
    pub subband: usize,
    pub power: SymbolPower,
    /// Encoding rate is `rate_prelog * log2(P)` bits per complex symbol.
    #[serde(with = "rat_serde")]
    pub rate_prelog: Rat,
    pub precoder: Precoder,
}

/// Scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    Zfbf,
    MatReuse,
    HybridCaseI,
    HybridCaseII,
    ScZf,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Zfbf => "zfbf",
            Scheme::MatReuse => "mat-reuse",
            Scheme::HybridCaseI => "hybrid-i",
            Scheme::HybridCaseII => "hybrid-ii",
            Scheme::ScZf => "sc-zf",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Complete transmit specification for one scheme at one quality pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemePlan {
    pub scheme: Scheme,
    pub quality: CsitQuality,
    pub symbols: Vec<SymbolSpec>,
    pub n_subbands: usize,
    /// Channel-use charge `S`: per subband, the peak transmitted power
    /// exponent; summed over occupied subbands. Reproduces the denominators
    /// `2*beta` (ZFBF), `3*beta` (MAT reuse), `2` (case I, SC+ZF) and
    /// `2L+1` (case II) under one rule.
    #[serde(with = "rat_serde")]
    pub channel_use_charge: Rat,
    /// Receiver credited with the common messages, when any exist.
    pub common_owner: User,
    /// Hybrid case II block count `L`; zero for every other scheme.
    pub case_ii_blocks: usize,
}

impl SchemePlan {
    pub fn symbol(&self, id: &SymbolId) -> Option<&SymbolSpec> {
        self.symbols.iter().find(|s| &s.id == id)
    }

    pub fn subband_symbols(&self, subband: usize) -> impl Iterator<Item = &SymbolSpec> {
        self.symbols.iter().filter(move |s| s.subband == subband)
    }

    /// Net power ledger of one subband: exponent -> summed rational scale,
    /// zero entries dropped. A full-power subband reduces to `{1: 1}`.
    pub fn power_ledger(&self, subband: usize) -> BTreeMap<Rat, Rat> {
        let mut ledger = BTreeMap::new();
        for sym in self.subband_symbols(subband) {
            sym.power.accumulate(&mut ledger);
        }
        ledger.retain(|_, v| !v.is_zero());
        ledger
    }

    /// True when the subband ledger telescopes to exactly `P`.
    pub fn subband_spends_full_power(&self, subband: usize) -> bool {
        let ledger = self.power_ledger(subband);
        ledger.len() == 1 && ledger.get(&rint(1)).is_some_and(|s| s.is_one())
    }

    /// Peak transmitted exponent of a subband, ignoring degenerate symbols.
    pub fn subband_peak_exponent(&self, subband: usize) -> Rat {
        self.subband_symbols(subband)
            .filter(|s| !s.power.is_zero())
            .map(|s| s.power.hi.exponent.clone())
            .max()
            .unwrap_or_else(Rat::zero)
    }

    /// Channel-use charge recomputed from the ledger; equals the stored
    /// `channel_use_charge` for every builder output.
    pub fn charge_from_ledger(&self) -> Rat {
        (1..=self.n_subbands).map(|s| self.subband_peak_exponent(s)).sum()
    }

    /// Total encoding prelog credited to a user: own symbols plus common
    /// messages when that user owns them. Interference pieces never count.
    pub fn user_prelog_total(&self, user: User) -> Rat {
        self.symbols
            .iter()
            .filter(|s| match s.owner {
                SymbolOwner::User1 => user == User::User1,
                SymbolOwner::User2 => user == User::User2,
                SymbolOwner::Common => self.common_owner == user,
                SymbolOwner::InterferencePiece => false,
            })
            .map(|s| s.rate_prelog.clone())
            .sum()
    }

    /// Structural checks shared by all builders: unique ids, exponents in
    /// [0, 1], prelogs in [0, 1], non-negative net ledger coefficients whose
    /// total never exceeds the per-subband budget.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let one = rint(1);
        for sym in &self.symbols {
            if !seen.insert(sym.id.clone()) {
                return Err(Error::SchemeQuality(format!("duplicate symbol id {}", sym.id)));
            }
            if sym.subband == 0 || sym.subband > self.n_subbands {
                return Err(Error::SchemeQuality(format!(
                    "symbol {} placed in subband {} of {}",
                    sym.id, sym.subband, self.n_subbands
                )));
            }
            if sym.rate_prelog.is_negative() || sym.rate_prelog > one {
                return Err(Error::SchemeQuality(format!(
                    "symbol {} prelog {} outside [0, 1]",
                    sym.id,
                    fmt_rat(&sym.rate_prelog)
                )));
            }
            let hi = &sym.power.hi.exponent;
            if hi.is_negative() || *hi > one {
                return Err(Error::SchemeQuality(format!(
                    "symbol {} power exponent {} outside [0, 1]",
                    sym.id,
                    fmt_rat(hi)
                )));
            }
            if let Some(lo) = &sym.power.lo {
                if lo.exponent > *hi {
                    return Err(Error::SchemeQuality(format!(
                        "symbol {} power band inverted",
                        sym.id
                    )));
                }
            }
        }
        for s in 1..=self.n_subbands {
            let ledger = self.power_ledger(s);
            let mut total = Rat::zero();
            for (exp, scale) in &ledger {
                if scale.is_negative() {
                    return Err(Error::SchemeQuality(format!(
                        "subband {s} ledger has negative net coefficient at exponent {}",
                        fmt_rat(exp)
                    )));
                }
                total += scale;
            }
            if total > one {
                return Err(Error::SchemeQuality(format!(
                    "subband {s} ledger exceeds the power budget"
                )));
            }
        }
        Ok(())
    }
}

fn threshold(quality: &CsitQuality) -> Rat {
    (rint(2) + quality.alpha()) / rint(3)
}

/// `r_mu3 = 3*beta - alpha - 2`, positive strictly above the case threshold.
fn third_piece_prelog(quality: &CsitQuality) -> Rat {
    rint(3) * quality.beta() - quality.alpha() - rint(2)
}

/// Case II block count `L = (1 - alpha) / (3*beta - alpha - 2)`.
///
/// Errors unless `L` is a positive integer; the message lists the nearest
/// qualities (same alpha) that do yield integer block counts.
pub fn case_ii_block_count(quality: &CsitQuality) -> Result<usize> {
    let thr = threshold(quality);
    if *quality.beta() <= thr {
        return Err(Error::CaseIIThreshold {
            alpha: fmt_rat(quality.alpha()),
            beta: fmt_rat(quality.beta()),
        });
    }
    let r3 = third_piece_prelog(quality);
    let one_minus_alpha = rint(1) - quality.alpha();
    let l = &one_minus_alpha / &r3;
    if l.is_integer() && l >= rint(1) {
        return Ok(l.to_integer().try_into().unwrap_or(usize::MAX));
    }
    // beta(L) = (2 + alpha)/3 + (1 - alpha)/(3L) restores integer L.
    let lf = crate::rational::rat_f64(&l);
    let mut cands: Vec<i64> = vec![lf.floor() as i64, lf.ceil() as i64];
    cands.retain(|c| *c >= 1);
    cands.dedup();
    let suggestions = cands
        .iter()
        .map(|c| {
            let beta = &thr + &one_minus_alpha / rint(3 * c);
            format!("(alpha={}, beta={}, L={c})", fmt_rat(quality.alpha()), fmt_rat(&beta))
        })
        .collect::<Vec<_>>()
        .join(", ");
    Err(Error::NonIntegerBlocks {
        l: fmt_rat(&l),
        suggestions,
    })
}

fn half() -> Rat {
    rat(1, 2)
}

fn sym(
    id: impl Into<String>,
    owner: SymbolOwner,
    subband: usize,
    power: SymbolPower,
    prelog: Rat,
    precoder: Precoder,
) -> SymbolSpec {
    SymbolSpec {
        id: SymbolId::new(id),
        owner,
        subband,
        power,
        rate_prelog: prelog,
        precoder,
    }
}

/// Zero-forcing pairs in two subbands.
///
/// Subband 1 sends `u1` at `P^alpha/2` and `v1` at `P^beta/2`; subband 2
/// mirrors with the powers switched so each symbol's interference stays at
/// noise level under its victim's CSIT quality. Charge is `2*beta`.
pub fn build_zfbf(quality: &CsitQuality) -> SchemePlan {
    let a = quality.alpha().clone();
    let b = quality.beta().clone();
    let symbols = vec![
        sym("u1", SymbolOwner::User1, 1, SymbolPower::term(half(), a.clone()), a.clone(), Precoder::OrthogonalTo(User::User2)),
        sym("v1", SymbolOwner::User2, 1, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::OrthogonalTo(User::User1)),
        sym("u2", SymbolOwner::User1, 2, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::OrthogonalTo(User::User2)),
        sym("v2", SymbolOwner::User2, 2, SymbolPower::term(half(), a.clone()), a.clone(), Precoder::OrthogonalTo(User::User1)),
    ];
    let plan = SchemePlan {
        scheme: Scheme::Zfbf,
        quality: quality.clone(),
        symbols,
        n_subbands: 2,
        channel_use_charge: rint(2) * &b,
        common_owner: User::User1,
        case_ii_blocks: 0,
    };
    debug_assert!(plan.validate().is_ok());
    plan
}

/// Per-user symbol vectors at `P^beta` plus a retransmitted interference sum.
///
/// Subband 1 carries user 2's two symbols, subband 2 user 1's, one per
/// antenna; subband 3 resends the CSIT-reconstructed sum of the overheard
/// interferences on antenna 1. Charge is `3*beta`; each private symbol is
/// encoded at prelog `beta`.
pub fn build_mat_reuse(quality: &CsitQuality) -> Result<SchemePlan> {
    let b = quality.beta().clone();
    if b.is_zero() {
        return Err(Error::DegenerateScheme {
            scheme: "mat-reuse",
            reason: "beta = 0 leaves zero channel use; the plan would be empty".into(),
        });
    }
    let symbols = vec![
        sym("v1_1", SymbolOwner::User2, 1, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::Antenna1),
        sym("v1_2", SymbolOwner::User2, 1, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::Antenna2),
        sym("u2_1", SymbolOwner::User1, 2, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::Antenna1),
        sym("u2_2", SymbolOwner::User1, 2, SymbolPower::term(half(), b.clone()), b.clone(), Precoder::Antenna2),
        sym("eta3", SymbolOwner::InterferencePiece, 3, SymbolPower::term(rint(1), b.clone()), b.clone(), Precoder::Antenna1),
    ];
    let plan = SchemePlan {
        scheme: Scheme::MatReuse,
        quality: quality.clone(),
        symbols,
        n_subbands: 3,
        channel_use_charge: rint(3) * &b,
        common_owner: User::User1,
        case_ii_blocks: 0,
    };
    plan.validate()?;
    Ok(plan)
}

/// Superposition-coded common message over a ZF pair, in both subbands.
///
/// Per subband: common at `P - P^alpha` (prelog `1 - alpha`) plus `u`, `v`
/// at `P^alpha/2` (prelog `alpha`). Achieves `(1, alpha)` with the common
/// stream credited to user 1, `(alpha, 1)` with user 2.
pub fn build_sc_zf(quality: &CsitQuality, common_owner: User) -> SchemePlan {
    let a = quality.alpha().clone();
    let mut symbols = Vec::new();
    for s in 1..=2usize {
        symbols.push(sym(
            format!("xc{s}"),
            SymbolOwner::Common,
            s,
            SymbolPower::band(PowerTerm::new(rint(1), rint(1)), PowerTerm::new(rint(1), a.clone())),
            rint(1) - &a,
            Precoder::Antenna1,
        ));
        symbols.push(sym(
            format!("u{s}"),
            SymbolOwner::User1,
            s,
            SymbolPower::term(half(), a.clone()),
            a.clone(),
            Precoder::OrthogonalTo(User::User2),
        ));
        symbols.push(sym(
            format!("v{s}"),
            SymbolOwner::User2,
            s,
            SymbolPower::term(half(), a.clone()),
            a.clone(),
            Precoder::OrthogonalTo(User::User1),
        ));
    }
    let plan = SchemePlan {
        scheme: Scheme::ScZf,
        quality: quality.clone(),
        symbols,
        n_subbands: 2,
        channel_use_charge: rint(2),
        common_owner,
        case_ii_blocks: 0,
    };
    debug_assert!(plan.validate().is_ok());
    plan
}

/// Appends one hybrid transmission block (subbands `odd`, `odd + 1`).
///
/// `r_mu` is the per-piece prelog of the two quantized interference pieces;
/// common messages are stacked on top only when `with_common` is set (case I).
fn push_hybrid_block(
    symbols: &mut Vec<SymbolSpec>,
    quality: &CsitQuality,
    odd: usize,
    r_mu: &Rat,
    with_common: bool,
) {
    let a = quality.alpha().clone();
    let b = quality.beta().clone();
    let even = odd + 1;
    let mu_hi = r_mu + &b;

    if with_common {
        for s in [odd, even] {
            symbols.push(sym(
                format!("xc{s}"),
                SymbolOwner::Common,
                s,
                SymbolPower::band(PowerTerm::new(rint(1), rint(1)), PowerTerm::new(rint(1), mu_hi.clone())),
                rint(1) - r_mu - &b,
                Precoder::Antenna1,
            ));
        }
    }
    for s in [odd, even] {
        symbols.push(sym(
            format!("mu{s}"),
            SymbolOwner::InterferencePiece,
            s,
            SymbolPower::band(PowerTerm::new(rint(1), mu_hi.clone()), PowerTerm::new(rint(1), b.clone())),
            r_mu.clone(),
            Precoder::Antenna1,
        ));
    }
    // Odd subband: two private symbols for user 2, one for user 1.
    symbols.push(sym(
        format!("v{odd}_1"),
        SymbolOwner::User2,
        odd,
        SymbolPower::term(half(), b.clone()),
        b.clone(),
        Precoder::OrthogonalTo(User::User1),
    ));
    symbols.push(sym(
        format!("v{odd}_2"),
        SymbolOwner::User2,
        odd,
        SymbolPower::band(PowerTerm::new(half(), b.clone()), PowerTerm::new(half(), a.clone())),
        &b - &a,
        Precoder::MatchedTo(User::User1),
    ));
    symbols.push(sym(
        format!("u{odd}"),
        SymbolOwner::User1,
        odd,
        SymbolPower::term(half(), a.clone()),
        a.clone(),
        Precoder::OrthogonalTo(User::User2),
    ));
    // Even subband mirrors the roles.
    symbols.push(sym(
        format!("u{even}_1"),
        SymbolOwner::User1,
        even,
        SymbolPower::term(half(), b.clone()),
        b.clone(),
        Precoder::OrthogonalTo(User::User2),
    ));
    symbols.push(sym(
        format!("u{even}_2"),
        SymbolOwner::User1,
        even,
        SymbolPower::band(PowerTerm::new(half(), b.clone()), PowerTerm::new(half(), a.clone())),
        &b - &a,
        Precoder::MatchedTo(User::User2),
    ));
    symbols.push(sym(
        format!("v{even}"),
        SymbolOwner::User2,
        even,
        SymbolPower::term(half(), a.clone()),
        a.clone(),
        Precoder::OrthogonalTo(User::User1),
    ));
}

/// Hybrid scheme, case I: `beta <= (2+alpha)/3`.
///
/// One transmission block over two subbands with `r_mu1 = r_mu2 =
/// (beta - alpha)/2` and common messages filling the remaining power up to
/// exactly `P`. Achieves `((2 + alpha - beta)/2, beta)` with the common
/// stream credited to user 1, and the swap with user 2.
pub fn build_hybrid_case_i(quality: &CsitQuality, common_owner: User) -> Result<SchemePlan> {
    if *quality.beta() > threshold(quality) {
        return Err(Error::CaseIThreshold {
            alpha: fmt_rat(quality.alpha()),
            beta: fmt_rat(quality.beta()),
        });
    }
    let r_mu = (quality.beta() - quality.alpha()) / rint(2);
    let mut symbols = Vec::new();
    push_hybrid_block(&mut symbols, quality, 1, &r_mu, true);
    let plan = SchemePlan {
        scheme: Scheme::HybridCaseI,
        quality: quality.clone(),
        symbols,
        n_subbands: 2,
        channel_use_charge: rint(2),
        common_owner,
        case_ii_blocks: 0,
    };
    plan.validate()?;
    Ok(plan)
}

/// Hybrid scheme, case II: `beta > (2+alpha)/3` with integer block count.
///
/// `L` repetitions of the hybrid block with `r_mu1 = r_mu2 = 1 - beta` (which
/// squeezes the common messages out entirely), plus subband `2L+1` stacking
/// the third pieces `mu3_1 .. mu3_L` in descending power layers over a final
/// ZF pair. Achieves `((2+alpha)/3, (2+alpha)/3)` over `2L+1` channel uses.
pub fn build_hybrid_case_ii(quality: &CsitQuality) -> Result<SchemePlan> {
    let blocks = case_ii_block_count(quality)?;
    let a = quality.alpha().clone();
    let r_mu = rint(1) - quality.beta();
    let r3 = third_piece_prelog(quality);

    let mut symbols = Vec::new();
    for i in 0..blocks {
        push_hybrid_block(&mut symbols, quality, 2 * i + 1, &r_mu, false);
    }
    let last = 2 * blocks + 1;
    for i in 1..=blocks {
        let hi = rint(1) - rint((i - 1) as i64) * &r3;
        let lo = rint(1) - rint(i as i64) * &r3;
        debug_assert!(i < blocks || lo == a);
        symbols.push(sym(
            format!("mu3_{i}"),
            SymbolOwner::InterferencePiece,
            last,
            SymbolPower::band(PowerTerm::new(rint(1), hi), PowerTerm::new(rint(1), lo)),
            r3.clone(),
            Precoder::Antenna1,
        ));
    }
    symbols.push(sym(
        format!("u{last}"),
        SymbolOwner::User1,
        last,
        SymbolPower::term(half(), a.clone()),
        a.clone(),
        Precoder::OrthogonalTo(User::User2),
    ));
    symbols.push(sym(
        format!("v{last}"),
        SymbolOwner::User2,
        last,
        SymbolPower::term(half(), a.clone()),
        a.clone(),
        Precoder::OrthogonalTo(User::User1),
    ));

    let plan = SchemePlan {
        scheme: Scheme::HybridCaseII,
        quality: quality.clone(),
        symbols,
        n_subbands: last,
        channel_use_charge: rint(last as i64),
        common_owner: User::User1,
        case_ii_blocks: blocks,
    };
    plan.validate()?;
    Ok(plan)
}

// ---------------------------------------------------------------------------
// SIC programs
// ---------------------------------------------------------------------------

/// One decoding action in a receiver's program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecodeStep {
    /// Decode `symbol` from its subband observation, treating
    /// `treat_as_noise` as interference; subtract it on success.
    Scalar {
        symbol: SymbolId,
        treat_as_noise: Vec<SymbolId>,
    },
    /// Reassemble the quantized overheard-interference message from its
    /// decoded pieces. With every piece and every `requires` symbol in hand,
    /// the receiver strips its own contribution and recovers `yields` at its
    /// full encoding rate.
    CombineMu {
        pieces: Vec<SymbolId>,
        requires: Vec<SymbolId>,
        yields: SymbolId,
    },
    /// Joint zero-forcing decode of a two-symbol vector from the direct
    /// observation plus the one rebuilt from the decoded retransmission:
    /// the receiver subtracts its own overheard subband, leaving the
    /// `csit_row` user's estimated channel as a second observation row.
    JointZf {
        retransmission: SymbolId,
        direct_subband: usize,
        overheard_subband: usize,
        csit_row: User,
        symbols: [SymbolId; 2],
    },
}

impl DecodeStep {
    /// Symbols this step makes available at the receiver.
    pub fn decoded_symbols(&self) -> Vec<&SymbolId> {
        match self {
            DecodeStep::Scalar { symbol, .. } => vec![symbol],
            DecodeStep::CombineMu { yields, .. } => vec![yields],
            DecodeStep::JointZf { symbols, .. } => symbols.iter().collect(),
        }
    }
}

/// Ordered decoding programs for both receivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SicProgram {
    pub receiver1: Vec<DecodeStep>,
    pub receiver2: Vec<DecodeStep>,
}

impl SicProgram {
    pub fn for_receiver(&self, user: User) -> &[DecodeStep] {
        match user {
            User::User1 => &self.receiver1,
            User::User2 => &self.receiver2,
        }
    }
}

fn ids(plan: &SchemePlan, names: &[String]) -> Result<Vec<SymbolId>> {
    names
        .iter()
        .map(|n| {
            let id = SymbolId::new(n.clone());
            if plan.symbol(&id).is_none() {
                return Err(Error::UnknownSymbol(n.clone()));
            }
            Ok(id)
        })
        .collect()
}

/// Scalar step helper: noise set is everything still undecoded in the
/// symbol's subband from this receiver's point of view.
fn scalar_step(
    plan: &SchemePlan,
    decoded: &std::collections::HashSet<SymbolId>,
    name: &str,
) -> Result<DecodeStep> {
    let id = SymbolId::new(name);
    let spec = plan
        .symbol(&id)
        .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
    let noise = plan
        .subband_symbols(spec.subband)
        .filter(|s| s.id != id && !decoded.contains(&s.id))
        .map(|s| s.id.clone())
        .collect();
    Ok(DecodeStep::Scalar {
        symbol: id,
        treat_as_noise: noise,
    })
}

fn hybrid_program_for_receiver(plan: &SchemePlan, rx: User, blocks: usize) -> Result<Vec<DecodeStep>> {
    let mut steps = Vec::new();
    let mut decoded = std::collections::HashSet::new();
    let with_common = plan.scheme == Scheme::HybridCaseI;
    let push = |steps: &mut Vec<DecodeStep>,
                    decoded: &mut std::collections::HashSet<SymbolId>,
                    name: String|
     -> Result<()> {
        let step = scalar_step(plan, decoded, &name)?;
        decoded.insert(SymbolId::new(name));
        steps.push(step);
        Ok(())
    };

    // In-block passes: common messages, interference pieces, then the own
    // and overheard symbols each receiver can reach directly.
    for i in 0..blocks {
        let odd = 2 * i + 1;
        let even = odd + 1;
        if with_common {
            push(&mut steps, &mut decoded, format!("xc{odd}"))?;
            push(&mut steps, &mut decoded, format!("xc{even}"))?;
        }
        push(&mut steps, &mut decoded, format!("mu{odd}"))?;
        push(&mut steps, &mut decoded, format!("mu{even}"))?;
        match rx {
            User::User1 => {
                push(&mut steps, &mut decoded, format!("v{odd}_2"))?;
                push(&mut steps, &mut decoded, format!("u{odd}"))?;
            }
            User::User2 => {
                push(&mut steps, &mut decoded, format!("u{even}_2"))?;
                push(&mut steps, &mut decoded, format!("v{even}"))?;
            }
        }
    }

    // Case II: peel the stacked third pieces in the extra subband, then the
    // final ZF symbol intended for this receiver.
    if plan.scheme == Scheme::HybridCaseII {
        let last = 2 * blocks + 1;
        for i in 1..=blocks {
            push(&mut steps, &mut decoded, format!("mu3_{i}"))?;
        }
        match rx {
            User::User1 => push(&mut steps, &mut decoded, format!("u{last}"))?,
            User::User2 => push(&mut steps, &mut decoded, format!("v{last}"))?,
        }
    }

    // Cross-subband stage: rebuild each block's interference sum, strip the
    // piece this receiver already knows, then finish the remaining private
    // symbol behind it.
    for i in 0..blocks {
        let odd = 2 * i + 1;
        let even = odd + 1;
        let mut pieces = vec![format!("mu{odd}"), format!("mu{even}")];
        if plan.scheme == Scheme::HybridCaseII {
            pieces.push(format!("mu3_{}", i + 1));
        }
        let (requires, yields, tail) = match rx {
            User::User1 => (format!("v{odd}_2"), format!("u{even}_2"), format!("u{even}_1")),
            User::User2 => (format!("u{even}_2"), format!("v{odd}_2"), format!("v{odd}_1")),
        };
        steps.push(DecodeStep::CombineMu {
            pieces: ids(plan, &pieces)?,
            requires: ids(plan, &[requires])?,
            yields: SymbolId::new(yields.clone()),
        });
        decoded.insert(SymbolId::new(yields));
        push(&mut steps, &mut decoded, tail)?;
    }
    Ok(steps)
}

/// Builds the per-receiver SIC program matching a plan's structure.
pub fn sic_program_for(plan: &SchemePlan) -> Result<SicProgram> {
    plan.validate()?;
    match plan.scheme {
        Scheme::Zfbf => {
            let mut rx = [Vec::new(), Vec::new()];
            for (idx, own) in ["u", "v"].iter().enumerate() {
                let mut decoded = std::collections::HashSet::new();
                for s in 1..=2usize {
                    let step = scalar_step(plan, &decoded, &format!("{own}{s}"))?;
                    decoded.insert(SymbolId::new(format!("{own}{s}")));
                    rx[idx].push(step);
                }
            }
            let [receiver1, receiver2] = rx;
            Ok(SicProgram { receiver1, receiver2 })
        }
        Scheme::ScZf => {
            let mut rx = [Vec::new(), Vec::new()];
            for (idx, own) in ["u", "v"].iter().enumerate() {
                let mut decoded = std::collections::HashSet::new();
                for s in 1..=2usize {
                    let step = scalar_step(plan, &decoded, &format!("xc{s}"))?;
                    decoded.insert(SymbolId::new(format!("xc{s}")));
                    rx[idx].push(step);
                    let step = scalar_step(plan, &decoded, &format!("{own}{s}"))?;
                    decoded.insert(SymbolId::new(format!("{own}{s}")));
                    rx[idx].push(step);
                }
            }
            let [receiver1, receiver2] = rx;
            Ok(SicProgram { receiver1, receiver2 })
        }
        Scheme::MatReuse => {
            let eta = SymbolId::new("eta3");
            let mk = |direct: usize, overheard: usize, csit_row: User, a: &str, b: &str| {
                vec![
                    DecodeStep::Scalar {
                        symbol: eta.clone(),
                        treat_as_noise: Vec::new(),
                    },
                    DecodeStep::JointZf {
                        retransmission: eta.clone(),
                        direct_subband: direct,
                        overheard_subband: overheard,
                        csit_row,
                        symbols: [SymbolId::new(a), SymbolId::new(b)],
                    },
                ]
            };
            Ok(SicProgram {
                receiver1: mk(2, 1, User::User2, "u2_1", "u2_2"),
                receiver2: mk(1, 2, User::User1, "v1_1", "v1_2"),
            })
        }
        Scheme::HybridCaseI => Ok(SicProgram {
            receiver1: hybrid_program_for_receiver(plan, User::User1, 1)?,
            receiver2: hybrid_program_for_receiver(plan, User::User2, 1)?,
        }),
        Scheme::HybridCaseII => Ok(SicProgram {
            receiver1: hybrid_program_for_receiver(plan, User::User1, plan.case_ii_blocks)?,
            receiver2: hybrid_program_for_receiver(plan, User::User2, plan.case_ii_blocks)?,
        }),
    }
}

/// Plan plus program, serialized together for inspection and golden tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanDocument {
    pub schema_version: u32,
    pub plan: SchemePlan,
    pub sic_program: SicProgram,
}

impl PlanDocument {
    pub fn new(plan: SchemePlan) -> Result<Self> {
        let sic_program = sic_program_for(&plan)?;
        Ok(PlanDocument {
            schema_version: 1,
            plan,
            sic_program,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse_rat;
    use rand::{Rng, SeedableRng};

    fn q(a: &str, b: &str) -> CsitQuality {
        CsitQuality::new(parse_rat(a).unwrap(), parse_rat(b).unwrap()).unwrap()
    }

    fn prelog(plan: &SchemePlan, id: &str) -> Rat {
        plan.symbol(&SymbolId::new(id)).unwrap().rate_prelog.clone()
    }

    #[test]
    fn zfbf_perfect_csit_corner() {
        let plan = build_zfbf(&q("1", "1"));
        for id in ["u1", "v1", "u2", "v2"] {
            assert_eq!(prelog(&plan, id), rint(1));
        }
        assert_eq!(plan.channel_use_charge, rint(2));
        let sum: Rat = plan.user_prelog_total(User::User1) + plan.user_prelog_total(User::User2);
        assert_eq!(sum, rint(4)); // sum-prelog / S = 2
    }

    #[test]
    fn zfbf_no_prediction_starves_user1_in_subband_1() {
        let plan = build_zfbf(&q("0", "1"));
        assert_eq!(prelog(&plan, "u1"), rint(0));
        assert_eq!(prelog(&plan, "v1"), rint(1));
    }

    #[test]
    fn zfbf_equal_qualities_sum_dof_two() {
        let plan = build_zfbf(&q("1/2", "1/2"));
        let sum: Rat = plan.user_prelog_total(User::User1) + plan.user_prelog_total(User::User2);
        assert_eq!(sum, rint(2)); // 2*beta + 2*alpha = 2
        assert_eq!(plan.channel_use_charge, rint(1)); // S = 2*beta = 1
    }

    #[test]
    fn mat_reuse_recovers_original_mat_at_beta_one() {
        let plan = build_mat_reuse(&q("0", "1")).unwrap();
        assert_eq!(plan.n_subbands, 3);
        assert_eq!(plan.channel_use_charge, rint(3));
        assert_eq!(plan.user_prelog_total(User::User1), rint(2));
        assert_eq!(plan.user_prelog_total(User::User2), rint(2));
    }

    #[test]
    fn mat_reuse_scales_with_beta() {
        let plan = build_mat_reuse(&q("0", "1/2")).unwrap();
        assert_eq!(prelog(&plan, "v1_1"), rat(1, 2));
        assert_eq!(plan.channel_use_charge, rat(3, 2));
        // beta = 2/3 matches the beta = 1 per-user ratio 2/3.
        let plan = build_mat_reuse(&q("0", "2/3")).unwrap();
        let per_user = plan.user_prelog_total(User::User1) / plan.channel_use_charge.clone();
        assert_eq!(per_user, rat(2, 3));
    }

    #[test]
    fn mat_reuse_degenerate_at_beta_zero() {
        assert!(matches!(
            build_mat_reuse(&q("0", "0")),
            Err(Error::DegenerateScheme { .. })
        ));
    }

    #[test]
    fn case_i_ledger_at_reference_point() {
        let plan = build_hybrid_case_i(&q("1/5", "1/2"), User::User1).unwrap();
        assert_eq!(prelog(&plan, "xc1"), parse_rat("0.35").unwrap());
        assert_eq!(prelog(&plan, "mu1"), parse_rat("0.15").unwrap());
        assert_eq!(prelog(&plan, "v1_1"), parse_rat("0.5").unwrap());
        assert_eq!(prelog(&plan, "v1_2"), parse_rat("0.3").unwrap());
        assert_eq!(prelog(&plan, "u1"), parse_rat("0.2").unwrap());
        // d1 = (2 + alpha - beta)/2 = 0.85, d2 = beta = 0.5 over S = 2.
        assert_eq!(plan.user_prelog_total(User::User1), parse_rat("1.7").unwrap());
        assert_eq!(plan.user_prelog_total(User::User2), rint(1));
        assert_eq!(plan.channel_use_charge, rint(2));
    }

    #[test]
    fn case_i_subbands_spend_exactly_full_power() {
        for (a, b) in [("0", "1/3"), ("1/5", "1/2"), ("1/2", "1/2"), ("1/4", "3/4")] {
            let plan = build_hybrid_case_i(&q(a, b), User::User1).unwrap();
            for s in 1..=2 {
                assert!(plan.subband_spends_full_power(s), "({a},{b}) subband {s}");
            }
        }
    }

    #[test]
    fn case_i_degenerates_to_zf_plus_common_at_equal_qualities() {
        let quality = q("3/5", "3/5");
        let plan = build_hybrid_case_i(&quality, User::User1).unwrap();
        assert_eq!(prelog(&plan, "mu1"), rint(0));
        assert_eq!(prelog(&plan, "v1_2"), rint(0));
        assert!(plan.symbol(&SymbolId::new("mu1")).unwrap().power.is_zero());
        assert!(plan.symbol(&SymbolId::new("v1_2")).unwrap().power.is_zero());
        // Ledger equality against ZFBF plus the common prelog split.
        let zf = build_zfbf(&quality);
        let common: Rat = plan
            .symbols
            .iter()
            .filter(|s| s.owner == SymbolOwner::Common)
            .map(|s| s.rate_prelog.clone())
            .sum();
        assert_eq!(
            plan.user_prelog_total(User::User1),
            zf.user_prelog_total(User::User1) + common
        );
        assert_eq!(plan.user_prelog_total(User::User2), zf.user_prelog_total(User::User2));
    }

    #[test]
    fn case_i_boundary_has_empty_common_message() {
        // beta = (2 + alpha)/3 zeroes the common prelog and its power band.
        let quality = q("1/4", "3/4");
        let plan = build_hybrid_case_i(&quality, User::User1).unwrap();
        assert_eq!(prelog(&plan, "xc1"), rint(0));
        assert!(plan.symbol(&SymbolId::new("xc1")).unwrap().power.is_zero());
        assert!(plan.subband_spends_full_power(1));
    }

    #[test]
    fn case_i_refuses_above_threshold() {
        assert!(matches!(
            build_hybrid_case_i(&q("0", "3/4"), User::User1),
            Err(Error::CaseIThreshold { .. })
        ));
    }

    #[test]
    fn case_ii_reference_points() {
        let plan = build_hybrid_case_ii(&q("0", "3/4")).unwrap();
        assert_eq!(plan.case_ii_blocks, 4);
        assert_eq!(plan.n_subbands, 9);
        assert_eq!(prelog(&plan, "mu3_1"), rat(1, 4));
        // Per-user prelog total (2L+1)(2+alpha)/3 = 9 * 2/3 = 6.
        assert_eq!(plan.user_prelog_total(User::User1), rint(6));
        assert_eq!(plan.user_prelog_total(User::User2), rint(6));

        let plan = build_hybrid_case_ii(&q("1/10", "4/5")).unwrap();
        assert_eq!(plan.case_ii_blocks, 3);
        assert_eq!(prelog(&plan, "mu3_1"), rat(3, 10));
        // d = (2 + 0.1)/3 = 0.7 per user over 7 subbands.
        assert_eq!(plan.user_prelog_total(User::User1), rat(7, 10) * rint(7));
    }

    #[test]
    fn case_ii_third_piece_layers_telescope() {
        let plan = build_hybrid_case_ii(&q("0", "3/4")).unwrap();
        let last = plan.n_subbands;
        let expect = [
            (rint(1), rat(3, 4)),
            (rat(3, 4), rat(1, 2)),
            (rat(1, 2), rat(1, 4)),
            (rat(1, 4), rint(0)),
        ];
        for (i, (hi, lo)) in expect.iter().enumerate() {
            let spec = plan.symbol(&SymbolId::new(format!("mu3_{}", i + 1))).unwrap();
            assert_eq!(&spec.power.hi.exponent, hi);
            assert_eq!(&spec.power.lo.as_ref().unwrap().exponent, lo);
        }
        assert!(plan.subband_spends_full_power(last));
    }

    #[test]
    fn case_ii_rejects_non_integer_blocks_and_boundary() {
        // alpha = 0, beta = 0.8: L = 1/0.4 = 2.5.
        match build_hybrid_case_ii(&q("0", "4/5")) {
            Err(Error::NonIntegerBlocks { suggestions, .. }) => {
                assert!(suggestions.contains("L=2") && suggestions.contains("L=3"));
            }
            other => panic!("expected non-integer block error, got {other:?}"),
        }
        assert!(matches!(
            build_hybrid_case_ii(&q("1/4", "3/4")),
            Err(Error::CaseIIThreshold { .. })
        ));
    }

    #[test]
    fn mu_split_identities() {
        // Case I: r_mu1 + r_mu2 = beta - alpha.
        let quality = q("1/5", "1/2");
        let plan = build_hybrid_case_i(&quality, User::User1).unwrap();
        let split = prelog(&plan, "mu1") + prelog(&plan, "mu2");
        assert_eq!(split, quality.beta() - quality.alpha());
        // Case II: 2(1 - beta) + r_mu3 = beta - alpha.
        let quality = q("1/10", "4/5");
        let plan = build_hybrid_case_ii(&quality).unwrap();
        let split = prelog(&plan, "mu1") + prelog(&plan, "mu2") + prelog(&plan, "mu3_1");
        assert_eq!(split, quality.beta() - quality.alpha());
    }

    #[test]
    fn mu_pieces_respect_power_headroom() {
        // Every interference piece prelog stays within 1 - beta.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let den = rng.gen_range(1..=12i64);
            let bn = rng.gen_range(0..=den);
            let an = rng.gen_range(0..=bn);
            let quality = q(&format!("{an}/{den}"), &format!("{bn}/{den}"));
            let headroom = rint(1) - quality.beta();
            let plans = [
                build_hybrid_case_i(&quality, User::User1).ok(),
                build_hybrid_case_ii(&quality).ok(),
            ];
            for plan in plans.into_iter().flatten() {
                for sym in &plan.symbols {
                    if sym.owner == SymbolOwner::InterferencePiece
                        && sym.id.as_str().starts_with("mu")
                        && !sym.id.as_str().starts_with("mu3")
                    {
                        assert!(sym.rate_prelog <= headroom, "{} at {:?}", sym.id, quality);
                    }
                }
            }
        }
    }

    #[test]
    fn sc_zf_corner_cases() {
        let plan = build_sc_zf(&q("1", "1"), User::User1);
        assert_eq!(prelog(&plan, "xc1"), rint(0));
        assert_eq!(prelog(&plan, "u1"), rint(1));
        assert!(plan.symbol(&SymbolId::new("xc1")).unwrap().power.is_zero());

        let plan = build_sc_zf(&q("0", "0"), User::User1);
        assert_eq!(plan.user_prelog_total(User::User1), rint(2));
        assert_eq!(plan.user_prelog_total(User::User2), rint(0));

        let plan = build_sc_zf(&q("1/2", "1"), User::User1);
        assert_eq!(plan.user_prelog_total(User::User1), rint(2));
        assert_eq!(plan.user_prelog_total(User::User2), rint(1));
        assert_eq!(plan.channel_use_charge, rint(2));
    }

    #[test]
    fn charge_rule_reproduces_stored_charges() {
        let cases: Vec<SchemePlan> = vec![
            build_zfbf(&q("1/4", "1/2")),
            build_mat_reuse(&q("0", "3/4")).unwrap(),
            build_sc_zf(&q("1/2", "3/4"), User::User2),
            build_hybrid_case_i(&q("1/5", "1/2"), User::User1).unwrap(),
            build_hybrid_case_i(&q("1/4", "3/4"), User::User1).unwrap(),
            build_hybrid_case_ii(&q("0", "3/4")).unwrap(),
            build_sc_zf(&q("1", "1"), User::User1),
        ];
        for plan in cases {
            assert_eq!(
                plan.charge_from_ledger(),
                plan.channel_use_charge,
                "{} at {:?}",
                plan.scheme,
                plan.quality
            );
        }
    }

    #[test]
    fn random_valid_qualities_keep_ledgers_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let den = rng.gen_range(1..=10i64);
            let bn = rng.gen_range(0..=den);
            let an = rng.gen_range(0..=bn);
            let quality = q(&format!("{an}/{den}"), &format!("{bn}/{den}"));
            if let Ok(plan) = build_hybrid_case_i(&quality, User::User1) {
                for s in 1..=2 {
                    assert!(plan.subband_spends_full_power(s));
                }
                // Eq-level rate identities: user totals (2+alpha-beta) and 2*beta.
                let expect1 = rint(2) + quality.alpha() - quality.beta();
                assert_eq!(plan.user_prelog_total(User::User1), expect1);
                assert_eq!(plan.user_prelog_total(User::User2), rint(2) * quality.beta());
            }
            assert!(build_zfbf(&quality).validate().is_ok());
            assert!(build_sc_zf(&quality, User::User2).validate().is_ok());
        }
    }

    #[test]
    fn hybrid_program_follows_stage_order() {
        let plan = build_hybrid_case_i(&q("1/5", "1/2"), User::User1).unwrap();
        let prog = sic_program_for(&plan).unwrap();
        let order: Vec<&str> = prog
            .receiver1
            .iter()
            .flat_map(|s| s.decoded_symbols())
            .map(|s| s.as_str())
            .collect();
        assert_eq!(
            order,
            ["xc1", "xc2", "mu1", "mu2", "v1_2", "u1", "u2_2", "u2_1"]
        );
    }

    #[test]
    fn zfbf_program_is_single_stage_per_subband() {
        let plan = build_zfbf(&q("1/2", "1/2"));
        let prog = sic_program_for(&plan).unwrap();
        assert_eq!(prog.receiver1.len(), 2);
        match &prog.receiver1[0] {
            DecodeStep::Scalar { symbol, treat_as_noise } => {
                assert_eq!(symbol.as_str(), "u1");
                assert_eq!(treat_as_noise.len(), 1);
                assert_eq!(treat_as_noise[0].as_str(), "v1");
            }
            other => panic!("unexpected step {other:?}"),
        }
    }

    #[test]
    fn case_ii_program_peels_third_pieces_in_order() {
        let plan = build_hybrid_case_ii(&q("0", "3/4")).unwrap();
        let prog = sic_program_for(&plan).unwrap();
        let last = plan.n_subbands;
        let chain: Vec<String> = prog
            .receiver1
            .iter()
            .filter_map(|s| match s {
                DecodeStep::Scalar { symbol, .. }
                    if plan.symbol(symbol).unwrap().subband == last =>
                {
                    Some(symbol.as_str().to_string())
                }
                _ => None,
            })
            .collect();
        assert_eq!(chain, ["mu3_1", "mu3_2", "mu3_3", "mu3_4", "u9"]);
    }

    #[test]
    fn programs_cover_each_decodable_symbol_exactly_once() {
        let plans = vec![
            build_zfbf(&q("1/4", "1/2")),
            build_mat_reuse(&q("0", "1")).unwrap(),
            build_sc_zf(&q("1/2", "3/4"), User::User1),
            build_hybrid_case_i(&q("1/5", "1/2"), User::User2).unwrap(),
            build_hybrid_case_ii(&q("1/10", "4/5")).unwrap(),
        ];
        for plan in plans {
            let prog = sic_program_for(&plan).unwrap();
            for (user, steps) in [(User::User1, &prog.receiver1), (User::User2, &prog.receiver2)] {
                let mut counts: std::collections::HashMap<&str, usize> = Default::default();
                for step in steps.iter() {
                    for id in step.decoded_symbols() {
                        *counts.entry(id.as_str()).or_default() += 1;
                    }
                }
                for sym in &plan.symbols {
                    let decodable = match sym.owner {
                        SymbolOwner::User1 => user == User::User1,
                        SymbolOwner::User2 => user == User::User2,
                        SymbolOwner::Common | SymbolOwner::InterferencePiece => true,
                    };
                    if decodable {
                        assert_eq!(
                            counts.get(sym.id.as_str()).copied().unwrap_or(0),
                            1,
                            "{} decoded wrong number of times at {user} in {}",
                            sym.id,
                            plan.scheme
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn noise_sets_are_consistent_with_stage_order() {
        // A symbol decoded at step k never reappears in a later noise set.
        let plans = vec![
            build_hybrid_case_i(&q("1/5", "1/2"), User::User1).unwrap(),
            build_hybrid_case_ii(&q("0", "3/4")).unwrap(),
            build_sc_zf(&q("1/2", "3/4"), User::User1),
        ];
        for plan in plans {
            let prog = sic_program_for(&plan).unwrap();
            for steps in [&prog.receiver1, &prog.receiver2] {
                let mut decoded: std::collections::HashSet<&str> = Default::default();
                for step in steps.iter() {
                    if let DecodeStep::Scalar { treat_as_noise, .. } = step {
                        for n in treat_as_noise {
                            assert!(
                                !decoded.contains(n.as_str()),
                                "{} still in a noise set after decoding",
                                n
                            );
                        }
                    }
                    for id in step.decoded_symbols() {
                        decoded.insert(id.as_str());
                    }
                }
            }
        }
    }

    #[test]
    fn plan_document_round_trips_through_json() {
        let plan = build_hybrid_case_i(&q("1/5", "1/2"), User::User1).unwrap();
        let doc = PlanDocument::new(plan).unwrap();
        let json = doc.to_json().unwrap();
        let back: PlanDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.plan, doc.plan);
        assert_eq!(back.sic_program, doc.sic_program);
    }
}
