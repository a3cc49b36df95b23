//! Channel realizations and imperfect transmitter-side estimates.
//!
//! The physical setup is a two-antenna transmitter and two single-antenna
//! receivers observed over adjacent subbands. True channel vectors are i.i.d.
//! circularly-symmetric complex Gaussian with identity covariance. The
//! transmitter only holds estimates whose error variance decays as a power of
//! the SNR: `P^(-beta)` for the reported subband of each user and `P^(-alpha)`
//! for the predicted one. All randomness is driven by a counter-seeded
//! ChaCha stream so draws are reproducible and trivially parallelizable.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{rat_f64, rat_serde, Rat};

/// Two-element complex channel vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cvec2(pub [Complex64; 2]);

impl Cvec2 {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Cvec2([a, b])
    }

    /// Conjugate-transpose inner product `self^H rhs`.
    pub fn inner(&self, rhs: &Cvec2) -> Complex64 {
        self.0[0].conj() * rhs.0[0] + self.0[1].conj() * rhs.0[1]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scales to unit norm. Errors on the zero vector.
    pub fn unit(&self) -> Result<Cvec2> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Cvec2([self.0[0] / n, self.0[1] / n]))
    }

    pub fn sub(&self, rhs: &Cvec2) -> Cvec2 {
        Cvec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

/// Unit vector orthogonal to `v` with the fixed phase convention
/// `[a, b] -> [-b*, a*] / ||v||`.
pub fn orth_complement(v: &Cvec2) -> Result<Cvec2> {
    let n = v.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Cvec2([-v.0[1].conj() / n, v.0[0].conj() / n]))
}

/// CSIT quality pair: `beta` for the reported subband, `alpha` for the
/// predicted one. Prediction can never beat the report, so `alpha <= beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsitQuality {
    #[serde(with = "rat_serde")]
    alpha: Rat,
    #[serde(with = "rat_serde")]
    beta: Rat,
}

impl CsitQuality {
    pub fn new(alpha: Rat, beta: Rat) -> Result<Self> {
        use num::Zero;
        let one = crate::rational::rint(1);
        if alpha < Rat::zero() || alpha > beta || beta > one {
            return Err(Error::InvalidQuality {
                alpha: crate::rational::fmt_rat(&alpha),
                beta: crate::rational::fmt_rat(&beta),
            });
        }
        Ok(CsitQuality { alpha, beta })
    }

    pub fn alpha(&self) -> &Rat {
        &self.alpha
    }

    pub fn beta(&self) -> &Rat {
        &self.beta
    }

    pub fn alpha_f64(&self) -> f64 {
        rat_f64(&self.alpha)
    }

    pub fn beta_f64(&self) -> f64 {
        rat_f64(&self.beta)
    }
}

/// One SNR operating point. Noise variance is 1, so `p_linear` is both the
/// per-subband power budget and the SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrPoint {
    pub p_db: f64,
    pub p_linear: f64,
}

impl SnrPoint {
    /// The power-law scalings only make sense for P > 1 (0 dB).
    pub fn from_db(p_db: f64) -> Result<Self> {
        let p_linear = 10f64.powf(p_db / 10.0);
        if p_linear.is_nan() || p_linear <= 1.0 {
            return Err(Error::InvalidSnr { p_db });
        }
        Ok(SnrPoint { p_db, p_linear })
    }

    pub fn log2_p(&self) -> f64 {
        self.p_linear.log2()
    }
}

/// One realization of the two-subband channel pair together with the CSIT
/// the transmitter would hold for it.
///
/// Estimates are built as `truth - error`, which keeps the unit-covariance
/// marginal of the true channels exact. Error vectors have i.i.d. complex
/// Gaussian entries of variance `sigma^2 / 2` each, so the expected squared
/// norm of the whole error vector is `sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub h1: Cvec2,
    pub h2: Cvec2,
    pub g1: Cvec2,
    pub g2: Cvec2,
    pub h1_hat: Cvec2,
    pub h2_hat: Cvec2,
    pub g1_hat: Cvec2,
    pub g2_hat: Cvec2,
    pub h1_err: Cvec2,
    pub h2_err: Cvec2,
    pub g1_err: Cvec2,
    pub g2_err: Cvec2,
    /// `P^(-beta)`: user 1 reports subband 1.
    pub sigma2_h1: f64,
    /// `P^(-alpha)`: user 1's subband 2 is predicted.
    pub sigma2_h2: f64,
    /// `P^(-alpha)`: user 2's subband 1 is predicted.
    pub sigma2_g1: f64,
    /// `P^(-beta)`: user 2 reports subband 2.
    pub sigma2_g2: f64,
}

// Box-Muller on two uniforms; fixed stream consumption keeps draws coupled
// across SNR points that share a seed.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// One CN(0, 1) scalar.
fn cn_scalar<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng)) / 2f64.sqrt()
}

/// CN(0, I2) vector: unit variance per complex entry.
pub(crate) fn sample_cn_unit<R: Rng>(rng: &mut R) -> Cvec2 {
    Cvec2([cn_scalar(rng), cn_scalar(rng)])
}

/// Error vector with total expected squared norm `sigma2`.
pub(crate) fn sample_error<R: Rng>(rng: &mut R, sigma2: f64) -> Cvec2 {
    let s = (sigma2 / 2.0).sqrt();
    Cvec2([cn_scalar(rng) * s, cn_scalar(rng) * s])
}

/// True channels plus CSIT for a single subband.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SubbandState {
    pub h: Cvec2,
    pub g: Cvec2,
    pub h_hat: Cvec2,
    pub g_hat: Cvec2,
    pub h_err: Cvec2,
    pub g_err: Cvec2,
}

/// Draws one subband with the given error variances for each user's CSIT.
pub(crate) fn draw_subband_state<R: Rng>(rng: &mut R, sigma2_h: f64, sigma2_g: f64) -> SubbandState {
    let h = sample_cn_unit(rng);
    let g = sample_cn_unit(rng);
    let h_hat = h.sub(&sample_error(rng, sigma2_h));
    let g_hat = g.sub(&sample_error(rng, sigma2_g));
    // Store the error as the rounded difference so truth = estimate + error
    // holds bitwise.
    SubbandState {
        h,
        g,
        h_hat,
        g_hat,
        h_err: h.sub(&h_hat),
        g_err: g.sub(&g_hat),
    }
}

/// Error variances `(sigma2_h, sigma2_g)` for a 1-based subband index.
///
/// Odd subbands follow the pattern of subband 1 (user 1 reported, user 2
/// predicted); even subbands mirror it.
pub(crate) fn subband_variances(quality: &CsitQuality, snr: &SnrPoint, subband: usize) -> (f64, f64) {
    let sb = snr.p_linear.powf(-quality.beta_f64());
    let sa = snr.p_linear.powf(-quality.alpha_f64());
    if subband % 2 == 1 {
        (sb, sa)
    } else {
        (sa, sb)
    }
}

/// Draws the two-subband channel bundle from a seed. Bit-identical for a
/// fixed `(quality, snr, seed)` triple.
pub fn draw_channel(quality: &CsitQuality, snr: &SnrPoint, seed: u64) -> Result<ChannelDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw_channel_with(quality, snr, &mut rng)
}

pub(crate) fn draw_channel_with<R: Rng>(
    quality: &CsitQuality,
    snr: &SnrPoint,
    rng: &mut R,
) -> Result<ChannelDraw> {
    let (s_h1, s_g1) = subband_variances(quality, snr, 1);
    let (s_h2, s_g2) = subband_variances(quality, snr, 2);
    let one = draw_subband_state(rng, s_h1, s_g1);
    let two = draw_subband_state(rng, s_h2, s_g2);
    Ok(ChannelDraw {
        h1: one.h,
        h2: two.h,
        g1: one.g,
        g2: two.g,
        h1_hat: one.h_hat,
        h2_hat: two.h_hat,
        g1_hat: one.g_hat,
        g2_hat: two.g_hat,
        h1_err: one.h_err,
        h2_err: two.h_err,
        g1_err: one.g_err,
        g2_err: two.g_err,
        sigma2_h1: s_h1,
        sigma2_h2: s_h2,
        sigma2_g1: s_g1,
        sigma2_g2: s_g2,
    })
}

/// Which leakage moment to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageSide {
    /// `E[|h1^H h1_hat_perp|^2]`, scaling as `P^(-beta)`.
    BetaSide,
    /// `E[|g1^H g1_hat_perp|^2]`, scaling as `P^(-alpha)`.
    AlphaSide,
}

/// Monte-Carlo estimate of the ZF leakage second moment.
///
/// Under the truth-minus-error construction the exact value is
/// `(sigma^2/2) / (1 + sigma^2/2)`: projecting onto the estimate's orthogonal
/// complement keeps a single complex dimension of the conditional error.
pub fn leakage_moment(
    quality: &CsitQuality,
    snr: &SnrPoint,
    n_trials: usize,
    side: LeakageSide,
    seed: u64,
) -> Result<f64> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let sigma2 = match side {
        LeakageSide::BetaSide => snr.p_linear.powf(-quality.beta_f64()),
        LeakageSide::AlphaSide => snr.p_linear.powf(-quality.alpha_f64()),
    };
    let mut acc = 0.0;
    for trial in 0..n_trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let truth = sample_cn_unit(&mut rng);
        let err = sample_error(&mut rng, sigma2);
        let hat = truth.sub(&err);
        let perp = orth_complement(&hat)?;
        acc += truth.inner(&perp).norm_sqr();
    }
    Ok(acc / n_trials as f64)
}

/// Least-squares slope of `log2(leakage)` against `log2(P)`; approaches
/// `-beta` (or `-alpha`) as the trial count grows.
pub fn leakage_slope(
    quality: &CsitQuality,
    snrs: &[SnrPoint],
    n_trials: usize,
    side: LeakageSide,
    seed: u64,
) -> Result<f64> {
    if snrs.len() < 2 {
        return Err(Error::TooFewSnrPoints(snrs.len()));
    }
    let pts: Vec<(f64, f64)> = snrs
        .iter()
        .map(|snr| {
            let est = leakage_moment(quality, snr, n_trials, side, seed)?;
            Ok((snr.log2_p(), est.log2()))
        })
        .collect::<Result<_>>()?;
    Ok(ols_slope(&pts))
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rint};

    fn q(a: Rat, b: Rat) -> CsitQuality {
        CsitQuality::new(a, b).unwrap()
    }

    #[test]
    fn quality_ordering_enforced() {
        assert!(CsitQuality::new(rat(3, 5), rat(1, 2)).is_err());
        assert!(CsitQuality::new(rat(-1, 2), rint(1)).is_err());
        assert!(CsitQuality::new(rint(0), rat(6, 5)).is_err());
        assert!(CsitQuality::new(rat(1, 2), rat(1, 2)).is_ok());
    }

    #[test]
    fn snr_must_exceed_unity() {
        assert!(SnrPoint::from_db(0.0).is_err());
        assert!(SnrPoint::from_db(-10.0).is_err());
        let p = SnrPoint::from_db(60.0).unwrap();
        assert!((p.p_linear - 1e6).abs() / 1e6 < 1e-12);
    }

    #[test]
    fn orth_complement_canonical_basis() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let e1 = Cvec2::new(one, zero);
        let e2 = Cvec2::new(zero, one);
        let w = orth_complement(&e1).unwrap();
        assert_eq!(w.0[0], zero);
        assert_eq!(w.0[1], one);
        let w = orth_complement(&e2).unwrap();
        assert_eq!(w.0[0], -one);
        assert_eq!(w.0[1], zero);
        assert!(orth_complement(&Cvec2::new(zero, zero)).is_err());
    }

    #[test]
    fn orth_complement_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let v = sample_cn_unit(&mut rng);
            let w = orth_complement(&v).unwrap();
            assert!(v.inner(&w).norm() < 1e-12);
            assert!((w.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn draw_is_deterministic_for_fixed_seed() {
        let quality = q(rat(1, 4), rat(3, 4));
        let snr = SnrPoint::from_db(40.0).unwrap();
        let a = draw_channel(&quality, &snr, 42).unwrap();
        let b = draw_channel(&quality, &snr, 42).unwrap();
        assert_eq!(a, b);
        let c = draw_channel(&quality, &snr, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn error_vectors_reconstruct_bitwise() {
        let quality = q(rat(1, 2), rint(1));
        let snr = SnrPoint::from_db(30.0).unwrap();
        let d = draw_channel(&quality, &snr, 7).unwrap();
        assert_eq!(d.h1.sub(&d.h1_hat), d.h1_err);
        assert_eq!(d.h2.sub(&d.h2_hat), d.h2_err);
        assert_eq!(d.g1.sub(&d.g1_hat), d.g1_err);
        assert_eq!(d.g2.sub(&d.g2_hat), d.g2_err);
    }

    #[test]
    fn declared_variances_follow_the_quality_pattern() {
        let quality = q(rint(0), rint(1));
        let snr = SnrPoint::from_db(60.0).unwrap();
        let d = draw_channel(&quality, &snr, 3).unwrap();
        assert!((d.sigma2_h1 - 1e-6).abs() < 1e-18);
        assert!((d.sigma2_g2 - 1e-6).abs() < 1e-18);
        assert_eq!(d.sigma2_h2, 1.0);
        assert_eq!(d.sigma2_g1, 1.0);

        // No CSIT at all: variance 1 on all four estimates.
        let d = draw_channel(&q(rint(0), rint(0)), &snr, 3).unwrap();
        for s in [d.sigma2_h1, d.sigma2_h2, d.sigma2_g1, d.sigma2_g2] {
            assert_eq!(s, 1.0);
        }
        // Full quality at P = 10^6: all four variances 10^-6.
        let d = draw_channel(&q(rint(1), rint(1)), &snr, 3).unwrap();
        for s in [d.sigma2_h1, d.sigma2_h2, d.sigma2_g1, d.sigma2_g2] {
            assert!((s - 1e-6).abs() < 1e-18);
        }
    }

    #[test]
    fn error_second_moment_matches_declared_variance() {
        // E[||err||^2] = sigma^2 by construction; regression at 10% slack.
        let quality = q(rint(0), rat(1, 2));
        let snr = SnrPoint::from_db(40.0).unwrap();
        let mut acc = 0.0;
        let n = 20_000;
        for seed in 0..n {
            let d = draw_channel(&quality, &snr, seed).unwrap();
            acc += d.h1_err.norm_sq();
        }
        let mean = acc / n as f64;
        let target = 1e-2; // P^(-1/2) at 40 dB
        assert!((mean - target).abs() / target < 0.1, "mean {mean}");
    }

    #[test]
    fn leakage_matches_conditional_closed_form() {
        // Exact value is (sigma^2/2)/(1 + sigma^2/2) under truth-minus-error.
        let snr = SnrPoint::from_db(40.0).unwrap();

        // beta = 1: sigma^2 = 1e-4, expect ~4.99975e-5 (within 20% relative).
        let quality = q(rint(0), rint(1));
        let est = leakage_moment(&quality, &snr, 100_000, LeakageSide::BetaSide, 11).unwrap();
        let s = 1e-4 / 2.0;
        let closed = s / (1.0 + s);
        assert!((est - closed).abs() / closed < 0.2, "est {est} closed {closed}");

        // alpha = 0: sigma^2 = 1, expect 1/3 (within 10%).
        let est = leakage_moment(&quality, &snr, 100_000, LeakageSide::AlphaSide, 12).unwrap();
        assert!((est - 1.0 / 3.0).abs() / (1.0 / 3.0) < 0.1, "est {est}");
    }

    #[test]
    fn leakage_slope_tracks_quality_exponent() {
        let snrs: Vec<SnrPoint> = [40.0, 60.0, 80.0]
            .iter()
            .map(|db| SnrPoint::from_db(*db).unwrap())
            .collect();
        for (num, den) in [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)] {
            let beta = rat(num, den);
            let quality = q(rint(0), beta.clone());
            let slope =
                leakage_slope(&quality, &snrs, 100_000, LeakageSide::BetaSide, 5).unwrap();
            let target = -rat_f64(&beta);
            assert!(
                (slope - target).abs() < 0.05,
                "beta {} slope {slope} target {target}",
                crate::rational::fmt_rat(&beta)
            );
        }
        // Same law on the predicted side, driven by alpha.
        for (num, den) in [(0, 1), (1, 2), (1, 1)] {
            let alpha = rat(num, den);
            let quality = q(alpha.clone(), rint(1));
            let slope =
                leakage_slope(&quality, &snrs, 100_000, LeakageSide::AlphaSide, 5).unwrap();
            let target = -rat_f64(&alpha);
            assert!(
                (slope - target).abs() < 0.05,
                "alpha {} slope {slope} target {target}",
                crate::rational::fmt_rat(&alpha)
            );
        }
    }

    #[test]
    fn true_channel_covariance_is_identity() {
        // Sample covariance of h1 entries over many draws: diagonal 1, of
        // diagonal 0, within 2%.
        let quality = q(rat(1, 2), rat(1, 2));
        let snr = SnrPoint::from_db(30.0).unwrap();
        let n = 200_000usize;
        let (mut c00, mut c11) = (0.0, 0.0);
        let mut c01 = Complex64::new(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..n {
            let (s_h, s_g) = subband_variances(&quality, &snr, 1);
            let s = draw_subband_state(&mut rng, s_h, s_g);
            c00 += s.h.0[0].norm_sqr();
            c11 += s.h.0[1].norm_sqr();
            c01 += s.h.0[0] * s.h.0[1].conj();
        }
        let nf = n as f64;
        assert!((c00 / nf - 1.0).abs() < 0.02);
        assert!((c11 / nf - 1.0).abs() < 0.02);
        assert!((c01 / nf).norm() < 0.02);
    }
}
