//! Achievable degrees-of-freedom region and scheme-level DoF accounting.
//!
//! Everything here runs in exact rational arithmetic: corner coincidence,
//! saturation and containment are identities that floating point would blur.
//! The achievable region for a quality pair `(alpha, beta)` is the polygon
//! spanned by `(1,0)`, `(0,1)`, `(1,alpha)`, `(alpha,1)` and the two mixed
//! corners
//! `(min((2+alpha)/3, beta), max((2+alpha)/3, (2-beta+alpha)/2))` and its
//! swap, convexified by time sharing with `(0, 0)`.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::CsitQuality;
use crate::error::{Error, Result};
use crate::rational::{fmt_rat, rat, rat_f64, rat_serde, rint, Rat};
use crate::scheme::{Scheme, User};
use crate::sic::{fit_user_slopes, RateReport};

/// One DoF pair in per-channel-use units.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DofPoint {
    #[serde(with = "rat_serde")]
    pub d1: Rat,
    #[serde(with = "rat_serde")]
    pub d2: Rat,
}

impl DofPoint {
    pub fn new(d1: Rat, d2: Rat) -> Self {
        DofPoint { d1, d2 }
    }

    pub fn swap(&self) -> DofPoint {
        DofPoint::new(self.d2.clone(), self.d1.clone())
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [rat_f64(&self.d1), rat_f64(&self.d2)]
    }
}

impl std::fmt::Display for DofPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", fmt_rat(&self.d1), fmt_rat(&self.d2))
    }
}

/// Corner list plus the convex time-sharing polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofRegion {
    pub quality: CsitQuality,
    /// The stated corner points (duplicates possible when corners merge).
    pub corners: Vec<DofPoint>,
    /// Convex hull of the corners and the origin, counter-clockwise.
    pub hull: Vec<DofPoint>,
}

/// Exact corner points of the achievable region.
pub fn corner_points(quality: &CsitQuality) -> Vec<DofPoint> {
    let a = quality.alpha().clone();
    let one = rint(1);
    let thr = (rint(2) + &a) / rint(3);
    let cd = (rint(2) - quality.beta() + &a) / rint(2);
    let lo = thr.clone().min(quality.beta().clone());
    let hi = thr.max(cd);
    let mixed = DofPoint::new(lo, hi);
    vec![
        DofPoint::new(one.clone(), Rat::zero()),
        DofPoint::new(Rat::zero(), one.clone()),
        DofPoint::new(one, a.clone()),
        DofPoint::new(a, rint(1)),
        mixed.swap(),
        mixed,
    ]
}

fn cross(o: &DofPoint, a: &DofPoint, b: &DofPoint) -> Rat {
    (&a.d1 - &o.d1) * (&b.d2 - &o.d2) - (&a.d2 - &o.d2) * (&b.d1 - &o.d1)
}

fn convex_hull(points: &[DofPoint]) -> Vec<DofPoint> {
    let mut pts: Vec<DofPoint> = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<DofPoint> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<DofPoint> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Builds the full region: corners plus time-sharing hull with the origin.
pub fn region(quality: &CsitQuality) -> DofRegion {
    let corners = corner_points(quality);
    let mut pts = corners.clone();
    pts.push(DofPoint::new(Rat::zero(), Rat::zero()));
    let hull = convex_hull(&pts);
    DofRegion {
        quality: quality.clone(),
        corners,
        hull,
    }
}

/// Exact point-in-convex-polygon test, boundary inclusive.
pub fn contains(region: &DofRegion, point: &DofPoint) -> bool {
    match region.hull.len() {
        0 => false,
        1 => region.hull[0] == *point,
        2 => {
            cross(&region.hull[0], &region.hull[1], point).is_zero()
                && point >= region.hull.iter().min().unwrap()
                && point <= region.hull.iter().max().unwrap()
        }
        n => (0..n).all(|i| !cross(&region.hull[i], &region.hull[(i + 1) % n], point).is_negative()),
    }
}

/// `region(alpha, beta1)` contained in `region(alpha', beta2)`: every hull
/// vertex of the smaller lies inside the larger.
pub fn region_subset(inner: &DofRegion, outer: &DofRegion) -> bool {
    inner.hull.iter().all(|p| contains(outer, p))
}

/// Analytic DoF of one scheme, with its channel-use normalization attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDof {
    pub scheme: Scheme,
    /// Per-user DoF in the scheme's own `S` normalization.
    pub point: DofPoint,
    /// Channel-use charge `S` behind that normalization.
    #[serde(with = "rat_serde")]
    pub charge: Rat,
    pub n_subbands: usize,
}

impl SchemeDof {
    /// Rescales into full-power channel uses (one unit per subband), the
    /// normalization in which the region itself is stated. Power-backed-off
    /// schemes such as plain ZFBF or reused MAT look better in their own
    /// `P^S` accounting than any full-power region admits, so containment
    /// checks must happen here.
    pub fn full_power_point(&self) -> DofPoint {
        let factor = &self.charge / rint(self.n_subbands as i64);
        DofPoint::new(&self.point.d1 * &factor, &self.point.d2 * &factor)
    }
}

/// Closed-form DoF per scheme.
pub fn analytic_scheme_dof(
    scheme: Scheme,
    quality: &CsitQuality,
    common_owner: User,
) -> Result<SchemeDof> {
    let a = quality.alpha().clone();
    let b = quality.beta().clone();
    let thr = (rint(2) + &a) / rint(3);
    let out = match scheme {
        Scheme::Zfbf => {
            if b.is_zero() {
                return Err(Error::DegenerateScheme {
                    scheme: "zfbf",
                    reason: "beta = 0 spends zero channel use; per-use DoF is undefined".into(),
                });
            }
            let per_user = (&a + &b) / (rint(2) * &b);
            SchemeDof {
                scheme,
                point: DofPoint::new(per_user.clone(), per_user),
                charge: rint(2) * &b,
                n_subbands: 2,
            }
        }
        Scheme::MatReuse => {
            if b.is_zero() {
                return Err(Error::DegenerateScheme {
                    scheme: "mat-reuse",
                    reason: "beta = 0 spends zero channel use; per-use DoF is undefined".into(),
                });
            }
            SchemeDof {
                scheme,
                point: DofPoint::new(rat(2, 3), rat(2, 3)),
                charge: rint(3) * &b,
                n_subbands: 3,
            }
        }
        Scheme::HybridCaseI => {
            if b > thr {
                return Err(Error::CaseIThreshold {
                    alpha: fmt_rat(&a),
                    beta: fmt_rat(&b),
                });
            }
            let big = (rint(2) + &a - &b) / rint(2);
            let point = match common_owner {
                User::User1 => DofPoint::new(big, b),
                User::User2 => DofPoint::new(b, big),
            };
            SchemeDof {
                scheme,
                point,
                charge: rint(2),
                n_subbands: 2,
            }
        }
        Scheme::HybridCaseII => {
            if b <= thr {
                return Err(Error::CaseIIThreshold {
                    alpha: fmt_rat(&a),
                    beta: fmt_rat(&b),
                });
            }
            // Real-valued block count: charge 2L + 1 with
            // L = (1 - alpha)/(3 beta - alpha - 2); the DoF itself is
            // block-count free.
            let r3 = rint(3) * &b - &a - rint(2);
            let l = (rint(1) - &a) / r3;
            let charge = rint(2) * &l + rint(1);
            let e = thr;
            // Subband count only meaningful for integer L; round up so the
            // full-power conversion stays conservative for fractional L.
            let n_subbands = (rat_f64(&charge)).ceil() as usize;
            SchemeDof {
                scheme,
                point: DofPoint::new(e.clone(), e),
                charge,
                n_subbands,
            }
        }
        Scheme::ScZf => {
            let point = match common_owner {
                User::User1 => DofPoint::new(rint(1), a),
                User::User2 => DofPoint::new(a, rint(1)),
            };
            SchemeDof {
                scheme,
                point,
                charge: rint(2),
                n_subbands: 2,
            }
        }
    };
    Ok(out)
}

/// Outcome of checking a Monte-Carlo report against an analytic target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub scheme: Scheme,
    #[serde(with = "rat_serde")]
    pub alpha: Rat,
    #[serde(with = "rat_serde")]
    pub beta: Rat,
    pub fitted: [f64; 2],
    pub target: [f64; 2],
    pub residual: [f64; 2],
    pub tolerance: f64,
    pub pass: bool,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} alpha={} beta={}: fitted=({:.4}, {:.4}) target=({:.4}, {:.4}) tol={} -> {}",
            self.scheme,
            fmt_rat(&self.alpha),
            fmt_rat(&self.beta),
            self.fitted[0],
            self.fitted[1],
            self.target[0],
            self.target[1],
            self.tolerance,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Fits per-user rate slopes from a sweep, divides by the plan's channel-use
/// charge and compares against an analytic DoF point componentwise.
pub fn reconcile(report: &RateReport, analytic: &DofPoint, tolerance: f64) -> Result<Verdict> {
    if report.slices.len() < 3 {
        return Err(Error::TooFewSnrPoints(report.slices.len()));
    }
    let slopes = fit_user_slopes(report)?;
    let s = rat_f64(&report.s_charge);
    let fitted = [slopes[0] / s, slopes[1] / s];
    let target = analytic.to_f64();
    let residual = [fitted[0] - target[0], fitted[1] - target[1]];
    let pass = residual.iter().all(|r| r.abs() <= tolerance);
    Ok(Verdict {
        scheme: report.scheme,
        alpha: report.alpha.clone(),
        beta: report.beta.clone(),
        fitted,
        target,
        residual,
        tolerance,
        pass,
    })
}

/// Region serialization document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDocument {
    pub schema_version: u32,
    pub alpha: String,
    pub beta: String,
    pub corners: Vec<[String; 2]>,
    pub hull_vertices: Vec<[String; 2]>,
}

impl RegionDocument {
    pub fn from_region(r: &DofRegion) -> Self {
        let enc = |p: &DofPoint| [fmt_rat(&p.d1), fmt_rat(&p.d2)];
        RegionDocument {
            schema_version: 1,
            alpha: fmt_rat(r.quality.alpha()),
            beta: fmt_rat(r.quality.beta()),
            corners: r.corners.iter().map(enc).collect(),
            hull_vertices: r.hull.iter().map(enc).collect(),
        }
    }
}
