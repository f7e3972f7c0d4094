//! Cumulative acceptance curves: the fraction of the potential pool willing
//! to take a position, as a function of the offered/demanded salary ratio.
//!
//! All curves are cumulative distribution functions on `[0, ∞)`: they start
//! at exactly 0 for a zero offer, never decrease, and saturate at 1. The
//! normal form is truncated at zero and renormalized; the log-normal form is
//! the right-skewed alternative, rising quickly at first and needing a very
//! high ratio to reach the last few percent.

use std::f64::consts::SQRT_2;

use statrs::function::erf::{erfc, erfc_inv};
use thiserror::Error;

use crate::model::LookupDef;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("salary ratio must be a finite value >= 0, got {0}")]
    NegativeRatio(f64),
    #[error("{0} is outside the allowed domain")]
    Domain(String),
    #[error("curve is flat at fraction {0}; quantile is not unique")]
    NotInvertible(f64),
    #[error("infeasible anchors: {0}")]
    InfeasibleAnchors(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

/// Offered salary divided by the average demanded salary.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SalaryRatio(f64);

impl SalaryRatio {
    pub fn new(value: f64) -> Result<Self, CurveError> {
        if value.is_finite() && value >= 0.0 {
            Ok(SalaryRatio(value))
        } else {
            Err(CurveError::NegativeRatio(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveAnchor {
    pub ratio: f64,
    pub fraction: f64,
}

impl CurveAnchor {
    pub fn new(ratio: f64, fraction: f64) -> Self {
        CurveAnchor { ratio, fraction }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Normal,
    LogNormal,
    Piecewise,
}

impl std::str::FromStr for CurveKind {
    type Err = CurveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(CurveKind::Normal),
            "lognormal" => Ok(CurveKind::LogNormal),
            "piecewise" | "points" => Ok(CurveKind::Piecewise),
            other => Err(CurveError::Domain(format!("curve kind `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WillingnessCurve {
    /// Normal CDF truncated to `[0, ∞)` and renormalized.
    NormalCdf { mu: f64, sigma: f64 },
    LogNormalCdf { log_median: f64, log_sigma: f64 },
    /// Linear interpolation between points; first fraction 0, last 1.
    PiecewiseCumulative(Vec<(f64, f64)>),
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail, `1 - Φ(x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of [`normal_cdf`] for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn truncated_normal_cdf(r: f64, mu: f64, sigma: f64) -> f64 {
    let a = -mu / sigma;
    let b = (r - mu) / sigma;
    let f = if a <= 0.0 {
        (normal_cdf(b) - normal_cdf(a)) / normal_sf(a)
    } else {
        1.0 - normal_sf(b) / normal_sf(a)
    };
    f.clamp(0.0, 1.0)
}

impl WillingnessCurve {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self, CurveError> {
        if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
            return Err(CurveError::InvalidCurve(format!(
                "normal(mu={mu}, sigma={sigma}) needs finite mu and sigma > 0"
            )));
        }
        Ok(WillingnessCurve::NormalCdf { mu, sigma })
    }

    pub fn lognormal(log_median: f64, log_sigma: f64) -> Result<Self, CurveError> {
        if !(log_median.is_finite() && log_sigma.is_finite() && log_sigma > 0.0) {
            return Err(CurveError::InvalidCurve(format!(
                "lognormal(log_median={log_median}, log_sigma={log_sigma}) needs log_sigma > 0"
            )));
        }
        Ok(WillingnessCurve::LogNormalCdf {
            log_median,
            log_sigma,
        })
    }

    pub fn piecewise(points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        let bad = |m: &str| Err(CurveError::InvalidCurve(m.to_string()));
        if points.len() < 2 {
            return bad("piecewise curve needs at least two points");
        }
        if points
            .iter()
            .any(|&(r, f)| !r.is_finite() || !f.is_finite() || r < 0.0)
        {
            return bad("piecewise points must be finite with ratio >= 0");
        }
        if points
            .windows(2)
            .any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1)
        {
            return bad("piecewise points must be nondecreasing in both coordinates");
        }
        if points[0].1 != 0.0 || points[points.len() - 1].1 != 1.0 {
            return bad("piecewise fractions must start at 0 and end at 1");
        }
        Ok(WillingnessCurve::PiecewiseCumulative(points))
    }

    /// Median at ratio 1.0 with 90% willing at ratio 1.5.
    pub fn default_normal() -> Self {
        calibrate(CurveKind::Normal, &DEFAULT_ANCHORS).expect("default anchors are feasible")
    }

    /// Log-normal through the same two anchors as [`Self::default_normal`].
    pub fn default_skewed() -> Self {
        calibrate(CurveKind::LogNormal, &DEFAULT_ANCHORS).expect("default anchors are feasible")
    }

    pub fn fraction_willing(&self, ratio: SalaryRatio) -> f64 {
        let r = ratio.value();
        match self {
            WillingnessCurve::NormalCdf { mu, sigma } => truncated_normal_cdf(r, *mu, *sigma),
            WillingnessCurve::LogNormalCdf {
                log_median,
                log_sigma,
            } => {
                if r == 0.0 {
                    0.0
                } else {
                    normal_cdf((r.ln() - log_median) / log_sigma)
                }
            }
            WillingnessCurve::PiecewiseCumulative(points) => interpolate(points, r),
        }
    }

    /// Ratio at which `fraction` of the pool is willing.
    pub fn quantile(&self, fraction: f64) -> Result<SalaryRatio, CurveError> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(CurveError::Domain(format!("fraction {fraction} (need 0 < p < 1)")));
        }
        let r = match self {
            WillingnessCurve::NormalCdf { mu, sigma } => {
                let a = -mu / sigma;
                let tail = normal_sf(a);
                let lower = normal_cdf(a) + fraction * tail;
                let b = if lower < 0.5 {
                    normal_quantile(lower)
                } else {
                    -normal_quantile(tail * (1.0 - fraction))
                };
                (mu + sigma * b).max(0.0)
            }
            WillingnessCurve::LogNormalCdf {
                log_median,
                log_sigma,
            } => {
                let z = if fraction <= 0.5 {
                    normal_quantile(fraction)
                } else {
                    -normal_quantile(1.0 - fraction)
                };
                (log_median + log_sigma * z).exp()
            }
            WillingnessCurve::PiecewiseCumulative(points) => piecewise_inverse(points, fraction)?,
        };
        SalaryRatio::new(r)
    }

    /// Parameters as `(name, value)` pairs, for reporting.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match self {
            WillingnessCurve::NormalCdf { mu, sigma } => vec![("mu", *mu), ("sigma", *sigma)],
            WillingnessCurve::LogNormalCdf {
                log_median,
                log_sigma,
            } => vec![("log_median", *log_median), ("log_sigma", *log_sigma)],
            WillingnessCurve::PiecewiseCumulative(points) => points
                .iter()
                .flat_map(|&(r, f)| [("ratio", r), ("fraction", f)])
                .collect(),
        }
    }
}

/// The two anchors used throughout: half the pool at ratio 1, 90% at 1.5.
pub const DEFAULT_ANCHORS: [CurveAnchor; 2] = [
    CurveAnchor {
        ratio: 1.0,
        fraction: 0.5,
    },
    CurveAnchor {
        ratio: 1.5,
        fraction: 0.9,
    },
];

pub fn fraction_willing(curve: &WillingnessCurve, ratio: f64) -> Result<f64, CurveError> {
    Ok(curve.fraction_willing(SalaryRatio::new(ratio)?))
}

pub fn quantile(curve: &WillingnessCurve, fraction: f64) -> Result<f64, CurveError> {
    curve.quantile(fraction).map(SalaryRatio::value)
}

/// Number of people who take the offer: `fraction × pool`.
pub fn exploitee_count(fraction: f64, pool: f64) -> Result<f64, CurveError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CurveError::Domain(format!("fraction {fraction}")));
    }
    if !(pool.is_finite() && pool >= 0.0) {
        return Err(CurveError::Domain(format!("pool {pool}")));
    }
    Ok(fraction * pool)
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let (x0, y0) = points[0];
    if x <= x0 {
        return y0;
    }
    let last = points[points.len() - 1];
    if x >= last.0 {
        return last.1;
    }
    // last point with ratio <= x; duplicates resolve to the right
    let i = points.partition_point(|p| p.0 <= x) - 1;
    let (xa, ya) = points[i];
    let (xb, yb) = points[i + 1];
    ya + (yb - ya) * (x - xa) / (xb - xa)
}

fn piecewise_inverse(points: &[(f64, f64)], p: f64) -> Result<f64, CurveError> {
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 == p && y1 == p && x1 > x0 {
            return Err(CurveError::NotInvertible(p));
        }
    }
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x1 > x0 && y0 < p && p <= y1 {
            return Ok(x0 + (p - y0) * (x1 - x0) / (y1 - y0));
        }
    }
    Err(CurveError::NotInvertible(p))
}

fn check_anchors(anchors: &[CurveAnchor]) -> Result<Vec<CurveAnchor>, CurveError> {
    let infeasible = |m: String| Err(CurveError::InfeasibleAnchors(m));
    for a in anchors {
        if !(a.ratio.is_finite() && a.ratio >= 0.0) {
            return infeasible(format!("ratio {} must be finite and >= 0", a.ratio));
        }
        if !(0.0..=1.0).contains(&a.fraction) {
            return infeasible(format!("fraction {} must lie in [0, 1]", a.fraction));
        }
    }
    let mut sorted = anchors.to_vec();
    sorted.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
    for w in sorted.windows(2) {
        if w[1].ratio == w[0].ratio {
            return infeasible(format!("identical ratios {}", w[0].ratio));
        }
        if w[1].fraction <= w[0].fraction {
            return infeasible(format!(
                "fractions must increase with ratio: ({}, {}) then ({}, {})",
                w[0].ratio, w[0].fraction, w[1].ratio, w[1].fraction
            ));
        }
    }
    Ok(sorted)
}

fn two_interior(kind: &str, anchors: &[CurveAnchor]) -> Result<(CurveAnchor, CurveAnchor), CurveError> {
    if anchors.len() != 2 {
        return Err(CurveError::InfeasibleAnchors(format!(
            "{kind} calibration needs exactly 2 anchors, got {}",
            anchors.len()
        )));
    }
    for a in anchors {
        if !(a.fraction > 0.0 && a.fraction < 1.0) || a.ratio <= 0.0 {
            return Err(CurveError::InfeasibleAnchors(format!(
                "{kind} anchors need ratio > 0 and 0 < fraction < 1, got ({}, {})",
                a.ratio, a.fraction
            )));
        }
    }
    Ok((anchors[0], anchors[1]))
}

/// Fits a curve through the given anchors.
///
/// Two-parameter forms take exactly two anchors. The piecewise form
/// interpolates the anchors, adding `(0, 0)` in front and `(2·r_last, 1)` at
/// the end when they are not already present.
pub fn calibrate(kind: CurveKind, anchors: &[CurveAnchor]) -> Result<WillingnessCurve, CurveError> {
    let anchors = check_anchors(anchors)?;
    match kind {
        CurveKind::LogNormal => {
            let (lo, hi) = two_interior("lognormal", &anchors)?;
            let z_lo = normal_quantile(lo.fraction);
            let z_hi = normal_quantile(hi.fraction);
            let log_sigma = (hi.ratio.ln() - lo.ratio.ln()) / (z_hi - z_lo);
            let log_median = lo.ratio.ln() - log_sigma * z_lo;
            WillingnessCurve::lognormal(log_median, log_sigma)
        }
        CurveKind::Normal => {
            let (lo, hi) = two_interior("normal", &anchors)?;
            let (mu, sigma) = fit_truncated_normal(lo, hi)?;
            WillingnessCurve::normal(mu, sigma)
        }
        CurveKind::Piecewise => {
            if anchors.len() < 2 {
                return Err(CurveError::InfeasibleAnchors(
                    "piecewise calibration needs at least 2 anchors".into(),
                ));
            }
            let mut points: Vec<(f64, f64)> = anchors.iter().map(|a| (a.ratio, a.fraction)).collect();
            if points[0].0 == 0.0 && points[0].1 != 0.0 {
                return Err(CurveError::InfeasibleAnchors(
                    "fraction at ratio 0 must be 0".into(),
                ));
            }
            if points[0] != (0.0, 0.0) {
                points.insert(0, (0.0, 0.0));
            }
            let last = points[points.len() - 1];
            if last.1 < 1.0 {
                points.push((2.0 * last.0, 1.0));
            }
            WillingnessCurve::piecewise(points)
        }
    }
}

/// Solves for (mu, sigma) of the zero-truncated normal through two anchors.
///
/// For a fixed sigma the lower anchor pins mu (F at a fixed ratio falls as mu
/// grows); sigma is then chosen so the upper anchor holds. Both searches are
/// plain bisection run to exhaustion of floating-point resolution.
fn fit_truncated_normal(lo: CurveAnchor, hi: CurveAnchor) -> Result<(f64, f64), CurveError> {
    let mu_for = |sigma: f64| -> Option<f64> {
        let g = |mu: f64| truncated_normal_cdf(lo.ratio, mu, sigma) - lo.fraction;
        let (mut a, mut b) = (-35.0 * sigma, lo.ratio + 40.0 * sigma);
        if !(g(a) > 0.0 && g(b) < 0.0) {
            return None;
        }
        bisect(&mut a, &mut b, g);
        Some(0.5 * (a + b))
    };
    let h = |sigma: f64| -> Option<f64> {
        mu_for(sigma).map(|mu| truncated_normal_cdf(hi.ratio, mu, sigma) - hi.fraction)
    };

    let spread = hi.ratio - lo.ratio;
    let mut s_lo = spread * 1e-3;
    let mut s_hi = spread;
    let infeasible = || {
        CurveError::InfeasibleAnchors(format!(
            "no zero-truncated normal passes through ({}, {}) and ({}, {})",
            lo.ratio, lo.fraction, hi.ratio, hi.fraction
        ))
    };
    if h(s_lo).ok_or_else(infeasible)? <= 0.0 {
        return Err(infeasible());
    }
    let mut grow = 0;
    loop {
        match h(s_hi) {
            Some(v) if v < 0.0 => break,
            Some(_) if grow < 60 => {
                s_lo = s_hi;
                s_hi *= 2.0;
                grow += 1;
            }
            _ => return Err(infeasible()),
        }
    }
    bisect(&mut s_lo, &mut s_hi, |s| h(s).unwrap_or(f64::NAN));
    let sigma = 0.5 * (s_lo + s_hi);
    let mu = mu_for(sigma).ok_or_else(infeasible)?;
    let ok = (truncated_normal_cdf(lo.ratio, mu, sigma) - lo.fraction).abs() < 1e-12
        && (truncated_normal_cdf(hi.ratio, mu, sigma) - hi.fraction).abs() < 1e-12;
    if ok {
        Ok((mu, sigma))
    } else {
        Err(infeasible())
    }
}

/// Bisection on `[a, b]` where `f(a) > 0 > f(b)`; stops when the midpoint
/// no longer moves.
fn bisect(a: &mut f64, b: &mut f64, f: impl Fn(f64) -> f64) {
    for _ in 0..2000 {
        let m = 0.5 * (*a + *b);
        if m <= a.min(*b) || m >= a.max(*b) {
            break;
        }
        let v = f(m);
        if v > 0.0 {
            *a = m;
        } else if v < 0.0 {
            *b = m;
        } else {
            *a = m;
            *b = m;
            break;
        }
    }
}

/// A lookup resolved for evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum LookupCurve {
    Willingness(WillingnessCurve),
    Table(Vec<(f64, f64)>),
}

impl LookupCurve {
    /// Willingness curves treat negative inputs as a zero ratio; tables hold
    /// their end values outside the tabulated range.
    pub fn eval(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self {
            LookupCurve::Willingness(c) => {
                c.fraction_willing(SalaryRatio(x.clamp(0.0, f64::MAX)))
            }
            LookupCurve::Table(points) => interpolate(points, x),
        }
    }
}

pub fn resolve_lookup(name: &str, def: &LookupDef) -> Result<LookupCurve, CurveError> {
    let _ = name;
    match def {
        LookupDef::Normal { median, ratio90 } => calibrate(
            CurveKind::Normal,
            &[CurveAnchor::new(*median, 0.5), CurveAnchor::new(*ratio90, 0.9)],
        )
        .map(LookupCurve::Willingness),
        LookupDef::LogNormal { median, ratio90 } => calibrate(
            CurveKind::LogNormal,
            &[CurveAnchor::new(*median, 0.5), CurveAnchor::new(*ratio90, 0.9)],
        )
        .map(LookupCurve::Willingness),
        LookupDef::Points(points) => {
            if points.is_empty() {
                return Err(CurveError::InvalidCurve("points table is empty".into()));
            }
            if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(CurveError::InvalidCurve("points must be finite".into()));
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(CurveError::InvalidCurve(
                    "points must have strictly increasing x".into(),
                ));
            }
            Ok(LookupCurve::Table(points.clone()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn standard_normal_against_quadrature() {
        // independent oracle: integrate the Gaussian density from -12
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let oracle = simpson(pdf, -12.0, 1.2816, 20_000);
        assert!((oracle - 0.9).abs() < 5e-4);
        assert!((normal_cdf(1.2816) - oracle).abs() < 1e-10);
    }

    #[test]
    fn default_median_is_one_half() {
        let c = WillingnessCurve::default_normal();
        assert!((fraction_willing(&c, 1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((quantile(&c, 0.5).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_offer_gives_exactly_zero() {
        for c in [
            WillingnessCurve::default_normal(),
            WillingnessCurve::default_skewed(),
            calibrate(CurveKind::Piecewise, &DEFAULT_ANCHORS).unwrap(),
        ] {
            assert_eq!(fraction_willing(&c, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn negative_ratio_rejected() {
        let c = WillingnessCurve::default_normal();
        assert!(matches!(
            fraction_willing(&c, -0.1),
            Err(CurveError::NegativeRatio(_))
        ));
    }

    #[test]
    fn normal_calibration_hits_anchors() {
        let c = calibrate(CurveKind::Normal, &DEFAULT_ANCHORS).unwrap();
        assert!((fraction_willing(&c, 1.0).unwrap() - 0.5).abs() < 1e-9);
        assert!((fraction_willing(&c, 1.5).unwrap() - 0.9).abs() < 1e-9);
    }

    #[test]
    fn identical_ratios_infeasible() {
        let r = calibrate(
            CurveKind::Normal,
            &[CurveAnchor::new(1.0, 0.5), CurveAnchor::new(1.0, 0.9)],
        );
        assert!(matches!(r, Err(CurveError::InfeasibleAnchors(_))));
    }

    #[test]
    fn decreasing_fractions_infeasible() {
        for kind in [CurveKind::Normal, CurveKind::LogNormal, CurveKind::Piecewise] {
            let r = calibrate(kind, &[CurveAnchor::new(1.0, 0.5), CurveAnchor::new(2.0, 0.3)]);
            assert!(matches!(r, Err(CurveError::InfeasibleAnchors(_))), "{kind:?}");
        }
    }

    #[test]
    fn wrong_anchor_count() {
        let three = [
            CurveAnchor::new(0.5, 0.1),
            CurveAnchor::new(1.0, 0.5),
            CurveAnchor::new(1.5, 0.9),
        ];
        assert!(calibrate(CurveKind::Normal, &three).is_err());
        assert!(calibrate(CurveKind::Piecewise, &three).is_ok());
    }

    #[test]
    fn saturates_at_high_ratio() {
        for c in [WillingnessCurve::default_normal(), WillingnessCurve::default_skewed()] {
            assert!(fraction_willing(&c, 10.0).unwrap() > 0.999);
        }
    }

    #[test]
    fn skewed_needs_higher_price_for_last_few() {
        let norm = WillingnessCurve::default_normal();
        let skew = WillingnessCurve::default_skewed();
        let qn = quantile(&norm, 0.99).unwrap();
        let qs = quantile(&skew, 0.99).unwrap();
        assert!(qs > qn, "skewed {qs} vs normal {qn}");
    }

    #[test]
    fn lognormal_through_same_anchors_has_thinner_lower_tail() {
        // Through (1.0, 0.5) and (1.5, 0.9) the log-normal sits below the
        // truncated normal at 0.6; its early rise only shows once the spread
        // is widened.
        let norm = WillingnessCurve::default_normal();
        let skew = WillingnessCurve::default_skewed();
        let fn_ = fraction_willing(&norm, 0.6).unwrap();
        let fs = fraction_willing(&skew, 0.6).unwrap();
        assert!(fs < fn_, "skewed {fs} normal {fn_}");
        let wide = calibrate(
            CurveKind::LogNormal,
            &[CurveAnchor::new(1.0, 0.5), CurveAnchor::new(2.5, 0.9)],
        )
        .unwrap();
        assert!(fraction_willing(&wide, 0.6).unwrap() > fn_);
    }

    #[test]
    fn piecewise_flat_segment_not_invertible() {
        let c = WillingnessCurve::piecewise(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (3.0, 1.0)])
            .unwrap();
        assert!(matches!(quantile(&c, 0.5), Err(CurveError::NotInvertible(_))));
        assert!((quantile(&c, 0.25).unwrap() - 0.5).abs() < 1e-12);
        assert!((quantile(&c, 0.75).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn piecewise_calibration_extends_ends() {
        let c = calibrate(
            CurveKind::Piecewise,
            &[CurveAnchor::new(1.0, 0.5), CurveAnchor::new(1.5, 0.9)],
        )
        .unwrap();
        assert_eq!(
            c,
            WillingnessCurve::PiecewiseCumulative(vec![(0.0, 0.0), (1.0, 0.5), (1.5, 0.9), (3.0, 1.0)])
        );
    }

    #[test]
    fn exploitee_counts() {
        assert_eq!(exploitee_count(0.5, 1000.0).unwrap(), 500.0);
        assert_eq!(exploitee_count(0.0, 1e6).unwrap(), 0.0);
        assert_eq!(exploitee_count(1.0, 250.0).unwrap(), 250.0);
        assert!(exploitee_count(1.5, 10.0).is_err());
        assert!(exploitee_count(0.5, -1.0).is_err());
    }

    #[test]
    fn table_lookup_holds_ends() {
        let t = LookupCurve::Table(vec![(0.0, 1.0), (1.0, 3.0)]);
        assert_eq!(t.eval(-5.0), 1.0);
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(9.0), 3.0);
    }
}
