//! A plane with one cone point of angle `theta >= 2 pi` at the origin.
//!
//! Points are polar pairs `(r, phi)` with `phi` taken mod `theta`. Two points whose angular gap
//! is at least `pi` are joined through the apex; otherwise the sector between them unfolds
//! isometrically into the Euclidean plane.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, to_f64, Q};

/// Absolute tolerance for identities along geodesics.
pub const TOLERANCE: f64 = 1e-9;

/// Cone angle given as a rational multiple of `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConfig {
    multiple: Q,
    theta: f64,
}

impl ConeConfig {
    pub fn new(multiple: Q) -> Result<Self> {
        if multiple < Q::from_integer(2) {
            return Err(Error::OutOfRange(format!("cone angle {}·π is below 2π", fmt_q(&multiple))));
        }
        Ok(ConeConfig { multiple, theta: to_f64(&multiple) * PI })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn multiple(&self) -> &Q {
        &self.multiple
    }

    /// Angular gap between two directions, at most `theta / 2`.
    pub fn gap(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs().rem_euclid(self.theta);
        d.min(self.theta - d)
    }
}

impl FromStr for ConeConfig {
    type Err = Error;

    /// Accepts `"5/2·π"`, `"5/2*pi"`, `"5/2pi"`, `"3π"` and the like.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let body = ["π", "pi"]
            .iter()
            .find_map(|suf| t.strip_suffix(suf))
            .ok_or_else(|| Error::Parse(format!("cone angle {s:?} is not of the form p/q·π")))?
            .trim_end();
        let body = body.strip_suffix(['*', '·']).unwrap_or(body).trim();
        let multiple = if body.is_empty() { Q::from_integer(1) } else { parse_q(body)? };
        ConeConfig::new(multiple)
    }
}

impl fmt::Display for ConeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·π", fmt_q(&self.multiple))
    }
}

impl Serialize for ConeConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            theta: String,
        }
        Repr { theta: self.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConeConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            theta: String,
        }
        Repr::deserialize(d)?.theta.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub r: f64,
    pub phi: f64,
}

impl ConePoint {
    pub fn new(r: f64, phi: f64, cfg: &ConeConfig) -> Result<Self> {
        if !(r.is_finite() && phi.is_finite()) || r < 0.0 {
            return Err(Error::OutOfRange(format!("invalid cone point ({r}, {phi})")));
        }
        Ok(Self::normalized(r, phi, cfg))
    }

    fn normalized(r: f64, phi: f64, cfg: &ConeConfig) -> Self {
        if r == 0.0 {
            return Self::apex();
        }
        let mut phi = phi.rem_euclid(cfg.theta);
        if phi >= cfg.theta {
            phi = 0.0;
        }
        ConePoint { r, phi }
    }

    pub fn apex() -> Self {
        ConePoint { r: 0.0, phi: 0.0 }
    }

    pub fn is_apex(&self) -> bool {
        self.r == 0.0
    }
}

fn through_apex(p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> bool {
    p.is_apex() || q.is_apex() || cfg.gap(p.phi, q.phi) >= PI
}

pub fn cone_distance(p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> f64 {
    if through_apex(p, q, cfg) {
        return p.r + q.r;
    }
    let half = 0.5 * cfg.gap(p.phi, q.phi);
    let s = half.sin();
    ((p.r - q.r).powi(2) + 4.0 * p.r * q.r * s * s).sqrt()
}

/// Constant-speed geodesic between two points, precomputed for repeated evaluation.
#[derive(Debug, Clone, Copy)]
enum ConeArc {
    Radial { p: ConePoint, q: ConePoint },
    // p sits at (p.r, 0) in a chart rotated by p.phi; q at `qx, qy`
    Chart { p: ConePoint, qx: f64, qy: f64 },
}

impl ConeArc {
    fn new(p: &ConePoint, q: &ConePoint, cfg: &ConeConfig) -> Self {
        if through_apex(p, q, cfg) {
            return ConeArc::Radial { p: *p, q: *q };
        }
        let d = (q.phi - p.phi).rem_euclid(cfg.theta);
        let delta = if d <= cfg.theta - d { d } else { d - cfg.theta };
        ConeArc::Chart { p: *p, qx: q.r * delta.cos(), qy: q.r * delta.sin() }
    }

    fn eval(&self, s: f64, cfg: &ConeConfig) -> ConePoint {
        match *self {
            ConeArc::Radial { p, q } => {
                let t = s * (p.r + q.r);
                if t <= p.r {
                    ConePoint::normalized(p.r - t, p.phi, cfg)
                } else {
                    ConePoint::normalized((t - p.r).min(q.r), q.phi, cfg)
                }
            }
            ConeArc::Chart { p, qx, qy } => {
                let x = (1.0 - s) * p.r + s * qx;
                let y = s * qy;
                ConePoint::normalized(x.hypot(y), p.phi + y.atan2(x), cfg)
            }
        }
    }
}

pub fn cone_geodesic_eval(p: &ConePoint, q: &ConePoint, s: f64, cfg: &ConeConfig) -> Result<ConePoint> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("geodesic parameter {s} outside [0, 1]")));
    }
    if s == 0.0 {
        return Ok(*p);
    }
    if s == 1.0 {
        return Ok(*q);
    }
    Ok(ConeArc::new(p, q, cfg).eval(s, cfg))
}

#[derive(Debug, Clone, Serialize)]
pub struct BroomReport {
    pub passed: bool,
    pub samples: usize,
    /// Largest `|d(c, b) - d(c, apex) - d(apex, b)|` over the samples `c` on `[a1, a2]`.
    pub max_error: f64,
    pub worst: Option<ConePoint>,
}

/// Checks that geodesics from points of `[a1, a2]` to `b` all run through the apex.
pub fn broom_check(a1: &ConePoint, a2: &ConePoint, b: &ConePoint, samples: usize, cfg: &ConeConfig) -> Result<BroomReport> {
    for (name, a) in [("a1", a1), ("a2", a2)] {
        if !through_apex(a, b, cfg) {
            return Err(Error::Precondition(format!(
                "the geodesic from {name} to b does not pass through the apex (angular gap {:.6} < π)",
                cfg.gap(a.phi, b.phi)
            )));
        }
    }
    if samples == 0 {
        return Err(Error::OutOfRange("broom check needs at least one sample".into()));
    }
    let apex = ConePoint::apex();
    let tail = cone_distance(&apex, b, cfg);
    let arc = ConeArc::new(a1, a2, cfg);
    let mut report = BroomReport { passed: true, samples, max_error: 0.0, worst: None };
    for k in 0..samples {
        let c = match k {
            0 => *a1,
            _ if k + 1 == samples => *a2,
            _ => arc.eval(k as f64 / (samples - 1) as f64, cfg),
        };
        let err = (cone_distance(&c, b, cfg) - cone_distance(&c, &apex, cfg) - tail).abs();
        if err > report.max_error {
            report.max_error = err;
            report.worst = Some(c);
        }
    }
    report.passed = report.max_error <= TOLERANCE;
    Ok(report)
}

// ---------------------------------------------------------------------------------------------
// Sampled hulls

/// Polar grid of pitch `h`: ring `k` has radius `k h` and `ceil(theta k)` equally spaced cells,
/// so neighbouring cells are at most about `h` apart.
#[derive(Debug, Clone, Copy)]
struct PolarGrid {
    h: f64,
    theta: f64,
}

impl PolarGrid {
    fn cells(&self, k: i64) -> i64 {
        (self.theta * k as f64).ceil() as i64
    }

    fn key(&self, p: &ConePoint) -> (i64, i64) {
        let k = (p.r / self.h).round() as i64;
        if k == 0 {
            return (0, 0);
        }
        let m = self.cells(k);
        (k, ((p.phi / self.theta * m as f64).round() as i64).rem_euclid(m))
    }

    fn point(&self, (k, j): (i64, i64)) -> ConePoint {
        if k == 0 {
            return ConePoint::apex();
        }
        ConePoint { r: k as f64 * self.h, phi: j as f64 * self.theta / self.cells(k) as f64 }
    }
}

fn conv1_cone(points: &[ConePoint], seeds: &[ConePoint], eps: f64, grid: &PolarGrid, cfg: &ConeConfig) -> Vec<ConePoint> {
    let mut keys: BTreeSet<(i64, i64)> = points.iter().map(|p| grid.key(p)).collect();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (p, q) = (&points[i], &points[j]);
            let n = (cone_distance(p, q, cfg) / eps).ceil() as usize;
            let arc = ConeArc::new(p, q, cfg);
            for k in 1..n {
                keys.insert(grid.key(&arc.eval(k as f64 / n as f64, cfg)));
            }
        }
    }
    let mut out: Vec<ConePoint> = keys.into_iter().map(|k| grid.point(k)).collect();
    out.extend_from_slice(seeds);
    out
}

fn directed(a: &[ConePoint], b: &[ConePoint], cfg: &ConeConfig) -> f64 {
    let mut worst = 0.0f64;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            best = best.min(cone_distance(p, q, cfg));
            if best <= worst {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

/// Symmetric Hausdorff distance between finite sets of cone points, brute force.
pub fn cone_hausdorff(a: &[ConePoint], b: &[ConePoint], cfg: &ConeConfig) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(directed(a, b, cfg).max(directed(b, a, cfg)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeBrunnReport {
    pub theta: ConeConfig,
    pub epsilon: f64,
    /// Sizes of the sampled conv^0 .. conv^3.
    pub sizes: [usize; 4],
    pub hausdorff_21: f64,
    pub hausdorff_32: f64,
    pub bound: f64,
    pub passed: bool,
    /// Grid snapping moves a point by at most this much per generation.
    pub snap_error: f64,
}

/// Sampled conv^1, conv^2 and conv^3 of a finite set; new points are snapped to a polar grid of
/// pitch `eps / 4` while the input points are kept exactly.
pub fn conv_iter_cone(points: &[ConePoint], iters: usize, eps: f64, cfg: &ConeConfig) -> Result<Vec<Vec<ConePoint>>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::OutOfRange(format!("sampling step {eps} must be positive")));
    }
    let grid = PolarGrid { h: eps / 4.0, theta: cfg.theta };
    let mut seeds: Vec<ConePoint> = points.iter().map(|p| ConePoint::normalized(p.r, p.phi, cfg)).collect();
    seeds.sort_by(|a, b| (a.r, a.phi).partial_cmp(&(b.r, b.phi)).expect("finite"));
    seeds.dedup();
    let mut stages = vec![seeds.clone()];
    for _ in 0..iters {
        let next = conv1_cone(stages.last().unwrap(), &seeds, eps, &grid, cfg);
        stages.push(next);
    }
    Ok(stages)
}

pub fn brunn2_verify(points: &[ConePoint], eps: f64, cfg: &ConeConfig) -> Result<ConeBrunnReport> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let stages = conv_iter_cone(points, 3, eps, cfg)?;
    let h21 = cone_hausdorff(&stages[2], &stages[1], cfg)?;
    let h32 = cone_hausdorff(&stages[3], &stages[2], cfg)?;
    let bound = 3.0 * eps;
    Ok(ConeBrunnReport {
        theta: *cfg,
        epsilon: eps,
        sizes: [stages[0].len(), stages[1].len(), stages[2].len(), stages[3].len()],
        hausdorff_21: h21,
        hausdorff_32: h32,
        bound,
        passed: h32 <= bound,
        snap_error: 0.25 * eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn cfg(s: &str) -> ConeConfig {
        s.parse().unwrap()
    }

    fn pt(r: f64, phi: f64, c: &ConeConfig) -> ConePoint {
        ConePoint::new(r, phi, c).unwrap()
    }

    #[test]
    fn parse_angles() {
        assert_eq!(cfg("5/2·π").multiple(), &q(5, 2));
        assert_eq!(cfg("3pi").multiple(), &q(3, 1));
        assert_eq!(cfg(" 2 * pi ").multiple(), &q(2, 1));
        assert!((cfg("5/2*π").theta() - 2.5 * PI).abs() < 1e-15);
        assert!("3/2·π".parse::<ConeConfig>().is_err());
        assert!("5/2".parse::<ConeConfig>().is_err());
        let j = serde_json::to_string(&cfg("5/2π")).unwrap();
        assert_eq!(j, r#"{"theta":"5/2·π"}"#);
        assert_eq!(serde_json::from_str::<ConeConfig>(&j).unwrap(), cfg("5/2π"));
    }

    #[test]
    fn distance_examples() {
        let c = cfg("5/2π");
        let d = cone_distance(&pt(1.0, 0.0, &c), &pt(1.0, PI / 2.0, &c), &c);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
        let d = cone_distance(&pt(1.0, 0.0, &c), &pt(1.0, 1.25 * PI, &c), &c);
        assert!((d - 2.0).abs() < 1e-12);
        let d = cone_distance(&ConePoint::apex(), &pt(3.0, 1.0, &c), &c);
        assert!((d - 3.0).abs() < 1e-12);
        assert_eq!(pt(0.0, 2.0, &c), ConePoint::apex());
        assert!((pt(1.0, -0.5, &c).phi - (2.5 * PI - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn geodesic_examples() {
        let c = cfg("5/2π");
        let p = pt(1.0, 0.0, &c);
        assert_eq!(cone_geodesic_eval(&p, &pt(2.0, 1.0, &c), 0.0, &c).unwrap(), p);
        let m = cone_geodesic_eval(&p, &pt(1.0, 1.25 * PI, &c), 0.5, &c).unwrap();
        assert!(m.r.abs() < 1e-12);
        let m = cone_geodesic_eval(&p, &pt(1.0, PI / 2.0, &c), 0.5, &c).unwrap();
        assert!((m.r - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((m.phi - PI / 4.0).abs() < 1e-12);
        // the short way round crosses phi = 0
        let m = cone_geodesic_eval(&pt(1.0, 0.25, &c), &pt(1.0, 2.5 * PI - 0.25, &c), 0.5, &c).unwrap();
        assert!(m.phi.abs() < 1e-12 || (m.phi - 2.5 * PI).abs() < 1e-12, "{m:?}");
        assert!(cone_geodesic_eval(&p, &p, 1.5, &c).is_err());
    }

    #[test]
    fn broom_examples() {
        let c = cfg("5/2π");
        let b = pt(1.0, 0.0, &c);
        let r = broom_check(&pt(1.0, 9.0 * PI / 8.0, &c), &pt(1.0, 11.0 * PI / 8.0, &c), &b, 9, &c).unwrap();
        assert!(r.passed, "{r:?}");
        let a = pt(2.0, 1.3 * PI, &c);
        assert!(broom_check(&a, &a, &b, 1, &c).unwrap().passed);
        assert!(matches!(broom_check(&pt(1.0, 0.5, &c), &a, &b, 5, &c), Err(Error::Precondition(_))));
    }

    #[test]
    fn two_points_are_already_convex() {
        let c = cfg("3π");
        let pts = [pt(0.4, 0.0, &c), pt(0.3, 1.5 * PI, &c)];
        let r = brunn2_verify(&pts, 0.05, &c).unwrap();
        // only snapping drift separates conv^2 from conv^1
        assert!(r.hausdorff_21 <= 0.05, "{r:?}");
        assert!(r.passed);
    }

    #[test]
    fn straddling_apex() {
        let c = cfg("5/2π");
        let pts = [pt(0.5, 0.0, &c), pt(0.5, 1.25 * PI, &c), pt(0.4, 0.6 * PI, &c)];
        let r = brunn2_verify(&pts, 0.05, &c).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
