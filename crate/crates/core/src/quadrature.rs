//! Gauss-Legendre integration along piecewise paths in the complex plane.
//!
//! Paths are sequences of straight and circular-arc segments, each split
//! into a fixed number of panels. Integrands are evaluated strictly in path
//! order, so an integrand may carry state (for example the sign of a square
//! root continued along the path).

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{GridKind, ParamGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaussRule {
    #[default]
    GaussLegendre16,
    GaussLegendre32,
}

impl GaussRule {
    pub fn points(self) -> usize {
        match self {
            GaussRule::GaussLegendre16 => 16,
            GaussRule::GaussLegendre32 => 32,
        }
    }

    /// Nodes on `[-1, 1]` in ascending order, with their weights.
    pub fn nodes_weights(self) -> &'static [(f64, f64)] {
        static GL16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
        static GL32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
        match self {
            GaussRule::GaussLegendre16 => GL16.get_or_init(|| gauss_legendre(16)),
            GaussRule::GaussLegendre32 => GL32.get_or_init(|| gauss_legendre(32)),
        }
    }
}

/// Legendre roots by Newton iteration from the Chebyshev-like initial guess.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut x = -(PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Accumulator type for path integrals.
pub trait PathValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add_scaled(&mut self, other: &Self, w: Complex64);
    fn is_finite(&self) -> bool;
    /// Largest componentwise modulus of `self - other`.
    fn distance(&self, other: &Self) -> f64;
}

impl PathValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add_scaled(&mut self, other: &Self, w: Complex64) {
        *self += other * w;
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
}

impl<const N: usize> PathValue for [Complex64; N] {
    fn zero() -> Self {
        [Complex64::new(0.0, 0.0); N]
    }
    fn add_scaled(&mut self, other: &Self, w: Complex64) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b * w;
        }
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
    fn distance(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// A (possibly stateful) integrand. `start` is called with the first
/// point of every path before any `eval`.
pub trait PathIntegrand {
    type Output: PathValue;
    fn start(&mut self, _base: Complex64) {}
    fn eval(&mut self, w: Complex64) -> Self::Output;
}

impl<F> PathIntegrand for F
where
    F: FnMut(Complex64) -> Complex64,
{
    type Output = Complex64;
    fn eval(&mut self, w: Complex64) -> Complex64 {
        self(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line {
        from: Complex64,
        to: Complex64,
    },
    /// Arc of `|w - center| = radius` swept from `from_angle` to
    /// `to_angle` (counterclockwise when `to_angle > from_angle`).
    Arc {
        center: Complex64,
        radius: f64,
        from_angle: f64,
        to_angle: f64,
    },
}

impl Segment {
    pub fn point(&self, tau: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => from + (to - from) * tau,
            Segment::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => center + Complex64::from_polar(radius, from_angle + (to_angle - from_angle) * tau),
        }
    }

    /// `dw/dtau` for `tau in [0, 1]`.
    pub fn tangent(&self, tau: f64) -> Complex64 {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc {
                radius,
                from_angle,
                to_angle,
                ..
            } => {
                let sweep = to_angle - from_angle;
                let a = from_angle + sweep * tau;
                Complex64::new(0.0, sweep) * Complex64::from_polar(radius, a)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.point(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.point(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { from, to } => (to - from).norm(),
            Segment::Arc {
                radius,
                from_angle,
                to_angle,
                ..
            } => radius * (to_angle - from_angle).abs(),
        }
    }

    pub fn conj(&self) -> Segment {
        match *self {
            Segment::Line { from, to } => Segment::Line {
                from: from.conj(),
                to: to.conj(),
            },
            Segment::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => Segment::Arc {
                center: center.conj(),
                radius,
                from_angle: -from_angle,
                to_angle: -to_angle,
            },
        }
    }

    /// Euclidean distance from `p` to the segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let len2 = d.norm_sqr();
                let tau = if len2 == 0.0 {
                    0.0
                } else {
                    (((p - from) * d.conj()).re / len2).clamp(0.0, 1.0)
                };
                (p - (from + d * tau)).norm()
            }
            Segment::Arc {
                center,
                radius,
                from_angle,
                to_angle,
            } => {
                let (lo, hi) = if from_angle <= to_angle {
                    (from_angle, to_angle)
                } else {
                    (to_angle, from_angle)
                };
                let q = p - center;
                let endpoints = (p - self.start()).norm().min((p - self.end()).norm());
                if q.norm() == 0.0 {
                    return radius;
                }
                let mut a = q.arg();
                a += TAU * ((lo - a) / TAU).ceil();
                if a <= hi || hi - lo >= TAU {
                    (q.norm() - radius).abs().min(endpoints)
                } else {
                    endpoints
                }
            }
        }
    }
}

/// Integration contour: connected segments with a panel count each, plus
/// the integrand's declared singular points.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    segments: Vec<Segment>,
    panels: Vec<usize>,
    singularities: Vec<Complex64>,
    exclusion_radius: Option<f64>,
}

impl PathSpec {
    /// Straight segments through `waypoints`, `panels` panels each.
    pub fn polyline(waypoints: &[Complex64], panels: usize) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidPath("need at least two waypoints".into()));
        }
        let segments: Vec<Segment> = waypoints
            .windows(2)
            .map(|w| Segment::Line { from: w[0], to: w[1] })
            .collect();
        let n = segments.len();
        Self::from_segments(segments, vec![panels; n])
    }

    pub fn from_segments(segments: Vec<Segment>, panels: Vec<usize>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidPath("path has no segments".into()));
        }
        if panels.len() != segments.len() {
            return Err(Error::InvalidPath(format!(
                "{} panel counts for {} segments",
                panels.len(),
                segments.len()
            )));
        }
        if panels.contains(&0) {
            return Err(Error::InvalidPath("panel counts must be positive".into()));
        }
        for (k, s) in segments.iter().enumerate() {
            let ends = [s.start(), s.end()];
            if ends.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::InvalidPath(format!("segment {k} is not finite")));
            }
            if s.length() == 0.0 {
                return Err(Error::InvalidPath(format!("segment {k} has coincident endpoints")));
            }
        }
        for (k, w) in segments.windows(2).enumerate() {
            let gap = (w[0].end() - w[1].start()).norm();
            let scale = 1.0 + w[0].end().norm();
            if gap > 1e-12 * scale {
                return Err(Error::InvalidPath(format!(
                    "segments {k} and {} are not connected (gap {gap:e})",
                    k + 1
                )));
            }
        }
        Ok(Self {
            segments,
            panels,
            singularities: Vec::new(),
            exclusion_radius: None,
        })
    }

    pub fn with_singularities(mut self, points: Vec<Complex64>) -> Self {
        self.singularities = points;
        self
    }

    pub fn with_exclusion_radius(mut self, radius: f64) -> Self {
        self.exclusion_radius = Some(radius);
        self
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn panels(&self) -> &[usize] {
        &self.panels
    }

    pub fn start(&self) -> Complex64 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Exclusion radius in force: explicit, or `1e-3` times the path length.
    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius.unwrap_or(1e-3 * self.length())
    }

    /// Same path with every panel count doubled.
    pub fn doubled(&self) -> Self {
        let mut p = self.clone();
        p.panels.iter_mut().for_each(|n| *n *= 2);
        p
    }

    /// Mirror image under complex conjugation.
    pub fn conj(&self) -> Self {
        Self {
            segments: self.segments.iter().map(Segment::conj).collect(),
            panels: self.panels.clone(),
            singularities: self.singularities.iter().map(|z| z.conj()).collect(),
            exclusion_radius: self.exclusion_radius,
        }
    }

    pub fn check_exclusion(&self) -> Result<()> {
        let radius = self.exclusion_radius();
        for &p in &self.singularities {
            let distance = self
                .segments
                .iter()
                .map(|s| s.distance_to(p))
                .fold(f64::INFINITY, f64::min);
            if distance <= radius {
                return Err(Error::SingularityProximity {
                    point: p,
                    distance,
                    radius,
                });
            }
        }
        Ok(())
    }
}

/// Fixed-panel Gauss-Legendre integral of `f` along `path`.
pub fn integrate_path<I: PathIntegrand>(mut f: I, path: &PathSpec, rule: GaussRule) -> Result<I::Output> {
    path.check_exclusion()?;
    f.start(path.start());
    let nw = rule.nodes_weights();
    let mut total = I::Output::zero();
    for (seg, &panels) in path.segments.iter().zip(&path.panels) {
        let width = 1.0 / panels as f64;
        for p in 0..panels {
            let lo = p as f64 * width;
            for &(x, wt) in nw {
                let tau = lo + 0.5 * width * (x + 1.0);
                let w = seg.point(tau);
                let v = f.eval(w);
                if !v.is_finite() {
                    return Err(Error::NonFiniteIntegrand(w));
                }
                total.add_scaled(&v, seg.tangent(tau) * (0.5 * width * wt));
            }
        }
    }
    Ok(total)
}

/// Integral plus the panel-doubling error estimate `|I(2n) - I(n)|`.
/// Returns the doubled-panel value.
pub fn integrate_path_with_estimate<I>(f: I, path: &PathSpec, rule: GaussRule) -> Result<(I::Output, f64)>
where
    I: PathIntegrand + Clone,
{
    let coarse = integrate_path(f.clone(), path, rule)?;
    let fine = integrate_path(f, &path.doubled(), rule)?;
    Ok((fine, fine.distance(&coarse)))
}

/// Settings for batched per-node integration over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridQuadrature {
    pub rule: GaussRule,
    /// Singular points of the integrand, used for exclusion checks and
    /// panel sizing.
    pub singularities: Vec<Complex64>,
    /// Upper bound on panel length; panels are also kept below half the
    /// distance from the segment to the nearest singularity.
    pub max_panel_len: f64,
    pub exclusion_radius: Option<f64>,
}

impl Default for GridQuadrature {
    fn default() -> Self {
        Self {
            rule: GaussRule::GaussLegendre16,
            singularities: Vec::new(),
            max_panel_len: 0.1,
            exclusion_radius: None,
        }
    }
}

impl GridQuadrature {
    pub fn with_singularities(singularities: Vec<Complex64>) -> Self {
        Self {
            singularities,
            ..Self::default()
        }
    }

    fn panels_for(&self, seg: &Segment) -> usize {
        let near = self
            .singularities
            .iter()
            .map(|&p| seg.distance_to(p))
            .fold(f64::INFINITY, f64::min);
        let limit = self.max_panel_len.min(0.5 * near).max(1e-6);
        (seg.length() / limit).ceil().max(1.0) as usize
    }

    /// Path from `base` to node `(i, j)`: a straight line on rectangles,
    /// radial-then-angular on annuli. `None` when the node is the base.
    pub fn node_path(&self, base: Complex64, grid: &ParamGrid, i: usize, j: usize) -> Result<Option<PathSpec>> {
        let node = grid.node(i, j);
        let mut segments = Vec::new();
        match grid.kind() {
            GridKind::Rectangle { .. } => {
                if node != base {
                    segments.push(Segment::Line { from: base, to: node });
                }
            }
            GridKind::Annulus { angle, .. } => {
                let rho = grid.coord1(i).exp();
                let psi = grid.coord2(j);
                if base.norm() == 0.0 {
                    segments.push(Segment::Line { from: base, to: node });
                } else {
                    let a = base_angle(base, angle);
                    let corner = Complex64::from_polar(rho, a);
                    if (corner - base).norm() > 1e-15 * (1.0 + rho) {
                        segments.push(Segment::Line { from: base, to: corner });
                    }
                    if psi != a {
                        segments.push(Segment::Arc {
                            center: Complex64::new(0.0, 0.0),
                            radius: rho,
                            from_angle: a,
                            to_angle: psi,
                        });
                    }
                }
            }
        }
        if segments.is_empty() {
            return Ok(None);
        }
        let panels = segments.iter().map(|s| self.panels_for(s)).collect();
        let mut path = PathSpec::from_segments(segments, panels)?.with_singularities(self.singularities.clone());
        if let Some(r) = self.exclusion_radius {
            path = path.with_exclusion_radius(r);
        }
        Ok(Some(path))
    }
}

/// Argument of `base` lifted into `[lo, hi]` when possible, otherwise onto
/// the sheet nearest that range.
fn base_angle(base: Complex64, (lo, hi): (f64, f64)) -> f64 {
    let mut a = base.arg();
    a += TAU * ((lo - a) / TAU).ceil();
    if a <= hi {
        return a;
    }
    let below = a - TAU;
    if lo - below < a - hi {
        below
    } else {
        a
    }
}

/// `int_base^node f(w) dw` for every grid node, along the module's path
/// family. Each node gets a fresh copy of `f`.
pub fn antiderivative_on_grid<I>(
    f: &I,
    base: Complex64,
    grid: &ParamGrid,
    cfg: &GridQuadrature,
) -> Result<Array2<I::Output>>
where
    I: PathIntegrand + Clone + Sync,
{
    antiderivative_impl(f, base, grid, cfg, false)
}

/// Same as [`antiderivative_on_grid`] but integrating from `conj(base)` to
/// `conj(node)` along the mirrored path, so that multivalued antiderivatives
/// of conjugate data stay conjugate.
pub fn antiderivative_on_conjugate_grid<I>(
    f: &I,
    base: Complex64,
    grid: &ParamGrid,
    cfg: &GridQuadrature,
) -> Result<Array2<I::Output>>
where
    I: PathIntegrand + Clone + Sync,
{
    antiderivative_impl(f, base, grid, cfg, true)
}

fn antiderivative_impl<I>(
    f: &I,
    base: Complex64,
    grid: &ParamGrid,
    cfg: &GridQuadrature,
    conjugate: bool,
) -> Result<Array2<I::Output>>
where
    I: PathIntegrand + Clone + Sync,
{
    let (n1, n2) = grid.shape();
    // singularities are declared in the plane being integrated over
    let plane_cfg = if conjugate {
        GridQuadrature {
            singularities: cfg.singularities.iter().map(|z| z.conj()).collect(),
            ..cfg.clone()
        }
    } else {
        cfg.clone()
    };
    let values: Vec<Result<I::Output>> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            match cfg.node_path(base, grid, i, j)? {
                None => Ok(I::Output::zero()),
                Some(path) => {
                    let path = if conjugate {
                        path.conj().with_singularities(plane_cfg.singularities.clone())
                    } else {
                        path
                    };
                    integrate_path(f.clone(), &path, cfg.rule)
                }
            }
        })
        .collect();
    let flat = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Array2::from_shape_vec((n1, n2), flat).expect("node count matches grid shape"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two_and_integrate_polynomials() {
        for rule in [GaussRule::GaussLegendre16, GaussRule::GaussLegendre32] {
            let nw = rule.nodes_weights();
            assert_eq!(nw.len(), rule.points());
            let s: f64 = nw.iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-14);
            let deg = 2 * rule.points() - 2;
            let q: f64 = nw.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((q - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13);
            assert!(nw.windows(2).all(|p| p[0].0 < p[1].0));
        }
    }

    #[test]
    fn constant_integrand_gives_displacement() {
        let path = PathSpec::polyline(&[c(0.0, 0.0), c(1.0, 1.0)], 1).unwrap();
        let v = integrate_path(|_| c(1.0, 0.0), &path, GaussRule::GaussLegendre16).unwrap();
        assert!((v - c(1.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn polynomial_integrand_is_exact() {
        let r = c(0.3, -0.8);
        let path = PathSpec::polyline(&[c(1.0, 0.0), r], 1).unwrap();
        let v = integrate_path(|w: Complex64| 2.0 * w, &path, GaussRule::GaussLegendre16).unwrap();
        assert!((v - (r * r - 1.0)).norm() < 1e-12);
    }

    #[test]
    fn quarter_arc_of_inverse_gives_i_pi_over_two() {
        let arc = Segment::Arc {
            center: c(0.0, 0.0),
            radius: 1.0,
            from_angle: 0.0,
            to_angle: std::f64::consts::FRAC_PI_2,
        };
        let path = PathSpec::from_segments(vec![arc], vec![4])
            .unwrap()
            .with_singularities(vec![c(0.0, 0.0)]);
        let v = integrate_path(|w: Complex64| w.inv(), &path, GaussRule::GaussLegendre16).unwrap();
        assert!((v - c(0.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-10);
    }

    #[test]
    fn exclusion_radius_violations_are_reported() {
        let path = PathSpec::polyline(&[c(-1.0, 1e-4), c(1.0, 1e-4)], 4)
            .unwrap()
            .with_singularities(vec![c(0.0, 0.0)]);
        assert!(matches!(
            integrate_path(|w: Complex64| w.inv(), &path, GaussRule::GaussLegendre16),
            Err(Error::SingularityProximity { .. })
        ));
        let far = path.clone().with_exclusion_radius(1e-5);
        assert!(integrate_path(|w: Complex64| w.inv(), &far, GaussRule::GaussLegendre16).is_ok());
    }

    #[test]
    fn non_finite_samples_are_errors() {
        let path = PathSpec::polyline(&[c(0.0, 0.0), c(1.0, 0.0)], 1).unwrap();
        let r = integrate_path(|_| c(f64::NAN, 0.0), &path, GaussRule::GaussLegendre16);
        assert!(matches!(r, Err(Error::NonFiniteIntegrand(_))));
    }

    #[test]
    fn malformed_paths_rejected() {
        assert!(PathSpec::polyline(&[c(0.0, 0.0)], 1).is_err());
        assert!(PathSpec::polyline(&[c(0.0, 0.0), c(0.0, 0.0)], 1).is_err());
        assert!(PathSpec::polyline(&[c(0.0, 0.0), c(1.0, 0.0)], 0).is_err());
        let gap = vec![
            Segment::Line {
                from: c(0.0, 0.0),
                to: c(1.0, 0.0),
            },
            Segment::Line {
                from: c(1.5, 0.0),
                to: c(2.0, 0.0),
            },
        ];
        assert!(PathSpec::from_segments(gap, vec![1, 1]).is_err());
    }

    #[test]
    fn panel_doubling_estimate_is_small_for_analytic_integrands() {
        let path = PathSpec::polyline(&[c(0.0, 0.0), c(2.0, 1.0)], 1).unwrap();
        let (v, est) = integrate_path_with_estimate(|w: Complex64| w.exp(), &path, GaussRule::GaussLegendre16).unwrap();
        let exact = c(2.0, 1.0).exp() - 1.0;
        assert!((v - exact).norm() < 1e-13);
        assert!(est < 1e-12);
    }

    #[test]
    fn arc_distance() {
        let arc = Segment::Arc {
            center: c(0.0, 0.0),
            radius: 1.0,
            from_angle: 0.0,
            to_angle: 1.0,
        };
        assert!((arc.distance_to(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((arc.distance_to(c(2.0, 0.0)) - 1.0).abs() < 1e-15);
        // point opposite the arc: nearest is an endpoint
        let d = arc.distance_to(c(-1.0, 0.0));
        assert!(
            (d - (c(-1.0, 0.0) - c(1.0, 0.0))
                .norm()
                .min((c(-1.0, 0.0) - Complex64::from_polar(1.0, 1.0)).norm()))
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn grid_antiderivative_of_one_is_identity() {
        let g = ParamGrid::rectangle((-0.5, 0.5), (-0.3, 0.4), 7, 9).unwrap();
        let v = antiderivative_on_grid(&|_| c(1.0, 0.0), c(0.0, 0.0), &g, &GridQuadrature::default()).unwrap();
        for ((i, j), z) in v.indexed_iter() {
            assert!((z - g.node(i, j)).norm() < 1e-13);
        }
        let zero = antiderivative_on_grid(&|_| c(0.0, 0.0), c(0.1, 0.0), &g, &GridQuadrature::default()).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn annulus_antiderivative_of_inverse_is_branch_tracked_log() {
        let g = ParamGrid::annulus(0.4, 0.9, 33, 9).unwrap();
        let cfg = GridQuadrature::with_singularities(vec![c(0.0, 0.0)]);
        let v = antiderivative_on_grid(&|w: Complex64| w.inv(), c(1.0, 0.0), &g, &cfg).unwrap();
        for ((i, j), z) in v.indexed_iter() {
            let expect = c(g.coord1(i), g.coord2(j));
            assert!((z - expect).norm() < 1e-10, "node ({i},{j}): {z} vs {expect}");
        }
        let vc = antiderivative_on_conjugate_grid(&|w: Complex64| w.inv(), c(1.0, 0.0), &g, &cfg).unwrap();
        for (a, b) in v.iter().zip(vc.iter()) {
            assert_eq!(a.conj(), *b);
        }
    }

    #[test]
    fn base_on_far_sheet_is_moved_next_to_sector() {
        let g = ParamGrid::annular_sector((0.5, 0.8), (6.0, 6.2), 5, 5).unwrap();
        let cfg = GridQuadrature::with_singularities(vec![c(0.0, 0.0)]);
        let v = antiderivative_on_grid(&|w: Complex64| w.inv(), c(1.0, 0.0), &g, &cfg).unwrap();
        // base arg 0 is lifted to 2 pi, the sheet nearest the sector
        let expect = c(g.coord1(0), g.coord2(0) - TAU);
        assert!((v[(0, 0)] - expect).norm() < 1e-10);
    }
}
