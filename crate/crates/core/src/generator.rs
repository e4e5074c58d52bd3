//! Surfaces from Weierstrass-Enneper data by path quadrature.
//!
//! With `Phi(w) = ((1 - w^2) R, i (1 + w^2) R, 2 w R)` the surface is
//! `X(zeta) = X0 + Re int_{zeta0}^{zeta} Phi(w) dw`, integrated from the base
//! point along the path family of [`crate::quadrature`].

use ndarray::Array2;
use num_complex::Complex64;

use crate::catalog::{RContinuation, WeFunction};
use crate::diff::FdScheme;
use crate::error::{Error, Result};
use crate::grid::{ParamGrid, Reality, SurfaceGrid};
use crate::quadrature::{antiderivative_on_grid, GaussRule, GridQuadrature, PathIntegrand};
use crate::report::ResidualReport;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parameter chart for the grid variable `zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Chart {
    /// `w = zeta`.
    #[default]
    Identity,
    /// `w = exp(-i zeta / 2)`, the angular chart used for the general
    /// Enneper family (real `zeta` traces the unit circle).
    ExpHalf,
}

impl Chart {
    pub fn map(self, zeta: Complex64) -> Complex64 {
        match self {
            Chart::Identity => zeta,
            Chart::ExpHalf => (-0.5 * I * zeta).exp(),
        }
    }

    /// `(dw/dzeta, d2w/dzeta2)`.
    fn derivatives(self, zeta: Complex64) -> (Complex64, Complex64) {
        match self {
            Chart::Identity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            Chart::ExpHalf => {
                let w = self.map(zeta);
                (-0.5 * I * w, -0.25 * w)
            }
        }
    }

    /// Preimages of `w`-plane points near the real `zeta` strip.
    fn pull_back(self, points: &[Complex64]) -> Vec<Complex64> {
        match self {
            Chart::Identity => points.to_vec(),
            Chart::ExpHalf => points
                .iter()
                .filter(|w| w.norm() > 0.0)
                .flat_map(|w| {
                    let z0 = 2.0 * I * w.ln();
                    (-2..=2).map(move |k| z0 + 4.0 * std::f64::consts::PI * k as f64)
                })
                .collect(),
        }
    }
}

/// Weierstrass-Enneper input: `R`, base point, integration constants and
/// the optional `t -> -t` flip applied after integration.
#[derive(Debug, Clone, PartialEq)]
pub struct WeData {
    pub function: WeFunction,
    pub base: Complex64,
    pub offsets: [f64; 3],
    pub flip_t: bool,
    pub chart: Chart,
}

impl WeData {
    pub fn new(function: WeFunction, base: Complex64) -> Result<Self> {
        let data = Self {
            function,
            base,
            offsets: [0.0; 3],
            flip_t: false,
            chart: Chart::Identity,
        };
        data.validate()?;
        Ok(data)
    }

    /// Base point from the function's default domain.
    pub fn with_default_base(function: WeFunction) -> Result<Self> {
        let base = function.default_domain().base;
        Self::new(function, base)
    }

    pub fn with_offsets(mut self, offsets: [f64; 3]) -> Result<Self> {
        self.offsets = offsets;
        self.validate()?;
        Ok(self)
    }

    pub fn with_flip_t(mut self, flip_t: bool) -> Self {
        self.flip_t = flip_t;
        self
    }

    pub fn with_chart(mut self, chart: Chart) -> Result<Self> {
        self.chart = chart;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.offsets.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("offsets"));
        }
        self.function.eval_r(self.chart.map(self.base))?;
        Ok(())
    }

    /// Same data with `R` replaced by its harmonic conjugate `-i R`.
    pub fn conjugate(&self) -> Self {
        Self {
            function: self.function.conjugate(),
            ..self.clone()
        }
    }

    /// Singular points of the integrand in the grid variable.
    pub fn singularities(&self) -> Vec<Complex64> {
        self.chart.pull_back(self.function.all_singularities())
    }

    /// Value and first two derivatives of the surface at the base point.
    pub fn base_jet(&self) -> Result<Jet> {
        let zeta = self.base;
        let w = self.chart.map(zeta);
        let mut ev = self.function.continuation();
        ev.reset(w);
        let (r, dr) = ev.eval(w)?;
        let (dw, ddw) = self.chart.derivatives(zeta);
        let phi = weierstrass_vector(w, r);
        let dphi = [
            -2.0 * w * r + (1.0 - w * w) * dr,
            I * (2.0 * w * r + (1.0 + w * w) * dr),
            2.0 * r + 2.0 * w * dr,
        ];
        let h1 = phi.map(|p| p * dw);
        let mut h2 = [Complex64::new(0.0, 0.0); 3];
        for k in 0..3 {
            h2[k] = dphi[k] * dw * dw + phi[k] * ddw;
        }
        let mut jet = Jet::from_holomorphic(self.offsets, h1, h2);
        if self.flip_t {
            jet = jet.flip_t();
        }
        Ok(jet)
    }
}

fn weierstrass_vector(w: Complex64, r: Complex64) -> [Complex64; 3] {
    [(1.0 - w * w) * r, I * (1.0 + w * w) * r, 2.0 * w * r]
}

/// `Phi(w(zeta)) w'(zeta)` with path-continued `R`.
#[derive(Debug, Clone)]
struct WeIntegrand {
    r: RContinuation,
    chart: Chart,
}

impl PathIntegrand for WeIntegrand {
    type Output = [Complex64; 3];

    fn start(&mut self, base: Complex64) {
        self.r.reset(self.chart.map(base));
    }

    fn eval(&mut self, zeta: Complex64) -> [Complex64; 3] {
        let w = self.chart.map(zeta);
        match self.r.eval(w) {
            Ok((r, _)) => {
                let (dw, _) = self.chart.derivatives(zeta);
                weierstrass_vector(w, r).map(|p| p * dw)
            }
            Err(_) => [Complex64::new(f64::NAN, 0.0); 3],
        }
    }
}

/// Quadrature settings for surface generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorConfig {
    pub rule: GaussRule,
    pub max_panel_len: f64,
    pub exclusion_radius: Option<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let q = GridQuadrature::default();
        Self {
            rule: q.rule,
            max_panel_len: q.max_panel_len,
            exclusion_radius: q.exclusion_radius,
        }
    }
}

/// Complex integrals `int_{base}^{zeta} Phi dw` at every node.
pub fn integrals_on_grid(data: &WeData, grid: &ParamGrid, cfg: &GeneratorConfig) -> Result<Array2<[Complex64; 3]>> {
    let quad = GridQuadrature {
        rule: cfg.rule,
        singularities: data.singularities(),
        max_panel_len: cfg.max_panel_len,
        exclusion_radius: cfg.exclusion_radius,
    };
    let integrand = WeIntegrand {
        r: data.function.continuation(),
        chart: data.chart,
    };
    antiderivative_on_grid(&integrand, data.base, grid, &quad)
}

pub fn generate(data: &WeData, grid: &ParamGrid) -> Result<SurfaceGrid> {
    generate_with(data, grid, &GeneratorConfig::default())
}

pub fn generate_with(data: &WeData, grid: &ParamGrid, cfg: &GeneratorConfig) -> Result<SurfaceGrid> {
    let vals = integrals_on_grid(data, grid, cfg)?;
    let pick = |k: usize| vals.mapv(|v| Complex64::new(data.offsets[k] + v[k].re, 0.0));
    let surface = SurfaceGrid::new(*grid, pick(0), pick(1), pick(2), Reality::Real)?;
    Ok(if data.flip_t { surface.flip_t() } else { surface })
}

/// `(X, Y)` with `Y` generated from the conjugate data `-i R`.
pub fn generate_conjugate_pair(data: &WeData, grid: &ParamGrid) -> Result<(SurfaceGrid, SurfaceGrid)> {
    generate_conjugate_pair_with(data, grid, &GeneratorConfig::default())
}

pub fn generate_conjugate_pair_with(
    data: &WeData,
    grid: &ParamGrid,
    cfg: &GeneratorConfig,
) -> Result<(SurfaceGrid, SurfaceGrid)> {
    let x = generate_with(data, grid, cfg)?;
    let y = generate_with(&data.conjugate(), grid, cfg)?;
    Ok((x, y))
}

/// Cauchy-Riemann violation of a pair, componentwise:
/// `|dX/dr1 - dY/dr2|` and `|dX/dr2 + dY/dr1|` at every node.
pub fn cauchy_riemann_report(x: &SurfaceGrid, y: &SurfaceGrid, scheme: &FdScheme) -> Result<ResidualReport> {
    if x.grid() != y.grid() {
        return Err(Error::ShapeMismatch("conjugate pair on different grids".into()));
    }
    let grid = x.grid();
    let mut report: Option<ResidualReport> = None;
    for c in crate::grid::Component::ALL {
        let (x1, x2) = scheme.gradient(grid, x.component(c))?;
        let (y1, y2) = scheme.gradient(grid, y.component(c))?;
        let first = ResidualReport::from_samples(
            x1.indexed_iter()
                .zip(y2.iter())
                .map(|((n, a), b)| (n, (a - b).norm(), a.norm().max(b.norm()))),
        );
        let second = ResidualReport::from_samples(
            x2.indexed_iter()
                .zip(y1.iter())
                .map(|((n, a), b)| (n, (a + b).norm(), a.norm().max(b.norm()))),
        );
        let m = first.merge(&second);
        report = Some(match report {
            None => m,
            Some(r) => r.merge(&m),
        });
    }
    Ok(report.expect("three components"))
}

/// Value, gradient and second derivatives of a real surface at a point,
/// with respect to the Cartesian parameters `(r1, r2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: [f64; 3],
    pub d1: [f64; 3],
    pub d2: [f64; 3],
    pub d11: [f64; 3],
    pub d12: [f64; 3],
}

impl Jet {
    /// Jet of `value + Re (H(zeta) - H(zeta0))` from `H'` and `H''` at `zeta0`.
    pub fn from_holomorphic(value: [f64; 3], h1: [Complex64; 3], h2: [Complex64; 3]) -> Self {
        Self {
            value,
            d1: h1.map(|z| z.re),
            d2: h1.map(|z| -z.im),
            d11: h2.map(|z| z.re),
            d12: h2.map(|z| -z.im),
        }
    }

    pub fn flip_t(mut self) -> Self {
        for v in [
            &mut self.value,
            &mut self.d1,
            &mut self.d2,
            &mut self.d11,
            &mut self.d12,
        ] {
            v[1] = -v[1];
        }
        self
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    a.map(|v| v * s)
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Orthonormal frame `(e1, e2, n)` of a jet's tangent plane.
fn frame(j: &Jet) -> Result<[[f64; 3]; 3]> {
    let n1 = dot(j.d1, j.d1).sqrt();
    if n1 == 0.0 {
        return Err(Error::DegenerateJacobian);
    }
    let e1 = scale(j.d1, 1.0 / n1);
    let t2 = sub(j.d2, scale(e1, dot(j.d2, e1)));
    let n2 = dot(t2, t2).sqrt();
    if n2 <= 1e-12 * n1 {
        return Err(Error::DegenerateJacobian);
    }
    let e2 = scale(t2, 1.0 / n2);
    Ok([e1, e2, cross(e1, e2)])
}

/// Isometry `p -> Q p + c` of space, possibly orientation reversing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub q: [[f64; 3]; 3],
    pub c: [f64; 3],
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            q: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            c: [0.0; 3],
        }
    }

    /// Motion taking the jet `from` onto `to`: values and tangent frames
    /// are matched, and the normal is reversed when the normal components
    /// of the second derivatives disagree in sign.
    pub fn from_jets(from: &Jet, to: &Jet) -> Result<Self> {
        let f = frame(from)?;
        let t = frame(to)?;
        let witness = |j: &Jet, n: [f64; 3]| [dot(j.d11, n), dot(j.d12, n)];
        let wf = witness(from, f[2]);
        let wt = witness(to, t[2]);
        let k = if wt[0].abs() >= wt[1].abs() { 0 } else { 1 };
        let sigma = if wt[k] * wf[k] < 0.0 { -1.0 } else { 1.0 };
        let mut q = [[0.0; 3]; 3];
        for (a, row) in q.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = t[0][a] * f[0][b] + t[1][a] * f[1][b] + sigma * t[2][a] * f[2][b];
            }
        }
        let m = Self { q, c: [0.0; 3] };
        let c = sub(to.value, m.apply_point(from.value));
        Ok(Self { q, c })
    }

    pub fn apply_point(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = self.c;
        for (a, o) in out.iter_mut().enumerate() {
            *o += self.q[a][0] * p[0] + self.q[a][1] * p[1] + self.q[a][2] * p[2];
        }
        out
    }

    /// Apply to every node of a real surface.
    pub fn apply(&self, s: &SurfaceGrid) -> Result<SurfaceGrid> {
        if s.reality() != Reality::Real {
            return Err(Error::InvalidParameter("rigid motions act on real surfaces".into()));
        }
        let dim = s.grid().shape();
        let mut parts = [Array2::zeros(dim), Array2::zeros(dim), Array2::zeros(dim)];
        for i in 0..dim.0 {
            for j in 0..dim.1 {
                let p = s.point(i, j).map(|z| z.re);
                let q = self.apply_point(p);
                for k in 0..3 {
                    parts[k][(i, j)] = Complex64::new(q[k], 0.0);
                }
            }
        }
        let [x, t, phi] = parts;
        SurfaceGrid::new(*s.grid(), x, t, phi, Reality::Real)
    }
}

/// `surface` moved by the rigid motion that matches its jet `from` to the
/// reference jet `to`.
pub fn calibrate(surface: &SurfaceGrid, from: &Jet, to: &Jet) -> Result<SurfaceGrid> {
    RigidMotion::from_jets(from, to)?.apply(surface)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn enneper_matches_polynomial_antiderivatives() {
        let g = ParamGrid::rectangle((-0.2, 0.2), (-0.2, 0.2), 9, 9).unwrap();
        let data = WeData::new(WeFunction::enneper(), c(0.0, 0.0)).unwrap();
        let s = generate(&data, &g).unwrap();
        for ((i, j), z) in g.nodes().indexed_iter() {
            let z = *z;
            let x = (z - z.powi(3) / 3.0).re;
            let t = (I * (z + z.powi(3) / 3.0)).re;
            let phi = (z * z).re;
            let p = s.point(i, j);
            assert!((p[0].re - x).abs() < 1e-11);
            assert!((p[1].re - t).abs() < 1e-11);
            assert!((p[2].re - phi).abs() < 1e-11);
        }
    }

    #[test]
    fn base_node_gets_offsets() {
        let g = ParamGrid::rectangle((0.0, 0.2), (0.0, 0.2), 3, 3).unwrap();
        let data = WeData::new(WeFunction::enneper(), c(0.0, 0.0))
            .unwrap()
            .with_offsets([1.0, -2.0, 0.5])
            .unwrap();
        let s = generate(&data, &g).unwrap();
        assert_eq!(s.point(0, 0).map(|z| z.re), [1.0, -2.0, 0.5]);
    }

    #[test]
    fn singular_base_rejected() {
        assert!(WeData::new(WeFunction::catenoid(1.0).unwrap(), c(0.0, 0.0)).is_err());
        let e = WeData::new(WeFunction::enneper(), c(0.0, 0.0)).unwrap();
        assert!(e.with_offsets([f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn conjugate_of_conjugate_negates() {
        let g = ParamGrid::annular_sector((0.5, 0.8), (0.1, 0.5), 7, 7).unwrap();
        let data = WeData::new(WeFunction::henneberg(), c(0.7, 0.2)).unwrap();
        let s = generate(&data, &g).unwrap();
        let cc = generate(&data.conjugate().conjugate(), &g).unwrap();
        assert!(s.combine(1.0, &cc, 1.0).unwrap().max_abs_diff(&s.scaled(0.0)) < 1e-13);
    }

    #[test]
    fn flip_t_negates_time() {
        let g = ParamGrid::annular_sector((0.5, 0.8), (0.1, 0.5), 5, 5).unwrap();
        let data = WeData::new(WeFunction::henneberg(), c(0.7, 0.2)).unwrap();
        let s = generate(&data, &g).unwrap();
        let f = generate(&data.clone().with_flip_t(true), &g).unwrap();
        assert_eq!(f.t(), &s.t().mapv(|z| -z));
        assert_eq!(f.x(), s.x());
    }

    #[test]
    fn catenoid_matches_closed_form_after_calibration() {
        let g = ParamGrid::annular_sector((0.4, 0.9), (0.0, 0.6), 21, 17).unwrap();
        let data = WeData::new(WeFunction::catenoid(1.0).unwrap(), c(1.0, 0.0)).unwrap();
        let s = generate(&data, &g).unwrap();
        // closed catenoid is Re(-i H) with H' = (i/2 (1 - 1/r^2), (1 + 1/r^2)/2, -i/r)
        let closed = |r: Complex64| [0.5 * (r + 1.0 / r).re, 0.5 * (r - 1.0 / r).im, -r.ln().re];
        let r0 = c(1.0, 0.0);
        let h1 = [
            I * 0.5 * (1.0 - 1.0 / (r0 * r0)),
            0.5 * (1.0 + 1.0 / (r0 * r0)),
            -I / r0,
        ]
        .map(|z| -I * z);
        let h2 = [I / r0.powi(3), -1.0 / r0.powi(3), I / (r0 * r0)].map(|z| -I * z);
        let to = Jet::from_holomorphic(closed(r0), h1, h2);
        let cal = calibrate(&s, &data.base_jet().unwrap(), &to).unwrap();
        let oracle = SurfaceGrid::from_fn(g, closed).unwrap();
        assert!(cal.max_abs_diff(&oracle) < 1e-9, "{}", cal.max_abs_diff(&oracle));
    }

    #[test]
    fn rigid_motion_round_trip() {
        let j = Jet {
            value: [1.0, 2.0, 3.0],
            d1: [1.0, 0.5, 0.0],
            d2: [-0.5, 1.0, 0.2],
            d11: [0.0, 0.0, 1.0],
            d12: [0.1, 0.0, 0.3],
        };
        let m = RigidMotion::from_jets(&j, &j).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let e = if a == b { 1.0 } else { 0.0 };
                assert!((m.q[a][b] - e).abs() < 1e-15);
            }
            assert!(m.c[a].abs() < 1e-14);
        }
    }

    #[test]
    fn cr_report_small_for_enneper_pair() {
        let g = ParamGrid::rectangle((-0.3, 0.3), (-0.3, 0.3), 61, 61).unwrap();
        let data = WeData::new(WeFunction::enneper(), c(0.0, 0.0)).unwrap();
        let (x, y) = generate_conjugate_pair(&data, &g).unwrap();
        let r = cauchy_riemann_report(&x, &y, &FdScheme::default()).unwrap();
        assert!(r.max_abs < 1e-6, "{}", r.max_abs);
    }

    #[test]
    fn exp_half_chart_traces_unit_circle() {
        let f = WeFunction::general_enneper(1.0, 0.0).unwrap();
        let data = WeData::new(f, c(0.5, -0.3))
            .unwrap()
            .with_chart(Chart::ExpHalf)
            .unwrap();
        let g = ParamGrid::rectangle((0.3, 1.2), (-0.6, -0.2), 91, 7).unwrap();
        let s = generate(&data, &g).unwrap();
        // derivative consistency with the jet at a node used as base
        let node = g.node(45, 3);
        let moved = WeData {
            base: node,
            ..data.clone()
        };
        let jet = moved.base_jet().unwrap();
        let h = g.spacing().0;
        for k in 0..3 {
            let fd = (s.component(crate::grid::Component::ALL[k])[(46, 3)]
                - s.component(crate::grid::Component::ALL[k])[(44, 3)])
                .re
                / (2.0 * h);
            assert!(
                (fd - jet.d1[k]).abs() < 1e-3 * (1.0 + jet.d1[k].abs()),
                "{k}: {fd} vs {}",
                jet.d1[k]
            );
        }
    }
}
