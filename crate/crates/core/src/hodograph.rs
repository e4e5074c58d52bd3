//! The `F(r)`, `G(r̄)` representation of minimal surfaces and the
//! hodograph coordinates of the helicoid and catenoid.
//!
//! Given `F` and `G` the surface is
//!
//! ```text
//! x - i t = F(r) - int r̄^2 G'(r̄) dr̄
//! x + i t = G(r̄) - int r^2 F'(r) dr
//! phi     = int r F'(r) dr + int r̄ G'(r̄) dr̄
//! ```
//!
//! with the `r` integrals taken along the grid path family and the `r̄`
//! integrals along its mirror image.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::catalog::WeFunction;
use crate::error::{Error, Result};
use crate::generator::{Chart, Jet, WeData};
use crate::grid::{ParamGrid, Reality, SurfaceGrid};
use crate::quadrature::{
    antiderivative_on_conjugate_grid, antiderivative_on_grid, integrate_path, GaussRule, GridQuadrature, PathIntegrand,
    PathSpec,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shared complex function handle.
pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `F(r)`, `G(s)` with `s = r̄`, and their derivatives.
#[derive(Clone)]
pub struct FgPair {
    pub f: ComplexFn,
    pub df: ComplexFn,
    pub g: ComplexFn,
    pub dg: ComplexFn,
    /// Whether `F(r) = conj(G(conj r))` is required.
    pub reality_constraint: bool,
    /// Singular points of `F'` in the `r` plane.
    pub singularities: Vec<Complex64>,
}

impl fmt::Debug for FgPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FgPair")
            .field("reality_constraint", &self.reality_constraint)
            .field("singularities", &self.singularities)
            .finish_non_exhaustive()
    }
}

fn handle(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> ComplexFn {
    Arc::new(f)
}

impl FgPair {
    pub fn new(f: ComplexFn, df: ComplexFn, g: ComplexFn, dg: ComplexFn, reality_constraint: bool) -> Self {
        Self {
            f,
            df,
            g,
            dg,
            reality_constraint,
            singularities: Vec::new(),
        }
    }

    pub fn with_singularities(mut self, points: Vec<Complex64>) -> Self {
        self.singularities = points;
        self
    }

    /// `F = i/(2r)`, `G = -i/(2 r̄)`.
    pub fn helicoid() -> Self {
        Self::new(
            handle(|r| I / (2.0 * r)),
            handle(|r| -I / (2.0 * r * r)),
            handle(|s| -I / (2.0 * s)),
            handle(|s| I / (2.0 * s * s)),
            true,
        )
        .with_singularities(vec![Complex64::new(0.0, 0.0)])
    }

    /// `F = 1/(2r)`, `G = 1/(2 r̄)`.
    pub fn catenoid() -> Self {
        Self::new(
            handle(|r| 1.0 / (2.0 * r)),
            handle(|r| -1.0 / (2.0 * r * r)),
            handle(|s| 1.0 / (2.0 * s)),
            handle(|s| -1.0 / (2.0 * s * s)),
            true,
        )
        .with_singularities(vec![Complex64::new(0.0, 0.0)])
    }

    pub fn zero() -> Self {
        let z = || handle(|_| Complex64::new(0.0, 0.0));
        Self::new(z(), z(), z(), z(), true)
    }

    /// Pair of a Weierstrass-Enneper surface: `F' = R`, `F(base) = 0`,
    /// `G(s) = conj(F(conj s))`. `F` is integrated along the straight line
    /// from the base point; evaluations whose path meets a singularity
    /// return NaN.
    pub fn from_we(data: &WeData) -> Result<Self> {
        if data.chart != Chart::Identity {
            return Err(Error::InvalidParameter(
                "F/G extraction needs the identity chart".into(),
            ));
        }
        let base = data.base;
        let singular = data.function.all_singularities().to_vec();
        let func = data.function.clone();
        let f_of = {
            let func = func.clone();
            let singular = singular.clone();
            move |r: Complex64| -> Complex64 {
                if r == base {
                    return Complex64::new(0.0, 0.0);
                }
                let panels = ((r - base).norm() / 0.05).ceil().max(1.0) as usize;
                let path = match PathSpec::polyline(&[base, r], panels) {
                    Ok(p) => p.with_singularities(singular.clone()),
                    Err(_) => return Complex64::new(f64::NAN, f64::NAN),
                };
                integrate_path(func.continuation(), &path, GaussRule::GaussLegendre16)
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
            }
        };
        let f_of = Arc::new(f_of);
        let df_of = {
            let func = func.clone();
            move |r: Complex64| func.eval_r(r).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
        };
        let df_of = Arc::new(df_of);
        let g = {
            let f_of = f_of.clone();
            handle(move |s: Complex64| f_of(s.conj()).conj())
        };
        let dg = {
            let df_of = df_of.clone();
            handle(move |s: Complex64| df_of(s.conj()).conj())
        };
        Ok(Self {
            f: f_of,
            df: df_of,
            g,
            dg,
            reality_constraint: true,
            singularities: singular,
        })
    }

    /// `a * p + b * q`, carried as weighted sums of the member handles.
    pub fn combine(a: f64, p: &FgPair, b: f64, q: &FgPair) -> FgPair {
        let lin = |u: &ComplexFn, v: &ComplexFn| {
            let (u, v) = (u.clone(), v.clone());
            handle(move |z| u(z) * a + v(z) * b)
        };
        let mut singularities = p.singularities.clone();
        for s in &q.singularities {
            if !singularities.contains(s) {
                singularities.push(*s);
            }
        }
        FgPair {
            f: lin(&p.f, &q.f),
            df: lin(&p.df, &q.df),
            g: lin(&p.g, &q.g),
            dg: lin(&p.dg, &q.dg),
            reality_constraint: p.reality_constraint && q.reality_constraint,
            singularities,
        }
    }

    /// Largest `|F(r) - conj(G(conj r))|` over `points`; errors above `tol`.
    pub fn check_reality(&self, points: &[Complex64], tol: f64) -> Result<f64> {
        let worst = points
            .iter()
            .map(|&r| ((self.f)(r) - (self.g)(r.conj()).conj()).norm())
            .fold(0.0, f64::max);
        if !(worst <= tol) {
            return Err(Error::Domain(format!(
                "F(r) differs from conj(G(conj r)) by {worst:e} (tolerance {tol:e})"
            )));
        }
        Ok(worst)
    }
}

/// Integrand `(r^2 h(r), r h(r))` for a derivative handle `h`.
#[derive(Clone)]
struct MomentIntegrand(ComplexFn);

impl PathIntegrand for MomentIntegrand {
    type Output = [Complex64; 2];

    fn eval(&mut self, w: Complex64) -> [Complex64; 2] {
        let d = (self.0)(w);
        [w * w * d, w * d]
    }
}

/// Nodewise values of the three F/G relations: `(x - i t, x + i t, phi)`
/// as predicted by `p`, with integrals starting at `base`.
pub fn fg_relations_on_grid(p: &FgPair, grid: &ParamGrid, base: Complex64) -> Result<[Array2<Complex64>; 3]> {
    let cfg = GridQuadrature::with_singularities(p.singularities.clone());
    let a = antiderivative_on_grid(&MomentIntegrand(p.df.clone()), base, grid, &cfg)?;
    let b = antiderivative_on_conjugate_grid(&MomentIntegrand(p.dg.clone()), base, grid, &cfg)?;
    let nodes = grid.nodes();
    let minus = ndarray::Zip::from(&nodes)
        .and(&b)
        .map_collect(|&r, bv| (p.f)(r) - bv[0]);
    let plus = ndarray::Zip::from(&nodes)
        .and(&a)
        .map_collect(|&r, av| (p.g)(r.conj()) - av[0]);
    let phi = ndarray::Zip::from(&a).and(&b).map_collect(|av, bv| av[1] + bv[1]);
    for arr in [&minus, &plus, &phi] {
        if !crate::grid::all_finite(arr) {
            return Err(Error::NonFinite("F/G relation"));
        }
    }
    Ok([minus, plus, phi])
}

/// Surface of an F/G pair. Integration constants vanish at `base`.
pub fn surface_from_fg(p: &FgPair, grid: &ParamGrid, base: Complex64) -> Result<SurfaceGrid> {
    let [minus, plus, phi] = fg_relations_on_grid(p, grid, base)?;
    let x = ndarray::Zip::from(&minus).and(&plus).map_collect(|m, q| 0.5 * (m + q));
    let t = ndarray::Zip::from(&minus)
        .and(&plus)
        .map_collect(|m, q| (q - m) / (2.0 * I));
    let reality = if p.reality_constraint {
        Reality::Real
    } else {
        Reality::WickRotated
    };
    let clean = |a: Array2<Complex64>| {
        if reality == Reality::Real {
            a.mapv(|z| Complex64::new(z.re, 0.0))
        } else {
            a
        }
    };
    if reality == Reality::Real {
        // validate before discarding the imaginary parts
        SurfaceGrid::new(*grid, x.clone(), t.clone(), phi.clone(), Reality::Real)?;
    }
    SurfaceGrid::new(*grid, clean(x), clean(t), clean(phi), reality)
}

/// The two nonparametric surfaces with closed-form hodograph data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `phi = arctan(t / x)`.
    Helicoid,
    /// `phi = arccosh sqrt(x^2 + t^2)`.
    Catenoid,
}

impl ClosedForm {
    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::Helicoid => "helicoid",
            ClosedForm::Catenoid => "catenoid",
        }
    }

    /// `(x, t, phi)` at `r`, with `log_r` the continued logarithm of `r`.
    pub fn eval(self, r: Complex64, log_r: Complex64) -> [f64; 3] {
        match self {
            ClosedForm::Helicoid => [-0.5 * (r + 1.0 / r).im, 0.5 * (r - 1.0 / r).re, log_r.im],
            ClosedForm::Catenoid => [0.5 * (r + 1.0 / r).re, 0.5 * (r - 1.0 / r).im, -log_r.re],
        }
    }

    /// `H'` and `H''` with the surface equal to `Re H` (helicoid) or
    /// `Re(-i H)` (catenoid).
    fn holomorphic_derivatives(self, r: Complex64) -> ([Complex64; 3], [Complex64; 3]) {
        let h1 = [0.5 * I * (1.0 - 1.0 / (r * r)), 0.5 * (1.0 + 1.0 / (r * r)), -I / r];
        let h2 = [I / r.powi(3), -1.0 / r.powi(3), I / (r * r)];
        match self {
            ClosedForm::Helicoid => (h1, h2),
            ClosedForm::Catenoid => (h1.map(|z| -I * z), h2.map(|z| -I * z)),
        }
    }

    /// Jet at `r` (principal logarithm).
    pub fn jet(self, r: Complex64) -> Result<Jet> {
        if r.norm() == 0.0 {
            return Err(Error::Domain("closed forms are singular at r = 0".into()));
        }
        let (h1, h2) = self.holomorphic_derivatives(r);
        Ok(Jet::from_holomorphic(self.eval(r, r.ln()), h1, h2))
    }

    /// Sample on a grid; the logarithm is continued along the grid.
    pub fn surface(self, grid: &ParamGrid) -> Result<SurfaceGrid> {
        let logs = grid
            .log_nodes()
            .map_err(|_| Error::Domain("closed forms are singular at r = 0".into()))?;
        let nodes = grid.nodes();
        let vals = ndarray::Zip::from(&nodes)
            .and(&logs)
            .map_collect(|&r, &l| self.eval(r, l));
        let pick = |k: usize| vals.mapv(|v| Complex64::new(v[k], 0.0));
        SurfaceGrid::new(*grid, pick(0), pick(1), pick(2), Reality::Real)
    }

    /// Spatial point `z = x + i t` over parameter `r`.
    pub fn z_of_r(self, r: Complex64) -> Complex64 {
        let inv = 1.0 / r.conj();
        match self {
            ClosedForm::Helicoid => 0.5 * I * (r - inv),
            ClosedForm::Catenoid => 0.5 * (r + inv),
        }
    }

    pub fn fg(self) -> FgPair {
        match self {
            ClosedForm::Helicoid => FgPair::helicoid(),
            ClosedForm::Catenoid => FgPair::catenoid(),
        }
    }
}

pub fn helicoid_closed(grid: &ParamGrid) -> Result<SurfaceGrid> {
    ClosedForm::Helicoid.surface(grid)
}

pub fn catenoid_closed(grid: &ParamGrid) -> Result<SurfaceGrid> {
    ClosedForm::Catenoid.surface(grid)
}

/// Hodograph variables `(u, v) = (phi_z̄, phi_z)` at `z = x + i t`.
pub fn hodograph_uv(kind: ClosedForm, z: Complex64) -> Result<(Complex64, Complex64)> {
    if z.norm() == 0.0 || !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("hodograph map undefined at z = {z}")));
    }
    match kind {
        ClosedForm::Helicoid => Ok((I / (2.0 * z.conj()), -I / (2.0 * z))),
        ClosedForm::Catenoid => {
            let q = z.norm_sqr();
            if q <= 1.0 {
                return Err(Error::Domain(format!(
                    "catenoid hodograph needs |z| > 1, got |z| = {}",
                    q.sqrt()
                )));
            }
            let d = 2.0 * (q - 1.0).sqrt() * q.sqrt();
            Ok((z / d, z.conj() / d))
        }
    }
}

/// `r = (sqrt(1 + 4uv) - 1) / (2v)` on the principal root, evaluated as
/// `2u / (1 + sqrt(1 + 4uv))`, which also covers the limit `v -> 0`.
pub fn r_from_uv(u: Complex64, v: Complex64) -> Result<Complex64> {
    let disc = 1.0 + 4.0 * u * v;
    if disc.im == 0.0 && disc.re < 0.0 {
        return Err(Error::Domain(format!(
            "1 + 4uv = {} lies on the square-root branch cut",
            disc.re
        )));
    }
    r_with_root(u, disc.sqrt())
}

fn r_with_root(u: Complex64, root: Complex64) -> Result<Complex64> {
    let den = 1.0 + root;
    let r = 2.0 * u / den;
    if den.norm() == 0.0 || !(r.re.is_finite() && r.im.is_finite()) {
        return Err(Error::Domain("hodograph inversion is singular".into()));
    }
    Ok(r)
}

/// [`r_from_uv`] along a sequence, continuing the square root from the
/// principal value at the first sample.
pub fn r_from_uv_sequence(samples: &[(Complex64, Complex64)]) -> Result<Vec<Complex64>> {
    let mut prev: Option<Complex64> = None;
    samples
        .iter()
        .map(|&(u, v)| {
            let mut root = (1.0 + 4.0 * u * v).sqrt();
            if let Some(p) = prev {
                if (root - p).norm() > (root + p).norm() {
                    root = -root;
                }
            }
            prev = Some(root);
            r_with_root(u, root)
        })
        .collect()
}

/// `phi_zz phi_z̄z̄ - phi_zz̄^2`; the hodograph representation fails where
/// it vanishes.
pub fn umbilic_diagnostic(kind: ClosedForm, z: Complex64) -> Result<f64> {
    hodograph_uv(kind, z)?;
    let q = z.norm_sqr();
    Ok(match kind {
        ClosedForm::Helicoid => 0.25 / (q * q),
        ClosedForm::Catenoid => {
            let qq = q * (q - 1.0);
            let f1 = 0.5 / qq.sqrt();
            let f2 = -0.25 * (2.0 * q - 1.0) / qq.powf(1.5);
            -f1 * f1 - 2.0 * f1 * f2 * q
        }
    })
}

/// Default parameter data for the helicoid/catenoid pair: `R = -i/(2 w^2)`
/// reproduces the helicoid closed form up to translation.
pub fn helicoid_we_data(base: Complex64) -> Result<WeData> {
    WeData::new(WeFunction::right_helicoid(-1.0)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sector() -> ParamGrid {
        ParamGrid::annular_sector((0.4, 0.9), (0.0, 0.6), 17, 13).unwrap()
    }

    fn translated_diff(a: &SurfaceGrid, b: &SurfaceGrid) -> f64 {
        let d = a.combine(1.0, b, -1.0).unwrap();
        let p0 = d.point(0, 0);
        let mut worst: f64 = 0.0;
        for i in 0..a.grid().shape().0 {
            for j in 0..a.grid().shape().1 {
                let p = d.point(i, j);
                for k in 0..3 {
                    worst = worst.max((p[k] - p0[k]).norm());
                }
            }
        }
        worst
    }

    #[test]
    fn closed_form_values() {
        let cat = ClosedForm::Catenoid.eval(c(2.0, 0.0), c(2f64.ln(), 0.0));
        assert!((cat[0] - 1.25).abs() < 1e-15 && cat[1].abs() < 1e-15);
        assert!((cat[2] + 2f64.ln()).abs() < 1e-15);
        let hel = ClosedForm::Helicoid.eval(I, I.ln());
        assert!(hel[0].abs() < 1e-15 && hel[1].abs() < 1e-15);
        assert!((hel[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_reject_origin() {
        let g = ParamGrid::rectangle((-0.5, 0.5), (-0.5, 0.5), 5, 5).unwrap();
        assert!(helicoid_closed(&g).is_err());
    }

    #[test]
    fn fg_reproduces_closed_forms() {
        let g = sector();
        for kind in [ClosedForm::Helicoid, ClosedForm::Catenoid] {
            let s = surface_from_fg(&kind.fg(), &g, c(1.0, 0.0)).unwrap();
            let closed = kind.surface(&g).unwrap();
            assert!(translated_diff(&s, &closed) < 1e-9, "{}", kind.name());
        }
    }

    #[test]
    fn zero_pair_gives_constant_surface() {
        let s = surface_from_fg(&FgPair::zero(), &sector(), c(1.0, 0.0)).unwrap();
        assert!(s.max_abs_diff(&s.scaled(0.0)) == 0.0);
    }

    #[test]
    fn reality_constraint_checked() {
        let pts = [c(0.3, 0.1), c(-0.5, 0.7)];
        assert!(FgPair::helicoid().check_reality(&pts, 1e-12).is_ok());
        let bad = FgPair::new(
            handle(|r| r),
            handle(|_| c(1.0, 0.0)),
            handle(|s| 2.0 * s),
            handle(|_| c(2.0, 0.0)),
            true,
        );
        assert!(bad.check_reality(&pts, 1e-12).is_err());
    }

    #[test]
    fn hodograph_examples() {
        let (u, v) = hodograph_uv(ClosedForm::Helicoid, c(1.0, 0.0)).unwrap();
        assert!((u - c(0.0, 0.5)).norm() < 1e-15 && (v - c(0.0, -0.5)).norm() < 1e-15);
        let (u, _) = hodograph_uv(ClosedForm::Helicoid, c(0.0, 2.0)).unwrap();
        assert!((u - c(-0.25, 0.0)).norm() < 1e-15);
        assert!(hodograph_uv(ClosedForm::Helicoid, c(0.0, 0.0)).is_err());
        assert!(hodograph_uv(ClosedForm::Catenoid, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn u_from_z_matches_u_from_r() {
        for kind in [ClosedForm::Helicoid, ClosedForm::Catenoid] {
            for r in sector().nodes() {
                let (u, v) = hodograph_uv(kind, kind.z_of_r(r)).unwrap();
                let expect = r / (1.0 - r.norm_sqr());
                assert!((u - expect).norm() < 1e-10 * (1.0 + expect.norm()));
                assert!((v - expect.conj()).norm() < 1e-10 * (1.0 + expect.norm()));
            }
        }
    }

    #[test]
    fn inversion_examples() {
        let r = r_from_uv(c(0.0, 0.5), c(0.0, -0.5)).unwrap();
        assert!((r - c(0.0, 2f64.sqrt() - 1.0)).norm() < 1e-15);
        assert_eq!(r_from_uv(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(r_from_uv(c(0.3, 0.1), c(0.0, 0.0)).unwrap(), c(0.3, 0.1));
        assert!(r_from_uv(c(1.0, 0.0), c(-1.0, 0.0)).is_err());
        for r in sector().nodes() {
            let u = r / (1.0 - r.norm_sqr());
            let back = r_from_uv(u, u.conj()).unwrap();
            assert!((back - r).norm() < 1e-12);
        }
    }

    #[test]
    fn sequence_inversion_follows_root() {
        // a loop of 1 + 4uv around the origin flips the principal root
        let samples: Vec<_> = (0..=400)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 400.0;
                let d = Complex64::from_polar(0.5, a) - 1.0;
                (d / 4.0, c(1.0, 0.0))
            })
            .collect();
        let seq = r_from_uv_sequence(&samples[..1]).unwrap();
        assert_eq!(seq[0], r_from_uv(samples[0].0, samples[0].1).unwrap());
        let seq = r_from_uv_sequence(&samples).unwrap();
        assert_eq!(seq.len(), samples.len());
        for w in seq.windows(2) {
            assert!((w[1] - w[0]).norm() < 0.1);
        }
    }

    #[test]
    fn umbilic_diagnostic_matches_finite_differences() {
        let phi = |kind: ClosedForm, z: Complex64| match kind {
            ClosedForm::Helicoid => z.arg(),
            ClosedForm::Catenoid => z.norm().acosh(),
        };
        let h = 1e-3;
        for (kind, z) in [(ClosedForm::Helicoid, c(0.8, 0.6)), (ClosedForm::Catenoid, c(1.3, 0.9))] {
            let f = |dx: f64, dt: f64| phi(kind, z + c(dx, dt));
            let fxx = (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h);
            let ftt = (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h);
            let fxt = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
            // Wirtinger second derivatives
            let pzz = c(fxx - ftt, -2.0 * fxt) / 4.0;
            let pbb = c(fxx - ftt, 2.0 * fxt) / 4.0;
            let pzb = (fxx + ftt) / 4.0;
            let fd = (pzz * pbb).re - pzb * pzb;
            let d = umbilic_diagnostic(kind, z).unwrap();
            assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "{}: {fd} vs {d}", kind.name());
        }
    }

    #[test]
    fn we_pair_recovers_enneper_surface() {
        let data = WeData::new(WeFunction::enneper(), c(0.0, 0.0)).unwrap();
        let p = FgPair::from_we(&data).unwrap();
        assert!((((p.f)(c(0.3, 0.2))) - c(0.3, 0.2)).norm() < 1e-15);
        let g = ParamGrid::rectangle((-0.3, 0.3), (-0.3, 0.3), 9, 9).unwrap();
        let s = surface_from_fg(&p, &g, data.base).unwrap();
        let we = crate::generator::generate(&data, &g).unwrap();
        assert!(s.max_abs_diff(&we) < 1e-13);
    }

    #[test]
    fn helicoid_we_data_matches_closed_form_up_to_translation() {
        let g = sector();
        let data = helicoid_we_data(c(1.0, 0.0)).unwrap();
        let s = crate::generator::generate(&data, &g).unwrap();
        assert!(translated_diff(&s, &helicoid_closed(&g).unwrap()) < 1e-9);
    }
}
