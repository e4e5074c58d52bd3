//! Nonparametric partials from parametric grids, minimal-surface and
//! Born-Infeld residuals, and the Lorentz boost symmetry.

use ndarray::Array2;
use num_complex::Complex64;

use crate::diff::FdScheme;
use crate::error::{Error, Result};
use crate::grid::{ParamGrid, SurfaceGrid};
use crate::report::ResidualReport;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzBoost {
    rapidity: f64,
}

impl LorentzBoost {
    pub fn new(rapidity: f64) -> Result<Self> {
        if !rapidity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rapidity must be finite, got {rapidity}"
            )));
        }
        Ok(Self { rapidity })
    }

    pub fn identity() -> Self {
        Self { rapidity: 0.0 }
    }

    pub fn rapidity(&self) -> f64 {
        self.rapidity
    }

    /// `cosh(rapidity)`.
    pub fn a(&self) -> f64 {
        self.rapidity.cosh()
    }

    /// `sinh(rapidity)`.
    pub fn b(&self) -> f64 {
        self.rapidity.sinh()
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.a(), self.b());
        [[a, b], [b, a]]
    }

    /// `(x', t') = (a x + b t, b x + a t)`.
    pub fn apply<T>(&self, x: T, t: T) -> (T, T)
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (a, b) = (self.a(), self.b());
        (x * a + t * b, x * b + t * a)
    }

    pub fn inverse(&self) -> Self {
        Self {
            rapidity: -self.rapidity,
        }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &LorentzBoost) -> Self {
        Self {
            rapidity: self.rapidity + other.rapidity,
        }
    }
}

/// Jacobian acceptance thresholds for [`chain_rule_partials`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchOptions {
    pub scheme: FdScheme,
    /// Largest accepted 2-norm condition number of `d(x, t)/d(r1, r2)`.
    pub cond_bound: f64,
    /// Smallest accepted `|det|`.
    pub det_floor: f64,
}

impl Default for PatchOptions {
    fn default() -> Self {
        Self {
            scheme: FdScheme::default(),
            cond_bound: 1e8,
            det_floor: 1e-14,
        }
    }
}

/// Samples of `phi(x, t)` with its first and second partials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NonparametricPatch {
    /// Grid index of each sample, when taken from a grid.
    pub nodes: Vec<(usize, usize)>,
    pub x: Vec<Complex64>,
    pub t: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    pub px: Vec<Complex64>,
    pub pt: Vec<Complex64>,
    pub pxx: Vec<Complex64>,
    pub pxt: Vec<Complex64>,
    pub ptt: Vec<Complex64>,
    /// Grid nodes rejected for ill-conditioned Jacobians.
    pub dropped: usize,
}

/// Value and partials of `phi` at one point, in patch field order.
pub type Partials = [Complex64; 5];

impl NonparametricPatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Sample a closed-form `phi` at `points`. `f` returns
    /// `(phi, [phi_x, phi_t, phi_xx, phi_xt, phi_tt])`.
    pub fn from_closed_form<F>(points: &[(Complex64, Complex64)], f: F) -> Self
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Partials),
    {
        let mut p = Self::default();
        for (k, &(x, t)) in points.iter().enumerate() {
            let (v, d) = f(x, t);
            p.push((k, 0), x, t, v, d);
        }
        p
    }

    fn push(&mut self, node: (usize, usize), x: Complex64, t: Complex64, phi: Complex64, d: Partials) {
        self.nodes.push(node);
        self.x.push(x);
        self.t.push(t);
        self.phi.push(phi);
        self.px.push(d[0]);
        self.pt.push(d[1]);
        self.pxx.push(d[2]);
        self.pxt.push(d[3]);
        self.ptt.push(d[4]);
    }

    fn map_partials(&self, f: impl Fn(Complex64, Complex64, Partials) -> (Complex64, Complex64, Partials)) -> Self {
        let mut out = Self {
            dropped: self.dropped,
            ..Self::default()
        };
        for k in 0..self.len() {
            let d = [self.px[k], self.pt[k], self.pxx[k], self.pxt[k], self.ptt[k]];
            let (x, t, d) = f(self.x[k], self.t[k], d);
            out.push(self.nodes[k], x, t, self.phi[k], d);
        }
        out
    }

    fn residual_report(&self, op: impl Fn(Partials) -> (Complex64, f64)) -> ResidualReport {
        ResidualReport::from_samples((0..self.len()).map(|k| {
            let (r, scale) = op([self.px[k], self.pt[k], self.pxx[k], self.pxt[k], self.ptt[k]]);
            (self.nodes[k], r.norm(), scale)
        }))
        .with_dropped(self.dropped)
    }
}

/// `J^-1` for `J = [[x1, x2], [t1, t2]]`, row-major.
fn inverse(j: [Complex64; 4]) -> [Complex64; 4] {
    let [x1, x2, t1, t2] = j;
    let det = x1 * t2 - x2 * t1;
    [t2 / det, -x2 / det, -t1 / det, x1 / det]
}

fn condition(j: [Complex64; 4]) -> (f64, f64) {
    let [x1, x2, t1, t2] = j;
    let det = (x1 * t2 - x2 * t1).norm();
    let fro2: f64 = j.iter().map(|z| z.norm_sqr()).sum();
    let smax2 = 0.5 * (fro2 + (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt());
    (det, if det > 0.0 { smax2 / det } else { f64::INFINITY })
}

/// First, second and mixed derivatives along the native grid axes.
struct NativeJet {
    d1: Array2<Complex64>,
    d2: Array2<Complex64>,
    d11: Array2<Complex64>,
    d12: Array2<Complex64>,
    d22: Array2<Complex64>,
}

impl NativeJet {
    fn new(scheme: &FdScheme, grid: &ParamGrid, f: &Array2<Complex64>) -> Result<Self> {
        let (h1, h2) = grid.spacing();
        let d1 = scheme.native_d1(f, 0, h1)?;
        Ok(Self {
            d2: scheme.native_d1(f, 1, h2)?,
            d11: scheme.native_d2(f, 0, h1)?,
            d12: scheme.native_d1(&d1, 1, h2)?,
            d22: scheme.native_d2(f, 1, h2)?,
            d1,
        })
    }
}

pub fn chain_rule_partials(s: &SurfaceGrid) -> Result<NonparametricPatch> {
    chain_rule_partials_with(s, &PatchOptions::default())
}

/// Partials of `phi` as a function of `(x, t)` from the parametric jets in
/// native grid coordinates `u`: with `J = d(x, t)/du`,
/// `grad phi = J^-T phi_u` and `Hess phi = J^-T (phi_uu - phi_x x_uu - phi_t t_uu) J^-1`.
/// Nodes with a rejected Jacobian are dropped and counted.
pub fn chain_rule_partials_with(s: &SurfaceGrid, opts: &PatchOptions) -> Result<NonparametricPatch> {
    let grid: &ParamGrid = s.grid();
    let x = NativeJet::new(&opts.scheme, grid, s.x())?;
    let t = NativeJet::new(&opts.scheme, grid, s.t())?;
    let f = NativeJet::new(&opts.scheme, grid, s.phi())?;
    let mut patch = NonparametricPatch::default();
    for n in ndarray::indices(grid.shape()) {
        let n = (n.0, n.1);
        let j = [x.d1[n], x.d2[n], t.d1[n], t.d2[n]];
        let (det, cond) = condition(j);
        if !(det >= opts.det_floor && cond <= opts.cond_bound) {
            patch.dropped += 1;
            continue;
        }
        let [k11, k12, k21, k22] = inverse(j);
        let px = k11 * f.d1[n] + k21 * f.d2[n];
        let pt = k12 * f.d1[n] + k22 * f.d2[n];
        let q = |a: &Array2<Complex64>, b: &Array2<Complex64>, c: &Array2<Complex64>| a[n] - px * b[n] - pt * c[n];
        let (q11, q12, q22) = (
            q(&f.d11, &x.d11, &t.d11),
            q(&f.d12, &x.d12, &t.d12),
            q(&f.d22, &x.d22, &t.d22),
        );
        // K^T Q K with K = J^-1
        let row = |ka: Complex64, kb: Complex64, kc: Complex64, kd: Complex64| {
            (ka * q11 + kb * q12) * kc + (ka * q12 + kb * q22) * kd
        };
        let pxx = row(k11, k21, k11, k21);
        let pxt = row(k11, k21, k12, k22);
        let ptt = row(k12, k22, k12, k22);
        patch.push(n, s.x()[n], s.t()[n], s.phi()[n], [px, pt, pxx, pxt, ptt]);
    }
    if patch.is_empty() {
        return Err(Error::DegenerateJacobian);
    }
    Ok(patch)
}

/// `(1 + phi_t^2) phi_xx - 2 phi_x phi_t phi_xt + (1 + phi_x^2) phi_tt`,
/// with the sum of term magnitudes as relative scale.
pub fn minimal_surface_operator(d: Partials) -> (Complex64, f64) {
    let [px, pt, pxx, pxt, ptt] = d;
    let a = (1.0 + pt * pt) * pxx;
    let b = -2.0 * px * pt * pxt;
    let c = (1.0 + px * px) * ptt;
    (a + b + c, a.norm() + b.norm() + c.norm())
}

/// `(1 - phi_t^2) phi_xx + 2 phi_x phi_t phi_xt - (1 + phi_x^2) phi_tt`.
pub fn born_infeld_operator(d: Partials) -> (Complex64, f64) {
    let [px, pt, pxx, pxt, ptt] = d;
    let a = (1.0 - pt * pt) * pxx;
    let b = 2.0 * px * pt * pxt;
    let c = -(1.0 + px * px) * ptt;
    (a + b + c, a.norm() + b.norm() + c.norm())
}

pub fn minimal_surface_residual(p: &NonparametricPatch) -> ResidualReport {
    p.residual_report(minimal_surface_operator)
}

pub fn born_infeld_residual(p: &NonparametricPatch) -> ResidualReport {
    p.residual_report(born_infeld_operator)
}

/// `psi(x, t) = phi(a x + b t, b x + a t)`: each sample moves to
/// `boost^-1 (x, t)` and its partials transform with the boost matrix.
pub fn boost(p: &NonparametricPatch, boost: &LorentzBoost) -> NonparametricPatch {
    let inv = boost.inverse();
    let (a, b) = (boost.a(), boost.b());
    p.map_partials(|x, t, [px, pt, pxx, pxt, ptt]| {
        let (x, t) = inv.apply(x, t);
        let d = [
            px * a + pt * b,
            px * b + pt * a,
            pxx * (a * a) + pxt * (2.0 * a * b) + ptt * (b * b),
            pxx * (a * b) + pxt * (a * a + b * b) + ptt * (a * b),
            pxx * (b * b) + pxt * (2.0 * a * b) + ptt * (a * a),
        ];
        (x, t, d)
    })
}

/// `psi(x, t) = phi(a x + b t, b x + a t)` for a closed-form `phi`.
pub fn boost_closed_form<F>(phi: F, boost: LorentzBoost) -> impl Fn(Complex64, Complex64) -> Complex64
where
    F: Fn(Complex64, Complex64) -> Complex64,
{
    move |x, t| {
        let (xb, tb) = boost.apply(x, t);
        phi(xb, tb)
    }
}

/// `t -> -t`.
pub fn reflect_time(p: &NonparametricPatch) -> NonparametricPatch {
    p.map_partials(|x, t, [px, pt, pxx, pxt, ptt]| (x, -t, [px, -pt, pxx, -pxt, ptt]))
}

/// Substitute `t -> i t` in the derivative data of a patch and evaluate
/// the Born-Infeld residual.
pub fn wick_equivalence_check(minimal: &NonparametricPatch) -> ResidualReport {
    let rotated = minimal.map_partials(|x, t, [px, pt, pxx, pxt, ptt]| (x, t * I, [px, -I * pt, pxx, -I * pxt, -ptt]));
    born_infeld_residual(&rotated)
}

/// Graph surface `x = r1`, `t = r2`, `phi = f(r1, r2)`.
pub fn graph_surface(grid: &ParamGrid, f: impl Fn(f64, f64) -> f64) -> Result<SurfaceGrid> {
    SurfaceGrid::from_fn(*grid, |r| [r.re, r.im, f(r.re, r.im)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodograph::ClosedForm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rect(x: (f64, f64), t: (f64, f64), n: usize) -> ParamGrid {
        ParamGrid::rectangle(x, t, n, n).unwrap()
    }

    fn wick_catenoid(x: f64, t: f64) -> f64 {
        (x * x - t * t).sqrt().acosh()
    }

    #[test]
    fn boost_matrix() {
        for r in [0.0, 0.2, 0.8, 1.5, -2.0] {
            let b = LorentzBoost::new(r).unwrap();
            assert!((b.a() * b.a() - b.b() * b.b() - 1.0).abs() < 1e-12 * b.a() * b.a());
        }
        let (x, t) = LorentzBoost::identity().apply(0.3, 0.7);
        assert_eq!((x, t), (0.3, 0.7));
        let (al, be) = (LorentzBoost::new(0.3).unwrap(), LorentzBoost::new(-0.8).unwrap());
        let two = al.apply(be.apply(1.2, -0.4).0, be.apply(1.2, -0.4).1);
        let one = al.compose(&be).apply(1.2, -0.4);
        assert!((two.0 - one.0).abs() < 1e-12 && (two.1 - one.1).abs() < 1e-12);
        assert!(LorentzBoost::new(f64::NAN).is_err());
    }

    #[test]
    fn quadratic_graph_partials() {
        let g = rect((-1.0, 1.0), (-1.0, 1.0), 21);
        let p = chain_rule_partials(&graph_surface(&g, |x, _| x * x).unwrap()).unwrap();
        assert_eq!(p.dropped, 0);
        for k in 0..p.len() {
            assert!((p.px[k] - 2.0 * p.x[k]).norm() < 1e-6);
            assert!((p.pxx[k] - 2.0).norm() < 1e-6);
            assert!(p.ptt[k].norm() < 1e-6 && p.pxt[k].norm() < 1e-6);
        }
    }

    #[test]
    fn plane_and_traveling_wave() {
        let g = rect((-1.0, 1.0), (-1.0, 1.0), 21);
        let plane = chain_rule_partials(&graph_surface(&g, |x, t| 0.3 * x - 1.2 * t).unwrap()).unwrap();
        assert!(minimal_surface_residual(&plane).max_abs < 1e-10);
        assert!(wick_equivalence_check(&plane).max_abs < 1e-10);
        let small = rect((-0.5, 0.5), (-0.5, 0.5), 21);
        let wave =
            chain_rule_partials(&graph_surface(&small, |x, t| (x - t).powi(3) / 6.0 + (x - t)).unwrap()).unwrap();
        assert!(born_infeld_residual(&wave).max_abs < 1e-10);
        assert!(minimal_surface_residual(&wave).max_abs > 1e-1);
    }

    #[test]
    fn helicoid_and_catenoid_partials() {
        let g = ParamGrid::annular_sector((0.4, 0.9), (0.1, 0.73), 64, 64).unwrap();
        let h = chain_rule_partials(&ClosedForm::Helicoid.surface(&g).unwrap()).unwrap();
        for k in 0..h.len() {
            let (x, t) = (h.x[k], h.t[k]);
            assert!((h.px[k] + t / (x * x + t * t)).norm() < 1e-6);
        }
        assert!(minimal_surface_residual(&h).max_abs < 1e-5);
        assert!(wick_equivalence_check(&h).max_abs < 1e-5);
        let cat = chain_rule_partials(&ClosedForm::Catenoid.surface(&g).unwrap()).unwrap();
        for k in 0..cat.len() {
            let (x, t) = (cat.x[k], cat.t[k]);
            let q = x * x + t * t;
            let expect = x / ((q - 1.0).sqrt() * q.sqrt());
            assert!((cat.px[k] - expect).norm() < 1e-6, "{} vs {}", cat.px[k], expect);
        }
        assert!(minimal_surface_residual(&cat).max_abs < 1e-5);
    }

    #[test]
    fn wick_catenoid_solves_born_infeld() {
        let g = rect((1.5, 2.5), (-0.5, 0.5), 101);
        let p = chain_rule_partials(&graph_surface(&g, wick_catenoid).unwrap()).unwrap();
        let base = born_infeld_residual(&p);
        assert!(base.max_abs < 1e-5, "{}", base.max_abs);
        for r in [0.2, 0.8, 1.5] {
            let b = boost(&p, &LorentzBoost::new(r).unwrap());
            let rep = born_infeld_residual(&b);
            assert!((rep.max_abs - base.max_abs).abs() < 1e-5);
            assert!((rep.mean_abs - base.mean_abs).abs() < 1e-5);
        }
        let refl = born_infeld_residual(&reflect_time(&p));
        assert!((refl.max_abs - base.max_abs).abs() < 1e-14);
    }

    #[test]
    fn boosted_closed_form_resampled() {
        let g = rect((1.5, 2.5), (-0.5, 0.5), 101);
        let shifted = |x: Complex64, t: Complex64| Complex64::new(wick_catenoid(x.re + 0.3, t.re), 0.0);
        let psi = boost_closed_form(shifted, LorentzBoost::new(0.2).unwrap());
        let s = graph_surface(&g, |x, t| psi(c(x, 0.0), c(t, 0.0)).re).unwrap();
        let rep = born_infeld_residual(&chain_rule_partials(&s).unwrap());
        assert!(rep.max_abs < 1e-5, "{}", rep.max_abs);
    }

    #[test]
    fn boost_zero_is_identity_and_composes() {
        let p = NonparametricPatch::from_closed_form(&[(c(2.0, 0.0), c(0.3, 0.0))], |x, t| {
            (x * t, [t, x, c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
        });
        assert_eq!(boost(&p, &LorentzBoost::identity()), p);
        let (al, be) = (LorentzBoost::new(0.4).unwrap(), LorentzBoost::new(0.7).unwrap());
        let two = boost(&boost(&p, &be), &al);
        let one = boost(&p, &al.compose(&be));
        assert!((two.x[0] - one.x[0]).norm() < 1e-12 && (two.pxt[0] - one.pxt[0]).norm() < 1e-12);
    }

    #[test]
    fn non_minimal_control() {
        let g = rect((-1.0, 1.0), (-1.0, 1.0), 21);
        let p = chain_rule_partials(&graph_surface(&g, |x, t| x * x + t * t).unwrap()).unwrap();
        assert!(minimal_surface_residual(&p).max_abs > 1e-1);
        assert!(wick_equivalence_check(&p).max_abs > 1e-1);
    }

    #[test]
    fn degenerate_jacobian() {
        let g = rect((0.0, 1.0), (0.0, 1.0), 9);
        let s = SurfaceGrid::from_fn(g, |r| [r.re, 0.0, r.im]).unwrap();
        assert!(matches!(chain_rule_partials(&s), Err(Error::DegenerateJacobian)));
    }

    #[test]
    fn partial_degeneracy_is_counted() {
        let g = rect((-1.0, 1.0), (-1.0, 1.0), 21);
        let s = SurfaceGrid::from_fn(g, |r| [r.re.powi(3), r.im, 0.0]).unwrap();
        let p = chain_rule_partials(&s).unwrap();
        assert!(p.dropped > 0 && p.dropped < 21 * 21);
        assert_eq!(p.len() + p.dropped, 21 * 21);
    }
}
