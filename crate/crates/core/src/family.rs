//! Wick rotation and the one-parameter soliton family
//! `S_theta = cos(theta) X^s + sin(theta) Y^s`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::diff::FdScheme;
use crate::error::{Error, Result};
use crate::generator::cauchy_riemann_report;
use crate::grid::{ParamGrid, Reality, SurfaceGrid};
use crate::hodograph::{fg_relations_on_grid, FgPair};
use crate::report::ResidualReport;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default Cauchy-Riemann tolerance for accepting a conjugate pair.
pub const CONJUGACY_TOL: f64 = 1e-6;

/// `t -> i t`; `x` and `phi` unchanged.
pub fn wick_rotate(s: &SurfaceGrid) -> SurfaceGrid {
    let (grid, x, t, phi, _) = s.clone().into_parts();
    SurfaceGrid::with_parts(grid, x, t.mapv(|z| z * I), phi, Reality::WickRotated)
}

/// `(cos theta, sin theta)`, exact when `theta` is a floating-point
/// multiple of `pi/2`.
pub fn cos_sin(theta: f64) -> (f64, f64) {
    let k = (theta / FRAC_PI_2).round();
    if k * FRAC_PI_2 == theta && k.abs() < 1e15 {
        match (k as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        (theta.cos(), theta.sin())
    }
}

/// A real minimal surface, its harmonic conjugate and their Wick
/// rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonFamily {
    x: SurfaceGrid,
    y: SurfaceGrid,
    xs: SurfaceGrid,
    ys: SurfaceGrid,
    conjugacy: ResidualReport,
}

impl SolitonFamily {
    /// Accept `(X, Y)` if they share a grid and satisfy the Cauchy-Riemann
    /// relations within [`CONJUGACY_TOL`].
    pub fn new(x: SurfaceGrid, y: SurfaceGrid) -> Result<Self> {
        Self::with_tolerance(x, y, CONJUGACY_TOL)
    }

    pub fn with_tolerance(x: SurfaceGrid, y: SurfaceGrid, tol: f64) -> Result<Self> {
        let fam = Self::new_unchecked(x, y)?;
        let violation = fam.conjugacy.max_abs;
        if !(violation <= tol) {
            return Err(Error::NotConjugate {
                violation,
                tolerance: tol,
            });
        }
        Ok(fam)
    }

    /// Skip the conjugacy threshold (still requires a shared grid and real
    /// members). Used for negative controls.
    pub fn new_unchecked(x: SurfaceGrid, y: SurfaceGrid) -> Result<Self> {
        if x.grid() != y.grid() {
            return Err(Error::ShapeMismatch("family members on different grids".into()));
        }
        if x.reality() != Reality::Real || y.reality() != Reality::Real {
            return Err(Error::InvalidParameter("family members must be real surfaces".into()));
        }
        let conjugacy = cauchy_riemann_report(&x, &y, &FdScheme::default())?;
        let xs = wick_rotate(&x);
        let ys = wick_rotate(&y);
        Ok(Self {
            x,
            y,
            xs,
            ys,
            conjugacy,
        })
    }

    pub fn grid(&self) -> &ParamGrid {
        self.x.grid()
    }

    pub fn x(&self) -> &SurfaceGrid {
        &self.x
    }

    pub fn y(&self) -> &SurfaceGrid {
        &self.y
    }

    pub fn xs(&self) -> &SurfaceGrid {
        &self.xs
    }

    pub fn ys(&self) -> &SurfaceGrid {
        &self.ys
    }

    /// Cauchy-Riemann statistics measured at construction.
    pub fn conjugacy(&self) -> &ResidualReport {
        &self.conjugacy
    }

    /// `cos(theta) X^s + sin(theta) Y^s`.
    pub fn family_at(&self, theta: f64) -> SurfaceGrid {
        let (c, s) = cos_sin(theta);
        self.xs.combine(c, &self.ys, s).expect("members share a grid")
    }

    /// `d^k S / d theta^k = S_{theta + k pi/2}` for `k` in `1..=4`; the
    /// fourth derivative is `S_theta` itself.
    pub fn theta_derivative(&self, theta: f64, order: u32) -> Result<SurfaceGrid> {
        match order {
            1..=3 => Ok(self.family_at(theta + order as f64 * FRAC_PI_2)),
            4 => Ok(self.family_at(theta)),
            _ => Err(Error::InvalidParameter(format!(
                "theta derivative order must be in 1..=4, got {order}"
            ))),
        }
    }
}

/// F/G data of `S_theta` from the data of its two members.
pub fn family_fg(first: &FgPair, second: &FgPair, theta: f64) -> FgPair {
    let (c, s) = cos_sin(theta);
    FgPair::combine(c, first, s, second)
}

/// Mismatch of the three F/G relations on a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonRelationsReport {
    /// `x - t^s` against `F(r) - int r̄^2 G'`.
    pub minus: ResidualReport,
    /// `x + t^s` against `G(r̄) - int r^2 F'`.
    pub plus: ResidualReport,
    /// `phi` against `int r F' + int r̄ G'`.
    pub phi: ResidualReport,
}

impl SolitonRelationsReport {
    pub fn max_abs(&self) -> f64 {
        self.minus.max_abs.max(self.plus.max_abs).max(self.phi.max_abs)
    }
}

/// Evaluate the F/G relations at every node. For a real surface the time
/// component enters as `i t`, for a Wick-rotated one as stored. Integration
/// constants are removed at the grid node nearest `base`.
pub fn verify_soliton_relations(s: &SurfaceGrid, p: &FgPair, base: Complex64) -> Result<SolitonRelationsReport> {
    let grid = s.grid();
    let [minus, plus, phi] = fg_relations_on_grid(p, grid, base)?;
    let tau = match s.reality() {
        Reality::WickRotated => s.t().clone(),
        Reality::Real => s.t().mapv(|z| z * I),
    };
    let lhs_minus = s.x() - &tau;
    let lhs_plus = s.x() + &tau;
    let reference = grid.nearest_node(base);
    let report = |lhs: &ndarray::Array2<Complex64>, rhs: &ndarray::Array2<Complex64>| {
        let offset = lhs[reference] - rhs[reference];
        ResidualReport::from_samples(
            lhs.indexed_iter()
                .zip(rhs.iter())
                .map(|((n, l), r)| (n, (l - r - offset).norm(), r.norm())),
        )
    };
    Ok(SolitonRelationsReport {
        minus: report(&lhs_minus, &minus),
        plus: report(&lhs_plus, &plus),
        phi: report(s.phi(), &phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodograph::ClosedForm;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> ParamGrid {
        ParamGrid::annular_sector((0.4, 0.9), (0.0, 0.6), 41, 31).unwrap()
    }

    fn family() -> SolitonFamily {
        let g = grid();
        SolitonFamily::new(
            ClosedForm::Helicoid.surface(&g).unwrap(),
            ClosedForm::Catenoid.surface(&g).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn wick_rotation() {
        let g = ParamGrid::rectangle((0.0, 1.0), (0.0, 1.0), 3, 3).unwrap();
        let flat = SurfaceGrid::from_fn(g, |r| [r.re, 0.0, r.im]).unwrap();
        let w = wick_rotate(&flat);
        assert_eq!(w.reality(), Reality::WickRotated);
        assert_eq!(w.x(), flat.x());
        assert!(w.t().iter().all(|z| z.norm() == 0.0));
        let curved = SurfaceGrid::from_fn(g, |r| [r.re, r.im * 2.0, 1.0]).unwrap();
        let twice = wick_rotate(&wick_rotate(&curved));
        assert_eq!(twice.t(), &curved.t().mapv(|z| -z));
    }

    #[test]
    fn exact_quarter_turns() {
        assert_eq!(cos_sin(0.0), (1.0, 0.0));
        assert_eq!(cos_sin(FRAC_PI_2), (0.0, 1.0));
        assert_eq!(cos_sin(3.0 * FRAC_PI_2), (0.0, -1.0));
        assert_eq!(cos_sin(0.3), (0.3f64.cos(), 0.3f64.sin()));
    }

    #[test]
    fn family_endpoints_are_exact() {
        let f = family();
        assert_eq!(&f.family_at(0.0), f.xs());
        assert_eq!(&f.family_at(FRAC_PI_2), f.ys());
        assert_eq!(&f.theta_derivative(0.0, 1).unwrap(), f.ys());
        assert_eq!(f.theta_derivative(0.4, 4).unwrap(), f.family_at(0.4));
        let neg = f.theta_derivative(0.4, 2).unwrap();
        assert!(
            neg.combine(1.0, &f.family_at(0.4), 1.0)
                .unwrap()
                .max_abs_diff(&neg.scaled(0.0))
                < 1e-14
        );
        assert!(f.theta_derivative(0.4, 5).is_err());
    }

    #[test]
    fn helicoid_catenoid_phi_formula() {
        let f = family();
        let g = grid();
        let theta = 0.7;
        let s = f.family_at(theta);
        let logs = g.log_nodes().unwrap();
        for ((i, j), l) in logs.indexed_iter() {
            let expect = -0.5 * I * l * Complex64::from_polar(1.0, -theta)
                + 0.5 * I * l.conj() * Complex64::from_polar(1.0, theta);
            assert!((s.phi()[(i, j)] - expect).norm() < 1e-14);
            assert!(s.t()[(i, j)].re.abs() < 1e-15);
        }
    }

    #[test]
    fn family_fg_matches_closed_form() {
        let r = c(0.5, 0.3);
        for theta in [0.0, 0.3, FRAC_PI_2] {
            let p = family_fg(&FgPair::helicoid(), &FgPair::catenoid(), theta);
            let f = 0.5 * I * Complex64::from_polar(1.0, -theta) / r;
            let g = -0.5 * I * Complex64::from_polar(1.0, theta) / r.conj();
            assert!(((p.f)(r) - f).norm() < 1e-15);
            assert!(((p.g)(r.conj()) - g).norm() < 1e-15);
        }
        let cat = family_fg(&FgPair::helicoid(), &FgPair::catenoid(), FRAC_PI_2);
        assert_eq!((cat.f)(r), 1.0 / (2.0 * r));
    }

    #[test]
    fn soliton_relations_hold_and_detect_corruption() {
        let f = family();
        for theta in [0.0, 0.3, FRAC_PI_2] {
            let p = family_fg(&FgPair::helicoid(), &FgPair::catenoid(), theta);
            let rep = verify_soliton_relations(&f.family_at(theta), &p, c(1.0, 0.0)).unwrap();
            assert!(rep.max_abs() < 1e-8, "theta {theta}: {}", rep.max_abs());
        }
        let p = family_fg(&FgPair::helicoid(), &FgPair::catenoid(), 0.3);
        let bad = FgPair {
            f: {
                let f = p.f.clone();
                std::sync::Arc::new(move |r| f(r) * 1.01)
            },
            ..p
        };
        let rep = verify_soliton_relations(&f.family_at(0.3), &bad, c(1.0, 0.0)).unwrap();
        assert!(rep.max_abs() > 1e-3);
    }

    #[test]
    fn zero_surface_zero_mismatch() {
        let g = grid();
        let zero = SurfaceGrid::from_fn(g, |_| [0.0; 3]).unwrap();
        let rep = verify_soliton_relations(&zero, &FgPair::zero(), c(1.0, 0.0)).unwrap();
        assert_eq!(rep.max_abs(), 0.0);
    }

    #[test]
    fn non_conjugate_pair_rejected() {
        let g = grid();
        let h = ClosedForm::Helicoid.surface(&g).unwrap();
        let cat = ClosedForm::Catenoid.surface(&g).unwrap();
        assert!(matches!(
            SolitonFamily::new(h.clone(), cat.scaled(1.01)),
            Err(Error::NotConjugate { .. })
        ));
        assert!(SolitonFamily::new_unchecked(h, cat.scaled(2.0)).is_ok());
    }
}
