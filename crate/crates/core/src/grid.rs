//! Parameter-plane grids and sampled surfaces.
//!
//! A [`ParamGrid`] is uniform along each of its two native axes. For a
//! rectangle the native coordinates are `(r1, r2)` themselves. For an
//! annulus they are `(ln |r|, arg r)`, so node `(i, j)` sits at
//! `r = exp(s_i + i psi_j)`. The log-polar chart is conformal, which keeps
//! holomorphic data holomorphic in the native coordinates and bounds the
//! higher derivatives of `1/r`-type terms near the inner radius.

use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the imaginary part of a surface flagged [`Reality::Real`].
pub const REALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Rectangle {
        r1: (f64, f64),
        r2: (f64, f64),
    },
    /// Annular sector `rho in [rho.0, rho.1]`, `arg in [angle.0, angle.1]`,
    /// sampled uniformly in `ln rho` and `arg`.
    Annulus {
        rho: (f64, f64),
        angle: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamGrid {
    kind: GridKind,
    n1: usize,
    n2: usize,
}

fn check_count(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::GridTooSmall { len: n, needed: 3 });
    }
    Ok(())
}

fn check_interval(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} bounds must be finite")));
    }
    if lo >= hi {
        return Err(Error::InvalidGrid(format!(
            "{name} bounds must satisfy min < max, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl ParamGrid {
    pub fn rectangle(r1: (f64, f64), r2: (f64, f64), n1: usize, n2: usize) -> Result<Self> {
        check_interval("r1", r1.0, r1.1)?;
        check_interval("r2", r2.0, r2.1)?;
        check_count(n1)?;
        check_count(n2)?;
        Ok(Self {
            kind: GridKind::Rectangle { r1, r2 },
            n1,
            n2,
        })
    }

    /// Full annulus, one turn starting at arg 0. `n_angle` nodes along the
    /// angle, `n_radial` along the radius.
    pub fn annulus(rho_min: f64, rho_max: f64, n_angle: usize, n_radial: usize) -> Result<Self> {
        Self::annular_sector((rho_min, rho_max), (0.0, TAU), n_radial, n_angle)
    }

    /// Annular sector that must not contain the unit circle in its interior.
    pub fn annular_sector(rho: (f64, f64), angle: (f64, f64), n_radial: usize, n_angle: usize) -> Result<Self> {
        if rho.0 < 1.0 && rho.1 > 1.0 {
            return Err(Error::InvalidGrid(format!(
                "annulus [{}, {}] contains the singular circle |r| = 1; use \
                 annular_sector_across_unit_circle to acknowledge it",
                rho.0, rho.1
            )));
        }
        Self::annular_sector_across_unit_circle(rho, angle, n_radial, n_angle)
    }

    /// Annular sector with no restriction on where `|r| = 1` falls.
    pub fn annular_sector_across_unit_circle(
        rho: (f64, f64),
        angle: (f64, f64),
        n_radial: usize,
        n_angle: usize,
    ) -> Result<Self> {
        if !(rho.0 > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "annulus requires rho_min > 0, got {}",
                rho.0
            )));
        }
        check_interval("rho", rho.0, rho.1)?;
        check_interval("angle", angle.0, angle.1)?;
        check_count(n_radial)?;
        check_count(n_angle)?;
        Ok(Self {
            kind: GridKind::Annulus { rho, angle },
            n1: n_radial,
            n2: n_angle,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.kind, GridKind::Annulus { .. })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Native axis bounds: `(r1, r2)` or `(ln rho, angle)`.
    pub fn native_bounds(&self) -> ((f64, f64), (f64, f64)) {
        match self.kind {
            GridKind::Rectangle { r1, r2 } => (r1, r2),
            GridKind::Annulus { rho, angle } => ((rho.0.ln(), rho.1.ln()), angle),
        }
    }

    /// Uniform spacing along each native axis.
    pub fn spacing(&self) -> (f64, f64) {
        let (a, b) = self.native_bounds();
        ((a.1 - a.0) / (self.n1 - 1) as f64, (b.1 - b.0) / (self.n2 - 1) as f64)
    }

    pub fn coord1(&self, i: usize) -> f64 {
        let (a, _) = self.native_bounds();
        if i + 1 == self.n1 {
            return a.1;
        }
        a.0 + i as f64 * self.spacing().0
    }

    pub fn coord2(&self, j: usize) -> f64 {
        let (_, b) = self.native_bounds();
        if j + 1 == self.n2 {
            return b.1;
        }
        b.0 + j as f64 * self.spacing().1
    }

    /// Parameter-plane point `r = r1 + i r2` of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        match self.kind {
            GridKind::Rectangle { .. } => Complex64::new(self.coord1(i), self.coord2(j)),
            GridKind::Annulus { .. } => Complex64::from_polar(self.coord1(i).exp(), self.coord2(j)),
        }
    }

    pub fn nodes(&self) -> Array2<Complex64> {
        Array2::from_shape_fn(self.shape(), |(i, j)| self.node(i, j))
    }

    /// Log of the node, continuous over the grid. Exact `s + i psi` for
    /// annuli; principal log unwrapped along the grid for rectangles.
    pub fn log_nodes(&self) -> Result<Array2<Complex64>> {
        match self.kind {
            GridKind::Annulus { .. } => Ok(Array2::from_shape_fn(self.shape(), |(i, j)| {
                Complex64::new(self.coord1(i), self.coord2(j))
            })),
            GridKind::Rectangle { .. } => {
                let nodes = self.nodes();
                if nodes.iter().any(|r| r.norm() == 0.0) {
                    return Err(Error::Domain("grid contains r = 0".into()));
                }
                Ok(unwrap_log(&nodes))
            }
        }
    }

    /// Area element `dr1 dr2` per unit native cell (`|r|^2` on annuli).
    pub fn area_factor(&self, i: usize, _j: usize) -> f64 {
        match self.kind {
            GridKind::Rectangle { .. } => 1.0,
            GridKind::Annulus { .. } => (2.0 * self.coord1(i)).exp(),
        }
    }

    /// Same domain with `2n - 1` nodes per axis (spacing halved).
    pub fn refined(&self) -> Self {
        Self {
            kind: self.kind,
            n1: 2 * self.n1 - 1,
            n2: 2 * self.n2 - 1,
        }
    }

    /// Grid index of the node closest to `p`.
    pub fn nearest_node(&self, p: Complex64) -> (usize, usize) {
        let mut best = (0, 0);
        let mut dist = f64::INFINITY;
        for i in 0..self.n1 {
            for j in 0..self.n2 {
                let d = (self.node(i, j) - p).norm();
                if d < dist {
                    dist = d;
                    best = (i, j);
                }
            }
        }
        best
    }

    /// Axis-aligned bounding box of the node set: `(min, max)` corners.
    pub fn bounding_box(&self) -> (Complex64, Complex64) {
        let mut lo = Complex64::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        match self.kind {
            GridKind::Rectangle { r1, r2 } => {
                lo = Complex64::new(r1.0, r2.0);
                hi = Complex64::new(r1.1, r2.1);
            }
            GridKind::Annulus { rho, angle } => {
                // extremes occur at sector corners or where the arc crosses an axis
                let mut angles = vec![angle.0, angle.1];
                let first = (angle.0 / std::f64::consts::FRAC_PI_2).ceil() as i64;
                let last = (angle.1 / std::f64::consts::FRAC_PI_2).floor() as i64;
                for k in first..=last {
                    angles.push(k as f64 * std::f64::consts::FRAC_PI_2);
                }
                for &a in &angles {
                    for &r in &[rho.0, rho.1] {
                        let p = Complex64::from_polar(r, a);
                        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
                    }
                }
            }
        }
        (lo, hi)
    }
}

/// Principal log of every node, with `2 pi i` jumps removed by continuation
/// down the first column and then along each row.
fn unwrap_log(nodes: &Array2<Complex64>) -> Array2<Complex64> {
    let (n1, n2) = nodes.dim();
    let mut out = nodes.mapv(|r| r.ln());
    let fix = |prev: Complex64, cur: Complex64| {
        let k = ((prev.im - cur.im) / TAU).round();
        cur + Complex64::new(0.0, k * TAU)
    };
    for i in 1..n1 {
        out[(i, 0)] = fix(out[(i - 1, 0)], out[(i, 0)]);
    }
    for i in 0..n1 {
        for j in 1..n2 {
            out[(i, j)] = fix(out[(i, j - 1)], out[(i, j)]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    X,
    T,
    Phi,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::X, Component::T, Component::Phi];

    pub fn name(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::T => "t",
            Component::Phi => "phi",
        }
    }
}

/// Cartesian parameter axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    R1,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reality {
    Real,
    WickRotated,
}

/// Sampled parametric surface `(x, t, phi)` over a [`ParamGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    grid: ParamGrid,
    x: Array2<Complex64>,
    t: Array2<Complex64>,
    phi: Array2<Complex64>,
    reality: Reality,
}

pub(crate) fn all_finite(a: &Array2<Complex64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl SurfaceGrid {
    pub fn new(
        grid: ParamGrid,
        x: Array2<Complex64>,
        t: Array2<Complex64>,
        phi: Array2<Complex64>,
        reality: Reality,
    ) -> Result<Self> {
        for (name, a) in [("x", &x), ("t", &t), ("phi", &phi)] {
            if a.dim() != grid.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "component {name} has shape {:?}, grid is {:?}",
                    a.dim(),
                    grid.shape()
                )));
            }
            if !all_finite(a) {
                return Err(Error::NonFinite("surface component"));
            }
        }
        if reality == Reality::Real {
            for a in [&x, &t, &phi] {
                for ((i, j), z) in a.indexed_iter() {
                    if z.im.abs() > REALITY_TOL * (1.0 + z.re.abs()) {
                        return Err(Error::NotReal { i, j, im: z.im });
                    }
                }
            }
        }
        Ok(Self {
            grid,
            x,
            t,
            phi,
            reality,
        })
    }

    /// Build a real surface from real-valued sample functions of the node.
    pub fn from_fn(grid: ParamGrid, f: impl Fn(Complex64) -> [f64; 3]) -> Result<Self> {
        let vals = grid.nodes().mapv(f);
        let pick = |k: usize| vals.mapv(|v| Complex64::new(v[k], 0.0));
        Self::new(grid, pick(0), pick(1), pick(2), Reality::Real)
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn component(&self, c: Component) -> &Array2<Complex64> {
        match c {
            Component::X => &self.x,
            Component::T => &self.t,
            Component::Phi => &self.phi,
        }
    }

    pub fn x(&self) -> &Array2<Complex64> {
        &self.x
    }

    pub fn t(&self) -> &Array2<Complex64> {
        &self.t
    }

    pub fn phi(&self) -> &Array2<Complex64> {
        &self.phi
    }

    pub fn point(&self, i: usize, j: usize) -> [Complex64; 3] {
        [self.x[(i, j)], self.t[(i, j)], self.phi[(i, j)]]
    }

    pub fn into_parts(
        self,
    ) -> (
        ParamGrid,
        Array2<Complex64>,
        Array2<Complex64>,
        Array2<Complex64>,
        Reality,
    ) {
        (self.grid, self.x, self.t, self.phi, self.reality)
    }

    /// Componentwise `a * self + b * other`; both must share a grid.
    pub fn combine(&self, a: f64, other: &SurfaceGrid, b: f64) -> Result<SurfaceGrid> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("surfaces live on different grids".into()));
        }
        let lin = |p: &Array2<Complex64>, q: &Array2<Complex64>| {
            ndarray::Zip::from(p).and(q).map_collect(|&u, &v| u * a + v * b)
        };
        let reality = if self.reality == other.reality {
            self.reality
        } else {
            Reality::WickRotated
        };
        Ok(SurfaceGrid {
            grid: self.grid,
            x: lin(&self.x, &other.x),
            t: lin(&self.t, &other.t),
            phi: lin(&self.phi, &other.phi),
            reality,
        })
    }

    pub fn scaled(&self, s: f64) -> SurfaceGrid {
        SurfaceGrid {
            grid: self.grid,
            x: self.x.mapv(|z| z * s),
            t: self.t.mapv(|z| z * s),
            phi: self.phi.mapv(|z| z * s),
            reality: self.reality,
        }
    }

    /// `t -> -t`.
    pub fn flip_t(mut self) -> SurfaceGrid {
        self.t.mapv_inplace(|z| -z);
        self
    }

    pub(crate) fn with_parts(
        grid: ParamGrid,
        x: Array2<Complex64>,
        t: Array2<Complex64>,
        phi: Array2<Complex64>,
        reality: Reality,
    ) -> SurfaceGrid {
        SurfaceGrid {
            grid,
            x,
            t,
            phi,
            reality,
        }
    }

    /// Largest componentwise distance to `other` (same grid required).
    pub fn max_abs_diff(&self, other: &SurfaceGrid) -> f64 {
        Component::ALL
            .iter()
            .flat_map(|&c| {
                self.component(c)
                    .iter()
                    .zip(other.component(c).iter())
                    .map(|(a, b)| (a - b).norm())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_nodes_and_spacing() {
        let g = ParamGrid::rectangle((-1.0, 1.0), (0.0, 2.0), 5, 3).unwrap();
        assert_eq!(g.shape(), (5, 3));
        assert_eq!(g.spacing(), (0.5, 1.0));
        assert_eq!(g.node(0, 0), Complex64::new(-1.0, 0.0));
        assert_eq!(g.node(4, 2), Complex64::new(1.0, 2.0));
    }

    #[test]
    fn annulus_is_log_polar() {
        let g = ParamGrid::annular_sector((0.4, 0.9), (0.0, 1.0), 5, 4).unwrap();
        assert!((g.node(0, 0).norm() - 0.4).abs() < 1e-15);
        assert!((g.node(4, 3).norm() - 0.9).abs() < 1e-15);
        assert!((g.node(4, 3).arg() - 1.0).abs() < 1e-15);
        let h = g.spacing().0;
        assert!((h - (0.9f64 / 0.4).ln() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_inverted_grids() {
        assert!(matches!(
            ParamGrid::rectangle((0.0, 1.0), (0.0, 1.0), 2, 5),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(ParamGrid::rectangle((1.0, 0.0), (0.0, 1.0), 5, 5).is_err());
        assert!(ParamGrid::annulus(0.0, 0.9, 8, 8).is_err());
        assert!(ParamGrid::annulus(0.5, 0.4, 8, 8).is_err());
    }

    #[test]
    fn annulus_across_unit_circle_needs_acknowledgement() {
        assert!(ParamGrid::annulus(0.5, 1.5, 8, 8).is_err());
        assert!(ParamGrid::annular_sector_across_unit_circle((0.5, 1.5), (0.0, 1.0), 8, 8).is_ok());
        assert!(ParamGrid::annulus(1.0, 1.5, 8, 8).is_ok());
    }

    #[test]
    fn real_surface_rejects_imaginary_parts() {
        let g = ParamGrid::rectangle((0.0, 1.0), (0.0, 1.0), 3, 3).unwrap();
        let zero = Array2::zeros((3, 3));
        let mut t = Array2::zeros((3, 3));
        t[(1, 1)] = Complex64::new(0.0, 1e-6);
        let err = SurfaceGrid::new(g, zero.clone(), t.clone(), zero.clone(), Reality::Real);
        assert!(matches!(err, Err(Error::NotReal { i: 1, j: 1, .. })));
        assert!(SurfaceGrid::new(g, zero.clone(), t, zero, Reality::WickRotated).is_ok());
    }

    #[test]
    fn non_finite_components_rejected() {
        let g = ParamGrid::rectangle((0.0, 1.0), (0.0, 1.0), 3, 3).unwrap();
        let zero: Array2<Complex64> = Array2::zeros((3, 3));
        let mut bad = zero.clone();
        bad[(0, 2)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            SurfaceGrid::new(g, bad, zero.clone(), zero, Reality::Real),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn unwrapped_log_is_continuous_across_negative_axis() {
        let g = ParamGrid::rectangle((-1.0, -0.5), (-0.5, 0.5), 5, 11).unwrap();
        let l = g.log_nodes().unwrap();
        for i in 0..5 {
            for j in 1..11 {
                assert!((l[(i, j)].im - l[(i, j - 1)].im).abs() < 1.0);
            }
        }
    }

    #[test]
    fn bounding_box_of_full_annulus_contains_origin() {
        let g = ParamGrid::annulus(0.4, 0.9, 16, 8).unwrap();
        let (lo, hi) = g.bounding_box();
        assert!((lo.re + 0.9).abs() < 1e-12 && (hi.im - 0.9).abs() < 1e-12);
    }
}
