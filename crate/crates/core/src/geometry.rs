//! First fundamental form (Euclidean and Wick-signed), the action integral
//! and θ-invariance of soliton families.

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::diff::FdScheme;
use crate::error::{Error, Result};
use crate::family::SolitonFamily;
use crate::grid::{ParamGrid, SurfaceGrid};
use crate::report::ResidualReport;

/// Discriminants down to `-DISC_CLAMP` are treated as zero.
pub const DISC_CLAMP: f64 = 1e-12;

/// Relative imaginary part tolerated in `EG - F^2`.
pub const DISC_IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Signature {
    /// `E = x_1^2 + t_1^2 + phi_1^2`.
    #[default]
    Euclidean,
    /// `E = x_1^2 - t_1^2 + phi_1^2`.
    WickSigned,
}

/// `E`, `F`, `G` as plain complex squares (no conjugation).
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalForm {
    pub e: Array2<Complex64>,
    pub f: Array2<Complex64>,
    pub g: Array2<Complex64>,
    pub signature: Signature,
}

impl FundamentalForm {
    /// `E G - F^2`.
    pub fn discriminant(&self) -> Array2<Complex64> {
        Zip::from(&self.e)
            .and(&self.f)
            .and(&self.g)
            .map_collect(|&e, &f, &g| e * g - f * f)
    }

    /// `|E - G|` and `|F|` statistics.
    pub fn isothermality(&self) -> (ResidualReport, ResidualReport) {
        (
            ResidualReport::from_difference(&self.e, &self.g),
            ResidualReport::from_array(&self.f),
        )
    }
}

pub fn fundamental_form(s: &SurfaceGrid, signature: Signature) -> Result<FundamentalForm> {
    fundamental_form_with(s, signature, &FdScheme::default())
}

pub fn fundamental_form_with(s: &SurfaceGrid, signature: Signature, scheme: &FdScheme) -> Result<FundamentalForm> {
    let grid = s.grid();
    let (x1, x2) = scheme.gradient(grid, s.x())?;
    let (t1, t2) = scheme.gradient(grid, s.t())?;
    let (p1, p2) = scheme.gradient(grid, s.phi())?;
    let sign = match signature {
        Signature::Euclidean => 1.0,
        Signature::WickSigned => -1.0,
    };
    let dot = |a: &Array2<Complex64>,
               b: &Array2<Complex64>,
               c: &Array2<Complex64>,
               d: &Array2<Complex64>,
               e: &Array2<Complex64>,
               f: &Array2<Complex64>| {
        let mut out = Zip::from(a).and(b).map_collect(|&u, &v| u * v);
        Zip::from(&mut out)
            .and(c)
            .and(d)
            .and(e)
            .and(f)
            .for_each(|o, &tc, &td, &pe, &pf| *o += tc * td * sign + pe * pf);
        out
    };
    Ok(FundamentalForm {
        e: dot(&x1, &x1, &t1, &t1, &p1, &p1),
        f: dot(&x1, &x2, &t1, &t2, &p1, &p2),
        g: dot(&x2, &x2, &t2, &t2, &p2, &p2),
        signature,
    })
}

/// `int sqrt(EG - F^2) dr1 dr2` by the tensor-product trapezoid rule over
/// the grid's parameter domain.
pub fn action(form: &FundamentalForm, grid: &ParamGrid) -> Result<f64> {
    let disc = form.discriminant();
    if disc.dim() != grid.shape() {
        return Err(Error::ShapeMismatch(format!(
            "form is {:?}, grid is {:?}",
            disc.dim(),
            grid.shape()
        )));
    }
    let (n1, n2) = grid.shape();
    let (h1, h2) = grid.spacing();
    let weight = |k: usize, n: usize| if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for ((i, j), &d) in disc.indexed_iter() {
        if !(d.re.is_finite() && d.im.is_finite()) {
            return Err(Error::NonFinite("fundamental form"));
        }
        if d.im.abs() > DISC_IMAG_TOL * (1.0 + d.re.abs()) {
            return Err(Error::ComplexDiscriminant { i, j, value: d });
        }
        if d.re < -DISC_CLAMP {
            return Err(Error::NegativeDiscriminant { i, j, value: d.re });
        }
        total += weight(i, n1) * weight(j, n2) * grid.area_factor(i, j) * d.re.max(0.0).sqrt();
    }
    Ok(total * h1 * h2)
}

/// Deviation of `E` and `G` from the first θ and the magnitude of `F`,
/// over a θ-sweep of a family in the Wick-signed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSweepReport {
    pub e_deviation: ResidualReport,
    pub g_deviation: ResidualReport,
    pub f_magnitude: ResidualReport,
    /// Action at each θ, in sweep order.
    pub actions: Vec<f64>,
}

impl ThetaSweepReport {
    pub fn max_deviation(&self) -> f64 {
        self.e_deviation
            .max_abs
            .max(self.g_deviation.max_abs)
            .max(self.f_magnitude.max_abs)
    }

    /// Largest `|A(θ) - A(θ_0)| / |A(θ_0)|`.
    pub fn action_spread(&self) -> f64 {
        let a0 = self.actions[0];
        self.actions
            .iter()
            .map(|a| (a - a0).abs() / a0.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

pub fn theta_sweep_invariance(fam: &SolitonFamily, thetas: &[f64]) -> Result<ThetaSweepReport> {
    theta_sweep_invariance_with(fam, thetas, &FdScheme::default())
}

pub fn theta_sweep_invariance_with(fam: &SolitonFamily, thetas: &[f64], scheme: &FdScheme) -> Result<ThetaSweepReport> {
    let Some(&first) = thetas.first() else {
        return Err(Error::InvalidParameter("theta sweep needs at least one angle".into()));
    };
    let grid = fam.grid();
    let baseline = fundamental_form_with(&fam.family_at(first), Signature::WickSigned, scheme)?;
    let mut e_dev = ResidualReport::default();
    let mut g_dev = ResidualReport::default();
    let mut f_mag = ResidualReport::default();
    let mut actions = Vec::with_capacity(thetas.len());
    for (k, &theta) in thetas.iter().enumerate() {
        let form = if k == 0 {
            baseline.clone()
        } else {
            fundamental_form_with(&fam.family_at(theta), Signature::WickSigned, scheme)?
        };
        let e = ResidualReport::from_difference(&form.e, &baseline.e);
        let g = ResidualReport::from_difference(&form.g, &baseline.g);
        let f = ResidualReport::from_array(&form.f);
        if k == 0 {
            (e_dev, g_dev, f_mag) = (e, g, f);
        } else {
            e_dev = e_dev.merge(&e);
            g_dev = g_dev.merge(&g);
            f_mag = f_mag.merge(&f);
        }
        actions.push(action(&form, grid)?);
    }
    Ok(ThetaSweepReport {
        e_deviation: e_dev,
        g_deviation: g_dev,
        f_magnitude: f_mag,
        actions,
    })
}
